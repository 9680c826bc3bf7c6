//! Dual-style certificate built from the fractional guide.
//!
//! `lambda_t = sum_i r_i sum_k y_i(k,t) (1 - g(k/c_i))` and
//! `theta_i = e^{1/c_i} sum_t r_i sum_k y_i(k,t) g(k/c_i)`. By construction
//! `sum_t lambda_t + sum_i e^{-1/c_i} theta_i` is exactly the guide's reward.

use serde::Serialize;

use crate::guide::{exp_tradeoff, UnitShare};
use crate::model::{Instance, RunRecord};
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateValues {
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    /// `theta_it`, indexed `[i][t]`.
    pub theta_it: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
}

impl CertificateValues {
    /// `sum_t lambda_t + sum_i e^{-1/c_i} theta_i`.
    pub fn identity_total(&self, instance: &Instance) -> f64 {
        let lambda: f64 = self.lambda.iter().sum();
        let theta: f64 = self
            .theta
            .iter()
            .zip(instance.resources())
            .map(|(th, r)| (-1.0 / r.capacity as f64).exp() * th)
            .sum();
        lambda + theta
    }
}

/// Certificate values from per-arrival unit shares (a matching guide's
/// `row.units` or an assortment plan's `unit_rows()`).
pub fn certificate_values(instance: &Instance, rows: &[Vec<UnitShare>]) -> CertificateValues {
    let n = instance.resources().len();
    let mut lambda = vec![0.0; rows.len()];
    let mut theta_it = vec![vec![0.0; rows.len()]; n];
    for (t, units) in rows.iter().enumerate() {
        for u in units {
            let r = &instance.resources()[u.resource];
            let g = exp_tradeoff((u.unit + 1) as f64 / r.capacity as f64);
            lambda[t] += r.reward * u.amount * (1.0 - g);
            theta_it[u.resource][t] += r.reward * u.amount * g;
        }
    }
    let theta = theta_it
        .iter()
        .zip(instance.resources())
        .map(|(row, r)| (1.0 / r.capacity as f64).exp() * row.iter().sum::<f64>())
        .collect();
    CertificateValues {
        lambda,
        theta,
        theta_it,
        alpha: 1.0 - (-1.0f64).exp(),
        beta: (1.0 / instance.c_min().max(1) as f64).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceSlack {
    pub resource: usize,
    /// Mean of `sum_{t in O(i)} lambda_t - alpha r_i |O(i)|` over the paths.
    pub mean_lambda_gap: f64,
    pub std_err: f64,
    pub theta: f64,
    /// `mean_lambda_gap + theta`; the condition asks for `>= 0`.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub guide_reward: f64,
    pub identity_total: f64,
    pub identity_holds: bool,
    pub resources: Vec<ResourceSlack>,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.identity_holds && self.resources.iter().all(|r| r.holds)
    }
}

/// Checks the identity to `1e-9` and, per resource, the averaged condition
/// `E[sum_{t in O(i)} lambda_t] + theta_i >= alpha r_i OPT_i` with `3 sigma`
/// Monte Carlo slack over `opt_paths`.
pub fn certificate_check(instance: &Instance, rows: &[Vec<UnitShare>], opt_paths: &[RunRecord]) -> CertificateReport {
    let cert = certificate_values(instance, rows);
    let guide_reward: f64 = rows
        .iter()
        .flatten()
        .map(|u| instance.resources()[u.resource].reward * u.amount)
        .sum();
    let identity_total = cert.identity_total(instance);
    let resources = instance
        .resources()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let gaps = opt_paths.iter().map(|run| {
                let served = run.served_arrivals(i);
                served.iter().map(|&t| cert.lambda[t]).sum::<f64>() - cert.alpha * r.reward * served.len() as f64
            });
            let s = if opt_paths.is_empty() {
                Summary::default()
            } else {
                Summary::of(gaps)
            };
            let slack = s.mean + cert.theta[i];
            ResourceSlack {
                resource: i,
                mean_lambda_gap: s.mean,
                std_err: s.std_err,
                theta: cert.theta[i],
                slack,
                holds: slack >= -3.0 * s.std_err - 1e-9,
            }
        })
        .collect();
    CertificateReport {
        guide_reward,
        identity_total,
        identity_holds: (identity_total - guide_reward).abs() <= 1e-9,
        resources,
    }
}
