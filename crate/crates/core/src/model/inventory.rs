use super::{Instance, SamplePath};

/// Physical units of every resource during a stochastic run.
///
/// A unit put in use at `s` for duration `d` is free at time `a` iff
/// `d <= a - s`, so returns due at an arrival epoch are processed before that
/// arrival is served.
#[derive(Debug, Clone)]
pub struct InventoryState {
    /// `(start, duration)` of each unit's current or last use.
    usage: Vec<Vec<(f64, f64)>>,
    draws_used: Vec<Vec<usize>>,
}

/// Whether a use that began at `start` and lasts `duration` is over at `now`.
pub fn has_returned(start: f64, duration: f64, now: f64) -> bool {
    duration <= now - start
}

impl InventoryState {
    pub fn new(instance: &Instance) -> Self {
        let usage = instance
            .resources()
            .iter()
            .map(|r| vec![(0.0, f64::NEG_INFINITY); r.capacity as usize])
            .collect::<Vec<_>>();
        let draws_used = usage.iter().map(|u| vec![0; u.len()]).collect();
        InventoryState { usage, draws_used }
    }

    pub fn is_free(&self, i: usize, k: usize, now: f64) -> bool {
        let (s, d) = self.usage[i][k];
        has_returned(s, d, now)
    }

    pub fn available(&self, i: usize, now: f64) -> usize {
        self.usage[i].iter().filter(|&&(s, d)| has_returned(s, d, now)).count()
    }

    pub fn lowest_free(&self, i: usize, now: f64) -> Option<usize> {
        self.usage[i].iter().position(|&(s, d)| has_returned(s, d, now))
    }

    pub fn highest_free(&self, i: usize, now: f64) -> Option<usize> {
        self.usage[i].iter().rposition(|&(s, d)| has_returned(s, d, now))
    }

    /// Puts unit `k` of resource `i` in use at `now`, reading its next pre-drawn duration.
    pub fn commit(&mut self, i: usize, k: usize, now: f64, path: &SamplePath) -> f64 {
        debug_assert!(self.is_free(i, k, now));
        let n = self.draws_used[i][k];
        let d = path.duration(i, k, n);
        self.draws_used[i][k] = n + 1;
        self.usage[i][k] = (now, d);
        d
    }

    pub fn snapshot(&self, now: f64) -> Vec<u32> {
        (0..self.usage.len()).map(|i| self.available(i, now) as u32).collect()
    }
}
