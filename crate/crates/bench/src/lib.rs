//! Workload builders shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reusable_alloc::assortment::ChoiceModel;
use reusable_alloc::harness::generate::{assortment_mnl, random_dense};
use reusable_alloc::harness::random::{random_pmatch_triple, random_tiny_instance};
use reusable_alloc::harness::GeneratorParams;
use reusable_alloc::Instance;

/// Dense matching instance with `t` arrivals over `n` resources of capacity `c`.
pub fn dense(n: usize, t: usize, c: u32, dist: &str) -> Instance {
    let params = GeneratorParams::default()
        .set("n", n)
        .set("t", t)
        .set("c", c)
        .set("rate", 4)
        .set("dist", dist)
        .set("seed", 11);
    random_dense(&params).expect("valid parameters")
}

pub fn assortment(n: usize, t: usize, c: u32, k: usize) -> Instance {
    let params = GeneratorParams::default()
        .set("n", n)
        .set("t", t)
        .set("c", c)
        .set("k", k)
        .set("seed", 11);
    assortment_mnl(&params).expect("valid parameters")
}

pub fn pmatch_cases(count: usize, max_items: usize) -> Vec<(Vec<usize>, ChoiceModel, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..count)
        .map(|_| random_pmatch_triple(&mut rng, max_items).expect("valid triple"))
        .collect()
}

/// Largest instances the exact solver accepts by default.
pub fn tiny(count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..count)
        .map(|_| random_tiny_instance(&mut rng, 8, 6, 2).expect("valid instance"))
        .collect()
}
