use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reusable_alloc::benchmarks::{
    clairvoyant_dp, evaluate_policy, offline_bmatching, run_greedy, run_rba, DpLimits, DpPolicy,
};
use reusable_alloc::harness::generate::{greedy_tight, random_dense, GeneratorParams};
use reusable_alloc::harness::random::random_tiny_instance;
use reusable_alloc::model::draw_sample_path;
use reusable_alloc::stats::Summary;

#[test]
fn optimum_dominates_exactly_evaluated_baselines() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let limits = DpLimits::default();
    for _ in 0..150 {
        let inst = random_tiny_instance(&mut rng, 8, 6, 1).unwrap();
        let opt = clairvoyant_dp(&inst).unwrap();
        let greedy = evaluate_policy(&inst, DpPolicy::Greedy, &limits).unwrap();
        let ib = evaluate_policy(&inst, DpPolicy::Ib, &limits).unwrap();
        assert!(greedy <= opt + 1e-9 && ib <= opt + 1e-9);
        assert!(greedy >= 0.5 * opt - 1e-9, "greedy {greedy} opt {opt}");
    }
}

#[test]
fn simulated_greedy_agrees_with_its_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..10 {
        let inst = random_tiny_instance(&mut rng, 8, 6, 1).unwrap();
        let exact = evaluate_policy(&inst, DpPolicy::Greedy, &DpLimits::default()).unwrap();
        let s =
            Summary::of((0..20_000u64).map(|s| run_greedy(&inst, &draw_sample_path(&inst, s)).unwrap().total_reward));
        assert!(
            (s.mean - exact).abs() <= 3.5 * s.std_err + 1e-9,
            "case {case}: {exact} vs {s:?}"
        );
    }
}

#[test]
fn greedy_tight_counts() {
    for c in 1..=3u32 {
        let inst = greedy_tight(&GeneratorParams::default().set("c", c).set("r", 1.5)).unwrap();
        let opt = clairvoyant_dp(&inst).unwrap();
        assert_eq!(opt, 2.0 * c as f64 * 1.5);
        assert_eq!(offline_bmatching(&inst).unwrap(), opt);
        let greedy = run_greedy(&inst, &draw_sample_path(&inst, 0)).unwrap().total_reward;
        assert_eq!(greedy, c as f64 * 1.5);
    }
}

#[test]
fn rba_keeps_inventory_invariants_on_deterministic_usage() {
    let inst = random_dense(
        &GeneratorParams::default()
            .set("dist", "deterministic")
            .set("c", 3)
            .set("t", 60)
            .set("seed", 8),
    )
    .unwrap();
    for seed in 0..1000 {
        let rec = run_rba(&inst, &draw_sample_path(&inst, seed)).unwrap();
        rec.check(&inst).unwrap();
    }
}
