use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reusable_alloc::assortment::{
    check_collection, probability_match, probability_match_generic, run_astgalg, ChoiceModel,
};
use reusable_alloc::guide::run_galg;
use reusable_alloc::harness::generate::{assortment_mnl, random_dense, GeneratorParams};
use reusable_alloc::harness::random::{random_pmatch_triple, single_choice_twin};

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn probability_match_conditions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (set, model, targets) = random_pmatch_triple(&mut rng, 8).unwrap();
        let c = probability_match(&set, &model, &targets).unwrap();
        prop_assert!(c.len() <= set.len());
        if let Err(e) = check_collection(&set, &model, &targets, &c, 1e-9) {
            prop_assert!(false, "{}", e);
        }
        if matches!(model, ChoiceModel::Mnl(_)) {
            let g = probability_match_generic(&set, &model, &targets).unwrap();
            prop_assert_eq!(&g.sets, &c.sets);
            for (a, b) in g.weights.iter().zip(&c.weights) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn plans_are_consistent(seed in any::<u64>(), c in 1u32..6, k in 0usize..3) {
        let params = GeneratorParams::default()
            .set("seed", seed)
            .set("c", c)
            .set("k", k)
            .set("t", 30)
            .set("dist", "mixed");
        let inst = assortment_mnl(&params).unwrap();
        let (plan, reward) = run_astgalg(&inst).unwrap();
        if let Err(e) = plan.check_consistency(&inst, 1e-9) {
            prop_assert!(false, "{}", e);
        }
        prop_assert!((plan.reward(&inst) - reward).abs() <= 1e-12);
        for (row, arrival) in plan.rows.iter().zip(inst.arrivals()) {
            let ctx = arrival.choice_context().unwrap();
            for (set, y) in &row.offers {
                prop_assert!(*y > 0.0);
                prop_assert!(ctx.is_feasible(set));
            }
        }
    }

    #[test]
    fn single_choice_assortments_reduce_to_matching(seed in any::<u64>(), c in 1u32..5) {
        let params = GeneratorParams::default()
            .set("seed", seed)
            .set("c", c)
            .set("t", 30)
            .set("n", 4)
            .set("dist", "mixed");
        let matching = random_dense(&params).unwrap();
        let twin = single_choice_twin(&matching).unwrap();
        let (guide, galg) = run_galg(&matching).unwrap();
        let (plan, astgalg) = run_astgalg(&twin).unwrap();
        prop_assert!((galg - astgalg).abs() <= 1e-9, "{} vs {}", galg, astgalg);
        for (g, p) in guide.rows.iter().zip(&plan.rows) {
            for &(i, x) in &g.x {
                prop_assert!((p.consumption(i) - x).abs() <= 1e-9);
            }
        }
    }
}
