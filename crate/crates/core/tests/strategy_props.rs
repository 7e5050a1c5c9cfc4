mod common;

use agmc_core::compose::{compose, explore, Budget};
use agmc_core::strategy::{
    dfs_synthesize, prune, trace_implements, verify_universal, Fairness, SearchBudget,
};
use common::{enumerate_winning, graph_lassos, random_case, random_module, rng};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn synthesis_matches_enumeration(seed in 0u64..1_000_000) {
        let case = random_case(seed);
        let c = case.monolithic();
        let agents = [case.agent().to_string()];
        let out = dfs_synthesize(&c, &agents, case.guarantee(), None, &SearchBudget::default()).unwrap();
        let oracle = enumerate_winning(&c, &agents, case.guarantee(), None);
        prop_assert_eq!(out.strategy.is_some(), oracle.is_some());
        if let Some(s) = out.strategy {
            prop_assert!(verify_universal(&c, Some(&s), case.guarantee(), None, &Budget::unlimited()).unwrap().holds);
        }
    }

    #[test]
    fn fair_synthesis_matches_enumeration(seed in 0u64..1_000_000) {
        let case = random_case(seed);
        let mut modules = vec![case.task.system[0].clone(), case.assumption().module.clone()];
        modules[1].name = "A1".into();
        let c = compose(&modules).unwrap();
        let agents = [case.agent().to_string()];
        let fair = Fairness { component: "A1".into(), accepting: case.assumption().accepting.clone() };
        let out = dfs_synthesize(&c, &agents, case.guarantee(), Some(&fair), &SearchBudget::default()).unwrap();
        let oracle = enumerate_winning(&c, &agents, case.guarantee(), Some(&fair));
        prop_assert_eq!(out.strategy.is_some(), oracle.is_some());
        if let Some(s) = out.strategy {
            prop_assert!(verify_universal(&c, Some(&s), case.guarantee(), Some(&fair), &Budget::unlimited()).unwrap().holds);
        }
    }

    #[test]
    fn pruned_traces_are_implementing_traces(seed in 0u64..1_000_000) {
        let mut r = rng(seed);
        let d = common::domain(2);
        let x = agmc_core::kernel::Variable::new("x", d.clone());
        let y = agmc_core::kernel::Variable::new("y", d);
        let (na, nb) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let a = random_module(&mut r, "A", vec![x.clone()], vec![y.clone()], na);
        let b = random_module(&mut r, "B", vec![y], vec![x], nb);
        let c = compose(&[a, b]).unwrap();
        let strategies = agmc_core::strategy::all_strategies(&c, &["A".to_string()]).unwrap();
        let s = &strategies[r.gen_range(0..strategies.len())];
        let p = prune(&c, s).unwrap();
        let full = explore(&c, &[0], &Budget::unlimited()).unwrap();
        for lasso in graph_lassos(&full, 6, 20_000) {
            let codes = lasso.map(|&v| full.codes[v]);
            let step_ok = |i: usize| {
                let (v, w) = (*lasso.folded(i), *lasso.folded(lasso.next(i)));
                v == w || full.edges(v).any(|e| full.target(e) == w && p.allows(&full, v, e))
            };
            let pruned = (0..lasso.positions()).all(step_ok);
            prop_assert_eq!(pruned, trace_implements(&c, &codes, &s.members[0]).unwrap());
        }
    }
}
