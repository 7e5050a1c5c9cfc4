mod common;

use agmc_core::agrule::{ag_verify, check_conclusion_monolithic, AgOptions, AgVerdict, Method};
use agmc_core::bench::{voting_task, VotingConfig};
use agmc_core::strategy::SearchBudget;
use common::random_case;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn proved_implies_conclusion(seed in 0u64..1_000_000) {
        let case = random_case(seed);
        let r = ag_verify(&case.task, &AgOptions::default()).unwrap();
        if r.verdict == AgVerdict::Proved {
            prop_assert!(check_conclusion_monolithic(&case.task, &SearchBudget::default()).unwrap());
        }
        let apprx = AgOptions { method: Method::Apprx, ..Default::default() };
        let r2 = ag_verify(&case.task, &apprx).unwrap();
        if r2.verdict == AgVerdict::Proved {
            prop_assert!(check_conclusion_monolithic(&case.task, &SearchBudget::default()).unwrap());
        }
    }

    #[test]
    fn premises_are_independent(n in 2usize..4) {
        let one = voting_task(VotingConfig::new(n));
        let mut both = one.clone();
        let other = voting_task(VotingConfig { n, designated: 2 });
        both.premises.push(other.premises[0].clone());
        let r1 = ag_verify(&one, &AgOptions::default()).unwrap();
        let r2 = ag_verify(&both, &AgOptions::default()).unwrap();
        let strip = |p: &agmc_core::agrule::PremiseReport| {
            let mut p = p.clone();
            p.local.elapsed_ms = 0;
            p.containment.elapsed_ms = 0;
            p
        };
        prop_assert_eq!(strip(&r1.premises[0]), strip(&r2.premises[0]));
        prop_assert_eq!(r2.verdict, AgVerdict::Proved);
    }
}
