use boolflow::harness::{verify_theorem_with, SweepConfig};
use boolflow::trace::{check_consistency, check_strong_consistency, strong_implies_onestep_audit};
use boolflow::{
    integrate, judge, ring_negation_family, state_box, ConsistencyLevel, ContinuousConversion, FlowKind, FlowSpec, IntegrationOptions,
    NetworkSpec, Scheme,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NETWORKS: [&[&str]; 4] = [&["!s2", "s1"], &["!s3", "s1", "s2"], &["s2 & !s3", "s3 | s1", "!s1"], &["s1 ^ s2", "s1 & s2"]];

fn network() -> impl Strategy<Value = (FlowSpec, Vec<f64>)> {
    let (lo, hi) = state_box();
    (0..NETWORKS.len(), prop::sample::select(vec![Scheme::W, Scheme::A]), prop::sample::select(vec![FlowKind::D1, FlowKind::D2]))
        .prop_flat_map(move |(k, scheme, kind)| {
            let formulas = NETWORKS[k];
            let spec = FlowSpec::from_network(&NetworkSpec::from_formulas(formulas.len(), formulas).unwrap(), scheme, kind, None).unwrap();
            let dim = spec.dim();
            (Just(spec), prop::collection::vec(lo..=hi, dim))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interior_points_agree_with_the_midpoint((spec, x0) in network(), seed in any::<u64>()) {
        let traj = integrate(&spec, &x0, &IntegrationOptions::default().with_t_end(30.0)).unwrap();
        let indices: Vec<usize> = (0..spec.n()).collect();
        if let (_, Some(seq)) = judge(&traj, &indices, spec.function()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            prop_assert_eq!(seq.check_interior_sampling(&traj, 3, &mut rng), None);
        }
    }

    #[test]
    fn strong_verdicts_pass_the_weaker_checks((spec, x0) in network()) {
        let traj = integrate(&spec, &x0, &IntegrationOptions::default().with_t_end(30.0)).unwrap();
        let indices: Vec<usize> = (0..spec.n()).collect();
        let (verdict, seq) = judge(&traj, &indices, spec.function());
        if verdict.level == ConsistencyLevel::StronglyConsistent {
            let seq = seq.unwrap();
            prop_assert!(check_strong_consistency(&seq, spec.function()).is_strong());
            prop_assert!(check_consistency(&seq, spec.function()).is_consistent());
            prop_assert_eq!(strong_implies_onestep_audit(&seq, spec.function()), None);
        }
    }

    #[test]
    fn verdicts_are_deterministic((spec, x0) in network()) {
        let opts = IntegrationOptions::default().with_t_end(20.0);
        let indices: Vec<usize> = (0..spec.n()).collect();
        let a = integrate(&spec, &x0, &opts).unwrap();
        let b = integrate(&spec, &x0, &opts).unwrap();
        let (va, sa) = judge(&a, &indices, spec.function());
        let (vb, sb) = judge(&b, &indices, spec.function());
        let (vc, _) = judge(&a, &indices, spec.function());
        prop_assert_eq!(&va, &vb);
        prop_assert_eq!(&va, &vc);
        prop_assert_eq!(sa, sb);
    }
}

#[test]
fn separated_time_scales_keep_switches_apart() {
    let f = ring_negation_family(3, &[0]).unwrap();
    let conv = ContinuousConversion::from_function(&f, Scheme::W).unwrap();
    let gamma = [1.0, 2.0, 1.5];
    let cfg = SweepConfig { samples_per_state: 1, extra_switches: 3, horizon_cap: 120.0, seed: 3, ..SweepConfig::default() };
    let result = verify_theorem_with(&f, &conv, &gamma, &[], &cfg).unwrap();
    let floor = 2.0 / (5.0 * 2.0);
    assert!(result.theorem_reproduced());
    for o in &result.outcomes {
        assert!(o.switches >= 2, "{o:?}");
        if let Some(gap) = o.min_same_coord_gap {
            assert!(gap > floor, "state {}: gap {gap}", o.state);
        }
    }
    assert!(result.min_same_coord_gap().is_some());
}
