use boolflow::{parse_formula, to_anf, BooleanFunction, BooleanState};
use proptest::prelude::*;

fn function() -> impl Strategy<Value = BooleanFunction> {
    (1usize..=4)
        .prop_flat_map(|n| prop::collection::vec(0..1u64 << n, 1 << n).prop_map(move |t| BooleanFunction::from_table(n, t).unwrap()))
}

fn column() -> impl Strategy<Value = (usize, Vec<bool>)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(any::<bool>(), 1 << n)))
}

fn permute(s: &BooleanState, perm: &[usize]) -> BooleanState {
    let bits = s.to_bits();
    BooleanState::from_bits(&perm.iter().map(|&p| bits[p]).collect::<Vec<_>>())
}

proptest! {
    #[test]
    fn derrida_slope_ignores_coordinate_labels(f in function(), seed in any::<prop::sample::Index>()) {
        let n = f.dim();
        let mut perm: Vec<usize> = (0..n).collect();
        // a rotation by a random amount plus a swap covers the small groups well enough
        perm.rotate_left(seed.index(n));
        if n > 1 {
            perm.swap(0, 1);
        }
        let mut inverse = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let relabeled = BooleanFunction::from_fn(n, |s| permute(&f.step(&permute(s, &inverse)).unwrap(), &perm)).unwrap();
        prop_assert_eq!(f.derrida_slope(), relabeled.derrida_slope());
    }

    #[test]
    fn one_stepping_implies_monotone_stepping(f in function()) {
        for s in f.states() {
            let r = f.stepping(Some(&s)).unwrap();
            prop_assert!(!r.is_one_stepping() || r.is_monotone_stepping());
        }
    }

    #[test]
    fn anf_round_trips((n, col) in column()) {
        let anf = to_anf(n, &col);
        prop_assert_eq!(anf.to_ast().column(n), col.clone());
        let reparsed = parse_formula(&anf.to_string(), n).unwrap();
        prop_assert_eq!(reparsed.column(n), col);
    }

    #[test]
    fn anf_is_unique((n, mut col) in column(), flip in any::<prop::sample::Index>()) {
        let before = to_anf(n, &col);
        let k = flip.index(col.len());
        col[k] = !col[k];
        let after = to_anf(n, &col);
        prop_assert_ne!(before.terms(), after.terms());
    }
}
