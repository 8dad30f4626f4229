use proptest::prelude::*;
use qcompat::io::{parse, to_text, MatrixFile, SymmetryFile};
use qcompat::linalg::{frobenius, sqrt_psd, Effect};
use qcompat::measure::{fidelity, intersection_dim};
use qcompat::preserver::{apply_symmetry, transition_prob, wigner_reconstruct};
use qcompat::sample::{random_density, random_pure, random_symmetry};
use qcompat::strength::{strength, strength_oracle, two_state_formula};
use qcompat::{Operator, PureStateMap};

fn dim_rank() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=6).prop_flat_map(|d| (Just(d), 1..=d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strength_is_in_unit_interval_and_matches_oracle((d, r) in dim_rank(), seed in any::<u64>()) {
        let a = random_density(d, r, seed).unwrap();
        let phi = random_pure(d, seed ^ 1);
        let s = strength(&a, &phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.value));
        prop_assert_eq!(s.value == 0.0, !s.in_range);
        let o = strength_oracle(&a, &phi, 1e-12).unwrap();
        prop_assert!((s.value - o).abs() <= 1e-7);
    }

    #[test]
    fn strength_scales_with_the_effect(d in 2usize..=5, seed in any::<u64>(), c in 0.05f64..1.0) {
        let a = random_density(d, d, seed).unwrap();
        let phi = random_pure(d, seed ^ 2);
        let t = Effect::new(a.matrix().scale(c)).unwrap();
        let (st, sa) = (strength(&t, &phi).unwrap().value, strength(&a, &phi).unwrap().value);
        prop_assert!((st - c * sa).abs() <= 1e-10);
    }

    #[test]
    fn symmetries_preserve_strength_and_transitions(
        (d, r) in dim_rank(),
        anti in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let s = random_symmetry(d, anti, seed);
        let a = random_density(d, r, seed ^ 3).unwrap();
        let (p, q) = (random_pure(d, seed ^ 4), random_pure(d, seed ^ 5));
        let sa = apply_symmetry(&s, &a).unwrap();
        let (sp, sq) = (s.apply_vector(&p).unwrap(), s.apply_vector(&q).unwrap());
        let before = strength(&a, &p).unwrap();
        let after = strength(&sa, &sp).unwrap();
        prop_assert_eq!(before.in_range, after.in_range);
        prop_assert!((before.value - after.value).abs() <= 1e-10);
        let t = transition_prob(&p, &q).unwrap();
        prop_assert!((t - transition_prob(&sp, &sq).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn intersection_dim_is_symmetric_and_bounded((d, ra) in dim_rank(), rb_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let rb = 1 + ((d - 1) as f64 * rb_frac) as usize;
        let a = random_density(d, ra, seed).unwrap();
        let b = random_density(d, rb, seed ^ 6).unwrap();
        let k = intersection_dim(&a, &b).unwrap();
        prop_assert_eq!(k, intersection_dim(&b, &a).unwrap());
        prop_assert!(k <= ra.min(rb));
        prop_assert!(k >= (ra + rb).saturating_sub(d));
    }

    #[test]
    fn square_root_squares_back((d, r) in dim_rank(), seed in any::<u64>()) {
        let a = random_density(d, r, seed).unwrap();
        let s = sqrt_psd(&a);
        prop_assert!(frobenius(&(&s * &s - a.matrix())) <= 1e-10);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded((d, r) in dim_rank(), seed in any::<u64>()) {
        let a = random_density(d, r, seed).unwrap();
        let b = random_density(d, 1 + seed as usize % d, seed ^ 7).unwrap();
        let (f, g) = (fidelity(&a, &b).unwrap(), fidelity(&b, &a).unwrap());
        prop_assert!((f - g).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn two_state_formula_decreases_between_endpoints(lambda in 0.01f64..0.49, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let mu = 1.0 - lambda;
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let (f_lo, f_hi) = (two_state_formula(lambda, mu, lo).unwrap(), two_state_formula(lambda, mu, hi).unwrap());
        prop_assert!(f_hi <= f_lo + 1e-15);
        prop_assert!(lambda - 1e-15 <= f_hi && f_lo <= mu + 1e-15);
    }

    #[test]
    fn wigner_round_trip(d in 2usize..=8, anti in any::<bool>(), seed in any::<u64>()) {
        let s = random_symmetry(d, anti, seed);
        let back = wigner_reconstruct(&PureStateMap::probes_of(&s).unwrap(), d, 1e-8).unwrap();
        prop_assert_eq!(back.is_antiunitary(), anti);
        prop_assert!(back.phase_overlap(&s).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn files_round_trip_exactly(d in 2usize..=6, anti in any::<bool>(), seed in any::<u64>()) {
        let a = random_density(d, 1 + seed as usize % d, seed).unwrap();
        let m = parse::<MatrixFile>("matrix", &to_text(&MatrixFile::from_matrix(a.matrix()))).unwrap().to_matrix().unwrap();
        prop_assert_eq!(&m, a.matrix());
        let s = random_symmetry(d, anti, seed);
        let back = parse::<SymmetryFile>("symmetry", &to_text(&SymmetryFile::from_symmetry(&s))).unwrap().to_symmetry().unwrap();
        prop_assert_eq!(back, s);
    }
}
