//! Expected values here come from how the inputs are built (known isometries,
//! supports and inverses), not from the library's own spectral routines.

use nalgebra::linalg::SymmetricEigen;
use qcompat::linalg::DensityOperator;
use qcompat::measure::{example_measure, fidelity, intersection_dim, is_compatible};
use qcompat::sample::{rng_from_seed, sample_isometry, sample_pure_in, sample_unitary};
use qcompat::strength::{strength, strength_oracle, two_state_formula};
use qcompat::{ComplexMatrix, ComplexVector, MeasureConfig, Operator, PureState, C64};
use rand::Rng;

fn weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0))))
}

/// `V diag(values) V*` for an isometry `V`.
fn build(v: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    v * diag(values) * v.adjoint()
}

fn min_eig(m: &ComplexMatrix) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Square root of a PSD matrix via nalgebra's Hermitian eigensolver.
fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let e = SymmetricEigen::new((m + m.adjoint()).scale(0.5));
    let roots: Vec<f64> = e.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
    &e.eigenvectors * diag(&roots) * e.eigenvectors.adjoint()
}

fn fidelity_oracle(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let sx = psd_sqrt(x);
    psd_sqrt(&(&sx * y * &sx)).trace().re
}

#[test]
fn strength_from_constructed_support() {
    for seed in 0..200u64 {
        let mut rng = rng_from_seed(seed);
        let d = 2 + seed as usize % 5;
        let r = 1 + (seed as usize / 5) % d;
        let v = sample_isometry(&mut rng, d, r);
        let t: Vec<f64> = (0..r).map(|_| 0.05 + 0.95 * rng.random::<f64>()).collect();
        let a = DensityOperator::new(build(&v, &t).unscale(t.iter().sum())).unwrap();
        let scaled: Vec<f64> = t.iter().map(|x| x / t.iter().sum::<f64>()).collect();

        // in the support: phi = V c, strength = 1 / sum |c_i|^2 / t_i
        let phi = sample_pure_in(&mut rng, &v);
        let c = v.adjoint() * phi.vector();
        let expected = 1.0 / c.iter().zip(&scaled).map(|(ci, ti)| ci.norm_sqr() / ti).sum::<f64>();
        let s = strength(&a, &phi).unwrap();
        assert!(s.in_range, "seed {seed}");
        assert!((s.value - expected).abs() <= 1e-9 * expected.max(1.0), "seed {seed}: {} vs {expected}", s.value);

        // the defining inequality holds at the value and fails just above it
        assert!(min_eig(&(a.matrix() - phi.projection().scale(s.value))) >= -1e-10);
        assert!(min_eig(&(a.matrix() - phi.projection().scale(s.value + 1e-6))) < 0.0);

        if r < d {
            let generic = qcompat::sample::sample_pure(&mut rng, d);
            let s = strength(&a, &generic).unwrap();
            assert!(!s.in_range);
            assert_eq!(s.value, 0.0);
        }
    }
}

#[test]
fn diagonal_strength_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = PureState::from_real(&[h, h]).unwrap();

    let t = DensityOperator::diagonal(&[0.75, 0.25]).unwrap();
    let s = strength(&t, &phi).unwrap();
    assert!((s.value - 3.0 / 8.0).abs() < 1e-14);
    assert!((strength_oracle(&t, &phi, 1e-12).unwrap() - 3.0 / 8.0).abs() < 1e-10);

    let t = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
    let s = strength(&t, &phi).unwrap();
    assert_eq!(s.value, 0.0);
    assert!(!s.in_range);
    assert!(strength_oracle(&t, &phi, 1e-12).unwrap() < 1e-10);

    let half = DensityOperator::maximally_mixed(2).unwrap();
    assert!((strength_oracle(&half, &phi, 1e-10).unwrap() - 0.5).abs() <= 1e-10);
}

#[test]
fn two_state_examples() {
    assert!((two_state_formula(0.4, 0.6, 0.5).unwrap() - 0.48).abs() < 1e-15);

    // A = 0.4 P(e1) + 0.6 P(e2), r = (e1 + e2)/sqrt 2: 1 / (0.5/0.4 + 0.5/0.6) = 0.48
    let a = DensityOperator::diagonal(&[0.4, 0.6]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = PureState::from_real(&[h, h]).unwrap();
    assert!((strength(&a, &r).unwrap().value - 0.48).abs() < 1e-12);

    assert_eq!(two_state_formula(0.4, 0.6, 1.0).unwrap(), 0.4);
    assert_eq!(two_state_formula(0.4, 0.6, 0.0).unwrap(), 0.6);
    assert!(two_state_formula(0.6, 0.4, 0.5).is_err());
    assert!(two_state_formula(0.3, 0.6, 0.5).is_err());
}

#[test]
fn two_state_formula_against_constructed_states() {
    for seed in 0..100u64 {
        let mut rng = rng_from_seed(1000 + seed);
        let d = 2 + seed as usize % 4;
        let lambda = 0.05 + 0.4 * rng.random::<f64>();
        let mu = 1.0 - lambda;
        let pq = sample_isometry(&mut rng, d, 2);
        let a = DensityOperator::new(build(&pq, &[lambda, mu])).unwrap();
        // R = cos t P + e^{i s} sin t Q has tr PR = cos^2 t
        let (t, s) = (rng.random::<f64>() * std::f64::consts::FRAC_PI_2, rng.random::<f64>() * 6.0);
        let v = pq.column(0) * C64::new(t.cos(), 0.0) + pq.column(1) * C64::from_polar(t.sin(), s);
        let r = PureState::normalized(v).unwrap();
        let overlap = t.cos().powi(2);
        let expected = lambda * mu / ((mu - lambda) * overlap + lambda);
        assert!((two_state_formula(lambda, mu, overlap).unwrap() - expected).abs() < 1e-14);
        assert!((strength(&a, &r).unwrap().value - expected).abs() < 1e-10, "seed {seed}");
    }
}

#[test]
fn intersection_dimension_of_constructed_supports() {
    let a = DensityOperator::diagonal(&[0.5, 0.5, 0.0]).unwrap();
    let b = DensityOperator::diagonal(&[0.0, 0.5, 0.5]).unwrap();
    assert_eq!(intersection_dim(&a, &b).unwrap(), 1);
    assert!(is_compatible(&a, &b).unwrap());

    for seed in 0..60u64 {
        let mut rng = rng_from_seed(2000 + seed);
        let d = 3 + seed as usize % 4;
        let k = seed as usize % 3;
        let extra_a = 1 + (seed as usize / 3) % (d - k).clamp(1, 2);
        let extra_b = (d - k - extra_a).min(1 + seed as usize % 2);
        if k + extra_a + extra_b > d || k + extra_a == 0 || k + extra_b == 0 {
            continue;
        }
        // columns of one unitary: k shared, the rest private to A or B
        let u = sample_unitary(&mut rng, d);
        let cols_a: Vec<_> = (0..k + extra_a).map(|j| u.column(j).into_owned()).collect();
        let cols_b: Vec<_> =
            (0..k).chain(k + extra_a..k + extra_a + extra_b).map(|j| u.column(j).into_owned()).collect();
        // mix the columns so the supports are not given in a shared basis
        let wa = ComplexMatrix::from_columns(&cols_a) * sample_unitary(&mut rng, cols_a.len());
        let wb = ComplexMatrix::from_columns(&cols_b) * sample_unitary(&mut rng, cols_b.len());
        let a = DensityOperator::new(build(&wa, &weights(&mut rng, cols_a.len()))).unwrap();
        let b = DensityOperator::new(build(&wb, &weights(&mut rng, cols_b.len()))).unwrap();
        assert_eq!(intersection_dim(&a, &b).unwrap(), k, "seed {seed}, d {d}");
        assert_eq!(is_compatible(&a, &b).unwrap(), k > 0);
    }
}

#[test]
fn generic_supports_meet_by_dimension_count() {
    for seed in 0..60u64 {
        let mut rng = rng_from_seed(3000 + seed);
        let d = 2 + seed as usize % 5;
        let (ra, rb) = (1 + seed as usize % d, 1 + (seed as usize / 7) % d);
        let a = DensityOperator::new(build(&sample_isometry(&mut rng, d, ra), &weights(&mut rng, ra))).unwrap();
        let b = DensityOperator::new(build(&sample_isometry(&mut rng, d, rb), &weights(&mut rng, rb))).unwrap();
        assert_eq!(intersection_dim(&a, &b).unwrap(), (ra + rb).saturating_sub(d), "seed {seed}");
    }
}

#[test]
fn fidelity_reductions() {
    for seed in 0..40u64 {
        let mut rng = rng_from_seed(4000 + seed);
        let d = 2 + seed as usize % 5;
        let r = 1 + seed as usize % d;
        let a = DensityOperator::new(build(&sample_isometry(&mut rng, d, r), &weights(&mut rng, r))).unwrap();
        let phi = qcompat::sample::sample_pure(&mut rng, d);
        // F(A, P) = sqrt <phi, A phi>
        let expected = phi.vector().dotc(&(a.matrix() * phi.vector())).re.sqrt();
        let got = fidelity(&a, &phi.to_density()).unwrap();
        assert!((got - expected).abs() < 1e-9, "seed {seed}: {got} vs {expected}");
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);

        // commuting states: sum_i sqrt(a_i b_i)
        let u = sample_unitary(&mut rng, d);
        let (x, y) = (weights(&mut rng, d), weights(&mut rng, d));
        let ca = DensityOperator::new(build(&u, &x)).unwrap();
        let cb = DensityOperator::new(build(&u, &y)).unwrap();
        let expected: f64 = x.iter().zip(&y).map(|(p, q)| (p * q).sqrt()).sum();
        assert!((fidelity(&ca, &cb).unwrap() - expected).abs() < 1e-9);
    }
}

/// Checks the certificate invariants and returns the recomputed value.
fn check_certificate(a: &DensityOperator, b: &DensityOperator, cfg: &MeasureConfig) -> f64 {
    let r = example_measure(a, b, cfg).unwrap();
    let (da, db) = (&r.decomposition_a, &r.decomposition_b);
    assert_eq!(da.pures.len(), db.pures.len());
    let mut value = 0.0;
    for n in 0..da.pures.len() {
        assert!(da.weights[n] >= 0.0 && db.weights[n] >= 0.0);
        assert!(da.pures[n].distance(&db.pures[n]) < 1e-12, "pure lists differ at {n}");
        value += (da.weights[n] * db.weights[n]).sqrt();
    }
    assert!((value - r.value).abs() <= 1e-10, "{value} vs {}", r.value);
    assert!((da.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
    assert!((db.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
    // reconstruction from scratch
    let mut sa = ComplexMatrix::zeros(a.dim(), a.dim());
    let mut sb = sa.clone();
    for n in 0..da.pures.len() {
        let v = da.pures[n].vector();
        let p = v * v.adjoint();
        sa += p.scale(da.weights[n]);
        sb += p.scale(db.weights[n]);
    }
    assert!((sa - a.matrix()).norm().max((sb - b.matrix()).norm()) <= cfg.feas_tol);
    r.value
}

#[test]
fn measure_below_shorted_fidelity() {
    let cfg = MeasureConfig { restarts: 6, ..MeasureConfig::with_seed(5) };
    for seed in 0..12u64 {
        let mut rng = rng_from_seed(5000 + seed);
        let d = 3 + seed as usize % 2;
        let k = 1 + seed as usize % 2;
        // A on span(U[0..k] + one private column), B on span(U[0..k] + another)
        let u = sample_unitary(&mut rng, d);
        let cols = |idx: &[usize]| ComplexMatrix::from_columns(&idx.iter().map(|&j| u.column(j).into_owned()).collect::<Vec<_>>());
        let shared: Vec<usize> = (0..k).collect();
        let ia: Vec<usize> = shared.iter().copied().chain([k]).collect();
        let ib: Vec<usize> = shared.iter().copied().chain([k + 1]).collect();
        let wa = cols(&ia) * sample_unitary(&mut rng, k + 1);
        let wb = cols(&ib) * sample_unitary(&mut rng, k + 1);
        let (ta, tb) = (weights(&mut rng, k + 1), weights(&mut rng, k + 1));
        let a = DensityOperator::new(build(&wa, &ta)).unwrap();
        let b = DensityOperator::new(build(&wb, &tb)).unwrap();

        // shorted operators on S = span(U[0..k]): (V* A^+ V)^{-1}
        let v = cols(&shared);
        let inv = |w: &ComplexMatrix, t: &[f64]| {
            let pinv = build(w, &t.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
            (v.adjoint() * pinv * &v).try_inverse().unwrap()
        };
        let bound = fidelity_oracle(&inv(&wa, &ta), &inv(&wb, &tb));
        let value = check_certificate(&a, &b, &cfg);
        assert!(value <= bound + 1e-9, "seed {seed}: {value} > {bound}");
        assert!(bound <= fidelity_oracle(a.matrix(), b.matrix()) + 1e-9);
        assert!(value > 0.0);
    }
}

#[test]
fn commuting_states_reach_shared_basis_value() {
    let cfg = MeasureConfig { restarts: 4, ..MeasureConfig::with_seed(2) };
    for seed in 0..8u64 {
        let mut rng = rng_from_seed(6000 + seed);
        let d = 2 + seed as usize % 3;
        let u = sample_unitary(&mut rng, d);
        let (x, y) = (weights(&mut rng, d), weights(&mut rng, d));
        let a = DensityOperator::new(build(&u, &x)).unwrap();
        let b = DensityOperator::new(build(&u, &y)).unwrap();
        let floor: f64 = x.iter().zip(&y).map(|(p, q)| (p * q).sqrt()).sum();
        let value = check_certificate(&a, &b, &cfg);
        assert!(value >= floor - 1e-7, "seed {seed}: {value} < {floor}");
        assert!(value <= 1.0 + 1e-12);
    }
}

#[test]
fn pure_argument_certificate() {
    let cfg = MeasureConfig::with_seed(1);
    for seed in 0..6u64 {
        let mut rng = rng_from_seed(7000 + seed);
        let d = 2 + seed as usize % 2;
        let v = sample_isometry(&mut rng, d, d);
        let t = weights(&mut rng, d);
        let a = DensityOperator::new(build(&v, &t)).unwrap();
        let phi = sample_pure_in(&mut rng, &v);
        let c = v.adjoint() * phi.vector();
        let expected = 1.0 / c.iter().zip(&t).map(|(ci, ti)| ci.norm_sqr() / ti).sum::<f64>();
        let value = check_certificate(&a, &phi.to_density(), &cfg);
        assert!(value * value <= expected + 1e-9);
        assert!(value * value >= expected - 2e-3);
    }
}
