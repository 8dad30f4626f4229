//! Transforms that are not symmetries, used to check that verification
//! rejects them. Most preserve spectra, purity or the action on part of the
//! probe set, so only a combination of checks catches them.

use crate::error::Result;
use crate::linalg::{hermitize, min_eigenvalue, ComplexMatrix, DensityOperator, Operator, PureState, Spectrum, C64};
use crate::preserver::verify::StateTransform;
use crate::preserver::wigner::{probe_states, ProbeKind, INPUT_MATCH_TOL};
use crate::preserver::{apply_symmetry, SymmetryOp, TWO_LEVEL_WEIGHTS};
use crate::sample::{derive_seed, rng_from_seed, sample_symmetry, sample_unitary, gaussian_vector};

fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

/// `A -> S(V_A A V_A*)` where `V_A = exp(i theta(A) H)` and `theta` depends on
/// the expectation of a fixed observable. Spectra are kept, transition
/// probabilities are not.
pub struct StateDependentRotation {
    pub base: SymmetryOp,
    pub generator: Spectrum,
    pub observable: ComplexMatrix,
}

impl StateTransform for StateDependentRotation {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        let theta = 2.5 * (self.observable.clone() * a.matrix()).trace().re;
        let d = a.dim();
        let e = self.generator.vectors();
        let phases = ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j { C64::from_polar(1.0, theta * self.generator.values()[i]) } else { C64::new(0.0, 0.0) }
        });
        let v = e * phases * e.adjoint();
        let rotated = DensityOperator::new(hermitize(&(&v * a.matrix() * v.adjoint())))?;
        apply_symmetry(&self.base, &rotated)
    }
}

/// Swaps the two eigenvalues of states with spectrum `{0.6, 0.4}`.
pub struct TwoLevelSwap {
    pub base: SymmetryOp,
}

impl StateTransform for TwoLevelSwap {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        let (lo, hi) = TWO_LEVEL_WEIGHTS;
        let values = a.eigenvalues();
        let target = if a.numerical_rank() == 2 && (values[0] - hi).abs() < 1e-9 && (values[1] - lo).abs() < 1e-9 {
            let v = a.eigenvectors();
            let cols = ComplexMatrix::from_columns(&[v.column(0).into_owned(), v.column(1).into_owned()]);
            DensityOperator::from_spectrum(&[lo, hi], &cols)?
        } else {
            a.clone()
        };
        apply_symmetry(&self.base, &target)
    }
}

/// Conjugates mixed states only; pure states go through `base` unchanged.
pub struct MixedOnlyConjugation {
    pub base: SymmetryOp,
}

impl StateTransform for MixedOnlyConjugation {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        if a.numerical_rank() >= 2 {
            apply_symmetry(&self.base, &DensityOperator::new(conj(a.matrix()))?)
        } else {
            apply_symmetry(&self.base, a)
        }
    }
}

/// `A -> S(A^2 / tr A^2)`: fixes every pure state, distorts mixed ones.
pub struct PuritySharpening {
    pub base: SymmetryOp,
}

impl StateTransform for PuritySharpening {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        let sq = a.matrix() * a.matrix();
        let t = sq.trace().re;
        apply_symmetry(&self.base, &DensityOperator::new(hermitize(&sq.unscale(t)))?)
    }
}

/// `A -> (1 - p) S(A) + p I/d`.
pub struct Depolarizing {
    pub base: SymmetryOp,
    pub p: f64,
}

impl StateTransform for Depolarizing {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        let d = a.dim();
        let moved = apply_symmetry(&self.base, a)?;
        let mixed = moved.matrix().scale(1.0 - self.p) + ComplexMatrix::identity(d, d).scale(self.p / d as f64);
        DensityOperator::new(mixed)
    }
}

/// Acts as `base` except that one probe state is sent to the image of a
/// phase-shifted copy of itself.
pub struct PhaseBrokenProbe {
    pub base: SymmetryOp,
    pub input: PureState,
    pub replacement: PureState,
}

impl StateTransform for PhaseBrokenProbe {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        if a.is_pure() && a.top_eigenvector().distance(&self.input) <= INPUT_MATCH_TOL {
            return apply_symmetry(&self.base, &self.replacement.to_density());
        }
        apply_symmetry(&self.base, a)
    }
}

/// Transpose on the second tensor factor of `C^2 (x) C^m`, applied when the
/// result is still a state; otherwise the state is left unchanged.
pub struct PartialTranspose {
    pub base: SymmetryOp,
}

impl StateTransform for PartialTranspose {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        let d = a.dim();
        let m = d / 2;
        let src = a.matrix();
        let pt = ComplexMatrix::from_fn(d, d, |r, c| {
            let (ra, rb) = (r / m, r % m);
            let (ca, cb) = (c / m, c % m);
            src[(ra * m + cb, ca * m + rb)]
        });
        let target = if d.is_multiple_of(2) && min_eigenvalue(&pt) >= -1e-12 {
            DensityOperator::new(pt)?
        } else {
            a.clone()
        };
        apply_symmetry(&self.base, &target)
    }
}

/// Rotates mixed states whose largest eigenvalue exceeds 1/2 by a fixed
/// unitary before applying `base`.
pub struct DominantTampering {
    pub base: SymmetryOp,
    pub twist: ComplexMatrix,
}

impl StateTransform for DominantTampering {
    fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        if a.numerical_rank() >= 2 && a.eigenvalues()[0] > 0.5 {
            let twisted = hermitize(&(&self.twist * a.matrix() * self.twist.adjoint()));
            return apply_symmetry(&self.base, &DensityOperator::new(twisted)?);
        }
        apply_symmetry(&self.base, a)
    }
}

pub struct AdversarialCase {
    pub name: String,
    pub dim: usize,
    pub transform: Box<dyn StateTransform + Send>,
}

fn phase_shifted(dim: usize, kind: ProbeKind, alpha: f64) -> (PureState, PureState) {
    let probe = probe_states(dim)
        .expect("dim >= 2")
        .into_iter()
        .find(|p| p.kind == kind)
        .expect("probe kind exists for dim");
    let mut v = probe.state.vector().clone();
    let j = match kind {
        ProbeKind::Plus(j) => j,
        _ => 1,
    };
    v[j] *= C64::from_polar(1.0, alpha);
    (probe.state, PureState::normalized(v).expect("unit"))
}

/// The fixed adversarial suite: nine families, three dimensions each.
pub fn adversarial_suite(seed: u64) -> Vec<AdversarialCase> {
    let mut cases: Vec<AdversarialCase> = Vec::new();
    let alpha = std::f64::consts::FRAC_PI_3;
    let mut k = 0u64;
    let mut next_rng = || {
        k += 1;
        rng_from_seed(derive_seed(seed, k))
    };
    let mut push = |name: &str, dim: usize, transform: Box<dyn StateTransform + Send>| {
        cases.push(AdversarialCase { name: format!("{name} (dim {dim})"), dim, transform });
    };

    for dim in [2, 3, 5] {
        let mut rng = next_rng();
        let base = sample_symmetry(&mut rng, dim, false);
        let h = gaussian_matrix_hermitian(&mut rng, dim);
        let x = gaussian_matrix_hermitian(&mut rng, dim);
        let generator = Spectrum::of_hermitian(&h, 1e-10);
        push("state-dependent rotation", dim, Box::new(StateDependentRotation { base, generator, observable: x }));
    }
    for dim in [2, 4, 6] {
        let base = sample_symmetry(&mut next_rng(), dim, dim % 4 == 0);
        push("two-level eigenvalue swap", dim, Box::new(TwoLevelSwap { base }));
    }
    for dim in [2, 3, 7] {
        let base = sample_symmetry(&mut next_rng(), dim, false);
        push("conjugation of mixed states only", dim, Box::new(MixedOnlyConjugation { base }));
    }
    for dim in [3, 4, 8] {
        let base = sample_symmetry(&mut next_rng(), dim, dim == 4);
        push("purity sharpening", dim, Box::new(PuritySharpening { base }));
    }
    for dim in [2, 5, 6] {
        let base = sample_symmetry(&mut next_rng(), dim, false);
        push("depolarizing", dim, Box::new(Depolarizing { base, p: 1e-3 }));
    }
    for dim in [2, 3, 4] {
        let base = sample_symmetry(&mut next_rng(), dim, dim == 3);
        let (input, replacement) = phase_shifted(dim, ProbeKind::Imaginary, alpha);
        push("phase-broken conjugation probe", dim, Box::new(PhaseBrokenProbe { base, input, replacement }));
    }
    for dim in [2, 5, 8] {
        let base = sample_symmetry(&mut next_rng(), dim, dim == 5);
        let (input, replacement) = phase_shifted(dim, ProbeKind::Plus(dim - 1), alpha);
        push("phase-broken plus probe", dim, Box::new(PhaseBrokenProbe { base, input, replacement }));
    }
    for dim in [4, 6, 8] {
        let base = sample_symmetry(&mut next_rng(), dim, dim == 6);
        push("partial transpose", dim, Box::new(PartialTranspose { base }));
    }
    for dim in [2, 3, 6] {
        let mut rng = next_rng();
        let base = sample_symmetry(&mut rng, dim, dim == 2);
        let twist = sample_unitary(&mut rng, dim);
        push("single-state tampering", dim, Box::new(DominantTampering { base, twist }));
    }
    cases
}

fn gaussian_matrix_hermitian<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let cols: Vec<_> = (0..dim).map(|_| gaussian_vector(rng, dim)).collect();
    hermitize(&ComplexMatrix::from_columns(&cols)).unscale(dim as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::preserver::verify_theorem;

    #[test]
    fn suite_has_enough_cases() {
        assert!(adversarial_suite(0).len() >= 20);
    }

    #[test]
    fn every_case_is_rejected() {
        for case in adversarial_suite(7) {
            match verify_theorem(case.transform.as_ref(), case.dim, 8, 11, 1e-8) {
                Ok(out) => assert!(!out.verdict, "{} accepted (max_error {})", case.name, out.max_error),
                Err(Error::NotASymmetry { .. }) => {}
                Err(e) => panic!("{}: unexpected error {e}", case.name),
            }
        }
    }

    #[test]
    fn partial_transpose_keeps_product_probes() {
        let t = PartialTranspose { base: SymmetryOp::identity(4) };
        let e2 = PureState::basis(4, 1).to_density();
        let out = t.apply(&e2).unwrap();
        assert!(crate::linalg::frobenius(&(out.matrix() - e2.matrix())) < 1e-15);
    }
}
