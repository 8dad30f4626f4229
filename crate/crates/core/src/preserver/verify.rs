//! Sampled verification that a state transform acts as a symmetry.

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::{frobenius, DensityOperator, Operator, PureState};
use crate::preserver::wigner::{probe_states, wigner_reconstruct, PureStateMap};
use crate::preserver::{apply_symmetry, ensure_nontrivial_dim, SymmetryOp, TWO_LEVEL_WEIGHTS};
use crate::sample::{derive_seed, rng_from_seed, sample_density};
use crate::strength::effects_equal_by_strength;

/// Rays per state used for the strength-agreement check.
const STRENGTH_RAYS: usize = 6;

/// A map on states. Implementations must be callable from several threads.
pub trait StateTransform: Sync {
    fn apply(&self, state: &DensityOperator) -> Result<DensityOperator>;
}

impl StateTransform for SymmetryOp {
    fn apply(&self, state: &DensityOperator) -> Result<DensityOperator> {
        apply_symmetry(self, state)
    }
}

impl<T: StateTransform + ?Sized> StateTransform for Box<T> {
    fn apply(&self, state: &DensityOperator) -> Result<DensityOperator> {
        (**self).apply(state)
    }
}

/// A transform defined only on the inputs of a stored pure-state map.
#[derive(Debug, Clone)]
pub struct LookupTransform {
    map: PureStateMap,
}

impl LookupTransform {
    pub fn new(map: PureStateMap) -> Self {
        LookupTransform { map }
    }
}

impl StateTransform for LookupTransform {
    fn apply(&self, state: &DensityOperator) -> Result<DensityOperator> {
        if !state.is_pure() {
            return Err(Error::OutsideDomain);
        }
        let input = state.top_eigenvector();
        self.map.image_of(&input).map(PureState::to_density).ok_or(Error::OutsideDomain)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub verdict: bool,
    pub symmetry: Option<SymmetryOp>,
    /// Largest Frobenius distance between the transform and the
    /// reconstructed symmetry over the checked states.
    pub max_error: f64,
    /// Strengths of the transformed and the symmetry-mapped state agreed on
    /// every sampled ray.
    pub strength_agreement: bool,
    pub states_checked: usize,
}

/// Mixed states checked by [`verify_theorem`]: `n_mixed` seeded states of
/// assorted ranks followed by the two-level mixtures `0.4 P(e_j) + 0.6 P(e_{j+1})`.
pub fn verification_states(dim: usize, n_mixed: usize, seed: u64) -> Result<Vec<DensityOperator>> {
    let mut states = Vec::with_capacity(n_mixed + dim);
    for i in 0..n_mixed {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        states.push(sample_density(&mut rng, dim, 1 + i % dim)?);
    }
    if n_mixed > 0 {
        let (lo, hi) = TWO_LEVEL_WEIGHTS;
        for j in 0..dim - 1 {
            let mut p = vec![0.0; dim];
            p[j] = lo;
            p[j + 1] = hi;
            states.push(DensityOperator::diagonal(&p)?);
        }
    }
    Ok(states)
}

pub fn verify_theorem(
    transform: &dyn StateTransform,
    dim: usize,
    n_mixed: usize,
    seed: u64,
    tol: f64,
) -> Result<VerifyOutcome> {
    verify_theorem_with(transform, dim, n_mixed, seed, tol, Execution::default())
}

/// Reconstructs a symmetry from the transform's action on the probe states,
/// then compares the transform against it on sampled mixed states.
///
/// The verdict certifies consistency with `A -> U A U*` on the samples only.
pub fn verify_theorem_with(
    transform: &dyn StateTransform,
    dim: usize,
    n_mixed: usize,
    seed: u64,
    tol: f64,
    exec: Execution,
) -> Result<VerifyOutcome> {
    ensure_nontrivial_dim(dim)?;
    let probes = probe_states(dim)?;
    let mut pairs = Vec::with_capacity(probes.len());
    for probe in &probes {
        let image = transform.apply(&probe.state.to_density())?;
        let impurity = 1.0 - image.eigenvalues()[0];
        if impurity > tol {
            return Err(Error::NotASymmetry {
                probe: format!("image of {} is not a pure state", probe.label()),
                deviation: impurity,
            });
        }
        pairs.push((probe.state.clone(), image.top_eigenvector()));
    }
    let symmetry = wigner_reconstruct(&PureStateMap::new(dim, pairs)?, dim, tol)?;

    let states = verification_states(dim, n_mixed, seed)?;
    let checks = map_indexed(states.len(), exec, |i| -> Result<(f64, bool)> {
        let a = &states[i];
        let actual = transform.apply(a)?;
        let expected = apply_symmetry(&symmetry, a)?;
        let error = frobenius(&(actual.matrix() - expected.matrix()));
        let agree = effects_equal_by_strength(&actual, &expected, STRENGTH_RAYS, derive_seed(seed ^ 0x5EED, i as u64))?;
        Ok((error, agree))
    });
    let mut max_error = 0.0_f64;
    let mut strength_agreement = true;
    for check in checks {
        let (error, agree) = check?;
        max_error = max_error.max(error);
        strength_agreement &= agree;
    }
    Ok(VerifyOutcome {
        verdict: max_error <= tol && strength_agreement,
        symmetry: Some(symmetry),
        max_error,
        strength_agreement,
        states_checked: states.len(),
    })
}

/// Verification of a stored map: reconstructs the symmetry and reports the
/// largest deviation over all stored pairs.
pub fn verify_map(map: &PureStateMap, tol: f64) -> Result<VerifyOutcome> {
    let symmetry = wigner_reconstruct(map, map.dim(), tol)?;
    let mut max_error = 0.0_f64;
    for (input, output) in map.pairs() {
        max_error = max_error.max(symmetry.apply_vector(input)?.distance(output));
    }
    Ok(VerifyOutcome {
        verdict: max_error <= tol,
        symmetry: Some(symmetry),
        max_error,
        strength_agreement: true,
        states_checked: map.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::sample::random_symmetry;

    #[test]
    fn identity_transform() {
        let out = verify_theorem(&SymmetryOp::identity(3), 3, 5, 1, 1e-8).unwrap();
        assert!(out.verdict);
        let s = out.symmetry.unwrap();
        assert!(!s.is_antiunitary());
        assert!(frobenius(&(s.unitary() - ComplexMatrix::identity(3, 3))) < 1e-14);
        assert_eq!(out.states_checked, 5 + 2);
    }

    #[test]
    fn random_symmetries_verify() {
        for seed in 0..8 {
            let s = random_symmetry(2 + seed as usize % 5, seed % 2 == 0, seed);
            let out = verify_theorem(&s, s.dim(), 6, seed, 1e-8).unwrap();
            assert!(out.verdict, "seed {seed}: {}", out.max_error);
            assert!(out.max_error <= 1e-8);
            let r = out.symmetry.unwrap();
            assert_eq!(r.is_antiunitary(), s.is_antiunitary());
        }
    }

    #[test]
    fn lookup_transform_on_probes() {
        let s = random_symmetry(3, true, 4);
        let map = PureStateMap::probes_of(&s).unwrap();
        let lookup = LookupTransform::new(map.clone());
        let out = verify_theorem(&lookup, 3, 0, 0, 1e-8).unwrap();
        assert!(out.verdict);
        assert!(out.symmetry.unwrap().is_antiunitary());

        let mixed = DensityOperator::maximally_mixed(3).unwrap();
        assert_eq!(lookup.apply(&mixed).unwrap_err(), Error::OutsideDomain);

        let direct = verify_map(&map, 1e-8).unwrap();
        assert!(direct.verdict);
    }

    #[test]
    fn execution_modes_agree() {
        let s = random_symmetry(4, false, 21);
        let a = verify_theorem_with(&s, 4, 10, 3, 1e-8, Execution::Sequential).unwrap();
        let b = verify_theorem_with(&s, 4, 10, 3, 1e-8, Execution::Parallel).unwrap();
        assert_eq!(a.max_error.to_bits(), b.max_error.to_bits());
        assert_eq!(a.symmetry, b.symmetry);
    }
}
