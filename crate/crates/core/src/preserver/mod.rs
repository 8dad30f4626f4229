//! Compatibility preservers and the symmetries that implement them.
//!
//! A bijection of the state space that preserves a compatibility-like
//! function acts as `A -> U A U*` for a unitary or antiunitary `U`. This module
//! provides the pieces needed to check that numerically at finite dimension:
//! symmetry operators, transition probabilities, independence and rank
//! detection through compatibility, ic-sets, reconstruction of `U` from a
//! pure-state map ([`wigner`]) and sampled verification of whole transforms
//! ([`verify`]).

pub mod adversarial;
pub mod verify;
pub mod wigner;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_dim, frobenius, hermitize, numerical_rank, orthonormality_deviation, range_membership,
    ComplexMatrix, DensityOperator, Operator, PureState, DEFAULT_MEMBERSHIP_TOL,
};
use crate::measure::is_compatible;
use crate::sample::{derive_seed, rng_from_seed, sample_density, sample_density_in, sample_isometry, sample_pure, sample_pure_in};

pub use verify::{verify_map, verify_theorem, verify_theorem_with, LookupTransform, StateTransform, VerifyOutcome};
pub use wigner::{probe_states, wigner_reconstruct, Probe, ProbeKind, PureStateMap};
pub use adversarial::{adversarial_suite, AdversarialCase};

/// Default tolerance for reconstruction and verification.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-8;
/// Two-level mixtures used as probes: weights `(0.4, 0.6)`, strictly ordered.
pub const TWO_LEVEL_WEIGHTS: (f64, f64) = (0.4, 0.6);

pub(crate) fn ensure_nontrivial_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::UnsupportedDimension { dim, min: 2, max: usize::MAX });
    }
    Ok(())
}

/// A unitary `U`, optionally composed with entrywise complex conjugation in
/// the standard basis. Acts on states as `U A U*` or `U conj(A) U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOp {
    u: ComplexMatrix,
    antiunitary: bool,
}

impl SymmetryOp {
    pub fn new(u: ComplexMatrix, antiunitary: bool) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::NotSquare { rows: u.nrows(), cols: u.ncols() });
        }
        let deviation = orthonormality_deviation(&u);
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(SymmetryOp { u, antiunitary })
    }

    pub fn identity(dim: usize) -> Self {
        SymmetryOp { u: ComplexMatrix::identity(dim, dim), antiunitary: false }
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn is_antiunitary(&self) -> bool {
        self.antiunitary
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `U phi` or `U conj(phi)`.
    pub fn apply_vector(&self, phi: &PureState) -> Result<PureState> {
        ensure_dim(self.dim(), phi.dim())?;
        let v = if self.antiunitary { phi.vector().map(|z| z.conj()) } else { phi.vector().clone() };
        PureState::normalized(&self.u * v)
    }

    /// `U M U*` or `U conj(M) U*` for an arbitrary square matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(self.dim(), m.nrows())?;
        let inner = if self.antiunitary { m.map(|z| z.conj()) } else { m.clone() };
        Ok(&self.u * inner * self.u.adjoint())
    }

    /// `|tr(U'^* U)| / dim`; equals 1 exactly when the unitaries agree up to a
    /// global phase.
    pub fn phase_overlap(&self, other: &SymmetryOp) -> Result<f64> {
        ensure_dim(self.dim(), other.dim())?;
        Ok((other.u.adjoint() * &self.u).trace().norm() / self.dim() as f64)
    }
}

/// The action of a symmetry on a state. Eigenvalues are carried over and the
/// eigenvectors mapped, so the spectrum of the result equals that of `a`.
pub fn apply_symmetry(s: &SymmetryOp, a: &DensityOperator) -> Result<DensityOperator> {
    ensure_dim(s.dim(), a.dim())?;
    let matrix = hermitize(&s.apply_matrix(a.matrix())?);
    let spectrum = a.spectrum().conjugated_by(&s.u, s.antiunitary);
    Ok(DensityOperator::from_parts(matrix, spectrum))
}

/// `tr PQ = |<phi, psi>|^2`.
pub fn transition_prob(p: &PureState, q: &PureState) -> Result<f64> {
    ensure_dim(p.dim(), q.dim())?;
    Ok(p.vector().dotc(q.vector()).norm_sqr().min(1.0))
}

/// Whether the ranges of the given pure states span a subspace of dimension
/// equal to their number.
pub fn independent(pures: &[PureState]) -> Result<bool> {
    let first = pures.first().ok_or_else(|| Error::InvalidConfig("independence of an empty set".into()))?;
    let d = first.dim();
    for p in pures {
        ensure_dim(d, p.dim())?;
    }
    if pures.len() > d {
        return Ok(false);
    }
    let m = ComplexMatrix::from_fn(d, pures.len(), |r, c| pures[c].vector()[r]);
    Ok(numerical_rank(&m, 1e-10) == pures.len())
}

/// Largest size of an independent set of pure states compatible with `a`,
/// found greedily from `budget` seeded samples (half of them drawn from the
/// support) followed by the support eigenvectors. `budget` is raised to at
/// least `dim^2`.
pub fn rank_via_compatibility(a: &DensityOperator, budget: usize, seed: u64) -> usize {
    let d = a.dim();
    let budget = budget.max(d * d);
    let support = a.spectrum().support_vectors();
    let mut collected: Vec<PureState> = Vec::with_capacity(d);

    let consider = |candidate: PureState, collected: &mut Vec<PureState>| {
        let compatible = range_membership(a, &candidate, DEFAULT_MEMBERSHIP_TOL).unwrap_or(false);
        if !compatible {
            return;
        }
        collected.push(candidate);
        if !independent(collected).unwrap_or(false) {
            collected.pop();
        }
    };

    for i in 0..budget {
        if collected.len() == d {
            return d;
        }
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let candidate = if i % 2 == 1 && support.ncols() > 0 {
            sample_pure_in(&mut rng, &support)
        } else {
            sample_pure(&mut rng, d)
        };
        consider(candidate, &mut collected);
    }
    for j in 0..support.ncols() {
        if collected.len() == d {
            break;
        }
        let e = PureState::normalized(support.column(j).into_owned()).expect("unit eigenvector");
        consider(e, &mut collected);
    }
    collected.len()
}

/// Membership of `d` in the ic-set of `m`: `d` is incompatible with every
/// member of `m`.
pub fn ic_set_member(d: &DensityOperator, m: &[DensityOperator]) -> Result<bool> {
    for a in m {
        if is_compatible(d, a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of [`pure_characterization_probe`].
#[derive(Debug, Clone)]
pub struct CharacterizationProbe {
    /// No state other than `A` was found in the sampled double ic-set.
    pub consistent: bool,
    /// A state `B != A` that is incompatible with every sampled member of the
    /// ic-set of `A`.
    pub witness: Option<DensityOperator>,
    /// `A` itself passed the double ic-set test.
    pub self_included: bool,
    pub ic_samples: usize,
    pub candidates_checked: usize,
}

/// Largest dimension accepted by [`pure_characterization_probe`].
pub const CHARACTERIZATION_MAX_DIM: usize = 6;
const TARGETED_PROBES: usize = 3;

/// Randomized falsification test of the double ic-set characterization of
/// pure states.
///
/// Samples members of the ic-set of `a` (generic low-rank states outside its
/// support, plus states aimed at each candidate), then searches candidate
/// states `B != A` that stay incompatible with all of them. For a pure `a`
/// no candidate should survive; for a mixed `a` any state supported inside
/// the support of `a` survives.
pub fn pure_characterization_probe(a: &DensityOperator, samples: usize, seed: u64) -> Result<CharacterizationProbe> {
    let d = a.dim();
    if !(2..=CHARACTERIZATION_MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension { dim: d, min: 2, max: CHARACTERIZATION_MAX_DIM });
    }
    let rank = a.numerical_rank();
    let free = d - rank;

    let mut pool: Vec<DensityOperator> = Vec::new();
    if free > 0 {
        for i in 0..samples {
            let mut rng = rng_from_seed(derive_seed(seed, 2 * i as u64));
            let r = 1 + i % free;
            let basis = sample_isometry(&mut rng, d, r);
            let candidate = sample_density_in(&mut rng, &basis, r)?;
            if !is_compatible(&candidate, a)? {
                pool.push(candidate);
            }
        }
    }

    let qualifies = |b: &DensityOperator, extra: &[DensityOperator]| -> Result<bool> {
        Ok(ic_set_member(b, &pool)? && ic_set_member(b, extra)?)
    };
    let self_included = qualifies(a, &[])?;

    let support = a.spectrum().support_vectors();
    let mut checked = 0;
    for j in 0..samples {
        let mut rng = rng_from_seed(derive_seed(seed, 2 * j as u64 + 1));
        let b = match j % 3 {
            0 => sample_density(&mut rng, d, 1 + j % d)?,
            1 => sample_density_in(&mut rng, &support, 1 + j % rank)?,
            _ => sample_pure(&mut rng, d).to_density(),
        };
        if frobenius(&(b.matrix() - a.matrix())) <= 1e-8 {
            continue;
        }
        checked += 1;
        let b_support = b.spectrum().support_vectors();
        let mut targeted = Vec::with_capacity(TARGETED_PROBES);
        for _ in 0..TARGETED_PROBES {
            let w = sample_pure_in(&mut rng, &b_support).to_density();
            if !is_compatible(&w, a)? {
                targeted.push(w);
            }
        }
        if qualifies(&b, &targeted)? {
            return Ok(CharacterizationProbe {
                consistent: false,
                witness: Some(b),
                self_included,
                ic_samples: pool.len(),
                candidates_checked: checked,
            });
        }
    }
    Ok(CharacterizationProbe {
        consistent: true,
        witness: None,
        self_included,
        ic_samples: pool.len(),
        candidates_checked: checked,
    })
}
