//! Reconstruction of the unitary or antiunitary operator behind a pure-state
//! map that preserves transition probabilities.
//!
//! The map must contain the images of three probe families:
//!
//! - the basis projections `P(e_j)`,
//! - `P((e_1 + e_j)/sqrt 2)` for `j >= 2`, which fix the relative phases of
//!   the basis images,
//! - `P((e_1 + i e_2)/sqrt 2)`, which decides between the linear and the
//!   conjugate-linear branch.


use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, frobenius, polar_unitary, ComplexMatrix, ComplexVector, PureState, C64};
use crate::preserver::{ensure_nontrivial_dim, transition_prob, SymmetryOp};

/// Inputs closer than this (Frobenius distance of projections) count as equal.
pub const INPUT_MATCH_TOL: f64 = 1e-8;
/// Components below this modulus are skipped when fixing the global phase.
const PHASE_ANCHOR_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    /// `e_j` (zero-based index).
    Basis(usize),
    /// `(e_1 + e_j)/sqrt 2` (zero-based `j >= 1`).
    Plus(usize),
    /// `(e_1 + i e_2)/sqrt 2`.
    Imaginary,
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub kind: ProbeKind,
    pub state: PureState,
}

impl Probe {
    pub fn label(&self) -> String {
        match self.kind {
            ProbeKind::Basis(j) => format!("basis probe e{}", j + 1),
            ProbeKind::Plus(j) => format!("phase probe (e1+e{})/sqrt2", j + 1),
            ProbeKind::Imaginary => "conjugation probe (e1+i*e2)/sqrt2".to_string(),
        }
    }
}

fn plus_vector(dim: usize, j: usize, coefficient: C64) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    v[0] = C64::new(h, 0.0);
    v[j] = coefficient * h;
    v
}

/// The `2 dim` probe states needed by [`wigner_reconstruct`].
pub fn probe_states(dim: usize) -> Result<Vec<Probe>> {
    ensure_nontrivial_dim(dim)?;
    let mut probes = Vec::with_capacity(2 * dim);
    for j in 0..dim {
        probes.push(Probe { kind: ProbeKind::Basis(j), state: PureState::basis(dim, j) });
    }
    for j in 1..dim {
        let state = PureState::new(plus_vector(dim, j, C64::new(1.0, 0.0)))?;
        probes.push(Probe { kind: ProbeKind::Plus(j), state });
    }
    let state = PureState::new(plus_vector(dim, 1, C64::new(0.0, 1.0)))?;
    probes.push(Probe { kind: ProbeKind::Imaginary, state });
    Ok(probes)
}

/// Finitely many input/output pairs of a map on pure states.
#[derive(Debug, Clone)]
pub struct PureStateMap {
    dim: usize,
    pairs: Vec<(PureState, PureState)>,
}

impl PureStateMap {
    /// Checks dimensions and that inputs are pairwise distinct projections.
    pub fn new(dim: usize, pairs: Vec<(PureState, PureState)>) -> Result<Self> {
        for (input, output) in &pairs {
            ensure_dim(dim, input.dim())?;
            ensure_dim(dim, output.dim())?;
        }
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i].0.distance(&pairs[j].0) <= INPUT_MATCH_TOL {
                    return Err(Error::DuplicateInput { first: i, second: j });
                }
            }
        }
        Ok(PureStateMap { dim, pairs })
    }

    /// Images of `inputs` under a symmetry.
    pub fn from_symmetry(s: &SymmetryOp, inputs: &[PureState]) -> Result<Self> {
        let pairs = inputs
            .iter()
            .map(|p| Ok((p.clone(), s.apply_vector(p)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(s.dim(), pairs)
    }

    /// Images of the reconstruction probes under a symmetry.
    pub fn probes_of(s: &SymmetryOp) -> Result<Self> {
        let inputs: Vec<PureState> = probe_states(s.dim())?.into_iter().map(|p| p.state).collect();
        Self::from_symmetry(s, &inputs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[(PureState, PureState)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Output paired with the input whose projection matches `input`.
    pub fn image_of(&self, input: &PureState) -> Option<&PureState> {
        self.pairs
            .iter()
            .find(|(p, _)| p.distance(input) <= INPUT_MATCH_TOL)
            .map(|(_, q)| q)
    }
}

fn unit_phase(z: C64) -> C64 {
    let n = z.norm();
    if n > 0.0 { z / n } else { C64::new(1.0, 0.0) }
}

/// Reconstructs the symmetry implementing a transition-probability
/// preserving pure-state map.
///
/// The result is unique up to a global phase, fixed by making the first
/// non-negligible component of `U e_1` real and positive.
pub fn wigner_reconstruct(map: &PureStateMap, dim: usize, tol: f64) -> Result<SymmetryOp> {
    ensure_nontrivial_dim(dim)?;
    ensure_dim(dim, map.dim())?;

    let probes = probe_states(dim)?;
    let pairs = map.pairs();
    let name = |i: usize| match probes.iter().find(|p| p.state.distance(&pairs[i].0) <= INPUT_MATCH_TOL) {
        Some(p) => p.label(),
        None => format!("input {i}"),
    };
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let before = transition_prob(&pairs[i].0, &pairs[j].0)?;
            let after = transition_prob(&pairs[i].1, &pairs[j].1)?;
            let deviation = (before - after).abs();
            if deviation > tol {
                return Err(Error::NotASymmetry {
                    probe: format!("transition probability between {} and {}", name(i), name(j)),
                    deviation,
                });
            }
        }
    }

    let image = |probe: &Probe| -> Result<ComplexVector> {
        map.image_of(&probe.state)
            .map(|q| q.vector().clone())
            .ok_or_else(|| Error::IncompleteMap { probe: probe.label() })
    };

    let mut f1 = image(&probes[0])?;
    let anchor = f1
        .iter()
        .copied()
        .find(|z| z.norm() >= PHASE_ANCHOR_MIN)
        .expect("unit vector has a component of modulus >= 1/sqrt(dim)");
    f1 *= unit_phase(anchor).conj();

    let mut columns: Vec<ComplexVector> = vec![f1.clone()];
    for j in 1..dim {
        let g = image(&probes[j])?;
        let plus = &probes[dim + j - 1];
        let w = image(plus)?;
        let a = f1.dotc(&w);
        let b = g.dotc(&w);
        if a.norm() < 0.5 || b.norm() < 0.5 {
            // |<f1, w>|^2 = 1/2 for a genuine symmetry
            return Err(Error::NotASymmetry {
                probe: plus.label(),
                deviation: (a.norm_sqr() - 0.5).abs().max((b.norm_sqr() - 0.5).abs()),
            });
        }
        columns.push(g * unit_phase(b / a));
    }

    let imaginary = &probes[2 * dim - 1];
    let w = PureState::normalized(image(imaginary)?)?;
    let i = C64::new(0.0, 1.0);
    let linear = PureState::normalized(&columns[0] + &columns[1] * i)?;
    let conjugate = PureState::normalized(&columns[0] - &columns[1] * i)?;
    let miss_linear = 1.0 - transition_prob(&w, &linear)?;
    let miss_conjugate = 1.0 - transition_prob(&w, &conjugate)?;
    let antiunitary = if miss_linear <= tol {
        false
    } else if miss_conjugate <= tol {
        true
    } else {
        return Err(Error::NotASymmetry {
            probe: imaginary.label(),
            deviation: miss_linear.min(miss_conjugate),
        });
    };

    let raw = ComplexMatrix::from_columns(&columns);
    let u = polar_unitary(&raw);
    let deviation = frobenius(&(&u - &raw));
    if deviation > tol.sqrt() {
        return Err(Error::NotASymmetry { probe: "orthonormality of basis images".into(), deviation });
    }
    let symmetry = SymmetryOp::new(u, antiunitary)?;

    for (k, (input, output)) in pairs.iter().enumerate() {
        let predicted = symmetry.apply_vector(input)?;
        let deviation = predicted.distance(output);
        if deviation > tol {
            return Err(Error::NotASymmetry { probe: format!("pair {k}"), deviation });
        }
    }
    Ok(symmetry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_pure, random_symmetry};

    #[test]
    fn probe_layout() {
        let probes = probe_states(4).unwrap();
        assert_eq!(probes.len(), 8);
        assert_eq!(probes[0].kind, ProbeKind::Basis(0));
        assert_eq!(probes[4].kind, ProbeKind::Plus(1));
        assert_eq!(probes[7].kind, ProbeKind::Imaginary);
        assert!(probe_states(1).is_err());
    }

    #[test]
    fn identity_map() {
        let map = PureStateMap::probes_of(&SymmetryOp::identity(3)).unwrap();
        let s = wigner_reconstruct(&map, 3, 1e-8).unwrap();
        assert!(!s.is_antiunitary());
        assert!(frobenius(&(s.unitary() - ComplexMatrix::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn conjugation_map() {
        let conj = SymmetryOp::new(ComplexMatrix::identity(2, 2), true).unwrap();
        let map = PureStateMap::probes_of(&conj).unwrap();
        let s = wigner_reconstruct(&map, 2, 1e-8).unwrap();
        assert!(s.is_antiunitary());
        assert!((s.phase_overlap(&conj).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_round_trip_with_extra_pairs() {
        for seed in 0..20 {
            let dim = 2 + seed as usize % 7;
            let s = random_symmetry(dim, seed % 2 == 1, seed);
            let mut inputs: Vec<PureState> = probe_states(dim).unwrap().into_iter().map(|p| p.state).collect();
            inputs.extend((0..3).map(|k| random_pure(dim, 1000 + k)));
            let map = PureStateMap::from_symmetry(&s, &inputs).unwrap();
            let r = wigner_reconstruct(&map, dim, 1e-8).unwrap();
            assert_eq!(r.is_antiunitary(), s.is_antiunitary());
            assert!(r.phase_overlap(&s).unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn missing_probe() {
        let s = SymmetryOp::identity(3);
        let inputs: Vec<PureState> = probe_states(3).unwrap().into_iter().take(5).map(|p| p.state).collect();
        let map = PureStateMap::from_symmetry(&s, &inputs).unwrap();
        let err = wigner_reconstruct(&map, 3, 1e-8).unwrap_err();
        assert!(matches!(err, Error::IncompleteMap { ref probe } if probe.contains("conjugation")));
    }

    #[test]
    fn broken_phase_probe() {
        let s = SymmetryOp::identity(2);
        let mut pairs: Vec<(PureState, PureState)> = PureStateMap::probes_of(&s).unwrap().pairs().to_vec();
        let alpha = std::f64::consts::FRAC_PI_3;
        pairs[3].1 = PureState::new(plus_vector(2, 1, C64::from_polar(1.0, alpha))).unwrap();
        let map = PureStateMap::new(2, pairs).unwrap();
        assert!(matches!(wigner_reconstruct(&map, 2, 1e-8), Err(Error::NotASymmetry { .. })));
    }

    #[test]
    fn duplicate_inputs_rejected() {
        let e1 = PureState::basis(2, 0);
        let pairs = vec![(e1.clone(), e1.clone()), (e1.clone(), e1)];
        assert!(matches!(PureStateMap::new(2, pairs), Err(Error::DuplicateInput { .. })));
    }
}
