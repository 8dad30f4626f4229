//! Seeded random states, rays and symmetries.

use nalgebra::linalg::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, DensityOperator, Effect, PureState, C64};
use crate::preserver::SymmetryOp;

pub type SeededRng = ChaCha8Rng;

/// Floor added to exponential draws so the requested rank survives the
/// relative rank threshold with a wide margin.
const SPECTRUM_FLOOR: f64 = 0.05;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream seed derived from `(seed, stream)` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    ComplexVector::from_fn(dim, |_, _| complex_normal(rng))
}

/// Uniformly distributed unit vector.
pub fn sample_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        if let Ok(p) = PureState::normalized(gaussian_vector(rng, dim)) {
            return p;
        }
    }
}

/// Uniform unit vector inside the span of the orthonormal columns of `basis`.
pub fn sample_pure_in<R: Rng + ?Sized>(rng: &mut R, basis: &ComplexMatrix) -> PureState {
    loop {
        let coeffs = gaussian_vector(rng, basis.ncols());
        if let Ok(p) = PureState::normalized(basis * coeffs) {
            return p;
        }
    }
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`).
pub fn sample_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Orthonormal `dim x k` matrix spanning a Haar-random `k`-dimensional subspace.
pub fn sample_isometry<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> ComplexMatrix {
    sample_unitary(rng, dim).columns(0, k).into_owned()
}

fn sample_spectrum<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..rank)
        .map(|_| rng.sample::<f64, _>(Exp1) + SPECTRUM_FLOOR)
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// State of exact numerical rank `rank` supported on the span of `basis`
/// (orthonormal columns, at least `rank` of them).
pub fn sample_density_in<R: Rng + ?Sized>(
    rng: &mut R,
    basis: &ComplexMatrix,
    rank: usize,
) -> Result<DensityOperator> {
    let k = basis.ncols();
    if rank == 0 || rank > k {
        return Err(Error::InvalidRank { rank, dim: k });
    }
    let inner = sample_isometry(rng, k, rank);
    let vectors = basis * inner;
    let probabilities = sample_spectrum(rng, rank);
    DensityOperator::from_spectrum(&probabilities, &vectors)
}

/// State with Haar eigenvectors and a Dirichlet-like spectrum of exact rank.
pub fn sample_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let vectors = sample_isometry(rng, dim, rank);
    let probabilities = sample_spectrum(rng, rank);
    DensityOperator::from_spectrum(&probabilities, &vectors)
}

/// Effect of rank `rank` with Haar eigenvectors and nonzero eigenvalues
/// uniform in `[SPECTRUM_FLOOR, 1]`.
pub fn sample_effect<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<Effect> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let vectors = sample_isometry(rng, dim, rank);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..rank {
        let t = SPECTRUM_FLOOR + (1.0 - SPECTRUM_FLOOR) * rng.random::<f64>();
        let v = vectors.column(j);
        m += (v * v.adjoint()).scale(t);
    }
    Effect::new(crate::linalg::hermitize(&m))
}

pub fn sample_symmetry<R: Rng + ?Sized>(rng: &mut R, dim: usize, antiunitary: bool) -> SymmetryOp {
    SymmetryOp::new(sample_unitary(rng, dim), antiunitary).expect("QR factor is unitary")
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    sample_density(&mut rng_from_seed(seed), dim, rank)
}

pub fn random_pure(dim: usize, seed: u64) -> PureState {
    sample_pure(&mut rng_from_seed(seed), dim)
}

pub fn random_symmetry(dim: usize, antiunitary: bool, seed: u64) -> SymmetryOp {
    sample_symmetry(&mut rng_from_seed(seed), dim, antiunitary)
}
