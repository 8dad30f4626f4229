//! Dense complex-matrix foundations: density operators, effects, pure states,
//! supports and subspace intersections.
//!
//! Everything here is finite dimensional, so the range of a positive operator
//! and the range of its square root coincide with its support (the orthogonal
//! complement of the kernel). Supports are computed from the spectral
//! decomposition with a threshold relative to the largest eigenvalue.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Entrywise bound on `|M - M^*|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_TOL, 0)` are treated as roundoff and clamped.
pub const PSD_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
/// Default rank threshold, relative to the largest eigenvalue.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default bound on the squared kernel component for range membership.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

/// Largest entrywise deviation of `m` from Hermitian.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn ensure_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `max |B^* B - I|` entrywise.
pub fn orthonormality_deviation(b: &ComplexMatrix) -> f64 {
    let gram = b.adjoint() * b;
    let k = gram.nrows();
    let mut worst = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix in descending order (no clamping).
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    SymmetricEigen::new(hermitize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Thin singular value decomposition `M = U diag(sigma) V^*`, singular values
/// descending. Columns of `U` belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Used instead of `nalgebra::SVD`, whose complex implementation can return
/// a wrong factorization for some rank-deficient inputs, e.g. products of
/// partial isometries. Jacobi rotations also resolve small singular values
/// to high relative accuracy, which the rank decisions rely on.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = x.scale(c) - y.scale(s);
                        mat[(i, q)] = x.scale(s) + y.scale(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let k = rows.min(n);
    let mut u = ComplexMatrix::zeros(rows, k);
    let mut vk = ComplexMatrix::zeros(n, k);
    let mut sigma = Vec::with_capacity(k);
    for (c, &j) in order.iter().take(k).enumerate() {
        let s = norms[j];
        if s > 0.0 {
            u.set_column(c, &a.column(j).unscale(s));
        }
        vk.set_column(c, &v.column(j));
        sigma.push(s);
    }
    Svd { u, sigma, v: vk }
}

/// Nearest unitary to a square matrix in Frobenius norm (polar factor).
/// Directions with zero singular value are completed arbitrarily.
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    let mut f = svd(m);
    let mut filled: Vec<ComplexVector> = Vec::with_capacity(n);
    for j in 0..n {
        if f.sigma[j] > f64::EPSILON * f.sigma[0].max(1.0) {
            filled.push(f.u.column(j).into_owned());
            continue;
        }
        // Gram-Schmidt against the columns kept so far, seeded by e_i
        let completion = (0..n)
            .map(|i| {
                let mut e = ComplexVector::zeros(n);
                e[i] = C64::new(1.0, 0.0);
                for w in &filled {
                    e -= w * w.dotc(&e);
                }
                e
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("n > 0");
        filled.push(completion.unscale(completion.norm()));
    }
    for (j, col) in filled.iter().enumerate() {
        f.u.set_column(j, col);
    }
    f.u * f.v.adjoint()
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    // fewer columns means fewer rotations
    if m.nrows() < m.ncols() {
        svd(&m.adjoint()).sigma
    } else {
        svd(m).sigma
    }
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &ComplexMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&v| v > rel_tol * max).count(),
        _ => 0,
    }
}

/// Spectral decomposition of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: ComplexMatrix,
    rank: usize,
    rank_tol: f64,
}

impl Spectrum {
    /// Decomposes a Hermitian matrix. No clamping is applied.
    pub fn of_hermitian(m: &ComplexMatrix, rank_tol: f64) -> Self {
        let eig = SymmetricEigen::new(hermitize(m));
        let n = m.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self::from_parts(values, vectors, rank_tol)
    }

    pub(crate) fn from_parts(values: Vec<f64>, vectors: ComplexMatrix, rank_tol: f64) -> Self {
        let top = values.first().copied().unwrap_or(0.0).max(0.0);
        let rank = values.iter().filter(|&&v| v > rank_tol * top && v > 0.0).count();
        Spectrum { values, vectors, rank, rank_tol }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, ordered like [`Spectrum::values`].
    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalue threshold separating support from kernel.
    pub fn threshold(&self) -> f64 {
        self.rank_tol * self.values.first().copied().unwrap_or(0.0).max(0.0)
    }

    /// Columns spanning the support.
    pub fn support_vectors(&self) -> ComplexMatrix {
        self.vectors.columns(0, self.rank).into_owned()
    }

    /// Columns spanning the kernel.
    pub fn kernel_vectors(&self) -> ComplexMatrix {
        let n = self.dim();
        self.vectors.columns(self.rank, n - self.rank).into_owned()
    }

    /// Rebuilds `sum f(t_i) e_i e_i^*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &t) in self.values.iter().enumerate() {
            let w = f(t);
            if w == 0.0 {
                continue;
            }
            let col = self.vectors.column(i);
            out += (col * col.adjoint()).scale(w);
        }
        out
    }

    /// Maps the eigenvectors through `v -> u * v` (or `u * conj(v)`).
    pub(crate) fn conjugated_by(&self, u: &ComplexMatrix, antiunitary: bool) -> Spectrum {
        let v = if antiunitary { self.vectors.map(|z| z.conj()) } else { self.vectors.clone() };
        Spectrum {
            values: self.values.clone(),
            vectors: u * v,
            rank: self.rank,
            rank_tol: self.rank_tol,
        }
    }
}

/// Anything carrying a Hermitian matrix together with its spectral cache.
pub trait Operator {
    fn matrix(&self) -> &ComplexMatrix;
    fn spectrum(&self) -> &Spectrum;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }

    fn rank(&self) -> usize {
        self.spectrum().rank()
    }
}

/// A Hermitian operator `T` with `0 <= T <= I`.
#[derive(Debug, Clone)]
pub struct Effect {
    matrix: ComplexMatrix,
    spectrum: Spectrum,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_rank_tol(matrix, DEFAULT_RANK_TOL)
    }

    pub fn with_rank_tol(matrix: ComplexMatrix, rank_tol: f64) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = hermitize(&matrix);
        let raw = Spectrum::of_hermitian(&matrix, rank_tol);
        let values = raw.values();
        if let Some(&bad) = values.iter().find(|&&v| !(-PSD_TOL..=1.0 + PSD_TOL).contains(&v)) {
            return Err(Error::NotAnEffect { eigenvalue: bad });
        }
        let clamped = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let spectrum = Spectrum::from_parts(clamped, raw.vectors, rank_tol);
        Ok(Effect { matrix, spectrum })
    }
}

impl Operator for Effect {
    fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
    fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

/// A state: positive semidefinite, Hermitian, trace one.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    effect: Effect,
}

impl DensityOperator {
    /// Validates with the default rank threshold.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density(matrix, DEFAULT_RANK_TOL)
    }

    /// Builds `sum_i p_i v_i v_i^*` from orthonormal columns `vectors`.
    pub fn from_spectrum(probabilities: &[f64], vectors: &ComplexMatrix) -> Result<Self> {
        ensure_dim(vectors.ncols(), probabilities.len())?;
        let mut m = ComplexMatrix::zeros(vectors.nrows(), vectors.nrows());
        for (i, &p) in probabilities.iter().enumerate() {
            let col = vectors.column(i);
            m += (col * col.adjoint()).scale(p);
        }
        Self::new(m)
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim, dim).scale(1.0 / dim as f64))
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = probabilities.len();
        Self::new(ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j { C64::new(probabilities[i], 0.0) } else { C64::new(0.0, 0.0) }
        }))
    }

    pub fn as_effect(&self) -> &Effect {
        &self.effect
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.effect.spectrum.values()
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        self.effect.spectrum.vectors()
    }

    pub fn numerical_rank(&self) -> usize {
        self.effect.spectrum.rank()
    }

    pub fn is_pure(&self) -> bool {
        self.numerical_rank() == 1
    }

    /// The dominant eigenvector as a pure state.
    pub fn top_eigenvector(&self) -> PureState {
        PureState::normalized(self.eigenvectors().column(0).into_owned())
            .expect("eigenvectors are unit vectors")
    }

    /// Builds the state from a transformed spectral decomposition.
    pub(crate) fn from_parts(matrix: ComplexMatrix, spectrum: Spectrum) -> Self {
        DensityOperator { effect: Effect { matrix, spectrum } }
    }
}

impl Operator for DensityOperator {
    fn matrix(&self) -> &ComplexMatrix {
        &self.effect.matrix
    }
    fn spectrum(&self) -> &Spectrum {
        &self.effect.spectrum
    }
}

/// Validates `matrix` as a density operator and caches its spectrum.
///
/// Eigenvalues in `[-1e-12, 0)` are clamped to zero; the rank counts
/// eigenvalues above `rank_tol` times the largest one.
pub fn validate_density(matrix: ComplexMatrix, rank_tol: f64) -> Result<DensityOperator> {
    ensure_square(&matrix)?;
    let deviation = hermitian_deviation(&matrix);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let matrix = hermitize(&matrix);
    let trace = matrix.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne { trace });
    }
    let raw = Spectrum::of_hermitian(&matrix, rank_tol);
    let min = raw.values().last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let clamped = raw.values().iter().map(|v| v.max(0.0)).collect();
    let spectrum = Spectrum::from_parts(clamped, raw.vectors, rank_tol);
    Ok(DensityOperator::from_parts(matrix, spectrum))
}

/// A unit vector together with its rank-one projection.
#[derive(Debug, Clone)]
pub struct PureState {
    vector: ComplexVector,
    projection: ComplexMatrix,
}

impl PureState {
    /// Accepts `vector` only if it has unit norm within `1e-12`.
    pub fn new(vector: ComplexVector) -> Result<Self> {
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::from_unit(vector))
    }

    /// Normalizes `vector`; fails only on the zero vector.
    pub fn normalized(vector: ComplexVector) -> Result<Self> {
        let norm = vector.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::from_unit(vector.unscale(norm)))
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::from_unit(v)
    }

    /// Normalized vector from real coordinates.
    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::normalized(ComplexVector::from_iterator(
            coords.len(),
            coords.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    fn from_unit(vector: ComplexVector) -> Self {
        let projection = &vector * vector.adjoint();
        PureState { vector, projection }
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    pub fn projection(&self) -> &ComplexMatrix {
        &self.projection
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    /// The projection as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::new(self.projection.clone()).expect("rank-one projections are states")
    }

    /// Frobenius distance between the projections.
    pub fn distance(&self, other: &PureState) -> f64 {
        frobenius(&(&self.projection - &other.projection))
    }
}

/// A subspace given by an orthonormal basis (columns).
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: ComplexMatrix,
}

impl Subspace {
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        let deviation = orthonormality_deviation(&basis);
        if basis.ncols() > 0 && deviation > 1e-10 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Subspace { ambient_dim: basis.nrows(), basis })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: ComplexMatrix::zeros(ambient_dim, 0) }
    }

    /// Span of arbitrary columns, orthonormalized via SVD with a relative
    /// rank threshold.
    pub fn span(vectors: &ComplexMatrix, rank_tol: f64) -> Self {
        let d = vectors.nrows();
        if vectors.ncols() == 0 {
            return Self::zero(d);
        }
        let f = svd(vectors);
        let max = f.sigma[0];
        let keep = f.sigma.iter().filter(|&&s| max > 0.0 && s > rank_tol * max).count();
        let basis = f.u.columns(0, keep).into_owned();
        Subspace { ambient_dim: d, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// `A^{1/2}` via the spectral map.
pub fn sqrt_psd<T: Operator + ?Sized>(a: &T) -> ComplexMatrix {
    // kernel eigenvalues are rounding noise; their roots would not be
    let spectrum = a.spectrum();
    let cut = spectrum.threshold();
    spectrum.map(|t| if t > cut { t.sqrt() } else { 0.0 })
}

/// Support (= range) of a positive operator.
pub fn support<T: Operator + ?Sized>(a: &T) -> Subspace {
    Subspace { ambient_dim: a.dim(), basis: a.spectrum().support_vectors() }
}

/// Squared norm of the component of `phi` in the kernel of `a`.
pub fn kernel_weight<T: Operator + ?Sized>(a: &T, phi: &PureState) -> Result<f64> {
    ensure_dim(a.dim(), phi.dim())?;
    let kernel = a.spectrum().kernel_vectors();
    Ok((kernel.adjoint() * phi.vector()).norm_squared())
}

/// Whether `phi` lies in the range of `a` (kernel component at most `eps_mem`).
pub fn range_membership<T: Operator + ?Sized>(a: &T, phi: &PureState, eps_mem: f64) -> Result<bool> {
    Ok(kernel_weight(a, phi)? <= eps_mem)
}

/// `dim U + dim V - rank [U | V]`.
pub fn subspace_intersection_dim(u: &Subspace, v: &Subspace, rank_tol: f64) -> Result<usize> {
    ensure_dim(u.ambient_dim, v.ambient_dim)?;
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(0);
    }
    let stacked = stack_columns(&u.basis, &v.basis);
    let rank = numerical_rank(&stacked, rank_tol);
    Ok((u.dim() + v.dim()).saturating_sub(rank))
}

/// An orthonormal basis of `U ∩ V`, built from the principal vectors of the
/// pair. Its vectors lie in `U` exactly and in `V` up to the rank threshold.
pub fn subspace_intersection(u: &Subspace, v: &Subspace, rank_tol: f64) -> Result<Subspace> {
    let m = subspace_intersection_dim(u, v, rank_tol)?;
    if m == 0 {
        return Ok(Subspace::zero(u.ambient_dim));
    }
    let cross = u.basis.adjoint() * &v.basis;
    // left singular vectors of U^* V, from the right singular vectors of
    // V^* U: the top m of them have cosine one
    let f = svd(&cross.adjoint());
    let coeffs = f.v.columns(0, m).into_owned();
    Ok(Subspace { ambient_dim: u.ambient_dim, basis: &u.basis * coeffs })
}

pub(crate) fn stack_columns(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let d = a.nrows();
    let mut out = ComplexMatrix::zeros(d, a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{gaussian_vector, rng_from_seed, sample_unitary};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn check_svd(m: &ComplexMatrix) {
        let f = svd(m);
        let s = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(f.sigma.len(), f.sigma.iter().map(|&x| c(x))));
        let err = frobenius(&(&f.u * s * f.v.adjoint() - m));
        assert!(err <= 1e-12 * frobenius(m).max(1.0), "reconstruction error {err:e}");
        assert!(orthonormality_deviation(&f.v) < 1e-12);
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_of_partial_isometry_products() {
        // overlaps of two supports sharing one direction: singular values are
        // exactly 1 and 0, the case that trips nalgebra's complex SVD
        for seed in 0..300 {
            let d = 2 + (seed as usize) % 5;
            let u = sample_unitary(&mut rng_from_seed(seed), d);
            let a = u.columns(0, 2.min(d)).into_owned();
            let b = ComplexMatrix::from_columns(&[u.column(0).into_owned(), u.column(d - 1).into_owned()]);
            let cross = a.adjoint() * &b;
            check_svd(&cross);
            let sigma = svd(&cross).sigma;
            assert!((sigma[0] - 1.0).abs() < 1e-13, "seed {seed}: {sigma:?}");
        }
    }

    #[test]
    fn svd_of_rank_deficient_products() {
        for seed in 0..300 {
            let mut rng = rng_from_seed(seed);
            let (r, k, cols) = [(4, 2, 4), (6, 3, 6), (3, 1, 5), (5, 2, 2)][seed as usize % 4];
            let x = ComplexMatrix::from_columns(&(0..k).map(|_| gaussian_vector(&mut rng, r)).collect::<Vec<_>>());
            let y = ComplexMatrix::from_columns(&(0..cols).map(|_| gaussian_vector(&mut rng, k)).collect::<Vec<_>>());
            let m = x * y;
            check_svd(&m);
            assert_eq!(numerical_rank(&m, DEFAULT_RANK_TOL), k);
        }
    }

    #[test]
    fn polar_factor_is_unitary() {
        let mut rng = rng_from_seed(4);
        let g = ComplexMatrix::from_columns(&(0..3).map(|_| gaussian_vector(&mut rng, 3)).collect::<Vec<_>>());
        assert!(orthonormality_deviation(&polar_unitary(&g)) < 1e-12);
        let singular = ComplexMatrix::from_fn(3, 3, |i, j| if i == 0 && j == 0 { c(2.0) } else { c(0.0) });
        let p = polar_unitary(&singular);
        assert!(orthonormality_deviation(&p) < 1e-12);
        assert!((p[(0, 0)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn validate_pure_diagonal() {
        let a = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(a.numerical_rank(), 1);
        assert_eq!(a.eigenvalues(), &[1.0, 0.0]);
    }

    #[test]
    fn validate_maximally_mixed() {
        let a = DensityOperator::maximally_mixed(3).unwrap();
        assert_eq!(a.numerical_rank(), 3);
        for &v in a.eigenvalues() {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_threshold_drops_tiny_tail() {
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(0.5), c(0.5), c(1e-15)]));
        // trace is 1 + 1e-15, inside the trace tolerance
        let a = validate_density(m, 1e-10).unwrap();
        assert_eq!(a.numerical_rank(), 2);
    }

    #[test]
    fn validation_errors() {
        let mut m = ComplexMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityOperator::new(m), Err(Error::NotHermitian { .. })));

        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(1.2), c(-0.2)]));
        assert!(matches!(DensityOperator::new(m), Err(Error::NotPsd { .. })));

        let m = ComplexMatrix::identity(2, 2);
        assert!(matches!(DensityOperator::new(m), Err(Error::TraceNotOne { .. })));

        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(DensityOperator::new(m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_clamped() {
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(1.0 + 5e-13), c(-5e-13)]));
        let a = DensityOperator::new(m).unwrap();
        assert_eq!(a.eigenvalues()[1], 0.0);
        assert_eq!(a.numerical_rank(), 1);
    }

    #[test]
    fn effect_bounds() {
        assert!(Effect::new(ComplexMatrix::identity(2, 2)).is_ok());
        let m = ComplexMatrix::identity(2, 2).scale(1.5);
        assert!(matches!(Effect::new(m), Err(Error::NotAnEffect { .. })));
    }

    #[test]
    fn sqrt_of_diagonal_and_projection() {
        let a = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let s = sqrt_psd(&a);
        assert!((s[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((s[(1, 1)].re - 0.75_f64.sqrt()).abs() < 1e-14);
        assert!(s[(0, 1)].norm() < 1e-14);

        let p = PureState::from_real(&[1.0, 2.0, -1.0]).unwrap().to_density();
        let s = sqrt_psd(&p);
        assert!(frobenius(&(&s - p.matrix())) < 1e-12);
    }

    #[test]
    fn supports() {
        let phi = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let s = support(&phi.to_density());
        assert_eq!(s.dim(), 1);
        let overlap = (s.basis().adjoint() * phi.vector())[0].norm();
        assert!((overlap - 1.0).abs() < 1e-12);

        assert_eq!(support(&DensityOperator::maximally_mixed(4).unwrap()).dim(), 4);

        let a = DensityOperator::diagonal(&[0.6, 0.4, 0.0]).unwrap();
        let s = support(&a);
        assert_eq!(s.dim(), 2);
        let e3 = PureState::basis(3, 2);
        assert!((s.basis().adjoint() * e3.vector()).norm() < 1e-14);
    }

    #[test]
    fn membership_examples() {
        let full = DensityOperator::maximally_mixed(2).unwrap();
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        assert!(range_membership(&full, &plus, DEFAULT_MEMBERSHIP_TOL).unwrap());

        let a = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        assert!(!range_membership(&a, &PureState::basis(2, 1), DEFAULT_MEMBERSHIP_TOL).unwrap());
        assert!(!range_membership(&a, &plus, DEFAULT_MEMBERSHIP_TOL).unwrap());
        assert!((kernel_weight(&a, &plus).unwrap() - 0.5).abs() < 1e-14);
        assert!(range_membership(&a, &PureState::basis(2, 0), DEFAULT_MEMBERSHIP_TOL).unwrap());

        let err = range_membership(&a, &PureState::basis(3, 0), 1e-8).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    fn span_of(dim: usize, idx: &[usize]) -> Subspace {
        Subspace::new(ComplexMatrix::from_fn(dim, idx.len(), |r, col| {
            if r == idx[col] { c(1.0) } else { c(0.0) }
        }))
        .unwrap()
    }

    #[test]
    fn intersection_dimensions() {
        let u = span_of(3, &[0, 1]);
        assert_eq!(subspace_intersection_dim(&u, &u, 1e-10).unwrap(), 2);
        let x = span_of(2, &[0]);
        let y = span_of(2, &[1]);
        assert_eq!(subspace_intersection_dim(&x, &y, 1e-10).unwrap(), 0);
        let v = span_of(3, &[1, 2]);
        assert_eq!(subspace_intersection_dim(&u, &v, 1e-10).unwrap(), 1);

        let inter = subspace_intersection(&u, &v, 1e-10).unwrap();
        assert_eq!(inter.dim(), 1);
        assert!((inter.basis()[(1, 0)].norm() - 1.0).abs() < 1e-12);

        assert!(subspace_intersection_dim(&u, &x, 1e-10).is_err());
    }

    #[test]
    fn span_drops_dependent_columns() {
        let m = ComplexMatrix::from_fn(3, 3, |r, col| match (r, col) {
            (0, 0) | (1, 1) => c(1.0),
            (0, 2) | (1, 2) => c(1.0),
            _ => c(0.0),
        });
        let s = Subspace::span(&m, 1e-10);
        assert_eq!(s.dim(), 2);
        assert!(orthonormality_deviation(s.basis()) < 1e-12);
    }
}
