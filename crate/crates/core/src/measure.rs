//! Compatibility detection and the decomposition-based compatibility measure.
//!
//! The measure of a pair `(A, B)` is the supremum of `sum_n sqrt(lambda_n mu_n)`
//! over pure states `Q_n` and probability vectors with
//! `sum lambda_n Q_n = A` and `sum mu_n Q_n = B`. Only components whose pure
//! state lies in both supports contribute, and whatever is left of `A` (or
//! `B`) after removing the shared part can always be decomposed on its own.
//! The search therefore runs over shared components only:
//!
//! - shared pure states `Q_n` live in `supp A ∩ supp B` and are refined by
//!   ascent on a product of unit spheres, from seeded random restarts;
//! - weights under `sum lambda_n Q_n <= A`, `sum mu_n Q_n <= B` are first
//!   handled by dividing them by a Schatten `p`-norm of the constraint (a
//!   smooth upper bound on its largest eigenvalue, `p` = 4, 16, 64), then
//!   polished with a quadratic penalty on the constraint excess whose weight
//!   grows from `1e2` to `1e5`; the smoothing `sqrt(lambda mu + delta)` decays
//!   from `1e-4` to `1e-12` across the rounds;
//! - after each round the weights are rescaled to exact feasibility and the
//!   remainders `A - sum lambda_n Q_n`, `B - sum mu_n Q_n` are
//!   decomposed spectrally, giving a complete certificate.
//!
//! The returned value is always a lower bound certified by the returned
//! decompositions.

use nalgebra::linalg::SymmetricEigen;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::{
    ensure_dim, frobenius, hermitize, singular_values, sqrt_psd, subspace_intersection, subspace_intersection_dim,
    support, ComplexMatrix, ComplexVector, DensityOperator, Operator, PureState, Spectrum,
    DEFAULT_RANK_TOL,
};
use crate::sample::{derive_seed, gaussian_vector, rng_from_seed, SeededRng};

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

/// Surrogate for the constraint `G <= I` used in an optimization round.
#[derive(Debug, Clone, Copy)]
enum Surrogate {
    /// Maximize `log(sum c sqrt(l m + delta)) - (log |G_A|_p + log |G_B|_p) / 2`.
    Schatten(f64),
    /// Maximize `sum c sqrt(l m + delta) - rho/2 tr((G - I)_+^2)` summed over both sides.
    Penalty(f64),
}

/// Rounds with their smoothing offsets. Schatten rounds move the directions
/// freely; penalty rounds polish against the exact constraint.
const ROUNDS: [(Surrogate, f64); 7] = [
    (Surrogate::Schatten(4.0), 1e-4),
    (Surrogate::Schatten(16.0), 1e-5),
    (Surrogate::Schatten(64.0), 1e-6),
    (Surrogate::Penalty(1e2), 1e-7),
    (Surrogate::Penalty(1e3), 1e-8),
    (Surrogate::Penalty(1e4), 1e-10),
    (Surrogate::Penalty(1e5), 1e-12),
];
const ITERS_PER_ROUND: usize = 120;
const STALL_LIMIT: usize = 6;
const STALL_TOL: f64 = 1e-12;
const BACKTRACK_LIMIT: usize = 30;
const INITIAL_STEP: f64 = 1e-2;
const MAX_STEP: f64 = 1.0;
/// Remainder eigenvalues at or below this are dropped from the certificate.
const REMAINDER_FLOOR: f64 = 1e-15;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConfig {
    /// Cap on the number of shared pure states; `None` means `2 * dim`.
    pub components: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub feas_tol: f64,
    pub rank_tol: f64,
    pub execution: Execution,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            components: None,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            feas_tol: DEFAULT_FEAS_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            execution: Execution::default(),
        }
    }
}

impl MeasureConfig {
    pub fn with_seed(seed: u64) -> Self {
        MeasureConfig { seed, ..Self::default() }
    }

    pub fn components_for(&self, dim: usize) -> usize {
        self.components.unwrap_or(2 * dim)
    }
}

/// Weights on a list of pure states.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub pures: Vec<PureState>,
}

impl Decomposition {
    /// `sum_n w_n Q_n`.
    pub fn reconstruct(&self, dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, q) in self.weights.iter().zip(&self.pures) {
            if *w != 0.0 {
                m += q.projection().scale(*w);
            }
        }
        m
    }

    /// Frobenius distance between the reconstruction and `target`.
    pub fn residual(&self, target: &ComplexMatrix) -> f64 {
        frobenius(&(self.reconstruct(target.nrows()) - target))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// Certified lower bound on the measure.
    pub value: f64,
    pub decomposition_a: Decomposition,
    /// Same pure states as `decomposition_a`, different weights.
    pub decomposition_b: Decomposition,
    /// Larger of the two reconstruction residuals.
    pub residual: f64,
    pub restarts_used: usize,
    /// Number of shared pure states searched over.
    pub components: usize,
    /// Dimension of the intersection of the supports.
    pub intersection_dim: usize,
}

impl MeasureResult {
    /// `sum_n sqrt(w_a[n] * w_b[n])` recomputed from the certificate.
    pub fn certificate_value(&self) -> f64 {
        certificate_value(&self.decomposition_a.weights, &self.decomposition_b.weights)
    }

    /// The same certificate with the roles of the two states exchanged.
    pub fn swapped(self) -> MeasureResult {
        MeasureResult {
            decomposition_a: self.decomposition_b,
            decomposition_b: self.decomposition_a,
            ..self
        }
    }
}

fn certificate_value(wa: &[f64], wb: &[f64]) -> f64 {
    wa.iter().zip(wb).map(|(a, b)| (a * b).sqrt()).sum()
}

/// Dimension of `supp A ∩ supp B`.
pub fn intersection_dim(a: &DensityOperator, b: &DensityOperator) -> Result<usize> {
    ensure_dim(a.dim(), b.dim())?;
    let tol = a.spectrum().rank_tol().max(b.spectrum().rank_tol());
    subspace_intersection_dim(&support(a), &support(b), tol)
}

/// Whether the supports of `a` and `b` intersect nontrivially.
pub fn is_compatible(a: &DensityOperator, b: &DensityOperator) -> Result<bool> {
    Ok(intersection_dim(a, b)? >= 1)
}

/// Uhlmann fidelity `tr sqrt(A^{1/2} B A^{1/2})`, evaluated as the sum of the
/// singular values of `A^{1/2} B^{1/2}`.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    ensure_dim(a.dim(), b.dim())?;
    let f: f64 = singular_values(&(sqrt_psd(a) * sqrt_psd(b))).iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Best certified lower bound on the compatibility measure of `(a, b)`.
pub fn example_measure(a: &DensityOperator, b: &DensityOperator, cfg: &MeasureConfig) -> Result<MeasureResult> {
    ensure_dim(a.dim(), b.dim())?;
    let d = a.dim();
    let components = cfg.components_for(d);
    let needed = a.numerical_rank().max(b.numerical_rank());
    if components < needed {
        return Err(Error::InvalidConfig(format!("components = {components} < max(rank A, rank B) = {needed}")));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    if cfg.feas_tol.is_nan() || cfg.feas_tol < 0.0 {
        return Err(Error::InvalidConfig(format!("feas_tol = {} must be non-negative", cfg.feas_tol)));
    }

    let shared = subspace_intersection(&support(a), &support(b), cfg.rank_tol)?;
    let k = shared.dim();
    if k == 0 {
        let cert = complete_certificate(a, b, &[], &[], &[]);
        return finish(cert, cfg.feas_tol, 0, components, 0);
    }

    let problem = SharedProblem::new(a, b, shared.basis());
    // a one-dimensional intersection admits a single shared direction, so the
    // optimum is attained without search
    let (restarts, count) = if k == 1 { (1, 1) } else { (cfg.restarts, components) };

    let candidates = map_indexed(restarts, cfg.execution, |r| {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, r as u64));
        let best = problem.run_restart(r, count, &mut rng);
        let vectors: Vec<ComplexVector> = best.z.iter().map(|z| problem.basis * z).collect();
        let (lambda, mu) = problem.feasible_weights(&best);
        let cert = complete_certificate(a, b, &vectors, &lambda, &mu);
        (cert.value, cert)
    });

    let mut best: Option<Certificate> = None;
    let mut best_residual = f64::INFINITY;
    for (value, cert) in candidates {
        best_residual = best_residual.min(cert.residual);
        if cert.residual > cfg.feas_tol {
            continue;
        }
        // strict comparison keeps the lowest restart index on ties
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(cert);
        }
    }
    match best {
        Some(cert) => finish(cert, cfg.feas_tol, restarts, count, k),
        None => Err(Error::Infeasible { best_residual }),
    }
}

/// Symmetrized measure: the better of both argument orders, run with the
/// same seed. The reported value does not depend on the argument order.
pub fn measure_symmetric(a: &DensityOperator, b: &DensityOperator, cfg: &MeasureConfig) -> Result<MeasureResult> {
    ensure_dim(a.dim(), b.dim())?;
    let swapped = canonical_order(a, b) == std::cmp::Ordering::Greater;
    let (x, y) = if swapped { (b, a) } else { (a, b) };
    let forward = example_measure(x, y, cfg)?;
    let backward = example_measure(y, x, cfg)?.swapped();
    let best = if backward.value > forward.value { backward } else { forward };
    Ok(if swapped { best.swapped() } else { best })
}

fn canonical_order(a: &DensityOperator, b: &DensityOperator) -> std::cmp::Ordering {
    for (x, y) in a.matrix().iter().zip(b.matrix().iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

struct Certificate {
    value: f64,
    decomposition_a: Decomposition,
    decomposition_b: Decomposition,
    residual: f64,
}

fn finish(cert: Certificate, feas_tol: f64, restarts: usize, components: usize, k: usize) -> Result<MeasureResult> {
    if cert.residual > feas_tol {
        return Err(Error::Infeasible { best_residual: cert.residual });
    }
    Ok(MeasureResult {
        value: cert.value,
        decomposition_a: cert.decomposition_a,
        decomposition_b: cert.decomposition_b,
        residual: cert.residual,
        restarts_used: restarts,
        components,
        intersection_dim: k,
    })
}

/// Shared components plus spectral decompositions of both remainders.
fn complete_certificate(
    a: &DensityOperator,
    b: &DensityOperator,
    shared: &[ComplexVector],
    lambda: &[f64],
    mu: &[f64],
) -> Certificate {
    let d = a.dim();
    let mut pures: Vec<PureState> = Vec::new();
    let mut wa: Vec<f64> = Vec::new();
    let mut wb: Vec<f64> = Vec::new();
    let mut used_a = ComplexMatrix::zeros(d, d);
    let mut used_b = ComplexMatrix::zeros(d, d);
    for (n, v) in shared.iter().enumerate() {
        let q = PureState::normalized(v.clone()).expect("shared directions are nonzero");
        used_a += q.projection().scale(lambda[n]);
        used_b += q.projection().scale(mu[n]);
        pures.push(q);
        wa.push(lambda[n]);
        wb.push(mu[n]);
    }
    for (remainder, on_a) in [(a.matrix() - &used_a, true), (b.matrix() - &used_b, false)] {
        let spec = Spectrum::of_hermitian(&remainder, 0.0);
        for (i, &t) in spec.values().iter().enumerate() {
            if t <= REMAINDER_FLOOR {
                continue;
            }
            pures.push(PureState::normalized(spec.vectors().column(i).into_owned()).expect("unit eigenvector"));
            wa.push(if on_a { t } else { 0.0 });
            wb.push(if on_a { 0.0 } else { t });
        }
    }
    let decomposition_a = Decomposition { weights: wa, pures: pures.clone() };
    let decomposition_b = Decomposition { weights: wb, pures };
    let residual = decomposition_a.residual(a.matrix()).max(decomposition_b.residual(b.matrix()));
    Certificate {
        value: certificate_value(&decomposition_a.weights, &decomposition_b.weights),
        decomposition_a,
        decomposition_b,
        residual,
    }
}

/// Search state. Shared pure state `n` is `basis * z[n]`. Its weights are
/// stored normalized: `lambda_n = l[n] / |W_A z_n|^2` with
/// `W_A = A^{-1/2}` restricted to the support, so that `sum lambda_n Q_n <= A`
/// becomes `G_A = sum l_n a_n a_n^* <= I` with unit vectors `a_n`.
#[derive(Clone)]
struct Point {
    z: Vec<ComplexVector>,
    l: Vec<f64>,
    m: Vec<f64>,
}

struct SharedProblem<'a> {
    basis: &'a ComplexMatrix,
    /// `diag(a^{-1/2}) E_A^* basis`, `rank A x k`.
    wa: ComplexMatrix,
    wb: ComplexMatrix,
    /// Compressions of `A` and `B` to the shared subspace.
    a_shared: ComplexMatrix,
    b_shared: ComplexMatrix,
}

/// Per-component quantities derived from the directions.
struct Geometry {
    ua: Vec<ComplexVector>,
    ub: Vec<ComplexVector>,
    na: Vec<f64>,
    nb: Vec<f64>,
}

/// Scalar function of a PSD matrix `G` with its derivative in `G`.
struct Spectral {
    value: f64,
    derivative: ComplexMatrix,
}

/// Smoothed objective and its gradients.
struct Evaluation {
    value: f64,
    grad_l: Vec<f64>,
    grad_m: Vec<f64>,
    grad_z: Vec<ComplexVector>,
}

fn whitening(op: &DensityOperator, basis: &ComplexMatrix) -> ComplexMatrix {
    let spec = op.spectrum();
    let r = spec.rank();
    let mut w = spec.vectors().columns(0, r).adjoint() * basis;
    for i in 0..r {
        let s = 1.0 / spec.values()[i].sqrt();
        w.row_mut(i).iter_mut().for_each(|z| *z *= s);
    }
    w
}

/// `|G|_p` with derivative `(G / |G|_p)^(p-1)`.
fn schatten(g: &ComplexMatrix, p: f64, with_derivative: bool) -> Spectral {
    let n = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut derivative = ComplexMatrix::zeros(n, n);
    if top <= 0.0 {
        return Spectral { value: 0.0, derivative };
    }
    let sum: f64 = eig.eigenvalues.iter().map(|&e| (e.max(0.0) / top).powf(p)).sum();
    let value = top * sum.powf(1.0 / p);
    if with_derivative {
        for i in 0..n {
            let e = eig.eigenvalues[i];
            if e > 0.0 {
                let v = eig.eigenvectors.column(i);
                derivative += (v * v.adjoint()).scale((e / value).powf(p - 1.0));
            }
        }
    }
    Spectral { value, derivative }
}

/// `tr (G - I)_+^2` with derivative `2 (G - I)_+`.
fn excess(g: &ComplexMatrix, with_derivative: bool) -> Spectral {
    let n = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let mut value = 0.0;
    let mut derivative = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let over = eig.eigenvalues[i] - 1.0;
        if over > 0.0 {
            value += over * over;
            if with_derivative {
                let v = eig.eigenvectors.column(i);
                derivative += (v * v.adjoint()).scale(2.0 * over);
            }
        }
    }
    Spectral { value, derivative }
}

fn gram(vectors: &[ComplexVector], norms: &[f64], weights: &[f64], dim: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for ((u, &n), &w) in vectors.iter().zip(norms).zip(weights) {
        if w != 0.0 {
            g += (u * u.adjoint()).scale(w / (n * n));
        }
    }
    g
}

fn largest_eigenvalue(g: &ComplexMatrix) -> f64 {
    SymmetricEigen::new(g.clone()).eigenvalues.iter().copied().fold(0.0, f64::max)
}

fn random_unit<R: rand::Rng>(rng: &mut R, k: usize) -> ComplexVector {
    loop {
        let v = gaussian_vector(rng, k);
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

/// Gradient of `u^* D u / |u|^2` with respect to `z`, where `u = W z`.
fn rayleigh_gradient(w: &ComplexMatrix, d: &ComplexMatrix, u: &ComplexVector, n2: f64) -> ComplexVector {
    let du = d * u;
    let h = u.dotc(&du).re / n2;
    (w.adjoint() * (du - u.scale(h))).scale(2.0 / n2)
}

impl<'a> SharedProblem<'a> {
    fn new(a: &DensityOperator, b: &DensityOperator, basis: &'a ComplexMatrix) -> Self {
        let a_shared = hermitize(&(basis.adjoint() * a.matrix() * basis));
        let b_shared = hermitize(&(basis.adjoint() * b.matrix() * basis));
        SharedProblem { basis, wa: whitening(a, basis), wb: whitening(b, basis), a_shared, b_shared }
    }

    fn k(&self) -> usize {
        self.basis.ncols()
    }

    fn geometry(&self, z: &[ComplexVector]) -> Geometry {
        let ua: Vec<ComplexVector> = z.iter().map(|z| &self.wa * z).collect();
        let ub: Vec<ComplexVector> = z.iter().map(|z| &self.wb * z).collect();
        let na = ua.iter().map(|u| u.norm()).collect();
        let nb = ub.iter().map(|u| u.norm()).collect();
        Geometry { ua, ub, na, nb }
    }

    fn grams(&self, geo: &Geometry, pt: &Point) -> (ComplexMatrix, ComplexMatrix) {
        (
            gram(&geo.ua, &geo.na, &pt.l, self.wa.nrows()),
            gram(&geo.ub, &geo.nb, &pt.m, self.wb.nrows()),
        )
    }

    /// Smoothed objective of a round. Under the Schatten surrogate the
    /// weights can be rescaled by the norms, which bound the largest
    /// eigenvalues, so the value there is itself a certified bound.
    fn evaluate(&self, pt: &Point, surrogate: Surrogate, delta: f64, with_gradient: bool) -> Evaluation {
        let n = pt.z.len();
        let geo = self.geometry(&pt.z);
        let (ga, gb) = self.grams(&geo, pt);
        let (ca, cb) = match surrogate {
            Surrogate::Schatten(p) => (schatten(&ga, p, with_gradient), schatten(&gb, p, with_gradient)),
            Surrogate::Penalty(_) => (excess(&ga, with_gradient), excess(&gb, with_gradient)),
        };
        let c: Vec<f64> = (0..n).map(|i| 1.0 / (geo.na[i] * geo.nb[i])).collect();
        let roots: Vec<f64> = (0..n).map(|i| (pt.l[i] * pt.m[i] + delta).sqrt()).collect();
        let total: f64 = (0..n).map(|i| c[i] * roots[i]).sum();

        // objective = gain_scale-weighted gain minus constraint terms; the
        // gradient of each side's term is side_scale * d(term)/dG
        let (value, gain_scale, scale_a, scale_b) = match surrogate {
            Surrogate::Schatten(_) => {
                if !(ca.value > 0.0 && cb.value > 0.0 && total > 0.0) {
                    return Evaluation { value: f64::NEG_INFINITY, grad_l: vec![], grad_m: vec![], grad_z: vec![] };
                }
                let value = total.ln() - 0.5 * (ca.value.ln() + cb.value.ln());
                (value, 1.0 / total, 0.5 / ca.value, 0.5 / cb.value)
            }
            Surrogate::Penalty(rho) => (total - 0.5 * rho * (ca.value + cb.value), 1.0, 0.5 * rho, 0.5 * rho),
        };
        if !with_gradient {
            return Evaluation { value, grad_l: vec![], grad_m: vec![], grad_z: vec![] };
        }

        let mut grad_l = Vec::with_capacity(n);
        let mut grad_m = Vec::with_capacity(n);
        let mut grad_z = Vec::with_capacity(n);
        for i in 0..n {
            let (ua, ub) = (&geo.ua[i], &geo.ub[i]);
            let (na2, nb2) = (geo.na[i] * geo.na[i], geo.nb[i] * geo.nb[i]);
            let qa = ua.dotc(&(&ca.derivative * ua)).re / na2;
            let qb = ub.dotc(&(&cb.derivative * ub)).re / nb2;
            grad_l.push(gain_scale * c[i] * pt.m[i] / (2.0 * roots[i]) - scale_a * qa);
            grad_m.push(gain_scale * c[i] * pt.l[i] / (2.0 * roots[i]) - scale_b * qb);

            // gradient of c_n = 1 / (|W_A z| |W_B z|)
            let grad_c = ((self.wa.adjoint() * ua).unscale(na2) + (self.wb.adjoint() * ub).unscale(nb2)).scale(-c[i]);
            let mut g = grad_c.scale(gain_scale * roots[i]);
            if pt.l[i] != 0.0 {
                g -= rayleigh_gradient(&self.wa, &ca.derivative, ua, na2).scale(scale_a * pt.l[i]);
            }
            if pt.m[i] != 0.0 {
                g -= rayleigh_gradient(&self.wb, &cb.derivative, ub, nb2).scale(scale_b * pt.m[i]);
            }
            // project onto the tangent space of the unit sphere
            let z = &pt.z[i];
            let radial = z.dotc(&g);
            grad_z.push(g - z * radial);
        }
        Evaluation { value, grad_l, grad_m, grad_z }
    }

    fn largest_eigenvalues(&self, pt: &Point) -> (Geometry, f64, f64) {
        let geo = self.geometry(&pt.z);
        let (ga, gb) = self.grams(&geo, pt);
        (geo, largest_eigenvalue(&ga), largest_eigenvalue(&gb))
    }

    /// Exactly feasible value `sum_n sqrt(lambda_n mu_n)` after rescaling.
    fn feasible_value(&self, pt: &Point) -> f64 {
        let (geo, ga, gb) = self.largest_eigenvalues(pt);
        if !(ga > 0.0 && gb > 0.0) {
            return 0.0;
        }
        let raw: f64 = (0..pt.z.len()).map(|n| (pt.l[n] * pt.m[n]).sqrt() / (geo.na[n] * geo.nb[n])).sum();
        raw / (ga * gb).sqrt()
    }

    /// Rescaled weights `(lambda, mu)` with `sum lambda_n Q_n <= A` and
    /// `sum mu_n Q_n <= B`.
    fn feasible_weights(&self, pt: &Point) -> (Vec<f64>, Vec<f64>) {
        let (geo, ga, gb) = self.largest_eigenvalues(pt);
        let sa = if ga > 0.0 { 1.0 / ga } else { 0.0 };
        let sb = if gb > 0.0 { 1.0 / gb } else { 0.0 };
        let lambda = (0..pt.z.len()).map(|n| sa * pt.l[n] / (geo.na[n] * geo.na[n])).collect();
        let mu = (0..pt.z.len()).map(|n| sb * pt.m[n] / (geo.nb[n] * geo.nb[n])).collect();
        (lambda, mu)
    }

    fn rescale_to_feasible(&self, pt: &mut Point) {
        let (_, ga, gb) = self.largest_eigenvalues(pt);
        if ga > 0.0 {
            pt.l.iter_mut().for_each(|x| *x /= ga);
        }
        if gb > 0.0 {
            pt.m.iter_mut().for_each(|x| *x /= gb);
        }
    }

    /// Directions from the eigenvectors of a compression, weighted by the
    /// diagonal of both states in that basis.
    fn spectral_start(&self, m: &ComplexMatrix, count: usize, rng: &mut SeededRng) -> Point {
        let k = self.k();
        let eig = SymmetricEigen::new(m.clone());
        let mut z: Vec<ComplexVector> = (0..k).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
        let mut l = Vec::with_capacity(count);
        let mut mm = Vec::with_capacity(count);
        for v in &z {
            let la = v.dotc(&(&self.a_shared * v)).re.max(0.0);
            let mb = v.dotc(&(&self.b_shared * v)).re.max(0.0);
            // lambda_n = l_n / |W_A z_n|^2
            l.push(la * (&self.wa * v).norm_squared());
            mm.push(mb * (&self.wb * v).norm_squared());
        }
        // padding starts at zero weight so the start is exactly the
        // spectral decomposition
        while z.len() < count {
            z.push(random_unit(rng, k));
            l.push(0.0);
            mm.push(0.0);
        }
        z.truncate(count);
        l.truncate(count);
        mm.truncate(count);
        Point { z, l, m: mm }
    }

    fn random_start(&self, count: usize, rng: &mut SeededRng) -> Point {
        let k = self.k();
        let z = (0..count).map(|_| random_unit(rng, k)).collect();
        let l = (0..count).map(|_| rng.random::<f64>() + 0.1).collect();
        let m = (0..count).map(|_| rng.random::<f64>() + 0.1).collect();
        Point { z, l, m }
    }

    fn start(&self, restart: usize, count: usize, rng: &mut SeededRng) -> Point {
        let mixed = &self.a_shared + self.b_shared.scale(GOLDEN);
        match restart {
            0 => self.spectral_start(&mixed, count, rng),
            1 => self.spectral_start(&self.a_shared, count, rng),
            2 => self.spectral_start(&self.b_shared, count, rng),
            _ => self.random_start(count, rng),
        }
    }

    /// Backtracking ascent along `step(point, t)`. Returns whether a step was
    /// accepted; `t` grows after success and shrinks while searching.
    fn line_search(
        &self,
        point: &mut Point,
        current: &mut f64,
        t: &mut f64,
        schedule: (Surrogate, f64),
        step: impl Fn(&Point, f64) -> Point,
    ) -> bool {
        for _ in 0..BACKTRACK_LIMIT {
            let trial = step(point, *t);
            let value = self.evaluate(&trial, schedule.0, schedule.1, false).value;
            if value > *current {
                *point = trial;
                *current = value;
                *t = (*t * 2.0).min(MAX_STEP);
                return true;
            }
            *t *= 0.5;
        }
        *t = INITIAL_STEP;
        false
    }

    fn run_restart(&self, restart: usize, count: usize, rng: &mut SeededRng) -> Point {
        let mut point = self.start(restart, count, rng);
        self.rescale_to_feasible(&mut point);
        let mut best = point.clone();
        let mut best_value = self.feasible_value(&point);
        if self.k() == 1 {
            return best;
        }

        let mut step_w = INITIAL_STEP;
        let mut step_z = INITIAL_STEP;
        for &schedule in &ROUNDS {
            let (surrogate, delta) = schedule;
            let mut current = self.evaluate(&point, surrogate, delta, false).value;
            let mut stalls = 0;
            for _ in 0..ITERS_PER_ROUND {
                let before = current;

                let eval = self.evaluate(&point, surrogate, delta, true);
                self.line_search(&mut point, &mut current, &mut step_w, schedule, |pt, t| {
                    let mut trial = pt.clone();
                    for n in 0..trial.l.len() {
                        trial.l[n] = (trial.l[n] + t * eval.grad_l[n]).max(0.0);
                        trial.m[n] = (trial.m[n] + t * eval.grad_m[n]).max(0.0);
                    }
                    trial
                });

                let eval = self.evaluate(&point, surrogate, delta, true);
                self.line_search(&mut point, &mut current, &mut step_z, schedule, |pt, t| {
                    let mut trial = pt.clone();
                    for (z, g) in trial.z.iter_mut().zip(&eval.grad_z) {
                        let moved = &*z + g.scale(t);
                        let norm = moved.norm();
                        *z = moved.unscale(norm);
                    }
                    trial
                });

                if current - before <= STALL_TOL {
                    stalls += 1;
                    if stalls >= STALL_LIMIT {
                        break;
                    }
                } else {
                    stalls = 0;
                }
            }
            // Schatten rounds are scale free; start every round on the boundary
            self.rescale_to_feasible(&mut point);
            let value = self.feasible_value(&point);
            if value > best_value {
                best_value = value;
                best = point.clone();
            }
        }
        best
    }
}

use rand::Rng as _;
