//! Strength of an effect along a ray.
//!
//! For an effect `T` and a unit vector `phi`, the strength is the largest
//! `lambda in [0, 1]` with `lambda * P_phi <= T`. When `phi` lies in the range
//! of `T^{1/2}` it equals `||T^{-1/2} phi||^{-2}`, otherwise it is zero.
//! [`strength`] evaluates the closed form from the spectral cache;
//! [`strength_oracle`] bisects on the operator inequality directly and shares
//! no code path with it beyond the eigensolver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_dim, kernel_weight, min_eigenvalue, Operator, PureState, DEFAULT_MEMBERSHIP_TOL,
};
use crate::sample::{derive_seed, rng_from_seed, sample_pure, sample_pure_in};

/// Kernel weights between the membership tolerance and this bound are flagged
/// as near the range boundary.
pub const NEAR_BOUNDARY_LIMIT: f64 = 1e-4;
/// Slack on the minimum eigenvalue accepted as `>= 0` by the oracle.
pub const ORACLE_PSD_SLACK: f64 = 1e-13;
pub const ORACLE_DEFAULT_TOL: f64 = 1e-10;
pub const BISECTION_MAX_ITERS: usize = 80;
/// Agreement required per ray by [`effects_equal_by_strength`].
pub const STRENGTH_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthResult {
    pub value: f64,
    /// Whether the ray lies in the range of `T^{1/2}`.
    pub in_range: bool,
    /// Set when the ray was classified out of range but its kernel component
    /// is small enough that the classification is fragile.
    pub near_boundary: bool,
    /// Squared norm of the component of the ray in the kernel of `T`.
    pub kernel_weight: f64,
}

/// Strength with the default membership tolerance.
pub fn strength<T: Operator + ?Sized>(t: &T, phi: &PureState) -> Result<StrengthResult> {
    strength_with(t, phi, DEFAULT_MEMBERSHIP_TOL)
}

pub fn strength_with<T: Operator + ?Sized>(t: &T, phi: &PureState, eps_mem: f64) -> Result<StrengthResult> {
    let kernel = kernel_weight(t, phi)?;
    if kernel > eps_mem {
        return Ok(StrengthResult {
            value: 0.0,
            in_range: false,
            near_boundary: kernel < NEAR_BOUNDARY_LIMIT,
            kernel_weight: kernel,
        });
    }
    let spectrum = t.spectrum();
    let coords = spectrum.vectors().adjoint() * phi.vector();
    let inverse_norm: f64 = spectrum.values()[..spectrum.rank()]
        .iter()
        .zip(coords.iter())
        .map(|(&ti, c)| c.norm_sqr() / ti)
        .sum();
    let value = if inverse_norm > 0.0 { (1.0 / inverse_norm).clamp(0.0, 1.0) } else { 0.0 };
    Ok(StrengthResult { value, in_range: true, near_boundary: false, kernel_weight: kernel })
}

/// `sup { lambda in [0, 1] : T - lambda P >= 0 }` by bisection on the minimum
/// eigenvalue, to absolute tolerance `tol`.
pub fn strength_oracle<T: Operator + ?Sized>(t: &T, p: &PureState, tol: f64) -> Result<f64> {
    ensure_dim(t.dim(), p.dim())?;
    let feasible = |lambda: f64| min_eigenvalue(&(t.matrix() - p.projection().scale(lambda))) >= -ORACLE_PSD_SLACK;
    if feasible(1.0) {
        return Ok(1.0);
    }
    if !feasible(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..BISECTION_MAX_ITERS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Squared compatibility between `A = lambda P + mu Q` (orthogonal pure
/// states, `lambda < mu`) and a pure state `R` in their span, as a function of
/// `overlap = tr PR`:
///
/// `lambda mu / ((mu - lambda) overlap + lambda)`.
pub fn two_state_formula(lambda: f64, mu: f64, overlap: f64) -> Result<f64> {
    if !(0.0 < lambda && lambda < mu && mu < 1.0) {
        return Err(Error::InvalidWeights(format!("need 0 < lambda < mu < 1, got lambda={lambda}, mu={mu}")));
    }
    if (lambda + mu - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("lambda + mu = {}, expected 1", lambda + mu)));
    }
    if !(-1e-12..=1.0 + 1e-12).contains(&overlap) {
        return Err(Error::InvalidWeights(format!("overlap {overlap} outside [0, 1]")));
    }
    let t = overlap.clamp(0.0, 1.0);
    let den = mu * t + lambda * (1.0 - t);
    // evaluation order keeps the endpoints exact: t = 1 gives lambda, t = 0 gives mu
    Ok(if t >= 0.5 { lambda * (mu / den) } else { mu * (lambda / den) })
}

/// Randomized equality test for effects: compares strengths along `n_rays`
/// seeded rays. `false` proves the effects differ; `true` is evidence only.
///
/// Rays cycle through generic directions and directions drawn from the
/// supports of `s` and `t`, so low-rank effects are probed where their
/// strengths are nonzero.
pub fn effects_equal_by_strength<S, T>(s: &S, t: &T, n_rays: usize, seed: u64) -> Result<bool>
where
    S: Operator + ?Sized,
    T: Operator + ?Sized,
{
    ensure_dim(s.dim(), t.dim())?;
    let d = s.dim();
    let support_s = s.spectrum().support_vectors();
    let support_t = t.spectrum().support_vectors();
    for i in 0..n_rays {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let ray = match i % 3 {
            1 if support_s.ncols() > 0 => sample_pure_in(&mut rng, &support_s),
            2 if support_t.ncols() > 0 => sample_pure_in(&mut rng, &support_t),
            _ => sample_pure(&mut rng, d),
        };
        let a = strength(s, &ray)?.value;
        let b = strength(t, &ray)?.value;
        if (a - b).abs() > STRENGTH_AGREEMENT_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
