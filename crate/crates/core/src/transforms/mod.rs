//! The transform chain `G_μ → H_μ → H_μ^{-1} → C_μ` and its inversion.
//!
//! Conventions:
//!
//! * `sqrt_cut_negative` is the principal root (`1^{1/2} = 1`);
//!   `sqrt_cut_positive` has its cut on `[0, ∞)` and `√(-1) = i`.
//! * `H_μ(z)/z = λ g² + (1 - λ) g` with `g = (1/√z) G_μ(1/√z)`.
//! * `C_μ(z) = U(z / H_μ^{-1}(z) - 1)`.
//!
//! For a symmetric `μ`, `g(z) = ∫ dμ(t)/(1 - z t²)`, which is even in `√z`
//! and analytic off `[1/R², ∞)` when the support lies in `[-R, R]`. The
//! numerical routines use this form and so never see the cut of `√z`.

mod grid;
mod recover;
mod rtransform;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{NonnegativeMeasure, SymmetricMeasure};

pub use grid::{sector_contour, TransformGrid, TransformKind};
pub use recover::{recover_measure, recover_measure_with_report, RecoveryReport};
pub use rtransform::{
    rect_cumulants, rect_cumulants_of_measure, ClosureRTransform, LevyRTransform, MeasureRTransform, RTransform,
    ScaledRTransform, SumRTransform,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Numerical parameters of the transform engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourConfig {
    /// Half-opening of the sector `Δ_{α,β} = {z : |arg z - π| < α, |z| < β}`.
    pub alpha: f64,
    pub beta: f64,
    /// Number of sample points of a [`TransformGrid`].
    pub n_points: usize,
    /// Decreasing offsets `ε` below the real axis used for Stieltjes inversion.
    pub epsilon_schedule: Vec<f64>,
    /// Relative residual accepted by the Newton solvers.
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    /// Maximum number of step halvings along a continuation path.
    pub max_bisections: usize,
    /// Nodes of the scans used for atom and support detection on `[0, R]`.
    pub coarse_points: usize,
    /// Nodes per support interval (on the half line) of the final density.
    pub interval_points: usize,
    /// Smallest atom mass reported by recovery.
    pub atom_threshold: f64,
    /// Largest tolerated deviation of the recovered mass from 1.
    pub mass_tolerance: f64,
    /// How often recovery may double the support hint before giving up.
    pub max_hint_doublings: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_PI_2,
            beta: 0.05,
            n_points: 64,
            epsilon_schedule: vec![1e-4, 5e-5, 2.5e-5, 1.25e-5],
            newton_tolerance: 1e-13,
            newton_max_iterations: 50,
            max_bisections: 30,
            coarse_points: 401,
            interval_points: 801,
            atom_threshold: 1e-7,
            mass_tolerance: 1e-3,
            max_hint_doublings: 3,
        }
    }
}

impl ContourConfig {
    /// `true` when `z` lies in `Δ_{α,β}`.
    pub fn in_domain(&self, z: Complex64) -> bool {
        let arg = z.arg();
        let from_pi = std::f64::consts::PI - arg.abs();
        z != ZERO && z.norm() < self.beta && from_pi < self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < std::f64::consts::PI) || !(self.beta > 0.0) || self.n_points < 2 {
            return Err(Error::InvalidArgument("need 0 < alpha < π, beta > 0 and n_points ≥ 2".into()));
        }
        let eps = &self.epsilon_schedule;
        if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "epsilon schedule needs at least two positive, strictly decreasing entries".into(),
            ));
        }
        if !(self.newton_tolerance > 0.0) || self.newton_max_iterations == 0 {
            return Err(Error::InvalidArgument("Newton tolerance and iteration cap must be positive".into()));
        }
        if self.coarse_points < 16 || self.interval_points < 8 {
            return Err(Error::InvalidArgument("grid sizes are too small".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// Principal square root; rejects `(-∞, 0]`.
pub fn sqrt_cut_negative(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::BranchCut(z));
    }
    Ok(z.sqrt())
}

/// Square root with its cut on `[0, ∞)` and `√(-1) = i`; rejects `[0, ∞)`.
pub fn sqrt_cut_positive(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::BranchCut(z));
    }
    Ok(Complex64::i() * (-z).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxMap {
    U,
    T,
    V,
}

/// `U(z)` and `U'(z)`. Written as `2z / (λ + 1 + [(λ+1)² + 4λz]^{1/2})`,
/// which equals the usual form for `λ > 0`, is exact at `λ = 0` and avoids
/// cancellation for small `λ`.
pub(crate) fn u_map(lambda: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    if lambda == 0.0 {
        return Ok((z, ONE));
    }
    let l1 = lambda + 1.0;
    let root = sqrt_cut_negative(l1 * l1 + 4.0 * lambda * z)?;
    Ok((2.0 * z / (l1 + root), 1.0 / root))
}

/// `U`, `U'` and the square root used, continued from the sheet whose root
/// is `near` (the principal sheet for `None`). `T(U(z)) = z + 1` on both
/// sheets; following the root keeps `U` analytic along a path.
pub(crate) fn u_map_continued(
    lambda: f64,
    z: Complex64,
    near: Option<Complex64>,
) -> Result<(Complex64, Complex64, Complex64)> {
    if lambda == 0.0 {
        return Ok((z, ONE, ONE));
    }
    let l1 = lambda + 1.0;
    let disc = l1 * l1 + 4.0 * lambda * z;
    let mut root = match near {
        None => sqrt_cut_negative(disc)?,
        Some(_) => disc.sqrt(),
    };
    if let Some(prev) = near {
        if (root + prev).norm() < (root - prev).norm() {
            root = -root;
        }
    }
    // both forms agree; pick the one without cancellation
    let u = if root.re >= 0.0 { 2.0 * z / (l1 + root) } else { (root - l1) / (2.0 * lambda) };
    Ok((u, 1.0 / root, root))
}

/// `T(X) = (λX + 1)(X + 1)` and `T'(X)`.
pub(crate) fn t_map(lambda: f64, x: Complex64) -> (Complex64, Complex64) {
    ((lambda * x + 1.0) * (x + 1.0), 2.0 * lambda * x + lambda + 1.0)
}

pub fn auxiliary_map(kind: AuxMap, lambda: f64, z: Complex64) -> Result<Complex64> {
    check_lambda(lambda)?;
    match kind {
        AuxMap::U => Ok(u_map(lambda, z)?.0),
        AuxMap::T => Ok(t_map(lambda, z).0),
        AuxMap::V => Ok(u_map(lambda, z - 1.0)?.0 + 1.0),
    }
}

/// `G_μ(z) = ∫ dμ(t)/(z - t)`.
pub fn cauchy_transform(mu: &SymmetricMeasure, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        if mu.atoms().iter().any(|a| a.0 == z.re) {
            return Err(Error::InsideSupport(z));
        }
        if let Some(d) = mu.density() {
            let inside = z.re > d.lower() && z.re < d.upper();
            if inside && (d.eval(z.re) > 0.0 || touches_mass(d, z.re)) {
                return Err(Error::InsideSupport(z));
            }
        }
    }
    Ok(mu.cauchy_with_derivative(z).0)
}

/// `true` when `x` lies in the closure of a grid cell with positive mass.
fn touches_mass(d: &crate::measures::PiecewiseLinear, x: f64) -> bool {
    let g = d.grid();
    let v = d.values();
    let i = g.partition_point(|&t| t < x);
    let left = i > 0 && (v[i - 1] > 0.0 || v.get(i).is_some_and(|&w| w > 0.0));
    let right = i < g.len() && v[i] > 0.0;
    left || right
}

/// `H_μ(z)` and `H_μ'(z)` through `g(z) = ∫ dμ(t)/(1 - z t²)`; valid on
/// `ℂ ∖ [1/R², ∞)` with no branch check.
pub(crate) fn h_with_derivative(mu: &SymmetricMeasure, lambda: f64, z: Complex64) -> (Complex64, Complex64) {
    let (g, dg) = mu.even_transform(z);
    let ratio = lambda * g * g + (1.0 - lambda) * g;
    let dratio = (2.0 * lambda * g + (1.0 - lambda)) * dg;
    (z * ratio, ratio + z * dratio)
}

/// `H_μ(z) = z (λ g² + (1 - λ) g)`, `g = (1/√z) G_μ(1/√z)`, for `z ∉ [0, ∞)`.
pub fn h_transform(mu: &SymmetricMeasure, lambda: f64, z: Complex64) -> Result<Complex64> {
    check_lambda(lambda)?;
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::BranchCut(z));
    }
    Ok(h_with_derivative(mu, lambda, z).0)
}

/// Newton iteration for `H_μ(z) = w` from `z0`, with step damping.
///
/// For `|z| R² > 1` the step is taken in `u = 1/z`: there `H` tends to a
/// constant like `a + b u`, and Newton in `z` would only converge from
/// within a factor of two of the root.
pub(crate) fn invert_h_from(
    mu: &SymmetricMeasure,
    lambda: f64,
    w: Complex64,
    z0: Complex64,
    cfg: &ContourConfig,
) -> Result<Complex64> {
    let tol = cfg.newton_tolerance * w.norm();
    let r2 = mu.support_radius().powi(2);
    let mut z = z0;
    let (mut h, mut dh) = h_with_derivative(mu, lambda, z);
    let mut residual = (h - w).norm();
    for _ in 0..cfg.newton_max_iterations {
        if residual <= tol {
            return Ok(z);
        }
        let inverted = z.norm() * r2 > 1.0;
        // step in the working variable and its size relative to that variable
        let (step, relative) = if inverted {
            let du = -(h - w) / (dh * z * z);
            (du, du.norm() * z.norm())
        } else {
            let dz = (h - w) / dh;
            (dz, dz.norm() / z.norm())
        };
        if !step.is_finite() {
            break;
        }
        if relative <= 64.0 * f64::EPSILON {
            // at the rounding floor of H
            return Ok(z);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = if inverted { 1.0 / (1.0 / z - t * step) } else { z - t * step };
            let (hc, dhc) = h_with_derivative(mu, lambda, cand);
            let rc = (hc - w).norm();
            if rc.is_finite() && rc < residual {
                z = cand;
                h = hc;
                dh = dhc;
                residual = rc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no further decrease: accept when the residual is at the noise
            // level of the evaluation
            if residual <= 1e-10 * (1.0 + w.norm()) {
                return Ok(z);
            }
            break;
        }
    }
    if residual <= tol.max(8.0 * f64::EPSILON * h.norm()) {
        return Ok(z);
    }
    Err(Error::DomainTooLarge { w, residual })
}

/// `H_μ^{-1}(w)`: Newton from `z0 = w`, falling back to continuation along
/// the ray from `τw` (`τ` tiny) to `w`.
pub fn invert_h(mu: &SymmetricMeasure, lambda: f64, w: Complex64, cfg: &ContourConfig) -> Result<Complex64> {
    check_lambda(lambda)?;
    if w == ZERO {
        return Ok(ZERO);
    }
    if let Ok(z) = invert_h_from(mu, lambda, w, w, cfg) {
        return Ok(z);
    }
    invert_h_along_ray(mu, lambda, w, cfg)
}

fn invert_h_along_ray(mu: &SymmetricMeasure, lambda: f64, w: Complex64, cfg: &ContourConfig) -> Result<Complex64> {
    let mut tau = 2f64.powi(-30);
    let mut z = invert_h_from(mu, lambda, tau * w, tau * w, cfg)?;
    let mut ratio = 4.0;
    let mut failures = 0;
    while tau < 1.0 {
        let next = (tau * ratio).min(1.0);
        match invert_h_from(mu, lambda, next * w, z * (next / tau), cfg) {
            Ok(zn) => {
                z = zn;
                tau = next;
                ratio = (ratio * 2.0).min(16.0);
            }
            Err(e) => {
                failures += 1;
                ratio = ratio.sqrt();
                if failures > cfg.max_bisections || ratio < 1.0 + 1e-6 {
                    return Err(match e {
                        Error::DomainTooLarge { residual, .. } => Error::DomainTooLarge { w, residual },
                        other => other,
                    });
                }
            }
        }
    }
    Ok(z)
}

/// `C_μ(z) = U(z/H_μ^{-1}(z) - 1)`.
pub fn rect_r_transform(mu: &SymmetricMeasure, lambda: f64, z: Complex64, cfg: &ContourConfig) -> Result<Complex64> {
    check_lambda(lambda)?;
    let r = MeasureRTransform::new(mu, lambda, cfg.clone())?;
    r.evaluate(z)
}

/// Result of a Stieltjes inversion at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub value: f64,
    /// `false` when successive extrapolations disagree.
    pub reliable: bool,
}

/// Richardson extrapolation of `(1/π) ℑ G(x - iε)` over a decreasing
/// schedule. The last two extrapolants are compared for the reliability flag.
pub(crate) fn richardson_density(eps: &[f64], im_g: &[f64]) -> DensityEstimate {
    let u: Vec<f64> = im_g.iter().map(|v| v / std::f64::consts::PI).collect();
    let extrapolate = |k: usize| {
        let q = eps[k] / eps[k + 1];
        (q * u[k + 1] - u[k]) / (q - 1.0)
    };
    let n = u.len();
    let last = extrapolate(n - 2);
    let mut reliable = true;
    if n >= 3 {
        let prev = extrapolate(n - 3);
        let scale = last.abs().max(u[n - 1].abs());
        if (last - prev).abs() > 1e-6 + 1e-2 * scale {
            reliable = false;
        }
    }
    let value = if last < 0.0 {
        if last < -1e-9 {
            reliable = false;
        }
        0.0
    } else {
        last
    };
    DensityEstimate { value, reliable }
}

/// Density of a law from its Cauchy transform, approached from below:
/// `(1/π) ℑ G(x - iε)` extrapolated over `eps_schedule`.
pub fn stieltjes_density<F>(g_fn: F, x: f64, eps_schedule: &[f64]) -> Result<DensityEstimate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if eps_schedule.len() < 2 || eps_schedule.windows(2).any(|w| w[1] >= w[0]) || eps_schedule[0] <= 0.0 {
        return Err(Error::InvalidArgument("epsilon schedule must be positive and strictly decreasing".into()));
    }
    let im: Vec<f64> = eps_schedule
        .iter()
        .map(|&e| g_fn(Complex64::new(x, -e)).map(|g| g.im))
        .collect::<Result<_>>()?;
    Ok(richardson_density(eps_schedule, &im))
}

/// `F_μ^{-1}(w)` for `F_μ = 1/G_μ`, by Newton from `ζ = w`, `w` in the lower
/// half plane and large.
fn reciprocal_cauchy_inverse<G>(g: G, w: Complex64, cfg: &ContourConfig) -> Result<Complex64>
where
    G: Fn(Complex64) -> (Complex64, Complex64),
{
    let mut zeta = w;
    for _ in 0..cfg.newton_max_iterations {
        let (gv, dg) = g(zeta);
        let f = 1.0 / gv;
        let df = -dg / (gv * gv);
        let step = (f - w) / df;
        zeta -= step;
        if step.norm() <= 64.0 * f64::EPSILON * zeta.norm() {
            return Ok(zeta);
        }
    }
    Err(Error::NonConvergence(format!("reciprocal Cauchy transform inversion at {w}")))
}

/// Voiculescu transform `φ_μ(w) = F_μ^{-1}(w) - w` of a symmetric law.
pub fn voiculescu_transform(mu: &SymmetricMeasure, w: Complex64, cfg: &ContourConfig) -> Result<Complex64> {
    let zeta = reciprocal_cauchy_inverse(|z| mu.cauchy_with_derivative(z), w, cfg)?;
    Ok(zeta - w)
}

/// Voiculescu transform of a law on `[0, ∞)`.
pub fn voiculescu_transform_nonnegative(
    rho: &NonnegativeMeasure,
    w: Complex64,
    cfg: &ContourConfig,
) -> Result<Complex64> {
    let zeta = reciprocal_cauchy_inverse(|z| rho.cauchy_with_derivative(z), w, cfg)?;
    Ok(zeta - w)
}
