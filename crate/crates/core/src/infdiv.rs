//! Levy-Khinchine machinery for `⊞_λ`-infinitely divisible laws.
//!
//! A finite symmetric Levy measure `G` determines the rectangular
//! R-transform `C(z) = z ∫ (1+t²)/(1-zt²) dG(t)` for every `λ`, and the
//! classical characteristic exponent `∫ (cos tξ - 1)(1+t²)/t² dG(t)`. The map
//! sending the classical law to the rectangular one is
//! [`bercovici_pata`]. The closed-form laws below are the images of the
//! classical Gaussian, Cauchy and symmetric Poisson laws.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::grid::{cosine_grid, mirror, uniform_grid};
use crate::measures::{LevyMeasure, DRIFT_TOLERANCE, GL5_NODES, GL5_WEIGHTS, NonnegativeMeasure, PiecewiseLinear, SymmetricMeasure};
use crate::transforms::{check_lambda, recover_measure, ContourConfig, LevyRTransform};

/// Nodes per band for the compactly supported closed forms.
const BAND_NODES: usize = 2001;
/// Mass left beyond the truncation point of Cauchy-type laws.
pub const CAUCHY_TAIL_MASS: f64 = 1e-8;
/// Tail mass dropped from the Lévy measure of the classical Cauchy law.
pub const LEVY_CAUCHY_TAIL_MASS: f64 = 1e-6;

/// The named laws of the rectangular and classical families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamedLaw {
    RectGaussian { lambda: f64 },
    RectCauchy { lambda: f64, t: f64 },
    RectPoisson { lambda: f64, c: f64 },
    MarchenkoPastur { c: f64 },
    ClassicalGaussian { variance: f64 },
    ClassicalSymPoisson { c: f64 },
    ClassicalCauchy { t: f64 },
}

impl NamedLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NamedLaw::RectGaussian { lambda } => check_lambda(lambda),
            NamedLaw::RectCauchy { lambda, t } => check_lambda(lambda).and_then(|_| check_positive("t", t)),
            NamedLaw::RectPoisson { lambda, c } => check_lambda(lambda).and_then(|_| check_positive("c", c)),
            NamedLaw::MarchenkoPastur { c } | NamedLaw::ClassicalSymPoisson { c } => check_positive("c", c),
            NamedLaw::ClassicalGaussian { variance } => check_positive("variance", variance),
            NamedLaw::ClassicalCauchy { t } => check_positive("t", t),
        }
    }

    /// The law itself, for the rectangular kinds.
    pub fn measure(&self, cfg: &ContourConfig) -> Result<SymmetricMeasure> {
        self.validate()?;
        match *self {
            NamedLaw::RectGaussian { lambda } => rect_gaussian(lambda),
            NamedLaw::RectCauchy { lambda, t } => rect_cauchy(lambda, t).map(|r| r.0),
            NamedLaw::RectPoisson { lambda, c } => rect_poisson(lambda, c, cfg),
            other => Err(Error::Unsupported(format!("{other:?} is not a symmetric rectangular law"))),
        }
    }
}

/// Scales the density so the total mass is 1, keeping atoms exact; the
/// correction must stay within [`DRIFT_TOLERANCE`].
fn normalize_density(atoms: Vec<(f64, f64)>, density: PiecewiseLinear) -> Result<SymmetricMeasure> {
    let atom_mass: f64 = atoms.iter().map(|a| a.1).sum();
    let mass = atom_mass + density.mass();
    if (mass - 1.0).abs() > DRIFT_TOLERANCE {
        return Err(Error::NormalizationDrift { mass, tolerance: DRIFT_TOLERANCE });
    }
    let k = (1.0 - atom_mass) / density.mass();
    SymmetricMeasure::new(atoms, Some(density.scaled(k)))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// `C(z) = z ∫ (1+t²)/(1-zt²) dG(t)`, evaluated as `(z+1) g(z) - |G|` with
/// `g` the even transform of `G`.
pub fn levy_c_transform(g: &LevyMeasure, z: Complex64) -> Result<Complex64> {
    let r = g.support_radius();
    if z.im == 0.0 && r > 0.0 && z.re * r * r >= 1.0 {
        return Err(Error::BranchCut(z));
    }
    let (e, _) = g.even_transform(z);
    let c = (z + 1.0) * e - g.total_mass();
    if c.is_finite() {
        Ok(c)
    } else {
        Err(Error::BranchCut(z))
    }
}

/// `(cos tξ - 1)(1+t²)/t²`, continuous at `t = 0`.
fn exponent_integrand(t: f64, xi: f64) -> f64 {
    let u = t * xi;
    if u.abs() < 1e-3 {
        let u2 = u * u;
        -0.5 * xi * xi * (1.0 - u2 / 12.0 + u2 * u2 / 360.0) * (1.0 + t * t)
    } else {
        (u.cos() - 1.0) * (1.0 + t * t) / (t * t)
    }
}

/// `ψ(ξ) = ∫ (cos tξ - 1)(1+t²)/t² dG(t)`, the log characteristic function
/// of the classical symmetric infinitely divisible law with Levy measure `G`.
pub fn classical_levy_exponent(g: &LevyMeasure, xi: f64) -> f64 {
    let atoms: f64 = g.atoms().iter().map(|&(t, m)| m * exponent_integrand(t, xi)).sum();
    let density = g.density().map_or(0.0, |d| d.integrate(|t| exponent_integrand(t, xi)));
    atoms + density
}

/// The rectangular `⊞_λ`-infinitely divisible law with Levy measure `g`.
pub fn bercovici_pata(g: &LevyMeasure, lambda: f64, cfg: &ContourConfig) -> Result<SymmetricMeasure> {
    check_lambda(lambda)?;
    recover_measure(&LevyRTransform::new(g), lambda, cfg, (0.0, 0.0))
}

/// Levy measure of `D_c μ` given the Levy measure `g` of `μ`:
/// `(c² + s²)/(1 + s²)` times the image of `g` under `t ↦ ct`.
pub fn dilate_levy(g: &LevyMeasure, c: f64) -> Result<LevyMeasure> {
    check_positive("dilation factor", c)?;
    g.dilate(c)?.reweight(|s| (c * c + s * s) / (1.0 + s * s))
}

/// Symmetric density `√((x²-a²)(b²-x²)) / (k |x|)` on `a ≤ |x| ≤ b`.
///
/// For `a = 0` the factor `√(x²-a²)/|x|` is 1 and the grid spans `[-b, b]`.
fn two_band(a: f64, b: f64, k: f64) -> (Vec<f64>, Vec<f64>) {
    let rho = |x: f64| {
        let outer = (b * b - x * x).max(0.0).sqrt();
        let inner = if a == 0.0 { 1.0 } else { (1.0 - a * a / (x * x)).max(0.0).sqrt() };
        outer * inner / k
    };
    let half: Vec<f64> = if a == 0.0 {
        cosine_grid(-b, b, 2 * BAND_NODES - 1).into_iter().skip(BAND_NODES - 1).collect()
    } else {
        cosine_grid(a, b, BAND_NODES)
    };
    let mut values: Vec<f64> = half.iter().map(|&x| rho(x)).collect();
    if a > 0.0 {
        values[0] = 0.0;
    }
    *values.last_mut().expect("nonempty grid") = 0.0;
    mirror(&half, &values)
}

/// Image of the standard Gaussian: `(δ_1 + δ_{-1})/2` for `λ = 0`, otherwise
/// the density `√(4λ - (x²-1-λ)²) / (2πλ|x|)` on `1-√λ ≤ |x| ≤ 1+√λ`.
pub fn rect_gaussian(lambda: f64) -> Result<SymmetricMeasure> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return SymmetricMeasure::two_point(1.0);
    }
    let r = lambda.sqrt();
    let (grid, values) = two_band(1.0 - r, 1.0 + r, 2.0 * PI * lambda);
    normalize_density(Vec::new(), PiecewiseLinear::new(grid, values)?)
}

/// Density of the image of the Cauchy law with parameter `t`:
/// `t/(π(λt² + x²)) · √(1 - a²/x²)` for `|x| > a = t(1-λ)/2`, zero inside.
pub fn rect_cauchy_density(lambda: f64, t: f64, x: f64) -> f64 {
    let a = 0.5 * t * (1.0 - lambda);
    let x = x.abs();
    if a > 0.0 && x <= a {
        return 0.0;
    }
    let bracket = if a == 0.0 { 1.0 } else { (1.0 - (a / x).powi(2)).sqrt() };
    t / (PI * (lambda * t * t + x * x)) * bracket
}

/// Truncation data of [`rect_cauchy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Grid end `X`; the law is represented on `[-X, X]`.
    pub cutoff: f64,
    /// Mass of the piecewise-linear density before renormalization.
    pub grid_mass: f64,
    /// Mass of the exact density on `|x| > X`.
    pub tail_mass: f64,
}

/// `∫_X^∞ f(x) dx` for `f` decaying like `x⁻²`, by Gauss-Legendre in `u = 1/x`.
fn tail_integral<F: Fn(f64) -> f64>(f: F, cutoff: f64) -> f64 {
    const PANELS: usize = 16;
    let h = 1.0 / cutoff / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let mid = (p as f64 + 0.5) * h;
            GL5_NODES
                .iter()
                .zip(GL5_WEIGHTS)
                .map(|(&v, w)| {
                    let u = mid + 0.5 * h * v;
                    w * 0.5 * h * f(1.0 / u) / (u * u)
                })
                .sum::<f64>()
        })
        .sum()
}

/// [`rect_cauchy_truncated`] with tail mass [`CAUCHY_TAIL_MASS`].
pub fn rect_cauchy(lambda: f64, t: f64) -> Result<(SymmetricMeasure, TruncationReport)> {
    rect_cauchy_truncated(lambda, t, CAUCHY_TAIL_MASS)
}

/// Image of the Cauchy law with parameter `t`, truncated at `X` so that the
/// exact mass beyond `±X` is about `tail_mass`. The density is renormalized
/// on the grid; the report records what was dropped.
pub fn rect_cauchy_truncated(lambda: f64, t: f64, tail_mass: f64) -> Result<(SymmetricMeasure, TruncationReport)> {
    check_lambda(lambda)?;
    check_positive("t", t)?;
    if !(tail_mass > 0.0 && tail_mass <= 0.01) {
        return Err(Error::InvalidArgument(format!("tail mass must lie in (0, 0.01], got {tail_mass}")));
    }
    let a = 0.5 * t * (1.0 - lambda);
    let cutoff = 2.0 * t / (PI * tail_mass);
    // clustered near the gap edge, then geometric out to the cutoff
    let x1 = a + 4.0 * t;
    let mut half = if a > 0.0 {
        (0..BAND_NODES)
            .map(|i| {
                let th = 0.5 * PI * i as f64 / (BAND_NODES - 1) as f64;
                a + (x1 - a) * (1.0 - th.cos())
            })
            .collect()
    } else {
        uniform_grid(0.0, x1, BAND_NODES)
    };
    let ratio = 1.002_f64;
    let steps = ((cutoff / x1).ln() / ratio.ln()).ceil() as usize;
    let r = (cutoff / x1).powf(1.0 / steps as f64);
    half.extend((1..=steps).map(|k| x1 * r.powi(k as i32)));
    *half.last_mut().expect("nonempty grid") = cutoff;
    let values: Vec<f64> = half.iter().map(|&x| rect_cauchy_density(lambda, t, x)).collect();
    let (grid, values) = mirror(&half, &values);
    let density = PiecewiseLinear::new(grid, values)?;
    let grid_mass = density.mass();
    let tail_mass = 2.0 * tail_integral(|x| rect_cauchy_density(lambda, t, x), cutoff);
    let report = TruncationReport { cutoff, grid_mass, tail_mass };
    if (grid_mass + tail_mass - 1.0).abs() > 1e-6 {
        return Err(Error::NormalizationDrift { mass: grid_mass + tail_mass, tolerance: 1e-6 });
    }
    let measure = SymmetricMeasure::new(Vec::new(), Some(density.scaled(1.0 / grid_mass)))?;
    Ok((measure, report))
}

/// Image of [`rect_cauchy`] under `x ↦ 1/x`: density
/// `t/(π(λt²x² + 1)) · √(1 - x²t²(1-λ)²/4)` on `|x| ≤ 2/(t(1-λ))`. For
/// `λ = 1` this is the Cauchy law with parameter `1/t`.
pub fn rect_cauchy_reciprocal(lambda: f64, t: f64) -> Result<SymmetricMeasure> {
    check_lambda(lambda)?;
    check_positive("t", t)?;
    if lambda == 1.0 {
        return rect_cauchy(1.0, 1.0 / t).map(|r| r.0);
    }
    let edge = 2.0 / (t * (1.0 - lambda));
    let half: Vec<f64> = cosine_grid(-edge, edge, 2 * BAND_NODES - 1).into_iter().skip(BAND_NODES - 1).collect();
    let values: Vec<f64> = half
        .iter()
        .map(|&x| {
            let b = 0.5 * x * t * (1.0 - lambda);
            t / (PI * (lambda * t * t * x * x + 1.0)) * (1.0 - b * b).max(0.0).sqrt()
        })
        .collect();
    let (grid, mut values) = mirror(&half, &values);
    let n = values.len();
    values[0] = 0.0;
    values[n - 1] = 0.0;
    normalize_density(Vec::new(), PiecewiseLinear::new(grid, values)?)
}

/// `(1-c)₊ δ_0` plus `√((x²-a²)(b²-x²)) / (2π|x|)` on `a ≤ |x| ≤ b`, with
/// `a = |1-√c|`, `b = 1+√c`: the symmetric square root of Marchenko-Pastur.
fn poisson_square_root(c: f64) -> Result<SymmetricMeasure> {
    let r = c.sqrt();
    let (grid, values) = two_band((1.0 - r).abs(), 1.0 + r, 2.0 * PI);
    let atoms = if c < 1.0 { vec![(0.0, 1.0 - c)] } else { Vec::new() };
    normalize_density(atoms, PiecewiseLinear::new(grid, values)?)
}

/// The rectangular symmetric Poisson law with rate `c`, whose R-transform is
/// `cz/(1-z)`. Closed form for `λ = 0`, recovered numerically otherwise.
pub fn rect_poisson(lambda: f64, c: f64, cfg: &ContourConfig) -> Result<SymmetricMeasure> {
    check_lambda(lambda)?;
    check_positive("c", c)?;
    if lambda == 0.0 {
        return poisson_square_root(c);
    }
    bercovici_pata(&LevyMeasure::symmetric_pair(1.0, 0.25 * c)?, lambda, cfg)
}

/// The Marchenko-Pastur (free Poisson) law with parameter `c`.
pub fn marchenko_pastur(c: f64) -> Result<NonnegativeMeasure> {
    check_positive("c", c)?;
    Ok(poisson_square_root(c)?.pushforward_square())
}

/// Levy measure of a classical named law.
pub fn levy_measure_of(law: NamedLaw) -> Result<LevyMeasure> {
    law.validate()?;
    match law {
        NamedLaw::ClassicalGaussian { variance } => LevyMeasure::dirac_zero(variance),
        NamedLaw::ClassicalSymPoisson { c } => LevyMeasure::symmetric_pair(1.0, 0.25 * c),
        NamedLaw::ClassicalCauchy { t } => rect_cauchy_truncated(1.0, 1.0, LEVY_CAUCHY_TAIL_MASS)?.0.to_levy().scale(t),
        other => Err(Error::Unsupported(format!("{other:?} has no classical Levy measure"))),
    }
}

/// A finite measure on `[0, ∞)`, stored as atoms plus a density in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<PiecewiseLinear>,
}

impl HalfLineMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>() + self.density.as_ref().map_or(0.0, PiecewiseLinear::mass)
    }
}

/// Parameters of the classical limit law of squared sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareLimit {
    pub gamma: f64,
    pub sigma: HalfLineMeasure,
}

/// `γ = ∫ (1+t²)/(1+t⁴) dG(t)` and `σ(ds) = (s²+s)/(s²+1) F(ds)` with `F` the
/// image of `G` under `t ↦ t²`.
pub fn square_limit_params(g: &LevyMeasure) -> Result<SquareLimit> {
    let gamma_weight = |t: f64| (1.0 + t * t) / (1.0 + t.powi(4));
    let sigma_weight = |s: f64| s * (s + 1.0) / (s * s + 1.0);
    let mut gamma = 0.0;
    let mut atoms = Vec::new();
    for &(t, m) in g.atoms() {
        gamma += m * gamma_weight(t);
        if t > 0.0 {
            // both ±t land on t²
            let s = t * t;
            atoms.push((s, 2.0 * m * sigma_weight(s)));
        }
    }
    let density = match g.density() {
        None => None,
        Some(d) => {
            gamma += d.integrate(gamma_weight);
            let mut ts: Vec<f64> = d.grid().iter().copied().filter(|&t| t > 0.0).collect();
            ts.insert(0, 0.0);
            // F has density ρ(√s)/√s, so σ has √s (s+1)/(s²+1) ρ(√s)
            let values = ts.iter().map(|&t| t * (t * t + 1.0) / (t.powi(4) + 1.0) * d.eval(t)).collect();
            let grid = ts.iter().map(|t| t * t).collect();
            Some(PiecewiseLinear::new(grid, values)?)
        }
    };
    Ok(SquareLimit { gamma, sigma: HalfLineMeasure { atoms, density } })
}
