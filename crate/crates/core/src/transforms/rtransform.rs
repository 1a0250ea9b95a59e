//! Rectangular R-transforms as evaluable objects.
//!
//! Recovery follows a path in the `s` plane and needs `C(s)` together with
//! `C'(s)`. Transforms defined through `H_μ^{-1}` carry the last preimage as
//! a warm start so the continuation stays on one branch.

use num_complex::Complex64;

use super::{check_lambda, h_with_derivative, invert_h, invert_h_from, u_map_continued, ContourConfig, ONE, ZERO};
use crate::error::{Error, Result};
use crate::measures::{LevyMeasure, SymmetricMeasure};

pub trait RTransform: Send + Sync {
    /// Continuation data carried from one evaluation to the next.
    type State: Clone + Send + Sync + std::fmt::Debug;

    /// State suitable for `s` close to 0.
    fn initial_state(&self) -> Self::State;

    /// `(C(s), C'(s))`, warm-started from `state`, which is updated on success.
    fn eval(&self, s: Complex64, state: &mut Self::State) -> Result<(Complex64, Complex64)>;

    /// `c_2 = C'(0)`, the second moment of the law.
    fn second_cumulant(&self) -> f64;

    /// `C(s)` from a cold start.
    fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let mut state = self.initial_state();
        Ok(self.eval(s, &mut state)?.0)
    }
}

/// `C_μ` of a measure, through numerical inversion of `H_μ`.
#[derive(Debug, Clone)]
pub struct MeasureRTransform {
    mu: SymmetricMeasure,
    lambda: f64,
    cfg: ContourConfig,
}

impl MeasureRTransform {
    pub fn new(mu: &SymmetricMeasure, lambda: f64, cfg: ContourConfig) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { mu: mu.clone(), lambda, cfg })
    }

    pub fn measure(&self) -> &SymmetricMeasure {
        &self.mu
    }
}

impl RTransform for MeasureRTransform {
    /// Last preimage `H_μ^{-1}(s)` and the square root used by `U`; `None`
    /// means a cold start on the principal branch.
    type State = Option<(Complex64, Complex64)>;

    fn initial_state(&self) -> Self::State {
        None
    }

    fn eval(&self, s: Complex64, state: &mut Self::State) -> Result<(Complex64, Complex64)> {
        if s == ZERO {
            return Ok((ZERO, Complex64::from(self.second_cumulant())));
        }
        let z = match *state {
            Some((z0, _)) => invert_h_from(&self.mu, self.lambda, s, z0, &self.cfg)?,
            None => invert_h(&self.mu, self.lambda, s, &self.cfg)?,
        };
        let (_, dh) = h_with_derivative(&self.mu, self.lambda, z);
        let arg = s / z - 1.0;
        let (u, du, root) = u_map_continued(self.lambda, arg, state.map(|st| st.1))?;
        // d/ds (s/z) = (1 - s z'/z)/z with z' = 1/H'(z)
        let darg = (ONE - s / (z * dh)) / z;
        *state = Some((z, root));
        Ok((u, du * darg))
    }

    fn second_cumulant(&self) -> f64 {
        self.mu.moment(2)
    }
}

/// `C(s) = s ∫ (1 + t²)/(1 - s t²) dG(t) = (s + 1) g_G(s) - |G|`.
#[derive(Debug, Clone)]
pub struct LevyRTransform {
    levy: LevyMeasure,
}

impl LevyRTransform {
    pub fn new(levy: &LevyMeasure) -> Self {
        Self { levy: levy.clone() }
    }
}

impl RTransform for LevyRTransform {
    type State = ();

    fn initial_state(&self) {}

    fn eval(&self, s: Complex64, _: &mut ()) -> Result<(Complex64, Complex64)> {
        let (g, dg) = self.levy.even_transform(s);
        let c = (s + 1.0) * g - self.levy.total_mass();
        let dc = g + (s + 1.0) * dg;
        if !c.is_finite() || !dc.is_finite() {
            return Err(Error::InsideSupport(s));
        }
        Ok((c, dc))
    }

    fn second_cumulant(&self) -> f64 {
        self.levy.total_mass() + self.levy.moment(2)
    }
}

/// An R-transform given as a plain function; `C'` by central differences.
pub struct ClosureRTransform<F> {
    f: F,
}

impl<F> ClosureRTransform<F>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F> std::fmt::Debug for ClosureRTransform<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ClosureRTransform")
    }
}

impl<F> RTransform for ClosureRTransform<F>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
{
    type State = ();

    fn initial_state(&self) {}

    fn eval(&self, s: Complex64, _: &mut ()) -> Result<(Complex64, Complex64)> {
        let c = (self.f)(s);
        let h = 1e-6 * s.norm().max(1e-4);
        let dc = ((self.f)(s + h) - (self.f)(s - h)) / (2.0 * h);
        if !c.is_finite() || !dc.is_finite() {
            return Err(Error::NonConvergence(format!("R-transform is not finite at {s}")));
        }
        Ok((c, dc))
    }

    fn second_cumulant(&self) -> f64 {
        let h = 1e-6;
        (((self.f)(Complex64::new(-h, 0.0)) - (self.f)(Complex64::new(-2.0 * h, 0.0))) / h).re
    }
}

/// `C_a + C_b`.
#[derive(Debug, Clone)]
pub struct SumRTransform<A, B> {
    a: A,
    b: B,
}

impl<A: RTransform, B: RTransform> SumRTransform<A, B> {
    pub fn new(a: A, b: B) -> Self {
        Self { a, b }
    }
}

impl<A: RTransform, B: RTransform> RTransform for SumRTransform<A, B> {
    type State = (A::State, B::State);

    fn initial_state(&self) -> Self::State {
        (self.a.initial_state(), self.b.initial_state())
    }

    fn eval(&self, s: Complex64, state: &mut Self::State) -> Result<(Complex64, Complex64)> {
        let mut next = state.clone();
        let (ca, da) = self.a.eval(s, &mut next.0)?;
        let (cb, db) = self.b.eval(s, &mut next.1)?;
        *state = next;
        Ok((ca + cb, da + db))
    }

    fn second_cumulant(&self) -> f64 {
        self.a.second_cumulant() + self.b.second_cumulant()
    }
}

/// `k C`.
#[derive(Debug, Clone)]
pub struct ScaledRTransform<A> {
    inner: A,
    factor: f64,
}

impl<A: RTransform> ScaledRTransform<A> {
    pub fn new(inner: A, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl<A: RTransform> RTransform for ScaledRTransform<A> {
    type State = A::State;

    fn initial_state(&self) -> Self::State {
        self.inner.initial_state()
    }

    fn eval(&self, s: Complex64, state: &mut Self::State) -> Result<(Complex64, Complex64)> {
        let (c, dc) = self.inner.eval(s, state)?;
        Ok((self.factor * c, self.factor * dc))
    }

    fn second_cumulant(&self) -> f64 {
        self.factor * self.inner.second_cumulant()
    }
}

/// Taylor coefficients `c_2, c_4, …, c_{2K}` of `C(s) = Σ c_{2n} s^n`, from
/// the trapezoidal rule for the Cauchy integral on `|s| = radius`.
///
/// `radius` must lie inside the disc where `C` is analytic.
pub fn rect_cumulants<R: RTransform + ?Sized>(c: &R, order: usize, radius: f64) -> Result<Vec<f64>> {
    const NODES: usize = 64;
    if order == 0 || order >= NODES / 2 {
        return Err(Error::InvalidArgument(format!("cumulant order must lie in 1..{}", NODES / 2)));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("contour radius must be positive".into()));
    }
    // walk the circle from the negative axis so the warm start tracks one branch
    let mut state = c.initial_state();
    let mut values = Vec::with_capacity(NODES);
    for k in 1..=8 {
        c.eval(Complex64::new(-radius * k as f64 / 8.0, 0.0), &mut state)?;
    }
    for j in 0..NODES {
        let theta = std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / NODES as f64;
        let s = Complex64::from_polar(radius, theta);
        values.push((s, c.eval(s, &mut state)?.0));
    }
    Ok((1..=order)
        .map(|n| {
            let sum: Complex64 = values.iter().map(|&(s, v)| v * s.powi(-(n as i32))).sum();
            (sum / NODES as f64).re
        })
        .collect())
}

/// `rect_cumulants` of `C_μ` with a radius scaled to the support of `μ`.
pub fn rect_cumulants_of_measure(
    mu: &SymmetricMeasure,
    lambda: f64,
    order: usize,
    cfg: &ContourConfig,
) -> Result<Vec<f64>> {
    let r = MeasureRTransform::new(mu, lambda, cfg.clone())?;
    let radius = mu.support_radius().max(0.1);
    rect_cumulants(&r, order, 0.02 / (radius * radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::grid::cosine_grid;
    use crate::nc::rect_cumulants_from_moments;

    fn semicircle() -> SymmetricMeasure {
        let g = cosine_grid(-2.0, 2.0, 4001);
        let v = g.iter().map(|x| (4.0 - x * x).max(0.0).sqrt()).collect();
        SymmetricMeasure::from_density(g, v).unwrap()
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let cfg = ContourConfig::default();
        let r = MeasureRTransform::new(&semicircle(), 0.5, cfg).unwrap();
        let s = Complex64::new(-0.03, 0.01);
        let h = 1e-6;
        let mut st = None;
        let (_, dc) = r.eval(s, &mut st).unwrap();
        let fd = (r.evaluate(s + h).unwrap() - r.evaluate(s - h).unwrap()) / (2.0 * h);
        assert!((dc - fd).norm() < 1e-7);
    }

    #[test]
    fn levy_transform_examples() {
        let z = Complex64::new(-0.3, 0.0);
        let r = LevyRTransform::new(&LevyMeasure::dirac_zero(1.0).unwrap());
        assert!((r.evaluate(z).unwrap() - z).norm() < 1e-15);
        let c = 0.7;
        let r = LevyRTransform::new(&LevyMeasure::symmetric_pair(1.0, c / 4.0).unwrap());
        assert!((r.evaluate(z).unwrap() - c * z / (1.0 - z)).norm() < 1e-15);
        assert!((r.second_cumulant() - c).abs() < 1e-15);
    }

    #[test]
    fn contour_cumulants_match_moment_conversion() {
        let cfg = ContourConfig::default();
        for mu in [SymmetricMeasure::bernoulli(), semicircle()] {
            for lambda in [0.0, 0.3, 1.0] {
                let got = rect_cumulants_of_measure(&mu, lambda, 3, &cfg).unwrap();
                let expected = rect_cumulants_from_moments(lambda, &mu.even_moments(3)).unwrap();
                for (a, b) in got.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-6, "λ={lambda}: {got:?} vs {expected:?}");
                }
            }
        }
    }

    #[test]
    fn closure_and_combinators() {
        let f = ClosureRTransform::new(|s: Complex64| s / (1.0 - s));
        assert!((f.second_cumulant() - 1.0).abs() < 1e-5);
        let sum = SumRTransform::new(f, ScaledRTransform::new(ClosureRTransform::new(|s| s), 2.0));
        let z = Complex64::new(-0.2, 0.1);
        assert!((sum.evaluate(z).unwrap() - (z / (1.0 - z) + 2.0 * z)).norm() < 1e-15);
        let cs = rect_cumulants(&sum, 3, 0.1).unwrap();
        assert!((cs[0] - 3.0).abs() < 1e-12 && (cs[1] - 1.0).abs() < 1e-12 && (cs[2] - 1.0).abs() < 1e-12);
    }
}
