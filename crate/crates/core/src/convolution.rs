//! Rectangular free convolution `⊞_λ` and its integer powers.
//!
//! Both operations add rectangular R-transforms and hand the sum to
//! [`recover_measure`].

use crate::error::{Error, Result};
use crate::measures::SymmetricMeasure;
use crate::transforms::{recover_measure, ContourConfig, MeasureRTransform, ScaledRTransform, SumRTransform};

/// Half-width of the initial search window: `4 (√m₂(μ) + √m₂(ν))`.
fn support_hint(m2: &[f64]) -> (f64, f64) {
    let r = 4.0 * m2.iter().map(|m| m.sqrt()).sum::<f64>();
    (-r, r)
}

/// `μ ⊞_λ ν`, the law whose rectangular R-transform is `C_μ + C_ν`.
///
/// `δ_0` is neutral and is returned around exactly rather than recovered.
pub fn rect_convolve(
    mu: &SymmetricMeasure,
    nu: &SymmetricMeasure,
    lambda: f64,
    cfg: &ContourConfig,
) -> Result<SymmetricMeasure> {
    let dirac = SymmetricMeasure::dirac_zero();
    if *nu == dirac || *mu == dirac {
        cfg.validate()?;
        MeasureRTransform::new(mu, lambda, cfg.clone())?;
        return Ok(if *nu == dirac { mu.clone() } else { nu.clone() });
    }
    let c = SumRTransform::new(
        MeasureRTransform::new(mu, lambda, cfg.clone())?,
        MeasureRTransform::new(nu, lambda, cfg.clone())?,
    );
    recover_measure(&c, lambda, cfg, support_hint(&[mu.moment(2), nu.moment(2)]))
}

/// `μ^{⊞_λ k}`, the law whose rectangular R-transform is `k C_μ`.
pub fn rect_convolve_power(mu: &SymmetricMeasure, lambda: f64, k: u32, cfg: &ContourConfig) -> Result<SymmetricMeasure> {
    if k == 0 {
        return Err(Error::InvalidArgument("convolution power must be at least 1".into()));
    }
    if k == 1 {
        return Ok(mu.clone());
    }
    let c = ScaledRTransform::new(MeasureRTransform::new(mu, lambda, cfg.clone())?, f64::from(k));
    let hint = support_hint(&vec![mu.moment(2); k as usize]);
    recover_measure(&c, lambda, cfg, hint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nc::free_moments_from_cumulants;
    use crate::transforms::{rect_r_transform, sector_contour};

    fn close(a: &SymmetricMeasure, b: &SymmetricMeasure, orders: &[u32], tol: f64) {
        for &k in orders {
            let (x, y) = (a.moment(k), b.moment(k));
            assert!((x - y).abs() <= tol * y.abs().max(1.0), "m_{k}: {x} vs {y}");
        }
    }

    #[test]
    fn dirac_zero_is_neutral() {
        let cfg = ContourConfig::default();
        let b = SymmetricMeasure::bernoulli();
        let d = SymmetricMeasure::dirac_zero();
        assert_eq!(rect_convolve(&b, &d, 0.5, &cfg).unwrap(), b);
        assert_eq!(rect_convolve(&d, &b, 0.5, &cfg).unwrap(), b);
        // the generic route agrees
        let c = SumRTransform::new(
            MeasureRTransform::new(&b, 0.5, cfg.clone()).unwrap(),
            MeasureRTransform::new(&d, 0.5, cfg.clone()).unwrap(),
        );
        let out = recover_measure(&c, 0.5, &cfg, support_hint(&[1.0, 0.0])).unwrap();
        close(&out, &b, &[2, 4, 6], 1e-5);
    }

    #[test]
    fn free_case_bernoulli_square() {
        let b = SymmetricMeasure::bernoulli();
        let out = rect_convolve(&b, &b, 1.0, &ContourConfig::default()).unwrap();
        assert!((out.moment(2) - 2.0).abs() < 1e-5);
        assert!((out.moment(4) - 6.0).abs() < 1e-4);
    }

    /// Free cumulants from moments by peeling off the one-block term.
    fn free_cumulants(m: &[f64]) -> Vec<f64> {
        let mut k = vec![0.0; m.len()];
        for n in 0..m.len() {
            k[n] = m[n] - free_moments_from_cumulants(&k[..=n]).unwrap()[n];
        }
        k
    }

    #[test]
    fn lambda_zero_squares_convolve_freely() {
        let cfg = ContourConfig::default();
        let mu = crate::infdiv::rect_gaussian(1.0).unwrap();
        let nu = SymmetricMeasure::bernoulli();
        let out = rect_convolve(&mu, &nu, 0.0, &cfg).unwrap();
        // moments of the squares are the even moments; free cumulants add
        let ka = free_cumulants(&mu.even_moments(2));
        let kb = free_cumulants(&nu.even_moments(2));
        let sum: Vec<f64> = ka.iter().zip(&kb).map(|(a, b)| a + b).collect();
        let want = free_moments_from_cumulants(&sum).unwrap();
        for (n, w) in want.iter().enumerate() {
            let got = out.moment(2 * (n as u32 + 1));
            assert!((got - w).abs() < 1e-4 * w.max(1.0), "m_{}: {got} vs {w}", 2 * (n + 1));
        }
    }

    #[test]
    fn commutative_and_variance_additive() {
        let cfg = ContourConfig::default();
        let a = SymmetricMeasure::bernoulli();
        let b = crate::infdiv::rect_gaussian(0.5).unwrap();
        let ab = rect_convolve(&a, &b, 0.5, &cfg).unwrap();
        let ba = rect_convolve(&b, &a, 0.5, &cfg).unwrap();
        close(&ab, &ba, &[2, 4, 6], 1e-5);
        assert!((ab.moment(2) - a.moment(2) - b.moment(2)).abs() < 1e-6);
    }

    #[test]
    fn transforms_add() {
        let cfg = ContourConfig::default();
        let a = SymmetricMeasure::bernoulli();
        let b = crate::infdiv::rect_gaussian(0.5).unwrap();
        let ab = rect_convolve(&a, &b, 0.5, &cfg).unwrap();
        let pts = sector_contour(&ContourConfig { n_points: 10, ..cfg.clone() });
        for z in pts {
            let lhs = rect_r_transform(&ab, 0.5, z, &cfg).unwrap();
            let rhs = rect_r_transform(&a, 0.5, z, &cfg).unwrap() + rect_r_transform(&b, 0.5, z, &cfg).unwrap();
            assert!((lhs - rhs).norm() < 1e-8, "z = {z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn poisson_laws_form_a_semigroup() {
        let cfg = ContourConfig::default();
        let lambda = 0.5;
        let p = |c| crate::infdiv::rect_poisson(lambda, c, &cfg).unwrap();
        let sum = rect_convolve(&p(1.0), &p(2.0), lambda, &cfg).unwrap();
        close(&sum, &p(3.0), &[2, 4], 1e-4);
    }

    #[test]
    fn powers() {
        let cfg = ContourConfig::default();
        let b = SymmetricMeasure::bernoulli();
        assert_eq!(rect_convolve_power(&b, 0.5, 1, &cfg).unwrap(), b);
        assert!(rect_convolve_power(&b, 0.5, 0, &cfg).is_err());
        let two = rect_convolve_power(&b, 0.5, 2, &cfg).unwrap();
        let conv = rect_convolve(&b, &b, 0.5, &cfg).unwrap();
        close(&two, &conv, &[2, 4, 6], 1e-6);
    }
}
