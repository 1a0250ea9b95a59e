//! Sampled transforms on a contour inside `Δ_{α,β}`, for external plotting.

use std::fmt::{self, Write as _};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rtransform::{MeasureRTransform, RTransform};
use super::{check_lambda, h_transform, invert_h_from, ContourConfig};
use crate::error::{Error, Result};
use crate::measures::SymmetricMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    G,
    H,
    Hinv,
    C,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::G => "G",
            TransformKind::H => "H",
            TransformKind::Hinv => "Hinv",
            TransformKind::C => "C",
        })
    }
}

/// Arc `|z| = β/2`, `|arg z - π| ≤ α/2`, with `n_points` nodes ordered by angle.
pub fn sector_contour(cfg: &ContourConfig) -> Vec<Complex64> {
    let n = cfg.n_points;
    (0..n)
        .map(|k| {
            let t = if n == 1 { 0.5 } else { k as f64 / (n - 1) as f64 };
            let theta = std::f64::consts::PI - 0.5 * cfg.alpha + cfg.alpha * t;
            Complex64::from_polar(0.5 * cfg.beta, theta)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformGrid {
    pub points: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub kind: TransformKind,
}

impl TransformGrid {
    /// Samples one transform of `μ` on [`sector_contour`]. For `G` the
    /// contour point `z` is mapped to `1/√z` first, the argument at which the
    /// chain evaluates `G_μ`.
    pub fn sample(mu: &SymmetricMeasure, lambda: f64, kind: TransformKind, cfg: &ContourConfig) -> Result<Self> {
        check_lambda(lambda)?;
        cfg.validate()?;
        let points = sector_contour(cfg);
        let mut values = Vec::with_capacity(points.len());
        match kind {
            TransformKind::G => {
                for &z in &points {
                    let zeta = 1.0 / super::sqrt_cut_positive(z)?;
                    values.push(mu.cauchy_with_derivative(zeta).0);
                }
            }
            TransformKind::H => {
                for &z in &points {
                    values.push(h_transform(mu, lambda, z)?);
                }
            }
            TransformKind::Hinv => {
                // continue along the arc from the cold solution at its first point
                let mut prev: Option<Complex64> = None;
                for &w in &points {
                    let z = match prev {
                        Some(z0) => invert_h_from(mu, lambda, w, z0, cfg)?,
                        None => super::invert_h(mu, lambda, w, cfg)?,
                    };
                    prev = Some(z);
                    values.push(z);
                }
            }
            TransformKind::C => {
                let r = MeasureRTransform::new(mu, lambda, cfg.clone())?;
                let mut state = r.initial_state();
                for &z in &points {
                    values.push(r.eval(z, &mut state)?.0);
                }
            }
        }
        let grid = Self { points, values, kind };
        grid.check(cfg)?;
        Ok(grid)
    }

    fn check(&self, cfg: &ContourConfig) -> Result<()> {
        if self.points.len() != self.values.len() {
            return Err(Error::InvalidArgument("points and values differ in length".into()));
        }
        if let Some(z) = self.points.iter().find(|z| !cfg.in_domain(**z)) {
            return Err(Error::InvalidArgument(format!("point {z} lies outside the sector")));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonConvergence(format!("non-finite transform value {v}")));
        }
        Ok(())
    }

    /// CSV with header `re z,im z,re value,im value,kind`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re z,im z,re value,im value,kind\n");
        for (z, v) in self.points.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{},{},{}", z.re, z.im, v.re, v.im, self.kind);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_stays_in_sector() {
        let cfg = ContourConfig::default();
        let pts = sector_contour(&cfg);
        assert_eq!(pts.len(), cfg.n_points);
        assert!(pts.iter().all(|z| cfg.in_domain(*z)));
    }

    #[test]
    fn csv_layout() {
        let cfg = ContourConfig { n_points: 3, ..ContourConfig::default() };
        let grid = TransformGrid::sample(&SymmetricMeasure::dirac_zero(), 0.5, TransformKind::H, &cfg).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re z,im z,re value,im value,kind");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",H"));
        // H of δ_0 is the identity
        for (z, v) in grid.points.iter().zip(&grid.values) {
            assert!((z - v).norm() < 1e-15);
        }
    }

    #[test]
    fn hinv_inverts_h() {
        let cfg = ContourConfig { n_points: 16, ..ContourConfig::default() };
        let mu = SymmetricMeasure::bernoulli();
        let hinv = TransformGrid::sample(&mu, 0.5, TransformKind::Hinv, &cfg).unwrap();
        for (w, z) in hinv.points.iter().zip(&hinv.values) {
            assert!((h_transform(&mu, 0.5, *z).unwrap() - w).norm() < 1e-12 * w.norm());
        }
    }
}
