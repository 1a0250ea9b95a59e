//! Piecewise-linear densities on a finite grid.
//!
//! The density is linear between consecutive nodes and zero outside
//! `[grid[0], grid[n-1]]`. Every integral below is exact for that model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} nodes but density has {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidMeasure("density grid needs at least two nodes".into()));
        }
        if grid.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite grid node or density value".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("grid must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidMeasure(format!("negative density value {v}")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.grid[0]
    }

    pub fn upper(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Largest `|x|` over the grid.
    pub fn radius(&self) -> f64 {
        self.lower().abs().max(self.upper().abs())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }


    /// Linear interpolation; zero outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lower() || x > self.upper() {
            return 0.0;
        }
        let i = match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (a, b) = (self.grid[i - 1], self.grid[i]);
        let t = (x - a) / (b - a);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    pub fn mass(&self) -> f64 {
        self.cells().map(|(a, b, va, vb)| 0.5 * (va + vb) * (b - a)).sum()
    }

    /// `∫ x^k ρ(x) dx`, exact for the piecewise-linear model.
    pub fn raw_moment(&self, k: u32) -> f64 {
        let k = k as i32;
        self.cells()
            .map(|(a, b, va, vb)| {
                let h = b - a;
                let s = (vb - va) / h;
                // ∫_a^b t^k (va - s a + s t) dt
                let c0 = va - s * a;
                c0 * power_difference(a, b, k + 1) / f64::from(k + 1)
                    + s * power_difference(a, b, k + 2) / f64::from(k + 2)
            })
            .sum()
    }

    /// `∫ f(x) ρ(x) dx` by composite Gauss-Legendre (5 nodes per cell).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.cells()
            .map(|(a, b, va, vb)| {
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                GL5_NODES
                    .iter()
                    .zip(GL5_WEIGHTS.iter())
                    .map(|(&u, &w)| {
                        let x = mid + half * u;
                        let rho = 0.5 * (va * (1.0 - u) + vb * (1.0 + u));
                        w * f(x) * rho
                    })
                    .sum::<f64>()
                    * half
            })
            .sum()
    }

    /// `(∫ ρ(t)/(ζ - t) dt, d/dζ of the same)`, exact for the piecewise-linear model.
    ///
    /// Valid for every `ζ` off the closed support; on the real axis inside a
    /// cell with positive mass the logarithm is singular and the result is the
    /// average of the two one-sided limits.
    pub fn cauchy_with_derivative(&self, zeta: Complex64) -> (Complex64, Complex64) {
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for (a, b, va, vb) in self.cells() {
            if va == 0.0 && vb == 0.0 {
                continue;
            }
            let h = b - a;
            let za = zeta - a;
            let far = za.norm_sqr() / (h * h);
            if far > 100.0 {
                // Gauss-Legendre is exact to rounding once the cell is small
                // relative to its distance from ζ
                let (nodes, weights): (&[f64], &[f64]) =
                    if far > 1e4 { (&GL3_NODES, &GL3_WEIGHTS) } else { (&GL5_NODES, &GL5_WEIGHTS) };
                for (&u, &wt) in nodes.iter().zip(weights) {
                    let r = (zeta - (a + 0.5 * h * (1.0 + u))).inv();
                    let m = 0.25 * h * wt * (va * (1.0 - u) + vb * (1.0 + u));
                    g += m * r;
                    dg -= m * r * r;
                }
                continue;
            }
            let s = (vb - va) / h;
            let w = h / za;
            let (log_term, phi, psi) = cell_kernels(w);
            // ∫ (va + s (t - a)) / (ζ - t) dt = va L + s h φ(w)
            g += va * log_term + s * h * phi;
            // ∫ (va + s (t - a)) / (ζ - t)^2 dt = va w / (ζ - b) + s ψ(w)
            let zb = za * (1.0 - w);
            dg -= va * w / zb + s * psi;
        }
        (g, dg)
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| (g[0], g[1], v[0], v[1]))
    }
}

const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6];
pub(crate) const GL5_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
pub(crate) const GL5_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// `b^n - a^n` without forming the two powers separately.
fn power_difference(a: f64, b: f64, n: i32) -> f64 {
    let mut sum = 0.0;
    let mut ap = 1.0;
    let mut bp = b.powi(n - 1);
    let ratio_ok = b != 0.0;
    for i in 0..n {
        if ratio_ok {
            sum += ap * bp;
            bp /= b;
        } else {
            // b == 0: only the i = n-1 term survives
            if i == n - 1 {
                sum += ap;
            }
        }
        ap *= a;
    }
    (b - a) * sum
}

/// For `w = h/(ζ - a)` returns `(L, φ, ψ)` with
/// `L = -ln(1 - w)`, `φ = L/w - 1` and `ψ = w/(1 - w) + ln(1 - w)`.
fn cell_kernels(w: Complex64) -> (Complex64, Complex64, Complex64) {
    if w.norm() < 0.1 {
        // L = Σ w^k / k, φ = Σ_{k≥1} w^k/(k+1), ψ = Σ_{k≥2} (k-1)/k w^k
        let mut l = Complex64::new(0.0, 0.0);
        let mut phi = Complex64::new(0.0, 0.0);
        let mut psi = Complex64::new(0.0, 0.0);
        let mut wk = w;
        for k in 1..=18 {
            let kf = k as f64;
            l += wk / kf;
            phi += wk / (kf + 1.0);
            if k >= 2 {
                psi += wk * ((kf - 1.0) / kf);
            }
            wk *= w;
        }
        (l, phi, psi)
    } else {
        let ln1mw = (Complex64::new(1.0, 0.0) - w).ln();
        let l = -ln1mw;
        let phi = l / w - 1.0;
        let psi = w / (1.0 - w) + ln1mw;
        (l, phi, psi)
    }
}
