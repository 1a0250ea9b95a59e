//! Grid constructors shared by the closed-form laws.

use std::f64::consts::PI;

/// `n` nodes on `[a, b]` clustered at both ends (Chebyshev-Lobatto points).
pub fn cosine_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && b > a);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // offsets from the midpoint, computed on one half and mirrored so that a
    // symmetric interval gives an exactly symmetric grid
    let mut offset = vec![0.0; n];
    for i in 0..n / 2 {
        let d = half * (PI * i as f64 / (n - 1) as f64).cos();
        offset[i] = -d;
        offset[n - 1 - i] = d;
    }
    let mut out: Vec<f64> = offset.iter().map(|d| mid + d).collect();
    out[0] = a;
    out[n - 1] = b;
    out
}

/// `n` evenly spaced nodes on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && b > a);
    let h = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    out[n - 1] = b;
    out
}

/// Mirror a grid of nonnegative nodes (starting at 0 or above) to a grid
/// symmetric about 0. Values are mirrored with it; a node at 0 is kept once.
pub fn mirror(grid: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut g = Vec::with_capacity(2 * grid.len());
    let mut v = Vec::with_capacity(2 * grid.len());
    let skip = usize::from(grid[0] == 0.0);
    for i in (skip..grid.len()).rev() {
        g.push(-grid[i]);
        v.push(values[i]);
    }
    g.extend_from_slice(grid);
    v.extend_from_slice(values);
    (g, v)
}
