//! Recovery of a symmetric law from its rectangular R-transform.
//!
//! For `ζ` in the lower half plane put `z = 1/ζ²` and `s = H_μ(z)`. Since
//! `z = H_μ^{-1}(s) = s/T(C(s))`, `s` solves `s - z T(C(s)) = 0`, and then
//! `ζ G_μ(ζ) = g(z) = V(H(z)/z) = 1 + C(s)`. The root `s(ζ)` is tracked by
//! predictor-corrector continuation from far below the axis, where `s ≈ z`.
//!
//! Atoms show up as `ε ℑG(a - iε) → m`; the density is `(1/π) ℑG(x - i0)`,
//! extrapolated from the epsilon schedule after the atoms are subtracted.

use num_complex::Complex64;

use super::rtransform::RTransform;
use super::{check_lambda, richardson_density, t_map, ContourConfig, DensityEstimate};
use crate::error::{Error, Result};
use crate::measures::grid::{cosine_grid, mirror, uniform_grid};
use crate::measures::{PiecewiseLinear, SymmetricMeasure};

/// Newton iterations allowed per continuation step before the step is halved.
const TRACK_ITERATIONS: usize = 12;
/// Smallest offset used while refining an atom.
const ATOM_EPS_MIN: f64 = 1e-7;
/// Bisection steps used to locate a support edge.
const EDGE_STEPS: usize = 24;

/// What recovery found besides the measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    /// Support radius used for the final pass.
    pub radius: f64,
    pub hint_doublings: usize,
    /// Atoms on `[0, ∞)` before mirroring, as `(location, mass)`.
    pub atoms: Vec<(f64, f64)>,
    /// Support intervals of the density on `[0, ∞)`.
    pub intervals: Vec<(f64, f64)>,
    /// Mass before renormalization.
    pub raw_mass: f64,
    /// Density nodes whose extrapolation was flagged as unreliable.
    pub unreliable_points: usize,
}

/// Recovers `μ` from `C_μ`; see [`recover_measure_with_report`].
pub fn recover_measure<R: RTransform>(
    c: &R,
    lambda: f64,
    cfg: &ContourConfig,
    support_hint: (f64, f64),
) -> Result<SymmetricMeasure> {
    recover_measure_with_report(c, lambda, cfg, support_hint).map(|r| r.0)
}

/// Recovers the symmetric law whose rectangular R-transform with ratio
/// `lambda` is `c`. The support is searched in `[-R, R]` with `R` the largest
/// modulus of `support_hint` (or `4 √c_2` for an empty hint); `R` is doubled
/// while mass sits at its boundary.
pub fn recover_measure_with_report<R: RTransform>(
    c: &R,
    lambda: f64,
    cfg: &ContourConfig,
    support_hint: (f64, f64),
) -> Result<(SymmetricMeasure, RecoveryReport)> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let mut radius = support_hint.0.abs().max(support_hint.1.abs());
    if !(radius > 0.0) || !radius.is_finite() {
        let c2 = c.second_cumulant();
        radius = if c2 > 0.0 { 4.0 * c2.sqrt() } else { 1.0 };
    }
    let engine = Engine { c, lambda, cfg };
    let mut doublings = 0;
    loop {
        match engine.run(radius)? {
            Outcome::Done(measure, mut report) => {
                report.hint_doublings = doublings;
                return Ok((measure, report));
            }
            Outcome::TouchesBoundary(mass) => {
                if doublings >= cfg.max_hint_doublings {
                    return Err(Error::RecoveryFailed(format!(
                        "mass {mass:.6} captured in [-{radius}, {radius}] with the support still reaching the boundary"
                    )));
                }
                doublings += 1;
                radius *= 2.0;
            }
        }
    }
}

enum Outcome {
    Done(SymmetricMeasure, RecoveryReport),
    TouchesBoundary(f64),
}

/// A tracked solution of `s = z T(C(s))` at `ζ`.
#[derive(Debug, Clone)]
struct Point<S> {
    zeta: Complex64,
    s: Complex64,
    /// `ds/dζ`
    ds: Complex64,
    /// `G_μ(ζ)`
    g: Complex64,
    state: S,
}

struct Engine<'a, R> {
    c: &'a R,
    lambda: f64,
    cfg: &'a ContourConfig,
}

impl<R: RTransform> Engine<'_, R> {
    fn solve(&self, zeta: Complex64, guess: Complex64, state: &R::State) -> Option<Point<R::State>> {
        let z = 1.0 / (zeta * zeta);
        let mut s = guess;
        let mut st = state.clone();
        let tol = 4.0 * self.cfg.newton_tolerance;
        let mut last_step = f64::INFINITY;
        for _ in 0..TRACK_ITERATIONS {
            let (cv, dc) = self.c.eval(s, &mut st).ok()?;
            let (t, dt) = t_map(self.lambda, cv);
            let df = 1.0 - z * dt * dc;
            let step = (s - z * t) / df;
            if !step.is_finite() {
                return None;
            }
            s -= step;
            let size = step.norm();
            // converged, or stalled at the rounding floor of a large `s`
            let floor = size >= 0.5 * last_step && size <= 1e-9 * s.norm();
            last_step = size;
            if size <= tol * s.norm() || floor {
                let (cv, dc) = self.c.eval(s, &mut st).ok()?;
                let (t, dt) = t_map(self.lambda, cv);
                let df = 1.0 - z * dt * dc;
                let g = (1.0 + cv) / zeta;
                let ds = -2.0 / (zeta * zeta * zeta) * t / df;
                // a Cauchy transform maps the lower half plane to the upper one
                if !g.is_finite() || !ds.is_finite() || g.im < -1e-10 * g.norm() {
                    return None;
                }
                return Some(Point { zeta, s, ds, g, state: st });
            }
        }
        None
    }

    /// Continuation along the segment to `to` with adaptive step length.
    fn advance(&self, from: &Point<R::State>, to: Complex64) -> Result<Point<R::State>> {
        let start = from.zeta;
        let mut cur = from.clone();
        let mut t: f64 = 0.0;
        let mut dt = 1.0;
        let min_dt = 0.5f64.powi(self.cfg.max_bisections as i32);
        while t < 1.0 {
            let next_t = (t + dt).min(1.0);
            let target = if next_t == 1.0 { to } else { start + (to - start) * next_t };
            let step = target - cur.zeta;
            let guess = cur.s + cur.ds * step;
            let predicted = (guess - cur.s).norm();
            match self.solve(target, guess, &cur.state) {
                Some(p) if (p.s - guess).norm() <= 0.5 * predicted + 1e-9 * (1.0 + p.s.norm()) => {
                    cur = p;
                    t = next_t;
                    dt *= 2.0;
                }
                _ => {
                    dt *= 0.5;
                    if dt < min_dt {
                        return Err(Error::NonConvergence(format!(
                            "continuation stalled between {} and {to}",
                            cur.zeta
                        )));
                    }
                }
            }
        }
        Ok(cur)
    }

    /// Solution at `x - iε`, reached from far below along a vertical line.
    fn descend(&self, x: f64, eps: f64, radius: f64) -> Result<Point<R::State>> {
        let mut height = 8.0 * (radius + 1.0);
        let zeta = Complex64::new(x, -height);
        let z = 1.0 / (zeta * zeta);
        let mut p = self
            .solve(zeta, z, &self.c.initial_state())
            .ok_or_else(|| Error::NonConvergence(format!("no solution far from the axis at {zeta}")))?;
        while height > eps {
            height = (height / 4.0).max(eps);
            p = self.advance(&p, Complex64::new(x, -height))?;
        }
        Ok(p)
    }

    /// Solutions at `x_k - iε`, each continued from the last success.
    /// Points that cannot be reached are `None`: this happens where `s` is a
    /// poor coordinate, e.g. near 0 for laws without mass there.
    fn sweep(&self, from: &Point<R::State>, xs: &[f64], eps: f64) -> Vec<Option<Point<R::State>>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut last = from.clone();
        for &x in xs {
            match self.advance(&last, Complex64::new(x, -eps)) {
                Ok(p) => {
                    last = p.clone();
                    out.push(Some(p));
                }
                Err(_) => out.push(None),
            }
        }
        out
    }

    /// Sweep over `xs` (increasing) started by a descent at the last node.
    fn sweep_from_right(&self, xs: &[f64], eps: f64, radius: f64) -> Result<Vec<Option<Point<R::State>>>> {
        let start = self.descend(xs[xs.len() - 1], eps, radius)?;
        let rev: Vec<f64> = xs.iter().rev().copied().collect();
        let mut out = self.sweep(&start, &rev, eps);
        out.reverse();
        Ok(out)
    }

    /// Density at `x` from the point at `(x, ε_0)`, continued down the
    /// schedule. If the descent breaks off, the offsets reached so far are
    /// used and the estimate is marked unreliable.
    fn density_from(&self, top: &Point<R::State>, atoms: &[(f64, f64)]) -> Option<DensityEstimate> {
        let eps = &self.cfg.epsilon_schedule;
        let x = top.zeta.re;
        let mut im = Vec::with_capacity(eps.len());
        im.push(regular_part(top.zeta, top.g, atoms).im);
        let mut p = top.clone();
        for &e in &eps[1..] {
            match self.advance(&p, Complex64::new(x, -e)) {
                Ok(next) => p = next,
                Err(_) => break,
            }
            im.push(regular_part(p.zeta, p.g, atoms).im);
        }
        if im.len() < 2 {
            return None;
        }
        let mut d = richardson_density(&eps[..im.len()], &im);
        d.reliable &= im.len() == eps.len();
        Some(d)
    }

    fn density_at(&self, near: &Point<R::State>, x: f64, atoms: &[(f64, f64)]) -> Option<DensityEstimate> {
        let top = self.advance(near, Complex64::new(x, -self.cfg.epsilon_schedule[0])).ok()?;
        self.density_from(&top, atoms)
    }

    /// Follows a candidate atom down to `ATOM_EPS_MIN`; returns its location
    /// and mass when `ε ℑG` settles to a positive limit.
    fn refine_atom(&self, start: &Point<R::State>, eps0: f64) -> Result<Option<(f64, f64)>> {
        let fixed = start.zeta.re == 0.0;
        let mut a = start.zeta.re;
        let mut cur = start.clone();
        let mut eps = eps0;
        let mut history: Vec<f64> = Vec::new();
        while eps > ATOM_EPS_MIN {
            eps *= 0.5;
            // tracking fails once the pole is resolved beyond rounding; keep
            // the levels obtained so far
            let Ok((next, x)) = self.atom_level(&cur, a, eps, fixed) else {
                break;
            };
            cur = next;
            a = x;
            let p = eps * cur.g.im;
            if p < self.cfg.atom_threshold {
                return Ok(None);
            }
            history.push(p);
        }
        let n = history.len();
        if n < 2 {
            return Ok(None);
        }
        let (prev, last) = (history[n - 2], history[n - 1]);
        if last / prev < 0.9 {
            return Ok(None);
        }
        let mass = 2.0 * last - prev;
        Ok((mass > self.cfg.atom_threshold).then_some((a, mass)))
    }

    /// One refinement level at offset `eps`: the peak of `ε ℑG` near `a`.
    fn atom_level(&self, cur: &Point<R::State>, a: f64, eps: f64, fixed: bool) -> Result<(Point<R::State>, f64)> {
        if fixed {
            return Ok((self.advance(cur, Complex64::new(a, -eps))?, a));
        }
        let h = eps;
        let left = self.advance(cur, Complex64::new(a - h, -eps))?;
        let mid = self.advance(&left, Complex64::new(a, -eps))?;
        let right = self.advance(&mid, Complex64::new(a + h, -eps))?;
        let (pl, pm, pr) = (eps * left.g.im, eps * mid.g.im, eps * right.g.im);
        // 1/p is quadratic in x for a pure pole; fit it and take the vertex
        let mut x = a;
        if pl > 0.0 && pm > 0.0 && pr > 0.0 {
            let (ql, qm, qr) = (1.0 / pl, 1.0 / pm, 1.0 / pr);
            let curv = ql - 2.0 * qm + qr;
            if curv > 0.0 {
                let shift = (0.5 * h * (ql - qr) / curv).clamp(-2.0 * h, 2.0 * h);
                if a + shift > 0.0 {
                    x = a + shift;
                }
            }
        }
        Ok((self.advance(&right, Complex64::new(x, -eps))?, x))
    }

    fn run(&self, radius: f64) -> Result<Outcome> {
        let cfg = self.cfg;
        let eps = &cfg.epsilon_schedule;
        let xs = uniform_grid(0.0, radius, cfg.coarse_points);
        let dx = xs[1] - xs[0];
        let n = xs.len();

        // atoms
        let eps_scan = 2.0 * dx;
        let scan = self.sweep_from_right(&xs, eps_scan, radius)?;
        let p: Vec<f64> = scan.iter().map(|pt| pt.as_ref().map_or(0.0, |pt| eps_scan * pt.g.im)).collect();
        let mut half_atoms: Vec<(f64, f64)> = Vec::new();
        for i in 0..n - 1 {
            let peak = p[i] > cfg.atom_threshold && p[i] >= p[i + 1] && (i == 0 || p[i] >= p[i - 1]);
            if let (true, Some(pt)) = (peak, &scan[i]) {
                if let Some(atom) = self.refine_atom(pt, eps_scan)? {
                    half_atoms.push(atom);
                }
            }
        }
        if p[n - 1] > cfg.atom_threshold && p[n - 1] > p[n - 2] {
            return Ok(Outcome::TouchesBoundary(half_atoms.iter().map(|a| a.1).sum()));
        }
        let atoms = mirrored_atoms(&half_atoms);
        let exclusion = 30.0 * eps[0];
        let near_atom = |x: f64| half_atoms.iter().any(|&(a, _)| (x - a).abs() < exclusion);

        // coarse density and support intervals
        let top = self.sweep_from_right(&xs, eps[0], radius)?;
        let mut rho = Vec::with_capacity(n);
        let mut failed = 0;
        for (pt, &x) in top.iter().zip(&xs) {
            let d = match pt {
                _ if near_atom(x) => None,
                Some(pt) => self.density_from(pt, &atoms),
                None => None,
            };
            failed += usize::from(d.is_none() && !near_atom(x));
            rho.push(d.map_or(f64::NAN, |d| d.value));
        }
        if 4 * failed > n {
            return Err(Error::RecoveryFailed(format!(
                "continuation failed at {failed} of {n} scan points in [0, {radius}]"
            )));
        }
        fill_gaps(&mut rho);
        let nearest = |x: f64| -> &Point<R::State> {
            let k = ((x / dx).round() as usize).min(n - 1);
            (0..n)
                .flat_map(|d| [k.checked_sub(d), Some(k + d)])
                .flatten()
                .filter(|&j| j < n)
                .find_map(|j| top[j].as_ref())
                .expect("at least one scan point succeeded")
        };
        let rho_max = rho.iter().copied().fold(0.0, f64::max);
        let tau = (1e-4 * rho_max).max(1e-7);
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < n {
            if rho[i] <= tau {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && rho[i] > tau {
                i += 1;
            }
            let end = i - 1;
            if end == n - 1 {
                let mass = half_atoms.iter().map(|a| a.1).sum();
                return Ok(Outcome::TouchesBoundary(mass));
            }
            let left = if start == 0 {
                0.0
            } else {
                self.edge(nearest(xs[start]), xs[start - 1], xs[start], tau, &atoms, true)
            };
            let right = self.edge(nearest(xs[end]), xs[end], xs[end + 1], tau, &atoms, false);
            intervals.push((left, right));
        }

        // final density on cosine grids per interval
        let mut grid: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut unreliable = failed;
        let mut fitted = Vec::with_capacity(intervals.len());
        for &(l, r) in &intervals {
            let nodes = if l == 0.0 {
                let full = cosine_grid(-r, r, 2 * cfg.interval_points - 1);
                full[cfg.interval_points - 1..].to_vec()
            } else {
                cosine_grid(l, r, cfg.interval_points)
            };
            let inner = if l == 0.0 { &nodes[..nodes.len() - 1] } else { &nodes[1..nodes.len() - 1] };
            let sweep = self.sweep(nearest(inner[0]), inner, eps[0]);
            let mut vals = Vec::with_capacity(nodes.len());
            if l != 0.0 {
                vals.push(0.0);
            }
            for (pt, &x) in sweep.iter().zip(inner) {
                let d = match pt {
                    _ if near_atom(x) => None,
                    Some(pt) => self.density_from(pt, &atoms),
                    None => None,
                };
                unreliable += usize::from(d.map_or(!near_atom(x), |d| !d.reliable));
                vals.push(d.map_or(f64::NAN, |d| d.value));
            }
            vals.push(0.0);
            fill_gaps(&mut vals);
            // nodes closer to an edge than a few ε are smeared by the smoothing
            let u_fit = (20.0 * eps[0]).min((r - l) / 32.0);
            let mut right: Vec<f64> = nodes.iter().rev().map(|x| r - x).collect();
            vals.reverse();
            match_edge(&mut right, &mut vals, u_fit, -u_fit);
            vals.reverse();
            let mut nodes: Vec<f64> = right.iter().rev().map(|u| r - u).collect();
            let r = nodes[nodes.len() - 1];
            if l != 0.0 {
                let mut left: Vec<f64> = nodes.iter().map(|x| x - l).collect();
                match_edge(&mut left, &mut vals, u_fit, -0.5 * l);
                nodes = left.iter().map(|u| l + u).collect();
            }
            let l = nodes[0];
            fitted.push((l, r));
            // a blown-up edge keeps a finite value; close it with a near-vertical
            // cell so the gap beyond stays empty
            let jump = 1e-12 * r.max(1.0);
            if l != 0.0 && vals[0] > 0.0 {
                nodes.insert(0, l - jump);
                vals.insert(0, 0.0);
            }
            if vals.last().is_some_and(|&v| v > 0.0) {
                nodes.push(r + jump);
                vals.push(0.0);
            }
            if grid.last().is_some_and(|&last| last >= nodes[0]) {
                return Err(Error::RecoveryFailed(format!("support intervals overlap near {}", nodes[0])));
            }
            grid.extend_from_slice(&nodes);
            values.extend_from_slice(&vals);
        }

        let density = if grid.is_empty() {
            None
        } else {
            let (g, v) = mirror(&grid, &values);
            Some(PiecewiseLinear::new(g, v)?)
        };
        let atom_mass: f64 = atoms.iter().map(|a| a.1).sum();
        let raw_mass = atom_mass + density.as_ref().map_or(0.0, PiecewiseLinear::mass);
        if !((raw_mass - 1.0).abs() <= cfg.mass_tolerance) {
            return Err(Error::RecoveryFailed(format!(
                "recovered mass {raw_mass:.6} ({} atoms, {} support intervals in [0, {radius}])",
                atoms.len(),
                intervals.len()
            )));
        }
        let scale = 1.0 / raw_mass;
        let atoms = atoms.into_iter().map(|(x, m)| (x, m * scale)).collect();
        let measure = SymmetricMeasure::new(atoms, density.map(|d| d.scaled(scale)))?;
        let report = RecoveryReport {
            radius,
            hint_doublings: 0,
            atoms: half_atoms,
            intervals: fitted,
            raw_mass,
            unreliable_points: unreliable,
        };
        Ok(Outcome::Done(measure, report))
    }

    /// Point in `[lo, hi]` where the density crosses `tau`; `rising` when it
    /// is below `tau` at `lo`.
    fn edge(
        &self,
        near: &Point<R::State>,
        mut lo: f64,
        mut hi: f64,
        tau: f64,
        atoms: &[(f64, f64)],
        rising: bool,
    ) -> f64 {
        for _ in 0..EDGE_STEPS {
            let mid = 0.5 * (lo + hi);
            // unreachable points count as empty
            let above = self.density_at(near, mid, atoms).is_some_and(|d| d.value > tau);
            if above == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn mirrored_atoms(half: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut atoms = Vec::with_capacity(2 * half.len());
    for &(a, m) in half {
        if a == 0.0 {
            atoms.push((0.0, m));
        } else {
            atoms.push((-a, m));
            atoms.push((a, m));
        }
    }
    atoms
}

/// Replaces the values at distances `u < 6 u_fit` from a detected support edge
/// (`u[0] = 0`) by those of the model `A d^p (1 + b d)`, `d = u - e`, chosen
/// so that every cell of the piecewise-linear model carries the model's mass.
/// The model is fitted by least squares on the nodes in `[u_fit, 6 u_fit]`.
/// The nodes below `u_fit` are moved affinely onto `[e, u_fit]`, never below
/// `min_e`. Only applied to blow-ups (`p < 0`): there the threshold test
/// places the edge too far out, while vanishing edges are resolved directly.
fn match_edge(u: &mut [f64], v: &mut [f64], u_fit: f64, min_e: f64) {
    let fit: Vec<usize> = (0..u.len()).filter(|&i| u[i] >= u_fit && u[i] <= 6.0 * u_fit).collect();
    if fit.len() < 4 || fit[0] == 0 || !fit.iter().all(|&i| v[i] > 0.0) || v[fit[0]] <= v[fit[fit.len() - 1]] {
        return;
    }
    // for fixed (e, p) the model is linear in (A, A b) after dividing by d^p
    let solve = |e: f64, p: f64| -> (f64, f64, f64) {
        let (mut s0, mut s1, mut s2, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &i in &fit {
            let d = u[i] - e;
            let y = v[i] / d.powf(p);
            let w = 1.0 / (y * y);
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            r0 += w * y;
            r1 += w * y * d;
        }
        let det = s0 * s2 - s1 * s1;
        let alpha = (r0 * s2 - r1 * s1) / det;
        let beta = (s0 * r1 - s1 * r0) / det;
        let sse = fit
            .iter()
            .map(|&i| {
                let d = u[i] - e;
                let model = d.powf(p) * (alpha + beta * d);
                ((model - v[i]) / v[i]).powi(2)
            })
            .sum();
        (alpha, beta, sse)
    };
    let golden = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    };
    let u0 = u[fit[0]];
    let best_e = |p: f64| golden((-u0).max(min_e), 0.9 * u0, &|e| solve(e, p).2);
    let p = golden(-0.95, 0.5, &|p| solve(best_e(p), p).2);
    if !(p < -0.05) {
        return;
    }
    let e = best_e(p);
    let (alpha, beta, _) = solve(e, p);
    let primitive = |x: f64| {
        if x > e {
            let d = x - e;
            alpha * d.powf(p + 1.0) / (p + 1.0) + beta * d.powf(p + 2.0) / (p + 2.0)
        } else {
            0.0
        }
    };
    for j in 0..fit[0] {
        u[j] = e + (u0 - e) * u[j] / u0;
    }
    // piecewise-linear cells also overshoot a convex blow-up inside the window
    for j in (0..fit[fit.len() - 1]).rev() {
        let mass = primitive(u[j + 1]) - primitive(u[j]);
        v[j] = (2.0 * mass / (u[j + 1] - u[j]) - v[j + 1]).max(0.0);
    }
}

/// `G` minus the contribution of the atoms.
fn regular_part(zeta: Complex64, g: Complex64, atoms: &[(f64, f64)]) -> Complex64 {
    atoms.iter().fold(g, |acc, &(a, m)| acc - m / (zeta - a))
}

/// Replaces NaN entries by linear interpolation between the nearest finite
/// neighbours (or by the nearest one at the ends).
fn fill_gaps(v: &mut [f64]) {
    let n = v.len();
    let mut i = 0;
    while i < n {
        if !v[i].is_nan() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && v[i].is_nan() {
            i += 1;
        }
        let left = start.checked_sub(1).map(|k| v[k]);
        let right = (i < n).then(|| v[i]);
        for k in start..i {
            v[k] = match (left, right) {
                (Some(a), Some(b)) => a + (b - a) * (k + 1 - start) as f64 / (i + 1 - start) as f64,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => 0.0,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{ClosureRTransform, LevyRTransform, MeasureRTransform};
    use crate::LevyMeasure;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zero_transform_gives_dirac() {
        let cfg = ContourConfig::default();
        let c = ClosureRTransform::new(|_| Complex64::new(0.0, 0.0));
        let (mu, report) = match recover_measure_with_report(&c, 0.5, &cfg, (-1.0, 1.0)) { Ok(r) => r, Err(e) => panic!("{e}") };
        assert_eq!(report.atoms.len(), 1);
        assert!(mu.density().is_none());
        assert!(close(mu.atoms()[0].0, 0.0, 0.0) && close(mu.atoms()[0].1, 1.0, 1e-12));
    }

    #[test]
    fn identity_transform_at_lambda_one_is_semicircle() {
        let cfg = ContourConfig::default();
        let c = LevyRTransform::new(&LevyMeasure::dirac_zero(1.0).unwrap());
        let (mu, report) = recover_measure_with_report(&c, 1.0, &cfg, (-1.0, 1.0)).unwrap();
        assert!(report.atoms.is_empty());
        assert_eq!(report.intervals.len(), 1);
        assert!(close(report.intervals[0].1, 2.0, 1e-4), "{report:?}");
        assert!(close(mu.density_at(0.0), 1.0 / PI, 1e-6));
        assert!(close(mu.moment(2), 1.0, 1e-6));
        assert!(close(mu.moment(4), 2.0, 1e-5));
        assert!(close(mu.moment(6), 5.0, 1e-4));
    }

    #[test]
    fn poisson_at_lambda_zero_has_atom_at_origin() {
        let cfg = ContourConfig::default();
        let c = ClosureRTransform::new(|z: Complex64| 0.5 * z / (1.0 - z));
        let (mu, report) = recover_measure_with_report(&c, 0.0, &cfg, (-3.0, 3.0)).unwrap();
        assert_eq!(report.atoms.len(), 1);
        assert!(close(report.atoms[0].0, 0.0, 0.0));
        assert!(close(report.atoms[0].1, 0.5, 1e-6));
        // m_2 = c, m_4 = c + c²
        assert!(close(mu.moment(2), 0.5, 1e-5));
        assert!(close(mu.moment(4), 0.75, 1e-4));
    }

    #[test]
    fn bernoulli_round_trip() {
        let cfg = ContourConfig::default();
        let b = SymmetricMeasure::bernoulli();
        let c = MeasureRTransform::new(&b, 0.5, cfg.clone()).unwrap();
        let (mu, report) = match recover_measure_with_report(&c, 0.5, &cfg, (-1.0, 1.0)) { Ok(r) => r, Err(e) => panic!("{e}") };
        assert_eq!(report.atoms.len(), 1, "{report:?}");
        assert!(close(report.atoms[0].0, 1.0, 1e-8));
        for k in [2, 4, 6] {
            assert!(close(mu.moment(k), 1.0, 1e-4));
        }
    }

    #[test]
    fn gaps_are_filled_linearly() {
        let mut v = vec![f64::NAN, 1.0, f64::NAN, f64::NAN, 4.0, f64::NAN];
        fill_gaps(&mut v);
        assert_eq!(v, vec![1.0, 1.0, 2.0, 3.0, 4.0, 4.0]);
    }
}
