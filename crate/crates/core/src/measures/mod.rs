//! Symmetric probability measures, finite Levy measures and laws on `[0, ∞)`.
//!
//! All three share one representation: a list of atoms plus an optional
//! piecewise-linear density on a finite grid. Moments and Cauchy transforms
//! are exact for that representation.

pub mod grid;
mod piecewise;

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use piecewise::PiecewiseLinear;
pub(crate) use piecewise::{GL5_NODES, GL5_WEIGHTS};

/// Allowed deviation of a probability measure's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Largest mass drift that is silently renormalized after a transformation.
pub const DRIFT_TOLERANCE: f64 = 1e-6;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Relative width of the zero-mass cells used to represent a jump.
const JUMP_WIDTH: f64 = 1e-12;

/// On-disk layout: `{"atoms":[[x,m],...],"grid":[...],"density":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureFile {
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default)]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Parts {
    atoms: Vec<(f64, f64)>,
    density: Option<PiecewiseLinear>,
}

impl Parts {
    fn new(atoms: Vec<(f64, f64)>, density: Option<PiecewiseLinear>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms;
        for &(x, m) in &atoms {
            if !x.is_finite() || !m.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom ({x}, {m})")));
            }
            if m < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative atom mass {m} at {x}")));
            }
        }
        atoms.retain(|&(_, m)| m > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => merged.push((x, m)),
            }
        }
        let density = density.filter(|d| d.max_value() > 0.0);
        Ok(Self { atoms: merged, density })
    }

    fn from_file(file: MeasureFile) -> Result<Self> {
        let density = if file.grid.is_empty() && file.density.is_empty() {
            None
        } else {
            Some(PiecewiseLinear::new(file.grid, file.density)?)
        };
        Self::new(file.atoms.iter().map(|a| (a[0], a[1])).collect(), density)
    }

    fn to_file(&self) -> MeasureFile {
        let (grid, density) = match &self.density {
            Some(d) => (d.grid().to_vec(), d.values().to_vec()),
            None => (Vec::new(), Vec::new()),
        };
        MeasureFile {
            atoms: self.atoms.iter().map(|&(x, m)| [x, m]).collect(),
            grid,
            density,
        }
    }

    fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    fn density_mass(&self) -> f64 {
        self.density.as_ref().map_or(0.0, PiecewiseLinear::mass)
    }

    fn total_mass(&self) -> f64 {
        self.atom_mass() + self.density_mass()
    }

    fn raw_moment(&self, k: u32) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|&(x, m)| m * x.powi(k as i32)).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.raw_moment(k))
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|&(x, m)| m * f(x)).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.integrate(&f))
    }

    fn radius(&self) -> f64 {
        let a = self.atoms.iter().map(|a| a.0.abs()).fold(0.0, f64::max);
        let d = self.density.as_ref().map_or(0.0, PiecewiseLinear::radius);
        a.max(d)
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|&(x, m)| (x, m * factor)).collect(),
            density: self.density.as_ref().map(|d| d.scaled(factor)),
        }
    }

    fn dilated(&self, c: f64) -> Result<Self> {
        let atoms = self.atoms.iter().map(|&(x, m)| (c * x, m)).collect();
        let density = match &self.density {
            Some(d) => Some(PiecewiseLinear::new(
                d.grid().iter().map(|x| c * x).collect(),
                d.values().iter().map(|v| v / c).collect(),
            )?),
            None => None,
        };
        Self::new(atoms, density)
    }

    fn cauchy(&self, zeta: Complex64) -> (Complex64, Complex64) {
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for &(a, m) in &self.atoms {
            let r = 1.0 / (zeta - a);
            g += m * r;
            dg -= m * r * r;
        }
        if let Some(d) = &self.density {
            let (dg0, ddg0) = d.cauchy_with_derivative(zeta);
            g += dg0;
            dg += ddg0;
        }
        (g, dg)
    }

    /// `g(z) = ∫ dμ(t) / (1 - z t²)` and `g'(z)`.
    fn even_transform(&self, z: Complex64) -> (Complex64, Complex64) {
        if z == Complex64::new(0.0, 0.0) {
            return (Complex64::new(self.total_mass(), 0.0), Complex64::new(self.raw_moment(2), 0.0));
        }
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for &(x, m) in &self.atoms {
            let x2 = x * x;
            let r = 1.0 / (1.0 - z * x2);
            g += m * r;
            dg += m * x2 * r * r;
        }
        if let Some(d) = &self.density {
            // either square root works: the integrand is even in ζ
            let zeta = 1.0 / z.sqrt();
            let (gc, dgc) = d.cauchy_with_derivative(zeta);
            g += zeta * gc;
            dg += (gc + zeta * dgc) * (-0.5 * zeta * zeta * zeta);
        }
        (g, dg)
    }

    fn check_symmetric(&self) -> Result<()> {
        let n = self.atoms.len();
        for i in 0..n / 2 + n % 2 {
            let (x, m) = self.atoms[i];
            let (y, w) = self.atoms[n - 1 - i];
            let scale = 1.0 + x.abs();
            if (x + y).abs() > SYMMETRY_TOLERANCE * scale || (m - w).abs() > SYMMETRY_TOLERANCE * (1.0 + m) {
                return Err(Error::InvalidMeasure(format!(
                    "atoms are not symmetric: ({x}, {m}) vs ({y}, {w})"
                )));
            }
        }
        if let Some(d) = &self.density {
            let (g, v) = (d.grid(), d.values());
            let n = g.len();
            let vmax = d.max_value();
            for i in 0..n / 2 + n % 2 {
                let j = n - 1 - i;
                if (g[i] + g[j]).abs() > SYMMETRY_TOLERANCE * (1.0 + g[i].abs())
                    || (v[i] - v[j]).abs() > SYMMETRY_TOLERANCE * (1.0 + vmax)
                {
                    return Err(Error::InvalidMeasure(format!(
                        "density is not symmetric at grid node {} ({})",
                        i, g[i]
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_mass(&self, target: f64) -> Result<()> {
        let mass = self.total_mass();
        if (mass - target).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("total mass {mass} differs from {target}")));
        }
        Ok(())
    }

    fn renormalized(self) -> Result<Self> {
        let mass = self.total_mass();
        if !((mass - 1.0).abs() <= DRIFT_TOLERANCE) {
            return Err(Error::NormalizationDrift { mass, tolerance: DRIFT_TOLERANCE });
        }
        Ok(self.scaled(1.0 / mass))
    }

    fn sum(&self, other: &Self) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(add_densities(a, b)?),
        };
        Self::new(atoms, density)
    }
}

/// Pointwise sum of two piecewise-linear densities. A density that does not
/// vanish at an end of its grid gets an extra node just outside so the jump
/// survives on the merged grid.
fn add_densities(a: &PiecewiseLinear, b: &PiecewiseLinear) -> Result<PiecewiseLinear> {
    let mut nodes: Vec<f64> = a.grid().iter().chain(b.grid().iter()).copied().collect();
    for d in [a, b] {
        let (lo, hi) = (d.lower(), d.upper());
        let width = JUMP_WIDTH * (1.0 + lo.abs().max(hi.abs()));
        if d.values()[0] > 0.0 {
            nodes.push(lo - width);
        }
        if d.values()[d.len() - 1] > 0.0 {
            nodes.push(hi + width);
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let values = nodes.iter().map(|&x| a.eval(x) + b.eval(x)).collect();
    PiecewiseLinear::new(nodes, values)
}

/// Nonnegative half of a symmetric density, with a node inserted at 0 when
/// the grid does not contain it.
fn half_line(d: &PiecewiseLinear) -> (Vec<f64>, Vec<f64>) {
    let start = d.grid().partition_point(|&x| x < 0.0);
    let mut g = Vec::with_capacity(d.len() - start + 1);
    let mut v = Vec::with_capacity(d.len() - start + 1);
    if d.grid()[start] != 0.0 {
        g.push(0.0);
        v.push(d.eval(0.0));
    }
    g.extend_from_slice(&d.grid()[start..]);
    v.extend_from_slice(&d.values()[start..]);
    (g, v)
}

macro_rules! shared_accessors {
    () => {
        pub fn atoms(&self) -> &[(f64, f64)] {
            &self.0.atoms
        }

        pub fn density(&self) -> Option<&PiecewiseLinear> {
            self.0.density.as_ref()
        }

        pub fn total_mass(&self) -> f64 {
            self.0.total_mass()
        }

        pub fn atom_mass(&self) -> f64 {
            self.0.atom_mass()
        }

        /// Density value at `x` (atoms excluded).
        pub fn density_at(&self, x: f64) -> f64 {
            self.0.density.as_ref().map_or(0.0, |d| d.eval(x))
        }

        /// Largest `|x|` carrying mass in the representation.
        pub fn support_radius(&self) -> f64 {
            self.0.radius()
        }

        /// `∫ f dμ`: exact at atoms, 5-point Gauss-Legendre per density cell.
        pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
            self.0.integrate(f)
        }

        /// `(∫ dμ(t)/(ζ - t), d/dζ)` without domain checks.
        pub fn cauchy_with_derivative(&self, zeta: Complex64) -> (Complex64, Complex64) {
            self.0.cauchy(zeta)
        }

        pub fn to_file(&self) -> MeasureFile {
            self.0.to_file()
        }

        pub fn to_json(&self) -> String {
            serde_json::to_string(&self.0.to_file()).expect("measure serialization cannot fail")
        }

        pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
            std::fs::write(path, self.to_json())?;
            Ok(())
        }

        pub fn load(path: impl AsRef<Path>) -> Result<Self> {
            let text = std::fs::read_to_string(path)?;
            Self::from_json(&text)
        }

        pub fn from_json(text: &str) -> Result<Self> {
            let file: MeasureFile = serde_json::from_str(text)?;
            Self::from_file(file)
        }
    };
}

/// A symmetric probability measure on ℝ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct SymmetricMeasure(Parts);

impl SymmetricMeasure {
    /// Validates symmetry, nonnegativity and total mass 1 within [`MASS_TOLERANCE`].
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<PiecewiseLinear>) -> Result<Self> {
        let parts = Parts::new(atoms, density)?;
        parts.check_symmetric()?;
        parts.check_mass(1.0)?;
        Ok(Self(parts))
    }

    /// Like [`SymmetricMeasure::new`] but rescales the mass to 1 when it is
    /// within [`DRIFT_TOLERANCE`]; larger drifts are an error.
    pub fn normalized(atoms: Vec<(f64, f64)>, density: Option<PiecewiseLinear>) -> Result<Self> {
        let parts = Parts::new(atoms, density)?;
        parts.check_symmetric()?;
        Ok(Self(parts.renormalized()?))
    }

    pub fn from_file(file: MeasureFile) -> Result<Self> {
        let parts = Parts::from_file(file)?;
        parts.check_symmetric()?;
        parts.check_mass(1.0)?;
        Ok(Self(parts))
    }

    pub fn dirac_zero() -> Self {
        Self(Parts { atoms: vec![(0.0, 1.0)], density: None })
    }

    /// `(δ_{-x} + δ_x)/2`.
    pub fn two_point(x: f64) -> Result<Self> {
        if x == 0.0 {
            return Ok(Self::dirac_zero());
        }
        Self::new(vec![(-x, 0.5), (x, 0.5)], None)
    }

    /// `(δ_{-1} + δ_1)/2`.
    pub fn bernoulli() -> Self {
        Self(Parts { atoms: vec![(-1.0, 0.5), (1.0, 0.5)], density: None })
    }

    /// Symmetric density shape given on a grid, rescaled to mass 1.
    pub fn from_density(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = PiecewiseLinear::new(grid, values)?;
        let mass = d.mass();
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure("density has zero mass".into()));
        }
        Self::new(Vec::new(), Some(d.scaled(1.0 / mass)))
    }

    shared_accessors!();

    /// `∫ t^k dμ(t)`; odd orders are exactly 0 and `k = 0` gives 1.
    pub fn moment(&self, k: u32) -> f64 {
        if k == 0 {
            1.0
        } else if k % 2 == 1 {
            0.0
        } else {
            self.0.raw_moment(k)
        }
    }

    /// `(m_2, m_4, …, m_{2n})`.
    pub fn even_moments(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|j| self.moment(2 * j as u32)).collect()
    }

    /// `g(z) = ∫ dμ(t)/(1 - z t²)` together with `g'(z)`; no domain checks.
    ///
    /// For `z ∉ [0, ∞)` this equals `(1/√z) G_μ(1/√z)` for either root.
    pub fn even_transform(&self, z: Complex64) -> (Complex64, Complex64) {
        self.0.even_transform(z)
    }

    /// Image under `t ↦ t²`. Exact: the image keeps this measure as its
    /// square-root representation.
    pub fn pushforward_square(&self) -> NonnegativeMeasure {
        NonnegativeMeasure { root: self.clone() }
    }

    /// Image under `x ↦ c x`.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {c}")));
        }
        Ok(Self(self.0.dilated(c)?))
    }

    /// The same measure viewed as a Levy measure of mass 1.
    pub fn to_levy(&self) -> LevyMeasure {
        LevyMeasure(self.0.clone())
    }
}

impl TryFrom<MeasureFile> for SymmetricMeasure {
    type Error = Error;

    fn try_from(file: MeasureFile) -> Result<Self> {
        Self::from_file(file)
    }
}

impl From<SymmetricMeasure> for MeasureFile {
    fn from(m: SymmetricMeasure) -> Self {
        m.0.to_file()
    }
}

/// A finite, positive, symmetric measure on ℝ of any total mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct LevyMeasure(Parts);

impl LevyMeasure {
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<PiecewiseLinear>) -> Result<Self> {
        let parts = Parts::new(atoms, density)?;
        parts.check_symmetric()?;
        Ok(Self(parts))
    }

    pub fn from_file(file: MeasureFile) -> Result<Self> {
        let parts = Parts::from_file(file)?;
        parts.check_symmetric()?;
        Ok(Self(parts))
    }

    pub fn zero() -> Self {
        Self(Parts { atoms: Vec::new(), density: None })
    }

    /// `mass · δ_0`.
    pub fn dirac_zero(mass: f64) -> Result<Self> {
        Self::new(vec![(0.0, mass)], None)
    }

    /// `w (δ_{-x} + δ_x)`.
    pub fn symmetric_pair(x: f64, w: f64) -> Result<Self> {
        Self::new(vec![(-x, w), (x, w)], None)
    }

    shared_accessors!();

    /// `∫ t^k dG(t)`; odd orders are 0.
    pub fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            self.0.raw_moment(k)
        }
    }

    /// `G + H`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let parts = self.0.sum(&other.0)?;
        parts.check_symmetric()?;
        Ok(Self(parts))
    }

    /// `k · G`.
    pub fn scale(&self, k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be nonnegative, got {k}")));
        }
        Ok(Self(self.0.scaled(k)))
    }

    /// Image under `x ↦ c x` (not the Levy measure of a dilated law; see
    /// [`crate::infdiv::dilate_levy`]).
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {c}")));
        }
        Ok(Self(self.0.dilated(c)?))
    }

    /// Reweight by a nonnegative even function: `f(t) dG(t)`.
    pub fn reweight<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let atoms = self.0.atoms.iter().map(|&(x, m)| (x, m * f(x))).collect();
        let density = match &self.0.density {
            Some(d) => Some(PiecewiseLinear::new(
                d.grid().to_vec(),
                d.grid().iter().zip(d.values()).map(|(&x, &v)| v * f(x)).collect(),
            )?),
            None => None,
        };
        Self::new(atoms, density)
    }

    /// `g(z) = ∫ dG(t)/(1 - z t²)` and `g'(z)`; no domain checks.
    pub fn even_transform(&self, z: Complex64) -> (Complex64, Complex64) {
        self.0.even_transform(z)
    }

    /// Normalize to a probability measure; fails for the zero measure.
    pub fn to_probability(&self) -> Result<SymmetricMeasure> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure("zero measure cannot be normalized".into()));
        }
        Ok(SymmetricMeasure(self.0.scaled(1.0 / mass)))
    }
}

impl TryFrom<MeasureFile> for LevyMeasure {
    type Error = Error;

    fn try_from(file: MeasureFile) -> Result<Self> {
        Self::from_file(file)
    }
}

impl From<LevyMeasure> for MeasureFile {
    fn from(m: LevyMeasure) -> Self {
        m.0.to_file()
    }
}

/// A probability measure on `[0, ∞)`.
///
/// Stored through the unique symmetric measure `μ` whose image under
/// `t ↦ t²` it is. Densities of such images typically blow up like `1/√x`
/// at 0, which a grid in `x` cannot resolve but a grid in `t` can.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct NonnegativeMeasure {
    root: SymmetricMeasure,
}

impl NonnegativeMeasure {
    /// Atoms and density given in the `x` variable. The density is
    /// re-interpolated in `t = √x`; the mass after that step must be within
    /// [`DRIFT_TOLERANCE`] of 1 and is then renormalized.
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<PiecewiseLinear>) -> Result<Self> {
        let parts = Parts::new(atoms, density)?;
        Self::check_support(&parts)?;
        Self::from_parts(&parts)
    }

    pub fn from_file(file: MeasureFile) -> Result<Self> {
        let parts = Parts::from_file(file)?;
        Self::check_support(&parts)?;
        Self::from_parts(&parts)
    }

    fn check_support(parts: &Parts) -> Result<()> {
        if parts.atoms.first().is_some_and(|a| a.0 < 0.0)
            || parts.density.as_ref().is_some_and(|d| d.lower() < 0.0)
        {
            return Err(Error::InvalidMeasure("support must lie in [0, ∞)".into()));
        }
        Ok(())
    }

    fn from_parts(parts: &Parts) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * parts.atoms.len());
        for &(x, m) in &parts.atoms {
            if x == 0.0 {
                atoms.push((0.0, m));
            } else {
                let r = x.sqrt();
                atoms.push((-r, 0.5 * m));
                atoms.push((r, 0.5 * m));
            }
        }
        let density = match &parts.density {
            None => None,
            Some(d) => {
                let (xs, rho) = (d.grid(), d.values());
                let ts: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
                let mut t = Vec::with_capacity(ts.len() + 2);
                let mut mu = Vec::with_capacity(ts.len() + 2);
                if xs[0] == 0.0 {
                    let mu1 = rho[1] * ts[1];
                    // the first cell keeps its mass
                    let mu0 = ((rho[0] + rho[1]) * xs[1] / (2.0 * ts[1]) - mu1).max(0.0);
                    t.push(0.0);
                    mu.push(mu0);
                } else {
                    t.push(0.0);
                    mu.push(0.0);
                    if rho[0] > 0.0 {
                        t.push(ts[0] * (1.0 - JUMP_WIDTH));
                        mu.push(0.0);
                    }
                    t.push(ts[0]);
                    mu.push(rho[0] * ts[0]);
                }
                for i in 1..ts.len() {
                    t.push(ts[i]);
                    mu.push(rho[i] * ts[i]);
                }
                let (g, v) = grid::mirror(&t, &mu);
                Some(PiecewiseLinear::new(g, v)?)
            }
        };
        Ok(Self { root: SymmetricMeasure::normalized(atoms, density)? })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![(x, 1.0)], None)
    }

    /// The symmetric measure whose image under `t ↦ t²` is this one.
    pub fn symmetrize_sqrt(&self) -> SymmetricMeasure {
        self.root.clone()
    }

    pub fn root(&self) -> &SymmetricMeasure {
        &self.root
    }

    /// Atoms in the `x` variable.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.root
            .atoms()
            .iter()
            .filter(|a| a.0 >= 0.0)
            .map(|&(t, m)| if t == 0.0 { (0.0, m) } else { (t * t, 2.0 * m) })
            .collect()
    }

    pub fn atom_mass(&self) -> f64 {
        self.root.atom_mass()
    }

    pub fn total_mass(&self) -> f64 {
        self.root.total_mass()
    }

    /// `∫ x^k dρ(x)`.
    pub fn moment(&self, k: u32) -> f64 {
        self.root.moment(2 * k)
    }

    /// Density at `x > 0`; infinite at 0 when the root density is positive there.
    pub fn density_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let t = x.sqrt();
        let v = self.root.density_at(t);
        if v == 0.0 {
            0.0
        } else {
            v / t
        }
    }

    pub fn support_radius(&self) -> f64 {
        let r = self.root.support_radius();
        r * r
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.root.integrate(|t| f(t * t))
    }

    /// `(∫ dρ(x)/(w - x), d/dw)` without domain checks.
    pub fn cauchy_with_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        // 1/(w - t²) averaged over ±t is (1/s)·1/(s - t) with s² = w
        let s = w.sqrt();
        let (g, dg) = self.root.cauchy_with_derivative(s);
        let value = g / s;
        let derivative = (dg / s - g / (s * s)) / (2.0 * s);
        (value, derivative)
    }

    /// `x`-grid view: nodes `t²` for the nonnegative root nodes. The value
    /// at 0 is chosen so the first cell keeps its mass.
    pub fn to_file(&self) -> MeasureFile {
        let atoms = self.atoms().iter().map(|&(x, m)| [x, m]).collect();
        let (grid, density) = match self.root.density() {
            None => (Vec::new(), Vec::new()),
            Some(d) => {
                let (t, mu) = half_line(d);
                let mut xs = Vec::with_capacity(t.len());
                let mut rho = Vec::with_capacity(t.len());
                xs.push(0.0);
                rho.push((2.0 * mu[0] + mu[1]) / t[1]);
                for i in 1..t.len() {
                    xs.push(t[i] * t[i]);
                    rho.push(mu[i] / t[i]);
                }
                (xs, rho)
            }
        };
        MeasureFile { atoms, grid, density }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("measure serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }
}

impl TryFrom<MeasureFile> for NonnegativeMeasure {
    type Error = Error;

    fn try_from(file: MeasureFile) -> Result<Self> {
        Self::from_file(file)
    }
}

impl From<NonnegativeMeasure> for MeasureFile {
    fn from(m: NonnegativeMeasure) -> Self {
        m.to_file()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn semicircle(n: usize) -> SymmetricMeasure {
        let g = grid::cosine_grid(-2.0, 2.0, n);
        let v = g.iter().map(|x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI)).collect();
        SymmetricMeasure::from_density(g, v).unwrap()
    }

    #[test]
    fn bernoulli_moments() {
        let b = SymmetricMeasure::bernoulli();
        assert_eq!(b.moment(2), 1.0);
        assert_eq!(b.moment(3), 0.0);
        assert_eq!(b.moment(0), 1.0);
    }

    #[test]
    fn semicircle_second_moment() {
        let s = semicircle(4001);
        assert!((s.moment(2) - 1.0).abs() < 1e-6);
        assert!((s.moment(4) - 2.0).abs() < 1e-6);
        assert_eq!(s.moment(5), 0.0);
    }

    #[test]
    fn doubling_resolution_moves_moments_little() {
        let coarse = semicircle(4001);
        let fine = semicircle(8001);
        for k in (2..=8).step_by(2) {
            let rel = (coarse.moment(k) - fine.moment(k)).abs() / fine.moment(k);
            assert!(rel < 1e-6, "k={k} rel={rel}");
        }
    }

    #[test]
    fn push_and_pull_of_atoms() {
        let b = SymmetricMeasure::bernoulli();
        let rho = b.pushforward_square();
        assert_eq!(rho.atoms(), vec![(1.0, 1.0)]);
        assert_eq!(rho.symmetrize_sqrt(), b);
        let zero = SymmetricMeasure::dirac_zero().pushforward_square();
        assert_eq!(zero.atoms(), vec![(0.0, 1.0)]);
        let one = NonnegativeMeasure::dirac(1.0).unwrap();
        assert_eq!(one.symmetrize_sqrt(), b);
    }

    #[test]
    fn pushforward_of_semicircle_has_mean_one() {
        let rho = semicircle(4001).pushforward_square();
        assert!((rho.moment(1) - 1.0).abs() < 1e-6);
        assert!((rho.moment(2) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn square_round_trip_preserves_moments() {
        let s = semicircle(1001);
        let file = s.pushforward_square().to_file();
        let back = NonnegativeMeasure::from_file(file).unwrap().symmetrize_sqrt();
        for k in (2..=10).step_by(2) {
            assert!((back.moment(k) - s.moment(k)).abs() < 1e-9 * s.moment(k), "k={k}");
        }
    }

    #[test]
    fn symmetrize_handles_support_away_from_zero() {
        let rho = NonnegativeMeasure::new(
            vec![],
            Some(PiecewiseLinear::new(vec![1.0, 4.0], vec![1.0 / 3.0, 1.0 / 3.0]).unwrap()),
        )
        .unwrap();
        let mu = rho.symmetrize_sqrt();
        assert_eq!(mu.density_at(0.5), 0.0);
        assert!((mu.moment(2) - rho.moment(1)).abs() < 1e-9);
    }

    #[test]
    fn dilation_scales_moments() {
        let b = SymmetricMeasure::bernoulli().dilate(2.0).unwrap();
        assert_eq!(b.atoms(), &[(-2.0, 0.5), (2.0, 0.5)]);
        let s = semicircle(401);
        let d = s.dilate(0.5).unwrap();
        assert!((d.moment(4) - s.moment(4) / 16.0).abs() < 1e-12);
        assert!(s.dilate(0.0).is_err());
    }

    #[test]
    fn validation_rejects_asymmetry_and_bad_mass() {
        assert!(SymmetricMeasure::new(vec![(1.0, 1.0)], None).is_err());
        assert!(SymmetricMeasure::new(vec![(-1.0, 0.4), (1.0, 0.4)], None).is_err());
        assert!(SymmetricMeasure::normalized(vec![(-1.0, 0.4), (1.0, 0.4)], None).is_err());
        assert!(LevyMeasure::new(vec![(-1.0, 0.4), (1.0, 0.4)], None).is_ok());
        assert!(NonnegativeMeasure::new(vec![(-1.0, 1.0)], None).is_err());
    }

    #[test]
    fn json_round_trip_and_symmetry_on_load() {
        let s = semicircle(11);
        let text = s.to_json();
        assert_eq!(SymmetricMeasure::from_json(&text).unwrap(), s);
        let bad = r#"{"atoms":[[1.0,1.0]]}"#;
        assert!(SymmetricMeasure::from_json(bad).is_err());
        let ok = r#"{"atoms":[[0.0,1.0]]}"#;
        assert_eq!(SymmetricMeasure::from_json(ok).unwrap(), SymmetricMeasure::dirac_zero());
    }

    #[test]
    fn even_transform_matches_cauchy() {
        let s = semicircle(801);
        let z = Complex64::new(-0.1, 0.03);
        let (g, dg) = s.even_transform(z);
        let zeta = 1.0 / z.sqrt();
        let (gc, _) = s.cauchy_with_derivative(zeta);
        assert!((g - zeta * gc).norm() < 1e-13);
        let h = 1e-6;
        let fd = (s.even_transform(z + h).0 - s.even_transform(z - h).0) / (2.0 * h);
        assert!((dg - fd).norm() < 1e-7);
    }

    #[test]
    fn levy_sum_keeps_jumps() {
        let a = LevyMeasure::new(vec![], Some(PiecewiseLinear::new(vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap())).unwrap();
        let b = LevyMeasure::dirac_zero(0.5).unwrap();
        let c = a.add(&a).unwrap().add(&b).unwrap();
        assert!((c.total_mass() - 4.5).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn dilation_moment_law(c in 0.1f64..5.0, x in 0.1f64..3.0, k in 1u32..6) {
            let mu = SymmetricMeasure::normalized(
                vec![(-x, 0.25), (x, 0.25)],
                Some(PiecewiseLinear::new(vec![-1.0, 0.0, 1.0], vec![0.0, 0.5, 0.0]).unwrap()),
            ).unwrap();
            let lhs = mu.dilate(c).unwrap().moment(2 * k);
            let rhs = c.powi(2 * k as i32) * mu.moment(2 * k);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
        }
    }
}
