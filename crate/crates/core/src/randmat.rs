//! Seeded Monte Carlo with rectangular random matrices.
//!
//! Every trial draws from its own ChaCha stream (`seed`, stream = trial
//! index), so a report depends only on the configuration and never on the
//! number of worker threads.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::SymmetricMeasure;

/// Environment variable read for the worker count when the config leaves it open.
pub const THREADS_ENV: &str = "RECTFREE_THREADS";

const MAX_MOMENT_ORDER: usize = 12;

/// A `d × d'` complex matrix with `d ≤ d'`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix(DMatrix<Complex64>);

impl RectMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        check_shape(m.nrows(), m.ncols())?;
        Ok(Self(m))
    }

    pub fn zeros(d: usize, d_prime: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(d, d_prime))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.0.shape() != other.0.shape() {
            return Err(Error::InvalidArgument("matrix shapes differ".into()));
        }
        Ok(Self(&self.0 + &other.0))
    }

    /// `U M V` for square `U` (`d × d`) and `V` (`d' × d'`).
    pub fn rotate(&self, u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<Self> {
        if u.shape() != (self.rows(), self.rows()) || v.shape() != (self.cols(), self.cols()) {
            return Err(Error::InvalidArgument("rotation shapes do not match the matrix".into()));
        }
        Ok(Self(u * &self.0 * v))
    }

    /// `‖M‖_F²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }
}

fn check_shape(d: usize, d_prime: usize) -> Result<()> {
    if d == 0 || d > d_prime {
        return Err(Error::InvalidArgument(format!("need 1 ≤ d ≤ d', got d = {d}, d' = {d_prime}")));
    }
    Ok(())
}

/// Standard complex Gaussian with `E|z|² = 2 var` by Box-Muller: real and
/// imaginary parts are independent `N(0, var)`.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * var * u1.ln()).sqrt();
    Complex64::from_polar(r, 2.0 * PI * u2)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, var: f64, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, var))
}

/// Haar-distributed `d × d` unitary: QR of a Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`. Without that correction `Q` is not Haar.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let qr = ginibre(d, d, 0.5, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Uniform unit vector in `ℂ^d`.
fn sphere_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> nalgebra::DVector<Complex64> {
    loop {
        let v = nalgebra::DVector::from_fn(d, |_, _| complex_gaussian(rng, 0.5));
        let n = v.norm();
        if n > 0.0 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

/// Inverse-CDF sampler for a [`SymmetricMeasure`].
#[derive(Debug, Clone)]
pub struct MeasureSampler {
    atoms: Vec<(f64, f64)>,
    atom_mass: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    /// Cumulative density mass at each grid node.
    cdf: Vec<f64>,
}

impl MeasureSampler {
    pub fn new(nu: &SymmetricMeasure) -> Self {
        let atoms = nu.atoms().to_vec();
        let atom_mass = atoms.iter().map(|a| a.1).sum();
        let (grid, values) = match nu.density() {
            Some(d) => (d.grid().to_vec(), d.values().to_vec()),
            None => (Vec::new(), Vec::new()),
        };
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        for i in 0..grid.len() {
            if i > 0 {
                acc += 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
            }
            cdf.push(acc);
        }
        Self { atoms, atom_mass, grid, values, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.atom_mass + self.cdf.last().copied().unwrap_or(0.0);
        let mut u = rng.gen::<f64>() * total;
        if u < self.atom_mass || self.grid.is_empty() {
            for &(x, m) in &self.atoms {
                if u < m {
                    return x;
                }
                u -= m;
            }
            return self.atoms.last().map_or(0.0, |a| a.0);
        }
        u -= self.atom_mass;
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.grid.len() - 1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let h = x1 - x0;
        let target = u - self.cdf[i - 1];
        // solve v0 t + (v1 - v0) t²/(2h) = target for t in [0, h]
        let slope = (v1 - v0) / h;
        let t = if slope.abs() < 1e-14 * (v0 + v1).max(1e-300) / h {
            target / v0.max(1e-300)
        } else {
            let disc = (v0 * v0 + 2.0 * slope * target).max(0.0);
            2.0 * target / (v0 + disc.sqrt())
        };
        x0 + t.clamp(0.0, h)
    }
}

/// `U D V` with `D` the `d × d'` diagonal matrix of i.i.d. `ν` draws and
/// `U`, `V` independent Haar unitaries.
pub fn sample_biinvariant<R: Rng + ?Sized>(
    nu: &MeasureSampler,
    d: usize,
    d_prime: usize,
    rng: &mut R,
) -> Result<RectMatrix> {
    check_shape(d, d_prime)?;
    let u = haar_unitary(d, rng)?;
    let v = haar_unitary(d_prime, rng)?;
    let mut diag = DMatrix::zeros(d, d_prime);
    for i in 0..d {
        diag[(i, i)] = Complex64::new(nu.sample(rng), 0.0);
    }
    Ok(RectMatrix(u * diag * v))
}

/// I.i.d. complex Gaussian entries, real and imaginary parts `N(0, 1/(2d'))`.
pub fn sample_gaussian_rect<R: Rng + ?Sized>(d: usize, d_prime: usize, rng: &mut R) -> Result<RectMatrix> {
    check_shape(d, d_prime)?;
    Ok(RectMatrix(ginibre(d, d_prime, 0.5 / d_prime as f64, rng)))
}

/// `Σ_{k ≤ d''} u_k v_k*` with `u_k`, `v_k` uniform on the unit spheres of
/// `ℂ^d` and `ℂ^{d'}`. `d''` is `count` when given, otherwise Poisson(`cd`).
pub fn sample_rank_one_poisson<R: Rng + ?Sized>(
    c: f64,
    d: usize,
    d_prime: usize,
    count: Option<usize>,
    rng: &mut R,
) -> Result<RectMatrix> {
    check_shape(d, d_prime)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {c}")));
    }
    let n = match count {
        Some(n) => n,
        None => {
            let poisson = Poisson::new(c * d as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            poisson.sample(rng) as usize
        }
    };
    let mut m = DMatrix::zeros(d, d_prime);
    for _ in 0..n {
        let u = sphere_vector(d, rng);
        let v = sphere_vector(d_prime, rng);
        m += u * v.adjoint();
    }
    Ok(RectMatrix(m))
}

/// Stopping rule of the cyclic Jacobi solver: stop once the off-diagonal
/// Frobenius norm is below `tolerance · ‖A‖_F`, fail after `max_sweeps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiConfig {
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_sweeps: 60 }
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi, sorted ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(a, &JacobiConfig::default())
}

pub fn hermitian_eigenvalues_with(a: &DMatrix<Complex64>, jc: &JacobiConfig) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let mut a = a.clone();
    let scale = a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    let off = |a: &DMatrix<Complex64>| {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > jc.tolerance * scale {
        if sweeps == jc.max_sweeps {
            return Err(Error::NonConvergence(format!("Jacobi did not converge in {} sweeps", jc.max_sweeps)));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // conjugating by diag(1, .., e^{-iφ} at q, ..) makes a_pq real
                let phase = apq / r;
                for k in 0..n {
                    a[(k, q)] *= phase.conj();
                }
                for k in 0..n {
                    a[(q, k)] *= phase;
                }
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Singular values of `M`, the square roots of the eigenvalues of `MM*`,
/// sorted ascending.
pub fn singular_values(m: &RectMatrix) -> Result<Vec<f64>> {
    let mm = &m.0 * m.0.adjoint();
    Ok(hermitian_eigenvalues(&mm)?.into_iter().map(|e| e.max(0.0).sqrt()).collect())
}

/// `(m_2, m_4, …, m_kmax)` of the symmetrized singular law,
/// `m_{2j} = (1/d) Σ s_i^{2j}`.
pub fn empirical_symmetrized_moments(m: &RectMatrix, kmax: usize) -> Result<Vec<f64>> {
    let s = singular_values(m)?;
    moments_of_singular_values(&s, kmax)
}

fn moments_of_singular_values(s: &[f64], kmax: usize) -> Result<Vec<f64>> {
    if kmax == 0 || kmax % 2 == 1 || kmax > MAX_MOMENT_ORDER {
        return Err(Error::InvalidArgument(format!("kmax must be even and at most {MAX_MOMENT_ORDER}, got {kmax}")));
    }
    let d = s.len() as f64;
    Ok((1..=kmax / 2).map(|j| s.iter().map(|x| x.powi(2 * j as i32)).sum::<f64>() / d).collect())
}

/// Matrix model sampled in each trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Gaussian,
    /// Sum of `summands` independent bi-unitarily invariant draws with diagonal law `nu`.
    BiInvariant { nu: SymmetricMeasure, summands: usize },
    /// Rank-one sum with a Poisson(`cd`) number of terms.
    CompoundPoisson { c: f64 },
    /// Rank-one sum with `⌊cd⌋` terms.
    RankOnePoisson { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub d: usize,
    pub d_prime: usize,
    pub lambda_target: f64,
    pub trials: usize,
    pub seed: u64,
    pub kind: EnsembleKind,
    /// Worker threads; `None` reads [`THREADS_ENV`] and otherwise lets rayon
    /// decide. Not serialized, since reports must not depend on it.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

/// Largest allowed gap between `d/d'` and `lambda_target`.
pub const LAMBDA_TOLERANCE: f64 = 0.05;

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        check_shape(self.d, self.d_prime)?;
        if self.trials < 2 {
            return Err(Error::InvalidArgument("at least two trials are needed for standard errors".into()));
        }
        let ratio = self.d as f64 / self.d_prime as f64;
        if !((ratio - self.lambda_target).abs() <= LAMBDA_TOLERANCE) {
            return Err(Error::InvalidArgument(format!(
                "d/d' = {ratio} is not within {LAMBDA_TOLERANCE} of lambda = {}",
                self.lambda_target
            )));
        }
        match &self.kind {
            EnsembleKind::BiInvariant { summands, .. } if *summands == 0 => {
                Err(Error::InvalidArgument("at least one summand is needed".into()))
            }
            EnsembleKind::CompoundPoisson { c } | EnsembleKind::RankOnePoisson { c } if !(*c > 0.0) => {
                Err(Error::InvalidArgument(format!("rate must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }

    fn thread_count(&self) -> Option<usize> {
        self.threads.or_else(|| std::env::var(THREADS_ENV).ok()?.parse().ok()).filter(|&n| n > 0)
    }
}

/// Draws one matrix of the configured ensemble from `rng`.
fn sample_trial(cfg: &EnsembleConfig, sampler: Option<&MeasureSampler>, rng: &mut ChaCha8Rng) -> Result<RectMatrix> {
    let (d, dp) = (cfg.d, cfg.d_prime);
    match &cfg.kind {
        EnsembleKind::Gaussian => sample_gaussian_rect(d, dp, rng),
        EnsembleKind::BiInvariant { summands, .. } => {
            let nu = sampler.expect("sampler built for bi-invariant kinds");
            let mut m = sample_biinvariant(nu, d, dp, rng)?;
            for _ in 1..*summands {
                m = m.add(&sample_biinvariant(nu, d, dp, rng)?)?;
            }
            Ok(m)
        }
        EnsembleKind::CompoundPoisson { c } => sample_rank_one_poisson(*c, d, dp, None, rng),
        EnsembleKind::RankOnePoisson { c } => {
            sample_rank_one_poisson(*c, d, dp, Some((c * d as f64).floor() as usize), rng)
        }
    }
}

/// The RNG of trial `index`: one ChaCha stream per trial.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentStat {
    pub order: usize,
    pub mean: f64,
    pub stderr: f64,
    pub target: f64,
    pub zscore: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: EnsembleConfig,
    pub moments: Vec<MomentStat>,
    /// Singular values of every trial, in trial order.
    #[serde(skip)]
    pub singular_values: Vec<Vec<f64>>,
}

impl McReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with header `trial,index,singular value`.
    pub fn singular_values_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("trial,index,singular value\n");
        for (t, s) in self.singular_values.iter().enumerate() {
            for (i, x) in s.iter().enumerate() {
                let _ = writeln!(out, "{t},{i},{x}");
            }
        }
        out
    }
}

/// Runs `config.trials` independent trials and compares the mean empirical
/// even moments up to `kmax` with those of `target`.
pub fn mc_compare(config: &EnsembleConfig, target: &SymmetricMeasure, kmax: usize) -> Result<McReport> {
    config.validate()?;
    moments_of_singular_values(&[0.0], kmax)?;
    let sampler = match &config.kind {
        EnsembleKind::BiInvariant { nu, .. } => Some(MeasureSampler::new(nu)),
        _ => None,
    };
    let run = || -> Result<Vec<Vec<f64>>> {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(config.seed, t);
                singular_values(&sample_trial(config, sampler.as_ref(), &mut rng)?)
            })
            .collect()
    };
    let singular = match config.thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    // aggregate in trial order so the sums do not depend on scheduling
    let per_trial: Vec<Vec<f64>> =
        singular.iter().map(|s| moments_of_singular_values(s, kmax)).collect::<Result<_>>()?;
    let n = per_trial.len() as f64;
    let moments = (0..kmax / 2)
        .map(|j| {
            let mean = per_trial.iter().map(|m| m[j]).sum::<f64>() / n;
            let var = per_trial.iter().map(|m| (m[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let stderr = (var / n).sqrt();
            let order = 2 * (j + 1);
            let target = target.moment(order as u32);
            let zscore = if stderr > 0.0 { (mean - target) / stderr } else if mean == target { 0.0 } else { f64::INFINITY };
            MomentStat { order, mean, stderr, target, zscore }
        })
        .collect();
    Ok(McReport { config: config.clone(), moments, singular_values: singular })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nc::classical_moments_from_cumulants;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rng(stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(7);
        r.set_stream(stream);
        r
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn haar_is_unitary() {
        let mut r = rng(0);
        let u1 = haar_unitary(1, &mut r).unwrap();
        assert_abs_diff_eq!(u1[(0, 0)].norm(), 1.0, epsilon = 1e-14);
        let u = haar_unitary(30, &mut r).unwrap();
        let id = DMatrix::<Complex64>::identity(30, 30);
        assert!(max_abs(&(&u * u.adjoint() - id)) < 1e-12);
        assert!(haar_unitary(0, &mut r).is_err());
    }

    #[test]
    fn haar_first_entry_has_mean_square_one_over_d() {
        let mut r = rng(1);
        let n = 2000;
        let mean = (0..n).map(|_| haar_unitary(10, &mut r).unwrap()[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 0.1).abs() < 0.01, "{mean}");
    }

    #[test]
    fn haar_is_left_invariant_in_distribution() {
        // the phase of U_11 is uniform, also after multiplying by a fixed unitary
        let mut r = rng(2);
        let w = haar_unitary(4, &mut r).unwrap();
        let n = 4000;
        let (mut c1, mut c2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for _ in 0..n {
            let u = haar_unitary(4, &mut r).unwrap();
            let z1 = u[(0, 0)];
            let z2 = (&w * &u)[(0, 0)];
            c1 += z1 / z1.norm();
            c2 += z2 / z2.norm();
        }
        // |mean of e^{iθ}| has standard deviation about 1/√n
        assert!(c1.norm() / (n as f64) < 4.0 / (n as f64).sqrt());
        assert!(c2.norm() / (n as f64) < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn biinvariant_samples() {
        let mut r = rng(3);
        let zero = MeasureSampler::new(&SymmetricMeasure::dirac_zero());
        let m = sample_biinvariant(&zero, 3, 5, &mut r).unwrap();
        assert_eq!(max_abs(m.matrix()), 0.0);
        let bern = MeasureSampler::new(&SymmetricMeasure::bernoulli());
        let m = sample_biinvariant(&bern, 6, 9, &mut r).unwrap();
        for s in singular_values(&m).unwrap() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
        }
        let semi = crate::infdiv::rect_gaussian(1.0).unwrap();
        let sampler = MeasureSampler::new(&semi);
        let xs: Vec<f64> = (0..500)
            .map(|_| {
                let m = sample_biinvariant(&sampler, 20, 40, &mut r).unwrap();
                m.frobenius_sq() / 20.0
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / 500.0;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 499.0).sqrt();
        assert!((mean - semi.moment(2)).abs() < 3.0 * sd / 500f64.sqrt(), "{mean}");
    }

    #[test]
    fn sampler_matches_measure_moments() {
        let mut r = rng(4);
        let mu = crate::infdiv::rect_gaussian(0.5).unwrap();
        let s = MeasureSampler::new(&mu);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut r)).collect();
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.01 && (m4 - 1.5).abs() < 0.03, "{m2} {m4}");
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
    }

    #[test]
    fn gaussian_samples() {
        let mut r = rng(5);
        let n = 500;
        let (d, dp) = (20, 40);
        let mut traces = Vec::with_capacity(n);
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let m = sample_gaussian_rect(d, dp, &mut r).unwrap();
            traces.push(m.frobenius_sq() / d as f64);
            entries.push(m.matrix()[(0, 0)].re);
        }
        let stats = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
            (mean, sd / (v.len() as f64).sqrt())
        };
        let (mt, se) = stats(&traces);
        assert!((mt - 1.0).abs() < 3.0 * se, "{mt} ± {se}");
        let (me, se) = stats(&entries);
        assert!(me.abs() < 3.0 * se);
        assert!(sample_gaussian_rect(5, 4, &mut r).is_err());
    }

    #[test]
    fn rank_one_samples() {
        let mut r = rng(6);
        let zero = sample_rank_one_poisson(1.0, 4, 6, Some(0), &mut r).unwrap();
        assert_eq!(max_abs(zero.matrix()), 0.0);
        let one = sample_rank_one_poisson(1.0, 4, 6, Some(1), &mut r).unwrap();
        let s = singular_values(&one).unwrap();
        assert_abs_diff_eq!(s[3], 1.0, epsilon = 1e-12);
        assert!(s[..3].iter().all(|&x| x < 1e-6));
    }

    #[test]
    fn poisson_count_has_mean_cd() {
        // cross terms of Σ u_k v_k* have mean zero, so E‖M‖_F² = E[d''] = cd
        let mut r = rng(7);
        let n = 1000;
        let xs: Vec<f64> =
            (0..n).map(|_| sample_rank_one_poisson(1.0, 50, 100, None, &mut r).unwrap().frobenius_sq()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((mean - 50.0).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} ± {sd}");
    }

    #[test]
    fn jacobi_sweep_cap_is_reported() {
        let mut r = rng(10);
        let g = ginibre(6, 6, 0.5, &mut r);
        let h = &g + g.adjoint();
        let err = hermitian_eigenvalues_with(&h, &JacobiConfig { tolerance: 1e-12, max_sweeps: 1 }).unwrap_err();
        assert!(err.is_numerical());
        let loose = hermitian_eigenvalues_with(&h, &JacobiConfig { tolerance: 1e-3, max_sweeps: 60 }).unwrap();
        let tight = hermitian_eigenvalues(&h).unwrap();
        for (a, b) in loose.iter().zip(&tight) {
            assert!((a - b).abs() < 1e-2);
        }
    }

    #[test]
    fn singular_value_examples() {
        let mut m = DMatrix::zeros(2, 4);
        m[(0, 0)] = Complex64::new(3.0, 0.0);
        m[(1, 1)] = Complex64::new(-2.0, 0.0);
        let s = singular_values(&RectMatrix::new(m).unwrap()).unwrap();
        assert_abs_diff_eq!(s[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_values_are_unitarily_invariant() {
        let mut r = rng(8);
        let m = sample_gaussian_rect(7, 11, &mut r).unwrap();
        let u = haar_unitary(7, &mut r).unwrap();
        let v = haar_unitary(11, &mut r).unwrap();
        let s = singular_values(&m).unwrap();
        let t = singular_values(&m.rotate(&u, &v).unwrap()).unwrap();
        for (a, b) in s.iter().zip(&t) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        let sum_sq: f64 = s.iter().map(|x| x * x).sum();
        assert!((sum_sq - m.frobenius_sq()).abs() < 1e-9 * m.frobenius_sq());
    }

    #[test]
    fn moments_match_matrix_powers() {
        let mut r = rng(9);
        let m = sample_gaussian_rect(5, 8, &mut r).unwrap();
        let mom = empirical_symmetrized_moments(&m, 6).unwrap();
        let mm = m.matrix() * m.matrix().adjoint();
        let mut p = DMatrix::<Complex64>::identity(5, 5);
        for (j, want) in mom.iter().enumerate() {
            p = &p * &mm;
            let tr = p.trace().re / 5.0;
            assert!((tr - want).abs() < 1e-9 * want.abs().max(1.0), "j = {j}");
        }
        let zero = RectMatrix::zeros(3, 4).unwrap();
        assert_eq!(empirical_symmetrized_moments(&zero, 4).unwrap(), vec![0.0, 0.0]);
        let mut id = DMatrix::zeros(2, 3);
        id[(0, 0)] = Complex64::new(1.0, 0.0);
        id[(1, 1)] = Complex64::new(1.0, 0.0);
        let id = RectMatrix::new(id).unwrap();
        assert_eq!(empirical_symmetrized_moments(&id, 4).unwrap(), vec![1.0, 1.0]);
        assert!(empirical_symmetrized_moments(&id, 3).is_err());
        assert!(empirical_symmetrized_moments(&id, 14).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn jacobi_preserves_trace_and_frobenius(seed in 0u64..1000, n in 1usize..9) {
            let mut r = rng(seed);
            let g = ginibre(n, n, 0.5, &mut r);
            let h = &g + g.adjoint();
            let eig = hermitian_eigenvalues(&h).unwrap();
            let tr = h.trace().re;
            let fro: f64 = h.iter().map(Complex64::norm_sqr).sum();
            prop_assert!((eig.iter().sum::<f64>() - tr).abs() < 1e-10 * (1.0 + fro.sqrt()));
            prop_assert!((eig.iter().map(|e| e * e).sum::<f64>() - fro).abs() < 1e-10 * (1.0 + fro));
            prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    fn config(kind: EnsembleKind, trials: usize) -> EnsembleConfig {
        EnsembleConfig { d: 60, d_prime: 120, lambda_target: 0.5, trials, seed: 11, kind, threads: None }
    }

    #[test]
    fn mc_examples() {
        let target = crate::infdiv::rect_gaussian(0.5).unwrap();
        let rep = mc_compare(&config(EnsembleKind::Gaussian, 20), &target, 4).unwrap();
        assert!((rep.moments[0].mean - 1.0).abs() < 0.05);
        let bern = SymmetricMeasure::bernoulli();
        let kind = EnsembleKind::BiInvariant { nu: bern.clone(), summands: 1 };
        let rep = mc_compare(&EnsembleConfig { d: 6, d_prime: 12, ..config(kind, 3) }, &bern, 2).unwrap();
        assert_abs_diff_eq!(rep.moments[0].mean, 1.0, epsilon = 1e-12);
        assert!(rep.moments[0].stderr < 1e-12);
        let json = rep.to_json();
        assert!(json.contains("\"zscore\""));
        assert!(rep.singular_values_csv().starts_with("trial,index,singular value\n"));
    }

    #[test]
    fn mc_is_deterministic_across_thread_counts() {
        let target = crate::infdiv::rect_gaussian(0.5).unwrap();
        let base = EnsembleConfig { d: 12, d_prime: 24, ..config(EnsembleKind::CompoundPoisson { c: 1.0 }, 8) };
        let one = mc_compare(&EnsembleConfig { threads: Some(1), ..base.clone() }, &target, 4).unwrap();
        let many = mc_compare(&EnsembleConfig { threads: Some(8), ..base }, &target, 4).unwrap();
        assert_eq!(one.moments, many.moments);
        assert_eq!(one.singular_values, many.singular_values);
    }

    #[test]
    fn config_validation() {
        let mut c = config(EnsembleKind::Gaussian, 10);
        assert!(c.validate().is_ok());
        c.lambda_target = 0.9;
        assert!(c.validate().is_err());
        let c = EnsembleConfig { trials: 1, ..config(EnsembleKind::Gaussian, 10) };
        assert!(c.validate().is_err());
        let c = config(EnsembleKind::RankOnePoisson { c: -1.0 }, 10);
        assert!(c.validate().is_err());
    }

    #[test]
    fn sum_of_two_biinvariant_draws_doubles_m2() {
        let nu = crate::infdiv::rect_gaussian(0.5).unwrap();
        let kind = EnsembleKind::BiInvariant { nu: nu.clone(), summands: 2 };
        let rep = mc_compare(&config(kind, 40), &nu, 2).unwrap();
        let m = &rep.moments[0];
        assert!((m.mean - 2.0 * nu.moment(2)).abs() < 3.0 * m.stderr + 1e-3, "{m:?}");
    }

    #[test]
    fn compound_poisson_roots_have_cumulants_c_over_n() {
        // the n-th root of the symmetric Poisson law has classical cumulants c/n
        // in every even order, so n m_{2k} → c
        let c = 1.5;
        let mut errors = Vec::new();
        for n in [10.0, 100.0] {
            let cum: Vec<f64> = (1..=6).map(|k| if k % 2 == 0 { c / n } else { 0.0 }).collect();
            let m = classical_moments_from_cumulants(&cum).unwrap();
            let err = [1, 3, 5].iter().map(|&i| (n * m[i] - c).abs()).fold(0.0, f64::max);
            errors.push(err * n);
        }
        // O(1/n): n · error stays bounded
        assert!(errors[1] < 1.5 * errors[0] + 1e-9, "{errors:?}");
    }
}
