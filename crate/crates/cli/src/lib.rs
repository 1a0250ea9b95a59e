//! The `rectfree` command line.
//!
//! Arguments are parsed and validated into a [`RunConfig`] (including
//! loading every input file) before any computation starts. Exit codes: 0 on
//! success, 1 on invalid input, 2 on numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rectfree::convolution::{rect_convolve, rect_convolve_power};
use rectfree::infdiv::{self, NamedLaw};
use rectfree::nc;
use rectfree::randmat::{mc_compare, EnsembleConfig, EnsembleKind};
use rectfree::{ContourConfig, Error, LevyMeasure, SymmetricMeasure};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rectfree", version, about = "Rectangular free convolution of symmetric laws")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Rectangular free convolution of two laws (or a power of one).
    Convolve(ConvolveArgs),
    /// Dump a closed-form law as CSV.
    Law(LawArgs),
    /// Image of a Lévy measure under the rectangular Bercovici-Pata bijection.
    Infdiv(InfdivArgs),
    /// Noncrossing partition tables.
    Nc(NcArgs),
    /// Monte Carlo comparison of a matrix ensemble with a target law.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct ConvolveArgs {
    #[arg(long)]
    mu: PathBuf,
    /// Second law; omit together with `--power` to convolve `mu` with itself.
    #[arg(long)]
    nu: Option<PathBuf>,
    #[arg(long)]
    power: Option<u32>,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LawKind {
    RectGaussian,
    RectCauchy,
    RectPoisson,
    Mp,
}

#[derive(Debug, Args)]
struct LawArgs {
    kind: LawKind,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// `t` for rect-cauchy, `c` for rect-poisson and mp.
    #[arg(long, default_value_t = 1.0)]
    param: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InfdivArgs {
    #[arg(long)]
    levy: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NcOp {
    Partitions,
    Pairings,
    MpMoments,
}

#[derive(Debug, Args)]
struct NcArgs {
    #[arg(long)]
    op: NcOp,
    #[arg(long)]
    n: usize,
    /// Evaluate the Marchenko-Pastur moments at this parameter instead of
    /// listing polynomial coefficients.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum McKind {
    Gaussian,
    Biinv,
    /// `⌊cd⌋` rank-one terms.
    Rank1,
    /// Poisson(`cd`) rank-one terms.
    CompoundPoisson,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    kind: McKind,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    dprime: usize,
    /// Defaults to `d/d'`.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Diagonal law of the bi-invariant ensemble.
    #[arg(long)]
    nu: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    summands: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Target law; defaults to the limit law of the ensemble.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every trial's singular values as CSV.
    #[arg(long)]
    singular_values: Option<PathBuf>,
}

/// A fully validated invocation.
#[derive(Debug)]
pub enum RunConfig {
    Convolve { mu: SymmetricMeasure, nu: Operand, lambda: f64, out: Option<PathBuf> },
    Law { law: NamedLaw, out: Option<PathBuf> },
    Infdiv { levy: LevyMeasure, lambda: f64, out: Option<PathBuf> },
    Nc { op: NcTable, n: usize, out: Option<PathBuf> },
    Mc { ensemble: EnsembleConfig, target: Option<SymmetricMeasure>, kmax: usize, out: Option<PathBuf>, singular_values: Option<PathBuf> },
}

#[derive(Debug)]
pub enum Operand {
    Law(SymmetricMeasure),
    Power(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NcTable {
    Partitions,
    Pairings,
    MpCoefficients,
    MpMoments(f64),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_lambda(lambda: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(lambda)
    } else {
        Err(usage(format!("--lambda must lie in [0, 1], got {lambda}")))
    }
}

fn load_measure(path: &PathBuf) -> CliResult<SymmetricMeasure> {
    SymmetricMeasure::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl RunConfig {
    fn from_cli(cli: Cli) -> CliResult<Self> {
        Ok(match cli.command {
            Cmd::Convolve(a) => {
                let lambda = check_lambda(a.lambda)?;
                let nu = match (&a.nu, a.power) {
                    (Some(p), None) => Operand::Law(load_measure(p)?),
                    (None, Some(k)) if k >= 1 => Operand::Power(k),
                    (None, Some(_)) => return Err(usage("--power must be at least 1")),
                    _ => return Err(usage("give exactly one of --nu and --power")),
                };
                RunConfig::Convolve { mu: load_measure(&a.mu)?, nu, lambda, out: a.out }
            }
            Cmd::Law(a) => {
                let lambda = a.lambda;
                let law = match a.kind {
                    LawKind::RectGaussian => NamedLaw::RectGaussian { lambda },
                    LawKind::RectCauchy => NamedLaw::RectCauchy { lambda, t: a.param },
                    LawKind::RectPoisson => NamedLaw::RectPoisson { lambda, c: a.param },
                    LawKind::Mp => NamedLaw::MarchenkoPastur { c: a.param },
                };
                law.validate()?;
                RunConfig::Law { law, out: a.out }
            }
            Cmd::Infdiv(a) => {
                let lambda = check_lambda(a.lambda)?;
                let levy = LevyMeasure::load(&a.levy).map_err(|e| usage(format!("{}: {e}", a.levy.display())))?;
                RunConfig::Infdiv { levy, lambda, out: a.out }
            }
            Cmd::Nc(a) => {
                let op = match (a.op, a.a) {
                    (NcOp::Partitions, None) => NcTable::Partitions,
                    (NcOp::Pairings, None) => NcTable::Pairings,
                    (NcOp::MpMoments, None) => NcTable::MpCoefficients,
                    (NcOp::MpMoments, Some(x)) if x.is_finite() => NcTable::MpMoments(x),
                    _ => return Err(usage("--a is a finite number and only applies to mp-moments")),
                };
                RunConfig::Nc { op, n: a.n, out: a.out }
            }
            Cmd::Mc(a) => {
                let lambda = check_lambda(a.lambda.unwrap_or(a.d as f64 / a.dprime.max(1) as f64))?;
                let need_c = || a.c.ok_or_else(|| usage("--c is required for rank-one ensembles"));
                let kind = match a.kind {
                    McKind::Gaussian => EnsembleKind::Gaussian,
                    McKind::Biinv => {
                        let nu = a.nu.as_ref().ok_or_else(|| usage("--nu is required for --kind biinv"))?;
                        EnsembleKind::BiInvariant { nu: load_measure(nu)?, summands: a.summands }
                    }
                    McKind::Rank1 => EnsembleKind::RankOnePoisson { c: need_c()? },
                    McKind::CompoundPoisson => EnsembleKind::CompoundPoisson { c: need_c()? },
                };
                let ensemble = EnsembleConfig {
                    d: a.d,
                    d_prime: a.dprime,
                    lambda_target: lambda,
                    trials: a.trials,
                    seed: a.seed,
                    kind,
                    threads: a.threads,
                };
                ensemble.validate()?;
                if a.kmax == 0 || a.kmax % 2 == 1 || a.kmax > 12 {
                    return Err(usage(format!("--kmax must be even and at most 12, got {}", a.kmax)));
                }
                let target = a.target.as_ref().map(load_measure).transpose()?;
                RunConfig::Mc { ensemble, target, kmax: a.kmax, out: a.out, singular_values: a.singular_values }
            }
        })
    }

    fn execute(self) -> CliResult<()> {
        let cfg = ContourConfig::default();
        match self {
            RunConfig::Convolve { mu, nu, lambda, out } => {
                let law = match nu {
                    Operand::Law(nu) => rect_convolve(&mu, &nu, lambda, &cfg)?,
                    Operand::Power(k) => rect_convolve_power(&mu, lambda, k, &cfg)?,
                };
                emit(out.as_ref(), &law.to_json())
            }
            RunConfig::Law { law, out } => emit(out.as_ref(), &law_csv(law, &cfg)?),
            RunConfig::Infdiv { levy, lambda, out } => {
                emit(out.as_ref(), &infdiv::bercovici_pata(&levy, lambda, &cfg)?.to_json())
            }
            RunConfig::Nc { op, n, out } => emit(out.as_ref(), &nc_table(op, n)?),
            RunConfig::Mc { ensemble, target, kmax, out, singular_values } => {
                let target = match target {
                    Some(t) => t,
                    None => default_target(&ensemble, &cfg)?,
                };
                let report = mc_compare(&ensemble, &target, kmax)?;
                if let Some(path) = singular_values {
                    write_file(&path, &report.singular_values_csv())?;
                }
                emit(out.as_ref(), &report.to_json())
            }
        }
    }
}

/// The limit law of an ensemble as `d, d' → ∞` with `d/d' → λ`.
fn default_target(e: &EnsembleConfig, cfg: &ContourConfig) -> CliResult<SymmetricMeasure> {
    let lambda = e.lambda_target;
    Ok(match &e.kind {
        EnsembleKind::Gaussian => infdiv::rect_gaussian(lambda)?,
        EnsembleKind::BiInvariant { nu, summands } => rect_convolve_power(nu, lambda, *summands as u32, cfg)?,
        EnsembleKind::CompoundPoisson { c } | EnsembleKind::RankOnePoisson { c } => infdiv::rect_poisson(lambda, *c, cfg)?,
    })
}

/// `kind,x,value` rows: atoms first, then density nodes.
fn law_csv(law: NamedLaw, cfg: &ContourConfig) -> CliResult<String> {
    let mut out = String::from("kind,x,value\n");
    if let NamedLaw::MarchenkoPastur { c } = law {
        let mp = infdiv::marchenko_pastur(c)?;
        for (x, m) in mp.atoms() {
            let _ = writeln!(out, "atom,{x},{m}");
        }
        if let Some(d) = mp.root().density() {
            for &t in d.grid().iter().filter(|&&t| t > 0.0) {
                let x = t * t;
                let _ = writeln!(out, "density,{x},{}", mp.density_at(x));
            }
        }
        return Ok(out);
    }
    let mu = law.measure(cfg)?;
    for &(x, m) in mu.atoms() {
        let _ = writeln!(out, "atom,{x},{m}");
    }
    if let Some(d) = mu.density() {
        for (x, v) in d.grid().iter().zip(d.values()) {
            let _ = writeln!(out, "density,{x},{v}");
        }
    }
    Ok(out)
}

fn nc_table(op: NcTable, n: usize) -> CliResult<String> {
    Ok(match op {
        NcTable::Partitions => nc::partitions_csv(n, &nc::enumerate_nc(n)?),
        NcTable::Pairings => {
            let parts: Vec<_> = nc::enumerate_nc_pairings(n)?.iter().map(|p| p.as_partition().clone()).collect();
            nc::partitions_csv(n, &parts)
        }
        NcTable::MpCoefficients => {
            let mut out = String::from("order,power,count\n");
            for k in 1..=n {
                for (j, c) in nc::mp_moment_polynomial(k)?.iter().enumerate() {
                    let _ = writeln!(out, "{k},{j},{c}");
                }
            }
            out
        }
        NcTable::MpMoments(a) => {
            let mut out = String::from("order,moment\n");
            for k in 1..=n {
                let _ = writeln!(out, "{k},{}", nc::mp_moment(a, k)?);
            }
            out
        }
    })
}

fn write_file(path: &PathBuf, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match RunConfig::from_cli(cli).and_then(RunConfig::execute) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
