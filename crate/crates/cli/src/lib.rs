//! The `thetalab` command line: one dispatcher over theta evaluation, identity
//! suites, secant fits, Hirota residuals, effectivization, solution grids,
//! period matrices and the Sasaki test.

mod commands;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Once;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thetalab::siegel::TruncationPolicy;

pub use commands::DISPATCH;
pub use report::{Check, RunReport, Thresholds};

/// Environment variable capping the size of the worker pool.
pub const THREADS_ENV: &str = "THETALAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable input; exit code 2.
    Usage(String),
    /// A library error; exit code 1.
    Numeric(thetalab::Error),
}

impl From<thetalab::Error> for CliError {
    fn from(e: thetalab::Error) -> Self {
        Self::Numeric(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numeric(e) => write!(f, "{e:?}: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "thetalab", version, about = "Riemann theta functions, their identities and finite-gap solutions")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice; required by the stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file overriding the default thresholds.
    #[arg(long, global = true)]
    pub thresholds: Option<PathBuf>,
    /// Absolute truncation tolerance of theta series.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub eps: f64,
    /// Cap on the lattice box half-width.
    #[arg(long, global = true, default_value_t = 60)]
    pub max_radius: u32,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate θ[a, b](z, Ω) with optional derivatives and Kummer data.
    ThetaEval(ThetaEvalArgs),
    /// Run an identity suite over random instances.
    IdentitySuite(IdentitySuiteArgs),
    /// Fit tri- or quadrisecant coefficients.
    SecantFit(SecantFitArgs),
    /// Residuals of Hirota bilinear equations.
    Hirota(HirotaArgs),
    /// Solve the effectivization equations for a period matrix.
    Effectivize(EffectivizeArgs),
    /// Build a solution field and sample it.
    BuildSolution(SolutionArgs),
    /// PDE residuals of a solution over a grid, as CSV.
    ResidualGrid(ResidualGridArgs),
    /// Normalized period matrix of a hyperelliptic curve or Prym blocks.
    PeriodMatrix(PeriodMatrixArgs),
    /// Sasaki irreducibility test (informational).
    Sasaki(SasakiArgs),
}

#[derive(Args, Debug)]
pub struct ThetaEvalArgs {
    #[arg(long)]
    pub omega: String,
    /// Argument z; zero when omitted.
    #[arg(long)]
    pub z: Option<String>,
    /// Characteristic `a,b` (genus one) or `[a…],[b…]`.
    #[arg(long = "char")]
    pub characteristic: Option<String>,
    /// `direction:order`; repeat for mixed derivatives.
    #[arg(long)]
    pub deriv: Vec<String>,
    /// Also report the Kummer vector at 2z.
    #[arg(long)]
    pub kummer: bool,
    /// Also report the θ̂ table with derivatives up to this order.
    #[arg(long)]
    pub hat_order: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Binary, dual binary and ternary addition theorems.
    Addition,
    /// Modular ratio constancy under generators of Sp(2g, Z).
    Modular,
    /// Frobenius normal forms of random integer skew forms.
    Symplectic,
    /// Ramified and unramified Prym decompositions.
    Prym,
    /// Genus-one trisecants with random-shift negative controls.
    Secant,
    /// Sine-Gordon identity at the three half-periods.
    Sg,
}

#[derive(Args, Debug)]
pub struct IdentitySuiteArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1)]
    pub genus: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SecantKindArg {
    Trisecant,
    Quadrisecant,
}

#[derive(Args, Debug)]
pub struct SecantFitArgs {
    #[arg(long, value_enum, default_value_t = SecantKindArg::Trisecant)]
    pub kind: SecantKindArg,
    /// Period matrix; random when omitted.
    #[arg(long)]
    pub omega: Option<String>,
    /// Fit this system instead of random quadruples.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub genus: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 24)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct HirotaArgs {
    /// Hierarchy name (kp, bkp1, bkp2, dkp1, dkp2, ll) or a polynomial file.
    #[arg(long)]
    pub poly: String,
    /// Tau specification for a named hierarchy.
    #[arg(long)]
    pub tau: Option<String>,
    /// Evaluation points, a list of complex vectors.
    #[arg(long)]
    pub points: Option<String>,
    /// With a polynomial file: the pair f, g as exponential sums.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// With a polynomial file: theta data `{omega, directions, z1, z2}`.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long, default_value = "0")]
    pub lambda: String,
    #[arg(long, default_value = "0")]
    pub mu: String,
    #[arg(long, default_value = "0")]
    pub constant: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EffectivizeKind {
    Kdv,
    Kp,
    Vn,
    VnAnti,
}

#[derive(Args, Debug)]
pub struct EffectivizeArgs {
    #[arg(long, value_enum)]
    pub kind: EffectivizeKind,
    #[arg(long)]
    pub omega: String,
    /// Wave vectors fixing U (and V for VN).
    #[arg(long)]
    pub fixed: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    Kdv,
    Kp,
    Sg,
    Vn,
}

#[derive(Args, Debug)]
pub struct SolutionArgs {
    #[arg(long, value_enum)]
    pub kind: FieldKind,
    #[arg(long)]
    pub omega: String,
    /// Wave vectors; solved from the seed when omitted.
    #[arg(long)]
    pub wave: Option<String>,
    /// Half-period δ of a sine-Gordon field when no wave file is given.
    #[arg(long)]
    pub delta: Option<String>,
    /// Sample point `x,y,t`; repeatable.
    #[arg(long)]
    pub at: Vec<String>,
}

#[derive(Args, Debug)]
pub struct ResidualGridArgs {
    #[command(flatten)]
    pub solution: SolutionArgs,
    /// `x=start:stop:count,…` or a JSON list of points.
    #[arg(long)]
    pub grid: String,
    /// Write the CSV here; stdout otherwise.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PeriodMatrixArgs {
    /// Branch points, a list or `{branch_points, infinity}`; "inf" marks ∞.
    #[arg(long, conflicts_with = "prym")]
    pub branch_points: Option<String>,
    /// Expected genus.
    #[arg(long)]
    pub genus: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub quad_order: usize,
    /// Assemble a period matrix from Prym block data instead.
    #[arg(long)]
    pub prym: Option<String>,
}

#[derive(Args, Debug)]
pub struct SasakiArgs {
    #[arg(long)]
    pub omega: String,
    /// Relative singular-value threshold for the rank.
    #[arg(long, default_value_t = 1e-9)]
    pub rank_threshold: f64,
    /// Also evaluate the genus-two theta-constant relations.
    #[arg(long)]
    pub relations: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ThetaEval(_) => "theta-eval",
            Self::IdentitySuite(_) => "identity-suite",
            Self::SecantFit(_) => "secant-fit",
            Self::Hirota(_) => "hirota",
            Self::Effectivize(_) => "effectivize",
            Self::BuildSolution(_) => "build-solution",
            Self::ResidualGrid(_) => "residual-grid",
            Self::PeriodMatrix(_) => "period-matrix",
            Self::Sasaki(_) => "sasaki",
        }
    }
}

/// Everything a subcommand hands back to the dispatcher.
pub(crate) struct Outcome {
    pub operations: Vec<&'static str>,
    pub checks: Vec<Check>,
    pub result: Value,
    /// Extra output that goes to stdout in place of the report (CSV).
    pub stdout: Option<String>,
}

impl Outcome {
    pub fn new(operations: Vec<&'static str>, checks: Vec<Check>, result: Value) -> Self {
        Self { operations, checks, result, stdout: None }
    }
}

pub(crate) struct Context {
    pub seed: Option<u64>,
    pub policy: TruncationPolicy,
    pub thresholds: Thresholds,
}

impl Context {
    pub fn seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage(format!("{command} is stochastic and needs --seed")))
    }
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<RunReport>,
}

fn init_threads() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        let n = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0);
        if let Some(n) = n {
            // Fails only if a pool already exists, which then stays in charge.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return Invocation { code, stdout, stderr, report: None };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    execute(cli, echo)
}

fn usage_failure(msg: String) -> Invocation {
    Invocation { code: 2, stdout: String::new(), stderr: format!("{msg}\n"), report: None }
}

fn execute(cli: Cli, echo: Vec<String>) -> Invocation {
    let started = Instant::now();
    let policy = match TruncationPolicy::new(cli.common.eps, cli.common.max_radius) {
        Ok(p) => p,
        Err(e) => return usage_failure(format!("usage error: {e}")),
    };
    let thresholds = match Thresholds::load(cli.common.thresholds.as_deref()) {
        Ok(t) => t,
        Err(e) => return usage_failure(e.to_string()),
    };
    let ctx = Context { seed: cli.common.seed, policy, thresholds };
    let name = cli.command.name();
    let outcome = commands::dispatch(&cli.command, &ctx);

    let mut report = RunReport {
        command: name.to_string(),
        args: echo,
        seed: ctx.seed,
        policy: ctx.policy,
        operations: Vec::new(),
        checks: Vec::new(),
        result: Value::Null,
        error: None,
        pass: false,
        wall_time_s: 0.0,
    };
    let mut stderr = String::new();
    let mut extra = None;
    let code = match outcome {
        Ok(o) => {
            report.pass = o.checks.iter().all(|c| c.pass);
            report.operations = o.operations;
            report.checks = o.checks;
            report.result = o.result;
            extra = o.stdout;
            for c in report.checks.iter().filter(|c| !c.pass) {
                stderr.push_str(&format!("check failed: {} = {:e} ({} {:e})\n", c.name, c.value, c.relation, c.threshold));
            }
            if report.pass { 0 } else { 1 }
        }
        Err(CliError::Usage(m)) => return usage_failure(format!("usage error: {m}")),
        Err(CliError::Numeric(e)) => {
            let msg = format!("{e:?}: {e}");
            stderr.push_str(&format!("error: {msg}\n"));
            report.error = Some(msg);
            1
        }
    };
    report.wall_time_s = started.elapsed().as_secs_f64();

    let json = report.to_json();
    let mut stdout = String::new();
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, format!("{json}\n")) {
                return usage_failure(format!("usage error: {}: {e}", path.display()));
            }
        }
        None if extra.is_none() => stdout = format!("{json}\n"),
        None => {}
    }
    if let Some(extra) = extra {
        stdout.push_str(&extra);
    }
    Invocation { code, stdout, stderr, report: Some(report) }
}
