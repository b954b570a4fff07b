mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Check;
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(varmech::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<varmech::Error> for CliError {
    fn from(e: varmech::Error) -> Self {
        use varmech::Error as E;
        match e {
            E::Domain(_) | E::Dimension { .. } | E::UnknownSystem(_) | E::Unsupported(_) => Self::Config(e.to_string()),
            other => Self::Solver(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Solver(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "varmech", version, about = "Discrete variational mechanics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a DEL or DLA simulation and write the trajectory as CSV.
    Simulate(Opts),
    /// Evaluate a family of conditions on sample points and write a JSON report.
    Check {
        #[arg(value_enum)]
        which: CheckArg,
        #[command(flatten)]
        opts: Opts,
    },
    /// Fit the order of the modified-Lagrangian error for the backward-error example.
    OrderStudy(Opts),
    /// Track conserved quantities and recursion-operator traces along an orbit.
    Invariants(Opts),
    /// List the built-in systems.
    List,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CheckArg {
    DhcExplicit,
    DhcImplicit,
    Isotropy,
    Chc,
    Ihc,
    TwoForm,
}

impl From<CheckArg> for Check {
    fn from(c: CheckArg) -> Self {
        match c {
            CheckArg::DhcExplicit => Check::DhcExplicit,
            CheckArg::DhcImplicit => Check::DhcImplicit,
            CheckArg::Isotropy => Check::Isotropy,
            CheckArg::Chc => Check::Chc,
            CheckArg::Ihc => Check::Ihc,
            CheckArg::TwoForm => Check::TwoForm,
        }
    }
}

/// Flags mirror the config keys; values use the config-file syntax.
#[derive(Args, Default)]
struct Opts {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    /// midpoint, trapezoidal, euler-a, euler-b or alpha:<a>.
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    q0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Offset into the deterministic sample sequence.
    #[arg(long)]
    seed: Option<String>,
    /// Fiber map name, e.g. Fd1.
    #[arg(long = "F", alias = "fiber")]
    fiber: Option<String>,
    #[arg(long)]
    form: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    h_min: Option<String>,
    #[arg(long)]
    h_max: Option<String>,
    #[arg(long)]
    h_count: Option<String>,
    /// solution or fixed.
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("system", &self.system),
            ("rule", &self.rule),
            ("h", &self.h),
            ("b", &self.b),
            ("steps", &self.steps),
            ("q0", &self.q0),
            ("q1", &self.q1),
            ("v0", &self.v0),
            ("tol", &self.tol),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("fiber", &self.fiber),
            ("form", &self.form),
            ("out", &self.out),
            ("h_min", &self.h_min),
            ("h_max", &self.h_max),
            ("h_count", &self.h_count),
            ("sampling", &self.sampling),
            ("kmax", &self.kmax),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(o) => commands::simulate(&o.resolve()?),
        Command::Check { which, opts } => commands::check(which.into(), &opts.resolve()?),
        Command::OrderStudy(o) => commands::order_study(&o.resolve()?),
        Command::Invariants(o) => commands::invariants(&o.resolve()?),
        Command::List => commands::list(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("varmech: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
