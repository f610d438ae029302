use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or values (exit code 2).
    Input(String),
    /// A computation failed or a verification did not pass (exit code 1).
    Failure(String),
}

impl From<hms_core::Error> for CliError {
    fn from(e: hms_core::Error) -> Self {
        use hms_core::Error::*;
        match e {
            InvalidField(_) | InvalidInput(_) | Parse(_) | NotTotallyPositive(_) | RepeatedCusps | DegenerateDiangle | SizeMismatch(..)
            | DegreeMismatch(..) | Divergence(_) | NoDecay(_) | EndpointMismatch | Boundary => CliError::Input(e.to_string()),
            NonConvergence { .. } | UnitSearchExhausted(_) => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "hms", version, about = "Iterated integrals on membranes, Hilbert modular symbols and multiple Dedekind zeta values")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Squarefree d > 1 of the field Q(√d).
    #[arg(long, global = true)]
    d: Option<i64>,
    /// Gauss–Legendre nodes per panel.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Height bound for cone sums.
    #[arg(long, global = true)]
    height_bound: Option<f64>,
    /// Unit window |k| ≤ K for L-values and Z.
    #[arg(long, global = true)]
    window: Option<u32>,
    /// Truncation depth of generating series.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Integral basis, fundamental unit and totally positive unit generator of Q(√d).
    Field(commands::FieldArgs),
    /// Shuffles sh(i, j), or the shuffle of two permutations.
    Shuffle(commands::ShuffleArgs),
    /// Generating series of iterated integrals of 1-forms along a path.
    Chen(commands::ChenArgs),
    /// Iterated integral (and optionally the generating series) of 2-forms on a membrane.
    Membrane(commands::MembraneArgs),
    /// Pairing of a triangle or diangle symbol with 2-forms.
    Symbol(commands::SymbolArgs),
    /// Unit diangle D_u: quadrature next to the closed form.
    Diangle(commands::DiangleArgs),
    /// Truncated cone sums ζ(C; k_1, …, k_m) and Z(m, n) with tail bounds.
    Zeta(commands::ZetaArgs),
    /// Double L-values of unit-orbit forms in series and integral form.
    Lvalue(commands::LvalueArgs),
    /// Runs a verification suite and prints its residual table.
    Verify(commands::VerifyArgs),
}

fn run_config(g: &Global) -> Result<RunConfig, CliError> {
    let mut c = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! over {
        ($($f:ident),*) => { $(if let Some(v) = g.$f { c.$f = v; })* };
    }
    over!(d, nodes, tolerance, height_bound, window, depth, seed, format);
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run_config(&cli.global).and_then(|cfg| {
        let (out, passed) = match &cli.command {
            Command::Field(a) => (commands::field(a, &cfg)?, true),
            Command::Shuffle(a) => (commands::shuffle(a)?, true),
            Command::Chen(a) => (commands::chen(a, &cfg)?, true),
            Command::Membrane(a) => (commands::membrane(a, &cfg)?, true),
            Command::Symbol(a) => (commands::symbol(a, &cfg)?, true),
            Command::Diangle(a) => (commands::diangle(a, &cfg)?, true),
            Command::Zeta(a) => (commands::zeta(a, &cfg)?, true),
            Command::Lvalue(a) => (commands::lvalue(a, &cfg)?, true),
            Command::Verify(a) => commands::verify(a, &cfg)?,
        };
        print!("{}", out.render(cfg.format)?);
        Ok(passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
