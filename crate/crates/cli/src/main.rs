mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "hpbp", version, about = "Functional calculus for matrix semigroup generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply a catalog symbol to the operator.
    Apply(CommonArgs),
    /// Run verification suites.
    Verify(CommonArgs),
    /// Apply the subordinated semigroup e^{t psi(A)}.
    Subordinate(CommonArgs),
    /// List the symbol catalog.
    Catalog,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// key = value config file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub operator: Option<PathBuf>,
    /// Defaults to every standard basis vector.
    #[arg(long)]
    pub vector: Option<PathBuf>,
    /// Catalog symbol, `name` or `name:param[:...]`.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated suite names.
    #[arg(long)]
    pub suites: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random operators per suite when no operator is given.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Dimension of random operators.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_panels: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 3 when the spectral oracle is unavailable.
    #[arg(long)]
    pub require_oracle: bool,
    /// Subordination route: direct, subordination or both.
    #[arg(long)]
    pub route: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Apply(a) => run::resolve(a).and_then(|c| run::cmd_apply(&c)),
        Command::Verify(a) => run::resolve(a).and_then(|c| run::cmd_verify(&c)),
        Command::Subordinate(a) => run::resolve(a).and_then(|c| run::cmd_subordinate(&c)),
        Command::Catalog => {
            print!("{}", hpbp::symbols::catalog_listing());
            Ok(run::Status::Ok)
        }
    };
    match outcome {
        Ok(s) => ExitCode::from(s.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code(&e))
        }
    }
}
