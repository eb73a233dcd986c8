mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use agler_core::agler::Flavor;
use agler_core::poly2::Var;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{read_config_file, Overrides, RunConfig, CONFIG_ENV};
use error::CliError;

#[derive(Parser)]
#[command(name = "agler", version, about = "Agler decompositions and compressed shifts on bidisk model spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Flags override the config file,
/// which overrides the built-in defaults.
#[derive(Args)]
struct Common {
    /// JSON config file (falls back to $AGLER_CONFIG).
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Torus grid size per variable (power of two, at least 64).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Truncation ladder, e.g. 4,6,8,10,12.
    #[arg(long, global = true, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long = "tol-rank", global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Max1min2,
    Min1max2,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarArg {
    #[value(name = "1")]
    Z1,
    #[value(name = "2")]
    Z2,
}

impl From<VarArg> for Var {
    fn from(v: VarArg) -> Var {
        match v {
            VarArg::Z1 => Var::Z1,
            VarArg::Z2 => Var::Z2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that |θ| = 1 on the torus grid.
    VerifyInner { spec: PathBuf },
    /// Extremal Agler pair as Gram matrices.
    AglerDecompose {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "max1min2")]
        flavor: FlavorArg,
        /// Use the SDP solver even when a closed form exists.
        #[arg(long)]
        solver: bool,
    },
    /// Numerical rank of [S*, S] along the truncation ladder.
    CommutatorRank {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "1")]
        var: VarArg,
    },
    /// Eigenvalues of the compressed shift and its self-commutator.
    Spectrum {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "1")]
        var: VarArg,
        /// Truncation degree in each variable.
        #[arg(short = 'd', long = "trunc", default_value_t = 8)]
        trunc: usize,
    },
    /// Reducing-pair test: product factorization, kernel witnesses, radial limits.
    ReducingTest { spec: PathBuf },
    /// Rank-law and reducing harnesses over a directory of specs (default: bundled corpus).
    CorpusCheck { corpus_dir: Option<PathBuf> },
    /// Write the bundled corpus as spec files.
    ExportCorpus { dir: PathBuf },
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let file = common.config.as_deref().map(read_config_file).transpose()?;
    let flags = Overrides {
        grid_n: common.grid,
        ladder: common.ladder.clone(),
        rank_tol: common.tol_rank,
        seed: common.seed,
        output_path: common.out.clone(),
    };
    RunConfig::resolve(file.as_ref(), &flags)
}

fn emit<S: Serialize>(value: &S, cfg: &RunConfig) -> Result<(), CliError> {
    let text = output::to_json_string(value)?;
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e.to_string())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli.common)?;
    match cli.command {
        Command::VerifyInner { spec } => {
            let (report, pass) = commands::verify_inner_cmd(&spec, &cfg)?;
            emit(&report, &cfg)?;
            if !pass {
                return Err(CliError::Failed(format!(
                    "deviation {} exceeds {:e}",
                    report.deviation.map_or("non-finite".into(), |d| format!("{d:e}")),
                    report.tol
                )));
            }
        }
        Command::AglerDecompose { spec, flavor, solver } => {
            let flavor = match flavor {
                FlavorArg::Max1min2 => Flavor::Max1Min2,
                FlavorArg::Min1max2 => Flavor::Min1Max2,
            };
            emit(&commands::agler_decompose_cmd(&spec, flavor, solver, &cfg)?, &cfg)?;
        }
        Command::CommutatorRank { spec, var } => {
            emit(&commands::commutator_rank_cmd(&spec, var.into(), &cfg)?, &cfg)?;
        }
        Command::Spectrum { spec, var, trunc } => {
            emit(&commands::spectrum_cmd(&spec, var.into(), trunc, &cfg)?, &cfg)?;
        }
        Command::ReducingTest { spec } => {
            emit(&commands::reducing_test_cmd(&spec, &cfg)?, &cfg)?;
        }
        Command::CorpusCheck { corpus_dir } => {
            let (report, pass) = commands::corpus_check_cmd(corpus_dir.as_deref(), &cfg)?;
            emit(&report, &cfg)?;
            if !pass {
                return Err(CliError::Failed(format!(
                    "{} of {} functions failed",
                    report.total - report.passed,
                    report.total
                )));
            }
        }
        Command::ExportCorpus { dir } => {
            let paths = commands::export_corpus(&dir)?;
            let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            emit(&names, &cfg)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = serde_json::json!({"error": "usage", "message": e.to_string(), "exit_code": 2});
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
