use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fragvmp::exec::Exec;
use fragvmp::models::SplineKind;
use fragvmp_cli::fit::summary;
use fragvmp_cli::synth::{synth_csv, SynthKind};
use fragvmp_cli::{cmd_fit, cmd_validate, CliError, Fault, FitRequest, LinkArg, ModelKind, EXIT_ERROR, EXIT_NOT_CONVERGED};

#[derive(Parser)]
#[command(name = "fragvmp", version, about = "Variational message passing fits of semiparametric regression models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplineArg {
    TruncatedLinear,
    OsullivanLike,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to CSV data and write the JSON result.
    Fit(FitArgs),
    /// Run the bundled invariant checks.
    Validate {
        /// Corrupt one library output to confirm the matching check fails.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Write a seeded synthetic CSV data set.
    Synth {
        #[arg(long, value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Destination file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    response: String,
    /// Predictor column; repeat or comma-separate for linreg.
    #[arg(long, required = true, value_delimiter = ',')]
    predictor: Vec<String>,
    /// Subject column (groupcurves).
    #[arg(long)]
    group: Option<String>,
    /// 0/1 population column, 1 for group B (groupcurves).
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value_t = 25)]
    knots: usize,
    /// Per-subject spline knots (groupcurves).
    #[arg(long, default_value_t = 0)]
    group_knots: usize,
    #[arg(long, value_enum)]
    link: Option<LinkArg>,
    #[arg(long, value_enum, default_value = "truncated-linear")]
    spline: SplineArg,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1e10)]
    sigma_beta_sq: f64,
    #[arg(long, default_value_t = 1e5)]
    a_hyper: f64,
    /// Recorded in the output; fits are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result file; the JSON goes to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disable data-parallel kernels.
    #[arg(long)]
    sequential: bool,
}

impl From<FitArgs> for FitRequest {
    fn from(a: FitArgs) -> Self {
        FitRequest {
            model: a.model,
            data: a.data,
            response: a.response,
            predictors: a.predictor,
            group: a.group,
            label: a.label,
            knots: a.knots,
            group_knots: a.group_knots,
            link: a.link,
            spline: match a.spline {
                SplineArg::TruncatedLinear => SplineKind::TruncatedLinear,
                SplineArg::OsullivanLike => SplineKind::OsullivanLike,
            },
            iters: a.iters,
            tol: a.tol,
            sigma_beta_sq: a.sigma_beta_sq,
            a_hyper: a.a_hyper,
            seed: a.seed,
            exec: if a.sequential { Exec::Sequential } else { Exec::default() },
        }
    }
}

fn fit(args: FitArgs) -> Result<u8, CliError> {
    let out = args.out.clone();
    let result = cmd_fit(&FitRequest::from(args))?;
    let digest = summary(&result);
    match &out {
        Some(path) => {
            result.save(path)?;
            println!("{digest}wrote {}", path.display());
        }
        None => {
            print!("{}", result.to_json()?);
            eprint!("{digest}");
        }
    }
    Ok(if result.convergence.converged { 0 } else { EXIT_NOT_CONVERGED as u8 })
}

fn synth(kind: SynthKind, n: usize, seed: u64, out: Option<PathBuf>) -> Result<u8, CliError> {
    let csv = synth_csv(kind, n, seed);
    match out {
        Some(path) => std::fs::write(&path, csv).map_err(|source| CliError::Write { path, source })?,
        None => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let outcome = match Cli::parse().command {
        Command::Fit(args) => fit(args),
        Command::Validate { inject_fault } => {
            let report = cmd_validate(inject_fault);
            print!("{}", report.table());
            Ok(if report.all_passed() { 0 } else { EXIT_ERROR as u8 })
        }
        Command::Synth { kind, n, seed, out } => synth(kind, n, seed, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
