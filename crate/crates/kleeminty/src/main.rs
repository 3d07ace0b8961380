//! Command-line front end: `run`, `report`, `rank` and `validate`.
//!
//! Exit codes: 0 on success, 1 on validation failure (bad configuration,
//! inconsistent records, failed certification), 2 on I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use kleeminty::error::Error;
use kleeminty::oracle::{certify_instance, ContainmentCheck, MAX_SWEEP_DIMENSION};
use kleeminty::problem::{ProblemInstance, DEFAULT_EPSILON, DEFAULT_ROTATION_ANGLE};
use kleeminty::report::{emit_ranking, emit_reports};
use kleeminty::solvers::AlgorithmSpec;
use kleeminty::suite::{
    run_suite, validate_directory, SuiteConfig, BENCHMARK_DIMENSIONS, CONVENTIONAL_RUNS,
    DEFAULT_BASE_SEED,
};

#[derive(Parser)]
#[command(
    name = "kleeminty",
    version,
    about = "Benchmark harness for the rotated Klee-Minty problem family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark campaign and write one JSON record per run.
    Run(RunArgs),
    /// Compute indicator tables and ECDF data files from a records directory.
    Report(ReportArgs),
    /// Compute the three-factor consensus ranking from a records directory.
    Rank(ReportArgs),
    /// Certify problem instances, or cross-check a records directory.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = BENCHMARK_DIMENSIONS)]
    dims: Vec<usize>,
    /// Subdiagonal constraint coefficient (0 < epsilon <= 1/3).
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Rotation angle in radians (admissible interval [3*pi/2, 2*pi]).
    #[arg(long, default_value_t = DEFAULT_ROTATION_ANGLE)]
    angle: f64,
    /// Permit run counts below 15 and angles outside the admissible interval.
    #[arg(long)]
    override_conventions: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Independent runs per (algorithm, dimension) batch.
    #[arg(long, default_value_t = CONVENTIONAL_RUNS)]
    runs: usize,
    /// Base seed; run i of every batch uses seed + i.
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    seed: u64,
    /// Algorithm, repeatable: name[=key:value,...]. Names: random_search (rs),
    /// differential_evolution (de), evolution_strategy (es). Default: all three.
    #[arg(long = "algo", value_name = "SPEC")]
    algos: Vec<String>,
    /// Output directory for records and the manifest.
    #[arg(long, default_value = "records")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Records directory produced by `run`.
    records: PathBuf,
    /// Output directory; defaults to `<records>/reports`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Cross-check this records directory instead of certifying instances.
    #[arg(long, value_name = "DIR")]
    records: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Report(args) => report(args),
        Command::Rank(args) => rank(args),
        Command::Validate(args) => validate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io { .. } | Error::Json { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn suite_config(args: &RunArgs) -> Result<SuiteConfig, Error> {
    let algorithms = if args.algos.is_empty() {
        SuiteConfig::default().algorithms
    } else {
        args.algos
            .iter()
            .map(|a| AlgorithmSpec::parse(a))
            .collect::<Result<_, _>>()?
    };
    Ok(SuiteConfig {
        dimensions: args.problem.dims.clone(),
        runs: args.runs,
        base_seed: args.seed,
        algorithms,
        epsilon: args.problem.epsilon,
        rotation_angle: args.problem.angle,
        override_conventions: args.problem.override_conventions,
        ..SuiteConfig::default()
    })
}

fn run(args: RunArgs) -> Result<ExitCode, Error> {
    let config = suite_config(&args)?;
    let manifest = run_suite(&config, &args.out)?;
    println!(
        "wrote {} records and the manifest to {}",
        manifest.records.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn report(args: ReportArgs) -> Result<ExitCode, Error> {
    let out = args.out.unwrap_or_else(|| args.records.join("reports"));
    let summary = emit_reports(&args.records, &out)?;
    for skipped in &summary.skipped {
        eprintln!("skipped {}: {}", skipped.file, skipped.reason);
    }
    for note in &summary.notes {
        eprintln!("incomplete batch: {note}");
    }
    println!(
        "wrote {} report files to {}",
        summary.files.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn rank(args: ReportArgs) -> Result<ExitCode, Error> {
    let out = args.out.unwrap_or_else(|| args.records.join("reports"));
    let (table, path) = emit_ranking(&args.records, &out)?;
    for dim in &table.per_dimension {
        println!("N = {}", dim.dimension);
        for (position, entry) in dim.entries.iter().enumerate() {
            println!(
                "  {}. {:<24} consensus {:.3}  (quality {}, distance {}, ecdf {})",
                position + 1,
                entry.algorithm,
                entry.consensus,
                entry.quality_rank,
                entry.distance_rank,
                entry.ecdf_rank,
            );
        }
    }
    println!("overall");
    for entry in &table.overall {
        println!(
            "  {}. {:<24} mean consensus {:.3}  mean evaluations {:.1}",
            entry.rank, entry.algorithm, entry.mean_consensus, entry.mean_evaluations
        );
    }
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode, Error> {
    if let Some(dir) = args.records {
        let report = validate_directory(&dir)?;
        for problem in &report.problems {
            eprintln!("{problem}");
        }
        return if report.is_clean() {
            println!(
                "{} records validated, no problems found",
                report.records_checked
            );
            Ok(ExitCode::SUCCESS)
        } else {
            println!(
                "{} records validated, {} problems found",
                report.records_checked,
                report.problems.len()
            );
            Ok(ExitCode::from(1))
        };
    }

    let mut all_passed = true;
    for &n in &args.problem.dims {
        let mut config = kleeminty::ProblemConfig::new(n)
            .with_epsilon(args.problem.epsilon)
            .with_rotation_angle(args.problem.angle);
        config.allow_any_angle = args.problem.override_conventions;
        let instance = ProblemInstance::new(config)?;
        let cert = certify_instance(&instance)?;
        let sweep = match &cert.vertex_sweep {
            Some(s) => format!(
                "sweep min {} (gap {:.3e}, origin {}),",
                s.min_objective, s.optimum_gap, s.argmin_is_origin
            ),
            None => format!("sweep skipped (N > {MAX_SWEEP_DIMENSION}),"),
        };
        let containment = match cert.containment {
            ContainmentCheck::ExhaustiveSweep => "containment exhaustive".to_string(),
            ContainmentCheck::NormBound => "containment by norm bound".to_string(),
            ContainmentCheck::Violated { outside } => {
                format!("containment VIOLATED ({outside} vertices outside)")
            }
        };
        let verdict = if cert.passed() { "PASS" } else { "FAIL" };
        all_passed &= cert.passed();
        println!(
            "N={n}: optimum {}, orthogonality {:.3e}, |det-1| {:.3e}, nu(optimum) {}, {} {} -> {verdict}",
            instance.optimal_objective(),
            cert.orthogonality_residual,
            cert.determinant_deviation,
            cert.violation_at_optimum,
            sweep,
            containment,
        );
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
