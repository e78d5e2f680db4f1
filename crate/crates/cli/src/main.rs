use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsl_cli::{constants_table, parse_scenario, run, Kind, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "dsl",
    about = "Double-solution soliton and pilot-wave laboratory",
    disable_version_flag = true
)]
struct Cli {
    /// Print the version and the physical constants table.
    #[arg(long, global = true)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the scenario `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Soliton PDE under a pilot wave.
    Evolve(RunArgs),
    /// Gaussian-ansatz coefficient ODE.
    Gaussian(RunArgs),
    /// Guidance trajectories for given or sampled starting points.
    Trajectories(RunArgs),
    /// Ensemble relaxation H function.
    Relax(RunArgs),
    /// Gravitational phase tables and two-spin density matrices.
    Phases(RunArgs),
    /// Sphere self-gravity potentials and single-device dephasing.
    Selfgrav(RunArgs),
    /// Resolve a scenario and print it with defaults filled.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn config_failure(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("dsl: {msg}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        print!("{}", constants_table());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        return config_failure("no subcommand given; see `dsl --help`");
    };
    let (kind, args) = match command {
        Command::Check { config } => {
            return match parse_scenario(&config) {
                Ok(s) => {
                    println!("{}", serde_json::to_string_pretty(&s).expect("scenario serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => config_failure(e),
            };
        }
        Command::Evolve(a) => (Kind::Evolve, a),
        Command::Gaussian(a) => (Kind::Gaussian, a),
        Command::Trajectories(a) => (Kind::Trajectories, a),
        Command::Relax(a) => (Kind::Relax, a),
        Command::Phases(a) => (Kind::Phases, a),
        Command::Selfgrav(a) => (Kind::Selfgrav, a),
    };
    let mut scenario = match parse_scenario(&args.config) {
        Ok(s) => s,
        Err(e) => return config_failure(e),
    };
    if scenario.kind() != kind {
        return config_failure(format!(
            "subcommand `{kind}` does not match scenario kind `{}`",
            scenario.kind()
        ));
    }
    if let Some(seed) = args.seed {
        scenario.set_seed(seed);
    }
    let out = args
        .out
        .or_else(|| scenario.output_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dsl-out"));
    scenario.set_output_dir(out.display().to_string());
    match run(&scenario, &out) {
        Ok(report) => {
            println!(
                "{}: {:?}, summary in {}",
                kind,
                report.status,
                out.join(dsl_cli::SUMMARY_FILE).display()
            );
            for e in &report.errors {
                eprintln!("dsl: {e}");
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("dsl: {e}");
            ExitCode::FAILURE
        }
    }
}
