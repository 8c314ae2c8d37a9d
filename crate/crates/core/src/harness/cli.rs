//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{
    emit_results, load_experiments, load_schools, run_experiment, simulate_school,
    write_events_jsonl, write_ode_csv, write_trajectory_csv, HarnessError, OutputFormat,
    DEFAULT_SEED,
};
use crate::oracle::{enumerate_exact, seird_integrate, CompartmentVector, OdeMode};
use crate::planner::{run_round, Policy};
use crate::scenario::{parse_scenario, validate, EpiParams, ValidatedScenario};

#[derive(Debug, Parser)]
#[command(
    name = "epigrid",
    version,
    about = "Grid-world epidemic simulation and intervention planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play episodes of one scenario.
    Simulate(SimulateArgs),
    /// Run an experiment file and print the results table.
    Experiment(ExperimentArgs),
    /// Run a school benchmark file.
    Benchmark(BenchmarkArgs),
    /// Reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Parse and validate a scenario file.
    Validate { scenario: PathBuf },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    scenario: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "planner")]
    policy: Policy,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Directory for per-round trajectory files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trajectory file format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Also write the event log and planner decisions.
    #[arg(long)]
    events: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    spec: PathBuf,
    /// Overrides the seed of every experiment in the file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Forward-Euler integration of the compartment equations.
    Ode(OdeArgs),
    /// Exact outcome distribution of a tiny scenario under noop.
    Enumerate {
        scenario: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct OdeArgs {
    #[arg(long, default_value_t = 99.0)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    e: f64,
    #[arg(long, default_value_t = 1.0)]
    i: f64,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    d: f64,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value = "conserving")]
    mode: OdeMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Experiment(args) => experiment(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Oracle(OracleCommand::Ode(args)) => ode(args),
        Command::Oracle(OracleCommand::Enumerate {
            scenario,
            horizon,
            out,
        }) => {
            let validated = load_scenario(&scenario)?;
            let dist = enumerate_exact(&validated, horizon)?;
            let json = serde_json::to_string_pretty(&dist)
                .map_err(|e| HarnessError::Serialize(e.to_string()))?;
            with_output(out.as_deref(), |w| {
                writeln!(w, "{json}").map_err(|e| HarnessError::io("output", e))
            })
        }
        Command::Validate { scenario } => {
            let validated = load_scenario(&scenario)?;
            for w in validated.warnings() {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: ok ({} persons, {} walkable of {} tiles)",
                scenario.display(),
                validated.population(),
                validated.walkable(),
                validated.grid().total_tiles()
            );
            Ok(())
        }
    }
}

fn load_scenario(path: &Path) -> Result<ValidatedScenario, HarnessError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(&shown, e))?;
    let config = parse_scenario(&text).map_err(|source| HarnessError::Parse {
        path: shown.clone(),
        source,
    })?;
    validate(config).map_err(|issues| HarnessError::Invalid {
        context: shown,
        issues,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path.display().to_string(), e))
}

fn with_output(
    out: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            body(&mut w)?;
            w.flush()
                .map_err(|e| HarnessError::io(path.display().to_string(), e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), HarnessError> {
    let base = load_scenario(&args.scenario)?;
    let mut settings = base.planner().clone();
    if let Some(r) = args.rounds {
        settings.rounds = r;
    }
    if let Some(h) = args.horizon {
        settings.horizon = h;
    }
    let rounds = settings.rounds;
    let validated = base
        .with_planner(settings)
        .map_err(|issues| HarnessError::Invalid {
            context: args.scenario.display().to_string(),
            issues,
        })?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir.display().to_string(), e))?;
    }
    for round in 0..rounds {
        let seed = args.seed.wrapping_add(round as u64);
        let ep = run_round(&validated, args.policy, round, seed, args.events);
        let last = ep.trajectory.last();
        println!(
            "round {round} seed {seed}: S={} E={} I={} R={} D={} infections={} deaths={} reward={}",
            last.s,
            last.e,
            last.i,
            last.r,
            last.d,
            last.cum_infections,
            last.cum_deaths,
            ep.ledger.accumulated
        );
        let Some(dir) = &args.out else { continue };
        match args.format {
            OutputFormat::Csv => {
                let mut w = create(&dir.join(format!("round_{round}.csv")))?;
                write_trajectory_csv(&ep.trajectory, &mut w)?;
                w.flush().map_err(|e| HarnessError::io("output", e))?;
            }
            OutputFormat::Json => {
                let mut w = create(&dir.join(format!("round_{round}.json")))?;
                serde_json::to_writer_pretty(&mut w, &ep.trajectory.rows)
                    .map_err(|e| HarnessError::Serialize(e.to_string()))?;
                w.flush().map_err(|e| HarnessError::io("output", e))?;
            }
        }
        if args.events {
            let mut w = create(&dir.join(format!("round_{round}_events.jsonl")))?;
            write_events_jsonl(&ep.events, &mut w)?;
            w.flush().map_err(|e| HarnessError::io("output", e))?;
            let mut w = create(&dir.join(format!("round_{round}_planner.jsonl")))?;
            write_events_jsonl(&ep.decisions, &mut w)?;
            w.flush().map_err(|e| HarnessError::io("output", e))?;
        }
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), HarnessError> {
    let mut rows = Vec::new();
    for mut spec in load_experiments(&args.spec)? {
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        if let Some(runs) = args.runs {
            spec.runs = runs;
        }
        rows.extend(run_experiment(&spec)?);
    }
    with_output(args.out.as_deref(), |w| emit_results(&rows, args.format, w))
}

fn benchmark(args: BenchmarkArgs) -> Result<(), HarnessError> {
    let mut rows = Vec::new();
    for spec in load_schools(&args.spec)? {
        rows.extend(simulate_school(&spec, args.seed)?);
    }
    with_output(args.out.as_deref(), |w| emit_results(&rows, args.format, w))
}

fn ode(args: OdeArgs) -> Result<(), HarnessError> {
    let defaults = EpiParams::default();
    let params = EpiParams {
        beta: args.beta.unwrap_or(defaults.beta),
        sigma: args.sigma.unwrap_or(defaults.sigma),
        gamma: args.gamma.unwrap_or(defaults.gamma),
        mu: args.mu.unwrap_or(defaults.mu),
        ..defaults
    };
    let v0 = CompartmentVector::new(args.s, args.e, args.i, args.r, args.d);
    let states = seird_integrate(&v0, &params, args.dt, args.steps, args.mode)?;
    with_output(args.out.as_deref(), |w| write_ode_csv(&states, args.dt, w))
}
