use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aoi::simulate::{self, Horizon, SimConfig};
use aoi::SystemConfig;
use aoi_cli::commands::{self, DistOptions, OptimizeMode};
use aoi_cli::format::{to_json, Table};
use aoi_cli::settings::{parse_list, ConfigFile};
use aoi_cli::CliError;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_PACKETS: u64 = 1_000_000;

/// Average Age of Information for randomly routed parallel FCFS queues.
#[derive(Debug, Parser)]
#[command(name = "aoi", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Service rates, comma separated.
    #[arg(long, global = true, value_parser = parse_list_arg)]
    mus: Option<List>,
    /// Routing probabilities, comma separated (default: uniform).
    #[arg(long, global = true, value_parser = parse_list_arg)]
    alphas: Option<List>,
    /// Total arrival rate.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Departures per simulation run.
    #[arg(long, global = true)]
    packets: Option<u64>,
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<String>,
}

/// Comma-separated reals as a single flag value.
#[derive(Debug, Clone)]
struct List(Vec<f64>);

fn parse_list_arg(s: &str) -> Result<List, String> {
    parse_list(s).map(List).map_err(|e| e.message)
}

impl Common {
    fn mus(&self) -> Option<Vec<f64>> {
        self.mus.as_ref().map(|l| l.0.clone())
    }

    fn alphas(&self) -> Option<Vec<f64>> {
        self.alphas.as_ref().map(|l| l.0.clone())
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact and approximate mean age of a routed system.
    Analyze,
    /// Discrete-event simulation of a routed system.
    Simulate {
        /// Simulated time; overrides --packets.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        warmup: Option<f64>,
        /// Write a per-departure CSV trace here.
        #[arg(long)]
        trace: Option<String>,
    },
    /// Optimal routing for given service rates.
    Optimize {
        /// approx | exact
        #[arg(long)]
        mode: Option<String>,
        /// Cap on the total arrival rate (exact mode).
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Symmetric two-server table: simulated vs approximate mean age.
    Table1,
    /// Asymmetric two-server table: exact vs approximate mean age.
    Table2,
    /// Minimum mean age of n unit-rate servers, n = 1..=n-max.
    Fig3 {
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Exact, gamma and simulated age densities of one queue.
    DistCompare {
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
    },
}

enum Output {
    Table(Table),
    Json(String),
}

fn system_from(common: &Common, file: &ConfigFile) -> Result<SystemConfig, CliError> {
    let mus = file
        .resolve_list("mus", common.mus())?
        .ok_or_else(|| CliError::invalid("--mus is required"))?;
    let lambda = file
        .resolve("lambda", common.lambda)?
        .ok_or_else(|| CliError::invalid("--lambda is required"))?;
    let alphas = file
        .resolve_list("alphas", common.alphas())?
        .unwrap_or_else(|| vec![1.0 / mus.len() as f64; mus.len()]);
    Ok(SystemConfig::new(lambda, alphas, mus)?)
}

fn render<T: serde::Serialize>(json: bool, report: &T, table: impl FnOnce(&T) -> Table) -> Output {
    if json {
        Output::Json(to_json(report))
    } else {
        Output::Table(table(report))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let json = common.json || file.resolve::<bool>("json", None)?.unwrap_or(false);
    let seed = file.resolve("seed", common.seed)?.unwrap_or(DEFAULT_SEED);
    let packets = file
        .resolve("packets", common.packets)?
        .unwrap_or(DEFAULT_PACKETS);

    let output = match &cli.command {
        Command::Analyze => {
            let report = commands::cmd_analyze(&system_from(common, &file)?)?;
            render(json, &report, commands::AnalyzeReport::table)
        }
        Command::Simulate {
            horizon,
            reps,
            warmup,
            trace,
        } => {
            // stability is checked by the simulator, which only flags it
            let mus = file
                .resolve_list("mus", common.mus())?
                .ok_or_else(|| CliError::invalid("--mus is required"))?;
            let lambda = file
                .resolve("lambda", common.lambda)?
                .ok_or_else(|| CliError::invalid("--lambda is required"))?;
            let alphas = file
                .resolve_list("alphas", common.alphas())?
                .unwrap_or_else(|| vec![1.0 / mus.len() as f64; mus.len()]);
            let system = SystemConfig::new_allow_unstable(lambda, alphas, mus)?;
            let horizon = match file.resolve("horizon", *horizon)? {
                Some(t) => Horizon::Time(t),
                None => Horizon::Departures(packets),
            };
            let mut cfg = SimConfig::new(system, horizon, seed);
            if let Some(w) = file.resolve("warmup", *warmup)? {
                cfg.warmup_fraction = w;
            }
            let trace_path = file.resolve("trace", trace.clone())?;
            cfg.record_trace = trace_path.is_some();
            let reps = file.resolve("reps", *reps)?;
            let (report, records) = commands::cmd_simulate(&cfg, reps)?;
            if let (Some(path), Some(records)) = (trace_path, records) {
                let f = std::fs::File::create(&path)
                    .map_err(|e| CliError::invalid(format!("cannot write {path}: {e}")))?;
                simulate::write_trace(&records, std::io::BufWriter::new(f))
                    .map_err(|e| CliError::invalid(format!("cannot write {path}: {e}")))?;
            }
            if report.unstable {
                eprintln!("warning: unstable server in configuration; results are transient");
            }
            render(json, &report, commands::SimulateReport::table)
        }
        Command::Optimize { mode, budget } => {
            let mus = file
                .resolve_list("mus", common.mus())?
                .ok_or_else(|| CliError::invalid("--mus is required"))?;
            let mode: OptimizeMode = file
                .resolve("mode", mode.clone())?
                .unwrap_or_else(|| "approx".into())
                .parse()?;
            let budget = file.resolve("budget", *budget)?;
            let report = commands::cmd_optimize(&mus, mode, budget)?;
            render(json, &report, commands::OptimizeReport::table)
        }
        Command::Table1 => {
            let rows = commands::cmd_table1(seed, packets)?;
            render(json, &rows, |r| commands::table1_table(r))
        }
        Command::Table2 => {
            let rows = commands::cmd_table2()?;
            render(json, &rows, |r| commands::table2_table(r))
        }
        Command::Fig3 { n_max } => {
            let n_max = file.resolve("n-max", *n_max)?.unwrap_or(7);
            let points = commands::cmd_fig3(n_max)?;
            render(json, &points, |p| commands::fig3_table(p))
        }
        Command::DistCompare {
            mu,
            samples,
            points,
            bins,
        } => {
            let lambda = file
                .resolve("lambda", common.lambda)?
                .ok_or_else(|| CliError::invalid("--lambda is required"))?;
            let mu = match file.resolve("mu", *mu)? {
                Some(m) => m,
                None => match file.resolve_list("mus", common.mus())?.as_deref() {
                    Some([m]) => *m,
                    _ => {
                        return Err(CliError::invalid(
                            "--mu (or a single --mus value) is required",
                        ))
                    }
                },
            };
            let defaults = DistOptions::default();
            let opts = DistOptions {
                seed,
                samples: file
                    .resolve("samples", *samples)?
                    .unwrap_or(defaults.samples),
                points: file.resolve("points", *points)?.unwrap_or(defaults.points),
                bins: file.resolve("bins", *bins)?.unwrap_or(defaults.bins),
            };
            let report = commands::cmd_dist_compare(lambda, mu, opts)?;
            render(json, &report, commands::DistCompare::table)
        }
    };

    let text = match output {
        Output::Table(t) => t.to_csv(),
        Output::Json(s) => s,
    };
    let out_path = file.resolve("out", common.out.clone())?;
    match out_path {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::invalid(format!("cannot write {path}: {e}")))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
