//! Subcommand implementations. Each returns a serializable report that also
//! renders as a CSV [`Table`].

use rayon::prelude::*;
use serde::Serialize;

use aoi::analytic::{self, GammaParam, ServerLoad, SystemConfig};
use aoi::optimize::{self, RoutingSolution};
use aoi::simulate::{self, Horizon, ReplicateSummary, SimConfig};

use crate::format::{key_values, percent_error, round4, sig6, Table};
use crate::CliError;

/// Arrival rates swept for the symmetric `μ = (20, 20)` table.
pub const TABLE1_LAMBDAS: [f64; 8] = [8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 28.0, 32.0];
pub const TABLE1_MUS: [f64; 2] = [20.0, 20.0];

/// Per-server arrival rates for the `μ = (25, 15)` table; each pair sums to
/// `0.53 · 40 = 21.2`.
pub const TABLE2_RATES: [(f64, f64); 10] = [
    (20.735, 0.465),
    (19.235, 1.965),
    (17.735, 3.465),
    (16.235, 4.965),
    (14.735, 6.465),
    (13.235, 7.965),
    (11.735, 9.465),
    (10.235, 10.965),
    (8.735, 12.465),
    (7.235, 13.965),
];
pub const TABLE2_MUS: [f64; 2] = [25.0, 15.0];

pub const FIG3_MAX_SERVERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServerSummary {
    pub index: usize,
    pub alpha: f64,
    pub mu: f64,
    pub rho: f64,
    /// `None` for servers that receive no traffic.
    pub single_mean_aoi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub lambda: f64,
    pub exact_mean_aoi: f64,
    pub approx_mean_aoi: f64,
    pub servers: Vec<ServerSummary>,
}

impl AnalyzeReport {
    pub fn table(&self) -> Table {
        let mut kv = vec![
            ("lambda".to_string(), sig6(self.lambda)),
            ("exact_mean_aoi".to_string(), sig6(self.exact_mean_aoi)),
            ("approx_mean_aoi".to_string(), sig6(self.approx_mean_aoi)),
        ];
        for s in &self.servers {
            let i = s.index + 1;
            kv.push((format!("alpha_{i}"), sig6(s.alpha)));
            kv.push((format!("mu_{i}"), sig6(s.mu)));
            kv.push((format!("rho_{i}"), sig6(s.rho)));
            kv.push((
                format!("single_mean_aoi_{i}"),
                s.single_mean_aoi.map_or("inf".into(), sig6),
            ));
        }
        key_values(kv)
    }
}

pub fn cmd_analyze(config: &SystemConfig) -> Result<AnalyzeReport, CliError> {
    let loads = config.active_loads()?;
    let servers = config
        .alphas()
        .iter()
        .zip(config.mus())
        .zip(config.utilizations())
        .enumerate()
        .map(|(index, ((&alpha, &mu), rho))| ServerSummary {
            index,
            alpha,
            mu,
            rho,
            single_mean_aoi: ServerLoad::new(rho, mu)
                .ok()
                .map(|l| analytic::single_server_mean(&l)),
        })
        .collect();
    Ok(AnalyzeReport {
        lambda: config.lambda(),
        exact_mean_aoi: analytic::exact_mean(&loads)?,
        approx_mean_aoi: analytic::approx_mean_loads(&loads)?,
        servers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub mean_aoi: f64,
    /// Closed-form reference; absent for unstable configurations.
    pub exact_mean_aoi: Option<f64>,
    pub per_server_mean_aoi: Vec<f64>,
    pub packets_served: u64,
    pub sim_time: f64,
    pub measured_time: f64,
    pub unstable: bool,
    pub replicates: Option<ReplicateSummary>,
}

impl SimulateReport {
    pub fn table(&self) -> Table {
        let mut kv = vec![
            ("mean_aoi".to_string(), sig6(self.mean_aoi)),
            (
                "exact_mean_aoi".to_string(),
                self.exact_mean_aoi.map_or("nan".into(), sig6),
            ),
            (
                "packets_served".to_string(),
                self.packets_served.to_string(),
            ),
            ("sim_time".to_string(), sig6(self.sim_time)),
            ("measured_time".to_string(), sig6(self.measured_time)),
            ("unstable".to_string(), self.unstable.to_string()),
        ];
        for (i, v) in self.per_server_mean_aoi.iter().enumerate() {
            kv.push((format!("server_mean_aoi_{}", i + 1), sig6(*v)));
        }
        if let Some(r) = &self.replicates {
            kv.push(("replicates".to_string(), r.values.len().to_string()));
            kv.push(("replicate_mean".to_string(), sig6(r.mean)));
            kv.push((
                "replicate_std_error".to_string(),
                r.std_error.map_or("nan".into(), sig6),
            ));
        }
        key_values(kv)
    }
}

/// One run (and optionally `reps` replicates) of the simulator. The trace of
/// the main run is returned alongside the report when requested.
pub fn cmd_simulate(
    config: &SimConfig,
    reps: Option<usize>,
) -> Result<(SimulateReport, Option<Vec<simulate::TraceRecord>>), CliError> {
    let result = simulate::run(config)?;
    let exact = if result.unstable {
        None
    } else {
        Some(analytic::system_exact_mean(&config.system)?)
    };
    let replicates = reps.map(|k| simulate::replicate(config, k)).transpose()?;
    Ok((
        SimulateReport {
            mean_aoi: result.mean_aoi,
            exact_mean_aoi: exact,
            per_server_mean_aoi: result.per_server_mean_aoi,
            packets_served: result.packets_served,
            sim_time: result.sim_time,
            measured_time: result.measured_time,
            unstable: result.unstable,
            replicates,
        },
        result.trace,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizeMode {
    Approx,
    Exact,
}

impl std::str::FromStr for OptimizeMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approx" => Ok(Self::Approx),
            "exact" => Ok(Self::Exact),
            _ => Err(CliError::invalid(format!(
                "unknown mode {s:?} (approx|exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub mode: OptimizeMode,
    #[serde(flatten)]
    pub solution: RoutingSolution,
}

impl OptimizeReport {
    pub fn table(&self) -> Table {
        let s = &self.solution;
        let mode = match self.mode {
            OptimizeMode::Approx => "approx",
            OptimizeMode::Exact => "exact",
        };
        let mut kv = vec![
            ("mode".to_string(), mode.to_string()),
            ("lambda".to_string(), sig6(s.lambda)),
            ("predicted_aoi".to_string(), sig6(s.predicted_aoi)),
        ];
        for (i, (a, r)) in s.alphas.iter().zip(&s.per_server_rho).enumerate() {
            kv.push((format!("alpha_{}", i + 1), sig6(*a)));
            kv.push((format!("rho_{}", i + 1), sig6(*r)));
        }
        key_values(kv)
    }
}

pub fn cmd_optimize(
    mus: &[f64],
    mode: OptimizeMode,
    budget: Option<f64>,
) -> Result<OptimizeReport, CliError> {
    let solution = match mode {
        OptimizeMode::Approx => optimize::optimal_routing_approx(mus)?,
        OptimizeMode::Exact => optimize::minimize_exact(mus, budget)?,
    };
    Ok(OptimizeReport { mode, solution })
}

/// One row of a table preset, rounded to four decimals like the originals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    /// `[λ]` for the symmetric table, `[λ₁, λ₂]` for the asymmetric one.
    pub inputs: Vec<f64>,
    /// Simulated (symmetric table) or exact (asymmetric table) mean.
    pub reference: f64,
    pub approximate: f64,
    /// `100·|reference − approximate| / reference`, from the rounded columns.
    pub percent_error: f64,
}

impl ReportRow {
    fn new(inputs: Vec<f64>, reference: f64, approximate: f64) -> Self {
        let reference = round4(reference);
        let approximate = round4(approximate);
        Self {
            inputs,
            reference,
            approximate,
            percent_error: percent_error(reference, approximate),
        }
    }

    fn cells(&self) -> Vec<String> {
        let mut cells: Vec<String> = self.inputs.iter().map(|x| x.to_string()).collect();
        cells.push(format!("{:.4}", self.reference));
        cells.push(format!("{:.4}", self.approximate));
        cells.push(format!("{:.4}", self.percent_error));
        cells
    }
}

pub fn table1_table(rows: &[ReportRow]) -> Table {
    let mut t = Table::new(vec!["lambda", "empirical", "approximate", "percent_error"]);
    rows.iter().for_each(|r| t.push(r.cells()));
    t
}

pub fn table2_table(rows: &[ReportRow]) -> Table {
    let mut t = Table::new(vec![
        "lambda1",
        "lambda2",
        "actual",
        "approximate",
        "percent_error",
    ]);
    rows.iter().for_each(|r| t.push(r.cells()));
    t
}

/// Symmetric servers `μ = (20, 20)`, even routing, simulated vs gamma
/// approximation. Every row uses the same seed.
pub fn cmd_table1(seed: u64, packets: u64) -> Result<Vec<ReportRow>, CliError> {
    TABLE1_LAMBDAS
        .par_iter()
        .map(|&lambda| {
            let system = SystemConfig::new(lambda, vec![0.5, 0.5], TABLE1_MUS.to_vec())?;
            let loads = system.active_loads()?;
            let approx = analytic::approx_mean_two(
                analytic::theta_of(&loads[0]),
                analytic::theta_of(&loads[1]),
            );
            let sim = simulate::run(&SimConfig::new(system, Horizon::Departures(packets), seed))?;
            Ok(ReportRow::new(vec![lambda], sim.mean_aoi, approx))
        })
        .collect()
}

/// `μ = (25, 15)` at fixed total load, exact closed form vs gamma
/// approximation.
pub fn cmd_table2() -> Result<Vec<ReportRow>, CliError> {
    TABLE2_RATES
        .iter()
        .map(|&(l1, l2)| {
            let a = ServerLoad::from_rates(l1, TABLE2_MUS[0])?;
            let b = ServerLoad::from_rates(l2, TABLE2_MUS[1])?;
            let actual = analytic::exact_mean(&[a, b])?;
            let approx = analytic::approx_mean_two(analytic::theta_of(&a), analytic::theta_of(&b));
            Ok(ReportRow::new(vec![l1, l2], actual, approx))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Point {
    pub n: usize,
    pub rho: f64,
    pub aoi: f64,
}

pub fn fig3_table(points: &[Fig3Point]) -> Table {
    let mut t = Table::new(vec!["n", "rho", "aoi"]);
    for p in points {
        t.push(vec![p.n.to_string(), sig6(p.rho), sig6(p.aoi)]);
    }
    t
}

/// Minimum exact mean of `n` unit-rate servers at a common utilization, for
/// `n = 1..=n_max`.
pub fn cmd_fig3(n_max: usize) -> Result<Vec<Fig3Point>, CliError> {
    if !(1..=FIG3_MAX_SERVERS).contains(&n_max) {
        return Err(CliError::invalid(format!(
            "n-max must be in 1..={FIG3_MAX_SERVERS}, got {n_max}"
        )));
    }
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (rho, aoi) = optimize::minimize_common_rho(n, 1.0)?;
            Ok(Fig3Point { n, rho, aoi })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistRow {
    pub x: f64,
    pub exact_pdf: f64,
    pub gamma_pdf: f64,
    pub empirical_pdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistCompare {
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
    pub rows: Vec<DistRow>,
}

impl DistCompare {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["x", "exact_pdf", "gamma_pdf", "empirical_pdf"]);
        for r in &self.rows {
            t.push(vec![
                sig6(r.x),
                sig6(r.exact_pdf),
                sig6(r.gamma_pdf),
                sig6(r.empirical_pdf),
            ]);
        }
        t
    }
}

/// Trapezoid rule over `(x, y)` pairs.
pub fn trapezoid(points: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut it = points.into_iter();
    let Some(mut prev) = it.next() else {
        return 0.0;
    };
    let mut total = 0.0;
    for p in it {
        total += 0.5 * (p.0 - prev.0) * (p.1 + prev.1);
        prev = p;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistOptions {
    pub seed: u64,
    /// Age samples for the empirical histogram (also the departure target).
    pub samples: u64,
    /// Grid points for the analytic densities.
    pub points: usize,
    pub bins: usize,
}

impl Default for DistOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 1_000_000,
            points: 10_001,
            bins: 100,
        }
    }
}

/// Exact, gamma and simulated age densities of one M/M/1 queue on a uniform
/// grid over `[0, 20/(min(ρ, 1−ρ)·μ)]`.
pub fn cmd_dist_compare(lambda: f64, mu: f64, opts: DistOptions) -> Result<DistCompare, CliError> {
    if opts.points < 2 || opts.bins == 0 || opts.samples == 0 {
        return Err(CliError::invalid(
            "points >= 2, bins >= 1 and samples >= 1 required",
        ));
    }
    let system = SystemConfig::new(lambda, vec![1.0], vec![mu])?;
    let load = system.active_loads()?[0];
    let theta: GammaParam = analytic::theta_of(&load);
    let x_max = 20.0 / (load.rho().min(load.rho_bar()) * mu);

    let mut sim_cfg = SimConfig::new(system, Horizon::Departures(opts.samples), opts.seed);
    sim_cfg.histogram_bins = opts.bins;
    sim_cfg.histogram_range = x_max;
    sim_cfg.histogram_samples = opts.samples as usize;
    let sim = simulate::run(&sim_cfg)?;
    let width = sim.histogram.bin_width;
    let density = simulate::empirical_density(&sim)?;

    let pdf = analytic::single_server_pdf(&load);
    let h = x_max / (opts.points - 1) as f64;
    let rows = (0..opts.points)
        .map(|k| {
            let x = k as f64 * h;
            let bin = (x / width) as usize;
            DistRow {
                x,
                exact_pdf: pdf.evaluate(x),
                gamma_pdf: analytic::gamma_pdf(theta, x),
                empirical_pdf: density.get(bin).map_or(0.0, |d| d.1),
            }
        })
        .collect();
    Ok(DistCompare {
        lambda,
        mu,
        theta: theta.theta(),
        rows,
    })
}
