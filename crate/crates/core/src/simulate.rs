//! Discrete-event simulation of randomly routed parallel FCFS queues.
//!
//! Arrivals form a Poisson stream of rate `λ`; each is sent to server `i` with
//! probability `αᵢ`. Servers are non-preemptive FCFS with exponential service.
//! The collector tracks the latest arrival time `M(t)` among departed packets,
//! and the age `Δ(t) = t − M(t)` is integrated exactly as a sawtooth.
//!
//! Random streams are independent ChaCha8 streams keyed by one seed: stream 0
//! for inter-arrival gaps, stream 1 for routing, stream `2 + i` for the
//! service times of server `i`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, SystemConfig};
use crate::error::{Error, Result};

const ARRIVAL_STREAM: u64 = 0;
const ROUTING_STREAM: u64 = 1;
const SERVICE_STREAM_BASE: u64 = 2;

/// When to stop a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    /// Simulated time.
    Time(f64),
    /// Approximate number of departures inside the measurement window. The
    /// run length is `N / ((1 − warmup)·throughput)`.
    Departures(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub system: SystemConfig,
    pub horizon: Horizon,
    pub seed: u64,
    /// Leading fraction of simulated time left out of every statistic.
    pub warmup_fraction: f64,
    pub histogram_bins: usize,
    /// Upper edge of the histogram; larger ages land in the overflow count.
    pub histogram_range: f64,
    /// Age samples taken on a uniform time grid over the measured window.
    pub histogram_samples: usize,
    pub record_trace: bool,
}

impl SimConfig {
    /// Config with default warmup (0.1), 200 bins, 10⁴ age samples and a
    /// histogram range of ten times the smallest single-server mean.
    pub fn new(system: SystemConfig, horizon: Horizon, seed: u64) -> Self {
        let range = default_histogram_range(&system);
        Self {
            system,
            horizon,
            seed,
            warmup_fraction: 0.1,
            histogram_bins: 200,
            histogram_range: range,
            histogram_samples: 10_000,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSimConfig(m.to_string()));
        match self.horizon {
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => {
                return bad("horizon must be positive")
            }
            Horizon::Departures(0) => return bad("departure target must be positive"),
            _ => {}
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad("warmup fraction must lie in [0, 1)");
        }
        if self.histogram_bins == 0 {
            return bad("histogram needs at least one bin");
        }
        if !(self.histogram_range.is_finite() && self.histogram_range > 0.0) {
            return bad("histogram range must be positive");
        }
        if self.system.alphas().iter().all(|&a| a == 0.0) {
            return Err(Error::NoActiveServers);
        }
        Ok(())
    }

    fn horizon_time(&self) -> f64 {
        match self.horizon {
            Horizon::Time(t) => t,
            Horizon::Departures(n) => {
                let throughput: f64 = self
                    .system
                    .alphas()
                    .iter()
                    .zip(self.system.mus())
                    .map(|(a, m)| (a * self.system.lambda()).min(*m))
                    .sum();
                n as f64 / ((1.0 - self.warmup_fraction) * throughput)
            }
        }
    }
}

fn default_histogram_range(system: &SystemConfig) -> f64 {
    let smallest = system
        .alphas()
        .iter()
        .zip(system.mus())
        .filter_map(|(a, m)| analytic::ServerLoad::new(a * system.lambda() / m, *m).ok())
        .map(|l| analytic::single_server_mean(&l))
        .fold(f64::INFINITY, f64::min);
    if smallest.is_finite() {
        10.0 * smallest
    } else {
        100.0 / system.lambda()
    }
}

/// Counts of age samples in equal-width bins on `[0, range)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    fn new(bins: usize, range: f64) -> Self {
        Self {
            bin_width: range / bins as f64,
            counts: vec![0; bins],
            overflow: 0,
        }
    }

    fn add(&mut self, age: f64) {
        let k = (age / self.bin_width) as usize;
        match self.counts.get_mut(k) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }
}

/// One departure as seen by the collector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub arrival_time: f64,
    pub server: usize,
    pub departure_time: f64,
    /// Combined age right after this departure.
    pub age_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Time-averaged combined age over the measured window.
    pub mean_aoi: f64,
    /// Time-averaged age of each server on the same window; infinite for
    /// servers that never delivered a packet.
    pub per_server_mean_aoi: Vec<f64>,
    pub histogram: Histogram,
    /// Departures over the whole run.
    pub packets_served: u64,
    pub arrivals_per_server: Vec<u64>,
    pub sim_time: f64,
    pub measured_time: f64,
    /// Some routed-to server has `αᵢλ ≥ μᵢ`.
    pub unstable: bool,
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Debug, Clone, Copy)]
struct Departure {
    time: f64,
    server: usize,
    arrival: f64,
}

impl PartialEq for Departure {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Departure {}

impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Departure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.server.cmp(&other.server))
    }
}

/// Area under `t − latest` accumulated over `[max(from, window), to]`.
#[derive(Debug, Clone, Copy, Default)]
struct AgeTracker {
    latest: Option<f64>,
    area: f64,
}

impl AgeTracker {
    fn accumulate(&mut self, from: f64, to: f64, window: Option<f64>) {
        let (Some(m), Some(w)) = (self.latest, window) else {
            return;
        };
        let a = from.max(w);
        if to > a {
            // ∫ₐᵇ (t − m) dt
            self.area += (to - a) * (0.5 * (a + to) - m);
        }
    }

    fn age(&self, t: f64) -> Option<f64> {
        self.latest.map(|m| t - m)
    }
}

struct Collector {
    combined: AgeTracker,
    servers: Vec<AgeTracker>,
    active: Vec<bool>,
    warm: f64,
    /// Start of the window shared by every tracker: warmup end, or the first
    /// time every active server has delivered, whichever is later.
    window: Option<f64>,
    /// Fallback window for the combined age alone.
    combined_only: AgeTracker,
    combined_only_window: Option<f64>,
    last_time: f64,
}

impl Collector {
    fn new(active: Vec<bool>, warm: f64) -> Self {
        Self {
            combined: AgeTracker::default(),
            servers: vec![AgeTracker::default(); active.len()],
            active,
            warm,
            window: None,
            combined_only: AgeTracker::default(),
            combined_only_window: None,
            last_time: 0.0,
        }
    }

    fn advance(&mut self, t: f64) {
        let from = self.last_time;
        self.combined.accumulate(from, t, self.window);
        self.combined_only
            .accumulate(from, t, self.combined_only_window);
        for s in &mut self.servers {
            s.accumulate(from, t, self.window);
        }
        self.last_time = t;
    }

    /// Registers a departure at the current time; returns the new combined
    /// age.
    fn depart(&mut self, d: &Departure) -> f64 {
        for tracker in [
            &mut self.combined,
            &mut self.combined_only,
            &mut self.servers[d.server],
        ] {
            if tracker.latest.is_none_or(|m| d.arrival > m) {
                tracker.latest = Some(d.arrival);
            }
        }
        if self.combined_only_window.is_none() {
            self.combined_only_window = Some(self.warm.max(d.time));
        }
        if self.window.is_none()
            && self
                .servers
                .iter()
                .zip(&self.active)
                .all(|(s, &a)| !a || s.latest.is_some())
        {
            self.window = Some(self.warm.max(d.time));
        }
        d.time - self.combined.latest.expect("just set")
    }
}

/// Runs one simulation. Same config and seed give a bit-identical result.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let system = &config.system;
    let n = system.servers();
    let lambda = system.lambda();
    let horizon = config.horizon_time();
    let warm = config.warmup_fraction * horizon;

    let active: Vec<bool> = system.alphas().iter().map(|&a| a > 0.0).collect();
    let unstable = system
        .utilizations()
        .iter()
        .zip(&active)
        .any(|(&rho, &a)| a && rho >= 1.0);

    let stream = |k: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(k);
        rng
    };
    let mut arrival_rng = stream(ARRIVAL_STREAM);
    let mut routing_rng = stream(ROUTING_STREAM);
    let mut service_rngs: Vec<ChaCha8Rng> = (0..n as u64)
        .map(|i| stream(SERVICE_STREAM_BASE + i))
        .collect();
    let gap = Exp::new(lambda).map_err(|e| Error::InvalidSimConfig(e.to_string()))?;
    let services: Vec<Exp<f64>> = system
        .mus()
        .iter()
        .map(|&m| Exp::new(m).map_err(|e| Error::InvalidSimConfig(e.to_string())))
        .collect::<Result<_>>()?;
    let cumulative: Vec<f64> = system
        .alphas()
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    let last_active = active.iter().rposition(|&a| a).expect("validated");
    let route = |u: f64| -> usize {
        (0..n)
            .find(|&i| active[i] && u < cumulative[i])
            .unwrap_or(last_active)
    };

    let mut collector = Collector::new(active.clone(), warm);
    let mut histogram = Histogram::new(config.histogram_bins, config.histogram_range);
    let sample_step = (horizon - warm) / config.histogram_samples.max(1) as f64;
    let mut next_sample = 0usize;
    let mut sample_until = |collector: &Collector, t: f64, histogram: &mut Histogram| {
        while next_sample < config.histogram_samples {
            let s = warm + (next_sample as f64 + 0.5) * sample_step;
            if s > t {
                break;
            }
            if let Some(age) = collector.combined.age(s) {
                histogram.add(age);
            }
            next_sample += 1;
        }
    };

    let mut free_at = vec![0.0f64; n];
    let mut arrivals_per_server = vec![0u64; n];
    let mut pending: BinaryHeap<Reverse<Departure>> = BinaryHeap::new();
    let mut trace = config.record_trace.then(Vec::new);
    let mut served = 0u64;

    let mut process = |d: Departure,
                       collector: &mut Collector,
                       histogram: &mut Histogram,
                       trace: &mut Option<Vec<TraceRecord>>| {
        sample_until(collector, d.time, histogram);
        collector.advance(d.time);
        let age_after = collector.depart(&d);
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceRecord {
                arrival_time: d.arrival,
                server: d.server,
                departure_time: d.time,
                age_after,
            });
        }
    };

    let mut now = 0.0;
    loop {
        now += gap.sample(&mut arrival_rng);
        if now > horizon {
            break;
        }
        // ties: arrivals go first
        while let Some(Reverse(d)) = pending.peek().copied() {
            if d.time >= now {
                break;
            }
            pending.pop();
            served += 1;
            process(d, &mut collector, &mut histogram, &mut trace);
        }
        let server = route(routing_rng.random::<f64>());
        arrivals_per_server[server] += 1;
        let start = free_at[server].max(now);
        let done = start + services[server].sample(&mut service_rngs[server]);
        free_at[server] = done;
        pending.push(Reverse(Departure {
            time: done,
            server,
            arrival: now,
        }));
    }
    while let Some(Reverse(d)) = pending.pop() {
        if d.time > horizon {
            break;
        }
        served += 1;
        process(d, &mut collector, &mut histogram, &mut trace);
    }
    sample_until(&collector, horizon, &mut histogram);
    collector.advance(horizon);

    let (mean_aoi, per_server_mean_aoi, measured_time) = match collector.window {
        Some(w) if horizon > w => {
            let span = horizon - w;
            let per = collector
                .servers
                .iter()
                .zip(&active)
                .map(|(s, &a)| if a { s.area / span } else { f64::INFINITY })
                .collect();
            (collector.combined.area / span, per, span)
        }
        _ => match collector.combined_only_window {
            Some(w) if horizon > w => {
                let span = horizon - w;
                let per = collector
                    .servers
                    .iter()
                    .map(|s| {
                        if s.latest.is_some() {
                            f64::NAN
                        } else {
                            f64::INFINITY
                        }
                    })
                    .collect();
                (collector.combined_only.area / span, per, span)
            }
            _ => {
                return Err(Error::InvalidSimConfig(
                    "no packet departed inside the measured window".into(),
                ))
            }
        },
    };

    Ok(SimResult {
        mean_aoi,
        per_server_mean_aoi,
        histogram,
        packets_served: served,
        arrivals_per_server,
        sim_time: horizon,
        measured_time,
        unstable,
        trace,
    })
}

/// Complementary cumulative histogram `(x, P(Δ ≥ x))` at every bin edge.
pub fn empirical_tail(result: &SimResult) -> Result<Vec<(f64, f64)>> {
    let h = &result.histogram;
    let total = h.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let mut above = total;
    let mut out = Vec::with_capacity(h.counts.len() + 1);
    for (k, &c) in h.counts.iter().enumerate() {
        out.push((k as f64 * h.bin_width, above as f64 / total as f64));
        above -= c;
    }
    out.push((
        h.counts.len() as f64 * h.bin_width,
        above as f64 / total as f64,
    ));
    Ok(out)
}

/// Empirical density per bin: `(bin centre, count / (total · width))`.
pub fn empirical_density(result: &SimResult) -> Result<Vec<(f64, f64)>> {
    let h = &result.histogram;
    let total = h.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(h.counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            (
                (k as f64 + 0.5) * h.bin_width,
                c as f64 / (total as f64 * h.bin_width),
            )
        })
        .collect())
}

/// SplitMix64 finalizer; maps consecutive integers to decorrelated seeds.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateSummary {
    pub mean: f64,
    /// `None` for a single replicate.
    pub std_error: Option<f64>,
    pub values: Vec<f64>,
}

/// Independent replicates with seeds `split_seed(seed, i)`, run in parallel.
pub fn replicate(config: &SimConfig, reps: usize) -> Result<ReplicateSummary> {
    if reps < 1 {
        return Err(Error::InvalidReplicates);
    }
    let values: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = config.clone();
            c.seed = split_seed(config.seed, i);
            c.record_trace = false;
            run(&c).map(|r| r.mean_aoi)
        })
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / reps as f64;
    let std_error = (reps > 1).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        (var / reps as f64).sqrt()
    });
    Ok(ReplicateSummary {
        mean,
        std_error,
        values,
    })
}

/// Writes trace records as CSV with a header row.
pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "arrival_time,server,departure_time,age_after")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            r.arrival_time, r.server, r.departure_time, r.age_after
        )?;
    }
    Ok(())
}
