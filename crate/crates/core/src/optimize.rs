//! Optimal utilizations and routing.
//!
//! * [`rho_star`]: minimizer of the single-server mean age.
//! * [`symmetric_exact_optimum`]: common utilization minimizing the exact
//!   two-server mean with equal service rates, as the root of the numerator of
//!   its derivative ([`DerivativeRational`]).
//! * [`optimal_routing_approx`]: routing that loads every server to
//!   [`rho_star`], optimal for the gamma-approximate mean.
//! * [`minimize_exact`]: multi-start coordinate descent on the exact mean.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, ServerLoad};
use crate::error::{Error, Result};

/// Utilizations are clipped to `[RHO_EPS, 1 - RHO_EPS]` during searches.
pub const RHO_EPS: f64 = 1e-3;

/// Central-difference step, in utilization units.
pub const FD_STEP: f64 = 1e-5;

const DESCENT_STEP_TOL: f64 = 1e-6;
const DESCENT_MAX_ITERS: usize = 200;
const LINE_SEARCH_TOL: f64 = 1e-8;

/// Utilization that minimizes the M/M/1 mean age:
/// `½(√2 + 1 − √(2√2 − 1))`.
pub fn rho_star() -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    0.5 * (s2 + 1.0 - (2.0 * s2 - 1.0).sqrt())
}

/// Residual of the stationarity condition `(1+ρ²)(1−ρ)² = ρ²`.
pub fn stationarity_residual(rho: f64) -> f64 {
    (1.0 + rho * rho) * (1.0 - rho).powi(2) - rho * rho
}

/// Derivative of the symmetric two-server exact mean `f(x) = g(x, x)`, with
/// `μ = 1`, as a ratio of a degree-11 polynomial and
/// `2x²(x−2)³(x−1)²(x+1)³`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DerivativeRational;

impl DerivativeRational {
    /// Numerator coefficients, highest degree first.
    pub const NUMERATOR: [f64; 12] = [
        1.0, -5.0, 4.0, 24.0, -27.0, 30.0, -123.0, 169.0, -71.0, -14.0, -4.0, 8.0,
    ];

    pub fn numerator(&self, x: f64) -> f64 {
        Self::NUMERATOR.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn denominator(&self, x: f64) -> f64 {
        2.0 * x * x * (x - 2.0).powi(3) * (x - 1.0).powi(2) * (x + 1.0).powi(3)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.numerator(x) / self.denominator(x)
    }
}

/// Bisection for a sign change of `f` in `[lo, hi]` down to width `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`. Returns
/// `(argmin, min)`.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Root in `(0, 1)` of the numerator of [`DerivativeRational`], to `1e-10`.
///
/// The initial bracket `[0.4, 0.7]` is widened toward `(0, 1)` if it fails to
/// straddle a sign change.
pub fn symmetric_exact_optimum() -> Result<f64> {
    let d = DerivativeRational;
    let mut lo: f64 = 0.4;
    let mut hi: f64 = 0.7;
    for _ in 0..8 {
        if d.numerator(lo).signum() != d.numerator(hi).signum() {
            return bisect(|x| d.numerator(x), lo, hi, 1e-10);
        }
        lo = (lo - 0.05).max(1e-6);
        hi = (hi + 0.05).min(1.0 - 1e-6);
    }
    Err(Error::RootNotBracketed { lo, hi })
}

/// Routing and predicted mean age for a chosen operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutingSolution {
    pub lambda: f64,
    pub alphas: Vec<f64>,
    pub predicted_aoi: f64,
    pub per_server_rho: Vec<f64>,
}

impl RoutingSolution {
    fn from_rhos(rhos: Vec<f64>, mus: &[f64], predicted_aoi: f64) -> Self {
        let rates: Vec<f64> = rhos.iter().zip(mus).map(|(r, m)| r * m).collect();
        let lambda: f64 = rates.iter().sum();
        let alphas = rates.iter().map(|r| r / lambda).collect();
        Self {
            lambda,
            alphas,
            predicted_aoi,
            per_server_rho: rhos,
        }
    }
}

fn check_mus(mus: &[f64]) -> Result<()> {
    if mus.is_empty() {
        return Err(Error::NoActiveServers);
    }
    match mus.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        Some(&m) => Err(Error::InvalidServiceRate(m)),
        None => Ok(()),
    }
}

fn loads_at(rhos: &[f64], mus: &[f64]) -> Result<Vec<ServerLoad>> {
    rhos.iter()
        .zip(mus)
        .map(|(&r, &m)| ServerLoad::new(r, m))
        .collect()
}

/// Routing minimizing the gamma-approximate mean: every server at
/// [`rho_star`], so `αᵢ = μᵢ/Σμ` and `λ = ρ*·Σμ`.
pub fn optimal_routing_approx(mus: &[f64]) -> Result<RoutingSolution> {
    check_mus(mus)?;
    let rs = rho_star();
    let total: f64 = mus.iter().sum();
    let loads = loads_at(&vec![rs; mus.len()], mus)?;
    let predicted = analytic::approx_mean_loads(&loads)?;
    Ok(RoutingSolution {
        lambda: rs * total,
        alphas: mus.iter().map(|m| m / total).collect(),
        predicted_aoi: predicted,
        per_server_rho: vec![rs; mus.len()],
    })
}

fn exact_objective(rhos: &[f64], mus: &[f64]) -> f64 {
    loads_at(rhos, mus)
        .and_then(|l| analytic::exact_mean(&l))
        .unwrap_or(f64::INFINITY)
}

/// Coordinate descent with golden-section line searches. `budget` caps
/// `Σρᵢμᵢ`; each line search is restricted to the feasible segment.
fn coordinate_descent(start: Vec<f64>, mus: &[f64], budget: Option<f64>) -> (Vec<f64>, f64) {
    let mut x = start;
    let mut best = exact_objective(&x, mus);
    for _ in 0..DESCENT_MAX_ITERS {
        let mut moved: f64 = 0.0;
        for i in 0..x.len() {
            let mut hi = 1.0 - RHO_EPS;
            if let Some(b) = budget {
                let others: f64 = x
                    .iter()
                    .zip(mus)
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (r, m))| r * m)
                    .sum();
                hi = hi.min((b - others) / mus[i]);
            }
            if hi <= RHO_EPS {
                continue;
            }
            let mut probe = x.clone();
            let (arg, val) = golden_section(
                |r| {
                    probe[i] = r;
                    exact_objective(&probe, mus)
                },
                RHO_EPS,
                hi,
                LINE_SEARCH_TOL,
            );
            if val < best {
                moved = moved.max((arg - x[i]).abs());
                x[i] = arg;
                best = val;
            }
        }
        if moved < DESCENT_STEP_TOL {
            break;
        }
    }
    (x, best)
}

fn start_points(n: usize) -> Vec<Vec<f64>> {
    const GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut starts: Vec<Vec<f64>> = if n <= 3 {
        (0..GRID.len().pow(n as u32))
            .map(|mut k| {
                (0..n)
                    .map(|_| {
                        let g = GRID[k % GRID.len()];
                        k /= GRID.len();
                        g
                    })
                    .collect()
            })
            .collect()
    } else {
        GRID.iter().map(|&g| vec![g; n]).collect()
    };
    starts.push(vec![rho_star(); n]);
    starts
}

/// Minimizes the exact mean over per-server utilizations.
///
/// Starts from a 5-point grid per axis (the full tensor grid for up to three
/// servers, its diagonal beyond that) plus `(ρ*, …, ρ*)`, runs coordinate
/// descent from each, and keeps the lowest objective; ties go to the
/// lexicographically smallest utilization vector. With a `budget`, starts are
/// scaled into `Σρᵢμᵢ ≤ budget`.
pub fn minimize_exact(mus: &[f64], budget: Option<f64>) -> Result<RoutingSolution> {
    check_mus(mus)?;
    if let Some(b) = budget {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "budget {b} must be positive"
            )));
        }
        let required: f64 = mus.iter().map(|m| m * RHO_EPS).sum();
        if b <= required {
            return Err(Error::InfeasibleBudget {
                budget: b,
                required,
            });
        }
    }

    let starts: Vec<Vec<f64>> = start_points(mus.len())
        .into_iter()
        .map(|s| match budget {
            Some(b) => {
                let load: f64 = s.iter().zip(mus).map(|(r, m)| r * m).sum();
                if load <= b {
                    s
                } else {
                    // shrink toward the lower clip so the start is feasible
                    let k = (b - mus.iter().sum::<f64>() * RHO_EPS)
                        / (load - mus.iter().sum::<f64>() * RHO_EPS);
                    s.iter()
                        .map(|r| RHO_EPS + (r - RHO_EPS) * k * (1.0 - 1e-9))
                        .collect()
                }
            }
            None => s,
        })
        .collect();

    let runs: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|s| coordinate_descent(s, mus, budget))
        .collect();

    let (rhos, value) = runs
        .into_iter()
        .min_by(|(xa, fa), (xb, fb)| {
            fa.total_cmp(fb).then_with(|| {
                xa.iter()
                    .zip(xb)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("at least one start");
    if !value.is_finite() {
        return Err(Error::InvalidArgument("no feasible operating point".into()));
    }
    Ok(RoutingSolution::from_rhos(rhos, mus, value))
}

/// Common utilization minimizing the exact mean of `n` identical servers of
/// rate `mu`. Returns `(ρ, mean)`.
pub fn minimize_common_rho(n: usize, mu: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::NoActiveServers);
    }
    check_mus(&[mu])?;
    let objective = |r: f64| exact_objective(&vec![r; n], &vec![mu; n]);
    Ok(golden_section(objective, RHO_EPS, 1.0 - RHO_EPS, 1e-9))
}

/// Approximate two-server mean as a function of the utilizations.
pub fn approx_mean_at(rho1: f64, mu1: f64, rho2: f64, mu2: f64) -> Result<f64> {
    let t1 = analytic::theta_of(&ServerLoad::new(rho1, mu1)?);
    let t2 = analytic::theta_of(&ServerLoad::new(rho2, mu2)?);
    Ok(analytic::approx_mean_two(t1, t2))
}

/// Norm of the central-difference gradient (step [`FD_STEP`]) of the
/// approximate two-server mean with respect to `(ρ₁, ρ₂)` at `(ρ*, ρ*)`.
pub fn rho_star_gradient_norm(mu1: f64, mu2: f64) -> Result<f64> {
    check_mus(&[mu1, mu2])?;
    let rs = rho_star();
    let h = FD_STEP;
    let d1 =
        (approx_mean_at(rs + h, mu1, rs, mu2)? - approx_mean_at(rs - h, mu1, rs, mu2)?) / (2.0 * h);
    let d2 =
        (approx_mean_at(rs, mu1, rs + h, mu2)? - approx_mean_at(rs, mu1, rs - h, mu2)?) / (2.0 * h);
    Ok(d1.hypot(d2))
}

/// Central-difference slope of the exact symmetric two-server mean
/// (`μ = 1`) at `rho`.
pub fn symmetric_exact_slope(rho: f64) -> Result<f64> {
    let f = |r: f64| -> Result<f64> {
        let l = ServerLoad::new(r, 1.0)?;
        analytic::exact_mean(&[l, l])
    };
    Ok((f(rho + FD_STEP)? - f(rho - FD_STEP)?) / (2.0 * FD_STEP))
}
