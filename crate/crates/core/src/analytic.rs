//! Closed-form age quantities for FCFS M/M/1 queues in parallel.
//!
//! The combined age of several independently fed queues is the minimum of the
//! per-queue ages, so its survival function is the product of the per-queue
//! survival functions. Every mean below is the integral of such a product,
//! done exactly in [`ExpSum`] arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exp_poly::{ExpSum, ExpTerm};
use crate::quadrature;

/// Tolerance on `Σαᵢ = 1`.
pub const ROUTING_SUM_TOL: f64 = 1e-12;

/// Utilization and service rate of one stable server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServerLoad {
    rho: f64,
    mu: f64,
}

impl ServerLoad {
    pub fn new(rho: f64, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidServiceRate(mu));
        }
        if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidUtilization(rho));
        }
        Ok(Self { rho, mu })
    }

    /// Load from a per-server arrival rate `λᵢ` and service rate `μᵢ`.
    pub fn from_rates(arrival_rate: f64, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidServiceRate(mu));
        }
        Self::new(arrival_rate / mu, mu)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_bar(&self) -> f64 {
        1.0 - self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn arrival_rate(&self) -> f64 {
        self.rho * self.mu
    }
}

/// Total arrival rate, routing probabilities and service rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    lambda: f64,
    alphas: Vec<f64>,
    mus: Vec<f64>,
}

impl SystemConfig {
    /// Validated configuration; every routed-to server must be stable.
    pub fn new(lambda: f64, alphas: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        let cfg = Self::new_allow_unstable(lambda, alphas, mus)?;
        for (i, rho) in cfg.utilizations().into_iter().enumerate() {
            if rho >= 1.0 {
                return Err(Error::UnstableServer { index: i, rho });
            }
        }
        Ok(cfg)
    }

    /// Same checks as [`Self::new`] except per-queue stability.
    pub fn new_allow_unstable(lambda: f64, alphas: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArrivalRate(lambda));
        }
        if alphas.is_empty() {
            return Err(Error::InvalidRouting("no servers".into()));
        }
        if alphas.len() != mus.len() {
            return Err(Error::InvalidRouting(format!(
                "{} routing probabilities for {} servers",
                alphas.len(),
                mus.len()
            )));
        }
        if let Some(&a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidRouting(format!(
                "probability {a} outside [0, 1]"
            )));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 1.0).abs() > ROUTING_SUM_TOL {
            return Err(Error::InvalidRouting(format!(
                "probabilities sum to {total}"
            )));
        }
        if let Some(&mu) = mus.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidServiceRate(mu));
        }
        Ok(Self {
            lambda,
            alphas,
            mus,
        })
    }

    /// Configuration from per-server arrival rates `λᵢ`.
    pub fn from_arrival_rates(rates: &[f64], mus: Vec<f64>) -> Result<Self> {
        if let Some(&r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidArrivalRate(r));
        }
        let lambda: f64 = rates.iter().sum();
        let alphas = rates.iter().map(|r| r / lambda).collect();
        Self::new(lambda, alphas, mus)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn servers(&self) -> usize {
        self.mus.len()
    }

    /// `αᵢλ/μᵢ` for every server, including idle ones.
    pub fn utilizations(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .zip(&self.mus)
            .map(|(a, m)| a * self.lambda / m)
            .collect()
    }

    /// Loads of the servers that receive traffic. Servers with `αᵢ = 0` have
    /// a tail identically 1 and are left out.
    pub fn active_loads(&self) -> Result<Vec<ServerLoad>> {
        let loads: Vec<ServerLoad> = self
            .alphas
            .iter()
            .zip(&self.mus)
            .enumerate()
            .filter(|(_, (a, _))| **a > 0.0)
            .map(|(i, (a, mu))| {
                let rho = a * self.lambda / mu;
                if rho >= 1.0 {
                    Err(Error::UnstableServer { index: i, rho })
                } else {
                    ServerLoad::new(rho, *mu)
                }
            })
            .collect::<Result<_>>()?;
        if loads.is_empty() {
            return Err(Error::NoActiveServers);
        }
        Ok(loads)
    }
}

/// Scale of the shape-2 gamma surrogate; the surrogate's mean is `2θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParam {
    theta: f64,
}

impl GammaParam {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidTheta(theta));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Mean age of an FCFS M/M/1 queue, `(1/μ)(1 + 1/ρ + ρ²/(1-ρ))`.
pub fn single_server_mean(load: &ServerLoad) -> f64 {
    let rho = load.rho;
    (1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / load.mu
}

/// Survival function of the M/M/1 age:
/// `e^{-ρ̄μx} - (1/ρ̄ + ρμx)e^{-μx} + (1/ρ̄)e^{-ρμx}`.
pub fn single_server_tail(load: &ServerLoad) -> ExpSum {
    let (rho, mu, rb) = (load.rho, load.mu, load.rho_bar());
    ExpSum::new(vec![
        ExpTerm::new(vec![1.0], rb * mu).expect("finite rate"),
        ExpTerm::new(vec![-1.0 / rb, -rho * mu], mu).expect("finite rate"),
        ExpTerm::new(vec![1.0 / rb], rho * mu).expect("finite rate"),
    ])
    .canonicalize()
}

/// Density of the M/M/1 age, the negated derivative of the tail.
pub fn single_server_pdf(load: &ServerLoad) -> ExpSum {
    single_server_tail(load).derivative().scale(-1.0)
}

/// Product of the per-server survival functions.
pub fn combined_tail(loads: &[ServerLoad]) -> Result<ExpSum> {
    let (first, rest) = loads.split_first().ok_or(Error::NoActiveServers)?;
    Ok(rest.iter().fold(single_server_tail(first), |acc, l| {
        acc.multiply(&single_server_tail(l))
    }))
}

/// Exact mean combined age of independently fed servers.
pub fn exact_mean(loads: &[ServerLoad]) -> Result<f64> {
    match loads {
        [] => Err(Error::NoActiveServers),
        [only] => Ok(single_server_mean(only)),
        _ => combined_tail(loads)?.integrate(),
    }
}

/// Exact mean combined age for a routed system.
pub fn system_exact_mean(config: &SystemConfig) -> Result<f64> {
    exact_mean(&config.active_loads()?)
}

/// The same mean by adaptive quadrature of the product of hand-coded tails.
///
/// The integrand is cut where a bound on the smallest factor drops below
/// `1e-14`; the absolute tolerance is `1e-10`.
pub fn quadrature_mean(loads: &[ServerLoad]) -> Result<f64> {
    if loads.is_empty() {
        return Err(Error::NoActiveServers);
    }
    let tail = |l: &ServerLoad, x: f64| {
        let (rho, mu, rb) = (l.rho, l.mu, 1.0 - l.rho);
        (-rb * mu * x).exp() - (1.0 / rb + rho * mu * x) * (-mu * x).exp()
            + (-rho * mu * x).exp() / rb
    };
    // |tail(x)| <= (1 + 2/ρ̄ + ρμx)·e^{-min(ρ,ρ̄)μx}, and the product is
    // bounded by its smallest factor.
    let cutoff = loads
        .iter()
        .map(|l| {
            let slow = l.rho.min(1.0 - l.rho) * l.mu;
            let bound = |x: f64| (1.0 + 2.0 / (1.0 - l.rho) + l.rho * l.mu * x) * (-slow * x).exp();
            let mut x = 1.0 / slow;
            while bound(x) >= 1e-14 {
                x *= 1.25;
            }
            x
        })
        .fold(f64::INFINITY, f64::min);
    let q = quadrature::integrate(
        |x| loads.iter().map(|l| tail(l, x)).product::<f64>(),
        0.0,
        cutoff,
        1e-10,
        0.0,
    )?;
    Ok(q.value)
}

/// `θ = E[Δ]/2` for the given load.
pub fn theta_of(load: &ServerLoad) -> GammaParam {
    GammaParam {
        theta: single_server_mean(load) / 2.0,
    }
}

/// `(1 + x/θ)e^{-x/θ}`.
pub fn gamma_tail(theta: GammaParam) -> ExpSum {
    let inv = 1.0 / theta.theta;
    ExpSum::new(vec![ExpTerm::new(vec![1.0, inv], inv).expect("finite rate")])
}

/// `(x/θ²)e^{-x/θ}`.
pub fn gamma_pdf(theta: GammaParam, x: f64) -> f64 {
    let t = theta.theta;
    x / (t * t) * (-x / t).exp()
}

/// Approximate two-server mean, `2θ₀(1 + θ₀²/(θ₁θ₂))` with
/// `θ₀ = θ₁θ₂/(θ₁+θ₂)`.
pub fn approx_mean_two(theta1: GammaParam, theta2: GammaParam) -> f64 {
    let (t1, t2) = (theta1.theta, theta2.theta);
    let t0 = t1 * t2 / (t1 + t2);
    2.0 * t0 * (1.0 + t0 * t0 / (t1 * t2))
}

/// Approximate `n`-server mean: the exact integral of the product of gamma
/// tails.
pub fn approx_mean_n(thetas: &[GammaParam]) -> Result<f64> {
    let (first, rest) = thetas.split_first().ok_or(Error::NoActiveServers)?;
    rest.iter()
        .fold(gamma_tail(*first), |acc, t| acc.multiply(&gamma_tail(*t)))
        .integrate()
}

/// Approximate mean for a list of loads.
pub fn approx_mean_loads(loads: &[ServerLoad]) -> Result<f64> {
    let thetas: Vec<GammaParam> = loads.iter().map(theta_of).collect();
    approx_mean_n(&thetas)
}

/// Largest gap between the exact and gamma survival functions of one
/// server, over a grid of step `0.01/μ` up to `20/(min(ρ, ρ̄)·μ)`.
pub fn gamma_approx_error(load: &ServerLoad) -> f64 {
    let exact = single_server_tail(load);
    let gamma = gamma_tail(theta_of(load));
    let h = 0.01 / load.mu;
    let x_max = 20.0 / (load.rho.min(load.rho_bar()) * load.mu);
    let steps = (x_max / h).ceil() as usize;
    (0..=steps)
        .map(|k| {
            let x = k as f64 * h;
            (exact.evaluate(x) - gamma.evaluate(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Rational two-server closed form transcribed sign-for-sign from its
/// printed source.
///
/// It does not equal the integral of the product of two M/M/1 tails (at
/// `ρ₁ = ρ₂ = 0.53`, `μ = 1` it exceeds the one-server mean, which a minimum
/// of two ages cannot do). Kept only so the discrepancy stays testable; use
/// [`exact_mean`] for real work.
pub fn transcribed_two_server_formula(l1: &ServerLoad, l2: &ServerLoad) -> f64 {
    let (r1, m1, b1) = (l1.rho, l1.mu, l1.rho_bar());
    let (r2, m2, b2) = (l2.rho, l2.mu, l2.rho_bar());
    let s = m1 + m2;
    let mut v = 1.0 / (b1 * m1 + b2 * m2)
        + 1.0 / (b1 * b2 * (r1 * m1 + r2 * m2))
        + 1.0 / (b1 * b2 * s)
        + 2.0 * r1 * r2 * m1 * m2 / s.powi(3)
        + (r2 * m2 / b1 + r1 * m1 / b2) / s.powi(2);
    v -= 1.0 / (b2 * (m2 + b1 * m1))
        + r2 * m2 / (b1 * m1 + m2).powi(2)
        + 1.0 / (b1 * (m1 + b2 * m2))
        + r1 * m1 / (b2 * m2 + m1).powi(2);
    v += 1.0 / (b2 * (r2 * m2 + b1 * m1))
        + 1.0 / (b1 * (r1 * m1 + b2 * m2))
        + r1 * m1 / (b2 * (r2 * m2 + m1).powi(2))
        + r2 * m2 / (b1 * (r1 * m1 + m2).powi(2));
    v -= (1.0 / (m1 + m2 * r2) + 1.0 / (m2 + m1 * r1)) / (b1 * b2);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn load(rho: f64, mu: f64) -> ServerLoad {
        ServerLoad::new(rho, mu).unwrap()
    }

    fn theta(t: f64) -> GammaParam {
        GammaParam::new(t).unwrap()
    }

    #[test]
    fn load_validation() {
        assert_eq!(
            ServerLoad::new(0.0, 1.0),
            Err(Error::InvalidUtilization(0.0))
        );
        assert_eq!(
            ServerLoad::new(1.0, 1.0),
            Err(Error::InvalidUtilization(1.0))
        );
        assert_eq!(
            ServerLoad::new(0.5, 0.0),
            Err(Error::InvalidServiceRate(0.0))
        );
        assert!(ServerLoad::new(f64::NAN, 1.0).is_err());
        let l = ServerLoad::from_rates(5.0, 10.0).unwrap();
        assert_eq!(l.rho(), 0.5);
        assert_eq!(l.arrival_rate(), 5.0);
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(20.0, vec![0.5, 0.5], vec![20.0, 20.0]).is_ok());
        assert!(matches!(
            SystemConfig::new(20.0, vec![0.6, 0.5], vec![20.0, 20.0]),
            Err(Error::InvalidRouting(_))
        ));
        assert!(matches!(
            SystemConfig::new(20.0, vec![1.0], vec![20.0, 20.0]),
            Err(Error::InvalidRouting(_))
        ));
        assert!(matches!(
            SystemConfig::new(20.0, vec![1.2, -0.2], vec![20.0, 20.0]),
            Err(Error::InvalidRouting(_))
        ));
        assert_eq!(
            SystemConfig::new(30.0, vec![1.0, 0.0], vec![20.0, 20.0]),
            Err(Error::UnstableServer { index: 0, rho: 1.5 })
        );
        // an idle server may be slower than the total load
        assert!(SystemConfig::new(10.0, vec![1.0, 0.0], vec![20.0, 1.0]).is_ok());
        assert!(SystemConfig::new_allow_unstable(30.0, vec![1.0, 0.0], vec![20.0, 20.0]).is_ok());
        assert_eq!(
            SystemConfig::new(0.0, vec![1.0], vec![1.0]),
            Err(Error::InvalidArrivalRate(0.0))
        );
    }

    #[test]
    fn idle_servers_are_dropped() {
        let cfg = SystemConfig::new(10.0, vec![1.0, 0.0], vec![20.0, 7.0]).unwrap();
        let loads = cfg.active_loads().unwrap();
        assert_eq!(loads, vec![load(0.5, 20.0)]);
        assert_relative_eq!(
            system_exact_mean(&cfg).unwrap(),
            0.175,
            max_relative = 1e-14
        );
    }

    #[test]
    fn single_server_mean_values() {
        assert_relative_eq!(
            single_server_mean(&load(0.5, 20.0)),
            0.175,
            max_relative = 1e-14
        );
        let m = single_server_mean(&load(0.531010, 1.0));
        assert!((m - 3.48444).abs() < 1e-3);
        assert!((m - 3.48453).abs() < 1e-3);
        for k in [0.5, 2.0, 7.0] {
            assert_relative_eq!(
                single_server_mean(&load(0.3, 4.0 * k)),
                single_server_mean(&load(0.3, 4.0)) / k,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn tail_properties() {
        let l = load(0.4, 3.0);
        let tail = single_server_tail(&l);
        assert_relative_eq!(tail.evaluate(0.0), 1.0, max_relative = 1e-14);
        let mut prev = 1.0 + 1e-15;
        for k in 0..2000 {
            let v = tail.evaluate(k as f64 * 0.01);
            assert!(v <= prev + 1e-15, "tail increases at {k}");
            prev = v;
        }
    }

    #[test]
    fn tail_integrates_to_mean_on_grid() {
        for &rho in &[0.05, 0.2, 0.4, 0.6, 0.8, 0.95] {
            for &mu in &[0.3, 1.0, 4.0] {
                let l = load(rho, mu);
                assert_relative_eq!(
                    single_server_tail(&l).integrate().unwrap(),
                    single_server_mean(&l),
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let pdf = single_server_pdf(&load(0.4, 10.0));
        assert_relative_eq!(pdf.integrate().unwrap(), 1.0, max_relative = 1e-12);
        assert!(pdf.evaluate(0.0).abs() < 1e-12);
    }

    #[test]
    fn exact_mean_values() {
        assert_eq!(exact_mean(&[]), Err(Error::NoActiveServers));
        assert_relative_eq!(
            exact_mean(&[load(0.5, 20.0)]).unwrap(),
            0.175,
            max_relative = 1e-14
        );

        let sym = exact_mean(&[load(0.53, 1.0), load(0.53, 1.0)]).unwrap();
        assert!((sym - 2.221055).abs() < 1e-5, "{sym}");

        let asym = exact_mean(&[
            ServerLoad::from_rates(14.735, 25.0).unwrap(),
            ServerLoad::from_rates(6.465, 15.0).unwrap(),
        ])
        .unwrap();
        assert!((asym - 0.1114).abs() < 0.002, "{asym}");
    }

    #[test]
    fn exact_matches_quadrature() {
        let pairs = [
            (load(0.53, 1.0), load(0.53, 1.0)),
            (load(0.2, 20.0), load(0.2, 20.0)),
            (load(0.8294, 25.0), load(0.031, 15.0)),
            (load(0.5, 25.0), load(0.5, 25.0)),
        ];
        for (a, b) in pairs {
            let exact = exact_mean(&[a, b]).unwrap();
            let quad = quadrature_mean(&[a, b]).unwrap();
            assert_relative_eq!(exact, quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn transcribed_formula_disagrees() {
        let l = load(0.53, 1.0);
        let printed = transcribed_two_server_formula(&l, &l);
        assert!(printed > single_server_mean(&l));
        assert!((printed - exact_mean(&[l, l]).unwrap()).abs() > 1.0);
    }

    #[test]
    fn gamma_tail_basics() {
        let t = theta(0.7);
        assert_eq!(gamma_tail(t).evaluate(0.0), 1.0);
        assert_relative_eq!(
            gamma_tail(t).integrate().unwrap(),
            1.4,
            max_relative = 1e-14
        );
        assert!(GammaParam::new(0.0).is_err());
        assert!(GammaParam::new(-1.0).is_err());
    }

    #[test]
    fn approx_two_values() {
        let t = theta(0.3);
        assert_relative_eq!(approx_mean_two(t, t), 1.25 * 0.3, max_relative = 1e-15);
        assert_relative_eq!(
            approx_mean_two(theta(0.0875), theta(0.0875)),
            0.109375,
            max_relative = 1e-14
        );
        let v = approx_mean_two(theta(0.069690), theta(0.116148));
        assert!((v - 0.10752).abs() < 1e-4, "{v}");
    }

    #[test]
    fn approx_n_values() {
        assert_relative_eq!(
            approx_mean_n(&[theta(0.4)]).unwrap(),
            0.8,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            approx_mean_n(&[theta(0.0875), theta(0.0875)]).unwrap(),
            0.109375,
            max_relative = 1e-13
        );
        assert_eq!(approx_mean_n(&[]), Err(Error::NoActiveServers));

        // ∫(1+x)³e^{-3x} by quadrature
        let oracle = quadrature::integrate(
            |x| (1.0 + x).powi(3) * (-3.0 * x).exp(),
            0.0,
            40.0,
            1e-13,
            0.0,
        )
        .unwrap()
        .value;
        let three = approx_mean_n(&[theta(1.0); 3]).unwrap();
        assert_relative_eq!(three, oracle, max_relative = 1e-10);
        // 1/3 + 3/9 + 3·2/27 + 6/81
        assert_relative_eq!(
            three,
            1.0 / 3.0 + 1.0 / 3.0 + 6.0 / 27.0 + 6.0 / 81.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn theta_values() {
        assert_relative_eq!(
            theta_of(&load(0.5, 20.0)).theta(),
            0.0875,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            theta_of(&load(0.3, 6.0)).theta(),
            theta_of(&load(0.3, 2.0)).theta() / 3.0,
            max_relative = 1e-14
        );
        let t = theta_of(&ServerLoad::from_rates(13.235, 25.0).unwrap()).theta();
        assert!((t - 0.069690).abs() < 1e-6, "{t}");
    }

    #[test]
    fn gamma_error_behaviour() {
        let mid = gamma_approx_error(&load(0.5, 10.0));
        assert!(mid <= 0.03, "{mid}");
        let skewed = gamma_approx_error(&load(0.1, 10.0));
        assert!(skewed > mid, "{skewed} <= {mid}");
    }

    #[test]
    fn adding_a_server_helps() {
        let base = [load(0.3, 2.0), load(0.7, 1.0)];
        let before = exact_mean(&base).unwrap();
        for extra in [load(0.05, 0.1), load(0.5, 5.0), load(0.99, 1.0)] {
            let mut more = base.to_vec();
            more.push(extra);
            assert!(exact_mean(&more).unwrap() <= before + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn approx_two_symmetric_and_homogeneous(a in 1e-3f64..10.0, b in 1e-3f64..10.0, k in 0.1f64..10.0) {
            let v = approx_mean_two(theta(a), theta(b));
            prop_assert!((v - approx_mean_two(theta(b), theta(a))).abs() <= 1e-15 * v);
            let scaled = approx_mean_two(theta(k * a), theta(k * b));
            prop_assert!((scaled - k * v).abs() <= 1e-13 * scaled);
        }

        #[test]
        fn five_eighths(t in 1e-4f64..1e4) {
            prop_assert!((approx_mean_two(theta(t), theta(t)) / (2.0 * t) - 0.625).abs() <= 2.0 * f64::EPSILON);
        }

        #[test]
        fn gamma_tail_monotone_in_theta(t2 in 1e-2f64..5.0, d in 1e-6f64..5.0, x in 0.0f64..50.0) {
            let t1 = t2 + d;
            prop_assert!(gamma_tail(theta(t1)).evaluate(x) >= gamma_tail(theta(t2)).evaluate(x));
        }

        #[test]
        fn tail_integral_is_mean(rho in 0.01f64..0.99, mu in 0.1f64..50.0) {
            let l = load(rho, mu);
            let m = single_server_mean(&l);
            prop_assert!((single_server_tail(&l).integrate().unwrap() - m).abs() <= 1e-9 * m);
        }

        #[test]
        fn extra_server_never_hurts(r1 in 0.05f64..0.95, m1 in 0.5f64..5.0, r2 in 0.05f64..0.95, m2 in 0.5f64..5.0) {
            let a = load(r1, m1);
            let b = load(r2, m2);
            let pair = exact_mean(&[a, b]).unwrap();
            prop_assert!(pair <= single_server_mean(&a) * (1.0 + 1e-12));
            prop_assert!(pair <= single_server_mean(&b) * (1.0 + 1e-12));
        }
    }
}
