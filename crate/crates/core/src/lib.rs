//! Average Age of Information (AoI) for `n` parallel, non-preemptive FCFS
//! exponential servers fed by randomly routed Poisson arrivals.
//!
//! The crate is split into:
//!
//! * [`exp_poly`]: exact algebra over sums of `p(x)·exp(-c·x)` terms, which
//!   is closed under products and integrates in closed form on `[0, ∞)`.
//! * [`analytic`]: single-server M/M/1 AoI mean and tail, the exact `n`-server
//!   mean as the integral of the product of per-server tails, and the
//!   shape-2 gamma approximation.
//! * [`optimize`]: the optimal single-server utilization, the symmetric
//!   two-server optimum, optimal routing under the gamma approximation and a
//!   multi-start minimizer of the exact mean.
//! * [`simulate`]: a seeded discrete-event simulator that measures the
//!   combined AoI sawtooth.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration used as an
//!   independent check on the closed forms.

#![forbid(unsafe_code)]

pub mod analytic;
pub mod error;
pub mod exp_poly;
pub mod optimize;
pub mod quadrature;
pub mod simulate;

pub use analytic::{GammaParam, ServerLoad, SystemConfig};
pub use error::{Error, Result};
pub use exp_poly::{ExpSum, ExpTerm};
pub use optimize::RoutingSolution;
pub use simulate::{SimConfig, SimResult};
