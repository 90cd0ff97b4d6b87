//! Estimation of frequency-sensitivity coefficients from synchronized time
//! series by statistical correlation of noise.
//!
//! The crate provides:
//!
//! * two-sample (Allan) variance and covariance statistics, normal and
//!   overlapping, with equivalent degrees of freedom ([`stats`]);
//! * seeded power-law noise generators with slope self-verification
//!   ([`noise`]);
//! * the sensitivity-coefficient estimator: per-tau curves, confidence,
//!   the adjacent-difference variant, scalar extraction, and uncertainty
//!   budgets ([`estimator`]);
//! * timing-mismatch modelling, detection, and compensation
//!   ([`asynchrony`]);
//! * a clock-record simulator with preset scenarios ([`sim`]);
//! * CSV/config I/O and the `nsc` command line ([`io`], [`cli`]).

pub mod asynchrony;
pub mod cli;
pub mod error;
pub mod estimator;
mod fft;
pub mod io;
pub mod noise;
pub mod series;
pub mod sim;
pub mod stats;
mod util;

pub use error::{Error, Result};
pub use estimator::{Budget, BudgetEntry, KCurve, KCurvePoint, KEstimate, Style, Variant};
pub use noise::{NoiseKind, NoiseSpec};
pub use series::{block_average, AveragedSeries, TauGrid, TimeSeries};
