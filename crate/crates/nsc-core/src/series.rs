//! Uniformly sampled records and block averaging.
//!
//! A [`TimeSeries`] holds a record sampled at the base period `tau0`;
//! [`block_average`] produces the non-overlapping `m`-sample means that all
//! averaging-time statistics are defined on. Remainder samples when the
//! length is not divisible by `m` are discarded from the tail.

use crate::error::{Error, Result};
use crate::util::NeumaierSum;

/// A uniformly sampled sequence at base period `tau0` (seconds).
///
/// Values are dimensionless fractional frequency or independent-variable
/// units; sampling is uniform by construction and gap-free.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    tau0: f64,
}

impl TimeSeries {
    /// Wraps a record. Requires at least two samples and a positive period.
    pub fn new(values: Vec<f64>, tau0: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData {
                what: "time series",
                need: 2,
                have: values.len(),
            });
        }
        if tau0.is_nan() || tau0 <= 0.0 || !tau0.is_finite() {
            return Err(Error::Domain(format!("tau0 must be positive, got {tau0}")));
        }
        Ok(TimeSeries { values, tau0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Number of raw samples (`M0`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The adjacent-difference record `v[j+1] - v[j]`, one sample shorter.
    pub fn differenced(&self) -> Result<TimeSeries> {
        let d: Vec<f64> = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        TimeSeries::new(d, self.tau0)
    }

    /// A contiguous sub-record, keeping the base period.
    pub fn segment(&self, start: usize, len: usize) -> Result<TimeSeries> {
        if start + len > self.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "segment {start}..{} exceeds length {}",
                start + len,
                self.values.len()
            )));
        }
        TimeSeries::new(self.values[start..start + len].to_vec(), self.tau0)
    }

    /// Same values reinterpreted at a different base period.
    pub fn retimed(mut self, tau0: f64) -> Result<TimeSeries> {
        if tau0.is_nan() || tau0 <= 0.0 || !tau0.is_finite() {
            return Err(Error::Domain(format!("tau0 must be positive, got {tau0}")));
        }
        self.tau0 = tau0;
        Ok(self)
    }
}

/// Non-overlapping `m`-sample means of a source record: the series at
/// averaging time `tau = m * tau0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSeries {
    values: Vec<f64>,
    m: usize,
    tau: f64,
}

impl AveragedSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Averaging factor.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Averaging time in seconds.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of averaged samples (`M = floor(M0 / m)`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Averages `series` over consecutive blocks of `m` samples.
///
/// `M = floor(M0 / m)` whole blocks are kept; trailing remainder samples
/// are dropped. Admissible `m` is `1..=floor(M0 / 2)` so that at least two
/// averaged samples remain.
pub fn block_average(series: &TimeSeries, m: usize) -> Result<AveragedSeries> {
    let m0 = series.len();
    if m < 1 || m > m0 / 2 {
        return Err(Error::OutOfRange {
            what: "averaging factor m",
            got: m as i64,
            lo: 1,
            hi: (m0 / 2) as i64,
        });
    }
    let big_m = m0 / m;
    let inv = 1.0 / m as f64;
    let mut out = Vec::with_capacity(big_m);
    for block in series.values().chunks_exact(m) {
        if m == 1 {
            out.push(block[0]);
        } else {
            let mut acc = NeumaierSum::default();
            for &v in block {
                acc.add(v);
            }
            out.push(acc.total() * inv);
        }
    }
    debug_assert_eq!(out.len(), big_m);
    Ok(AveragedSeries {
        values: out,
        m,
        tau: m as f64 * series.tau0(),
    })
}

/// Strictly increasing averaging factors: the tau axis of a sensitivity
/// curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauGrid {
    factors: Vec<usize>,
}

impl TauGrid {
    /// Builds a grid from explicit factors; they must be positive and
    /// strictly increasing.
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Domain("tau grid must be nonempty".into()));
        }
        if factors[0] < 1 {
            return Err(Error::Domain("averaging factors start at 1".into()));
        }
        if factors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "averaging factors must be strictly increasing".into(),
            ));
        }
        Ok(TauGrid { factors })
    }

    /// The default 1-2-5 per-decade progression up to `floor(m0 / 4)`.
    pub fn default_for(m0: usize) -> Result<Self> {
        let cap = m0 / 4;
        if cap < 1 {
            return Err(Error::InsufficientData {
                what: "default tau grid",
                need: 4,
                have: m0,
            });
        }
        let mut factors = Vec::new();
        let mut decade = 1usize;
        'outer: loop {
            for step in [1usize, 2, 5] {
                match step.checked_mul(decade) {
                    Some(f) if f <= cap => factors.push(f),
                    _ => break 'outer,
                }
            }
            match decade.checked_mul(10) {
                Some(d) => decade = d,
                None => break,
            }
        }
        TauGrid::new(factors)
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// Grid restricted to `lo..=hi` (by factor value).
    pub fn restricted(&self, lo: usize, hi: usize) -> Result<Self> {
        let factors: Vec<usize> = self
            .factors
            .iter()
            .copied()
            .filter(|&f| f >= lo && f <= hi)
            .collect();
        TauGrid::new(factors)
    }
}
