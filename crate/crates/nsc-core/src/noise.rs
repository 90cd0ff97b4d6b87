//! Seeded generators for the three power-law frequency-noise types, with
//! slope self-verification.
//!
//! Levels are specified as the two-sample deviation at the base period and
//! converted internally to the generator's innovation scale:
//!
//! * white: independent Gaussian samples, innovation scale = level;
//! * random walk: running sum of independent Gaussians, innovation scale =
//!   level * sqrt(2) (adjacent differences are the innovations, so the
//!   deviation at tau0 is scale / sqrt(2));
//! * flicker: half-order fractional integration of white noise, filter
//!   truncated to min(n, 2^16) taps with a full-filter warm-up discarded;
//!   innovation scale = level * sqrt(pi/2) from the variance of the
//!   half-differenced process, 4/pi.
//!
//! The random source is ChaCha8 keyed from the 64-bit seed: a fixed,
//! counter-based stream, reproducible across runs and machines. Generation
//! is a pure function of (spec, n).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::convolve;
use crate::series::{TauGrid, TimeSeries};
use crate::stats::overlap_adev2;

/// The three power-law noise kinds: two-sample variance proportional to
/// 1/tau, constant, and tau respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    White,
    Flicker,
    RandomWalk,
}

impl NoiseKind {
    /// Confidence-model constant for this noise kind.
    pub fn default_k_m(self) -> f64 {
        match self {
            NoiseKind::White => 0.87,
            NoiseKind::Flicker => 0.77,
            NoiseKind::RandomWalk => 0.75,
        }
    }

    /// Short lowercase token used in files and on the command line.
    pub fn token(self) -> &'static str {
        match self {
            NoiseKind::White => "wfn",
            NoiseKind::Flicker => "ffn",
            NoiseKind::RandomWalk => "rwn",
        }
    }

    pub fn from_token(s: &str) -> Option<NoiseKind> {
        match s {
            "wfn" => Some(NoiseKind::White),
            "ffn" => Some(NoiseKind::Flicker),
            "rwn" => Some(NoiseKind::RandomWalk),
            _ => None,
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// A reproducible noise recipe: kind, deviation at the base period, seed,
/// and the confidence-model constant (defaulted per kind).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
    pub k_m: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, level: f64, seed: u64) -> Result<Self> {
        if level.is_nan() || level <= 0.0 || !level.is_finite() {
            return Err(Error::Domain(format!(
                "noise level must be positive, got {level}"
            )));
        }
        Ok(NoiseSpec {
            kind,
            level,
            seed,
            k_m: kind.default_k_m(),
        })
    }

    pub fn with_k_m(mut self, k_m: f64) -> Result<Self> {
        if k_m.is_nan() || k_m <= 0.0 || k_m > 1.0 {
            return Err(Error::Domain(format!("K_M must be in (0, 1], got {k_m}")));
        }
        self.k_m = k_m;
        Ok(self)
    }
}

/// Unit-variance Gaussian stream for a seed. All generators draw from this
/// one source so constructional identities (random walk = running sum of
/// white) hold bit-for-bit.
pub(crate) fn gaussian_stream(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Truncated impulse response of half-order integration:
/// h[0] = 1, h[k] = h[k-1] * (k - 1/2) / k.
fn half_integration_taps(len: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(len);
    let mut v = 1.0f64;
    h.push(v);
    for k in 1..len {
        v *= (k as f64 - 0.5) / k as f64;
        h.push(v);
    }
    h
}

const FLICKER_MAX_TAPS: usize = 1 << 16;

/// Generates `n` samples of the specified noise at base period 1.0.
/// Deterministic for fixed `(spec, n)`; use [`TimeSeries::retimed`] to bind
/// a physical base period.
pub fn generate(spec: &NoiseSpec, n: usize) -> Result<TimeSeries> {
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "noise generation",
            need: 2,
            have: n,
        });
    }
    let values = match spec.kind {
        NoiseKind::White => {
            let s = spec.level;
            let mut g = gaussian_stream(spec.seed, n);
            for v in &mut g {
                *v *= s;
            }
            g
        }
        NoiseKind::RandomWalk => {
            let q = spec.level * std::f64::consts::SQRT_2;
            let mut g = gaussian_stream(spec.seed, n);
            for v in &mut g {
                *v *= q;
            }
            let mut acc = 0.0f64;
            for v in &mut g {
                acc += *v;
                *v = acc;
            }
            g
        }
        NoiseKind::Flicker => {
            let taps = FLICKER_MAX_TAPS.min(n);
            let s = spec.level * (std::f64::consts::PI / 2.0).sqrt();
            let mut w = gaussian_stream(spec.seed, n + taps);
            for v in &mut w {
                *v *= s;
            }
            let h = half_integration_taps(taps);
            let conv = convolve(&w, &h);
            // Keep only outputs with the full filter behind them.
            conv[taps - 1..taps - 1 + n].to_vec()
        }
    };
    TimeSeries::new(values, 1.0)
}

/// Least-squares slope of log overlapping deviation against log tau on the
/// default grid restricted to factors `m_lo ..= m_hi`.
///
/// White, flicker, and random-walk noise give slopes near -1/2, 0, +1/2.
pub fn verify_slope(series: &TimeSeries, m_lo: usize, m_hi: usize) -> Result<f64> {
    let m0 = series.len();
    if m_hi > m0 / 4 {
        return Err(Error::OutOfRange {
            what: "slope fit upper factor",
            got: m_hi as i64,
            lo: 1,
            hi: (m0 / 4) as i64,
        });
    }
    let grid = TauGrid::default_for(m0)?;
    let factors: Vec<usize> = grid
        .factors()
        .iter()
        .copied()
        .filter(|&m| m >= m_lo && m <= m_hi)
        .collect();
    if factors.len() < 3 {
        return Err(Error::InsufficientData {
            what: "slope fit grid points",
            need: 3,
            have: factors.len(),
        });
    }
    let mut xs = Vec::with_capacity(factors.len());
    let mut ys = Vec::with_capacity(factors.len());
    for &m in &factors {
        let var = overlap_adev2(series, m)?;
        if var.is_nan() || var <= 0.0 {
            return Err(Error::Domain(format!(
                "slope undefined: zero deviation at m = {m}"
            )));
        }
        xs.push((m as f64 * series.tau0()).ln());
        ys.push(var.sqrt().ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    Ok(sxy / sxx)
}

/// Classifies a record by its deviation slope over factors 1..=100
/// (capped by the record length): thresholds at -1/4 and +1/4. `None` when
/// the slope cannot be fitted.
pub fn classify(series: &TimeSeries) -> Option<NoiseKind> {
    let hi = 100.min(series.len() / 4);
    let slope = verify_slope(series, 1, hi).ok()?;
    Some(if slope <= -0.25 {
        NoiseKind::White
    } else if slope >= 0.25 {
        NoiseKind::RandomWalk
    } else {
        NoiseKind::Flicker
    })
}
