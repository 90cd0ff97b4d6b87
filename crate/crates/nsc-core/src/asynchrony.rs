//! Timing mismatch between the frequency record and the variable record:
//! pure delay, integral-mean smearing, and their combination.
//!
//! The driving value at record index `j` is modelled as the measured
//! record shifted by `D` base periods and/or averaged over a centered
//! window of `I` base periods. Both transforms are reproduced here so a
//! grid search can find the pair that best explains the data; the
//! closed-form curves predict how an uncompensated mismatch bends the
//! sensitivity curve at small tau.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{k_curve, KCurve, Style, Variant};
use crate::series::{TauGrid, TimeSeries};

use crate::util::NeumaierSum;

/// Which mismatch components a spec carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsynchronyMode {
    Delay,
    Integral,
    Both,
}

/// A timing mismatch: delay of `D` base periods (signed) and/or an
/// integral mean over `I` base periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsynchronySpec {
    mode: AsynchronyMode,
    delay_steps: i64,
    integral_steps: usize,
}

impl AsynchronySpec {
    pub fn delay(d: i64) -> Self {
        AsynchronySpec {
            mode: AsynchronyMode::Delay,
            delay_steps: d,
            integral_steps: 1,
        }
    }

    pub fn integral(i: usize) -> Result<Self> {
        if i < 1 {
            return Err(Error::Domain("integral window must be at least 1".into()));
        }
        Ok(AsynchronySpec {
            mode: AsynchronyMode::Integral,
            delay_steps: 0,
            integral_steps: i,
        })
    }

    pub fn both(d: i64, i: usize) -> Result<Self> {
        if i < 1 {
            return Err(Error::Domain("integral window must be at least 1".into()));
        }
        Ok(AsynchronySpec {
            mode: AsynchronyMode::Both,
            delay_steps: d,
            integral_steps: i,
        })
    }

    pub fn mode(&self) -> AsynchronyMode {
        self.mode
    }

    pub fn delay_steps(&self) -> i64 {
        self.delay_steps
    }

    pub fn integral_steps(&self) -> usize {
        self.integral_steps
    }
}

/// Shifts a record by `d` base periods: positive `d` reads the record `d`
/// steps ahead (`out[j] = x[j + d]`), negative `d` keeps the head and
/// drops the tail. The output is `|d|` samples shorter.
///
/// Also returns the offset at which a companion record aligns with the
/// output, so the caller can truncate it consistently: pair
/// `(companion[j + offset], out[j])`.
pub fn apply_delay(x: &TimeSeries, d: i64) -> Result<(TimeSeries, usize)> {
    let m0 = x.len();
    let mag = d.unsigned_abs() as usize;
    if mag >= m0 {
        return Err(Error::OutOfRange {
            what: "delay steps",
            got: d,
            lo: -(m0 as i64 - 1),
            hi: m0 as i64 - 1,
        });
    }
    let kept = m0 - mag;
    let (series, offset) = if d >= 0 {
        (x.segment(mag, kept)?, 0)
    } else {
        (x.segment(0, kept)?, mag)
    };
    Ok((series, offset))
}

/// Alignment offset of the centered window output relative to its input:
/// output sample `j` is centered on input index `j + offset`.
pub(crate) fn integral_center_offset(i: usize) -> usize {
    if i % 2 == 1 {
        (i - 1) / 2
    } else {
        i / 2
    }
}

/// Centered moving average over a window of `i` base periods.
///
/// Odd `i` averages `i` samples around an integer center. Even `i` has its
/// natural center on a half-step; the window is realized symmetrically as
/// `i + 1` taps with half weight on the two ends (weights sum to `i`).
/// Edge samples without a full window are dropped: the output has
/// `M0 - i + 1` samples for odd `i` and `M0 - i` for even `i`.
pub fn apply_integral_mean(x: &TimeSeries, i: usize) -> Result<TimeSeries> {
    let m0 = x.len();
    // Window of at most half the record, rounding up.
    if i < 1 || i > m0.div_ceil(2) {
        return Err(Error::OutOfRange {
            what: "integral window",
            got: i as i64,
            lo: 1,
            hi: m0.div_ceil(2) as i64,
        });
    }
    if i == 1 {
        return Ok(x.clone());
    }
    let v = x.values();
    // Window sums via prefixes of (v - v[0]); the offset is restored after
    // division so a constant record stays exactly constant.
    let v0 = v[0];
    let mut prefix = Vec::with_capacity(m0 + 1);
    let mut acc = NeumaierSum::default();
    prefix.push(0.0);
    for &t in v {
        acc.add(t - v0);
        prefix.push(acc.total());
    }
    let inv = 1.0 / i as f64;
    let odd = i % 2 == 1;
    let out_len = if odd { m0 - i + 1 } else { m0 - i };
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let sum = if odd {
            prefix[j + i] - prefix[j]
        } else {
            (prefix[j + i + 1] - prefix[j]) - 0.5 * ((v[j] - v0) + (v[j + i] - v0))
        };
        out.push(sum * inv + v0);
    }
    TimeSeries::new(out, x.tau0())
}

/// Applies a full mismatch spec (delay, then integral mean); returns the
/// transformed record and the companion alignment offset.
pub fn apply_asynchrony(x: &TimeSeries, spec: &AsynchronySpec) -> Result<(TimeSeries, usize)> {
    let (shifted, offset) = apply_delay(x, spec.delay_steps)?;
    let smeared = apply_integral_mean(&shifted, spec.integral_steps)?;
    Ok((
        smeared,
        offset + integral_center_offset(spec.integral_steps),
    ))
}

/// Closed-form sensitivity curve under a pure delay `tau_dly` (seconds):
/// zero below `|tau_dly|/2`, `(|tau_dly|/(2 tau) - 1) k` up to `|tau_dly|`,
/// then `(1 - 3|tau_dly|/(2 tau)) k`, approaching `k` from below.
pub fn theory_k_delay(tau: f64, tau_dly: f64, k: f64) -> f64 {
    assert!(tau > 0.0, "tau must be positive");
    let d = tau_dly.abs();
    if tau < d / 2.0 {
        0.0
    } else if tau < d {
        (d / (2.0 * tau) - 1.0) * k
    } else {
        (1.0 - 3.0 * d / (2.0 * tau)) * k
    }
}

/// Closed-form sensitivity curve under integral-mean smearing over
/// `tau_int` (seconds): zero below `tau_int/4`,
/// `(tau_int - 4 tau)^2 / (8 tau tau_int) k` up to `tau_int/2`, then
/// `(1 - (3/8) tau_int/tau) k`.
pub fn theory_k_integral(tau: f64, tau_int: f64, k: f64) -> f64 {
    assert!(tau > 0.0, "tau must be positive");
    assert!(tau_int > 0.0, "tau_int must be positive");
    if tau < tau_int / 4.0 {
        0.0
    } else if tau < tau_int / 2.0 {
        let d = tau_int - 4.0 * tau;
        d * d / (8.0 * tau * tau_int) * k
    } else {
        (1.0 - 0.375 * tau_int / tau) * k
    }
}

/// Probe factors used by default when scoring compensation candidates;
/// mismatch signatures are largest at small tau.
pub const DEFAULT_PROBES: [usize; 4] = [1, 2, 4, 8];

/// Result of a compensation search.
#[derive(Debug, Clone)]
pub struct Compensation {
    pub delay: i64,
    pub integral: usize,
    /// Mean over probe factors of the residual two-sample variance of
    /// `y - K x'`, normalized by the variance of `y`.
    pub score: f64,
    /// Full sensitivity curve of the winning candidate.
    pub curve: KCurve,
}

/// Prefix sums of `v[k] - v[0]`; window sums come out as prefix
/// differences with the centering constant cancelling in the second
/// difference, so any slice offset can be scored from one array.
fn scoring_prefix(v: &[f64]) -> Vec<f64> {
    let v0 = v[0];
    let mut acc = NeumaierSum::default();
    let mut p = Vec::with_capacity(v.len() + 1);
    p.push(0.0);
    for &t in v {
        acc.add(t - v0);
        p.push(acc.total());
    }
    p
}

/// Scores the alignment of `y[ys..ys+len]` against `x[xs..xs+len]` (both
/// given as prefix arrays): mean over probe factors of the residual
/// two-sample variance of `y - K x` at the minimizing `K`, normalized by
/// the variance of `y`. The overlap divisors cancel in the ratio.
fn alignment_score(
    py: &[f64],
    ys: usize,
    px: &[f64],
    xs: usize,
    len: usize,
    probes: &[usize],
) -> Result<f64> {
    let mut total = 0.0;
    let mut used = 0usize;
    for &m in probes {
        if len < 2 * m + 1 {
            continue;
        }
        let windows = len - 2 * m + 1;
        let mut syy = NeumaierSum::default();
        let mut sxx = NeumaierSum::default();
        let mut sxy = NeumaierSum::default();
        for j in 0..windows {
            let dy = (py[ys + j + 2 * m] - py[ys + j + m]) - (py[ys + j + m] - py[ys + j]);
            let dx = (px[xs + j + 2 * m] - px[xs + j + m]) - (px[xs + j + m] - px[xs + j]);
            syy.add(dy * dy);
            sxx.add(dx * dx);
            sxy.add(dy * dx);
        }
        let (syy, sxx, sxy) = (syy.total(), sxx.total(), sxy.total());
        if sxx < 1e-300 || syy < 1e-300 {
            return Err(Error::DegenerateNiv { m });
        }
        total += 1.0 - (sxy * sxy) / (syy * sxx);
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientData {
            what: "probe factors",
            need: 1,
            have: 0,
        });
    }
    Ok(total / used as f64)
}

/// Exhaustive search for the mismatch `(D, I)` that best aligns `x` with
/// `y`: each candidate transforms `x`, and the residual two-sample
/// variance of `y - K x'` at the probe factors (normalized by the
/// variance of `y`) is minimized. Ties break toward smaller `|D|`, then
/// smaller `I`, then smaller `D`.
pub fn compensate(
    y: &TimeSeries,
    x: &TimeSeries,
    d_range: RangeInclusive<i64>,
    i_range: RangeInclusive<usize>,
    probes: &[usize],
) -> Result<Compensation> {
    if y.len() != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "y and x lengths differ: {} vs {}",
            y.len(),
            x.len()
        )));
    }
    if d_range.is_empty() || i_range.is_empty() {
        return Err(Error::Domain("empty compensation search range".into()));
    }
    if probes.is_empty() {
        return Err(Error::Domain("no probe factors".into()));
    }
    // Delaying then windowing equals slicing the windowed record, so each
    // integral width is transformed and prefix-summed once and every delay
    // candidate reuses the arrays.
    type Scored = Vec<((i64, usize), Result<f64>)>;
    let py = scoring_prefix(y.values());
    let ds: Vec<i64> = d_range.collect();
    let is: Vec<usize> = i_range.collect();
    let scored: Scored = is
        .into_par_iter()
        .flat_map(|i| {
            let per_i = |i: usize| -> Result<Scored> {
                let xt = apply_integral_mean(x, i)?;
                let px = scoring_prefix(xt.values());
                let c = integral_center_offset(i);
                Ok(ds
                    .iter()
                    .map(|&d| {
                        let mag = d.unsigned_abs() as usize;
                        if mag >= xt.len() {
                            return (
                                (d, i),
                                Err(Error::OutOfRange {
                                    what: "delay steps",
                                    got: d,
                                    lo: -(xt.len() as i64 - 1),
                                    hi: xt.len() as i64 - 1,
                                }),
                            );
                        }
                        let xs = d.max(0) as usize;
                        let ys = (-d).max(0) as usize + c;
                        let len = xt.len() - mag;
                        ((d, i), alignment_score(&py, ys, &px, xs, len, probes))
                    })
                    .collect())
            };
            match per_i(i) {
                Ok(v) => v,
                Err(e) => ds
                    .iter()
                    .map(|&d| ((d, i), Err(Error::Domain(format!("integral window {i}: {e}")))))
                    .collect(),
            }
        })
        .collect();

    let mut best: Option<((i64, usize), f64)> = None;
    let mut failures = 0usize;
    let mut last_error = String::new();
    for ((d, i), res) in &scored {
        match res {
            Ok(score) => {
                let better = match best {
                    None => true,
                    Some(((bd, bi), bs)) => {
                        (*score, d.unsigned_abs(), *i, *d) < (bs, bd.unsigned_abs(), bi, bd)
                    }
                };
                if better {
                    best = Some(((*d, *i), *score));
                }
            }
            Err(e) => {
                failures += 1;
                last_error = e.to_string();
            }
        }
    }

    let ((delay, integral), score) = best.ok_or_else(|| {
        Error::CompensationFailed(format!(
            "all {failures} candidates degenerate; last error: {last_error}"
        ))
    })?;

    let (shifted, offset) = apply_delay(x, delay)?;
    let xt = apply_integral_mean(&shifted, integral)?;
    let yt = y.segment(offset + integral_center_offset(integral), xt.len())?;
    let mut curve = k_curve(
        &yt,
        &xt,
        &TauGrid::default_for(xt.len())?,
        Style::Overlap,
        Variant::Nsc,
        None,
    )?;
    curve.provenance = ("y".into(), format!("x[D={delay},I={integral}]"));
    Ok(Compensation {
        delay,
        integral,
        score,
        curve,
    })
}
