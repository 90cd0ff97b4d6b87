//! Sensitivity-coefficient estimation from synchronized records.
//!
//! For a frequency record `y` and an independent-variable record `x`, the
//! coefficient at averaging time tau is the ratio of their two-sample
//! covariance to the two-sample variance of `x`. This is the exact
//! minimizer of the two-sample variance of `y - K x` in `K`, so it needs
//! no iteration. A curve of estimates over a tau grid, with confidence
//! from the large-M model, is condensed to a scalar by a deterministic
//! window search, and scalar coefficients combine into root-sum-square
//! uncertainty budgets.
//!
//! All operations are pure; per-tau points and per-variable curves are
//! evaluated independently.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{classify, NoiseKind};
use crate::series::{block_average, TauGrid, TimeSeries};
use crate::stats::{acov, adev2, edf, overlap_acov, overlap_adev2};
use crate::util::{mean, sample_std, NeumaierSum};

/// Denominator variances below this are treated as degenerate rather than
/// divided through.
const DEGENERATE_VAR: f64 = 1e-300;

/// Confidence-model constant when the noise kind of `x` is unknown: the
/// minimum over kinds, for the largest uncertainty.
pub const K_M_FALLBACK: f64 = 0.75;

/// Estimator family: non-overlapping block averages or overlapping
/// windows over the raw record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Normal,
    Overlap,
}

impl Style {
    pub fn token(self) -> &'static str {
        match self {
            Style::Normal => "normal",
            Style::Overlap => "overlap",
        }
    }

    pub fn from_token(s: &str) -> Option<Style> {
        match s {
            "normal" => Some(Style::Normal),
            "overlap" => Some(Style::Overlap),
            _ => None,
        }
    }
}

impl std::fmt::Display for Style {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Estimator variant: plain, or applied to adjacent differences of both
/// records (better behaved when `x` random-walks).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Nsc,
    NscD,
}

impl Variant {
    pub fn token(self) -> &'static str {
        match self {
            Variant::Nsc => "nsc",
            Variant::NscD => "nscd",
        }
    }

    pub fn from_token(s: &str) -> Option<Variant> {
        match s {
            "nsc" => Some(Variant::Nsc),
            "nscd" => Some(Variant::NscD),
            _ => None,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Why a grid point was left out of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmitReason {
    /// Variance of `x` underflowed at this factor.
    DegenerateDenominator,
    /// The record is too short for this factor under the chosen style.
    InsufficientData,
}

impl OmitReason {
    pub fn code(self) -> &'static str {
        match self {
            OmitReason::DegenerateDenominator => "degenerate-denominator",
            OmitReason::InsufficientData => "insufficient-data",
        }
    }

    pub fn from_code(s: &str) -> Option<OmitReason> {
        match s {
            "degenerate-denominator" => Some(OmitReason::DegenerateDenominator),
            "insufficient-data" => Some(OmitReason::InsufficientData),
            _ => None,
        }
    }
}

/// One point of a sensitivity curve.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurvePoint {
    pub m: usize,
    /// Averaging time in seconds, `m * tau0`.
    pub tau: f64,
    /// Estimated coefficient, units of y per unit of x.
    pub k: f64,
    /// One-sigma error bar from the confidence model.
    pub sigma_k: f64,
    /// Sample count the bar was computed with: `floor(M0/m)` for the
    /// normal style, equivalent degrees of freedom for the overlap style.
    pub edf: f64,
}

/// A sensitivity curve over a tau grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurve {
    pub points: Vec<KCurvePoint>,
    pub style: Style,
    pub variant: Variant,
    /// Identifiers of the y and x inputs.
    pub provenance: (String, String),
    /// Grid points dropped, with reasons.
    pub omitted: Vec<(usize, OmitReason)>,
}

impl KCurve {
    /// Validates the nonempty, strictly-increasing-m invariants.
    pub fn new(
        points: Vec<KCurvePoint>,
        style: Style,
        variant: Variant,
        provenance: (String, String),
        omitted: Vec<(usize, OmitReason)>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("curve must have at least one point".into()));
        }
        if points.windows(2).any(|w| w[0].m >= w[1].m) {
            return Err(Error::Domain(
                "curve points must have strictly increasing m".into(),
            ));
        }
        Ok(KCurve {
            points,
            style,
            variant,
            provenance,
            omitted,
        })
    }
}

/// Scalar coefficient extracted from a curve window, with decomposed
/// uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct KEstimate {
    pub k_bar: f64,
    /// Scatter of the points in the selected window.
    pub sigma_bar: f64,
    /// Largest point error bar in the window.
    pub sigma_max: f64,
    /// `sqrt(sigma_bar^2 + sigma_max^2)`.
    pub sigma_total: f64,
    /// Selected window, by averaging factor.
    pub m_lo: usize,
    pub m_hi: usize,
}

/// Relative one-sigma confidence of a coefficient estimate:
/// `sigma_K / K = sqrt((0.47 * sigma_y^2/sigma_yI^2 + 1/K_M) / M)`,
/// where `sigma_yI^2` is the contribution of `x` to the variance of `y`
/// and `M` is the sample count (or equivalent degrees of freedom).
pub fn sigma_k_rel(m_or_edf: f64, ratio_total_to_effect: f64, k_m: f64) -> Result<f64> {
    for (name, v) in [
        ("M", m_or_edf),
        ("variance ratio", ratio_total_to_effect),
        ("K_M", k_m),
    ] {
        if v.is_nan() || v <= 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(((0.47 * ratio_total_to_effect + 1.0 / k_m) / m_or_edf).sqrt())
}

/// Absolute error bar; algebraically `|k| * sigma_k_rel(...)` with the
/// effect variance written as `k^2 sigma_x^2`, well defined at `k = 0`.
fn sigma_k_abs(m_or_edf: f64, sy2: f64, sx2: f64, k: f64, k_m: f64) -> f64 {
    ((0.47 * sy2 / sx2 + k * k / k_m) / m_or_edf).sqrt()
}

struct PointStats {
    k: f64,
    sy2: f64,
    sx2: f64,
    m_eff: f64,
}

fn point_stats(
    y: &TimeSeries,
    x: &TimeSeries,
    m: usize,
    style: Style,
    kind: Option<NoiseKind>,
) -> Result<PointStats> {
    let (sy2, sx2, cov, m_eff) = match style {
        Style::Normal => {
            let ya = block_average(y, m)?;
            let xa = block_average(x, m)?;
            let m_eff = ya.len() as f64;
            (adev2(&ya)?, adev2(&xa)?, acov(&ya, &xa)?, m_eff)
        }
        Style::Overlap => {
            let sy2 = overlap_adev2(y, m)?;
            let sx2 = overlap_adev2(x, m)?;
            let cov = overlap_acov(y, x, m)?;
            let m_eff = match kind {
                Some(kind) => edf(kind, m, y.len())?,
                None => (y.len() / m) as f64,
            };
            (sy2, sx2, cov, m_eff)
        }
    };
    if sx2 < DEGENERATE_VAR {
        return Err(Error::DegenerateNiv { m });
    }
    Ok(PointStats {
        k: cov / sx2,
        sy2,
        sx2,
        m_eff,
    })
}

/// The coefficient estimate at a single averaging factor: the ratio of
/// (overlapping) two-sample covariance of `(y, x)` to the (overlapping)
/// two-sample variance of `x`.
pub fn k_of_tau(y: &TimeSeries, x: &TimeSeries, m: usize, style: Style) -> Result<f64> {
    check_same_len(y, x)?;
    Ok(point_stats(y, x, m, style, None)?.k)
}

fn check_same_len(y: &TimeSeries, x: &TimeSeries) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "y and x lengths differ: {} vs {}",
            y.len(),
            x.len()
        )));
    }
    Ok(())
}

/// Computes the sensitivity curve of `y` against `x` over a tau grid.
///
/// `noise_kind_of_x` feeds the confidence model (its `K_M` constant) and,
/// for the overlap style, the equivalent degrees of freedom. It describes
/// the variable record actually entering the ratio: for the
/// adjacent-difference variant that is the differenced record (a
/// differenced random walk is white). When `None` the kind is classified
/// from that record's deviation slope; if no slope can be fitted the
/// conservative fallback `K_M = 0.75` and `M = floor(M0/m)` is used.
///
/// Grid points that fail per-point preconditions are omitted and recorded
/// rather than failing the curve.
pub fn k_curve(
    y: &TimeSeries,
    x: &TimeSeries,
    grid: &TauGrid,
    style: Style,
    variant: Variant,
    noise_kind_of_x: Option<NoiseKind>,
) -> Result<KCurve> {
    check_same_len(y, x)?;
    let (yp, xp) = match variant {
        Variant::Nsc => (y.clone(), x.clone()),
        Variant::NscD => (y.differenced()?, x.differenced()?),
    };
    let kind = noise_kind_of_x.or_else(|| classify(&xp));
    let mut points = Vec::new();
    let mut omitted = Vec::new();
    for &m in grid.factors() {
        match point_stats(&yp, &xp, m, style, kind) {
            Ok(stats) => {
                let k_m = kind.map(NoiseKind::default_k_m).unwrap_or(K_M_FALLBACK);
                let sigma_k = sigma_k_abs(stats.m_eff, stats.sy2, stats.sx2, stats.k, k_m);
                points.push(KCurvePoint {
                    m,
                    tau: m as f64 * yp.tau0(),
                    k: stats.k,
                    sigma_k,
                    edf: stats.m_eff,
                });
            }
            Err(Error::DegenerateNiv { .. }) => {
                omitted.push((m, OmitReason::DegenerateDenominator));
            }
            Err(Error::InsufficientData { .. }) | Err(Error::OutOfRange { .. }) => {
                omitted.push((m, OmitReason::InsufficientData));
            }
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        if let Some(&(m, OmitReason::DegenerateDenominator)) = omitted
            .iter()
            .find(|(_, r)| *r == OmitReason::DegenerateDenominator)
        {
            return Err(Error::DegenerateNiv { m });
        }
        return Err(Error::InsufficientData {
            what: "curve points",
            need: 1,
            have: 0,
        });
    }
    KCurve::new(
        points,
        style,
        variant,
        ("y".into(), "x".into()),
        omitted,
    )
}

/// One independent curve per variable; a degenerate variable yields an
/// error in its slot without disturbing the others. Results do not depend
/// on evaluation order.
pub fn parallel_curves(
    y: &TimeSeries,
    xs: &[TimeSeries],
    grid: &TauGrid,
    style: Style,
) -> Vec<Result<KCurve>> {
    xs.par_iter()
        .enumerate()
        .map(|(i, x)| {
            k_curve(y, x, grid, style, Variant::Nsc, None).map(|mut c| {
                c.provenance.1 = format!("x[{i}]");
                c
            })
        })
        .collect()
}

/// Attenuation of the estimated coefficient when the measured variable
/// carries noise absent from the true driving variable:
/// `sigma^2_true / sigma^2_measured` in `(0, 1]`.
pub fn dilution_factor(sigma2_x_true: f64, sigma2_x_measured: f64) -> Result<f64> {
    if sigma2_x_true.is_nan() || sigma2_x_true <= 0.0 {
        return Err(Error::Domain(format!(
            "true variance must be positive, got {sigma2_x_true}"
        )));
    }
    if sigma2_x_measured < sigma2_x_true {
        return Err(Error::Domain(format!(
            "measured variance {sigma2_x_measured} is below true variance {sigma2_x_true}; arguments are (true, measured)"
        )));
    }
    Ok(sigma2_x_true / sigma2_x_measured)
}

/// Minimum tau span of an extraction window, one decade.
const WINDOW_SPAN: f64 = 10.0;

/// Qualification band half-width in units of the reference bar. One bar
/// rejects honest statistical scatter about half the time (the point
/// deviations run slightly wide of the confidence model) and lets the
/// search fall through to wide, sloppy windows; three bars passes scatter
/// while still rejecting structure such as mismatch bends or random-walk
/// wander.
const WINDOW_BAND: f64 = 3.0;

/// Condenses a curve to a scalar estimate.
///
/// Window search: every contiguous grid window spanning at least one
/// decade in tau qualifies if each point's value falls within three
/// reference bars of the mid-band, where the mid-band is
/// the mean value and mean error bar of the window's central third and a
/// point's reference bar is the larger of that mean and its own bar (a
/// point cannot be held to a band narrower than its own noise). Among
/// qualifiers the window with the smallest mean error bar wins (ties:
/// wider window, then smaller starting factor). The estimate is the window
/// mean; its uncertainty combines the window scatter with the largest
/// point bar in quadrature.
pub fn extract_estimate(curve: &KCurve) -> Result<KEstimate> {
    let pts = &curve.points;
    let n = pts.len();
    let full_span = pts[n - 1].tau / pts[0].tau;
    if full_span < WINDOW_SPAN * (1.0 - 1e-12) {
        return Err(Error::ExtractionFailed {
            reason: format!(
                "curve spans only {full_span:.3}x in tau, need one decade"
            ),
            m_lo: pts[0].m,
            m_hi: pts[n - 1].m,
            violation: f64::INFINITY,
        });
    }

    struct Candidate {
        lo: usize,
        hi: usize,
        mean_bar: f64,
        violation: f64,
    }

    let mut best_ok: Option<Candidate> = None;
    let mut best_fail: Option<Candidate> = None;
    for lo in 0..n {
        for hi in lo + 1..n {
            if pts[hi].tau / pts[lo].tau < WINDOW_SPAN * (1.0 - 1e-12) {
                continue;
            }
            let w = &pts[lo..=hi];
            let third = w.len() / 3;
            let mid = &w[third..w.len() - third];
            let mid_mean = mean(&mid.iter().map(|p| p.k).collect::<Vec<_>>());
            let mid_bar = mean(&mid.iter().map(|p| p.sigma_k).collect::<Vec<_>>());
            let worst = w
                .iter()
                .map(|p| {
                    let band = mid_bar.max(p.sigma_k);
                    if band > 0.0 {
                        (p.k - mid_mean).abs() / band
                    } else if p.k == mid_mean {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0f64, f64::max);
            let mean_bar = mean(&w.iter().map(|p| p.sigma_k).collect::<Vec<_>>());
            let cand = Candidate {
                lo,
                hi,
                mean_bar,
                violation: worst,
            };
            if cand.violation <= WINDOW_BAND {
                let better = match &best_ok {
                    None => true,
                    Some(b) => {
                        (cand.mean_bar, b.hi - b.lo, cand.lo)
                            < (b.mean_bar, cand.hi - cand.lo, b.lo)
                    }
                };
                if better {
                    best_ok = Some(cand);
                }
            } else {
                let better = match &best_fail {
                    None => true,
                    Some(b) => cand.violation < b.violation,
                };
                if better {
                    best_fail = Some(cand);
                }
            }
        }
    }

    match best_ok {
        Some(c) => {
            let w = &pts[c.lo..=c.hi];
            let ks: Vec<f64> = w.iter().map(|p| p.k).collect();
            let k_bar = mean(&ks);
            let sigma_bar = sample_std(&ks);
            let sigma_max = w.iter().map(|p| p.sigma_k).fold(0.0f64, f64::max);
            Ok(KEstimate {
                k_bar,
                sigma_bar,
                sigma_max,
                sigma_total: (sigma_bar * sigma_bar + sigma_max * sigma_max).sqrt(),
                m_lo: w[0].m,
                m_hi: w[w.len() - 1].m,
            })
        }
        None => {
            let c = best_fail.expect("at least one decade window exists");
            Err(Error::ExtractionFailed {
                reason: format!(
                    "no decade window stays within its mid band; best candidate m in \
                     [{}, {}] exceeds it by {:.3}x the half-width",
                    pts[c.lo].m, pts[c.hi].m, c.violation
                ),
                m_lo: pts[c.lo].m,
                m_hi: pts[c.hi].m,
                violation: c.violation,
            })
        }
    }
}

/// One systematic effect in an uncertainty budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub name: String,
    /// Sensitivity coefficient.
    pub k: f64,
    /// Uncertainty of the variable, including its own systematic part
    /// when supplied.
    pub sigma_x: f64,
}

impl BudgetEntry {
    pub fn new(name: impl Into<String>, k: f64, sigma_x: f64) -> Result<Self> {
        if sigma_x.is_nan() || sigma_x < 0.0 || !sigma_x.is_finite() || !k.is_finite() {
            return Err(Error::Domain(format!(
                "budget entry needs finite k and sigma_x >= 0, got k = {k}, sigma_x = {sigma_x}"
            )));
        }
        Ok(BudgetEntry {
            name: name.into(),
            k,
            sigma_x,
        })
    }

    /// Combines a statistical and a systematic part of the variable's
    /// uncertainty in quadrature.
    pub fn from_parts(name: impl Into<String>, k: f64, sigma_x_stat: f64, sigma_x_sys: f64) -> Result<Self> {
        BudgetEntry::new(
            name,
            k,
            (sigma_x_stat * sigma_x_stat + sigma_x_sys * sigma_x_sys).sqrt(),
        )
    }

    pub fn contribution(&self) -> f64 {
        self.k.abs() * self.sigma_x
    }
}

/// Root-sum-square synthesis of effect contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub entries: Vec<BudgetEntry>,
    pub u_b: f64,
}

/// Synthesizes the systematic uncertainty `u_B = sqrt(sum (k_i sigma_xi)^2)`.
pub fn budget(entries: Vec<BudgetEntry>) -> Result<Budget> {
    if entries.is_empty() {
        return Err(Error::EmptyBudget);
    }
    let mut acc = NeumaierSum::default();
    for e in &entries {
        let c = e.contribution();
        acc.add(c * c);
    }
    Ok(Budget {
        u_b: acc.total().sqrt(),
        entries,
    })
}
