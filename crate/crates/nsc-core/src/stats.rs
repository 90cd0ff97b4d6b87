//! Two-sample (Allan) statistics on uniformly sampled records.
//!
//! The two-sample variance of adjacent tau-averages is the standard clock
//! stability statistic; its two-series extension replaces the squared
//! difference with a product of differences. Both come in a normal form
//! over non-overlapping averages and an overlapping form over raw samples
//! that uses every admissible window.
//!
//! All operations are pure functions of immutable inputs and are safe to
//! evaluate concurrently for different averaging factors.

use crate::error::{Error, Result};
use crate::noise::NoiseKind;
use crate::series::{AveragedSeries, TimeSeries};
use crate::util::NeumaierSum;

/// Two-sample variance `(1/(2(M-1))) sum [y_{j+1} - y_j]^2` of an averaged
/// record. Nonnegative; zero for constant input.
pub fn adev2(series: &AveragedSeries) -> Result<f64> {
    acov(series, series)
}

/// Two-sample covariance `(1/(2(M-1))) sum [a_{j+1}-a_j][b_{j+1}-b_j]`.
///
/// `acov(a, a)` equals [`adev2`] exactly, and exchanging the operands is
/// bit-for-bit neutral.
pub fn acov(a: &AveragedSeries, b: &AveragedSeries) -> Result<f64> {
    if a.len() != b.len() || a.m() != b.m() {
        return Err(Error::ShapeMismatch(format!(
            "operands differ: lengths {} vs {}, m {} va {}",
            a.len(),
            b.len(),
            a.m(),
            b.m()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "two-sample statistic",
            need: 2,
            have: n,
        });
    }
    let av = a.values();
    let bv = b.values();
    let mut acc = NeumaierSum::default();
    for j in 0..n - 1 {
        acc.add((av[j + 1] - av[j]) * (bv[j + 1] - bv[j]));
    }
    Ok(acc.total() / (2.0 * (n - 1) as f64))
}

/// Prefix sums of `v[k] - v[0]`, compensated. Centering on the first
/// sample keeps the prefixes at the scale of the record's variation, so
/// window sums stay accurate for offset-dominated records.
fn centered_prefix(v: &[f64]) -> Vec<f64> {
    let v0 = v[0];
    let mut acc = NeumaierSum::default();
    let mut p = Vec::with_capacity(v.len() + 1);
    p.push(0.0);
    for &x in v {
        acc.add(x - v0);
        p.push(acc.total());
    }
    p
}

fn check_overlap_pre(m0: usize, m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::OutOfRange {
            what: "averaging factor m",
            got: m as i64,
            lo: 1,
            hi: (m0.saturating_sub(1) / 2) as i64,
        });
    }
    if m0 < 2 * m + 1 {
        return Err(Error::InsufficientData {
            what: "overlap statistic",
            need: 2 * m + 1,
            have: m0,
        });
    }
    Ok(())
}

/// Overlapping two-sample variance at averaging factor `m`:
/// `(1/(2 m^2 (M0-2m+1))) sum_j [ sum_{i=j}^{j+m-1} (y_{i+m} - y_i) ]^2`.
///
/// The inner sum is the difference of two adjacent `m`-sample block sums,
/// so every window offset contributes, not just the non-overlapping ones.
/// Coincides with [`adev2`] of the raw record at `m = 1`.
pub fn overlap_adev2(series: &TimeSeries, m: usize) -> Result<f64> {
    overlap_acov(series, series, m)
}

/// Overlapping two-sample covariance; see [`overlap_adev2`] for the form.
/// `overlap_acov(a, a, m)` equals `overlap_adev2(a, m)` exactly.
pub fn overlap_acov(a: &TimeSeries, b: &TimeSeries, m: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "operands differ: lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let m0 = a.len();
    check_overlap_pre(m0, m)?;
    let same = std::ptr::eq(a, b) || a.values().as_ptr() == b.values().as_ptr();
    let pa = centered_prefix(a.values());
    let windows = m0 - 2 * m + 1;
    let mut acc = NeumaierSum::default();
    if same {
        for j in 0..windows {
            let d = (pa[j + 2 * m] - pa[j + m]) - (pa[j + m] - pa[j]);
            acc.add(d * d);
        }
    } else {
        let pb = centered_prefix(b.values());
        for j in 0..windows {
            let da = (pa[j + 2 * m] - pa[j + m]) - (pa[j + m] - pa[j]);
            let db = (pb[j + 2 * m] - pb[j + m]) - (pb[j + m] - pb[j]);
            acc.add(da * db);
        }
    }
    let mf = m as f64;
    Ok(acc.total() / (2.0 * mf * mf * windows as f64))
}

/// Equivalent degrees of freedom of the overlapping estimator at factor
/// `m` on `m0` raw samples, per noise kind.
///
/// Uses the standard approximation formulas for the overlapping two-sample
/// variance, written in terms of the number of phase points `N = m0 + 1`.
/// Clamped to `[1, m0]`.
pub fn edf(noise: NoiseKind, m: usize, m0: usize) -> Result<f64> {
    check_overlap_pre(m0, m)?;
    let nf = (m0 + 1) as f64;
    let mf = m as f64;
    let raw = match noise {
        NoiseKind::White => {
            (3.0 * (nf - 1.0) / (2.0 * mf) - 2.0 * (nf - 2.0) / nf) * 4.0 * mf * mf
                / (4.0 * mf * mf + 5.0)
        }
        NoiseKind::Flicker => {
            if m == 1 {
                2.0 * (nf - 2.0) * (nf - 2.0) / (2.3 * nf - 4.9)
            } else {
                5.0 * nf * nf / (4.0 * mf * (nf + 3.0 * mf))
            }
        }
        NoiseKind::RandomWalk => {
            let num = (nf - 1.0) * (nf - 1.0) - 3.0 * mf * (nf - 1.0) + 4.0 * mf * mf;
            let den = (nf - 3.0) * (nf - 3.0);
            (nf - 2.0) / mf * num / den
        }
    };
    Ok(raw.clamp(1.0, m0 as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::block_average;
    use proptest::prelude::*;

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::new(values.to_vec(), 1.0).unwrap()
    }

    fn avg1(values: &[f64]) -> AveragedSeries {
        block_average(&ts(values), 1).unwrap()
    }

    /// Direct-summation oracle: literal translation of the defining sums,
    /// no prefix arrays, no compensation. Kept independent of the library
    /// path on purpose.
    pub(crate) fn oracle_acov(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for j in 0..n - 1 {
            s += (a[j + 1] - a[j]) * (b[j + 1] - b[j]);
        }
        s / (2.0 * (n - 1) as f64)
    }

    pub(crate) fn oracle_overlap_acov(a: &[f64], b: &[f64], m: usize) -> f64 {
        let m0 = a.len();
        let windows = m0 - 2 * m + 1;
        let mut total = 0.0;
        for j in 0..windows {
            let mut ia = 0.0;
            let mut ib = 0.0;
            for i in j..j + m {
                ia += a[i + m] - a[i];
                ib += b[i + m] - b[i];
            }
            total += ia * ib;
        }
        total / (2.0 * (m * m) as f64 * windows as f64)
    }

    #[test]
    fn adev2_alternating() {
        // Four unit squared first differences over five samples: 4/(2*4).
        assert_eq!(adev2(&avg1(&[0.0, 1.0, 0.0, 1.0, 0.0])).unwrap(), 0.5);
    }

    #[test]
    fn adev2_constant_is_zero() {
        assert_eq!(adev2(&avg1(&[7.0; 64])).unwrap(), 0.0);
    }

    #[test]
    fn adev2_amplitude_two() {
        // Differences +-2, three of them: 3*4/(2*3).
        assert_eq!(adev2(&avg1(&[0.0, 2.0, 0.0, 2.0])).unwrap(), 2.0);
    }

    #[test]
    fn acov_with_self_is_adev2() {
        let a = avg1(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(acov(&a, &a).unwrap(), adev2(&a).unwrap());
        assert_eq!(acov(&a, &a).unwrap(), 0.5);
    }

    #[test]
    fn acov_scaled_pair() {
        // Products of differences: (1)(2)+(-1)(-2)+(1)(2) = 6, /(2*3).
        let a = avg1(&[0.0, 1.0, 0.0, 1.0]);
        let b = avg1(&[0.0, 2.0, 0.0, 2.0]);
        assert_eq!(acov(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn acov_against_constant_is_zero() {
        let a = avg1(&[3.0, -1.0, 4.0, -1.5, 5.0]);
        let b = avg1(&[2.5; 5]);
        assert_eq!(acov(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn acov_shape_errors() {
        let a = avg1(&[1.0, 2.0, 3.0]);
        let b = avg1(&[1.0, 2.0]);
        assert!(matches!(acov(&a, &b), Err(Error::ShapeMismatch(_))));
        let s = ts(&[1.0, 2.0, 3.0, 4.0]);
        let a2 = block_average(&s, 2).unwrap();
        let a1 = block_average(&ts(&[1.0, 2.0]), 1).unwrap();
        assert!(matches!(acov(&a2, &a1), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn overlap_at_m1_equals_adev2() {
        let v = [0.3, 1.7, -0.4, 2.2, 0.9, -1.3];
        let o = overlap_adev2(&ts(&v), 1).unwrap();
        let n = adev2(&avg1(&v)).unwrap();
        assert!((o - n).abs() <= 1e-15 * n.abs().max(1.0));
    }

    #[test]
    fn overlap_alternating_m2_is_zero() {
        // Lag-2 differences of a period-2 sequence vanish identically.
        let s = ts(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(overlap_adev2(&s, 2).unwrap(), 0.0);
    }

    #[test]
    fn overlap_ramp_m2_by_hand() {
        // [1,2,3,4,5], m=2: two windows, inner sums telescope block means:
        //   j=0: (3-1)+(4-2) = 4;  j=1: (4-2)+(5-3) = 4.
        // Total 16+16 = 32, divisor 2*4*2 = 16, value 2.0. Agrees with the
        // non-overlapping route: averages [1.5, 3.5] give (2)^2/2 = 2.0.
        let s = ts(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(overlap_adev2(&s, 2).unwrap(), 2.0);
        let a = block_average(&s, 2).unwrap();
        assert_eq!(adev2(&a).unwrap(), 2.0);
    }

    #[test]
    fn overlap_insufficient_data() {
        let s = ts(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            overlap_adev2(&s, 2),
            Err(Error::InsufficientData { need: 5, .. })
        ));
    }

    #[test]
    fn overlap_acov_self_identity() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 37 + 11) % 17) as f64 / 8.0).collect();
        let s = ts(&v);
        let t = s.clone();
        for m in 1..=19 {
            let va = overlap_adev2(&s, m).unwrap();
            let cv = overlap_acov(&s, &t, m).unwrap();
            assert_eq!(va, cv, "m={m}");
        }
    }

    #[test]
    fn matches_direct_summation_oracle_small() {
        // Dyadic values keep both routes exact, so equality is sharp.
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state = crate::util::splitmix64(state);
            (state >> 40) as f64 / 256.0 - 32.0
        };
        for len in 2..=12usize {
            for _ in 0..40 {
                let a: Vec<f64> = (0..len).map(|_| next()).collect();
                let b: Vec<f64> = (0..len).map(|_| next()).collect();
                let na = oracle_acov(&a, &b);
                let got = acov(&avg1(&a), &avg1(&b)).unwrap();
                assert!(
                    (got - na).abs() <= 1e-12 * na.abs().max(got.abs()).max(1e-300),
                    "acov len={len}"
                );
                for m in 1..=(len.saturating_sub(1)) / 2 {
                    let ov = oracle_overlap_acov(&a, &b, m);
                    let got = overlap_acov(&ts(&a), &ts(&b), m).unwrap();
                    assert!(
                        (got - ov).abs() <= 1e-12 * ov.abs().max(got.abs()).max(1e-300),
                        "overlap len={len} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn edf_reference_values() {
        // Formula evaluations at m0 = 1000, m = 1 (N = 1001):
        //   white      (3*1000/2 - 2*999/1001) * 4/9          = 665.7795...
        //   flicker    2*999^2 / (2.3*1001 - 4.9)             = 868.8094...
        //   random walk 999 * (1000^2 - 3000 + 4) / 998^2     = 1000.003,
        //   clamped to m0 = 1000.
        let w = edf(NoiseKind::White, 1, 1000).unwrap();
        let f = edf(NoiseKind::Flicker, 1, 1000).unwrap();
        let r = edf(NoiseKind::RandomWalk, 1, 1000).unwrap();
        assert!((w - 665.7795).abs() < 0.01, "white {w}");
        assert!((f - 868.8094).abs() < 0.01, "flicker {f}");
        assert_eq!(r, 1000.0, "random walk {r}");
        for v in [w, f, r] {
            assert!(v <= 1000.0);
        }
    }

    #[test]
    fn edf_is_order_one_near_half_record() {
        for kind in [NoiseKind::White, NoiseKind::Flicker, NoiseKind::RandomWalk] {
            let v = edf(kind, 499, 1000).unwrap();
            assert!((1.0..10.0).contains(&v), "{kind:?}: {v}");
        }
    }

    #[test]
    fn edf_monte_carlo_cross_check() {
        // Chi-squared convention: var(est) = 2 est^2 / edf, so
        // edf_mc = 2 mean^2 / var over independent seeds. The white and
        // random-walk values also follow from first principles: 2 M0 / 3
        // and M0 - 1 respectively at m = 1.
        let m0 = 1000usize;
        let seeds = 3000;
        for (kind, expect) in [
            (NoiseKind::White, 666.7),
            (NoiseKind::RandomWalk, 999.0),
        ] {
            let mut vals = Vec::with_capacity(seeds);
            for s in 0..seeds {
                let spec = crate::noise::NoiseSpec::new(kind, 1.0, 0xED0F + s as u64).unwrap();
                let series = crate::noise::generate(&spec, m0).unwrap();
                vals.push(overlap_adev2(&series, 1).unwrap());
            }
            let mu = crate::util::mean(&vals);
            let sd = crate::util::sample_std(&vals);
            let mc = 2.0 * mu * mu / (sd * sd);
            let formula = edf(kind, 1, m0).unwrap();
            assert!(
                (mc / expect - 1.0).abs() < 0.15,
                "{kind:?}: mc {mc} vs first-principles {expect}"
            );
            assert!(
                (mc / formula - 1.0).abs() < 0.15,
                "{kind:?}: mc {mc} vs formula {formula}"
            );
        }
    }

    proptest! {
        #[test]
        fn acov_symmetric_bit_for_bit(v in proptest::collection::vec(-1e3f64..1e3, 2..60)) {
            let w: Vec<f64> = v.iter().rev().map(|x| x * 0.7 + 0.1).collect();
            let a = avg1(&v);
            let b = avg1(&w);
            let ab = acov(&a, &b).unwrap();
            let ba = acov(&b, &a).unwrap();
            prop_assert_eq!(ab.to_bits(), ba.to_bits());
        }

        #[test]
        fn acov_bilinear(
            v in proptest::collection::vec(-10f64..10.0, 4..40),
            beta in -5f64..5.0,
            gamma in -5f64..5.0,
        ) {
            let n = v.len();
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
            let c: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).cos() * 2.0).collect();
            let combo: Vec<f64> = (0..n).map(|i| beta * b[i] + gamma * c[i]).collect();
            let lhs = acov(&avg1(&v), &avg1(&combo)).unwrap();
            let rhs = beta * acov(&avg1(&v), &avg1(&b)).unwrap()
                + gamma * acov(&avg1(&v), &avg1(&c)).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1e-12);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale);
        }

        #[test]
        fn acov_cauchy_schwarz(
            v in proptest::collection::vec(-10f64..10.0, 4..40),
            w in proptest::collection::vec(-10f64..10.0, 4..40),
        ) {
            let n = v.len().min(w.len());
            let a = avg1(&v[..n]);
            let b = avg1(&w[..n]);
            let c = acov(&a, &b).unwrap();
            let va = adev2(&a).unwrap();
            let vb = adev2(&b).unwrap();
            prop_assert!(c * c <= va * vb + 1e-15);
        }

        #[test]
        fn offset_invariance(
            v in proptest::collection::vec(-10f64..10.0, 5..50),
            offset in -100f64..100.0,
        ) {
            // Representation of v + offset rounds each sample to
            // eps * |offset|, so the claim needs the first differences to
            // dominate that floor.
            let base = adev2(&avg1(&v)).unwrap();
            prop_assume!(base > 1e-2);
            let shifted: Vec<f64> = v.iter().map(|x| x + offset).collect();
            let moved = adev2(&avg1(&shifted)).unwrap();
            prop_assert!((base - moved).abs() <= 1e-12 * base.abs().max(moved.abs()));
            let b0 = overlap_adev2(&ts(&v), 2).unwrap();
            let b1 = overlap_adev2(&ts(&shifted), 2).unwrap();
            if b0 > 1e-2 {
                prop_assert!((b0 - b1).abs() <= 1e-12 * b0.abs().max(b1.abs()));
            }
        }

        #[test]
        fn block_then_adev2_matches_definition(
            v in proptest::collection::vec(-5f64..5.0, 8..80),
            m in 1usize..4,
        ) {
            let s = ts(&v);
            prop_assume!(m <= v.len() / 2);
            let a = block_average(&s, m).unwrap();
            let via_avg = adev2(&a).unwrap();
            // Definition applied directly to tau-averages.
            let big_m = v.len() / m;
            let means: Vec<f64> = (0..big_m)
                .map(|j| v[j * m..(j + 1) * m].iter().sum::<f64>() / m as f64)
                .collect();
            let direct = oracle_acov(&means, &means);
            prop_assert!((via_avg - direct).abs() <= 1e-12 * direct.abs().max(via_avg.abs()).max(1e-300));
        }
    }
}
