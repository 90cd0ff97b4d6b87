//! Small numeric helpers shared across modules.

/// Neumaier compensated accumulator. Sums of 10^6 small squared
/// differences lose digits with plain accumulation; this keeps the error
/// independent of the number of terms.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// SplitMix64 step, used to derive independent per-channel seeds from a
/// master seed.
pub(crate) fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean of a slice (assumed nonempty) with compensated accumulation.
pub(crate) fn mean(values: &[f64]) -> f64 {
    let mut acc = NeumaierSum::default();
    for &v in values {
        acc.add(v);
    }
    acc.total() / values.len() as f64
}

/// Sample standard deviation (ddof = 1); zero for fewer than two samples.
pub(crate) fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let mut acc = NeumaierSum::default();
    for &v in values {
        let d = v - mu;
        acc.add(d * d);
    }
    (acc.total() / (values.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        // 1 + 1e-16 repeated: naive accumulation drops the small terms.
        let mut acc = NeumaierSum::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let exact = 1.0 + 1e-12;
        assert!((acc.total() - exact).abs() < 1e-15);
    }

    #[test]
    fn splitmix_is_deterministic_and_spread() {
        assert_eq!(splitmix64(0), splitmix64(0));
        assert_ne!(splitmix64(0), splitmix64(1));
    }

    #[test]
    fn std_of_constant_is_zero() {
        assert_eq!(sample_std(&[2.0, 2.0, 2.0]), 0.0);
    }
}
