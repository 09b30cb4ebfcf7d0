//! Sample statistics for Monte Carlo estimates.

#[allow(unused_imports)]
use num_traits::Float;

/// Mean and standard error of a batch of per-trial values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    /// Values are summed in the given order, so equal inputs give
    /// bit-identical estimates.
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Estimate {
        let (mut n, mut sum, mut sq) = (0u64, 0.0f64, 0.0f64);
        for v in samples {
            n += 1;
            sum += v;
            sq += v * v;
        }
        if n == 0 {
            return Estimate { mean: 0.0, stderr: 0.0, trials: 0 };
        }
        let mean = sum / n as f64;
        let var = if n > 1 { ((sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0) } else { 0.0 };
        Estimate { mean, stderr: (var / n as f64).sqrt(), trials: n }
    }

    /// `mean ≤ bound + k·stderr`.
    pub fn within(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.stderr + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_stats() {
        let e = Estimate::from_samples([1.0, 0.0, 0.0, 1.0]);
        assert_eq!(e.mean, 0.5);
        assert!((e.stderr - (1.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(Estimate::from_samples([]).trials, 0);
        assert!(Estimate::from_samples([0.0, 0.0]).within(0.0, 3.0));
    }
}
