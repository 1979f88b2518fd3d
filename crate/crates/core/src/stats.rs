//! Sample mean and standard error, accumulated in a fixed order.

/// Mean, standard error of the mean and sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Welford accumulator. Feeding the same values in the same order always
/// yields bit-identical summaries.
#[derive(Debug, Clone, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn summary(&self) -> Summary {
        let stderr = if self.count > 1 {
            let var = (self.m2 / (self.count - 1) as f64).max(0.0);
            (var / self.count as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean: self.mean,
            stderr,
            trials: self.count,
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for v in iter {
            s.push(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_two_pass_formulas() {
        let xs = [1.0, 2.0, 4.0, 7.0, 11.0];
        let s: RunningStats = xs.iter().copied().collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sum = s.summary();
        assert_relative_eq!(sum.mean, mean, epsilon = 1e-12);
        assert_relative_eq!(sum.stderr, (var / n).sqrt(), epsilon = 1e-12);
        assert_eq!(sum.trials, 5);
    }

    #[test]
    fn single_sample_has_zero_stderr() {
        let s: RunningStats = [3.5].into_iter().collect();
        assert_eq!(s.summary().stderr, 0.0);
        assert_eq!(s.summary().mean, 3.5);
    }
}
