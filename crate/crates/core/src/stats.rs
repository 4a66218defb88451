//! Deterministic summation and running moments.
//!
//! Aggregation across Monte Carlo blocks must not depend on how work was
//! partitioned, so sums are pairwise and merges run over an ordered list.

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 128;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Count, mean and centered second moment of a sample.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    /// Two-pass moments with pairwise sums.
    pub fn from_slice(xs: &[f64]) -> Moments {
        let n = xs.len() as u64;
        if n == 0 {
            return Moments::default();
        }
        let mean = pairwise_sum(xs) / n as f64;
        let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
        Moments { count: n, mean, m2: pairwise_sum(&sq) }
    }

    /// Chan et al. pairwise merge of two partial moments.
    pub fn merge(a: Moments, b: Moments) -> Moments {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let n = a.count + b.count;
        let delta = b.mean - a.mean;
        let na = a.count as f64;
        let nb = b.count as f64;
        let mean = a.mean + delta * nb / n as f64;
        let m2 = a.m2 + b.m2 + delta * delta * na * nb / n as f64;
        Moments { count: n, mean, m2 }
    }

    /// Merge an ordered list pairwise (balanced tree), independent of any
    /// parallel partitioning that produced it.
    pub fn merge_all(items: &[Moments]) -> Moments {
        match items.len() {
            0 => Moments::default(),
            1 => items[0],
            n => {
                let mid = n / 2;
                Moments::merge(Self::merge_all(&items[..mid]), Self::merge_all(&items[mid..]))
            }
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn se_mean(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        self.std() / (self.count as f64).sqrt()
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxy: Vec<f64> = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|&a| (a - mx) * (a - mx)).collect();
    let slope = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    (slope, my - slope * mx)
}
