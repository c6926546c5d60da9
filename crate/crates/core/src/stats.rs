//! Compensated summation and the small set of statistics used across the
//! crate. All accumulations run in f64; sums use Neumaier's variant of
//! Kahan summation so that means over 10^6+ terms do not drift.

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator of values.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Compensated mean; `values` must be nonempty.
pub fn mean(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    kahan_sum(values.iter().copied()) / values.len() as f64
}

/// Mean and sample standard deviation (n−1 denominator), two-pass.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let ss = kahan_sum(values.iter().map(|v| {
        let d = v - m;
        d * d
    }));
    (m, (ss / (values.len() - 1) as f64).sqrt())
}

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" rule). `sorted` must be ascending and nonempty, `p` in [0, 1].
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Median of a sample (copies and sorts).
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_type7(&sorted, 0.5)
}

/// CDF of the standard normal distribution.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance between the empirical distribution of the
/// sample and the standard normal.
pub fn ks_distance_to_standard_normal(sample: &[f64]) -> f64 {
    debug_assert!(!sample.is_empty());
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = standard_normal_cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    d
}

/// Sample skewness and excess kurtosis (biased moment estimators).
pub fn skewness_and_excess_kurtosis(values: &[f64]) -> (f64, f64) {
    let (m, s) = mean_and_std(values);
    if s == 0.0 {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let m3 = kahan_sum(values.iter().map(|v| ((v - m) / s).powi(3))) / n;
    let m4 = kahan_sum(values.iter().map(|v| ((v - m) / s).powi(4))) / n;
    (m3, m4 - 3.0)
}

/// Least-squares line through (x, y) points, returned as (slope, intercept).
/// Returns `None` with fewer than two distinct x values.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx = kahan_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return None;
    }
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
