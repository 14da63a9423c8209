//! Confidence intervals for Monte Carlo summaries.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// A point estimate with a 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Interval for a binomial proportion. Uses the normal approximation unless
/// fewer than five successes or failures were seen, where the Wilson score
/// interval is used instead.
pub fn proportion(successes: u64, trials: u64) -> Interval {
    if trials == 0 {
        return Interval { estimate: 0.0, low: 0.0, high: 1.0 };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    if successes < 5 || trials - successes < 5 {
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
        let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
        return Interval { estimate: p, low, high };
    }
    let half = Z95 * (p * (1.0 - p) / n).sqrt();
    Interval { estimate: p, low: (p - half).max(0.0), high: (p + half).min(1.0) }
}

/// Standard error of a proportion estimate.
pub fn proportion_sigma(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Mean with a normal-approximation interval.
pub fn mean(values: &[f64]) -> Interval {
    let n = values.len() as f64;
    if values.is_empty() {
        return Interval { estimate: 0.0, low: 0.0, high: 0.0 };
    }
    let m = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Interval { estimate: m, low: m, high: m };
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    let half = Z95 * (var / n).sqrt();
    Interval { estimate: m, low: m - half, high: m + half }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_near_the_edges() {
        let all = proportion(500, 500);
        assert_eq!(all.estimate, 1.0);
        assert!(all.low < 1.0 && all.low > 0.99 && all.high == 1.0);
        let none = proportion(0, 100);
        assert_eq!(none.low, 0.0);
        assert!(none.high > 0.0);
    }

    #[test]
    fn normal_in_the_middle() {
        let i = proportion(50, 100);
        assert!((i.high - i.low - 2.0 * Z95 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn mean_of_constants() {
        let i = mean(&[1.0, 1.0, 1.0]);
        assert_eq!((i.estimate, i.low, i.high), (1.0, 1.0, 1.0));
    }
}
