//! Estimates with confidence intervals and the small amount of statistics the
//! estimators need.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Below this estimated probability survival CIs switch to Wilson intervals.
pub const WILSON_THRESHOLD: f64 = 1e-3;

/// A Monte Carlo estimate with a 95% confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub value: f64,
    pub half_width: f64,
    pub reps: u64,
    pub seed: u64,
}

impl EstimateCI {
    /// Half-width of the CI of a difference of two independent estimates.
    pub fn joint_half_width(&self, other: &EstimateCI) -> f64 {
        self.half_width.hypot(other.half_width)
    }

    /// `|a - b| ≤ k · joint half-width`.
    pub fn agrees_with(&self, other: &EstimateCI, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.joint_half_width(other)
    }

    /// `|a - exact| ≤ k · half-width`.
    pub fn covers(&self, exact: f64, k: f64) -> bool {
        (self.value - exact).abs() <= k * self.half_width
    }
}

/// Running mean and variance with an order-fixed parallel merge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn estimate(&self, seed: u64) -> EstimateCI {
        EstimateCI {
            value: self.mean,
            half_width: Z95 * self.std_error(),
            reps: self.count,
            seed,
        }
    }
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let spread = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - spread).max(0.0), (center + spread).min(1.0))
}

/// Estimate of a probability from counts: normal CI, or Wilson below
/// [`WILSON_THRESHOLD`] (half-width is the larger distance to a Wilson bound).
pub fn proportion_estimate(successes: u64, n: u64, seed: u64) -> EstimateCI {
    let p = if n == 0 { 0.0 } else { successes as f64 / n as f64 };
    let half_width = if p < WILSON_THRESHOLD {
        let (lo, hi) = wilson_interval(successes, n, Z95);
        (p - lo).max(hi - p)
    } else {
        Z95 * (p * (1.0 - p) / n as f64).sqrt()
    };
    EstimateCI { value: p, half_width, reps: n, seed }
}

/// Ordinary least squares fit `y = slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Weighted least squares line `y = slope·x + intercept`.
pub fn weighted_least_squares(xs: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() == ws.len());
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        sxy += w * (x - mx) * (y - my);
        sxx += w * (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Upper `level` quantile of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_critical(dof: usize, level: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(level)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Two-sided normal quantile with a Bonferroni correction over `tests` tests
/// at family-wise level `alpha`.
pub fn bonferroni_z(alpha: f64, tests: usize) -> f64 {
    normal_quantile(1.0 - alpha / (2.0 * tests.max(1) as f64))
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = NeumaierSum::default();
    for x in it {
        s.add(x);
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count, all.count);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn wilson_contains_zero_count() {
        let (lo, hi) = wilson_interval(0, 1000, Z95);
        assert!(lo < 1e-15);
        assert!(hi > 0.0 && hi < 0.01);
        let e = proportion_estimate(0, 1000, 1);
        assert!(e.half_width > 0.0);
    }

    #[test]
    fn least_squares_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.5 * x + 2.0).collect();
        let (s, c) = least_squares(&xs, &ys);
        assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_fit_ignores_zero_weight() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 2.0, 3.0, 40.0];
        let (s, c) = weighted_least_squares(&xs, &ys, &[1.0, 2.0, 3.0, 0.0]);
        assert!((s - 1.0).abs() < 1e-12 && c.abs() < 1e-12);
        assert_eq!(weighted_least_squares(&xs, &ys, &[1.0; 4]), least_squares(&xs, &ys));
    }

    #[test]
    fn chi_square_quantile() {
        assert!((chi_square_critical(24, 0.99) - 42.97982).abs() < 1e-4);
    }

    #[test]
    fn compensated_sum() {
        let v = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(v, 2.0);
    }
}
