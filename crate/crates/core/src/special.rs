//! Standard normal helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `P(Z ≤ x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `P(Z > x)`, accurate in the far tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `E[(t + Z)^+]` for standard normal `Z`.
pub fn positive_part_mean(t: f64) -> f64 {
    t * normal_cdf(t) + normal_pdf(t)
}

/// `E[(t + Z)^+] - t`, computed without cancellation for large `t`.
pub fn positive_part_excess(t: f64) -> f64 {
    // E[(t+Z)^+] - t = E[(t+Z)^-] = φ(t) - t Φ̄(t)
    normal_pdf(t) - t * normal_sf(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-9);
        assert!((normal_sf(10.0) / 7.619853024160527e-24 - 1.0).abs() < 1e-10);
        assert!((positive_part_mean(0.0) - normal_pdf(0.0)).abs() < 1e-16);
        let t = 0.5;
        assert!((positive_part_mean(t) - t - positive_part_excess(t)).abs() < 1e-15);
    }
}
