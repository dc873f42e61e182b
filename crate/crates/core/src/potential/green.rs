//! Dirichlet Green function of the quadrant.
//!
//! `z ↦ z²` maps the quadrant onto the upper half-plane, where
//! `G_H(ζ, ω) = (1/2π) ln(|ζ - ω̄| / |ζ - ω|)`. Written through
//! `|ζ - ω̄|² = |ζ - ω|² + 4 Im ζ Im ω` this is evaluated without cancellation.

use std::f64::consts::PI;

/// `G(x, y)` for the open quadrant, normalised so that `-ΔG(·, y) = δ_y`.
/// Zero when either point is outside.
#[inline]
pub fn quadrant_green(x: &[f64], y: &[f64]) -> f64 {
    if !(x[0] > 0.0 && x[1] > 0.0 && y[0] > 0.0 && y[1] > 0.0) {
        return 0.0;
    }
    // ζ = x², ω = y² as complex numbers.
    let (zr, zi) = (x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]);
    let (wr, wi) = (y[0] * y[0] - y[1] * y[1], 2.0 * y[0] * y[1]);
    let dist2 = (zr - wr) * (zr - wr) + (zi - wi) * (zi - wi);
    if dist2 == 0.0 {
        return f64::INFINITY;
    }
    (4.0 * zi * wi / dist2).ln_1p() / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logarithmic_singularity_has_unit_strength() {
        // Near the pole G ≈ -(1/2π) ln|x - y| + const.
        let y = [1.0, 2.0];
        let g1 = quadrant_green(&[1.0 + 1e-6, 2.0], &y);
        let g2 = quadrant_green(&[1.0 + 1e-7, 2.0], &y);
        assert!(((g2 - g1) - 10f64.ln() / (2.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn harmonic_away_from_pole() {
        let y = [1.3, 0.7];
        let h = 1e-3;
        let x = [2.0, 1.5];
        let c = quadrant_green(&x, &y);
        let lap = (quadrant_green(&[x[0] + h, x[1]], &y)
            + quadrant_green(&[x[0] - h, x[1]], &y)
            + quadrant_green(&[x[0], x[1] + h], &y)
            + quadrant_green(&[x[0], x[1] - h], &y)
            - 4.0 * c)
            / (h * h);
        assert!(lap.abs() < 1e-4, "{lap}");
    }
}
