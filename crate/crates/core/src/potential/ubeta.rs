//! The potential `U_β(y) = ∫_K G(x, y) β(x) dx` on the quadrant.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ConeKind;
use crate::potential::beta::BetaField;
use crate::potential::green::quadrant_green;
use crate::potential::polar::{about_origin, about_point, PolarTol, Sector};
use crate::potential::scan::{far_tail, FAR_FACTOR};

/// Direct quadrature of `U_β(y)`; zero off the cone.
pub fn u_beta(beta: &BetaField, y: &[f64], rel: f64) -> Result<f64> {
    if beta.cone.kind() != ConeKind::Orthant(2) {
        return Err(Error::Unsupported(format!("no exact Green function for {}", beta.cone)));
    }
    if !beta.cone.contains_coords(y) {
        return Ok(0.0);
    }
    let sector = Sector::of(&beta.cone)?;
    let yv = [y[0], y[1]];
    let rho = 0.5 * beta.cone.dist_coords(y);
    let tol = PolarTol::relative(rel);
    let integrand = |x: [f64; 2]| quadrant_green(&x, y) * beta.eval(&x);
    let ny = yv[0].hypot(yv[1]);
    let r_mid = 2.0 * (ny + rho);
    let r_far = ny * FAR_FACTOR;
    let near = about_point(sector, yv, 0.0, rho, false, integrand, tol);
    let body = about_origin(sector, yv, rho, 0.0, r_mid, false, integrand, tol);
    let outer = about_origin(sector, yv, rho, r_mid, r_far, true, integrand, tol);
    // There G(x, y) = 4u(x)u(y)/(π|x|⁴) up to a relative O(|y|²/|x|²).
    let (tail, tail_ok) = far_tail(beta, sector, r_far);
    let tail = 4.0 / std::f64::consts::PI * beta.cone.u_coords(y) * tail;
    crate::potential::polar::PolarResult {
        value: near.value + body.value + outer.value + tail,
        converged: near.converged && body.converged && outer.converged && tail_ok,
    }
    .checked("U_β")
}

/// `U_β` tabulated on a tensor grid with nodes `c·(e^{iδ/c} - 1)` in each
/// coordinate, so spacing starts at about `δ` and grows linearly with
/// distance from the axes. Cubic Lagrange interpolation runs in the mapped
/// coordinate; points beyond the table fall back to direct quadrature.
#[derive(Clone, Debug)]
pub struct UBetaGrid {
    beta: BetaField,
    delta: f64,
    n: usize,
    values: Vec<f64>,
    rel: f64,
    /// Largest relative interpolation error seen at the audit points.
    pub interpolation_error: f64,
}

pub const GRID_REL_TOL: f64 = 1e-6;
/// Length over which the grid spacing doubles, roughly.
const MAP_SCALE: f64 = 6.0;

fn to_mapped(y: f64) -> f64 {
    MAP_SCALE * (y / MAP_SCALE).ln_1p()
}

fn from_mapped(s: f64) -> f64 {
    MAP_SCALE * (s / MAP_SCALE).exp_m1()
}

fn cubic_weights(t: f64) -> [f64; 4] {
    // Lagrange basis on nodes -1, 0, 1, 2.
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

impl UBetaGrid {
    /// Tabulate on `[0, extent]²` with spacing `delta` at the axes. Uses the
    /// swap symmetry of the quadrant.
    pub fn build(beta: &BetaField, extent: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && to_mapped(extent) > 4.0 * delta) {
            return Err(Error::Parameter(format!("grid spacing {delta} too coarse for extent {extent}")));
        }
        if beta.cone.kind() != ConeKind::Orthant(2) {
            return Err(Error::Unsupported(format!("no exact Green function for {}", beta.cone)));
        }
        let n = (to_mapped(extent) / delta).ceil() as usize;
        let side = n + 1;
        let coord = |i: usize| from_mapped(i as f64 * delta);
        let mut jobs = Vec::new();
        for i in 1..side {
            for j in 1..=i {
                jobs.push((i, j));
            }
        }
        let computed: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(i, j)| u_beta(beta, &[coord(i), coord(j)], GRID_REL_TOL))
            .collect();
        let mut values = vec![0.0; side * side];
        for (&(i, j), v) in jobs.iter().zip(computed) {
            let v = v?;
            values[i * side + j] = v;
            values[j * side + i] = v;
        }
        let mut grid = UBetaGrid { beta: beta.clone(), delta, n, values, rel: GRID_REL_TOL, interpolation_error: 0.0 };
        grid.interpolation_error = grid.audit()?;
        Ok(grid)
    }

    pub fn beta(&self) -> &BetaField {
        &self.beta
    }

    pub fn nodes(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn extent(&self) -> f64 {
        from_mapped(self.n as f64 * self.delta)
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    fn covers(&self, y: &[f64]) -> bool {
        y[0] <= self.extent() && y[1] <= self.extent()
    }

    /// Interpolated value, or `None` outside the table.
    pub fn interpolate(&self, y: &[f64]) -> Option<f64> {
        if !self.beta.cone.contains_coords(y) {
            return Some(0.0);
        }
        if !self.covers(y) {
            return None;
        }
        let stencil = |c: f64| -> (usize, [f64; 4]) {
            let t = to_mapped(c) / self.delta;
            let i0 = (t.floor() as i64 - 1).clamp(0, self.n as i64 - 3) as usize;
            (i0, cubic_weights(t - i0 as f64 - 1.0))
        };
        let (i0, wi) = stencil(y[0]);
        let (j0, wj) = stencil(y[1]);
        let mut v = 0.0;
        for (a, wa) in wi.iter().enumerate() {
            let mut row = 0.0;
            for (b, wb) in wj.iter().enumerate() {
                row += wb * self.node(i0 + a, j0 + b);
            }
            v += wa * row;
        }
        Some(v)
    }

    /// Interpolated value with quadrature fallback.
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        match self.interpolate(y) {
            Some(v) => Ok(v),
            None => u_beta(&self.beta, y, self.rel),
        }
    }

    /// Compare interpolation against direct quadrature at cell centres
    /// spread over the table, away from the axes.
    fn audit(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (fa, fb) in [(0.1, 0.1), (0.2, 0.2), (0.5, 0.3), (0.7, 0.7), (0.9, 0.4), (0.35, 0.8), (0.15, 0.6)] {
            let snap = |f: f64| from_mapped(((f * self.n as f64).floor().max(1.0) + 0.5) * self.delta);
            let y = [snap(fa), snap(fb)];
            let direct = u_beta(&self.beta, &y, self.rel)?;
            let interp = self.interpolate(&y).unwrap_or(direct);
            worst = worst.max((interp - direct).abs() / direct.abs().max(1e-300));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeSpec;
    use crate::potential::gamma::GammaFn;

    #[test]
    fn poisson_equation_holds_numerically() {
        // -ΔU_β = β at an interior point, by a five-point stencil.
        let beta = BetaField::new(ConeSpec::orthant(2), GammaFn::inv_log_sq());
        let y = [3.0, 2.0];
        let h = 0.05;
        let u = |a: f64, b: f64| u_beta(&beta, &[a, b], 1e-10).unwrap();
        let lap = (u(y[0] + h, y[1]) + u(y[0] - h, y[1]) + u(y[0], y[1] + h) + u(y[0], y[1] - h)
            - 4.0 * u(y[0], y[1]))
            / (h * h);
        let b = beta.eval(&y);
        assert!((lap + b).abs() < 2e-3 * b, "Δu = {lap}, β = {b}");
    }

    #[test]
    fn mapped_grid_roundtrip() {
        for y in [0.0, 0.3, 5.0, 80.0] {
            assert!((from_mapped(to_mapped(y)) - y).abs() < 1e-12 * (1.0 + y));
        }
    }
}
