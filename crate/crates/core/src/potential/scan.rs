//! Region-by-region integrals `I_i(y) = ∫_{region i} Ĝ(x, y) β(x) dx`.

use crate::error::{Error, Result};
use crate::geometry::{norm, Point};
use crate::potential::beta::BetaField;
use crate::potential::ghat::{ghat_in_case, GhatCase};
use crate::potential::polar::{about_origin, about_point, PolarTol, Sector};

pub const DEFAULT_A: f64 = 0.5;
pub const SCAN_REL_TOL: f64 = 1e-5;

/// Beyond `|y|·e^{12}` the far field is integrated in closed radial form.
pub(crate) const FAR_FACTOR: f64 = 162_754.791_419_003_9;

/// `∫_sector Θ(θ)/m(θ) · Γ(r·m(θ)) dθ` with `m(θ)` the boundary distance of
/// the unit vector and `Γ(s) = ∫_s^∞ γ(t)/t dt`. This is
/// `∫_{|x|>r} u(x) β(x) |x|^{-2p} dx` for a planar cone.
pub(crate) fn far_tail(beta: &BetaField, sector: Sector, r: f64) -> (f64, bool) {
    let cone = &beta.cone;
    let mid = 0.5 * (sector.lo + sector.hi);
    let res = crate::quadrature::integrate_finite(
        |t: f64| {
            let e = [t.cos(), t.sin()];
            let m = cone.dist_coords(&e);
            if m <= 0.0 {
                return 0.0;
            }
            cone.angular_profile(t) / m * beta.gamma.tail_integral(r * m)
        },
        &[sector.lo, mid, sector.hi],
        crate::quadrature::Tolerance::new(0.0, 1e-9).with_budget(500),
    );
    (res.value, res.converged && res.value.is_finite())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub d_y: f64,
    pub i: [f64; 4],
    pub u_y: f64,
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialScan {
    pub a_const: f64,
    pub rows: Vec<ScanRow>,
    /// The ratio at the last point is below half the ratio at the first.
    pub decays: bool,
    /// Some quadrature missed its tolerance; affected rows carry `converged = false`.
    pub partial: bool,
}

/// The four region integrals at one `y`.
pub fn region_integrals(beta: &BetaField, y: &[f64], a_const: f64) -> Result<([f64; 4], bool)> {
    let cone = &beta.cone;
    let sector = Sector::of(cone)?;
    if !cone.contains_coords(y) {
        return Err(Error::Input(format!("y = {y:?} is not interior")));
    }
    let yv = [y[0], y[1]];
    let ny = norm(y);
    let dy = cone.dist_coords(y);
    let tol = PolarTol::relative(SCAN_REL_TOL);
    let rho = a_const * ny;
    let kernel = |case: GhatCase| move |x: [f64; 2]| ghat_in_case(case, &x, y, cone) * beta.eval(&x);

    let i1 = about_origin(sector, yv, rho, 0.0, ny, false, kernel(GhatCase::NearOrigin), tol);
    let r_mid = 2.0 * (ny + rho);
    let r_far = ny * FAR_FACTOR;
    let i2a = about_origin(sector, yv, rho, ny, r_mid, false, kernel(GhatCase::FarField), tol);
    let i2b = about_origin(sector, yv, rho, r_mid, r_far, true, kernel(GhatCase::FarField), tol);
    let (tail, tail_ok) = far_tail(beta, sector, r_far);
    let i2 = crate::potential::polar::PolarResult {
        value: i2a.value + i2b.value + cone.u_coords(y) * tail,
        converged: i2a.converged && i2b.converged && tail_ok,
    };
    let local_edge = (dy / 2.0).min(rho);
    let i3 = about_point(sector, yv, local_edge, rho, true, kernel(GhatCase::Intermediate), tol);
    let i4 = about_point(sector, yv, 0.0, local_edge, false, kernel(GhatCase::Local), tol);
    let converged = i1.converged && i2.converged && i3.converged && i4.converged;
    Ok(([i1.value, i2.value, i3.value, i4.value], converged))
}

/// Ratios `(I₁ + I₂ + I₃ + I₄)(y) / u(y)` along `y_list`.
pub fn potential_ratio_scan(beta: &BetaField, y_list: &[Point], a_const: f64) -> Result<PotentialScan> {
    if !(a_const > 0.0 && a_const < 1.0) {
        return Err(Error::Parameter(format!("A = {a_const} outside (0, 1)")));
    }
    if y_list.is_empty() {
        return Err(Error::Input("potential scan needs at least one y".into()));
    }
    let mut rows = Vec::with_capacity(y_list.len());
    for y in y_list {
        let (i, converged) = region_integrals(beta, y.coords(), a_const)?;
        let u_y = beta.cone.u_coords(y.coords());
        rows.push(ScanRow {
            d_y: beta.cone.dist_coords(y.coords()),
            i,
            u_y,
            ratio: i.iter().sum::<f64>() / u_y,
            converged,
        });
    }
    let decays = rows.len() >= 2 && rows[rows.len() - 1].ratio < 0.5 * rows[0].ratio;
    let partial = rows.iter().any(|r| !r.converged);
    Ok(PotentialScan { a_const, rows, decays, partial })
}

/// Points on the canonical axis with the given boundary distances.
pub fn axis_points(cone: &crate::geometry::ConeSpec, distances: &[f64]) -> Vec<Point> {
    let axis = cone.axis();
    let unit = cone.dist_coords(axis.coords());
    distances.iter().map(|d| axis.scaled(d / unit)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeSpec;
    use crate::potential::gamma::GammaFn;

    #[test]
    fn first_region_matches_midpoint_sum() {
        // The first region is u(y)/|y|⁴ ∫ u(x) β(x) dx over a quarter disk
        // minus a disk; compare with a brute-force midpoint sum.
        let cone = ConeSpec::orthant(2);
        let beta = BetaField::new(cone.clone(), GammaFn::inv_log_sq());
        let y = [4.0, 4.0];
        let (i, ok) = region_integrals(&beta, &y, 0.5).unwrap();
        assert!(ok);
        let ny = norm(&y);
        let n = 1500;
        let h = ny / n as f64;
        let mut brute = 0.0;
        for a in 0..n {
            for b in 0..n {
                let x = [(a as f64 + 0.5) * h, (b as f64 + 0.5) * h];
                let nx = norm(&x);
                let dxy = (x[0] - y[0]).hypot(x[1] - y[1]);
                if nx <= ny && dxy >= 0.5 * ny {
                    brute += cone.u_coords(&x) * beta.eval(&x) * h * h;
                }
            }
        }
        brute *= cone.u_coords(&y) / ny.powi(4);
        assert!((i[0] - brute).abs() < 2e-3 * brute, "{} vs {brute}", i[0]);
    }

    #[test]
    fn far_tail_matches_direct_integration() {
        // Compare the closed radial form with direct quadrature over a finite
        // annulus: tail(r1) - tail(r2) = ∫_{r1<|x|<r2} u β |x|^{-4} dx.
        let cone = ConeSpec::orthant(2);
        let beta = BetaField::new(cone.clone(), GammaFn::inv_log_sq());
        let sector = Sector::of(&cone).unwrap();
        let (t1, ok1) = far_tail(&beta, sector, 10.0);
        let (t2, ok2) = far_tail(&beta, sector, 1e4);
        assert!(ok1 && ok2);
        let direct = about_origin(sector, [1.0, 1.0], 0.0, 10.0, 1e4, true, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            cone.u_coords(&x) * beta.eval(&x) / (r2 * r2)
        }, PolarTol::relative(1e-8));
        assert!((t1 - t2 - direct.value).abs() < 1e-6 * direct.value, "{} vs {}", t1 - t2, direct.value);
    }
}
