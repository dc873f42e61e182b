//! Nested polar quadrature over planar sectors, with or without a disk removed.

use std::cell::Cell;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::ConeSpec;
use crate::quadrature::{integrate_finite, Tolerance};

/// Tolerances of the outer (radial) and inner (angular) integrals.
#[derive(Clone, Copy, Debug)]
pub struct PolarTol {
    pub outer: Tolerance,
    pub inner: Tolerance,
}

impl PolarTol {
    pub fn relative(rel: f64) -> Self {
        PolarTol {
            outer: Tolerance::new(0.0, rel).with_budget(400),
            inner: Tolerance::new(0.0, rel * 1e-2).with_budget(200),
        }
    }
}

/// Value and whether every nested integral converged.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PolarResult {
    pub value: f64,
    pub converged: bool,
}

impl PolarResult {
    pub fn checked(self, what: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Accuracy(format!("{what}: nested quadrature did not converge (estimate {})", self.value)))
        }
    }
}

/// A convex planar cone as the sector `(lo, hi)`.
#[derive(Clone, Copy, Debug)]
pub struct Sector {
    pub lo: f64,
    pub hi: f64,
}

impl Sector {
    pub fn of(cone: &ConeSpec) -> Result<Self> {
        let (lo, hi) = cone
            .sector()
            .ok_or_else(|| Error::Unsupported(format!("{cone} is not a planar sector")))?;
        if hi - lo > PI + 1e-12 {
            return Err(Error::Unsupported(format!("{cone} is not convex")));
        }
        Ok(Sector { lo, hi })
    }

    /// Distance from interior `y` along the unit direction `e` to the boundary.
    pub fn exit_distance(&self, y: [f64; 2], e: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        for phi in [self.lo, self.hi] {
            let b = [phi.cos(), phi.sin()];
            let cross_eb = e[0] * b[1] - e[1] * b[0];
            if cross_eb.abs() < 1e-300 {
                continue;
            }
            let s = (b[0] * y[1] - b[1] * y[0]) / cross_eb;
            let t = (y[0] + s * e[0]) * b[0] + (y[1] + s * e[1]) * b[1];
            if s > 0.0 && t >= -1e-12 * (1.0 + s) {
                best = best.min(s);
            }
        }
        best
    }
}

fn wrap(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t > PI {
        t -= TAU;
    } else if t <= -PI {
        t += TAU;
    }
    t
}

/// Sub-intervals of `[lo, hi]` outside the arc `(c - a, c + a)`.
fn arc_complement(lo: f64, hi: f64, c: f64, a: f64, out: &mut Vec<(f64, f64)>) {
    out.clear();
    if a <= 0.0 {
        out.push((lo, hi));
        return;
    }
    if a >= PI {
        return;
    }
    // Bring the arc centre next to the sector.
    let mid = 0.5 * (lo + hi);
    let c = mid + wrap(c - mid);
    let (x0, x1) = (c - a, c + a);
    if x0 > lo {
        out.push((lo, x0.min(hi)));
    }
    if x1 < hi {
        out.push((x1.max(lo), hi));
    }
    out.retain(|(a, b)| b > a);
}

/// `∫∫ F(x) dx` over `{x ∈ sector : r_lo ≤ |x| ≤ r_hi, |x - y| ≥ rho}` in polar
/// coordinates about the origin. With `log_radial` the radius is integrated
/// in `ln r`, which suits integrands decaying like `|x|^{-2}`.
#[allow(clippy::too_many_arguments)]
pub fn about_origin<F: Fn([f64; 2]) -> f64>(
    sector: Sector,
    y: [f64; 2],
    rho: f64,
    r_lo: f64,
    r_hi: f64,
    log_radial: bool,
    f: F,
    tol: PolarTol,
) -> PolarResult {
    let ok = Cell::new(true);
    if !(r_hi > r_lo) {
        return PolarResult { value: 0.0, converged: true };
    }
    let ny = y[0].hypot(y[1]);
    let ty = y[1].atan2(y[0]);
    let bisector = 0.5 * (sector.lo + sector.hi);
    let inner = |r: f64| -> f64 {
        let alpha = if rho > 0.0 && ny > 0.0 && r > 0.0 {
            let c = (r * r + ny * ny - rho * rho) / (2.0 * r * ny);
            if c >= 1.0 {
                0.0
            } else if c <= -1.0 {
                PI
            } else {
                c.acos()
            }
        } else if rho > 0.0 && r < rho - ny {
            PI
        } else {
            0.0
        };
        let mut pieces = Vec::with_capacity(2);
        arc_complement(sector.lo, sector.hi, ty, alpha, &mut pieces);
        let mut total = 0.0;
        for (a, b) in pieces {
            let mut brk = vec![a];
            for c in [bisector, ty] {
                if c > a && c < b {
                    brk.push(c);
                }
            }
            brk.sort_by(f64::total_cmp);
            brk.push(b);
            let res = integrate_finite(|t: f64| f([r * t.cos(), r * t.sin()]), &brk, tol.inner);
            if !res.converged {
                ok.set(false);
            }
            total += res.value;
        }
        total * r
    };
    let mut brk = vec![r_lo];
    for c in [ny - rho, ny, ny + rho] {
        if c > r_lo && c < r_hi {
            brk.push(c);
        }
    }
    brk.push(r_hi);
    let res = if log_radial {
        let lbrk: Vec<f64> = brk.iter().map(|r| r.ln()).collect();
        integrate_finite(
            |v: f64| {
                let r = v.exp();
                inner(r) * r
            },
            &lbrk,
            tol.outer,
        )
    } else {
        integrate_finite(&inner, &brk, tol.outer)
    };
    PolarResult { value: res.value, converged: res.converged && ok.get() }
}

/// `∫∫ F(x) dx` over `{x ∈ sector : s_lo ≤ |x - y| ≤ s_hi}` in polar coordinates
/// about `y`. With `log_radial` the radius is integrated in `ln s`, which
/// flattens integrands behaving like `|x - y|^{-2}`.
pub fn about_point<F: Fn([f64; 2]) -> f64>(
    sector: Sector,
    y: [f64; 2],
    s_lo: f64,
    s_hi: f64,
    log_radial: bool,
    f: F,
    tol: PolarTol,
) -> PolarResult {
    let ok = Cell::new(true);
    if !(s_hi > s_lo) {
        return PolarResult { value: 0.0, converged: true };
    }
    let inner = |psi: f64| -> f64 {
        let e = [psi.cos(), psi.sin()];
        let top = s_hi.min(sector.exit_distance(y, e));
        if top <= s_lo {
            return 0.0;
        }
        let point = |s: f64| [y[0] + s * e[0], y[1] + s * e[1]];
        let res = if log_radial {
            integrate_finite(
                |t: f64| {
                    let s = t.exp();
                    f(point(s)) * s * s
                },
                &[s_lo.ln(), top.ln()],
                tol.inner,
            )
        } else {
            integrate_finite(|s: f64| f(point(s)) * s, &[s_lo, top], tol.inner)
        };
        if !res.converged {
            ok.set(false);
        }
        res.value
    };
    let apex = wrap(y[1].atan2(y[0]) + PI);
    let mut brk = vec![-PI];
    let mut extra = vec![apex, wrap(sector.lo + PI), wrap(sector.hi + PI), sector.lo, sector.hi];
    extra.sort_by(f64::total_cmp);
    for c in extra {
        if c > -PI && c < PI && (c - brk[brk.len() - 1]).abs() > 1e-12 {
            brk.push(c);
        }
    }
    brk.push(PI);
    let res = integrate_finite(&inner, &brk, tol.outer);
    PolarResult { value: res.value, converged: res.converged && ok.get() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrant() -> Sector {
        Sector { lo: 0.0, hi: PI / 2.0 }
    }

    #[test]
    fn exit_distances() {
        let s = quadrant();
        assert!((s.exit_distance([2.0, 3.0], [-1.0, 0.0]) - 2.0).abs() < 1e-12);
        assert!((s.exit_distance([2.0, 3.0], [0.0, -1.0]) - 3.0).abs() < 1e-12);
        assert!(s.exit_distance([2.0, 3.0], [1.0, 0.0]).is_infinite());
    }

    #[test]
    fn areas() {
        let tol = PolarTol::relative(1e-9);
        // Quarter disk of radius 3 minus a disk of radius 0.5 around (1, 1).
        let a = about_origin(quadrant(), [1.0, 1.0], 0.5, 0.0, 3.0, false, |_| 1.0, tol);
        assert!(a.converged);
        assert!((a.value - (PI * 9.0 / 4.0 - PI * 0.25)).abs() < 1e-7, "{}", a.value);
        // Annulus about (1, 2) clipped by the quadrant: radius 1.5 cuts the axis x = 0.
        let b = about_point(quadrant(), [1.0, 2.0], 0.0, 1.5, false, |_| 1.0, tol);
        let h = 1.0;
        let seg = 1.5f64 * 1.5 * (h / 1.5f64).acos() - h * (1.5f64 * 1.5 - h * h).sqrt();
        assert!((b.value - (PI * 2.25 - seg)).abs() < 1e-7, "{}", b.value);
        // ∫ |x|^{-3} over the quadrant outside radius 1, in log radius.
        let g = about_origin(quadrant(), [0.0, 0.0], 0.0, 1.0, 1e6, true, |x| {
            (x[0] * x[0] + x[1] * x[1]).powf(-1.5)
        }, tol);
        assert!((g.value - PI / 2.0 * (1.0 - 1e-6)).abs() < 1e-7, "{}", g.value);
    }
}
