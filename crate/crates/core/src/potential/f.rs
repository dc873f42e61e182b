//! The one-step defect `f(x) = E[u(x + X)] - u(x)` with `u` zero outside the cone.

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{ConeKind, ConeSpec, Point};
use crate::increments::{IncrementModel, ModelKind, Rational};
use crate::potential::beta::BetaField;
use crate::quadrature::{integrate_finite, Tolerance};
use crate::special::{positive_part_excess, positive_part_mean};

const LATTICE_SNAP: f64 = 1e-9;
const EXACT_COORD_LIMIT: i64 = 1_000_000;

#[derive(Clone, Debug)]
enum Method {
    /// Product of one-dimensional positive-part means.
    GaussClosed,
    /// Angular and radial quadrature for Gaussian steps on a planar cone.
    GaussPolar { lo: f64, hi: f64 },
    Atoms {
        steps: Vec<(Vec<f64>, f64)>,
        lattice: Option<Vec<((i64, i64), Rational)>>,
    },
}

/// Evaluator of `f` for a fixed cone and step law.
#[derive(Clone, Debug)]
pub struct FEvaluator {
    cone: ConeSpec,
    method: Method,
}

fn snap_lattice(x: &[f64]) -> Option<(i64, i64)> {
    let a = x[0] / std::f64::consts::SQRT_2;
    let b = x[1] / std::f64::consts::SQRT_2;
    let (ra, rb) = (a.round(), b.round());
    let close = (a - ra).abs() < LATTICE_SNAP && (b - rb).abs() < LATTICE_SNAP;
    (close && ra.abs() < EXACT_COORD_LIMIT as f64 && rb.abs() < EXACT_COORD_LIMIT as f64)
        .then_some((ra as i64, rb as i64))
}

impl FEvaluator {
    pub fn new(cone: &ConeSpec, model: &IncrementModel) -> Result<Self> {
        if cone.dim() != model.dim() {
            return Err(Error::Input(format!(
                "cone {cone} has dimension {} but model {} has dimension {}",
                cone.dim(),
                model.name(),
                model.dim()
            )));
        }
        let method = match model.kind() {
            ModelKind::GaussianIdentity => match cone.kind() {
                ConeKind::HalfLine | ConeKind::HalfSpace(_) | ConeKind::Orthant(_) => Method::GaussClosed,
                _ => {
                    let (lo, hi) = cone.sector().ok_or_else(|| {
                        Error::Unsupported(format!("no quadrature for f on {cone}"))
                    })?;
                    Method::GaussPolar { lo, hi }
                }
            },
            ModelKind::Example1(_) | ModelKind::Example2(_) => {
                let steps = model
                    .lattice_steps()
                    .unwrap_or_default()
                    .into_iter()
                    .map(|((a, b), p)| {
                        (vec![a as f64 * std::f64::consts::SQRT_2, b as f64 * std::f64::consts::SQRT_2], p)
                    })
                    .collect();
                let polynomial = matches!(
                    cone.kind(),
                    ConeKind::WeylD2 | ConeKind::Orthant(2) | ConeKind::HalfSpace(2)
                );
                let lattice = if polynomial { model.lattice_steps_exact() } else { None };
                Method::Atoms { steps, lattice }
            }
            ModelKind::CustomDiscrete(atoms) => Method::Atoms {
                steps: atoms.iter().map(|a| (a.point.clone(), a.prob)).collect(),
                lattice: None,
            },
        };
        Ok(FEvaluator { cone: cone.clone(), method })
    }

    /// Whether an evaluation is cheap enough to run at every step of a walk.
    pub fn is_fast(&self) -> bool {
        match &self.method {
            Method::GaussClosed => true,
            Method::GaussPolar { .. } => false,
            Method::Atoms { steps, .. } => steps.len() <= 64,
        }
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.cone.dim() {
            return Err(Error::Input(format!("point of dimension {} for f on {}", x.len(), self.cone)));
        }
        Ok(match &self.method {
            Method::GaussClosed => self.gauss_closed(x),
            Method::GaussPolar { lo, hi } => self.gauss_polar(x, *lo, *hi)?,
            Method::Atoms { steps, lattice } => {
                if let (Some(exact), Some((a, b))) = (lattice, snap_lattice(x)) {
                    self.lattice_exact(exact, a, b)
                } else {
                    self.atom_sum(steps, x)
                }
            }
        })
    }

    fn gauss_closed(&self, x: &[f64]) -> f64 {
        match self.cone.kind() {
            ConeKind::HalfLine => positive_part_mean(x[0]) - x[0].max(0.0),
            ConeKind::HalfSpace(d) => positive_part_mean(x[d - 1]) - x[d - 1].max(0.0),
            _ => {
                if !self.cone.contains_coords(x) {
                    return x.iter().map(|&c| positive_part_mean(c)).product();
                }
                // Π(x_i + e_i) - Π x_i telescoped so nothing cancels.
                let mut total = 0.0;
                for i in 0..x.len() {
                    let before: f64 = x[..i].iter().map(|&c| positive_part_mean(c)).product();
                    let after: f64 = x[i + 1..].iter().product();
                    total += positive_part_excess(x[i]) * before * after;
                }
                total
            }
        }
    }

    fn gauss_polar(&self, x: &[f64], lo: f64, hi: f64) -> Result<f64> {
        let p = self.cone.exponent_p();
        let r0 = x[0].hypot(x[1]);
        let inner_tol = Tolerance::new(0.0, 1e-12);
        let mut failed = false;
        let outer = integrate_finite(
            |theta: f64| {
                let (s, c) = theta.sin_cos();
                let a = x[0] * c + x[1] * s;
                let b2 = (r0 * r0 - a * a).max(0.0);
                let lo_r = (a - 12.0).max(0.0);
                let hi_r = a.max(0.0) + 12.0;
                let mut brk = vec![lo_r];
                if a > lo_r && a < hi_r {
                    brk.push(a);
                }
                brk.push(hi_r);
                let r = integrate_finite(
                    |r: f64| r.powf(p + 1.0) * (-0.5 * (r - a) * (r - a)).exp(),
                    &brk,
                    inner_tol,
                );
                failed |= !r.converged;
                self.cone.angular_profile(theta) * r.value * (-0.5 * b2).exp()
                    / (2.0 * std::f64::consts::PI)
            },
            &[lo, hi],
            Tolerance::new(0.0, 1e-10),
        );
        if failed || !outer.converged {
            return Err(Error::Accuracy(format!("f quadrature at {x:?}")));
        }
        Ok(outer.value - self.cone.u_coords(x))
    }

    fn atom_sum(&self, steps: &[(Vec<f64>, f64)], x: &[f64]) -> f64 {
        let mut buf = vec![0.0; x.len()];
        let mut total = -self.cone.u_coords(x);
        for (s, p) in steps {
            for ((b, xi), si) in buf.iter_mut().zip(x).zip(s) {
                *b = xi + si;
            }
            total += p * self.cone.u_coords(&buf);
        }
        total
    }

    fn lattice_exact(&self, steps: &[((i64, i64), Rational)], a: i64, b: i64) -> f64 {
        let u = |a: i64, b: i64| self.cone.u_coords(&[a as f64, b as f64]) as i64;
        let mut total = Rational::from(-u(a, b));
        for ((da, db), p) in steps {
            total += p * u(a + da, b + db);
        }
        if total.is_zero() {
            return 0.0;
        }
        let scale = 2f64.powf(self.cone.exponent_p() / 2.0);
        total.to_f64().unwrap_or(f64::NAN) * scale
    }
}

/// One-off evaluation of `f` at `x`.
pub fn f_value(cone: &ConeSpec, model: &IncrementModel, x: &Point) -> Result<f64> {
    FEvaluator::new(cone, model)?.eval(x.coords())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FBoundRow {
    pub t: f64,
    pub f_abs: f64,
    pub beta: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FBoundScan {
    pub rows: Vec<FBoundRow>,
    /// Ratio at the largest `t` is below half the ratio at the smallest.
    pub decays: bool,
}

/// `|f(t·ray)| / β(t·ray)` along a ray.
pub fn f_bound_scan(
    model: &IncrementModel,
    beta: &BetaField,
    ray: &Point,
    t_list: &[f64],
) -> Result<FBoundScan> {
    if t_list.is_empty() {
        return Err(Error::Input("f scan needs at least one t".into()));
    }
    let f = FEvaluator::new(&beta.cone, model)?;
    let n = ray.norm();
    if !(n > 0.0) || !beta.cone.contains(ray)? {
        return Err(Error::Input(format!("ray {:?} is not an interior direction", ray.0)));
    }
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let x: Vec<f64> = ray.coords().iter().map(|c| c * t / n).collect();
        let fv = f.eval(&x)?.abs();
        let b = beta.eval(&x);
        rows.push(FBoundRow { t, f_abs: fv, beta: b, ratio: fv / b });
    }
    let decays = rows.len() >= 2 && rows[rows.len() - 1].ratio < 0.5 * rows[0].ratio;
    Ok(FBoundScan { rows, decays })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::make_pk_family;
    use crate::potential::gamma::GammaFn;

    #[test]
    fn gaussian_orthant_closed_form() {
        let cone = ConeSpec::orthant(2);
        let f = FEvaluator::new(&cone, &IncrementModel::gaussian(2).unwrap()).unwrap();
        let g = positive_part_mean(0.5);
        let v = f.eval(&[0.5, 0.5]).unwrap();
        assert!((v - (g * g - 0.25)).abs() < 1e-14);
        assert!(v > 0.0);
        // Deep inside the defect is exponentially small but still resolved.
        let deep = f.eval(&[30.0, 30.0]).unwrap();
        assert!((0.0..1e-150).contains(&deep));
    }

    #[test]
    fn gaussian_halfline_closed_form() {
        let f = FEvaluator::new(&ConeSpec::half_line(), &IncrementModel::gaussian(1).unwrap()).unwrap();
        assert!((f.eval(&[0.0]).unwrap() - crate::special::normal_pdf(0.0)).abs() < 1e-15);
    }

    #[test]
    fn lattice_family_one_is_exactly_harmonic() {
        let cone = ConeSpec::weyl_d2();
        let model = IncrementModel::example1(make_pk_family(1).unwrap());
        let f = FEvaluator::new(&cone, &model).unwrap();
        let s = std::f64::consts::SQRT_2;
        assert_eq!(f.eval(&[2.0 * s, 0.0]).unwrap(), 0.0);
        assert_eq!(f.eval(&[5.0 * s, 3.0 * s]).unwrap(), 0.0);
    }

    #[test]
    fn polar_quadrature_matches_closed_form_on_a_right_angle() {
        // The wedge of opening π/2 is the orthant rotated by π/4, with u scaled by 2.
        let wedge = ConeSpec::new(ConeKind::Wedge2D(std::f64::consts::FRAC_PI_2)).unwrap();
        let gauss = IncrementModel::gaussian(2).unwrap();
        let fw = FEvaluator::new(&wedge, &gauss).unwrap();
        let fo = FEvaluator::new(&ConeSpec::orthant(2), &gauss).unwrap();
        let (c, s) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
        for y in [[0.4, 0.7], [1.5, 0.2], [2.0, 2.5]] {
            let x = [c * y[0] + s * y[1], -s * y[0] + c * y[1]];
            let a = fw.eval(&x).unwrap();
            let b = 2.0 * fo.eval(&y).unwrap();
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn scan_ratio_decays_on_bisector() {
        let beta = BetaField::new(ConeSpec::orthant(2), GammaFn::inv_log_sq());
        let scan = f_bound_scan(
            &IncrementModel::gaussian(2).unwrap(),
            &beta,
            &Point::from([1.0, 1.0]),
            &[2.0, 4.0, 8.0, 16.0, 32.0],
        )
        .unwrap();
        assert!(scan.decays);
    }
}
