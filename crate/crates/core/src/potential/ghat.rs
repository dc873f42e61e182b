//! The comparison kernel `Ĝ(x, y)` and its four regions.

use crate::error::{Error, Result};
use crate::geometry::{norm, ConeSpec, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GhatCase {
    /// `|x| ≤ |y|`, `|x - y| ≥ A|y|`.
    NearOrigin,
    /// `|y| ≤ |x|`, `|x - y| ≥ A|y|`.
    FarField,
    /// `d(y)/2 ≤ |x - y| ≤ A|y|`.
    Intermediate,
    /// `|x - y| < d(y)/2`.
    Local,
}

/// The raw region predicates, in the order they are tried.
pub fn ghat_predicates(x: &[f64], y: &[f64], a_const: f64, cone: &ConeSpec) -> [bool; 4] {
    let nx = norm(x);
    let ny = norm(y);
    let dxy = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let dy = cone.dist_coords(y);
    [
        nx <= ny && dxy >= a_const * ny,
        ny <= nx && dxy >= a_const * ny,
        dy / 2.0 <= dxy && dxy <= a_const * ny,
        dxy < dy / 2.0,
    ]
}

pub fn ghat_case(x: &[f64], y: &[f64], a_const: f64, cone: &ConeSpec) -> Option<GhatCase> {
    let cases = [GhatCase::NearOrigin, GhatCase::FarField, GhatCase::Intermediate, GhatCase::Local];
    ghat_predicates(x, y, a_const, cone)
        .iter()
        .position(|&b| b)
        .map(|i| cases[i])
}

/// Value of the kernel in a known case; no checks.
#[inline]
pub(crate) fn ghat_in_case(case: GhatCase, x: &[f64], y: &[f64], cone: &ConeSpec) -> f64 {
    let d = cone.dim() as f64;
    let p = cone.exponent_p();
    let nx = norm(x);
    let ny = norm(y);
    let dxy = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    match case {
        GhatCase::NearOrigin => cone.u_coords(x) * cone.u_coords(y) / ny.powf(d - 2.0 + 2.0 * p),
        GhatCase::FarField => cone.u_coords(x) * cone.u_coords(y) / nx.powf(d - 2.0 + 2.0 * p),
        GhatCase::Intermediate => {
            cone.u_coords(x) * cone.u_coords(y)
                / (nx.powf(p - 1.0) * ny.powf(p - 1.0) * dxy.powf(d))
        }
        GhatCase::Local => {
            if cone.dim() == 2 {
                (cone.dist_coords(y) / dxy).ln()
            } else {
                dxy.powf(2.0 - d)
            }
        }
    }
}

pub fn ghat_eval(x: &Point, y: &Point, a_const: f64, cone: &ConeSpec) -> Result<(f64, GhatCase)> {
    if !(a_const > 0.0 && a_const < 1.0) {
        return Err(Error::Parameter(format!("A = {a_const} outside (0, 1)")));
    }
    for (name, p) in [("x", x), ("y", y)] {
        if !cone.contains(p)? {
            return Err(Error::Input(format!("{name} = {:?} is not interior", p.0)));
        }
    }
    if x == y {
        return Err(Error::Singular("Ĝ(x, x) is undefined".into()));
    }
    let case = ghat_case(x.coords(), y.coords(), a_const, cone)
        .ok_or_else(|| Error::Verification(format!("no Ĝ region for x={:?}, y={:?}", x.0, y.0)))?;
    Ok((ghat_in_case(case, x.coords(), y.coords(), cone), case))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_value() {
        let cone = ConeSpec::orthant(2);
        let (v, case) = ghat_eval(&Point::from([1.0, 1.0]), &Point::from([10.0, 10.0]), 0.5, &cone).unwrap();
        assert_eq!(case, GhatCase::NearOrigin);
        assert!((v - 2.5e-3).abs() < 1e-15);
    }

    #[test]
    fn local_value() {
        let cone = ConeSpec::orthant(2);
        let y = Point::from([8.0, 8.0]);
        let x = Point::from([10.0, 8.0]);
        let (v, case) = ghat_eval(&x, &y, 0.5, &cone).unwrap();
        assert_eq!(case, GhatCase::Local);
        assert!((v - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn swapped_roles_use_larger_norm() {
        let cone = ConeSpec::orthant(2);
        let x = Point::from([10.0, 10.0]);
        let y = Point::from([1.0, 1.0]);
        let (v, case) = ghat_eval(&x, &y, 0.5, &cone).unwrap();
        assert_eq!(case, GhatCase::FarField);
        assert!((v - 100.0 / 40000.0).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_are_singular() {
        let cone = ConeSpec::orthant(2);
        let x = Point::from([1.0, 2.0]);
        assert!(matches!(ghat_eval(&x, &x, 0.5, &cone), Err(Error::Singular(_))));
    }
}
