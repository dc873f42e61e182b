//! Closed-form cones.
//!
//! Every cone here is open, has an explicit positive harmonic function `u`
//! vanishing on the boundary, and a homogeneity exponent `p` with
//! `u(λx) = λ^p u(x)`. Outside the cone `u` is taken to be zero, including
//! where the algebraic expression would be negative.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("point has no coordinates".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Input(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(c: [f64; N]) -> Self {
        Point(c.to_vec())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConeKind {
    /// `(0, ∞)`.
    HalfLine,
    /// `{x ∈ R^d : x_d > 0}`.
    HalfSpace(usize),
    /// `{x ∈ R^d : x_i > 0 for all i}`.
    Orthant(usize),
    /// Planar wedge of opening `α`, symmetric about the positive first axis.
    Wedge2D(f64),
    /// Weyl chamber of type D in the plane, `{|x_2| < x_1}`.
    WeylD2,
}

/// A cone with closed-form harmonic function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    kind: ConeKind,
    dim: usize,
}

/// Output of [`ConeSpec::assumption_g_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GProbe {
    pub c_low: f64,
    pub c_high: f64,
}

impl ConeSpec {
    pub fn new(kind: ConeKind) -> Result<Self> {
        let dim = match kind {
            ConeKind::HalfLine => 1,
            ConeKind::HalfSpace(d) | ConeKind::Orthant(d) => {
                if d == 0 {
                    return Err(Error::Input("cone dimension must be positive".into()));
                }
                d
            }
            ConeKind::Wedge2D(alpha) => {
                if !(alpha > 0.0 && alpha < 2.0 * PI) {
                    return Err(Error::Input(format!(
                        "wedge angle {alpha} outside the open interval (0, 2π)"
                    )));
                }
                2
            }
            ConeKind::WeylD2 => 2,
        };
        Ok(ConeSpec { kind, dim })
    }

    pub fn half_line() -> Self {
        ConeSpec { kind: ConeKind::HalfLine, dim: 1 }
    }

    pub fn orthant(d: usize) -> Self {
        Self::new(ConeKind::Orthant(d)).expect("orthant dimension must be positive")
    }

    pub fn weyl_d2() -> Self {
        ConeSpec { kind: ConeKind::WeylD2, dim: 2 }
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Input(format!(
                "point of dimension {} given for a cone of dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Membership in the open cone.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_dim(&x.0)?;
        Ok(self.contains_coords(&x.0))
    }

    /// Unchecked membership test; `x.len()` must equal `self.dim()`.
    #[inline]
    pub fn contains_coords(&self, x: &[f64]) -> bool {
        match self.kind {
            ConeKind::HalfLine => x[0] > 0.0,
            ConeKind::HalfSpace(d) => x[d - 1] > 0.0,
            ConeKind::Orthant(_) => x.iter().all(|&c| c > 0.0),
            ConeKind::Wedge2D(alpha) => {
                (x[0] != 0.0 || x[1] != 0.0) && x[1].atan2(x[0]).abs() < alpha / 2.0
            }
            ConeKind::WeylD2 => x[1].abs() < x[0],
        }
    }

    /// Euclidean distance to the boundary. Points outside the cone get 0.
    pub fn dist_to_boundary(&self, x: &Point) -> Result<f64> {
        self.check_dim(&x.0)?;
        Ok(self.dist_coords(&x.0))
    }

    pub fn dist_coords(&self, x: &[f64]) -> f64 {
        if !self.contains_coords(x) {
            return 0.0;
        }
        match self.kind {
            ConeKind::HalfLine => x[0],
            ConeKind::HalfSpace(d) => x[d - 1],
            ConeKind::Orthant(_) => x.iter().copied().fold(f64::INFINITY, f64::min),
            ConeKind::Wedge2D(alpha) => {
                let r = norm(x);
                let theta = x[1].atan2(x[0]);
                let to_ray = |phi: f64| {
                    let mut delta = (theta - phi).abs();
                    if delta > PI {
                        delta = 2.0 * PI - delta;
                    }
                    if delta <= FRAC_PI_2 {
                        r * delta.sin()
                    } else {
                        r
                    }
                };
                to_ray(alpha / 2.0).min(to_ray(-alpha / 2.0))
            }
            ConeKind::WeylD2 => (x[0] - x[1].abs()) * FRAC_1_SQRT_2,
        }
    }

    /// The harmonic function, zero outside the cone.
    pub fn u_value(&self, x: &Point) -> Result<f64> {
        self.check_dim(&x.0)?;
        Ok(self.u_coords(&x.0))
    }

    #[inline]
    pub fn u_coords(&self, x: &[f64]) -> f64 {
        if !self.contains_coords(x) {
            return 0.0;
        }
        self.u_algebraic(x)
    }

    /// The closed-form expression without the zero extension.
    #[inline]
    pub fn u_algebraic(&self, x: &[f64]) -> f64 {
        match self.kind {
            ConeKind::HalfLine => x[0],
            ConeKind::HalfSpace(d) => x[d - 1],
            ConeKind::Orthant(_) => x.iter().product(),
            ConeKind::Wedge2D(alpha) => {
                let r = norm(x);
                let theta = x[1].atan2(x[0]);
                r.powf(PI / alpha) * (PI * (theta + alpha / 2.0) / alpha).sin()
            }
            ConeKind::WeylD2 => x[0] * x[0] - x[1] * x[1],
        }
    }

    /// Homogeneity degree of `u`.
    pub fn exponent_p(&self) -> f64 {
        match self.kind {
            ConeKind::HalfLine | ConeKind::HalfSpace(_) => 1.0,
            ConeKind::Orthant(d) => d as f64,
            ConeKind::Wedge2D(alpha) => PI / alpha,
            ConeKind::WeylD2 => 2.0,
        }
    }

    /// The fixed interior unit direction `x₀`: the bisector or all-ones axis.
    pub fn axis(&self) -> Point {
        match self.kind {
            ConeKind::HalfLine => Point(vec![1.0]),
            ConeKind::HalfSpace(d) => {
                let mut v = vec![0.0; d];
                v[d - 1] = 1.0;
                Point(v)
            }
            ConeKind::Orthant(d) => Point(vec![1.0 / (d as f64).sqrt(); d]),
            ConeKind::Wedge2D(_) | ConeKind::WeylD2 => Point(vec![1.0, 0.0]),
        }
    }

    /// Angular sector `(θ_lo, θ_hi)` of a planar cone, with `u = r^p Θ(θ)`.
    pub fn sector(&self) -> Option<(f64, f64)> {
        match self.kind {
            ConeKind::HalfSpace(2) => Some((0.0, PI)),
            ConeKind::Orthant(2) => Some((0.0, FRAC_PI_2)),
            ConeKind::Wedge2D(alpha) => Some((-alpha / 2.0, alpha / 2.0)),
            ConeKind::WeylD2 => Some((-FRAC_PI_4, FRAC_PI_4)),
            _ => None,
        }
    }

    /// Angular factor `Θ(θ)` of `u` for planar cones.
    pub fn angular_profile(&self, theta: f64) -> f64 {
        match self.kind {
            ConeKind::HalfSpace(2) => theta.sin(),
            ConeKind::Orthant(2) => theta.cos() * theta.sin(),
            ConeKind::Wedge2D(alpha) => (PI * (theta + alpha / 2.0) / alpha).sin(),
            ConeKind::WeylD2 => (2.0 * theta).cos(),
            _ => f64::NAN,
        }
    }

    /// Min and max of `u(x) / (|x|^{p-1} d(x))` over interior samples.
    pub fn assumption_g_probe(&self, samples: &[Point]) -> Result<GProbe> {
        if samples.is_empty() {
            return Err(Error::Input("assumption (G) probe needs at least one sample".into()));
        }
        let p = self.exponent_p();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in samples {
            if !self.contains(x)? {
                return Err(Error::Input(format!("sample {:?} is not interior", x.0)));
            }
            let ratio = self.u_coords(&x.0) / (x.norm().powf(p - 1.0) * self.dist_coords(&x.0));
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        Ok(GProbe { c_low: lo, c_high: hi })
    }

    /// `|u(x+y) - u(x)| / (|y| (|x|^{p-1} + |y|^{p-1}))`, the quantity bounded
    /// by the difference estimate on `u`.
    pub fn difference_ratio(&self, x: &[f64], y: &[f64]) -> f64 {
        let p = self.exponent_p();
        let shifted: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let ny = norm(y);
        let denom = ny * (norm(x).powf(p - 1.0) + ny.powf(p - 1.0));
        (self.u_coords(&shifted) - self.u_coords(x)).abs() / denom
    }
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConeKind::HalfLine => write!(f, "halfline"),
            ConeKind::HalfSpace(d) => write!(f, "halfspace:{d}"),
            ConeKind::Orthant(d) => write!(f, "orthant:{d}"),
            ConeKind::Wedge2D(a) => write!(f, "wedge:{a}"),
            ConeKind::WeylD2 => write!(f, "weyl_d2"),
        }
    }
}

impl FromStr for ConeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let dim_arg = |a: Option<&str>| -> Result<usize> {
            let a = a.ok_or_else(|| Error::Input(format!("cone `{s}` needs a dimension")))?;
            a.parse::<usize>()
                .map_err(|_| Error::Input(format!("cone `{s}`: bad dimension `{a}`")))
        };
        let kind = match (head, arg) {
            ("halfline", None) => ConeKind::HalfLine,
            ("weyl_d2", None) => ConeKind::WeylD2,
            ("halfspace", a) => ConeKind::HalfSpace(dim_arg(a)?),
            ("orthant", a) => ConeKind::Orthant(dim_arg(a)?),
            ("wedge", Some(a)) => {
                let alpha = a
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("cone `{s}`: bad angle `{a}`")))?;
                ConeKind::Wedge2D(alpha)
            }
            _ => return Err(Error::Input(format!("unknown cone `{s}`"))),
        };
        ConeSpec::new(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn wedge(alpha: f64) -> ConeSpec {
        ConeSpec::new(ConeKind::Wedge2D(alpha)).unwrap()
    }

    #[test]
    fn membership_examples() {
        let weyl = ConeSpec::weyl_d2();
        assert!(weyl.contains(&[2.0, 1.0].into()).unwrap());
        assert!(!weyl.contains(&[1.0, 1.0].into()).unwrap());
        let q = ConeSpec::orthant(2);
        assert!(q.contains(&[2.0, 3.0].into()).unwrap());
        assert!(!q.contains(&[0.0, 3.0].into()).unwrap());
        assert!(matches!(q.contains(&[1.0].into()), Err(Error::Input(_))));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(ConeSpec::half_line().dist_to_boundary(&[5.0].into()).unwrap(), 5.0);
        assert_eq!(ConeSpec::orthant(2).dist_to_boundary(&[2.0, 3.0].into()).unwrap(), 2.0);
        let d = ConeSpec::weyl_d2().dist_to_boundary(&[2.0, 0.0].into()).unwrap();
        assert!((d - SQRT_2).abs() < 1e-15);
        assert_eq!(ConeSpec::weyl_d2().dist_to_boundary(&[1.0, 3.0].into()).unwrap(), 0.0);
    }

    #[test]
    fn wedge_distance_reflex_and_convex() {
        // Convex wedge of opening π/2: distance to the nearest edge ray.
        let w = wedge(FRAC_PI_2);
        let d = w.dist_coords(&[1.0, 0.0]);
        assert!((d - FRAC_1_SQRT_2).abs() < 1e-14);
        // Reflex wedge: the origin is the nearest boundary point along the axis.
        let w = wedge(1.5 * PI);
        assert!((w.dist_coords(&[1.0, 0.0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn u_examples() {
        assert_eq!(ConeSpec::weyl_d2().u_value(&[2.0, 1.0].into()).unwrap(), 3.0);
        assert_eq!(ConeSpec::half_line().u_value(&[5.0].into()).unwrap(), 5.0);
        assert_eq!(ConeSpec::orthant(2).u_value(&[2.0, 3.0].into()).unwrap(), 6.0);
        // Zero extension where the algebraic form is negative.
        assert_eq!(ConeSpec::weyl_d2().u_value(&[1.0, 3.0].into()).unwrap(), 0.0);
        // Half-plane wedge about the +x axis reduces to the first coordinate.
        let w = wedge(PI);
        assert!((w.u_coords(&[0.3, 1.7]) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(ConeSpec::weyl_d2().exponent_p(), 2.0);
        assert!((wedge(PI).exponent_p() - 1.0).abs() < 1e-15);
        assert_eq!(ConeSpec::orthant(3).exponent_p(), 3.0);
    }

    #[test]
    fn g_probe_examples() {
        let hl = ConeSpec::half_line();
        let r = hl.assumption_g_probe(&[[1.0].into(), [2.0].into(), [5.0].into()]).unwrap();
        assert_eq!((r.c_low, r.c_high), (1.0, 1.0));

        let q = ConeSpec::orthant(2);
        let samples: Vec<Point> = [0.5, 1.0, 3.0, 10.0].iter().map(|&t| [t, t].into()).collect();
        let r = q.assumption_g_probe(&samples).unwrap();
        assert!((r.c_low - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((r.c_high - FRAC_1_SQRT_2).abs() < 1e-12);

        let w = ConeSpec::weyl_d2();
        let r = w.assumption_g_probe(&[[2.0, 0.0].into(), [4.0, 0.0].into()]).unwrap();
        assert!((r.c_high - r.c_low).abs() < 1e-12 && r.c_low > 0.0);

        assert!(matches!(q.assumption_g_probe(&[]), Err(Error::Input(_))));
        assert!(q.assumption_g_probe(&[[1.0, -1.0].into()]).is_err());
    }

    #[test]
    fn grammar() {
        for s in ["halfline", "halfspace:3", "orthant:2", "wedge:1.5", "weyl_d2"] {
            let c: ConeSpec = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<ConeSpec>().unwrap(), c);
        }
        let err = "wedge:6.7".parse::<ConeSpec>().unwrap_err().to_string();
        assert!(err.contains("(0, 2π)"), "{err}");
        assert!("orthant".parse::<ConeSpec>().is_err());
        assert!("sphere".parse::<ConeSpec>().is_err());
    }

    #[test]
    fn polar_profile_matches_closed_form() {
        for cone in [ConeSpec::orthant(2), ConeSpec::weyl_d2(), wedge(2.0), wedge(4.0)] {
            let (lo, hi) = cone.sector().unwrap();
            let p = cone.exponent_p();
            for i in 1..20 {
                let theta = lo + (hi - lo) * i as f64 / 20.0;
                let r = 1.7;
                let x = [r * theta.cos(), r * theta.sin()];
                let polar = r.powf(p) * cone.angular_profile(theta);
                assert!((polar - cone.u_coords(&x)).abs() < 1e-12 * (1.0 + polar.abs()));
            }
        }
    }
}
