use crate::geometry::{norm, ConeSpec};
use crate::potential::gamma::GammaFn;

/// `β(x) = |x|^{p-1} γ(d(x)) / d(x)` on the interior, zero elsewhere.
#[derive(Clone, Debug)]
pub struct BetaField {
    pub cone: ConeSpec,
    pub gamma: GammaFn,
    p: f64,
}

impl BetaField {
    pub fn new(cone: ConeSpec, gamma: GammaFn) -> Self {
        let p = cone.exponent_p();
        BetaField { cone, gamma, p }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.cone.dist_coords(x);
        if d <= 0.0 {
            return 0.0;
        }
        norm(x).powf(self.p - 1.0) * self.gamma.eval(d) / d
    }
}
