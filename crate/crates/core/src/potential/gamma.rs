//! Slowly varying majorants `γ` and their validation.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, integrate, Tolerance};

/// Grid density of the geometric validation grid.
pub const POINTS_PER_OCTAVE: usize = 8;
/// Default grid end `T = 2³⁰`.
pub const DEFAULT_T_MAX: f64 = 1_073_741_824.0;

#[derive(Clone, Debug, PartialEq)]
pub enum GammaShape {
    /// `1/log²(e + t)`.
    InvLogSq,
    /// `1/log(e + t)`.
    InvLog,
    Constant(f64),
    /// Values on a geometric grid, log-linear in between, flat below the grid
    /// and following the `1/log²` shape beyond it.
    Tabulated { ts: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaFn {
    pub shape: GammaShape,
    pub t_max: f64,
}

/// The floor `1/log²(e + t)` used by the default construction.
pub fn inv_log_sq(t: f64) -> f64 {
    let l = (E + t).ln();
    1.0 / (l * l)
}

fn loglog_weight(t: f64) -> f64 {
    (E.powf(E) + t).ln().ln()
}

/// `t_i = 2^{i/8}` on `[1, t_max]`.
pub fn geometric_grid(t_max: f64) -> Vec<f64> {
    let n = (t_max.log2() * POINTS_PER_OCTAVE as f64).round() as usize;
    (0..=n).map(|i| 2f64.powf(i as f64 / POINTS_PER_OCTAVE as f64)).collect()
}

impl GammaFn {
    pub fn inv_log_sq() -> Self {
        GammaFn { shape: GammaShape::InvLogSq, t_max: DEFAULT_T_MAX }
    }

    pub fn inv_log() -> Self {
        GammaFn { shape: GammaShape::InvLog, t_max: DEFAULT_T_MAX }
    }

    pub fn constant(c: f64) -> Self {
        GammaFn { shape: GammaShape::Constant(c), t_max: DEFAULT_T_MAX }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            GammaShape::InvLogSq => inv_log_sq(t.max(0.0)),
            GammaShape::InvLog => 1.0 / (E + t.max(0.0)).ln(),
            GammaShape::Constant(c) => *c,
            GammaShape::Tabulated { ts, values } => {
                if t <= ts[0] {
                    return values[0];
                }
                let i = ts.partition_point(|&s| s <= t);
                if i >= ts.len() {
                    let last = ts[ts.len() - 1];
                    return values[values.len() - 1] * inv_log_sq(t) / inv_log_sq(last);
                }
                let (t0, t1) = (ts[i - 1], ts[i]);
                let w = (t.ln() - t0.ln()) / (t1.ln() - t0.ln());
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    /// `γ(e^v)`, safe for `v` beyond the range of `f64` exponentials.
    pub fn eval_log(&self, v: f64) -> f64 {
        if v < 600.0 {
            return self.eval(v.exp());
        }
        // ln(e + e^v) = v to double precision here.
        match &self.shape {
            GammaShape::InvLogSq => 1.0 / (v * v),
            GammaShape::InvLog => 1.0 / v,
            GammaShape::Constant(c) => *c,
            GammaShape::Tabulated { ts, values } => {
                let last = ts[ts.len() - 1];
                values[values.len() - 1] / (v * v * inv_log_sq(last))
            }
        }
    }

    /// `Γ(s) = ∫_s^∞ γ(t)/t dt`; infinite when `γ(t)/t` is not integrable.
    pub fn tail_integral(&self, s: f64) -> f64 {
        if matches!(self.shape, GammaShape::Constant(_) | GammaShape::InvLog) {
            return f64::INFINITY;
        }
        let r = integrate(|v| self.eval_log(v), s.max(1e-300).ln(), f64::INFINITY, Tolerance::new(0.0, 1e-12));
        r.value
    }

    pub fn grid(&self) -> Vec<f64> {
        geometric_grid(self.t_max)
    }

    pub fn label(&self) -> String {
        match &self.shape {
            GammaShape::InvLogSq => "1/log^2(e+t)".into(),
            GammaShape::InvLog => "1/log(e+t)".into(),
            GammaShape::Constant(c) => format!("constant {c}"),
            GammaShape::Tabulated { .. } => "tabulated".into(),
        }
    }
}

/// A named pass/fail verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaRow {
    pub t: f64,
    pub gamma: f64,
    /// `sup_{s ≥ t} s^{2-p}·tail(s)`, when a tail is supplied.
    pub ell_bar: f64,
    /// Domination ratio `tail(t)·t^{2-p}/γ(t)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaReport {
    pub checks: Vec<NamedCheck>,
    pub rows: Vec<GammaRow>,
}

impl GammaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

fn suffix_max(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}

/// Heuristic `γ` for a tail `t ↦ E[|X|^p; |X| > t]`: the monotone envelope
/// `ℓ̄(t) = sup_{s≥t} s^{2-p} tail(s)` lifted by `log log(e^e + t)` and floored
/// by `1/log²(e + t)`. The candidate is only returned if it passes
/// [`validate_gamma`]; otherwise the failing checks are reported.
pub fn construct_gamma_default(
    tail: &dyn Fn(f64) -> f64,
    p: f64,
    t_max: f64,
) -> Result<(GammaFn, GammaReport)> {
    let ts = geometric_grid(t_max);
    let scaled: Vec<f64> = ts.iter().map(|&t| t.powf(2.0 - p) * tail(t)).collect();
    let ell_bar = suffix_max(&scaled);
    let lifted: Vec<f64> = ts
        .iter()
        .zip(&ell_bar)
        .map(|(&t, &l)| (l * loglog_weight(t)).max(inv_log_sq(t)))
        .collect();
    let values = suffix_max(&lifted);
    let g = GammaFn { shape: GammaShape::Tabulated { ts, values }, t_max };
    let report = validate_gamma(&g, Some(tail), p);
    if !report.passed() {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        return Err(Error::Construction(failed.join("; ")));
    }
    Ok((g, report))
}

/// Check positivity, monotonicity, slow variation, integrability of `γ(t)/t`
/// and (with a tail) domination `tail(t) ≤ ε(t) γ(t) t^{p-2}` with `ε(T/10) < 0.1`.
pub fn validate_gamma(g: &GammaFn, tail: Option<&dyn Fn(f64) -> f64>, p: f64) -> GammaReport {
    let ts = g.grid();
    let vals: Vec<f64> = ts.iter().map(|&t| g.eval(t)).collect();
    let mut checks = Vec::new();

    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(NamedCheck {
        name: "positive",
        passed: min > 0.0 && min.is_finite(),
        detail: format!("min γ = {min:e}"),
    });

    let worst_rise = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    checks.push(NamedCheck {
        name: "nonincreasing",
        passed: worst_rise <= 1e-15 * vals[0].abs(),
        detail: format!("largest rise {worst_rise:e}"),
    });

    // δ(t) = 1 - γ(2t)/γ(t) at octave points.
    let octaves = g.t_max.log2().floor() as usize;
    let deltas: Vec<f64> = (0..octaves).map(|k| {
        let t = 2f64.powi(k as i32);
        1.0 - g.eval(2.0 * t) / g.eval(t)
    }).collect();
    let tail_start = deltas.len() * 3 / 4;
    let last = deltas.last().copied().unwrap_or(1.0);
    let monotone_tail = deltas[tail_start..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let in_range = deltas.iter().all(|&d| d >= -1e-12);
    checks.push(NamedCheck {
        name: "slow_variation",
        passed: in_range && monotone_tail && last < 0.1,
        detail: format!("δ at last octave {last:.4}, nonincreasing over last quarter: {monotone_tail}"),
    });

    // Octave increments of ∫ γ(t)/t dt = ∫ γ(e^s) ds.
    let octave_integral = |k: usize| {
        let a = (k as f64) * std::f64::consts::LN_2;
        adaptive_simpson(|s| g.eval(s.exp()), a, a + std::f64::consts::LN_2, 1e-10)
    };
    let (i_prev, i_last) = if octaves >= 2 {
        (octave_integral(octaves - 2), octave_integral(octaves - 1))
    } else {
        (1.0, 1.0)
    };
    let ratio = i_last / i_prev;
    checks.push(NamedCheck {
        name: "integrability",
        passed: ratio < 0.95,
        detail: format!("octave increment ratio at T: {ratio:.4}"),
    });

    let mut rows: Vec<GammaRow> = ts
        .iter()
        .zip(&vals)
        .map(|(&t, &gv)| GammaRow { t, gamma: gv, ell_bar: f64::NAN, ratio: f64::NAN })
        .collect();
    if let Some(tail) = tail {
        let scaled: Vec<f64> = ts.iter().map(|&t| t.powf(2.0 - p) * tail(t)).collect();
        let ell_bar = suffix_max(&scaled);
        let ratios: Vec<f64> = scaled.iter().zip(&vals).map(|(s, gv)| s / gv).collect();
        let eps = suffix_max(&ratios);
        for ((row, l), r) in rows.iter_mut().zip(&ell_bar).zip(&ratios) {
            row.ell_bar = *l;
            row.ratio = *r;
        }
        let at = ts.partition_point(|&t| t < g.t_max / 10.0).min(ts.len() - 1);
        checks.push(NamedCheck {
            name: "domination",
            passed: eps[at] < 0.1,
            detail: format!("ε(T/10) = {:.4e}", eps[at]),
        });
    }
    GammaReport { checks, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_tail(t: f64) -> f64 {
        // P(|X| > t) = t^{-3} on t ≥ 1 gives E[X²; |X| > t] = 3/t.
        3.0 / t.max(1.0)
    }

    #[test]
    fn inv_log_sq_passes() {
        let r = validate_gamma(&GammaFn::inv_log_sq(), Some(&cubic_tail), 2.0);
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn inv_log_fails_integrability_only() {
        let r = validate_gamma(&GammaFn::inv_log(), Some(&cubic_tail), 2.0);
        assert_eq!(r.failures(), vec!["integrability"]);
    }

    #[test]
    fn constant_split_verdict() {
        let r = validate_gamma(&GammaFn::constant(1.0), Some(&cubic_tail), 2.0);
        assert!(r.check("domination").unwrap().passed);
        assert!(!r.check("integrability").unwrap().passed);
    }

    #[test]
    fn default_construction_on_light_and_compact_tails() {
        let (g, r) = construct_gamma_default(&cubic_tail, 2.0, DEFAULT_T_MAX).unwrap();
        assert!(r.passed());
        assert!((g.eval(1e6) - inv_log_sq(1e6)).abs() < 1e-3 * inv_log_sq(1e6));
        let compact = |t: f64| if t < 5.0 { 1.0 } else { 0.0 };
        let (g, _) = construct_gamma_default(&compact, 2.0, DEFAULT_T_MAX).unwrap();
        assert!((g.eval(100.0) - inv_log_sq(100.0)).abs() < 1e-3);
    }

    #[test]
    fn tail_integral_of_inv_log_sq() {
        let g = GammaFn::inv_log_sq();
        // For large s the e is negligible and Γ(s) = 1/ln s.
        let s = 1e30;
        assert!((g.tail_integral(s) - 1.0 / s.ln()).abs() < 1e-10);
        assert!(g.tail_integral(0.0).is_finite());
    }

    #[test]
    fn adversarial_tail_is_rejected() {
        // Non-decaying tail at p = 2: nothing slowly varying dominates it with ε → 0.
        let flat = |_t: f64| 1.0;
        assert!(matches!(
            construct_gamma_default(&flat, 2.0, DEFAULT_T_MAX),
            Err(Error::Construction(_))
        ));
    }
}
