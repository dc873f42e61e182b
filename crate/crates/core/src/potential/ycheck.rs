//! The compensated process
//! `Y_n = V_β(x + Rx₀ + S(n))·1{τ_x > n} + c·Σ_{k<n∧τ_x} β(x + Rx₀ + S(k))`
//! with `V_β = u + U_β`, and the scan that picks `R`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeKind, Point};
use crate::increments::{IncrementModel, ModelKind};
use crate::mc::batch::{run_batched, McConfig};
use crate::mc::walk::Walker;
use crate::potential::beta::BetaField;
use crate::potential::f::FEvaluator;
use crate::potential::ubeta::UBetaGrid;
use crate::quadrature::gauss_legendre_4;
use crate::stats::{bonferroni_z, EstimateCI, Moments, Z95};

/// Family-wise level for the "nonincreasing within CI" verdict.
pub const Y_ALPHA: f64 = 0.05;
/// Interpolation error above which results carry a precision flag.
pub const PRECISION_LIMIT: f64 = 0.05;

/// Bound on each of `|f|/β` and `|f_β + β/2|/β` that keeps `Y` a supermartingale.
pub fn drift_threshold(c: f64) -> f64 {
    0.125 - 0.25 * c
}

/// `E[g(z + X)]` for the step law of `model`.
fn step_expectation<G: FnMut(&[f64]) -> f64>(model: &IncrementModel, z: [f64; 2], mut g: G) -> Result<f64> {
    match model.kind() {
        ModelKind::GaussianIdentity => {
            // Composite four-point Gauss–Legendre on z ± 8.5, panels of 0.2,
            // starting at the boundary where the axis crosses it.
            let axis = |c: f64| -> Vec<(f64, f64)> {
                let lo = (c - 8.5).max(0.0);
                let hi = c + 8.5;
                let panels = ((hi - lo) / 0.2).ceil() as usize;
                let h = (hi - lo) / panels as f64;
                let mut out = Vec::with_capacity(4 * panels);
                for k in 0..panels {
                    let a = lo + k as f64 * h;
                    for (t, w) in gauss_legendre_4() {
                        let v = a + 0.5 * h * (1.0 + t);
                        let phi = (-0.5 * (v - c) * (v - c)).exp() / (2.0 * std::f64::consts::PI).sqrt();
                        out.push((v, 0.5 * h * w * phi));
                    }
                }
                out
            };
            let (ax, ay) = (axis(z[0]), axis(z[1]));
            let mut total = 0.0;
            for &(a, wa) in &ax {
                let mut row = 0.0;
                for &(b, wb) in &ay {
                    row += wb * g(&[a, b]);
                }
                total += wa * row;
            }
            Ok(total)
        }
        ModelKind::CustomDiscrete(atoms) => {
            Ok(atoms.iter().map(|a| a.prob * g(&[z[0] + a.point[0], z[1] + a.point[1]])).sum())
        }
        _ => {
            let steps = model
                .lattice_steps()
                .ok_or_else(|| Error::Unsupported(format!("no step expectation for {}", model.name())))?;
            let s = std::f64::consts::SQRT_2;
            Ok(steps
                .iter()
                .map(|&((a, b), p)| p * g(&[z[0] + s * a as f64, z[1] + s * b as f64]))
                .sum())
        }
    }
}

/// Drift margins at one probe point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub z: [f64; 2],
    pub beta: f64,
    pub f: f64,
    /// `E[U_β(z + X)] - U_β(z)`.
    pub f_beta: f64,
}

impl ProbeRow {
    pub fn f_margin(&self) -> f64 {
        self.f.abs() / self.beta
    }

    pub fn drift_margin(&self) -> f64 {
        (self.f_beta + 0.5 * self.beta).abs() / self.beta
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftRow {
    pub r: f64,
    pub worst_f: f64,
    pub worst_drift: f64,
    pub passed: bool,
    pub probes: Vec<ProbeRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftScan {
    pub c: f64,
    pub threshold: f64,
    pub rows: Vec<ShiftRow>,
    /// Smallest candidate at which both margins hold on every probe.
    pub chosen: Option<f64>,
}

/// Offsets `y = r(cos θ, sin θ)` covering the closed quadrant, added to `Rx₀`.
pub fn probe_offsets() -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]];
    for r in [1.0, 2.0, 4.0, 8.0, 16.0] {
        for k in 0..=6 {
            let t = k as f64 * std::f64::consts::PI / 12.0;
            out.push([r * t.cos(), r * t.sin()]);
        }
    }
    out
}

/// Both drift margins at `z`.
pub fn probe(grid: &UBetaGrid, f: &FEvaluator, model: &IncrementModel, z: [f64; 2]) -> Result<ProbeRow> {
    let beta = grid.beta().eval(&z);
    let here = grid.value(&z)?;
    let mut beyond = false;
    let mean = step_expectation(model, z, |w| {
        grid.interpolate(w).unwrap_or_else(|| {
            beyond = true;
            0.0
        })
    })?;
    if beyond {
        return Err(Error::Input(format!("probe {z:?} reaches beyond the U_β table")));
    }
    Ok(ProbeRow { z, beta, f: f.eval(&z)?, f_beta: mean - here })
}

/// Try each `R` in `candidates` (increasing) and stop at the first one where
/// `|f| ≤ (1/8 - c/4)β` and `|f_β + β/2| ≤ (1/8 - c/4)β` on every probe.
pub fn scan_shift(grid: &UBetaGrid, model: &IncrementModel, c: f64, candidates: &[f64]) -> Result<ShiftScan> {
    let cone = &grid.beta().cone;
    let f = FEvaluator::new(cone, model)?;
    let threshold = drift_threshold(c);
    let axis = cone.axis();
    let mut rows = Vec::new();
    let mut chosen = None;
    for &r in candidates {
        let mut probes = Vec::new();
        for y in probe_offsets() {
            let z = [y[0] + r * axis.0[0], y[1] + r * axis.0[1]];
            probes.push(probe(grid, &f, model, z)?);
        }
        let worst_f = probes.iter().map(ProbeRow::f_margin).fold(0.0, f64::max);
        let worst_drift = probes.iter().map(ProbeRow::drift_margin).fold(0.0, f64::max);
        let passed = worst_f <= threshold && worst_drift <= threshold;
        rows.push(ShiftRow { r, worst_f, worst_drift, passed, probes });
        if passed {
            chosen = Some(r);
            break;
        }
    }
    Ok(ShiftScan { c, threshold, rows, chosen })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YRow {
    pub n: u64,
    pub mean: EstimateCI,
    /// `Ê[Y_n - Y_{n-1}]`, paired on paths.
    pub increment: EstimateCI,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YCheckReport {
    pub x: Vec<f64>,
    pub r: f64,
    pub c: f64,
    pub rows: Vec<YRow>,
    /// Normal quantile used for "within CI": Bonferroni over all increments.
    pub z_crit: f64,
    /// No increment is significantly positive.
    pub nonincreasing: bool,
    /// `Ê[Σ_{k<τ∧n_max} β(x + Rx₀ + S(k))]`.
    pub beta_sum: EstimateCI,
    /// `V_β(x + Rx₀)`.
    pub v_beta_start: f64,
    pub beta_sum_ok: bool,
    pub interpolation_error: f64,
    pub precision_flag: bool,
}

/// Monte Carlo check that `E[Y_n]` is nonincreasing over `n ≤ n_max` and
/// that `c·E[Σβ] ≤ V_β` with `c = 1/3`.
pub fn supermartingale_y_check(
    grid: &UBetaGrid,
    model: &IncrementModel,
    x: &Point,
    r: f64,
    c: f64,
    n_max: u64,
    cfg: &McConfig,
) -> Result<YCheckReport> {
    let beta: &BetaField = grid.beta();
    let cone = &beta.cone;
    if cone.kind() != ConeKind::Orthant(2) {
        return Err(Error::Unsupported(format!("Y check needs the quadrant, got {cone}")));
    }
    if n_max == 0 {
        return Err(Error::Parameter("n_max must be positive".into()));
    }
    let template = Walker::new(cone, model, x)?;
    let axis = cone.axis();
    let shift = [r * axis.0[0], r * axis.0[1]];
    let z0 = [x.0[0] + shift[0], x.0[1] + shift[1]];
    let v_beta = |z: &[f64]| -> Result<f64> { Ok(cone.u_coords(z) + grid.value(z)?) };
    let v0 = v_beta(&z0)?;
    let len = n_max as usize;

    type Part = (Vec<Moments>, Vec<Moments>, Moments);
    let parts = run_batched(cfg, |rng, count| -> Result<Part> {
        let mut w = template.clone();
        let mut means = vec![Moments::default(); len];
        let mut incs = vec![Moments::default(); len];
        let mut bsum = Moments::default();
        let mut pos = [0.0; 2];
        for _ in 0..count {
            w.reset();
            let mut comp = c * beta.eval(&z0);
            let mut sum_beta = beta.eval(&z0);
            let mut prev = v0;
            let mut alive = true;
            for n in 1..=n_max {
                let y = if alive {
                    alive = w.step(rng);
                    if alive {
                        w.position_into(&mut pos);
                        let z = [pos[0] + shift[0], pos[1] + shift[1]];
                        let yv = v_beta(&z)? + comp;
                        if n < n_max {
                            let b = beta.eval(&z);
                            comp += c * b;
                            sum_beta += b;
                        }
                        yv
                    } else {
                        comp
                    }
                } else {
                    comp
                };
                let i = n as usize - 1;
                means[i].push(y);
                incs[i].push(y - prev);
                prev = y;
            }
            bsum.push(sum_beta);
        }
        Ok((means, incs, bsum))
    })?;
    let mut means = vec![Moments::default(); len];
    let mut incs = vec![Moments::default(); len];
    let mut bsum = Moments::default();
    for part in parts {
        let (m, d, b) = part?;
        for (a, b) in means.iter_mut().zip(&m) {
            a.merge(b);
        }
        for (a, b) in incs.iter_mut().zip(&d) {
            a.merge(b);
        }
        bsum.merge(&b);
    }
    let z_crit = bonferroni_z(Y_ALPHA, len);
    let mut rows = Vec::with_capacity(len + 1);
    rows.push(YRow {
        n: 0,
        mean: EstimateCI { value: v0, half_width: 0.0, reps: cfg.reps, seed: cfg.seed },
        increment: EstimateCI { value: 0.0, half_width: 0.0, reps: cfg.reps, seed: cfg.seed },
    });
    for (i, (m, d)) in means.iter().zip(&incs).enumerate() {
        rows.push(YRow { n: i as u64 + 1, mean: m.estimate(cfg.seed), increment: d.estimate(cfg.seed) });
    }
    let nonincreasing = rows[1..]
        .iter()
        .all(|row| row.increment.value <= z_crit / Z95 * row.increment.half_width);
    let beta_sum = bsum.estimate(cfg.seed);
    Ok(YCheckReport {
        x: x.0.clone(),
        r,
        c,
        rows,
        z_crit,
        nonincreasing,
        beta_sum,
        v_beta_start: v0,
        beta_sum_ok: beta_sum.value <= 3.0 * v0 + beta_sum.half_width,
        interpolation_error: grid.interpolation_error,
        precision_flag: grid.interpolation_error > PRECISION_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    #[test]
    fn gaussian_step_expectation_matches_closed_forms() {
        let n = Normal::standard();
        let model = IncrementModel::gaussian(2).unwrap();
        for z in [[0.3, 2.0], [4.0, 4.0], [12.0, 1.0]] {
            let mass = step_expectation(&model, z, |_| 1.0).unwrap();
            let want = n.cdf(z[0]) * n.cdf(z[1]);
            assert!((mass - want).abs() < 1e-9, "{z:?} {mass} {want}");
            let g = |a: f64| a * n.cdf(a) + n.pdf(a);
            let prod = step_expectation(&model, z, |w| w[0] * w[1]).unwrap();
            assert!((prod - g(z[0]) * g(z[1])).abs() < 1e-10 * (1.0 + z[0] * z[1]));
        }
    }

    #[test]
    fn lattice_step_expectation_sums_atoms() {
        let model = IncrementModel::example1(crate::increments::make_pk_family(1).unwrap());
        let total = step_expectation(&model, [5.0, 0.0], |_| 1.0).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_at_one_third() {
        assert!((drift_threshold(1.0 / 3.0) - 1.0 / 24.0).abs() < 1e-15);
    }
}
