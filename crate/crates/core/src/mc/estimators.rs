//! Monte Carlo estimators built on shared trajectories.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeKind, ConeSpec, Point};
use crate::increments::{IncrementModel, TailKind};
use crate::mc::batch::{run_batched, McConfig};
use crate::mc::walk::Walker;
use crate::potential::f::FEvaluator;
use crate::stats::{weighted_least_squares, proportion_estimate, EstimateCI, Moments};

/// Below this many replications outputs carry a warning.
pub const MIN_REPS: u64 = 100;
/// Per-path step cap for run-to-exit estimators.
pub const DEFAULT_HORIZON_CAP: u64 = 10_000_000;
/// Capped-path fraction above which a run-to-exit estimate is flagged.
pub const CAP_FLAG_FRACTION: f64 = 1e-3;

fn check_horizons(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Input("horizon list is empty".into()));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input(format!("horizons must be positive and strictly increasing: {n_list:?}")));
    }
    Ok(())
}

/// Sufficient statistics of one shared-trajectory pass.
#[derive(Clone, Debug, Default)]
struct Survey {
    /// `hist[i]`: paths that survived exactly the first `i` horizons.
    hist: Vec<u64>,
    /// Moments of `u(x + S(n_j))·1{τ > n_j}`.
    u: Vec<Moments>,
}

impl Survey {
    fn new(len: usize) -> Self {
        Survey { hist: vec![0; len + 1], u: vec![Moments::default(); len] }
    }

    fn merge(&mut self, other: &Survey) {
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        for (a, b) in self.u.iter_mut().zip(&other.u) {
            a.merge(b);
        }
    }

    fn survivors(&self, j: usize) -> u64 {
        self.hist[j + 1..].iter().sum()
    }

    fn total(&self) -> u64 {
        self.hist.iter().sum()
    }
}

fn survey(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n_list: &[u64],
    cfg: &McConfig,
    record_u: bool,
) -> Result<Survey> {
    check_horizons(n_list)?;
    let template = Walker::new(cone, model, x)?;
    let n_max = *n_list.last().expect("nonempty");
    let parts = run_batched(cfg, |rng, count| {
        let mut w = template.clone();
        let mut s = Survey::new(n_list.len());
        let mut uvals = vec![0.0; n_list.len()];
        for _ in 0..count {
            w.reset();
            let mut j = 0;
            for k in 1..=n_max {
                if !w.step(rng) {
                    break;
                }
                if k == n_list[j] {
                    if record_u {
                        uvals[j] = w.u();
                    }
                    j += 1;
                }
            }
            s.hist[j] += 1;
            if record_u {
                for (i, m) in s.u.iter_mut().enumerate() {
                    m.push(if i < j { uvals[i] } else { 0.0 });
                }
            }
        }
        s
    })?;
    let mut total = Survey::new(n_list.len());
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub n: u64,
    pub estimate: EstimateCI,
    pub survivors: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub rows: Vec<SurvivalRow>,
    /// Set when fewer than [`MIN_REPS`] replications were used.
    pub warning: Option<String>,
}

fn low_reps_warning(cfg: &McConfig) -> Option<String> {
    (cfg.reps < MIN_REPS).then(|| format!("only {} replications; intervals are unreliable", cfg.reps))
}

/// `P̂(τ_x > n)` for every `n` in `n_list` from one pass.
pub fn estimate_survival(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n_list: &[u64],
    cfg: &McConfig,
) -> Result<SurvivalCurve> {
    let s = survey(cone, model, x, n_list, cfg, false)?;
    let total = s.total();
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let k = s.survivors(j);
            SurvivalRow { n, estimate: proportion_estimate(k, total, cfg.seed), survivors: k }
        })
        .collect();
    Ok(SurvivalCurve { rows, warning: low_reps_warning(cfg) })
}

/// Inverse-variance weighted least-squares slope of `log P̂` against `log n` over rows with `n` in
/// `[n_lo, n_hi]` and at least one survivor.
pub fn fit_tail_slope(curve: &SurvivalCurve, n_lo: u64, n_hi: u64) -> Result<f64> {
    let rows: Vec<&SurvivalRow> =
        curve.rows.iter().filter(|r| r.n >= n_lo && r.n <= n_hi && r.survivors > 0).collect();
    if rows.len() < 2 {
        return Err(Error::Input(format!("fewer than two usable horizons in [{n_lo}, {n_hi}]")));
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate.value.ln()).collect();
    // Var(log p̂) ≈ (1 - p)/(reps·p), so survivors are the inverse-variance weights.
    let ws: Vec<f64> = rows.iter().map(|r| r.survivors as f64 / (1.0 - r.estimate.value)).collect();
    Ok(weighted_least_squares(&xs, &ys, &ws).0)
}

/// `Ê[u(x + S(n)); τ_x > n]` at each horizon from one pass.
pub fn estimate_v_truncated_multi(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n_list: &[u64],
    cfg: &McConfig,
) -> Result<Vec<EstimateCI>> {
    let s = survey(cone, model, x, n_list, cfg, true)?;
    Ok(s.u.iter().map(|m| m.estimate(cfg.seed)).collect())
}

/// `Ê[u(x + S(n)); τ_x > n]`.
pub fn estimate_v_truncated(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n: u64,
    cfg: &McConfig,
) -> Result<EstimateCI> {
    Ok(estimate_v_truncated_multi(cone, model, x, &[n], cfg)?[0])
}

/// `Ê_n = Ê[u(x + S(n)); τ_x > n]` on the type-D Weyl chamber for a lattice model.
pub fn estimate_en_sequence(
    model: &IncrementModel,
    x: &Point,
    n_list: &[u64],
    cfg: &McConfig,
) -> Result<Vec<EstimateCI>> {
    if !model.is_lattice() {
        return Err(Error::Input(format!("{} is not a lattice model", model.name())));
    }
    estimate_v_truncated_multi(&ConeSpec::weyl_d2(), model, x, n_list, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaRow {
    pub n: u64,
    pub survival: EstimateCI,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaFit {
    pub rows: Vec<KappaRow>,
    /// `V̂(x)` used in the denominator: the truncated estimate at the last horizon.
    pub v_hat: EstimateCI,
    /// `(max - min)/mean` of `κ̂` over the upper half of the horizons.
    pub stability: f64,
    /// Mean of `κ̂` over the upper half.
    pub plateau: f64,
}

/// `κ̂(n) = P̂(τ > n)·n^{p/2} / V̂(x)`.
pub fn estimate_kappa_fit(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n_list: &[u64],
    cfg: &McConfig,
) -> Result<KappaFit> {
    let s = survey(cone, model, x, n_list, cfg, true)?;
    let v_hat = s.u[n_list.len() - 1].estimate(cfg.seed);
    let half = cone.exponent_p() / 2.0;
    let total = s.total();
    let rows: Vec<KappaRow> = n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let survival = proportion_estimate(s.survivors(j), total, cfg.seed);
            KappaRow { n, survival, kappa: survival.value * (n as f64).powf(half) / v_hat.value }
        })
        .collect();
    let top = &rows[rows.len() / 2..];
    let (lo, hi, sum) = top.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), r| {
        (lo.min(r.kappa), hi.max(r.kappa), s + r.kappa)
    });
    let plateau = sum / top.len() as f64;
    Ok(KappaFit { rows, v_hat, stability: (hi - lo) / plateau, plateau })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VDecomposition {
    pub estimate: EstimateCI,
    pub r: f64,
    /// `u(x + R x₀)`.
    pub u_shift: f64,
    /// `Ê[u(x + R x₀ + S(τ ∧ cap))]`.
    pub exit_term: EstimateCI,
    /// `Ê[Σ_{k<τ} f(x + R x₀ + S(k))]`.
    pub f_sum: EstimateCI,
    pub capped: u64,
    /// False when more than 0.1% of paths hit the step cap.
    pub reliable: bool,
}

/// `V̂ = u(x + Rx₀) - Ê[u(x + Rx₀ + S(τ))] + Ê[Σ_{k<τ} f(x + Rx₀ + S(k))]`,
/// each path run to exit. A path still inside after `cap` steps contributes
/// its partial sums plus `u(x + S(cap))` in place of the unseen remainder.
pub fn estimate_v_decomposition(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    r: f64,
    cfg: &McConfig,
    cap: u64,
) -> Result<VDecomposition> {
    if !(r >= 0.0) {
        return Err(Error::Parameter(format!("shift R = {r} must be nonnegative")));
    }
    let f = FEvaluator::new(cone, model)?;
    if !f.is_fast() {
        return Err(Error::Unsupported(format!(
            "f for {} on {cone} needs quadrature at every step",
            model.name()
        )));
    }
    let template = Walker::new(cone, model, x)?;
    let shift: Vec<f64> = cone.axis().coords().iter().map(|c| c * r).collect();
    let q0: Vec<f64> = x.coords().iter().zip(&shift).map(|(a, b)| a + b).collect();
    let u_shift = cone.u_coords(&q0);
    let dim = cone.dim();
    let parts = run_batched(cfg, |rng, count| -> Result<(Moments, Moments, Moments, u64)> {
        let mut w = template.clone();
        let (mut total, mut exit, mut fsum) = (Moments::default(), Moments::default(), Moments::default());
        let mut capped = 0;
        let mut pos = vec![0.0; dim];
        for _ in 0..count {
            w.reset();
            let mut acc = f.eval(&q0)?;
            let mut exited = false;
            for k in 1..=cap {
                let inside = w.step(rng);
                w.position_into(&mut pos);
                for (p, s) in pos.iter_mut().zip(&shift) {
                    *p += s;
                }
                if !inside {
                    exited = true;
                    break;
                }
                if k < cap {
                    acc += f.eval(&pos)?;
                }
            }
            let end_u = cone.u_coords(&pos);
            let value = if exited {
                u_shift - end_u + acc
            } else {
                capped += 1;
                u_shift - end_u + acc + w.u()
            };
            exit.push(end_u);
            fsum.push(acc);
            total.push(value);
        }
        Ok((total, exit, fsum, capped))
    })?;
    let (mut total, mut exit, mut fsum) = (Moments::default(), Moments::default(), Moments::default());
    let mut capped = 0;
    for p in parts {
        let (t, e, s, c) = p?;
        total.merge(&t);
        exit.merge(&e);
        fsum.merge(&s);
        capped += c;
    }
    Ok(VDecomposition {
        estimate: total.estimate(cfg.seed),
        r,
        u_shift,
        exit_term: exit.estimate(cfg.seed),
        f_sum: fsum.estimate(cfg.seed),
        capped,
        reliable: (capped as f64) <= CAP_FLAG_FRACTION * cfg.reps as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxMoment {
    pub estimate: EstimateCI,
    pub q: f64,
    pub r: f64,
    /// `u(x + R x₀)^{q/p}`.
    pub reference: f64,
    pub ratio: f64,
    pub capped: u64,
    /// Heavy-tailed steps with `q` close to `p`: the mean converges slowly.
    pub slow_convergence: bool,
}

/// `Ê[max_{k ≤ τ} |S(k)|^q]`, each path run to exit (or `cap`).
pub fn estimate_max_moment(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    q: f64,
    r: f64,
    cfg: &McConfig,
    cap: u64,
) -> Result<MaxMoment> {
    let p = cone.exponent_p();
    if !(q >= 0.0 && q < p) {
        return Err(Error::Parameter(format!("moment order q = {q} must lie in [0, {p})")));
    }
    let template = Walker::new(cone, model, x)?;
    let parts = run_batched(cfg, |rng, count| {
        let mut w = template.clone();
        let mut m = Moments::default();
        let mut capped = 0u64;
        for _ in 0..count {
            w.reset();
            let mut best: f64 = 0.0;
            let mut exited = false;
            for _ in 0..cap {
                let inside = w.step(rng);
                best = best.max(w.displacement_sq());
                if !inside {
                    exited = true;
                    break;
                }
            }
            capped += u64::from(!exited);
            m.push(best.powf(q / 2.0));
        }
        (m, capped)
    })?;
    let mut m = Moments::default();
    let mut capped = 0;
    for (part, c) in &parts {
        m.merge(part);
        capped += c;
    }
    let shifted = x.add(&cone.axis().scaled(r));
    let reference = cone.u_coords(shifted.coords()).powf(q / p);
    let estimate = m.estimate(cfg.seed);
    let heavy = model.pk().is_some_and(|pk| pk.tail_kind() == TailKind::Heavy);
    Ok(MaxMoment {
        estimate,
        q,
        r,
        reference,
        ratio: estimate.value / reference,
        capped,
        slow_convergence: heavy && q > p - 0.5,
    })
}

/// Equal-probability bins of a one-dimensional density on `(lo, hi)`.
#[derive(Clone, Debug)]
struct Marginal {
    edges: Vec<f64>,
}

impl Marginal {
    fn new(density: &dyn Fn(f64) -> f64, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        use crate::quadrature::{integrate, Tolerance};
        let tol = Tolerance::new(1e-14, 1e-12);
        let mass = |a: f64, b: f64| integrate(density, a, b, tol).value;
        let total = mass(lo, hi);
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Accuracy("reference density has no finite positive mass".into()));
        }
        let mut edges = vec![lo];
        for i in 1..bins {
            let target = total * i as f64 / bins as f64;
            // Bisection on the cumulative mass, bracketed by the previous edge.
            let mut a = edges[i - 1];
            let mut b = if hi.is_finite() { hi } else { a.max(1.0) * 2.0 };
            while !hi.is_finite() && mass(lo, b) < target {
                b *= 2.0;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if mass(lo, m) < target {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-13 * (1.0 + b.abs()) {
                    break;
                }
            }
            edges.push(0.5 * (a + b));
        }
        edges.push(hi);
        Ok(Marginal { edges })
    }

    fn bin(&self, v: f64) -> usize {
        let i = self.edges.partition_point(|&e| e <= v);
        i.clamp(1, self.edges.len() - 1) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointBin {
    pub bin_id: usize,
    pub z1_lo: f64,
    pub z1_hi: f64,
    pub z2_lo: f64,
    pub z2_hi: f64,
    pub count: u64,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointTest {
    /// Cartesian coordinates for the orthant and the half-line; `(r, θ)` for
    /// other planar cones.
    pub polar: bool,
    pub histogram: Vec<EndpointBin>,
    pub chi_square: f64,
    pub dof: usize,
    pub critical_99: f64,
    pub survivors: u64,
    pub reps: u64,
    /// Conditional means of the coordinates of `(x + S(n))/√n`.
    pub means: Vec<EstimateCI>,
    /// Fewer than 10 survivors per bin on average.
    pub underpowered: bool,
}

impl EndpointTest {
    pub fn passes(&self) -> bool {
        !self.underpowered && self.chi_square < self.critical_99
    }

    /// Counts with the two binned coordinates exchanged.
    pub fn swapped_counts(&self) -> Vec<u64> {
        let k = (self.histogram.len() as f64).sqrt().round() as usize;
        let mut out = vec![0; self.histogram.len()];
        for i in 0..k {
            for j in 0..k {
                out[j * k + i] = self.histogram[i * k + j].count;
            }
        }
        out
    }
}

/// Chi-square statistic comparing two histograms with equal totals.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, usize) {
    let mut stat = 0.0;
    let mut used: usize = 0;
    for (&x, &y) in a.iter().zip(b) {
        if x + y > 0 {
            let d = x as f64 - y as f64;
            stat += d * d / (x + y) as f64;
            used += 1;
        }
    }
    (stat, used.saturating_sub(1))
}

/// Law of `(x + S(n))/√n` given `τ_x > n` against the density
/// `∝ u(z) e^{-|z|²/2}`, on `bins_per_axis²` equal-probability bins (planar) or
/// `bins_per_axis` bins (half-line). Rounds of `cfg.reps` paths are added,
/// each on a derived seed, until `min_survivors` survivors are collected or
/// `max_rounds` is reached.
pub fn conditional_endpoint_test(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n: u64,
    cfg: &McConfig,
    bins_per_axis: usize,
    min_survivors: u64,
    max_rounds: u32,
) -> Result<EndpointTest> {
    if bins_per_axis < 2 {
        return Err(Error::Parameter("need at least two bins per axis".into()));
    }
    let p = cone.exponent_p();
    let (axes, polar): (Vec<Marginal>, bool) = match cone.kind() {
        ConeKind::HalfLine => {
            let d = |t: f64| t * (-0.5 * t * t).exp();
            (vec![Marginal::new(&d, 0.0, f64::INFINITY, bins_per_axis)?], false)
        }
        ConeKind::Orthant(2) => {
            let d = |t: f64| t * (-0.5 * t * t).exp();
            let m = Marginal::new(&d, 0.0, f64::INFINITY, bins_per_axis)?;
            (vec![m.clone(), m], false)
        }
        _ => {
            let (lo, hi) = cone
                .sector()
                .ok_or_else(|| Error::Unsupported(format!("no reference density binning for {cone}")))?;
            let radial = |r: f64| r.powf(p + 1.0) * (-0.5 * r * r).exp();
            let angular = |t: f64| cone.angular_profile(t).max(0.0);
            (
                vec![
                    Marginal::new(&radial, 0.0, f64::INFINITY, bins_per_axis)?,
                    Marginal::new(&angular, lo, hi, bins_per_axis)?,
                ],
                true,
            )
        }
    };
    let template = Walker::new(cone, model, x)?;
    let dim = cone.dim();
    let nbins: usize = axes.iter().map(|a| a.edges.len() - 1).product();
    let scale = 1.0 / (n as f64).sqrt();

    let mut counts = vec![0u64; nbins];
    let mut means = vec![Moments::default(); dim];
    let mut reps = 0;
    for round in 0..max_rounds.max(1) {
        let round_cfg = cfg.reseeded(crate::rng::derive_seed(cfg.seed, round as u64));
        let parts = run_batched(&round_cfg, |rng, count| {
            let mut w = template.clone();
            let mut c = vec![0u64; nbins];
            let mut m = vec![Moments::default(); dim];
            let mut pos = vec![0.0; dim];
            'path: for _ in 0..count {
                w.reset();
                for _ in 0..n {
                    if !w.step(rng) {
                        continue 'path;
                    }
                }
                w.position_into(&mut pos);
                for (mi, v) in m.iter_mut().zip(&pos) {
                    mi.push(v * scale);
                }
                let coords = if polar {
                    [pos[0].hypot(pos[1]) * scale, pos[1].atan2(pos[0])]
                } else if dim == 1 {
                    [pos[0] * scale, 0.0]
                } else {
                    [pos[0] * scale, pos[1] * scale]
                };
                let mut idx = 0;
                for (a, axis) in axes.iter().enumerate() {
                    idx = idx * (axis.edges.len() - 1) + axis.bin(coords[a]);
                }
                c[idx] += 1;
            }
            (c, m)
        })?;
        for (c, m) in &parts {
            for (a, b) in counts.iter_mut().zip(c) {
                *a += b;
            }
            for (a, b) in means.iter_mut().zip(m) {
                a.merge(b);
            }
        }
        reps += cfg.reps;
        if counts.iter().sum::<u64>() >= min_survivors {
            break;
        }
    }
    let survivors: u64 = counts.iter().sum();
    let expected = survivors as f64 / nbins as f64;
    let chi_square = if survivors == 0 {
        f64::INFINITY
    } else {
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
    };
    let dof = nbins - 1;
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(id, &count)| {
            let (i, j) = if axes.len() == 2 { (id / (axes[1].edges.len() - 1), id % (axes[1].edges.len() - 1)) } else { (id, 0) };
            let e1 = &axes[0].edges;
            let (z2_lo, z2_hi) = if axes.len() == 2 {
                (axes[1].edges[j], axes[1].edges[j + 1])
            } else {
                (f64::NAN, f64::NAN)
            };
            EndpointBin { bin_id: id, z1_lo: e1[i], z1_hi: e1[i + 1], z2_lo, z2_hi, count, expected }
        })
        .collect();
    Ok(EndpointTest {
        polar,
        histogram,
        chi_square,
        dof,
        critical_99: crate::stats::chi_square_critical(dof, 0.99),
        survivors,
        reps,
        means: means.iter().map(|m| m.estimate(cfg.seed)).collect(),
        underpowered: expected < 10.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::make_pk_family;
    use crate::mc::walk::lattice_point;

    fn ex1(k: i64) -> IncrementModel {
        IncrementModel::example1(make_pk_family(k).unwrap())
    }

    #[test]
    fn survival_is_monotone_and_matches_one_step() {
        let cone = ConeSpec::weyl_d2();
        let curve = estimate_survival(&cone, &ex1(1), &lattice_point(1, 0), &[1, 2, 5, 10], &McConfig::new(40_000, 3)).unwrap();
        assert!(curve.rows[0].estimate.covers(0.25, 4.0));
        assert!(curve.rows.windows(2).all(|w| w[1].survivors <= w[0].survivors));
        assert!(curve.warning.is_none());
        let few = estimate_survival(&cone, &ex1(1), &lattice_point(1, 0), &[1], &McConfig::new(50, 3)).unwrap();
        assert!(few.warning.is_some());
    }

    #[test]
    fn horizons_must_increase() {
        let cone = ConeSpec::weyl_d2();
        assert!(estimate_survival(&cone, &ex1(1), &lattice_point(1, 0), &[5, 2], &McConfig::new(10, 1)).is_err());
    }

    #[test]
    fn truncated_v_is_exact_for_the_martingale_case() {
        // u(x + S(n)) 1{τ > n} has mean u(x) = 8 at every n; the walk exits onto u = 0.
        let cone = ConeSpec::weyl_d2();
        let v = estimate_v_truncated(&cone, &ex1(1), &lattice_point(2, 0), 50, &McConfig::new(50_000, 8)).unwrap();
        assert!(v.covers(8.0, 4.0), "{v:?}");
    }

    #[test]
    fn decomposition_on_the_lattice_is_u_of_start() {
        let cone = ConeSpec::weyl_d2();
        let d = estimate_v_decomposition(&cone, &ex1(1), &lattice_point(2, 0), 0.0, &McConfig::new(2_000, 4), 100_000).unwrap();
        // f vanishes on the lattice and exits land on u = 0, so every path
        // contributes exactly u(x) unless it was capped.
        assert_eq!(d.f_sum.value, 0.0);
        assert!(d.estimate.covers(8.0, 4.0), "{d:?}");
    }

    #[test]
    fn zero_moment_is_one() {
        let cone = ConeSpec::orthant(2);
        let g = IncrementModel::gaussian(2).unwrap();
        let m = estimate_max_moment(&cone, &g, &Point::from([1.0, 1.0]), 0.0, 0.0, &McConfig::new(500, 2), 10_000).unwrap();
        assert_eq!(m.estimate.value, 1.0);
        assert_eq!(m.estimate.half_width, 0.0);
    }

    #[test]
    fn rayleigh_bins_are_equal_probability() {
        let d = |t: f64| t * (-0.5 * t * t).exp();
        let m = Marginal::new(&d, 0.0, f64::INFINITY, 5).unwrap();
        for (i, e) in m.edges[1..5].iter().enumerate() {
            let exact = (-2.0 * (1.0 - (i + 1) as f64 / 5.0).ln()).sqrt();
            assert!((e - exact).abs() < 1e-9, "{e} vs {exact}");
        }
    }
}
