//! An explicit positive supermartingale for a zero-mean walk on the half line.
//!
//! For a step law `X` with `β(x) = P(X ≤ -x)`, `βᴵ(x) = E[(x+X)⁻]`,
//! `βᴵᴵ(x) = ∫_x^∞ βᴵ`, `A = 4/E[(X⁻)²]` and `m(x) = A∫_0^x βᴵᴵ`, the function
//! `V(x) = x + R + m(x)` on `x ≥ 0` satisfies `E[V(x+X); x+X > 0] ≤ V(x) - β(x)`
//! once `R` is large enough. Atomic laws are handled in exact rational
//! arithmetic, the Gaussian law through closed forms and quadrature.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::increments::{Atom, IncrementModel, StepSampler};
use crate::mc::batch::{run_batched, McConfig};
use crate::quadrature::{integrate, Tolerance};
use crate::rng::derive_seed;
use crate::special::{normal_cdf, normal_pdf, normal_sf, positive_part_excess};
use crate::stats::{EstimateCI, Moments, Z95};

/// Absolute slack allowed on `Δ ≤ -β` for quadrature-based laws.
pub const DRIFT_TOL: f64 = 1e-9;

/// One-dimensional zero-mean step law.
#[derive(Clone, Debug, PartialEq)]
pub enum StepLaw1D {
    /// Standard normal.
    Gauss,
    /// Finitely many atoms `(value, probability)`.
    Atoms(Vec<(BigRational, BigRational)>),
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Parse `-1`, `0.25` or `1/3` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Input(format!("'{s}' is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let r = BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

impl StepLaw1D {
    pub fn pm1() -> Self {
        StepLaw1D::Atoms(vec![(rat(-1, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))])
    }

    /// Validated atomic law: probabilities sum to one, mean within `1e-12` of 0.
    pub fn atoms(atoms: Vec<(BigRational, BigRational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Input("atomic law needs at least one atom".into()));
        }
        if atoms.iter().any(|(_, p)| p.is_negative()) {
            return Err(Error::Input("negative probability in atomic law".into()));
        }
        let total: BigRational = atoms.iter().map(|(_, p)| p.clone()).sum();
        if (to_f64(&total) - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!("atom probabilities sum to {}", to_f64(&total))));
        }
        let mean: BigRational = atoms.iter().map(|(v, p)| v * p).sum();
        if to_f64(&mean).abs() > 1e-12 {
            return Err(Error::Input(format!("step law has nonzero mean {}", to_f64(&mean))));
        }
        Ok(StepLaw1D::Atoms(atoms))
    }

    /// Law of `c·X`.
    pub fn scaled(&self, c: &BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Parameter("scale must be positive".into()));
        }
        match self {
            StepLaw1D::Atoms(a) => Ok(StepLaw1D::Atoms(a.iter().map(|(v, p)| (v * c, p.clone())).collect())),
            StepLaw1D::Gauss => Err(Error::Unsupported("only atomic laws can be rescaled".into())),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, StepLaw1D::Atoms(_))
    }

    pub fn increment_model(&self) -> Result<IncrementModel> {
        match self {
            StepLaw1D::Gauss => IncrementModel::gaussian(1),
            StepLaw1D::Atoms(_) if *self == StepLaw1D::pm1() => Ok(IncrementModel::pm1()),
            StepLaw1D::Atoms(a) => IncrementModel::custom(
                a.iter().map(|(v, p)| Atom { point: vec![to_f64(v)], prob: to_f64(p) }).collect(),
                self.to_string(),
            ),
        }
    }
}

impl fmt::Display for StepLaw1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLaw1D::Gauss => f.write_str("gauss"),
            _ if *self == StepLaw1D::pm1() => f.write_str("pm1"),
            StepLaw1D::Atoms(a) => {
                let parts: Vec<String> = a.iter().map(|(v, p)| format!("{v}:{p}")).collect();
                write!(f, "atoms:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for StepLaw1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "pm1" => return Ok(StepLaw1D::pm1()),
            "gauss" => return Ok(StepLaw1D::Gauss),
            _ => {}
        }
        let body = s.strip_prefix("atoms:").ok_or_else(|| {
            Error::Input(format!("unknown law '{s}': expected pm1, gauss or atoms:v1:p1,v2:p2,..."))
        })?;
        let atoms = body
            .split(',')
            .map(|pair| {
                let (v, p) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::Input(format!("atom '{pair}' is not value:probability")))?;
                Ok((parse_rational(v)?, parse_rational(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        StepLaw1D::atoms(atoms)
    }
}

/// `(β, βᴵ, βᴵᴵ, m)` with the constants `A` and `R`.
#[derive(Clone, Debug)]
pub struct TailFunctions1D {
    law: StepLaw1D,
    pub sigma_minus_sq: f64,
    pub a: f64,
    pub r: f64,
    /// Threshold from [`choose_r`]; `None` until it has run.
    pub x0: Option<f64>,
    exact: Option<ExactConsts>,
}

#[derive(Clone, Debug)]
struct ExactConsts {
    sigma_minus_sq: BigRational,
    a: BigRational,
    r: BigRational,
}

fn gauss_beta_iii(x: f64) -> f64 {
    ((x * x + 2.0) * normal_pdf(x) - x * (x * x + 3.0) * normal_sf(x)) / 6.0
}

/// Build the tail functions; `R` starts at 0.
pub fn build_tail_functions(law: &StepLaw1D) -> Result<TailFunctions1D> {
    match law {
        StepLaw1D::Gauss => Ok(TailFunctions1D {
            law: law.clone(),
            sigma_minus_sq: 0.5,
            a: 8.0,
            r: 0.0,
            x0: None,
            exact: None,
        }),
        StepLaw1D::Atoms(atoms) => {
            let s: BigRational = atoms
                .iter()
                .filter(|(v, _)| v.is_negative())
                .map(|(v, p)| v * v * p)
                .sum();
            if s.is_zero() {
                return Err(Error::Input("step law has no negative part".into()));
            }
            let a = BigRational::from_integer(4.into()) / &s;
            Ok(TailFunctions1D {
                law: law.clone(),
                sigma_minus_sq: to_f64(&s),
                a: to_f64(&a),
                r: 0.0,
                x0: None,
                exact: Some(ExactConsts { sigma_minus_sq: s, a, r: BigRational::zero() }),
            })
        }
    }
}

impl TailFunctions1D {
    pub fn law(&self) -> &StepLaw1D {
        &self.law
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Same functions with a different `R` (exact when `R` is representable).
    pub fn with_r(&self, r: f64) -> Self {
        let mut out = self.clone();
        out.r = r;
        if let Some(e) = &mut out.exact {
            e.r = from_f64(r);
        }
        out
    }

    pub fn with_r_exact(&self, r: BigRational) -> Self {
        let mut out = self.clone();
        out.r = to_f64(&r);
        if let Some(e) = &mut out.exact {
            e.r = r;
        }
        out
    }

    pub fn r_exact(&self) -> Option<&BigRational> {
        self.exact.as_ref().map(|e| &e.r)
    }

    pub fn a_exact(&self) -> Option<&BigRational> {
        self.exact.as_ref().map(|e| &e.a)
    }

    pub fn sigma_minus_sq_exact(&self) -> Option<&BigRational> {
        self.exact.as_ref().map(|e| &e.sigma_minus_sq)
    }

    fn atoms(&self) -> &[(BigRational, BigRational)] {
        match &self.law {
            StepLaw1D::Atoms(a) => a,
            StepLaw1D::Gauss => &[],
        }
    }

    pub fn beta_exact(&self, x: &BigRational) -> BigRational {
        let neg_x = -x;
        self.atoms().iter().filter(|(v, _)| *v <= neg_x).map(|(_, p)| p.clone()).sum()
    }

    pub fn beta_i_exact(&self, x: &BigRational) -> BigRational {
        self.atoms()
            .iter()
            .map(|(v, p)| {
                let d = -v - x;
                if d.is_positive() { d * p } else { BigRational::zero() }
            })
            .sum()
    }

    pub fn beta_ii_exact(&self, x: &BigRational) -> BigRational {
        self.atoms()
            .iter()
            .map(|(v, p)| {
                let d = -v - x;
                if d.is_positive() { &d * &d * p / BigRational::from_integer(2.into()) } else { BigRational::zero() }
            })
            .sum()
    }

    /// `m(x)` for `x ≥ 0`.
    pub fn m_exact(&self, x: &BigRational) -> BigRational {
        let six = BigRational::from_integer(6.into());
        let a = &self.exact.as_ref().expect("atomic law").a;
        let s: BigRational = self
            .atoms()
            .iter()
            .filter(|(v, _)| v.is_negative())
            .map(|(v, p)| {
                let depth = -v;
                let rest = &depth - x;
                let rest3 = if rest.is_positive() { &rest * &rest * &rest } else { BigRational::zero() };
                (&depth * &depth * &depth - rest3) * p
            })
            .sum();
        a * s / six
    }

    /// `V(y) = y + R + m(y)` on `y ≥ 0`, else 0.
    pub fn v_exact(&self, y: &BigRational) -> BigRational {
        if y.is_negative() {
            return BigRational::zero();
        }
        y + &self.exact.as_ref().expect("atomic law").r + self.m_exact(y)
    }

    pub fn beta(&self, x: f64) -> f64 {
        match self.law {
            StepLaw1D::Gauss => normal_cdf(-x),
            StepLaw1D::Atoms(_) => to_f64(&self.beta_exact(&from_f64(x))),
        }
    }

    pub fn beta_i(&self, x: f64) -> f64 {
        match self.law {
            StepLaw1D::Gauss => positive_part_excess(x),
            StepLaw1D::Atoms(_) => to_f64(&self.beta_i_exact(&from_f64(x))),
        }
    }

    pub fn beta_ii(&self, x: f64) -> f64 {
        match self.law {
            StepLaw1D::Gauss => 0.5 * ((1.0 + x * x) * normal_sf(x) - x * normal_pdf(x)),
            StepLaw1D::Atoms(_) => to_f64(&self.beta_ii_exact(&from_f64(x))),
        }
    }

    pub fn m(&self, x: f64) -> f64 {
        match self.law {
            StepLaw1D::Gauss => self.a * (gauss_beta_iii(0.0) - gauss_beta_iii(x)),
            StepLaw1D::Atoms(_) => to_f64(&self.m_exact(&from_f64(x))),
        }
    }

    pub fn v(&self, y: f64) -> f64 {
        if y < 0.0 {
            0.0
        } else {
            y + self.r + self.m(y)
        }
    }

    /// Point beyond which `β < 1e-12`.
    pub fn x_hi(&self) -> f64 {
        match &self.law {
            StepLaw1D::Gauss => 7.1,
            StepLaw1D::Atoms(a) => a
                .iter()
                .filter(|(v, _)| v.is_negative())
                .map(|(v, _)| -to_f64(v))
                .fold(0.0, f64::max),
        }
    }

    /// `Δ(x) = E[V(x+X); x+X > 0] - V(x)` exactly (atomic laws only).
    pub fn drift_delta_exact(&self, x: &BigRational) -> Option<BigRational> {
        self.exact.as_ref()?;
        let mut acc = -self.v_exact(x);
        for (v, p) in self.atoms() {
            let y = x + v;
            if y.is_positive() {
                acc += self.v_exact(&y) * p;
            }
        }
        Some(acc)
    }

    /// `Δ(x)` in double precision.
    pub fn drift_delta(&self, x: f64) -> Result<f64> {
        match self.law {
            StepLaw1D::Atoms(_) => Ok(to_f64(&self.drift_delta_exact(&from_f64(x)).unwrap_or_default())),
            StepLaw1D::Gauss => {
                // Δ = βᴵ(x) − (R + m(x))β(x) + A∫_{-x}^∞ (βᴵᴵᴵ(x) − βᴵᴵᴵ(x+z)) φ(z) dz
                let b3x = gauss_beta_iii(x);
                let tol = Tolerance::new(1e-15, 1e-13).with_budget(4000);
                let q = integrate(|z| (b3x - gauss_beta_iii(x + z)) * normal_pdf(z), -x, f64::INFINITY, tol);
                if !q.converged && q.error > 1e-11 {
                    return Err(Error::Accuracy(format!("drift integral at x = {x}: error {}", q.error)));
                }
                Ok(self.beta_i(x) - (self.r + self.m(x)) * self.beta(x) + self.a * q.value)
            }
        }
    }
}

/// Outcome of [`choose_r`].
#[derive(Clone, Debug, PartialEq)]
pub struct RChoice {
    pub r: f64,
    pub x0: f64,
}

/// Pick `x₀` (least grid point past which `2Aβᴵβᴵᴵ ≤ βᴵ`) and
/// `R = 1 + max_{x < x₀} (βᴵ + 2Aβᴵβᴵᴵ)/β`; returns the updated functions.
pub fn choose_r(tf: &TailFunctions1D, grid_points: usize) -> Result<(TailFunctions1D, RChoice)> {
    let n = grid_points.max(2);
    let x_hi = tf.x_hi();
    if let Some(ex) = &tf.exact {
        let hi = from_f64(x_hi);
        let mut grid: Vec<BigRational> = (0..=n).map(|i| &hi * rat(i as i64, n as i64)).collect();
        for (v, _) in tf.atoms() {
            if v.is_negative() {
                grid.push(-v);
            }
        }
        grid.sort();
        grid.dedup();
        let two_a = &ex.a * BigRational::from_integer(2.into());
        let terms: Vec<(BigRational, BigRational, bool)> = grid
            .iter()
            .map(|x| {
                let bi = tf.beta_i_exact(x);
                let cross = &two_a * &bi * tf.beta_ii_exact(x);
                let ok = cross <= bi;
                (bi + cross, tf.beta_exact(x), ok)
            })
            .collect();
        let first_bad_from_top = terms.iter().rposition(|t| !t.2);
        let x0_idx = first_bad_from_top.map_or(0, |i| i + 1);
        let mut worst = BigRational::zero();
        for (num, beta, _) in &terms[..x0_idx] {
            if beta.is_zero() {
                if num.is_positive() {
                    return Err(Error::Construction("β vanishes below x₀ with a positive numerator".into()));
                }
                continue;
            }
            let ratio = num / beta;
            if ratio > worst {
                worst = ratio;
            }
        }
        let r = worst + BigRational::one();
        let x0 = grid.get(x0_idx).map_or(x_hi, to_f64);
        let mut out = tf.with_r_exact(r);
        out.x0 = Some(x0);
        return Ok((out.clone(), RChoice { r: out.r, x0 }));
    }
    let grid: Vec<f64> = (0..=n).map(|i| x_hi * i as f64 / n as f64).collect();
    let terms: Vec<(f64, f64, bool)> = grid
        .iter()
        .map(|&x| {
            let bi = tf.beta_i(x);
            let cross = 2.0 * tf.a * bi * tf.beta_ii(x);
            (bi + cross, tf.beta(x), cross <= bi)
        })
        .collect();
    let x0_idx = terms.iter().rposition(|t| !t.2).map_or(0, |i| i + 1);
    let mut worst = 0.0f64;
    for &(num, beta, _) in &terms[..x0_idx] {
        if beta == 0.0 {
            if num > 0.0 {
                return Err(Error::Construction("β vanishes below x₀ with a positive numerator".into()));
            }
            continue;
        }
        worst = worst.max(num / beta);
    }
    let x0 = grid.get(x0_idx).copied().unwrap_or(x_hi);
    let mut out = tf.with_r(1.0 + worst);
    out.x0 = Some(x0);
    Ok((out.clone(), RChoice { r: out.r, x0 }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftRow {
    pub x: f64,
    pub delta: f64,
    pub neg_beta: f64,
    /// `-β(x) - Δ(x)`; nonnegative where the inequality holds.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub rows: Vec<DriftRow>,
    pub worst_margin: f64,
    pub worst_x: f64,
    pub passed: bool,
    /// Tolerance applied (0 for exact laws).
    pub tolerance: f64,
}

impl DriftReport {
    pub fn ensure(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::Verification(format!(
                "Δ(x) ≤ -β(x) fails at x = {} (margin {:e})",
                self.worst_x, self.worst_margin
            )))
        }
    }
}

/// Check `Δ(x) ≤ -β(x)` on `grid` (exactly for atomic laws).
pub fn verify_drift_inequality(tf: &TailFunctions1D, grid: &[f64]) -> Result<DriftReport> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut passed = true;
    let (mut worst_margin, mut worst_x) = (f64::INFINITY, f64::NAN);
    let tolerance = if tf.is_exact() { 0.0 } else { DRIFT_TOL };
    for &x in grid {
        if !(x >= 0.0) {
            return Err(Error::Input(format!("grid point {x} is negative")));
        }
        let (delta, neg_beta, ok) = if tf.is_exact() {
            let xq = from_f64(x);
            let d = tf.drift_delta_exact(&xq).unwrap_or_default();
            let nb = -tf.beta_exact(&xq);
            let ok = d <= nb;
            (to_f64(&d), to_f64(&nb), ok)
        } else {
            let d = tf.drift_delta(x)?;
            let nb = -tf.beta(x);
            (d, nb, d <= nb + tolerance)
        };
        let margin = neg_beta - delta;
        passed &= ok;
        if margin < worst_margin {
            worst_margin = margin;
            worst_x = x;
        }
        rows.push(DriftRow { x, delta, neg_beta, margin });
    }
    Ok(DriftReport { rows, worst_margin, worst_x, passed, tolerance })
}

/// `n + 1` equally spaced points on `[0, x_hi]`.
pub fn uniform_grid(x_hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| x_hi * i as f64 / n as f64).collect()
}

/// Walk from `x` until `x + S < 0`; returns the overshoot `-(x + S_τ)`, or
/// `None` if still alive after `horizon` steps.
fn run_to_exit(sampler: &mut StepSampler, rng: &mut crate::rng::StreamRng, x: f64, horizon: u64) -> Option<f64> {
    let mut pos = x;
    let mut buf = [0.0];
    for _ in 0..horizon {
        sampler.sample_into(rng, &mut buf);
        pos += buf[0];
        if pos < 0.0 {
            return Some(-pos);
        }
    }
    None
}

/// Mean overshoot over paths that exit within the horizon, and the number
/// that did not.
fn overshoot_estimate(model: &IncrementModel, x: f64, horizon: u64, cfg: &McConfig) -> Result<(EstimateCI, u64)> {
    let base = model.sampler()?;
    let parts = run_batched(cfg, |rng, count| {
        let mut s = base.clone();
        let mut m = Moments::default();
        let mut alive = 0u64;
        for _ in 0..count {
            match run_to_exit(&mut s, rng, x, horizon) {
                Some(o) => m.push(o),
                None => alive += 1,
            }
        }
        (m, alive)
    })?;
    let mut m = Moments::default();
    let mut alive = 0;
    for (p, a) in &parts {
        m.merge(p);
        alive += a;
    }
    Ok((m.estimate(cfg.seed), alive))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OvershootReport {
    pub x: f64,
    pub estimate: EstimateCI,
    pub bound: f64,
    /// Paths still alive at the horizon, left out of the mean.
    pub unexited: u64,
    pub passed: bool,
}

/// MC estimate of `-E[x + S_τ]` against `m(x) + R`.
pub fn overshoot_check(tf: &TailFunctions1D, x: f64, horizon: u64, cfg: &McConfig) -> Result<OvershootReport> {
    let model = tf.law.increment_model()?;
    let (estimate, unexited) = overshoot_estimate(&model, x, horizon, cfg)?;
    let bound = tf.m(x) + tf.r;
    let passed = estimate.value - estimate.half_width <= bound;
    Ok(OvershootReport { x, estimate, bound, unexited, passed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicRow {
    pub x: f64,
    /// `V(x) = x + E[-(x + S_τ)]`.
    pub direct: EstimateCI,
    /// `E[V(x+X); x+X ≥ 0]` from grid estimates of `V`.
    pub nested: EstimateCI,
    pub agrees: bool,
}

/// Harmonicity of `V(x) = E[-S(τ_x)]` under the killed walk.
///
/// Atomic laws evaluate the one-step average at the exact landing points;
/// the Gaussian law integrates a linear interpolant of `V` estimated on a grid
/// of spacing `h` against the normal density.
pub fn harmonic_v1d_check(law: &StepLaw1D, xs: &[f64], horizon: u64, h: f64, cfg: &McConfig) -> Result<Vec<HarmonicRow>> {
    let model = law.increment_model()?;
    let mut tag = 0u64;
    let mut v_at = |y: f64| -> Result<EstimateCI> {
        tag += 1;
        let c = cfg.reseeded(derive_seed(cfg.seed, tag));
        let (e, _) = overshoot_estimate(&model, y, horizon, &c)?;
        Ok(EstimateCI { value: e.value + y, ..e })
    };
    let mut rows = Vec::new();
    for &x in xs {
        let direct = v_at(x)?;
        let (value, var) = match law {
            StepLaw1D::Atoms(atoms) => {
                let mut value = 0.0;
                let mut var = 0.0;
                for (v, p) in atoms {
                    let y = x + to_f64(v);
                    if y >= 0.0 {
                        let e = v_at(y)?;
                        let p = to_f64(p);
                        value += p * e.value;
                        var += (p * e.half_width / Z95).powi(2);
                    }
                }
                (value, var)
            }
            StepLaw1D::Gauss => {
                let top = x + 7.0;
                let n = (top / h).ceil() as usize;
                let mut value = 0.0;
                let mut var = 0.0;
                for i in 0..=n {
                    let y = i as f64 * h;
                    // Hat-function weights of ∫_0^top V(y) φ(y - x) dy, trapezoid rule.
                    let end = if i == 0 || i == n { 0.5 } else { 1.0 };
                    let w = end * h * normal_pdf(y - x);
                    let e = v_at(y)?;
                    value += w * e.value;
                    var += (w * e.half_width / Z95).powi(2);
                }
                (value, var)
            }
        };
        let nested = EstimateCI { value, half_width: Z95 * var.sqrt(), reps: cfg.reps, seed: cfg.seed };
        let joint = direct.joint_half_width(&nested);
        let agrees = (direct.value - nested.value).abs() <= 4.0 * joint.max(1e-12);
        rows.push(HarmonicRow { x, direct, nested, agrees });
    }
    Ok(rows)
}

/// Mean of `Y_n = V(x + S_n)·1{τ_x > n}` for `n = 0..=n_max`.
pub fn supermartingale_means(tf: &TailFunctions1D, x: f64, n_max: usize, cfg: &McConfig) -> Result<Vec<EstimateCI>> {
    let model = tf.law.increment_model()?;
    let base = model.sampler()?;
    let parts = run_batched(cfg, |rng, count| {
        let mut s = base.clone();
        let mut acc = vec![Moments::default(); n_max + 1];
        let mut buf = [0.0];
        for _ in 0..count {
            let mut pos = x;
            let mut alive = true;
            acc[0].push(tf.v(x));
            for slot in acc.iter_mut().skip(1) {
                if alive {
                    s.sample_into(rng, &mut buf);
                    pos += buf[0];
                    alive = pos >= 0.0;
                }
                slot.push(if alive { tf.v(pos) } else { 0.0 });
            }
        }
        acc
    })?;
    let mut total = vec![Moments::default(); n_max + 1];
    for p in &parts {
        for (t, m) in total.iter_mut().zip(p) {
            t.merge(m);
        }
    }
    Ok(total.iter().map(|m| m.estimate(cfg.seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn pm1_tail_functions() {
        let tf = build_tail_functions(&StepLaw1D::pm1()).unwrap();
        let z = BigRational::zero();
        assert_eq!(tf.beta_i_exact(&z), q(1, 2));
        assert_eq!(tf.beta_ii_exact(&z), q(1, 4));
        assert_eq!(tf.sigma_minus_sq_exact().unwrap(), &q(1, 2));
        assert_eq!(tf.a_exact().unwrap(), &q(8, 1));
        assert_eq!(tf.m_exact(&q(1, 1)), q(2, 3));
        assert_eq!(tf.m_exact(&q(50, 1)), q(2, 3));
    }

    #[test]
    fn pm1_drift_examples() {
        let tf = build_tail_functions(&StepLaw1D::pm1()).unwrap();
        let d = tf.with_r_exact(q(3, 1)).drift_delta_exact(&BigRational::zero()).unwrap();
        assert_eq!(d, q(-2, 3));
        let d0 = tf.with_r_exact(q(0, 1)).drift_delta_exact(&BigRational::zero()).unwrap();
        assert_eq!(d0, q(5, 6));
        let r3 = tf.with_r_exact(q(3, 1));
        for x in [2, 3, 7] {
            let xq = q(x, 1);
            assert_eq!(r3.drift_delta_exact(&xq).unwrap(), BigRational::zero());
            assert!(r3.beta_exact(&xq).is_zero());
        }
    }

    #[test]
    fn pm1_choose_r() {
        let tf = build_tail_functions(&StepLaw1D::pm1()).unwrap();
        let (tf, c) = choose_r(&tf, 1000).unwrap();
        assert_eq!(tf.r_exact().unwrap(), &q(6, 1));
        assert!((c.x0 - 0.5).abs() < 1e-12);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        assert!(verify_drift_inequality(&tf, &grid).unwrap().passed);
        let bad = verify_drift_inequality(&tf.with_r(0.0), &[0.0]).unwrap();
        assert!(!bad.passed && bad.rows[0].delta == 5.0 / 6.0);
        assert!(bad.ensure().is_err());
    }

    #[test]
    fn gaussian_closed_forms() {
        let tf = build_tail_functions(&StepLaw1D::Gauss).unwrap();
        assert!((tf.beta_i(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((tf.beta_ii(0.0) - 0.25).abs() < 1e-15);
        // m' = Aβᴵᴵ
        let h = 1e-5;
        let num = (tf.m(1.0 + h) - tf.m(1.0 - h)) / (2.0 * h);
        assert!((num - tf.a * tf.beta_ii(1.0)).abs() < 1e-8);
        let tf = tf.with_r(5.0);
        assert!(tf.drift_delta(10.0).unwrap().abs() < 1e-10);
        assert!(tf.beta(10.0) < 1e-10);
    }

    #[test]
    fn law_grammar() {
        assert_eq!("pm1".parse::<StepLaw1D>().unwrap(), StepLaw1D::pm1());
        let l: StepLaw1D = "atoms:-2:1/3,1:2/3".parse().unwrap();
        assert_eq!(l.to_string(), "atoms:-2:1/3,1:2/3");
        assert!("atoms:-1:0.5,2:0.5".parse::<StepLaw1D>().is_err());
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert!(parse_rational("abc").is_err());
    }
}
