//! Step distributions and their moment validators.
//!
//! Lattice models are stored in integer units: a step `(a, b)` of an
//! [`IncrementModel::example1`] walk moves the real position by `√2·(a, b)`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::{integrate, Tolerance};
use crate::special::normal_pdf;
use crate::stats::neumaier_sum;

pub type Rational = Ratio<i64>;

const CONSTRAINT_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-10;

/// First index of the heavy tail. Below it `log log k < 1` and the
/// diagnostic `log m·E[W₁²; W₁ ≥ m]` would dip.
pub const HEAVY_TAIL_START: i64 = 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    Finite,
    Heavy,
}

/// Tail descriptor for [`make_pk_heavy`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeavyShape {
    /// Tail scale as a fraction of the largest feasible one.
    pub scale_fraction: f64,
}

impl Default for HeavyShape {
    fn default() -> Self {
        HeavyShape { scale_fraction: 0.9 }
    }
}

/// Law of the horizontal coordinate `W₁` of the lattice vector `W`, restricted
/// to `k ≥ -1`. Only the half of the mass on the horizontal axis is stored;
/// the vertical atoms `(0, ±1)` carry the other half.
#[derive(Clone, Debug, PartialEq)]
pub struct PkSpec {
    support: Vec<(i64, f64)>,
    exact: Option<Vec<(i64, Rational)>>,
    tail_kind: TailKind,
    label: String,
    scale: Option<f64>,
    diagnostic: Vec<(i64, f64)>,
}

impl PkSpec {
    /// Build from explicit atoms, checking the three constraints.
    pub fn from_atoms(atoms: Vec<(i64, f64)>, label: impl Into<String>) -> Result<Self> {
        let spec = PkSpec {
            support: normalize_support(atoms),
            exact: None,
            tail_kind: TailKind::Finite,
            label: label.into(),
            scale: None,
            diagnostic: Vec::new(),
        };
        spec.check_constraints()?;
        Ok(spec)
    }

    pub fn support(&self) -> &[(i64, f64)] {
        &self.support
    }

    /// Probabilities in exact rational arithmetic, when representable.
    pub fn exact(&self) -> Option<&[(i64, Rational)]> {
        self.exact.as_deref()
    }

    pub fn tail_kind(&self) -> TailKind {
        self.tail_kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Heavy-tail scale `c`.
    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn max_k(&self) -> i64 {
        self.support.last().map_or(0, |&(k, _)| k)
    }

    pub fn prob(&self, k: i64) -> f64 {
        self.support
            .binary_search_by_key(&k, |&(j, _)| j)
            .map_or(0.0, |i| self.support[i].1)
    }

    /// `(m, log m·E[W₁²; W₁ ≥ m])` for integer `m ∈ [10, k_max/10]`
    /// (heavy specs only).
    pub fn diagnostic(&self) -> &[(i64, f64)] {
        &self.diagnostic
    }

    pub fn diagnostic_nondecreasing(&self) -> bool {
        self.diagnostic.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// `(Σ p_k, Σ k p_k, Σ k² p_k)`.
    pub fn moments(&self) -> (f64, f64, f64) {
        let s0 = neumaier_sum(self.support.iter().map(|&(_, p)| p));
        let s1 = neumaier_sum(self.support.iter().map(|&(k, p)| k as f64 * p));
        let s2 = neumaier_sum(self.support.iter().map(|&(k, p)| (k * k) as f64 * p));
        (s0, s1, s2)
    }

    fn check_constraints(&self) -> Result<()> {
        if let Some(&(k, p)) = self.support.iter().find(|&&(k, p)| k < -1 || !(p >= 0.0)) {
            return Err(Error::Model(format!("atom p_{k} = {p} is not a probability on k ≥ -1")));
        }
        if let Some(exact) = &self.exact {
            let s0: Rational = exact.iter().map(|(_, p)| *p).sum();
            let s1: Rational = exact.iter().map(|(k, p)| p * k).sum();
            let s2: Rational = exact.iter().map(|(k, p)| p * (k * k)).sum();
            let half = Rational::new(1, 2);
            if s0 != half || !s1.is_zero() || s2 != half {
                return Err(Error::Model(format!(
                    "constraints fail exactly: Σp = {s0}, Σkp = {s1}, Σk²p = {s2}"
                )));
            }
            return Ok(());
        }
        let (s0, s1, s2) = self.moments();
        if (s0 - 0.5).abs() > CONSTRAINT_TOL || s1.abs() > CONSTRAINT_TOL || (s2 - 0.5).abs() > CONSTRAINT_TOL {
            return Err(Error::Model(format!(
                "constraints fail: Σp = {s0}, Σkp = {s1}, Σk²p = {s2}"
            )));
        }
        Ok(())
    }
}

fn normalize_support(mut atoms: Vec<(i64, f64)>) -> Vec<(i64, f64)> {
    atoms.sort_by_key(|&(k, _)| k);
    let mut out: Vec<(i64, f64)> = Vec::with_capacity(atoms.len());
    for (k, p) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += p,
            _ => out.push((k, p)),
        }
    }
    out.retain(|&(_, p)| p != 0.0);
    out
}

/// The three-atom family on `{-1, 0, k}`; `k = 1` gives `p₁ = p₋₁ = 1/4`.
pub fn make_pk_family(k: i64) -> Result<PkSpec> {
    if k < 1 {
        return Err(Error::Input(format!("family index k = {k} must be at least 2 (or 1 for the degenerate case)")));
    }
    let exact: Vec<(i64, Rational)> = if k == 1 {
        vec![(-1, Rational::new(1, 4)), (1, Rational::new(1, 4))]
    } else {
        let pk = Rational::new(1, 2 * k * (k + 1));
        let pm1 = Rational::new(1, 2 * (k + 1));
        let p0 = Rational::new(1, 2) - Rational::new(1, 2 * k);
        vec![(-1, pm1), (0, p0), (k, pk)]
    };
    let support = exact.iter().map(|(j, p)| (*j, p.to_f64().unwrap_or(0.0))).collect();
    let spec = PkSpec {
        support: normalize_support(support),
        exact: Some(exact.into_iter().filter(|(_, p)| !p.is_zero()).collect()),
        tail_kind: TailKind::Finite,
        label: format!("family:{k}"),
        scale: None,
        diagnostic: Vec::new(),
    };
    spec.check_constraints()?;
    Ok(spec)
}

fn heavy_weight(k: i64) -> f64 {
    let kf = k as f64;
    let l = kf.ln();
    let ll = l.ln();
    1.0 / (kf * kf * kf * l * ll * ll)
}

/// Truncated tail `p_k = c/(k³ log k (log log k)²)` on `17 ≤ k < k_max` with a
/// single atom at `k_max` carrying the truncated second moment `c/log log k_max`;
/// `p₋₁, p₀, p₂` are re-solved so the constraints hold for the truncated law.
pub fn make_pk_heavy(k_max: i64, shape: HeavyShape) -> Result<PkSpec> {
    if k_max < 100 {
        return Err(Error::Input(format!("k_max = {k_max} must be at least 100")));
    }
    if !(shape.scale_fraction > 0.0 && shape.scale_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "scale fraction {} must lie in (0, 1]",
            shape.scale_fraction
        )));
    }
    let kmf = k_max as f64;
    let atom = 1.0 / (kmf.ln().ln() * kmf * kmf);
    let weights: Vec<(i64, f64)> = (HEAVY_TAIL_START..k_max)
        .map(|k| (k, heavy_weight(k)))
        .chain(std::iter::once((k_max, atom)))
        .collect();
    let w0 = neumaier_sum(weights.iter().map(|&(_, w)| w));
    let w1 = neumaier_sum(weights.iter().map(|&(k, w)| k as f64 * w));
    let w2 = neumaier_sum(weights.iter().map(|&(k, w)| (k as f64).powi(2) * w));
    let c_max = 1.0 / (2.0 * (w1 + w2));
    let c = shape.scale_fraction * c_max;
    let (t0, t1, t2) = (c * w0, c * w1, c * w2);
    let q2 = (0.5 - t1 - t2) / 6.0;
    let qm1 = 2.0 * q2 + t1;
    let q0 = 0.5 - t0 - qm1 - q2;
    if q2 < 0.0 || q0 < 0.0 {
        return Err(Error::Parameter(format!(
            "heavy tail infeasible (p₂ = {q2}, p₀ = {q0}); increase k_max or lower the scale"
        )));
    }
    let mut atoms = vec![(-1, qm1), (0, q0), (2, q2)];
    atoms.extend(weights.iter().map(|&(k, w)| (k, c * w)));
    let mut spec = PkSpec {
        support: normalize_support(atoms),
        exact: None,
        tail_kind: TailKind::Heavy,
        label: format!("heavy:{k_max}"),
        scale: Some(c),
        diagnostic: Vec::new(),
    };
    spec.check_constraints()?;
    spec.diagnostic = heavy_diagnostic(&spec.support, k_max);
    Ok(spec)
}

fn heavy_diagnostic(support: &[(i64, f64)], k_max: i64) -> Vec<(i64, f64)> {
    // Suffix sums of k² p_k, then sample m ∈ [10, k_max/10].
    let mut tail = 0.0;
    let mut suffix: Vec<(i64, f64)> = Vec::with_capacity(support.len());
    for &(k, p) in support.iter().rev() {
        tail += (k * k) as f64 * p;
        suffix.push((k, tail));
    }
    suffix.reverse();
    let tail_from = |m: i64| -> f64 {
        let i = suffix.partition_point(|&(k, _)| k < m);
        suffix.get(i).map_or(0.0, |&(_, t)| t)
    };
    (10..=k_max / 10).map(|m| (m, (m as f64).ln() * tail_from(m))).collect()
}

/// A discrete atom of a custom step law.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    GaussianIdentity,
    Example1(PkSpec),
    Example2(PkSpec),
    CustomDiscrete(Vec<Atom>),
}

/// A step distribution together with its dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementModel {
    kind: ModelKind,
    dim: usize,
    name: String,
}

impl IncrementModel {
    pub fn gaussian(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("Gaussian dimension must be positive".into()));
        }
        Ok(IncrementModel { kind: ModelKind::GaussianIdentity, dim, name: format!("gauss:{dim}") })
    }

    /// Steps `√2·W` with `W ∈ {(0, ±1)} ∪ {(k, 0)}`.
    pub fn example1(pk: PkSpec) -> Self {
        let name = format!("ex1:{}", pk.label);
        IncrementModel { kind: ModelKind::Example1(pk), dim: 2, name }
    }

    /// Steps `√2·(W₂, W₁)`.
    pub fn example2(pk: PkSpec) -> Self {
        let name = format!("ex2:{}", pk.label);
        IncrementModel { kind: ModelKind::Example2(pk), dim: 2, name }
    }

    /// Simple symmetric walk on the integers.
    pub fn pm1() -> Self {
        IncrementModel {
            kind: ModelKind::CustomDiscrete(vec![
                Atom { point: vec![-1.0], prob: 0.5 },
                Atom { point: vec![1.0], prob: 0.5 },
            ]),
            dim: 1,
            name: "pm1".into(),
        }
    }

    pub fn custom(atoms: Vec<Atom>, name: impl Into<String>) -> Result<Self> {
        let dim = atoms.first().map(|a| a.point.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Input("custom model needs at least one atom of positive dimension".into()));
        }
        if atoms.iter().any(|a| a.point.len() != dim || !(a.prob >= 0.0) || a.point.iter().any(|v| !v.is_finite())) {
            return Err(Error::Model("custom atoms must share a dimension and carry finite coordinates and probabilities".into()));
        }
        let total = neumaier_sum(atoms.iter().map(|a| a.prob));
        if (total - 1.0).abs() > CONSTRAINT_TOL {
            return Err(Error::Model(format!("custom atom probabilities sum to {total}")));
        }
        Ok(IncrementModel { kind: ModelKind::CustomDiscrete(atoms), dim, name: name.into() })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pk(&self) -> Option<&PkSpec> {
        match &self.kind {
            ModelKind::Example1(pk) | ModelKind::Example2(pk) => Some(pk),
            _ => None,
        }
    }

    pub fn is_lattice(&self) -> bool {
        self.pk().is_some()
    }

    /// Integer steps `(a, b)` in lattice units with their probabilities.
    pub fn lattice_steps(&self) -> Option<Vec<((i64, i64), f64)>> {
        let (pk, swap) = match &self.kind {
            ModelKind::Example1(pk) => (pk, false),
            ModelKind::Example2(pk) => (pk, true),
            _ => return None,
        };
        let mut steps = vec![((0, 1), 0.25), ((0, -1), 0.25)];
        steps.extend(pk.support.iter().map(|&(k, p)| ((k, 0), p)));
        if swap {
            for s in &mut steps {
                s.0 = (s.0 .1, s.0 .0);
            }
        }
        Some(steps)
    }

    /// As [`lattice_steps`](Self::lattice_steps) with exact probabilities.
    pub fn lattice_steps_exact(&self) -> Option<Vec<((i64, i64), Rational)>> {
        let (pk, swap) = match &self.kind {
            ModelKind::Example1(pk) => (pk, false),
            ModelKind::Example2(pk) => (pk, true),
            _ => return None,
        };
        let quarter = Rational::new(1, 4);
        let mut steps = vec![((0, 1), quarter), ((0, -1), quarter)];
        steps.extend(pk.exact()?.iter().map(|&(k, p)| ((k, 0), p)));
        if swap {
            for s in &mut steps {
                s.0 = (s.0 .1, s.0 .0);
            }
        }
        Some(steps)
    }

    /// Check mean zero and identity covariance.
    pub fn validate_moments(&self) -> Result<MomentReport> {
        let report = match &self.kind {
            ModelKind::GaussianIdentity => {
                let tol = Tolerance::new(1e-14, 1e-13);
                let all = f64::NEG_INFINITY..f64::INFINITY;
                let m1 = integrate(|x| x * normal_pdf(x), all.start, all.end, tol).value;
                let m2 = integrate(|x| x * x * normal_pdf(x), all.start, all.end, tol).value;
                let d = self.dim;
                let mut cov = vec![vec![0.0; d]; d];
                for (i, row) in cov.iter_mut().enumerate() {
                    // Off-diagonal entries factor into products of first moments.
                    for (j, c) in row.iter_mut().enumerate() {
                        *c = if i == j { m2 } else { m1 * m1 };
                    }
                }
                MomentReport { mean: vec![m1; d], covariance: cov, exact: false }
            }
            ModelKind::Example1(_) | ModelKind::Example2(_) => {
                if let Some(steps) = self.lattice_steps_exact() {
                    // Real step is √2·(a, b): the mean scales by √2 and the
                    // covariance by 2, both exactly.
                    let mut mean = [Rational::zero(); 2];
                    let mut cov = [[Rational::zero(); 2]; 2];
                    for ((a, b), p) in &steps {
                        let v = [*a, *b];
                        for i in 0..2 {
                            mean[i] += p * v[i];
                            for j in 0..2 {
                                cov[i][j] += p * (v[i] * v[j] * 2);
                            }
                        }
                    }
                    let exact_ok = mean.iter().all(Zero::is_zero)
                        && cov[0][0] == Rational::from(1)
                        && cov[1][1] == Rational::from(1)
                        && cov[0][1].is_zero();
                    let report = MomentReport {
                        mean: mean.iter().map(|m| m.to_f64().unwrap_or(f64::NAN) * 2f64.sqrt()).collect(),
                        covariance: cov
                            .iter()
                            .map(|r| r.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
                            .collect(),
                        exact: true,
                    };
                    if !exact_ok {
                        return Err(Error::Model(format!("{}: moments fail exactly: {report:?}", self.name)));
                    }
                    report
                } else {
                    let steps = self.lattice_steps().unwrap_or_default();
                    let pts: Vec<(Vec<f64>, f64)> = steps
                        .iter()
                        .map(|&((a, b), p)| (vec![a as f64 * 2f64.sqrt(), b as f64 * 2f64.sqrt()], p))
                        .collect();
                    discrete_moments(&pts, 2)
                }
            }
            ModelKind::CustomDiscrete(atoms) => {
                let pts: Vec<(Vec<f64>, f64)> = atoms.iter().map(|a| (a.point.clone(), a.prob)).collect();
                discrete_moments(&pts, self.dim)
            }
        };
        let err = report.max_error();
        if err > MOMENT_TOL {
            return Err(Error::Model(format!(
                "{}: mean/covariance deviate from (0, I) by {err:e}",
                self.name
            )));
        }
        Ok(report)
    }

    /// `E[W₁²; W₁ ≥ m]` and the partial sum of `E[W₁² log(1+W₁)]` over
    /// `1 ≤ W₁ ≤ m`, in lattice units.
    pub fn tail_functional(&self, m: f64) -> Result<TailFunctional> {
        let pk = self.pk().ok_or_else(|| {
            Error::Unsupported(format!("tail functional needs a lattice model, got {}", self.name))
        })?;
        let second_moment_tail = neumaier_sum(
            pk.support.iter().filter(|&&(k, _)| k as f64 >= m).map(|&(k, p)| (k * k) as f64 * p),
        );
        let log_moment_partial = neumaier_sum(
            pk.support
                .iter()
                .filter(|&&(k, _)| k >= 1 && k as f64 <= m)
                .map(|&(k, p)| (k * k) as f64 * (k as f64).ln_1p() * p),
        );
        Ok(TailFunctional { second_moment_tail, log_moment_partial })
    }

    /// Exact `E[W₁²; W₁ ≥ m]` for rational specs.
    pub fn second_moment_tail_exact(&self, m: i64) -> Option<Rational> {
        let exact = self.pk()?.exact()?;
        Some(exact.iter().filter(|(k, _)| *k >= m).map(|(k, p)| p * (k * k)).sum())
    }

    pub fn sampler(&self) -> Result<StepSampler> {
        StepSampler::new(self)
    }

    /// One step as a [`Point`]; lattice steps are exact multiples of `√2`.
    pub fn sample_step<R: Rng + ?Sized>(&self, sampler: &mut StepSampler, rng: &mut R) -> Point {
        let mut out = vec![0.0; self.dim];
        sampler.sample_into(rng, &mut out);
        Point(out)
    }
}

impl fmt::Display for IncrementModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for IncrementModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Input(format!(
            "unknown model '{s}': expected gauss:<d>, ex1|ex2:family:<k>, ex1|ex2:heavy:<kmax> or pm1"
        ));
        let int = |t: &str| t.parse::<i64>().map_err(|_| bad());
        match parts.as_slice() {
            ["pm1"] => Ok(IncrementModel::pm1()),
            ["gauss", d] => IncrementModel::gaussian(int(d)?.try_into().map_err(|_| bad())?),
            [ex @ ("ex1" | "ex2"), fam, k] => {
                let pk = match *fam {
                    "family" => make_pk_family(int(k)?)?,
                    "heavy" => make_pk_heavy(int(k)?, HeavyShape::default())?,
                    _ => return Err(bad()),
                };
                Ok(if *ex == "ex1" { IncrementModel::example1(pk) } else { IncrementModel::example2(pk) })
            }
            _ => Err(bad()),
        }
    }
}

fn discrete_moments(pts: &[(Vec<f64>, f64)], d: usize) -> MomentReport {
    let mean: Vec<f64> = (0..d).map(|i| neumaier_sum(pts.iter().map(|(x, p)| p * x[i]))).collect();
    let covariance = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| neumaier_sum(pts.iter().map(|(x, p)| p * (x[i] - mean[i]) * (x[j] - mean[j]))))
                .collect()
        })
        .collect();
    MomentReport { mean, covariance, exact: false }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Whether the check ran in exact rational arithmetic.
    pub exact: bool,
}

impl MomentReport {
    /// Largest deviation from mean 0 and covariance I.
    pub fn max_error(&self) -> f64 {
        let m = self.mean.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let c = self.covariance.iter().enumerate().fold(0.0f64, |a, (i, row)| {
            row.iter()
                .enumerate()
                .fold(a, |a, (j, v)| a.max((v - if i == j { 1.0 } else { 0.0 }).abs()))
        });
        m.max(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFunctional {
    pub second_moment_tail: f64,
    pub log_moment_partial: f64,
}

/// Per-worker sampler. Holds a small bit buffer, so it is `&mut` to use.
#[derive(Clone, Debug)]
pub enum StepSampler {
    Gaussian { dim: usize },
    Lattice { alias: WeightedAliasIndex<f64>, steps: Vec<(i64, i64)> },
    /// Fair `±1`, one random bit per step.
    Pm1 { bits: u64, left: u32 },
    Custom { alias: WeightedAliasIndex<f64>, atoms: Vec<Vec<f64>> },
}

impl StepSampler {
    pub fn new(model: &IncrementModel) -> Result<Self> {
        let alias = |w: Vec<f64>| {
            WeightedAliasIndex::new(w).map_err(|e| Error::Model(format!("{}: {e}", model.name)))
        };
        Ok(match &model.kind {
            ModelKind::GaussianIdentity => StepSampler::Gaussian { dim: model.dim },
            ModelKind::Example1(_) | ModelKind::Example2(_) => {
                let steps = model.lattice_steps().unwrap_or_default();
                StepSampler::Lattice {
                    alias: alias(steps.iter().map(|s| s.1).collect())?,
                    steps: steps.iter().map(|s| s.0).collect(),
                }
            }
            ModelKind::CustomDiscrete(atoms) => {
                let fair = atoms.len() == 2
                    && atoms[0].point.len() == 1
                    && atoms.iter().all(|a| a.prob == 0.5)
                    && atoms[0].point[0] == -atoms[1].point[0]
                    && atoms[0].point[0].abs() == 1.0;
                if fair {
                    StepSampler::Pm1 { bits: 0, left: 0 }
                } else {
                    StepSampler::Custom {
                        alias: alias(atoms.iter().map(|a| a.prob).collect())?,
                        atoms: atoms.iter().map(|a| a.point.clone()).collect(),
                    }
                }
            }
        })
    }

    /// Integer step of a lattice model.
    #[inline]
    pub fn sample_lattice<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, i64) {
        match self {
            StepSampler::Lattice { alias, steps } => steps[alias.sample(rng)],
            _ => panic!("sample_lattice on a non-lattice sampler"),
        }
    }

    #[inline]
    pub fn sample_pm1<R: Rng + ?Sized>(bits: &mut u64, left: &mut u32, rng: &mut R) -> f64 {
        if *left == 0 {
            *bits = rng.random();
            *left = 64;
        }
        let b = *bits & 1;
        *bits >>= 1;
        *left -= 1;
        if b == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Write one step into `out` (length = model dimension).
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        match self {
            StepSampler::Gaussian { .. } => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            StepSampler::Lattice { alias, steps } => {
                let (a, b) = steps[alias.sample(rng)];
                out[0] = a as f64 * std::f64::consts::SQRT_2;
                out[1] = b as f64 * std::f64::consts::SQRT_2;
            }
            StepSampler::Pm1 { bits, left } => out[0] = Self::sample_pm1(bits, left, rng),
            StepSampler::Custom { alias, atoms } => out.copy_from_slice(&atoms[alias.sample(rng)]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_examples() {
        let f2 = make_pk_family(2).unwrap();
        let e = f2.exact().unwrap();
        assert_eq!(e, &[(-1, Rational::new(1, 6)), (0, Rational::new(1, 4)), (2, Rational::new(1, 12))]);
        let f3 = make_pk_family(3).unwrap();
        assert_eq!(
            f3.exact().unwrap(),
            &[(-1, Rational::new(1, 8)), (0, Rational::new(1, 3)), (3, Rational::new(1, 24))]
        );
        let f1 = make_pk_family(1).unwrap();
        assert_eq!(f1.exact().unwrap(), &[(-1, Rational::new(1, 4)), (1, Rational::new(1, 4))]);
        assert!(make_pk_family(0).is_err());
    }

    #[test]
    fn heavy_spec_properties() {
        let h = make_pk_heavy(10_000, HeavyShape::default()).unwrap();
        let (s0, s1, s2) = h.moments();
        assert!((s0 - 0.5).abs() < 1e-12 && s1.abs() < 1e-12 && (s2 - 0.5).abs() < 1e-12);
        assert!(h.diagnostic_nondecreasing());
        let d = h.diagnostic();
        assert_eq!(d.first().unwrap().0, 10);
        assert!(d.iter().find(|p| p.0 == 1000).unwrap().1 > d[0].1);
        assert!(make_pk_heavy(50, HeavyShape::default()).is_err());
        assert!(make_pk_heavy(1000, HeavyShape { scale_fraction: 1.5 }).is_err());
    }

    #[test]
    fn tail_functional_examples() {
        let m = IncrementModel::example1(make_pk_family(2).unwrap());
        assert_eq!(m.tail_functional(3.0).unwrap().second_moment_tail, 0.0);
        assert!((m.tail_functional(2.0).unwrap().second_moment_tail - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.second_moment_tail_exact(2), Some(Rational::new(1, 3)));
        assert!(IncrementModel::gaussian(2).unwrap().tail_functional(1.0).is_err());
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["gauss:3", "ex1:family:2", "ex2:family:1", "ex2:heavy:1000", "pm1"] {
            let m: IncrementModel = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("ex3:family:2".parse::<IncrementModel>().is_err());
        assert!("gauss:0".parse::<IncrementModel>().is_err());
    }

    #[test]
    fn swap_duality() {
        let pk = make_pk_family(2).unwrap();
        let a = IncrementModel::example1(pk.clone()).lattice_steps().unwrap();
        let b = IncrementModel::example2(pk).lattice_steps().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.0 .1, x.0 .0), y.0);
            assert_eq!(x.1, y.1);
        }
    }
}
