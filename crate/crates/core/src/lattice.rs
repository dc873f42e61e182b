//! Exact dynamic programming for the lattice walks on `√2·Z² ∩ {|x₂| < x₁}`.
//!
//! Positions are integer pairs `(a, b)` with real position `√2·(a, b)`. The
//! walk is killed as soon as `|b| ≥ a`. Two arithmetic modes share one engine:
//! double precision with pruning of negligible mass, and exact big-integer
//! numerators over the common denominator `Dⁿ`.

use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::increments::IncrementModel;
use crate::stats::NeumaierSum;

/// Mass below this is dropped in float mode and booked as pruned.
pub const DEFAULT_PRUNE: f64 = 1e-30;
/// Default ceiling on stored cells.
pub const DEFAULT_CELL_BUDGET: usize = 60_000_000;

/// Scalar type a [`MassTable`] can hold.
pub trait MassValue: Clone + Send + Sync {
    /// Step weight (probability, or integer numerator over `D`).
    type W: Copy + Default + std::fmt::Debug + Add<Output = Self::W> + Sub<Output = Self::W> + PartialOrd + Send + Sync;
    /// Signed coefficient for u-weighted sums.
    type C: Copy + Default + std::fmt::Debug + Add<Output = Self::C> + Sub<Output = Self::C> + Mul<Output = Self::C> + Send + Sync;
    /// Signed accumulator.
    type Acc: Clone + Default + std::fmt::Debug;

    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn axpy(dst: &mut [Self], w: Self::W, src: &[Self]);
    fn add_scaled(acc: &mut Self, m: &Self, w: Self::W);
    fn acc_add_scaled(acc: &mut Self::Acc, m: &Self, c: Self::C);
    fn w_to_c(w: Self::W) -> Self::C;
    fn int_to_c(v: i64) -> Self::C;
    fn w_is_zero(w: Self::W) -> bool;
    /// Rescale carried accumulators when the common denominator grows.
    fn rescale(_mass: &mut Self, _acc: &mut Self::Acc, _denominator: u64) {}
    /// Drop entries below `threshold`; returns the mass removed.
    fn prune(_values: &mut [Self], _threshold: f64) -> f64 {
        0.0
    }
}

impl MassValue for f64 {
    type W = f64;
    type C = f64;
    type Acc = f64;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn axpy(dst: &mut [f64], w: f64, src: &[f64]) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d += w * s;
        }
    }
    #[inline]
    fn add_scaled(acc: &mut f64, m: &f64, w: f64) {
        *acc += m * w;
    }
    #[inline]
    fn acc_add_scaled(acc: &mut f64, m: &f64, c: f64) {
        *acc += m * c;
    }
    fn w_to_c(w: f64) -> f64 {
        w
    }
    fn int_to_c(v: i64) -> f64 {
        v as f64
    }
    fn w_is_zero(w: f64) -> bool {
        w == 0.0
    }
    fn prune(values: &mut [f64], threshold: f64) -> f64 {
        let mut removed = 0.0;
        for v in values.iter_mut() {
            if *v != 0.0 && *v < threshold {
                removed += *v;
                *v = 0.0;
            }
        }
        removed
    }
}

impl MassValue for BigUint {
    type W = u64;
    type C = i128;
    type Acc = BigInt;

    fn zero() -> Self {
        <BigUint as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn axpy(dst: &mut [BigUint], w: u64, src: &[BigUint]) {
        for (d, s) in dst.iter_mut().zip(src) {
            if !Zero::is_zero(s) {
                *d += s * w;
            }
        }
    }
    fn add_scaled(acc: &mut BigUint, m: &BigUint, w: u64) {
        *acc += m * w;
    }
    fn acc_add_scaled(acc: &mut BigInt, m: &BigUint, c: i128) {
        if c == 0 {
            return;
        }
        let mag = m * c.unsigned_abs();
        let sign = if c < 0 { Sign::Minus } else { Sign::Plus };
        *acc += BigInt::from_biguint(sign, mag);
    }
    fn w_to_c(w: u64) -> i128 {
        w as i128
    }
    fn int_to_c(v: i64) -> i128 {
        v as i128
    }
    fn w_is_zero(w: u64) -> bool {
        w == 0
    }
    fn rescale(mass: &mut BigUint, acc: &mut BigInt, denominator: u64) {
        *mass *= denominator;
        *acc *= denominator;
    }
}

/// Steps sharing one horizontal displacement, sorted by vertical displacement,
/// with prefix sums for the killed-tail bookkeeping.
#[derive(Clone, Debug)]
struct StepGroup<M: MassValue> {
    da: i64,
    db: Vec<i64>,
    w: Vec<M::W>,
    p0: Vec<M::W>,
    p1: Vec<M::C>,
    p2: Vec<M::C>,
}

impl<M: MassValue> StepGroup<M> {
    fn new(da: i64, mut atoms: Vec<(i64, M::W)>) -> Self {
        atoms.sort_by_key(|a| a.0);
        let db: Vec<i64> = atoms.iter().map(|a| a.0).collect();
        let w: Vec<M::W> = atoms.iter().map(|a| a.1).collect();
        let mut p0 = vec![M::W::default()];
        let mut p1 = vec![M::C::default()];
        let mut p2 = vec![M::C::default()];
        for (&d, &wt) in db.iter().zip(&w) {
            let c = M::w_to_c(wt);
            let dc = M::int_to_c(d);
            p0.push(*p0.last().unwrap() + wt);
            p1.push(*p1.last().unwrap() + c * dc);
            p2.push(*p2.last().unwrap() + c * dc * dc);
        }
        StepGroup { da, db, w, p0, p1, p2 }
    }

    /// Killed weight and u-weighted coefficient over atom ranges `[0, lo)` and `[hi, S)`.
    #[inline]
    fn killed(&self, lo: usize, hi: usize, ap: i64, b: i64) -> (M::W, M::C) {
        let s = self.db.len();
        let w = self.p0[lo] + (self.p0[s] - self.p0[hi]);
        let c0 = M::w_to_c(w);
        let c1 = self.p1[lo] + (self.p1[s] - self.p1[hi]);
        let c2 = self.p2[lo] + (self.p2[s] - self.p2[hi]);
        // Σ w·2(a'² − (b + δ)²)
        let two = M::int_to_c(2);
        let base = M::int_to_c(ap * ap - b * b);
        let u = two * (base * c0 - two * M::int_to_c(b) * c1 - c2);
        (w, u)
    }
}

#[derive(Clone, Debug)]
struct Column<M> {
    b0: i64,
    vals: Vec<M>,
}

impl<M: MassValue> Column<M> {
    fn b1(&self) -> i64 {
        self.b0 + self.vals.len() as i64 - 1
    }
}

/// Interior mass distribution after `step_index` steps.
#[derive(Clone, Debug)]
pub struct MassTable<M: MassValue> {
    a0: i64,
    cols: Vec<Column<M>>,
    killed_mass: M,
    killed_u: M::Acc,
    pruned: f64,
    step_index: usize,
    exit_u: Option<(i64, i64)>,
}

impl<M: MassValue> MassTable<M> {
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn killed_mass(&self) -> &M {
        &self.killed_mass
    }

    /// `Σ killed mass · u(exit point)` with `u` the algebraic form `x₁² − x₂²`.
    pub fn killed_u(&self) -> &M::Acc {
        &self.killed_u
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned
    }

    /// Smallest and largest algebraic `u` at exit points reached so far.
    pub fn exit_u_range(&self) -> Option<(f64, f64)> {
        self.exit_u.map(|(lo, hi)| (lo as f64, hi as f64))
    }

    pub fn cell_count(&self) -> usize {
        self.cols.iter().map(|c| c.vals.len()).sum()
    }

    pub fn get(&self, a: i64, b: i64) -> Option<&M> {
        let col = self.cols.get(usize::try_from(a - self.a0).ok()?)?;
        col.vals.get(usize::try_from(b - col.b0).ok()?)
    }

    /// Nonzero interior entries `((a, b), mass)`.
    pub fn entries(&self) -> impl Iterator<Item = ((i64, i64), &M)> {
        self.cols.iter().enumerate().flat_map(move |(i, c)| {
            let a = self.a0 + i as i64;
            c.vals
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .map(move |(j, m)| ((a, c.b0 + j as i64), m))
        })
    }
}

impl MassTable<f64> {
    pub fn survival(&self) -> f64 {
        let mut s = NeumaierSum::default();
        self.entries().for_each(|(_, m)| s.add(*m));
        s.value()
    }

    /// `E[u(x + S(n)); τ > n]` with the real-scale `u = 2(a² − b²)`.
    pub fn expectation_u(&self) -> f64 {
        let mut s = NeumaierSum::default();
        self.entries().for_each(|((a, b), m)| s.add(m * (2 * (a * a - b * b)) as f64));
        s.value()
    }
}

impl MassTable<BigUint> {
    fn over(&self, num: BigInt, den: u64) -> BigRational {
        BigRational::new(num, BigInt::from(den).pow(self.step_index as u32))
    }

    pub fn survival_exact(&self, den: u64) -> BigRational {
        let mut total = <BigUint as Zero>::zero();
        self.entries().for_each(|(_, m)| total += m);
        self.over(total.into(), den)
    }

    pub fn expectation_u_exact(&self, den: u64) -> BigRational {
        let mut total = BigInt::zero();
        for ((a, b), m) in self.entries() {
            BigUint::acc_add_scaled(&mut total, m, (2 * (a * a - b * b)) as i128);
        }
        self.over(total, den)
    }

    pub fn killed_mass_exact(&self, den: u64) -> BigRational {
        self.over(self.killed_mass.clone().into(), den)
    }

    pub fn killed_u_exact(&self, den: u64) -> BigRational {
        self.over(self.killed_u.clone(), den)
    }
}

/// A prepared DP step operator for one lattice model.
#[derive(Clone, Debug)]
pub struct LatticeDp<M: MassValue> {
    groups: Vec<StepGroup<M>>,
    denominator: u64,
    prune: f64,
    cell_budget: usize,
}

pub type FloatDp = LatticeDp<f64>;
pub type ExactDp = LatticeDp<BigUint>;

impl FloatDp {
    pub fn float(model: &IncrementModel) -> Result<Self> {
        let steps = model
            .lattice_steps()
            .ok_or_else(|| Error::Model(format!("{model} is not a lattice model")))?;
        Ok(Self::from_weights(steps, 1))
    }
}

impl ExactDp {
    /// Requires rational step probabilities.
    pub fn exact(model: &IncrementModel) -> Result<Self> {
        let steps = model.lattice_steps_exact().ok_or_else(|| {
            Error::Model(format!("{model} has no exact rational representation"))
        })?;
        let den = steps.iter().fold(1i64, |acc, (_, p)| acc.lcm(p.denom()));
        let den = u64::try_from(den).map_err(|_| Error::Model("denominator overflow".into()))?;
        let weights = steps
            .into_iter()
            .map(|(s, p)| (s, (p.numer() * (den as i64 / p.denom())) as u64))
            .collect();
        Ok(Self::from_weights(weights, den))
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }
}

impl<M: MassValue> LatticeDp<M> {
    fn from_weights(steps: Vec<((i64, i64), M::W)>, denominator: u64) -> Self {
        let mut das: Vec<i64> = steps.iter().map(|s| s.0 .0).collect();
        das.sort_unstable();
        das.dedup();
        let groups = das
            .into_iter()
            .map(|da| {
                let atoms = steps
                    .iter()
                    .filter(|s| s.0 .0 == da && !M::w_is_zero(s.1))
                    .map(|s| (s.0 .1, s.1))
                    .collect();
                StepGroup::new(da, atoms)
            })
            .collect();
        LatticeDp { groups, denominator, prune: DEFAULT_PRUNE, cell_budget: DEFAULT_CELL_BUDGET }
    }

    pub fn with_prune(mut self, threshold: f64) -> Self {
        self.prune = threshold;
        self
    }

    pub fn with_cell_budget(mut self, cells: usize) -> Self {
        self.cell_budget = cells;
        self
    }

    /// Unit mass at the interior point `(a, b)`.
    pub fn start(&self, a: i64, b: i64, one: M) -> Result<MassTable<M>> {
        if b.abs() >= a {
            return Err(Error::Input(format!("start ({a}, {b}) is not inside |b| < a")));
        }
        Ok(MassTable {
            a0: a,
            cols: vec![Column { b0: b, vals: vec![one] }],
            killed_mass: M::zero(),
            killed_u: M::Acc::default(),
            pruned: 0.0,
            step_index: 0,
            exit_u: None,
        })
    }

    /// One Chapman–Kolmogorov step with killing.
    pub fn step(&self, table: &MassTable<M>) -> Result<MassTable<M>> {
        let max_da = self.groups.iter().map(|g| g.da).max().unwrap_or(0);
        let min_da = self.groups.iter().map(|g| g.da).min().unwrap_or(0);

        let src_a1 = table.a0 + table.cols.len() as i64 - 1;
        let new_a0 = (table.a0 + min_da).max(1);
        let new_a1 = src_a1 + max_da;
        if new_a1 < new_a0 {
            return Err(Error::Model("empty target range".into()));
        }
        // Target b-ranges: union of shifted sources, clipped to |b| < a.
        let width = (new_a1 - new_a0 + 1) as usize;
        let mut lo = vec![i64::MAX; width];
        let mut hi = vec![i64::MIN; width];
        for g in &self.groups {
            let (Some(&dlo), Some(&dhi)) = (g.db.first(), g.db.last()) else { continue };
            for (i, col) in table.cols.iter().enumerate() {
                if col.vals.is_empty() {
                    continue;
                }
                let ap = table.a0 + i as i64 + g.da;
                if ap < new_a0 {
                    continue;
                }
                let t = (ap - new_a0) as usize;
                lo[t] = lo[t].min((col.b0 + dlo).max(1 - ap));
                hi[t] = hi[t].max((col.b1() + dhi).min(ap - 1));
            }
        }
        let cells: usize = lo.iter().zip(&hi).map(|(l, h)| if h >= l { (h - l + 1) as usize } else { 0 }).sum();
        if cells > self.cell_budget {
            return Err(Error::Resource {
                reached: table.step_index,
                detail: format!("{cells} cells exceed the budget of {}", self.cell_budget),
            });
        }
        let mut cols: Vec<Column<M>> = lo
            .iter()
            .zip(&hi)
            .map(|(&l, &h)| {
                if h >= l {
                    Column { b0: l, vals: vec![M::zero(); (h - l + 1) as usize] }
                } else {
                    Column { b0: 0, vals: Vec::new() }
                }
            })
            .collect();

        let mut killed_mass = table.killed_mass.clone();
        let mut killed_u = table.killed_u.clone();
        M::rescale(&mut killed_mass, &mut killed_u, self.denominator);
        let mut exit_u = table.exit_u;
        let mut note_exit = |u: i64| {
            exit_u = Some(match exit_u {
                None => (u, u),
                Some((l, h)) => (l.min(u), h.max(u)),
            });
        };

        for g in &self.groups {
            let s = g.db.len();
            if s == 0 {
                continue;
            }
            let (dlo, dhi) = (g.db[0], g.db[s - 1]);
            for (i, col) in table.cols.iter().enumerate() {
                if col.vals.is_empty() {
                    continue;
                }
                let a = table.a0 + i as i64;
                let ap = a + g.da;
                let (b_lo, b_hi) = (col.b0, col.b1());
                // Inside transfers.
                if ap >= 1 {
                    let t = &mut cols[(ap - new_a0) as usize];
                    for (j, &d) in g.db.iter().enumerate() {
                        if d >= ap - b_lo {
                            break;
                        }
                        if d <= -ap - b_hi {
                            continue;
                        }
                        let from = b_lo.max(-ap - d + 1);
                        let to = b_hi.min(ap - d - 1);
                        if from > to {
                            continue;
                        }
                        let src = &col.vals[(from - b_lo) as usize..=(to - b_lo) as usize];
                        let off = (from + d - t.b0) as usize;
                        let len = src.len();
                        M::axpy(&mut t.vals[off..off + len], g.w[j], src);
                    }
                }
                // Killed transfers.
                let none_killed = ap >= 1 && dhi < ap - b_hi && dlo > -ap - b_lo;
                if none_killed {
                    continue;
                }
                for (k, m) in col.vals.iter().enumerate() {
                    if m.is_zero() {
                        continue;
                    }
                    let b = b_lo + k as i64;
                    let (kl, kh) = if ap < 1 {
                        (s, s)
                    } else {
                        (
                            g.db.partition_point(|&d| d <= -ap - b),
                            g.db.partition_point(|&d| d < ap - b),
                        )
                    };
                    if kl == 0 && kh == s {
                        continue;
                    }
                    let (w, c) = if ap < 1 {
                        g.killed(s, s, ap, b)
                    } else {
                        g.killed(kl, kh, ap, b)
                    };
                    M::add_scaled(&mut killed_mass, m, w);
                    M::acc_add_scaled(&mut killed_u, m, c);
                    let u_at = |d: i64| 2 * (ap * ap - (b + d) * (b + d));
                    if ap < 1 {
                        // Every atom exits; u is concave in δ, so the minimum sits
                        // at an end and the maximum next to δ = -b.
                        note_exit(u_at(g.db[0]).min(u_at(g.db[s - 1])));
                        let j = g.db.partition_point(|&d| d < -b);
                        let near = [j.checked_sub(1), (j < s).then_some(j)];
                        let top = near.iter().flatten().map(|&j| u_at(g.db[j])).max();
                        note_exit(top.unwrap_or(u_at(g.db[0])));
                        continue;
                    }
                    if kh < s {
                        note_exit(u_at(g.db[kh]));
                        note_exit(u_at(g.db[s - 1]));
                    }
                    if kl > 0 {
                        note_exit(u_at(g.db[kl - 1]));
                        note_exit(u_at(g.db[0]));
                    }
                }
            }
        }

        let mut pruned = table.pruned;
        if self.prune > 0.0 {
            for c in &mut cols {
                pruned += M::prune(&mut c.vals, self.prune);
            }
        }
        let mut out = MassTable {
            a0: new_a0,
            cols,
            killed_mass,
            killed_u,
            pruned,
            step_index: table.step_index + 1,
            exit_u,
        };
        out.trim();
        Ok(out)
    }
}

impl<M: MassValue> MassTable<M> {
    fn trim(&mut self) {
        for c in &mut self.cols {
            let first = c.vals.iter().position(|m| !m.is_zero());
            match first {
                None => {
                    c.vals.clear();
                    c.b0 = 0;
                }
                Some(f) => {
                    let last = c.vals.iter().rposition(|m| !m.is_zero()).unwrap_or(f);
                    c.vals.truncate(last + 1);
                    c.vals.drain(..f);
                    c.b0 += f as i64;
                }
            }
        }
        let lead = self.cols.iter().take_while(|c| c.vals.is_empty()).count();
        if lead == self.cols.len() {
            self.cols.clear();
            return;
        }
        self.cols.drain(..lead);
        self.a0 += lead as i64;
        while self.cols.last().is_some_and(|c| c.vals.is_empty()) {
            self.cols.pop();
        }
    }
}

/// Which arithmetic a DP run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
}

/// Exact per-step values of a rational run.
#[derive(Clone, Debug, Default)]
pub struct ExactSeries {
    pub survival: Vec<BigRational>,
    pub en: Vec<BigRational>,
    pub killed_u: Vec<BigRational>,
}

/// Per-step results of a DP run; index `n` holds the values after `n` steps.
#[derive(Clone, Debug, Default)]
pub struct DpSeries {
    pub survival: Vec<f64>,
    pub en: Vec<f64>,
    pub killed_u: Vec<f64>,
    pub pruned: Vec<f64>,
    /// Cumulative extremes of algebraic `u` over exit points.
    pub exit_u: Vec<Option<(f64, f64)>>,
    pub exact: Option<ExactSeries>,
}

impl DpSeries {
    pub fn horizon(&self) -> usize {
        self.survival.len().saturating_sub(1)
    }
}

/// Run the DP from lattice point `(a, b)` for `n` steps.
pub fn run_dp(model: &IncrementModel, start: (i64, i64), n: usize, arithmetic: Arithmetic) -> Result<DpSeries> {
    match arithmetic {
        Arithmetic::Float => run_float(&FloatDp::float(model)?, start, n),
        Arithmetic::Exact => run_exact(&ExactDp::exact(model)?, start, n),
    }
}

pub fn run_float(dp: &FloatDp, start: (i64, i64), n: usize) -> Result<DpSeries> {
    let mut t = dp.start(start.0, start.1, 1.0)?;
    let mut out = DpSeries::default();
    let record = |t: &MassTable<f64>, out: &mut DpSeries| {
        out.survival.push(t.survival());
        out.en.push(t.expectation_u());
        out.killed_u.push(*t.killed_u());
        out.pruned.push(t.pruned_mass());
        out.exit_u.push(t.exit_u_range());
    };
    record(&t, &mut out);
    for _ in 0..n {
        t = dp.step(&t)?;
        record(&t, &mut out);
    }
    Ok(out)
}

pub fn run_exact(dp: &ExactDp, start: (i64, i64), n: usize) -> Result<DpSeries> {
    let den = dp.denominator();
    let mut t = dp.start(start.0, start.1, BigUint::one())?;
    let mut out = DpSeries::default();
    let mut ex = ExactSeries::default();
    let record = |t: &MassTable<BigUint>, out: &mut DpSeries, ex: &mut ExactSeries| {
        let s = t.survival_exact(den);
        let e = t.expectation_u_exact(den);
        let k = t.killed_u_exact(den);
        out.survival.push(ratio_to_f64(&s));
        out.en.push(ratio_to_f64(&e));
        out.killed_u.push(ratio_to_f64(&k));
        out.pruned.push(0.0);
        out.exit_u.push(t.exit_u_range());
        ex.survival.push(s);
        ex.en.push(e);
        ex.killed_u.push(k);
    };
    record(&t, &mut out, &mut ex);
    for _ in 0..n {
        t = dp.step(&t)?;
        record(&t, &mut out, &mut ex);
    }
    out.exact = Some(ex);
    Ok(out)
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal expansion of `r` rounded to `digits` fractional digits.
pub fn ratio_to_decimal(r: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded.sign() == Sign::Minus;
    let mag = rounded.magnitude().to_string();
    let padded = format!("{mag:0>width$}", width = digits + 1);
    let (int, frac) = padded.split_at(padded.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// `P(τ > n)` from the lattice point `x`.
pub fn exact_survival(model: &IncrementModel, x: (i64, i64), n: usize, arithmetic: Arithmetic) -> Result<f64> {
    Ok(run_dp(model, x, n, arithmetic)?.survival[n])
}

/// `E_n = E[u(x + S(n)); τ > n]`.
pub fn exact_en(model: &IncrementModel, x: (i64, i64), n: usize, arithmetic: Arithmetic) -> Result<f64> {
    Ok(run_dp(model, x, n, arithmetic)?.en[n])
}

/// Extremes of `u(x + S(τ))` over exits reached with positive mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitAudit {
    pub max_exit_u: f64,
    pub min_exit_u: f64,
}

pub fn exit_value_audit(model: &IncrementModel, x: (i64, i64), n: usize, arithmetic: Arithmetic) -> Result<Option<ExitAudit>> {
    Ok(run_dp(model, x, n, arithmetic)?.exit_u[n].map(|(lo, hi)| ExitAudit { max_exit_u: hi, min_exit_u: lo }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlowVariationRow {
    pub n: usize,
    pub survival: f64,
    pub en: f64,
    /// `E_{2n}/E_n`, when `2n` is within the horizon.
    pub ratio_2n: Option<f64>,
    /// `n·P(τ > n)/E_n`.
    pub plateau: f64,
    pub pruned: f64,
    /// Exact survival and `E_n` as 30-digit decimals in rational mode.
    pub exact: Option<(String, String)>,
}

pub fn slow_variation_report(series: &DpSeries) -> Vec<SlowVariationRow> {
    let h = series.horizon();
    (1..=h)
        .map(|n| SlowVariationRow {
            n,
            survival: series.survival[n],
            en: series.en[n],
            ratio_2n: (2 * n <= h).then(|| series.en[2 * n] / series.en[n]),
            plateau: n as f64 * series.survival[n] / series.en[n],
            pruned: series.pruned[n],
            exact: series
                .exact
                .as_ref()
                .map(|e| (ratio_to_decimal(&e.survival[n], 30), ratio_to_decimal(&e.en[n], 30))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::make_pk_family;

    fn ex1(k: i64) -> IncrementModel {
        IncrementModel::example1(make_pk_family(k).unwrap())
    }

    #[test]
    fn one_step_enumeration() {
        let dp = ExactDp::exact(&ex1(1)).unwrap();
        assert_eq!(dp.denominator(), 4);
        let t0 = dp.start(1, 0, BigUint::one()).unwrap();
        let t1 = dp.step(&t0).unwrap();
        assert_eq!(t1.survival_exact(4), BigRational::new(1.into(), 4.into()));
        assert_eq!(t1.get(2, 0), Some(&BigUint::one()));
        assert_eq!(t1.killed_mass_exact(4), BigRational::new(3.into(), 4.into()));
        let t0 = dp.start(2, 0, BigUint::one()).unwrap();
        let t1 = dp.step(&t0).unwrap();
        assert_eq!(t1.survival_exact(4), BigRational::one());
    }

    #[test]
    fn two_step_survival_from_unit_point() {
        let s = run_dp(&ex1(1), (1, 0), 2, Arithmetic::Exact).unwrap();
        let e = s.exact.unwrap();
        assert_eq!(e.survival[2], BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn float_matches_exact() {
        let m = ex1(2);
        let a = run_dp(&m, (2, 0), 30, Arithmetic::Exact).unwrap();
        let b = run_dp(&m, (2, 0), 30, Arithmetic::Float).unwrap();
        for n in 0..=30 {
            assert!((a.survival[n] - b.survival[n]).abs() < 1e-14);
            assert!((a.en[n] - b.en[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn decimal_formatting() {
        let r = BigRational::new(1.into(), 3.into());
        assert_eq!(ratio_to_decimal(&r, 5), "0.33333");
        let r = BigRational::new((-7).into(), 4.into());
        assert_eq!(ratio_to_decimal(&r, 3), "-1.750");
        assert_eq!(ratio_to_decimal(&BigRational::from_integer(8.into()), 2), "8.00");
    }

    #[test]
    fn reflection_symmetry() {
        let dp = ExactDp::exact(&ex1(2)).unwrap();
        let mut t = dp.start(3, 0, BigUint::one()).unwrap();
        for _ in 0..20 {
            t = dp.step(&t).unwrap();
        }
        for ((a, b), m) in t.entries() {
            assert_eq!(Some(m), t.get(a, -b));
        }
        let dp = FloatDp::float(&ex1(2)).unwrap();
        let mut t = dp.start(3, 0, 1.0).unwrap();
        for _ in 0..20 {
            t = dp.step(&t).unwrap();
        }
        for ((a, b), m) in t.entries() {
            assert!((m - t.get(a, -b).unwrap()).abs() <= 1e-15 * m);
        }
    }

    #[test]
    fn budget_reports_reached_step() {
        let dp = FloatDp::float(&ex1(2)).unwrap().with_cell_budget(50);
        let mut t = dp.start(2, 0, 1.0).unwrap();
        let err = loop {
            match dp.step(&t) {
                Ok(next) => t = next,
                Err(e) => break e,
            }
        };
        assert!(matches!(err, Error::Resource { reached, .. } if reached > 0));
    }
}
