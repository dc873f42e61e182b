//! Single walkers and the exit record.
//!
//! Lattice models move on integer coordinates (real position `√2·(a, b)`), so
//! membership and `u` are evaluated without rounding.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeSpec, Point};
use crate::increments::{IncrementModel, StepSampler};

const SNAP: f64 = 1e-9;

#[derive(Clone, Debug)]
enum State {
    Lattice { a: i64, b: i64, start: (i64, i64), scale: f64 },
    Real { pos: Vec<f64>, start: Vec<f64>, step: Vec<f64> },
}

/// A walk started at a fixed interior point, killed on leaving the cone.
#[derive(Clone, Debug)]
pub struct Walker {
    cone: ConeSpec,
    sampler: StepSampler,
    state: State,
}

/// Integer lattice coordinates of a real point `√2·(a, b)`, if it is one.
pub fn lattice_coords(x: &[f64]) -> Option<(i64, i64)> {
    if x.len() != 2 {
        return None;
    }
    let a = x[0] / std::f64::consts::SQRT_2;
    let b = x[1] / std::f64::consts::SQRT_2;
    let (ra, rb) = (a.round(), b.round());
    ((a - ra).abs() < SNAP && (b - rb).abs() < SNAP && ra.abs() < 1e15 && rb.abs() < 1e15)
        .then_some((ra as i64, rb as i64))
}

/// The real point `√2·(a, b)`.
pub fn lattice_point(a: i64, b: i64) -> Point {
    Point(vec![a as f64 * std::f64::consts::SQRT_2, b as f64 * std::f64::consts::SQRT_2])
}

impl Walker {
    pub fn new(cone: &ConeSpec, model: &IncrementModel, x: &Point) -> Result<Self> {
        if cone.dim() != model.dim() {
            return Err(Error::Input(format!(
                "cone {cone} and model {} differ in dimension",
                model.name()
            )));
        }
        if !cone.contains(x)? {
            return Err(Error::Input(format!("start {:?} is not inside {cone}", x.0)));
        }
        let sampler = model.sampler()?;
        let state = if model.is_lattice() {
            let (a, b) = lattice_coords(x.coords()).ok_or_else(|| {
                Error::Input(format!("start {:?} is not a point of √2·Z²", x.0))
            })?;
            let scale = 2f64.powf(cone.exponent_p() / 2.0);
            State::Lattice { a, b, start: (a, b), scale }
        } else {
            State::Real { pos: x.0.clone(), start: x.0.clone(), step: vec![0.0; x.dim()] }
        };
        Ok(Walker { cone: cone.clone(), sampler, state })
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn reset(&mut self) {
        match &mut self.state {
            State::Lattice { a, b, start, .. } => (*a, *b) = *start,
            State::Real { pos, start, .. } => pos.copy_from_slice(start),
        }
    }

    /// One step; returns whether the walker is still inside.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        match &mut self.state {
            State::Lattice { a, b, .. } => {
                let (da, db) = self.sampler.sample_lattice(rng);
                *a += da;
                *b += db;
                self.cone.contains_coords(&[*a as f64, *b as f64])
            }
            State::Real { pos, step, .. } => {
                self.sampler.sample_into(rng, step);
                for (p, s) in pos.iter_mut().zip(step.iter()) {
                    *p += *s;
                }
                self.cone.contains_coords(pos)
            }
        }
    }

    /// Current real position.
    #[inline]
    pub fn position_into(&self, out: &mut [f64]) {
        match &self.state {
            State::Lattice { a, b, .. } => {
                out[0] = *a as f64 * std::f64::consts::SQRT_2;
                out[1] = *b as f64 * std::f64::consts::SQRT_2;
            }
            State::Real { pos, .. } => out.copy_from_slice(pos),
        }
    }

    pub fn position(&self) -> Point {
        let mut out = vec![0.0; self.cone.dim()];
        self.position_into(&mut out);
        Point(out)
    }

    /// `u` at the current position, zero outside.
    #[inline]
    pub fn u(&self) -> f64 {
        match &self.state {
            State::Lattice { a, b, scale, .. } => self.cone.u_coords(&[*a as f64, *b as f64]) * scale,
            State::Real { pos, .. } => self.cone.u_coords(pos),
        }
    }

    /// Squared distance from the start.
    #[inline]
    pub fn displacement_sq(&self) -> f64 {
        match &self.state {
            State::Lattice { a, b, start, .. } => {
                let (da, db) = ((*a - start.0) as f64, (*b - start.1) as f64);
                2.0 * (da * da + db * db)
            }
            State::Real { pos, start, .. } => pos.iter().zip(start).map(|(p, s)| (p - s) * (p - s)).sum(),
        }
    }
}

/// Outcome of one walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ExitRecord {
    /// Left the cone at step `tau`, landing at `exit_point`.
    Exited { tau: u64, exit_point: Point },
    /// Still inside at the horizon.
    Censored { n_max: u64, endpoint: Point },
}

impl ExitRecord {
    pub fn tau(&self) -> Option<u64> {
        match self {
            ExitRecord::Exited { tau, .. } => Some(*tau),
            ExitRecord::Censored { .. } => None,
        }
    }

    pub fn survived(&self, n: u64) -> bool {
        self.tau().is_none_or(|t| t > n)
    }
}

/// Walk from `x` until exit or `n_max` steps.
pub fn simulate_exit<R: Rng + ?Sized>(
    cone: &ConeSpec,
    model: &IncrementModel,
    x: &Point,
    n_max: u64,
    rng: &mut R,
) -> Result<ExitRecord> {
    if n_max == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    let mut w = Walker::new(cone, model, x)?;
    Ok(run_walker(&mut w, n_max, rng))
}

pub(crate) fn run_walker<R: Rng + ?Sized>(w: &mut Walker, n_max: u64, rng: &mut R) -> ExitRecord {
    for k in 1..=n_max {
        if !w.step(rng) {
            return ExitRecord::Exited { tau: k, exit_point: w.position() };
        }
    }
    ExitRecord::Censored { n_max, endpoint: w.position() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::make_pk_family;
    use crate::rng::stream;

    #[test]
    fn lattice_snap() {
        let p = lattice_point(3, -1);
        assert_eq!(lattice_coords(p.coords()), Some((3, -1)));
        assert_eq!(lattice_coords(&[1.0, 0.0]), None);
    }

    #[test]
    fn exit_record_invariants() {
        let cone = ConeSpec::weyl_d2();
        let model = IncrementModel::example1(make_pk_family(2).unwrap());
        let mut rng = stream(5, 0);
        for _ in 0..200 {
            let rec = simulate_exit(&cone, &model, &lattice_point(2, 0), 30, &mut rng).unwrap();
            match rec {
                ExitRecord::Exited { tau, exit_point } => {
                    assert!(tau >= 1 && tau <= 30);
                    assert!(!cone.contains(&exit_point).unwrap());
                }
                ExitRecord::Censored { endpoint, .. } => assert!(cone.contains(&endpoint).unwrap()),
            }
        }
    }

    #[test]
    fn far_start_is_censored() {
        let cone = ConeSpec::weyl_d2();
        let model = IncrementModel::example1(make_pk_family(1).unwrap());
        let mut rng = stream(1, 0);
        let rec = simulate_exit(&cone, &model, &lattice_point(1_000_000, 0), 10, &mut rng).unwrap();
        assert!(rec.tau().is_none());
    }

    #[test]
    fn off_lattice_start_rejected() {
        let cone = ConeSpec::weyl_d2();
        let model = IncrementModel::example1(make_pk_family(1).unwrap());
        assert!(Walker::new(&cone, &model, &Point::from([1.0, 0.0])).is_err());
    }
}
