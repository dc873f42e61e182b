//! TOML run configurations.
//!
//! Every problem in a document is reported at once; a config that parses is
//! fully validated, so the runner never fails on a key it could have checked.

use std::path::PathBuf;
use std::str::FromStr;

use conewalk::halfline::StepLaw1D;
use conewalk::increments::IncrementModel;
use conewalk::lattice::Arithmetic;
use conewalk::{ConeSpec, Error, Result};
use serde::Serialize;
use toml::{Table, Value};

/// Prefix of environment variables that override config keys.
pub const ENV_PREFIX: &str = "CONEWALK_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Survival,
    VEstimate,
    VDecomposition,
    ConditionalLaw,
    EnSequence,
    DpExact,
    Halfline,
    GammaCheck,
    PotentialScan,
    YCheck,
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "survival" => Experiment::Survival,
            "v_estimate" => Experiment::VEstimate,
            "v_decomposition" => Experiment::VDecomposition,
            "conditional_law" => Experiment::ConditionalLaw,
            "en_sequence" => Experiment::EnSequence,
            "dp_exact" => Experiment::DpExact,
            "halfline" => Experiment::Halfline,
            "gamma_check" => Experiment::GammaCheck,
            "potential_scan" => Experiment::PotentialScan,
            "y_check" => Experiment::YCheck,
            _ => return Err(format!("unknown experiment `{s}`")),
        })
    }
}

/// Experiment-specific knobs, all with defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    /// Shift `R`: decomposition, Y check, or a forced halfline constant.
    pub r: Option<f64>,
    pub r_list: Vec<f64>,
    pub bins: usize,
    pub min_survivors: u64,
    pub max_rounds: u32,
    pub cap: u64,
    pub fit_range: Option<(u64, u64)>,
    pub expect_slope: Option<f64>,
    pub slope_tol: f64,
    pub q: f64,
    pub gamma: String,
    pub tail: Option<String>,
    pub a_const: f64,
    pub d_list: Vec<f64>,
    pub t_list: Vec<f64>,
    pub c: f64,
    pub n_max: u64,
    pub r_candidates: Vec<f64>,
    pub grid_extent: f64,
    pub grid_delta: f64,
    pub arithmetic: Arithmetic,
    pub grid_points: usize,
    pub overshoot_x: Vec<f64>,
    pub horizon: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            r: None,
            r_list: vec![0.0],
            bins: 5,
            min_survivors: 0,
            max_rounds: 1,
            cap: conewalk::mc::DEFAULT_HORIZON_CAP,
            fit_range: None,
            expect_slope: None,
            slope_tol: 0.1,
            q: 1.0,
            gamma: "inv_log_sq".into(),
            tail: None,
            a_const: conewalk::potential::scan::DEFAULT_A,
            d_list: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            t_list: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            c: 1.0 / 3.0,
            n_max: 50,
            r_candidates: vec![2.0, 4.0, 8.0, 16.0],
            grid_extent: 64.0,
            grid_delta: 0.35,
            arithmetic: Arithmetic::Exact,
            grid_points: 1000,
            overshoot_x: Vec::new(),
            horizon: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub cone: Option<ConeSpec>,
    pub model: Option<IncrementModel>,
    pub law: Option<StepLaw1D>,
    /// Start point. Lattice models take lattice coordinates `(a, b)` for the
    /// real point `√2·(a, b)`.
    pub x: Vec<f64>,
    pub n_list: Vec<u64>,
    pub reps: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub params: Params,
    /// The document after environment overrides, echoed into the manifest.
    pub source: Table,
}

const KEYS: &[&str] = &[
    "experiment", "cone", "model", "law", "x", "n_list", "reps", "seed", "out_dir", "workers", "r",
    "r_list", "bins", "min_survivors", "max_rounds", "cap", "fit_range", "expect_slope", "slope_tol", "q",
    "gamma", "tail", "a_const", "d_list", "t_list", "c", "n_max", "r_candidates", "grid_extent",
    "grid_delta", "arithmetic", "grid_points", "overshoot_x", "horizon",
];

struct Reader<'a> {
    table: &'a Table,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    fn fail(&mut self, key: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("`{key}`: {msg}"));
    }

    fn float_of(v: &Value) -> Option<f64> {
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        let v = self.raw(key)?;
        match Self::float_of(v).filter(|f| f.is_finite()) {
            Some(f) => Some(f),
            None => {
                self.fail(key, format!("expected a finite number, got {v}"));
                None
            }
        }
    }

    fn u64(&mut self, key: &str) -> Option<u64> {
        let v = self.raw(key)?;
        match v.as_integer().and_then(|i| u64::try_from(i).ok()) {
            Some(i) => Some(i),
            None => {
                self.fail(key, format!("expected a nonnegative integer, got {v}"));
                None
            }
        }
    }

    fn str(&mut self, key: &str) -> Option<String> {
        let v = self.raw(key)?;
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.fail(key, format!("expected a string, got {v}"));
                None
            }
        }
    }

    fn f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.raw(key)?;
        let parsed = v
            .as_array()
            .and_then(|a| a.iter().map(|e| Self::float_of(e).filter(|f| f.is_finite())).collect::<Option<Vec<_>>>());
        if parsed.is_none() {
            self.fail(key, format!("expected an array of numbers, got {v}"));
        }
        parsed
    }

    fn u64_list(&mut self, key: &str) -> Option<Vec<u64>> {
        let v = self.raw(key)?;
        let parsed = v.as_array().and_then(|a| {
            a.iter().map(|e| e.as_integer().and_then(|i| u64::try_from(i).ok())).collect::<Option<Vec<_>>>()
        });
        if parsed.is_none() {
            self.fail(key, format!("expected an array of nonnegative integers, got {v}"));
        }
        parsed
    }

    fn grammar<T: FromStr<Err = Error>>(&mut self, key: &str) -> Option<T> {
        let s = self.str(key)?;
        match s.parse::<T>() {
            Ok(t) => Some(t),
            Err(e) => {
                self.fail(key, e);
                None
            }
        }
    }

    fn require<T>(&mut self, key: &str, v: Option<T>, why: &str) -> Option<T> {
        if v.is_none() && self.raw(key).is_none() {
            self.errors.push(format!("`{key}` is required {why}"));
        }
        v
    }
}

/// Overlay `CONEWALK_<KEY>` variables onto `table`. Values are read as TOML
/// when they parse and as strings otherwise. Variables that do not name a
/// config key (such as the CLI's own flags) are ignored.
pub fn apply_env_overrides<I: IntoIterator<Item = (String, String)>>(table: &mut Table, vars: I) {
    for (name, value) in vars {
        let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
        let key = key.to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            continue;
        }
        let parsed = format!("v = {value}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or(Value::String(value));
        table.insert(key, parsed);
    }
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
    from_table(table)
}

/// Validate an already-parsed document, collecting every error.
pub fn from_table(table: Table) -> Result<RunConfig> {
    let mut r = Reader { table: &table, errors: Vec::new() };
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            r.errors.push(format!("unknown key `{key}`"));
        }
    }

    let experiment = match r.str("experiment") {
        Some(s) => match s.parse::<Experiment>() {
            Ok(e) => Some(e),
            Err(msg) => {
                r.fail("experiment", msg);
                None
            }
        },
        None => {
            if r.raw("experiment").is_none() {
                r.errors.push("`experiment` is required".into());
            }
            None
        }
    };
    let seed = r.u64("seed");
    if r.raw("seed").is_none() {
        r.errors.push("seed required for reproducibility".into());
    }
    let cone: Option<ConeSpec> = r.grammar("cone");
    let model: Option<IncrementModel> = r.grammar("model");
    let law: Option<StepLaw1D> = r.grammar("law");
    let x = r.f64_list("x");
    let n_list = r.u64_list("n_list");
    let reps = r.u64("reps");
    let out_dir = r.str("out_dir").map(PathBuf::from);
    let workers = r.u64("workers").unwrap_or(0) as usize;

    let mut p = Params::default();
    p.r = r.f64("r");
    if let Some(v) = r.f64_list("r_list") {
        p.r_list = v;
    }
    if let Some(v) = r.u64("bins") {
        p.bins = v as usize;
    }
    if let Some(v) = r.u64("min_survivors") {
        p.min_survivors = v;
    }
    if let Some(v) = r.u64("max_rounds") {
        p.max_rounds = v.min(u32::MAX as u64) as u32;
    }
    if let Some(v) = r.u64("cap") {
        p.cap = v;
    }
    if let Some(v) = r.u64_list("fit_range") {
        match v.as_slice() {
            [lo, hi] if lo < hi => p.fit_range = Some((*lo, *hi)),
            _ => r.fail("fit_range", "expected [lo, hi] with lo < hi"),
        }
    }
    p.expect_slope = r.f64("expect_slope");
    if let Some(v) = r.f64("slope_tol") {
        p.slope_tol = v;
    }
    if let Some(v) = r.f64("q") {
        p.q = v;
    }
    if let Some(v) = r.str("gamma") {
        p.gamma = v;
    }
    p.tail = r.str("tail");
    if let Some(v) = r.f64("a_const") {
        if !(v > 0.0 && v < 1.0) {
            r.fail("a_const", format!("{v} is not in (0, 1)"));
        }
        p.a_const = v;
    }
    if let Some(v) = r.f64_list("d_list") {
        p.d_list = v;
    }
    if let Some(v) = r.f64_list("t_list") {
        p.t_list = v;
    }
    if let Some(v) = r.f64("c") {
        p.c = v;
    }
    if let Some(v) = r.u64("n_max") {
        p.n_max = v;
    }
    if let Some(v) = r.f64_list("r_candidates") {
        p.r_candidates = v;
    }
    if let Some(v) = r.f64("grid_extent") {
        p.grid_extent = v;
    }
    if let Some(v) = r.f64("grid_delta") {
        p.grid_delta = v;
    }
    if let Some(v) = r.str("arithmetic") {
        match v.as_str() {
            "exact" => p.arithmetic = Arithmetic::Exact,
            "float" => p.arithmetic = Arithmetic::Float,
            _ => r.fail("arithmetic", format!("expected `exact` or `float`, got `{v}`")),
        }
    }
    if let Some(v) = r.u64("grid_points") {
        p.grid_points = v as usize;
    }
    if let Some(v) = r.f64_list("overshoot_x") {
        p.overshoot_x = v;
    }
    if let Some(v) = r.u64("horizon") {
        p.horizon = v;
    }

    if let Some(list) = &n_list {
        if list.is_empty() || list[0] == 0 || list.windows(2).any(|w| w[1] <= w[0]) {
            r.fail("n_list", "must be positive and strictly increasing");
        }
    }
    if let Some(0) = reps {
        r.fail("reps", "must be positive");
    }

    use Experiment::*;
    if let Some(exp) = experiment {
        let needs_cone = matches!(exp, Survival | VEstimate | VDecomposition | ConditionalLaw | GammaCheck | PotentialScan);
        let needs_model = matches!(exp, Survival | VEstimate | VDecomposition | ConditionalLaw | EnSequence | DpExact | YCheck);
        let needs_x = needs_model;
        let needs_n = matches!(exp, Survival | VEstimate | ConditionalLaw | EnSequence | DpExact);
        let needs_reps = matches!(exp, Survival | VEstimate | VDecomposition | ConditionalLaw | EnSequence | YCheck);
        let why = format!("for experiment {exp:?}");
        if needs_cone {
            r.require("cone", cone.as_ref(), &why);
        }
        if needs_model {
            r.require("model", model.as_ref(), &why);
        }
        if needs_x {
            r.require("x", x.as_ref(), &why);
        }
        if needs_n {
            r.require("n_list", n_list.as_ref(), &why);
        }
        if needs_reps {
            r.require("reps", reps.as_ref(), &why);
        }
        if exp == Halfline {
            r.require("law", law.as_ref(), &why);
        }
        if let (Some(c), Some(m)) = (&cone, &model) {
            if c.dim() != m.dim() {
                r.errors.push(format!("cone {c} has dimension {} but model {m} has {}", c.dim(), m.dim()));
            }
        }
        if let (Some(m), Some(x)) = (&model, &x) {
            if x.len() != m.dim() {
                r.fail("x", format!("has {} coordinates, model {m} needs {}", x.len(), m.dim()));
            } else if m.is_lattice() && x.iter().any(|v| v.fract() != 0.0) {
                r.fail("x", "lattice models take integer lattice coordinates");
            }
        }
    }

    if !r.errors.is_empty() {
        return Err(Error::Config(r.errors));
    }
    drop(r);
    Ok(RunConfig {
        experiment: experiment.expect("checked"),
        cone,
        model,
        law,
        x: x.unwrap_or_default(),
        n_list: n_list.unwrap_or_default(),
        reps: reps.unwrap_or(0),
        seed: seed.expect("checked"),
        out_dir: out_dir.unwrap_or_else(|| PathBuf::from("out")),
        workers,
        params: p,
        source: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        experiment = "survival"
        cone = "orthant:2"
        model = "gauss:2"
        x = [3.0, 3.0]
        n_list = [10, 100]
        reps = 1000
        seed = 1
    "#;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_survival_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.experiment, Experiment::Survival);
        assert_eq!(c.n_list, vec![10, 100]);
    }

    #[test]
    fn missing_seed_is_named() {
        let e = errors(&MINIMAL.replace("seed = 1", ""));
        assert!(e.iter().any(|m| m == "seed required for reproducibility"), "{e:?}");
    }

    #[test]
    fn wedge_bound_is_named() {
        let e = errors(&MINIMAL.replace("orthant:2", "wedge:6.7"));
        assert!(e.iter().any(|m| m.contains("2π")), "{e:?}");
    }

    #[test]
    fn all_errors_are_reported() {
        let e = errors("experiment = \"survival\"\nbogus = 1\ncone = \"cube\"\nreps = 0\n");
        assert!(e.len() >= 5, "{e:?}");
        assert!(e.iter().any(|m| m.contains("bogus")));
        assert!(e.iter().any(|m| m.contains("seed")));
        assert!(e.iter().any(|m| m.contains("cube")));
    }

    #[test]
    fn env_overrides_replace_keys() {
        let mut t: Table = MINIMAL.parse().unwrap();
        apply_env_overrides(
            &mut t,
            [
                ("CONEWALK_SEED".to_string(), "99".to_string()),
                ("CONEWALK_CONE".to_string(), "weyl_d2".to_string()),
                ("CONEWALK_WORKERS".to_string(), "3".to_string()),
                ("OTHER".to_string(), "x".to_string()),
            ],
        );
        assert_eq!(t["seed"].as_integer(), Some(99));
        assert_eq!(t["cone"].as_str(), Some("weyl_d2"));
        assert_eq!(t["workers"].as_integer(), Some(3));
    }
}
