//! Dispatch a validated config to the library and write its outputs.

use std::fs;
use std::path::Path;
use std::time::Instant;

use conewalk::halfline::{build_tail_functions, choose_r, overshoot_check, uniform_grid, verify_drift_inequality};
use conewalk::increments::IncrementModel;
use conewalk::lattice::{ratio_to_decimal, run_dp, Arithmetic};
use conewalk::mc::{
    conditional_endpoint_test, estimate_en_sequence, estimate_survival, estimate_v_decomposition,
    estimate_v_truncated_multi, fit_tail_slope, lattice_point, McConfig,
};
use conewalk::potential::scan::axis_points;
use conewalk::potential::{
    construct_gamma_default, f_bound_scan, potential_ratio_scan, scan_shift, supermartingale_y_check, validate_gamma,
    BetaField, GammaFn, GammaReport, UBetaGrid,
};
use conewalk::{ConeKind, ConeSpec, Error, Point, Result};

use crate::config::{Experiment, RunConfig};
use crate::output::{estimate_row, fmt_f, v_row, version_string, Assertion, Manifest, Table, DP_HEADER, ESTIMATE_HEADER, V_HEADER};

/// Collected results of one run before they hit the disk.
#[derive(Default)]
struct Outputs {
    tables: Vec<(String, Table)>,
    assertions: Vec<Assertion>,
    notes: Vec<String>,
}

impl Outputs {
    fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t));
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.into(), passed, detail: detail.into() });
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

/// Result of [`run`]: the manifest as written and whether every assertion held.
pub struct RunOutcome {
    pub manifest: Manifest,
    pub passed: bool,
}

/// Run the experiment, write CSVs and `manifest.json` under `cfg.out_dir`.
/// Library errors are recorded in the manifest and returned; outputs written
/// before the failure stay on disk.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    fs::create_dir_all(&cfg.out_dir)?;
    let mut out = Outputs::default();
    let result = dispatch(cfg, &mut out);
    let mut files = Vec::new();
    for (name, table) in &out.tables {
        table.write(&cfg.out_dir.join(name))?;
        files.push(name.clone());
    }
    let error = result.as_ref().err().map(ToString::to_string);
    let passed = error.is_none() && out.assertions.iter().all(|a| a.passed);
    let manifest = Manifest {
        version: version_string(),
        experiment: cfg.experiment,
        config: serde_json::to_value(&cfg.source).map_err(|e| Error::Input(e.to_string()))?,
        workers: cfg.workers,
        outputs: files,
        assertions: out.assertions,
        notes: out.notes,
        error,
        passed,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    manifest.write(&cfg.out_dir)?;
    result?;
    Ok(RunOutcome { manifest, passed })
}

fn mc(cfg: &RunConfig) -> McConfig {
    McConfig::new(cfg.reps, cfg.seed).with_workers(cfg.workers)
}

fn cone(cfg: &RunConfig) -> Result<&ConeSpec> {
    cfg.cone.as_ref().ok_or_else(|| Error::Input("no cone".into()))
}

fn model(cfg: &RunConfig) -> Result<&IncrementModel> {
    cfg.model.as_ref().ok_or_else(|| Error::Input("no model".into()))
}

/// Real start point. Lattice models read `x` as lattice coordinates. The ±1
/// walk on the half-line is killed on entering `(-∞, 0)`, so it starts one
/// unit further inside the open cone.
pub fn start_point(cone: Option<&ConeSpec>, model: &IncrementModel, x: &[f64]) -> Result<Point> {
    if model.is_lattice() {
        return Ok(lattice_point(x[0] as i64, x[1] as i64));
    }
    if model.name() == "pm1" && cone.is_some_and(|c| c.kind() == ConeKind::HalfLine) {
        return Point::new(vec![x[0] + 1.0]);
    }
    Point::new(x.to_vec())
}

fn dispatch(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    match cfg.experiment {
        Experiment::Survival => survival(cfg, out),
        Experiment::VEstimate => v_estimate(cfg, out),
        Experiment::VDecomposition => v_decomposition(cfg, out),
        Experiment::ConditionalLaw => conditional_law(cfg, out),
        Experiment::EnSequence => en_sequence(cfg, out),
        Experiment::DpExact => dp_exact(cfg, out),
        Experiment::Halfline => halfline(cfg, out),
        Experiment::GammaCheck => gamma_check(cfg, out),
        Experiment::PotentialScan => potential_scan(cfg, out),
        Experiment::YCheck => y_check(cfg, out),
    }
}

fn survival(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (c, m) = (cone(cfg)?, model(cfg)?);
    let x = start_point(Some(c), m, &cfg.x)?;
    let curve = estimate_survival(c, m, &x, &cfg.n_list, &mc(cfg))?;
    let mut t = Table::new(ESTIMATE_HEADER);
    for r in &curve.rows {
        t.push(estimate_row(r.n, &r.estimate));
    }
    out.table("survival.csv", t);
    if let Some(w) = &curve.warning {
        out.note(w.clone());
    }
    let monotone = curve.rows.windows(2).all(|w| w[1].survivors <= w[0].survivors);
    out.check("survival nonincreasing", monotone, "survivor counts per horizon");
    let (lo, hi) = cfg.params.fit_range.unwrap_or((cfg.n_list[0], *cfg.n_list.last().expect("nonempty")));
    match fit_tail_slope(&curve, lo, hi) {
        Ok(slope) => {
            out.note(format!("slope of log P vs log n over [{lo}, {hi}]: {slope:.4}"));
            if let Some(target) = cfg.params.expect_slope {
                let ok = (slope - target).abs() <= cfg.params.slope_tol;
                out.check("tail slope", ok, format!("{slope:.4} vs {target} ± {}", cfg.params.slope_tol));
            }
        }
        Err(e) if cfg.params.expect_slope.is_some() => out.check("tail slope", false, e.to_string()),
        Err(_) => {}
    }
    Ok(())
}

fn v_estimate(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (c, m) = (cone(cfg)?, model(cfg)?);
    let x = start_point(Some(c), m, &cfg.x)?;
    let est = estimate_v_truncated_multi(c, m, &x, &cfg.n_list, &mc(cfg))?;
    let mut t = Table::new(V_HEADER);
    for (n, e) in cfg.n_list.iter().zip(&est) {
        t.push(v_row(*n, e, 0.0));
    }
    out.table("v_truncated.csv", t);
    out.check("estimates finite", est.iter().all(|e| e.value.is_finite()), "");
    Ok(())
}

fn v_decomposition(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (c, m) = (cone(cfg)?, model(cfg)?);
    let x = start_point(Some(c), m, &cfg.x)?;
    let mut t = Table::new(V_HEADER);
    let mut ests = Vec::new();
    for &r in &cfg.params.r_list {
        let d = estimate_v_decomposition(c, m, &x, r, &mc(cfg), cfg.params.cap)?;
        t.push(v_row(cfg.params.cap, &d.estimate, r));
        out.check(
            format!("horizon cap rarely reached (R = {r})"),
            d.reliable,
            format!("{} of {} paths capped at {}", d.capped, cfg.reps, cfg.params.cap),
        );
        ests.push((r, d.estimate));
    }
    for w in ests.windows(2) {
        let ((ra, a), (rb, b)) = (w[0], w[1]);
        out.check(
            format!("R = {ra} and R = {rb} agree"),
            a.agrees_with(&b, 4.0),
            format!("{} vs {} (joint half-width {})", a.value, b.value, a.joint_half_width(&b)),
        );
    }
    out.table("v_decomposition.csv", t);
    Ok(())
}

fn conditional_law(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (c, m) = (cone(cfg)?, model(cfg)?);
    let x = start_point(Some(c), m, &cfg.x)?;
    let n = *cfg.n_list.last().expect("nonempty");
    let p = &cfg.params;
    let test = conditional_endpoint_test(c, m, &x, n, &mc(cfg), p.bins, p.min_survivors, p.max_rounds)?;
    let mut t = Table::new(&["bin_id", "z1_lo", "z1_hi", "z2_lo", "z2_hi", "count", "expected"]);
    for b in &test.histogram {
        t.push(vec![
            b.bin_id.to_string(),
            fmt_f(b.z1_lo),
            fmt_f(b.z1_hi),
            fmt_f(b.z2_lo),
            fmt_f(b.z2_hi),
            b.count.to_string(),
            fmt_f(b.expected),
        ]);
    }
    out.table("endpoint.csv", t);
    out.note(format!("{} survivors out of {} paths", test.survivors, test.reps));
    out.check("enough survivors per bin", !test.underpowered, format!("{} survivors", test.survivors));
    out.check(
        "chi-square below the 99% critical value",
        test.chi_square < test.critical_99,
        format!("{:.3} vs {:.3} on {} dof", test.chi_square, test.critical_99, test.dof),
    );
    if c.kind() == ConeKind::Orthant(2) {
        let target = (std::f64::consts::PI / 2.0).sqrt();
        for (i, mean) in test.means.iter().enumerate() {
            out.check(
                format!("conditional mean of coordinate {}", i + 1),
                (mean.value - target).abs() <= 0.03,
                format!("{:.4} ± {:.4} vs {target:.4}", mean.value, mean.half_width),
            );
        }
    }
    Ok(())
}

fn en_sequence(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let m = model(cfg)?;
    let x = start_point(None, m, &cfg.x)?;
    let est = estimate_en_sequence(m, &x, &cfg.n_list, &mc(cfg))?;
    let mut t = Table::new(ESTIMATE_HEADER);
    for (n, e) in cfg.n_list.iter().zip(&est) {
        t.push(estimate_row(*n, e));
    }
    out.table("en_sequence.csv", t);
    out.check("estimates finite", est.iter().all(|e| e.value.is_finite()), "");
    Ok(())
}

fn dp_exact(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let m = model(cfg)?;
    let start = (cfg.x[0] as i64, cfg.x[1] as i64);
    let horizon = *cfg.n_list.last().expect("nonempty") as usize;
    let series = run_dp(m, start, horizon, cfg.params.arithmetic)?;
    let exact = series.exact.as_ref();
    // Rational runs carry exact values as 30-digit decimals; float runs use the usual format.
    let mut t = Table::new(DP_HEADER);
    for n in 0..=horizon {
        let row = match exact {
            Some(ex) => {
                let ratio = if 2 * n <= horizon { ratio_to_decimal(&(&ex.en[2 * n] / &ex.en[n]), 30) } else { String::new() };
                vec![
                    n.to_string(),
                    ratio_to_decimal(&ex.survival[n], 30),
                    ratio_to_decimal(&ex.en[n], 30),
                    ratio,
                    fmt_f(series.pruned[n]),
                ]
            }
            None => {
                let ratio = if 2 * n <= horizon { fmt_f(series.en[2 * n] / series.en[n]) } else { String::new() };
                vec![n.to_string(), fmt_f(series.survival[n]), fmt_f(series.en[n]), ratio, fmt_f(series.pruned[n])]
            }
        };
        t.push(row);
    }
    out.table("dp.csv", t);
    let example1 = m.name().starts_with("ex1");
    if example1 {
        match (exact, cfg.params.arithmetic) {
            (Some(ex), Arithmetic::Exact) => {
                let constant = ex.en.iter().all(|e| *e == ex.en[0]);
                out.check("E_n = u(x) exactly", constant, format!("u(x) = {}", ex.en[0]));
            }
            _ => {
                let u = series.en[0];
                let worst = series.en.iter().map(|e| (e - u).abs()).fold(0.0, f64::max);
                out.check("E_n = u(x)", worst <= 1e-9 * u.max(1.0), format!("max deviation {worst:e}"));
            }
        }
        let zero_exits = series.exit_u.iter().flatten().all(|&(lo, hi)| lo == 0.0 && hi == 0.0);
        out.check("u vanishes at every exit", zero_exits, "");
    } else {
        let nondecreasing = series.en.windows(2).all(|w| w[1] >= w[0]);
        out.check("E_n nondecreasing", nondecreasing, "");
    }
    Ok(())
}

fn halfline(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let law = cfg.law.as_ref().ok_or_else(|| Error::Input("no law".into()))?;
    let base = build_tail_functions(law)?;
    let points = cfg.params.grid_points.max(2);
    let tf = match cfg.params.r {
        Some(r) => {
            out.note(format!("R forced to {r}"));
            base.with_r(r)
        }
        None => {
            let (tf, choice) = choose_r(&base, points)?;
            out.note(format!("chosen R = {}, x0 = {}", choice.r, choice.x0));
            tf
        }
    };
    let grid = uniform_grid(tf.x_hi(), points - 1);
    let report = verify_drift_inequality(&tf, &grid)?;
    let mut t = Table::new(&["x", "delta", "neg_beta", "margin"]);
    for r in &report.rows {
        t.push(vec![fmt_f(r.x), fmt_f(r.delta), fmt_f(r.neg_beta), fmt_f(r.margin)]);
    }
    out.table("drift.csv", t);
    out.check(
        "drift inequality on the grid",
        report.passed,
        format!("worst margin {:e} at x = {}", report.worst_margin, report.worst_x),
    );
    if !cfg.params.overshoot_x.is_empty() {
        let reps = if cfg.reps > 0 { cfg.reps } else { 100_000 };
        let mcfg = McConfig::new(reps, cfg.seed).with_workers(cfg.workers);
        let mut t = Table::new(&["x", "estimate", "ci_half", "bound", "unexited"]);
        for &x in &cfg.params.overshoot_x {
            let o = overshoot_check(&tf, x, cfg.params.horizon, &mcfg)?;
            t.push(vec![fmt_f(x), fmt_f(o.estimate.value), fmt_f(o.estimate.half_width), fmt_f(o.bound), o.unexited.to_string()]);
            out.check(format!("overshoot bound at x = {x}"), o.passed, format!("{} vs {}", o.estimate.value, o.bound));
        }
        out.table("overshoot.csv", t);
    }
    Ok(())
}

/// γ named in the config; `constructed` builds one from the tail.
fn gamma_of(cfg: &RunConfig, tail: Option<&dyn Fn(f64) -> f64>, p: f64) -> Result<(GammaFn, Option<GammaReport>)> {
    let name = cfg.params.gamma.as_str();
    Ok(match name {
        "inv_log_sq" => (GammaFn::inv_log_sq(), None),
        "inv_log" => (GammaFn::inv_log(), None),
        "constructed" => {
            let tail = tail.ok_or_else(|| Error::Input("a constructed γ needs `tail`".into()))?;
            let (g, report) = construct_gamma_default(tail, p, conewalk::potential::gamma::DEFAULT_T_MAX)?;
            (g, Some(report))
        }
        other => match other.strip_prefix("constant:").and_then(|c| c.parse::<f64>().ok()) {
            Some(c) if c > 0.0 => (GammaFn::constant(c), None),
            _ => return Err(Error::Input(format!("unknown gamma `{other}`"))),
        },
    })
}

fn tail_fn(cfg: &RunConfig) -> Result<Option<Box<dyn Fn(f64) -> f64 + '_>>> {
    let Some(spec) = cfg.params.tail.as_deref() else { return Ok(None) };
    if let Some(a) = spec.strip_prefix("power:") {
        let a: f64 = a.parse().map_err(|_| Error::Input(format!("bad tail exponent in `{spec}`")))?;
        return Ok(Some(Box::new(move |t: f64| t.max(1.0).powf(-a))));
    }
    if spec == "model" {
        let m = model(cfg)?.clone();
        m.tail_functional(1.0)?;
        return Ok(Some(Box::new(move |t: f64| m.tail_functional(t).map(|f| f.second_moment_tail).unwrap_or(f64::NAN))));
    }
    Err(Error::Input(format!("unknown tail `{spec}`: expected power:<a> or model")))
}

fn gamma_check(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let p = cone(cfg)?.exponent_p();
    let tail = tail_fn(cfg)?;
    let (g, _) = gamma_of(cfg, tail.as_deref(), p)?;
    let report = validate_gamma(&g, tail.as_deref(), p);
    let mut t = Table::new(&["t", "gamma", "ell_bar", "ratio"]);
    for r in &report.rows {
        t.push(vec![fmt_f(r.t), fmt_f(r.gamma), fmt_f(r.ell_bar), fmt_f(r.ratio)]);
    }
    out.table("gamma.csv", t);
    for c in &report.checks {
        out.check(format!("γ {}", c.name), c.passed, c.detail.clone());
    }
    Ok(())
}

fn potential_scan(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let c = cone(cfg)?;
    let (g, _) = gamma_of(cfg, None, c.exponent_p())?;
    let beta = BetaField::new(c.clone(), g);
    let ys = axis_points(c, &cfg.params.d_list);
    let scan = potential_ratio_scan(&beta, &ys, cfg.params.a_const)?;
    let mut t = Table::new(&["d_y", "I1", "I2", "I3", "I4", "u_y", "ratio"]);
    for r in &scan.rows {
        t.push(vec![fmt_f(r.d_y), fmt_f(r.i[0]), fmt_f(r.i[1]), fmt_f(r.i[2]), fmt_f(r.i[3]), fmt_f(r.u_y), fmt_f(r.ratio)]);
    }
    out.table("potential.csv", t);
    out.check("quadrature converged", !scan.partial, "");
    out.check("ratio halves along the ray", scan.decays, "");
    if let Some(m) = &cfg.model {
        let axis = c.axis();
        let ray = axis.scaled(1.0 / c.dist_to_boundary(&axis)?);
        let f = f_bound_scan(m, &beta, &ray, &cfg.params.t_list)?;
        let mut t = Table::new(&["t", "f_abs", "beta", "ratio"]);
        for r in &f.rows {
            t.push(vec![fmt_f(r.t), fmt_f(r.f_abs), fmt_f(r.beta), fmt_f(r.ratio)]);
        }
        out.table("f_bound.csv", t);
        out.check("|f|/β halves along the ray", f.decays, "");
    }
    Ok(())
}

fn y_check(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let m = model(cfg)?;
    let p = &cfg.params;
    let cone = ConeSpec::orthant(2);
    let (g, _) = gamma_of(cfg, None, 2.0)?;
    let beta = BetaField::new(cone, g);
    let grid = UBetaGrid::build(&beta, p.grid_extent, p.grid_delta)?;
    out.note(format!("U_β grid: {} nodes, interpolation error {:.2e}", grid.nodes(), grid.interpolation_error));
    let r = match p.r {
        Some(r) => r,
        None => {
            let scan = scan_shift(&grid, m, p.c, &p.r_candidates)?;
            let mut t = Table::new(&["R", "worst_f", "worst_drift", "threshold", "passed"]);
            for row in &scan.rows {
                t.push(vec![fmt_f(row.r), fmt_f(row.worst_f), fmt_f(row.worst_drift), fmt_f(scan.threshold), row.passed.to_string()]);
            }
            out.table("shift_scan.csv", t);
            out.check("R found by the scan", scan.chosen.is_some(), format!("candidates {:?}", p.r_candidates));
            scan.chosen.unwrap_or(*p.r_candidates.last().unwrap_or(&0.0))
        }
    };
    let x = Point::new(cfg.x.clone())?;
    let rep = supermartingale_y_check(&grid, m, &x, r, p.c, p.n_max, &mc(cfg))?;
    let mut t = Table::new(&["n", "mean", "mean_ci", "increment", "increment_ci"]);
    for row in &rep.rows {
        t.push(vec![
            row.n.to_string(),
            fmt_f(row.mean.value),
            fmt_f(row.mean.half_width),
            fmt_f(row.increment.value),
            fmt_f(row.increment.half_width),
        ]);
    }
    out.table("y_check.csv", t);
    out.check("E[Y_n] nonincreasing", rep.nonincreasing, format!("R = {r}, c = {}, z = {:.3}", p.c, rep.z_crit));
    out.check(
        "β-sum bound",
        rep.beta_sum_ok,
        format!("{:.4} ± {:.4} vs 3·V_β = {:.4}", rep.beta_sum.value, rep.beta_sum.half_width, 3.0 * rep.v_beta_start),
    );
    out.check("U_β interpolation precise", !rep.precision_flag, format!("{:.2e}", rep.interpolation_error));
    Ok(())
}

/// Convenience for tests: load, run, and return whether all assertions held.
pub fn run_file(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path)?;
    let cfg = crate::config::parse_config(&text)?;
    Ok(run(&cfg)?.passed)
}
