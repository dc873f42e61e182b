//! γ validation, the f/β decay along the bisector and the region integrals of Ĝβ.
use std::time::Instant;

use conewalk::potential::scan::axis_points;
use conewalk::potential::ubeta::u_beta;
use conewalk::potential::{f_bound_scan, potential_ratio_scan, validate_gamma, BetaField, GammaFn};
use conewalk::{increments::IncrementModel, ConeSpec, Point};

fn main() -> conewalk::Result<()> {
    let cone = ConeSpec::orthant(2);
    for g in [GammaFn::inv_log_sq(), GammaFn::inv_log(), GammaFn::constant(1.0)] {
        let report = validate_gamma(&g, None, 2.0);
        let verdicts: Vec<String> = report.checks.iter().map(|c| format!("{}={}", c.name, c.passed)).collect();
        println!("γ = {}: {}", g.label(), verdicts.join(" "));
    }

    let beta = BetaField::new(cone.clone(), GammaFn::inv_log_sq());
    let gauss = IncrementModel::gaussian(2)?;
    let scan = f_bound_scan(&gauss, &beta, &Point::from([1.0, 1.0]), &[2.0, 4.0, 8.0, 16.0, 32.0])?;
    for r in &scan.rows {
        println!("t = {:>4}: |f| = {:.3e}, β = {:.4}, ratio = {:.3e}", r.t, r.f_abs, r.beta, r.ratio);
    }

    let start = Instant::now();
    let ys = axis_points(&cone, &[4.0, 8.0, 16.0, 32.0, 64.0]);
    let pot = potential_ratio_scan(&beta, &ys, 0.5)?;
    for r in &pot.rows {
        println!(
            "d(y) = {:>3}: I = [{:.4e}, {:.4e}, {:.4e}, {:.4e}], ratio = {:.4}",
            r.d_y, r.i[0], r.i[1], r.i[2], r.i[3], r.ratio
        );
    }
    println!("ratio decays by half: {} ({:.2?})", pot.decays, start.elapsed());

    let start = Instant::now();
    for y in [[1.0, 1.0], [3.0, 3.0], [10.0, 2.0], [30.0, 30.0]] {
        let v = u_beta(&beta, &y, 1e-7)?;
        println!("U_β({y:?}) = {v:.6}, U_β/u = {:.4}", v / cone.u_coords(&y));
    }
    println!("four U_β evaluations in {:.2?}", start.elapsed());
    Ok(())
}
