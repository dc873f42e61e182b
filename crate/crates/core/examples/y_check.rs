//! Tabulate U_β on the quadrant, pick the shift R and check that Y is a supermartingale.
use std::time::Instant;

use conewalk::increments::IncrementModel;
use conewalk::mc::McConfig;
use conewalk::potential::{scan_shift, supermartingale_y_check, BetaField, GammaFn, UBetaGrid};
use conewalk::{ConeSpec, Point};

fn main() -> conewalk::Result<()> {
    let t = Instant::now();
    let beta = BetaField::new(ConeSpec::orthant(2), GammaFn::inv_log_sq());
    // A coarse table keeps the example quick; the acceptance run uses delta 0.35.
    let grid = UBetaGrid::build(&beta, 64.0, 0.7)?;
    println!("U_β table: {} nodes, interpolation error {:.1e} ({:.1?})", grid.nodes(), grid.interpolation_error, t.elapsed());

    let gauss = IncrementModel::gaussian(2)?;
    let scan = scan_shift(&grid, &gauss, 1.0 / 3.0, &[2.0, 4.0, 8.0, 16.0])?;
    for row in &scan.rows {
        println!("R = {:2}: worst |f|/β {:.2e}, worst |f_β + β/2|/β {:.3} (need ≤ {:.4})", row.r, row.worst_f, row.worst_drift, scan.threshold);
    }
    let Some(r) = scan.chosen else {
        println!("no candidate R works");
        return Ok(());
    };
    let rep = supermartingale_y_check(&grid, &gauss, &Point::from([3.0, 3.0]), r, 1.0 / 3.0, 50, &McConfig::new(50_000, 2))?;
    for row in rep.rows.iter().step_by(10) {
        println!("  E[Y_{}] = {:.3} ± {:.3}", row.n, row.mean.value, row.mean.half_width);
    }
    println!("nonincreasing {}, Σβ = {:.3} against 3V_β = {:.1}", rep.nonincreasing, rep.beta_sum.value, 3.0 * rep.v_beta_start);
    Ok(())
}
