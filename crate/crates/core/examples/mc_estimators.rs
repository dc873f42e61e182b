//! Survival tail, V by truncation and by decomposition, and the endpoint law.
use conewalk::increments::IncrementModel;
use conewalk::mc::{
    conditional_endpoint_test, estimate_survival, estimate_v_decomposition, estimate_v_truncated_multi,
    fit_tail_slope, McConfig, DEFAULT_HORIZON_CAP,
};
use conewalk::{ConeSpec, Point};

fn main() -> conewalk::Result<()> {
    let cone = ConeSpec::orthant(2);
    let gauss = IncrementModel::gaussian(2)?;
    let x = Point::from([3.0, 3.0]);
    let cfg = McConfig::new(100_000, 1);

    let n_list = [1_000, 3_000, 10_000];
    let curve = estimate_survival(&cone, &gauss, &x, &n_list, &cfg)?;
    for r in &curve.rows {
        println!("P(τ > {}) = {:.4e} ± {:.1e}", r.n, r.estimate.value, r.estimate.half_width);
    }
    println!("log-log slope {:.3}", fit_tail_slope(&curve, 1_000, 10_000)?);

    let trunc = estimate_v_truncated_multi(&cone, &gauss, &x, &[100, 1_000], &cfg)?;
    let dec = estimate_v_decomposition(&cone, &gauss, &x, 0.0, &cfg.with_reps(10_000), DEFAULT_HORIZON_CAP)?;
    println!(
        "V(3,3): truncated {:.3} / {:.3}, decomposition {:.3} ± {:.3}",
        trunc[0].value, trunc[1].value, dec.estimate.value, dec.estimate.half_width
    );

    let t = conditional_endpoint_test(&cone, &gauss, &Point::from([2.0, 2.0]), 400, &cfg, 5, 2_000, 16)?;
    println!(
        "endpoint law at n = 400: {} survivors, means {:.3} {:.3}, chi-square {:.1} < {:.1}: {}",
        t.survivors, t.means[0].value, t.means[1].value, t.chi_square, t.critical_99, t.passes()
    );
    Ok(())
}
