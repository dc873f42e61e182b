//! Build V(x) = x + R + m(x) for a step law, pick R and verify the drift bound.
use conewalk::halfline::{
    build_tail_functions, choose_r, overshoot_check, supermartingale_means, uniform_grid,
    verify_drift_inequality, StepLaw1D,
};
use conewalk::mc::McConfig;

fn main() -> conewalk::Result<()> {
    for law in ["pm1", "gauss", "atoms:-2:1/3,1:2/3"] {
        let law: StepLaw1D = law.parse()?;
        let tf = build_tail_functions(&law)?;
        let (tf, choice) = choose_r(&tf, 2000)?;
        let report = verify_drift_inequality(&tf, &uniform_grid(10.0, 1000))?;
        println!(
            "{law}: A = {}, R = {:.6}, x0 = {:.4}, drift check {} (worst margin {:.3e} at x = {})",
            tf.a, choice.r, choice.x0, if report.passed { "passes" } else { "FAILS" },
            report.worst_margin, report.worst_x
        );
        for x in [0.0, 1.0, 5.0] {
            let o = overshoot_check(&tf, x, 100_000, &McConfig::new(20_000, 7))?;
            println!("  overshoot at x = {x}: {:.4} ± {:.4} (bound {:.4})", o.estimate.value, o.estimate.half_width, o.bound);
        }
        let means = supermartingale_means(&tf, 1.0, 50, &McConfig::new(20_000, 9))?;
        println!("  E[Y_0] = {:.4}, E[Y_50] = {:.4} ± {:.4}", means[0].value, means[50].value, means[50].half_width);
    }
    Ok(())
}
