//! Membership, boundary distance and the harmonic function for each cone kind.
use conewalk::{ConeSpec, Point};

fn main() -> conewalk::Result<()> {
    for spec in ["halfline", "orthant:2", "orthant:3", "halfspace:2", "wedge:2.0943951", "weyl_d2"] {
        let cone: ConeSpec = spec.parse()?;
        let axis = cone.axis();
        let x = axis.scaled(3.0);
        println!(
            "{cone}: p = {:.4}, u(3x₀) = {:.4}, d(3x₀) = {:.4}",
            cone.exponent_p(),
            cone.u_value(&x)?,
            cone.dist_to_boundary(&x)?
        );
    }
    let quadrant = ConeSpec::orthant(2);
    let samples: Vec<Point> = (1..=40).map(|k| Point::from([k as f64 * 0.25, 1.0 + (k % 7) as f64])).collect();
    let g = quadrant.assumption_g_probe(&samples)?;
    println!("quadrant u/(|x|^(p-1) d(x)) over samples: [{:.3}, {:.3}]", g.c_low, g.c_high);
    Ok(())
}
