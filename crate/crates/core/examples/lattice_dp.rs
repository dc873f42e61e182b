//! Exact and float DP for the lattice walks in the Weyl chamber.
use std::time::Instant;

use conewalk::increments::{make_pk_family, make_pk_heavy, HeavyShape, IncrementModel};
use conewalk::lattice::{run_dp, slow_variation_report, Arithmetic};

fn main() -> conewalk::Result<()> {
    let t = Instant::now();
    let ex1 = IncrementModel::example1(make_pk_family(2)?);
    let s = run_dp(&ex1, (3, 1), 200, Arithmetic::Exact)?;
    let e = s.exact.as_ref().unwrap();
    println!("ex1 family 2 from (3,1): E_200 = {} exactly, exits {:?} ({:.1?})", e.en[200], s.exit_u[200], t.elapsed());

    let t = Instant::now();
    let light = IncrementModel::example2(make_pk_family(2)?);
    let s = run_dp(&light, (2, 0), 1000, Arithmetic::Float)?;
    println!("ex2 family 2 float n=1000 ({:.1?})", t.elapsed());
    for r in slow_variation_report(&s).iter().filter(|r| [25, 50, 100, 200, 250, 500].contains(&r.n)) {
        println!("  n={:4} E_n={:.6} E_2n/E_n={:?} nP/E_n={:.5}", r.n, r.en, r.ratio_2n, r.plateau);
    }
    let light_ratio = s.en[1000] / s.en[250];

    let t = Instant::now();
    let heavy = IncrementModel::example2(make_pk_heavy(10_000, HeavyShape::default())?);
    let h = run_dp(&heavy, (2, 0), 1000, Arithmetic::Float)?;
    println!("ex2 heavy float n=1000 ({:.1?}), pruned {:e}", t.elapsed(), h.pruned[1000]);
    println!("E_1000/E_250: light {:.5}, heavy {:.5}", light_ratio, h.en[1000] / h.en[250]);
    Ok(())
}
