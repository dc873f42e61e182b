//! Step laws: moment checks and the heavy-tail diagnostic.
use conewalk::increments::{make_pk_family, make_pk_heavy, HeavyShape, IncrementModel};

fn main() -> conewalk::Result<()> {
    let models = [
        IncrementModel::gaussian(2)?,
        IncrementModel::pm1(),
        IncrementModel::example1(make_pk_family(2)?),
        IncrementModel::example2(make_pk_family(3)?),
    ];
    for m in &models {
        let r = m.validate_moments()?;
        println!("{m}: max moment error {:.2e} (exact {})", r.max_error(), r.exact);
    }
    let heavy = make_pk_heavy(10_000, HeavyShape::default())?;
    println!("heavy p_k: {} atoms, log m·E[W²; W ≥ m] nondecreasing: {}", heavy.support().len(), heavy.diagnostic_nondecreasing());
    let model = IncrementModel::example2(heavy);
    for m in [10.0, 100.0, 1000.0] {
        println!("  m = {m}: E[W²; W ≥ m] = {:.4e}", model.tail_functional(m)?.second_moment_tail);
    }
    Ok(())
}
