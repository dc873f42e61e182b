use conewalk::increments::{make_pk_family, IncrementModel};
use conewalk::lattice::{run_dp, Arithmetic};
use conewalk::mc::{estimate_survival, estimate_v_truncated, lattice_point, McConfig};
use conewalk::potential::ghat::ghat_case;
use conewalk::potential::green::quadrant_green;
use conewalk::potential::f_value;
use conewalk::{ConeSpec, Point};
use proptest::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn quadrant_point() -> impl Strategy<Value = [f64; 2]> {
    (1e-3..50.0f64, 1e-3..50.0f64).prop_map(|(a, b)| [a, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ghat_regions_cover_the_cone(x in quadrant_point(), y in quadrant_point(), a in 0.05..0.95f64) {
        let cone = ConeSpec::orthant(2);
        prop_assert!(ghat_case(&x, &y, a, &cone).is_some());
    }

    #[test]
    fn green_is_symmetric_and_positive(x in quadrant_point(), y in quadrant_point()) {
        prop_assume!((x[0] - y[0]).hypot(x[1] - y[1]) > 1e-6);
        let g = quadrant_green(&x, &y);
        let h = quadrant_green(&y, &x);
        prop_assert!(g > 0.0);
        prop_assert!((g - h).abs() <= 1e-8 * g.max(1.0));
    }

    #[test]
    fn green_vanishes_at_the_edges(y in quadrant_point(), t in 0.0..60.0f64) {
        prop_assert!(quadrant_green(&[0.0, t], &y) == 0.0);
        prop_assert!(quadrant_green(&[t, 0.0], &y) == 0.0);
        prop_assert!(quadrant_green(&[1e-9, t + 1.0], &y) < 1e-8);
    }

    #[test]
    fn lattice_f_matches_enumeration(k in 1i64..4, a in 0i64..12, b in -11i64..12, second in any::<bool>()) {
        prop_assume!(b.abs() < a);
        let pk = make_pk_family(k).unwrap();
        let model = if second { IncrementModel::example2(pk) } else { IncrementModel::example1(pk) };
        let cone = ConeSpec::weyl_d2();
        let x = lattice_point(a, b);
        let mut oracle = -cone.u_coords(x.coords());
        for ((da, db), p) in model.lattice_steps().unwrap() {
            let y = lattice_point(a + da, b + db);
            if cone.contains_coords(y.coords()) {
                oracle += p * cone.u_coords(y.coords());
            }
        }
        let f = f_value(&cone, &model, &x).unwrap();
        prop_assert!((f - oracle).abs() <= 1e-9 * (1.0 + cone.u_coords(x.coords())));
    }

    #[test]
    fn dp_survival_is_a_nonincreasing_probability(k in 1i64..4, a in 1i64..6, b in -4i64..5, second in any::<bool>()) {
        prop_assume!(b.abs() < a);
        let pk = make_pk_family(k).unwrap();
        let model = if second { IncrementModel::example2(pk) } else { IncrementModel::example1(pk) };
        let s = run_dp(&model, (a, b), 30, Arithmetic::Float).unwrap();
        prop_assert!(s.survival[0] == 1.0);
        prop_assert!(s.survival.windows(2).all(|w| w[1] <= w[0] + 1e-15 && w[1] >= 0.0));
        prop_assert!(s.en.iter().all(|e| *e >= 0.0));
    }
}

#[test]
fn gaussian_orthant_f_matches_product_formula() {
    // E[(a + X)⁺] = aΦ(a) + φ(a) for a standard normal X, and u = x₁x₂ factorises.
    let n = Normal::standard();
    let g = |a: f64| a * n.cdf(a) + n.pdf(a);
    let cone = ConeSpec::orthant(2);
    let model = IncrementModel::gaussian(2).unwrap();
    for x in [[0.5, 0.5], [1.0, 3.0], [2.5, 0.2], [6.0, 6.0]] {
        let f = f_value(&cone, &model, &Point::from(x)).unwrap();
        let oracle = g(x[0]) * g(x[1]) - x[0] * x[1];
        assert!((f - oracle).abs() < 1e-9, "{x:?}: {f} vs {oracle}");
    }
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let cone = ConeSpec::orthant(2);
    let model = IncrementModel::gaussian(2).unwrap();
    let x = Point::from([2.0, 1.0]);
    let n_list = [10, 100, 1_000];
    let base = McConfig::new(20_000, 11);
    let one = estimate_survival(&cone, &model, &x, &n_list, &base.with_workers(1)).unwrap();
    let three = estimate_survival(&cone, &model, &x, &n_list, &base.with_workers(3)).unwrap();
    assert_eq!(one, three);
    let v1 = estimate_v_truncated(&cone, &model, &x, 100, &base.with_workers(1)).unwrap();
    let v3 = estimate_v_truncated(&cone, &model, &x, 100, &base.with_workers(3)).unwrap();
    assert_eq!(v1.value.to_bits(), v3.value.to_bits());
}

#[test]
fn quadrupling_reps_halves_the_interval() {
    let cone = ConeSpec::half_line();
    let model = IncrementModel::pm1();
    let x = Point::from([1.0]);
    let hw = |reps| {
        estimate_v_truncated(&cone, &model, &x, 200, &McConfig::new(reps, 5)).unwrap().half_width
    };
    let ratio = hw(160_000) / hw(40_000);
    assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn survival_is_monotone_in_the_horizon() {
    let cone = ConeSpec::weyl_d2();
    let model = IncrementModel::example2(make_pk_family(2).unwrap());
    let curve =
        estimate_survival(&cone, &model, &lattice_point(3, 1), &[1, 5, 25, 125, 625], &McConfig::new(10_000, 3)).unwrap();
    assert!(curve.rows.windows(2).all(|w| w[1].survivors <= w[0].survivors));
    assert!(curve.rows[0].estimate.value < 1.0 + 1e-12);
}
