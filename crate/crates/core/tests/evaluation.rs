use actdate::evaluation::{
    improvement, kernel_smooth, mse, positive_crossing, run_experiment, summarize,
    DensitySweep, ExperimentConfig, Scenario,
};
use actdate::io;
use proptest::prelude::*;

#[test]
fn single_replicate_is_reproducible() {
    let cfg = ExperimentConfig::new(Scenario::Ideal, 1, 31);
    let a = run_experiment(&cfg).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(a, run_experiment(&cfg).unwrap());
}

#[test]
fn records_follow_their_invariants() {
    let mut cfg = ExperimentConfig::new(Scenario::Rewired, 12, 400);
    // low densities produce discarded networks too
    cfg.density = DensitySweep::Uniform { low: 0.1, high: 0.2 };
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 12);
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r.seed, 400 + k as u64);
        assert_eq!(r.rewire_fraction, 0.05);
        assert!((0.1..0.2).contains(&r.target_density));
        assert_eq!(r.edges_per_vertex, r.edges as f64 / r.n_lcc as f64);
        assert_eq!(r.accepted, r.edges >= r.n_lcc + 3);
        if r.accepted {
            let (l, m) = (r.mse_local.unwrap(), r.mse_model.unwrap());
            assert_eq!(r.improvement, Some(improvement(l, m)));
            assert!(l.is_finite() && m.is_finite());
            assert!(r.monotone);
        } else {
            assert!(r.mse_model.is_none() && r.improvement.is_none() && !r.converged);
        }
    }
}

#[test]
fn records_csv_layout() {
    let records = run_experiment(&ExperimentConfig::new(Scenario::Uniform, 2, 3)).unwrap();
    let mut buf = Vec::new();
    io::write_records(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,rewire_fraction,target_density,seed,n_lcc,edges,edges_per_vertex,\
         mse_local,mse_model,improvement,converged,accepted"
    );
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 12);
        assert_eq!(fields[0], "uniform");
        assert!(!line.contains("NaN"));
    }
}

#[test]
fn summary_filtering_is_a_view() {
    let records = run_experiment(&ExperimentConfig::new(Scenario::Ideal, 20, 70)).unwrap();
    let all = summarize(&records, None, None).unwrap();
    assert_eq!(all.excluded, 0);
    assert_eq!(all.crossing, all.filtered_crossing);

    let floor = records
        .iter()
        .filter_map(|r| r.improvement)
        .fold(f64::INFINITY, f64::min)
        + 1e-9;
    let filtered = summarize(&records, Some(0.4), Some(floor)).unwrap();
    assert_eq!(filtered.excluded, 1);
    assert_eq!(filtered.curve.as_ref().unwrap().bandwidth, 0.4);
    assert_eq!(filtered.curve, summarize(&records, Some(0.4), None).unwrap().curve);
}

fn samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..8.0, n),
            prop::collection::vec(-500.0f64..500.0, n),
        )
    })
}

proptest! {
    #[test]
    fn smoothed_values_are_convex_combinations((xs, ys) in samples(), h in prop::option::of(0.05f64..3.0)) {
        let curve = kernel_smooth(&xs, &ys, h, None).unwrap();
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(curve.grid_x.windows(2).all(|w| w[0] < w[1]));
        for v in curve.values.iter().flatten() {
            prop_assert!(v.is_finite());
            prop_assert!(*v >= lo - 1e-9 * lo.abs().max(1.0) && *v <= hi + 1e-9 * hi.abs().max(1.0));
        }
    }

    #[test]
    fn constant_response_gives_constant_curve((xs, _) in samples(), c in -100.0f64..100.0) {
        let ys = vec![c; xs.len()];
        let curve = kernel_smooth(&xs, &ys, None, None).unwrap();
        for v in curve.values.iter().flatten() {
            prop_assert!((v - c).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn crossing_starts_a_nonnegative_suffix((xs, ys) in samples()) {
        let curve = kernel_smooth(&xs, &ys, None, None).unwrap();
        if let Some(x) = positive_crossing(&curve) {
            let k = curve.grid_x.iter().position(|g| *g == x).unwrap();
            prop_assert!(curve.values[k..].iter().flatten().all(|v| *v >= 0.0));
            if k > 0 {
                prop_assert!(curve.values[..k].iter().rev().flatten().next().is_none_or(|v| *v < 0.0));
            }
        }
    }

    #[test]
    fn mse_is_permutation_and_shift_invariant(
        pairs in prop::collection::vec((1100.0f64..1500.0, 1100.0f64..1500.0), 1..50),
        c in -1000.0f64..1000.0,
        rot in 0usize..50,
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let base = mse(&a, &b).unwrap();
        let k = rot % a.len();
        let (mut ar, mut br) = (a.clone(), b.clone());
        ar.rotate_left(k);
        br.rotate_left(k);
        prop_assert!((mse(&ar, &br).unwrap() - base).abs() <= 1e-9 * base.max(1.0));
        let shift = |v: &[f64]| v.iter().map(|x| x + c).collect::<Vec<_>>();
        prop_assert!((mse(&shift(&a), &shift(&b)).unwrap() - base).abs() <= 1e-6 * base.max(1.0));
        let offset: Vec<f64> = a.iter().map(|x| x + c).collect();
        prop_assert!((mse(&a, &offset).unwrap() - c * c).abs() <= 1e-6 * (c * c).max(1.0));
    }

    #[test]
    fn improvement_is_antisymmetric(a in 0.0f64..1e4, b in 0.0f64..1e4) {
        prop_assert_eq!(improvement(a, b), -improvement(b, a));
    }
}
