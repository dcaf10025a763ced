use fracpow_core::discretization::{Dimension, GridSpec, ModeIndex, RhsKind};
use fracpow_core::harness::{
    bound_summary, per_mode_error_curve, run_experiment, ApproximantStore, Backend, ExperimentConfig, MethodSpec,
    CSV_HEADER,
};
use fracpow_core::rational::RemezOptions;

fn store() -> ApproximantStore {
    ApproximantStore::in_memory(RemezOptions::default())
}

fn methods(list: &[&str]) -> Vec<MethodSpec> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn experiment_writes_one_row_per_grid_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(
        0.5,
        methods(&["bura:3", "rbura:4,3", "quad:3"]),
        vec![
            GridSpec::dyadic(Dimension::Two, 4).unwrap(),
            GridSpec::dyadic(Dimension::Two, 5).unwrap(),
        ],
        RhsKind::Checkerboard,
    );
    cfg.name = "small".into();
    cfg.output_dir = Some(dir.path().to_path_buf());
    cfg.timing = false;
    let st = store();
    let rep = run_experiment(&cfg, &st).unwrap();
    assert_eq!(rep.rows.len(), 6);
    assert!(rep.rows.iter().all(|r| r.is_ok() && r.seconds.is_none()));
    let text = std::fs::read_to_string(rep.csv_path.unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 6);

    cfg.backend = Backend::Spectral;
    cfg.name = "small-spectral".into();
    let spectral = run_experiment(&cfg, &st).unwrap();
    for (a, b) in rep.rows.iter().zip(&spectral.rows) {
        let (x, y) = (a.l2_rel.unwrap(), b.l2_rel.unwrap());
        assert!((x - y).abs() <= 1e-6 * x, "{}: {x:e} vs {y:e}", a.method);
        assert_eq!(a.systems, b.systems);
    }
}

#[test]
fn eigenvector_rhs_reproduces_per_mode_curve() {
    let g = GridSpec::one_d(63).unwrap();
    let st = store();
    for m in ["bura:4", "rbura:5,5", "quad:4"] {
        let method: MethodSpec = m.parse().unwrap();
        let curve = per_mode_error_curve(0.25, &method, &g, &st, Some(3)).unwrap();
        for e in curve {
            let mut cfg = ExperimentConfig::new(0.25, vec![method], vec![g], RhsKind::Eigen(e.index));
            cfg.solver.tol = 1e-13;
            let row = &run_experiment(&cfg, &st).unwrap().rows[0];
            let got = row.l2_rel.unwrap();
            assert!(
                (got - e.error).abs() <= 1e-8 * e.error + 1e-15,
                "{m} {:?}: {got:e} vs {:e}",
                e.index,
                e.error
            );
        }
    }
}

#[test]
fn per_mode_errors_stay_under_the_bounds() {
    let g = GridSpec::two_d(31).unwrap();
    let st = store();
    for alpha in [0.25, 0.5, 0.75] {
        let b = bound_summary(alpha, 4, &g, &st).unwrap();
        let bura = per_mode_error_curve(alpha, &"bura:4".parse().unwrap(), &g, &st, None).unwrap();
        assert!(
            bura.iter().all(|e| e.error <= b.bura_bound * (1.0 + 1e-8)),
            "alpha {alpha}"
        );
        if let Some(bound) = b.rbura_bound {
            let rbura = per_mode_error_curve(alpha, &"rbura:4,4".parse().unwrap(), &g, &st, None).unwrap();
            assert!(rbura.iter().all(|e| e.error <= bound * (1.0 + 1e-8)), "alpha {alpha}");
        }
        assert_eq!(bura[0].index, ModeIndex::Two(1, 1));
    }
}
