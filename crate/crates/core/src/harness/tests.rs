use super::*;
use crate::discretization::{assemble_laplacian, matrix_inf_norm, rhs_generate};
use crate::solvers::{solve_shifted_sum, solve_spectral, ShiftedSolveConfig};

fn store() -> ApproximantStore {
    ApproximantStore::in_memory(RemezOptions::default())
}

#[test]
fn method_strings_round_trip() {
    for s in ["bura:7", "rbura:8,7", "rbura:8,8", "quad:7", "quad-step:0.5"] {
        let m: MethodSpec = s.parse().unwrap();
        assert_eq!(m.to_string(), s);
    }
    assert_eq!("bura:5,5".parse::<MethodSpec>().unwrap(), MethodSpec::Bura { k: 5 });
    assert_eq!(
        "rbura:7".parse::<MethodSpec>().unwrap(),
        MethodSpec::Rbura { k: 8, m: 7 }
    );
    for bad in ["bura:5,4", "rbura:9,7", "quad:-1", "bura", "zolo:3", "bura:0"] {
        assert!(bad.parse::<MethodSpec>().is_err(), "{bad}");
    }
}

#[test]
fn grid_and_rhs_strings() {
    let g = parse_grid("2d:255").unwrap();
    assert_eq!((g.dimension(), g.n()), (Dimension::Two, 255));
    assert!(parse_grid("3d:4").is_err());
    assert!(parse_grid("1d:0").is_err());
    assert_eq!(parse_rhs("eigen:2,3").unwrap(), RhsKind::Eigen(ModeIndex::Two(2, 3)));
    assert_eq!(parse_rhs("cosine-noh").unwrap(), RhsKind::CosineNoH);
    assert!(parse_rhs("gauss").is_err());
}

#[test]
fn closed_form_norm_matches_assembly() {
    for dim in [Dimension::One, Dimension::Two] {
        for n in [1, 2, 3, 7] {
            let g = GridSpec::new(dim, n).unwrap();
            assert_eq!(
                grid_inf_norm(&g),
                matrix_inf_norm(&assemble_laplacian(&g)),
                "{dim:?} {n}"
            );
        }
    }
}

#[test]
fn two_d_modes_come_sorted() {
    let g = GridSpec::two_d(6).unwrap();
    let curve = per_mode_error_curve(0.5, &"quad:4".parse().unwrap(), &g, &store(), None).unwrap();
    assert_eq!(curve.len(), 36);
    assert!(curve.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    assert_eq!(curve[0].index, ModeIndex::Two(1, 1));
}

#[test]
fn per_mode_curve_matches_solver_on_eigenvectors() {
    let g = GridSpec::one_d(31).unwrap();
    let a = assemble_laplacian(&g);
    let st = store();
    for method in ["bura:3", "rbura:3,2", "rbura:3,3", "quad:5"] {
        let m: MethodSpec = method.parse().unwrap();
        let curve = per_mode_error_curve(0.5, &m, &g, &st, Some(5)).unwrap();
        let sum = method_sum(0.5, &m, grid_inf_norm(&g), &st).unwrap();
        for e in &curve {
            let f = rhs_generate(&g, &RhsKind::Eigen(e.index)).unwrap();
            let u = solve_shifted_sum(&a, &f, &sum, &ShiftedSolveConfig::default())
                .unwrap()
                .solution;
            let exact = solve_spectral(&g, &f, 0.5, usize::MAX).unwrap();
            let (l2, _) = experiment::relative_errors(&u, &exact, &f);
            assert!(
                (l2 - e.error).abs() < 1e-11 * e.error.max(1e-3),
                "{method} {:?}: {l2} vs {}",
                e.index,
                e.error
            );
        }
    }
}

#[test]
fn window_classification_follows_error_sign() {
    let st = store();
    let r = st.get(0.5, 2, 2).unwrap();
    let roots = validate_mu1_window(0.5, &r, &GridSpec::one_d(3).unwrap())
        .unwrap()
        .roots;
    assert_eq!(roots.len(), 5);
    // μ₁ on a coarse grid sits far above ξ₁; a fine grid pushes it below.
    let fine = GridSpec::one_d(1 << 20).unwrap();
    let cls = validate_mu1_window(0.5, &r, &fine).unwrap();
    assert!(cls.mu1 < roots[0]);
    assert_eq!(cls.window, Mu1Window::Degenerate);
    let (_, bound) = rbura_bound(0.5, &r, &fine).unwrap();
    assert!((bound.unwrap() - fine.lambda_min().powf(-0.5)).abs() < 1e-15);
    for n in [3usize, 7, 15, 31, 63, 127] {
        let g = GridSpec::one_d(n).unwrap();
        let cls = validate_mu1_window(0.5, &r, &g).unwrap();
        let err = r.evaluate(cls.mu1) - cls.mu1.sqrt();
        match cls.window {
            Mu1Window::Valid { lower_root } => assert!(err >= 0.0 && lower_root >= 1),
            Mu1Window::InvalidGap { .. } => assert!(err < 0.0),
            Mu1Window::Degenerate => assert!(cls.mu1 <= roots[0]),
        }
    }
    assert!(validate_mu1_window(0.25, &r, &fine).is_err());
}

#[test]
fn bound_summary_fields() {
    let g = GridSpec::one_d(999).unwrap();
    let b = bound_summary(0.75, 3, &g, &store()).unwrap();
    let h = 1e-3;
    assert!((b.c - 4.0 / (h * h)).abs() < 1e-6 * b.c);
    let l1 = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    assert!((b.lambda1 - l1).abs() < 1e-12 * l1);
    assert!((b.mu1 - l1 / b.c).abs() < 1e-15);
    assert!((b.bura_bound - b.c.powf(0.25) * b.e_bura / l1).abs() < 1e-12 * b.bura_bound);
    assert!((b.rbura_degenerate_bound - l1.powf(-0.75)).abs() < 1e-15);
    assert!(b.bura_asymptotic > 0.0 && b.rbura_asymptotic > 0.0 && b.quad_asymptotic > 0.0);
    assert!(bound_summary(1.0, 3, &g, &store()).is_err());
}

#[test]
fn store_uses_disk_cache() {
    let dir = tempfile::tempdir().unwrap();
    let first = ApproximantStore::new(RemezOptions::default(), Some(dir.path().to_path_buf()));
    let r = first.get(0.5, 2, 2).unwrap();
    assert!(crate::rational::cache_path(dir.path(), 0.5, 2, 2, 512).exists());
    let second = ApproximantStore::new(RemezOptions::default(), Some(dir.path().to_path_buf()));
    let again = second.get(0.5, 2, 2).unwrap();
    assert_eq!(r.error(), again.error());
    assert!(Arc::ptr_eq(&again, &second.get(0.5, 2, 2).unwrap()));
}

#[test]
fn corrupt_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let path = crate::rational::cache_path(dir.path(), 0.5, 1, 1, 512);
    std::fs::write(&path, "{ not json").unwrap();
    let st = ApproximantStore::new(RemezOptions::default(), Some(dir.path().to_path_buf()));
    assert!(st.get(0.5, 1, 1).is_ok());
}

#[test]
fn csv_layout() {
    let rows = vec![ReportRow {
        method: "bura".into(),
        alpha: 0.75,
        k: "7".into(),
        m: "7".into(),
        h: 1.0 / 256.0,
        rhs: "checkerboard".into(),
        l2_rel: Some(4.194e-4),
        linf_rel: Some(1e-3),
        systems: Some(8),
        seconds: None,
        status: "ok".into(),
    }];
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text,
        "method,alpha,k,m,h,rhs,l2_rel,linf_rel,systems,seconds,status\n\
         bura,7.50000e-1,7,7,3.90625e-3,checkerboard,4.19400e-4,1.00000e-3,8,,ok\n"
    );
}

#[test]
fn config_from_toml() {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        name = "t4"
        alpha = 0.75
        methods = ["bura:7", "rbura:8,7", "quad:7"]
        grids = ["2d:63", "2d:127"]
        rhs = "checkerboard"
        reference = "fine-oracle"
        fine_level = 10
        backend = "spectral"
        tol = 1e-10
        workers = 2
        timing = false
        "#,
    )
    .unwrap();
    assert_eq!(cfg.name, "t4");
    assert_eq!(cfg.methods.len(), 3);
    assert_eq!(cfg.grids[1].n(), 127);
    assert_eq!(cfg.reference, Reference::FineOracle);
    assert_eq!(cfg.backend, Backend::Spectral);
    assert_eq!(cfg.solver.workers, Some(2));
    assert!(!cfg.timing);
    assert!(ExperimentConfig::from_toml_str("alpha = 0.5\nmethods = []\ngrids = []\nrhs = \"cosine\"").is_err());
    assert!(ExperimentConfig::from_toml_str(
        "alpha = 0.5\nmethods=[\"quad:3\"]\ngrids=[\"2d:7\"]\nrhs=\"cosine\"\nbogus=1"
    )
    .is_err());
}

#[test]
fn fine_oracle_at_own_level_is_the_oracle() {
    let g = GridSpec::dyadic(Dimension::Two, 4).unwrap();
    let f = rhs_generate(&g, &RhsKind::Checkerboard).unwrap();
    let direct = solve_spectral(&g, &f, 0.5, usize::MAX).unwrap();
    let injected = experiment::fine_oracle(&g, &RhsKind::Checkerboard, 0.5, 4).unwrap();
    assert!(direct.iter().zip(&injected).all(|(a, b)| (a - b).abs() < 1e-14));
    assert!(experiment::fine_oracle(&GridSpec::two_d(6).unwrap(), &RhsKind::Checkerboard, 0.5, 4).is_err());
    assert!(experiment::fine_oracle(&g, &RhsKind::Eigen(ModeIndex::Two(1, 1)), 0.5, 6).is_err());
}

#[test]
fn failing_rows_are_recorded() {
    let mut cfg = ExperimentConfig::new(
        0.5,
        vec!["quad:3".parse().unwrap(), "bura:2".parse().unwrap()],
        vec![GridSpec::one_d(15).unwrap()],
        RhsKind::Checkerboard,
    );
    let rep = run_experiment(&cfg, &store()).unwrap();
    assert_eq!(rep.rows.len(), 2);
    assert!(rep
        .rows
        .iter()
        .all(|r| r.status.starts_with("error") && r.l2_rel.is_none()));
    cfg.rhs = RhsKind::Eigen(ModeIndex::One(2));
    cfg.solver.max_iter = Some(1);
    cfg.grids = vec![GridSpec::one_d(15).unwrap()];
    let rep = run_experiment(&cfg, &store()).unwrap();
    assert!(rep.rows.iter().all(ReportRow::is_ok));
}

#[test]
fn crossover_rejects_quadrature_variant() {
    let g = GridSpec::two_d(15).unwrap();
    let q = "quad:3".parse().unwrap();
    assert!(efficiency_crossover(
        0.5,
        &q,
        &g,
        &RhsKind::Checkerboard,
        &store(),
        &CrossoverOptions::default()
    )
    .is_err());
}

#[test]
fn crossover_cap_is_reported() {
    let g = GridSpec::two_d(15).unwrap();
    let v = "bura:4".parse().unwrap();
    let opts = CrossoverOptions {
        k_cap: 2,
        ..Default::default()
    };
    match efficiency_crossover(0.5, &v, &g, &RhsKind::Checkerboard, &store(), &opts) {
        Err(HarnessError::ScanCap { cap: 2, target, best }) => assert!(best >= target),
        other => panic!("{other:?}"),
    }
}
