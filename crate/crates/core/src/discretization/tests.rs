use super::*;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn dense_eigenvalues(a: &SparseSymMatrix) -> Vec<f64> {
    let n = a.dim();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

fn residual_ratio(a: &SparseSymMatrix, pair: &EigenPair) -> f64 {
    let ap = a.mul_vec(&pair.psi);
    let r: f64 = ap
        .iter()
        .zip(pair.psi.iter())
        .map(|(x, p)| (x - pair.lambda * p).powi(2))
        .sum();
    r.sqrt() / pair.lambda
}

#[test]
fn one_point_grid_is_eight() {
    let a = assemble_laplacian(&GridSpec::one_d(1).unwrap());
    assert_eq!(a.to_dense(), vec![8.0]);
    assert_eq!(matrix_inf_norm(&a), 8.0);
}

#[test]
fn two_d_n2_matches_block_structure() {
    let a = assemble_laplacian(&GridSpec::two_d(2).unwrap());
    let expected = [4., -1., -1., 0., -1., 4., 0., -1., -1., 0., 4., -1., 0., -1., -1., 4.];
    let expected: Vec<f64> = expected.iter().map(|v| 9.0 * v).collect();
    assert_eq!(a.to_dense(), expected);
}

#[test]
fn smallest_eigenvalue_n3_matches_closed_form() {
    let a = assemble_laplacian(&GridSpec::one_d(3).unwrap());
    let ev = dense_eigenvalues(&a);
    let expected = 64.0 * (std::f64::consts::PI / 8.0).sin().powi(2);
    assert!((ev[0] - expected).abs() < 1e-12 * expected);
}

#[test]
fn nonzero_counts() {
    for n in [1, 2, 5, 17] {
        let g1 = GridSpec::one_d(n).unwrap();
        assert_eq!(assemble_laplacian(&g1).nnz(), 3 * n - 2);
        let g2 = GridSpec::two_d(n).unwrap();
        assert_eq!(assemble_laplacian(&g2).nnz(), 5 * n * n - 4 * n);
    }
}

#[test]
fn invalid_grids_are_rejected() {
    assert_eq!(GridSpec::one_d(0), Err(GridError::EmptyGrid));
    assert!(matches!(
        GridSpec::two_d(usize::MAX / 2),
        Err(GridError::Overflow { .. })
    ));
}

#[test]
fn inf_norm_values() {
    let g = GridSpec::dyadic(Dimension::Two, 8).unwrap();
    assert_eq!(matrix_inf_norm(&assemble_laplacian(&g)), 524288.0);

    let g = GridSpec::one_d(100).unwrap();
    let a = assemble_laplacian(&g);
    let dense = a.to_dense();
    let brute = dense
        .chunks(100)
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    assert_eq!(matrix_inf_norm(&a), brute);
    assert_eq!(brute, 4.0 * 101.0 * 101.0);
}

#[test]
fn oracle_examples() {
    let g = GridSpec::one_d(999).unwrap();
    let p = eigen_oracle(&g, ModeIndex::One(1)).unwrap();
    let expected = 4e6 * (std::f64::consts::PI * 5e-4).sin().powi(2);
    assert!((p.lambda - expected).abs() < 1e-12 * expected);

    let g = GridSpec::one_d(3).unwrap();
    let p = eigen_oracle(&g, ModeIndex::One(2)).unwrap();
    assert!((p.lambda - 32.0).abs() < 1e-12);
    let kappa = 0.5f64.sqrt();
    for (got, want) in p.psi.iter().zip([kappa, 0.0, -kappa]) {
        assert!((got - want).abs() < 1e-15);
    }
    assert!(matches!(
        eigen_oracle(&g, ModeIndex::One(4)),
        Err(GridError::ModeOutOfRange { .. })
    ));
    assert!(matches!(
        eigen_oracle(&g, ModeIndex::Two(1, 1)),
        Err(GridError::ModeDimension(_))
    ));
}

#[test]
fn oracle_residuals_two_d_n31() {
    let g = GridSpec::two_d(31).unwrap();
    let a = assemble_laplacian(&g);
    for i in 1..=31 {
        for j in 1..=31 {
            let pair = eigen_oracle(&g, ModeIndex::Two(i, j)).unwrap();
            assert!(residual_ratio(&a, &pair) <= 1e-12, "mode ({i},{j})");
            assert!((pair.psi.norm_l2() - 1.0).abs() < 1e-13);
        }
    }
}

#[test]
fn oracle_is_orthonormal_exhaustive() {
    let grids = [GridSpec::one_d(200).unwrap(), GridSpec::two_d(12).unwrap()];
    for g in grids {
        let modes: Vec<ModeIndex> = match g.dimension() {
            Dimension::One => (1..=g.n()).map(ModeIndex::One).collect(),
            Dimension::Two => (1..=g.n())
                .flat_map(|j| (1..=g.n()).map(move |i| ModeIndex::Two(i, j)))
                .collect(),
        };
        let vecs: Vec<GridFunction> = modes.iter().map(|&m| eigen_oracle(&g, m).unwrap().psi).collect();
        for (p, u) in vecs.iter().enumerate() {
            for (q, v) in vecs.iter().enumerate() {
                let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                let delta = if p == q { 1.0 } else { 0.0 };
                assert!((dot - delta).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn gershgorin_bounds_spectrum() {
    for g in [
        GridSpec::one_d(50).unwrap(),
        GridSpec::two_d(20).unwrap(),
        GridSpec::one_d(1).unwrap(),
    ] {
        let c = matrix_inf_norm(&assemble_laplacian(&g));
        assert!(g.lambda_max() <= c);
        assert!(g.lambda_min() > 0.0);
    }
}

#[test]
fn checkerboard_signs() {
    let g = GridSpec::two_d(3).unwrap();
    let f = rhs_generate(&g, &RhsKind::Checkerboard).unwrap();
    // (0.25, 0.25) is node 0; (0.5, 0.25) is node 1 and lies on x = 0.5.
    assert_eq!(f[0], 1.0);
    assert_eq!(f[1], -1.0);
    assert!(rhs_generate(&GridSpec::one_d(3).unwrap(), &RhsKind::Checkerboard).is_err());
}

#[test]
fn cosine_is_literal() {
    let g = GridSpec::two_d(3).unwrap();
    let f = rhs_generate(&g, &RhsKind::Cosine).unwrap();
    // node (0.25, 0.5): p = 0, q = 1.
    let pi = std::f64::consts::PI;
    let want = (pi * 0.25 * 0.25).cos() * (pi * 0.25 * 0.5).cos();
    assert!((f[3] - want).abs() < 1e-15);
    let f = rhs_generate(&g, &RhsKind::CosineNoH).unwrap();
    assert!((f[3] - (pi * 0.25).cos() * (pi * 0.5).cos()).abs() < 1e-15);
}

#[test]
fn eigen_rhs() {
    let g = GridSpec::one_d(3).unwrap();
    let f = rhs_generate(&g, &RhsKind::Eigen(ModeIndex::One(1))).unwrap();
    let pi = std::f64::consts::PI;
    let kappa = 0.5f64.sqrt();
    let want = [kappa * (pi / 4.0).sin(), kappa, kappa * (3.0 * pi / 4.0).sin()];
    for (a, b) in f.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(rhs_generate(&g, &RhsKind::Custom(vec![1.0])).is_err());
}

#[test]
fn reaction_examples() {
    let g = GridSpec::one_d(1).unwrap();
    let a = assemble_laplacian(&g);
    let b = add_diagonal_reaction(&a, &vec![3.0].into()).unwrap();
    assert_eq!(b.to_dense(), vec![11.0]);
    assert_eq!(add_diagonal_reaction(&a, &vec![0.0].into()).unwrap(), a);
    assert!(matches!(
        add_diagonal_reaction(&a, &vec![-1.0].into()),
        Err(GridError::NegativeReaction { index: 0, .. })
    ));

    let g = GridSpec::two_d(2).unwrap();
    let a = assemble_laplacian(&g);
    let b = add_diagonal_reaction(&a, &vec![1.0; 4].into()).unwrap();
    let (ea, eb) = (dense_eigenvalues(&a), dense_eigenvalues(&b));
    assert!((eb[0] - ea[0] - 1.0).abs() < 1e-12);
}

#[test]
fn sine_transform_matches_dense_sum() {
    let g = GridSpec::one_d(7).unwrap();
    let x: Vec<f64> = (0..7).map(|i| (i as f64 * 0.37).sin() + 0.1).collect();
    let got = sine_transform(&g, &x);
    for k in 1..=7 {
        let psi = eigen_oracle(&g, ModeIndex::One(k)).unwrap().psi;
        let want: f64 = psi.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((got[k - 1] - want).abs() < 1e-14);
    }
    let g2 = GridSpec::two_d(5).unwrap();
    let y: Vec<f64> = (0..25).map(|i| ((i * i) % 7) as f64 - 3.0).collect();
    let yt = sine_transform(&g2, &y);
    let psi = eigen_oracle(&g2, ModeIndex::Two(2, 4)).unwrap().psi;
    let want: f64 = psi.iter().zip(&y).map(|(a, b)| a * b).sum();
    assert!((yt[3 * 5 + 1] - want).abs() < 1e-13);
    let back = sine_transform(&g2, &yt);
    for (a, b) in back.iter().zip(&y) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn spectral_identity_reproduces_matvec() {
    let g = GridSpec::two_d(9).unwrap();
    let a = assemble_laplacian(&g);
    let f: Vec<f64> = (0..81).map(|i| ((i * 13) % 11) as f64 / 11.0 - 0.4).collect();
    let af = a.mul_vec(&f);
    let spec = apply_spectral(&g, &f, |lam| lam);
    let scale = af.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in af.iter().zip(&spec) {
        assert!((x - y).abs() < 1e-12 * scale);
    }
}

#[test]
fn csv_and_matrix_market_export() {
    let g = GridSpec::two_d(2).unwrap();
    let f = rhs_generate(&g, &RhsKind::Checkerboard).unwrap();
    let mut buf = Vec::new();
    f.write_csv(&g, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("index,x,y,value\n"));
    assert_eq!(text.lines().count(), 5);

    let mut buf = Vec::new();
    assemble_laplacian(&g).write_matrix_market(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(text.contains("\n4 4 12\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn reaction_keeps_spd_and_raises_spectrum(
        q in proptest::collection::vec(0.0f64..50.0, 16),
        two_d in any::<bool>(),
    ) {
        let g = if two_d { GridSpec::two_d(4).unwrap() } else { GridSpec::one_d(16).unwrap() };
        let a = assemble_laplacian(&g);
        let b = add_diagonal_reaction(&a, &q.clone().into()).unwrap();
        prop_assert!(b.is_symmetric());
        let (ea, eb) = (dense_eigenvalues(&a), dense_eigenvalues(&b));
        prop_assert!(eb[0] >= ea[0] - 1e-9 * ea[0]);
    }
}
