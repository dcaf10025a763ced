use fracpow_core::discretization::{
    assemble_laplacian, eigen_oracle, matrix_inf_norm, rhs_generate, Dimension, GridSpec, ModeIndex, RhsKind,
};
use fracpow_core::rational::{bura_partial_fractions, compute_bura, reciprocal_partial_fractions, RemezOptions};
use fracpow_core::solvers::{
    apply_shifted_sum_spectral, build_quadrature, solve_bura, solve_quadrature, solve_rbura, solve_spectral,
    QuadratureParam, ShiftedSolveConfig, ShiftedSum,
};

fn rel_l2(u: &[f64], v: &[f64], f: &[f64]) -> f64 {
    let d: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    let n: f64 = f.iter().map(|a| a * a).sum();
    (d / n).sqrt()
}

#[test]
fn eigenvectors_are_scaled_by_the_scalar_sum() {
    let g = GridSpec::two_d(15).unwrap();
    let a = assemble_laplacian(&g);
    let c = matrix_inf_norm(&a);
    let cfg = ShiftedSolveConfig {
        tol: 1e-13,
        ..Default::default()
    };
    let alpha = 0.5;
    let rb = compute_bura(1.0 - alpha, 3, 3, &RemezOptions::default()).unwrap();
    let rr = compute_bura(alpha, 4, 3, &RemezOptions::default()).unwrap();
    let q = build_quadrature(alpha, QuadratureParam::Degree(5.0)).unwrap();
    let sums = [
        ShiftedSum::bura(alpha, c, &bura_partial_fractions(&rb).unwrap().to_f64()).unwrap(),
        ShiftedSum::rbura(alpha, c, &reciprocal_partial_fractions(&rr).unwrap().to_f64()).unwrap(),
        ShiftedSum::quadrature(&q),
    ];
    for index in [ModeIndex::Two(1, 1), ModeIndex::Two(2, 5), ModeIndex::Two(15, 15)] {
        let pair = eigen_oracle(&g, index).unwrap();
        let f = &pair.psi;
        let results = [
            solve_bura(&a, f, alpha, &rb, &cfg).unwrap(),
            solve_rbura(&a, f, alpha, &rr, &cfg).unwrap(),
            solve_quadrature(&a, f, &q, &cfg).unwrap(),
        ];
        for (sum, res) in sums.iter().zip(&results) {
            let s = sum.eval_scalar(pair.lambda);
            let expect: Vec<f64> = f.iter().map(|v| s * v).collect();
            assert!(
                rel_l2(&res.solution, &expect, f) < 1e-10 * s.abs().max(1.0),
                "{index:?}"
            );
            assert_eq!(res.systems_solved, sum.systems());
        }
    }
}

#[test]
fn rational_methods_beat_quadrature_at_equal_cost() {
    let alpha = 0.75;
    let g = GridSpec::dyadic(Dimension::Two, 8).unwrap();
    let a = assemble_laplacian(&g);
    let c = matrix_inf_norm(&a);
    let f = rhs_generate(&g, &RhsKind::Checkerboard).unwrap();
    let exact = solve_spectral(&g, &f, alpha, usize::MAX).unwrap();
    let opts = RemezOptions::default();
    let rr = compute_bura(alpha, 8, 8, &opts).unwrap();
    let rb = compute_bura(1.0 - alpha, 7, 7, &opts).unwrap();
    let err = |sum: &ShiftedSum| rel_l2(&apply_shifted_sum_spectral(&g, &f, sum), &exact, &f);
    let e_r = err(&ShiftedSum::rbura(alpha, c, &reciprocal_partial_fractions(&rr).unwrap().to_f64()).unwrap());
    let e_b = err(&ShiftedSum::bura(alpha, c, &bura_partial_fractions(&rb).unwrap().to_f64()).unwrap());
    let e_q = err(&ShiftedSum::quadrature(
        &build_quadrature(alpha, QuadratureParam::Degree(7.0)).unwrap(),
    ));
    assert!(e_r < e_b && e_b < e_q, "{e_r:e} {e_b:e} {e_q:e}");
}

#[test]
fn quadrature_error_is_flat_in_h() {
    let alpha = 0.75;
    let q = build_quadrature(alpha, QuadratureParam::Degree(7.0)).unwrap();
    let sum = ShiftedSum::quadrature(&q);
    let errs: Vec<f64> = (6..=9)
        .map(|level| {
            let g = GridSpec::dyadic(Dimension::Two, level).unwrap();
            let f = rhs_generate(&g, &RhsKind::Checkerboard).unwrap();
            let exact = solve_spectral(&g, &f, alpha, usize::MAX).unwrap();
            rel_l2(&apply_shifted_sum_spectral(&g, &f, &sum), &exact, &f)
        })
        .collect();
    let (lo, hi) = errs.iter().fold((f64::MAX, 0f64), |(l, h), &e| (l.min(e), h.max(e)));
    assert!(hi / lo < 1.1, "{errs:?}");
}

#[test]
fn bura_error_respects_bound_and_grows_as_h_shrinks() {
    let alpha = 0.5;
    let rb = compute_bura(1.0 - alpha, 4, 4, &RemezOptions::default()).unwrap();
    let form = bura_partial_fractions(&rb).unwrap().to_f64();
    let errs: Vec<f64> = (5..=9)
        .map(|level| {
            let g = GridSpec::dyadic(Dimension::One, level).unwrap();
            let c = matrix_inf_norm(&assemble_laplacian(&g));
            let sum = ShiftedSum::bura(alpha, c, &form).unwrap();
            let f = rhs_generate(&g, &RhsKind::Eigen(ModeIndex::One(1))).unwrap();
            let exact = solve_spectral(&g, &f, alpha, usize::MAX).unwrap();
            let err = rel_l2(&apply_shifted_sum_spectral(&g, &f, &sum), &exact, &f);
            let bound = c.powf(1.0 - alpha) * rb.error_f64() / g.lambda_min();
            assert!(err <= bound * (1.0 + 1e-8), "level {level}: {err:e} > {bound:e}");
            err
        })
        .collect();
    assert!(errs[4] > 10.0 * errs[0], "{errs:?}");
}
