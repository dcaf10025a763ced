//! `A^{-α} f` by BURA, R-BURA and sinc quadrature, each reduced to a weighted
//! sum of independent shifted SPD solves, plus the exact spectral solution.

mod cg;
mod quadrature;

use std::time::Instant;

use rayon::prelude::*;

use crate::discretization::{apply_spectral, matrix_inf_norm, GridFunction, GridSpec, SparseSymMatrix};
use crate::rational::{
    bura_partial_fractions, reciprocal_partial_fractions, ApproxError, PoleResidueF64, Provenance, RationalMinimax,
};

pub use cg::{shifted_solve, Preconditioner, ShiftedSolveConfig};
pub use quadrature::{build_quadrature, QuadratureParam, QuadratureScheme};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(
        "shift {index} (c = {shift:.6e}): CG stopped after {iterations} iterations at relative residual {residual:.3e}"
    )]
    MaxIterations {
        index: usize,
        shift: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("negative shift {0}")]
    NegativeShift(f64),
    #[error("right-hand side has length {got}, matrix has dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("approximant does not fit the method: {0}")]
    Approximant(String),
    #[error("grid with {unknowns} unknowns exceeds the spectral oracle cap of {cap}")]
    OracleCap { unknowns: usize, cap: usize },
    #[error(transparent)]
    Rational(#[from] ApproxError),
}

/// `scale · (b·f + Σ w_j (A + σ_j I)^{-1} f)` with `σ_j ≥ 0`. Every method in
/// this module is an instance; terms are kept sorted by ascending shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSum {
    scale: f64,
    constant: f64,
    terms: Vec<(f64, f64)>,
}

impl ShiftedSum {
    pub fn new(scale: f64, constant: f64, mut terms: Vec<(f64, f64)>) -> Result<Self, SolveError> {
        if let Some(&(s, _)) = terms.iter().find(|(s, _)| !(*s >= 0.0)) {
            return Err(SolveError::NegativeShift(s));
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { scale, constant, terms })
    }

    /// `u = C^{1-α} Σ c_j (A - C d_j I)^{-1} f` from the form of `t⁻¹ r(t)`.
    pub fn bura(alpha: f64, c: f64, form: &PoleResidueF64) -> Result<Self, SolveError> {
        if form.provenance != Provenance::Bura {
            return Err(SolveError::Approximant(
                "expected the partial fractions of t^-1 r(t)".into(),
            ));
        }
        let terms = form
            .poles
            .iter()
            .zip(&form.coefficients)
            .map(|(&d, &w)| (-c * d, w))
            .collect();
        Self::new(c.powf(1.0 - alpha), 0.0, terms)
    }

    /// `u = C^{-α} [b₀ f + Σ e_j C (A - C z_j I)^{-1} f]` from the form of `1/r(t)`.
    pub fn rbura(alpha: f64, c: f64, form: &PoleResidueF64) -> Result<Self, SolveError> {
        if form.provenance != Provenance::Reciprocal {
            return Err(SolveError::Approximant(
                "expected the partial fractions of 1/r(t)".into(),
            ));
        }
        let terms = form
            .poles
            .iter()
            .zip(&form.coefficients)
            .map(|(&z, &e)| (-c * z, c * e))
            .collect();
        Self::new(c.powf(-alpha), form.constant.unwrap_or(0.0), terms)
    }

    pub fn quadrature(scheme: &QuadratureScheme) -> Self {
        let terms = scheme
            .shifts()
            .iter()
            .copied()
            .zip(scheme.weights().iter().copied())
            .collect();
        Self::new(scheme.scale(), 0.0, terms).expect("quadrature shifts are positive")
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn systems(&self) -> usize {
        self.terms.len()
    }

    /// The same expression with the matrix replaced by the scalar `λ`.
    pub fn eval_scalar(&self, lambda: f64) -> f64 {
        let mut acc = self.constant;
        for &(s, w) in &self.terms {
            acc += w / (lambda + s);
        }
        self.scale * acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: GridFunction,
    pub systems_solved: usize,
    /// CG iterations per shift, in ascending-shift order.
    pub iterations: Vec<usize>,
    pub seconds: f64,
}

/// Runs all shifted solves of `sum` (concurrently when a pool is available)
/// and accumulates them in ascending-shift order.
pub fn solve_shifted_sum(
    a: &SparseSymMatrix,
    f: &[f64],
    sum: &ShiftedSum,
    cfg: &ShiftedSolveConfig,
) -> Result<SolveResult, SolveError> {
    if f.len() != a.dim() {
        return Err(SolveError::Dimension {
            expected: a.dim(),
            got: f.len(),
        });
    }
    cfg.validate()?;
    let start = Instant::now();
    let run = || -> Vec<Result<(Vec<f64>, usize), SolveError>> {
        sum.terms
            .par_iter()
            .enumerate()
            .map(|(index, &(shift, _))| {
                cg::cg(a, shift, f, cfg).map_err(|(iterations, residual)| SolveError::MaxIterations {
                    index,
                    shift,
                    iterations,
                    residual,
                })
            })
            .collect()
    };
    let outcomes = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| SolveError::Config(e.to_string()))?
            .install(run),
        None => run(),
    };
    let mut u: Vec<f64> = f.iter().map(|v| sum.constant * v).collect();
    let mut iterations = Vec::with_capacity(outcomes.len());
    for (outcome, &(_, w)) in outcomes.into_iter().zip(&sum.terms) {
        let (x, its) = outcome?;
        for (ui, xi) in u.iter_mut().zip(&x) {
            *ui += w * xi;
        }
        iterations.push(its);
    }
    for ui in u.iter_mut() {
        *ui *= sum.scale;
    }
    Ok(SolveResult {
        solution: u.into(),
        systems_solved: sum.systems(),
        iterations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Applies `sum` exactly through the sine eigenbasis of a structured grid.
/// Equal to [`solve_shifted_sum`] up to the CG tolerance.
pub fn apply_shifted_sum_spectral(grid: &GridSpec, f: &[f64], sum: &ShiftedSum) -> GridFunction {
    apply_spectral(grid, f, |lam| sum.eval_scalar(lam)).into()
}

fn check_beta(r: &RationalMinimax, want: f64, what: &str) -> Result<(), SolveError> {
    if (r.beta() - want).abs() > 1e-12 {
        return Err(SolveError::Approximant(format!(
            "{what} needs an approximant of t^{want}, got t^{}",
            r.beta()
        )));
    }
    Ok(())
}

/// BURA: `r` approximates `t^{1-α}` with degrees `(k, k)`.
pub fn solve_bura(
    a: &SparseSymMatrix,
    f: &[f64],
    alpha: f64,
    r: &RationalMinimax,
    cfg: &ShiftedSolveConfig,
) -> Result<SolveResult, SolveError> {
    check_beta(r, 1.0 - alpha, "BURA")?;
    let form = bura_partial_fractions(r)?.to_f64();
    let sum = ShiftedSum::bura(alpha, matrix_inf_norm(a), &form)?;
    solve_shifted_sum(a, f, &sum, cfg)
}

/// R-BURA: `r` approximates `t^α` with degrees `(k+1, k)` or `(k+1, k+1)`.
pub fn solve_rbura(
    a: &SparseSymMatrix,
    f: &[f64],
    alpha: f64,
    r: &RationalMinimax,
    cfg: &ShiftedSolveConfig,
) -> Result<SolveResult, SolveError> {
    check_beta(r, alpha, "R-BURA")?;
    let form = reciprocal_partial_fractions(r)?.to_f64();
    let sum = ShiftedSum::rbura(alpha, matrix_inf_norm(a), &form)?;
    solve_shifted_sum(a, f, &sum, cfg)
}

pub fn solve_quadrature(
    a: &SparseSymMatrix,
    f: &[f64],
    scheme: &QuadratureScheme,
    cfg: &ShiftedSolveConfig,
) -> Result<SolveResult, SolveError> {
    solve_shifted_sum(a, f, &ShiftedSum::quadrature(scheme), cfg)
}

/// Largest grid the spectral oracle accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 1 << 22;

/// Exact discrete solution `A^{-α} f` by sine-basis expansion.
pub fn solve_spectral(grid: &GridSpec, f: &[f64], alpha: f64, cap: usize) -> Result<GridFunction, SolveError> {
    if grid.unknowns() > cap {
        return Err(SolveError::OracleCap {
            unknowns: grid.unknowns(),
            cap,
        });
    }
    if f.len() != grid.unknowns() {
        return Err(SolveError::Dimension {
            expected: grid.unknowns(),
            got: f.len(),
        });
    }
    Ok(apply_spectral(grid, f, |lam| lam.powf(-alpha)).into())
}
