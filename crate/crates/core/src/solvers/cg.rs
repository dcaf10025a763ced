//! Preconditioned conjugate gradients for `(A + cI) x = f`.

use crate::discretization::SparseSymMatrix;

use super::SolveError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSolveConfig {
    /// Relative residual target `‖(A + cI)x - f‖ ≤ tol·‖f‖`.
    pub tol: f64,
    /// Iteration cap; `None` means `10·√N`.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
    /// Worker threads for the independent shifts; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for ShiftedSolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: None,
            preconditioner: Preconditioner::Jacobi,
            workers: None,
        }
    }
}

impl ShiftedSolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(SolveError::Config(format!("tolerance {} outside (0, 1e-2]", self.tol)));
        }
        if self.workers == Some(0) {
            return Err(SolveError::Config("zero workers".into()));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iter
            .unwrap_or_else(|| ((10.0 * (n as f64).sqrt()).ceil() as usize).max(1))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns the solution and iteration count, or `(iterations, residual)` when
/// the cap is hit.
pub(crate) fn cg(
    a: &SparseSymMatrix,
    shift: f64,
    f: &[f64],
    cfg: &ShiftedSolveConfig,
) -> Result<(Vec<f64>, usize), (usize, f64)> {
    let n = a.dim();
    let fnorm = dot(f, f).sqrt();
    let mut x = vec![0.0; n];
    if fnorm == 0.0 {
        return Ok((x, 0));
    }
    let inv_diag: Vec<f64> = match cfg.preconditioner {
        Preconditioner::Jacobi => a.diagonal().iter().map(|d| 1.0 / (d + shift)).collect(),
        Preconditioner::None => vec![1.0; n],
    };
    let target = cfg.tol * fnorm;
    let mut r = f.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = cfg.iteration_cap(n);
    let mut rnorm = fnorm;
    for it in 1..=cap {
        a.mul_shifted(shift, &p, &mut q);
        let step = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err((cap, rnorm / fnorm))
}

/// Solves `(A + cI) x = f` to the configured relative residual.
pub fn shifted_solve(a: &SparseSymMatrix, c: f64, f: &[f64], cfg: &ShiftedSolveConfig) -> Result<Vec<f64>, SolveError> {
    cfg.validate()?;
    if !(c >= 0.0) {
        return Err(SolveError::NegativeShift(c));
    }
    if f.len() != a.dim() {
        return Err(SolveError::Dimension {
            expected: a.dim(),
            got: f.len(),
        });
    }
    cg(a, c, f, cfg)
        .map(|(x, _)| x)
        .map_err(|(iterations, residual)| SolveError::MaxIterations {
            index: 0,
            shift: c,
            iterations,
            residual,
        })
}
