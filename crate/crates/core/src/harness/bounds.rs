//! Per-mode error curves and the a priori error bounds.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rug::ops::Pow;
use rug::Float;

use super::{grid_inf_norm, ApproximantStore, HarnessError, MethodSpec};
use crate::discretization::{Dimension, GridSpec, ModeIndex};
use crate::rational::{error_function_roots, RationalMinimax};
use crate::solvers::build_quadrature;

/// Error of one method on one eigenvector `f = Ψ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeError {
    pub index: ModeIndex,
    pub lambda: f64,
    pub mu: f64,
    pub error: f64,
}

/// Eigenvalues in increasing order with their indices, at most `limit` of them.
fn modes(grid: &GridSpec, limit: Option<usize>) -> Vec<(ModeIndex, f64)> {
    let axis = grid.axis_eigenvalues();
    let limit = limit.unwrap_or(usize::MAX).min(grid.unknowns());
    match grid.dimension() {
        Dimension::One => axis
            .iter()
            .take(limit)
            .enumerate()
            .map(|(i, &l)| (ModeIndex::One(i + 1), l))
            .collect(),
        Dimension::Two => {
            let mut all: Vec<(ModeIndex, f64)> = Vec::with_capacity(axis.len() * axis.len());
            for (j, &ly) in axis.iter().enumerate() {
                for (i, &lx) in axis.iter().enumerate() {
                    all.push((ModeIndex::Two(i + 1, j + 1), lx + ly));
                }
            }
            all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| key(a.0).cmp(&key(b.0))));
            all.truncate(limit);
            all
        }
    }
}

fn key(m: ModeIndex) -> (usize, usize) {
    match m {
        ModeIndex::One(i) => (i, 0),
        ModeIndex::Two(i, j) => (i, j),
    }
}

/// Analytic error `|S(λ_i) - λ_i^{-α}|` of each method for `f = Ψ_i`, in
/// increasing eigenvalue order. Rational methods are evaluated in the
/// approximant's precision, the quadrature in 128 bits.
pub fn per_mode_error_curve(
    alpha: f64,
    method: &MethodSpec,
    grid: &GridSpec,
    store: &ApproximantStore,
    limit: Option<usize>,
) -> Result<Vec<ModeError>, HarnessError> {
    method.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    let c = grid_inf_norm(grid);
    let modes = modes(grid, limit);
    let out = match *method {
        MethodSpec::Bura { k } => {
            let r = store.get(1.0 - alpha, k, k)?;
            let prec = r.precision();
            let c_pow = Float::with_val(prec, c).pow(Float::with_val(prec, -alpha));
            let beta = Float::with_val(prec, 1.0 - alpha);
            let mut out = Vec::with_capacity(modes.len());
            for (index, lambda) in modes {
                let mu = Float::with_val(prec, lambda) / c;
                let mut e = r.evaluate_big(&mu);
                e -= Float::with_val(prec, (&mu).pow(&beta));
                e /= &mu;
                e *= &c_pow;
                out.push(ModeError {
                    index,
                    lambda,
                    mu: mu.to_f64(),
                    error: e.abs().to_f64(),
                });
            }
            out
        }
        MethodSpec::Rbura { k, m } => {
            let r = store.get(alpha, k, m)?;
            let prec = r.precision();
            let c_pow = Float::with_val(prec, c).pow(Float::with_val(prec, -alpha));
            let neg = Float::with_val(prec, -alpha);
            let mut out = Vec::with_capacity(modes.len());
            for (index, lambda) in modes {
                let mu = Float::with_val(prec, lambda) / c;
                let mut e = Float::with_val(prec, 1) / r.evaluate_big(&mu);
                e -= Float::with_val(prec, (&mu).pow(&neg));
                e *= &c_pow;
                out.push(ModeError {
                    index,
                    lambda,
                    mu: mu.to_f64(),
                    error: e.abs().to_f64(),
                });
            }
            out
        }
        MethodSpec::Quad(p) => {
            let q = build_quadrature(alpha, p)?;
            let prec = 128;
            let scale = Float::with_val(prec, q.scale());
            let neg = Float::with_val(prec, -alpha);
            let mut out = Vec::with_capacity(modes.len());
            for (index, lambda) in modes {
                let lam = Float::with_val(prec, lambda);
                let mut s = Float::with_val(prec, 0);
                for (&sh, &w) in q.shifts().iter().zip(q.weights()) {
                    s += Float::with_val(prec, w) / Float::with_val(prec, &lam + sh);
                }
                s *= &scale;
                s -= Float::with_val(prec, (&lam).pow(&neg));
                out.push(ModeError {
                    index,
                    lambda,
                    mu: lambda / c,
                    error: s.abs().to_f64(),
                });
            }
            out
        }
    };
    Ok(out)
}

/// Where `μ₁` sits on the ladder of error roots `ξ₁ < ξ₂ < …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mu1Window {
    /// `μ₁ ≤ ξ₁` with `r ≥ t^α` there.
    Degenerate,
    /// `r(μ₁) ≥ μ₁^α` with `μ₁` past root number `lower_root` (1-based).
    Valid { lower_root: usize },
    /// `r(μ₁) < μ₁^α`.
    InvalidGap { lower_root: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mu1Classification {
    pub window: Mu1Window,
    pub mu1: f64,
    pub roots: Vec<f64>,
    /// Nearest root and `|ln(μ₁/ξ)|`, the distance to the classification boundary.
    pub nearest_root: (usize, f64),
    pub log_distance: f64,
}

/// Locates `μ₁ = λ₁/C` among the roots of `r - t^α` and checks the sign of
/// the error there.
pub fn validate_mu1_window(
    alpha: f64,
    r: &RationalMinimax,
    grid: &GridSpec,
) -> Result<Mu1Classification, HarnessError> {
    if (r.beta() - alpha).abs() > 1e-12 {
        return Err(HarnessError::Config(format!(
            "window check needs an approximant of t^{alpha}, got t^{}",
            r.beta()
        )));
    }
    let mu1 = grid.lambda_min() / grid_inf_norm(grid);
    let table = error_function_roots(r)?;
    let roots = table.roots_f64();
    let mu = Float::with_val(r.precision(), mu1);
    let below = table.roots.iter().take_while(|x| **x < mu).count();
    let nonneg = r.error_at(&mu).cmp0().is_none_or(|o| o != Ordering::Less);
    let window = match (below, nonneg) {
        (0, true) => Mu1Window::Degenerate,
        (i, true) => Mu1Window::Valid { lower_root: i },
        (i, false) => Mu1Window::InvalidGap { lower_root: i },
    };
    let nearest = roots
        .iter()
        .enumerate()
        .map(|(i, &x)| (i + 1, x, (mu1 / x).ln().abs()))
        .min_by(|a, b| a.2.total_cmp(&b.2));
    let (nearest_root, log_distance) = match nearest {
        Some((i, x, d)) => ((i, x), d),
        None => ((0, f64::NAN), f64::INFINITY),
    };
    Ok(Mu1Classification {
        window,
        mu1,
        roots,
        nearest_root,
        log_distance,
    })
}

/// The R-BURA bound that applies to `r` on `grid`: `C^α E/λ₁^{2α}` in a valid
/// window, `λ₁^{-α}` in the degenerate case, none in a gap.
pub fn rbura_bound(
    alpha: f64,
    r: &RationalMinimax,
    grid: &GridSpec,
) -> Result<(Mu1Classification, Option<f64>), HarnessError> {
    let cls = validate_mu1_window(alpha, r, grid)?;
    let c = grid_inf_norm(grid);
    let l1 = grid.lambda_min();
    let bound = match cls.window {
        Mu1Window::Degenerate => Some(l1.powf(-alpha)),
        Mu1Window::Valid { .. } => Some(c.powf(alpha) * r.error_f64() / l1.powf(2.0 * alpha)),
        Mu1Window::InvalidGap { .. } => None,
    };
    Ok((cls, bound))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSummary {
    pub alpha: f64,
    pub k: usize,
    pub c: f64,
    pub lambda1: f64,
    pub mu1: f64,
    /// `E_{α,k,k}`: error of the `(k,k)` approximant of `t^{1-α}`.
    pub e_bura: f64,
    /// `E_{1-α,k,k}`: error of the `(k,k)` approximant of `t^α`.
    pub e_rbura: f64,
    pub bura_bound: f64,
    pub rbura_window_bound: f64,
    pub rbura_degenerate_bound: f64,
    pub window: Mu1Classification,
    /// The R-BURA bound valid for this `μ₁`, if any.
    pub rbura_bound: Option<f64>,
    /// `k → ∞` limits of `e^{2π√((1-α)k)}·err`, `e^{2π√(αk)}·err` and the quadrature analogue.
    pub bura_asymptotic_constant: f64,
    pub rbura_asymptotic_constant: f64,
    pub quad_asymptotic_constant: f64,
    pub bura_asymptotic: f64,
    pub rbura_asymptotic: f64,
    pub quad_asymptotic: f64,
}

pub fn bound_summary(
    alpha: f64,
    k: usize,
    grid: &GridSpec,
    store: &ApproximantStore,
) -> Result<BoundSummary, HarnessError> {
    if !(alpha > 0.0 && alpha < 1.0) || k == 0 {
        return Err(HarnessError::Config(format!(
            "bound summary needs alpha in (0,1) and k ≥ 1, got ({alpha}, {k})"
        )));
    }
    let c = grid_inf_norm(grid);
    let l1 = grid.lambda_min();
    let rb = store.get(1.0 - alpha, k, k)?;
    let rr = store.get(alpha, k, k)?;
    let (e_bura, e_rbura) = (rb.error_f64(), rr.error_f64());
    let (window, rbura) = rbura_bound(alpha, &rr, grid)?;
    let s = (PI * alpha).sin();
    let kf = k as f64;
    let bura_c = 4f64.powf(2.0 - alpha) * c.powf(1.0 - alpha) * s / l1;
    let rbura_c = 4f64.powf(1.0 + alpha) * c.powf(alpha) * s / l1.powf(2.0 * alpha);
    let quad_c = 2.0 * s / PI * (1.0 / alpha + 1.0 / ((1.0 - alpha) * l1));
    Ok(BoundSummary {
        alpha,
        k,
        c,
        lambda1: l1,
        mu1: l1 / c,
        e_bura,
        e_rbura,
        bura_bound: c.powf(1.0 - alpha) * e_bura / l1,
        rbura_window_bound: c.powf(alpha) * e_rbura / l1.powf(2.0 * alpha),
        rbura_degenerate_bound: l1.powf(-alpha),
        window,
        rbura_bound: rbura,
        bura_asymptotic_constant: bura_c,
        rbura_asymptotic_constant: rbura_c,
        quad_asymptotic_constant: quad_c,
        bura_asymptotic: bura_c * (-2.0 * PI * ((1.0 - alpha) * kf).sqrt()).exp(),
        rbura_asymptotic: rbura_c * (-2.0 * PI * (alpha * kf).sqrt()).exp(),
        quad_asymptotic: quad_c * (-PI * (alpha * (1.0 - alpha) * kf).sqrt()).exp(),
    })
}
