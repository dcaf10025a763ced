//! Exponentially convergent sinc quadrature for `λ^{-α}`.

use std::f64::consts::PI;

use super::SolveError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureParam {
    /// Degree parameter `k`.
    Degree(f64),
    /// Step `k′`.
    Step(f64),
}

/// Nodes `ℓ = -m..=M`, shifts `e^{-2ℓk′}` and weights `e^{2(α-1)ℓk′}`
/// scaled by `2k′ sin(πα)/π`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    alpha: f64,
    k: f64,
    step: f64,
    m: usize,
    big_m: usize,
    shifts: Vec<f64>,
    weights: Vec<f64>,
}

/// `⌈x⌉` forgiving round-off just above an integer.
fn ceil_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

pub fn build_quadrature(alpha: f64, param: QuadratureParam) -> Result<QuadratureScheme, SolveError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SolveError::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    let ab = alpha * (1.0 - alpha);
    let (k, step) = match param {
        QuadratureParam::Degree(k) if k > 0.0 => (k, PI / (2.0 * (ab * k).sqrt())),
        QuadratureParam::Step(s) if s > 0.0 => (PI * PI / (4.0 * ab * s * s), s),
        _ => return Err(SolveError::Config("quadrature parameter must be positive".into())),
    };
    let m = ceil_tol((1.0 - alpha) * k);
    let big_m = ceil_tol(alpha * k);
    let mut shifts = Vec::with_capacity(m + big_m + 1);
    let mut weights = Vec::with_capacity(m + big_m + 1);
    for l in -(m as i64)..=(big_m as i64) {
        let l = l as f64;
        shifts.push((-2.0 * l * step).exp());
        weights.push((2.0 * (alpha - 1.0) * l * step).exp());
    }
    Ok(QuadratureScheme {
        alpha,
        k,
        step,
        m,
        big_m,
        shifts,
        weights,
    })
}

impl QuadratureScheme {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Degree parameter; fractional when the scheme was built from a step.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn big_m(&self) -> usize {
        self.big_m
    }

    pub fn systems(&self) -> usize {
        self.m + self.big_m + 1
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        2.0 * self.step * (PI * self.alpha).sin() / PI
    }

    /// `Q_α(λ)`, the quadrature approximation of `λ^{-α}`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let s: f64 = self
            .shifts
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w / (lambda + s))
            .sum();
        self.scale() * s
    }
}
