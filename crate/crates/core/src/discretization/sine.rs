//! Orthonormal discrete sine transforms (DST-I) diagonalising the
//! finite-difference Laplacians.
//!
//! The transform matrix `S_{jk} = sqrt(2h) sin(jkπh)` is symmetric and its own
//! inverse, and its columns are exactly the oracle eigenvectors. A length-`n`
//! DST-I is computed through a complex FFT of length `2(n+1)` applied to the
//! odd extension of the input.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Dimension, GridSpec};

#[derive(Clone)]
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("n", &self.n).finish()
    }
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Self {
            n,
            fft,
            scale: (2.0 / (n as f64 + 1.0)).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place orthonormal DST-I of `data` (length `n`).
    pub fn apply(&self, data: &mut [f64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * (self.n + 1)];
        self.apply_with(data, &mut buf);
    }

    fn apply_with(&self, data: &mut [f64], buf: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        buf[0] = Complex64::new(0.0, 0.0);
        buf[n + 1] = Complex64::new(0.0, 0.0);
        for j in 0..n {
            buf[j + 1] = Complex64::new(data[j], 0.0);
            buf[2 * n + 1 - j] = Complex64::new(-data[j], 0.0);
        }
        self.fft.process(buf);
        // FFT of the odd extension is -2i * sum_j x_j sin(pi j k/(n+1)).
        for k in 0..n {
            data[k] = -0.5 * buf[k + 1].im * self.scale;
        }
    }

    /// Applies the transform to each contiguous row of length `n`.
    fn apply_rows(&self, data: &mut [f64]) {
        data.par_chunks_mut(self.n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); 2 * (self.n + 1)],
            |buf, row| self.apply_with(row, buf),
        );
    }
}

fn transpose(n: usize, data: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(col, dst)| {
        for (row, slot) in dst.iter_mut().enumerate() {
            *slot = data[row * n + col];
        }
    });
    out
}

/// Orthonormal sine transform of a grid function in 1-D or 2-D (lexicographic
/// ordering, x fastest). Involutory: applying it twice returns the input.
pub fn sine_transform(grid: &GridSpec, values: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let dst = SineTransform::new(n);
    let mut data = values.to_vec();
    match grid.dimension() {
        Dimension::One => dst.apply(&mut data),
        Dimension::Two => {
            dst.apply_rows(&mut data);
            let mut t = transpose(n, &data);
            dst.apply_rows(&mut t);
            data = transpose(n, &t);
        }
    }
    data
}

/// Computes `g(A) f` for the grid Laplacian `A` through its eigen-expansion:
/// transform, scale mode `(i[, j])` by `g(λ)`, transform back.
pub fn apply_spectral<G>(grid: &GridSpec, f: &[f64], g: G) -> Vec<f64>
where
    G: Fn(f64) -> f64 + Sync,
{
    let mut coeffs = sine_transform(grid, f);
    let lambdas = grid.axis_eigenvalues();
    let n = grid.n();
    match grid.dimension() {
        Dimension::One => {
            for (c, &lam) in coeffs.iter_mut().zip(&lambdas) {
                *c *= g(lam);
            }
        }
        Dimension::Two => {
            coeffs.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
                for (i, c) in row.iter_mut().enumerate() {
                    *c *= g(lambdas[i] + lambdas[j]);
                }
            });
        }
    }
    sine_transform(grid, &coeffs)
}
