//! Finite-difference Laplacians on the unit interval and unit square with
//! homogeneous Dirichlet data, together with their closed-form eigenpairs.

mod sine;
mod sparse;

use std::f64::consts::PI;
use std::io::{self, Write};
use std::ops::{Deref, DerefMut};

use thiserror::Error;

pub use sine::{apply_spectral, sine_transform, SineTransform};
pub use sparse::SparseSymMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one interior point per direction")]
    EmptyGrid,
    #[error("grid with n = {n} in {dim} dimensions overflows the unknown count")]
    Overflow { n: usize, dim: usize },
    #[error("mode index {index:?} outside 1..={n}")]
    ModeOutOfRange { index: ModeIndex, n: usize },
    #[error("mode index {0:?} does not match the grid dimension")]
    ModeDimension(ModeIndex),
    #[error("right-hand side `{kind}` is not defined for {dim}-D grids")]
    RhsDimension { kind: &'static str, dim: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("negative reaction coefficient {value} at node {index}")]
    NegativeReaction { index: usize, value: f64 },
    #[error("malformed matrix: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

/// Uniform grid on `(0,1)^d` with `n` interior nodes per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dim: Dimension,
    n: usize,
    unknowns: usize,
}

impl GridSpec {
    pub fn new(dim: Dimension, n: usize) -> Result<Self, GridError> {
        if n == 0 {
            return Err(GridError::EmptyGrid);
        }
        let unknowns = match dim {
            Dimension::One => Some(n),
            Dimension::Two => n.checked_mul(n),
        }
        .filter(|&u| u.checked_mul(5).is_some())
        .ok_or(GridError::Overflow { n, dim: dim.as_usize() })?;
        Ok(Self { dim, n, unknowns })
    }

    pub fn one_d(n: usize) -> Result<Self, GridError> {
        Self::new(Dimension::One, n)
    }

    pub fn two_d(n: usize) -> Result<Self, GridError> {
        Self::new(Dimension::Two, n)
    }

    /// Grid with mesh size `2^-level`.
    pub fn dyadic(dim: Dimension, level: u32) -> Result<Self, GridError> {
        Self::new(dim, (1usize << level) - 1)
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unknowns `N`.
    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// Mesh size `1/(n+1)`.
    pub fn h(&self) -> f64 {
        1.0 / (self.n as f64 + 1.0)
    }

    /// Stencil scaling `(n+1)^2 = h^-2`.
    pub fn scale(&self) -> f64 {
        let np1 = self.n as f64 + 1.0;
        np1 * np1
    }

    /// One-dimensional eigenvalues `(4/h²) sin²(iπh/2)`, `i = 1..=n`.
    pub fn axis_eigenvalues(&self) -> Vec<f64> {
        let np1 = self.n as f64 + 1.0;
        (1..=self.n)
            .map(|i| {
                let s = (i as f64 * PI / (2.0 * np1)).sin();
                4.0 * self.scale() * s * s
            })
            .collect()
    }

    /// Smallest eigenvalue of the grid Laplacian.
    pub fn lambda_min(&self) -> f64 {
        let s = (PI * self.h() / 2.0).sin();
        self.dim.as_usize() as f64 * 4.0 * self.scale() * s * s
    }

    /// Largest eigenvalue of the grid Laplacian.
    pub fn lambda_max(&self) -> f64 {
        let s = (self.n as f64 * PI * self.h() / 2.0).sin();
        self.dim.as_usize() as f64 * 4.0 * self.scale() * s * s
    }

    /// Interior node coordinates in storage order.
    pub fn nodes(&self) -> Vec<(f64, Option<f64>)> {
        let h = self.h();
        match self.dim {
            Dimension::One => (1..=self.n).map(|i| (i as f64 * h, None)).collect(),
            Dimension::Two => (1..=self.n)
                .flat_map(|j| (1..=self.n).map(move |i| (i as f64 * h, Some(j as f64 * h))))
                .collect(),
        }
    }
}

/// Values attached to the interior nodes, lexicographically ordered with x
/// running fastest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `index,x[,y],value` rows for the given grid.
    pub fn write_csv<W: Write>(&self, grid: &GridSpec, mut w: W) -> io::Result<()> {
        if self.values.len() != grid.unknowns() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "grid/function size mismatch",
            ));
        }
        match grid.dimension() {
            Dimension::One => writeln!(w, "index,x,value")?,
            Dimension::Two => writeln!(w, "index,x,y,value")?,
        }
        for (idx, ((x, y), v)) in grid.nodes().into_iter().zip(&self.values).enumerate() {
            match y {
                None => writeln!(w, "{idx},{x:.17e},{v:.17e}")?,
                Some(y) => writeln!(w, "{idx},{x:.17e},{y:.17e},{v:.17e}")?,
            }
        }
        Ok(())
    }
}

impl Deref for GridFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for GridFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub index: ModeIndex,
    pub lambda: f64,
    pub psi: GridFunction,
}

/// Five-point (2-D) or three-point (1-D) Laplacian scaled by `(n+1)^2`.
pub fn assemble_laplacian(grid: &GridSpec) -> SparseSymMatrix {
    let n = grid.n();
    let s = grid.scale();
    let size = grid.unknowns();
    let mut row_ptr = Vec::with_capacity(size + 1);
    let mut col_idx = Vec::with_capacity(5 * size);
    let mut values = Vec::with_capacity(5 * size);
    row_ptr.push(0);
    match grid.dimension() {
        Dimension::One => {
            for i in 0..n {
                if i > 0 {
                    col_idx.push(i - 1);
                    values.push(-s);
                }
                col_idx.push(i);
                values.push(2.0 * s);
                if i + 1 < n {
                    col_idx.push(i + 1);
                    values.push(-s);
                }
                row_ptr.push(col_idx.len());
            }
        }
        Dimension::Two => {
            for q in 0..n {
                for p in 0..n {
                    let idx = q * n + p;
                    let mut push = |c: usize, v: f64| {
                        col_idx.push(c);
                        values.push(v);
                    };
                    if q > 0 {
                        push(idx - n, -s);
                    }
                    if p > 0 {
                        push(idx - 1, -s);
                    }
                    push(idx, 4.0 * s);
                    if p + 1 < n {
                        push(idx + 1, -s);
                    }
                    if q + 1 < n {
                        push(idx + n, -s);
                    }
                    row_ptr.push(col_idx.len());
                }
            }
        }
    }
    SparseSymMatrix::from_csr(size, row_ptr, col_idx, values).expect("stencil assembly yields a valid symmetric matrix")
}

/// `‖A‖∞`, the largest absolute row sum.
pub fn matrix_inf_norm(a: &SparseSymMatrix) -> f64 {
    a.inf_norm()
}

fn sine_mode(n: usize, i: usize) -> Vec<f64> {
    let np1 = n as f64 + 1.0;
    let kappa = (2.0 / np1).sqrt();
    (1..=n)
        .map(|j| kappa * (i as f64 * j as f64 * PI / np1).sin())
        .collect()
}

fn check_mode(n: usize, i: usize, index: ModeIndex) -> Result<(), GridError> {
    if i == 0 || i > n {
        return Err(GridError::ModeOutOfRange { index, n });
    }
    Ok(())
}

/// Closed-form eigenpair of the grid Laplacian, normalised in ℓ2.
pub fn eigen_oracle(grid: &GridSpec, index: ModeIndex) -> Result<EigenPair, GridError> {
    let n = grid.n();
    let axis = |i: usize| {
        let s = (i as f64 * PI / (2.0 * (n as f64 + 1.0))).sin();
        4.0 * grid.scale() * s * s
    };
    match (grid.dimension(), index) {
        (Dimension::One, ModeIndex::One(i)) => {
            check_mode(n, i, index)?;
            Ok(EigenPair {
                index,
                lambda: axis(i),
                psi: sine_mode(n, i).into(),
            })
        }
        (Dimension::Two, ModeIndex::Two(i, j)) => {
            check_mode(n, i, index)?;
            check_mode(n, j, index)?;
            let sx = sine_mode(n, i);
            let sy = sine_mode(n, j);
            let psi = sy
                .iter()
                .flat_map(|&b| sx.iter().map(move |&a| a * b))
                .collect::<Vec<_>>();
            Ok(EigenPair {
                index,
                lambda: axis(i) + axis(j),
                psi: psi.into(),
            })
        }
        _ => Err(GridError::ModeDimension(index)),
    }
}

/// Right-hand side families used in the experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsKind {
    /// `+1` where `(x-0.5)(y-0.5) > 0`, `-1` otherwise (including the lines
    /// `x = 0.5`, `y = 0.5`).
    Checkerboard,
    /// `cos(πhx) cos(πhy)`, evaluated literally with the mesh size inside.
    Cosine,
    /// `cos(πx) cos(πy)`.
    CosineNoH,
    /// A normalised oracle eigenvector.
    Eigen(ModeIndex),
    /// Explicit nodal values.
    Custom(Vec<f64>),
}

impl RhsKind {
    pub fn name(&self) -> &'static str {
        match self {
            RhsKind::Checkerboard => "checkerboard",
            RhsKind::Cosine => "cosine",
            RhsKind::CosineNoH => "cosine-noh",
            RhsKind::Eigen(_) => "eigen",
            RhsKind::Custom(_) => "custom",
        }
    }

    /// Label including the mode index for eigen right-hand sides.
    pub fn label(&self) -> String {
        match self {
            RhsKind::Eigen(ModeIndex::One(i)) => format!("eigen-{i}"),
            RhsKind::Eigen(ModeIndex::Two(i, j)) => format!("eigen-{i}-{j}"),
            other => other.name().to_string(),
        }
    }
}

pub fn rhs_generate(grid: &GridSpec, kind: &RhsKind) -> Result<GridFunction, GridError> {
    let h = grid.h();
    let two_d_only = |kind: &RhsKind| {
        if grid.dimension() != Dimension::Two {
            Err(GridError::RhsDimension {
                kind: kind.name(),
                dim: 1,
            })
        } else {
            Ok(())
        }
    };
    let nodal = |f: &dyn Fn(f64, f64) -> f64| -> GridFunction {
        grid.nodes()
            .into_iter()
            .map(|(x, y)| f(x, y.unwrap_or(0.0)))
            .collect::<Vec<_>>()
            .into()
    };
    match kind {
        RhsKind::Checkerboard => {
            two_d_only(kind)?;
            Ok(nodal(&|x, y| if (x - 0.5) * (y - 0.5) > 0.0 { 1.0 } else { -1.0 }))
        }
        RhsKind::Cosine => {
            two_d_only(kind)?;
            Ok(nodal(&|x, y| (PI * h * x).cos() * (PI * h * y).cos()))
        }
        RhsKind::CosineNoH => {
            two_d_only(kind)?;
            Ok(nodal(&|x, y| (PI * x).cos() * (PI * y).cos()))
        }
        RhsKind::Eigen(index) => Ok(eigen_oracle(grid, *index)?.psi),
        RhsKind::Custom(values) => {
            if values.len() != grid.unknowns() {
                return Err(GridError::Length {
                    expected: grid.unknowns(),
                    got: values.len(),
                });
            }
            Ok(values.clone().into())
        }
    }
}

/// `A + diag(q)` for a non-negative nodal reaction coefficient `q`.
pub fn add_diagonal_reaction(a: &SparseSymMatrix, q: &GridFunction) -> Result<SparseSymMatrix, GridError> {
    if q.len() != a.dim() {
        return Err(GridError::Length {
            expected: a.dim(),
            got: q.len(),
        });
    }
    if let Some((index, &value)) = q.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(GridError::NegativeReaction { index, value });
    }
    Ok(a.add_to_diagonal(q))
}

#[cfg(test)]
mod tests;
