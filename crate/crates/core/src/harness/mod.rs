//! Experiment engine: method selection, approximant store, per-mode error
//! curves, bound calculators, experiment runs and crossover scans.

mod bounds;
mod experiment;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::discretization::{Dimension, GridError, GridSpec, ModeIndex, RhsKind};
use crate::rational::{
    bura_partial_fractions, cache_load, cache_store, compute_bura, reciprocal_partial_fractions, ApproxError,
    RationalMinimax, RemezOptions,
};
use crate::solvers::{build_quadrature, QuadratureParam, ShiftedSum, SolveError};

pub use bounds::{
    bound_summary, per_mode_error_curve, rbura_bound, validate_mu1_window, BoundSummary, ModeError, Mu1Classification,
    Mu1Window,
};
pub use experiment::{
    efficiency_crossover, run_experiment, write_csv, Backend, Crossover, CrossoverOptions, ExperimentConfig,
    ExperimentReport, Reference, ReportRow, CSV_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no quadrature degree up to {cap} beats the target error {target:.5e} (best {best:.5e})")]
    ScanCap { cap: usize, target: f64, best: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A solution method with its degree parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    /// `(k, k)` approximant of `t^{1-α}`.
    Bura {
        k: usize,
    },
    /// Reciprocal of a `(k, m)` approximant of `t^α`, `m ∈ {k-1, k}`.
    Rbura {
        k: usize,
        m: usize,
    },
    Quad(QuadratureParam),
}

impl MethodSpec {
    pub fn id(&self) -> &'static str {
        match self {
            MethodSpec::Bura { .. } => "bura",
            MethodSpec::Rbura { .. } => "rbura",
            MethodSpec::Quad(_) => "quad",
        }
    }

    /// The `(β, k, m)` key of the approximant this method needs, if any.
    pub fn approximant_key(&self, alpha: f64) -> Option<(f64, usize, usize)> {
        match *self {
            MethodSpec::Bura { k } => Some((1.0 - alpha, k, k)),
            MethodSpec::Rbura { k, m } => Some((alpha, k, m)),
            MethodSpec::Quad(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match *self {
            MethodSpec::Bura { k: 0 } => Err(HarnessError::Config("BURA degree must be positive".into())),
            MethodSpec::Rbura { k, m } if k == 0 || !(m == k || m + 1 == k) => Err(HarnessError::Config(format!(
                "R-BURA degrees ({k},{m}) must be (m+1,m) or (m,m) with k ≥ 1"
            ))),
            MethodSpec::Quad(QuadratureParam::Degree(k) | QuadratureParam::Step(k)) if !(k > 0.0 && k.is_finite()) => {
                Err(HarnessError::Config(format!(
                    "quadrature parameter {k} must be positive"
                )))
            }
            _ => Ok(()),
        }
    }

    /// The `k` and `m` columns of a report row.
    pub fn degree_columns(&self, alpha: f64) -> (String, String) {
        match *self {
            MethodSpec::Bura { k } => (k.to_string(), k.to_string()),
            MethodSpec::Rbura { k, m } => (k.to_string(), m.to_string()),
            MethodSpec::Quad(QuadratureParam::Degree(k)) => (fmt_degree(k), String::new()),
            MethodSpec::Quad(p @ QuadratureParam::Step(_)) => match build_quadrature(alpha, p) {
                Ok(s) => (format!("{:.5e}", s.k()), String::new()),
                Err(_) => (String::new(), String::new()),
            },
        }
    }
}

fn fmt_degree(k: f64) -> String {
    if k.fract() == 0.0 && k.abs() < 1e15 {
        format!("{}", k as i64)
    } else {
        format!("{k:.5e}")
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Bura { k } => write!(f, "bura:{k}"),
            MethodSpec::Rbura { k, m } => write!(f, "rbura:{k},{m}"),
            MethodSpec::Quad(QuadratureParam::Degree(k)) => write!(f, "quad:{k}"),
            MethodSpec::Quad(QuadratureParam::Step(s)) => write!(f, "quad-step:{s}"),
        }
    }
}

/// Parses `bura:7`, `bura:7,7`, `rbura:8,7`, `quad:7` and `quad-step:0.3333`.
impl FromStr for MethodSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("cannot parse method `{s}`"));
        let (name, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let ints: Vec<usize> = args
            .split(',')
            .map(|a| a.trim().parse().ok())
            .collect::<Option<Vec<usize>>>()
            .unwrap_or_default();
        let spec = match (name.trim(), ints.as_slice()) {
            ("bura", [k]) => MethodSpec::Bura { k: *k },
            ("bura", [k, m]) if k == m => MethodSpec::Bura { k: *k },
            ("rbura", [k, m]) => MethodSpec::Rbura { k: *k, m: *m },
            ("rbura", [k]) => MethodSpec::Rbura { k: *k + 1, m: *k },
            ("quad", _) => MethodSpec::Quad(QuadratureParam::Degree(args.trim().parse().map_err(|_| bad())?)),
            ("quad-step", _) => MethodSpec::Quad(QuadratureParam::Step(args.trim().parse().map_err(|_| bad())?)),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses `1d:999` / `2d:255` (interior nodes per direction).
pub fn parse_grid(s: &str) -> Result<GridSpec, HarnessError> {
    let bad = || HarnessError::Config(format!("cannot parse grid `{s}`, expected `1d:<n>` or `2d:<n>`"));
    let (dim, n) = s.trim().split_once(':').ok_or_else(bad)?;
    let dim = match dim.trim() {
        "1d" => Dimension::One,
        "2d" => Dimension::Two,
        _ => return Err(bad()),
    };
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok(GridSpec::new(dim, n)?)
}

/// Parses `checkerboard`, `cosine`, `cosine-noh`, `eigen:3` and `eigen:2,5`.
pub fn parse_rhs(s: &str) -> Result<RhsKind, HarnessError> {
    let s = s.trim();
    match s {
        "checkerboard" => return Ok(RhsKind::Checkerboard),
        "cosine" => return Ok(RhsKind::Cosine),
        "cosine-noh" => return Ok(RhsKind::CosineNoH),
        _ => {}
    }
    let bad = || HarnessError::Config(format!("unknown right-hand side `{s}`"));
    let args = s.strip_prefix("eigen:").ok_or_else(bad)?;
    let idx: Vec<usize> = args
        .split(',')
        .map(|a| a.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match idx.as_slice() {
        [i] => Ok(RhsKind::Eigen(ModeIndex::One(*i))),
        [i, j] => Ok(RhsKind::Eigen(ModeIndex::Two(*i, *j))),
        _ => Err(bad()),
    }
}

/// `‖A‖∞` of the assembled grid Laplacian, in closed form.
pub fn grid_inf_norm(grid: &GridSpec) -> f64 {
    let per_axis = match grid.n() {
        1 => 2.0,
        2 => 3.0,
        _ => 4.0,
    };
    per_axis * grid.dimension().as_usize() as f64 * grid.scale()
}

type Key = (u64, usize, usize);

/// Approximants by `(β, k, m)`: memory first, then the disk cache, then a
/// fresh Remez run (whose result is written back to disk).
#[derive(Debug)]
pub struct ApproximantStore {
    options: RemezOptions,
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<Key, Arc<RationalMinimax>>>,
}

impl ApproximantStore {
    pub fn new(options: RemezOptions, dir: Option<PathBuf>) -> Self {
        Self {
            options,
            dir,
            memory: Mutex::new(HashMap::new()),
        }
    }

    pub fn in_memory(options: RemezOptions) -> Self {
        Self::new(options, None)
    }

    pub fn options(&self) -> &RemezOptions {
        &self.options
    }

    pub fn cache_dir(&self) -> Option<&PathBuf> {
        self.dir.as_ref()
    }

    pub fn insert(&self, r: RationalMinimax) -> Arc<RationalMinimax> {
        let (k, m) = r.degrees();
        let r = Arc::new(r);
        self.memory
            .lock()
            .unwrap()
            .insert((r.beta().to_bits(), k, m), r.clone());
        r
    }

    pub fn get(&self, beta: f64, k: usize, m: usize) -> Result<Arc<RationalMinimax>, ApproxError> {
        let key = (beta.to_bits(), k, m);
        if let Some(r) = self.memory.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let prec = self.options.precision;
        if let Some(dir) = &self.dir {
            match cache_load(dir, beta, k, m, prec) {
                Ok(r) => return Ok(self.insert(r)),
                Err(ApproxError::CacheMiss(_)) => {}
                Err(e) => log::warn!("ignoring cached approximant ({beta}, {k}, {m}): {e}"),
            }
        }
        log::info!("computing the ({k},{m}) approximant of t^{beta} at {prec} bits");
        let r = compute_bura(beta, k, m, &self.options)?;
        if let Some(dir) = &self.dir {
            if let Err(e) = std::fs::create_dir_all(dir)
                .map_err(ApproxError::from)
                .and_then(|_| cache_store(dir, &r))
            {
                log::warn!("could not cache approximant ({beta}, {k}, {m}): {e}");
            }
        }
        Ok(self.insert(r))
    }

    /// Resolves all keys, computing missing ones concurrently.
    pub fn prefetch(&self, keys: &[(f64, usize, usize)]) -> Result<(), ApproxError> {
        keys.par_iter()
            .try_for_each(|&(beta, k, m)| self.get(beta, k, m).map(|_| ()))
    }
}

/// The shifted-system expansion of `method` on a grid with `‖A‖∞ = c`.
pub fn method_sum(
    alpha: f64,
    method: &MethodSpec,
    c: f64,
    store: &ApproximantStore,
) -> Result<ShiftedSum, HarnessError> {
    method.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(match *method {
        MethodSpec::Bura { k } => {
            let r = store.get(1.0 - alpha, k, k)?;
            ShiftedSum::bura(alpha, c, &bura_partial_fractions(&r)?.to_f64())?
        }
        MethodSpec::Rbura { k, m } => {
            let r = store.get(alpha, k, m)?;
            ShiftedSum::rbura(alpha, c, &reciprocal_partial_fractions(&r)?.to_f64())?
        }
        MethodSpec::Quad(p) => ShiftedSum::quadrature(&build_quadrature(alpha, p)?),
    })
}

#[cfg(test)]
mod tests;
