//! Experiment matrix runs, CSV output and efficiency crossover scans.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use super::{grid_inf_norm, method_sum, parse_grid, parse_rhs, ApproximantStore, HarnessError, MethodSpec};
use crate::discretization::{assemble_laplacian, rhs_generate, Dimension, GridSpec, RhsKind, SparseSymMatrix};
use crate::rational::{default_cache_dir, RemezOptions, DEFAULT_PRECISION};
use crate::solvers::{
    apply_shifted_sum_spectral, solve_shifted_sum, solve_spectral, Preconditioner, QuadratureParam, ShiftedSolveConfig,
    ShiftedSum, DEFAULT_ORACLE_CAP,
};

pub const CSV_HEADER: [&str; 11] = [
    "method", "alpha", "k", "m", "h", "rhs", "l2_rel", "linf_rel", "systems", "seconds", "status",
];

/// What each computed solution is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Exact discrete solution on the same mesh.
    #[default]
    SpectralOracle,
    /// Quadrature with step `k′ = 1/3` on the same mesh.
    QuadratureFine,
    /// Exact discrete solution on the nested mesh `h = 2^-fine_level`,
    /// sampled at the coarse nodes.
    FineOracle,
}

/// How the shifted systems are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Preconditioned CG on the assembled matrix.
    #[default]
    Cg,
    /// Exact application in the sine eigenbasis.
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub alpha: f64,
    pub methods: Vec<MethodSpec>,
    pub grids: Vec<GridSpec>,
    pub rhs: RhsKind,
    pub solver: ShiftedSolveConfig,
    pub backend: Backend,
    pub reference: Reference,
    pub fine_level: u32,
    pub output_dir: Option<PathBuf>,
    pub precision: u32,
    pub cache_dir: Option<PathBuf>,
    /// Write wall times; when off the `seconds` column is left empty so that
    /// repeated runs are byte-identical.
    pub timing: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    alpha: f64,
    methods: Vec<String>,
    grids: Vec<String>,
    rhs: String,
    reference: Option<Reference>,
    fine_level: Option<u32>,
    backend: Option<Backend>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    preconditioner: Option<Preconditioner>,
    workers: Option<usize>,
    output_dir: Option<PathBuf>,
    precision: Option<u32>,
    cache_dir: Option<PathBuf>,
    timing: Option<bool>,
}

impl ExperimentConfig {
    pub fn new(alpha: f64, methods: Vec<MethodSpec>, grids: Vec<GridSpec>, rhs: RhsKind) -> Self {
        Self {
            name: "experiment".into(),
            alpha,
            methods,
            grids,
            rhs,
            solver: ShiftedSolveConfig::default(),
            backend: Backend::default(),
            reference: Reference::default(),
            fine_level: 12,
            output_dir: None,
            precision: DEFAULT_PRECISION,
            cache_dir: None,
            timing: true,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let methods = raw
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<MethodSpec>, _>>()?;
        let grids = raw.grids.iter().map(|g| parse_grid(g)).collect::<Result<Vec<_>, _>>()?;
        let mut cfg = Self::new(raw.alpha, methods, grids, parse_rhs(&raw.rhs)?);
        if let Some(name) = raw.name {
            cfg.name = name;
        }
        let defaults = ShiftedSolveConfig::default();
        cfg.solver = ShiftedSolveConfig {
            tol: raw.tol.unwrap_or(defaults.tol),
            max_iter: raw.max_iter,
            preconditioner: raw.preconditioner.unwrap_or(defaults.preconditioner),
            workers: raw.workers,
        };
        cfg.reference = raw.reference.unwrap_or_default();
        cfg.backend = raw.backend.unwrap_or_default();
        cfg.fine_level = raw.fine_level.unwrap_or(cfg.fine_level);
        cfg.output_dir = raw.output_dir;
        cfg.precision = raw.precision.unwrap_or(cfg.precision);
        cfg.cache_dir = raw.cache_dir;
        cfg.timing = raw.timing.unwrap_or(true);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.methods.is_empty() || self.grids.is_empty() {
            return Err(HarnessError::Config("need at least one method and one grid".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        self.solver.validate()?;
        if self.reference == Reference::FineOracle && !(1..=24).contains(&self.fine_level) {
            return Err(HarnessError::Config(format!(
                "fine level {} outside 1..=24",
                self.fine_level
            )));
        }
        Ok(())
    }

    /// Store using the configured precision and cache directory, falling back
    /// to the default cache location.
    pub fn store(&self) -> ApproximantStore {
        let dir = self.cache_dir.clone().unwrap_or_else(default_cache_dir);
        ApproximantStore::new(RemezOptions::with_precision(self.precision), Some(dir))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub alpha: f64,
    pub k: String,
    pub m: String,
    pub h: f64,
    pub rhs: String,
    pub l2_rel: Option<f64>,
    pub linf_rel: Option<f64>,
    pub systems: Option<usize>,
    pub seconds: Option<f64>,
    pub status: String,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub csv_path: Option<PathBuf>,
}

fn sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.5e}")).unwrap_or_default()
}

/// Writes `rows` with the fixed header and LF line endings.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            sci(Some(r.alpha)),
            r.k.clone(),
            r.m.clone(),
            sci(Some(r.h)),
            r.rhs.clone(),
            sci(r.l2_rel),
            sci(r.linf_rel),
            r.systems.map(|s| s.to_string()).unwrap_or_default(),
            sci(r.seconds),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Applies `sum` to `f` with the chosen backend; returns the solution and
/// the wall time.
fn apply(
    backend: Backend,
    grid: &GridSpec,
    matrix: &mut Option<SparseSymMatrix>,
    f: &[f64],
    sum: &ShiftedSum,
    cfg: &ShiftedSolveConfig,
) -> Result<(Vec<f64>, f64), HarnessError> {
    match backend {
        Backend::Cg => {
            let a = matrix.get_or_insert_with(|| assemble_laplacian(grid));
            let res = solve_shifted_sum(a, f, sum, cfg)?;
            Ok((res.solution.into_vec(), res.seconds))
        }
        Backend::Spectral => {
            let start = Instant::now();
            let u = apply_shifted_sum_spectral(grid, f, sum).into_vec();
            Ok((u, start.elapsed().as_secs_f64()))
        }
    }
}

/// Exact solution on the nested grid `h = 2^-level`, sampled at the nodes of `grid`.
pub(crate) fn fine_oracle(grid: &GridSpec, rhs: &RhsKind, alpha: f64, level: u32) -> Result<Vec<f64>, HarnessError> {
    if matches!(rhs, RhsKind::Eigen(_) | RhsKind::Custom(_)) {
        return Err(HarnessError::Config(format!(
            "fine-mesh reference is undefined for `{}` data",
            rhs.name()
        )));
    }
    let nf = (1usize << level) - 1;
    let n = grid.n();
    if !(nf + 1).is_multiple_of(n + 1) {
        return Err(HarnessError::Config(format!(
            "grid n = {n} is not nested in the level-{level} grid"
        )));
    }
    let stride = (nf + 1) / (n + 1);
    let fine = GridSpec::new(grid.dimension(), nf)?;
    let ff = rhs_generate(&fine, rhs)?;
    let uf = solve_spectral(&fine, &ff, alpha, usize::MAX)?;
    Ok(match grid.dimension() {
        Dimension::One => (1..=n).map(|i| uf[i * stride - 1]).collect(),
        Dimension::Two => {
            let mut out = Vec::with_capacity(n * n);
            for j in 1..=n {
                for i in 1..=n {
                    out.push(uf[(j * stride - 1) * nf + i * stride - 1]);
                }
            }
            out
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn reference_solution(
    reference: Reference,
    fine_level: u32,
    backend: Backend,
    grid: &GridSpec,
    matrix: &mut Option<SparseSymMatrix>,
    rhs: &RhsKind,
    f: &[f64],
    alpha: f64,
    cfg: &ShiftedSolveConfig,
) -> Result<Vec<f64>, HarnessError> {
    match reference {
        Reference::SpectralOracle => Ok(solve_spectral(grid, f, alpha, DEFAULT_ORACLE_CAP)?.into_vec()),
        Reference::QuadratureFine => {
            let sum = method_sum(
                alpha,
                &MethodSpec::Quad(QuadratureParam::Step(1.0 / 3.0)),
                grid_inf_norm(grid),
                &ApproximantStore::in_memory(RemezOptions::default()),
            )?;
            Ok(apply(backend, grid, matrix, f, &sum, cfg)?.0)
        }
        Reference::FineOracle => fine_oracle(grid, rhs, alpha, fine_level),
    }
}

/// `(‖u - v‖₂ / ‖f‖₂, ‖u - v‖∞ / ‖f‖∞)`.
pub(crate) fn relative_errors(u: &[f64], reference: &[f64], f: &[f64]) -> (f64, f64) {
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for (a, b) in u.iter().zip(reference) {
        let d = a - b;
        l2 += d * d;
        linf = linf.max(d.abs());
    }
    let f2 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let finf = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (l2.sqrt() / f2, linf / finf)
}

fn status_of(e: &HarnessError) -> String {
    format!("error: {e}").replace(['\n', '\r'], " ")
}

/// Runs every `(grid, method)` pair in order. A failing row is recorded
/// with its error message and the run continues.
pub fn run_experiment(config: &ExperimentConfig, store: &ApproximantStore) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let alpha = config.alpha;
    let keys: Vec<_> = config.methods.iter().filter_map(|m| m.approximant_key(alpha)).collect();
    if let Err(e) = store.prefetch(&keys) {
        log::warn!("prefetch failed, affected rows will report it: {e}");
    }
    let mut rows = Vec::with_capacity(config.grids.len() * config.methods.len());
    for grid in &config.grids {
        let mut matrix = None;
        let c = grid_inf_norm(grid);
        let prepared = rhs_generate(grid, &config.rhs)
            .map_err(HarnessError::from)
            .and_then(|f| {
                let r = reference_solution(
                    config.reference,
                    config.fine_level,
                    config.backend,
                    grid,
                    &mut matrix,
                    &config.rhs,
                    &f,
                    alpha,
                    &config.solver,
                )?;
                Ok((f, r))
            });
        for method in &config.methods {
            let (k, m) = method.degree_columns(alpha);
            let mut row = ReportRow {
                method: method.id().to_string(),
                alpha,
                k,
                m,
                h: grid.h(),
                rhs: config.rhs.label(),
                l2_rel: None,
                linf_rel: None,
                systems: None,
                seconds: None,
                status: "ok".into(),
            };
            let outcome = match &prepared {
                Ok((f, reference)) => method_sum(alpha, method, c, store).and_then(|sum| {
                    let (u, secs) = apply(config.backend, grid, &mut matrix, f, &sum, &config.solver)?;
                    Ok((relative_errors(&u, reference, f), sum.systems(), secs))
                }),
                Err(e) => Err(HarnessError::Config(format!("setup failed: {e}"))),
            };
            match outcome {
                Ok(((l2, linf), systems, secs)) => {
                    row.l2_rel = Some(l2);
                    row.linf_rel = Some(linf);
                    row.systems = Some(systems);
                    row.seconds = config.timing.then_some(secs);
                    log::info!("{method} h={:.3e}: l2 {l2:.4e}", grid.h());
                }
                Err(e) => {
                    log::warn!("{method} h={:.3e} failed: {e}", grid.h());
                    row.status = status_of(&e);
                }
            }
            rows.push(row);
        }
    }
    let csv_path = match &config.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", config.name));
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            fs::write(&path, buf)?;
            Some(path)
        }
        None => None,
    };
    Ok(ExperimentReport { rows, csv_path })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverOptions {
    pub k_start: usize,
    pub k_cap: usize,
    pub reference: Reference,
    pub fine_level: u32,
}

impl Default for CrossoverOptions {
    fn default() -> Self {
        Self {
            k_start: 1,
            k_cap: 100,
            reference: Reference::SpectralOracle,
            fine_level: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossover {
    pub variant_error: f64,
    pub variant_systems: usize,
    /// Smallest quadrature degree whose error is below the variant's.
    pub k: usize,
    pub quad_error: f64,
    pub quad_systems: usize,
    /// `(k, error)` for every scanned degree.
    pub scanned: Vec<(usize, f64)>,
}

/// Scans the quadrature degree upward until its relative ℓ2 error drops
/// below that of `variant`. Solutions are applied exactly in the sine basis.
pub fn efficiency_crossover(
    alpha: f64,
    variant: &MethodSpec,
    grid: &GridSpec,
    rhs: &RhsKind,
    store: &ApproximantStore,
    opts: &CrossoverOptions,
) -> Result<Crossover, HarnessError> {
    if matches!(variant, MethodSpec::Quad(_)) {
        return Err(HarnessError::Config("crossover variant must be BURA or R-BURA".into()));
    }
    let c = grid_inf_norm(grid);
    let f = rhs_generate(grid, rhs)?;
    let cfg = ShiftedSolveConfig::default();
    let mut none = None;
    let reference = reference_solution(
        opts.reference,
        opts.fine_level,
        Backend::Spectral,
        grid,
        &mut none,
        rhs,
        &f,
        alpha,
        &cfg,
    )?;
    let err_of = |sum: &ShiftedSum| relative_errors(&apply_shifted_sum_spectral(grid, &f, sum), &reference, &f).0;
    let vsum = method_sum(alpha, variant, c, store)?;
    let target = err_of(&vsum);
    let mut scanned = Vec::new();
    let mut best = f64::INFINITY;
    for k in opts.k_start.max(1)..=opts.k_cap {
        let sum = method_sum(alpha, &MethodSpec::Quad(QuadratureParam::Degree(k as f64)), c, store)?;
        let e = err_of(&sum);
        scanned.push((k, e));
        best = best.min(e);
        if e < target {
            return Ok(Crossover {
                variant_error: target,
                variant_systems: vsum.systems(),
                k,
                quad_error: e,
                quad_systems: sum.systems(),
                scanned,
            });
        }
    }
    Err(HarnessError::ScanCap {
        cap: opts.k_cap,
        target,
        best,
    })
}
