use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fracpow_core::discretization::{Dimension, GridSpec, ModeIndex};
use fracpow_core::harness::{
    bound_summary, efficiency_crossover, parse_grid, parse_rhs, per_mode_error_curve, run_experiment, write_csv,
    ApproximantStore, Backend, CrossoverOptions, ExperimentConfig, MethodSpec, Reference,
};
use fracpow_core::rational::{
    bura_partial_fractions, default_cache_dir, error_function_roots, reciprocal_partial_fractions, RemezOptions,
    DEFAULT_PRECISION,
};
use fracpow_core::solvers::{Preconditioner, QuadratureParam};

/// Fractional diffusion solvers based on best uniform rational approximation.
#[derive(Parser)]
#[command(name = "fracpow", version)]
struct Cli {
    /// Approximant cache directory (default: $FRACPOW_CACHE_DIR or ./fracpow-cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Keep approximants in memory only.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Working precision in bits for the Remez algorithm.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best uniform rational approximants.
    Bura {
        #[command(subcommand)]
        command: BuraCommand,
    },
    /// Solve A^alpha u = f on one grid and report the error against the exact solution.
    Solve(SolveArgs),
    /// Per-mode error curves on a 1-D grid, as CSV.
    Curve(CurveArgs),
    /// Error bounds and the mu_1 window classification.
    Bounds(BoundsArgs),
    /// Run an experiment matrix from a TOML config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Smallest quadrature degree beating a BURA variant.
    Crossover(CrossoverArgs),
}

#[derive(Args)]
struct Exponent {
    /// Fractional power alpha; see the subcommand for the approximated exponent.
    #[arg(long, conflicts_with = "beta", required_unless_present = "beta")]
    alpha: Option<f64>,
    /// Approximated exponent beta of t^beta.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Subcommand)]
enum BuraCommand {
    /// Compute (or load) the approximant of t^(1-alpha), or of t^beta.
    Compute {
        #[command(flatten)]
        exponent: Exponent,
        #[arg(long)]
        k: usize,
        /// Denominator degree (default: k).
        #[arg(long)]
        m: Option<usize>,
        /// Also print the partial-fraction form.
        #[arg(long)]
        fractions: bool,
    },
    /// Sign-change roots of r - t^alpha for the approximant of t^alpha, or of t^beta.
    Roots {
        #[command(flatten)]
        exponent: Exponent,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodKind {
    Bura,
    Rbura,
    Quad,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Cg,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceArg {
    SpectralOracle,
    QuadratureFine,
    FineOracle,
}

impl From<ReferenceArg> for Reference {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::SpectralOracle => Reference::SpectralOracle,
            ReferenceArg::QuadratureFine => Reference::QuadratureFine,
            ReferenceArg::FineOracle => Reference::FineOracle,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: MethodKind,
    #[arg(long)]
    alpha: f64,
    /// BURA: (k,k); R-BURA: (k+1,k) unless --m is given; quadrature: degree k.
    #[arg(long)]
    k: f64,
    /// R-BURA denominator degree (k or k+1).
    #[arg(long)]
    m: Option<usize>,
    /// Grid as `1d:<n>` or `2d:<n>` interior nodes per direction.
    #[arg(long, default_value = "2d:255")]
    grid: String,
    /// checkerboard, cosine, cosine-noh, eigen:<i> or eigen:<i>,<j>.
    #[arg(long, default_value = "checkerboard")]
    rhs: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Cg)]
    backend: BackendArg,
    #[arg(long, value_enum, default_value_t = ReferenceArg::SpectralOracle)]
    reference: ReferenceArg,
    #[arg(long, default_value_t = 12)]
    fine_level: u32,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    no_preconditioner: bool,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    alpha: f64,
    /// Mesh size; the grid has round(1/h) - 1 interior nodes.
    #[arg(long)]
    h: f64,
    /// Methods such as `bura:7 rbura:8,7 quad:7`.
    #[arg(long, num_args = 1.., required = true)]
    methods: Vec<String>,
    /// Only the lowest N modes.
    #[arg(long)]
    modes: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "2d:255")]
    grid: String,
}

#[derive(Args)]
struct CrossoverArgs {
    #[arg(long)]
    alpha: f64,
    /// BURA variant, e.g. `bura:9` or `rbura:8,8`.
    #[arg(long)]
    variant: String,
    #[arg(long, default_value = "2d:1023")]
    grid: String,
    #[arg(long, default_value = "checkerboard")]
    rhs: String,
    #[arg(long, default_value_t = 100)]
    k_cap: usize,
    #[arg(long, value_enum, default_value_t = ReferenceArg::SpectralOracle)]
    reference: ReferenceArg,
}

fn store(cli: &Cli) -> ApproximantStore {
    let opts = RemezOptions::with_precision(cli.precision);
    if cli.no_cache {
        ApproximantStore::in_memory(opts)
    } else {
        ApproximantStore::new(opts, Some(cli.cache_dir.clone().unwrap_or_else(default_cache_dir)))
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = io::stdout();
    let mut out = out.lock();
    let st = store(&cli);
    match &cli.command {
        Command::Bura { command } => bura(command, &st, &mut out),
        Command::Solve(args) => solve(args, &st, &mut out),
        Command::Curve(args) => curve(args, &st, &mut out),
        Command::Bounds(args) => bounds(args, &st, &mut out),
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::load(config).with_context(|| format!("reading {}", config.display()))?;
            if cli.precision != DEFAULT_PRECISION {
                cfg.precision = cli.precision;
            }
            if cli.cache_dir.is_some() {
                cfg.cache_dir = cli.cache_dir.clone();
            }
            let st = if cli.no_cache {
                ApproximantStore::in_memory(RemezOptions::with_precision(cfg.precision))
            } else {
                cfg.store()
            };
            let report = run_experiment(&cfg, &st)?;
            write_csv(&report.rows, &mut out)?;
            if let Some(path) = report.csv_path {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Crossover(args) => {
            let grid = parse_grid(&args.grid)?;
            let rhs = parse_rhs(&args.rhs)?;
            let variant: MethodSpec = args.variant.parse()?;
            let opts = CrossoverOptions {
                k_cap: args.k_cap,
                reference: args.reference.into(),
                ..Default::default()
            };
            let c = efficiency_crossover(args.alpha, &variant, &grid, &rhs, &st, &opts)?;
            writeln!(out, "k,l2_rel")?;
            for (k, e) in &c.scanned {
                writeln!(out, "{k},{e:.5e}")?;
            }
            eprintln!(
                "{variant}: l2 {:.5e} with {} systems; quad:{} reaches {:.5e} with {} systems",
                c.variant_error, c.variant_systems, c.k, c.quad_error, c.quad_systems
            );
            Ok(())
        }
    }
}

fn resolve(exponent: &Exponent, bura_side: bool) -> f64 {
    match (exponent.alpha, exponent.beta) {
        (_, Some(b)) => b,
        (Some(a), None) if bura_side => 1.0 - a,
        (Some(a), None) => a,
        (None, None) => unreachable!("clap requires one of --alpha/--beta"),
    }
}

fn bura(cmd: &BuraCommand, st: &ApproximantStore, out: &mut impl Write) -> Result<()> {
    match cmd {
        BuraCommand::Compute {
            exponent,
            k,
            m,
            fractions,
        } => {
            let beta = resolve(exponent, true);
            let m = m.unwrap_or(*k);
            let r = st.get(beta, *k, m)?;
            writeln!(out, "beta = {beta}")?;
            writeln!(out, "degrees = ({k}, {m})")?;
            writeln!(out, "precision = {}", r.precision())?;
            writeln!(out, "error = {:.10e}", r.error_f64())?;
            writeln!(out, "extreme_points = {}", r.extreme_points().len())?;
            if *fractions {
                let form = if k == &m {
                    bura_partial_fractions(&r)?
                } else {
                    reciprocal_partial_fractions(&r)?
                };
                let f = form.to_f64();
                writeln!(out, "form = {:?}", f.provenance)?;
                if let Some(b) = f.constant {
                    writeln!(out, "constant = {b:.16e}")?;
                }
                writeln!(out, "pole,coefficient")?;
                for (d, c) in f.poles.iter().zip(&f.coefficients) {
                    writeln!(out, "{d:.16e},{c:.16e}")?;
                }
            }
        }
        BuraCommand::Roots { exponent, k, m } => {
            let beta = resolve(exponent, false);
            let r = st.get(beta, *k, m.unwrap_or(*k))?;
            writeln!(out, "i,xi")?;
            for (i, x) in error_function_roots(&r)?.roots_f64().iter().enumerate() {
                writeln!(out, "{},{x:.6e}", i + 1)?;
            }
        }
    }
    Ok(())
}

fn solve(args: &SolveArgs, st: &ApproximantStore, out: &mut impl Write) -> Result<()> {
    let k = args.k;
    let int_k = || -> Result<usize> {
        if k.fract() != 0.0 || k < 1.0 {
            bail!("--k must be a positive integer for rational methods");
        }
        Ok(k as usize)
    };
    let method = match args.method {
        MethodKind::Bura => MethodSpec::Bura { k: int_k()? },
        MethodKind::Rbura => {
            let k = int_k()?;
            MethodSpec::Rbura {
                k: k + 1,
                m: args.m.unwrap_or(k),
            }
        }
        MethodKind::Quad => MethodSpec::Quad(QuadratureParam::Degree(k)),
    };
    let grid = parse_grid(&args.grid)?;
    let mut cfg = ExperimentConfig::new(args.alpha, vec![method], vec![grid], parse_rhs(&args.rhs)?);
    cfg.name = "solve".into();
    cfg.backend = match args.backend {
        BackendArg::Cg => Backend::Cg,
        BackendArg::Spectral => Backend::Spectral,
    };
    cfg.reference = args.reference.into();
    cfg.fine_level = args.fine_level;
    cfg.solver.tol = args.tol;
    cfg.solver.max_iter = args.max_iter;
    cfg.solver.workers = args.workers;
    if args.no_preconditioner {
        cfg.solver.preconditioner = Preconditioner::None;
    }
    let report = run_experiment(&cfg, st)?;
    write_csv(&report.rows, out)?;
    if report.rows.iter().any(|r| !r.is_ok()) {
        bail!("solve failed: {}", report.rows[0].status);
    }
    Ok(())
}

fn curve(args: &CurveArgs, st: &ApproximantStore, out: &mut impl Write) -> Result<()> {
    if !(args.h > 0.0 && args.h < 1.0) {
        bail!("--h must lie in (0, 1)");
    }
    let n = (1.0 / args.h).round() as usize - 1;
    let grid = GridSpec::new(Dimension::One, n)?;
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse())
        .collect::<Result<Vec<MethodSpec>, _>>()?;
    writeln!(out, "method,k,m,i,lambda,mu,error")?;
    for m in &methods {
        let (k, mm) = m.degree_columns(args.alpha);
        for e in per_mode_error_curve(args.alpha, m, &grid, st, args.modes)? {
            let i = match e.index {
                ModeIndex::One(i) => i,
                ModeIndex::Two(..) => unreachable!("1-D grid"),
            };
            writeln!(
                out,
                "{},{k},{mm},{i},{:.5e},{:.5e},{:.5e}",
                m.id(),
                e.lambda,
                e.mu,
                e.error
            )?;
        }
    }
    Ok(())
}

fn bounds(args: &BoundsArgs, st: &ApproximantStore, out: &mut impl Write) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let b = bound_summary(args.alpha, args.k, &grid, st)?;
    writeln!(out, "C = {:.6e}", b.c)?;
    writeln!(out, "lambda1 = {:.6e}", b.lambda1)?;
    writeln!(out, "mu1 = {:.6e}", b.mu1)?;
    writeln!(out, "E_bura = {:.6e}", b.e_bura)?;
    writeln!(out, "E_rbura = {:.6e}", b.e_rbura)?;
    writeln!(out, "bura_bound = {:.6e}", b.bura_bound)?;
    writeln!(out, "rbura_window_bound = {:.6e}", b.rbura_window_bound)?;
    writeln!(out, "rbura_degenerate_bound = {:.6e}", b.rbura_degenerate_bound)?;
    writeln!(out, "mu1_window = {:?}", b.window.window)?;
    writeln!(
        out,
        "nearest_root = xi{} = {:.6e} (|ln ratio| {:.3})",
        b.window.nearest_root.0, b.window.nearest_root.1, b.window.log_distance
    )?;
    match b.rbura_bound {
        Some(v) => writeln!(out, "rbura_bound = {v:.6e}")?,
        None => writeln!(out, "rbura_bound = none (mu1 in a gap where r < t^alpha)")?,
    }
    writeln!(out, "bura_asymptotic = {:.6e}", b.bura_asymptotic)?;
    writeln!(out, "rbura_asymptotic = {:.6e}", b.rbura_asymptotic)?;
    writeln!(out, "quad_asymptotic = {:.6e}", b.quad_asymptotic)?;
    Ok(())
}
