//! Best uniform rational approximation of `t^β` on `[0,1]` in arbitrary
//! precision, plus the partial-fraction and error-root data the solvers need.

mod bigreal;
mod cache;
mod poly;
mod remez;

use std::cmp::Ordering;
use std::path::PathBuf;

use rug::Float;

pub use bigreal::{BigReal, DEFAULT_PRECISION, MAX_PRECISION, MIN_PRECISION};
pub use cache::{cache_load, cache_path, cache_store, default_cache_dir, CACHE_DIR_ENV, CACHE_FORMAT};
pub use poly::{ChebyshevSeries, Polynomial, RootFailure};
pub use remez::{compute_bura, RemezOptions};

use bigreal::{abs, big, pow};

#[derive(Debug, thiserror::Error)]
pub enum ApproxError {
    #[error("exponent {0} outside (0, 1)")]
    InvalidBeta(f64),
    #[error("degrees ({k}, {m}) are neither diagonal nor upper diagonal")]
    UnsupportedDegrees { k: usize, m: usize },
    #[error("precision {0} bits is below the 128-bit floor")]
    PrecisionTooLow(u32),
    #[error("Remez exchange for ({k}, {m}) did not converge after {sweeps} sweeps; extrema spread {spread:.3e}")]
    NonConvergence {
        k: usize,
        m: usize,
        sweeps: usize,
        spread: f64,
    },
    #[error("denominator changed sign on [0,1] at {precision} bits; retry at {} bits", precision * 2)]
    PolesInInterval { precision: u32 },
    #[error("singular alternation system at {precision} bits; retry at {} bits", precision * 2)]
    Singular { precision: u32 },
    #[error("error curve has {found} sign runs, {needed} needed")]
    ExchangeFailed { found: usize, needed: usize },
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("approximant is outside the supported subclass: {0}")]
    OutOfSubclass(String),
    #[error("roots closer than the precision allows ({gap:.3e} relative at {precision} bits); retry at {} bits", precision * 2)]
    NearCoincidentRoots { gap: f64, precision: u32 },
    #[error("no cached approximant at {0}")]
    CacheMiss(PathBuf),
    #[error("corrupt cache entry {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ApproxError {
    /// Failures that more working precision can cure.
    pub fn wants_more_precision(&self) -> bool {
        matches!(
            self,
            ApproxError::PolesInInterval { .. }
                | ApproxError::Singular { .. }
                | ApproxError::NonConvergence { .. }
                | ApproxError::ExchangeFailed { .. }
                | ApproxError::NearCoincidentRoots { .. }
        )
    }
}

/// Certified best approximation `r = P/Q ≈ t^β` on `[0,1]`.
///
/// Both polynomials are stored in the Chebyshev basis of `[0,1]`; the
/// denominator is normalized so that its leading coefficient is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMinimax {
    beta: f64,
    degrees: (usize, usize),
    numerator: ChebyshevSeries,
    denominator: ChebyshevSeries,
    error: BigReal,
    extreme_points: Vec<BigReal>,
    signs: Vec<i8>,
}

impl RationalMinimax {
    pub(crate) fn from_parts(
        beta: f64,
        degrees: (usize, usize),
        p: ChebyshevSeries,
        q: ChebyshevSeries,
        points: Vec<BigReal>,
        errors: Vec<BigReal>,
    ) -> Result<Self, ApproxError> {
        let prec = p.precision();
        let lead = q.coeffs().last().unwrap().clone();
        let norm = |s: &ChebyshevSeries| {
            ChebyshevSeries::new(s.coeffs().iter().map(|c| Float::with_val(prec, c / &lead)).collect())
        };
        let error = errors
            .iter()
            .map(abs)
            .fold(big(prec, 0.0), |m, e| if e > m { e } else { m });
        let signs = errors
            .iter()
            .map(|e| if e.is_sign_negative() { -1 } else { 1 })
            .collect();
        let r = Self {
            beta,
            degrees,
            numerator: norm(&p),
            denominator: norm(&q),
            error,
            extreme_points: points,
            signs,
        };
        r.certify(1e-3)?;
        Ok(r)
    }

    pub(crate) fn from_stored(
        beta: f64,
        degrees: (usize, usize),
        numerator: Vec<BigReal>,
        denominator: Vec<BigReal>,
        error: BigReal,
        extreme_points: Vec<BigReal>,
        signs: Vec<i8>,
    ) -> Result<Self, ApproxError> {
        if numerator.len() != degrees.0 + 1 || denominator.len() != degrees.1 + 1 {
            return Err(ApproxError::Certification(
                "coefficient count does not match degrees".into(),
            ));
        }
        let r = Self {
            beta,
            degrees,
            numerator: ChebyshevSeries::new(numerator),
            denominator: ChebyshevSeries::new(denominator),
            error,
            extreme_points,
            signs,
        };
        r.certify(1e-3)?;
        Ok(r)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn degrees(&self) -> (usize, usize) {
        self.degrees
    }

    pub fn precision(&self) -> u32 {
        self.numerator.precision()
    }

    pub fn numerator(&self) -> &ChebyshevSeries {
        &self.numerator
    }

    pub fn denominator(&self) -> &ChebyshevSeries {
        &self.denominator
    }

    /// `E = max |r(t) - t^β|`.
    pub fn error(&self) -> &BigReal {
        &self.error
    }

    pub fn error_f64(&self) -> f64 {
        self.error.to_f64()
    }

    pub fn extreme_points(&self) -> &[BigReal] {
        &self.extreme_points
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn evaluate_big(&self, t: &BigReal) -> BigReal {
        let mut r = self.numerator.eval(t);
        r /= self.denominator.eval(t);
        r
    }

    /// `r(t)` computed in `BigReal` and rounded.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.evaluate_big(&big(self.precision(), t)).to_f64()
    }

    /// `r(t) - t^β`.
    pub fn error_at(&self, t: &BigReal) -> BigReal {
        let beta = big(self.precision(), self.beta);
        let mut e = self.evaluate_big(t);
        e -= pow(t, &beta);
        e
    }

    /// Re-checks the equioscillation data: `k+m+2` ordered points including 0
    /// and 1, alternating signs, magnitudes equal to `E` within `tol`, and a
    /// denominator free of zeros on `[0,1]`.
    pub fn certify(&self, tol: f64) -> Result<(), ApproxError> {
        let fail = |s: String| Err(ApproxError::Certification(s));
        let (k, m) = self.degrees;
        let n = k + m + 2;
        let pts = &self.extreme_points;
        if pts.len() != n || self.signs.len() != n {
            return fail(format!("{} extreme points, expected {n}", pts.len()));
        }
        if !pts[0].is_zero() || pts[n - 1] != 1 {
            return fail("endpoints 0 and 1 are not both extreme points".into());
        }
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return fail("extreme points are not increasing".into());
        }
        let e = self.error.to_f64();
        if !(e > 0.0) {
            return fail("non-positive error level".into());
        }
        for (i, (t, &s)) in pts.iter().zip(&self.signs).enumerate() {
            let err = self.error_at(t);
            let sign = if err.is_sign_negative() { -1 } else { 1 };
            if sign != s || (i > 0 && s == self.signs[i - 1]) {
                return fail(format!("sign alternation broken at extreme point {i}"));
            }
            if (abs(&err).to_f64() - e).abs() > tol * e {
                return fail(format!(
                    "|error| at extreme point {i} is {:.6e}, level {e:.6e}",
                    abs(&err).to_f64()
                ));
            }
        }
        let q = self.denominator.to_monomial();
        let zero = big(self.precision(), 0.0);
        let one = big(self.precision(), 1.0);
        if q.eval(&zero).is_zero() || q.count_real_roots(Some(&zero), Some(&one)) != 0 {
            return fail("denominator vanishes on [0,1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// `t⁻¹ r(t)` for a diagonal approximant of `t^{1-α}`.
    Bura,
    /// `1 / r(t)` for an approximant of `t^α`.
    Reciprocal,
}

/// `b₀ + Σ c_j / (t - d_j)` with poles `d_j ≤ 0` in strictly decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleResidueForm {
    provenance: Provenance,
    constant: Option<BigReal>,
    poles: Vec<BigReal>,
    coefficients: Vec<BigReal>,
}

/// Double-precision copy of a [`PoleResidueForm`] for the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleResidueF64 {
    pub provenance: Provenance,
    pub constant: Option<f64>,
    pub poles: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl PoleResidueF64 {
    pub fn eval(&self, t: f64) -> f64 {
        self.constant.unwrap_or(0.0)
            + self
                .poles
                .iter()
                .zip(&self.coefficients)
                .map(|(d, c)| c / (t - d))
                .sum::<f64>()
    }
}

impl PoleResidueForm {
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn constant(&self) -> Option<&BigReal> {
        self.constant.as_ref()
    }

    pub fn poles(&self) -> &[BigReal] {
        &self.poles
    }

    pub fn coefficients(&self) -> &[BigReal] {
        &self.coefficients
    }

    pub fn eval_big(&self, t: &BigReal) -> BigReal {
        let prec = t.prec();
        let mut acc = self.constant.clone().unwrap_or_else(|| big(prec, 0.0));
        for (d, c) in self.poles.iter().zip(&self.coefficients) {
            acc += Float::with_val(prec, c / Float::with_val(prec, t - d));
        }
        acc
    }

    pub fn to_f64(&self) -> PoleResidueF64 {
        PoleResidueF64 {
            provenance: self.provenance,
            constant: self.constant.as_ref().map(|c| c.to_f64()),
            poles: self.poles.iter().map(|p| p.to_f64()).collect(),
            coefficients: self.coefficients.iter().map(|c| c.to_f64()).collect(),
        }
    }

    /// Largest relative deviation from `source` on a log grid of `[1e-15, 1]`.
    pub fn reconstruction_error<F: Fn(&BigReal) -> BigReal>(&self, prec: u32, points: usize, source: F) -> f64 {
        (0..points)
            .map(|i| {
                let expo = -15.0 + 15.0 * i as f64 / (points - 1) as f64;
                let ln10 = Float::with_val(prec, 10).ln();
                let t = (ln10 * expo).exp();
                let want = source(&t);
                let got = self.eval_big(&t);
                (Float::with_val(prec, &got - &want) / want).abs().to_f64()
            })
            .fold(0.0, f64::max)
    }
}

fn check_gaps(roots: &[BigReal], prec: u32) -> Result<(), ApproxError> {
    for w in roots.windows(2) {
        let scale = abs(&w[0]).max(&abs(&w[1]));
        let gap = (Float::with_val(prec, &w[0] - &w[1]).abs() / scale).to_f64();
        if gap < 2f64.powi(-(prec as i32) / 2) {
            return Err(ApproxError::NearCoincidentRoots { gap, precision: prec });
        }
    }
    Ok(())
}

fn real_nonpositive_roots(p: &Polynomial, what: &str) -> Result<Vec<BigReal>, ApproxError> {
    let prec = p.precision();
    let zero = big(prec, 0.0);
    if p.eval(&zero).is_zero() {
        return Err(ApproxError::Certification(format!("{what} vanishes at 0")));
    }
    let negative = p.count_real_roots(None, Some(&zero));
    if negative != p.degree() {
        return Err(ApproxError::Certification(format!(
            "{what} of degree {} has {negative} distinct real roots in (-inf, 0]",
            p.degree()
        )));
    }
    let roots = p
        .real_roots()
        .map_err(|e| ApproxError::Certification(format!("{what} roots: {e:?}")))?;
    check_gaps(&roots, prec)?;
    Ok(roots)
}

const RECONSTRUCTION_POINTS: usize = 1000;
const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Partial fractions of `t⁻¹ r(t)` for a diagonal approximant: pole 0 with
/// coefficient `r(0)` followed by the denominator roots.
pub fn bura_partial_fractions(r: &RationalMinimax) -> Result<PoleResidueForm, ApproxError> {
    let (k, m) = r.degrees();
    if k != m {
        return Err(ApproxError::OutOfSubclass(format!(
            "degrees ({k}, {m}) are not diagonal"
        )));
    }
    let prec = r.precision();
    let p = r.numerator().to_monomial();
    let q = r.denominator().to_monomial();
    let dq = q.derivative();
    let zero = big(prec, 0.0);
    let mut poles = vec![zero.clone()];
    let mut coefficients = vec![Float::with_val(prec, p.eval(&zero) / q.eval(&zero))];
    for d in real_nonpositive_roots(&q, "denominator")? {
        let mut c = p.eval(&d);
        c /= Float::with_val(prec, &d * dq.eval(&d));
        coefficients.push(c);
        poles.push(d);
    }
    if let Some(j) = coefficients.iter().position(|c| !c.is_sign_positive() || c.is_zero()) {
        return Err(ApproxError::Certification(format!(
            "coefficient {j} of t^-1 r(t) is not positive"
        )));
    }
    let form = PoleResidueForm {
        provenance: Provenance::Bura,
        constant: None,
        poles,
        coefficients,
    };
    let err = form.reconstruction_error(prec, RECONSTRUCTION_POINTS, |t| {
        Float::with_val(prec, r.evaluate_big(t) / t)
    });
    if !(err <= RECONSTRUCTION_TOL) {
        return Err(ApproxError::Certification(format!("reconstruction error {err:.3e}")));
    }
    Ok(form)
}

/// Partial fractions of `1 / r(t)` for an approximant with numerator degree
/// `K` and denominator degree `K-1` or `K`.
pub fn reciprocal_partial_fractions(r: &RationalMinimax) -> Result<PoleResidueForm, ApproxError> {
    let (k, m) = r.degrees();
    if k == 0 || !(m == k || m + 1 == k) {
        return Err(ApproxError::OutOfSubclass(format!(
            "degrees ({k}, {m}) have no reciprocal form"
        )));
    }
    let prec = r.precision();
    let p = r.numerator().to_monomial();
    let q = r.denominator().to_monomial();
    let dp = p.derivative();
    let mut poles = Vec::with_capacity(k);
    let mut coefficients = Vec::with_capacity(k);
    for z in real_nonpositive_roots(&p, "numerator")? {
        let mut e = q.eval(&z);
        e /= dp.eval(&z);
        coefficients.push(e);
        poles.push(z);
    }
    let constant = (m == k).then(|| Float::with_val(prec, q.leading() / p.leading()));
    let form = PoleResidueForm {
        provenance: Provenance::Reciprocal,
        constant,
        poles,
        coefficients,
    };
    let err = form.reconstruction_error(prec, RECONSTRUCTION_POINTS, |t| {
        Float::with_val(prec, 1u32 / r.evaluate_big(t))
    });
    if !(err <= RECONSTRUCTION_TOL) {
        return Err(ApproxError::Certification(format!("reconstruction error {err:.3e}")));
    }
    Ok(form)
}

/// Sign-change roots `ξ₁ < ξ₂ < …` of `ε(t) = r(t) - t^β` in `(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRootTable {
    pub beta: f64,
    pub degrees: (usize, usize),
    pub roots: Vec<BigReal>,
}

impl ErrorRootTable {
    pub fn roots_f64(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.to_f64()).collect()
    }
}

/// Brackets one root between each pair of consecutive extreme points and
/// refines it by bisection in `ln t`.
pub fn error_function_roots(r: &RationalMinimax) -> Result<ErrorRootTable, ApproxError> {
    let prec = r.precision();
    let pts = r.extreme_points();
    let mut roots = Vec::with_capacity(pts.len() - 1);
    let sign = |t: &BigReal| r.error_at(t).cmp0().unwrap_or(Ordering::Equal);
    for (i, w) in pts.windows(2).enumerate() {
        let (s_lo, s_hi) = (sign(&w[0]), sign(&w[1]));
        if s_lo == s_hi || s_lo == Ordering::Equal || s_hi == Ordering::Equal {
            return Err(ApproxError::Certification(format!(
                "no sign change between extreme points {i} and {}",
                i + 1
            )));
        }
        let mut lo = if w[0].is_zero() {
            let mut t = Float::with_val(prec, &w[1] >> 1);
            while sign(&t) != s_lo {
                t >>= 8;
                if t.get_exp().unwrap_or(0) < -(prec as i32) * 4 {
                    return Err(ApproxError::Certification("cannot bracket the first root".into()));
                }
            }
            t
        } else {
            w[0].clone()
        };
        let mut hi = w[1].clone();
        for _ in 0..400 {
            let ratio = Float::with_val(prec, &hi / &lo);
            if ratio.to_f64() - 1.0 < 1e-30 {
                break;
            }
            let mid = Float::with_val(prec, &lo * &hi).sqrt();
            if sign(&mid) == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(Float::with_val(prec, &lo * &hi).sqrt());
    }
    let (k, m) = r.degrees();
    debug_assert_eq!(roots.len(), k + m + 1);
    Ok(ErrorRootTable {
        beta: r.beta(),
        degrees: (k, m),
        roots,
    })
}
