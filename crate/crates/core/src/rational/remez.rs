//! Linearized multi-point Remez exchange for best uniform rational
//! approximation of `t^β` on `[0,1]`, driven by degree continuation.

use rug::Float;

use super::bigreal::{abs, big, pow, solve_dense, BigReal, MAX_PRECISION, MIN_PRECISION};
use super::poly::ChebyshevSeries;
use super::{ApproxError, RationalMinimax};

/// Tuning knobs of the exchange. The defaults reproduce the tabulated
/// approximants at 512 bits.
#[derive(Debug, Clone, PartialEq)]
pub struct RemezOptions {
    pub precision: u32,
    pub max_sweeps: usize,
    /// Sweeps stop once the relative spread of the extreme errors drops below this.
    pub spread_target: f64,
    /// Largest spread a returned approximant may have.
    pub certify_spread: f64,
    pub grid_min_exponent: i32,
    pub points_per_decade: usize,
    pub golden_iterations: usize,
    /// Double the precision and retry on numerical failure, up to 2048 bits.
    pub auto_precision: bool,
}

impl Default for RemezOptions {
    fn default() -> Self {
        Self {
            precision: super::bigreal::DEFAULT_PRECISION,
            max_sweeps: 60,
            spread_target: 1e-12,
            certify_spread: 1e-3,
            grid_min_exponent: -40,
            points_per_decade: 200,
            golden_iterations: 64,
            auto_precision: true,
        }
    }
}

impl RemezOptions {
    pub fn with_precision(precision: u32) -> Self {
        Self {
            precision,
            ..Self::default()
        }
    }
}

/// Best approximation of `t^beta` by a `(k, m)` rational function.
///
/// Only the diagonal `(k, k)` and upper-diagonal `(k+1, k)` classes are
/// accepted. On numerical failure the precision is doubled (up to 2048 bits)
/// when `opts.auto_precision` is set.
pub fn compute_bura(beta: f64, k: usize, m: usize, opts: &RemezOptions) -> Result<RationalMinimax, ApproxError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ApproxError::InvalidBeta(beta));
    }
    if !(k == m || k == m + 1) {
        return Err(ApproxError::UnsupportedDegrees { k, m });
    }
    if opts.precision < MIN_PRECISION {
        return Err(ApproxError::PrecisionTooLow(opts.precision));
    }
    let mut prec = opts.precision;
    loop {
        let attempt = Engine::new(beta, prec, opts).run(k, m);
        match attempt {
            Err(e) if opts.auto_precision && e.wants_more_precision() && prec * 2 <= MAX_PRECISION => {
                log::warn!(
                    "remez beta={beta} ({k},{m}) failed at {prec} bits: {e}; retrying at {}",
                    prec * 2
                );
                prec *= 2;
            }
            other => return other,
        }
    }
}

/// Degree path from `(0,0)` to `(k,m)`, alternately raising the numerator
/// and the denominator degree.
pub(crate) fn continuation_path(k: usize, m: usize) -> Vec<(usize, usize)> {
    let mut path = vec![(0, 0)];
    let (mut a, mut b) = (0, 0);
    while (a, b) != (k, m) {
        if a == b {
            a += 1;
        } else {
            b += 1;
        }
        path.push((a, b));
    }
    path
}

struct Engine<'a> {
    beta: BigReal,
    beta_f64: f64,
    prec: u32,
    opts: &'a RemezOptions,
    grid: Vec<BigReal>,
    grid_f: Vec<BigReal>,
}

struct Fit {
    p: ChebyshevSeries,
    q: ChebyshevSeries,
}

struct Sweep {
    points: Vec<BigReal>,
    errors: Vec<BigReal>,
    spread: f64,
}

impl<'a> Engine<'a> {
    fn new(beta: f64, prec: u32, opts: &'a RemezOptions) -> Self {
        let beta_big = big(prec, beta);
        let decades = (-opts.grid_min_exponent) as usize;
        let count = decades * opts.points_per_decade;
        let ln10 = Float::with_val(prec, 10).ln();
        let mut grid = Vec::with_capacity(count + 2);
        grid.push(big(prec, 0.0));
        for i in 0..=count {
            let expo = Float::with_val(prec, (i as i64) - (count as i64)) / opts.points_per_decade as u32;
            grid.push(Float::with_val(prec, &expo * &ln10).exp());
        }
        *grid.last_mut().unwrap() = big(prec, 1.0);
        let grid_f = grid.iter().map(|t| pow(t, &beta_big)).collect();
        Self {
            beta: beta_big,
            beta_f64: beta,
            prec,
            opts,
            grid,
            grid_f,
        }
    }

    fn error_at(&self, fit: &Fit, t: &BigReal, ft: &BigReal) -> BigReal {
        let mut r = fit.p.eval(t);
        r /= fit.q.eval(t);
        r -= ft;
        r
    }

    /// Solves the linearized alternation system on `reference`, iterating on
    /// the denominator that multiplies the levelled error.
    fn fit(&self, k: usize, m: usize, reference: &[BigReal], q_guess: &ChebyshevSeries) -> Result<Fit, ApproxError> {
        let prec = self.prec;
        let n = k + m + 2;
        debug_assert_eq!(reference.len(), n);
        let basis: Vec<Vec<BigReal>> = reference
            .iter()
            .map(|x| ChebyshevSeries::basis_values(x, k.max(m)))
            .collect();
        let fvals: Vec<BigReal> = reference.iter().map(|x| pow(x, &self.beta)).collect();
        let mut q = q_guess.clone();
        let mut last_e: Option<BigReal> = None;
        let mut last_fit: Option<Fit> = None;
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
        for _ in 0..60 {
            let mut rows = Vec::with_capacity(n);
            for (i, (b, f)) in basis.iter().zip(&fvals).enumerate() {
                let mut row = Vec::with_capacity(n);
                row.extend(b[..=k].iter().cloned());
                for bj in &b[1..=m] {
                    row.push(-Float::with_val(prec, f * bj));
                }
                let lev = q.eval(&reference[i]);
                row.push(if i % 2 == 1 { lev } else { -lev });
                rows.push(row);
            }
            let sol = solve_dense(rows, fvals.clone()).ok_or(ApproxError::Singular { precision: prec })?;
            let mut qc = vec![big(prec, 1.0)];
            qc.extend(sol[k + 1..k + 1 + m].iter().cloned());
            q = ChebyshevSeries::new(qc);
            let p = ChebyshevSeries::new(sol[..=k].to_vec());
            let e = sol[n - 1].clone();
            let converged = match &last_e {
                Some(prev) => {
                    let diff = Float::with_val(prec, &e - prev).abs();
                    diff <= Float::with_val(prec, &tol * abs(&e))
                }
                None => m == 0,
            };
            if converged {
                return Ok(Fit { p, q });
            }
            last_e = Some(e);
            last_fit = Some(Fit { p, q: q.clone() });
        }
        // The levelled-error iteration stalled; the exchange judges the last iterate.
        last_fit.ok_or(ApproxError::Singular { precision: prec })
    }

    /// Scans the grid for the extrema of the error and refines them.
    fn exchange(&self, fit: &Fit, n: usize) -> Result<Sweep, ApproxError> {
        let prec = self.prec;
        let q0_positive = fit.q.eval(&self.grid[0]).is_sign_positive();
        let mut errs = Vec::with_capacity(self.grid.len());
        for (t, f) in self.grid.iter().zip(&self.grid_f) {
            let qv = fit.q.eval(t);
            if qv.is_zero() || qv.is_sign_positive() != q0_positive {
                return Err(ApproxError::PolesInInterval { precision: prec });
            }
            let mut r = fit.p.eval(t);
            r /= &qv;
            r -= f;
            errs.push(r);
        }

        // One candidate per run of constant sign: its largest |error|.
        let mut cands: Vec<(usize, bool, BigReal)> = Vec::new();
        for (i, e) in errs.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let pos = e.is_sign_positive();
            let a = abs(e);
            match cands.last_mut() {
                Some(last) if last.1 == pos => {
                    if a > last.2 {
                        *last = (i, pos, a);
                    }
                }
                _ => cands.push((i, pos, a)),
            }
        }
        if cands.len() < n {
            return Err(ApproxError::ExchangeFailed {
                found: cands.len(),
                needed: n,
            });
        }
        while cands.len() > n {
            let (imin, _) = cands
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap())
                .unwrap();
            let last = cands.len() - 1;
            if imin == 0 || imin == last {
                cands.remove(imin);
            } else if cands.len() - n >= 2 {
                // Drop the small run and fuse its equal-signed neighbours.
                if cands[imin - 1].2 >= cands[imin + 1].2 {
                    cands.drain(imin..=imin + 1);
                } else {
                    cands.drain(imin - 1..=imin);
                }
            } else if cands[0].2 <= cands[last].2 {
                cands.remove(0);
            } else {
                cands.remove(last);
            }
        }

        let mut points = Vec::with_capacity(n);
        let mut errors = Vec::with_capacity(n);
        for (g, pos, _) in &cands {
            let (t, e) = self.refine(fit, *g, *pos, &errs);
            points.push(t);
            errors.push(e);
        }
        let maxabs = errors.iter().map(|e| abs(e).to_f64()).fold(0.0, f64::max);
        let minabs = errors.iter().map(|e| abs(e).to_f64()).fold(f64::INFINITY, f64::min);
        Ok(Sweep {
            points,
            errors,
            spread: (maxabs - minabs) / maxabs,
        })
    }

    /// Golden-section maximisation of the signed error in `ln t` between the
    /// grid neighbours of node `g`.
    fn refine(&self, fit: &Fit, g: usize, positive: bool, errs: &[BigReal]) -> (BigReal, BigReal) {
        let prec = self.prec;
        if g <= 1 || g + 1 >= self.grid.len() {
            return (self.grid[g].clone(), errs[g].clone());
        }
        let signed = |s: &BigReal| -> (BigReal, BigReal) {
            let t = Float::with_val(prec, s.exp_ref());
            let e = self.error_at(fit, &t, &pow(&t, &self.beta));
            let v = if positive {
                e.clone()
            } else {
                Float::with_val(prec, -&e)
            };
            (v, e)
        };
        let mut a = Float::with_val(prec, self.grid[g - 1].ln_ref());
        let mut b = Float::with_val(prec, self.grid[g + 1].ln_ref());
        let invphi = (Float::with_val(prec, 5).sqrt() - 1u32) / 2u32;
        let mut c = Float::with_val(prec, &b - &a);
        c *= &invphi;
        let mut x1 = Float::with_val(prec, &b - &c);
        let mut x2 = Float::with_val(prec, &a + &c);
        let (mut f1, _) = signed(&x1);
        let (mut f2, _) = signed(&x2);
        for _ in 0..self.opts.golden_iterations {
            if f1 < f2 {
                a = x1;
                x1 = x2.clone();
                f1 = f2;
                let mut w = Float::with_val(prec, &b - &a);
                w *= &invphi;
                x2 = Float::with_val(prec, &a + &w);
                f2 = signed(&x2).0;
            } else {
                b = x2;
                x2 = x1.clone();
                f2 = f1;
                let mut w = Float::with_val(prec, &b - &a);
                w *= &invphi;
                x1 = Float::with_val(prec, &b - &w);
                f1 = signed(&x1).0;
            }
        }
        let s = if f1 >= f2 { x1 } else { x2 };
        let (v, e) = signed(&s);
        let grid_v = if positive {
            errs[g].clone()
        } else {
            Float::with_val(prec, -&errs[g])
        };
        if v >= grid_v {
            (Float::with_val(prec, s.exp_ref()), e)
        } else {
            (self.grid[g].clone(), errs[g].clone())
        }
    }

    /// Runs sweeps at fixed degrees from a starting reference.
    fn level(
        &self,
        k: usize,
        m: usize,
        mut reference: Vec<BigReal>,
        mut q: ChebyshevSeries,
        final_level: bool,
    ) -> Result<(Fit, Sweep), ApproxError> {
        let n = k + m + 2;
        let target = if final_level {
            self.opts.spread_target
        } else {
            1e-6_f64.max(self.opts.spread_target)
        };
        let mut best: Option<(Fit, Sweep)> = None;
        for _ in 0..self.opts.max_sweeps {
            let fit = self.fit(k, m, &reference, &q)?;
            let sweep = self.exchange(&fit, n)?;
            reference = sweep.points.clone();
            q = fit.q.clone();
            let done = sweep.spread <= target;
            if best.as_ref().is_none_or(|b| sweep.spread < b.1.spread) {
                best = Some((fit, sweep));
            }
            if done {
                break;
            }
        }
        let (fit, sweep) = best.expect("at least one sweep");
        if sweep.spread > self.opts.certify_spread {
            return Err(ApproxError::NonConvergence {
                k,
                m,
                sweeps: self.opts.max_sweeps,
                spread: sweep.spread,
            });
        }
        Ok((fit, sweep))
    }

    fn run(&self, k: usize, m: usize) -> Result<RationalMinimax, ApproxError> {
        let prec = self.prec;
        let path = continuation_path(k, m);
        let mut reference = vec![big(prec, 0.0), big(prec, 1.0)];
        let mut q = ChebyshevSeries::new(vec![big(prec, 1.0)]);
        let mut result = None;
        for (step, &(a, b)) in path.iter().enumerate() {
            let last = step + 1 == path.len();
            if step > 0 && b > path[step - 1].1 {
                let mut c = q.coeffs().to_vec();
                c.push(big(prec, 0.0));
                q = ChebyshevSeries::new(c);
            }
            let seeds = if step == 0 {
                vec![reference.clone()]
            } else {
                insertion_seeds(&reference)
            };
            let mut outcome = Err(ApproxError::ExchangeFailed {
                found: 0,
                needed: a + b + 2,
            });
            for seed in seeds {
                outcome = self.level(a, b, seed, q.clone(), last);
                if outcome.is_ok() {
                    break;
                }
            }
            let (fit, sweep) = outcome?;
            reference = sweep.points.clone();
            q = fit.q.clone();
            result = Some((fit, sweep));
        }
        let (fit, sweep) = result.expect("path is never empty");
        RationalMinimax::from_parts(self.beta_f64, (k, m), fit.p, fit.q, sweep.points, sweep.errors)
    }
}

/// Candidate reference sets for the next degree: the previous extreme points
/// plus one new abscissa between 0 and the smallest positive point.
fn insertion_seeds(reference: &[BigReal]) -> Vec<Vec<BigReal>> {
    let prec = reference[0].prec();
    let x1 = &reference[1];
    let mut ratios: Vec<BigReal> = Vec::new();
    if reference.len() > 2 {
        ratios.push(Float::with_val(prec, x1 / &reference[2]));
    }
    for r in [0.1, 0.01, 0.3, 1e-3, 0.5, 1e-4] {
        ratios.push(big(prec, r));
    }
    ratios
        .into_iter()
        .map(|r| {
            let mut seed = reference.to_vec();
            seed.insert(1, Float::with_val(prec, x1 * &r));
            seed
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuation_paths() {
        assert_eq!(continuation_path(0, 0), vec![(0, 0)]);
        assert_eq!(continuation_path(2, 2), vec![(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]);
        assert_eq!(
            continuation_path(3, 2),
            vec![(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2)]
        );
    }
}
