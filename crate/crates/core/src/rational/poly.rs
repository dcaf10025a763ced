//! Polynomials over `BigReal` in two bases: Chebyshev on `[0,1]` (storage and
//! evaluation) and monomial (root isolation and extraction).

use std::cmp::Ordering;

use rug::Float;

use super::bigreal::{big, BigReal};

/// `Σ c_j T_j(2t-1)`, the Chebyshev series shifted to `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSeries {
    coeffs: Vec<BigReal>,
}

impl ChebyshevSeries {
    pub fn new(coeffs: Vec<BigReal>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> u32 {
        self.coeffs[0].prec()
    }

    /// Clenshaw recurrence at `t`.
    pub fn eval(&self, t: &BigReal) -> BigReal {
        let prec = self.precision().max(t.prec());
        let x: Float = Float::with_val(prec, t * 2u32) - 1u32;
        let two_x = Float::with_val(prec, &x * 2u32);
        let mut b1 = big(prec, 0.0);
        let mut b2 = big(prec, 0.0);
        for c in self.coeffs[1..].iter().rev() {
            let mut b0 = Float::with_val(prec, &two_x * &b1);
            b0 -= &b2;
            b0 += c;
            b2 = std::mem::replace(&mut b1, b0);
        }
        let mut out = Float::with_val(prec, &x * &b1);
        out -= &b2;
        out += &self.coeffs[0];
        out
    }

    /// `T_0(2t-1), …, T_degree(2t-1)`.
    pub fn basis_values(t: &BigReal, degree: usize) -> Vec<BigReal> {
        let prec = t.prec();
        let x: Float = Float::with_val(prec, t * 2u32) - 1u32;
        let mut out = Vec::with_capacity(degree + 1);
        out.push(big(prec, 1.0));
        if degree >= 1 {
            out.push(x.clone());
        }
        for j in 2..=degree {
            let mut next = Float::with_val(prec, &x * &out[j - 1]);
            next *= 2u32;
            next -= &out[j - 2];
            out.push(next);
        }
        out
    }

    /// Monomial coefficients of the same polynomial.
    pub fn to_monomial(&self) -> Polynomial {
        let prec = self.precision();
        let deg = self.degree();
        let mut result = vec![big(prec, 0.0); deg + 1];
        // T_j(2t-1) via (4t - 2) T_j - T_{j-1}.
        let mut prev: Vec<BigReal> = vec![big(prec, 1.0)];
        let mut cur: Vec<BigReal> = vec![big(prec, -1.0), big(prec, 2.0)];
        for (j, c) in self.coeffs.iter().enumerate() {
            let basis = match j {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let mut next = vec![big(prec, 0.0); j + 1];
                    for (i, a) in cur.iter().enumerate() {
                        next[i + 1] += Float::with_val(prec, a * 4u32);
                        next[i] -= Float::with_val(prec, a * 2u32);
                    }
                    for (i, a) in prev.iter().enumerate() {
                        next[i] -= a;
                    }
                    prev = std::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            for (i, b) in basis.iter().enumerate() {
                result[i] += Float::with_val(prec, c * b);
            }
        }
        Polynomial::new(result)
    }
}

/// Monomial-basis polynomial `Σ a_i t^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<BigReal>,
}

/// Failure modes of real-root extraction.
#[derive(Debug, Clone, PartialEq)]
pub enum RootFailure {
    /// Fewer distinct real roots than the degree.
    NotRealRooted { degree: usize, real_roots: usize },
    /// Laguerre iteration failed to settle.
    NoConvergence,
    /// The product of the recovered factors does not reproduce the polynomial.
    Reconstruction(f64),
}

impl Polynomial {
    pub fn new(coeffs: Vec<BigReal>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn precision(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigReal {
        self.coeffs.last().unwrap()
    }

    pub fn eval(&self, t: &BigReal) -> BigReal {
        let prec = self.precision().max(t.prec());
        let mut acc = big(prec, 0.0);
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    /// Value and first two derivatives.
    fn eval3(&self, t: &BigReal) -> (BigReal, BigReal, BigReal) {
        let prec = self.precision();
        let mut p = big(prec, 0.0);
        let mut dp = big(prec, 0.0);
        let mut ddp = big(prec, 0.0);
        for c in self.coeffs.iter().rev() {
            ddp *= t;
            ddp += &dp;
            dp *= t;
            dp += &p;
            p *= t;
            p += c;
        }
        ddp *= 2u32;
        (p, dp, ddp)
    }

    pub fn derivative(&self) -> Polynomial {
        let prec = self.precision();
        if self.degree() == 0 {
            return Polynomial::new(vec![big(prec, 0.0)]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Float::with_val(prec, c * i as u32))
                .collect(),
        )
    }

    /// Drops leading coefficients that are negligible against the largest one.
    fn trimmed(mut self) -> Self {
        let prec = self.precision();
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.clone().abs())
            .fold(big(prec, 0.0), |m, c| if c > m { c } else { m });
        let tiny = Float::with_val(prec, &scale >> (prec as i32 - 48).max(16));
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().clone().abs() <= tiny {
            self.coeffs.pop();
        }
        self
    }

    /// Remainder of `self / divisor`.
    fn rem(&self, divisor: &Polynomial) -> Polynomial {
        let prec = self.precision();
        let mut r = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        while r.len() > dd && r.len() > 1 {
            let shift = r.len() - 1 - dd;
            let q = Float::with_val(prec, r.last().unwrap() / lead);
            for (i, c) in divisor.coeffs.iter().enumerate() {
                r[shift + i] -= Float::with_val(prec, &q * c);
            }
            r.pop();
        }
        if r.is_empty() {
            r.push(big(prec, 0.0));
        }
        Polynomial::new(r).trimmed()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn sturm_sequence(&self) -> Vec<Polynomial> {
        let mut seq = vec![self.clone().trimmed(), self.derivative().trimmed()];
        loop {
            let n = seq.len();
            if seq[n - 1].degree() == 0 {
                break;
            }
            let mut r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            for c in r.coeffs.iter_mut() {
                *c = -c.clone();
            }
            seq.push(r);
        }
        seq
    }

    /// Number of distinct real roots in `(lo, hi]`; `None` bounds mean ±∞.
    pub fn count_real_roots(&self, lo: Option<&BigReal>, hi: Option<&BigReal>) -> usize {
        let seq = self.sturm_sequence();
        let changes = |x: Option<&BigReal>, toward_neg_inf: bool| -> usize {
            let signs: Vec<Ordering> = seq
                .iter()
                .filter_map(|p| {
                    let s = match x {
                        Some(x) => p.eval(x).cmp0(),
                        None => {
                            let lead = p.leading().cmp0()?;
                            if toward_neg_inf && p.degree() % 2 == 1 {
                                Some(lead.reverse())
                            } else {
                                Some(lead)
                            }
                        }
                    }?;
                    (s != Ordering::Equal).then_some(s)
                })
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        changes(lo, true).saturating_sub(changes(hi, false))
    }

    /// Synthetic division by `(t - root)`, dropping the remainder.
    fn deflate(&self, root: &BigReal) -> Polynomial {
        let prec = self.precision();
        let n = self.degree();
        let mut q = vec![big(prec, 0.0); n];
        let mut carry = big(prec, 0.0);
        for i in (1..=n).rev() {
            carry *= root;
            carry += &self.coeffs[i];
            q[i - 1] = carry.clone();
        }
        Polynomial::new(q)
    }

    fn laguerre(&self, start: BigReal) -> Option<BigReal> {
        let prec = self.precision();
        let n = self.degree() as u32;
        let mut x = start;
        let tol_bits = prec as i32 - 16;
        for _ in 0..500 {
            let (p, dp, ddp) = self.eval3(&x);
            if p.is_zero() {
                return Some(x);
            }
            let g = Float::with_val(prec, &dp / &p);
            let g2 = Float::with_val(prec, g.square_ref());
            let h = Float::with_val(prec, &g2 - Float::with_val(prec, &ddp / &p));
            let mut disc = Float::with_val(prec, &h * n) - &g2;
            disc *= n - 1;
            if disc.is_sign_negative() {
                disc = big(prec, 0.0);
            }
            let sq = disc.sqrt();
            let plus = Float::with_val(prec, &g + &sq);
            let minus = Float::with_val(prec, &g - &sq);
            let denom = if plus.clone().abs() >= minus.clone().abs() {
                plus
            } else {
                minus
            };
            if denom.is_zero() {
                return None;
            }
            let step = Float::with_val(prec, n) / denom;
            x -= &step;
            let scale = x.clone().abs();
            if step.is_zero() || (step.abs() << tol_bits) <= scale {
                return Some(x);
            }
        }
        None
    }

    fn newton_polish(&self, mut x: BigReal) -> BigReal {
        let prec = self.precision();
        let d = self.derivative();
        for _ in 0..8 {
            let dv = d.eval(&x);
            if dv.is_zero() {
                break;
            }
            let step = Float::with_val(prec, self.eval(&x) / dv);
            x -= &step;
            if step.is_zero() || (step.abs() << (prec as i32 - 8)) <= x.clone().abs() {
                break;
            }
        }
        x
    }

    /// All roots of a real-rooted polynomial with simple roots, sorted in
    /// decreasing order. Real-rootedness is checked with a Sturm count and the
    /// result is confirmed by re-multiplying the linear factors.
    pub fn real_roots(&self) -> Result<Vec<BigReal>, RootFailure> {
        let prec = self.precision();
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let real = self.count_real_roots(None, None);
        if real != n {
            return Err(RootFailure::NotRealRooted {
                degree: n,
                real_roots: real,
            });
        }
        let mut work = self.clone();
        let mut roots = Vec::with_capacity(n);
        for _ in 0..n {
            let r = work.laguerre(big(prec, 0.0)).ok_or(RootFailure::NoConvergence)?;
            work = work.deflate(&r);
            roots.push(r);
        }
        let mut roots: Vec<BigReal> = roots.into_iter().map(|r| self.newton_polish(r)).collect();
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());

        // Rebuild lead · Π (t - r_j) and compare coefficients.
        let mut prod = vec![self.leading().clone()];
        for r in &roots {
            let mut next = vec![big(prec, 0.0); prod.len() + 1];
            for (i, c) in prod.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= Float::with_val(prec, c * r);
            }
            prod = next;
        }
        let scale = self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
        let worst = prod
            .iter()
            .zip(&self.coeffs)
            .map(|(a, b)| Float::with_val(prec, a - b).to_f64().abs())
            .fold(0.0, f64::max)
            / scale;
        if !(worst <= 2f64.powi(-(prec as i32) / 3)) {
            return Err(RootFailure::Reconstruction(worst));
        }
        Ok(roots)
    }
}
