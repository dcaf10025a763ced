//! Arbitrary-precision scalar helpers on top of MPFR.

use rug::Float;

pub type BigReal = Float;

pub const DEFAULT_PRECISION: u32 = 512;
pub const MIN_PRECISION: u32 = 128;
pub const MAX_PRECISION: u32 = 2048;

pub(crate) fn big(prec: u32, v: f64) -> BigReal {
    Float::with_val(prec, v)
}

/// `t^beta` with `0^beta = 0`.
pub(crate) fn pow(t: &BigReal, beta: &BigReal) -> BigReal {
    if t.is_zero() {
        return Float::with_val(t.prec(), 0);
    }
    let prec = t.prec().max(beta.prec());
    let mut out = Float::with_val(prec, t.ln_ref());
    out *= beta;
    out.exp()
}

pub(crate) fn abs(x: &BigReal) -> BigReal {
    x.clone().abs()
}

/// Exact decimal round trip of a `BigReal`.
pub(crate) fn to_decimal(x: &BigReal) -> String {
    x.to_string_radix(10, None)
}

pub(crate) fn parse_decimal(prec: u32, s: &str) -> Option<BigReal> {
    Float::parse(s).ok().map(|p| Float::with_val(prec, p))
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot vanishes.
pub(crate) fn solve_dense(mut m: Vec<Vec<BigReal>>, mut b: Vec<BigReal>) -> Option<Vec<BigReal>> {
    let n = b.len();
    let prec = b.first().map(|v| v.prec()).unwrap_or(DEFAULT_PRECISION);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].clone().abs().partial_cmp(&m[j][col].clone().abs()).unwrap())?;
        if m[pivot][col].is_zero() {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = m.split_at_mut(col + 1);
        let prow = &top[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let factor = Float::with_val(prec, &row[col] / &prow[col]);
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                row[k] -= Float::with_val(prec, &factor * &prow[k]);
            }
            let bi = Float::with_val(prec, &factor * &b[col]);
            b[col + 1 + offset] -= bi;
        }
    }
    let mut x = vec![big(prec, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for k in i + 1..n {
            acc -= Float::with_val(prec, &m[i][k] * &x[k]);
        }
        x[i] = acc / &m[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_small_system() {
        let m = vec![vec![big(256, 0.0), big(256, 2.0)], vec![big(256, 3.0), big(256, 1.0)]];
        let x = solve_dense(m, vec![big(256, 4.0), big(256, 5.0)]).unwrap();
        assert!((x[0].to_f64() - 1.0).abs() < 1e-70);
        assert!((x[1].to_f64() - 2.0).abs() < 1e-70);
        let singular = vec![vec![big(64, 1.0), big(64, 1.0)], vec![big(64, 2.0), big(64, 2.0)]];
        assert!(solve_dense(singular, vec![big(64, 1.0), big(64, 1.0)]).is_none());
    }

    #[test]
    fn decimal_round_trip() {
        let x = pow(&big(512, 2.0), &big(512, 0.25));
        let back = parse_decimal(512, &to_decimal(&x)).unwrap();
        assert_eq!(x, back);
        assert!(pow(&big(512, 0.0), &big(512, 0.5)).is_zero());
    }
}
