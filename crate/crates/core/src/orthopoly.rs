//! Classical orthogonal polynomials, their differential recurrences
//! `g_i = alpha_i g'_{i+1} + beta_i g'_i + gamma_i g'_{i-1}`, and the small
//! coefficient matrices of the two time-domain reduction variants.
//!
//! Normalizations are the classical ones: `P_n`, `T_n`, `U_n`, physicists'
//! `H_n`, `L_n` with `L_n(0) = 1`, and `P_n^{(a,b)}`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numkernel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolynomialFamily {
    Chebyshev1,
    Chebyshev2,
    Hermite,
    Jacobi { a: f64, b: f64 },
    Laguerre,
    Legendre,
}

impl PolynomialFamily {
    pub const CLASSICAL: [PolynomialFamily; 5] = [
        PolynomialFamily::Chebyshev1,
        PolynomialFamily::Chebyshev2,
        PolynomialFamily::Hermite,
        PolynomialFamily::Laguerre,
        PolynomialFamily::Legendre,
    ];

    /// Jacobi with the default parameters `(0, 0)`.
    pub fn jacobi_default() -> Self {
        PolynomialFamily::Jacobi { a: 0.0, b: 0.0 }
    }

    pub fn jacobi(a: f64, b: f64) -> Result<Self> {
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::InvalidArgument(format!("Jacobi parameters must exceed -1, got ({a}, {b})")));
        }
        Ok(PolynomialFamily::Jacobi { a, b })
    }

    pub fn all_with_jacobi() -> Vec<PolynomialFamily> {
        let mut v = Self::CLASSICAL.to_vec();
        v.push(Self::jacobi_default());
        v
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolynomialFamily::Chebyshev1 => "chebyshev1",
            PolynomialFamily::Chebyshev2 => "chebyshev2",
            PolynomialFamily::Hermite => "hermite",
            PolynomialFamily::Jacobi { .. } => "jacobi",
            PolynomialFamily::Laguerre => "laguerre",
            PolynomialFamily::Legendre => "legendre",
        }
    }
}

impl fmt::Display for PolynomialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolynomialFamily::Jacobi { a, b } => write!(f, "jacobi({a},{b})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PolynomialFamily {
    type Err = Error;

    /// Accepts `legendre`, `chebyshev1`, ..., `jacobi` and `jacobi(a,b)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "chebyshev1" | "chebyshev" | "cheb1" => PolynomialFamily::Chebyshev1,
            "chebyshev2" | "cheb2" => PolynomialFamily::Chebyshev2,
            "hermite" => PolynomialFamily::Hermite,
            "laguerre" => PolynomialFamily::Laguerre,
            "legendre" => PolynomialFamily::Legendre,
            "jacobi" => PolynomialFamily::jacobi_default(),
            _ => {
                let inner = t
                    .strip_prefix("jacobi(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Config(format!("unknown polynomial family `{s}`")))?;
                let parts: Vec<&str> = inner.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Config(format!("expected jacobi(a,b), got `{s}`")));
                }
                let p = |x: &str| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad Jacobi parameter `{x}`")))
                };
                PolynomialFamily::jacobi(p(parts[0])?, p(parts[1])?).map_err(|e| Error::Config(e.to_string()))?
            }
        })
    }
}

/// Which of the two time-domain variants a small matrix belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Keeps the initial-state row (`E_tilde`, `A_tilde`).
    Tdmor1,
    /// Drops it (`E_hat`, identity).
    Tdmor2,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Tdmor1 => "tdmor1",
            Variant::Tdmor2 => "tdmor2",
        })
    }
}

/// Arithmetic needed by the coefficient formulas, so the same code yields
/// floating-point and exact rational tables.
pub trait Field:
    Clone
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn int(k: i64) -> Self;
    fn real(x: f64) -> Self;
}

impl Field for f64 {
    fn int(k: i64) -> Self {
        k as f64
    }
    fn real(x: f64) -> Self {
        x
    }
}

impl Field for BigRational {
    fn int(k: i64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
    fn real(x: f64) -> Self {
        BigRational::from_f64(x).expect("finite parameter")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn alpha<T: Field>(family: PolynomialFamily, i: usize) -> T {
    let n = T::int(i as i64);
    let one = T::one();
    let two = T::int(2);
    match family {
        PolynomialFamily::Chebyshev1 | PolynomialFamily::Chebyshev2 | PolynomialFamily::Hermite => {
            one / (two.clone() * n + two)
        }
        PolynomialFamily::Laguerre => -one,
        PolynomialFamily::Legendre => one / (two * n + T::one()),
        PolynomialFamily::Jacobi { a, b } => {
            let (a, b) = (T::real(a), T::real(b));
            let ab = a + b;
            two.clone() * (ab.clone() + n.clone() + one.clone())
                / ((ab.clone() + two.clone() * n.clone() + two.clone()) * (ab + two * n + one))
        }
    }
}

pub fn beta<T: Field>(family: PolynomialFamily, i: usize) -> T {
    let n = T::int(i as i64);
    let two = T::int(2);
    match family {
        PolynomialFamily::Laguerre => T::one(),
        PolynomialFamily::Jacobi { a, b } => {
            let (a, b) = (T::real(a), T::real(b));
            let ab = a.clone() + b.clone();
            two.clone() * (a - b) / ((ab.clone() + two.clone() * n.clone()) * (ab + two.clone() * n + two))
        }
        _ => T::zero(),
    }
}

pub fn gamma<T: Field>(family: PolynomialFamily, i: usize) -> Result<T> {
    let n = T::int(i as i64);
    let one = T::one();
    let two = T::int(2);
    Ok(match family {
        PolynomialFamily::Chebyshev1 => {
            if i == 1 {
                return Err(Error::UndefinedCoefficient {
                    family: family.to_string(),
                    name: "gamma",
                    index: i,
                });
            }
            -(one / (two * n - T::int(2)))
        }
        PolynomialFamily::Chebyshev2 => -(one / (two * n + T::int(2))),
        PolynomialFamily::Hermite | PolynomialFamily::Laguerre => T::zero(),
        PolynomialFamily::Legendre => -(one.clone() / (two * n + one)),
        PolynomialFamily::Jacobi { a, b } => {
            let (a, b) = (T::real(a), T::real(b));
            let ab = a.clone() + b.clone();
            let den = (ab.clone() + two.clone() * n.clone() + one)
                * (ab.clone() + two * n.clone())
                * (ab + n.clone());
            if den.is_zero() {
                return Err(Error::UndefinedCoefficient {
                    family: family.to_string(),
                    name: "gamma",
                    index: i,
                });
            }
            -(T::int(2) * (a + n.clone()) * (b + n)) / den
        }
    })
}

/// The `(alpha_i, beta_i, gamma_i)` row of the differential recurrence.
pub fn recurrence_coeffs(family: PolynomialFamily, i: usize) -> Result<RecurrenceTriple> {
    if i == 0 {
        return Err(Error::InvalidArgument("recurrence index starts at 1".into()));
    }
    Ok(RecurrenceTriple {
        alpha: alpha(family, i),
        beta: beta(family, i),
        gamma: gamma(family, i)?,
    })
}

/// `g_i(t)` by the three-term recurrence of the family.
pub fn eval_poly(family: PolynomialFamily, i: usize, t: f64) -> f64 {
    eval_poly_generic::<f64>(family, i, t)
}

pub fn eval_poly_generic<T: Field>(family: PolynomialFamily, i: usize, t: f64) -> T {
    let t = T::real(t);
    let one = T::one();
    let two = T::int(2);
    let p1 = match family {
        PolynomialFamily::Legendre | PolynomialFamily::Chebyshev1 => t.clone(),
        PolynomialFamily::Chebyshev2 | PolynomialFamily::Hermite => two.clone() * t.clone(),
        PolynomialFamily::Laguerre => one.clone() - t.clone(),
        PolynomialFamily::Jacobi { a, b } => {
            let (a, b) = (T::real(a), T::real(b));
            (a.clone() + one.clone()) + (a + b + two.clone()) * (t.clone() - one.clone()) / two.clone()
        }
    };
    if i == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = p1;
    for k in 1..i {
        let kk = T::int(k as i64);
        let next = match family {
            PolynomialFamily::Legendre => {
                ((two.clone() * kk.clone() + T::one()) * t.clone() * cur.clone() - kk.clone() * prev.clone())
                    / (kk + T::one())
            }
            PolynomialFamily::Chebyshev1 | PolynomialFamily::Chebyshev2 => {
                two.clone() * t.clone() * cur.clone() - prev.clone()
            }
            PolynomialFamily::Hermite => {
                two.clone() * t.clone() * cur.clone() - two.clone() * kk * prev.clone()
            }
            PolynomialFamily::Laguerre => {
                ((two.clone() * kk.clone() + T::one() - t.clone()) * cur.clone() - kk.clone() * prev.clone())
                    / (kk + T::one())
            }
            PolynomialFamily::Jacobi { a, b } => {
                let (a, b) = (T::real(a), T::real(b));
                let n = kk + T::one();
                let ab = a.clone() + b.clone();
                let c2n = two.clone() * n.clone() + ab.clone();
                let lhs = two.clone() * n.clone() * (n.clone() + ab.clone()) * (c2n.clone() - two.clone());
                let r1 = (c2n.clone() - T::one())
                    * (c2n.clone() * (c2n.clone() - two.clone()) * t.clone() + a.clone() * a.clone()
                        - b.clone() * b.clone());
                let r2 = two.clone() * (n.clone() + a - T::one()) * (n + b - T::one()) * c2n;
                (r1 * cur.clone() - r2 * prev.clone()) / lhs
            }
        };
        prev = cur;
        cur = next;
    }
    cur
}

/// Derivative `g_i'(t)` from the monomial coefficients.
pub fn eval_poly_derivative(family: PolynomialFamily, i: usize, t: f64) -> f64 {
    let coeffs = monomial_coeffs(family, i);
    let mut acc = 0.0;
    for k in (1..coeffs.len()).rev() {
        acc = acc * t + coeffs[k] * k as f64;
    }
    acc
}

/// Monomial coefficients of `g_i` (ascending powers).
pub fn monomial_coeffs(family: PolynomialFamily, i: usize) -> Vec<f64> {
    let two = 2.0;
    let p1: Vec<f64> = match family {
        PolynomialFamily::Legendre | PolynomialFamily::Chebyshev1 => vec![0.0, 1.0],
        PolynomialFamily::Chebyshev2 | PolynomialFamily::Hermite => vec![0.0, 2.0],
        PolynomialFamily::Laguerre => vec![1.0, -1.0],
        PolynomialFamily::Jacobi { a, b } => vec![(a + 1.0) - (a + b + 2.0) / 2.0, (a + b + 2.0) / 2.0],
    };
    if i == 0 {
        return vec![1.0];
    }
    let mut prev = vec![1.0];
    let mut cur = p1;
    for k in 1..i {
        let kf = k as f64;
        // next = (c_t * t + c_0) * cur - c_p * prev
        let (ct, c0, cp) = match family {
            PolynomialFamily::Legendre => ((2.0 * kf + 1.0) / (kf + 1.0), 0.0, kf / (kf + 1.0)),
            PolynomialFamily::Chebyshev1 | PolynomialFamily::Chebyshev2 => (two, 0.0, 1.0),
            PolynomialFamily::Hermite => (two, 0.0, two * kf),
            PolynomialFamily::Laguerre => (-1.0 / (kf + 1.0), (2.0 * kf + 1.0) / (kf + 1.0), kf / (kf + 1.0)),
            PolynomialFamily::Jacobi { a, b } => {
                let n = kf + 1.0;
                let ab = a + b;
                let c2n = 2.0 * n + ab;
                let lhs = 2.0 * n * (n + ab) * (c2n - 2.0);
                let r1 = c2n - 1.0;
                (
                    r1 * c2n * (c2n - 2.0) / lhs,
                    r1 * (a * a - b * b) / lhs,
                    2.0 * (n + a - 1.0) * (n + b - 1.0) * c2n / lhs,
                )
            }
        };
        let mut next = vec![0.0; cur.len() + 1];
        for (p, &c) in cur.iter().enumerate() {
            next[p + 1] += ct * c;
            next[p] += c0 * c;
        }
        for (p, &c) in prev.iter().enumerate() {
            next[p] -= cp * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Constant `g_0 / g_1'`.
pub fn g0_over_g1dot(family: PolynomialFamily) -> f64 {
    g0_over_g1dot_generic(family)
}

pub fn g0_over_g1dot_generic<T: Field>(family: PolynomialFamily) -> T {
    match family {
        PolynomialFamily::Legendre | PolynomialFamily::Chebyshev1 => T::one(),
        PolynomialFamily::Chebyshev2 | PolynomialFamily::Hermite => T::one() / T::int(2),
        PolynomialFamily::Laguerre => -T::one(),
        PolynomialFamily::Jacobi { a, b } => T::int(2) / (T::real(a) + T::real(b) + T::int(2)),
    }
}

/// The small coefficient matrices of one variant.
#[derive(Clone, Debug)]
pub struct SmallPencilPair {
    /// `E_tilde` or `E_hat`, untransposed.
    pub e_small: Mat<f64>,
    /// `A_tilde` or the identity.
    pub a_small: Mat<f64>,
    pub kind: Variant,
    pub family: PolynomialFamily,
    pub r: usize,
    pub t0: f64,
}

// tilde{E}^T as a dense table in any field; row 0 holds g_j(t0)
fn e_tilde_transposed<T: Field>(family: PolynomialFamily, r: usize, t0: f64) -> Result<Vec<Vec<T>>> {
    let mut m = vec![vec![T::zero(); r]; r];
    for (j, slot) in m[0].iter_mut().enumerate() {
        *slot = eval_poly_generic::<T>(family, j, t0);
    }
    for k in 1..r {
        let sub = if k == 1 {
            g0_over_g1dot_generic::<T>(family)
        } else {
            alpha::<T>(family, k - 1)
        };
        m[k][k - 1] = -sub;
        m[k][k] = -beta::<T>(family, k);
        if k + 1 < r {
            m[k][k + 1] = -gamma::<T>(family, k + 1)?;
        }
    }
    Ok(m)
}

// hat{E} untransposed: diag -beta_i, super -alpha_i, sub -gamma_{i+1}
fn e_hat_table<T: Field>(family: PolynomialFamily, r: usize) -> Result<Vec<Vec<T>>> {
    let mut m = vec![vec![T::zero(); r]; r];
    for i in 0..r {
        m[i][i] = -beta::<T>(family, i + 1);
        if i + 1 < r {
            m[i][i + 1] = -alpha::<T>(family, i + 1);
            m[i + 1][i] = -gamma::<T>(family, i + 2)?;
        }
    }
    Ok(m)
}

fn to_mat(t: &[Vec<f64>]) -> Mat<f64> {
    Mat::from_fn(t.len(), t.len(), |i, j| t[i][j])
}

/// `E_tilde` and `A_tilde = blkdiag(0, I_{r-1})` for the first variant.
pub fn build_e_tilde(family: PolynomialFamily, r: usize, t0: f64) -> Result<SmallPencilPair> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("the first variant needs r >= 2, got {r}")));
    }
    let et = e_tilde_transposed::<f64>(family, r, t0)?;
    let e_small = to_mat(&et).transpose().to_owned();
    let a_small = Mat::from_fn(r, r, |i, j| if i == j && i > 0 { 1.0 } else { 0.0 });
    Ok(SmallPencilPair {
        e_small,
        a_small,
        kind: Variant::Tdmor1,
        family,
        r,
        t0,
    })
}

/// `E_hat` and the identity for the second variant.
pub fn build_e_hat(family: PolynomialFamily, r: usize) -> Result<SmallPencilPair> {
    if r < 1 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let e_small = to_mat(&e_hat_table::<f64>(family, r)?);
    Ok(SmallPencilPair {
        e_small,
        a_small: Mat::identity(r, r),
        kind: Variant::Tdmor2,
        family,
        r,
        t0: 0.0,
    })
}

/// The maximal order for which regularity is decided in exact arithmetic.
pub const EXACT_REGULARITY_LIMIT: usize = 200;

/// Whether the small matrix of `variant` is invertible. Decided exactly over
/// the rationals up to [`EXACT_REGULARITY_LIMIT`], numerically beyond.
pub fn is_regular(family: PolynomialFamily, variant: Variant, r: usize, t0: f64) -> Result<bool> {
    if r <= EXACT_REGULARITY_LIMIT {
        let table = match variant {
            Variant::Tdmor1 => e_tilde_transposed::<BigRational>(family, r, t0)?,
            Variant::Tdmor2 => e_hat_table::<BigRational>(family, r)?,
        };
        return Ok(exact_rank(table) == r);
    }
    let m = match variant {
        Variant::Tdmor1 => build_e_tilde(family, r, t0)?.e_small,
        Variant::Tdmor2 => build_e_hat(family, r)?.e_small,
    };
    Ok(numkernel::condition_2norm(m.as_ref()) < 1e14)
}

/// Rank by Gaussian elimination in exact arithmetic.
pub fn exact_rank(mut m: Vec<Vec<BigRational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for i in (rank + 1)..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / pivot.clone();
            for j in c..cols {
                if m[rank][j].is_zero() {
                    continue;
                }
                let delta = f.clone() * m[rank][j].clone();
                m[i][j] = m[i][j].clone() - delta;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// `E_hat^{-1}`; closed form for Laguerre.
pub fn invert_e_hat(family: PolynomialFamily, r: usize) -> Result<Mat<f64>> {
    let singular = || Error::SingularSmallMatrix {
        family: family.to_string(),
        r,
    };
    if family == PolynomialFamily::Laguerre {
        return Ok(Mat::from_fn(r, r, |i, j| if i <= j { -1.0 } else { 0.0 }));
    }
    if !is_regular(family, Variant::Tdmor2, r, 0.0)? {
        return Err(singular());
    }
    let e = build_e_hat(family, r)?.e_small;
    let inv = numkernel::inverse(e.as_ref()).map_err(|_| singular())?;
    let resid = &e * &inv - Mat::<f64>::identity(r, r);
    if numkernel::frobenius(resid.as_ref()) >= 1e-10 {
        return Err(singular());
    }
    Ok(inv)
}

/// `E_tilde^{-1}`.
pub fn invert_e_tilde(family: PolynomialFamily, r: usize, t0: f64) -> Result<Mat<f64>> {
    let singular = || Error::SingularSmallMatrix {
        family: family.to_string(),
        r,
    };
    if !is_regular(family, Variant::Tdmor1, r, t0)? {
        return Err(singular());
    }
    let e = build_e_tilde(family, r, t0)?.e_small;
    let inv = numkernel::inverse(e.as_ref()).map_err(|_| singular())?;
    let resid = &e * &inv - Mat::<f64>::identity(r, r);
    if numkernel::frobenius(resid.as_ref()) >= 1e-8 * numkernel::condition_2norm(e.as_ref()).max(1.0) {
        return Err(singular());
    }
    Ok(inv)
}

/// Weights of a piecewise-constant unit input: the first unit vector, of
/// length `r - 1` for the first variant and `r` for the second.
pub fn input_weights(r: usize, variant: Variant) -> Vec<f64> {
    let len = match variant {
        Variant::Tdmor1 => r.saturating_sub(1),
        Variant::Tdmor2 => r,
    };
    let mut w = vec![0.0; len];
    if let Some(first) = w.first_mut() {
        *first = 1.0;
    }
    w
}

/// Exact `E_hat` for families with rational coefficients.
pub fn e_hat_exact(family: PolynomialFamily, r: usize) -> Result<Vec<Vec<BigRational>>> {
    e_hat_table::<BigRational>(family, r)
}

pub fn e_tilde_transposed_exact(family: PolynomialFamily, r: usize, t0: f64) -> Result<Vec<Vec<BigRational>>> {
    e_tilde_transposed::<BigRational>(family, r, t0)
}

/// `|x|` of an exact rational, as `f64`.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    let v = x.to_f64().unwrap_or(f64::NAN);
    if x.is_negative() {
        -v.abs()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [PolynomialFamily; 6] = [
        PolynomialFamily::Chebyshev1,
        PolynomialFamily::Chebyshev2,
        PolynomialFamily::Hermite,
        PolynomialFamily::Jacobi { a: 0.5, b: -0.25 },
        PolynomialFamily::Laguerre,
        PolynomialFamily::Legendre,
    ];

    #[test]
    fn table_rows() {
        let t = recurrence_coeffs(PolynomialFamily::Legendre, 3).unwrap();
        assert_eq!((t.alpha, t.beta, t.gamma), (1.0 / 7.0, 0.0, -1.0 / 7.0));
        for i in 1..5 {
            let t = recurrence_coeffs(PolynomialFamily::Laguerre, i).unwrap();
            assert_eq!((t.alpha, t.beta, t.gamma), (-1.0, 1.0, 0.0));
        }
        let t = recurrence_coeffs(PolynomialFamily::Hermite, 2).unwrap();
        assert_eq!((t.alpha, t.beta, t.gamma), (1.0 / 6.0, 0.0, 0.0));
        assert!(matches!(
            recurrence_coeffs(PolynomialFamily::Chebyshev1, 1),
            Err(Error::UndefinedCoefficient { .. })
        ));
    }

    #[test]
    fn jacobi_zero_zero_is_legendre() {
        let j = PolynomialFamily::jacobi_default();
        for i in 1..20 {
            let a = recurrence_coeffs(j, i).unwrap();
            let b = recurrence_coeffs(PolynomialFamily::Legendre, i).unwrap();
            assert!((a.alpha - b.alpha).abs() < 1e-15);
            assert!((a.beta - b.beta).abs() < 1e-15);
            assert!((a.gamma - b.gamma).abs() < 1e-15);
            assert!((eval_poly(j, i, 0.3) - eval_poly(PolynomialFamily::Legendre, i, 0.3)).abs() < 1e-13);
        }
    }

    #[test]
    fn polynomial_values() {
        assert_eq!(eval_poly(PolynomialFamily::Legendre, 0, 0.7), 1.0);
        assert!((eval_poly(PolynomialFamily::Chebyshev1, 2, 0.5) + 0.5).abs() < 1e-15);
        assert_eq!(eval_poly(PolynomialFamily::Laguerre, 1, 0.0), 1.0);
        // T_n(cos x) = cos(n x)
        let x = 0.4f64;
        for n in 0..12 {
            let v = eval_poly(PolynomialFamily::Chebyshev1, n, x.cos());
            assert!((v - (n as f64 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn g0_over_g1dot_from_polynomials() {
        for f in ALL {
            let g1 = monomial_coeffs(f, 1);
            assert!((g0_over_g1dot(f) - 1.0 / g1[1]).abs() < 1e-15, "{f}");
        }
    }

    #[test]
    fn differential_recurrence_holds() {
        for f in ALL {
            for i in 1..10 {
                let t = recurrence_coeffs(f, i).ok();
                let (al, be) = (alpha::<f64>(f, i), beta::<f64>(f, i));
                let ga = t.map(|t| t.gamma).unwrap_or(0.0);
                for &x in &[-0.7, 0.1, 0.55] {
                    let lhs = eval_poly(f, i, x);
                    let mut rhs = al * eval_poly_derivative(f, i + 1, x) + be * eval_poly_derivative(f, i, x);
                    if i >= 2 || f != PolynomialFamily::Chebyshev1 {
                        rhs += ga * eval_poly_derivative(f, i - 1, x);
                    }
                    if f == PolynomialFamily::Chebyshev1 && i == 1 {
                        // T_1 = T_2'/4 exactly
                        rhs = al * eval_poly_derivative(f, 2, x);
                    }
                    assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{f} i={i} x={x}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn e_tilde_examples() {
        let p = build_e_tilde(PolynomialFamily::Laguerre, 2, 0.0).unwrap();
        let et = p.e_small.transpose();
        assert_eq!([et[(0, 0)], et[(0, 1)], et[(1, 0)], et[(1, 1)]], [1.0, 1.0, 1.0, -1.0]);
        let p = build_e_tilde(PolynomialFamily::Legendre, 3, 0.0).unwrap();
        assert!((p.e_small.transpose()[(2, 1)] + 1.0 / 3.0).abs() < 1e-16);
        for f in ALL {
            let p = build_e_tilde(f, 5, 0.0).unwrap();
            assert_eq!(p.a_small[(0, 0)], 0.0);
            assert_eq!(numkernel::numerical_rank(p.a_small.as_ref(), numkernel::RankTol::Relative(1e-12)), 4);
        }
    }

    #[test]
    fn e_hat_examples() {
        let p = build_e_hat(PolynomialFamily::Laguerre, 3).unwrap();
        let want = [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [0.0, 0.0, -1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p.e_small[(i, j)], want[i][j]);
            }
        }
        let h = build_e_hat(PolynomialFamily::Hermite, 3).unwrap().e_small;
        for i in 0..3 {
            for j in 0..=i {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        let l = build_e_hat(PolynomialFamily::Legendre, 2).unwrap().e_small;
        assert_eq!(l[(0, 0)], 0.0);
        assert!((l[(0, 1)] + 1.0 / 3.0).abs() < 1e-16);
        assert!((l[(1, 0)] - 1.0 / 5.0).abs() < 1e-16);
        let det = l[(0, 0)] * l[(1, 1)] - l[(0, 1)] * l[(1, 0)];
        assert!((det - 1.0 / 15.0).abs() < 1e-16);
    }

    #[test]
    fn e_hat_inverses() {
        let inv = invert_e_hat(PolynomialFamily::Laguerre, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inv[(i, j)], if i <= j { -1.0 } else { 0.0 });
            }
        }
        assert!(matches!(
            invert_e_hat(PolynomialFamily::Legendre, 3),
            Err(Error::SingularSmallMatrix { .. })
        ));
        assert!(matches!(
            invert_e_hat(PolynomialFamily::Hermite, 4),
            Err(Error::SingularSmallMatrix { .. })
        ));
        let inv = invert_e_hat(PolynomialFamily::Legendre, 6).unwrap();
        let e = build_e_hat(PolynomialFamily::Legendre, 6).unwrap().e_small;
        assert!(numkernel::frobenius((&e * &inv - Mat::<f64>::identity(6, 6)).as_ref()) < 1e-12);
    }

    #[test]
    fn laguerre_inverse_float_accuracy() {
        for r in [1usize, 10, 50, 100] {
            let e = build_e_hat(PolynomialFamily::Laguerre, r).unwrap().e_small;
            let inv = invert_e_hat(PolynomialFamily::Laguerre, r).unwrap();
            let d = &e * &inv - Mat::<f64>::identity(r, r);
            assert!(numkernel::frobenius(d.as_ref()) < 1e-13);
        }
    }

    #[test]
    fn weights() {
        assert_eq!(input_weights(4, Variant::Tdmor2), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(input_weights(3, Variant::Tdmor1), vec![1.0, 0.0]);
    }

    #[test]
    fn parse_families() {
        assert_eq!("Legendre".parse::<PolynomialFamily>().unwrap(), PolynomialFamily::Legendre);
        assert_eq!(
            "jacobi(0.5,1)".parse::<PolynomialFamily>().unwrap(),
            PolynomialFamily::Jacobi { a: 0.5, b: 1.0 }
        );
        assert!("gegenbauer".parse::<PolynomialFamily>().is_err());
        assert!("jacobi(-2,0)".parse::<PolynomialFamily>().is_err());
    }

    #[test]
    fn regularity_case_table() {
        for r in 2..=30 {
            let odd = r % 2 == 1;
            let fam = |f| (is_regular(f, Variant::Tdmor1, r, 0.0).unwrap(), is_regular(f, Variant::Tdmor2, r, 0.0).unwrap());
            assert_eq!(fam(PolynomialFamily::Hermite), (odd, false), "hermite r={r}");
            assert_eq!(fam(PolynomialFamily::Laguerre), (true, true), "laguerre r={r}");
            for f in [PolynomialFamily::Legendre, PolynomialFamily::Chebyshev1, PolynomialFamily::Chebyshev2] {
                assert_eq!(fam(f), (odd, !odd), "{f} r={r}");
            }
        }
    }
}
