//! Observability of the small Sylvester pairs, expansion points and the
//! closed-form structure of the observability matrices.

use faer::{c64, Mat, MatRef};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numkernel::{self, Eigenvalue, RankTol};
use crate::orthopoly::{self, PolynomialFamily, Variant};

#[derive(Clone, Debug)]
pub struct ObservabilityMatrix {
    /// Row `j` is `L S^j`.
    pub matrix: Mat<f64>,
    pub source: String,
}

/// Stacks `L, L S, .., L S^{r-1}`.
pub fn observability_matrix(s: MatRef<'_, f64>, l: &[f64]) -> Result<ObservabilityMatrix> {
    let r = s.nrows();
    if s.ncols() != r || l.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "S is {}x{}, L has {} entries",
            s.nrows(),
            s.ncols(),
            l.len()
        )));
    }
    let mut m = Mat::<f64>::zeros(r, r);
    let mut row = l.to_vec();
    for i in 0..r {
        for j in 0..r {
            m[(i, j)] = row[j];
        }
        row = (0..r).map(|j| (0..r).map(|k| row[k] * s[(k, j)]).sum()).collect();
    }
    Ok(ObservabilityMatrix {
        matrix: m,
        source: "(S, L)".into(),
    })
}

/// Which small pair a Sylvester solve uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// `S = -A_tilde E_tilde^{-1}`, `L = [0, w] E_tilde^{-1}`.
    First,
    /// `S = -E_hat^{-1}`, `L = e_1^T E_hat^{-1}`.
    Second,
    /// `S = -E_hat`, `L = e_1^T`, with `E` and `A` swapped.
    Swapped,
}

#[derive(Clone, Debug)]
pub struct SmallPair {
    pub s: Mat<f64>,
    pub l: Vec<f64>,
    pub kind: PairKind,
}

/// The pair `(-E_hat, e_1^T)` of the swapped formulation.
pub fn swapped_pair(family: PolynomialFamily, r: usize) -> Result<SmallPair> {
    let e = orthopoly::build_e_hat(family, r)?.e_small;
    Ok(SmallPair {
        s: -e,
        l: orthopoly::input_weights(r, Variant::Tdmor2),
        kind: PairKind::Swapped,
    })
}

/// The pair a variant's Sylvester equation is written with. The second
/// variant falls back to the swapped pair when `E_hat` is singular; the first
/// variant has no such fallback.
pub fn observability_pair(family: PolynomialFamily, variant: Variant, r: usize, t0: f64) -> Result<SmallPair> {
    match variant {
        Variant::Tdmor2 => {
            let regular = family == PolynomialFamily::Laguerre || orthopoly::is_regular(family, variant, r, t0)?;
            if !regular {
                return swapped_pair(family, r);
            }
            let inv = orthopoly::invert_e_hat(family, r)?;
            let w = orthopoly::input_weights(r, variant);
            let l = (0..r).map(|j| (0..r).map(|i| w[i] * inv[(i, j)]).sum()).collect();
            Ok(SmallPair {
                s: -inv,
                l,
                kind: PairKind::Second,
            })
        }
        Variant::Tdmor1 => {
            let pair = orthopoly::build_e_tilde(family, r, t0)?;
            let inv = orthopoly::invert_e_tilde(family, r, t0)?;
            let mut f = vec![0.0; r];
            f[1..].copy_from_slice(&orthopoly::input_weights(r, variant));
            let l = (0..r).map(|j| (0..r).map(|i| f[i] * inv[(i, j)]).sum()).collect();
            Ok(SmallPair {
                s: -(&pair.a_small * &inv),
                l,
                kind: PairKind::First,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObservabilityCheck {
    pub rank: usize,
    pub deficiency: usize,
}

/// Numerical rank of `Ob(S, L)` and `r - rank`.
pub fn check_observability(s: MatRef<'_, f64>, l: &[f64], mode: RankTol) -> Result<ObservabilityCheck> {
    let ob = observability_matrix(s, l)?;
    let rank = numkernel::numerical_rank(ob.matrix.as_ref(), mode);
    Ok(ObservabilityCheck {
        rank,
        deficiency: s.nrows() - rank,
    })
}

/// Absolute rank threshold used for the observability sweeps.
pub const OBSERVABILITY_RANK_TOL: f64 = 1e-20;

/// Pascal matrix `P_ij = binom(i + j, j)` (0-based) in exact integers.
pub fn pascal_exact(r: usize) -> Result<Vec<Vec<u128>>> {
    let mut p = vec![vec![1u128; r]; r];
    for i in 1..r {
        for j in 1..r {
            p[i][j] = p[i - 1][j]
                .checked_add(p[i][j - 1])
                .ok_or_else(|| Error::Overflow(format!("Pascal matrix of order {r} exceeds 128-bit integers")))?;
        }
    }
    Ok(p)
}

/// Pascal matrix in floating point; fails once an entry is no longer an
/// exactly representable integer.
pub fn pascal_oracle(r: usize) -> Result<Mat<f64>> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let p = pascal_exact(r)?;
    let limit = 1u128 << 53;
    if p[r - 1][r - 1] > limit {
        return Err(Error::Overflow(format!("Pascal matrix of order {r} is not exact in double precision")));
    }
    Ok(Mat::from_fn(r, r, |i, j| p[i][j] as f64))
}

/// `|diag Ob(-E_hat, e_1^T)|` for Hermite: `1 / (2^{k-1} k!)`, `k = 1..r`.
pub fn hermite_obs_diagonal(r: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(r);
    let mut v = 1.0;
    for k in 1..=r {
        if k > 1 {
            v /= 2.0 * k as f64;
        }
        d.push(v);
    }
    d
}

/// Gauss-Jordan inverse over the rationals.
pub fn exact_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let r = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for c in 0..r {
        let p = (c..r).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..r {
            a[c][j] = &a[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for i in 0..r {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..r {
                let (ac, ic) = (a[c][j].clone(), inv[c][j].clone());
                a[i][j] -= &f * ac;
                inv[i][j] -= &f * ic;
            }
        }
    }
    Some(inv)
}

/// `Ob(S, L)` over the rationals.
pub fn exact_observability(s: &[Vec<BigRational>], l: &[BigRational]) -> Vec<Vec<BigRational>> {
    let r = s.len();
    let mut out = Vec::with_capacity(r);
    let mut row = l.to_vec();
    for _ in 0..r {
        let next = (0..r)
            .map(|j| (0..r).fold(BigRational::zero(), |acc, k| acc + &row[k] * &s[k][j]))
            .collect();
        out.push(std::mem::replace(&mut row, next));
    }
    out
}

/// `Ob(S_hat, L_hat)` for the second variant, exactly.
pub fn second_variant_observability_exact(family: PolynomialFamily, r: usize) -> Result<Vec<Vec<BigRational>>> {
    let e = orthopoly::e_hat_exact(family, r)?;
    let inv = exact_inverse(&e).ok_or(Error::SingularSmallMatrix {
        family: family.to_string(),
        r,
    })?;
    let s: Vec<Vec<BigRational>> = inv.iter().map(|row| row.iter().map(|x| -x.clone()).collect()).collect();
    let l: Vec<BigRational> = inv[0].clone();
    Ok(exact_observability(&s, &l))
}

/// Whether `Ob(S_hat, L_hat) = -Pascal(r)` holds exactly for Laguerre.
pub fn laguerre_matches_pascal(r: usize) -> Result<bool> {
    let ob = second_variant_observability_exact(PolynomialFamily::Laguerre, r)?;
    let p = pascal_exact(r)?;
    Ok((0..r).all(|i| {
        (0..r).all(|j| {
            let want = -BigRational::from_integer(BigInt::from(p[i][j]));
            ob[i][j] == want
        })
    }))
}

#[derive(Clone, Debug)]
pub struct ExpansionPointReport {
    pub points: Vec<Eigenvalue>,
    /// Over finite points; infinite when fewer than two are finite.
    pub min_pairwise_distance: f64,
    pub family: PolynomialFamily,
    pub r: usize,
    pub variant: Variant,
}

impl ExpansionPointReport {
    pub fn finite(&self) -> Vec<c64> {
        self.points.iter().filter_map(|p| p.finite()).collect()
    }

    pub fn all_infinite(&self) -> bool {
        self.points.iter().all(|p| p.is_infinite())
    }
}

pub fn min_pairwise_distance(points: &[c64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// Generalized eigenvalues of `(-I, E_hat)` or `(-A_tilde, E_tilde)`.
pub fn expansion_points(family: PolynomialFamily, r: usize, variant: Variant, t0: f64) -> Result<ExpansionPointReport> {
    let (a, b) = match variant {
        Variant::Tdmor2 => {
            let p = orthopoly::build_e_hat(family, r)?;
            (-p.a_small, p.e_small)
        }
        Variant::Tdmor1 => {
            let p = orthopoly::build_e_tilde(family, r, t0)?;
            (-p.a_small, p.e_small)
        }
    };
    let sp = numkernel::generalized_eigenvalues(a.as_ref(), b.as_ref())?;
    let finite = sp.finite_values();
    Ok(ExpansionPointReport {
        min_pairwise_distance: min_pairwise_distance(&finite),
        points: sp.values,
        family,
        r,
        variant,
    })
}

/// True iff the largest principal angle between the spans is below `angle_tol`.
pub fn subspace_equivalence(v1: MatRef<'_, f64>, v2: MatRef<'_, f64>, angle_tol: f64) -> Result<bool> {
    Ok(max_principal_angle(v1, v2)? < angle_tol)
}

pub fn max_principal_angle(v1: MatRef<'_, f64>, v2: MatRef<'_, f64>) -> Result<f64> {
    if v1.nrows() != v2.nrows() || v1.ncols() != v2.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "bases are {}x{} and {}x{}",
            v1.nrows(),
            v1.ncols(),
            v2.nrows(),
            v2.ncols()
        )));
    }
    let angles = numkernel::principal_angles(v1, v2)?;
    Ok(angles.iter().copied().fold(0.0, f64::max))
}

/// Largest `|m_ij|` above the diagonal.
pub fn upper_part_max(m: MatRef<'_, f64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j.min(m.nrows()) {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// Largest `|m_ij|` off the diagonal.
pub fn off_diagonal_max(m: MatRef<'_, f64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                best = best.max(m[(i, j)].abs());
            }
        }
    }
    best
}

/// `prod_{i<k} alpha_i` for `k = 0..r`, the diagonal of the swapped
/// observability matrix of the Jacobi-type families.
pub fn alpha_products(family: PolynomialFamily, r: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(r);
    let mut p = 1.0;
    for k in 0..r {
        if k > 0 {
            p *= orthopoly::alpha::<f64>(family, k);
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_observability() {
        let z = Mat::<f64>::zeros(1, 1);
        assert_eq!(observability_matrix(z.as_ref(), &[1.0]).unwrap().matrix[(0, 0)], 1.0);
        let s = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
        let ob = observability_matrix(s.as_ref(), &[1.0, 0.0]).unwrap().matrix;
        assert_eq!([ob[(0, 0)], ob[(0, 1)], ob[(1, 0)], ob[(1, 1)]], [1.0, 0.0, 0.0, 1.0]);
        let z3 = Mat::<f64>::zeros(3, 3);
        let c = check_observability(z3.as_ref(), &[1.0, 0.0, 0.0], RankTol::default_for(3, 3)).unwrap();
        assert_eq!((c.rank, c.deficiency), (1, 2));
    }

    #[test]
    fn pascal_small() {
        let p = pascal_oracle(3).unwrap();
        let want = [[1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [1.0, 3.0, 6.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p[(i, j)], want[i][j]);
            }
        }
        assert!(matches!(pascal_oracle(40), Err(Error::Overflow(_))));
    }

    #[test]
    fn laguerre_pascal_r6() {
        assert!(laguerre_matches_pascal(6).unwrap());
    }

    #[test]
    fn hermite_diagonal_values() {
        assert_eq!(hermite_obs_diagonal(1), vec![1.0]);
        assert_eq!(hermite_obs_diagonal(2), vec![1.0, 0.25]);
        assert!((hermite_obs_diagonal(3)[2] - 1.0 / 24.0).abs() < 1e-17);
    }

    #[test]
    fn jacobi_r3_triangular() {
        let fam = PolynomialFamily::jacobi_default();
        let p = swapped_pair(fam, 3).unwrap();
        let ob = observability_matrix(p.s.as_ref(), &p.l).unwrap().matrix;
        assert_eq!(upper_part_max(ob.as_ref()), 0.0);
        let d = alpha_products(fam, 3);
        for k in 0..3 {
            assert!((ob[(k, k)] - d[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn laguerre_and_hermite_points() {
        let lag = expansion_points(PolynomialFamily::Laguerre, 7, Variant::Tdmor2, 0.0).unwrap();
        assert!(lag.finite().iter().all(|p| *p == c64::new(1.0, 0.0)));
        assert_eq!(lag.finite().len(), 7);
        let her = expansion_points(PolynomialFamily::Hermite, 7, Variant::Tdmor2, 0.0).unwrap();
        assert!(her.all_infinite());
    }

    #[test]
    fn equivalence_trivial() {
        let e = Mat::<f64>::identity(4, 2);
        assert!(subspace_equivalence(e.as_ref(), e.as_ref(), 1e-12).unwrap());
        let e1 = Mat::from_fn(3, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let e2 = Mat::from_fn(3, 1, |i, _| if i == 1 { 1.0 } else { 0.0 });
        assert!(!subspace_equivalence(e1.as_ref(), e2.as_ref(), 1e-3).unwrap());
        assert!(subspace_equivalence(e1.as_ref(), e.as_ref(), 1e-3).is_err());
    }
}
