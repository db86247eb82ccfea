//! Dense kernels shared by the rest of the crate.
//!
//! Everything here is a pure function of its inputs. Generalized eigenvalues
//! follow the convention `A v = lambda B v`, so the spectrum of the pencil
//! `(-I, E_hat)` is exactly the spectrum of `-E_hat^{-1}`.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Scalars the dense solvers accept.
pub trait Scalar: faer::traits::ComplexField + Copy {
    fn modulus(self) -> f64;
    fn is_exact_zero(self) -> bool {
        self.modulus() == 0.0
    }
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for c64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Solves `M X = RHS` with partially pivoted LU.
pub fn solve_dense<T: Scalar>(m: MatRef<'_, T>, rhs: MatRef<'_, T>) -> Result<Mat<T>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "solve_dense needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if rhs.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, matrix has order {}",
            rhs.nrows(),
            m.nrows()
        )));
    }
    let lu = m.partial_piv_lu();
    let u = lu.U();
    for k in 0..u.nrows() {
        if u[(k, k)].is_exact_zero() {
            return Err(Error::SingularMatrix { pivot: k });
        }
    }
    let mut x = rhs.to_owned();
    lu.solve_in_place(x.as_mut());
    Ok(x)
}

/// Dense inverse via [`solve_dense`].
pub fn inverse<T: Scalar>(m: MatRef<'_, T>) -> Result<Mat<T>> {
    let id = Mat::<T>::identity(m.nrows(), m.nrows());
    solve_dense(m, id.as_ref())
}

pub fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

pub fn real_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

pub fn imag_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im)
}

pub fn frobenius<T: Scalar>(m: MatRef<'_, T>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let a = m[(i, j)].modulus();
            s += a * a;
        }
    }
    s.sqrt()
}

fn col_norm(m: MatRef<'_, f64>, j: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        s += m[(i, j)] * m[(i, j)];
    }
    s.sqrt()
}

/// Orthonormal basis of the column span of `v`.
///
/// Columns are normalized, then orthogonalized in order with repeated
/// modified Gram-Schmidt. A column whose remaining component falls below
/// `drop_tol` (relative to its own unit length) is dropped as dependent.
pub fn orthonormal_basis(v: MatRef<'_, f64>, drop_tol: f64) -> Result<Mat<f64>> {
    let n = v.nrows();
    let drop_tol = drop_tol.max(8.0 * f64::EPSILON);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let scale = (0..v.ncols()).map(|j| col_norm(v, j)).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroMatrix);
    }
    for j in 0..v.ncols() {
        let nrm = col_norm(v, j);
        if nrm <= f64::EPSILON * scale {
            continue;
        }
        let mut w: Vec<f64> = (0..n).map(|i| v[(i, j)] / nrm).collect();
        let mut prev = 1.0;
        let mut remaining = 1.0;
        for _pass in 0..3 {
            for q in &kept {
                let d: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= d * qi;
                }
            }
            remaining = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if remaining > 0.5 * prev {
                break;
            }
            prev = remaining;
        }
        if remaining <= drop_tol {
            continue;
        }
        for wi in w.iter_mut() {
            *wi /= remaining;
        }
        kept.push(w);
    }
    if kept.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    Ok(Mat::from_fn(n, kept.len(), |i, j| kept[j][i]))
}

/// A generalized eigenvalue, possibly at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eigenvalue {
    Finite(c64),
    Infinite,
}

impl Eigenvalue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Eigenvalue::Infinite)
    }

    pub fn finite(&self) -> Option<c64> {
        match self {
            Eigenvalue::Finite(z) => Some(*z),
            Eigenvalue::Infinite => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub values: Vec<Eigenvalue>,
    /// Right eigenvectors as columns, when they were computed.
    pub vectors: Option<Mat<c64>>,
}

impl SpectrumResult {
    pub fn infinite_flags(&self) -> Vec<bool> {
        self.values.iter().map(Eigenvalue::is_infinite).collect()
    }

    pub fn finite_values(&self) -> Vec<c64> {
        self.values.iter().filter_map(Eigenvalue::finite).collect()
    }
}

fn is_upper_triangular(m: MatRef<'_, f64>) -> bool {
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            if m[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Largest `cond_2(B)` for which [`generalized_eigenvalues`] inverts `B`.
pub const REDUCE_TO_STANDARD_COND: f64 = 1e6;

/// All `lambda` with `det(A - lambda B) = 0`.
///
/// Pencils that are already upper triangular are read off the diagonals
/// exactly. A well-conditioned `B` goes through the standard eigenproblem of
/// `B^{-1} A` (faer's QZ can take seconds on some dense pencils of order
/// 80 and up); anything else goes through QZ.
pub fn generalized_eigenvalues(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<SpectrumResult> {
    check_square_pair(a, b)?;
    if is_upper_triangular(a) && is_upper_triangular(b) {
        let mut values = Vec::with_capacity(a.nrows());
        for k in 0..a.nrows() {
            let (akk, bkk) = (a[(k, k)], b[(k, k)]);
            if bkk == 0.0 {
                if akk == 0.0 {
                    return Err(Error::SingularPencil);
                }
                values.push(Eigenvalue::Infinite);
            } else {
                values.push(Eigenvalue::Finite(c64::new(akk / bkk, 0.0)));
            }
        }
        return Ok(SpectrumResult {
            values,
            vectors: None,
        });
    }
    if condition_2norm(b) <= REDUCE_TO_STANDARD_COND {
        let m = solve_dense(b, a)?;
        let values = eigenvalues(m.as_ref())?.into_iter().map(Eigenvalue::Finite).collect();
        return Ok(SpectrumResult {
            values,
            vectors: None,
        });
    }
    generalized_eigen_qz(a, b)
}

/// QZ path; eigenvalues only.
///
/// Calls the low-level routine with a padded workspace: the eigenvector
/// back-substitution in faer 0.24 under-estimates its scratch on some
/// pencils, and skipping the vectors also skips the QZ sweep. The vectors
/// are computed but discarded.
pub fn generalized_eigen_qz(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<SpectrumResult> {
    use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
    use faer::linalg::evd::ComputeEigenvectors;
    use faer::linalg::gevd;
    check_square_pair(a, b)?;
    let n = a.nrows();
    let mut aw = a.to_owned();
    let mut bw = b.to_owned();
    let mut s_re = faer::diag::Diag::<f64>::zeros(n);
    let mut s_im = faer::diag::Diag::<f64>::zeros(n);
    let mut beta = faer::diag::Diag::<f64>::zeros(n);
    let par = faer::Par::Seq;
    let mut u = Mat::<f64>::zeros(n, n);
    let req = gevd::gevd_scratch::<f64>(n, ComputeEigenvectors::No, ComputeEigenvectors::Yes, par, Default::default())
        .and(StackReq::new::<f64>(8 * n * (n + 4)));
    let mut mem = MemBuffer::new(req);
    gevd::gevd_real(
        aw.as_mut(),
        bw.as_mut(),
        s_re.as_mut(),
        s_im.as_mut(),
        beta.as_mut(),
        None,
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|_| Error::NoConvergence)?;
    let tol = 10.0 * n as f64 * f64::EPSILON;
    let na = frobenius(a).max(f64::MIN_POSITIVE);
    let nb = frobenius(b).max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let alpha = c64::new(s_re[k], s_im[k]);
        let bk = beta[k];
        let beta_small = bk.abs() <= tol * nb;
        if beta_small && alpha.norm() <= tol * na {
            return Err(Error::SingularPencil);
        }
        if beta_small {
            values.push(Eigenvalue::Infinite);
        } else {
            values.push(Eigenvalue::Finite(alpha / bk));
        }
    }
    Ok(SpectrumResult {
        values,
        vectors: None,
    })
}

fn check_square_pair(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "pencil needs two square matrices of equal order, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Standard eigendecomposition `A X = X diag(lambda)`.
pub fn eigen(a: MatRef<'_, f64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let e = a.eigen().map_err(|_| Error::NoConvergence)?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|k| s[k]).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<c64>> {
    a.eigenvalues().map_err(|_| Error::NoConvergence)
}

pub fn eigen_complex(a: MatRef<'_, c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let e = a.eigen().map_err(|_| Error::NoConvergence)?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|k| s[k]).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn singular_values<T: Scalar>(m: MatRef<'_, T>) -> Vec<f64>
where
    T: faer::traits::ComplexField<Real = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    match m.singular_values() {
        Ok(s) => s,
        Err(_) => vec![f64::NAN; m.nrows().min(m.ncols())],
    }
}

/// Principal angles between two orthonormal column spans, ascending.
///
/// Small angles come from the sines of the residual `(I - UU^T) W` so they
/// stay accurate below `sqrt(eps)`; larger ones come from the cosines.
pub fn principal_angles(u: MatRef<'_, f64>, w: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if u.nrows() != w.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "bases have {} and {} rows",
            u.nrows(),
            w.nrows()
        )));
    }
    let (u, w) = if w.ncols() > u.ncols() { (w, u) } else { (u, w) };
    let k = w.ncols();
    if k == 0 {
        return Ok(Vec::new());
    }
    let m = u.transpose() * w;
    let mut cosines = singular_values(m.as_ref());
    cosines.sort_by(|a, b| b.total_cmp(a));
    let resid = w - u * &m;
    let mut sines = singular_values(resid.as_ref());
    sines.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let s = sines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
        let c = cosines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
        let theta = if s * s < 0.5 { s.asin() } else { c.acos() };
        out.push(theta.clamp(0.0, std::f64::consts::FRAC_PI_2));
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Threshold used by [`numerical_rank`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankTol {
    /// Count singular values above `tol * sigma_max`.
    Relative(f64),
    /// Count singular values above `tol`.
    Absolute(f64),
}

impl RankTol {
    pub fn default_for(rows: usize, cols: usize) -> RankTol {
        RankTol::Relative(rows.max(cols) as f64 * f64::EPSILON)
    }
}

pub fn numerical_rank(m: MatRef<'_, f64>, tol: RankTol) -> usize {
    let s = singular_values(m);
    let smax = s.iter().copied().fold(0.0, f64::max);
    let cut = match tol {
        RankTol::Relative(t) => t * smax,
        RankTol::Absolute(t) => t,
    };
    s.iter().filter(|&&x| x > cut).count()
}

/// `sigma_max / sigma_min`; `f64::INFINITY` when the smallest is zero and
/// NaN when the SVD fails.
pub fn condition_2norm(m: MatRef<'_, f64>) -> f64 {
    let s = singular_values(m);
    if s.iter().any(|x| x.is_nan()) {
        return f64::NAN;
    }
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Complex Schur form `A = Q T Q^H`, `T` upper triangular.
pub struct ComplexSchur {
    pub q: Mat<c64>,
    pub t: Mat<c64>,
}

struct Dense {
    n: usize,
    d: Vec<c64>,
}

impl Dense {
    #[inline]
    fn at(&self, i: usize, j: usize) -> c64 {
        self.d[i + j * self.n]
    }
    #[inline]
    fn set(&mut self, i: usize, j: usize, v: c64) {
        self.d[i + j * self.n] = v;
    }
    fn rot_rows(&mut self, i: usize, j: usize, c: f64, s: c64, cols: std::ops::Range<usize>) {
        for col in cols {
            let x = self.at(i, col);
            let y = self.at(j, col);
            self.set(i, col, x * c + s * y);
            self.set(j, col, -s.conj() * x + y * c);
        }
    }
    fn rot_cols(&mut self, i: usize, j: usize, c: f64, s: c64, rows: std::ops::Range<usize>) {
        let n = self.n;
        let (ci, cj) = (i * n, j * n);
        for r in rows {
            let x = self.d[ci + r];
            let y = self.d[cj + r];
            self.d[ci + r] = x * c + s.conj() * y;
            self.d[cj + r] = -s * x + y * c;
        }
    }
}

// (c, s) with [c s; -conj(s) c] [a; b] = [*; 0]
fn givens(a: c64, b: c64) -> (f64, c64) {
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, c64::new(0.0, 0.0));
    }
    let na = a.norm();
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r)
}

/// Complex Schur decomposition by Householder reduction to Hessenberg form
/// followed by single-shift QR with Wilkinson shifts.
pub fn complex_schur(a: MatRef<'_, c64>) -> Result<ComplexSchur> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("complex_schur needs a square matrix".into()));
    }
    let mut h = Dense {
        n,
        d: vec![c64::new(0.0, 0.0); n * n],
    };
    for j in 0..n {
        for i in 0..n {
            let v = a[(i, j)];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NoConvergence);
            }
            h.set(i, j, v);
        }
    }
    let mut q = Dense {
        n,
        d: vec![c64::new(0.0, 0.0); n * n],
    };
    for i in 0..n {
        q.set(i, i, c64::new(1.0, 0.0));
    }
    hessenberg(&mut h, &mut q);
    qr_iterate(&mut h, &mut q)?;
    let t = Mat::from_fn(n, n, |i, j| if i <= j { h.at(i, j) } else { c64::new(0.0, 0.0) });
    let qm = Mat::from_fn(n, n, |i, j| q.at(i, j));
    Ok(ComplexSchur { q: qm, t })
}

fn hessenberg(h: &mut Dense, q: &mut Dense) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let mut v = vec![c64::new(0.0, 0.0); n];
    let mut tmp = vec![c64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut alpha_norm2 = 0.0;
        for i in 0..m {
            let x = h.at(k + 1 + i, k);
            v[i] = x;
            alpha_norm2 += x.norm_sqr();
        }
        let alpha = alpha_norm2.sqrt();
        let tail: f64 = (1..m).map(|i| v[i].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 {
            c64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase*|x| e1, reflector I - 2 v v^H / (v^H v)
        v[0] = x0 + phase * alpha;
        let vnorm2: f64 = (0..m).map(|i| v[i].norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        // left: rows k+1.., columns k..n
        for j in k..n {
            let mut s = c64::new(0.0, 0.0);
            for i in 0..m {
                s += v[i].conj() * h.at(k + 1 + i, j);
            }
            s *= tau;
            for i in 0..m {
                let cur = h.at(k + 1 + i, j);
                h.set(k + 1 + i, j, cur - v[i] * s);
            }
        }
        // right on h and q: columns k+1.., all rows
        for mat in [&mut *h, &mut *q] {
            for t in tmp.iter_mut() {
                *t = c64::new(0.0, 0.0);
            }
            for i in 0..m {
                let vi = v[i];
                let col = (k + 1 + i) * n;
                for r in 0..n {
                    tmp[r] += mat.d[col + r] * vi;
                }
            }
            for i in 0..m {
                let vc = v[i].conj() * tau;
                let col = (k + 1 + i) * n;
                for r in 0..n {
                    mat.d[col + r] -= tmp[r] * vc;
                }
            }
        }
        for i in (k + 2)..n {
            h.set(i, k, c64::new(0.0, 0.0));
        }
    }
}

fn wilkinson_shift(a: c64, b: c64, c: c64, d: c64) -> c64 {
    // eigenvalue of [[a, b], [c, d]] closer to d
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterate(h: &mut Dense, q: &mut Dense) -> Result<()> {
    let n = h.n;
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter_since = 0usize;
    let max_total = 100 * n.max(10);
    let mut total = 0usize;
    loop {
        if hi == 0 {
            break;
        }
        // find active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h.at(lo, lo - 1).norm();
            let diag = h.at(lo, lo).norm() + h.at(lo - 1, lo - 1).norm();
            if sub <= eps * diag.max(f64::MIN_POSITIVE) || sub < f64::MIN_POSITIVE {
                h.set(lo, lo - 1, c64::new(0.0, 0.0));
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter_since = 0;
            continue;
        }
        total += 1;
        iter_since += 1;
        if total > max_total {
            return Err(Error::NoConvergence);
        }
        let mu = if iter_since % 11 == 10 {
            let s = h.at(hi, hi - 1).norm() + if hi >= 2 { h.at(hi - 1, hi - 2).norm() } else { 0.0 };
            h.at(hi, hi) + c64::new(0.75 * s, 0.3 * s)
        } else {
            wilkinson_shift(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            )
        };
        // implicit single-shift sweep over [lo, hi]
        let (c, s) = givens(h.at(lo, lo) - mu, h.at(lo + 1, lo));
        h.rot_rows(lo, lo + 1, c, s, lo..n);
        let rmax = (lo + 3).min(hi + 1);
        h.rot_cols(lo, lo + 1, c, s, 0..rmax);
        q.rot_cols(lo, lo + 1, c, s, 0..n);
        for k in (lo + 1)..hi {
            let (c, s) = givens(h.at(k, k - 1), h.at(k + 1, k - 1));
            h.rot_rows(k, k + 1, c, s, (k - 1)..n);
            h.set(k + 1, k - 1, c64::new(0.0, 0.0));
            let rmax = (k + 3).min(hi + 1);
            h.rot_cols(k, k + 1, c, s, 0..rmax);
            q.rot_cols(k, k + 1, c, s, 0..n);
        }
    }
    Ok(())
}

/// Solves upper triangular `T x = b` in place.
pub fn solve_upper_triangular_in_place(t: MatRef<'_, c64>, b: &mut [c64]) -> Result<()> {
    let n = t.nrows();
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= t[(i, j)] * b[j];
        }
        let d = t[(i, i)];
        if d.norm() == 0.0 {
            return Err(Error::SingularMatrix { pivot: i });
        }
        b[i] = s / d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<f64> {
        Mat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = Mat::from_fn(3, 1, |i, _| i as f64 + 1.0);
        let x = solve_dense(Mat::<f64>::identity(3, 3).as_ref(), b.as_ref()).unwrap();
        assert_eq!(x, b);
        let m = Mat::from_fn(2, 2, |i, j| if i == j { [2.0, 4.0][i] } else { 0.0 });
        let rhs = Mat::from_fn(2, 1, |i, _| [2.0, 8.0][i]);
        let x = solve_dense(m.as_ref(), rhs.as_ref()).unwrap();
        assert_eq!(x[(0, 0)], 1.0);
        assert_eq!(x[(1, 0)], 2.0);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = rand_mat(&mut rng, 20, 20) + Mat::<f64>::identity(20, 20) * 8.0;
        let xs = rand_mat(&mut rng, 20, 3);
        let rhs = &m * &xs;
        let x = solve_dense(m.as_ref(), rhs.as_ref()).unwrap();
        assert!(frobenius((&x - &xs).as_ref()) < 1e-10);
    }

    #[test]
    fn solve_singular_reports_pivot() {
        let m = Mat::from_fn(2, 2, |i, _| i as f64);
        let rhs = Mat::<f64>::zeros(2, 1);
        match solve_dense(m.as_ref(), rhs.as_ref()) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn orthonormal_basis_examples() {
        let e1 = Mat::from_fn(3, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let q = orthonormal_basis(e1.as_ref(), 1e-12).unwrap();
        assert_eq!(q, e1);
        let dup = Mat::from_fn(3, 2, |i, j| if i == 0 { 1.0 + j as f64 } else { 0.0 });
        let q = orthonormal_basis(dup.as_ref(), 1e-12).unwrap();
        assert_eq!(q.ncols(), 1);
        assert!((q[(0, 0)].abs() - 1.0).abs() < 1e-15);
        let z = Mat::<f64>::zeros(4, 2);
        assert!(matches!(orthonormal_basis(z.as_ref(), 1e-12), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn orthonormal_basis_random_against_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = rand_mat(&mut rng, 50, 8);
        let q = orthonormal_basis(v.as_ref(), 1e-12).unwrap();
        assert_eq!(q.ncols(), 8);
        let g = q.transpose() * &q - Mat::<f64>::identity(8, 8);
        assert!(frobenius(g.as_ref()) < 1e-12);
        let svd = v.thin_svd().unwrap();
        let ang = principal_angles(q.as_ref(), svd.U()).unwrap();
        assert!(ang.iter().all(|&a| a < 1e-12), "{ang:?}");
    }

    #[test]
    fn pencil_examples() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let sp = generalized_eigenvalues(a.as_ref(), Mat::<f64>::identity(2, 2).as_ref()).unwrap();
        assert_eq!(sp.finite_values(), vec![c64::new(1.0, 0.0), c64::new(2.0, 0.0)]);

        let m1 = -Mat::<f64>::identity(2, 2);
        let nil = Mat::from_fn(2, 2, |i, j| if j == i + 1 { 0.5 } else { 0.0 });
        let sp = generalized_eigenvalues(m1.as_ref(), nil.as_ref()).unwrap();
        assert_eq!(sp.infinite_flags(), vec![true, true]);

        let zero = Mat::<f64>::zeros(2, 2);
        assert!(matches!(
            generalized_eigenvalues(zero.as_ref(), zero.as_ref()),
            Err(Error::SingularPencil)
        ));
    }

    #[test]
    fn qz_infinite_flag_on_full_pencil() {
        // rotate a pencil with one infinite eigenvalue so the fast path is skipped
        let c = 0.6f64;
        let s = 0.8f64;
        let rot = Mat::from_fn(2, 2, |i, j| [[c, -s], [s, c]][i][j]);
        let a = &rot * Mat::from_fn(2, 2, |i, j| if i == j { [1.0, 2.0][i] } else { 0.0 });
        let b = &rot * Mat::from_fn(2, 2, |i, j| if i == j { [1.0, 0.0][i] } else { 0.0 });
        let sp = generalized_eigen_qz(a.as_ref(), b.as_ref()).unwrap();
        assert_eq!(sp.infinite_flags().iter().filter(|&&f| f).count(), 1);
        let fin = sp.finite_values();
        assert!((fin[0] - c64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn principal_angles_examples() {
        let e = |k: usize| Mat::from_fn(3, 1, move |i, _| if i == k { 1.0 } else { 0.0 });
        assert_eq!(principal_angles(e(0).as_ref(), e(0).as_ref()).unwrap(), vec![0.0]);
        let a = principal_angles(e(0).as_ref(), e(1).as_ref()).unwrap();
        assert!((a[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let u = Mat::from_fn(3, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = Mat::from_fn(3, 2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 1) | (2, 1) => h,
            _ => 0.0,
        });
        let a = principal_angles(u.as_ref(), w.as_ref()).unwrap();
        assert!(a[0].abs() < 1e-15);
        assert!((a[1] - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn rank_and_condition() {
        let i5 = Mat::<f64>::identity(5, 5);
        assert_eq!(numerical_rank(i5.as_ref(), RankTol::Relative(1e-12)), 5);
        let u = Mat::from_fn(6, 2, |i, j| ((i + 1) * (j + 2)) as f64 + (i * i * j) as f64);
        let v = Mat::from_fn(6, 2, |i, j| (i as f64 - 2.5) * (j as f64 + 1.0) + (j * i) as f64 * 0.3);
        let m = &u * v.transpose();
        assert_eq!(numerical_rank(m.as_ref(), RankTol::Relative(1e-12)), 2);
        assert_eq!(numerical_rank(m.as_ref(), RankTol::Absolute(1e-9)), 2);
        assert!((condition_2norm(Mat::<f64>::identity(4, 4).as_ref()) - 1.0).abs() < 1e-15);
        let d = Mat::from_fn(2, 2, |i, j| if i == j { [1.0, 1e-8][i] } else { 0.0 });
        assert!((condition_2norm(d.as_ref()) / 1e8 - 1.0).abs() < 1e-12);
        assert_eq!(condition_2norm(Mat::<f64>::zeros(2, 2).as_ref()), f64::INFINITY);
    }

    #[test]
    fn complex_schur_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 2, 5, 30] {
            let a = to_complex(rand_mat(&mut rng, n, n).as_ref());
            let sch = complex_schur(a.as_ref()).unwrap();
            let back = &sch.q * &sch.t * sch.q.adjoint();
            assert!(frobenius((&back - &a).as_ref()) < 1e-12 * (n as f64) * frobenius(a.as_ref()));
            let qq = sch.q.adjoint() * &sch.q - Mat::<c64>::identity(n, n);
            assert!(frobenius(qq.as_ref()) < 1e-12 * n as f64);
        }
    }

    #[test]
    fn complex_schur_jordan_block() {
        let n = 6;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(2.0, 0.0)
            } else if j == i + 1 {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let sch = complex_schur(a.as_ref()).unwrap();
        let back = &sch.q * &sch.t * sch.q.adjoint();
        assert!(frobenius((&back - &a).as_ref()) < 1e-12);
    }
}
