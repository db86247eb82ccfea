//! Sparse-dense Sylvester equations `P V - Q V S = B L` and dense Lyapunov
//! equations in factored form.
//!
//! The standard orientation has `(P, Q) = (A, E)`; the swapped one has
//! `(P, Q) = (E, A)`.

use faer::{c64, Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lti::{ShiftedSolver, SparseMatrix};
use crate::numkernel::{self, to_complex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `A V - E V S = B L`
    Standard,
    /// `E V - A V S = B L`
    Swapped,
}

#[derive(Clone, Debug)]
pub struct SylvesterProblem<'a> {
    pub a: &'a SparseMatrix,
    pub e: &'a SparseMatrix,
    pub b: &'a [f64],
    pub s: Mat<f64>,
    pub l: Vec<f64>,
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvePath {
    /// Eigendecomposition of `S` and one shifted solve per eigenvalue.
    Diagonal,
    /// Complex Schur form of `S` and a forward sweep over its columns.
    Schur,
}

#[derive(Clone, Debug)]
pub struct SylvesterSolution {
    pub v: Mat<f64>,
    /// `||R|| / (||P|| ||V|| + ||Q|| ||V|| ||S|| + ||B L||)`
    pub backward_residual: f64,
    /// `||R|| / ||B L||`
    pub relative_residual: f64,
    pub path: SolvePath,
    /// Eigenvalues of `S` as computed by the chosen path.
    pub shifts: Vec<c64>,
}

/// Residual target of [`solve_sylvester`] in the backward sense.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvector matrices worse conditioned than this switch to the Schur path.
pub const EIGVEC_COND_LIMIT: f64 = 1e8;

impl SylvesterProblem<'_> {
    fn pq(&self) -> (&SparseMatrix, &SparseMatrix) {
        match self.orientation {
            Orientation::Standard => (self.a, self.e),
            Orientation::Swapped => (self.e, self.a),
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.a.nrows();
        let r = self.s.nrows();
        if self.s.ncols() != r || self.l.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "S is {}x{}, L has {} entries",
                self.s.nrows(),
                self.s.ncols(),
                self.l.len()
            )));
        }
        if self.b.len() != n || self.e.nrows() != n || r == 0 {
            return Err(Error::DimensionMismatch("B, E and A must share the system order".into()));
        }
        Ok(())
    }
}

struct FactorCache {
    entries: Vec<(c64, ShiftedSolver)>,
}

impl FactorCache {
    fn get(&mut self, p: &SparseMatrix, q: &SparseMatrix, lambda: c64) -> Result<&ShiftedSolver> {
        if let Some(k) = self.entries.iter().position(|(l, _)| *l == lambda) {
            return Ok(&self.entries[k].1);
        }
        let f = ShiftedSolver::new(p, q, lambda)?;
        self.entries.push((lambda, f));
        Ok(&self.entries.last().unwrap().1)
    }
}

/// Solves `P V - Q V S = B L` for real `V`.
pub fn solve_sylvester(prob: &SylvesterProblem<'_>) -> Result<SylvesterSolution> {
    prob.check()?;
    let (v, path, shifts) = match solve_diagonal(prob)? {
        Some((v, shifts)) => (v, SolvePath::Diagonal, shifts),
        None => {
            let (v, shifts) = solve_schur(prob)?;
            (v, SolvePath::Schur, shifts)
        }
    };
    let (backward, relative) = residuals(prob, v.as_ref());
    if !(backward < RESIDUAL_TOL) {
        return Err(Error::SylvesterResidual { residual: backward });
    }
    Ok(SylvesterSolution {
        v,
        backward_residual: backward,
        relative_residual: relative,
        path,
        shifts,
    })
}

/// Same as [`solve_sylvester`] but always through the Schur sweep.
pub fn solve_sylvester_schur(prob: &SylvesterProblem<'_>) -> Result<SylvesterSolution> {
    prob.check()?;
    let (v, shifts) = solve_schur(prob)?;
    let (backward, relative) = residuals(prob, v.as_ref());
    if !(backward < RESIDUAL_TOL) {
        return Err(Error::SylvesterResidual { residual: backward });
    }
    Ok(SylvesterSolution {
        v,
        backward_residual: backward,
        relative_residual: relative,
        path: SolvePath::Schur,
        shifts,
    })
}

fn lx_row(l: &[f64], x: MatRef<'_, c64>) -> Vec<c64> {
    (0..x.ncols())
        .map(|j| (0..l.len()).map(|i| x[(i, j)] * l[i]).sum())
        .collect()
}

fn solve_diagonal(prob: &SylvesterProblem<'_>) -> Result<Option<(Mat<f64>, Vec<c64>)>> {
    let r = prob.s.nrows();
    let n = prob.b.len();
    let (p, q) = prob.pq();
    let Ok((lam, x)) = numkernel::eigen(prob.s.as_ref()) else {
        return Ok(None);
    };
    let sv = numkernel::singular_values(x.as_ref());
    if sv.iter().any(|s| !s.is_finite()) {
        return Ok(None);
    }
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) || smax / smin > EIGVEC_COND_LIMIT {
        return Ok(None);
    }
    let lx = lx_row(&prob.l, x.as_ref());
    // conjugate partner of column j, if it is exactly the conjugate of an earlier one
    let mut partner: Vec<Option<usize>> = vec![None; r];
    for j in 0..r {
        if lam[j].im == 0.0 {
            continue;
        }
        for k in 0..j {
            if partner[k].is_none()
                && lam[k] == lam[j].conj()
                && (0..r).all(|i| x[(i, k)] == x[(i, j)].conj())
                && !partner.contains(&Some(k))
            {
                partner[j] = Some(k);
                break;
            }
        }
    }
    let work: Vec<usize> = (0..r).filter(|&j| partner[j].is_none()).collect();
    let solved: Vec<Result<(usize, Vec<c64>)>> = work
        .par_iter()
        .map(|&j| {
            let f = ShiftedSolver::new(p, q, lam[j])?;
            let rhs: Vec<c64> = prob.b.iter().map(|&bi| lx[j] * bi).collect();
            let y = f.solve(&rhs).map_err(|_| Error::ShiftHitsSpectrum {
                re: lam[j].re,
                im: lam[j].im,
            })?;
            Ok((j, y))
        })
        .collect();
    let mut y = Mat::<c64>::zeros(n, r);
    for res in solved {
        let (j, col) = res?;
        for i in 0..n {
            y[(i, j)] = col[i];
        }
    }
    for j in 0..r {
        if let Some(k) = partner[j] {
            for i in 0..n {
                y[(i, j)] = y[(i, k)].conj();
            }
        }
    }
    // V = Y X^{-1}, i.e. X^T V^T = Y^T
    let vt = numkernel::solve_dense(x.transpose().to_owned().as_ref(), y.transpose().to_owned().as_ref())?;
    let v = numkernel::real_part(vt.transpose());
    Ok(Some((v, lam)))
}

fn solve_schur(prob: &SylvesterProblem<'_>) -> Result<(Mat<f64>, Vec<c64>)> {
    let r = prob.s.nrows();
    let n = prob.b.len();
    let (p, q) = prob.pq();
    let (u, t) = triangular_form(prob.s.as_ref())?;
    let lu_row = lx_row(&prob.l, u.as_ref());
    let mut w = Mat::<c64>::zeros(n, r);
    let mut cache = FactorCache { entries: Vec::new() };
    let mut shifts = Vec::with_capacity(r);
    for j in 0..r {
        let tjj = t[(j, j)];
        shifts.push(tjj);
        // rhs = B (L U)_j + Q sum_{k<j} w_k T_kj
        let mut acc = vec![c64::new(0.0, 0.0); n];
        for k in 0..j {
            let tk = t[(k, j)];
            if tk.norm() == 0.0 {
                continue;
            }
            for i in 0..n {
                acc[i] += w[(i, k)] * tk;
            }
        }
        let mut rhs = q.mul_vec_complex(&acc);
        for i in 0..n {
            rhs[i] += lu_row[j] * prob.b[i];
        }
        let f = cache.get(p, q, tjj)?;
        let col = f.solve(&rhs).map_err(|_| Error::ShiftHitsSpectrum { re: tjj.re, im: tjj.im })?;
        for i in 0..n {
            w[(i, j)] = col[i];
        }
    }
    let v = numkernel::real_part((&w * u.adjoint()).as_ref());
    Ok((v, shifts))
}

/// Unitary `U` and upper triangular `T` with `S = U T U^H`.
///
/// Triangular `S` is used as is (or reversed when lower triangular): QZ on a
/// defective block would split the repeated eigenvalue by about `eps^(1/r)`.
fn triangular_form(s: MatRef<'_, f64>) -> Result<(Mat<c64>, Mat<c64>)> {
    let r = s.nrows();
    let upper = (0..r).all(|i| (0..i).all(|j| s[(i, j)] == 0.0));
    let lower = (0..r).all(|i| (i + 1..r).all(|j| s[(i, j)] == 0.0));
    if upper {
        return Ok((Mat::identity(r, r), to_complex(s)));
    }
    if lower {
        let u = Mat::from_fn(r, r, |i, j| if i + j + 1 == r { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        let t = Mat::from_fn(r, r, |i, j| c64::new(s[(r - 1 - i, r - 1 - j)], 0.0));
        return Ok((u, t));
    }
    let sch = numkernel::complex_schur(to_complex(s).as_ref())?;
    Ok((sch.q, sch.t))
}

fn residuals(prob: &SylvesterProblem<'_>, v: MatRef<'_, f64>) -> (f64, f64) {
    let (p, q) = prob.pq();
    let pv = p.mul_dense(v);
    let qv = q.mul_dense(v);
    let qvs = &qv * &prob.s;
    let n = prob.b.len();
    let r = prob.s.nrows();
    let bl = Mat::from_fn(n, r, |i, j| prob.b[i] * prob.l[j]);
    let res = &pv - &qvs - &bl;
    let rn = numkernel::frobenius(res.as_ref());
    let vn = numkernel::frobenius(v);
    let bln = numkernel::frobenius(bl.as_ref());
    let scale = p.frobenius() * vn + q.frobenius() * vn * numkernel::frobenius(prob.s.as_ref()) + bln;
    let backward = if scale > 0.0 { rn / scale } else { rn };
    let relative = if bln > 0.0 { rn / bln } else { rn };
    (backward, relative)
}

/// Result of the dense Kronecker oracle.
#[derive(Clone, Debug)]
pub struct KroneckerSolution {
    pub x: Mat<f64>,
    /// True when the Kronecker matrix was numerically singular; `x` is then
    /// the minimum-norm least-squares solution.
    pub singular: bool,
}

/// Largest `n r` accepted by [`solve_kronecker_oracle`].
pub const KRONECKER_LIMIT: usize = 5000;

/// Solves `A X E_s + E X A_s = F` by forming
/// `(E_s^T kron A + A_s^T kron E) vec(X) = vec(F)` densely.
pub fn solve_kronecker_oracle(
    a: MatRef<'_, f64>,
    e: MatRef<'_, f64>,
    e_small: MatRef<'_, f64>,
    a_small: MatRef<'_, f64>,
    f: MatRef<'_, f64>,
) -> Result<KroneckerSolution> {
    let n = a.nrows();
    let r = e_small.nrows();
    if n * r > KRONECKER_LIMIT {
        return Err(Error::InvalidArgument(format!("Kronecker oracle limited to n r <= {KRONECKER_LIMIT}")));
    }
    if f.nrows() != n || f.ncols() != r || e.nrows() != n || a_small.nrows() != r {
        return Err(Error::DimensionMismatch("Kronecker oracle operands disagree".into()));
    }
    let nr = n * r;
    let mut k = Mat::<f64>::zeros(nr, nr);
    for qb in 0..r {
        for pb in 0..r {
            let es = e_small[(qb, pb)];
            let as_ = a_small[(qb, pb)];
            if es == 0.0 && as_ == 0.0 {
                continue;
            }
            for col in 0..n {
                for row in 0..n {
                    k[(row + n * pb, col + n * qb)] = es * a[(row, col)] + as_ * e[(row, col)];
                }
            }
        }
    }
    let rhs = Mat::from_fn(nr, 1, |i, _| f[(i % n, i / n)]);
    let svd = k.thin_svd().map_err(|_| Error::NoConvergence)?;
    let s = svd.S();
    let smax = (0..nr).map(|i| s[i]).fold(0.0, f64::max);
    let cut = 1e3 * nr as f64 * f64::EPSILON * smax;
    let singular = (0..nr).any(|i| s[i] <= cut);
    let x = if singular {
        let utb = svd.U().transpose() * &rhs;
        let scaled = Mat::from_fn(nr, 1, |i, _| if s[i] > cut { utb[(i, 0)] / s[i] } else { 0.0 });
        svd.V() * scaled
    } else {
        numkernel::solve_dense(k.as_ref(), rhs.as_ref())?
    };
    Ok(KroneckerSolution {
        x: Mat::from_fn(n, r, |i, j| x[(i + n * j, 0)]),
        singular,
    })
}

/// Strict variant that fails with `SingularSystem` instead of returning the
/// minimum-norm solution.
pub fn solve_kronecker_strict(
    a: MatRef<'_, f64>,
    e: MatRef<'_, f64>,
    e_small: MatRef<'_, f64>,
    a_small: MatRef<'_, f64>,
    f: MatRef<'_, f64>,
) -> Result<Mat<f64>> {
    let sol = solve_kronecker_oracle(a, e, e_small, a_small, f)?;
    if sol.singular {
        return Err(Error::SingularSystem);
    }
    Ok(sol.x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LyapunovSide {
    /// `A P E^T + E P A^T = -B B^T`
    Controllability,
    /// `A^T Q E + E^T Q A = -C^T C`
    Observability,
}

/// Real factor `Z` with Gramian `Z Z^T`.
#[derive(Clone, Debug)]
pub struct GramianFactor {
    pub z: Mat<f64>,
}

impl GramianFactor {
    pub fn gramian(&self) -> Mat<f64> {
        &self.z * self.z.transpose()
    }
}

/// Both Gramian factors of a pencil from one Schur decomposition.
///
/// With `A~ = E^{-1} A`, the controllability Gramian solves
/// `A~ P + P A~^T = -(E^{-1}B)(E^{-1}B)^T`; the observability Gramian is
/// `E^{-T} Q~ E^{-1}` where `A~^T Q~ + Q~ A~ = -C^T C`.
#[derive(Clone, Debug)]
pub struct LyapunovFactors {
    pub a_tilde: Mat<f64>,
    pub b_tilde: Vec<f64>,
    /// Controllability factor.
    pub zc: Mat<f64>,
    /// Factor of `Q~ = E^T Q E`.
    pub zo_tilde: Mat<f64>,
    pub e_inv_available: bool,
}

/// Negative Gramian eigenvalues above this (relative) level are clipped.
pub const CLIP_TOL: f64 = -1e-12;

pub fn lyapunov_factors(a: MatRef<'_, f64>, e: MatRef<'_, f64>, b: &[f64], c: &[f64]) -> Result<LyapunovFactors> {
    let n = a.nrows();
    if a.ncols() != n || e.nrows() != n || e.ncols() != n || b.len() != n || c.len() != n {
        return Err(Error::DimensionMismatch("Lyapunov operands disagree".into()));
    }
    let bm = Mat::from_fn(n, 1, |i, _| b[i]);
    let (a_tilde, b_tilde) = match numkernel::solve_dense(e, a) {
        Ok(at) => {
            let bt = numkernel::solve_dense(e, bm.as_ref())?;
            (at, (0..n).map(|i| bt[(i, 0)]).collect::<Vec<_>>())
        }
        Err(_) => {
            return Err(Error::InvalidArgument(
                "dense Lyapunov solver needs a nonsingular E".into(),
            ))
        }
    };
    let sch = numkernel::complex_schur(to_complex(a_tilde.as_ref()).as_ref())?;
    let max_real = (0..n).map(|i| sch.t[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_real < 0.0) {
        return Err(Error::UnstablePencil { max_real });
    }
    let u = &sch.q;
    // controllability: T Ph + Ph T^H = -bh bh^H with bh = U^H b~
    let bh: Vec<c64> = (0..n)
        .map(|i| (0..n).map(|k| u[(k, i)].conj() * b_tilde[k]).sum())
        .collect();
    let rc = hammarling(sch.t.as_ref(), &bh)?;
    let zc_complex = u * &rc;
    // observability: T^H Qh + Qh T = -ch ch^H; flip to upper form with the reversal J
    let ch: Vec<c64> = (0..n)
        .map(|i| (0..n).map(|k| u[(k, i)].conj() * c[k]).sum())
        .collect();
    let tf = Mat::from_fn(n, n, |i, j| sch.t[(n - 1 - j, n - 1 - i)].conj());
    let chf: Vec<c64> = (0..n).map(|i| ch[n - 1 - i]).collect();
    let ro = hammarling(tf.as_ref(), &chf)?;
    let ro_unflipped = Mat::from_fn(n, n, |i, j| ro[(n - 1 - i, j)]);
    let zo_complex = u * &ro_unflipped;
    Ok(LyapunovFactors {
        a_tilde,
        b_tilde,
        zc: split_real(zc_complex.as_ref()),
        zo_tilde: split_real(zo_complex.as_ref()),
        e_inv_available: true,
    })
}

// [Re Z, Im Z] with empty columns removed; Z Z^H real means this is a real factor
fn split_real(z: MatRef<'_, c64>) -> Mat<f64> {
    let n = z.nrows();
    let k = z.ncols();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for part in 0..2 {
        for j in 0..k {
            let col: Vec<f64> = (0..n).map(|i| if part == 0 { z[(i, j)].re } else { z[(i, j)].im }).collect();
            if col.iter().any(|&x| x != 0.0) {
                cols.push(col);
            }
        }
    }
    if cols.is_empty() {
        return Mat::zeros(n, 1);
    }
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Upper triangular `R` with `T (R R^H) + (R R^H) T^H = -b b^H` for upper
/// triangular stable `T`.
pub fn hammarling(t: MatRef<'_, c64>, b: &[c64]) -> Result<Mat<c64>> {
    let n = t.nrows();
    let mut r = Mat::<c64>::zeros(n, n);
    let mut bw: Vec<c64> = b.to_vec();
    for k in (0..n).rev() {
        let tau = t[(k, k)];
        if !(tau.re < 0.0) {
            return Err(Error::UnstablePencil { max_real: tau.re });
        }
        let beta = bw[k];
        let ups = beta.norm() / (-2.0 * tau.re).sqrt();
        r[(k, k)] = c64::new(ups, 0.0);
        if k == 0 {
            break;
        }
        if ups == 0.0 {
            continue;
        }
        // (T1 + conj(tau) I) u = -(b1 conj(beta) + t ups^2) / ups
        let mut u: Vec<c64> = (0..k)
            .map(|i| -(bw[i] * beta.conj() + t[(i, k)] * (ups * ups)) / ups)
            .collect();
        for i in (0..k).rev() {
            let mut s = u[i];
            for j in (i + 1)..k {
                s -= t[(i, j)] * u[j];
            }
            let d = t[(i, i)] + tau.conj();
            if d.norm() == 0.0 {
                return Err(Error::UnstablePencil { max_real: 0.0 });
            }
            u[i] = s / d;
        }
        let a = beta / ups;
        for i in 0..k {
            r[(i, k)] = u[i];
            bw[i] -= a * u[i];
        }
    }
    Ok(r)
}

/// Gramian factor of one Lyapunov equation.
pub fn solve_lyapunov_dense(
    a: MatRef<'_, f64>,
    e: MatRef<'_, f64>,
    rhs_factor: &[f64],
    side: LyapunovSide,
) -> Result<GramianFactor> {
    let n = a.nrows();
    let zeros = vec![0.0; n];
    match side {
        LyapunovSide::Controllability => {
            let f = lyapunov_factors(a, e, rhs_factor, &zeros)?;
            Ok(GramianFactor { z: f.zc })
        }
        LyapunovSide::Observability => {
            let f = lyapunov_factors(a, e, &zeros, rhs_factor)?;
            // Q = E^{-T} Q~ E^{-1}, so Z_O = E^{-T} Z~
            let z = numkernel::solve_dense(e.transpose().to_owned().as_ref(), f.zo_tilde.as_ref())?;
            Ok(GramianFactor { z })
        }
    }
}

/// Symmetric PSD factor of an explicitly given Gramian, clipping slightly
/// negative eigenvalues to zero.
pub fn psd_factor(p: MatRef<'_, f64>) -> Result<GramianFactor> {
    let n = p.nrows();
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]));
    let evd = sym
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let s = evd.S();
    let u = evd.U();
    let smax = (0..n).map(|i| s[i].abs()).fold(0.0, f64::max);
    let mut cols = Vec::new();
    for k in 0..n {
        let d = s[k];
        if d < CLIP_TOL * smax.max(1.0) {
            return Err(Error::InvalidArgument(format!("Gramian has eigenvalue {d:e}")));
        }
        if d > 0.0 {
            cols.push((k, d.sqrt()));
        }
    }
    Ok(GramianFactor {
        z: Mat::from_fn(n, cols.len().max(1), |i, j| cols.get(j).map(|&(k, sd)| u[(i, k)] * sd).unwrap_or(0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_sylvester() {
        let a = SparseMatrix::diagonal(&[-1.0]);
        let e = SparseMatrix::diagonal(&[1.0]);
        let prob = SylvesterProblem {
            a: &a,
            e: &e,
            b: &[1.0],
            s: Mat::zeros(1, 1),
            l: vec![1.0],
            orientation: Orientation::Standard,
        };
        let sol = solve_sylvester(&prob).unwrap();
        assert!((sol.v[(0, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_shift_column() {
        let a = SparseMatrix::diagonal(&[-1.0, -2.0]);
        let e = SparseMatrix::identity(2);
        let prob = SylvesterProblem {
            a: &a,
            e: &e,
            b: &[1.0, 1.0],
            s: Mat::from_fn(1, 1, |_, _| 1.0),
            l: vec![1.0],
            orientation: Orientation::Standard,
        };
        let sol = solve_sylvester(&prob).unwrap();
        assert!((sol.v[(0, 0)] + 0.5).abs() < 1e-15);
        assert!((sol.v[(1, 0)] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shift_on_spectrum_is_reported() {
        let a = SparseMatrix::diagonal(&[-1.0, -2.0]);
        let e = SparseMatrix::identity(2);
        let prob = SylvesterProblem {
            a: &a,
            e: &e,
            b: &[1.0, 1.0],
            s: Mat::from_fn(1, 1, |_, _| -2.0),
            l: vec![1.0],
            orientation: Orientation::Standard,
        };
        assert!(matches!(solve_sylvester(&prob), Err(Error::ShiftHitsSpectrum { .. })));
    }

    #[test]
    fn kronecker_scalar_and_roundtrip() {
        let one = Mat::from_fn(1, 1, |_, _| 1.0);
        let sol = solve_kronecker_oracle(
            one.as_ref(),
            one.as_ref(),
            Mat::from_fn(1, 1, |_, _| 2.0).as_ref(),
            Mat::from_fn(1, 1, |_, _| 3.0).as_ref(),
            Mat::from_fn(1, 1, |_, _| 5.0).as_ref(),
        )
        .unwrap();
        assert!(!sol.singular);
        assert!((sol.x[(0, 0)] - 1.0).abs() < 1e-15);
        // identity operator: E_s = I, A_s = 0, A = I returns F itself
        let f = Mat::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 0.5);
        let sol = solve_kronecker_oracle(
            Mat::<f64>::identity(3, 3).as_ref(),
            Mat::<f64>::zeros(3, 3).as_ref(),
            Mat::<f64>::identity(2, 2).as_ref(),
            Mat::<f64>::zeros(2, 2).as_ref(),
            f.as_ref(),
        )
        .unwrap();
        assert_eq!(sol.x, f);
    }

    #[test]
    fn scalar_lyapunov() {
        let a = Mat::from_fn(1, 1, |_, _| -1.0);
        let e = Mat::from_fn(1, 1, |_, _| 1.0);
        let g = solve_lyapunov_dense(a.as_ref(), e.as_ref(), &[1.0], LyapunovSide::Controllability).unwrap();
        assert!((g.gramian()[(0, 0)] - 0.5).abs() < 1e-15);
        let a = Mat::from_fn(1, 1, |_, _| 1.0);
        assert!(matches!(
            solve_lyapunov_dense(a.as_ref(), e.as_ref(), &[1.0], LyapunovSide::Controllability),
            Err(Error::UnstablePencil { .. })
        ));
    }

    #[test]
    fn psd_factor_clips() {
        let p = Mat::from_fn(2, 2, |i, j| if i == j { [2.0, -1e-15][i] } else { 0.0 });
        let f = psd_factor(p.as_ref()).unwrap();
        let g = f.gramian();
        assert!((g[(0, 0)] - 2.0).abs() < 1e-14);
        assert_eq!(g[(1, 1)], 0.0);
    }
}
