//! SISO descriptor systems `E x' = A x + B u`, `y = C x`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::numkernel::{self, Scalar};

/// Compressed-column sparse matrix with `f64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({i}, {j})")));
            }
            t.push((i, j, v));
        }
        t.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_idx.push(i);
            values.push(v);
            col_ptr[j + 1] += 1;
            last = Some((i, j));
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &t).expect("diagonal entries are in range")
    }

    pub fn from_dense(m: MatRef<'_, f64>) -> Self {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t).expect("dense entries are in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |p| (self.row_idx[p], j, self.values[p]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        match self.row_idx[range.clone()].binary_search(&i) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).expect("transpose stays in range")
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut t: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, alpha * v)).collect();
        t.extend(other.triplets().map(|(i, j, v)| (i, j, beta * v)));
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    fn check_same_shape(&self, other: &SparseMatrix) -> Result<()> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        Ok(())
    }

    /// Block matrix from a row-major grid of optional blocks.
    pub fn block(grid: &[Vec<Option<&SparseMatrix>>], row_sizes: &[usize], col_sizes: &[usize]) -> Result<Self> {
        let mut t = Vec::new();
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    if m.nrows != row_sizes[bi] || m.ncols != col_sizes[bj] {
                        return Err(Error::DimensionMismatch(format!("block ({bi}, {bj}) has the wrong shape")));
                    }
                    t.extend(m.triplets().map(|(i, j, v)| (r0 + i, c0 + j, v)));
                }
                c0 += col_sizes[bj];
            }
            r0 += row_sizes[bi];
        }
        Self::from_triplets(row_sizes.iter().sum(), col_sizes.iter().sum(), &t)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
        y
    }

    pub fn mul_vec_complex(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += xj * self.values[p];
            }
        }
        y
    }

    pub fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| {
                (self.col_ptr[j]..self.col_ptr[j + 1])
                    .map(|p| self.values[p] * x[self.row_idx[p]])
                    .sum()
            })
            .collect()
    }

    pub fn mul_vec_transpose_complex(&self, x: &[c64]) -> Vec<c64> {
        (0..self.ncols)
            .map(|j| {
                let mut s = c64::new(0.0, 0.0);
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    s += x[self.row_idx[p]] * self.values[p];
                }
                s
            })
            .collect()
    }

    pub fn mul_dense(&self, v: MatRef<'_, f64>) -> Mat<f64> {
        let mut out = Mat::zeros(self.nrows, v.ncols());
        for k in 0..v.ncols() {
            for j in 0..self.ncols {
                let x = v[(j, k)];
                if x == 0.0 {
                    continue;
                }
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    out[(self.row_idx[p], k)] += self.values[p] * x;
                }
            }
        }
        out
    }

    fn to_faer(&self) -> SparseColMat<usize, f64> {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t).expect("valid triplets")
    }
}

/// LU factorization of `P - lambda Q`, real when `lambda` is real.
pub enum ShiftedSolver {
    Real(Lu<usize, f64>),
    Complex(Lu<usize, c64>),
}

impl ShiftedSolver {
    /// Factors `P - lambda Q`. Fails with `ShiftHitsSpectrum` when the
    /// shifted matrix is structurally or numerically singular.
    pub fn new(p: &SparseMatrix, q: &SparseMatrix, lambda: c64) -> Result<Self> {
        p.check_same_shape(q)?;
        let n = p.nrows;
        let hit = || Error::ShiftHitsSpectrum {
            re: lambda.re,
            im: lambda.im,
        };
        let solver = if lambda.im == 0.0 {
            let m = p.combine(1.0, q, -lambda.re)?;
            ShiftedSolver::Real(m.to_faer().sp_lu().map_err(|_| hit())?)
        } else {
            let mut t: Vec<Triplet<usize, usize, c64>> = p
                .triplets()
                .map(|(i, j, v)| Triplet::new(i, j, c64::new(v, 0.0)))
                .collect();
            t.extend(q.triplets().map(|(i, j, v)| Triplet::new(i, j, -lambda * v)));
            let m = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &t).map_err(|_| hit())?;
            ShiftedSolver::Complex(m.sp_lu().map_err(|_| hit())?)
        };
        // probe: a singular factor yields non-finite solutions
        let probe = vec![c64::new(1.0, 0.0); n];
        let x = solver.solve_raw(&probe, false);
        if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(hit());
        }
        Ok(solver)
    }

    fn solve_raw(&self, rhs: &[c64], transpose: bool) -> Vec<c64> {
        let n = rhs.len();
        match self {
            ShiftedSolver::Real(lu) => {
                let mut re = Mat::from_fn(n, 2, |i, k| if k == 0 { rhs[i].re } else { rhs[i].im });
                if transpose {
                    lu.solve_transpose_in_place(re.as_mut());
                } else {
                    lu.solve_in_place(re.as_mut());
                }
                (0..n).map(|i| c64::new(re[(i, 0)], re[(i, 1)])).collect()
            }
            ShiftedSolver::Complex(lu) => {
                let mut x = Mat::from_fn(n, 1, |i, _| rhs[i]);
                if transpose {
                    lu.solve_transpose_in_place(x.as_mut());
                } else {
                    lu.solve_in_place(x.as_mut());
                }
                (0..n).map(|i| x[(i, 0)]).collect()
            }
        }
    }

    fn checked(&self, x: Vec<c64>) -> Result<Vec<c64>> {
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(x)
        } else {
            Err(Error::SingularSystem)
        }
    }

    /// Solves `(P - lambda Q) x = rhs`.
    pub fn solve(&self, rhs: &[c64]) -> Result<Vec<c64>> {
        self.checked(self.solve_raw(rhs, false))
    }

    /// Solves `(P - lambda Q)^T x = rhs` (plain transpose).
    pub fn solve_transpose(&self, rhs: &[c64]) -> Result<Vec<c64>> {
        self.checked(self.solve_raw(rhs, true))
    }

    pub fn solve_real(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            ShiftedSolver::Real(lu) => {
                let n = rhs.len();
                let mut x = Mat::from_fn(n, 1, |i, _| rhs[i]);
                lu.solve_in_place(x.as_mut());
                let v: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
                if v.iter().all(|z| z.is_finite()) {
                    Ok(v)
                } else {
                    Err(Error::SingularSystem)
                }
            }
            ShiftedSolver::Complex(_) => {
                let z: Vec<c64> = rhs.iter().map(|&r| c64::new(r, 0.0)).collect();
                Ok(self.solve(&z)?.into_iter().map(|z| z.re).collect())
            }
        }
    }
}

/// `E x' = A x + B u`, `y = C x` with sparse `E`, `A`.
#[derive(Clone, Debug)]
pub struct DescriptorSystem {
    pub e: SparseMatrix,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl DescriptorSystem {
    pub fn new(e: SparseMatrix, a: SparseMatrix, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || e.nrows() != n || e.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "E {}x{}, A {}x{}, B {}, C {}",
                e.nrows(),
                e.ncols(),
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("system of order zero".into()));
        }
        if e.is_zero() && a.is_zero() {
            return Err(Error::InvalidArgument("E and A are both zero".into()));
        }
        Ok(DescriptorSystem { e, a, b, c })
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    /// Dense copy of the system, as a reduced model of full order.
    pub fn to_dense(&self) -> ReducedModel {
        ReducedModel {
            er: self.e.to_dense(),
            ar: self.a.to_dense(),
            br: self.b.clone(),
            cr: self.c.clone(),
            provenance: Provenance::new("full"),
        }
    }

    fn resolvent(&self, s: c64) -> Result<ShiftedSolver> {
        // (sE - A) = -(A - sE)
        ShiftedSolver::new(&self.a, &self.e, s).map_err(|e| match e {
            Error::ShiftHitsSpectrum { re, im } => Error::SingularAtPoint { re, im },
            other => other,
        })
    }
}

/// Method tag and parameters attached to a reduced model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub method: String,
    pub family: Option<String>,
    pub shifts: Vec<c64>,
    pub reduce_seconds: f64,
}

impl Provenance {
    pub fn new(method: &str) -> Self {
        Provenance {
            method: method.to_string(),
            ..Default::default()
        }
    }
}

/// Dense `(E_r, A_r, B_r, C_r)`.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub er: Mat<f64>,
    pub ar: Mat<f64>,
    pub br: Vec<f64>,
    pub cr: Vec<f64>,
    pub provenance: Provenance,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.br.len()
    }

    pub fn is_finite(&self) -> bool {
        let ok = |m: &Mat<f64>| (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()));
        ok(&self.er) && ok(&self.ar) && self.br.iter().chain(&self.cr).all(|x| x.is_finite())
    }

    /// Finite poles of the reduced pencil.
    pub fn poles(&self) -> Result<Vec<c64>> {
        let sp = numkernel::generalized_eigenvalues(self.ar.as_ref(), self.er.as_ref())?;
        Ok(sp.finite_values())
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.poles()?.iter().all(|p| p.re < 0.0))
    }

    /// Sparse descriptor-system view of the model.
    pub fn to_system(&self) -> Result<DescriptorSystem> {
        DescriptorSystem::new(
            SparseMatrix::from_dense(self.er.as_ref()),
            SparseMatrix::from_dense(self.ar.as_ref()),
            self.br.clone(),
            self.cr.clone(),
        )
    }

    fn shifted(&self, s: c64) -> Mat<c64> {
        let r = self.order();
        Mat::from_fn(r, r, |i, j| s * self.er[(i, j)] - self.ar[(i, j)])
    }
}

/// Taylor coefficients of `G` around `base_point`.
#[derive(Clone, Debug)]
pub struct MomentList {
    pub base_point: c64,
    pub values: Vec<c64>,
}

/// Transfer function evaluation and moments.
pub trait Lti {
    fn order(&self) -> usize;
    /// `G(s) = C (sE - A)^{-1} B` via one solve.
    fn transfer(&self, s: c64) -> Result<c64>;
    /// `M_0 .. M_k` around `s0`.
    fn moments(&self, s0: c64, k: usize) -> Result<MomentList>;
}

fn dot_c(c: &[f64], x: &[c64]) -> c64 {
    c.iter().zip(x).map(|(&a, &b)| b * a).sum()
}

impl Lti for DescriptorSystem {
    fn order(&self) -> usize {
        self.order()
    }

    fn transfer(&self, s: c64) -> Result<c64> {
        let f = self.resolvent(s)?;
        let b: Vec<c64> = self.b.iter().map(|&x| c64::new(x, 0.0)).collect();
        let x = f.solve(&b).map_err(|_| Error::SingularAtPoint { re: s.re, im: s.im })?;
        Ok(-dot_c(&self.c, &x))
    }

    fn moments(&self, s0: c64, k: usize) -> Result<MomentList> {
        let f = self.resolvent(s0)?;
        let sing = |_| Error::SingularAtPoint { re: s0.re, im: s0.im };
        // (s0E - A)^{-1} = -(A - s0E)^{-1}
        let b: Vec<c64> = self.b.iter().map(|&x| c64::new(-x, 0.0)).collect();
        let mut x = f.solve(&b).map_err(sing)?;
        let mut values = vec![dot_c(&self.c, &x)];
        for _ in 0..k {
            // x <- -(s0E - A)^{-1} E x = (A - s0E)^{-1} E x
            let ex = self.e.mul_vec_complex(&x);
            x = f.solve(&ex).map_err(sing)?;
            values.push(dot_c(&self.c, &x));
        }
        Ok(MomentList { base_point: s0, values })
    }
}

impl Lti for ReducedModel {
    fn order(&self) -> usize {
        self.order()
    }

    fn transfer(&self, s: c64) -> Result<c64> {
        let m = self.shifted(s);
        let b = Mat::from_fn(self.order(), 1, |i, _| c64::new(self.br[i], 0.0));
        let x = numkernel::solve_dense(m.as_ref(), b.as_ref())
            .map_err(|_| Error::SingularAtPoint { re: s.re, im: s.im })?;
        let x: Vec<c64> = (0..self.order()).map(|i| x[(i, 0)]).collect();
        check_finite(&x, s)?;
        Ok(dot_c(&self.cr, &x))
    }

    fn moments(&self, s0: c64, k: usize) -> Result<MomentList> {
        let r = self.order();
        let m = self.shifted(s0);
        let sing = |_| Error::SingularAtPoint { re: s0.re, im: s0.im };
        let lu = m.partial_piv_lu();
        for i in 0..r {
            if lu.U()[(i, i)].is_exact_zero() {
                return Err(Error::SingularAtPoint { re: s0.re, im: s0.im });
            }
        }
        let mut x = Mat::from_fn(r, 1, |i, _| c64::new(self.br[i], 0.0));
        lu.solve_in_place(x.as_mut());
        let col = |x: &Mat<c64>| -> Vec<c64> { (0..r).map(|i| x[(i, 0)]).collect() };
        check_finite(&col(&x), s0).map_err(sing)?;
        let mut values = vec![dot_c(&self.cr, &col(&x))];
        let e = numkernel::to_complex(self.er.as_ref());
        for _ in 0..k {
            let mut y = -(&e * &x);
            lu.solve_in_place(y.as_mut());
            x = y;
            values.push(dot_c(&self.cr, &col(&x)));
        }
        Ok(MomentList { base_point: s0, values })
    }
}

fn check_finite(x: &[c64], s: c64) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::SingularAtPoint { re: s.re, im: s.im })
    }
}

/// Petrov-Galerkin projection `(W^T E V, W^T A V, W^T B, C V)`.
pub fn project(sys: &DescriptorSystem, v: MatRef<'_, f64>, w: MatRef<'_, f64>) -> Result<ReducedModel> {
    let n = sys.order();
    if v.nrows() != n || w.nrows() != n || v.ncols() != w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{}, W is {}x{}, system order {n}",
            v.nrows(),
            v.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    let ev = sys.e.mul_dense(v);
    let av = sys.a.mul_dense(v);
    let er = w.transpose() * &ev;
    let ar = w.transpose() * &av;
    let r = v.ncols();
    let br = (0..r).map(|j| (0..n).map(|i| w[(i, j)] * sys.b[i]).sum()).collect();
    let cr = (0..r).map(|j| (0..n).map(|i| v[(i, j)] * sys.c[i]).sum()).collect();
    Ok(ReducedModel {
        er,
        ar,
        br,
        cr,
        provenance: Provenance::new("projection"),
    })
}

/// `M q'' + D q' + K q = B u`, `y = C q`.
#[derive(Clone, Debug)]
pub struct SecondOrderSystem {
    pub m: SparseMatrix,
    pub d: SparseMatrix,
    pub k: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl SecondOrderSystem {
    pub fn new(m: SparseMatrix, d: SparseMatrix, k: SparseMatrix, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = m.nrows();
        for (name, x) in [("M", &m), ("D", &d), ("K", &k)] {
            if x.nrows() != n || x.ncols() != n {
                return Err(Error::DimensionMismatch(format!("{name} is {}x{}, expected {n}x{n}", x.nrows(), x.ncols())));
            }
        }
        if b.len() != n || c.len() != n {
            return Err(Error::DimensionMismatch(format!("B {}, C {}, expected {n}", b.len(), c.len())));
        }
        Ok(SecondOrderSystem { m, d, k, b, c })
    }

    pub fn dofs(&self) -> usize {
        self.b.len()
    }

    /// `C (s^2 M + s D + K)^{-1} B`.
    pub fn transfer(&self, s: c64) -> Result<c64> {
        // s^2 M + s D + K = K - (-s) D - (-s^2) M: build P = K + sD, Q = -M, lambda = s^2
        let kd = PencilCombine::new(&self.k, &self.d, s);
        let f = ShiftedSolver::new_complex_sum(&kd, &self.m, -(s * s))?;
        let b: Vec<c64> = self.b.iter().map(|&x| c64::new(x, 0.0)).collect();
        let x = f.solve(&b).map_err(|_| Error::SingularAtPoint { re: s.re, im: s.im })?;
        Ok(dot_c(&self.c, &x))
    }
}

// K + s D as complex triplets
struct PencilCombine {
    n: usize,
    t: Vec<Triplet<usize, usize, c64>>,
}

impl PencilCombine {
    fn new(k: &SparseMatrix, d: &SparseMatrix, s: c64) -> Self {
        let mut t: Vec<_> = k.triplets().map(|(i, j, v)| Triplet::new(i, j, c64::new(v, 0.0))).collect();
        t.extend(d.triplets().map(|(i, j, v)| Triplet::new(i, j, s * v)));
        PencilCombine { n: k.nrows(), t }
    }
}

impl ShiftedSolver {
    // factors P - lambda Q with P given as complex triplets
    fn new_complex_sum(p: &PencilCombine, q: &SparseMatrix, lambda: c64) -> Result<Self> {
        let hit = || Error::SingularAtPoint {
            re: lambda.re,
            im: lambda.im,
        };
        let mut t = p.t.clone();
        t.extend(q.triplets().map(|(i, j, v)| Triplet::new(i, j, -lambda * v)));
        let m = SparseColMat::<usize, c64>::try_new_from_triplets(p.n, p.n, &t).map_err(|_| hit())?;
        Ok(ShiftedSolver::Complex(m.sp_lu().map_err(|_| hit())?))
    }
}

/// First-order form used when lifting a second-order system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftForm {
    /// `E = blkdiag(K, M)`, `A = [[0, K], [-K, -D]]`
    Chain,
    /// `E = blkdiag(-K^T, M)`, `A = [[0, -K^T], [-K, -D]]`
    Gyro,
}

pub fn lift_second_order(sos: &SecondOrderSystem, form: LiftForm) -> Result<DescriptorSystem> {
    let m = sos.dofs();
    let mass_ok = ShiftedSolver::new(&sos.m, &SparseMatrix::zeros(m, m), c64::new(0.0, 0.0)).is_ok();
    if !mass_ok {
        return Err(Error::SingularMass);
    }
    let neg_k = sos.k.scaled(-1.0);
    let neg_d = sos.d.scaled(-1.0);
    let sizes = [m, m];
    let (e, a) = match form {
        LiftForm::Chain => {
            let e = SparseMatrix::block(&[vec![Some(&sos.k), None], vec![None, Some(&sos.m)]], &sizes, &sizes)?;
            let a = SparseMatrix::block(
                &[vec![None, Some(&sos.k)], vec![Some(&neg_k), Some(&neg_d)]],
                &sizes,
                &sizes,
            )?;
            (e, a)
        }
        LiftForm::Gyro => {
            let neg_kt = sos.k.transpose().scaled(-1.0);
            let e = SparseMatrix::block(&[vec![Some(&neg_kt), None], vec![None, Some(&sos.m)]], &sizes, &sizes)?;
            let a = SparseMatrix::block(
                &[vec![None, Some(&neg_kt)], vec![Some(&neg_k), Some(&neg_d)]],
                &sizes,
                &sizes,
            )?;
            (e, a)
        }
    };
    let mut b = vec![0.0; 2 * m];
    b[m..].copy_from_slice(&sos.b);
    let mut c = vec![0.0; 2 * m];
    c[..m].copy_from_slice(&sos.c);
    DescriptorSystem::new(e, a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(e: f64, a: f64) -> DescriptorSystem {
        DescriptorSystem::new(
            SparseMatrix::diagonal(&[e]),
            SparseMatrix::diagonal(&[a]),
            vec![1.0],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn scalar_transfer_values() {
        let sys = scalar(1.0, -1.0);
        let g = sys.transfer(c64::new(0.0, 0.0)).unwrap();
        assert!((g - c64::new(1.0, 0.0)).norm() < 1e-15);
        let g = sys.transfer(c64::new(1.0, 0.0)).unwrap();
        assert!((g - c64::new(0.5, 0.0)).norm() < 1e-15);
        // E = A = -I: C(0 E - A)^{-1} B = 1
        let g = scalar(-1.0, -1.0).transfer(c64::new(0.0, 0.0)).unwrap();
        assert!((g - c64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            sys.transfer(c64::new(-1.0, 0.0)),
            Err(Error::SingularAtPoint { .. })
        ));
    }

    #[test]
    fn scalar_moments() {
        let sys = scalar(1.0, -1.0);
        let m = sys.moments(c64::new(0.0, 0.0), 2).unwrap();
        let want = [1.0, -1.0, 1.0];
        for (a, b) in m.values.iter().zip(want) {
            assert!((a - c64::new(b, 0.0)).norm() < 1e-15);
        }
        let m = sys.moments(c64::new(1.0, 0.0), 1).unwrap();
        assert!((m.values[0] - c64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((m.values[1] - c64::new(-0.25, 0.0)).norm() < 1e-15);
        let rom = sys.to_dense();
        let mr = rom.moments(c64::new(1.0, 0.0), 1).unwrap();
        assert!((mr.values[1] - c64::new(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn projection_by_identity_and_coordinate() {
        let sys = DescriptorSystem::new(
            SparseMatrix::diagonal(&[2.0, 3.0]),
            SparseMatrix::diagonal(&[-1.0, -4.0]),
            vec![5.0, 6.0],
            vec![7.0, 8.0],
        )
        .unwrap();
        let i2 = Mat::<f64>::identity(2, 2);
        let rom = project(&sys, i2.as_ref(), i2.as_ref()).unwrap();
        assert_eq!(rom.er, sys.e.to_dense());
        assert_eq!(rom.ar, sys.a.to_dense());
        assert_eq!(rom.br, sys.b);
        assert_eq!(rom.cr, sys.c);
        let e1 = Mat::from_fn(2, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let rom = project(&sys, e1.as_ref(), e1.as_ref()).unwrap();
        assert_eq!((rom.er[(0, 0)], rom.ar[(0, 0)], rom.br[0], rom.cr[0]), (2.0, -1.0, 5.0, 7.0));
    }

    #[test]
    fn lift_scalar_second_order() {
        let one = SparseMatrix::diagonal(&[1.0]);
        let sos = SecondOrderSystem::new(one.clone(), one.clone(), one.clone(), vec![1.0], vec![1.0]).unwrap();
        let chain = lift_second_order(&sos, LiftForm::Chain).unwrap();
        assert_eq!(chain.e.to_dense(), Mat::<f64>::identity(2, 2));
        let a = chain.a.to_dense();
        assert_eq!([a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]], [0.0, 1.0, -1.0, -1.0]);
        assert_eq!(chain.b, vec![0.0, 1.0]);
        assert_eq!(chain.c, vec![1.0, 0.0]);
        let gyro = lift_second_order(&sos, LiftForm::Gyro).unwrap();
        let e = gyro.e.to_dense();
        assert_eq!([e[(0, 0)], e[(1, 1)]], [-1.0, 1.0]);
        let a = gyro.a.to_dense();
        assert_eq!([a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]], [0.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn singular_mass_rejected() {
        let z = SparseMatrix::zeros(1, 1);
        let one = SparseMatrix::diagonal(&[1.0]);
        let sos = SecondOrderSystem::new(z, one.clone(), one, vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(lift_second_order(&sos, LiftForm::Chain), Err(Error::SingularMass)));
    }

    #[test]
    fn lifted_transfer_matches_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 6;
        let rand_spd = |rng: &mut ChaCha8Rng, shift: f64| {
            let g = Mat::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
            let s = &g * g.transpose() + Mat::<f64>::identity(m, m) * shift;
            SparseMatrix::from_dense(s.as_ref())
        };
        let mm = rand_spd(&mut rng, 1.0);
        let dd = rand_spd(&mut rng, 0.1);
        let kk = rand_spd(&mut rng, 2.0);
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sos = SecondOrderSystem::new(mm, dd, kk, b, c).unwrap();
        for form in [LiftForm::Chain, LiftForm::Gyro] {
            let lifted = lift_second_order(&sos, form).unwrap();
            for _ in 0..5 {
                let s = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-5.0..5.0));
                let g1 = lifted.transfer(s).unwrap();
                let k2 = sos.k.to_dense();
                let dense = Mat::from_fn(m, m, |i, j| {
                    s * s * sos.m.get(i, j) + s * sos.d.get(i, j) + c64::new(k2[(i, j)], 0.0)
                });
                let bb = Mat::from_fn(m, 1, |i, _| c64::new(sos.b[i], 0.0));
                let x = numkernel::solve_dense(dense.as_ref(), bb.as_ref()).unwrap();
                let g2: c64 = (0..m).map(|i| x[(i, 0)] * sos.c[i]).sum();
                assert!((g1 - g2).norm() < 1e-10 * (1.0 + g2.norm()));
                assert!((sos.transfer(s).unwrap() - g2).norm() < 1e-10 * (1.0 + g2.norm()));
            }
        }
    }

    #[test]
    fn sparse_basics() {
        let s = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(s.get(0, 0), 3.0);
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.transpose().get(0, 1), 4.0);
        assert_eq!(s.mul_vec(&[1.0, 1.0]), vec![3.0, 4.0]);
        assert_eq!(s.mul_vec_transpose(&[1.0, 1.0]), vec![7.0, 0.0]);
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }
}
