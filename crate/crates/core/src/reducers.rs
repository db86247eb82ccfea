//! Projection-based reduction: the two orthogonal-polynomial variants,
//! rational Krylov moment matching, IRKA and balanced truncation.

use std::time::Instant;

use faer::{c64, Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lti::{project, DescriptorSystem, Provenance, ReducedModel, ShiftedSolver};
use crate::numkernel::{self, orthonormal_basis};
use crate::orthopoly::{self, PolynomialFamily, Variant};
use crate::sylvester::{self, Orientation, SylvesterProblem};

/// Expansion points with multiplicities, closed under conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSet {
    points: Vec<c64>,
    multiplicities: Vec<usize>,
}

impl ShiftSet {
    pub fn new(points: Vec<c64>, multiplicities: Vec<usize>) -> Result<Self> {
        if points.len() != multiplicities.len() || points.is_empty() {
            return Err(Error::InvalidArgument("one multiplicity per shift, at least one shift".into()));
        }
        if multiplicities.contains(&0) {
            return Err(Error::InvalidArgument("multiplicities must be positive".into()));
        }
        for (k, p) in points.iter().enumerate() {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(Error::InvalidArgument("shifts must be finite".into()));
            }
            if p.im != 0.0 {
                let ok = points
                    .iter()
                    .zip(&multiplicities)
                    .any(|(q, &m)| *q == p.conj() && m == multiplicities[k]);
                if !ok {
                    return Err(Error::InvalidArgument(format!("shift {p} lacks its conjugate")));
                }
            }
        }
        Ok(ShiftSet { points, multiplicities })
    }

    /// One real shift of multiplicity `r`.
    pub fn single(s0: f64, r: usize) -> Result<Self> {
        ShiftSet::new(vec![c64::new(s0, 0.0)], vec![r])
    }

    /// Each point once, after merging exact duplicates and symmetrizing
    /// nearly conjugate pairs.
    pub fn from_points(points: &[c64]) -> Result<Self> {
        let mut pts: Vec<c64> = Vec::new();
        let mut mult: Vec<usize> = Vec::new();
        let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let mut upper: Vec<c64> = Vec::new();
        let mut lower = 0usize;
        for p in points {
            if p.im.abs() <= 64.0 * f64::EPSILON * scale {
                upper.push(c64::new(p.re, 0.0));
            } else if p.im > 0.0 {
                upper.push(*p);
            } else {
                lower += 1;
            }
        }
        let complex = upper.iter().filter(|p| p.im != 0.0).count();
        if complex != lower {
            return Err(Error::InvalidArgument("shifts are not closed under conjugation".into()));
        }
        for p in upper {
            for q in [p, p.conj()] {
                if q.im < 0.0 && p.im == 0.0 {
                    continue;
                }
                if let Some(k) = pts.iter().position(|x| *x == q) {
                    mult[k] += 1;
                } else {
                    pts.push(q);
                    mult.push(1);
                }
                if p.im == 0.0 {
                    break;
                }
            }
        }
        ShiftSet::new(pts, mult)
    }

    pub fn points(&self) -> &[c64] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Total number of conditions, `sum r_i`.
    pub fn order(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Flat list with every point repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<c64> {
        self.points
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(p, &m)| std::iter::repeat_n(*p, m))
            .collect()
    }

    // real points first, then upper-half representatives by |Im|
    fn representatives(&self) -> Vec<(c64, usize)> {
        let mut reps: Vec<(c64, usize)> = self
            .points
            .iter()
            .zip(&self.multiplicities)
            .filter(|(p, _)| p.im >= 0.0)
            .map(|(p, &m)| (*p, m))
            .collect();
        reps.sort_by(|a, b| {
            let ka = (a.0.im != 0.0, a.0.im.abs());
            let kb = (b.0.im != 0.0, b.0.im.abs());
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        reps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrylovSide {
    /// `(A - sE)^{-1} B` chains.
    Input,
    /// `(A - sE)^{-T} C^T` chains.
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sided {
    One,
    Two,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Condition number of the inverted small matrix.
    pub small_condition: Option<f64>,
    /// Condition number of `W^T E V`.
    pub projected_condition: Option<f64>,
    pub sylvester_residual: Option<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Hankel singular values, balanced truncation only.
    pub hankel_singular_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub model: ReducedModel,
    /// Orthonormal basis of the right projection space.
    pub basis_v: Mat<f64>,
    /// Orthonormal basis of the left space, when it differs from `basis_v`.
    pub basis_w: Option<Mat<f64>>,
    pub diagnostics: Diagnostics,
}

fn mgs_append(basis: &mut Vec<Vec<c64>>, mut x: Vec<c64>) -> Option<f64> {
    let norm0 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm0 > 0.0) {
        return None;
    }
    for _ in 0..2 {
        for q in basis.iter() {
            let h: c64 = q.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi -= h * qi;
            }
        }
    }
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 16.0 * f64::EPSILON * norm0) {
        return None;
    }
    x.iter_mut().for_each(|z| *z /= norm);
    basis.push(x);
    Some(norm)
}

fn krylov_chain(sys: &DescriptorSystem, s: c64, m: usize, side: KrylovSide, raw: bool) -> Result<Vec<Vec<c64>>> {
    let f = ShiftedSolver::new(&sys.a, &sys.e, s)?;
    let hit = |_| Error::ShiftHitsSpectrum { re: s.re, im: s.im };
    let start: Vec<c64> = match side {
        KrylovSide::Input => sys.b.iter().map(|&x| c64::new(x, 0.0)).collect(),
        KrylovSide::Output => sys.c.iter().map(|&x| c64::new(x, 0.0)).collect(),
    };
    let apply = |x: &[c64]| -> Result<Vec<c64>> {
        match side {
            KrylovSide::Input => f.solve(x).map_err(hit),
            KrylovSide::Output => f.solve_transpose(x).map_err(hit),
        }
    };
    let mut chain: Vec<Vec<c64>> = Vec::with_capacity(m);
    let mut x = apply(&start)?;
    for k in 0..m {
        if raw {
            chain.push(x.clone());
        } else if mgs_append(&mut chain, x.clone()).is_none() {
            // invariant subspace: the chain cannot grow further
            break;
        }
        if k + 1 < m {
            let src = if raw { &x } else { chain.last().unwrap() };
            let ex = match side {
                KrylovSide::Input => sys.e.mul_vec_complex(src),
                KrylovSide::Output => sys.e.transpose().mul_vec_complex(src),
            };
            x = apply(&ex)?;
        }
    }
    Ok(chain)
}

fn fold_columns(chains: Vec<(c64, Vec<Vec<c64>>)>, n: usize) -> Mat<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (s, chain) in chains {
        for z in chain {
            cols.push(z.iter().map(|v| v.re).collect());
            if s.im != 0.0 {
                cols.push(z.iter().map(|v| v.im).collect());
            }
        }
    }
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Unnormalized Krylov chains `x_1 = (A - sE)^{-1} B`,
/// `x_{k+1} = (A - sE)^{-1} E x_k` (or their transposed counterparts),
/// with conjugate pairs folded to `(Re, Im)` columns.
pub fn krylov_directions(sys: &DescriptorSystem, shifts: &ShiftSet, side: KrylovSide) -> Result<Mat<f64>> {
    let reps = shifts.representatives();
    let chains: Vec<Result<(c64, Vec<Vec<c64>>)>> = reps
        .par_iter()
        .map(|&(s, m)| Ok((s, krylov_chain(sys, s, m, side, true)?)))
        .collect();
    let chains = chains.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(fold_columns(chains, sys.order()))
}

/// Orthonormal basis of the union of rational Krylov spaces at `shifts`.
pub fn rational_krylov_basis(sys: &DescriptorSystem, shifts: &ShiftSet, side: KrylovSide) -> Result<Mat<f64>> {
    let reps = shifts.representatives();
    let chains: Vec<Result<(c64, Vec<Vec<c64>>)>> = reps
        .par_iter()
        .map(|&(s, m)| Ok((s, krylov_chain(sys, s, m, side, false)?)))
        .collect();
    let chains = chains.into_iter().collect::<Result<Vec<_>>>()?;
    orthonormal_basis(fold_columns(chains, sys.order()).as_ref(), 0.0)
}

/// Limit on `cond(W^T E V)` for two-sided projections.
pub const PROJECTED_COND_LIMIT: f64 = 1e12;

fn two_sided_model(sys: &DescriptorSystem, v: MatRef<'_, f64>, w: MatRef<'_, f64>) -> Result<(ReducedModel, f64)> {
    if v.ncols() != w.ncols() {
        return Err(Error::ProjectedPencilSingular { condition: f64::INFINITY });
    }
    let m = project(sys, v, w)?;
    let cond = numkernel::condition_2norm(m.er.as_ref());
    if !(cond <= PROJECTED_COND_LIMIT) {
        return Err(Error::ProjectedPencilSingular { condition: cond });
    }
    Ok((m, cond))
}

/// One-sided (`V = W` from the output space) or two-sided rational Krylov
/// moment matching.
pub fn moment_matching(sys: &DescriptorSystem, shifts: &ShiftSet, sided: Sided) -> Result<ReductionReport> {
    let t = Instant::now();
    let q2 = rational_krylov_basis(sys, shifts, KrylovSide::Output)?;
    let (mut model, basis_w, cond) = match sided {
        Sided::One => {
            let m = project(sys, q2.as_ref(), q2.as_ref())?;
            (m, None, None)
        }
        Sided::Two => {
            let q1 = rational_krylov_basis(sys, shifts, KrylovSide::Input)?;
            let (m, c) = two_sided_model(sys, q1.as_ref(), q2.as_ref())?;
            let report_v = q1;
            return Ok(ReductionReport {
                model: tag(m, "tmm", None, shifts.expanded(), t),
                basis_v: report_v,
                basis_w: Some(q2),
                diagnostics: Diagnostics {
                    projected_condition: Some(c),
                    converged: true,
                    ..Default::default()
                },
            });
        }
    };
    model = tag(model, "omm", None, shifts.expanded(), t);
    Ok(ReductionReport {
        model,
        basis_v: q2,
        basis_w,
        diagnostics: Diagnostics {
            projected_condition: cond,
            converged: true,
            ..Default::default()
        },
    })
}

fn tag(mut m: ReducedModel, method: &str, family: Option<PolynomialFamily>, shifts: Vec<c64>, t: Instant) -> ReducedModel {
    m.provenance = Provenance {
        method: method.to_string(),
        family: family.map(|f| f.to_string()),
        shifts,
        reduce_seconds: t.elapsed().as_secs_f64(),
    };
    m
}

fn galerkin_report(
    sys: &DescriptorSystem,
    v: Mat<f64>,
    method: &str,
    family: PolynomialFamily,
    shifts: Vec<c64>,
    diagnostics: Diagnostics,
    t: Instant,
) -> Result<ReductionReport> {
    let q = orthonormal_basis(v.as_ref(), 0.0)?;
    let model = tag(project(sys, q.as_ref(), q.as_ref())?, method, Some(family), shifts, t);
    Ok(ReductionReport {
        model,
        basis_v: q,
        basis_w: None,
        diagnostics,
    })
}

/// Piecewise-constant unit-input variant with the initial condition row.
/// The Sylvester problem solved by [`syltdmor1`]: `S = -A_tilde E_tilde^{-1}`,
/// `L = [0, w] E_tilde^{-1}`, so that `A V E_tilde + E V A_tilde = B [0, w]`.
pub fn syltdmor1_problem<'a>(
    sys: &'a DescriptorSystem,
    family: PolynomialFamily,
    r: usize,
    t0: f64,
) -> Result<SylvesterProblem<'a>> {
    let pair = orthopoly::build_e_tilde(family, r, t0)?;
    let e_inv = orthopoly::invert_e_tilde(family, r, t0)?;
    let s = -(&pair.a_small * &e_inv);
    let f = syltdmor1_rhs_weights(r);
    let l: Vec<f64> = (0..r).map(|j| (0..r).map(|i| f[i] * e_inv[(i, j)]).sum()).collect();
    Ok(SylvesterProblem {
        a: &sys.a,
        e: &sys.e,
        b: &sys.b,
        s,
        l,
        orientation: Orientation::Standard,
    })
}

/// `[0, w_1, ..., w_{r-1}]`: the first condition is the zero initial state.
pub fn syltdmor1_rhs_weights(r: usize) -> Vec<f64> {
    let mut f = vec![0.0; r];
    f[1..].copy_from_slice(&orthopoly::input_weights(r, Variant::Tdmor1));
    f
}

pub fn syltdmor1(sys: &DescriptorSystem, family: PolynomialFamily, r: usize, t0: f64) -> Result<ReductionReport> {
    let t = Instant::now();
    let pair = orthopoly::build_e_tilde(family, r, t0)?;
    let prob = syltdmor1_problem(sys, family, r, t0)?;
    let sol = sylvester::solve_sylvester(&prob)?;
    let diag = Diagnostics {
        small_condition: Some(numkernel::condition_2norm(pair.e_small.as_ref())),
        sylvester_residual: Some(sol.backward_residual),
        converged: true,
        ..Default::default()
    };
    galerkin_report(sys, sol.v, "syltdmor1", family, sol.shifts, diag, t)
}

/// The Sylvester problem solved by [`syltdmor2`]: standard orientation with
/// `S = -E_hat^{-1}`, `L = e_1^T E_hat^{-1}` when `E_hat` is regular, else the
/// swapped one with `S = -E_hat`, `L = e_1^T`.
pub fn syltdmor2_problem<'a>(sys: &'a DescriptorSystem, family: PolynomialFamily, r: usize) -> Result<SylvesterProblem<'a>> {
    let pair = orthopoly::build_e_hat(family, r)?;
    let w = orthopoly::input_weights(r, Variant::Tdmor2);
    let regular = family == PolynomialFamily::Laguerre || orthopoly::is_regular(family, Variant::Tdmor2, r, 0.0)?;
    // a triangular E_hat is swept as is; its inverse is dense and the sweep
    // over it cancels catastrophically in the trailing columns
    let triangular = is_upper_triangular(pair.e_small.as_ref());
    let (s, l, orientation) = if regular && !triangular {
        let e_inv = orthopoly::invert_e_hat(family, r)?;
        let l: Vec<f64> = (0..r).map(|j| (0..r).map(|i| w[i] * e_inv[(i, j)]).sum()).collect();
        (-e_inv, l, Orientation::Standard)
    } else {
        (-pair.e_small, w, Orientation::Swapped)
    };
    Ok(SylvesterProblem {
        a: &sys.a,
        e: &sys.e,
        b: &sys.b,
        s,
        l,
        orientation,
    })
}

fn is_upper_triangular(m: MatRef<'_, f64>) -> bool {
    (0..m.nrows()).all(|i| (0..i.min(m.ncols())).all(|j| m[(i, j)] == 0.0))
}

/// Zero-initial-state variant: `A V E_hat + E V = B e_1^T`.
pub fn syltdmor2(sys: &DescriptorSystem, family: PolynomialFamily, r: usize) -> Result<ReductionReport> {
    let t = Instant::now();
    let prob = syltdmor2_problem(sys, family, r)?;
    let e_hat = orthopoly::build_e_hat(family, r)?.e_small;
    let swapped = prob.orientation == Orientation::Swapped;
    let sol = sylvester::solve_sylvester(&prob)?;
    // swapped shifts mu of (E - mu A) correspond to s = 1/mu of (A - sE)
    let shifts = if swapped {
        sol.shifts
            .iter()
            .map(|&mu| if mu.norm() == 0.0 { c64::new(f64::INFINITY, 0.0) } else { mu.inv() })
            .collect()
    } else {
        sol.shifts.clone()
    };
    let diag = Diagnostics {
        small_condition: Some(numkernel::condition_2norm(e_hat.as_ref())),
        sylvester_residual: Some(sol.backward_residual),
        converged: true,
        ..Default::default()
    };
    galerkin_report(sys, sol.v, "syltdmor2", family, shifts, diag, t)
}

/// IRKA settings.
#[derive(Clone, Debug)]
pub struct IrkaOptions {
    pub sided: Sided,
    /// Initial shifts; `None` selects the automatic choice.
    pub init: Option<ShiftSet>,
    pub max_iter: usize,
    pub conv_tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for IrkaOptions {
    fn default() -> Self {
        IrkaOptions {
            sided: Sided::Two,
            init: None,
            max_iter: 100,
            conv_tol: 1e-6,
            max_restarts: 3,
            seed: 0,
        }
    }
}

/// Ritz values of `(A, E)` from `steps` Arnoldi steps on `A^{-1} E`.
pub fn arnoldi_pencil_estimate(sys: &DescriptorSystem, steps: usize) -> Result<Vec<c64>> {
    let n = sys.order();
    let f = ShiftedSolver::new(&sys.a, &sys.e, c64::new(0.0, 0.0))?;
    let k = steps.min(n);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let bn = sys.b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let start: Vec<f64> = if bn > 0.0 {
        sys.b.iter().map(|x| x / bn).collect()
    } else {
        vec![1.0 / (n as f64).sqrt(); n]
    };
    q.push(start);
    let mut h = Mat::<f64>::zeros(k + 1, k);
    let mut m = k;
    for j in 0..k {
        let mut w = f.solve_real(&sys.e.mul_vec(&q[j]))?;
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let hij: f64 = qi.iter().zip(&w).map(|(a, b)| a * b).sum();
                h[(i, j)] += hij;
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= hij * y);
            }
        }
        let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        h[(j + 1, j)] = nw;
        if nw <= 1e-12 * h[(j, j)].abs().max(1e-300) {
            m = j + 1;
            break;
        }
        q.push(w.into_iter().map(|x| x / nw).collect());
    }
    let hm = Mat::from_fn(m, m, |i, j| h[(i, j)]);
    let theta = numkernel::eigenvalues(hm.as_ref())?;
    Ok(theta.into_iter().filter(|t| t.norm() > 0.0).map(|t| t.inv()).collect())
}

/// `r` log-spaced real positive shifts over the estimated spectral range.
pub fn irka_initial_shifts(sys: &DescriptorSystem, r: usize) -> Result<ShiftSet> {
    let est = arnoldi_pencil_estimate(sys, 20)?;
    let mags: Vec<f64> = est.iter().map(|z| z.norm()).filter(|m| m.is_finite() && *m > 0.0).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > 0.0 { (lo, hi) } else { (1.0, 1.0) };
    let pts: Vec<c64> = if r == 1 {
        vec![c64::new((lo * hi).sqrt(), 0.0)]
    } else {
        (0..r)
            .map(|k| c64::new((lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (r - 1) as f64).exp(), 0.0))
            .collect()
    };
    ShiftSet::from_points(&pts)
}

fn sorted(points: &[c64]) -> Vec<c64> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal));
    p
}

/// `||sort(a) - sort(b)|| / ||sort(a)||`.
pub fn shift_distance(a: &[c64], b: &[c64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let (a, b) = (sorted(a), sorted(b));
    let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Next shifts: reduced poles reflected into the left half-plane, negated.
pub fn mirrored_shifts(model: &ReducedModel) -> Result<Vec<c64>> {
    let poles = model.poles()?;
    Ok(poles
        .into_iter()
        .map(|p| {
            let p = if p.re > 0.0 { c64::new(-p.re, p.im) } else { p };
            -p
        })
        .collect())
}

fn irka_bases(sys: &DescriptorSystem, shifts: &ShiftSet, sided: Sided) -> Result<(Mat<f64>, Mat<f64>, ReducedModel, Option<f64>)> {
    let q2 = rational_krylov_basis(sys, shifts, KrylovSide::Output)?;
    match sided {
        Sided::One => {
            let m = project(sys, q2.as_ref(), q2.as_ref())?;
            Ok((q2.clone(), q2, m, None))
        }
        Sided::Two => {
            let q1 = rational_krylov_basis(sys, shifts, KrylovSide::Input)?;
            let (m, c) = two_sided_model(sys, q1.as_ref(), q2.as_ref())?;
            Ok((q1, q2, m, Some(c)))
        }
    }
}

/// Iterative rational Krylov algorithm.
pub fn irka(sys: &DescriptorSystem, r: usize, opts: &IrkaOptions) -> Result<ReductionReport> {
    let t = Instant::now();
    if r == 0 || r > sys.order() {
        return Err(Error::InvalidArgument(format!("order {r} outside [1, {}]", sys.order())));
    }
    let init = match &opts.init {
        Some(s) => s.clone(),
        None => irka_initial_shifts(sys, r)?,
    };
    if init.order() != r {
        return Err(Error::InvalidArgument(format!("{} initial shifts for order {r}", init.order())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = init.clone();
    let mut restarts = 0;
    let mut last_reason;
    loop {
        match irka_run(sys, r, &start, opts) {
            Ok((report_parts, iterations, converged)) => {
                let (v, w, model, cond, shifts) = report_parts;
                let method = if opts.sided == Sided::One { "oirka" } else { "irka" };
                let model = tag(model, method, None, shifts, t);
                let basis_w = if opts.sided == Sided::Two { Some(w) } else { None };
                return Ok(ReductionReport {
                    model,
                    basis_v: v,
                    basis_w,
                    diagnostics: Diagnostics {
                        projected_condition: cond,
                        iterations,
                        restarts,
                        converged,
                        ..Default::default()
                    },
                });
            }
            Err(e @ (Error::ShiftHitsSpectrum { .. } | Error::ProjectedPencilSingular { .. } | Error::SingularSystem)) => {
                last_reason = e.to_string();
                if restarts >= opts.max_restarts {
                    break;
                }
                restarts += 1;
                let jittered: Vec<c64> = init
                    .points()
                    .iter()
                    .map(|p| {
                        let f = 1.0 + 0.05 * rng.random_range(-1.0..1.0);
                        c64::new(p.re * f, p.im * f)
                    })
                    .collect();
                let conj_safe: Vec<c64> = jittered
                    .iter()
                    .zip(init.points())
                    .map(|(j, p)| {
                        // keep pairs exact conjugates of each other
                        if p.im < 0.0 {
                            let k = init.points().iter().position(|q| *q == p.conj()).unwrap();
                            jittered[k].conj()
                        } else {
                            *j
                        }
                    })
                    .collect();
                start = ShiftSet::new(conj_safe, init.multiplicities().to_vec())?;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::IrkaFailed {
        restarts,
        reason: last_reason,
    })
}

type IrkaParts = (Mat<f64>, Mat<f64>, ReducedModel, Option<f64>, Vec<c64>);

fn irka_run(sys: &DescriptorSystem, r: usize, start: &ShiftSet, opts: &IrkaOptions) -> Result<(IrkaParts, usize, bool)> {
    let mut shifts = start.clone();
    let mut iterations = 0;
    loop {
        let (v, w, model, cond) = irka_bases(sys, &shifts, opts.sided)?;
        if v.ncols() != r {
            return Err(Error::ProjectedPencilSingular { condition: f64::INFINITY });
        }
        iterations += 1;
        let next = mirrored_shifts(&model)?;
        if next.len() != r {
            return Err(Error::ProjectedPencilSingular { condition: f64::INFINITY });
        }
        let dist = shift_distance(&shifts.expanded(), &next);
        let converged = dist < opts.conv_tol;
        if converged || iterations >= opts.max_iter {
            return Ok(((v, w, model, cond, shifts.expanded()), iterations, converged));
        }
        shifts = ShiftSet::from_points(&next)?;
    }
}

/// Gramian factors and their SVD, computed once per system so that several
/// orders can be truncated cheaply.
pub struct BalancedTruncator {
    factors: sylvester::LyapunovFactors,
    u: Mat<f64>,
    v: Mat<f64>,
    hsv: Vec<f64>,
    c: Vec<f64>,
    setup_seconds: f64,
}

impl BalancedTruncator {
    pub fn new(sys: &DescriptorSystem) -> Result<Self> {
        let t = Instant::now();
        let a = sys.a.to_dense();
        let e = sys.e.to_dense();
        let factors = sylvester::lyapunov_factors(a.as_ref(), e.as_ref(), &sys.b, &sys.c)?;
        let m = factors.zo_tilde.transpose() * &factors.zc;
        let svd = m.thin_svd().map_err(|_| Error::NoConvergence)?;
        let k = m.nrows().min(m.ncols());
        let hsv: Vec<f64> = (0..k).map(|i| svd.S()[i]).collect();
        Ok(BalancedTruncator {
            u: svd.U().to_owned(),
            v: svd.V().to_owned(),
            factors,
            hsv,
            c: sys.c.clone(),
            setup_seconds: t.elapsed().as_secs_f64(),
        })
    }

    pub fn hankel_singular_values(&self) -> &[f64] {
        &self.hsv
    }

    /// Balanced ROM of order `r` (fewer if fewer Hankel singular values lie
    /// above [`BT_HSV_FLOOR`]` * sigma_1`), with `E_r = I`.
    pub fn truncate(&self, r: usize) -> Result<ReductionReport> {
        let t = Instant::now();
        let f = &self.factors;
        let n = self.c.len();
        if r == 0 || r > n {
            return Err(Error::InvalidArgument(format!("order {r} outside [1, {n}]")));
        }
        let floor = BT_HSV_FLOOR * self.hsv.first().copied().unwrap_or(0.0);
        let rr = r.min(self.hsv.iter().filter(|&&s| s > floor).count());
        if rr == 0 {
            return Err(Error::InvalidArgument("all Hankel singular values vanish".into()));
        }
        let scale: Vec<f64> = (0..rr).map(|i| 1.0 / self.hsv[i].sqrt()).collect();
        let xr = Mat::from_fn(self.v.nrows(), rr, |i, j| self.v[(i, j)] * scale[j]);
        let yr = Mat::from_fn(self.u.nrows(), rr, |i, j| self.u[(i, j)] * scale[j]);
        let v = &f.zc * &xr;
        let w = &f.zo_tilde * &yr;
        let ar = w.transpose() * &f.a_tilde * &v;
        let br: Vec<f64> = (0..rr).map(|j| (0..n).map(|i| w[(i, j)] * f.b_tilde[i]).sum()).collect();
        let cr: Vec<f64> = (0..rr).map(|j| (0..n).map(|i| v[(i, j)] * self.c[i]).sum()).collect();
        let model = ReducedModel {
            er: Mat::identity(rr, rr),
            ar,
            br,
            cr,
            provenance: Provenance::default(),
        };
        let mut model = tag(model, "bt", None, Vec::new(), t);
        model.provenance.reduce_seconds += self.setup_seconds;
        Ok(ReductionReport {
            model,
            basis_v: orthonormal_basis(v.as_ref(), 0.0)?,
            // spans the test space of the transformed pencil (E^{-1} A, E^{-1} B)
            basis_w: Some(orthonormal_basis(w.as_ref(), 0.0)?),
            diagnostics: Diagnostics {
                converged: true,
                hankel_singular_values: self.hsv.clone(),
                ..Default::default()
            },
        })
    }
}

/// Relative level below which Hankel singular values are Gramian round-off.
pub const BT_HSV_FLOOR: f64 = 10.0 * f64::EPSILON;

/// Square-root balanced truncation on the dense pencil.
pub fn balanced_truncation(sys: &DescriptorSystem, r: usize) -> Result<ReductionReport> {
    if r == 0 || r > sys.order() {
        return Err(Error::InvalidArgument(format!("order {r} outside [1, {}]", sys.order())));
    }
    BalancedTruncator::new(sys)?.truncate(r)
}

/// `2 sum_{i > r} sigma_i`.
pub fn bt_error_bound(hsv: &[f64], r: usize) -> f64 {
    2.0 * hsv.iter().skip(r).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{Lti, SparseMatrix};

    fn scalar() -> DescriptorSystem {
        DescriptorSystem::new(
            SparseMatrix::identity(1),
            SparseMatrix::diagonal(&[-1.0]),
            vec![1.0],
            vec![1.0],
        )
        .unwrap()
    }

    fn diag_sys() -> DescriptorSystem {
        let a = [-1.0, -3.0, -5.0, -7.0];
        let b = [1.0, 2.0, -1.0, 0.5];
        DescriptorSystem::new(SparseMatrix::identity(4), SparseMatrix::diagonal(&a), b.to_vec(), vec![1.0; 4]).unwrap()
    }

    #[test]
    fn shift_set_validation() {
        assert!(ShiftSet::new(vec![c64::new(1.0, 2.0)], vec![1]).is_err());
        let s = ShiftSet::from_points(&[c64::new(1.0, 2.0), c64::new(1.0, -2.0), c64::new(3.0, 0.0), c64::new(3.0, 0.0)]).unwrap();
        assert_eq!(s.order(), 4);
        assert_eq!(s.multiplicities().iter().copied().max(), Some(2));
    }

    #[test]
    fn krylov_single_shift() {
        let sys = diag_sys();
        let s = ShiftSet::single(2.0, 1).unwrap();
        let d = krylov_directions(&sys, &s, KrylovSide::Input).unwrap();
        for j in 0..4 {
            let want = sys.b[j] / (sys.a.get(j, j) - 2.0);
            assert!((d[(j, 0)] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn krylov_diagonal_two_shifts() {
        let sys = diag_sys();
        let s = ShiftSet::new(vec![c64::new(1.0, 0.0), c64::new(2.0, 0.0)], vec![1, 1]).unwrap();
        let d = krylov_directions(&sys, &s, KrylovSide::Input).unwrap();
        for (col, si) in [1.0, 2.0].iter().enumerate() {
            for j in 0..4 {
                let want = sys.b[j] / (sys.a.get(j, j) - si);
                assert!((d[(j, col)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conjugate_pair_gives_real_basis() {
        let sys = diag_sys();
        let s = ShiftSet::from_points(&[c64::new(0.0, 2.0), c64::new(0.0, -2.0)]).unwrap();
        let q = rational_krylov_basis(&sys, &s, KrylovSide::Input).unwrap();
        assert_eq!(q.ncols(), 2);
        let g = q.transpose() * &q - Mat::<f64>::identity(2, 2);
        assert!(numkernel::frobenius(g.as_ref()) < 1e-13);
    }

    #[test]
    fn irka_scalar() {
        let sys = scalar();
        let rep = irka(&sys, 1, &IrkaOptions::default()).unwrap();
        assert!(rep.diagnostics.converged);
        assert!((rep.model.provenance.shifts[0] - c64::new(1.0, 0.0)).norm() < 1e-12);
        for w in [0.1, 1.0, 10.0] {
            let s = c64::new(0.0, w);
            assert!((rep.model.transfer(s).unwrap() - sys.transfer(s).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn bt_scalar() {
        let rep = balanced_truncation(&scalar(), 1).unwrap();
        let hsv = &rep.diagnostics.hankel_singular_values;
        assert_eq!(hsv.len(), 1);
        assert!((hsv[0] - 0.5).abs() < 1e-15);
        let s = c64::new(0.3, 2.0);
        assert!((rep.model.transfer(s).unwrap() - scalar().transfer(s).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn syltdmor1_rejects_even_legendre() {
        let sys = diag_sys();
        assert!(matches!(
            syltdmor1(&sys, PolynomialFamily::Legendre, 4, 0.0),
            Err(Error::SingularSmallMatrix { .. })
        ));
    }

    #[test]
    fn one_sided_moments_scalar_chain() {
        let sys = diag_sys();
        let s = ShiftSet::single(1.0, 2).unwrap();
        let rep = moment_matching(&sys, &s, Sided::One).unwrap();
        let m = sys.moments(c64::new(1.0, 0.0), 1).unwrap();
        let mr = rep.model.moments(c64::new(1.0, 0.0), 1).unwrap();
        for k in 0..2 {
            assert!((m.values[k] - mr.values[k]).norm() < 1e-12 * m.values[k].norm());
        }
    }
}
