//! Benchmark models and Matrix Market input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lti::{lift_second_order, DescriptorSystem, LiftForm, SecondOrderSystem, SparseMatrix};

/// The triple-peak example: `E = I`, three lightly damped 2x2 blocks and
/// 1000 real poles at `-1 .. -1000`.
pub fn build_fom() -> DescriptorSystem {
    let n = 1006;
    let mut t = Vec::with_capacity(n + 6);
    for (blk, w) in [100.0, 200.0, 400.0].iter().enumerate() {
        let o = 2 * blk;
        t.push((o, o, -1.0));
        t.push((o, o + 1, *w));
        t.push((o + 1, o, -w));
        t.push((o + 1, o + 1, -1.0));
    }
    for k in 0..1000 {
        t.push((6 + k, 6 + k, -((k + 1) as f64)));
    }
    let a = SparseMatrix::from_triplets(n, n, &t).expect("static pattern");
    let b: Vec<f64> = (0..n).map(|i| if i < 6 { 10.0 } else { 1.0 }).collect();
    DescriptorSystem::new(SparseMatrix::identity(n), a, b.clone(), b).expect("consistent sizes")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleChainParams {
    pub chain_length: usize,
    pub mass: f64,
    pub coupling_mass: f64,
    pub stiffness: f64,
    pub damping_alpha: f64,
    pub damping_beta: f64,
}

impl Default for TripleChainParams {
    fn default() -> Self {
        TripleChainParams {
            chain_length: 200,
            mass: 1.0,
            coupling_mass: 10.0,
            stiffness: 2.0,
            damping_alpha: 0.002,
            damping_beta: 0.002,
        }
    }
}

/// Three spring-mass chains joined by one coupling mass.
///
/// DOF `c L + j` is mass `j` of chain `c`; `j = 0` is the free end, tied to
/// the ground by a spring, and `j = L - 1` is tied to the coupling mass,
/// which is the last DOF.
pub fn build_triple_chain(p: &TripleChainParams) -> Result<SecondOrderSystem> {
    let l = p.chain_length;
    if l == 0 {
        return Err(Error::InvalidArgument("chain length must be positive".into()));
    }
    for (name, v) in [
        ("mass", p.mass),
        ("coupling_mass", p.coupling_mass),
        ("stiffness", p.stiffness),
        ("damping_alpha", p.damping_alpha),
        ("damping_beta", p.damping_beta),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
    }
    let n = 3 * l + 1;
    let hub = 3 * l;
    let k = p.stiffness;
    let mut kt = Vec::new();
    let mut spring = |i: usize, j: usize| {
        kt.push((i, i, k));
        kt.push((j, j, k));
        kt.push((i, j, -k));
        kt.push((j, i, -k));
    };
    for c in 0..3 {
        let o = c * l;
        for j in 0..l - 1 {
            spring(o + j, o + j + 1);
        }
        spring(o + l - 1, hub);
    }
    for c in 0..3 {
        kt.push((c * l, c * l, k));
    }
    let kk = SparseMatrix::from_triplets(n, n, &kt)?;
    let mut masses = vec![p.mass; n];
    masses[hub] = p.coupling_mass;
    let mm = SparseMatrix::diagonal(&masses);
    let dd = mm.combine(p.damping_alpha, &kk, p.damping_beta)?;
    let ones = vec![1.0; n];
    SecondOrderSystem::new(mm, dd, kk, ones.clone(), ones)
}

/// Lifted triple chain in the first-order chain form.
pub fn build_triple_chain_system(p: &TripleChainParams) -> Result<DescriptorSystem> {
    lift_second_order(&build_triple_chain(p)?, LiftForm::Chain)
}

/// A small, lightly damped, fast-oscillating stand-in for the gyroscope
/// model: 20 DOF with natural frequencies between 40 and 250 rad/s on the
/// unit time interval.
pub fn build_mini_gyro_second_order() -> SecondOrderSystem {
    let m = 20;
    // orthogonal sine transform couples the modes
    let q = Mat::from_fn(m, m, |i, j| {
        let (i, j) = ((i + 1) as f64, (j + 1) as f64);
        (2.0 / (m as f64 + 1.0)).sqrt() * (std::f64::consts::PI * i * j / (m as f64 + 1.0)).sin()
    });
    // 1 kHz .. 100 kHz, log spaced
    let omega: Vec<f64> = (0..m)
        .map(|k| 2.0 * std::f64::consts::PI * 10f64.powf(3.0 + 2.0 * k as f64 / (m - 1) as f64))
        .collect();
    let kmat = Mat::from_fn(m, m, |i, j| (0..m).map(|k| q[(i, k)] * omega[k] * omega[k] * q[(j, k)]).sum::<f64>());
    let kmat = Mat::from_fn(m, m, |i, j| 0.5 * (kmat[(i, j)] + kmat[(j, i)]));
    let k = SparseMatrix::from_dense(kmat.as_ref());
    let mass = SparseMatrix::identity(m);
    // stiffness-proportional damping, 0.1 % of critical at the lowest mode
    let d = k.scaled(2.0 * MINI_GYRO_ZETA / omega[0]);
    let b: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut c = vec![0.0; m];
    c[0] = 1.0;
    c[m / 2] = 0.5;
    SecondOrderSystem::new(mass, d, k, b, c).expect("consistent sizes")
}

const MINI_GYRO_ZETA: f64 = 1e-3;

/// Simulation horizon of the mini gyroscope in seconds.
pub const MINI_GYRO_HORIZON: f64 = 0.005;
/// Time step of the mini gyroscope in seconds.
pub const MINI_GYRO_TAU: f64 = 5e-6;
/// Start and end of the smoothed input step in seconds.
pub const MINI_GYRO_STEP: (f64, f64) = (5e-4, 1e-3);

/// The mini gyroscope in the first-order gyro form.
pub fn build_mini_gyro() -> DescriptorSystem {
    lift_second_order(&build_mini_gyro_second_order(), LiftForm::Gyro).expect("nonsingular mass")
}

/// Options for [`random_stable_system`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSystemSpec {
    pub n: usize,
    pub seed: u64,
    /// Decades spanned by the eigenvalues of the symmetric part of `A`,
    /// starting at `-1/2`.
    pub decades: f64,
    /// Weight of the skew-symmetric part of `A` (adds oscillation).
    pub skew: f64,
    /// Use a random SPD `E` instead of the identity.
    pub descriptor: bool,
}

impl RandomSystemSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        RandomSystemSpec {
            n,
            seed,
            decades: 2.0,
            skew: 10.0,
            descriptor: false,
        }
    }
}

/// Random stable SISO system `A = Q diag(d) Q^T + skew * (H - H^T) / (2 sqrt(n))`
/// with `Q` orthogonal and `d` log-uniform in `-[1/2, 10^decades / 2]`.
/// The symmetric part of `A` is negative definite, so every eigenvalue has
/// real part at most `-1/2`.
pub fn random_stable_system(spec: &RandomSystemSpec) -> DescriptorSystem {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = |rng: &mut ChaCha8Rng| {
        // sum of uniforms is close enough to Gaussian for test matrices
        (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * 0.866
    };
    let g = Mat::from_fn(n, n, |_, _| normal(&mut rng));
    let q = g.qr().compute_Q();
    let d: Vec<f64> = (0..n)
        .map(|_| -0.5 * 10f64.powf(spec.decades * rng.random_range(0.0..1.0)))
        .collect();
    let h = Mat::from_fn(n, n, |_, _| normal(&mut rng));
    let qd = Mat::from_fn(n, n, |i, j| q[(i, j)] * d[j]);
    let sym = &qd * q.transpose();
    let scale = spec.skew * 0.5 / (n as f64).sqrt();
    let a = Mat::from_fn(n, n, |i, j| {
        let s = 0.5 * (sym[(i, j)] + sym[(j, i)]);
        s + scale * (h[(i, j)] - h[(j, i)])
    });
    let e = if spec.descriptor {
        let f = Mat::from_fn(n, n, |_, _| normal(&mut rng));
        &f * f.transpose() * (0.5 / n as f64) + Mat::<f64>::identity(n, n)
    } else {
        Mat::<f64>::identity(n, n)
    };
    let b: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let c: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    DescriptorSystem::new(SparseMatrix::from_dense(e.as_ref()), SparseMatrix::from_dense(a.as_ref()), b, c)
        .expect("consistent sizes")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

/// Reads a `coordinate real general|symmetric` Matrix Market file.
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, path)
}

pub fn parse_matrix_market(text: &str, path: &Path) -> Result<SparseMatrix> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    let symmetry = match words.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["%%matrixmarket", "matrix", "coordinate", "real", "general"] => MmSymmetry::General,
        ["%%matrixmarket", "matrix", "coordinate", "real", "symmetric"] => MmSymmetry::Symmetric,
        _ => {
            return Err(Error::HeaderMismatch {
                path: path.to_path_buf(),
                header: header.trim().to_string(),
            })
        }
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(ln, format!("expected `rows cols nnz`, got `{line}`")));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad integer `{s}`")));
                size = Some((p(toks[0])?, p(toks[1])?, p(toks[2])?));
            }
            Some((rows, cols, _)) => {
                if toks.len() != 3 {
                    return Err(parse_err(ln, format!("expected `i j value`, got `{line}`")));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad index `{s}`")));
                let (i, j) = (p(toks[0])?, p(toks[1])?);
                let v: f64 = toks[2]
                    .parse()
                    .map_err(|_| parse_err(ln, format!("bad value `{}`", toks[2])))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::IndexOutOfRange {
                        path: path.to_path_buf(),
                        line: ln,
                        row: i,
                        col: j,
                        rows,
                        cols,
                    });
                }
                triplets.push((i - 1, j - 1, v));
                if symmetry == MmSymmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(text.lines().count().max(1), "missing size line".into()))?;
    let stored = match symmetry {
        MmSymmetry::General => triplets.len(),
        MmSymmetry::Symmetric => triplets.iter().filter(|(i, j, _)| i >= j).count(),
    };
    if stored != nnz {
        return Err(parse_err(
            text.lines().count(),
            format!("size line announces {nnz} entries, found {stored}"),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}

/// Writes a matrix; symmetric output stores the lower triangle only.
pub fn write_matrix_market(path: &Path, m: &SparseMatrix, symmetry: MmSymmetry) -> Result<()> {
    let mut out = fs::File::create(path)?;
    let kind = match symmetry {
        MmSymmetry::General => "general",
        MmSymmetry::Symmetric => "symmetric",
    };
    let entries: Vec<_> = m
        .triplets()
        .filter(|&(i, j, _)| symmetry == MmSymmetry::General || i >= j)
        .collect();
    let mut buf = String::new();
    buf.push_str(&format!("%%MatrixMarket matrix coordinate real {kind}\n"));
    buf.push_str(&format!("{} {} {}\n", m.nrows(), m.ncols(), entries.len()));
    for (i, j, v) in entries {
        // Display for f64 prints the shortest string that round-trips
        buf.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Where an input or output vector comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorSource {
    /// First column (for B) or first row (for C) of a Matrix Market file.
    File(PathBuf),
    Ones,
    Values(Vec<f64>),
}

fn load_vector(src: &VectorSource, n: usize, as_row: bool) -> Result<Vec<f64>> {
    let v = match src {
        VectorSource::Ones => vec![1.0; n],
        VectorSource::Values(v) => v.clone(),
        VectorSource::File(p) => {
            let m = read_matrix_market(p)?;
            if as_row {
                if m.ncols() != n {
                    return Err(Error::DimensionMismatch(format!("{}: expected {n} columns", p.display())));
                }
                (0..n).map(|j| m.get(0, j)).collect()
            } else {
                if m.nrows() != n {
                    return Err(Error::DimensionMismatch(format!("{}: expected {n} rows", p.display())));
                }
                (0..n).map(|i| m.get(i, 0)).collect()
            }
        }
    };
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!("vector has {} entries, expected {n}", v.len())));
    }
    Ok(v)
}

/// Second-order system from `M`, `D`, `K` files. Only the first output row
/// is kept.
pub fn load_matrix_market(
    mfile: &Path,
    dfile: &Path,
    kfile: &Path,
    b_source: &VectorSource,
    c_source: &VectorSource,
) -> Result<SecondOrderSystem> {
    let m = read_matrix_market(mfile)?;
    let d = read_matrix_market(dfile)?;
    let k = read_matrix_market(kfile)?;
    let n = m.nrows();
    let b = load_vector(b_source, n, false)?;
    let c = load_vector(c_source, n, true)?;
    SecondOrderSystem::new(m, d, k, b, c)
}
