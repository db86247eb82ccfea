//! Implicit Euler simulation and the time-averaged relative output error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lti::{DescriptorSystem, ReducedModel, ShiftedSolver};

#[derive(Clone, Debug, PartialEq)]
pub enum InputSignal {
    /// 0 before `ta`, a half-period sine ramp on `[ta, tb)`, 1 afterwards.
    SmoothStep { ta: f64, tb: f64 },
    Constant(f64),
    /// Piecewise-linear interpolation, held constant outside the table.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl Default for InputSignal {
    fn default() -> Self {
        InputSignal::SmoothStep { ta: 0.1, tb: 0.2 }
    }
}

impl InputSignal {
    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidArgument("input table needs matching, non-empty columns".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("input table times must increase".into()));
        }
        Ok(InputSignal::Table { times, values })
    }
}

pub fn eval_input(sig: &InputSignal, t: f64) -> f64 {
    match sig {
        InputSignal::SmoothStep { ta, tb } => {
            if t < *ta {
                0.0
            } else if t < *tb {
                let x = (t - ta) / (tb - ta);
                0.5 * (std::f64::consts::PI * (x - 0.5)).sin() + 0.5
            } else {
                1.0
            }
        }
        InputSignal::Constant(v) => *v,
        InputSignal::Table { times, values } => {
            let k = times.partition_point(|&s| s <= t);
            if k == 0 {
                values[0]
            } else if k == times.len() {
                values[k - 1]
            } else {
                let (t0, t1) = (times[k - 1], times[k]);
                let w = (t - t0) / (t1 - t0);
                values[k - 1] * (1.0 - w) + values[k] * w
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub outputs: Vec<f64>,
    pub states: Option<Vec<Vec<f64>>>,
}

/// Number of samples on `[t0, tf]` with step `tau`, `floor((tf - t0)/tau) + 1`.
pub fn sample_count(t0: f64, tf: f64, tau: f64) -> usize {
    // tolerate round-off in the ratio, e.g. 1/0.001
    let q = (tf - t0) / tau;
    let k = q.round();
    let steps = if (q - k).abs() <= 1e-9 * q.abs().max(1.0) { k } else { q.floor() };
    steps as usize + 1
}

/// A model that implicit Euler can step.
pub trait EulerModel {
    fn order(&self) -> usize;
    fn input_vector(&self) -> &[f64];
    fn output_vector(&self) -> &[f64];
    fn mul_e(&self, x: &[f64]) -> Vec<f64>;
    fn step_factor(&self, tau: f64) -> Result<StepFactor>;
}

/// Factorization of `E - tau A`.
pub enum StepFactor {
    Sparse(ShiftedSolver),
    Dense(PartialPivLu<f64>),
}

impl StepFactor {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let x = match self {
            StepFactor::Sparse(f) => f.solve_real(rhs).map_err(|_| Error::StepMatrixSingular)?,
            StepFactor::Dense(lu) => {
                let mut m = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
                lu.solve_in_place(m.as_mut());
                (0..rhs.len()).map(|i| m[(i, 0)]).collect()
            }
        };
        Ok(x)
    }
}

impl EulerModel for DescriptorSystem {
    fn order(&self) -> usize {
        DescriptorSystem::order(self)
    }
    fn input_vector(&self) -> &[f64] {
        &self.b
    }
    fn output_vector(&self) -> &[f64] {
        &self.c
    }
    fn mul_e(&self, x: &[f64]) -> Vec<f64> {
        self.e.mul_vec(x)
    }
    fn step_factor(&self, tau: f64) -> Result<StepFactor> {
        ShiftedSolver::new(&self.e, &self.a, c64::new(tau, 0.0))
            .map(StepFactor::Sparse)
            .map_err(|_| Error::StepMatrixSingular)
    }
}

impl EulerModel for ReducedModel {
    fn order(&self) -> usize {
        ReducedModel::order(self)
    }
    fn input_vector(&self) -> &[f64] {
        &self.br
    }
    fn output_vector(&self) -> &[f64] {
        &self.cr
    }
    fn mul_e(&self, x: &[f64]) -> Vec<f64> {
        let r = x.len();
        (0..r).map(|i| (0..r).map(|j| self.er[(i, j)] * x[j]).sum()).collect()
    }
    fn step_factor(&self, tau: f64) -> Result<StepFactor> {
        let m = &self.er - &self.ar * tau;
        if !(0..m.nrows()).all(|i| (0..m.ncols()).all(|j| m[(i, j)].is_finite())) {
            return Err(Error::StepMatrixSingular);
        }
        let lu = m.partial_piv_lu();
        let u = lu.U();
        if (0..m.nrows()).any(|i| u[(i, i)] == 0.0) {
            return Err(Error::StepMatrixSingular);
        }
        Ok(StepFactor::Dense(lu))
    }
}

/// Steps `(E - tau A) x_{i+1} = E x_i + tau B u(t_{i+1})` from `x0` with one
/// factorization. `keep_states` stores every state.
pub fn implicit_euler<M: EulerModel + ?Sized>(
    sys: &M,
    sig: &InputSignal,
    t0: f64,
    tf: f64,
    tau: f64,
    x0: Option<&[f64]>,
    keep_states: bool,
) -> Result<Trajectory> {
    if !(tau > 0.0) || !(tf > t0) {
        return Err(Error::InvalidArgument(format!("need tau > 0 and tf > t0, got tau = {tau}, [{t0}, {tf}]")));
    }
    let n = sys.order();
    let mut x = match x0 {
        Some(v) if v.len() != n => {
            return Err(Error::DimensionMismatch(format!("x0 has {} entries, model order {n}", v.len())))
        }
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let factor = sys.step_factor(tau)?;
    let b = sys.input_vector();
    let c = sys.output_vector();
    let dot = |x: &[f64]| -> f64 { c.iter().zip(x).map(|(a, b)| a * b).sum() };
    let ns = sample_count(t0, tf, tau);
    let mut times = Vec::with_capacity(ns);
    let mut outputs = Vec::with_capacity(ns);
    let mut states = keep_states.then(|| Vec::with_capacity(ns));
    times.push(t0);
    outputs.push(dot(&x));
    if let Some(s) = states.as_mut() {
        s.push(x.clone());
    }
    for i in 1..ns {
        let t = t0 + i as f64 * tau;
        let u = eval_input(sig, t);
        let mut rhs = sys.mul_e(&x);
        for (r, bi) in rhs.iter_mut().zip(b) {
            *r += tau * bi * u;
        }
        x = factor.solve(&rhs)?;
        times.push(t);
        outputs.push(dot(&x));
        if let Some(s) = states.as_mut() {
            s.push(x.clone());
        }
    }
    Ok(Trajectory { times, outputs, states })
}

/// Samples with `|y|` below this are left out of the relative error.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeError {
    pub value: f64,
    /// Samples `i >= 1` skipped by the floor guard.
    pub skipped: usize,
    pub compared: usize,
}

/// `(sum_{i>=1} ((y_i - yr_i) / y_i)^2)^{1/2}` without a step weight.
pub fn relative_error_details(y: &Trajectory, yr: &Trajectory) -> Result<RelativeError> {
    if y.times.len() != yr.times.len()
        || y
            .times
            .iter()
            .zip(&yr.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    let mut sum = 0.0;
    let mut skipped = 0;
    let mut compared = 0;
    for i in 1..y.outputs.len() {
        let yi = y.outputs[i];
        if yi.abs() < RELATIVE_ERROR_FLOOR {
            skipped += 1;
            continue;
        }
        let d = (yi - yr.outputs[i]) / yi;
        sum += d * d;
        compared += 1;
    }
    Ok(RelativeError {
        value: sum.sqrt(),
        skipped,
        compared,
    })
}

pub fn relative_error_2norm(y: &Trajectory, yr: &Trajectory) -> Result<f64> {
    Ok(relative_error_details(y, yr)?.value)
}

/// Affine map of `[t0, tf]` onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeMap {
    pub t0: f64,
    pub length: f64,
    pub unit_tau: f64,
}

impl TimeMap {
    pub fn to_unit(&self, t: f64) -> f64 {
        (t - self.t0) / self.length
    }

    pub fn to_physical(&self, s: f64) -> f64 {
        self.t0 + s * self.length
    }
}

pub fn rescale_time(t0: f64, tf: f64, tau: f64) -> Result<TimeMap> {
    if !(tf > t0) || !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("need tf > t0 and tau > 0, got [{t0}, {tf}], tau = {tau}")));
    }
    let length = tf - t0;
    Ok(TimeMap {
        t0,
        length,
        unit_tau: tau / length,
    })
}

/// The same dynamics on unit time: `E x' = L (A x + B u)` for an interval
/// of length `L`.
pub fn rescale_system(sys: &DescriptorSystem, map: &TimeMap) -> Result<DescriptorSystem> {
    let l = map.length;
    DescriptorSystem::new(
        sys.e.clone(),
        sys.a.scaled(l),
        sys.b.iter().map(|x| x * l).collect(),
        sys.c.clone(),
    )
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,y\n");
    for (t, y) in traj.times.iter().zip(&traj.outputs) {
        let _ = writeln!(s, "{t:.16e},{y:.16e}");
    }
    s
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path)?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "t,y" => {}
        _ => return Err(err(1, "expected header `t,y`".into())),
    }
    let mut times = Vec::new();
    let mut outputs = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(i + 1, format!("expected two fields, got `{line}`")));
        };
        let p = |s: &str| s.trim().parse::<f64>().map_err(|_| err(i + 1, format!("bad number `{s}`")));
        times.push(p(a)?);
        outputs.push(p(b)?);
    }
    Ok(Trajectory {
        times,
        outputs,
        states: None,
    })
}
