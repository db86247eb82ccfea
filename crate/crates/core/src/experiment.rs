//! Experiment grids: configuration, sweeps over `(method, family, r)` and
//! the result table.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::bench::{self, TripleChainParams, VectorSource};
use crate::error::{Error, Result};
use crate::lti::{lift_second_order, DescriptorSystem, LiftForm};
use crate::orthopoly::PolynomialFamily;
use crate::reducers::{self, BalancedTruncator, IrkaOptions, ReductionReport, Sided};
use crate::timesim::{self, InputSignal, TimeMap, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Syltdmor1,
    Syltdmor2,
    /// One-sided moment matching.
    Omm,
    /// Two-sided moment matching.
    Tmm,
    /// One-sided IRKA.
    Oirka,
    Irka,
    Bt,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Syltdmor1,
        Method::Syltdmor2,
        Method::Omm,
        Method::Tmm,
        Method::Oirka,
        Method::Irka,
        Method::Bt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Syltdmor1 => "syltdmor1",
            Method::Syltdmor2 => "syltdmor2",
            Method::Omm => "omm",
            Method::Tmm => "tmm",
            Method::Oirka => "oirka",
            Method::Irka => "irka",
            Method::Bt => "bt",
        }
    }

    /// Methods parametrized by a polynomial family.
    pub fn is_time_domain(self) -> bool {
        matches!(self, Method::Syltdmor1 | Method::Syltdmor2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == t)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Inclusive range `start:step:stop`; a single number means one order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderRange {
    pub start: usize,
    pub step: usize,
    pub stop: usize,
}

impl OrderRange {
    pub fn single(r: usize) -> Self {
        OrderRange { start: r, step: 1, stop: r }
    }

    pub fn orders(&self) -> Vec<usize> {
        (self.start..=self.stop).step_by(self.step).collect()
    }
}

impl FromStr for OrderRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("orders must be `r` or `start:step:stop` with positive integers, got `{s}`"));
        let nums: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let range = match nums.as_slice() {
            [r] => OrderRange::single(*r),
            [a, b, c] => OrderRange {
                start: *a,
                step: *b,
                stop: *c,
            },
            _ => return Err(bad()),
        };
        if range.start == 0 || range.step == 0 || range.stop < range.start {
            return Err(bad());
        }
        Ok(range)
    }
}

impl fmt::Display for OrderRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMarketModel {
    pub m: PathBuf,
    pub d: PathBuf,
    pub k: PathBuf,
    pub b: VectorSource,
    pub c: VectorSource,
    pub form: LiftForm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Fom,
    TripleChain(TripleChainParams),
    MiniGyro,
    MatrixMarket(MatrixMarketModel),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Fom => "fom",
            ModelSpec::TripleChain(_) => "triple_chain",
            ModelSpec::MiniGyro => "mini_gyro",
            ModelSpec::MatrixMarket(_) => "matrix_market",
        }
    }

    pub fn build(&self) -> Result<DescriptorSystem> {
        match self {
            ModelSpec::Fom => Ok(bench::build_fom()),
            ModelSpec::TripleChain(p) => bench::build_triple_chain_system(p),
            ModelSpec::MiniGyro => Ok(bench::build_mini_gyro()),
            ModelSpec::MatrixMarket(mm) => {
                let sos = bench::load_matrix_market(&mm.m, &mm.d, &mm.k, &mm.b, &mm.c)?;
                lift_second_order(&sos, mm.form)
            }
        }
    }

    /// Default time settings for this model.
    pub fn default_time(&self) -> TimeSettings {
        match self {
            ModelSpec::MiniGyro => TimeSettings {
                tf: bench::MINI_GYRO_HORIZON,
                tau: bench::MINI_GYRO_TAU,
                input: InputSignal::SmoothStep {
                    ta: bench::MINI_GYRO_STEP.0,
                    tb: bench::MINI_GYRO_STEP.1,
                },
            },
            _ => TimeSettings::default(),
        }
    }
}

/// Simulation window `[0, tf]` in physical time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSettings {
    pub tf: f64,
    pub tau: f64,
    pub input: InputSignal,
}

impl Default for TimeSettings {
    fn default() -> Self {
        TimeSettings {
            tf: 1.0,
            tau: 1e-3,
            input: InputSignal::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub methods: Vec<Method>,
    pub families: Vec<PolynomialFamily>,
    pub orders: OrderRange,
    pub time: TimeSettings,
    pub seed: u64,
    /// Repetitions per row; timings are averaged.
    pub cycles: usize,
    pub out: PathBuf,
    /// Directory for one trajectory CSV per row plus `fom.csv`.
    pub trajectories: Option<PathBuf>,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, methods: Vec<Method>, orders: OrderRange) -> Self {
        let time = model.default_time();
        ExperimentConfig {
            model,
            methods,
            families: vec![PolynomialFamily::Legendre],
            orders,
            time,
            seed: 0,
            cycles: 1,
            out: PathBuf::from("results.csv"),
            trajectories: None,
            jobs: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    /// Parses the TOML grammar documented in the README. Relative paths are
    /// resolved against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_config(base)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.methods.iter().any(|m| m.is_time_domain()) && self.families.is_empty() {
            return Err(Error::Config("time-domain methods need at least one family".into()));
        }
        if self.orders.stop > n {
            return Err(Error::Config(format!("orders {} exceed the model order {n}", self.orders)));
        }
        if !(self.time.tf > 0.0) || !(self.time.tau > 0.0) || self.time.tau > self.time.tf {
            return Err(Error::Config(format!("need 0 < tau <= tf, got tau = {}, tf = {}", self.time.tau, self.time.tf)));
        }
        if self.cycles == 0 {
            return Err(Error::Config("cycles must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    methods: Vec<String>,
    #[serde(default)]
    families: Option<Vec<String>>,
    orders: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    cycles: Option<usize>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    trajectories: Option<PathBuf>,
    #[serde(default)]
    jobs: Option<usize>,
    #[serde(default)]
    time: Option<RawTime>,
    #[serde(default)]
    triple_chain: Option<RawTripleChain>,
    #[serde(default)]
    matrix_market: Option<RawMatrixMarket>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    tf: Option<f64>,
    tau: Option<f64>,
    /// Smoothed step window `[ta, tb]`.
    step: Option<[f64; 2]>,
    constant: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTripleChain {
    chain_length: Option<usize>,
    mass: Option<f64>,
    coupling_mass: Option<f64>,
    stiffness: Option<f64>,
    damping_alpha: Option<f64>,
    damping_beta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixMarket {
    m: PathBuf,
    d: PathBuf,
    k: PathBuf,
    #[serde(default)]
    b: Option<String>,
    #[serde(default)]
    c: Option<String>,
    #[serde(default)]
    form: Option<String>,
}

fn vector_source(s: Option<&str>, base: &Path) -> VectorSource {
    match s.map(str::trim) {
        None | Some("ones") => VectorSource::Ones,
        Some(p) => VectorSource::File(base.join(p)),
    }
}

pub fn parse_lift_form(s: &str) -> Result<LiftForm> {
    match s.trim().to_ascii_lowercase().as_str() {
        "chain" => Ok(LiftForm::Chain),
        "gyro" => Ok(LiftForm::Gyro),
        _ => Err(Error::Config(format!("unknown lift form `{s}` (chain | gyro)"))),
    }
}

impl RawConfig {
    fn into_config(self, base: &Path) -> Result<ExperimentConfig> {
        let model = match self.model.trim().to_ascii_lowercase().as_str() {
            "fom" => ModelSpec::Fom,
            "mini_gyro" => ModelSpec::MiniGyro,
            "triple_chain" => {
                let mut p = TripleChainParams::default();
                if let Some(t) = &self.triple_chain {
                    p.chain_length = t.chain_length.unwrap_or(p.chain_length);
                    p.mass = t.mass.unwrap_or(p.mass);
                    p.coupling_mass = t.coupling_mass.unwrap_or(p.coupling_mass);
                    p.stiffness = t.stiffness.unwrap_or(p.stiffness);
                    p.damping_alpha = t.damping_alpha.unwrap_or(p.damping_alpha);
                    p.damping_beta = t.damping_beta.unwrap_or(p.damping_beta);
                }
                ModelSpec::TripleChain(p)
            }
            "matrix_market" => {
                let mm = self
                    .matrix_market
                    .as_ref()
                    .ok_or_else(|| Error::Config("model `matrix_market` needs a [matrix_market] table".into()))?;
                ModelSpec::MatrixMarket(MatrixMarketModel {
                    m: base.join(&mm.m),
                    d: base.join(&mm.d),
                    k: base.join(&mm.k),
                    b: vector_source(mm.b.as_deref(), base),
                    c: vector_source(mm.c.as_deref(), base),
                    form: parse_lift_form(mm.form.as_deref().unwrap_or("chain"))?,
                })
            }
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        };
        let methods = self.methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>()?;
        let orders: OrderRange = self.orders.parse()?;
        let mut cfg = ExperimentConfig::new(model, methods, orders);
        if let Some(f) = &self.families {
            cfg.families = f.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(t) = &self.time {
            if t.step.is_some() && t.constant.is_some() {
                return Err(Error::Config("[time] takes either `step` or `constant`, not both".into()));
            }
            cfg.time.tf = t.tf.unwrap_or(cfg.time.tf);
            cfg.time.tau = t.tau.unwrap_or(cfg.time.tau);
            if let Some([ta, tb]) = t.step {
                if !(tb > ta) {
                    return Err(Error::Config(format!("step window needs ta < tb, got [{ta}, {tb}]")));
                }
                cfg.time.input = InputSignal::SmoothStep { ta, tb };
            }
            if let Some(v) = t.constant {
                cfg.time.input = InputSignal::Constant(v);
            }
        }
        cfg.seed = self.seed;
        cfg.cycles = self.cycles.unwrap_or(1);
        if let Some(o) = self.out {
            cfg.out = base.join(o);
        }
        cfg.trajectories = self.trajectories.map(|t| base.join(t));
        cfg.jobs = self.jobs;
        Ok(cfg)
    }
}

/// One line of the result table.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub model: String,
    pub method: Method,
    pub family_or_shifts: String,
    pub r: usize,
    /// `NaN` for failed reductions and unstable ROMs.
    pub rel_err_2: f64,
    pub reduce_seconds: f64,
    pub sim_seconds: f64,
    pub converged: bool,
    pub notes: String,
}

pub const CSV_HEADER: &str = "model,method,family_or_shifts,r,rel_err_2,reduce_seconds,sim_seconds,converged,notes";

/// 17 significant digits; `nan` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".to_string()
    }
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&self.model),
            self.method,
            csv_field(&self.family_or_shifts),
            self.r,
            format_float(self.rel_err_2),
            format_float(self.reduce_seconds),
            format_float(self.sim_seconds),
            self.converged,
            csv_field(&self.notes)
        )
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for row in rows {
        let _ = writeln!(s, "{}", row.to_csv_line());
    }
    s
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, results_csv(rows))?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.splitn(9, ',').collect();
        if f.len() != 9 {
            return Err(parse_err(i + 1, format!("expected 9 fields, got {}", f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| parse_err(i + 1, format!("bad number `{s}`")))
        };
        rows.push(ResultRow {
            model: f[0].to_string(),
            method: f[1].parse().map_err(|_| parse_err(i + 1, format!("bad method `{}`", f[1])))?,
            family_or_shifts: f[2].to_string(),
            r: f[3].parse().map_err(|_| parse_err(i + 1, format!("bad order `{}`", f[3])))?,
            rel_err_2: num(f[4])?,
            reduce_seconds: num(f[5])?,
            sim_seconds: num(f[6])?,
            converged: f[7] == "true",
            notes: f[8].to_string(),
        });
    }
    Ok(rows)
}

/// A model moved to unit time, with its reference trajectory.
pub struct PreparedModel {
    pub name: String,
    /// Dynamics on `[0, 1]`.
    pub system: DescriptorSystem,
    pub map: TimeMap,
    /// Input in unit time.
    pub input: InputSignal,
    pub reference: Trajectory,
    pub reference_seconds: f64,
}

fn unit_input(input: &InputSignal, map: &TimeMap) -> InputSignal {
    match input {
        InputSignal::SmoothStep { ta, tb } => InputSignal::SmoothStep {
            ta: map.to_unit(*ta),
            tb: map.to_unit(*tb),
        },
        InputSignal::Constant(v) => InputSignal::Constant(*v),
        InputSignal::Table { times, values } => InputSignal::Table {
            times: times.iter().map(|&t| map.to_unit(t)).collect(),
            values: values.clone(),
        },
    }
}

impl PreparedModel {
    pub fn new(name: &str, sys: &DescriptorSystem, time: &TimeSettings) -> Result<Self> {
        let map = timesim::rescale_time(0.0, time.tf, time.tau)?;
        let system = if map.length == 1.0 {
            sys.clone()
        } else {
            timesim::rescale_system(sys, &map)?
        };
        let input = unit_input(&time.input, &map);
        let t = Instant::now();
        let reference = timesim::implicit_euler(&system, &input, 0.0, 1.0, map.unit_tau, None, false)?;
        Ok(PreparedModel {
            name: name.to_string(),
            system,
            map,
            input,
            reference,
            reference_seconds: t.elapsed().as_secs_f64(),
        })
    }

    pub fn simulate(&self, model: &crate::lti::ReducedModel) -> Result<Trajectory> {
        timesim::implicit_euler(model, &self.input, 0.0, 1.0, self.map.unit_tau, None, false)
    }

    /// Trajectory with physical time stamps.
    pub fn to_physical(&self, traj: &Trajectory) -> Trajectory {
        Trajectory {
            times: traj.times.iter().map(|&s| self.map.to_physical(s)).collect(),
            outputs: traj.outputs.clone(),
            states: None,
        }
    }
}

/// Reduction by name. `bt` reuses `truncator` when given.
pub fn reduce(
    sys: &DescriptorSystem,
    method: Method,
    family: Option<PolynomialFamily>,
    r: usize,
    seed: u64,
    truncator: Option<&BalancedTruncator>,
) -> Result<ReductionReport> {
    let family = || family.ok_or_else(|| Error::Config(format!("method {method} needs a family")));
    match method {
        Method::Syltdmor1 => reducers::syltdmor1(sys, family()?, r, 0.0),
        Method::Syltdmor2 => reducers::syltdmor2(sys, family()?, r),
        Method::Omm | Method::Tmm => {
            let shifts = reducers::irka_initial_shifts(sys, r)?;
            let sided = if method == Method::Omm { Sided::One } else { Sided::Two };
            reducers::moment_matching(sys, &shifts, sided)
        }
        Method::Oirka | Method::Irka => {
            let opts = IrkaOptions {
                sided: if method == Method::Oirka { Sided::One } else { Sided::Two },
                seed,
                ..Default::default()
            };
            reducers::irka(sys, r, &opts)
        }
        Method::Bt => match truncator {
            Some(t) => t.truncate(r),
            None => reducers::balanced_truncation(sys, r),
        },
    }
}

struct Task {
    method: Method,
    family: Option<PolynomialFamily>,
    r: usize,
}

fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        let families: Vec<Option<PolynomialFamily>> = if method.is_time_domain() {
            cfg.families.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for family in families {
            for r in cfg.orders.orders() {
                out.push(Task { method, family, r });
            }
        }
    }
    out
}

fn label(task: &Task) -> String {
    match (task.method, task.family) {
        (_, Some(f)) => f.to_string(),
        (Method::Bt, None) => "-".to_string(),
        (_, None) => "auto".to_string(),
    }
}

fn trajectory_name(task: &Task) -> String {
    match task.family {
        Some(f) => format!("{}_{}_r{}.csv", task.method, f.name(), task.r),
        None => format!("{}_r{}.csv", task.method, task.r),
    }
}

/// Everything a sweep produced.
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub reference_seconds: f64,
}

fn run_task(
    cfg: &ExperimentConfig,
    prep: &PreparedModel,
    task: &Task,
    truncator: &OnceLock<std::result::Result<(BalancedTruncator, f64), String>>,
) -> ResultRow {
    let mut row = ResultRow {
        model: prep.name.clone(),
        method: task.method,
        family_or_shifts: label(task),
        r: task.r,
        rel_err_2: f64::NAN,
        reduce_seconds: f64::NAN,
        sim_seconds: f64::NAN,
        converged: false,
        notes: String::new(),
    };
    let mut bt_setup = 0.0;
    let bt = if task.method == Method::Bt {
        let entry = truncator.get_or_init(|| {
            let t = Instant::now();
            BalancedTruncator::new(&prep.system)
                .map(|b| (b, t.elapsed().as_secs_f64()))
                .map_err(|e| e.to_string())
        });
        match entry {
            Ok((b, secs)) => {
                bt_setup = *secs;
                Some(b)
            }
            Err(e) => {
                row.notes = format!("reduction failed: {e}");
                return row;
            }
        }
    } else {
        None
    };
    let mut reduce_total = 0.0;
    let mut sim_total = 0.0;
    let mut last = None;
    for _ in 0..cfg.cycles {
        let t = Instant::now();
        let rep = match reduce(&prep.system, task.method, task.family, task.r, cfg.seed, bt) {
            Ok(rep) => rep,
            Err(e) => {
                row.notes = format!("reduction failed: {e}");
                return row;
            }
        };
        reduce_total += t.elapsed().as_secs_f64() + bt_setup;
        let stable = rep.model.is_finite() && rep.model.is_stable().unwrap_or(false);
        if !stable {
            row.reduce_seconds = reduce_total;
            row.converged = rep.diagnostics.converged;
            row.notes = "unstable ROM".to_string();
            return row;
        }
        let t = Instant::now();
        let traj = match prep.simulate(&rep.model) {
            Ok(tr) => tr,
            Err(e) => {
                row.reduce_seconds = reduce_total;
                row.notes = format!("simulation failed: {e}");
                return row;
            }
        };
        sim_total += t.elapsed().as_secs_f64();
        last = Some((rep, traj));
    }
    let (rep, traj) = last.expect("cycles >= 1");
    let cycles = cfg.cycles as f64;
    row.reduce_seconds = reduce_total / cycles;
    row.sim_seconds = sim_total / cycles;
    row.converged = rep.diagnostics.converged;
    let mut notes = Vec::new();
    if rep.model.order() != task.r {
        notes.push(format!("ROM order {}", rep.model.order()));
    }
    if matches!(task.method, Method::Irka | Method::Oirka) {
        if !rep.diagnostics.converged {
            notes.push(format!("not converged after {} iterations", rep.diagnostics.iterations));
        }
        if rep.diagnostics.restarts > 0 {
            notes.push(format!("{} restarts", rep.diagnostics.restarts));
        }
    }
    match timesim::relative_error_details(&prep.reference, &traj) {
        Ok(e) => {
            row.rel_err_2 = e.value;
            if e.skipped > 0 {
                notes.push(format!("{} samples below floor", e.skipped));
            }
        }
        Err(e) => notes.push(format!("error metric failed: {e}")),
    }
    if let Some(dir) = &cfg.trajectories {
        let path = dir.join(trajectory_name(task));
        if let Err(e) = timesim::write_trajectory_csv(&path, &prep.to_physical(&traj)) {
            notes.push(format!("trajectory not written: {e}"));
        }
    }
    row.notes = notes.join("; ");
    row
}

/// Runs every `(method, family, r)` of `cfg`. Rows come back in config
/// order; failures end up in `notes` instead of aborting the sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    // faer's blocked kernels split work by the pool size, which would make
    // the last digits depend on `jobs`; rows are the unit of parallelism
    let par = faer::get_global_parallelism();
    faer::set_global_parallelism(faer::Par::Seq);
    let out = sweep_rows(cfg);
    faer::set_global_parallelism(par);
    out
}

fn sweep_rows(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let sys = cfg.model.build()?;
    cfg.validate(sys.order())?;
    let prep = PreparedModel::new(cfg.model.name(), &sys, &cfg.time)?;
    if let Some(dir) = &cfg.trajectories {
        fs::create_dir_all(dir)?;
        timesim::write_trajectory_csv(&dir.join("fom.csv"), &prep.to_physical(&prep.reference))?;
    }
    let tasks = tasks(cfg);
    let truncator = OnceLock::new();
    let work = || -> Vec<ResultRow> { tasks.par_iter().map(|t| run_task(cfg, &prep, t, &truncator)).collect() };
    let rows = match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {j} workers: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(SweepOutput {
        rows,
        reference_seconds: prep.reference_seconds,
    })
}
