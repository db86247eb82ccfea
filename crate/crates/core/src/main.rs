use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdmor::bench::{self, MmSymmetry, TripleChainParams, VectorSource};
use tdmor::experiment::{self, ExperimentConfig, MatrixMarketModel, Method, ModelSpec, OrderRange, PreparedModel};
use tdmor::lti::{ReducedModel, SparseMatrix};
use tdmor::orthopoly::PolynomialFamily;
use tdmor::plot::{self, Figure};
use tdmor::timesim;
use tdmor::verify::{self, Suite, VerifyOptions};
use tdmor::{Error, Result};

#[derive(Parser)]
#[command(name = "tdmor", version, about = "Model order reduction for SISO descriptor systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce one model and print the ROM summary.
    Reduce(ReduceArgs),
    /// Simulate the full model, or a ROM of it, with implicit Euler.
    Simulate(SimulateArgs),
    /// Run a (method, family, order) grid and write the result table.
    Sweep(SweepArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Draw an SVG figure from CSV data.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// fom | triple_chain | mini_gyro | matrix_market
    /// Defaults to `fom`.
    #[arg(long)]
    model: Option<String>,
    /// Chain length of the triple chain.
    #[arg(long)]
    chain_length: Option<usize>,
    /// Matrix Market mass, damping and stiffness files.
    #[arg(long)]
    mass: Option<PathBuf>,
    #[arg(long)]
    damping: Option<PathBuf>,
    #[arg(long)]
    stiffness: Option<PathBuf>,
    /// Matrix Market input vector; all ones when omitted.
    #[arg(long)]
    input_vector: Option<PathBuf>,
    /// Matrix Market output row; all ones when omitted.
    #[arg(long)]
    output_vector: Option<PathBuf>,
    /// chain | gyro
    #[arg(long, default_value = "chain")]
    lift: String,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        match self.model.as_deref().unwrap_or("fom").trim().to_ascii_lowercase().as_str() {
            "fom" => Ok(ModelSpec::Fom),
            "mini_gyro" => Ok(ModelSpec::MiniGyro),
            "triple_chain" => {
                let mut p = TripleChainParams::default();
                if let Some(l) = self.chain_length {
                    p.chain_length = l;
                }
                Ok(ModelSpec::TripleChain(p))
            }
            "matrix_market" => {
                let need = |p: &Option<PathBuf>, flag: &str| {
                    p.clone()
                        .ok_or_else(|| Error::Config(format!("model matrix_market needs --{flag}")))
                };
                let src = |p: &Option<PathBuf>| p.clone().map_or(VectorSource::Ones, VectorSource::File);
                Ok(ModelSpec::MatrixMarket(MatrixMarketModel {
                    m: need(&self.mass, "mass")?,
                    d: need(&self.damping, "damping")?,
                    k: need(&self.stiffness, "stiffness")?,
                    b: src(&self.input_vector),
                    c: src(&self.output_vector),
                    form: experiment::parse_lift_form(&self.lift)?,
                }))
            }
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    method: String,
    #[arg(long)]
    family: Option<String>,
    /// Reduced order (the first entry of a range is used).
    #[arg(long)]
    orders: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for `er.mtx`, `ar.mtx`, `br.mtx`, `cr.mtx`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Simulate a ROM from this method instead of the full model.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    orders: Option<String>,
    /// Time step in model time units.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tf: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV (`t,y`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated methods, or `all`.
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated families.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    orders: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    cycles: Option<usize>,
    /// Directory for per-row trajectory CSVs.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    /// Also write `rel_err` and `timing` SVGs next to the table.
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// observability | eigdist | equivalence | oracle | all
    #[arg(default_value = "all")]
    suite: String,
    /// Largest order swept.
    #[arg(long)]
    max_r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print every check, not only failures and notes.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// rel_err | timing | expansion_points | trajectories
    #[arg(long)]
    figure: String,
    /// Input CSV files.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Order for `expansion_points` when no input is given.
    #[arg(long, default_value = "40")]
    orders: String,
    /// Families for `expansion_points` when no input is given.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

/// Splits on commas outside parentheses, so `jacobi(0.5,1)` stays whole.
fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    if s.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    split_list(s).iter().map(|m| m.parse()).collect()
}

fn parse_families(s: &str) -> Result<Vec<PolynomialFamily>> {
    split_list(s).iter().map(|f| f.parse()).collect()
}

fn rom_summary(model: &ReducedModel) -> String {
    let stable = match model.is_stable() {
        Ok(true) => "stable",
        Ok(false) => "unstable",
        Err(_) => "stability unknown",
    };
    format!(
        "order {} ({stable}), reduce {:.3e} s",
        model.order(),
        model.provenance.reduce_seconds
    )
}

fn write_rom(dir: &Path, model: &ReducedModel) -> Result<()> {
    fs::create_dir_all(dir)?;
    let r = model.order();
    let col = |v: &[f64]| SparseMatrix::from_dense(faer::Mat::from_fn(v.len(), 1, |i, _| v[i]).as_ref());
    bench::write_matrix_market(&dir.join("er.mtx"), &SparseMatrix::from_dense(model.er.as_ref()), MmSymmetry::General)?;
    bench::write_matrix_market(&dir.join("ar.mtx"), &SparseMatrix::from_dense(model.ar.as_ref()), MmSymmetry::General)?;
    bench::write_matrix_market(&dir.join("br.mtx"), &col(&model.br), MmSymmetry::General)?;
    let cr = SparseMatrix::from_dense(faer::Mat::from_fn(1, r, |_, j| model.cr[j]).as_ref());
    bench::write_matrix_market(&dir.join("cr.mtx"), &cr, MmSymmetry::General)?;
    Ok(())
}

fn family_arg(method: Method, family: &Option<String>) -> Result<Option<PolynomialFamily>> {
    match (method.is_time_domain(), family) {
        (true, None) => Ok(Some(PolynomialFamily::Legendre)),
        (true, Some(f)) => Ok(Some(f.parse()?)),
        (false, _) => Ok(None),
    }
}

fn cmd_reduce(a: &ReduceArgs) -> Result<()> {
    let spec = a.model.spec()?;
    let method: Method = a.method.parse()?;
    let r = a.orders.parse::<OrderRange>()?.start;
    let sys = spec.build()?;
    if r > sys.order() {
        return Err(Error::Config(format!("order {r} exceeds the model order {}", sys.order())));
    }
    let rep = experiment::reduce(&sys, method, family_arg(method, &a.family)?, r, a.seed, None)?;
    println!("{} {method}: {}", spec.name(), rom_summary(&rep.model));
    let d = &rep.diagnostics;
    if let Some(c) = d.small_condition {
        println!("small matrix condition {c:.3e}");
    }
    if let Some(c) = d.projected_condition {
        println!("projected pencil condition {c:.3e}");
    }
    if let Some(res) = d.sylvester_residual {
        println!("Sylvester backward residual {res:.3e}");
    }
    if matches!(method, Method::Irka | Method::Oirka) {
        println!("IRKA iterations {} restarts {} converged {}", d.iterations, d.restarts, d.converged);
    }
    if !d.hankel_singular_values.is_empty() {
        let hsv = &d.hankel_singular_values;
        println!("error bound {:.3e}", tdmor::reducers::bt_error_bound(hsv, r));
    }
    if let Some(dir) = &a.out {
        write_rom(dir, &rep.model)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = a.model.spec()?;
    let sys = spec.build()?;
    let mut time = spec.default_time();
    if let Some(t) = a.tau {
        time.tau = t;
    }
    if let Some(t) = a.tf {
        time.tf = t;
    }
    if !(time.tau > 0.0 && time.tau <= time.tf) {
        return Err(Error::Config(format!("need 0 < tau <= tf, got tau = {}, tf = {}", time.tau, time.tf)));
    }
    let prep = PreparedModel::new(spec.name(), &sys, &time)?;
    let traj = match &a.method {
        None => {
            println!("{}: {} samples in {:.3e} s", spec.name(), prep.reference.times.len(), prep.reference_seconds);
            prep.reference.clone()
        }
        Some(m) => {
            let method: Method = m.parse()?;
            let r = a
                .orders
                .as_deref()
                .ok_or_else(|| Error::Config("simulating a ROM needs --orders".into()))?
                .parse::<OrderRange>()?
                .start;
            if r > sys.order() {
                return Err(Error::Config(format!("order {r} exceeds the model order {}", sys.order())));
            }
            let rep = experiment::reduce(&prep.system, method, family_arg(method, &a.family)?, r, a.seed, None)?;
            println!("{method}: {}", rom_summary(&rep.model));
            let traj = prep.simulate(&rep.model)?;
            let e = timesim::relative_error_details(&prep.reference, &traj)?;
            println!(
                "relative error {} ({} samples compared, {} below floor)",
                experiment::format_float(e.value),
                e.compared,
                e.skipped
            );
            traj
        }
    };
    if let Some(out) = &a.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        timesim::write_trajectory_csv(out, &prep.to_physical(&traj))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn sweep_config(a: &SweepArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => {
            let orders = a
                .orders
                .as_deref()
                .ok_or_else(|| Error::Config("sweep needs --orders or --config".into()))?
                .parse()?;
            let methods = parse_methods(a.method.as_deref().unwrap_or("bt"))?;
            ExperimentConfig::new(a.model.spec()?, methods, orders)
        }
    };
    if a.config.is_some() {
        if a.model.model.is_some() {
            let time_was_default = cfg.time == cfg.model.default_time();
            cfg.model = a.model.spec()?;
            if time_was_default {
                cfg.time = cfg.model.default_time();
            }
        }
        if let Some(m) = &a.method {
            cfg.methods = parse_methods(m)?;
        }
        if let Some(o) = &a.orders {
            cfg.orders = o.parse()?;
        }
    }
    if let Some(f) = &a.family {
        cfg.families = parse_families(f)?;
    }
    if let Some(t) = a.tau {
        cfg.time.tau = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    if let Some(j) = a.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(c) = a.cycles {
        cfg.cycles = c;
    }
    if let Some(t) = &a.trajectories {
        cfg.trajectories = Some(t.clone());
    }
    Ok(cfg)
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = sweep_config(a)?;
    let out = experiment::run_sweep(&cfg)?;
    experiment::write_results_csv(&cfg.out, &out.rows)?;
    for row in &out.rows {
        let fam = if row.family_or_shifts == "-" { String::new() } else { format!(" {}", row.family_or_shifts) };
        let note = if row.notes.is_empty() { String::new() } else { format!("  [{}]", row.notes) };
        println!("{}{fam} r={} rel_err {}{note}", row.method, row.r, experiment::format_float(row.rel_err_2));
    }
    println!("wrote {} rows to {}", out.rows.len(), cfg.out.display());
    if a.plots {
        let stem = cfg.out.with_extension("");
        for fig in [Figure::RelErr, Figure::Timing] {
            let svg = PathBuf::from(format!("{}_{}.svg", stem.display(), fig));
            plot::emit_plot(&[cfg.out.as_path()], fig, &svg)?;
            println!("wrote {}", svg.display());
        }
    }
    Ok(())
}

/// Returns whether every hard check passed.
fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let suites: Vec<Suite> = if a.suite.trim() == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse()?]
    };
    let opts = VerifyOptions {
        max_r: a.max_r,
        seed: a.seed,
    };
    let mut text = String::new();
    let mut ok = true;
    for suite in suites {
        let rep = verify::run_verify(suite, &opts)?;
        ok &= rep.passed();
        let full = rep.to_text();
        if a.verbose {
            print!("{full}");
        } else {
            for line in full.lines().filter(|l| !l.starts_with("PASS") && !l.starts_with("ok")) {
                println!("{line}");
            }
        }
        text.push_str(&full);
    }
    if let Some(out) = &a.out {
        fs::write(out, text)?;
    }
    Ok(ok)
}

fn cmd_plot(a: &PlotArgs) -> Result<()> {
    let figure: Figure = a.figure.parse()?;
    let mut inputs = a.input.clone();
    let mut generated = None;
    if inputs.is_empty() && figure == Figure::ExpansionPoints {
        let r = a.orders.parse::<OrderRange>()?.start;
        let families = match &a.family {
            Some(f) => parse_families(f)?,
            None => PolynomialFamily::CLASSICAL.to_vec(),
        };
        let csv = a.out.with_extension("csv");
        fs::write(&csv, plot::expansion_points_csv(&families, r)?)?;
        println!("wrote {}", csv.display());
        generated = Some(csv);
    }
    if let Some(c) = &generated {
        inputs.push(c.clone());
    }
    for p in &inputs {
        if !p.exists() {
            return Err(Error::Config(format!("input {} does not exist", p.display())));
        }
    }
    let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    plot::emit_plot(&refs, figure, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Reduce(a) => cmd_reduce(a).map(|_| true),
        Command::Simulate(a) => cmd_simulate(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Plot(a) => cmd_plot(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
