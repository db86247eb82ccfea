//! A small experiment grid from a TOML description, written as CSV + SVG.

use std::path::Path;

use tdmor::experiment::{run_sweep, write_results_csv, ExperimentConfig};
use tdmor::plot::{emit_plot, Figure};

const CONFIG: &str = r#"
model = "fom"
methods = ["bt", "irka", "syltdmor2"]
families = ["legendre", "laguerre"]
orders = "4:4:24"
seed = 1
out = "sweep.csv"
"#;

fn main() -> tdmor::Result<()> {
    let dir = std::env::temp_dir().join("tdmor-sweep");
    std::fs::create_dir_all(&dir)?;
    let cfg = ExperimentConfig::from_toml_str(CONFIG, &dir)?;
    let out = run_sweep(&cfg)?;
    write_results_csv(&cfg.out, &out.rows)?;
    for row in &out.rows {
        println!("{:<10} {:<9} r = {:2}  {:.3e}  {}", row.method, row.family_or_shifts, row.r, row.rel_err_2, row.notes);
    }
    let svg = dir.join("sweep.svg");
    emit_plot(&[Path::new(&cfg.out)], Figure::RelErr, &svg)?;
    println!("wrote {} and {}", cfg.out.display(), svg.display());
    Ok(())
}
