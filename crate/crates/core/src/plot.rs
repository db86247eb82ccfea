//! SVG figures from result tables, trajectories and expansion points.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use plotters::prelude::*;

use crate::duality;
use crate::error::{Error, Result};
use crate::experiment::{self, ResultRow};
use crate::orthopoly::{PolynomialFamily, Variant};
use crate::timesim;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    RelErr,
    Timing,
    ExpansionPoints,
    Trajectories,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::RelErr, Figure::Timing, Figure::ExpansionPoints, Figure::Trajectories];

    pub fn name(self) -> &'static str {
        match self {
            Figure::RelErr => "rel_err",
            Figure::Timing => "timing",
            Figure::ExpansionPoints => "expansion_points",
            Figure::Trajectories => "trajectories",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Figure::ALL
            .into_iter()
            .find(|x| x.name() == t)
            .ok_or_else(|| Error::Config(format!("unknown figure `{s}` (rel_err | timing | expansion_points | trajectories)")))
    }
}

const SIZE: (u32, u32) = (900, 600);

fn plot_err<E: std::error::Error + Send + Sync>(e: DrawingAreaErrorKind<E>) -> Error {
    Error::Plot(e.to_string())
}

fn color(i: usize) -> RGBAColor {
    Palette99::pick(i).mix(1.0)
}

/// A named polyline.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Rows grouped by `method family_or_shifts`, sorted by `r`. Non-finite and
/// non-positive values are dropped for the log axis.
pub fn series_from_rows(rows: &[ResultRow], value: impl Fn(&ResultRow) -> f64) -> Vec<Series> {
    let mut groups: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rows {
        let key = (row.method.to_string(), row.family_or_shifts.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let v = value(row);
        let entry = groups.entry(key).or_default();
        if v.is_finite() && v > 0.0 {
            entry.push((row.r as f64, v));
        }
    }
    order
        .into_iter()
        .map(|key| {
            let mut points = groups.remove(&key).unwrap_or_default();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let name = match key.1.as_str() {
                "-" | "auto" => key.0,
                fam => format!("{} {fam}", key.0),
            };
            Series { name, points }
        })
        .collect()
}

fn bounds(series: &[Series], log_y: bool) -> ((f64, f64), (f64, f64)) {
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if !y0.is_finite() {
        (y0, y1) = if log_y { (1e-16, 1.0) } else { (0.0, 1.0) };
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if log_y {
        y0 /= 2.0;
        y1 *= 2.0;
    } else {
        let pad = 0.05 * (y1 - y0).max(y1.abs().max(1e-12));
        y0 -= pad;
        y1 += pad;
    }
    ((x0, x1), (y0, y1))
}

fn line_chart(path: &Path, title: &str, x_desc: &str, y_desc: &str, series: &[Series], log_y: bool) -> Result<()> {
    let ((x0, x1), (y0, y1)) = bounds(series, log_y);
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(75);
    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(x_desc)
                .y_desc(y_desc)
                .draw()
                .map_err(plot_err)?;
            for (i, s) in series.iter().enumerate() {
                let c = color(i);
                chart
                    .draw_series(LineSeries::new(s.points.iter().copied(), c.stroke_width(2)))
                    .map_err(plot_err)?
                    .label(s.name.clone())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c.stroke_width(2)));
                if s.points.len() < 200 {
                    chart
                        .draw_series(s.points.iter().map(|&p| Circle::new(p, 3, c.filled())))
                        .map_err(plot_err)?;
                }
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.85))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }};
    }
    if log_y {
        draw!(builder.build_cartesian_2d(x0..x1, (y0..y1).log_scale()).map_err(plot_err)?);
    } else {
        draw!(builder.build_cartesian_2d(x0..x1, y0..y1).map_err(plot_err)?);
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Relative error over `r`, one series per method and family, log scale.
pub fn plot_rel_err(rows: &[ResultRow], out: &Path) -> Result<()> {
    let series = series_from_rows(rows, |r| r.rel_err_2);
    line_chart(out, "Relative error", "reduced order r", "relative 2-norm error", &series, true)
}

/// Reduction plus simulation seconds over `r`, log scale.
pub fn plot_timing(rows: &[ResultRow], out: &Path) -> Result<()> {
    let series = series_from_rows(rows, |r| r.reduce_seconds + r.sim_seconds);
    line_chart(out, "Total time", "reduced order r", "seconds", &series, true)
}

/// One step-response curve per file, labelled by file stem.
pub fn plot_trajectories(files: &[&Path], out: &Path) -> Result<()> {
    let mut series = Vec::new();
    for f in files {
        let t = timesim::read_trajectory_csv(f)?;
        let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        series.push(Series {
            name,
            points: t.times.into_iter().zip(t.outputs).collect(),
        });
    }
    line_chart(out, "Step response", "t", "y(t)", &series, false)
}

pub const EXPANSION_POINTS_HEADER: &str = "family,variant,r,re,im";

/// Finite expansion points of every family at order `r` (tdmor2, or tdmor1
/// where that small matrix is the invertible one).
pub fn expansion_points_csv(families: &[PolynomialFamily], r: usize) -> Result<String> {
    let mut s = String::from(EXPANSION_POINTS_HEADER);
    s.push('\n');
    for &fam in families {
        let variant = match fam {
            PolynomialFamily::Hermite => Variant::Tdmor1,
            _ if crate::orthopoly::is_regular(fam, Variant::Tdmor2, r, 0.0)? => Variant::Tdmor2,
            _ => Variant::Tdmor1,
        };
        let rep = duality::expansion_points(fam, r, variant, 0.0)?;
        for p in rep.finite() {
            let _ = writeln!(
                s,
                "{},{variant},{r},{},{}",
                fam.name(),
                experiment::format_float(p.re),
                experiment::format_float(p.im)
            );
        }
    }
    Ok(s)
}

/// Rows of an expansion-point CSV: `(family, re, im)`.
pub fn read_expansion_points(path: &Path) -> Result<Vec<(String, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == EXPANSION_POINTS_HEADER => {}
        _ => return Err(err(1, format!("expected header `{EXPANSION_POINTS_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(err(i + 1, format!("expected 5 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(i + 1, format!("bad number `{s}`")));
        out.push((f[0].to_string(), num(f[3])?, num(f[4])?));
    }
    Ok(out)
}

/// Complex-plane scatter, one marker colour per family.
pub fn plot_expansion_points(points: &[(String, f64, f64)], out: &Path) -> Result<()> {
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (fam, re, im) in points {
        match groups.iter_mut().find(|g| &g.0 == fam) {
            Some(g) => g.1.push((*re, *im)),
            None => groups.push((fam.clone(), vec![(*re, *im)])),
        }
    }
    let all = points.iter().map(|p| (p.1, p.2));
    let (mut x0, mut x1, mut y0, mut y1) = all.fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), (x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let px = 0.05 * (x1 - x0).max(1e-3);
    let py = 0.05 * (y1 - y0).max(1e-3);
    let root = SVGBackend::new(out, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Expansion points", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(75)
        .build_cartesian_2d(x0 - px..x1 + px, y0 - py..y1 + py)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("Re")
        .y_desc("Im")
        .draw()
        .map_err(plot_err)?;
    for (i, (fam, pts)) in groups.iter().enumerate() {
        let c = color(i);
        chart
            .draw_series(pts.iter().map(|&p| Cross::new(p, 4, c.stroke_width(2))))
            .map_err(plot_err)?
            .label(fam.clone())
            .legend(move |(x, y)| Cross::new((x + 10, y), 4, c.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Dispatch by figure kind. `rel_err` and `timing` read a result table,
/// `expansion_points` a points CSV, `trajectories` trajectory CSVs.
pub fn emit_plot(inputs: &[&Path], figure: Figure, out: &Path) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Config(format!("figure {figure} needs an input CSV")));
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    match figure {
        Figure::RelErr | Figure::Timing => {
            let mut rows = Vec::new();
            for p in inputs {
                rows.extend(experiment::read_results_csv(p)?);
            }
            if figure == Figure::RelErr {
                plot_rel_err(&rows, out)
            } else {
                plot_timing(&rows, out)
            }
        }
        Figure::ExpansionPoints => {
            let mut pts = Vec::new();
            for p in inputs {
                pts.extend(read_expansion_points(p)?);
            }
            plot_expansion_points(&pts, out)
        }
        Figure::Trajectories => plot_trajectories(inputs, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Method;

    fn row(method: Method, fam: &str, r: usize, e: f64) -> ResultRow {
        ResultRow {
            model: "fom".into(),
            method,
            family_or_shifts: fam.into(),
            r,
            rel_err_2: e,
            reduce_seconds: 0.1,
            sim_seconds: 0.01,
            converged: true,
            notes: String::new(),
        }
    }

    #[test]
    fn series_grouping() {
        let rows = vec![
            row(Method::Bt, "-", 4, 1e-3),
            row(Method::Syltdmor2, "legendre", 4, 1e-2),
            row(Method::Bt, "-", 2, 1e-1),
            row(Method::Syltdmor2, "legendre", 2, f64::NAN),
        ];
        let s = series_from_rows(&rows, |r| r.rel_err_2);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].name, "bt");
        assert_eq!(s[0].points, vec![(2.0, 1e-1), (4.0, 1e-3)]);
        assert_eq!(s[1].name, "syltdmor2 legendre");
        assert_eq!(s[1].points.len(), 1);
    }

    #[test]
    fn rel_err_svg() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            row(Method::Bt, "-", 2, 1e-1),
            row(Method::Bt, "-", 4, 1e-3),
            row(Method::Irka, "auto", 2, 1e-2),
            row(Method::Syltdmor2, "legendre", 2, 1e-1),
        ];
        let csv = dir.path().join("r.csv");
        experiment::write_results_csv(&csv, &rows).unwrap();
        let out = dir.path().join("r.svg");
        emit_plot(&[&csv], Figure::RelErr, &out).unwrap();
        let svg = fs::read_to_string(&out).unwrap();
        assert!(svg.starts_with("<svg"));
        for name in ["bt", "irka", "syltdmor2 legendre"] {
            assert!(svg.lines().any(|l| l.trim() == name), "legend {name}");
        }
    }

    #[test]
    fn expansion_points_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("p.csv");
        let text = expansion_points_csv(&[PolynomialFamily::Legendre, PolynomialFamily::Laguerre], 6).unwrap();
        fs::write(&csv, text).unwrap();
        let pts = read_expansion_points(&csv).unwrap();
        assert_eq!(pts.iter().filter(|p| p.0 == "laguerre").count(), 6);
        assert!(pts.iter().filter(|p| p.0 == "laguerre").all(|p| p.1 == 1.0));
        let out = dir.path().join("p.svg");
        emit_plot(&[&csv], Figure::ExpansionPoints, &out).unwrap();
        assert!(out.exists());
    }
}
