//! Experiment reports and their CSV/SVG serializations.
//!
//! The trial table is the contract: `trial,input_norm,output_norm,ratio`.
//! Norm-producing experiments append a second table
//! (`norm_name,p,lambda,alpha,value,refinement_delta`) after one blank line.
//! Floats are written with the shortest round-trip formatting, so identical
//! runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bvc_core::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: u64,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub norm_name: String,
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub value: f64,
    pub refinement_delta: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<TrialRow>,
    pub norm_rows: Vec<NormRow>,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Named relative changes under refinement (ladder doubling, grid
    /// doubling, radius-scan doubling); the stabilization gates read these.
    pub refinement_deltas: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn from_rows(experiment: &str, rows: Vec<TrialRow>) -> ExperimentReport {
        let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
        let mean_ratio = if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64
        };
        ExperimentReport {
            experiment: experiment.to_string(),
            rows,
            norm_rows: Vec::new(),
            max_ratio,
            mean_ratio,
            refinement_deltas: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("trial,input_norm,output_norm,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.trial, r.input_norm, r.output_norm, r.ratio);
        }
        if !self.norm_rows.is_empty() {
            out.push('\n');
            out.push_str("norm_name,p,lambda,alpha,value,refinement_delta\n");
            for n in &self.norm_rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    n.norm_name, n.p, n.lambda, n.alpha, n.value, n.refinement_delta
                );
            }
        }
        out
    }
}

pub fn emit_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    fs::write(path, report.to_csv_string())?;
    Ok(())
}

fn field<'a>(parts: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<&'a str> {
    parts
        .next()
        .ok_or_else(|| Error::Parse(format!("csv line {line}: missing field")))
}

fn num(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("csv line {line}: bad number {s:?}")))
}

/// Parse a CSV produced by `emit_csv` back into its tables.
pub fn parse_csv(text: &str) -> Result<(Vec<TrialRow>, Vec<NormRow>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "trial,input_norm,output_norm,ratio")) => {}
        other => {
            return Err(Error::Parse(format!("missing trial header, found {other:?}")));
        }
    }
    let mut rows = Vec::new();
    let mut norm_rows = Vec::new();
    let mut in_norms = false;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        if raw.is_empty() {
            continue;
        }
        if raw == "norm_name,p,lambda,alpha,value,refinement_delta" {
            in_norms = true;
            continue;
        }
        let mut parts = raw.split(',');
        if in_norms {
            norm_rows.push(NormRow {
                norm_name: field(&mut parts, lineno)?.to_string(),
                p: num(field(&mut parts, lineno)?, lineno)?,
                lambda: num(field(&mut parts, lineno)?, lineno)?,
                alpha: num(field(&mut parts, lineno)?, lineno)?,
                value: num(field(&mut parts, lineno)?, lineno)?,
                refinement_delta: num(field(&mut parts, lineno)?, lineno)?,
            });
        } else {
            rows.push(TrialRow {
                trial: field(&mut parts, lineno)?
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("csv line {lineno}: bad trial index")))?,
                input_norm: num(field(&mut parts, lineno)?, lineno)?,
                output_norm: num(field(&mut parts, lineno)?, lineno)?,
                ratio: num(field(&mut parts, lineno)?, lineno)?,
            });
        }
        if parts.next().is_some() {
            return Err(Error::Parse(format!("csv line {lineno}: trailing fields")));
        }
    }
    Ok((rows, norm_rows))
}

/// Log-log polyline plot of a positive series.  Points with a nonpositive or
/// nonfinite coordinate are dropped; an empty series still yields a frame.
pub fn svg_loglog(series: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|&(x, y)| (x.log10(), y.log10()))
        .collect();

    let (mut x0, mut x1, mut y0, mut y1) = (-1.0, 1.0, -1.0, 1.0);
    if !pts.is_empty() {
        x0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        y1 = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
    }
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>",
        W / 2.0
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB,
        W - MR,
        H - MB
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 {x_label}</text>",
        (ML + W - MR) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">log10 {y_label}</text>",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.2}</text>",
            sx(fx),
            H - MB + 16.0,
            fx
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2}</text>",
            ML - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    if !pts.is_empty() {
        let mut path = String::new();
        for (x, y) in &pts {
            let _ = write!(path, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
            path.trim_end()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The report-level plot: ratio against 1-based trial index.
pub fn emit_svg_plot(report: &ExperimentReport, path: &Path) -> Result<()> {
    let series: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| ((r.trial + 1) as f64, r.ratio))
        .collect();
    let svg = svg_loglog(&series, &report.experiment, "trial", "ratio");
    fs::write(path, svg)?;
    Ok(())
}

pub fn write_svg_series(
    series: &[(f64, f64)],
    title: &str,
    x_label: &str,
    y_label: &str,
    path: &Path,
) -> Result<()> {
    fs::write(path, svg_loglog(series, title, x_label, y_label))?;
    Ok(())
}
