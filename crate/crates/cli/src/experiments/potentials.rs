//! Critical-radius and reverse-Hölder table experiments.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use bvc_core::potential::{self, GammaFlag, GammaResult, SamplePlan};
use bvc_core::{Error, Result};

use super::{write_text, RunOutcome};
use crate::config::ExperimentConfig;
use crate::report::write_svg_series;

/// γ(x) along the first axis of R^n: m centers x_j = j·box/m.
pub fn gamma_table(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let v = cfg
        .potential()?
        .ok_or_else(|| Error::invalid("gamma-table needs a potential family"))?;
    let nn = v.n() as usize;
    let step = cfg.box_len / cfg.m as f64;
    let centers: Vec<f64> = (0..cfg.m).map(|j| j as f64 * step).collect();
    let table: Vec<GammaResult> = centers
        .par_iter()
        .map(|&x| {
            let mut point = vec![0.0; nn];
            point[0] = x;
            potential::critical_radius(&v, &point, cfg.tol)
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("x,gamma,iterations,flag\n");
    for (x, g) in centers.iter().zip(&table) {
        let _ = writeln!(csv, "{x},{},{},{}", g.gamma, g.iterations, g.flag.as_str());
    }
    let mut out = RunOutcome::new();
    let path = dir.join("table.csv");
    write_text(&path, &csv)?;
    out.file(path);

    let svg = dir.join("plot.svg");
    let series: Vec<(f64, f64)> = centers
        .iter()
        .zip(&table)
        .filter(|(_, g)| g.gamma.is_finite())
        .map(|(&x, g)| (x, g.gamma))
        .collect();
    write_svg_series(&series, "gamma-table: critical radius", "x", "gamma", &svg)?;
    out.file(svg);

    let collapsed = table.iter().filter(|g| g.flag == GammaFlag::AlwaysViolated).count();
    let unbounded = table.iter().filter(|g| g.flag == GammaFlag::NoViolation).count();
    out.note(format!(
        "{} centers: {collapsed} collapsed, {unbounded} unbounded, {} converged",
        table.len(),
        table.len() - collapsed - unbounded
    ));
    out.check("no collapsed critical radius", collapsed == 0);
    Ok(out)
}

/// Reverse-Hölder ratio table over the default ball cloud.
pub fn rh_check(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let v = cfg
        .potential()?
        .ok_or_else(|| Error::invalid("rh-check needs a potential family"))?;
    let q = v.q0();
    let plan = SamplePlan::default_for(v.n(), cfg.extent)?;
    let ratios = potential::rh_ball_ratios(&v, q, &plan)?;
    let estimate = potential::rh_constant_estimate(&v, q, &plan)?;

    let mut csv = String::from("ball,center_norm,radius,ratio\n");
    for (i, ((center, radius), ratio)) in plan.balls.iter().zip(&ratios).enumerate() {
        let center_norm = center.iter().map(|c| c * c).sum::<f64>().sqrt();
        let _ = writeln!(csv, "{i},{center_norm},{radius},{ratio}");
    }
    let mut out = RunOutcome::new();
    let path = dir.join("balls.csv");
    write_text(&path, &csv)?;
    out.file(path);

    let svg = dir.join("plot.svg");
    let series: Vec<(f64, f64)> = plan
        .balls
        .iter()
        .zip(&ratios)
        .filter(|(_, r)| r.is_finite() && **r > 0.0)
        .map(|((_, radius), &r)| (*radius, r))
        .collect();
    write_svg_series(&series, "rh-check: ball ratio vs radius", "radius", "ratio", &svg)?;
    out.file(svg);

    let (wc, wr) = &plan.balls[estimate.worst_ball];
    out.note(format!(
        "RH_{q} constant estimate {} (worst ball {} at |c| = {}, r = {wr})",
        estimate.constant,
        estimate.worst_ball,
        wc.iter().map(|c| c * c).sum::<f64>().sqrt()
    ));
    out.check("RH constant bounded", !estimate.flagged && estimate.constant.is_finite());
    Ok(out)
}
