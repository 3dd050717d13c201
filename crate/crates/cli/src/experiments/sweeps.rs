//! Kernel-side sweep experiments: profile envelopes, the four kernel bounds,
//! the weighted potential integral, and the perturbed-kernel bound with its
//! time derivative.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use bvc_core::engine::DenseEvolver;
use bvc_core::kernel::{default_t_grid, default_x_grid, verify_lemma_k, LemmaKReports};
use bvc_core::potential::{self, GammaFlag};
use bvc_core::report::BoundSweepReport;
use bvc_core::specfun::{check_g_envelope, A1};
use bvc_core::{Error, Result, SampledField};

use super::{log_grid, rel_delta, sweep_points_csv, write_text, RunOutcome};
use crate::config::ExperimentConfig;
use crate::report::write_svg_series;

const KERNEL_NS: std::ops::RangeInclusive<u32> = 1..=6;

fn ratio_series(rep: &BoundSweepReport, x_of: impl Fn(&bvc_core::report::KernelPoint) -> f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = rep
        .points
        .iter()
        .filter(|p| !p.flag)
        .map(|p| (x_of(p), p.ratio))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// All four Lemma-2.1-style kernel bounds over the default (x, t) grids,
/// for n = 1..=6.
pub fn kernel_check(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let _ = cfg;
    let x_grid = default_x_grid();
    let t_grid = default_t_grid();
    let reports: Vec<(u32, LemmaKReports)> = KERNEL_NS
        .collect::<Vec<u32>>()
        .into_par_iter()
        .map(|n| verify_lemma_k(n, &x_grid, &t_grid).map(|r| (n, r)))
        .collect::<Result<_>>()?;

    let mut out = RunOutcome::new();
    let mut summary = String::from("bound,n,empirical_c,stabilized\n");
    let bounds: [(&str, fn(&LemmaKReports) -> &BoundSweepReport); 4] = [
        ("k", |r| &r.k),
        ("kt", |r| &r.kt),
        ("kx", |r| &r.kx),
        ("bxt", |r| &r.bxt),
    ];
    for (name, pick) in bounds {
        let path = dir.join(format!("points-{name}.csv"));
        write_text(&path, &sweep_points_csv(reports.iter().map(|(_, r)| pick(r))))?;
        out.file(path);
        for (n, reps) in &reports {
            let rep = pick(reps);
            let ok = rep.stabilized && rep.empirical_c.is_finite() && rep.empirical_c > 0.0;
            let _ = writeln!(summary, "{name},{n},{},{}", rep.empirical_c, rep.stabilized);
            out.check(&format!("{name} n={n} stabilized"), ok);
            if ok {
                out.note(format!("{name} n={n}: empirical C = {:.6}", rep.empirical_c));
            }
        }
    }
    let spath = dir.join("summary.csv");
    write_text(&spath, &summary)?;
    out.file(spath);

    let svg = dir.join("plot.svg");
    write_svg_series(
        &ratio_series(&reports[0].1.k, |p| p.eta),
        "kernel-check: |K| bound ratio, n=1",
        "eta",
        "ratio",
        &svg,
    )?;
    out.file(svg);
    Ok(out)
}

/// Profile derivative envelopes g^(m) for n = 1..=6, m = 0..=2.
pub fn g_envelope(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let _ = cfg;
    let etas: Vec<f64> = (0..=48).map(|i| 0.25 * i as f64).collect();
    let mut out = RunOutcome::new();
    let mut summary = String::from("m,n,empirical_c,stabilized\n");
    let mut first: Option<BoundSweepReport> = None;
    for m in 0..=2u32 {
        let reports: Vec<(u32, BoundSweepReport)> = KERNEL_NS
            .collect::<Vec<u32>>()
            .into_par_iter()
            .map(|n| check_g_envelope(n, &etas, m).map(|r| (n, r)))
            .collect::<Result<_>>()?;
        let path = dir.join(format!("points-m{m}.csv"));
        write_text(&path, &sweep_points_csv(reports.iter().map(|(_, r)| r)))?;
        out.file(path);
        for (n, rep) in reports {
            let ok = rep.stabilized && rep.empirical_c.is_finite() && rep.empirical_c > 0.0;
            let _ = writeln!(summary, "{m},{n},{},{}", rep.empirical_c, rep.stabilized);
            out.check(&format!("envelope m={m} n={n} stabilized"), ok);
            if m == 0 && n == 1 {
                first = Some(rep);
            }
        }
    }
    let spath = dir.join("summary.csv");
    write_text(&spath, &summary)?;
    out.file(spath);

    if let Some(rep) = first {
        let svg = dir.join("plot.svg");
        write_svg_series(
            &ratio_series(&rep, |p| p.eta),
            "g-envelope: ratio vs eta, n=1 m=0",
            "eta",
            "ratio",
            &svg,
        )?;
        out.file(svg);
    }
    Ok(out)
}

/// Weighted potential-integral sweep with a t-grid-doubling stabilization
/// gate.  Centers sit on the first axis; the t range stays below min γ⁴.
pub fn lemma25_check(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let v = cfg
        .potential()?
        .ok_or_else(|| Error::invalid("lemma25-check needs a potential family"))?;
    let nn = v.n() as usize;
    let mags = [0.0, 0.5, 1.0, 2.0];
    let xs: Vec<Vec<f64>> = mags
        .iter()
        .map(|&r| {
            let mut x = vec![0.0; nn];
            x[0] = r;
            x
        })
        .collect();

    let mut gamma_min = f64::INFINITY;
    for x in &xs {
        let g = potential::critical_radius(&v, x, cfg.tol)?;
        if g.flag == GammaFlag::AlwaysViolated {
            return Err(Error::invalid("critical radius collapses at a sweep center"));
        }
        if g.gamma.is_finite() {
            gamma_min = gamma_min.min(g.gamma);
        }
    }
    if !gamma_min.is_finite() {
        return Err(Error::invalid(
            "no finite critical radius among sweep centers; the t range is unconstrained",
        ));
    }
    let t_top = 0.99 * gamma_min.powi(4);
    let coarse = potential::check_lemma_v(&v, &xs, &log_grid(t_top * 1e-3, t_top, 16))?;
    let fine = potential::check_lemma_v(&v, &xs, &log_grid(t_top * 1e-3, t_top, 32))?;
    let delta = rel_delta(fine.empirical_c, coarse.empirical_c);

    let mut out = RunOutcome::new();
    let path = dir.join("points.csv");
    write_text(&path, &sweep_points_csv(std::iter::once(&fine)))?;
    out.file(path);

    let mut summary = String::from("t_points,empirical_c,stabilized\n");
    let _ = writeln!(summary, "16,{},{}", coarse.empirical_c, coarse.stabilized);
    let _ = writeln!(summary, "32,{},{}", fine.empirical_c, fine.stabilized);
    let spath = dir.join("summary.csv");
    write_text(&spath, &summary)?;
    out.file(spath);

    let svg = dir.join("plot.svg");
    let series: Vec<(f64, f64)> = fine
        .points
        .iter()
        .filter(|p| !p.flag && p.x_mag == 0.0)
        .map(|p| (p.t, p.ratio))
        .collect();
    write_svg_series(&series, "lemma25-check: ratio vs t at x=0", "t", "ratio", &svg)?;
    out.file(svg);

    out.note(format!(
        "empirical C: {} (16 t-points) -> {} (32 t-points), delta {:.4}",
        coarse.empirical_c, fine.empirical_c, delta
    ));
    out.check("empirical C finite", fine.empirical_c.is_finite() && fine.empirical_c > 0.0);
    out.check("t-grid doubling < 1%", delta < 0.01);
    Ok(out)
}

struct MaxPoint {
    t: f64,
    dist: f64,
    value: f64,
    bound: f64,
    ratio: f64,
}

/// Largest |K[i,j]| / bound over all grid pairs for one time.
fn worst_pair(
    mat: &DMatrix<f64>,
    grid: &bvc_core::GridSpec,
    gammas: &[f64],
    t: f64,
    nexp: f64,
    a_dec: f64,
    t_power: f64,
) -> MaxPoint {
    let m = grid.m();
    let sqrt_t = t.sqrt();
    let mut best = MaxPoint { t, dist: 0.0, value: 0.0, bound: 1.0, ratio: -1.0 };
    for j in 0..m {
        for k in 0..m {
            let dist = grid.distance(j, k);
            let damp = 1.0 + sqrt_t / (gammas[j] * gammas[j]) + sqrt_t / (gammas[k] * gammas[k]);
            let bound = t.powf(t_power)
                * damp.powf(-nexp)
                * (-a_dec * dist.powf(4.0 / 3.0) / t.powf(1.0 / 3.0)).exp();
            let value = mat[(j, k)].abs();
            let ratio = value / bound;
            if ratio > best.ratio {
                best = MaxPoint { t, dist, value, bound, ratio };
            }
        }
    }
    best
}

/// The bound holds for all t, so the empirical constant only means something
/// when the sweep brackets it: the max must land at an interior time with the
/// series clearly below it at both window ends.
fn interior_peak(ratios: &[f64]) -> (f64, bool) {
    let mut k_max = 0;
    let mut max = f64::NEG_INFINITY;
    for (k, &r) in ratios.iter().enumerate() {
        if r > max {
            max = r;
            k_max = k;
        }
    }
    let ok = max.is_finite()
        && max > 0.0
        && k_max >= 1
        && k_max + 3 <= ratios.len()
        && ratios[0] <= 0.9 * max
        && ratios[ratios.len() - 1] <= 0.9 * max;
    (max, ok)
}

/// Perturbed-kernel bound sweep on a d=1 grid: the kernel matrix against
/// t^{-n/4}(1 + √t/γ²(x) + √t/γ²(y))^{-N} e^{-A₂ d^{4/3}/t^{1/3}}, and its
/// time derivative against the same envelope with decay rate A₃ ≤ A₂ and
/// prefactor t^{-(n+4)/4}.  Reports the largest A₃ that stabilizes.
pub fn lemma26_check(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    if cfg.d != 1 {
        return Err(Error::invalid("lemma26-check runs on d=1 grids"));
    }
    let grid = cfg.grid()?;
    let v = cfg
        .potential()?
        .ok_or_else(|| Error::invalid("lemma26-check needs a potential family"))?;
    if v.n() != 1 {
        return Err(Error::invalid("lemma26-check needs a 1-dimensional potential"));
    }
    let vf: SampledField = v.sample_on(grid)?;
    let gammas: Vec<f64> = potential::gamma_table(&v, &grid, 1e-6)?
        .into_iter()
        .map(|g| g.gamma)
        .collect();
    if gammas.iter().any(|&g| g <= 0.0) {
        return Err(Error::invalid("critical radius vanishes on the grid"));
    }
    let evolver = DenseEvolver::new(&grid, &vf)?;

    let a2 = A1 / 2.0;
    // The ratio peaks where the ground-state decay e^{-mu0 t} overtakes the
    // bound's polynomial decay (t of order 1/mu0); the window must bracket
    // that crossover or the max sits on the boundary and means nothing.
    let mu0 = evolver.smallest_eigenvalue().max(1e-6);
    let times = log_grid(1e-3, 40.0 / mu0, 24);
    let a3_fractions = [0.99, 0.95, 0.9, 0.8, 0.7, 0.6, 0.5];

    // One kernel matrix and one centered time derivative per ladder time.
    let mats: Vec<(DMatrix<f64>, DMatrix<f64>)> = times
        .par_iter()
        .map(|&t| {
            let k = evolver.kernel_matrix(t)?;
            let h = t / 100.0;
            let kdot = (evolver.kernel_matrix(t + h)? - evolver.kernel_matrix(t - h)?) / (2.0 * h);
            Ok((k, kdot))
        })
        .collect::<Result<_>>()?;

    let b_points: Vec<MaxPoint> = times
        .iter()
        .zip(&mats)
        .map(|(&t, (k, _))| worst_pair(k, &grid, &gammas, t, cfg.nexp, a2, -0.25))
        .collect();
    let (b_const, b_stable) = interior_peak(&b_points.iter().map(|p| p.ratio).collect::<Vec<_>>());

    let bt_sweeps: Vec<(f64, Vec<MaxPoint>)> = a3_fractions
        .iter()
        .map(|frac| {
            let a3 = a2 * frac;
            let pts: Vec<MaxPoint> = times
                .iter()
                .zip(&mats)
                .map(|(&t, (_, kdot))| worst_pair(kdot, &grid, &gammas, t, cfg.nexp, a3, -1.25))
                .collect();
            (a3, pts)
        })
        .collect();

    let mut out = RunOutcome::new();
    let mut summary = String::from("bound,a_exp,empirical_c,stable\n");
    let _ = writeln!(summary, "B,{a2},{b_const},{b_stable}");
    let mut chosen: Option<(f64, &Vec<MaxPoint>)> = None;
    for (a3, pts) in &bt_sweeps {
        let (c, stable) = interior_peak(&pts.iter().map(|p| p.ratio).collect::<Vec<_>>());
        let _ = writeln!(summary, "Bt,{a3},{c},{stable}");
        if stable && chosen.is_none() {
            chosen = Some((*a3, pts));
        }
    }
    let spath = dir.join("summary.csv");
    write_text(&spath, &summary)?;
    out.file(spath);

    let mut points = String::from("bound,a_exp,t,x_mag,value,bound_value,ratio\n");
    for p in &b_points {
        let _ = writeln!(points, "B,{a2},{},{},{},{},{}", p.t, p.dist, p.value, p.bound, p.ratio);
    }
    let (bt_a3, bt_points) = match chosen {
        Some((a3, pts)) => (Some(a3), pts),
        // no candidate stabilized; record the gentlest decay rate honestly
        None => (None, &bt_sweeps.last().unwrap().1),
    };
    let a3_written = bt_a3.unwrap_or(a2 * a3_fractions[a3_fractions.len() - 1]);
    for p in bt_points {
        let _ = writeln!(
            points,
            "Bt,{a3_written},{},{},{},{},{}",
            p.t, p.dist, p.value, p.bound, p.ratio
        );
    }
    let ppath = dir.join("points.csv");
    write_text(&ppath, &points)?;
    out.file(ppath);

    let svg = dir.join("plot.svg");
    write_svg_series(
        &b_points.iter().map(|p| (p.t, p.ratio)).collect::<Vec<_>>(),
        "lemma26-check: kernel bound ratio vs t",
        "t",
        "ratio",
        &svg,
    )?;
    out.file(svg);

    out.note(format!("kernel bound: empirical C = {b_const} (decay rate {a2})"));
    match bt_a3 {
        Some(a3) => out.note(format!("time-derivative bound stabilizes at A3 = {a3}")),
        None => out.note("time-derivative bound: no A3 candidate stabilized".to_string()),
    }
    out.check("kernel bound stabilized", b_stable);
    out.check("some A3 stabilized", bt_a3.is_some());
    Ok(out)
}
