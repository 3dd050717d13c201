//! Operator-norm experiments: ρ-variation of the three semigroup families
//! against Lebesgue/Morrey norms, the Duhamel residual check, the variation
//! DP selftest, and maximal-function domination of the truncation error.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use bvc_core::engine::{self, DenseEvolver, PoissonParams};
use bvc_core::norms::{self, MorreyParams};
use bvc_core::potential::{self, GammaFlag};
use bvc_core::rng::{band_limited_field, trial_seed};
use bvc_core::specfun;
use bvc_core::variation::{
    brute_force_seminorm, rho_variation_seminorm, variation_field, TimeLadder, VariationParams,
};
use bvc_core::{Error, GridSpec, Result, SampledField};

use super::{rel_delta, write_text, RunOutcome};
use crate::config::ExperimentConfig;
use crate::report::{
    emit_csv, emit_svg_plot, write_svg_series, ExperimentReport, NormRow, TrialRow,
};

/// One semigroup family, closed over everything trial-independent.
enum Flow {
    Free,
    Split { v: SampledField, substeps: usize },
    /// V = 0 runs through the spectral subordination route per call; a
    /// nonzero potential gets one precomputed matrix per ladder time.
    Subordinated { v: SampledField, params: PoissonParams, matrices: HashMap<u64, DMatrix<f64>> },
}

impl Flow {
    fn evolve(&self, f: &SampledField, t: f64) -> Result<SampledField> {
        match self {
            Flow::Free => engine::biharmonic_step(f, t),
            Flow::Split { v, substeps } => engine::schrodinger4_evolve(f, v, t, *substeps),
            Flow::Subordinated { v, params, matrices } => match matrices.get(&t.to_bits()) {
                Some(mat) => {
                    let out = mat * DVector::from_column_slice(f.values());
                    SampledField::new(*f.grid(), out.as_slice().to_vec())
                }
                None => engine::poisson_apply(f, v, t, params),
            },
        }
    }
}

#[derive(Clone, Copy)]
enum FlowKind {
    Biharmonic,
    Schrodinger,
    Poisson,
}

fn flow_kind(experiment: &str) -> Result<FlowKind> {
    match experiment.rsplit('-').next() {
        Some("biharmonic") => Ok(FlowKind::Biharmonic),
        Some("schrodinger") => Ok(FlowKind::Schrodinger),
        Some("poisson") => Ok(FlowKind::Poisson),
        _ => Err(Error::invalid(format!("no semigroup family in {experiment:?}"))),
    }
}

/// Builds the flow for `grid`; `times` lists every ladder time the caller
/// will evaluate, so the subordinated route can hoist its per-time matrices.
fn make_flow(cfg: &ExperimentConfig, grid: &GridSpec, times: &[f64]) -> Result<Flow> {
    let kind = flow_kind(&cfg.experiment)?;
    let pot = cfg.potential()?;
    match kind {
        FlowKind::Biharmonic => Ok(Flow::Free),
        FlowKind::Schrodinger => match pot {
            // With V = 0 splitting is algebraically the free flow; collapsing
            // to the single-step path keeps the report bit-identical to the
            // biharmonic experiment instead of only equal up to rounding.
            None => Ok(Flow::Free),
            Some(v) => Ok(Flow::Split { v: v.sample_on(*grid)?, substeps: cfg.substeps }),
        },
        FlowKind::Poisson => {
            let params = PoissonParams::new(cfg.sigma, cfg.nodes)?;
            match pot {
                None => Ok(Flow::Subordinated {
                    v: SampledField::zeros(*grid),
                    params,
                    matrices: HashMap::new(),
                }),
                Some(v) => {
                    let vf = v.sample_on(*grid)?;
                    let evolver = DenseEvolver::new(grid, &vf)?;
                    let (r, w) = engine::gauss_laguerre_generalized(cfg.nodes, cfg.sigma - 1.0)?;
                    let gam = specfun::gamma(cfg.sigma);
                    let mats: Vec<(u64, DMatrix<f64>)> = times
                        .par_iter()
                        .map(|&t| {
                            let mat = evolver.filtered_matrix(|lam| {
                                r.iter()
                                    .zip(&w)
                                    .map(|(&ri, &wi)| wi * (-(t * t / (4.0 * ri)) * lam).exp())
                                    .sum::<f64>()
                                    / gam
                            });
                            (t.to_bits(), mat)
                        })
                        .collect();
                    Ok(Flow::Subordinated { v: vf, params, matrices: mats.into_iter().collect() })
                }
            }
        }
    }
}

enum NormKind {
    Lp(f64),
    Morrey { params: MorreyParams, radii: usize },
    Weighted { params: MorreyParams, gamma: Vec<f64>, radii: usize },
}

impl NormKind {
    fn eval(&self, f: &SampledField) -> Result<f64> {
        match self {
            NormKind::Lp(p) => norms::lp_norm(f, *p),
            NormKind::Morrey { params, radii } => norms::morrey_norm_scan(f, params, *radii),
            NormKind::Weighted { params, gamma, radii } => {
                norms::morrey_potential_norm_with_gamma(f, params, gamma, *radii)
            }
        }
    }
}

fn build_norm(cfg: &ExperimentConfig, grid: &GridSpec, radii: usize) -> Result<NormKind> {
    if !cfg.experiment.starts_with("morrey-") {
        return Ok(NormKind::Lp(cfg.p));
    }
    let params = cfg.morrey()?;
    if cfg.alpha == 0.0 {
        return Ok(NormKind::Morrey { params, radii });
    }
    let v = cfg.potential()?.ok_or_else(|| {
        Error::invalid("weighted Morrey norm needs a potential; set family or alpha=0")
    })?;
    let table = potential::gamma_table(&v, grid, 1e-6)?;
    if table.iter().any(|g| g.flag == GammaFlag::AlwaysViolated) {
        return Err(Error::invalid("critical radius collapses on the grid"));
    }
    let gamma = table.into_iter().map(|g| g.gamma).collect();
    Ok(NormKind::Weighted { params, gamma, radii })
}

struct TrialData {
    row: TrialRow,
    f: SampledField,
    vf: SampledField,
}

fn run_trials(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    flow: &Flow,
    ladder: &TimeLadder,
    band: usize,
    norm: &NormKind,
) -> Result<Vec<TrialData>> {
    let params = VariationParams::new(cfg.rho)?;
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let f = band_limited_field(grid, trial_seed(cfg.seed, i), band)?;
            let mut ev = |t: f64| flow.evolve(&f, t);
            let vf = variation_field(&mut ev, ladder, params)?;
            let input_norm = norm.eval(&f)?;
            let output_norm = norm.eval(&vf)?;
            Ok(TrialData {
                row: TrialRow { trial: i, input_norm, output_norm, ratio: output_norm / input_norm },
                f,
                vf,
            })
        })
        .collect()
}

fn max_ratio(data: &[TrialData]) -> f64 {
    data.iter().map(|d| d.row.ratio).fold(0.0f64, f64::max)
}

/// Morrey scans run denser than the norm module's 24-radius default: the
/// weighted factor rewards small radii where discrete balls change in jumps,
/// and the sup needs ~48 radii before doubling moves it under 1%.
const MORREY_SCAN_RADII: usize = 48;

/// Shared driver for opnorm-* and morrey-*: empirical operator constant over
/// seeded band-limited trials, with ladder-doubling, grid-doubling, and (for
/// Morrey norms) radius-scan-doubling stabilization gates.
pub fn variation_bound(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let grid = cfg.grid()?;
    let ladder = cfg.time_ladder()?;
    let refined = ladder.refined();
    let band = cfg.band_for(&grid);
    let is_morrey = cfg.experiment.starts_with("morrey-");

    let flow = make_flow(cfg, &grid, refined.times())?;
    let norm = build_norm(cfg, &grid, MORREY_SCAN_RADII)?;
    let data = run_trials(cfg, &grid, &flow, &ladder, band, &norm)?;
    let base_max = max_ratio(&data);

    let refined_data = run_trials(cfg, &grid, &flow, &refined, band, &norm)?;
    let delta_ladder = rel_delta(max_ratio(&refined_data), base_max);
    drop(refined_data);

    let grid2 = GridSpec::new(cfg.d as usize, cfg.m * 2, cfg.box_len)?;
    let flow2 = make_flow(cfg, &grid2, ladder.times())?;
    let norm2 = build_norm(cfg, &grid2, MORREY_SCAN_RADII)?;
    let doubled_data = run_trials(cfg, &grid2, &flow2, &ladder, band, &norm2)?;
    let delta_grid = rel_delta(max_ratio(&doubled_data), base_max);
    drop(doubled_data);

    let delta_scan = if is_morrey {
        let dense = build_norm(cfg, &grid, 2 * MORREY_SCAN_RADII)?;
        let max_dense = data
            .par_iter()
            .map(|d| Ok(dense.eval(&d.vf)? / dense.eval(&d.f)?))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
        Some(rel_delta(max_dense, base_max))
    } else {
        None
    };

    let max_output = data.iter().map(|d| d.row.output_norm).fold(0.0f64, f64::max);
    let mut report =
        ExperimentReport::from_rows(&cfg.experiment, data.into_iter().map(|d| d.row).collect());
    report.refinement_deltas.push(("ladder_doubling".into(), delta_ladder));
    report.refinement_deltas.push(("grid_doubling".into(), delta_grid));
    if let Some(ds) = delta_scan {
        report.refinement_deltas.push(("radius_scan_doubling".into(), ds));
    }
    report.norm_rows.push(match &norm {
        NormKind::Lp(p) => NormRow {
            norm_name: "lp".into(),
            p: *p,
            lambda: 0.0,
            alpha: 0.0,
            value: max_output,
            refinement_delta: delta_ladder,
        },
        NormKind::Morrey { params, .. } => NormRow {
            norm_name: "morrey".into(),
            p: params.p(),
            lambda: params.lambda(),
            alpha: params.alpha(),
            value: max_output,
            refinement_delta: delta_scan.unwrap_or(0.0),
        },
        NormKind::Weighted { params, .. } => NormRow {
            norm_name: "morrey_weighted".into(),
            p: params.p(),
            lambda: params.lambda(),
            alpha: params.alpha(),
            value: max_output,
            refinement_delta: delta_scan.unwrap_or(0.0),
        },
    });

    let mut out = RunOutcome::new();
    let tpath = dir.join("trials.csv");
    emit_csv(&report, &tpath)?;
    out.file(tpath);
    let ppath = dir.join("plot.svg");
    emit_svg_plot(&report, &ppath)?;
    out.file(ppath);

    let note = "theorem regime n >= 5 is out of grid reach; this run is a low-dimensional surrogate";
    let mut summary = String::from("metric,value\n");
    let _ = writeln!(summary, "max_ratio,{}", report.max_ratio);
    let _ = writeln!(summary, "mean_ratio,{}", report.mean_ratio);
    for (name, delta) in &report.refinement_deltas {
        let _ = writeln!(summary, "{name},{delta}");
    }
    let _ = writeln!(summary, "regime_note,{note}");
    let spath = dir.join("summary.csv");
    write_text(&spath, &summary)?;
    out.file(spath);

    out.note(format!(
        "empirical constant: max {} mean {} over {} trials",
        report.max_ratio, report.mean_ratio, report.rows.len()
    ));
    out.note(format!("note: {note}"));
    out.check("ladder doubling < 2%", delta_ladder < 0.02);
    out.check("grid doubling < 5%", delta_grid < 0.05);
    if let Some(ds) = delta_scan {
        out.check("radius scan doubling < 1%", ds < 0.01);
    }
    Ok(out)
}

/// Duhamel identity residual at Simpson node counts 16/32/64.
pub fn duhamel_check(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let grid = cfg.grid()?;
    let v = match cfg.potential()? {
        Some(p) => p.sample_on(grid)?,
        None => SampledField::zeros(grid),
    };
    let free = v.values().iter().all(|&x| x == 0.0);
    let band = cfg.band_for(&grid);
    let node_counts = [16usize, 32, 64];

    let residuals: Vec<[f64; 3]> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let f = band_limited_field(&grid, trial_seed(cfg.seed, i), band)?;
            let mut r = [0.0f64; 3];
            for (slot, &s) in r.iter_mut().zip(&node_counts) {
                *slot = engine::duhamel_residual(&f, &v, cfg.time, s)?;
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("trial,s_nodes,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        for (k, &s) in node_counts.iter().enumerate() {
            let _ = writeln!(csv, "{i},{s},{}", r[k]);
        }
    }
    let mut out = RunOutcome::new();
    let path = dir.join("trials.csv");
    write_text(&path, &csv)?;
    out.file(path);

    let svg = dir.join("plot.svg");
    let series: Vec<(f64, f64)> =
        node_counts.iter().zip(&residuals[0][..]).map(|(&s, &r)| (s as f64, r)).collect();
    write_svg_series(&series, "duhamel-check: residual vs nodes, trial 0", "s_nodes", "residual", &svg)?;
    out.file(svg);

    if free {
        let worst = residuals.iter().flatten().copied().fold(0.0f64, f64::max);
        out.note(format!("V = 0: worst residual {worst}"));
        out.check("free-flow residual <= 1e-10", worst <= 1e-10);
    } else {
        // consecutive halvings must each gain the composite-Simpson factor,
        // unless both residuals already sit at rounding level
        let mut worst_gain = f64::INFINITY;
        for r in &residuals {
            for pair in r.windows(2) {
                if pair[0] < 1e-13 && pair[1] < 1e-13 {
                    continue;
                }
                worst_gain = worst_gain.min(pair[0] / pair[1]);
            }
        }
        out.note(format!("smallest node-doubling gain {worst_gain:.2} (want >= 8)"));
        out.check("Simpson-rate decay >= 8x per doubling", worst_gain >= 8.0);
    }
    Ok(out)
}

/// DP seminorm against the exhaustive-subsequence oracle on random instances.
pub fn variation_selftest(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let rhos = [2.5, 3.0, 4.0];
    let rows: Vec<(usize, f64, f64, f64, bool)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, i));
            let m: usize = rng.random_range(4..=12);
            let rho = rhos[(i % 3) as usize];
            let samples: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let ladder = TimeLadder::geometric(1.0, 0.8, m)?;
            let params = VariationParams::new(rho)?;
            let dp = rho_variation_seminorm(&ladder, &samples, params)?;
            let brute = brute_force_seminorm(&ladder, &samples, params)?;
            Ok((m, rho, dp, brute, dp.to_bits() == brute.to_bits()))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("trial,m,rho,dp,brute,equal\n");
    for (i, (m, rho, dp, brute, equal)) in rows.iter().enumerate() {
        let _ = writeln!(csv, "{i},{m},{rho},{dp},{brute},{}", u8::from(*equal));
    }
    let mut out = RunOutcome::new();
    let path = dir.join("trials.csv");
    write_text(&path, &csv)?;
    out.file(path);

    let svg = dir.join("plot.svg");
    let series: Vec<(f64, f64)> =
        rows.iter().enumerate().map(|(i, r)| ((i + 1) as f64, r.2)).collect();
    write_svg_series(&series, "variation-selftest: DP seminorm per trial", "trial", "dp", &svg)?;
    out.file(svg);

    let mismatches = rows.iter().filter(|r| !r.4).count();
    out.note(format!("{} instances, {mismatches} DP/oracle mismatches", rows.len()));
    out.check("DP equals exhaustive oracle bit-for-bit", mismatches == 0);
    Ok(out)
}

/// Pointwise domination of the truncation error's ρ-variation by the maximal
/// function: V_ρ((e^{-tL} - e_loc^{-tL})f) ≤ C·Mf with a stable empirical C.
pub fn maximal_domination(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    if cfg.d != 1 {
        return Err(Error::invalid("maximal-domination runs on d=1 grids"));
    }
    let grid = cfg.grid()?;
    let v = cfg
        .potential()?
        .ok_or_else(|| Error::invalid("maximal-domination needs a potential family"))?;
    let vf = v.sample_on(grid)?;
    let gammas: Vec<f64> = potential::gamma_table(&v, &grid, 1e-6)?
        .into_iter()
        .map(|g| g.gamma)
        .collect();
    let mask = engine::local_mask(&grid, &gammas)?;
    let evolver = DenseEvolver::new(&grid, &vf)?;
    let ladder = cfg.time_ladder()?;
    let h = grid.cell_width();
    let m = grid.m();

    // difference kernels: full minus locally truncated, one per ladder time
    let diffs: Vec<(u64, DMatrix<f64>)> = ladder
        .times()
        .par_iter()
        .map(|&t| {
            let k = evolver.kernel_matrix(t)?;
            let d = DMatrix::from_fn(m, m, |j, l| if mask[j * m + l] { 0.0 } else { k[(j, l)] * h });
            Ok((t.to_bits(), d))
        })
        .collect::<Result<_>>()?;
    let diffs: HashMap<u64, DMatrix<f64>> = diffs.into_iter().collect();

    let band = cfg.band_for(&grid);
    let params = VariationParams::new(cfg.rho)?;
    let rows: Vec<TrialRow> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let f = band_limited_field(&grid, trial_seed(cfg.seed, i), band)?;
            let fv = DVector::from_column_slice(f.values());
            let mut ev = |t: f64| {
                let mat = diffs
                    .get(&t.to_bits())
                    .ok_or_else(|| Error::invalid("ladder time without a kernel"))?;
                SampledField::new(grid, (mat * &fv).as_slice().to_vec())
            };
            let var = variation_field(&mut ev, &ladder, params)?;
            let mf = norms::maximal_function(&f, 12)?;
            let mf_sup = mf.values().iter().copied().fold(0.0f64, f64::max);
            let var_sup = var.values().iter().copied().fold(0.0f64, f64::max);
            let mut c = 0.0f64;
            for (a, b) in var.values().iter().zip(mf.values()) {
                if *b > 1e-12 * mf_sup {
                    c = c.max(a / b);
                }
            }
            Ok(TrialRow { trial: i, input_norm: mf_sup, output_norm: var_sup, ratio: c })
        })
        .collect::<Result<_>>()?;

    let report = ExperimentReport::from_rows(&cfg.experiment, rows);
    let mut out = RunOutcome::new();
    let tpath = dir.join("trials.csv");
    emit_csv(&report, &tpath)?;
    out.file(tpath);
    let ppath = dir.join("plot.svg");
    emit_svg_plot(&report, &ppath)?;
    out.file(ppath);

    // the running max over trials must be flat across the last 40%
    let mut running = Vec::with_capacity(report.rows.len());
    let mut rm = 0.0f64;
    for r in &report.rows {
        rm = rm.max(r.ratio);
        running.push(rm);
    }
    let cut = ((report.rows.len() as f64) * 0.6).ceil() as usize;
    let stable = !running.is_empty()
        && running[running.len() - 1] <= running[cut.saturating_sub(1).min(running.len() - 1)] * 1.05;

    let mut summary = String::from("metric,value\n");
    let _ = writeln!(summary, "empirical_c,{rm}");
    let _ = writeln!(summary, "running_max_stable,{stable}");
    let spath = dir.join("summary.csv");
    write_text(&spath, &summary)?;
    out.file(spath);

    out.note(format!("empirical domination constant {rm} over {} trials", report.rows.len()));
    out.check("running max stable over last 40%", stable);
    Ok(out)
}
