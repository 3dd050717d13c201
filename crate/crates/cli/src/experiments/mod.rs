//! The experiment registry.  Every experiment writes its CSV/SVG files under
//! `<out>/<experiment>/` and reports a pass/fail stabilization gate; wall time
//! is reported on stdout only, never inside files.

pub mod operators;
pub mod potentials;
pub mod sweeps;

use std::fs;
use std::path::{Path, PathBuf};

use bvc_core::report::BoundSweepReport;
use bvc_core::{Error, Result};

use crate::config::ExperimentConfig;

#[derive(Debug)]
pub struct RunOutcome {
    pub gate: bool,
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub(crate) fn new() -> RunOutcome {
        RunOutcome { gate: true, summary: Vec::new(), files: Vec::new() }
    }

    pub(crate) fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    /// Records a named gate; any failed gate fails the run (exit code 2).
    pub(crate) fn check(&mut self, label: &str, pass: bool) {
        self.summary.push(format!("gate {label}: {}", if pass { "pass" } else { "FAIL" }));
        self.gate &= pass;
    }

    pub(crate) fn file(&mut self, path: PathBuf) {
        self.files.push(path);
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let dir = cfg.experiment_dir();
    fs::create_dir_all(&dir)?;
    match cfg.experiment.as_str() {
        "kernel-check" => sweeps::kernel_check(cfg, &dir),
        "g-envelope" => sweeps::g_envelope(cfg, &dir),
        "lemma25-check" => sweeps::lemma25_check(cfg, &dir),
        "lemma26-check" => sweeps::lemma26_check(cfg, &dir),
        "gamma-table" => potentials::gamma_table(cfg, &dir),
        "rh-check" => potentials::rh_check(cfg, &dir),
        "variation-selftest" => operators::variation_selftest(cfg, &dir),
        "duhamel-check" => operators::duhamel_check(cfg, &dir),
        "maximal-domination" => operators::maximal_domination(cfg, &dir),
        e if e.starts_with("opnorm-") || e.starts_with("morrey-") => {
            operators::variation_bound(cfg, &dir)
        }
        other => Err(Error::invalid(format!("experiment {other:?} is not registered"))),
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Symmetric relative change; 0 when both vanish.
pub(crate) fn rel_delta(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Strictly increasing log-spaced grid.
pub(crate) fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Rows in the same shape as `BoundSweepReport::write_csv`, merged over
/// several reports (the `n` column disambiguates).
pub(crate) fn sweep_points_csv<'a>(reports: impl Iterator<Item = &'a BoundSweepReport>) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("n,x_mag,t,eta,value,bound,ratio,flag\n");
    for rep in reports {
        for p in &rep.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.n,
                p.x_mag,
                p.t,
                p.eta,
                p.value,
                p.bound,
                p.ratio,
                u8::from(p.flag)
            );
        }
    }
    out
}
