//! Flat key=value experiment configuration.
//!
//! Precedence, lowest to highest: global defaults, per-experiment defaults,
//! `--config` file, dedicated flags (`--seed`, `--out`, ...), `--set` pairs.
//! Unknown keys are rejected; a config-file `experiment` key must match the
//! experiment named on the command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bvc_core::norms::MorreyParams;
use bvc_core::potential::Potential;
use bvc_core::variation::TimeLadder;
use bvc_core::{Error, GridSpec, Result};

pub const EXPERIMENTS: &[&str] = &[
    "kernel-check",
    "g-envelope",
    "variation-selftest",
    "opnorm-biharmonic",
    "opnorm-schrodinger",
    "opnorm-poisson",
    "morrey-biharmonic",
    "morrey-schrodinger",
    "morrey-poisson",
    "gamma-table",
    "rh-check",
    "lemma25-check",
    "lemma26-check",
    "duhamel-check",
    "maximal-domination",
];

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub d: u32,
    pub m: usize,
    pub box_len: f64,
    pub family: String,
    pub c: f64,
    pub a: f64,
    pub coeff: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub n: u32,
    pub q0: f64,
    pub ladder: String,
    pub rho: f64,
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub trials: usize,
    pub substeps: usize,
    pub sigma: f64,
    pub nodes: usize,
    pub time: f64,
    pub extent: f64,
    pub band: usize,
    pub nexp: f64,
    pub tol: f64,
    pub output_dir: PathBuf,
}

fn global_defaults(experiment: &str) -> ExperimentConfig {
    ExperimentConfig {
        experiment: experiment.to_string(),
        seed: 1,
        d: 1,
        m: 256,
        box_len: TAU,
        family: "none".into(),
        c: 1.0,
        a: 2.0,
        coeff: 1.0,
        amplitude: 1.0,
        frequency: 0.5,
        n: 1,
        q0: 2.0,
        ladder: "geometric:1.0,0.85,64".into(),
        rho: 3.0,
        p: 2.0,
        lambda: 0.4,
        alpha: 0.0,
        trials: 200,
        substeps: 32,
        sigma: 0.5,
        nodes: 48,
        time: 0.1,
        extent: 3.0,
        band: 0,
        nexp: 2.0,
        tol: 1e-8,
        output_dir: PathBuf::from("out"),
    }
}

/// Defaults that only make sense for one experiment (potential family,
/// problem size).  Applied before the config file so both can be overridden.
fn experiment_defaults(experiment: &str) -> &'static [(&'static str, &'static str)] {
    match experiment {
        "variation-selftest" => &[("trials", "1000")],
        "opnorm-schrodinger" => &[("family", "bump")],
        "morrey-schrodinger" => &[("family", "bump"), ("alpha", "-0.5")],
        "morrey-poisson" => &[
            ("family", "bump"),
            ("alpha", "-0.5"),
            ("m", "128"),
            ("trials", "100"),
            ("nodes", "32"),
        ],
        "gamma-table" => &[("family", "power"), ("n", "5"), ("q0", "3"), ("box", "4.0")],
        "rh-check" => &[("family", "power"), ("n", "5"), ("q0", "3")],
        "lemma25-check" => &[("family", "power"), ("n", "5"), ("q0", "3")],
        "lemma26-check" => &[("family", "bump"), ("m", "128")],
        "duhamel-check" => &[
            ("family", "bump"),
            ("frequency", "1.0"),
            ("m", "32"),
            ("trials", "5"),
        ],
        "maximal-domination" => &[
            ("family", "bump"),
            ("m", "256"),
            ("trials", "50"),
            ("ladder", "geometric:0.5,0.75,12"),
        ],
        _ => &[],
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("config key {key}: cannot parse {value:?}")))
}

impl ExperimentConfig {
    /// Assemble a config for `experiment` from a file and override pairs.
    pub fn load(
        experiment: &str,
        file: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<ExperimentConfig> {
        if !EXPERIMENTS.contains(&experiment) {
            let mut msg = format!("unknown experiment {experiment:?}; registered:");
            for e in EXPERIMENTS {
                let _ = write!(msg, " {e}");
            }
            return Err(Error::invalid(msg));
        }
        let mut cfg = global_defaults(experiment);
        for (k, v) in experiment_defaults(experiment) {
            cfg.set(k, v)?;
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            for (k, v) in parse_pairs(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                if value != self.experiment {
                    return Err(Error::invalid(format!(
                        "config names experiment {value:?} but {:?} was requested",
                        self.experiment
                    )));
                }
            }
            "seed" => self.seed = parse_num(key, value)?,
            "d" => self.d = parse_num(key, value)?,
            "m" => self.m = parse_num(key, value)?,
            "box" => self.box_len = parse_num(key, value)?,
            "family" => {
                if !["none", "constant", "power", "bump"].contains(&value) {
                    return Err(Error::invalid(format!(
                        "family must be none|constant|power|bump, got {value:?}"
                    )));
                }
                self.family = value.to_string();
            }
            "c" => self.c = parse_num(key, value)?,
            "a" => self.a = parse_num(key, value)?,
            "coeff" => self.coeff = parse_num(key, value)?,
            "amplitude" => self.amplitude = parse_num(key, value)?,
            "frequency" => self.frequency = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "q0" => self.q0 = parse_num(key, value)?,
            "ladder" => self.ladder = value.to_string(),
            "rho" => self.rho = parse_num(key, value)?,
            "p" => self.p = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "substeps" => self.substeps = parse_num(key, value)?,
            "sigma" => self.sigma = parse_num(key, value)?,
            "nodes" => self.nodes = parse_num(key, value)?,
            "time" => self.time = parse_num(key, value)?,
            "extent" => self.extent = parse_num(key, value)?,
            "band" => self.band = parse_num(key, value)?,
            "nexp" => self.nexp = parse_num(key, value)?,
            "tol" => self.tol = parse_num(key, value)?,
            "out" => self.output_dir = PathBuf::from(value),
            other => {
                return Err(Error::invalid(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.d as usize, self.m, self.box_len)
    }

    /// None means V ≡ 0 (free flow).
    pub fn potential(&self) -> Result<Option<Potential>> {
        match self.family.as_str() {
            "none" => Ok(None),
            "constant" => Potential::constant(self.c, self.n, self.q0).map(Some),
            "power" => Potential::power_with_coeff(self.a, self.coeff, self.n, self.q0).map(Some),
            "bump" => {
                Potential::periodic_bump(self.amplitude, self.frequency, self.n, self.q0).map(Some)
            }
            other => Err(Error::invalid(format!("unknown potential family {other:?}"))),
        }
    }

    pub fn time_ladder(&self) -> Result<TimeLadder> {
        parse_ladder(&self.ladder)
    }

    pub fn morrey(&self) -> Result<MorreyParams> {
        MorreyParams::new(self.p, self.lambda, self.alpha, self.d as usize)
    }

    /// Test-function bandwidth; 0 selects the m/8 default of the base grid.
    pub fn band_for(&self, grid: &GridSpec) -> usize {
        if self.band == 0 {
            bvc_core::rng::default_band(grid)
        } else {
            self.band
        }
    }

    pub fn experiment_dir(&self) -> PathBuf {
        self.output_dir.join(&self.experiment)
    }
}

/// `geometric:t_max,ratio,count` or an explicit comma-separated decreasing list.
pub fn parse_ladder(spec: &str) -> Result<TimeLadder> {
    if let Some(rest) = spec.strip_prefix("geometric:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "geometric ladder wants t_max,ratio,count, got {rest:?}"
            )));
        }
        let t_max: f64 = parse_num("ladder t_max", parts[0])?;
        let ratio: f64 = parse_num("ladder ratio", parts[1])?;
        let count: usize = parse_num("ladder count", parts[2])?;
        TimeLadder::geometric(t_max, ratio, count)
    } else {
        let times = spec
            .split(',')
            .map(|s| parse_num("ladder time", s.trim()))
            .collect::<Result<Vec<f64>>>()?;
        TimeLadder::new(times)
    }
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {} is not key=value: {line:?}",
                idx + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
