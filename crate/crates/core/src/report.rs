//! Sweep report containers shared by the envelope and kernel checks, plus
//! their CSV form.

use std::io::{self, Write};

/// One swept point of a ratio check.  `ratio = |value| / bound` unless the
/// point is flagged (degenerate bound), in which case ratio is 0 and the
/// point is excluded from the sweep maximum.
#[derive(Debug, Clone)]
pub struct KernelPoint {
    pub n: u32,
    pub x_mag: f64,
    pub t: f64,
    pub eta: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub flag: bool,
}

impl KernelPoint {
    /// Builds a point, applying the degenerate-denominator rule: a bound
    /// that underflows (or fails to be positive) flags the point instead of
    /// producing an infinite ratio.
    pub fn new(n: u32, x_mag: f64, t: f64, eta: f64, value: f64, bound: f64) -> KernelPoint {
        let degenerate = !(bound > f64::MIN_POSITIVE) || !value.is_finite();
        let ratio = if degenerate { 0.0 } else { value.abs() / bound };
        KernelPoint {
            n,
            x_mag,
            t,
            eta,
            value,
            bound,
            ratio,
            flag: degenerate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundName {
    K,
    Bxt,
    Kt,
    Kx,
    Envelope,
    B,
    Bt,
    PotentialIntegral,
}

impl BoundName {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::K => "k",
            BoundName::Bxt => "bxt",
            BoundName::Kt => "kt",
            BoundName::Kx => "kx",
            BoundName::Envelope => "envelope",
            BoundName::B => "B",
            BoundName::Bt => "Bt",
            BoundName::PotentialIntegral => "potential_integral",
        }
    }
}

/// Ratio sweep with its empirical constant and the tail-rule verdict.
#[derive(Debug, Clone)]
pub struct BoundSweepReport {
    pub bound_name: BoundName,
    pub points: Vec<KernelPoint>,
    pub empirical_c: f64,
    pub stabilized: bool,
}

impl BoundSweepReport {
    /// Tail rule: the running maximum over the first two thirds of the eta
    /// range must be within 1% of the full-range maximum (so a default grid
    /// ending at 12 compares eta <= 8 against eta <= 12).  Flagged points
    /// never contribute.
    pub fn from_points(bound_name: BoundName, points: Vec<KernelPoint>) -> BoundSweepReport {
        let live = points.iter().filter(|p| !p.flag);
        let empirical_c = live.clone().map(|p| p.ratio).fold(0.0, f64::max);
        let eta_end = live.clone().map(|p| p.eta).fold(0.0, f64::max);
        let cut = eta_end * 2.0 / 3.0;
        let c_early = live
            .filter(|p| p.eta <= cut + 1e-12)
            .map(|p| p.ratio)
            .fold(0.0, f64::max);
        let stabilized = if empirical_c == 0.0 {
            true
        } else {
            empirical_c <= c_early * 1.01
        };
        BoundSweepReport {
            bound_name,
            points,
            empirical_c,
            stabilized,
        }
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "n,x_mag,t,eta,value,bound,ratio,flag")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                p.n,
                p.x_mag,
                p.t,
                p.eta,
                p.value,
                p.bound,
                p.ratio,
                u8::from(p.flag)
            )?;
        }
        Ok(())
    }
}
