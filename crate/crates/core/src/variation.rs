//! rho-variation over decreasing time ladders: the seminorm by O(m^2)
//! dynamic programming, an exhaustive oracle for small instances, pointwise
//! variation fields, and the fixed-ladder square function.

use rayon::prelude::*;

use crate::field::SampledField;
use crate::{Error, Result};

/// Strictly decreasing positive times, length >= 2.
#[derive(Debug, Clone)]
pub struct TimeLadder {
    times: Vec<f64>,
}

impl TimeLadder {
    pub fn new(times: Vec<f64>) -> Result<TimeLadder> {
        if times.len() < 2 {
            return Err(Error::invalid("ladder needs at least two times"));
        }
        for w in times.windows(2) {
            if !(w[0] > w[1]) {
                return Err(Error::invalid("ladder times must be strictly decreasing"));
            }
        }
        if !(*times.last().unwrap() > 0.0) || !times[0].is_finite() {
            return Err(Error::invalid("ladder times must be finite and positive"));
        }
        Ok(TimeLadder { times })
    }

    /// t_max * ratio^j for j = 0..count.
    pub fn geometric(t_max: f64, ratio: f64, count: usize) -> Result<TimeLadder> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::invalid(format!("geometric ladder: bad t_max {t_max}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::invalid(format!("geometric ladder: ratio {ratio} not in (0,1)")));
        }
        if count < 2 {
            return Err(Error::invalid("geometric ladder: need count >= 2"));
        }
        TimeLadder::new((0..count).map(|j| t_max * ratio.powi(j as i32)).collect())
    }

    /// Geometric-midpoint refinement.  Keeps every existing time bit-exact
    /// and inserts sqrt(t_i t_{i+1}) between neighbours, so the result is a
    /// strict superset with 2*len - 1 entries.
    pub fn refined(&self) -> TimeLadder {
        let mut times = Vec::with_capacity(2 * self.times.len() - 1);
        for w in self.times.windows(2) {
            times.push(w[0]);
            times.push((w[0] * w[1]).sqrt());
        }
        times.push(*self.times.last().unwrap());
        TimeLadder { times }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires len >= 2
    }
}

/// Variation exponent.  The estimates of interest hold for rho > 2; smaller
/// exponents are accepted for exploration and flagged.
#[derive(Debug, Clone, Copy)]
pub struct VariationParams {
    pub rho: f64,
}

impl VariationParams {
    pub fn new(rho: f64) -> Result<VariationParams> {
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::invalid(format!("variation exponent must be > 1, got {rho}")));
        }
        Ok(VariationParams { rho })
    }

    /// True when rho sits outside the range the boundedness theory covers.
    pub fn below_theorem_range(&self) -> bool {
        self.rho <= 2.0
    }
}

fn check_samples(ladder: &TimeLadder, samples: &[f64]) -> Result<()> {
    if samples.len() != ladder.len() {
        return Err(Error::invalid(format!(
            "{} samples against a ladder of {}",
            samples.len(),
            ladder.len()
        )));
    }
    if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite sample at index {bad}")));
    }
    Ok(())
}

// Shared DP core.  best[j] = largest sum of |w_i - w_j|^rho increments over
// subsequences ending at j; sums associate left-to-right along the chosen
// subsequence, which is the same order the exhaustive oracle uses, so the
// two routes agree bit-for-bit.  Ties prefer the shorter subsequence.
fn dp_power_sum(w: &[f64], rho: f64) -> f64 {
    let m = w.len();
    let mut best = vec![0.0f64; m];
    let mut hops = vec![0u32; m];
    let mut overall = 0.0f64;
    for j in 1..m {
        for i in 0..j {
            let cand = best[i] + (w[i] - w[j]).abs().powf(rho);
            let cand_hops = hops[i] + 1;
            if cand > best[j] || (cand == best[j] && cand_hops < hops[j]) {
                best[j] = cand;
                hops[j] = cand_hops;
            }
        }
        if best[j] > overall {
            overall = best[j];
        }
    }
    overall
}

/// Largest (sum |w(s_i) - w(s_{i+1})|^rho)^(1/rho) over subsequences of the
/// ladder samples.
pub fn rho_variation_seminorm(
    ladder: &TimeLadder,
    samples: &[f64],
    params: VariationParams,
) -> Result<f64> {
    check_samples(ladder, samples)?;
    Ok(dp_power_sum(samples, params.rho).powf(1.0 / params.rho))
}

/// Exhaustive maximum over all 2^m subsequences; exact reference for the DP.
pub fn brute_force_seminorm(
    ladder: &TimeLadder,
    samples: &[f64],
    params: VariationParams,
) -> Result<f64> {
    check_samples(ladder, samples)?;
    let m = samples.len();
    if m > 16 {
        return Err(Error::invalid(format!("exhaustive route capped at 16 samples, got {m}")));
    }
    let mut overall = 0.0f64;
    for mask in 0u32..(1 << m) {
        let mut sum = 0.0;
        let mut prev: Option<f64> = None;
        for (i, &w) in samples.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if let Some(p) = prev {
                    sum += (p - w).abs().powf(params.rho);
                }
                prev = Some(w);
            }
        }
        if sum > overall {
            overall = sum;
        }
    }
    Ok(overall.powf(1.0 / params.rho))
}

fn gather(
    evolve: &mut dyn FnMut(f64) -> Result<SampledField>,
    ladder: &TimeLadder,
) -> Result<Vec<SampledField>> {
    let mut fields = Vec::with_capacity(ladder.len());
    for &t in ladder.times() {
        let f = evolve(t)?;
        if let Some(first) = fields.first() {
            let a: &SampledField = first;
            if a.grid() != f.grid() {
                return Err(Error::GridMismatch(
                    "evolve returned fields on different grids".into(),
                ));
            }
        }
        fields.push(f);
    }
    Ok(fields)
}

/// Pointwise rho-variation of the semigroup path over the ladder: the
/// discrete V_rho restricted to these times (a lower bound for the full
/// supremum, converging under ladder refinement).
pub fn variation_field(
    evolve: &mut dyn FnMut(f64) -> Result<SampledField>,
    ladder: &TimeLadder,
    params: VariationParams,
) -> Result<SampledField> {
    let fields = gather(evolve, ladder)?;
    let grid = *fields[0].grid();
    let npts = grid.len();
    let values: Vec<f64> = (0..npts)
        .into_par_iter()
        .map(|p| {
            let path: Vec<f64> = fields.iter().map(|f| f.values()[p]).collect();
            dp_power_sum(&path, params.rho).powf(1.0 / params.rho)
        })
        .collect();
    SampledField::new(grid, values)
}

/// Pointwise (sum over consecutive ladder steps of |difference|^2)^(1/2);
/// no supremum, the ladder is used as given.
pub fn square_function_field(
    evolve: &mut dyn FnMut(f64) -> Result<SampledField>,
    ladder: &TimeLadder,
) -> Result<SampledField> {
    let fields = gather(evolve, ladder)?;
    let grid = *fields[0].grid();
    let npts = grid.len();
    let values: Vec<f64> = (0..npts)
        .map(|p| {
            let mut acc = 0.0;
            for w in fields.windows(2) {
                let d = w[0].values()[p] - w[1].values()[p];
                acc += d * d;
            }
            acc.sqrt()
        })
        .collect();
    SampledField::new(grid, values)
}
