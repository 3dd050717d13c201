//! Lebesgue norms, the Hardy–Littlewood maximal function, and Morrey norms
//! (classical and critical-radius weighted) for sampled fields.
//!
//! Ball scans run over every grid center and a log-spaced radius ladder on
//! the periodic torus. Per-radius ball sums are circular convolutions with
//! the ball indicator, done spectrally; everything is sequential and
//! schedule-independent.

use rustfft::num_complex::Complex;

use crate::engine::transform_axes;
use crate::error::{Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::potential::{self, GammaFlag, Potential};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorreyParams {
    p: f64,
    lambda: f64,
    alpha: f64,
    n: usize,
}

impl MorreyParams {
    pub fn new(p: f64, lambda: f64, alpha: f64, n: usize) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::invalid(format!("morrey p must be >= 1, got {p}")));
        }
        if !(n >= 1 && n <= 3) {
            return Err(Error::invalid(format!(
                "morrey scans run on grid fields, n must be 1..=3, got {n}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 || lambda >= n as f64 {
            return Err(Error::invalid(format!(
                "lambda must lie in [0, n) = [0, {n}), got {lambda}"
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha must be finite"));
        }
        Ok(MorreyParams { p, lambda, alpha, n })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// (cell-volume · Σ|f|^p)^{1/p}; `f64::INFINITY` selects the sup norm.
pub fn lp_norm(f: &SampledField, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(f.values().iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    if !p.is_finite() || p < 1.0 {
        return Err(Error::invalid(format!("lp exponent must be >= 1, got {p}")));
    }
    let sum: f64 = f.values().iter().map(|x| x.abs().powf(p)).sum();
    Ok((sum * f.grid().cell_volume()).powf(1.0 / p))
}

fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    debug_assert!(count >= 2 && lo > 0.0 && hi > lo);
    let ratio = (hi / lo).ln();
    (0..count)
        .map(|j| lo * (ratio * j as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Per-radius cell count of the closed periodic ball and per-center sums of
/// `g` over it. The sums come from one spectral convolution per radius with
/// the ball indicator (symmetric, so the output is real); tiny negative
/// leakage is clamped.
fn ball_sums(grid: &GridSpec, g: &[f64], radii: &[f64]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = grid.len();
    let mut g_hat: Vec<Complex<f64>> = g.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform_axes(grid, &mut g_hat, true);
    let dist0: Vec<f64> = (0..n).map(|j| grid.distance(j, 0)).collect();
    let mut counts = Vec::with_capacity(radii.len());
    let mut sums = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut ind: Vec<Complex<f64>> = dist0
            .iter()
            .map(|&d| Complex::new(if d <= r { 1.0 } else { 0.0 }, 0.0))
            .collect();
        counts.push(dist0.iter().filter(|&&d| d <= r).count());
        transform_axes(grid, &mut ind, true);
        for (i, h) in ind.iter_mut().zip(&g_hat) {
            *i *= h;
        }
        transform_axes(grid, &mut ind, false);
        sums.push(ind.iter().map(|z| z.re.max(0.0)).collect());
    }
    (counts, sums)
}

/// Hardy–Littlewood maximal function: per point, the largest ball average
/// of |f| over the single-cell ball plus `radius_count − 1` log-spaced
/// periodic radii in [cell, box/2]. Mf ≥ |f| by the single-cell rung.
pub fn maximal_function(f: &SampledField, radius_count: usize) -> Result<SampledField> {
    if radius_count < 4 {
        return Err(Error::invalid(format!(
            "maximal scan needs at least 4 radii, got {radius_count}"
        )));
    }
    let grid = *f.grid();
    let abs: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    let radii = log_radii(grid.cell_width(), grid.box_len() / 2.0, radius_count - 1);
    let (counts, sums) = ball_sums(&grid, &abs, &radii);
    let mut out = abs;
    for (count, sum) in counts.iter().zip(&sums) {
        let inv = 1.0 / *count as f64;
        for (o, s) in out.iter_mut().zip(sum) {
            *o = o.max(s * inv);
        }
    }
    SampledField::new(grid, out)
}

fn ensure_grid_dim(f: &SampledField, params: &MorreyParams) -> Result<()> {
    if params.n != f.grid().d() {
        return Err(Error::GridMismatch(format!(
            "morrey params for n={} applied to a d={} grid",
            params.n,
            f.grid().d()
        )));
    }
    Ok(())
}

/// Classical Morrey norm at the given scan density:
/// (sup over centers and radii of r^{−λ} ∫_B |f|^p)^{1/p}. The largest
/// radius box/2 covers the whole torus, so λ = 0 recovers the L^p norm.
pub fn morrey_norm_scan(
    f: &SampledField,
    params: &MorreyParams,
    radius_count: usize,
) -> Result<f64> {
    ensure_grid_dim(f, params)?;
    if radius_count < 4 {
        return Err(Error::invalid(format!(
            "morrey scan needs at least 4 radii, got {radius_count}"
        )));
    }
    let grid = *f.grid();
    let p = params.p;
    let pow: Vec<f64> = f.values().iter().map(|x| x.abs().powf(p)).collect();
    let radii = log_radii(grid.cell_width(), grid.box_len() / 2.0, radius_count);
    let (_, sums) = ball_sums(&grid, &pow, &radii);
    let vol = grid.cell_volume();
    let mut sup = 0.0f64;
    for (r, sum) in radii.iter().zip(&sums) {
        let weight = r.powf(-params.lambda) * vol;
        for s in sum {
            sup = sup.max(weight * s);
        }
    }
    Ok(sup.powf(1.0 / p))
}

pub fn morrey_norm(f: &SampledField, params: &MorreyParams) -> Result<f64> {
    morrey_norm_scan(f, params, 24)
}

/// Weighted scan with the extra factor (1 + r/γ(x₀))^α per center. γ = +∞
/// (the V = 0 convention) makes every factor 1; γ = 0 at a center is only
/// admissible when it cannot blow the factor up.
pub fn morrey_potential_norm_with_gamma(
    f: &SampledField,
    params: &MorreyParams,
    gamma: &[f64],
    radius_count: usize,
) -> Result<f64> {
    ensure_grid_dim(f, params)?;
    if radius_count < 4 {
        return Err(Error::invalid(format!(
            "morrey scan needs at least 4 radii, got {radius_count}"
        )));
    }
    let grid = *f.grid();
    if gamma.len() != grid.len() {
        return Err(Error::invalid(format!(
            "gamma table has {} entries for a grid of {} points",
            gamma.len(),
            grid.len()
        )));
    }
    if gamma.iter().any(|g| g.is_nan() || *g < 0.0) {
        return Err(Error::invalid("gamma entries must be nonnegative"));
    }
    if params.alpha > 0.0 && gamma.iter().any(|&g| g == 0.0) {
        return Err(Error::invalid(
            "critical radius vanishes at a center; weighted factor unbounded for alpha > 0",
        ));
    }
    let p = params.p;
    let pow: Vec<f64> = f.values().iter().map(|x| x.abs().powf(p)).collect();
    let radii = log_radii(grid.cell_width(), grid.box_len() / 2.0, radius_count);
    let (_, sums) = ball_sums(&grid, &pow, &radii);
    let vol = grid.cell_volume();
    let mut sup = 0.0f64;
    for (r, sum) in radii.iter().zip(&sums) {
        let weight = r.powf(-params.lambda) * vol;
        for (s, g) in sum.iter().zip(gamma) {
            let factor = (1.0 + r / g).powf(params.alpha);
            sup = sup.max(factor * weight * s);
        }
    }
    Ok(sup.powf(1.0 / p))
}

/// Weighted Morrey norm with γ computed from the potential at every center.
pub fn morrey_potential_norm(
    f: &SampledField,
    params: &MorreyParams,
    v: &Potential,
) -> Result<f64> {
    let table = potential::gamma_table(v, f.grid(), 1e-6)?;
    if params.alpha != 0.0 {
        if let Some(bad) = table.iter().find(|g| g.flag == GammaFlag::AlwaysViolated) {
            return Err(Error::invalid(format!(
                "critical radius collapsed to 0 (gamma {}); weighted norm undefined for alpha != 0",
                bad.gamma
            )));
        }
    }
    let gammas: Vec<f64> = table.iter().map(|g| g.gamma).collect();
    morrey_potential_norm_with_gamma(f, params, &gammas, 24)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{dense_evolve, local_truncated_evolve};
    use crate::rng::{band_limited_field, trial_seed};

    fn grid1(m: usize, box_len: f64) -> GridSpec {
        GridSpec::new(1, m, box_len).unwrap()
    }

    fn brute_ball_sum(grid: &GridSpec, g: &[f64], center: usize, r: f64) -> f64 {
        (0..grid.len())
            .filter(|&j| grid.distance(center, j) <= r)
            .map(|j| g[j])
            .sum()
    }

    #[test]
    fn lp_of_indicator_counts_cells() {
        let grid = grid1(64, 2.0);
        let mut f = SampledField::zeros(grid);
        for j in [3, 10, 11, 40, 63] {
            f.values_mut()[j] = 1.0;
        }
        let h = grid.cell_volume();
        assert!((lp_norm(&f, 1.0).unwrap() - 5.0 * h).abs() <= 1e-15);
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn lp_scaling_and_two_pass_oracle() {
        let grid = grid1(64, 2.0 * std::f64::consts::PI);
        let f = band_limited_field(&grid, 31, 8).unwrap();
        let scaled = f.map(|x| -2.5 * x);
        for p in [1.0, 1.5, 2.0, 4.0] {
            let a = lp_norm(&scaled, p).unwrap();
            let b = 2.5 * lp_norm(&f, p).unwrap();
            assert!((a - b).abs() <= 1e-12 * b, "p={p}");
        }
        let direct = {
            let sq: f64 = f.values().iter().map(|x| x * x).sum();
            (sq * grid.cell_volume()).sqrt()
        };
        let via = lp_norm(&f, 2.0).unwrap();
        assert!((via - direct).abs() <= 1e-12 * direct);
        assert!(lp_norm(&f, 0.5).is_err());
        assert!(lp_norm(&f, f64::NAN).is_err());
    }

    #[test]
    fn maximal_fixes_constants_and_dominates() {
        let grid = grid1(64, 3.0);
        let c = SampledField::from_fn(grid, |_| 2.25).unwrap();
        let mc = maximal_function(&c, 8).unwrap();
        for &v in mc.values() {
            assert!((v - 2.25).abs() <= 1e-12);
        }
        let f = band_limited_field(&grid, 5, 8).unwrap();
        let mf = maximal_function(&f, 8).unwrap();
        for (m, x) in mf.values().iter().zip(f.values()) {
            assert!(*m >= x.abs(), "maximal function fell below |f|");
        }
        assert!(maximal_function(&f, 3).is_err());
    }

    #[test]
    fn maximal_delta_matches_direct_scan() {
        let grid = grid1(256, 2.0);
        let mut f = SampledField::zeros(grid);
        f.values_mut()[100] = 1.0;
        let count = 12;
        let mf = maximal_function(&f, count).unwrap();
        let radii = log_radii(grid.cell_width(), 1.0, count - 1);
        for x in 0..256 {
            let mut want = f.values()[x].abs();
            for &r in &radii {
                let inside = (0..256).filter(|&j| grid.distance(x, j) <= r).count();
                let sum = brute_ball_sum(&grid, f.values(), x, r);
                want = want.max(sum / inside as f64);
            }
            let got = mf.values()[x];
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1e-30),
                "x={x}: got {got}, scan {want}"
            );
        }
    }

    #[test]
    fn morrey_at_lambda_zero_is_lp() {
        let grid = grid1(64, 2.0);
        let f = band_limited_field(&grid, 77, 8).unwrap();
        for p in [1.0, 2.0, 3.0] {
            let params = MorreyParams::new(p, 0.0, 0.0, 1).unwrap();
            let a = morrey_norm(&f, &params).unwrap();
            let b = lp_norm(&f, p).unwrap();
            assert!((a - b).abs() <= 1e-12 * b, "p={p}: morrey {a} vs lp {b}");
        }
    }

    #[test]
    fn morrey_is_homogeneous() {
        let grid = grid1(64, 2.0);
        let f = band_limited_field(&grid, 13, 8).unwrap();
        let params = MorreyParams::new(2.0, 0.4, 0.0, 1).unwrap();
        let a = morrey_norm(&f.map(|x| 3.0 * x), &params).unwrap();
        let b = 3.0 * morrey_norm(&f, &params).unwrap();
        assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn morrey_matches_dense_scan_on_ball_indicator() {
        let grid = grid1(512, 2.0 * std::f64::consts::PI);
        let r0 = 0.7;
        let f = SampledField::from_fn(grid, |x| {
            let d = grid.torus_delta(x[0], 0.0).abs();
            if d <= r0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let params = MorreyParams::new(1.5, 0.4, 0.0, 1).unwrap();
        let got = morrey_norm(&f, &params).unwrap();
        let pow: Vec<f64> = f.values().iter().map(|x| x.abs().powf(1.5)).collect();
        let radii = log_radii(grid.cell_width(), std::f64::consts::PI, 24);
        let mut sup = 0.0f64;
        for &r in &radii {
            for x in 0..grid.len() {
                let s = brute_ball_sum(&grid, &pow, x, r);
                sup = sup.max(r.powf(-0.4) * grid.cell_volume() * s);
            }
        }
        let want = sup.powf(1.0 / 1.5);
        assert!(
            (got - want).abs() <= 1e-10 * want,
            "fft scan {got} vs dense scan {want}"
        );
    }

    /// All scan radii on this grid are >= 1 (cell width 2), the regime where
    /// a larger lambda can only shrink r^{-lambda}.
    #[test]
    fn morrey_lambda_monotone_when_radii_exceed_one() {
        let grid = grid1(8, 16.0);
        let f = band_limited_field(&grid, 3, 3).unwrap();
        let lo = MorreyParams::new(2.0, 0.2, 0.0, 1).unwrap();
        let hi = MorreyParams::new(2.0, 0.5, 0.0, 1).unwrap();
        let a = morrey_norm(&f, &lo).unwrap();
        let b = morrey_norm(&f, &hi).unwrap();
        assert!(a >= b * (1.0 - 1e-12), "lambda monotonicity: {a} < {b}");
    }

    #[test]
    fn morrey_params_validation() {
        assert!(MorreyParams::new(2.0, 0.5, 0.0, 1).is_ok());
        assert!(MorreyParams::new(0.9, 0.5, 0.0, 1).is_err());
        assert!(MorreyParams::new(2.0, 1.0, 0.0, 1).is_err());
        assert!(MorreyParams::new(2.0, -0.1, 0.0, 1).is_err());
        assert!(MorreyParams::new(2.0, 0.5, f64::NAN, 1).is_err());
        assert!(MorreyParams::new(2.0, 0.5, 0.0, 0).is_err());
        assert!(MorreyParams::new(2.0, 0.5, 0.0, 4).is_err());
        let grid2 = GridSpec::new(2, 16, 1.0).unwrap();
        let f2 = SampledField::zeros(grid2);
        let p1 = MorreyParams::new(2.0, 0.5, 0.0, 1).unwrap();
        assert!(morrey_norm(&f2, &p1).is_err());
    }

    #[test]
    fn weighted_norm_alpha_zero_and_zero_potential_reduce_to_classical() {
        let grid = grid1(64, 2.0);
        let f = band_limited_field(&grid, 9, 8).unwrap();
        let params = MorreyParams::new(2.0, 0.3, 0.0, 1).unwrap();
        let classical = morrey_norm(&f, &params).unwrap();
        let gammas = vec![0.5; 64];
        let weighted =
            morrey_potential_norm_with_gamma(&f, &params, &gammas, 24).unwrap();
        assert_eq!(weighted, classical);
        let zero_v = Potential::constant(0.0, 1, 2.0).unwrap();
        let params_neg = MorreyParams::new(2.0, 0.3, -1.5, 1).unwrap();
        let via_potential = morrey_potential_norm(&f, &params_neg, &zero_v).unwrap();
        let classical_p = morrey_norm(&f, &params_neg).unwrap();
        assert_eq!(via_potential, classical_p);
    }

    #[test]
    fn weighted_norm_constant_potential_matches_recomputation() {
        let grid = grid1(128, 2.0);
        let f = band_limited_field(&grid, 21, 8).unwrap();
        let params = MorreyParams::new(2.0, 0.3, -1.2, 1).unwrap();
        let v = Potential::constant(1.0, 1, 2.0).unwrap();
        let got = morrey_potential_norm(&f, &params, &v).unwrap();
        // gamma for constant c on n=1: level = c omega_1 r^2, so gamma = (2c)^{-1/2}
        let gamma = 0.5f64.sqrt();
        let pow: Vec<f64> = f.values().iter().map(|x| x.abs().powf(2.0)).collect();
        let radii = log_radii(grid.cell_width(), 1.0, 24);
        let mut sup = 0.0f64;
        for &r in &radii {
            let factor = (1.0 + r / gamma).powf(-1.2);
            for x in 0..grid.len() {
                let s = brute_ball_sum(&grid, &pow, x, r);
                sup = sup.max(factor * r.powf(-0.3) * grid.cell_volume() * s);
            }
        }
        let want = sup.sqrt();
        assert!(
            (got - want).abs() <= 1e-9 * want,
            "weighted {got} vs recomputation {want}"
        );
    }

    #[test]
    fn weighted_norm_rejects_vanishing_gamma_for_positive_alpha() {
        let grid = grid1(16, 2.0);
        let f = SampledField::from_fn(grid, |_| 1.0).unwrap();
        let params = MorreyParams::new(2.0, 0.3, 1.0, 1).unwrap();
        let mut gammas = vec![1.0; 16];
        gammas[5] = 0.0;
        assert!(morrey_potential_norm_with_gamma(&f, &params, &gammas, 24).is_err());
        let neg = MorreyParams::new(2.0, 0.3, -1.0, 1).unwrap();
        assert!(morrey_potential_norm_with_gamma(&f, &neg, &gammas, 24).is_ok());
    }

    #[test]
    fn maximal_l2_constant_is_stable_over_trials() {
        let grid = grid1(64, 2.0 * std::f64::consts::PI);
        let mut running = Vec::with_capacity(100);
        let mut worst = 0.0f64;
        for trial in 0..100u64 {
            let f = band_limited_field(&grid, trial_seed(2024, trial), 8).unwrap();
            let mf = maximal_function(&f, 12).unwrap();
            let ratio = lp_norm(&mf, 2.0).unwrap() / lp_norm(&f, 2.0).unwrap();
            assert!(ratio >= 1.0 - 1e-12, "Mf is pointwise >= |f|");
            worst = worst.max(ratio);
            running.push(worst);
        }
        assert!(worst < 4.0, "empirical maximal constant {worst}");
        let at60 = running[59];
        assert!(
            running[99] <= at60 * 1.05,
            "running max still climbing: {at60} -> {}",
            running[99]
        );
    }

    /// Engine bridge: the truncation error of the localized flow is
    /// pointwise dominated by the maximal function (single-time smoke of the
    /// proof's J3 bound; the variation version runs in the acceptance suite).
    #[test]
    fn truncation_error_dominated_by_maximal_function() {
        let grid = grid1(32, 2.0 * std::f64::consts::PI);
        let v = Potential::constant(1.0, 1, 2.0).unwrap();
        let vfield = v.sample_on(grid).unwrap();
        let gamma = vec![0.5f64.sqrt(); 32];
        let mut worst = 0.0f64;
        for trial in 0..10u64 {
            let f = band_limited_field(&grid, trial_seed(7, trial), 4).unwrap();
            let full = dense_evolve(&f, &vfield, 0.3).unwrap();
            let local = local_truncated_evolve(&f, &vfield, 0.3, &gamma).unwrap();
            let diff = full.axpy(1.0, &local, -1.0).unwrap();
            let mf = maximal_function(&f, 12).unwrap();
            let num = lp_norm(&diff, f64::INFINITY).unwrap();
            let den = lp_norm(&mf, f64::INFINITY).unwrap();
            worst = worst.max(num / den);
        }
        assert!(worst.is_finite() && worst > 0.0);
        assert!(worst < 1.0, "truncation/maximal ratio {worst}");
    }
}
