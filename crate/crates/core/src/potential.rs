//! Potential families, ball averages, the reverse-Hoelder constant, the
//! critical radius gamma(x) with its comparability check, and the weighted
//! potential integral that controls the perturbed semigroup locally.

use once_cell::sync::Lazy;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::field::{GridSpec, SampledField};
use crate::quad::{gauss_legendre, integrate_adaptive, integrate_panels};
use crate::report::{BoundName, BoundSweepReport, KernelPoint};
use crate::specfun::{self, A1};
use crate::{Error, Result};

pub fn unit_ball_volume(n: u32) -> f64 {
    PI.powf(n as f64 / 2.0) / specfun::gamma(n as f64 / 2.0 + 1.0)
}

/// Surface area of the unit sphere in R^n (n * omega_n).
pub fn sphere_surface_area(n: u32) -> f64 {
    n as f64 * unit_ball_volume(n)
}

#[derive(Debug, Clone)]
pub enum Family {
    Constant { c: f64 },
    /// coeff * |x|^a; the coefficient covers rescalings s^2 V(s x) of the
    /// plain power, which stay inside the family.
    Power { a: f64, coeff: f64 },
    /// amplitude * prod_i sin^2(frequency * x_i)
    PeriodicBump { amplitude: f64, frequency: f64 },
    Sampled { field: SampledField },
}

/// Nonnegative potential with the metadata the localization theory needs:
/// the ambient dimension for ball integrals and the claimed RH exponent.
#[derive(Debug, Clone)]
pub struct Potential {
    family: Family,
    n: u32,
    q0: f64,
}

fn check_nq(n: u32, q0: f64) -> Result<()> {
    if n == 0 || n > 8 {
        return Err(Error::invalid(format!("dimension {n} outside 1..=8")));
    }
    if !(q0 > 0.0) || !q0.is_finite() {
        return Err(Error::invalid(format!("RH exponent q0 must be positive, got {q0}")));
    }
    Ok(())
}

impl Potential {
    pub fn constant(c: f64, n: u32, q0: f64) -> Result<Potential> {
        check_nq(n, q0)?;
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("constant potential needs c >= 0, got {c}")));
        }
        Ok(Potential { family: Family::Constant { c }, n, q0 })
    }

    pub fn power(a: f64, n: u32, q0: f64) -> Result<Potential> {
        Potential::power_with_coeff(a, 1.0, n, q0)
    }

    pub fn power_with_coeff(a: f64, coeff: f64, n: u32, q0: f64) -> Result<Potential> {
        check_nq(n, q0)?;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!("power exponent must be > 0, got {a}")));
        }
        if !(coeff >= 0.0) || !coeff.is_finite() {
            return Err(Error::invalid(format!("power coefficient must be >= 0, got {coeff}")));
        }
        Ok(Potential { family: Family::Power { a, coeff }, n, q0 })
    }

    pub fn periodic_bump(amplitude: f64, frequency: f64, n: u32, q0: f64) -> Result<Potential> {
        check_nq(n, q0)?;
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::invalid(format!("bump amplitude must be >= 0, got {amplitude}")));
        }
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::invalid(format!("bump frequency must be > 0, got {frequency}")));
        }
        Ok(Potential { family: Family::PeriodicBump { amplitude, frequency }, n, q0 })
    }

    pub fn sampled(field: SampledField, q0: f64) -> Result<Potential> {
        let n = field.grid().d() as u32;
        check_nq(n, q0)?;
        if let Some(bad) = field.values().iter().position(|&v| v < 0.0) {
            return Err(Error::invalid(format!("sampled potential negative at cell {bad}")));
        }
        Ok(Potential { family: Family::Sampled { field }, n, q0 })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn delta(&self) -> f64 {
        2.0 - self.n as f64 / self.q0
    }

    /// q0 > n/2, the regime where delta > 0 and the localization bounds
    /// carry content.  Outside it everything still evaluates; no claim holds.
    pub fn in_theorem_regime(&self) -> bool {
        self.q0 > self.n as f64 / 2.0
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.family, Family::Constant { .. } | Family::Power { .. })
    }

    /// Whether sampling on a periodic box of this size reproduces the
    /// potential (bump: box * frequency must be a multiple of pi).
    pub fn periodic_on(&self, box_len: f64) -> bool {
        match &self.family {
            Family::Constant { .. } => true,
            Family::Power { .. } => false,
            Family::PeriodicBump { frequency, .. } => {
                let cycles = box_len * frequency / PI;
                (cycles - cycles.round()).abs() < 1e-9 * (1.0 + cycles.abs())
            }
            Family::Sampled { field } => {
                (field.grid().box_len() - box_len).abs() < 1e-12 * box_len
            }
        }
    }

    /// Radial profile value at distance s from the origin; radial families only.
    fn radial_value(&self, s: f64) -> f64 {
        match &self.family {
            Family::Constant { c } => *c,
            Family::Power { a, coeff } => coeff * s.powf(*a),
            _ => unreachable!("radial_value on a non-radial family"),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n as usize);
        match &self.family {
            Family::Constant { c } => *c,
            Family::Power { a, coeff } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                coeff * r2.sqrt().powf(*a)
            }
            Family::PeriodicBump { amplitude, frequency } => {
                let mut p = *amplitude;
                for &xi in x {
                    let s = (frequency * xi).sin();
                    p *= s * s;
                }
                p
            }
            Family::Sampled { field } => {
                let grid = field.grid();
                let h = grid.cell_width();
                let m = grid.m();
                let mut idx = [0usize; 3];
                for (a, &xi) in x.iter().enumerate() {
                    let wrapped = xi.rem_euclid(grid.box_len());
                    idx[a] = (wrapped / h).round() as usize % m;
                }
                field.values()[grid.flatten(&idx[..x.len()])]
            }
        }
    }

    /// Samples onto a grid using centered torus coordinates, so radial
    /// families sit symmetrically around the cell at the origin.
    pub fn sample_on(&self, grid: GridSpec) -> Result<SampledField> {
        if grid.d() != self.n as usize {
            return Err(Error::invalid(format!(
                "potential dimension {} vs grid dimension {}",
                self.n,
                grid.d()
            )));
        }
        SampledField::from_fn(grid, |x| {
            let mut centered = [0.0f64; 3];
            for (a, &xi) in x.iter().enumerate() {
                centered[a] = grid.torus_delta(xi, 0.0);
            }
            self.eval(&centered[..x.len()])
        })
    }
}

const ANGULAR_GL: usize = 48;
static GL_ANGULAR: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(ANGULAR_GL));
static GL_COS: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(24));
const AZIMUTH_POINTS: usize = 64;

/// Integral of sin^{n-2} over [0, pi]; normalizer for the polar reduction.
fn sin_power_mass(n: u32) -> f64 {
    PI.sqrt() * specfun::gamma((n as f64 - 1.0) / 2.0) / specfun::gamma(n as f64 / 2.0)
}

/// Ball-integral capability gate: non-radial families only have angular
/// rules up to n = 3.  Checked once at every quadrature entry point so the
/// inner mean can stay infallible.
fn check_ball_capable(v: &Potential) -> Result<()> {
    if !v.is_radial() && v.n > 3 {
        return Err(Error::invalid(format!(
            "ball integrals for non-radial potentials are capped at n <= 3, got n = {}",
            v.n
        )));
    }
    Ok(())
}

/// Mean of V^q over the sphere of radius u centered at `center`.  Radial
/// families reduce to a polar-angle integral in any dimension; non-radial
/// ones use angular rules (check_ball_capable must have passed).
fn sphere_mean_pow(v: &Potential, center: &[f64], u: f64, q: f64) -> f64 {
    let n = v.n;
    if v.is_radial() {
        let cr2: f64 = center.iter().map(|c| c * c).sum();
        let big_r = cr2.sqrt();
        if big_r == 0.0 {
            return v.radial_value(u).powf(q);
        }
        if n == 1 {
            let lo = v.radial_value((big_r - u).abs()).powf(q);
            let hi = v.radial_value(big_r + u).powf(q);
            return 0.5 * (lo + hi);
        }
        let (nodes, weights) = (&GL_ANGULAR.0, &GL_ANGULAR.1);
        let mut acc = 0.0;
        for (z, w) in nodes.iter().zip(weights) {
            let theta = 0.5 * PI * (z + 1.0);
            let s2 = big_r * big_r + u * u - 2.0 * big_r * u * theta.cos();
            let s = s2.max(0.0).sqrt();
            acc += w * v.radial_value(s).powf(q) * theta.sin().powf(n as f64 - 2.0);
        }
        return acc * 0.5 * PI / sin_power_mass(n);
    }
    match n {
        1 => {
            let lo = v.eval(&[center[0] - u]).powf(q);
            let hi = v.eval(&[center[0] + u]).powf(q);
            0.5 * (lo + hi)
        }
        2 => {
            // trapezoid on the periodic angle
            let mut acc = 0.0;
            for k in 0..AZIMUTH_POINTS {
                let phi = 2.0 * PI * k as f64 / AZIMUTH_POINTS as f64;
                let y = [center[0] + u * phi.cos(), center[1] + u * phi.sin()];
                acc += v.eval(&y).powf(q);
            }
            acc / AZIMUTH_POINTS as f64
        }
        3 => {
            let (cn, cw) = (&GL_COS.0, &GL_COS.1);
            let mut acc = 0.0;
            for (c, w) in cn.iter().zip(cw) {
                let s = (1.0 - c * c).max(0.0).sqrt();
                let mut ring = 0.0;
                for k in 0..AZIMUTH_POINTS {
                    let phi = 2.0 * PI * k as f64 / AZIMUTH_POINTS as f64;
                    let y = [
                        center[0] + u * s * phi.cos(),
                        center[1] + u * s * phi.sin(),
                        center[2] + u * c,
                    ];
                    ring += v.eval(&y).powf(q);
                }
                acc += w * ring / AZIMUTH_POINTS as f64;
            }
            acc * 0.5
        }
        _ => unreachable!("check_ball_capable admits n <= 3 for non-radial families"),
    }
}

/// Exact integral of V^q over the interval [a, b] for a 1-D sampled
/// potential: cell-overlap walk against the nearest-cell convention
/// (cell k owns [kh - h/2, kh + h/2), periodically).
fn sampled_interval_integral(field: &SampledField, q: f64, a: f64, b: f64) -> f64 {
    let grid = field.grid();
    let (h, m, box_len) = (grid.cell_width(), grid.m(), grid.box_len());
    let vals = field.values();
    let pow = |x: f64| if q == 1.0 { x } else { x.powf(q) };
    let length = b - a;
    let wraps = (length / box_len).floor();
    let whole: f64 = vals.iter().map(|&x| pow(x)).sum::<f64>() * h;
    let mut total = wraps * whole;
    let rem = length - wraps * box_len;
    // shift by h/2 so cell boundaries land on multiples of h
    let mut pos = (a + 0.5 * h).rem_euclid(box_len);
    let end = pos + rem;
    while pos < end - 1e-15 * box_len {
        let k = (pos / h).floor();
        let edge = (k + 1.0) * h;
        let upto = edge.min(end);
        total += pow(vals[(k as usize) % m]) * (upto - pos);
        pos = upto;
    }
    total
}

/// integral over B(center, r) of V^q, as surf * int_0^r u^{n-1} mean(u) du.
fn ball_integral_pow(v: &Potential, center: &[f64], r: f64, q: f64) -> Result<f64> {
    check_ball_capable(v)?;
    let n = v.n;
    let nm1 = n as f64 - 1.0;
    if let Family::Sampled { field } = &v.family {
        if n == 1 {
            return Ok(sampled_interval_integral(field, q, center[0] - r, center[0] + r));
        }
        // piecewise-constant integrand: fixed panels sized to the grid
        let panels = (2 * field.grid().m()).clamp(200, 2048);
        let mut integrand = |u: f64| u.powf(nm1) * sphere_mean_pow(v, center, u, q);
        return Ok(sphere_surface_area(n) * integrate_panels(&mut integrand, 0.0, r, panels));
    }
    let mut integrand = |u: f64| u.powf(nm1) * sphere_mean_pow(v, center, u, q);
    let scale = integrate_panels(&mut integrand, 0.0, r, 8).abs();
    let raw = integrate_adaptive(&mut integrand, 0.0, r, scale * 1e-10 + 1e-300)?;
    Ok(sphere_surface_area(n) * raw)
}

fn check_ball_args(v: &Potential, center: &[f64], r: f64, q: f64) -> Result<()> {
    if center.len() != v.n as usize {
        return Err(Error::invalid(format!(
            "center has {} coordinates in dimension {}",
            center.len(),
            v.n
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("ball radius must be positive, got {r}")));
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::invalid(format!("ball average power must be >= 1, got {q}")));
    }
    Ok(())
}

fn ball_average_generic(v: &Potential, center: &[f64], r: f64, q: f64) -> Result<f64> {
    let integral = ball_integral_pow(v, center, r, q)?;
    let mean = integral / (unit_ball_volume(v.n) * r.powf(v.n as f64));
    Ok(mean.max(0.0).powf(1.0 / q))
}

/// ((1/|B(center,r)|) int_B V^q)^{1/q}.  Closed forms for the constant
/// family and for powers about the origin; quadrature otherwise.
pub fn ball_average(v: &Potential, center: &[f64], r: f64, q: f64) -> Result<f64> {
    check_ball_args(v, center, r, q)?;
    match &v.family {
        Family::Constant { c } => Ok(*c),
        Family::Power { a, coeff } if center.iter().all(|&c| c == 0.0) => {
            let nf = v.n as f64;
            Ok(coeff * r.powf(*a) * (nf / (nf + a * q)).powf(1.0 / q))
        }
        _ => ball_average_generic(v, center, r, q),
    }
}

/// Centers and radii over which the RH constant is maximized.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub balls: Vec<(Vec<f64>, f64)>,
}

impl SamplePlan {
    pub fn new(balls: Vec<(Vec<f64>, f64)>) -> Result<SamplePlan> {
        if balls.is_empty() {
            return Err(Error::invalid("sample plan needs at least one ball"));
        }
        for (c, r) in &balls {
            if !(*r > 0.0) || !r.is_finite() || c.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("sample plan has a degenerate ball"));
            }
        }
        Ok(SamplePlan { balls })
    }

    /// 256 centers (origin first, then a fixed pseudorandom cloud in
    /// [-extent, extent]^n) times 16 log-spaced radii in [extent/100, extent].
    pub fn default_for(n: u32, extent: f64) -> Result<SamplePlan> {
        use rand::prelude::*;
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::invalid(format!("plan extent must be positive, got {extent}")));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut centers = vec![vec![0.0; n as usize]];
        for _ in 1..256 {
            centers.push((0..n).map(|_| rng.random_range(-extent..extent)).collect());
        }
        let radii: Vec<f64> = (0..16)
            .map(|k| extent / 100.0 * (100.0f64).powf(k as f64 / 15.0))
            .collect();
        let mut balls = Vec::with_capacity(centers.len() * radii.len());
        for c in &centers {
            for &r in &radii {
                balls.push((c.clone(), r));
            }
        }
        SamplePlan::new(balls)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RhEstimate {
    pub constant: f64,
    pub worst_ball: usize,
    /// Raised when the empirical sup exceeds 1e6 (RH_q failing in practice).
    pub flagged: bool,
}

/// Per-ball q-average to 1-average ratios, in plan order.  A ball where
/// both averages vanish yields NaN (no information); a vanishing
/// denominator against a positive numerator yields +infinity.
pub fn rh_ball_ratios(v: &Potential, q: f64, plan: &SamplePlan) -> Result<Vec<f64>> {
    plan.balls
        .par_iter()
        .map(|(c, r)| {
            let num = ball_average(v, c, *r, q)?;
            let den = ball_average(v, c, *r, 1.0)?;
            if den == 0.0 {
                Ok(if num == 0.0 { f64::NAN } else { f64::INFINITY })
            } else {
                Ok(num / den)
            }
        })
        .collect()
}

/// Empirical sup over the plan of the q-average to 1-average ratio.
pub fn rh_constant_estimate(v: &Potential, q: f64, plan: &SamplePlan) -> Result<RhEstimate> {
    let ratios = rh_ball_ratios(v, q, plan)?;
    let mut constant = 0.0f64;
    let mut worst = 0usize;
    for (i, r) in ratios.into_iter().enumerate() {
        if r.is_nan() {
            continue; // empty-against-empty ball carries no information
        }
        if r > constant {
            constant = r;
            worst = i;
        }
    }
    Ok(RhEstimate {
        constant,
        worst_ball: worst,
        flagged: !(constant <= 1e6),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaFlag {
    Converged,
    /// level stays <= 1 through r_max: gamma reported as +infinity.
    NoViolation,
    /// level already > 1 at r_min: gamma reported as 0.
    AlwaysViolated,
}

impl GammaFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            GammaFlag::Converged => "converged",
            GammaFlag::NoViolation => "no_violation",
            GammaFlag::AlwaysViolated => "always_violated",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GammaResult {
    pub gamma: f64,
    pub iterations: u32,
    pub flag: GammaFlag,
}

fn window_result(gamma: f64, r_min: f64, r_max: f64, iterations: u32) -> GammaResult {
    if gamma > r_max {
        GammaResult { gamma: f64::INFINITY, iterations, flag: GammaFlag::NoViolation }
    } else if gamma < r_min {
        GammaResult { gamma: 0.0, iterations, flag: GammaFlag::AlwaysViolated }
    } else {
        GammaResult { gamma, iterations, flag: GammaFlag::Converged }
    }
}

pub fn critical_radius(v: &Potential, x: &[f64], tol: f64) -> Result<GammaResult> {
    critical_radius_in(v, x, tol, 1e-6, 1e6)
}

/// Critical radius at every grid point, in flat order. Parallel over
/// centers; the collected order is the index order, so output is
/// schedule-independent.
pub fn gamma_table(v: &Potential, grid: &GridSpec, tol: f64) -> Result<Vec<GammaResult>> {
    if v.n() as usize != grid.d() {
        return Err(Error::GridMismatch(format!(
            "potential dimension {} vs grid dimension {}",
            v.n(),
            grid.d()
        )));
    }
    (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let x = grid.coords(flat);
            critical_radius(v, &x[..grid.d()], tol)
        })
        .collect()
}

/// sup{r > 0 : r^{-(n-2)} int_{B(x,r)} V <= 1} within [r_min, r_max]:
/// log-spaced scan for the last upward crossing of level 1, then bisection
/// to relative width `tol`.  Closed-form fast paths for the constant family
/// and for powers at the origin.
pub fn critical_radius_in(
    v: &Potential,
    x: &[f64],
    tol: f64,
    r_min: f64,
    r_max: f64,
) -> Result<GammaResult> {
    if x.len() != v.n as usize {
        return Err(Error::invalid("point dimension does not match the potential"));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() {
        return Err(Error::invalid(format!("bad radius window [{r_min}, {r_max}]")));
    }
    match &v.family {
        Family::Constant { c } => {
            // level(r) = c omega_n r^2 in every dimension
            if *c == 0.0 {
                return Ok(GammaResult {
                    gamma: f64::INFINITY,
                    iterations: 0,
                    flag: GammaFlag::NoViolation,
                });
            }
            let gamma = (c * unit_ball_volume(v.n)).powf(-0.5);
            Ok(window_result(gamma, r_min, r_max, 0))
        }
        Family::Power { a, coeff } if x.iter().all(|&c| c == 0.0) => {
            // level(r) = coeff surf/(n+a) r^{a+2}
            if *coeff == 0.0 {
                return Ok(GammaResult {
                    gamma: f64::INFINITY,
                    iterations: 0,
                    flag: GammaFlag::NoViolation,
                });
            }
            let nf = v.n as f64;
            let gamma = ((nf + a) / (coeff * sphere_surface_area(v.n))).powf(1.0 / (a + 2.0));
            Ok(window_result(gamma, r_min, r_max, 0))
        }
        _ => critical_radius_scan(v, x, tol, r_min, r_max),
    }
}

/// The generic route behind `critical_radius_in`, public so the families
/// with closed-form fast paths can be cross-checked against it.
pub fn critical_radius_scan(
    v: &Potential,
    x: &[f64],
    tol: f64,
    r_min: f64,
    r_max: f64,
) -> Result<GammaResult> {
    check_ball_capable(v)?;
    let n = v.n;
    let nm1 = n as f64 - 1.0;
    let surf = sphere_surface_area(n);
    let mut integrand = |u: f64| u.powf(nm1) * sphere_mean_pow(v, x, u, 1.0);

    let decades = (r_max / r_min).log10();
    let count = (decades * 20.0).ceil() as usize + 1;
    let radii: Vec<f64> = (0..count)
        .map(|k| r_min * (r_max / r_min).powf(k as f64 / (count - 1) as f64))
        .collect();

    // cumulative int_0^{r_k} u^{n-1} mean(u) du, built segment by segment
    let mut cums = Vec::with_capacity(count);
    let mut acc = integrate_panels(&mut integrand, 0.0, radii[0], 8);
    cums.push(acc);
    for k in 1..count {
        acc += integrate_panels(&mut integrand, radii[k - 1], radii[k], 4);
        cums.push(acc);
    }
    let level = |r: f64, cum: f64| surf * cum * r.powf(2.0 - n as f64);

    let levels: Vec<f64> = radii.iter().zip(&cums).map(|(&r, &c)| level(r, c)).collect();
    if *levels.last().unwrap() <= 1.0 {
        return Ok(GammaResult {
            gamma: f64::INFINITY,
            iterations: 0,
            flag: GammaFlag::NoViolation,
        });
    }
    let crossing = (0..count - 1).rev().find(|&k| levels[k] <= 1.0 && levels[k + 1] > 1.0);
    let Some(k) = crossing else {
        return Ok(GammaResult { gamma: 0.0, iterations: 0, flag: GammaFlag::AlwaysViolated });
    };

    let (mut lo, mut hi) = (radii[k], radii[k + 1]);
    let base = cums[k];
    let mut iterations = 0;
    while hi - lo > tol * 0.5 * (lo + hi) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let cum = base + integrate_panels(&mut integrand, radii[k], mid, 8);
        if level(mid, cum) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(GammaResult { gamma: 0.5 * (lo + hi), iterations, flag: GammaFlag::Converged })
}

#[derive(Debug, Clone)]
pub struct GammaComparabilityReport {
    /// Smallest constant over the k0 grid making both comparability
    /// inequalities hold on every pair.
    pub c: f64,
    pub k0: f64,
    pub worst_pair: usize,
    pub feasible: bool,
    pub gammas: Vec<(f64, f64)>,
}

/// Finds the smallest (C, k0) with
/// gamma(x)(1+|x-y|/gamma(x))^{-k0}/C <= gamma(y) <= C gamma(x)(1+|x-y|/gamma(x))^{k0/(k0+1)}
/// over all pairs.  Pairs with a non-finite gamma mark the report infeasible.
pub fn check_gamma_comparability(
    v: &Potential,
    pairs: &[(Vec<f64>, Vec<f64>)],
    k0_grid: &[f64],
) -> Result<GammaComparabilityReport> {
    if pairs.is_empty() || k0_grid.is_empty() {
        return Err(Error::invalid("need at least one pair and one k0"));
    }
    if let Some(bad) = k0_grid.iter().position(|&k| !(k > 1.0)) {
        return Err(Error::invalid(format!("k0 grid entry {bad} is not > 1")));
    }
    let mut gammas = Vec::with_capacity(pairs.len());
    let mut feasible = true;
    for (x, y) in pairs {
        let gx = critical_radius(v, x, 1e-8)?;
        let gy = critical_radius(v, y, 1e-8)?;
        if gx.flag != GammaFlag::Converged || gy.flag != GammaFlag::Converged {
            feasible = false;
        }
        gammas.push((gx.gamma, gy.gamma));
    }
    if !feasible {
        return Ok(GammaComparabilityReport {
            c: f64::INFINITY,
            k0: k0_grid[0],
            worst_pair: 0,
            feasible: false,
            gammas,
        });
    }

    let mut best: Option<(f64, f64, usize)> = None; // (C, k0, worst pair)
    for &k0 in k0_grid {
        let mut c_needed = 0.0f64;
        let mut worst = 0usize;
        for (i, ((x, y), &(gx, gy))) in pairs.iter().zip(&gammas).enumerate() {
            let u: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let growth = 1.0 + u / gx;
            let c_lo = gx * growth.powf(-k0) / gy;
            let c_hi = gy / (gx * growth.powf(k0 / (k0 + 1.0)));
            let need = c_lo.max(c_hi);
            if need > c_needed {
                c_needed = need;
                worst = i;
            }
        }
        let better = match best {
            None => true,
            Some((c, _, _)) => c_needed < c,
        };
        if better {
            best = Some((c_needed, k0, worst));
        }
    }
    let (c, k0, worst_pair) = best.unwrap();
    Ok(GammaComparabilityReport {
        c,
        k0,
        worst_pair,
        feasible: c.is_finite(),
        gammas,
    })
}

/// Integrand cutoff: beyond exp(-45) the weight contributes nothing at f64.
const WEIGHT_EXP_CUT: f64 = 45.0;

/// int V^2(y) t^{-n/4} exp(-a4 |x-y|^{4/3} / t^{1/3}) dy by the spherical
/// reduction, truncated where the weight underflows.
fn weighted_v2_integral(v: &Potential, x: &[f64], t: f64, a4: f64) -> Result<f64> {
    check_ball_capable(v)?;
    let n = v.n;
    let nm1 = n as f64 - 1.0;
    let beta = a4 / t.powf(1.0 / 3.0);
    let cut = (WEIGHT_EXP_CUT / beta).powf(0.75);
    let mut integrand =
        |u: f64| u.powf(nm1) * (-beta * u.powf(4.0 / 3.0)).exp() * sphere_mean_pow(v, x, u, 2.0);
    let scale = integrate_panels(&mut integrand, 0.0, cut, 16).abs();
    let raw = integrate_adaptive(&mut integrand, 0.0, cut, scale * 1e-10 + 1e-300)?;
    Ok(sphere_surface_area(n) * raw * t.powf(-(n as f64) / 4.0))
}

pub fn check_lemma_v(v: &Potential, x_list: &[Vec<f64>], t_grid: &[f64]) -> Result<BoundSweepReport> {
    check_lemma_v_with(v, x_list, t_grid, A1)
}

/// Sweeps LHS = int V^2(y) t^{-n/4} e^{-A4 |x-y|^{4/3}/t^{1/3}} dy against
/// RHS = t^{-1} (t^{1/4}/gamma(x))^{2 delta} with A4 = min(a_knob, A1).
/// Every t must satisfy t <= gamma(x)^4 for its x.
pub fn check_lemma_v_with(
    v: &Potential,
    x_list: &[Vec<f64>],
    t_grid: &[f64],
    a_knob: f64,
) -> Result<BoundSweepReport> {
    if x_list.is_empty() {
        return Err(Error::invalid("need at least one evaluation point"));
    }
    if t_grid.is_empty()
        || t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite())
        || t_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::invalid("t grid must be finite, positive, strictly increasing"));
    }
    if !(a_knob > 0.0) || !a_knob.is_finite() {
        return Err(Error::invalid(format!("decay knob must be positive, got {a_knob}")));
    }
    let a4 = a_knob.min(A1);
    let t_top = *t_grid.last().unwrap();

    let mut gammas = Vec::with_capacity(x_list.len());
    for x in x_list {
        if x.len() != v.n as usize {
            return Err(Error::invalid("point dimension does not match the potential"));
        }
        let g = critical_radius(v, x, 1e-8)?;
        if g.flag == GammaFlag::AlwaysViolated || (g.gamma.is_finite() && t_top > g.gamma.powi(4)) {
            return Err(Error::invalid(format!(
                "t = {t_top} exceeds gamma^4 = {} at x with |x| = {}",
                g.gamma.powi(4),
                x.iter().map(|c| c * c).sum::<f64>().sqrt()
            )));
        }
        gammas.push(g.gamma);
    }

    let delta = v.delta();
    let mut points = Vec::with_capacity(x_list.len() * t_grid.len());
    for (x, &gamma) in x_list.iter().zip(&gammas) {
        let x_mag = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        for &t in t_grid {
            let lhs = weighted_v2_integral(v, x, t, a4)?;
            let rhs = if gamma.is_finite() {
                (t.powf(0.25) / gamma).powf(2.0 * delta) / t
            } else {
                0.0
            };
            let eta = x_mag / t.powf(0.25);
            points.push(KernelPoint::new(v.n, x_mag, t, eta, lhs, rhs));
        }
    }
    Ok(BoundSweepReport::from_points(BoundName::PotentialIntegral, points))
}
