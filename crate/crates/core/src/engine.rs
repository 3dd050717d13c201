//! Evolution operators on the periodic grid.
//!
//! Two routes compute the same semigroups. The spectral route applies Fourier
//! multipliers and is exact for the free flow; the dense route diagonalizes
//! the discretized generator (−Δ)² + V² and serves as the oracle for the
//! split-step integrator, the kernel columns, the truncated operator, the
//! Duhamel residual, and the subordinated Poisson operator.

use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use once_cell::sync::Lazy;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::kernel;
use crate::specfun;

/// Dense-route cap: eigendecomposition stays under a second.
pub const DENSE_MAX_M: usize = 512;

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(m: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().expect("fft planner lock");
    if forward {
        planner.plan_fft_forward(m)
    } else {
        planner.plan_fft_inverse(m)
    }
}

/// Integer frequency of DFT bin `i` on an axis of `m` points.
pub(crate) fn freq_of(i: usize, m: usize) -> i64 {
    if i <= m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// In-place DFT along every axis. rustfft leaves both directions
/// unnormalized, so the inverse pass divides by m^d once at the end.
pub(crate) fn transform_axes(grid: &GridSpec, data: &mut [Complex<f64>], forward: bool) {
    let m = grid.m();
    let fft = plan(m, forward);
    let mut line = vec![Complex::new(0.0, 0.0); m];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..grid.d() {
        let stride = m.pow((grid.d() - 1 - axis) as u32);
        let block = stride * m;
        let mut start = 0;
        while start < data.len() {
            for offset in 0..stride {
                let base = start + offset;
                for k in 0..m {
                    line[k] = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..m {
                    data[base + k * stride] = line[k];
                }
            }
            start += block;
        }
    }
    if !forward {
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

/// Apply a real Fourier multiplier given as a function of |ξ|⁴ with
/// ξ = (2π/box)·(integer frequency vector). Even in ξ, so the output of a
/// real field is real up to roundoff; the imaginary part is dropped.
fn spectral_multiply(f: &SampledField, mult: impl Fn(f64) -> f64) -> Result<SampledField> {
    let grid = *f.grid();
    let m = grid.m();
    let scale = 2.0 * PI / grid.box_len();
    let mut xi2 = vec![0.0; m];
    for (i, slot) in xi2.iter_mut().enumerate() {
        let q = scale * freq_of(i, m) as f64;
        *slot = q * q;
    }
    let mut data: Vec<Complex<f64>> = f
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    transform_axes(&grid, &mut data, true);
    for (flat, z) in data.iter_mut().enumerate() {
        let idx = grid.unflatten(flat);
        let mut w2 = 0.0;
        for a in 0..grid.d() {
            w2 += xi2[idx[a]];
        }
        *z *= mult(w2 * w2);
    }
    transform_axes(&grid, &mut data, false);
    let values = data.iter().map(|z| z.re).collect();
    SampledField::new(grid, values)
}

fn ensure_step_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!(
            "evolution time must be finite and nonnegative, got {t}"
        )));
    }
    Ok(())
}

fn ensure_same_grid(f: &SampledField, v: &SampledField, what: &str) -> Result<()> {
    if f.grid() != v.grid() {
        return Err(Error::GridMismatch(format!(
            "{what}: field and potential live on different grids"
        )));
    }
    Ok(())
}

fn ensure_nonnegative(v: &SampledField) -> Result<()> {
    if let Some(bad) = v.values().iter().find(|c| **c < 0.0) {
        return Err(Error::invalid(format!(
            "potential samples must be nonnegative, found {bad}"
        )));
    }
    Ok(())
}

/// e^{−tΔ²} by Fourier multiplier e^{−t|ξ|⁴}. Exact semigroup on the grid;
/// t = 0 is the identity.
pub fn biharmonic_step(f: &SampledField, t: f64) -> Result<SampledField> {
    ensure_step_time(t)?;
    spectral_multiply(f, |lam| (-t * lam).exp())
}

/// Strang splitting for e^{−tL}, L = (−Δ)² + V²: per substep a half
/// multiplier e^{−Δt V²/2}, the full spectral biharmonic step, and the
/// second half multiplier. Global error O(Δt²) against the dense oracle.
pub fn schrodinger4_evolve(
    f: &SampledField,
    v: &SampledField,
    t: f64,
    substeps: usize,
) -> Result<SampledField> {
    ensure_same_grid(f, v, "schrodinger4_evolve")?;
    ensure_nonnegative(v)?;
    ensure_step_time(t)?;
    if substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    let dt = t / substeps as f64;
    let half: Vec<f64> = v
        .values()
        .iter()
        .map(|&c| (-0.5 * dt * c * c).exp())
        .collect();
    let mut u = f.clone();
    for _ in 0..substeps {
        for (x, h) in u.values_mut().iter_mut().zip(&half) {
            *x *= h;
        }
        u = biharmonic_step(&u, dt)?;
        for (x, h) in u.values_mut().iter_mut().zip(&half) {
            *x *= h;
        }
    }
    Ok(u)
}

fn ensure_dense_grid(grid: &GridSpec) -> Result<()> {
    if grid.d() != 1 {
        return Err(Error::invalid(format!(
            "dense route requires d=1, got d={}",
            grid.d()
        )));
    }
    if grid.m() > DENSE_MAX_M {
        return Err(Error::invalid(format!(
            "dense route capped at m={DENSE_MAX_M}, got m={}",
            grid.m()
        )));
    }
    Ok(())
}

/// Matrix of the Fourier-spectral (−Δ)² plus diag(V²) on a d=1 grid.
///
/// The circulant part is K_{jk} = (1/m)Σ_ℓ ξ_ℓ⁴ cos(2πℓ(j−k)/m), stored via
/// its first column indexed by min(r, m−r) so the matrix is symmetric
/// bit-for-bit.
pub fn dense_generator(grid: &GridSpec, v: &SampledField) -> Result<DMatrix<f64>> {
    ensure_dense_grid(grid)?;
    if v.grid() != grid {
        return Err(Error::GridMismatch(
            "dense_generator: potential sampled on a different grid".into(),
        ));
    }
    ensure_nonnegative(v)?;
    let m = grid.m();
    let scale = 2.0 * PI / grid.box_len();
    let xi4: Vec<f64> = (0..m)
        .map(|l| {
            let q = scale * freq_of(l, m) as f64;
            q.powi(4)
        })
        .collect();
    let mut first = vec![0.0; m / 2 + 1];
    for (r, slot) in first.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (l, &x4) in xi4.iter().enumerate() {
            acc += x4 * (2.0 * PI * (l as f64) * (r as f64) / m as f64).cos();
        }
        *slot = acc / m as f64;
    }
    let mut mat = DMatrix::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            let r = (j + m - k) % m;
            mat[(j, k)] = first[r.min(m - r)];
        }
    }
    for (j, &c) in v.values().iter().enumerate() {
        mat[(j, j)] += c * c;
    }
    Ok(mat)
}

/// Eigendecomposition of the dense generator, reusable across times. This is
/// the oracle: e^{−tM} = U e^{−tΛ} Uᵀ evaluated exactly per eigenvalue.
pub struct DenseEvolver {
    grid: GridSpec,
    eigvals: DVector<f64>,
    eigvecs: DMatrix<f64>,
}

impl DenseEvolver {
    pub fn new(grid: &GridSpec, v: &SampledField) -> Result<Self> {
        let mat = dense_generator(grid, v)?;
        let eig = nalgebra::SymmetricEigen::try_new(mat, f64::EPSILON, 0)
            .ok_or_else(|| Error::invalid("symmetric eigensolver did not converge"))?;
        Ok(DenseEvolver {
            grid: *grid,
            eigvals: eig.eigenvalues,
            eigvecs: eig.eigenvectors,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigvals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn apply(&self, f: &SampledField, t: f64) -> Result<SampledField> {
        ensure_step_time(t)?;
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch(
                "dense evolve: field sampled on a different grid".into(),
            ));
        }
        let coeffs = self.eigvecs.transpose() * DVector::from_column_slice(f.values());
        let damped = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.eigvals.iter())
                .map(|(&c, &lam)| c * (-t * lam).exp()),
        );
        let out = &self.eigvecs * damped;
        SampledField::new(self.grid, out.as_slice().to_vec())
    }

    /// U diag(filter(λ)) Uᵀ for an arbitrary spectral filter; lets callers
    /// assemble subordinated or composite flows from one eigendecomposition.
    pub fn filtered_matrix(&self, filter: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let damp = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigvals.len(),
            self.eigvals.iter().map(|&lam| filter(lam)),
        ));
        &self.eigvecs * damp * self.eigvecs.transpose()
    }

    /// Full kernel matrix B_t(x, y) = (U e^{−tΛ} Uᵀ)_{xy} / cell width, so
    /// that u(x) = Σ_y B_t(x,y) f(y) h discretizes the kernel integral.
    pub fn kernel_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        ensure_step_time(t)?;
        Ok(self.filtered_matrix(|lam| (-t * lam).exp()) / self.grid.cell_width())
    }
}

/// e^{−tM}f through the eigendecomposition oracle. d=1, m ≤ 512.
pub fn dense_evolve(f: &SampledField, v: &SampledField, t: f64) -> Result<SampledField> {
    DenseEvolver::new(f.grid(), v)?.apply(f, t)
}

/// Column B_t(·, y): the dense flow applied to a discrete delta at
/// `y_index`, scaled by 1/cell-volume.
pub fn heat_kernel_column(
    grid: &GridSpec,
    v: &SampledField,
    t: f64,
    y_index: usize,
) -> Result<SampledField> {
    if y_index >= grid.len() {
        return Err(Error::invalid(format!(
            "column index {y_index} outside grid of {} points",
            grid.len()
        )));
    }
    let mut delta = SampledField::zeros(*grid);
    delta.values_mut()[y_index] = 1.0 / grid.cell_volume();
    DenseEvolver::new(grid, v)?.apply(&delta, t)
}

/// ∂_t B_t(·, y) by centered differences with step t/100.
pub fn heat_kernel_time_derivative(
    grid: &GridSpec,
    v: &SampledField,
    t: f64,
    y_index: usize,
) -> Result<SampledField> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::invalid("time derivative needs t > 0"));
    }
    if y_index >= grid.len() {
        return Err(Error::invalid(format!(
            "column index {y_index} outside grid of {} points",
            grid.len()
        )));
    }
    let mut delta = SampledField::zeros(*grid);
    delta.values_mut()[y_index] = 1.0 / grid.cell_volume();
    let step = t / 100.0;
    let evolver = DenseEvolver::new(grid, v)?;
    let ahead = evolver.apply(&delta, t + step)?;
    let behind = evolver.apply(&delta, t - step)?;
    ahead.axpy(0.5 / step, &behind, -0.5 / step)
}

/// Truncation mask for |x−y| < γ(x) in periodic distance, row-major
/// (x·len + y). γ entries may be +∞ (keep everything) or 0 (drop
/// everything).
pub fn local_mask(grid: &GridSpec, gamma: &[f64]) -> Result<Vec<bool>> {
    if gamma.len() != grid.len() {
        return Err(Error::invalid(format!(
            "gamma has {} entries for a grid of {} points",
            gamma.len(),
            grid.len()
        )));
    }
    if let Some(bad) = gamma.iter().find(|g| g.is_nan() || **g < 0.0) {
        return Err(Error::invalid(format!(
            "gamma entries must be nonnegative, found {bad}"
        )));
    }
    let n = grid.len();
    let mut mask = vec![false; n * n];
    for x in 0..n {
        for y in 0..n {
            mask[x * n + y] = grid.distance(x, y) < gamma[x];
        }
    }
    Ok(mask)
}

/// Kernel application masked to |x−y| < γ(x) in periodic distance; the full
/// mask reproduces the dense flow.
pub fn local_truncated_evolve(
    f: &SampledField,
    v: &SampledField,
    t: f64,
    gamma: &[f64],
) -> Result<SampledField> {
    ensure_same_grid(f, v, "local_truncated_evolve")?;
    let grid = *f.grid();
    let mask = local_mask(&grid, gamma)?;
    let kernel = DenseEvolver::new(&grid, v)?.kernel_matrix(t)?;
    let h = grid.cell_width();
    let n = grid.len();
    let mut out = vec![0.0; n];
    for (x, out_x) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (y, fy) in f.values().iter().enumerate() {
            if mask[x * n + y] {
                acc += kernel[(x, y)] * fy;
            }
        }
        *out_x = acc * h;
    }
    SampledField::new(grid, out)
}

fn l2_norm_cellweighted(f: &SampledField) -> f64 {
    let sq: f64 = f.values().iter().map(|&x| x * x).sum();
    (sq * f.grid().cell_volume()).sqrt()
}

/// ‖e^{−tL}f − e^{−tΔ²}f + ∫₀^t e^{−(t−s)Δ²} V² e^{−sL}f ds‖₂ with the
/// s-integral by composite Simpson on `s_nodes` panels. Vanishes in exact
/// arithmetic, so the value isolates the quadrature error: O(s_nodes⁻⁴).
pub fn duhamel_residual(
    f: &SampledField,
    v: &SampledField,
    t: f64,
    s_nodes: usize,
) -> Result<f64> {
    ensure_same_grid(f, v, "duhamel_residual")?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::invalid("duhamel_residual needs t > 0"));
    }
    if s_nodes < 4 {
        return Err(Error::invalid("duhamel_residual needs at least 4 panels"));
    }
    let grid = *f.grid();
    let evolver = DenseEvolver::new(&grid, v)?;
    let v2: Vec<f64> = v.values().iter().map(|&c| c * c).collect();
    let integrand = |s: f64| -> Result<SampledField> {
        let mut u = evolver.apply(f, s)?;
        for (x, w) in u.values_mut().iter_mut().zip(&v2) {
            *x *= w;
        }
        biharmonic_step(&u, t - s)
    };
    let width = t / s_nodes as f64;
    let mut integral = SampledField::zeros(grid);
    for panel in 0..s_nodes {
        let a = panel as f64 * width;
        let left = integrand(a)?;
        let mid = integrand(a + 0.5 * width)?;
        let right = integrand(a + width)?;
        let weight = width / 6.0;
        for (((acc, l), c), r) in integral
            .values_mut()
            .iter_mut()
            .zip(left.values())
            .zip(mid.values())
            .zip(right.values())
        {
            *acc += weight * (l + 4.0 * c + r);
        }
    }
    let perturbed = evolver.apply(f, t)?;
    let free = biharmonic_step(f, t)?;
    let residual = perturbed.axpy(1.0, &free, -1.0)?.axpy(1.0, &integral, 1.0)?;
    Ok(l2_norm_cellweighted(&residual))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    sigma: f64,
    nodes: usize,
}

impl PoissonParams {
    pub fn new(sigma: f64, nodes: usize) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 || sigma >= 1.0 {
            return Err(Error::invalid(format!(
                "sigma must lie strictly inside (0,1), got {sigma}"
            )));
        }
        if nodes < 8 {
            return Err(Error::invalid(format!(
                "poisson quadrature needs at least 8 nodes, got {nodes}"
            )));
        }
        Ok(PoissonParams { sigma, nodes })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

/// Nodes and weights for ∫₀^∞ g(r) r^α e^{−r} dr by Golub–Welsch on the
/// Jacobi matrix (diagonal 2i+1+α, off-diagonal √(i(i+α))); weights are
/// Γ(α+1) times the squared first eigenvector components.
pub fn gauss_laguerre_generalized(nodes: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if nodes == 0 {
        return Err(Error::invalid("quadrature needs at least one node"));
    }
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::invalid(format!(
            "laguerre weight exponent must exceed -1, got {alpha}"
        )));
    }
    let mut jacobi = DMatrix::zeros(nodes, nodes);
    for i in 0..nodes {
        jacobi[(i, i)] = 2.0 * i as f64 + 1.0 + alpha;
        if i > 0 {
            let off = (i as f64 * (i as f64 + alpha)).sqrt();
            jacobi[(i, i - 1)] = off;
            jacobi[(i - 1, i)] = off;
        }
    }
    let eig = nalgebra::SymmetricEigen::try_new(jacobi, f64::EPSILON, 0)
        .ok_or_else(|| Error::invalid("laguerre jacobi eigensolver did not converge"))?;
    let total = specfun::gamma(alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let first = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], total * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Subordinated Poisson operator
/// (1/Γ(σ)) ∫₀^∞ e^{−r} r^{σ−1} e^{−(t²/4r)L} f dr.
///
/// V ≡ 0 runs spectrally in any dimension (the node sum collapses into one
/// multiplier); otherwise the dense route applies, d=1 with m ≤ 512.
pub fn poisson_apply(
    f: &SampledField,
    v: &SampledField,
    t: f64,
    params: &PoissonParams,
) -> Result<SampledField> {
    ensure_same_grid(f, v, "poisson_apply")?;
    ensure_nonnegative(v)?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::invalid("poisson_apply needs t > 0"));
    }
    let (r, w) = gauss_laguerre_generalized(params.nodes, params.sigma - 1.0)?;
    let total = specfun::gamma(params.sigma);
    if v.values().iter().all(|&c| c == 0.0) {
        return spectral_multiply(f, |lam| {
            let mut acc = 0.0;
            for (ri, wi) in r.iter().zip(&w) {
                acc += wi * (-(t * t / (4.0 * ri)) * lam).exp();
            }
            acc / total
        });
    }
    poisson_apply_dense(f, v, t, &r, &w, total)
}

fn poisson_apply_dense(
    f: &SampledField,
    v: &SampledField,
    t: f64,
    r: &[f64],
    w: &[f64],
    total: f64,
) -> Result<SampledField> {
    let evolver = DenseEvolver::new(f.grid(), v)?;
    let mut acc = SampledField::zeros(*f.grid());
    for (ri, wi) in r.iter().zip(w) {
        let term = evolver.apply(f, t * t / (4.0 * ri))?;
        for (a, x) in acc.values_mut().iter_mut().zip(term.values()) {
            *a += wi * x;
        }
    }
    for a in acc.values_mut() {
        *a /= total;
    }
    Ok(acc)
}

/// Free kernel on the 1-d torus by image summation over |j| ≤ 3. Only valid
/// while the kernel has decayed across the box: requires t^{1/4} ≤ box/8.
pub fn image_summed_kernel(x: f64, t: f64, box_len: f64) -> Result<f64> {
    if !(box_len > 0.0) || !t.is_finite() || t <= 0.0 {
        return Err(Error::invalid("image sum needs t > 0 and box > 0"));
    }
    if t.powf(0.25) > box_len / 8.0 {
        return Err(Error::invalid(format!(
            "image sum invalid: t^(1/4) = {} exceeds box/8 = {}",
            t.powf(0.25),
            box_len / 8.0
        )));
    }
    let mut acc = 0.0;
    for j in -3i32..=3 {
        acc += kernel::b_eval(1, (x + j as f64 * box_len).abs(), t)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1(m: usize, box_len: f64) -> GridSpec {
        GridSpec::new(1, m, box_len).unwrap()
    }

    /// Real trigonometric polynomial Σ a·cos(2πkx/box) + b·sin(2πkx/box).
    fn band_field(grid: &GridSpec, modes: &[(usize, f64, f64)]) -> SampledField {
        let box_len = grid.box_len();
        SampledField::from_fn(*grid, |x| {
            let mut acc = 0.0;
            for &(k, a, b) in modes {
                let arg = 2.0 * PI * k as f64 * x[0] / box_len;
                acc += a * arg.cos() + b * arg.sin();
            }
            acc
        })
        .unwrap()
    }

    fn sup_diff(a: &SampledField, b: &SampledField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn sup_norm(a: &SampledField) -> f64 {
        a.values().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    fn cell_sum(a: &SampledField) -> f64 {
        a.values().iter().sum::<f64>() * a.grid().cell_volume()
    }

    const BAND2: &[(usize, f64, f64)] = &[
        (0, 1.0, 0.0),
        (1, 0.7, 0.4),
        (2, 0.25, 0.1),
    ];
    const BAND4: &[(usize, f64, f64)] = &[
        (0, 1.0, 0.0),
        (1, 0.6, 0.0),
        (2, 0.0, 0.3),
        (3, 0.15, 0.0),
        (4, 0.0, 0.075),
    ];

    #[test]
    fn constant_field_is_fixed() {
        let grid = grid1(32, 5.0);
        let f = SampledField::from_fn(grid, |_| 1.0).unwrap();
        let out = biharmonic_step(&f, 0.7).unwrap();
        assert!(sup_diff(&out, &f) <= 1e-12);
    }

    #[test]
    fn cosine_mode_decays_at_spectral_rate() {
        let grid = grid1(64, 3.0);
        let f = band_field(&grid, &[(1, 1.0, 0.0)]);
        let t = 0.04;
        let factor = (-t * (2.0 * PI / 3.0_f64).powi(4)).exp();
        let expected = f.map(|x| factor * x);
        let out = biharmonic_step(&f, t).unwrap();
        assert!(sup_diff(&out, &expected) <= 1e-12 * sup_norm(&f));
    }

    #[test]
    fn two_dim_product_mode_is_eigenfunction() {
        let grid = GridSpec::new(2, 16, 2.5).unwrap();
        let f = SampledField::from_fn(grid, |x| {
            (2.0 * PI * x[0] / 2.5).cos() * (4.0 * PI * x[1] / 2.5).cos()
        })
        .unwrap();
        let t = 0.002;
        let w2 = (2.0 * PI / 2.5_f64).powi(2) * (1.0 + 4.0);
        let out = biharmonic_step(&f, t).unwrap();
        let expected = f.map(|x| (-t * w2 * w2).exp() * x);
        assert!(sup_diff(&out, &expected) <= 1e-12 * sup_norm(&f));
    }

    #[test]
    fn three_dim_single_mode_decays() {
        let grid = GridSpec::new(3, 8, 2.0).unwrap();
        let f = SampledField::from_fn(grid, |x| 1.0 + (PI * x[2]).cos()).unwrap();
        let t = 1e-4;
        let lam = (2.0 * PI / 2.0_f64).powi(4);
        let out = biharmonic_step(&f, t).unwrap();
        let expected =
            SampledField::from_fn(grid, |x| 1.0 + (-t * lam).exp() * (PI * x[2]).cos()).unwrap();
        assert!(sup_diff(&out, &expected) <= 1e-12 * sup_norm(&f));
    }

    #[test]
    fn semigroup_composition_matches_single_step() {
        let grid = grid1(64, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let two = biharmonic_step(&biharmonic_step(&f, 0.07).unwrap(), 0.05).unwrap();
        let one = biharmonic_step(&f, 0.12).unwrap();
        assert!(sup_diff(&two, &one) <= 1e-12 * sup_norm(&f));
    }

    #[test]
    fn mass_conserved_and_l2_contracts() {
        let grid = grid1(64, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let out = biharmonic_step(&f, 0.3).unwrap();
        let rel = (cell_sum(&out) - cell_sum(&f)).abs() / cell_sum(&f).abs();
        assert!(rel <= 1e-12, "mass drift {rel}");
        assert!(l2_norm_cellweighted(&out) <= l2_norm_cellweighted(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn small_time_convergence_is_monotone() {
        let grid = grid1(64, 2.0 * PI);
        let f = band_field(&grid, BAND2);
        let mut last = f64::INFINITY;
        for j in 0..9 {
            let t = 0.4 * 0.5_f64.powi(j);
            let diff = biharmonic_step(&f, t).unwrap().axpy(1.0, &f, -1.0).unwrap();
            let err = l2_norm_cellweighted(&diff);
            assert!(err < last, "‖u(t)−f‖₂ not decreasing at t={t}");
            last = err;
        }
        // The band-2 mode damps like 1 − e^{−16t}, so ~2.5e-2 relative at the
        // last rung; 5e-2 leaves room without hiding a stall.
        assert!(last <= 0.05 * l2_norm_cellweighted(&f), "final gap {last}");
    }

    #[test]
    fn split_with_zero_potential_collapses_to_free_flow() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::zeros(grid);
        let split = schrodinger4_evolve(&f, &v, 0.2, 1).unwrap();
        let free = biharmonic_step(&f, 0.2).unwrap();
        assert_eq!(split.values(), free.values());
        let split3 = schrodinger4_evolve(&f, &v, 0.2, 3).unwrap();
        assert!(sup_diff(&split3, &free) <= 1e-13 * sup_norm(&f));
    }

    #[test]
    fn constant_potential_commutes_with_free_flow() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let c = 0.8;
        let v = SampledField::from_fn(grid, |_| c).unwrap();
        let split = schrodinger4_evolve(&f, &v, 0.4, 5).unwrap();
        let expected = biharmonic_step(&f, 0.4)
            .unwrap()
            .map(|x| (-0.4 * c * c).exp() * x);
        assert!(sup_diff(&split, &expected) <= 1e-12 * sup_norm(&f));
    }

    #[test]
    fn split_rejects_bad_arguments() {
        let grid = grid1(16, 1.0);
        let f = SampledField::zeros(grid);
        let mut v = SampledField::zeros(grid);
        assert!(schrodinger4_evolve(&f, &v, 0.1, 0).is_err());
        assert!(schrodinger4_evolve(&f, &v, -0.1, 4).is_err());
        v.values_mut()[3] = -1e-3;
        assert!(schrodinger4_evolve(&f, &v, 0.1, 4).is_err());
        let other = SampledField::zeros(grid1(32, 1.0));
        assert!(schrodinger4_evolve(&f, &other, 0.1, 4).is_err());
    }

    #[test]
    fn dense_generator_reproduces_mode_eigenvalues() {
        let grid = grid1(32, 2.0 * PI);
        let c = 0.7;
        let v = SampledField::from_fn(grid, |_| c).unwrap();
        let mat = dense_generator(&grid, &v).unwrap();
        for k in [1usize, 3, 7] {
            let mode = band_field(&grid, &[(k, 1.0, 0.0)]);
            let lam = (k as f64).powi(4) + c * c;
            let applied = &mat * DVector::from_column_slice(mode.values());
            let err = applied
                .iter()
                .zip(mode.values())
                .map(|(a, m)| (a - lam * m).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-8, "mode {k}: residual {err}");
        }
    }

    #[test]
    fn dense_generator_is_bitwise_symmetric_and_psd() {
        let grid = grid1(32, 2.0 * PI);
        let v = SampledField::from_fn(grid, |x| (x[0]).sin().powi(2)).unwrap();
        let mat = dense_generator(&grid, &v).unwrap();
        for j in 0..32 {
            for k in 0..32 {
                assert_eq!(mat[(j, k)].to_bits(), mat[(k, j)].to_bits());
            }
        }
        let evolver = DenseEvolver::new(&grid, &v).unwrap();
        assert!(
            evolver.smallest_eigenvalue() >= -1e-10,
            "smallest eigenvalue {}",
            evolver.smallest_eigenvalue()
        );
    }

    #[test]
    fn dense_route_rejects_out_of_scope_grids() {
        let grid2 = GridSpec::new(2, 16, 1.0).unwrap();
        let v2 = SampledField::zeros(grid2);
        assert!(dense_generator(&grid2, &v2).is_err());
        let big = grid1(1024, 1.0);
        let vbig = SampledField::zeros(big);
        assert!(dense_generator(&big, &vbig).is_err());
    }

    #[test]
    fn dense_evolve_matches_spectral_at_zero_potential() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::zeros(grid);
        let dense = dense_evolve(&f, &v, 0.3).unwrap();
        let free = biharmonic_step(&f, 0.3).unwrap();
        let dev = sup_diff(&dense, &free) / sup_norm(&f);
        assert!(dev <= 1e-10, "dense vs spectral deviation {dev}");
    }

    #[test]
    fn dense_semigroup_and_contraction() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::from_fn(grid, |x| x[0].sin().powi(2)).unwrap();
        let evolver = DenseEvolver::new(&grid, &v).unwrap();
        let two = evolver.apply(&evolver.apply(&f, 0.1).unwrap(), 0.2).unwrap();
        let one = evolver.apply(&f, 0.3).unwrap();
        assert!(sup_diff(&two, &one) <= 1e-11 * sup_norm(&f));
        assert!(
            l2_norm_cellweighted(&one) <= l2_norm_cellweighted(&f) * (1.0 + 1e-10),
            "perturbed dense flow expanded the l2 norm"
        );
    }

    #[test]
    fn filtered_matrix_reproduces_identity_and_flow() {
        let grid = grid1(16, 2.0 * PI);
        let v = SampledField::from_fn(grid, |x| x[0].sin().powi(2)).unwrap();
        let evolver = DenseEvolver::new(&grid, &v).unwrap();

        let eye = evolver.filtered_matrix(|_| 1.0);
        for j in 0..16 {
            for k in 0..16 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((eye[(j, k)] - want).abs() <= 1e-12, "U U^T not identity at ({j},{k})");
            }
        }

        let f = band_field(&grid, BAND2);
        let t = 0.17;
        let mat = evolver.filtered_matrix(|lam| (-t * lam).exp());
        let via_matrix = &mat * nalgebra::DVector::from_column_slice(f.values());
        let via_apply = evolver.apply(&f, t).unwrap();
        let dev = via_apply
            .values()
            .iter()
            .zip(via_matrix.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(dev <= 1e-12, "filtered matrix disagrees with apply: {dev}");
    }

    #[test]
    fn strang_order_sits_in_second_order_window() {
        let grid = grid1(64, 4.0 * PI);
        let f = band_field(&grid, BAND2);
        let v = SampledField::from_fn(grid, |x| (0.5 * x[0]).sin().powi(2)).unwrap();
        let t = 0.5;
        let target = dense_evolve(&f, &v, t).unwrap();
        let errs: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&steps| {
                let u = schrodinger4_evolve(&f, &v, t, steps).unwrap();
                l2_norm_cellweighted(&u.axpy(1.0, &target, -1.0).unwrap())
            })
            .collect();
        for pair in errs.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(
                (1.7..=2.3).contains(&order),
                "strang order {order} out of window, errors {errs:?}"
            );
        }
    }

    #[test]
    fn kernel_column_matches_image_summed_free_kernel() {
        let grid = grid1(64, 2.0 * PI);
        let v = SampledField::zeros(grid);
        let t = 0.1;
        let y = 21;
        let col = heat_kernel_column(&grid, &v, t, y).unwrap();
        let ycoord = grid.coords(y)[0];
        let reference = SampledField::from_fn(grid, |x| {
            image_summed_kernel(x[0] - ycoord, t, 2.0 * PI).unwrap()
        })
        .unwrap();
        let scale = sup_norm(&reference);
        assert!(scale > 0.3, "free kernel peak unexpectedly small: {scale}");
        let dev = sup_diff(&col, &reference) / scale;
        assert!(dev <= 0.01, "normalized kernel deviation {dev}");
    }

    #[test]
    fn kernel_column_time_derivative_matches_free_kernel() {
        let grid = grid1(64, 2.0 * PI);
        let v = SampledField::zeros(grid);
        let t = 0.1;
        let y = 21;
        let ycoord = grid.coords(y)[0];
        let deriv = heat_kernel_time_derivative(&grid, &v, t, y).unwrap();
        let reference = SampledField::from_fn(grid, |x| {
            let mut acc = 0.0;
            for j in -3i32..=3 {
                acc += kernel::b_time_derivative(1, (x[0] - ycoord + j as f64 * 2.0 * PI).abs(), t)
                    .unwrap();
            }
            acc
        })
        .unwrap();
        let dev = sup_diff(&deriv, &reference) / sup_norm(&reference);
        assert!(dev <= 0.01, "normalized time-derivative deviation {dev}");
    }

    #[test]
    fn kernel_matrix_is_symmetric() {
        let grid = grid1(32, 2.0 * PI);
        let v = SampledField::from_fn(grid, |x| x[0].sin().powi(2)).unwrap();
        let mat = DenseEvolver::new(&grid, &v).unwrap().kernel_matrix(0.2).unwrap();
        let mut asym = 0.0f64;
        for j in 0..32 {
            for k in 0..32 {
                asym = asym.max((mat[(j, k)] - mat[(k, j)]).abs());
            }
        }
        assert!(asym <= 1e-8, "kernel asymmetry {asym}");
    }

    #[test]
    fn kernel_column_mass_free_flow_bounded_by_one() {
        let grid = grid1(64, 2.0 * PI);
        let v = SampledField::zeros(grid);
        for t in [0.05, 0.1, 0.5] {
            let col = heat_kernel_column(&grid, &v, t, 0).unwrap();
            assert!(cell_sum(&col) <= 1.0 + 1e-8, "free mass {}", cell_sum(&col));
        }
    }

    /// With V ≥ 0 the column sum is not a contraction pointwise in y: the
    /// potential redistributes mass, and a mild transient excess above 1
    /// appears. It stays far below 1.05 for a unit-amplitude potential.
    #[test]
    fn kernel_column_mass_perturbed_flow_has_small_excess() {
        let grid = grid1(64, 2.0 * PI);
        let v = SampledField::from_fn(grid, |x| x[0].sin().powi(2)).unwrap();
        // Short-time expansion at a zero of V: mass ≈ 1 + t²(V²)''''(y)/2,
        // positive here, so the excess lives at small t and fades once the
        // flow mixes (mass at y=0 is back under 1 by t ≈ 0.05).
        let mut peak = 0.0f64;
        for y in [0usize, 16, 32, 48] {
            for t in [0.002, 0.005, 0.01, 0.02, 0.05] {
                let col = heat_kernel_column(&grid, &v, t, y).unwrap();
                peak = peak.max(cell_sum(&col));
            }
        }
        assert!(peak > 1.0 + 1e-9, "expected a transient excess, got {peak}");
        assert!(peak < 1.05, "excess too large: {peak}");
    }

    #[test]
    fn local_truncation_full_and_empty_masks() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::from_fn(grid, |x| x[0].sin().powi(2)).unwrap();
        let full = local_truncated_evolve(&f, &v, 0.2, &vec![f64::INFINITY; 32]).unwrap();
        let dense = dense_evolve(&f, &v, 0.2).unwrap();
        assert!(sup_diff(&full, &dense) <= 1e-9 * sup_norm(&f));
        let empty = local_truncated_evolve(&f, &v, 0.2, &vec![0.0; 32]).unwrap();
        assert!(empty.values().iter().all(|&x| x == 0.0));
        assert!(local_truncated_evolve(&f, &v, 0.2, &vec![1.0; 31]).is_err());
        assert!(local_truncated_evolve(&f, &v, 0.2, &vec![-1.0; 32]).is_err());
    }

    #[test]
    fn duhamel_residual_zero_potential_floor() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::zeros(grid);
        let res = duhamel_residual(&f, &v, 0.1, 8).unwrap();
        assert!(res <= 1e-10, "free-flow residual {res}");
    }

    #[test]
    fn duhamel_residual_constant_potential() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::from_fn(grid, |_| 1.0).unwrap();
        let res = duhamel_residual(&f, &v, 0.1, 64).unwrap();
        assert!(res <= 1e-6, "commuting-case residual {res}");
    }

    #[test]
    fn duhamel_residual_simpson_rate() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND4);
        let v = SampledField::from_fn(grid, |x| x[0].sin().powi(2)).unwrap();
        let r16 = duhamel_residual(&f, &v, 0.1, 16).unwrap();
        let r32 = duhamel_residual(&f, &v, 0.1, 32).unwrap();
        let r64 = duhamel_residual(&f, &v, 0.1, 64).unwrap();
        assert!(r16 / r32 >= 8.0, "16→32 ratio {}", r16 / r32);
        assert!(r32 / r64 >= 8.0, "32→64 ratio {}", r32 / r64);
        assert!(duhamel_residual(&f, &v, 0.1, 3).is_err());
    }

    #[test]
    fn laguerre_rule_integrates_monomials() {
        for &(nodes, alpha) in &[(8usize, 0.0), (24, -0.5), (32, -0.7)] {
            let (r, w) = gauss_laguerre_generalized(nodes, alpha).unwrap();
            assert!(r.windows(2).all(|p| p[0] < p[1]));
            assert!(r[0] > 0.0);
            for k in 0..=6u32 {
                let quad: f64 = r
                    .iter()
                    .zip(&w)
                    .map(|(ri, wi)| wi * ri.powi(k as i32))
                    .sum();
                let exact = specfun::gamma(alpha + 1.0 + k as f64);
                let rel = (quad - exact).abs() / exact;
                assert!(
                    rel <= 1e-11,
                    "moment {k} at (n={nodes}, α={alpha}): rel err {rel}"
                );
            }
        }
        assert!(gauss_laguerre_generalized(0, 0.0).is_err());
        assert!(gauss_laguerre_generalized(8, -1.0).is_err());
    }

    #[test]
    fn poisson_params_validation() {
        assert!(PoissonParams::new(0.5, 8).is_ok());
        assert!(PoissonParams::new(0.0, 16).is_err());
        assert!(PoissonParams::new(1.0, 16).is_err());
        assert!(PoissonParams::new(-0.2, 16).is_err());
        assert!(PoissonParams::new(f64::NAN, 16).is_err());
        assert!(PoissonParams::new(0.5, 7).is_err());
    }

    #[test]
    fn poisson_half_sigma_is_subordinated_exponential() {
        // Stiff single-mode configuration: box = 0.7 puts μ = (2π/box)⁴ ≈ 6.5e3,
        // so e^{−t√μ} ≈ 3.2e-4 at t = 0.1 and the identity is a real test.
        let grid = grid1(32, 0.7);
        let f = band_field(&grid, &[(1, 1.0, 0.0)]);
        let v = SampledField::zeros(grid);
        let params = PoissonParams::new(0.5, 64).unwrap();
        let t = 0.1;
        let mu_sqrt = (2.0 * PI / 0.7_f64).powi(2);
        let out = poisson_apply(&f, &v, t, &params).unwrap();
        let expected = f.map(|x| (-t * mu_sqrt).exp() * x);
        assert!(sup_diff(&out, &expected) <= 1e-8 * sup_norm(&f));
    }

    #[test]
    fn poisson_node_doubling_is_stable() {
        let grid = grid1(32, 0.7);
        let f = band_field(&grid, &[(1, 1.0, 0.0)]);
        let v = SampledField::zeros(grid);
        let p32 = PoissonParams::new(0.5, 32).unwrap();
        let p64 = PoissonParams::new(0.5, 64).unwrap();
        for t in [0.1, 0.3, 1.0] {
            let a = poisson_apply(&f, &v, t, &p32).unwrap();
            let b = poisson_apply(&f, &v, t, &p64).unwrap();
            let rel = l2_norm_cellweighted(&a.axpy(1.0, &b, -1.0).unwrap())
                / l2_norm_cellweighted(&f);
            assert!(rel < 1e-8, "node doubling moved result by {rel} at t={t}");
        }
    }

    #[test]
    fn poisson_identity_limit_small_time() {
        let grid = grid1(64, 2.0 * PI);
        let f = band_field(&grid, BAND2);
        let v = SampledField::zeros(grid);
        let params = PoissonParams::new(0.5, 32).unwrap();
        let out = poisson_apply(&f, &v, 1e-3, &params).unwrap();
        let rel = l2_norm_cellweighted(&out.axpy(1.0, &f, -1.0).unwrap())
            / l2_norm_cellweighted(&f);
        assert!(rel <= 0.01, "identity limit deviation {rel}");
    }

    #[test]
    fn poisson_preserves_constants_across_sigma() {
        let grid = grid1(16, 2.0);
        let f = SampledField::from_fn(grid, |_| 3.5).unwrap();
        let v = SampledField::zeros(grid);
        for sigma in [0.25, 0.5, 0.75] {
            let params = PoissonParams::new(sigma, 24).unwrap();
            let out = poisson_apply(&f, &v, 0.5, &params).unwrap();
            assert!(sup_diff(&out, &f) <= 1e-12 * 3.5, "σ={sigma}");
        }
    }

    #[test]
    fn poisson_dense_route_matches_spectral() {
        let grid = grid1(32, 2.0 * PI);
        let f = band_field(&grid, BAND2);
        let v = SampledField::zeros(grid);
        let params = PoissonParams::new(0.5, 32).unwrap();
        let spectral = poisson_apply(&f, &v, 0.3, &params).unwrap();
        let (r, w) = gauss_laguerre_generalized(32, -0.5).unwrap();
        let dense = poisson_apply_dense(&f, &v, 0.3, &r, &w, specfun::gamma(0.5)).unwrap();
        assert!(sup_diff(&spectral, &dense) <= 1e-9 * sup_norm(&f));
    }

    #[test]
    fn image_sum_enforces_decay_precondition() {
        assert!(image_summed_kernel(0.0, 0.1, 2.0 * PI).is_ok());
        let too_late = (2.0 * PI / 8.0_f64).powi(4) * 1.01;
        assert!(image_summed_kernel(0.0, too_late, 2.0 * PI).is_err());
        assert!(image_summed_kernel(0.0, -0.1, 2.0 * PI).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn spectral_invariants_on_random_bands(
            a1 in -1.0f64..1.0, b1 in -1.0f64..1.0,
            a2 in -1.0f64..1.0, b2 in -1.0f64..1.0,
            t in 1e-3f64..0.5,
        ) {
            let grid = grid1(16, 2.0 * PI);
            let f = band_field(&grid, &[(0, 1.0, 0.0), (1, a1, b1), (2, a2, b2)]);
            let out = biharmonic_step(&f, t).unwrap();
            let mass_rel = (cell_sum(&out) - cell_sum(&f)).abs() / cell_sum(&f).abs();
            prop_assert!(mass_rel <= 1e-12);
            prop_assert!(l2_norm_cellweighted(&out) <= l2_norm_cellweighted(&f) * (1.0 + 1e-12));
            let half = biharmonic_step(&biharmonic_step(&f, t / 2.0).unwrap(), t / 2.0).unwrap();
            prop_assert!(sup_diff(&half, &out) <= 1e-11 * (1.0 + sup_norm(&f)));
        }
    }
}
