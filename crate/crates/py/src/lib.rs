//! Python bindings for the core toolkit: grids and sampled fields, the
//! kernel profile, the semigroup evolvers, variation seminorms, potentials
//! with their critical radius, and the Lp/Morrey norms.
//!
//! Thin wrappers only; all numerics stay in the core crate.  Fields cross
//! the boundary as plain lists of floats.

use bvc_core::{engine, kernel, norms, potential, rng, specfun, variation};
use bvc_core::{GridSpec, SampledField};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn pyerr(e: bvc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Grid {
    inner: GridSpec,
}

#[pymethods]
impl Grid {
    #[new]
    fn new(d: usize, m: usize, box_len: f64) -> PyResult<Grid> {
        Ok(Grid { inner: GridSpec::new(d, m, box_len).map_err(pyerr)? })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn box_len(&self) -> f64 {
        self.inner.box_len()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn cell_width(&self) -> f64 {
        self.inner.cell_width()
    }

    fn cell_volume(&self) -> f64 {
        self.inner.cell_volume()
    }

    fn coords(&self, flat: usize) -> Vec<f64> {
        self.inner.coords(flat)[..self.inner.d()].to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(d={}, m={}, box_len={})",
            self.inner.d(),
            self.inner.m(),
            self.inner.box_len()
        )
    }
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Field {
    inner: SampledField,
}

#[pymethods]
impl Field {
    #[staticmethod]
    fn zeros(grid: &Grid) -> Field {
        Field { inner: SampledField::zeros(grid.inner) }
    }

    #[staticmethod]
    fn from_values(grid: &Grid, values: Vec<f64>) -> PyResult<Field> {
        Ok(Field { inner: SampledField::new(grid.inner, values).map_err(pyerr)? })
    }

    /// Random real field with unit-normal Fourier coefficients on modes
    /// within ±max_freq; fixed by the seed alone.
    #[staticmethod]
    fn band_limited(grid: &Grid, seed: u64, max_freq: usize) -> PyResult<Field> {
        Ok(Field {
            inner: rng::band_limited_field(&grid.inner, seed, max_freq).map_err(pyerr)?,
        })
    }

    fn grid(&self) -> Grid {
        Grid { inner: *self.inner.grid() }
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// self * a + other * b, elementwise.
    fn axpy(&self, a: f64, other: &Field, b: f64) -> PyResult<Field> {
        Ok(Field { inner: self.inner.axpy(a, &other.inner, b).map_err(pyerr)? })
    }

    fn sup(&self) -> f64 {
        self.inner.values().iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid();
        format!("Field(d={}, m={}, box_len={})", g.d(), g.m(), g.box_len())
    }
}

#[pyclass(name = "Potential", skip_from_py_object)]
#[derive(Clone)]
struct PyPotential {
    inner: potential::Potential,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn constant(c: f64, n: u32, q0: f64) -> PyResult<PyPotential> {
        Ok(PyPotential { inner: potential::Potential::constant(c, n, q0).map_err(pyerr)? })
    }

    #[staticmethod]
    fn power(a: f64, n: u32, q0: f64) -> PyResult<PyPotential> {
        Ok(PyPotential { inner: potential::Potential::power(a, n, q0).map_err(pyerr)? })
    }

    #[staticmethod]
    fn power_with_coeff(a: f64, coeff: f64, n: u32, q0: f64) -> PyResult<PyPotential> {
        Ok(PyPotential {
            inner: potential::Potential::power_with_coeff(a, coeff, n, q0).map_err(pyerr)?,
        })
    }

    #[staticmethod]
    fn periodic_bump(amplitude: f64, frequency: f64, n: u32, q0: f64) -> PyResult<PyPotential> {
        Ok(PyPotential {
            inner: potential::Potential::periodic_bump(amplitude, frequency, n, q0)
                .map_err(pyerr)?,
        })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn q0(&self) -> f64 {
        self.inner.q0()
    }

    fn eval(&self, x: Vec<f64>) -> f64 {
        self.inner.eval(&x)
    }

    fn sample_on(&self, grid: &Grid) -> PyResult<Field> {
        Ok(Field { inner: self.inner.sample_on(grid.inner).map_err(pyerr)? })
    }

    /// (gamma, iterations, flag) with flag one of "converged",
    /// "no-violation", "always-violated".
    #[pyo3(signature = (x, tol = 1e-8))]
    fn critical_radius(&self, x: Vec<f64>, tol: f64) -> PyResult<(f64, u32, String)> {
        let g = potential::critical_radius(&self.inner, &x, tol).map_err(pyerr)?;
        Ok((g.gamma, g.iterations, g.flag.as_str().to_string()))
    }
}

#[pyclass(name = "TimeLadder", skip_from_py_object)]
#[derive(Clone)]
struct PyTimeLadder {
    inner: variation::TimeLadder,
}

#[pymethods]
impl PyTimeLadder {
    #[new]
    fn new(times: Vec<f64>) -> PyResult<PyTimeLadder> {
        Ok(PyTimeLadder { inner: variation::TimeLadder::new(times).map_err(pyerr)? })
    }

    #[staticmethod]
    fn geometric(t_max: f64, ratio: f64, count: usize) -> PyResult<PyTimeLadder> {
        Ok(PyTimeLadder {
            inner: variation::TimeLadder::geometric(t_max, ratio, count).map_err(pyerr)?,
        })
    }

    fn refined(&self) -> PyTimeLadder {
        PyTimeLadder { inner: self.inner.refined() }
    }

    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "PoissonParams", skip_from_py_object)]
#[derive(Clone)]
struct PyPoissonParams {
    inner: engine::PoissonParams,
}

#[pymethods]
impl PyPoissonParams {
    #[new]
    fn new(sigma: f64, nodes: usize) -> PyResult<PyPoissonParams> {
        Ok(PyPoissonParams { inner: engine::PoissonParams::new(sigma, nodes).map_err(pyerr)? })
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.nodes()
    }
}

#[pyclass(name = "MorreyParams", skip_from_py_object)]
#[derive(Clone)]
struct PyMorreyParams {
    inner: norms::MorreyParams,
}

#[pymethods]
impl PyMorreyParams {
    /// lam is the Morrey exponent (a Python keyword in its usual name).
    #[new]
    fn new(p: f64, lam: f64, alpha: f64, n: usize) -> PyResult<PyMorreyParams> {
        Ok(PyMorreyParams { inner: norms::MorreyParams::new(p, lam, alpha, n).map_err(pyerr)? })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }
}

#[pyfunction]
fn g_profile(n: u32, eta: f64) -> PyResult<f64> {
    specfun::g_profile(n, eta).map_err(pyerr)
}

#[pyfunction]
fn g_derivative(n: u32, eta: f64, order: u32) -> PyResult<f64> {
    let q = specfun::ProfileQuery::new(n, eta, order).map_err(pyerr)?;
    specfun::g_derivative(q).map_err(pyerr)
}

#[pyfunction]
fn envelope_bound(n: u32, m: u32, eta: f64) -> f64 {
    specfun::envelope_bound(n, m, eta)
}

#[pyfunction]
fn gamma(x: f64) -> f64 {
    specfun::gamma(x)
}

#[pyfunction]
fn bessel_j(v: f64, z: f64) -> PyResult<f64> {
    specfun::bessel_j(v, z).map_err(pyerr)
}

#[pyfunction]
fn b_eval(n: u32, x_mag: f64, t: f64) -> PyResult<f64> {
    kernel::b_eval(n, x_mag, t).map_err(pyerr)
}

#[pyfunction]
fn b_time_derivative(n: u32, x_mag: f64, t: f64) -> PyResult<f64> {
    kernel::b_time_derivative(n, x_mag, t).map_err(pyerr)
}

#[pyfunction]
fn b_space_gradient(n: u32, x_mag: f64, t: f64) -> PyResult<f64> {
    kernel::b_space_gradient(n, x_mag, t).map_err(pyerr)
}

#[pyfunction]
fn biharmonic_step(f: &Field, t: f64) -> PyResult<Field> {
    Ok(Field { inner: engine::biharmonic_step(&f.inner, t).map_err(pyerr)? })
}

#[pyfunction]
fn schrodinger4_evolve(f: &Field, v: &Field, t: f64, substeps: usize) -> PyResult<Field> {
    Ok(Field { inner: engine::schrodinger4_evolve(&f.inner, &v.inner, t, substeps).map_err(pyerr)? })
}

#[pyfunction]
fn dense_evolve(f: &Field, v: &Field, t: f64) -> PyResult<Field> {
    Ok(Field { inner: engine::dense_evolve(&f.inner, &v.inner, t).map_err(pyerr)? })
}

#[pyfunction]
fn poisson_apply(f: &Field, v: &Field, t: f64, params: &PyPoissonParams) -> PyResult<Field> {
    Ok(Field { inner: engine::poisson_apply(&f.inner, &v.inner, t, &params.inner).map_err(pyerr)? })
}

#[pyfunction]
fn duhamel_residual(f: &Field, v: &Field, t: f64, s_nodes: usize) -> PyResult<f64> {
    engine::duhamel_residual(&f.inner, &v.inner, t, s_nodes).map_err(pyerr)
}

#[pyfunction]
fn gauss_laguerre(nodes: usize, alpha: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    engine::gauss_laguerre_generalized(nodes, alpha).map_err(pyerr)
}

#[pyfunction]
fn rho_variation(ladder: &PyTimeLadder, samples: Vec<f64>, rho: f64) -> PyResult<f64> {
    let params = variation::VariationParams::new(rho).map_err(pyerr)?;
    variation::rho_variation_seminorm(&ladder.inner, &samples, params).map_err(pyerr)
}

#[pyfunction]
fn brute_variation(ladder: &PyTimeLadder, samples: Vec<f64>, rho: f64) -> PyResult<f64> {
    let params = variation::VariationParams::new(rho).map_err(pyerr)?;
    variation::brute_force_seminorm(&ladder.inner, &samples, params).map_err(pyerr)
}

/// Pointwise rho-variation over precomputed snapshots, one per ladder time,
/// listed in ladder order.
#[pyfunction]
fn variation_field(fields: Vec<PyRef<Field>>, ladder: &PyTimeLadder, rho: f64) -> PyResult<Field> {
    if fields.len() != ladder.inner.len() {
        return Err(PyValueError::new_err(format!(
            "{} fields for a ladder of {} times",
            fields.len(),
            ladder.inner.len()
        )));
    }
    let params = variation::VariationParams::new(rho).map_err(pyerr)?;
    let mut next = 0usize;
    let inner = variation::variation_field(
        &mut |_t| {
            let f = fields[next].inner.clone();
            next += 1;
            Ok(f)
        },
        &ladder.inner,
        params,
    )
    .map_err(pyerr)?;
    Ok(Field { inner })
}

#[pyfunction]
fn lp_norm(f: &Field, p: f64) -> PyResult<f64> {
    norms::lp_norm(&f.inner, p).map_err(pyerr)
}

#[pyfunction]
fn morrey_norm(f: &Field, params: &PyMorreyParams) -> PyResult<f64> {
    norms::morrey_norm(&f.inner, &params.inner).map_err(pyerr)
}

#[pyfunction]
fn maximal_function(f: &Field, radius_count: usize) -> PyResult<Field> {
    Ok(Field { inner: norms::maximal_function(&f.inner, radius_count).map_err(pyerr)? })
}

/// Critical radius at every grid point, as (gamma, flag) pairs in flat order.
#[pyfunction]
fn gamma_table(v: &PyPotential, grid: &Grid, tol: f64) -> PyResult<Vec<(f64, String)>> {
    let table = potential::gamma_table(&v.inner, &grid.inner, tol).map_err(pyerr)?;
    Ok(table.into_iter().map(|g| (g.gamma, g.flag.as_str().to_string())).collect())
}

#[pyfunction]
fn trial_seed(master: u64, index: u64) -> u64 {
    rng::trial_seed(master, index)
}

#[pyfunction]
fn default_band(grid: &Grid) -> usize {
    rng::default_band(&grid.inner)
}

#[pymodule]
fn bvc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("A1", specfun::A1)?;
    m.add_class::<Grid>()?;
    m.add_class::<Field>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyTimeLadder>()?;
    m.add_class::<PyPoissonParams>()?;
    m.add_class::<PyMorreyParams>()?;
    m.add_function(wrap_pyfunction!(g_profile, m)?)?;
    m.add_function(wrap_pyfunction!(g_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(b_eval, m)?)?;
    m.add_function(wrap_pyfunction!(b_time_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(b_space_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(biharmonic_step, m)?)?;
    m.add_function(wrap_pyfunction!(schrodinger4_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(dense_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_apply, m)?)?;
    m.add_function(wrap_pyfunction!(duhamel_residual, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_laguerre, m)?)?;
    m.add_function(wrap_pyfunction!(rho_variation, m)?)?;
    m.add_function(wrap_pyfunction!(brute_variation, m)?)?;
    m.add_function(wrap_pyfunction!(variation_field, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(morrey_norm, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_function, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_table, m)?)?;
    m.add_function(wrap_pyfunction!(trial_seed, m)?)?;
    m.add_function(wrap_pyfunction!(default_band, m)?)?;
    Ok(())
}
