//! Python bindings for porowave.

use std::path::PathBuf;

use nalgebra::Vector3;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use porowave::harness::{self, cases, SimulationConfig};
use porowave::limiter::StrengthRatio;
use porowave::materials::{rotation_from_angles, Material, PoroelasticBase};
use porowave::state::FIELD_NAMES;
use porowave::system::{eigendecompose, Medium};

fn err(e: porowave::Error) -> PyErr {
    match e {
        porowave::Error::Config(_) | porowave::Error::InvalidCase(_) | porowave::Error::InvalidParameter(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn ratio_from(name: &str) -> PyResult<StrengthRatio> {
    match name {
        "classical" => Ok(StrengthRatio::Classical),
        "e-shear" => Ok(StrengthRatio::EShear),
        "e-full" => Ok(StrengthRatio::EFull),
        _ => Err(PyValueError::new_err(format!("unknown strength ratio {name:?}"))),
    }
}

/// Right-going wave families and speeds of the sandstone along `direction`,
/// principal axes rotated by yaw/pitch/roll in degrees.
#[pyfunction]
#[pyo3(signature = (direction, axes_deg = [0.0, 0.0, 0.0], viscous = true))]
fn sandstone_speeds(direction: [f64; 3], axes_deg: [f64; 3], viscous: bool) -> PyResult<Vec<(String, f64)>> {
    let mut base = PoroelasticBase::sandstone();
    if !viscous {
        base = base.inviscid();
    }
    let [y, p, r] = axes_deg.map(f64::to_radians);
    let n = Vector3::from(direction);
    if n.norm() == 0.0 {
        return Err(PyValueError::new_err("direction must be non-zero"));
    }
    let medium = Medium::new(0, Material::poroelastic(&base).map_err(err)?, rotation_from_angles(y, p, r)).map_err(err)?;
    let basis = eigendecompose(&medium, &n).map_err(err)?;
    Ok(basis
        .right_going()
        .map(|w| (w.label.family.name().to_string(), w.speed))
        .collect())
}

#[pyfunction]
fn fit_rate(resolutions: Vec<usize>, errors: Vec<f64>) -> Option<f64> {
    harness::fit_rate(&resolutions, &errors)
}

/// A run configuration.
#[pyclass(name = "Config")]
#[derive(Clone)]
struct PyConfig {
    inner: SimulationConfig,
}

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        SimulationConfig::from_toml(text).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        SimulationConfig::load(&path).map(|inner| Self { inner }).map_err(err)
    }

    /// Plane-wave case `id` on an `n³` grid.
    #[staticmethod]
    fn case(id: usize, n: usize) -> PyResult<Self> {
        cases::build_case(id, n).map(|inner| Self { inner }).map_err(err)
    }

    /// Tilted-grid limiter problem with the named strength ratio.
    #[staticmethod]
    fn limiter_case(n: usize, ratio: &str) -> PyResult<Self> {
        cases::build_limiter_case(n, ratio_from(ratio)?)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (dims, viscous = true))]
    fn demo(dims: [usize; 3], viscous: bool) -> PyResult<Self> {
        cases::build_demo(dims, viscous).map(|inner| Self { inner }).map_err(err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(err)
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }

    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.grid.dims
    }
}

/// A prepared simulation that can be stepped from Python.
#[pyclass(name = "Simulation", unsendable)]
struct PySimulation {
    sim: porowave::solver::Simulation,
    exact: Option<porowave::planewave::PlaneWaveSolution>,
    steps: usize,
    t_end: f64,
}

#[pymethods]
impl PySimulation {
    #[new]
    #[pyo3(signature = (config, viscous = None))]
    fn new(config: &PyConfig, viscous: Option<bool>) -> PyResult<Self> {
        let prepared = harness::prepare(&config.inner).map_err(err)?;
        let sim = prepared
            .simulation(viscous.unwrap_or(config.inner.viscous))
            .map_err(err)?;
        Ok(Self {
            sim,
            exact: prepared.exact,
            steps: prepared.steps,
            t_end: config.inner.t_end,
        })
    }

    /// Advances `n` steps.
    #[pyo3(signature = (n = 1))]
    fn advance(&mut self, n: usize) -> PyResult<()> {
        for _ in 0..n {
            self.sim.advance().map_err(err)?;
        }
        Ok(())
    }

    /// Advances to the configured end time.
    fn run(&mut self) -> PyResult<()> {
        let t_end = self.t_end;
        self.sim.run_until(t_end, |_| Ok(())).map_err(err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.sim.t
    }

    #[getter]
    fn step(&self) -> usize {
        self.sim.step
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.sim.dt
    }

    #[getter]
    fn total_steps(&self) -> usize {
        self.steps
    }

    fn total_energy(&self) -> f64 {
        self.sim.total_energy()
    }

    fn symmetry_error(&self) -> f64 {
        harness::symmetry_error(&self.sim)
    }

    /// Relative `(l1, max)` errors against the analytic plane wave.
    fn errors(&self) -> PyResult<(f64, f64)> {
        let exact = self
            .exact
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("no analytic solution for this configuration"))?;
        let e = harness::compute_errors(&self.sim, exact);
        Ok((e.l1, e.max))
    }

    /// State of interior cell `(i, j, k)`.
    fn state(&self, i: usize, j: usize, k: usize) -> PyResult<Vec<f64>> {
        let g = &self.sim.disc.grid;
        if i >= g.dims[0] || j >= g.dims[1] || k >= g.dims[2] {
            return Err(PyValueError::new_err(format!("cell ({i}, {j}, {k}) outside {:?}", g.dims)));
        }
        let idx = g.index(i + g.ghost, j + g.ghost, k + g.ghost);
        Ok(self.sim.q[idx].iter().copied().collect())
    }

    /// Interior cell states as a flat list in `(k, j, i, field)` order.
    fn interior(&self) -> Vec<f64> {
        let g = &self.sim.disc.grid;
        g.interior_indices()
            .flat_map(|c| self.sim.q[c].iter().copied().collect::<Vec<_>>())
            .collect()
    }

    fn write_vtk(&self, path: PathBuf) -> PyResult<()> {
        harness::output::write_vtk(&self.sim, &path).map_err(err)
    }

    fn write_csv_slice(&self, layer: usize, path: PathBuf) -> PyResult<()> {
        harness::output::write_csv_slice(&self.sim, layer, &path).map_err(err)
    }

    fn solver_count(&self) -> usize {
        self.sim.disc.solvers.len()
    }
}

/// Convergence study of case `id`; returns `(l1, max, rate_l1, rate_max)`.
#[pyfunction]
fn convergence(id: usize, resolutions: Vec<usize>) -> PyResult<(Vec<f64>, Vec<f64>, Option<f64>, Option<f64>)> {
    let r = harness::run_convergence(id, &resolutions).map_err(err)?;
    Ok((r.l1, r.max, r.rate_l1, r.rate_max))
}

#[pymodule]
#[pyo3(name = "porowave")]
fn porowave_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FIELD_NAMES", FIELD_NAMES.to_vec())?;
    m.add("CASE_COUNT", cases::CASE_COUNT)?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(sandstone_speeds, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    Ok(())
}
