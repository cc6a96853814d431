//! Problem setup, error norms, convergence and limiter studies, and the
//! demonstration run.

pub mod cases;
pub mod config;
pub mod output;

use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::grid::{GridMapping, MappedGrid};
use crate::limiter::StrengthRatio;
use crate::materials::{rotation_from_angles, rotation_from_surface_normal, AxesRotation, Material};
use crate::planewave::{build_plane_wave, PlaneWaveSolution, PlaneWaveSpec};
use crate::solver::{step_count, Discretization, Simulation};
use crate::state::{self, StateVector, NVARS};

pub use cases::{build_case, build_demo, build_limiter_case, CaseDefinition};
pub use config::{InitialCondition, MaterialLayout, OutputFormat, SimulationConfig};

/// A configuration with its discretization built and time step chosen.
pub struct Prepared {
    pub config: SimulationConfig,
    pub disc: Arc<Discretization>,
    pub exact: Option<PlaneWaveSolution>,
    pub dt: f64,
    pub steps: usize,
    /// Interior cell limiting the time step.
    pub limiting_cell: [usize; 3],
}

fn materials_and_assignment(
    config: &SimulationConfig,
    grid: &MappedGrid,
) -> Result<(Vec<Material>, Vec<(usize, AxesRotation)>, f64)> {
    match &config.materials {
        MaterialLayout::Homogeneous { material, axes_deg } => {
            let [y, p, r] = axes_deg.map(f64::to_radians);
            let rot = rotation_from_angles(y, p, r);
            Ok((vec![material.build()?], vec![(0, rot); grid.cell_count()], 1.0))
        }
        MaterialLayout::Bed { rock, eta_d } => {
            let GridMapping::UndulatingBed(bed) = &grid.mapping else {
                return Err(Error::Config("bed materials need an undulating-bed grid".into()));
            };
            let materials = vec![Material::poroelastic(rock)?, Material::Fluid(rock.pore_fluid()?)];
            let mut assign = Vec::with_capacity(grid.cell_count());
            for idx in 0..grid.cell_count() {
                let xi = grid.cell_xi(idx);
                if xi[2] < bed.xi_int {
                    // Axes from the surface above the column centre, so a
                    // whole column shares one medium.
                    let (x, y) = (xi[0] * bed.lx / 2.0, xi[1] * bed.ly / 2.0);
                    let rot = rotation_from_surface_normal(&bed.surface_normal(x, y))?;
                    assign.push((0, rot));
                } else {
                    assign.push((1, AxesRotation::identity()));
                }
            }
            Ok((materials, assign, *eta_d))
        }
    }
}

fn plane_wave_for(config: &SimulationConfig, materials: &[Material]) -> Result<Option<PlaneWaveSolution>> {
    let InitialCondition::PlaneWave {
        ell,
        frequency_hz,
        family,
        polarization,
    } = &config.initial
    else {
        return Ok(None);
    };
    let MaterialLayout::Homogeneous { axes_deg, .. } = &config.materials else {
        return Err(Error::Config("plane waves need a homogeneous material".into()));
    };
    let [y, p, r] = axes_deg.map(f64::to_radians);
    build_plane_wave(&PlaneWaveSpec {
        ell: Vector3::from(*ell).normalize(),
        omega: 2.0 * std::f64::consts::PI * frequency_hz,
        family: (*family).into(),
        polarization: polarization.map(|s| Vector3::from(s).normalize()),
        material: materials[0].clone(),
        rotation: rotation_from_angles(y, p, r),
    })
    .map(Some)
}

pub fn prepare(config: &SimulationConfig) -> Result<Prepared> {
    config.validate()?;
    let grid = MappedGrid::build(config.grid.mapping, config.grid.dims)?;
    let (materials, assign, eta_d) = materials_and_assignment(config, &grid)?;
    let exact = plane_wave_for(config, &materials)?;
    let disc = Discretization::new(grid, &materials, |i| assign[i], eta_d)?;
    let (dt, limiting_cell) = disc.compute_dt(config.cfl);
    let steps = step_count(config.t_end, dt);
    Ok(Prepared {
        config: config.clone(),
        disc: Arc::new(disc),
        exact,
        dt,
        steps,
        limiting_cell,
    })
}

impl Prepared {
    /// A simulation at t = 0 holding the initial condition.
    pub fn simulation(&self, viscous: bool) -> Result<Simulation> {
        let c = &self.config;
        let mut sim = Simulation::new(self.disc.clone(), self.dt, c.limiter, c.boundary, self.exact)?;
        sim.dissipation = viscous;
        match &c.initial {
            InitialCondition::Zero => {}
            InitialCondition::PlaneWave { .. } => sim.set_exact_state()?,
            InitialCondition::Pulse {
                amplitude,
                frequency_hz,
                offset_wavelengths,
            } => {
                let (MaterialLayout::Bed { rock, .. }, GridMapping::UndulatingBed(bed)) =
                    (&c.materials, &c.grid.mapping)
                else {
                    return Err(Error::Config("pulse needs the bed layout".into()));
                };
                let fluid = rock.pore_fluid()?;
                let wavelength = fluid.sound_speed / frequency_hz;
                let center = bed.z0 + bed.hx + bed.hy + offset_wavelengths * wavelength;
                let disc = self.disc.clone();
                let centroids = &disc.grid.centroid;
                for (i, q) in sim.q.iter_mut().enumerate() {
                    if !disc.medium(i).is_fluid() {
                        continue;
                    }
                    let (p, qz) =
                        cases::pulse(centroids[i].z, center, wavelength, *amplitude, fluid.impedance);
                    q[state::P] = p;
                    q[state::Q3] = qz;
                }
            }
        }
        Ok(sim)
    }

    /// Runs to `t_end`, writing snapshots as configured.
    pub fn run(&self, viscous: bool, out: Option<&Path>) -> Result<Simulation> {
        let mut sim = self.simulation(viscous)?;
        let oc = &self.config.output;
        let dir = out.map(Path::to_path_buf).or_else(|| oc.dir.clone());
        let layer = oc.slice_layer.unwrap_or(self.config.grid.dims[2] / 2);
        let write = |sim: &Simulation| -> Result<()> {
            let Some(dir) = &dir else { return Ok(()) };
            for f in &oc.formats {
                match f {
                    OutputFormat::Vtk => output::write_vtk(sim, &dir.join(output::snapshot_name(sim.step)))?,
                    OutputFormat::CsvSlice => output::write_csv_slice(
                        sim,
                        layer,
                        &dir.join(format!("slice_{}.csv", sim.step)),
                    )?,
                }
            }
            Ok(())
        };
        write(&sim)?;
        let steps = self.steps;
        sim.run_until(self.config.t_end, |s| {
            if s.step == steps || (oc.every > 0 && s.step % oc.every == 0) {
                write(s)?;
            }
            Ok(())
        })?;
        Ok(sim)
    }
}

/// Relative errors of a state against the analytic solution, stacked over
/// all components and per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorNorms {
    /// `Σ V|e| / Σ V|Q|` over interior cells and all components.
    pub l1: f64,
    /// `max|e| / max|Q|` over interior cells and all components.
    pub max: f64,
    pub l1_component: [f64; NVARS],
    pub max_component: [f64; NVARS],
}

pub fn compute_errors(sim: &Simulation, exact: &PlaneWaveSolution) -> ErrorNorms {
    let g = &sim.disc.grid;
    let mut err1 = [0.0; NVARS];
    let mut ref1 = [0.0; NVARS];
    let mut errm = [0.0f64; NVARS];
    let mut refm = [0.0f64; NVARS];
    for i in g.interior_indices() {
        let truth = exact.evaluate(&g.centroid[i], sim.t);
        let v = g.volume[i];
        for m in 0..NVARS {
            let e = (sim.q[i][m] - truth[m]).abs();
            err1[m] += v * e;
            ref1[m] += v * truth[m].abs();
            errm[m] = errm[m].max(e);
            refm[m] = refm[m].max(truth[m].abs());
        }
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    ErrorNorms {
        l1: ratio(err1.iter().sum(), ref1.iter().sum()),
        max: ratio(errm.iter().cloned().fold(0.0, f64::max), refm.iter().cloned().fold(0.0, f64::max)),
        l1_component: std::array::from_fn(|m| ratio(err1[m], ref1[m])),
        max_component: std::array::from_fn(|m| ratio(errm[m], refm[m])),
    }
}

/// Least-squares convergence rate `−d log e / d log N`.
pub fn fit_rate(resolutions: &[usize], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = resolutions
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(n, e)| ((*n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub label: String,
    pub resolutions: Vec<usize>,
    pub l1: Vec<f64>,
    pub max: Vec<f64>,
    pub rate_l1: Option<f64>,
    pub rate_max: Option<f64>,
}

impl ErrorReport {
    fn new(label: String, resolutions: &[usize], norms: &[ErrorNorms]) -> Self {
        let l1: Vec<f64> = norms.iter().map(|n| n.l1).collect();
        let max: Vec<f64> = norms.iter().map(|n| n.max).collect();
        Self {
            label,
            resolutions: resolutions.to_vec(),
            rate_l1: fit_rate(resolutions, &l1),
            rate_max: fit_rate(resolutions, &max),
            l1,
            max,
        }
    }
}

/// Runs a prepared plane-wave problem to its end time and measures errors.
pub fn run_and_measure(config: &SimulationConfig) -> Result<ErrorNorms> {
    let prepared = prepare(config)?;
    let exact = prepared
        .exact
        .ok_or_else(|| Error::Config("error norms need a plane-wave problem".into()))?;
    let sim = prepared.run(config.viscous, None)?;
    let norms = compute_errors(&sim, &exact);
    log::info!(
        "N={:?} steps={} dt={:.4e}: l1={:.4e} max={:.4e}",
        config.grid.dims,
        prepared.steps,
        prepared.dt,
        norms.l1,
        norms.max
    );
    Ok(norms)
}

pub fn run_convergence(case: usize, resolutions: &[usize]) -> Result<ErrorReport> {
    let norms = resolutions
        .iter()
        .map(|&n| {
            build_case(case, n)
                .and_then(|c| run_and_measure(&c))
                .map_err(|e| match e {
                    Error::Case { .. } => e,
                    other => Error::Case {
                        case,
                        source: Box::new(other),
                    },
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::new(case.to_string(), resolutions, &norms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimiterComparison {
    pub classical: ErrorReport,
    pub e_full: ErrorReport,
}

pub fn run_limiter_comparison(resolutions: &[usize]) -> Result<LimiterComparison> {
    let run = |ratio: StrengthRatio, label: &str| -> Result<ErrorReport> {
        let norms = resolutions
            .iter()
            .map(|&n| build_limiter_case(n, ratio).and_then(|c| run_and_measure(&c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ErrorReport::new(label.to_string(), resolutions, &norms))
    };
    Ok(LimiterComparison {
        classical: run(StrengthRatio::Classical, "tilt-classical")?,
        e_full: run(StrengthRatio::EFull, "tilt-e-full")?,
    })
}

/// State with x and y exchanged, components mapped accordingly.
pub fn swap_xy(q: &StateVector) -> StateVector {
    use state::*;
    let mut s = *q;
    s.swap_rows(TAU11, TAU22);
    s.swap_rows(TAU23, TAU13);
    s.swap_rows(V1, V2);
    s.swap_rows(Q1, Q2);
    s
}

/// `max |Q(i,j,k) − swap(Q(j,i,k))| / max |Q|` over interior cells.
pub fn symmetry_error(sim: &Simulation) -> f64 {
    let g = &sim.disc.grid;
    if g.dims[0] != g.dims[1] {
        return f64::INFINITY;
    }
    let gw = g.ghost;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in gw..gw + g.dims[2] {
        for j in gw..gw + g.dims[1] {
            for i in gw..gw + g.dims[0] {
                let a = sim.q[g.index(i, j, k)];
                let b = swap_xy(&sim.q[g.index(j, i, k)]);
                diff = diff.max((a - b).amax());
                scale = scale.max(a.amax());
            }
        }
    }
    if scale > 0.0 {
        diff / scale
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoRun {
    pub final_energy: f64,
    /// Energy in the rock cells at the end.
    pub rock_energy: f64,
    pub symmetry_error: f64,
    /// Largest |p| on the slice layer below the bed.
    pub slice_peak_pressure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutcome {
    pub dims: [usize; 3],
    pub dt: f64,
    pub steps: usize,
    pub solver_count: usize,
    /// Whether the time step is limited by a rock cell.
    pub limited_in_rock: bool,
    pub inviscid: DemoRun,
    pub viscous: DemoRun,
}

fn demo_run(prepared: &Prepared, viscous: bool, out: Option<&Path>) -> Result<DemoRun> {
    let sim = prepared.run(viscous, out)?;
    let g = &sim.disc.grid;
    let density = sim.energy_density();
    let rock_energy = g
        .interior_indices()
        .filter(|&i| !sim.disc.medium(i).is_fluid())
        .map(|i| density[i] * g.volume[i])
        .sum();
    let layer = cases::demo_slice_layer(g.dims[2]) + g.ghost;
    let mut slice_peak_pressure: f64 = 0.0;
    for j in g.ghost..g.ghost + g.dims[1] {
        for i in g.ghost..g.ghost + g.dims[0] {
            slice_peak_pressure = slice_peak_pressure.max(sim.q[g.index(i, j, layer)][state::P].abs());
        }
    }
    Ok(DemoRun {
        final_energy: sim.total_energy(),
        rock_energy,
        symmetry_error: symmetry_error(&sim),
        slice_peak_pressure,
    })
}

/// Runs the demonstration inviscid and viscous on one shared
/// discretization. Snapshots go to `out/inviscid` and `out/viscous`.
pub fn run_demo(dims: [usize; 3], out: Option<&Path>) -> Result<DemoOutcome> {
    let prepared = prepare(&build_demo(dims, true)?)?;
    let c = prepared.limiting_cell;
    let limited_in_rock = !prepared.disc.medium(prepared.disc.grid.index(c[0], c[1], c[2])).is_fluid();
    let inviscid = demo_run(&prepared, false, out.map(|d| d.join("inviscid")).as_deref())?;
    let viscous = demo_run(&prepared, true, out.map(|d| d.join("viscous")).as_deref())?;
    Ok(DemoOutcome {
        dims,
        dt: prepared.dt,
        steps: prepared.steps,
        solver_count: prepared.disc.solvers.len(),
        limited_in_rock,
        inviscid,
        viscous,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub cells: usize,
    pub min_volume: f64,
    pub max_volume: f64,
    pub interior_volume: f64,
    /// Largest `|Σ nA|` over interior cells relative to the largest face area.
    pub max_closure: f64,
}

pub fn geometry_check(config: &SimulationConfig) -> Result<GeometryReport> {
    let g = MappedGrid::build(config.grid.mapping, config.grid.dims)?;
    let mut report = GeometryReport {
        cells: g.dims.iter().product(),
        min_volume: f64::INFINITY,
        max_volume: 0.0,
        interior_volume: 0.0,
        max_closure: 0.0,
    };
    for i in g.interior_indices() {
        let v = g.volume[i];
        report.min_volume = report.min_volume.min(v);
        report.max_volume = report.max_volume.max(v);
        report.interior_volume += v;
        let amax = (0..3)
            .flat_map(|d| [g.faces[d][i].area, g.faces[d][i + g.stride(d)].area])
            .fold(0.0, f64::max);
        report.max_closure = report.max_closure.max(g.closure_residual(i).norm() / amax);
    }
    Ok(report)
}
