//! Time stepping: Strang-split viscous source steps around dimensionally
//! split sweeps with limited second-order corrections.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MappedGrid;
use crate::limiter::{phi, theta_face, LimiterChoice, LimiterFunction};
use crate::materials::{AxesRotation, Material};
use crate::planewave::PlaneWaveSolution;
use crate::riemann::{FaceSolver, MAX_WAVES};
use crate::state::{self, StateVector};
use crate::system::Medium;

/// Marker for faces on the outer edge of the ghost layer, which are never
/// solved.
const NO_SOLVER: u32 = u32::MAX;

/// Pencils handed to the thread pool per batch.
const PENCIL_BATCH: usize = 512;

/// Face normals closer than this (per component) share a solver.
const NORMAL_QUANTUM: f64 = (1u64 << 40) as f64;

/// Grid, media and precomputed face solvers; independent of the state and
/// of whether dissipation is switched on.
#[derive(Debug)]
pub struct Discretization {
    pub grid: MappedGrid,
    pub media: Vec<Medium>,
    /// Index into `media` for every extended cell.
    pub cell_medium: Vec<u32>,
    pub solvers: Vec<FaceSolver>,
    /// `face_solver[d][cell]` is the solver of the low-`d` face of `cell`.
    pub face_solver: [Vec<u32>; 3],
    /// Interface discharge efficiency between different materials.
    pub eta_d: f64,
}

impl Discretization {
    /// `assign(cell)` gives the material index (into `materials`) and
    /// principal axes of an extended cell.
    pub fn new(
        grid: MappedGrid,
        materials: &[Material],
        assign: impl Fn(usize) -> (usize, AxesRotation),
        eta_d: f64,
    ) -> Result<Self> {
        let mut media: Vec<Medium> = Vec::new();
        let mut media_key: HashMap<(usize, [u64; 9]), u32> = HashMap::new();
        let mut cell_medium = Vec::with_capacity(grid.cell_count());
        for idx in 0..grid.cell_count() {
            let (id, rot) = assign(idx);
            let material = materials.get(id).ok_or_else(|| {
                Error::Config(format!("cell {idx} assigned unknown material {id}"))
            })?;
            let key = (id, std::array::from_fn(|i| rot.matrix.as_slice()[i].to_bits()));
            let m = match media_key.get(&key) {
                Some(&m) => m,
                None => {
                    let m = media.len() as u32;
                    media.push(Medium::new(id, material.clone(), rot)?);
                    media_key.insert(key, m);
                    m
                }
            };
            cell_medium.push(m);
        }

        let mut solvers = Vec::new();
        let mut solver_key: HashMap<(u32, u32, [i64; 3]), u32> = HashMap::new();
        let mut face_solver: [Vec<u32>; 3] = std::array::from_fn(|_| vec![NO_SOLVER; grid.cell_count()]);
        for d in 0..3 {
            let stride = grid.stride(d);
            for idx in 0..grid.cell_count() {
                if grid.coords(idx)[d] == 0 {
                    continue;
                }
                let (ml, mr) = (cell_medium[idx - stride], cell_medium[idx]);
                let n = grid.faces[d][idx].normal;
                let key = (ml, mr, n.map(|c| (c * NORMAL_QUANTUM).round() as i64).into());
                let id = match solver_key.get(&key) {
                    Some(&s) => s,
                    None => {
                        let (left, right) = (&media[ml as usize], &media[mr as usize]);
                        // Same material in different axes: welded, open pores.
                        let eta = if left.material_id == right.material_id { 1.0 } else { eta_d };
                        let fs = FaceSolver::new(left, right, &n, eta).map_err(|e| match e {
                            Error::InterfaceSolveFailed { reason, .. } => Error::InterfaceSolveFailed {
                                face: format!("direction {d}, cell {:?}", grid.coords(idx)),
                                reason,
                            },
                            other => other,
                        })?;
                        let s = solvers.len() as u32;
                        solvers.push(fs);
                        solver_key.insert(key, s);
                        s
                    }
                };
                face_solver[d][idx] = id;
            }
        }
        log::info!(
            "discretization: {} cells, {} media, {} face solvers",
            grid.cell_count(),
            media.len(),
            solvers.len()
        );
        Ok(Self {
            grid,
            media,
            cell_medium,
            solvers,
            face_solver,
            eta_d,
        })
    }

    /// Single medium everywhere.
    pub fn homogeneous(grid: MappedGrid, material: Material, rotation: AxesRotation) -> Result<Self> {
        Self::new(grid, &[material], |_| (0, rotation), 1.0)
    }

    pub fn solver(&self, d: usize, idx: usize) -> Option<&FaceSolver> {
        match self.face_solver[d][idx] {
            NO_SOLVER => None,
            s => Some(&self.solvers[s as usize]),
        }
    }

    pub fn medium(&self, idx: usize) -> &Medium {
        &self.media[self.cell_medium[idx] as usize]
    }

    /// Largest stable step for `cfl`, and the interior cell that limits it.
    pub fn compute_dt(&self, cfl: f64) -> (f64, [usize; 3]) {
        let g = &self.grid;
        let (rate, idx) = g
            .interior_indices()
            .map(|idx| {
                let mut worst: f64 = 0.0;
                for d in 0..3 {
                    let hi = idx + g.stride(d);
                    let speed = [idx, hi]
                        .iter()
                        .filter_map(|&f| self.solver(d, f))
                        .map(|s| s.max_speed)
                        .fold(0.0, f64::max);
                    let area = g.faces[d][idx].area.max(g.faces[d][hi].area);
                    worst = worst.max(speed * area / g.volume[idx]);
                }
                (worst, idx)
            })
            .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
        (cfl / rate, g.coords(idx))
    }

    /// Largest CFL number of a step `dt`.
    pub fn cfl_number(&self, dt: f64) -> f64 {
        dt / self.compute_dt(1.0).0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// Ghost cells hold the analytic solution at their centroids.
    AnalyticFill,
    /// Mirror across an x = const plane.
    ReflectX,
    /// Mirror across a y = const plane.
    ReflectY,
    /// Copy of the nearest interior cell.
    Extrapolate0,
}

impl BoundaryCondition {
    fn negated(self) -> &'static [usize] {
        use state::*;
        match self {
            BoundaryCondition::ReflectX => &[TAU13, TAU12, V1, Q1],
            BoundaryCondition::ReflectY => &[TAU23, TAU12, V2, Q2],
            _ => &[],
        }
    }

    fn is_copy(self) -> bool {
        self != BoundaryCondition::AnalyticFill
    }
}

/// Boundary condition on the low and high side of each direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub faces: [[BoundaryCondition; 2]; 3],
}

impl BoundarySpec {
    pub fn uniform(bc: BoundaryCondition) -> Self {
        Self { faces: [[bc; 2]; 3] }
    }

    pub fn needs_analytic(&self) -> bool {
        self.faces.iter().flatten().any(|b| *b == BoundaryCondition::AnalyticFill)
    }
}

/// Exact update of the viscous source over a fixed step for one medium:
/// `q ← M_q q`, `v ← v + M_v q`, in global axes.
#[derive(Debug, Clone, Copy)]
struct SourceOperator {
    flow: Matrix3<f64>,
    velocity: Matrix3<f64>,
}

fn source_operator(medium: &Medium, dt: f64) -> Option<SourceOperator> {
    let Material::Poroelastic(d) = &medium.material else {
        return None;
    };
    if d.base.viscosity == 0.0 {
        return None;
    }
    let r = medium.rotation.matrix;
    let rates = d.decay_rates();
    let decay = Matrix3::from_diagonal(&Vector3::from_fn(|i, _| (-rates[i] * dt).exp()));
    let flow = r * decay * r.transpose();
    let velocity = (r * (Matrix3::identity() - decay) * r.transpose()) * (d.base.rho_f / d.rho);
    Some(SourceOperator { flow, velocity })
}

fn apply_source(q: &mut StateVector, op: &SourceOperator) {
    let f = state::fluid_flow(q);
    let v = state::solid_velocity(q) + op.velocity * f;
    let f = op.flow * f;
    for i in 0..3 {
        q[state::V1 + i] = v[i];
        q[state::Q1 + i] = f[i];
    }
}

/// Steps of at most `dt` needed to cover `span`; a remainder within
/// round-off of zero does not count as a step.
pub fn step_count(span: f64, dt: f64) -> usize {
    (span / dt - 1e-9).ceil().max(0.0) as usize
}

/// Exact solution of the source ODE over `dt` for one state.
pub fn source_step(q: &StateVector, medium: &Medium, dt: f64) -> StateVector {
    let mut out = *q;
    if let Some(op) = source_operator(medium, dt) {
        apply_source(&mut out, &op);
    }
    out
}

/// State and controls of one simulation.
pub struct Simulation {
    pub disc: Arc<Discretization>,
    pub q: Vec<StateVector>,
    pub t: f64,
    pub step: usize,
    pub dt: f64,
    pub limiter: LimiterChoice,
    pub boundary: BoundarySpec,
    pub exact: Option<PlaneWaveSolution>,
    /// Viscous source steps on or off.
    pub dissipation: bool,
    /// Directions in the order they are swept each step.
    pub sweep_order: [usize; 3],
    half_source: Vec<Option<SourceOperator>>,
}

impl Simulation {
    pub fn new(
        disc: Arc<Discretization>,
        dt: f64,
        limiter: LimiterChoice,
        boundary: BoundarySpec,
        exact: Option<PlaneWaveSolution>,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if boundary.needs_analytic() && exact.is_none() {
            return Err(Error::Config(
                "analytic boundary fill requested without an analytic solution".into(),
            ));
        }
        let n = disc.grid.cell_count();
        let half_source = disc.media.iter().map(|m| source_operator(m, dt / 2.0)).collect();
        Ok(Self {
            disc,
            q: vec![StateVector::zeros(); n],
            t: 0.0,
            step: 0,
            dt,
            limiter,
            boundary,
            exact,
            dissipation: true,
            sweep_order: [0, 1, 2],
            half_source,
        })
    }

    /// Sets every cell, ghosts included, from a function of the centroid.
    pub fn set_state(&mut self, f: impl Fn(&Vector3<f64>) -> StateVector + Sync) {
        let c = &self.disc.grid.centroid;
        self.q.par_iter_mut().enumerate().for_each(|(i, q)| *q = f(&c[i]));
    }

    pub fn set_exact_state(&mut self) -> Result<()> {
        let sol = self
            .exact
            .ok_or_else(|| Error::Config("no analytic solution configured".into()))?;
        let t = self.t;
        self.set_state(|x| sol.evaluate(x, t));
        Ok(())
    }

    /// Fills the ghost layers of every direction, analytic ones at time `t`.
    pub fn fill_ghosts(&mut self, t: f64) {
        for d in 0..3 {
            for side in 0..2 {
                self.fill_side(d, side, t, false);
            }
        }
    }

    fn fill_copy_ghosts(&mut self, d: usize) {
        for side in 0..2 {
            self.fill_side(d, side, self.t, true);
        }
    }

    fn fill_side(&mut self, d: usize, side: usize, t: f64, copy_only: bool) {
        let bc = self.boundary.faces[d][side];
        if copy_only && !bc.is_copy() {
            return;
        }
        let g = &self.disc.grid;
        let (gw, n) = (g.ghost, g.dims[d]);
        let (a, b) = ((d + 1) % 3, (d + 2) % 3);
        for l in 0..gw {
            // Ghost layer l counted outward from the boundary.
            let (ghost, source) = if side == 0 {
                let ghost = gw - 1 - l;
                let src = match bc {
                    BoundaryCondition::Extrapolate0 => gw,
                    _ => gw + l,
                };
                (ghost, src)
            } else {
                let ghost = gw + n + l;
                let src = match bc {
                    BoundaryCondition::Extrapolate0 => gw + n - 1,
                    _ => gw + n - 1 - l,
                };
                (ghost, src)
            };
            for ib in 0..g.ext[b] {
                for ia in 0..g.ext[a] {
                    let mut c = [0; 3];
                    c[d] = ghost;
                    c[a] = ia;
                    c[b] = ib;
                    let gi = g.index(c[0], c[1], c[2]);
                    if bc == BoundaryCondition::AnalyticFill {
                        if let Some(sol) = &self.exact {
                            self.q[gi] = sol.evaluate(&g.centroid[gi], t);
                        }
                        continue;
                    }
                    c[d] = source;
                    let mut v = self.q[g.index(c[0], c[1], c[2])];
                    for &m in bc.negated() {
                        v[m] = -v[m];
                    }
                    self.q[gi] = v;
                }
            }
        }
    }

    /// Half-step viscous source on all cells or on the interior only.
    fn half_source(&mut self, interior_only: bool) {
        if !self.dissipation || self.half_source.iter().all(Option::is_none) {
            return;
        }
        let disc = &self.disc;
        let ops = &self.half_source;
        self.q.par_iter_mut().enumerate().for_each(|(i, q)| {
            if interior_only && !disc.grid.is_interior(i) {
                return;
            }
            if let Some(op) = &ops[disc.cell_medium[i] as usize] {
                apply_source(q, op);
            }
        });
    }

    /// Starting cells of the pencils swept in direction `d`: all transverse
    /// positions in directions not yet swept this step, interior ones in
    /// the directions already swept.
    fn pencils(&self, d: usize) -> Vec<usize> {
        let g = &self.disc.grid;
        let pos = |e: usize| self.sweep_order.iter().position(|&o| o == e).unwrap_or(e);
        let range = |e: usize| -> std::ops::Range<usize> {
            if pos(e) < pos(d) {
                g.ghost..g.ghost + g.dims[e]
            } else {
                0..g.ext[e]
            }
        };
        let (a, b) = match d {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut out = Vec::new();
        for ib in range(b) {
            for ia in range(a) {
                let mut c = [0; 3];
                c[a] = ia;
                c[b] = ib;
                out.push(g.index(c[0], c[1], c[2]));
            }
        }
        out
    }

    /// One sweep in direction `d` over step `dt`.
    pub fn sweep(&mut self, d: usize, dt: f64) {
        self.fill_copy_ghosts(d);
        let pencils = self.pencils(d);
        let stride = self.disc.grid.stride(d);
        for batch in pencils.chunks(PENCIL_BATCH) {
            let updated: Vec<Vec<StateVector>> = batch
                .par_iter()
                .map(|&start| self.pencil_update(d, start, dt))
                .collect();
            for (&start, cells) in batch.iter().zip(updated) {
                for (c, q) in cells.into_iter().enumerate() {
                    self.q[start + (c + 1) * stride] = q;
                }
            }
        }
    }

    /// New values for cells `1..len-1` of one pencil.
    fn pencil_update(&self, d: usize, start: usize, dt: f64) -> Vec<StateVector> {
        let disc = &*self.disc;
        let g = &disc.grid;
        let len = g.ext[d];
        let stride = g.stride(d);
        let idx = |c: usize| start + c * stride;
        let cells: Vec<StateVector> = (0..len).map(|c| self.q[idx(c)]).collect();

        // Face f lies between cells f-1 and f.
        let mut solvers: Vec<&FaceSolver> = Vec::with_capacity(len);
        let mut alpha = vec![[0.0; MAX_WAVES]; len];
        solvers.push(&disc.solvers[disc.face_solver[d][idx(1)] as usize]);
        for f in 1..len {
            let fs = &disc.solvers[disc.face_solver[d][idx(f)] as usize];
            solvers.push(fs);
            alpha[f] = fs.strengths(&cells[f - 1], &cells[f]);
        }

        let mut dq = vec![StateVector::zeros(); len];
        let corrections = self.limiter.function != LimiterFunction::Godunov;
        for f in 1..len {
            let fs = solvers[f];
            let area = g.faces[d][idx(f)].area;
            let a = &alpha[f];
            let v_avg = 0.5 * (g.volume[idx(f - 1)] + g.volume[idx(f)]);
            let mut amdq = StateVector::zeros();
            let mut apdq = StateVector::zeros();
            let mut corr = StateVector::zeros();
            for p in 0..fs.count {
                let s = fs.speeds[p];
                if a[p] == 0.0 || s == 0.0 {
                    continue;
                }
                let r = fs.vectors.column(p);
                if s < 0.0 {
                    amdq += r * (s * a[p]);
                } else {
                    apdq += r * (s * a[p]);
                }
                if corrections && !fs.material_interface {
                    let limit = if self.limiter.needs_ratio() {
                        let up = if s > 0.0 { f - 1 } else { f + 1 };
                        let theta = if up >= 1 && up < len {
                            theta_face(self.limiter.strength_ratio, fs, a, p, solvers[up], &alpha[up])
                        } else {
                            0.0
                        };
                        phi(self.limiter.function, theta)
                    } else {
                        phi(self.limiter.function, 1.0)
                    };
                    let sa = s.abs();
                    corr += r * (0.5 * sa * (1.0 - dt * sa * area / v_avg) * limit * a[p]);
                }
            }
            dq[f] += (apdq - corr) * area;
            dq[f - 1] += (amdq + corr) * area;
        }
        (1..len - 1)
            .map(|c| cells[c] - dq[c] * (dt / g.volume[idx(c)]))
            .collect()
    }

    /// One Strang-split step of length `dt`.
    pub fn advance(&mut self) -> Result<()> {
        self.step_by(self.dt)
    }

    /// One step of length `dt` instead of the nominal step.
    pub fn advance_by(&mut self, dt: f64) -> Result<()> {
        if dt == self.dt {
            return self.advance();
        }
        let ops = self.disc.media.iter().map(|m| source_operator(m, dt / 2.0)).collect();
        let nominal = std::mem::replace(&mut self.half_source, ops);
        let r = self.step_by(dt);
        self.half_source = nominal;
        r
    }

    fn step_by(&mut self, dt: f64) -> Result<()> {
        self.fill_ghosts(self.t);
        self.half_source(false);
        for d in self.sweep_order {
            self.sweep(d, dt);
        }
        self.half_source(true);
        self.t += dt;
        self.step += 1;
        self.check_finite()
    }

    /// Advances to `t_end` in nominal steps, shortening the last one so the
    /// run ends exactly at `t_end`.
    pub fn run_until(&mut self, t_end: f64, mut on_step: impl FnMut(&Simulation) -> Result<()>) -> Result<()> {
        let steps = step_count(t_end - self.t, self.dt);
        for k in 0..steps {
            if k + 1 == steps {
                self.advance_by(t_end - self.t)?;
                self.t = t_end;
            } else {
                self.advance()?;
            }
            on_step(self)?;
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        let g = &self.disc.grid;
        match self
            .q
            .par_iter()
            .enumerate()
            .find_first(|(i, q)| g.is_interior(*i) && !q.iter().all(|x| x.is_finite()))
        {
            Some((i, _)) => Err(Error::NonFinite {
                step: self.step,
                cell: g.coords(i),
            }),
            None => Ok(()),
        }
    }

    /// `Σ V ½ QᵀEQ` over interior cells.
    pub fn total_energy(&self) -> f64 {
        let disc = &*self.disc;
        disc.grid
            .interior_indices()
            .map(|i| {
                let q = &self.q[i];
                0.5 * disc.grid.volume[i] * q.dot(&(disc.medium(i).energy * q))
            })
            .sum()
    }

    /// Energy density `½ QᵀEQ` of every extended cell.
    pub fn energy_density(&self) -> Vec<f64> {
        let disc = &*self.disc;
        self.q
            .iter()
            .enumerate()
            .map(|(i, q)| 0.5 * q.dot(&(disc.medium(i).energy * q)))
            .collect()
    }

    /// `Σ V (ρ v + ρ_f q)` over interior poroelastic cells.
    pub fn total_momentum(&self) -> Vector3<f64> {
        let disc = &*self.disc;
        disc.grid
            .interior_indices()
            .filter_map(|i| match &disc.medium(i).material {
                Material::Poroelastic(d) => {
                    let q = &self.q[i];
                    Some(
                        (state::solid_velocity(q) * d.rho + state::fluid_flow(q) * d.base.rho_f)
                            * disc.grid.volume[i],
                    )
                }
                Material::Fluid(_) => None,
            })
            .sum()
    }
}
