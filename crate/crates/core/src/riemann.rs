//! Normal Riemann problems at cell faces.
//!
//! Between identical media the wave strengths follow from E-orthogonality
//! of the eigenvectors. Between different media the strengths of the
//! outgoing waves are the solution of a small linear system expressing the
//! interface conditions `C_l Q*_l = C_r Q*_r`.

use nalgebra::{DMatrix, SMatrix, Vector3};

use crate::error::{Error, Result};
use crate::materials::Material;
use crate::state::{self, Matrix13, StateVector, NVARS};
use crate::system::{eigendecompose, Direction, EigenBasis, Medium, WaveLabel};

pub const MAX_WAVES: usize = 8;

/// Condition number above which an interface system is rejected.
const MAX_INTERFACE_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceKind {
    SameMaterial,
    PoroPoro,
    PoroFluid,
    FluidPoro,
    FluidFluid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSpec {
    pub kind: InterfaceKind,
    /// Interface discharge efficiency, 1 for open pores, 0 for sealed.
    pub eta_d: f64,
    /// Weight of the right-side normal flow in the averaged flow rate.
    pub zeta: f64,
}

impl InterfaceSpec {
    pub fn new(kind: InterfaceKind, eta_d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_d) {
            return Err(Error::InvalidParameter(format!(
                "discharge efficiency must lie in [0, 1], got {eta_d}"
            )));
        }
        Ok(Self {
            kind,
            eta_d,
            zeta: 0.5,
        })
    }

    /// Interface kind implied by the media on either side.
    pub fn between(left: &Medium, right: &Medium, eta_d: f64) -> Result<Self> {
        let kind = match (left.is_fluid(), right.is_fluid()) {
            _ if same_medium(left, right) => InterfaceKind::SameMaterial,
            (false, false) => InterfaceKind::PoroPoro,
            (false, true) => InterfaceKind::PoroFluid,
            (true, false) => InterfaceKind::FluidPoro,
            (true, true) => InterfaceKind::FluidFluid,
        };
        Self::new(kind, eta_d)
    }
}

fn same_medium(a: &Medium, b: &Medium) -> bool {
    a.material_id == b.material_id && a.rotation.matrix == b.rotation.matrix
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wave {
    pub speed: f64,
    pub jump: StateVector,
    pub label: WaveLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveSet {
    pub normal: Vector3<f64>,
    pub waves: Vec<Wave>,
    pub amdq: StateVector,
    pub apdq: StateVector,
}

impl WaveSet {
    fn from_waves(normal: Vector3<f64>, waves: Vec<Wave>) -> Self {
        let mut amdq = StateVector::zeros();
        let mut apdq = StateVector::zeros();
        for w in &waves {
            if w.speed < 0.0 {
                amdq += w.jump * w.speed;
            } else if w.speed > 0.0 {
                apdq += w.jump * w.speed;
            }
        }
        Self {
            normal,
            waves,
            amdq,
            apdq,
        }
    }

    /// Sum of the jumps of all waves travelling in `direction`.
    pub fn sum(&self, direction: Direction) -> StateVector {
        self.waves
            .iter()
            .filter(|w| w.label.direction == direction)
            .fold(StateVector::zeros(), |acc, w| acc + w.jump)
    }
}

/// Waves between identical media: `α_p = r_pᵀ E ΔQ / r_pᵀ E r_p`.
pub fn solve_same_material(
    ql: &StateVector,
    qr: &StateVector,
    basis: &EigenBasis,
    energy: &Matrix13,
) -> WaveSet {
    let edq = energy * (qr - ql);
    let waves = basis
        .waves
        .iter()
        .map(|w| {
            let alpha = w.vector.dot(&edq) / w.vector.dot(&(energy * w.vector));
            Wave {
                speed: w.speed,
                jump: w.vector * alpha,
                label: w.label,
            }
        })
        .collect();
    WaveSet::from_waves(basis.normal, waves)
}

/// Rows of the traction `τ·n` for the symmetric stress in Voigt order.
fn traction_rows<const R: usize>(c: &mut SMatrix<f64, R, NVARS>, row: usize, n: &Vector3<f64>) {
    use state::*;
    c[(row, TAU11)] = n.x;
    c[(row, TAU13)] = n.z;
    c[(row, TAU12)] = n.y;
    c[(row + 1, TAU22)] = n.y;
    c[(row + 1, TAU23)] = n.z;
    c[(row + 1, TAU12)] = n.x;
    c[(row + 2, TAU33)] = n.z;
    c[(row + 2, TAU23)] = n.y;
    c[(row + 2, TAU13)] = n.x;
}

pub type PoroFluidMatrices = (SMatrix<f64, 5, NVARS>, SMatrix<f64, 5, NVARS>);
pub type PoroPoroMatrices = (SMatrix<f64, 8, NVARS>, SMatrix<f64, 8, NVARS>);

/// Interface conditions with the poroelastic medium on the left and `n`
/// pointing into the fluid: normal mass balance, traction equal to fluid
/// pressure, and the discharge condition with `Z' = Z_f (1 − η_d)`.
pub fn interface_matrices_poro_fluid(n: &Vector3<f64>, eta_d: f64, z_f: f64) -> PoroFluidMatrices {
    use state::*;
    let zp = z_f * (1.0 - eta_d);
    let mut cl = SMatrix::<f64, 5, NVARS>::zeros();
    let mut cr = SMatrix::<f64, 5, NVARS>::zeros();
    for i in 0..3 {
        cl[(0, V1 + i)] = n[i];
        cl[(0, Q1 + i)] = n[i];
        cr[(0, Q1 + i)] = n[i];
        cr[(1 + i, P)] = -n[i];
        cl[(4, Q1 + i)] = -zp * n[i];
    }
    traction_rows(&mut cl, 1, n);
    cl[(4, P)] = eta_d;
    cr[(4, P)] = eta_d;
    (cl, cr)
}

/// Interface conditions between two poroelastic media: traction, solid
/// velocity and normal flow continuity, and the discharge condition with
/// the normal flow averaged with weight ½.
pub fn interface_matrices_poro_poro(n: &Vector3<f64>, eta_d: f64, z_f_left: f64) -> PoroPoroMatrices {
    use state::*;
    let zeta = 0.5;
    let zl = (1.0 - zeta) * z_f_left * (1.0 - eta_d);
    let zr = zeta * z_f_left * (1.0 - eta_d);
    let mut cl = SMatrix::<f64, 8, NVARS>::zeros();
    traction_rows(&mut cl, 0, n);
    for i in 0..3 {
        cl[(3 + i, V1 + i)] = 1.0;
        cl[(6, Q1 + i)] = n[i];
    }
    let mut cr = cl;
    cl[(7, P)] = eta_d;
    cr[(7, P)] = eta_d;
    for i in 0..3 {
        cl[(7, Q1 + i)] = -zl * n[i];
        cr[(7, Q1 + i)] = zr * n[i];
    }
    (cl, cr)
}

fn fluid_fluid_matrices(n: &Vector3<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut c = DMatrix::zeros(2, NVARS);
    for i in 0..3 {
        c[(0, state::Q1 + i)] = n[i];
    }
    c[(1, state::P)] = 1.0;
    (c.clone(), c)
}

fn to_dmatrix<const R: usize>(m: &SMatrix<f64, R, NVARS>) -> DMatrix<f64> {
    DMatrix::from_fn(R, NVARS, |i, j| m[(i, j)])
}

/// `(C_l, C_r)` for an interface of the given kind, with `n` pointing from
/// left to right. `z_f` is the impedance of the fluid medium for
/// poroelastic-fluid interfaces and of the left pore fluid otherwise.
pub fn interface_matrices(
    kind: InterfaceKind,
    n: &Vector3<f64>,
    eta_d: f64,
    z_f: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    match kind {
        InterfaceKind::PoroFluid => {
            let (cl, cr) = interface_matrices_poro_fluid(n, eta_d, z_f);
            (to_dmatrix(&cl), to_dmatrix(&cr))
        }
        InterfaceKind::FluidPoro => {
            // Mirror image of the poroelastic-fluid conditions.
            let (cp, cf) = interface_matrices_poro_fluid(&-n, eta_d, z_f);
            (to_dmatrix(&cf), to_dmatrix(&cp))
        }
        InterfaceKind::PoroPoro | InterfaceKind::SameMaterial => {
            let (cl, cr) = interface_matrices_poro_poro(n, eta_d, z_f);
            (to_dmatrix(&cl), to_dmatrix(&cr))
        }
        InterfaceKind::FluidFluid => fluid_fluid_matrices(n),
    }
}

/// Impedance entering the discharge condition for an interface.
pub fn discharge_impedance(left: &Medium, right: &Medium) -> f64 {
    match (&left.material, &right.material) {
        (_, Material::Fluid(f)) if !left.is_fluid() => f.impedance,
        (Material::Fluid(f), _) => f.impedance,
        (l, _) => l.fluid_impedance(),
    }
}

/// Linear maps from the two side states to the outgoing wave strengths,
/// `x = P_r Q_r − P_l Q_l`, for an interface between different media.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceProjection {
    pub left: SMatrix<f64, MAX_WAVES, NVARS>,
    pub right: SMatrix<f64, MAX_WAVES, NVARS>,
}

fn interface_projection(
    basis_l: &EigenBasis,
    basis_r: &EigenBasis,
    spec: &InterfaceSpec,
    z_f: f64,
) -> Result<(Vec<usize>, Vec<usize>, InterfaceProjection)> {
    let n = basis_l.normal;
    let (cl, cr) = interface_matrices(spec.kind, &n, spec.eta_d, z_f);
    let lefts: Vec<usize> = (0..basis_l.len())
        .filter(|&p| basis_l.waves[p].label.direction == Direction::Left)
        .collect();
    let rights: Vec<usize> = (0..basis_r.len())
        .filter(|&p| basis_r.waves[p].label.direction == Direction::Right)
        .collect();
    let m = lefts.len() + rights.len();
    let fail = |reason: String| Error::InterfaceSolveFailed {
        face: format!("normal {:?}", [n.x, n.y, n.z]),
        reason,
    };
    if cl.nrows() != m {
        return Err(fail(format!(
            "{} conditions for {} unknowns",
            cl.nrows(),
            m
        )));
    }
    let mut a = DMatrix::zeros(m, m);
    for (col, &p) in lefts.iter().enumerate() {
        a.set_column(col, &(&cl * basis_l.waves[p].vector));
    }
    for (col, &p) in rights.iter().enumerate() {
        a.set_column(lefts.len() + col, &(&cr * basis_r.waves[p].vector));
    }
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| fail("singular interface system".into()))?;
    let cond = norm1(&a) * norm1(&inv);
    if !(cond <= MAX_INTERFACE_CONDITION) {
        return Err(fail(format!("condition number {cond:e}")));
    }
    let pl = &inv * &cl;
    let pr = &inv * &cr;
    let mut proj = InterfaceProjection {
        left: SMatrix::zeros(),
        right: SMatrix::zeros(),
    };
    for i in 0..m {
        for j in 0..NVARS {
            proj.left[(i, j)] = pl[(i, j)];
            proj.right[(i, j)] = pr[(i, j)];
        }
    }
    Ok((lefts, rights, proj))
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Waves at an interface between different media. Left-going waves use
/// the left medium's eigenvectors, right-going waves the right medium's.
pub fn solve_interface(
    ql: &StateVector,
    qr: &StateVector,
    basis_l: &EigenBasis,
    basis_r: &EigenBasis,
    spec: &InterfaceSpec,
    z_f: f64,
) -> Result<WaveSet> {
    let (lefts, rights, proj) = interface_projection(basis_l, basis_r, spec, z_f)?;
    let x = proj.right * qr - proj.left * ql;
    let mut waves = Vec::with_capacity(lefts.len() + rights.len());
    for (i, &p) in lefts.iter().enumerate() {
        let w = &basis_l.waves[p];
        waves.push(Wave {
            speed: w.speed,
            jump: w.vector * x[i],
            label: w.label,
        });
    }
    for (i, &p) in rights.iter().enumerate() {
        let w = &basis_r.waves[p];
        waves.push(Wave {
            speed: w.speed,
            jump: w.vector * x[lefts.len() + i],
            label: w.label,
        });
    }
    Ok(WaveSet::from_waves(basis_l.normal, waves))
}

/// Precomputed solver for one face orientation between two media.
///
/// Wave `p` has jump `α_p r_p`, with strengths `α` linear in the two side
/// states.
#[derive(Debug, Clone)]
pub struct FaceSolver {
    pub count: usize,
    pub speeds: [f64; MAX_WAVES],
    pub labels: [WaveLabel; MAX_WAVES],
    /// Eigenvectors as columns.
    pub vectors: SMatrix<f64, NVARS, MAX_WAVES>,
    /// `E r_p`, with `E` of the medium the wave travels into.
    pub energy_vectors: SMatrix<f64, NVARS, MAX_WAVES>,
    /// `None` between identical media, where `α = (E R)ᵀ ΔQ`.
    pub projection: Option<Box<InterfaceProjection>>,
    /// Material ids differ across the face; second-order corrections are
    /// dropped there.
    pub material_interface: bool,
    pub max_speed: f64,
}

impl FaceSolver {
    pub fn new(left: &Medium, right: &Medium, normal: &Vector3<f64>, eta_d: f64) -> Result<Self> {
        let basis_l = eigendecompose(left, normal)?;
        let spec = InterfaceSpec::between(left, right, eta_d)?;
        let placeholder = WaveLabel {
            family: crate::system::WaveFamily::Acoustic,
            direction: Direction::Left,
        };
        let mut out = Self {
            count: 0,
            speeds: [0.0; MAX_WAVES],
            labels: [placeholder; MAX_WAVES],
            vectors: SMatrix::zeros(),
            energy_vectors: SMatrix::zeros(),
            projection: None,
            material_interface: left.material_id != right.material_id,
            max_speed: 0.0,
        };
        if spec.kind == InterfaceKind::SameMaterial {
            for (p, w) in basis_l.waves.iter().enumerate() {
                out.push(p, w.speed, &w.vector, w.label, &left.energy);
            }
            out.count = basis_l.len();
        } else {
            let basis_r = eigendecompose(right, normal)?;
            let z_f = discharge_impedance(left, right);
            let (lefts, rights, proj) = interface_projection(&basis_l, &basis_r, &spec, z_f)?;
            let mut p = 0;
            for &q in &lefts {
                let w = &basis_l.waves[q];
                out.push(p, w.speed, &w.vector, w.label, &left.energy);
                p += 1;
            }
            for &q in &rights {
                let w = &basis_r.waves[q];
                out.push(p, w.speed, &w.vector, w.label, &right.energy);
                p += 1;
            }
            out.count = p;
            out.projection = Some(Box::new(proj));
        }
        Ok(out)
    }

    fn push(&mut self, p: usize, speed: f64, r: &StateVector, label: WaveLabel, e: &Matrix13) {
        self.speeds[p] = speed;
        self.labels[p] = label;
        self.vectors.set_column(p, r);
        self.energy_vectors.set_column(p, &(e * r));
        self.max_speed = self.max_speed.max(speed.abs());
    }

    pub fn strengths(&self, ql: &StateVector, qr: &StateVector) -> [f64; MAX_WAVES] {
        let a = match &self.projection {
            None => self.energy_vectors.tr_mul(&(qr - ql)),
            Some(p) => p.right * qr - p.left * ql,
        };
        let mut out = [0.0; MAX_WAVES];
        out[..self.count].copy_from_slice(&a.as_slice()[..self.count]);
        out
    }

    pub fn wave_set(&self, ql: &StateVector, qr: &StateVector, normal: Vector3<f64>) -> WaveSet {
        let alpha = self.strengths(ql, qr);
        let waves = (0..self.count)
            .map(|p| Wave {
                speed: self.speeds[p],
                jump: self.vectors.column(p) * alpha[p],
                label: self.labels[p],
            })
            .collect();
        WaveSet::from_waves(normal, waves)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{
        derive_poroelastic, rotation_from_angles, AxesRotation, FluidMaterial, PoroelasticBase,
    };
    use rand::{Rng, SeedableRng};

    fn sandstone_medium(id: usize, rot: AxesRotation) -> Medium {
        let d = derive_poroelastic(&PoroelasticBase::sandstone()).unwrap();
        Medium::new(id, Material::Poroelastic(d), rot).unwrap()
    }

    fn brine_medium(id: usize) -> Medium {
        Medium::new(id, Material::Fluid(FluidMaterial::brine()), AxesRotation::identity()).unwrap()
    }

    fn random_state(rng: &mut impl Rng) -> StateVector {
        let mut q = StateVector::from_fn(|_, _| rng.random_range(-1.0..1.0));
        for i in 0..=state::P {
            q[i] *= 1e6;
        }
        q
    }

    #[test]
    fn equal_states_give_no_waves() {
        let m = sandstone_medium(0, AxesRotation::identity());
        let b = eigendecompose(&m, &Vector3::x()).unwrap();
        let q = StateVector::repeat(3.0);
        let ws = solve_same_material(&q, &q, &b, &m.energy);
        assert!(ws.waves.iter().all(|w| w.jump == StateVector::zeros()));
    }

    #[test]
    fn single_eigenvector_jump() {
        let m = sandstone_medium(0, rotation_from_angles(0.3, 0.1, 0.2));
        let n = Vector3::new(0.0, 0.6, 0.8);
        let b = eigendecompose(&m, &n).unwrap();
        let r = b.waves[7].vector;
        let ws = solve_same_material(&StateVector::zeros(), &r, &b, &m.energy);
        for (p, w) in ws.waves.iter().enumerate() {
            let expect = if p == 7 { r } else { StateVector::zeros() };
            assert!((w.jump - expect).amax() < 1e-9 * r.amax());
        }
    }

    #[test]
    fn fluid_fluctuations_match_operator() {
        let m = brine_medium(0);
        let n = Vector3::new(0.2, -0.3, 0.9).normalize();
        let b = eigendecompose(&m, &n).unwrap();
        let a = crate::system::assemble_fluid(&FluidMaterial::brine(), &n).a_breve;
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let mut ql = StateVector::zeros();
        let mut qr = StateVector::zeros();
        for i in [state::P, state::Q1, state::Q2, state::Q3] {
            ql[i] = rng.random_range(-1.0..1.0);
            qr[i] = rng.random_range(-1.0..1.0);
        }
        let ws = solve_same_material(&ql, &qr, &b, &m.energy);
        let total = ws.amdq + ws.apdq;
        let expect = a * (qr - ql);
        assert!((total - expect).amax() <= 1e-10 * expect.amax());
    }

    #[test]
    fn open_pores_reduce_to_pressure_continuity() {
        let n = Vector3::z();
        let (cl, cr) = interface_matrices_poro_fluid(&n, 1.0, 1.6e6);
        let mut row = [0.0; NVARS];
        row[state::P] = 1.0;
        assert_eq!(cl.row(4).iter().copied().collect::<Vec<_>>(), row.to_vec());
        assert_eq!(cr.row(4).iter().copied().collect::<Vec<_>>(), row.to_vec());
        assert_eq!(cl[(0, state::V3)], 1.0);
        assert_eq!(cl[(0, state::Q3)], 1.0);
        assert_eq!(cl[(0, state::V1)], 0.0);

        let (cl, cr) = interface_matrices_poro_fluid(&n, 0.0, 1.6e6);
        assert_eq!(cl[(4, state::P)], 0.0);
        assert_eq!(cl[(4, state::Q3)], -1.6e6);
        assert_eq!(cr.row(4).iter().map(|x| x.abs()).sum::<f64>(), 0.0);

        let (cl, cr) = interface_matrices_poro_poro(&n, 1.0, 1.6e6);
        assert_eq!(cl.row(7), cr.row(7));
        assert_eq!(cl[(7, state::P)], 1.0);
        for i in 0..3 {
            assert_eq!(cl[(3 + i, state::V1 + i)], 1.0);
        }
    }

    fn check_residual(kind_fluid: bool, eta_d: f64, rng: &mut impl Rng) {
        let rot = rotation_from_angles(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let left = sandstone_medium(0, rot);
        let right = if kind_fluid {
            brine_medium(1)
        } else {
            sandstone_medium(1, AxesRotation::identity())
        };
        let n = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        let bl = eigendecompose(&left, &n).unwrap();
        let br = eigendecompose(&right, &n).unwrap();
        let spec = InterfaceSpec::between(&left, &right, eta_d).unwrap();
        let z_f = discharge_impedance(&left, &right);
        let ql = random_state(rng);
        let mut qr = random_state(rng);
        if kind_fluid {
            for i in 0..NVARS {
                if ![state::P, state::Q1, state::Q2, state::Q3].contains(&i) {
                    qr[i] = 0.0;
                }
            }
        }
        let ws = solve_interface(&ql, &qr, &bl, &br, &spec, z_f).unwrap();
        let ql_star = ql + ws.sum(Direction::Left);
        let qr_star = qr - ws.sum(Direction::Right);
        let (cl, cr) = interface_matrices(spec.kind, &n, eta_d, z_f);
        let lhs = &cl * nalgebra::DVector::from_column_slice(ql_star.as_slice());
        let rhs = &cr * nalgebra::DVector::from_column_slice(qr_star.as_slice());
        let scale = norm1(&cl).max(norm1(&cr)) * ql_star.amax().max(qr_star.amax());
        assert!((lhs - rhs).amax() <= 1e-9 * scale);
    }

    #[test]
    fn interface_residuals() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for eta in [0.0, 0.5, 1.0] {
            for _ in 0..20 {
                check_residual(false, eta, &mut rng);
                check_residual(true, eta, &mut rng);
            }
        }
    }

    #[test]
    fn identical_media_interface_matches_same_material() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let rot = rotation_from_angles(0.4, -0.3, 0.2);
        let left = sandstone_medium(0, rot);
        let right = sandstone_medium(0, rot);
        let n = Vector3::new(0.3, 0.4, -0.5).normalize();
        let b = eigendecompose(&left, &n).unwrap();
        let spec = InterfaceSpec::new(InterfaceKind::PoroPoro, 1.0).unwrap();
        let z_f = left.material.fluid_impedance();
        let ql = random_state(&mut rng);
        let qr = random_state(&mut rng);
        let a = solve_same_material(&ql, &qr, &b, &right.energy);
        let i = solve_interface(&ql, &qr, &b, &b, &spec, z_f).unwrap();
        for wa in &a.waves {
            let wi = i.waves.iter().find(|w| w.label == wa.label).unwrap();
            assert!((wa.jump - wi.jump).amax() <= 1e-9 * wa.jump.amax().max(1e-30) + 1e-9);
        }
    }

    #[test]
    fn face_solver_matches_direct_solves() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let left = sandstone_medium(0, rotation_from_angles(0.1, 0.2, 0.3));
        let right = brine_medium(1);
        let n = Vector3::new(0.1, 0.2, 0.95).normalize();
        let fs = FaceSolver::new(&left, &right, &n, 1.0).unwrap();
        assert!(fs.material_interface);
        assert_eq!(fs.count, 5);
        let ql = random_state(&mut rng);
        let mut qr = StateVector::zeros();
        qr[state::P] = 2.0;
        let direct = solve_interface(
            &ql,
            &qr,
            &eigendecompose(&left, &n).unwrap(),
            &eigendecompose(&right, &n).unwrap(),
            &InterfaceSpec::between(&left, &right, 1.0).unwrap(),
            discharge_impedance(&left, &right),
        )
        .unwrap();
        let via = fs.wave_set(&ql, &qr, n);
        assert!((direct.amdq - via.amdq).amax() <= 1e-12 * direct.amdq.amax());
        assert!((direct.apdq - via.apdq).amax() <= 1e-12 * direct.apdq.amax().max(1e-30));
    }

    #[test]
    fn fluid_on_left_mirrors_fluid_on_right() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let poro = sandstone_medium(0, AxesRotation::identity());
        let fluid = brine_medium(1);
        let n = Vector3::z();
        let fs = FaceSolver::new(&fluid, &poro, &n, 0.5).unwrap();
        let mut ql = StateVector::zeros();
        ql[state::P] = rng.random_range(-1.0..1.0);
        ql[state::Q3] = rng.random_range(-1.0..1.0);
        let qr = random_state(&mut rng);
        let ws = fs.wave_set(&ql, &qr, n);
        let qls = ql + ws.sum(Direction::Left);
        let qrs = qr - ws.sum(Direction::Right);
        // Normal mass balance and traction balance across the interface.
        let flux_f = qls[state::Q3];
        let flux_p = qrs[state::V3] + qrs[state::Q3];
        assert!((flux_f - flux_p).abs() < 1e-9 * flux_p.abs().max(1.0));
        assert!((qrs[state::TAU33] + qls[state::P]).abs() < 1e-9 * qls[state::P].abs().max(1.0));
        assert!(qrs[state::TAU13].abs() < 1e-6 && qrs[state::TAU23].abs() < 1e-6);
    }
}
