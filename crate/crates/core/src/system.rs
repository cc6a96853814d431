//! Directional system matrices `Ǎ(n)` and `D`, media (material plus
//! principal axes) and the wave eigenbasis used by the Riemann solvers.

use nalgebra::{Matrix6, SMatrix, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::materials::{
    energy_matrix, state_transform_matrix, AxesRotation, EnergyMatrix, FluidMaterial, Material,
    PoroelasticDerived,
};
use crate::state::{self, Matrix13, StateVector, NVARS};

/// Relative gap below which the two shear speeds are treated as equal.
const SHEAR_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a_breve: Matrix13,
    pub dissipation: Matrix13,
    pub normal: Vector3<f64>,
}

impl SystemMatrices {
    pub fn a_sv(&self) -> SMatrix<f64, 7, 6> {
        self.a_breve.fixed_view::<7, 6>(0, 7).into_owned()
    }

    pub fn a_vs(&self) -> SMatrix<f64, 6, 7> {
        self.a_breve.fixed_view::<6, 7>(7, 0).into_owned()
    }

    pub fn d_v(&self) -> Matrix6<f64> {
        self.dissipation.fixed_view::<6, 6>(7, 7).into_owned()
    }
}

/// `Ǎ = n1 A + n2 B + n3 C` and `D` for a poroelastic medium, with `n`
/// given in the material principal axes.
pub fn assemble_poro(d: &PoroelasticDerived, n: &Vector3<f64>) -> SystemMatrices {
    let cu = &d.undrained;
    let c = d.base.stiffness;
    let m = d.m_modulus;
    let a = &d.alpha;
    let (n1, n2, n3) = (n.x, n.y, n.z);

    #[rustfmt::skip]
    let a_sv = SMatrix::<f64, 7, 6>::from_row_slice(&[
        n1 * cu[(0, 0)], n2 * cu[(0, 1)], n3 * cu[(0, 2)], n1 * a[0] * m, n2 * a[0] * m, n3 * a[0] * m,
        n1 * cu[(0, 1)], n2 * cu[(1, 1)], n3 * cu[(1, 2)], n1 * a[1] * m, n2 * a[1] * m, n3 * a[1] * m,
        n1 * cu[(0, 2)], n2 * cu[(1, 2)], n3 * cu[(2, 2)], n1 * a[2] * m, n2 * a[2] * m, n3 * a[2] * m,
        0.0, n3 * c.c44, n2 * c.c44, 0.0, 0.0, 0.0,
        n3 * c.c55, 0.0, n1 * c.c55, 0.0, 0.0, 0.0,
        n2 * c.c66, n1 * c.c66, 0.0, 0.0, 0.0, 0.0,
        -n1 * m * a[0], -n2 * m * a[1], -n3 * m * a[2], -n1 * m, -n2 * m, -n3 * m,
    ]);

    let rho = d.rho;
    let rf = d.base.rho_f;
    let [m1, m2, m3] = d.inertia;
    let [d1, d2, d3] = d.delta;
    #[rustfmt::skip]
    let a_vs = SMatrix::<f64, 6, 7>::from_row_slice(&[
        n1 * m1 / d1, 0.0, 0.0, 0.0, n3 * m1 / d1, n2 * m1 / d1, n1 * rf / d1,
        0.0, n2 * m2 / d2, 0.0, n3 * m2 / d2, 0.0, n1 * m2 / d2, n2 * rf / d2,
        0.0, 0.0, n3 * m3 / d3, n2 * m3 / d3, n1 * m3 / d3, 0.0, n3 * rf / d3,
        -n1 * rf / d1, 0.0, 0.0, 0.0, -n3 * rf / d1, -n2 * rf / d1, -n1 * rho / d1,
        0.0, -n2 * rf / d2, 0.0, -n3 * rf / d2, 0.0, -n1 * rf / d2, -n2 * rho / d2,
        0.0, 0.0, -n3 * rf / d3, -n2 * rf / d3, -n1 * rf / d3, 0.0, -n3 * rho / d3,
    ]);

    let mut a_breve = Matrix13::zeros();
    a_breve.fixed_view_mut::<7, 6>(0, 7).copy_from(&(-a_sv));
    a_breve.fixed_view_mut::<6, 7>(7, 0).copy_from(&(-a_vs));

    let mut dissipation = Matrix13::zeros();
    let eta = d.base.viscosity;
    for i in 0..3 {
        let k = d.base.permeability[i];
        dissipation[(state::V1 + i, state::Q1 + i)] = rf * eta / (d.delta[i] * k);
        dissipation[(state::Q1 + i, state::Q1 + i)] = -rho * eta / (d.delta[i] * k);
    }

    SystemMatrices {
        a_breve,
        dissipation,
        normal: *n,
    }
}

/// Acoustic system in global axes; only `p` and `q` couple.
pub fn assemble_fluid(f: &FluidMaterial, n: &Vector3<f64>) -> SystemMatrices {
    let mut a_breve = Matrix13::zeros();
    for i in 0..3 {
        a_breve[(state::P, state::Q1 + i)] = f.kf * n[i];
        a_breve[(state::Q1 + i, state::P)] = n[i] / f.rho_f;
    }
    SystemMatrices {
        a_breve,
        dissipation: Matrix13::zeros(),
        normal: *n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveFamily {
    FastP,
    S1,
    S2,
    SlowP,
    Acoustic,
}

impl WaveFamily {
    pub fn is_shear(self) -> bool {
        matches!(self, WaveFamily::S1 | WaveFamily::S2)
    }

    pub fn name(self) -> &'static str {
        match self {
            WaveFamily::FastP => "fast-p",
            WaveFamily::S1 => "s1",
            WaveFamily::S2 => "s2",
            WaveFamily::SlowP => "slow-p",
            WaveFamily::Acoustic => "acoustic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveLabel {
    pub family: WaveFamily,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenWave {
    pub speed: f64,
    pub vector: StateVector,
    pub label: WaveLabel,
}

/// Non-stationary eigenvectors of `Ǎ(n)` in global axes, ordered by speed
/// from most negative to most positive, each with unit E-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub normal: Vector3<f64>,
    pub waves: Vec<EigenWave>,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn left_going(&self) -> impl Iterator<Item = &EigenWave> {
        self.waves.iter().filter(|w| w.label.direction == Direction::Left)
    }

    pub fn right_going(&self) -> impl Iterator<Item = &EigenWave> {
        self.waves.iter().filter(|w| w.label.direction == Direction::Right)
    }

    pub fn max_speed(&self) -> f64 {
        self.waves.iter().map(|w| w.speed.abs()).fold(0.0, f64::max)
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.waves.iter().map(|w| w.speed).collect()
    }
}

/// A material together with the orientation of its principal axes, and
/// the quantities the solver needs from it precomputed in global axes.
#[derive(Debug, Clone)]
pub struct Medium {
    pub material_id: usize,
    pub material: Material,
    pub rotation: AxesRotation,
    /// Energy matrix in the material principal axes.
    pub energy_material: EnergyMatrix,
    /// Energy matrix acting on states in global axes.
    pub energy: Matrix13,
    /// Material-axes state to global-axes state.
    pub to_global: Matrix13,
    /// Global-axes state to material-axes state.
    pub to_material: Matrix13,
    sqrt_energy: Option<(Matrix13, Matrix13)>,
}

impl Medium {
    pub fn new(material_id: usize, material: Material, rotation: AxesRotation) -> Result<Self> {
        let energy_material = energy_matrix(&material)?;
        let energy = energy_material.in_global_axes(&rotation);
        let to_global = state_transform_matrix(&rotation, false);
        let to_material = state_transform_matrix(&rotation, true);
        let sqrt_energy = match material {
            Material::Poroelastic(_) => Some(energy_square_roots(&energy_material.full)?),
            Material::Fluid(_) => None,
        };
        Ok(Self {
            material_id,
            material,
            rotation,
            energy_material,
            energy,
            to_global,
            to_material,
            sqrt_energy,
        })
    }

    pub fn is_fluid(&self) -> bool {
        self.material.is_fluid()
    }

    /// `E^{1/2}` and `E^{-1/2}` in material axes (poroelastic media only).
    pub fn energy_square_roots(&self) -> Option<&(Matrix13, Matrix13)> {
        self.sqrt_energy.as_ref()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} #{} (angles {:?})",
            self.material.kind_name(),
            self.material_id,
            self.rotation.angles
        )
    }
}

/// `E^{1/2}` and `E^{-1/2}` of a positive-definite energy matrix, computed
/// separately on the stress and velocity blocks, whose scales differ by
/// about fifteen orders of magnitude.
pub(crate) fn energy_square_roots(e: &Matrix13) -> Result<(Matrix13, Matrix13)> {
    let mut half = Matrix13::zeros();
    let mut inv_half = Matrix13::zeros();
    let s = SymmetricEigen::new(e.fixed_view::<7, 7>(0, 0).into_owned());
    let v = SymmetricEigen::new(e.fixed_view::<6, 6>(7, 7).into_owned());
    if s.eigenvalues.min() <= 0.0 || v.eigenvalues.min() <= 0.0 {
        return Err(Error::InvalidParameter(
            "energy matrix is not positive-definite".into(),
        ));
    }
    let sh = &s.eigenvectors
        * SMatrix::<f64, 7, 7>::from_diagonal(&s.eigenvalues.map(f64::sqrt))
        * s.eigenvectors.transpose();
    let si = &s.eigenvectors
        * SMatrix::<f64, 7, 7>::from_diagonal(&s.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * s.eigenvectors.transpose();
    let vh = &v.eigenvectors
        * Matrix6::from_diagonal(&v.eigenvalues.map(f64::sqrt))
        * v.eigenvectors.transpose();
    let vi = &v.eigenvectors
        * Matrix6::from_diagonal(&v.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * v.eigenvectors.transpose();
    half.fixed_view_mut::<7, 7>(0, 0).copy_from(&sh);
    half.fixed_view_mut::<6, 6>(7, 7).copy_from(&vh);
    inv_half.fixed_view_mut::<7, 7>(0, 0).copy_from(&si);
    inv_half.fixed_view_mut::<6, 6>(7, 7).copy_from(&vi);
    Ok((half, inv_half))
}

/// Wave speeds and eigenvectors of the inviscid operator `Ǎ(n)` for a
/// medium, with `n` a unit vector in global axes.
pub fn eigendecompose(medium: &Medium, n_global: &Vector3<f64>) -> Result<EigenBasis> {
    let n = n_global.normalize();
    match &medium.material {
        Material::Fluid(f) => Ok(fluid_basis(f, &n)),
        Material::Poroelastic(d) => poro_basis(medium, d, &n),
    }
}

fn fluid_basis(f: &FluidMaterial, n: &Vector3<f64>) -> EigenBasis {
    let scale = 1.0 / (2.0 * f.rho_f).sqrt();
    let make = |sign: f64| {
        let mut r = StateVector::zeros();
        r[state::P] = sign * f.impedance * scale;
        for i in 0..3 {
            r[state::Q1 + i] = n[i] * scale;
        }
        r
    };
    EigenBasis {
        normal: *n,
        waves: vec![
            EigenWave {
                speed: -f.sound_speed,
                vector: make(-1.0),
                label: WaveLabel {
                    family: WaveFamily::Acoustic,
                    direction: Direction::Left,
                },
            },
            EigenWave {
                speed: f.sound_speed,
                vector: make(1.0),
                label: WaveLabel {
                    family: WaveFamily::Acoustic,
                    direction: Direction::Right,
                },
            },
        ],
    }
}

/// Maps a right-going eigenvector to the matching left-going one: flipping
/// the sign of the velocity block negates the eigenvalue because both
/// diagonal blocks of `Ǎ` vanish.
fn mirror(r: &StateVector) -> StateVector {
    let mut out = *r;
    for i in state::V1..NVARS {
        out[i] = -out[i];
    }
    out
}

fn poro_basis(medium: &Medium, d: &PoroelasticDerived, n: &Vector3<f64>) -> Result<EigenBasis> {
    let failed = || Error::DecompositionFailed {
        material: medium.describe(),
        direction: [n.x, n.y, n.z],
    };
    let n_mat = medium.rotation.to_material(n);
    let sys = assemble_poro(d, &n_mat);
    let (_, inv_half) = medium.energy_square_roots().ok_or_else(failed)?;
    let ea = medium.energy_material.full * sys.a_breve;
    let s = inv_half * ea * inv_half;
    let s = (s + s.transpose()) * 0.5;
    let eig = s.try_symmetric_eigen(1e-15, 10_000).ok_or_else(failed)?;
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(failed());
    }

    let mut order: Vec<usize> = (0..NVARS).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let speeds: Vec<f64> = order[..4].iter().map(|&k| eig.eigenvalues[k]).collect();
    if speeds[3] <= 1e-9 * speeds[0] {
        return Err(failed());
    }
    let mut right: Vec<StateVector> = order[..4]
        .iter()
        .map(|&k| medium.to_global * (inv_half * eig.eigenvectors.column(k)))
        .collect();

    if speeds[1] - speeds[2] <= SHEAR_TIE_TOLERANCE * speeds[0] {
        let (a, b) = split_degenerate_shear(&right[1], &right[2], n);
        right[1] = a;
        right[2] = b;
    }

    let families = [WaveFamily::FastP, WaveFamily::S1, WaveFamily::S2, WaveFamily::SlowP];
    let mut waves = Vec::with_capacity(8);
    for p in 0..4 {
        waves.push(EigenWave {
            speed: -speeds[p],
            vector: mirror(&right[p]),
            label: WaveLabel {
                family: families[p],
                direction: Direction::Left,
            },
        });
    }
    for p in (0..4).rev() {
        waves.push(EigenWave {
            speed: speeds[p],
            vector: right[p],
            label: WaveLabel {
                family: families[p],
                direction: Direction::Right,
            },
        });
    }
    Ok(EigenBasis { normal: *n, waves })
}

/// The global axis least parallel to `n`.
pub(crate) fn reference_axis(n: &Vector3<f64>) -> Vector3<f64> {
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(0);
    let mut e = Vector3::zeros();
    e[k] = 1.0;
    e
}

/// Rotates an E-orthonormal pair spanning a degenerate shear space so the
/// first vector has the largest possible solid velocity along the
/// reference axis and the second has none.
fn split_degenerate_shear(
    a: &StateVector,
    b: &StateVector,
    n: &Vector3<f64>,
) -> (StateVector, StateVector) {
    let e = reference_axis(n);
    let ua = state::solid_velocity(a).dot(&e);
    let ub = state::solid_velocity(b).dot(&e);
    let norm = ua.hypot(ub);
    if norm == 0.0 {
        return (*a, *b);
    }
    let (c, s) = (ua / norm, ub / norm);
    (a * c + b * s, b * c - a * s)
}
