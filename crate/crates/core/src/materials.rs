//! Poroelastic and fluid material parameters, derived coefficients, energy
//! density matrices and principal-axis rotations.

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{self, Matrix13, StateVector, NVARS};

/// Condition number above which the drained stiffness is treated as singular.
const MAX_STIFFNESS_CONDITION: f64 = 1e12;

/// Drained stiffness of an orthotropic skeleton in its principal axes (Pa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthotropicStiffness {
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c22: f64,
    pub c23: f64,
    pub c33: f64,
    pub c44: f64,
    pub c55: f64,
    pub c66: f64,
}

impl OrthotropicStiffness {
    /// Transversely isotropic stiffness with the 1-2 plane as plane of isotropy.
    pub fn transversely_isotropic(c11: f64, c12: f64, c13: f64, c33: f64, c55: f64) -> Self {
        Self {
            c11,
            c12,
            c13,
            c22: c11,
            c23: c13,
            c33,
            c44: c55,
            c55,
            c66: 0.5 * (c11 - c12),
        }
    }

    /// Isotropic stiffness from Lamé parameters.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = lambda + 2.0 * mu;
        Self {
            c11: d,
            c12: lambda,
            c13: lambda,
            c22: d,
            c23: lambda,
            c33: d,
            c44: mu,
            c55: mu,
            c66: mu,
        }
    }

    pub fn matrix(&self) -> Matrix6<f64> {
        let mut c = Matrix6::zeros();
        c[(0, 0)] = self.c11;
        c[(1, 1)] = self.c22;
        c[(2, 2)] = self.c33;
        c[(0, 1)] = self.c12;
        c[(1, 0)] = self.c12;
        c[(0, 2)] = self.c13;
        c[(2, 0)] = self.c13;
        c[(1, 2)] = self.c23;
        c[(2, 1)] = self.c23;
        c[(3, 3)] = self.c44;
        c[(4, 4)] = self.c55;
        c[(5, 5)] = self.c66;
        c
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            c11: self.c11 * s,
            c12: self.c12 * s,
            c13: self.c13 * s,
            c22: self.c22 * s,
            c23: self.c23 * s,
            c33: self.c33 * s,
            c44: self.c44 * s,
            c55: self.c55 * s,
            c66: self.c66 * s,
        }
    }
}

/// Base parameters of an orthotropic poroelastic medium, in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoroelasticBase {
    /// Bulk modulus of the grain material (Pa).
    pub ks: f64,
    /// Grain density (kg/m³).
    pub rho_s: f64,
    pub stiffness: OrthotropicStiffness,
    pub porosity: f64,
    /// Permeability per principal axis (m²).
    pub permeability: [f64; 3],
    pub tortuosity: [f64; 3],
    /// Pore fluid bulk modulus (Pa).
    pub kf: f64,
    /// Pore fluid density (kg/m³).
    pub rho_f: f64,
    /// Pore fluid viscosity (kg/(m·s)).
    pub viscosity: f64,
}

impl PoroelasticBase {
    /// The transversely isotropic brine-saturated sandstone used by the
    /// verification cases and the demonstration problem.
    pub fn sandstone() -> Self {
        Self {
            ks: 80e9,
            rho_s: 2500.0,
            stiffness: OrthotropicStiffness::transversely_isotropic(
                71.8e9, 3.2e9, 1.2e9, 53.4e9, 26.1e9,
            ),
            porosity: 0.2,
            permeability: [600e-15, 600e-15, 100e-15],
            tortuosity: [2.0, 2.0, 3.6],
            kf: 2.5e9,
            rho_f: 1040.0,
            viscosity: 1e-3,
        }
    }

    pub fn inviscid(mut self) -> Self {
        self.viscosity = 0.0;
        self
    }

    /// Same medium with every modulus multiplied by `s`.
    pub fn with_moduli_scaled(mut self, s: f64) -> Self {
        self.ks *= s;
        self.kf *= s;
        self.stiffness = self.stiffness.scaled(s);
        self
    }

    /// The saturating fluid as a standalone acoustic medium.
    pub fn pore_fluid(&self) -> Result<FluidMaterial> {
        FluidMaterial::new(self.kf, self.rho_f)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("K_s", self.ks),
            ("rho_s", self.rho_s),
            ("K_f", self.kf),
            ("rho_f", self.rho_f),
            ("c11", self.stiffness.c11),
            ("c22", self.stiffness.c22),
            ("c33", self.stiffness.c33),
            ("c44", self.stiffness.c44),
            ("c55", self.stiffness.c55),
            ("c66", self.stiffness.c66),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.porosity > 0.0 && self.porosity < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "porosity must lie in (0, 1), got {}",
                self.porosity
            )));
        }
        for i in 0..3 {
            if !(self.permeability[i] > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "permeability {} must be positive, got {}",
                    i + 1,
                    self.permeability[i]
                )));
            }
            if !(self.tortuosity[i] > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tortuosity {} must be positive, got {}",
                    i + 1,
                    self.tortuosity[i]
                )));
            }
        }
        if !(self.viscosity >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be non-negative, got {}",
                self.viscosity
            )));
        }
        Ok(())
    }
}

/// Coefficients derived from a [`PoroelasticBase`].
#[derive(Debug, Clone, PartialEq)]
pub struct PoroelasticDerived {
    pub base: PoroelasticBase,
    /// Effective stress coefficients in Voigt order; entries 4..6 are zero.
    pub alpha: [f64; 6],
    /// Bulk coupling modulus M (Pa).
    pub m_modulus: f64,
    /// K* (Pa).
    pub k_star: f64,
    /// Undrained stiffness c^u = c + α αᵀ M (Pa).
    pub undrained: Matrix6<f64>,
    /// Drained compliance S = c⁻¹ (1/Pa).
    pub compliance: Matrix6<f64>,
    /// Bulk density (kg/m³).
    pub rho: f64,
    /// Fluid inertia m_i = ρ_f T_i / φ (kg/m³).
    pub inertia: [f64; 3],
    /// Δ_i = ρ m_i − ρ_f².
    pub delta: [f64; 3],
    /// Upper limit of validity of the low-frequency model (rad/s);
    /// infinite for an inviscid pore fluid.
    pub omega_c: f64,
    /// Dissipation time constants Δ_i κ_i / (ρ η) (s), present when η > 0.
    pub tau_d: Option<[f64; 3]>,
}

impl PoroelasticDerived {
    /// Warns when `omega` exceeds the critical frequency of the medium.
    /// Returns whether the frequency lies inside the model's range.
    pub fn check_source_frequency(&self, omega: f64) -> bool {
        let ok = omega < self.omega_c;
        if !ok {
            log::warn!(
                "source angular frequency {omega:.4e} rad/s exceeds critical frequency {:.4e} rad/s",
                self.omega_c
            );
        }
        ok
    }

    /// Per-axis decay rate ρη/(Δ_i κ_i) of the relative fluid flow (1/s).
    pub fn decay_rates(&self) -> [f64; 3] {
        let b = &self.base;
        std::array::from_fn(|i| self.rho * b.viscosity / (self.delta[i] * b.permeability[i]))
    }
}

pub fn derive_poroelastic(base: &PoroelasticBase) -> Result<PoroelasticDerived> {
    base.validate()?;
    let c = base.stiffness.matrix();

    let mut alpha = [0.0; 6];
    for (i, a) in alpha.iter_mut().enumerate().take(3) {
        let row: f64 = (0..3).map(|j| c[(i, j)]).sum();
        *a = 1.0 - row / (3.0 * base.ks);
    }
    let k_star: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|ij| c[ij]).sum::<f64>() / 9.0;
    let denom = (1.0 - k_star / base.ks) - base.porosity * (1.0 - base.ks / base.kf);
    let m_modulus = base.ks / denom;
    if !(m_modulus > 0.0 && m_modulus.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bulk coupling modulus M must be positive, got {m_modulus:e}"
        )));
    }

    let compliance = invert_stiffness(&c)?;

    let mut undrained = c;
    for i in 0..6 {
        for j in 0..6 {
            undrained[(i, j)] += alpha[i] * alpha[j] * m_modulus;
        }
    }

    let rho = (1.0 - base.porosity) * base.rho_s + base.porosity * base.rho_f;
    let inertia: [f64; 3] = std::array::from_fn(|i| base.rho_f * base.tortuosity[i] / base.porosity);
    let delta: [f64; 3] = std::array::from_fn(|i| rho * inertia[i] - base.rho_f * base.rho_f);
    for (axis, &d) in delta.iter().enumerate() {
        if !(d > 0.0) {
            return Err(Error::DegenerateInertia { axis: axis + 1, delta: d });
        }
    }
    for (i, &t) in base.tortuosity.iter().enumerate() {
        if t < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "tortuosity {} must be at least 1, got {t}",
                i + 1
            )));
        }
    }

    let (omega_c, tau_d) = if base.viscosity > 0.0 {
        let omega_c = (0..3)
            .map(|i| {
                base.viscosity * base.porosity
                    / (base.rho_f * base.tortuosity[i] * base.permeability[i])
            })
            .fold(f64::INFINITY, f64::min);
        let tau: [f64; 3] =
            std::array::from_fn(|i| delta[i] * base.permeability[i] / (rho * base.viscosity));
        (omega_c, Some(tau))
    } else {
        (f64::INFINITY, None)
    };

    Ok(PoroelasticDerived {
        base: *base,
        alpha,
        m_modulus,
        k_star,
        undrained,
        compliance,
        rho,
        inertia,
        delta,
        omega_c,
        tau_d,
    })
}

fn invert_stiffness(c: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    let lu = c.lu();
    let inv = lu.try_inverse().ok_or(Error::SingularStiffness {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(c) * norm1(&inv);
    if !(condition <= MAX_STIFFNESS_CONDITION) {
        return Err(Error::SingularStiffness { condition });
    }
    // Symmetrize away rounding.
    Ok((inv + inv.transpose()) * 0.5)
}

fn norm1<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// An ideal acoustic fluid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidMaterial {
    pub kf: f64,
    pub rho_f: f64,
    pub impedance: f64,
    pub sound_speed: f64,
}

impl FluidMaterial {
    pub fn new(kf: f64, rho_f: f64) -> Result<Self> {
        if !(kf > 0.0 && rho_f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fluid needs positive K_f and rho_f, got {kf}, {rho_f}"
            )));
        }
        Ok(Self {
            kf,
            rho_f,
            impedance: (kf * rho_f).sqrt(),
            sound_speed: (kf / rho_f).sqrt(),
        })
    }

    /// Brine with the pore-fluid properties of [`PoroelasticBase::sandstone`].
    pub fn brine() -> Self {
        Self::new(2.5e9, 1040.0).expect("valid brine")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Poroelastic(PoroelasticDerived),
    Fluid(FluidMaterial),
}

impl Material {
    pub fn poroelastic(base: &PoroelasticBase) -> Result<Self> {
        Ok(Material::Poroelastic(derive_poroelastic(base)?))
    }

    pub fn is_fluid(&self) -> bool {
        matches!(self, Material::Fluid(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Material::Poroelastic(_) => "poroelastic",
            Material::Fluid(_) => "fluid",
        }
    }

    /// Impedance of the fluid phase, used by interface conditions.
    pub fn fluid_impedance(&self) -> f64 {
        match self {
            Material::Poroelastic(d) => (d.base.kf * d.base.rho_f).sqrt(),
            Material::Fluid(f) => f.impedance,
        }
    }
}

/// Energy density matrix `E` with `𝓔 = ½ QᵀEQ`, in the material principal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMatrix {
    pub full: Matrix13,
    /// Drained compliance; `None` for fluids.
    pub compliance: Option<Matrix6<f64>>,
}

impl EnergyMatrix {
    pub fn stress_block(&self) -> SMatrix<f64, 7, 7> {
        self.full.fixed_view::<7, 7>(0, 0).into_owned()
    }

    pub fn velocity_block(&self) -> Matrix6<f64> {
        self.full.fixed_view::<6, 6>(7, 7).into_owned()
    }

    pub fn energy(&self, q: &StateVector) -> f64 {
        0.5 * q.dot(&(self.full * q))
    }

    /// The same quadratic form expressed for states in global axes, given
    /// the rotation from material principal axes to global axes.
    pub fn in_global_axes(&self, rotation: &AxesRotation) -> Matrix13 {
        let t = state_transform_matrix(rotation, true);
        let e = t.transpose() * self.full * t;
        (e + e.transpose()) * 0.5
    }
}

pub fn energy_matrix(material: &Material) -> Result<EnergyMatrix> {
    let mut e = Matrix13::zeros();
    match material {
        Material::Fluid(f) => {
            e[(state::P, state::P)] = 1.0 / f.kf;
            for i in 0..3 {
                e[(state::Q1 + i, state::Q1 + i)] = f.rho_f;
            }
            Ok(EnergyMatrix {
                full: e,
                compliance: None,
            })
        }
        Material::Poroelastic(d) => {
            // Recompute from the stiffness so a hand-edited derived set is
            // still checked for invertibility.
            let s = invert_stiffness(&d.base.stiffness.matrix())?;
            let alpha = nalgebra::Vector6::from_row_slice(&d.alpha);
            let s_alpha = s * alpha;
            e.fixed_view_mut::<6, 6>(0, 0).copy_from(&s);
            for i in 0..6 {
                e[(i, state::P)] = s_alpha[i];
                e[(state::P, i)] = s_alpha[i];
            }
            e[(state::P, state::P)] = 1.0 / d.m_modulus + alpha.dot(&s_alpha);
            for i in 0..3 {
                e[(state::V1 + i, state::V1 + i)] = d.rho;
                e[(state::V1 + i, state::Q1 + i)] = d.base.rho_f;
                e[(state::Q1 + i, state::V1 + i)] = d.base.rho_f;
                e[(state::Q1 + i, state::Q1 + i)] = d.inertia[i];
            }
            Ok(EnergyMatrix {
                full: e,
                compliance: Some(s),
            })
        }
    }
}

/// Rotation taking material principal axes to global axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxesRotation {
    pub matrix: Matrix3<f64>,
    /// (yaw, pitch, roll) in radians, when built from angles.
    pub angles: Option<[f64; 3]>,
}

impl Default for AxesRotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl AxesRotation {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
            angles: Some([0.0; 3]),
        }
    }

    pub fn is_identity(&self) -> bool {
        (self.matrix - Matrix3::identity()).abs().max() == 0.0
    }

    pub fn to_global(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * v
    }

    pub fn to_material(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix.transpose() * v
    }
}

fn rot_x(d: f64) -> Matrix3<f64> {
    let (s, c) = d.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_y(d: f64) -> Matrix3<f64> {
    let (s, c) = d.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_z(d: f64) -> Matrix3<f64> {
    let (s, c) = d.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `R = R_z(yaw) · R_y(−pitch) · R_x(roll)`, each elementary rotation
/// counterclockwise about its axis.
pub fn rotation_from_angles(yaw: f64, pitch: f64, roll: f64) -> AxesRotation {
    AxesRotation {
        matrix: rot_z(yaw) * rot_y(-pitch) * rot_x(roll),
        angles: Some([yaw, pitch, roll]),
    }
}

/// Minimal rotation carrying ẑ onto `normal` (about the axis ẑ × normal),
/// so the material 3-axis follows the normal and the 1-2 axes span the
/// tangent plane.
pub fn rotation_from_surface_normal(normal: &Vector3<f64>) -> Result<AxesRotation> {
    let n = normal.normalize();
    let axis = Vector3::z().cross(&n);
    let c = n.z;
    if 1.0 + c < 1e-12 {
        return Err(Error::AntiparallelNormal([n.x, n.y, n.z]));
    }
    let k = axis.cross_matrix();
    let matrix = Matrix3::identity() + k + k * k / (1.0 + c);
    Ok(AxesRotation {
        matrix,
        angles: None,
    })
}

/// Rotates a state between axes: vectors as `R v`, stress as `R τ Rᵀ`,
/// pressure unchanged. `inverse` applies `Rᵀ` (global to material).
pub fn state_to_axes(q: &StateVector, rotation: &AxesRotation, inverse: bool) -> StateVector {
    let r = if inverse {
        rotation.matrix.transpose()
    } else {
        rotation.matrix
    };
    let mut out = *q;
    let tau = r * state::stress_tensor(q) * r.transpose();
    state::set_stress_tensor(&mut out, &tau);
    let v = r * state::solid_velocity(q);
    let f = r * state::fluid_flow(q);
    for i in 0..3 {
        out[state::V1 + i] = v[i];
        out[state::Q1 + i] = f[i];
    }
    out
}

/// The linear map of [`state_to_axes`] as a 13×13 matrix.
pub fn state_transform_matrix(rotation: &AxesRotation, inverse: bool) -> Matrix13 {
    let mut t = Matrix13::zeros();
    for j in 0..NVARS {
        let mut e = StateVector::zeros();
        e[j] = 1.0;
        t.set_column(j, &state_to_axes(&e, rotation, inverse));
    }
    t
}
