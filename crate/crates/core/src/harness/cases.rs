//! The 36 plane-wave test cases, the tilted-grid limiter problem and the
//! undulating-bed demonstration.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::grid::{box_rotation, GridMapping, UndulatingBed};
use crate::limiter::{LimiterChoice, LimiterFunction, StrengthRatio};
use crate::materials::{rotation_from_angles, Material, PoroelasticBase};
use crate::planewave::{build_plane_wave, PlaneWaveSolution, PlaneWaveSpec};
use crate::solver::{BoundaryCondition, BoundarySpec};
use crate::system::WaveFamily;

use super::config::{
    GridConfig, InitialCondition, MaterialLayout, MaterialSpec, OutputConfig, SimulationConfig,
};

pub const CASE_COUNT: usize = 36;
pub const CASE_FREQUENCY_HZ: f64 = 1e4;

/// Periods simulated in the plane-wave cases.
const CASE_PERIODS: f64 = 1.25;

const TILT_SLOPE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseDefinition {
    pub id: usize,
    /// Grid rotation, yaw/pitch/roll in degrees.
    pub grid_deg: [f64; 3],
    /// Material principal axes rotation, yaw/pitch/roll in degrees.
    pub material_deg: [f64; 3],
    /// Propagation direction in grid axes.
    pub ell_grid: Vector3<f64>,
    pub family: WaveFamily,
    /// Solid velocity polarization in grid axes.
    pub polarization: Option<Vector3<f64>>,
}

impl CaseDefinition {
    pub fn new(id: usize) -> Result<Self> {
        if id >= CASE_COUNT {
            return Err(Error::InvalidCase(id));
        }
        let family = [WaveFamily::FastP, WaveFamily::S1, WaveFamily::S2, WaveFamily::SlowP][id % 4];
        let tilted = [30.0, 20.0, 10.0];
        let (grid_deg, material_deg, ell) = match id / 4 {
            0 => ([0.0; 3], [0.0; 3], Vector3::x()),
            1 => ([0.0; 3], [0.0; 3], Vector3::z()),
            2 => (tilted, [0.0; 3], Vector3::x()),
            3 => (tilted, [0.0; 3], Vector3::y()),
            4 => (tilted, [0.0; 3], Vector3::z()),
            5 => ([0.0; 3], tilted, Vector3::x()),
            6 => ([0.0; 3], tilted, Vector3::y()),
            7 => ([0.0; 3], tilted, Vector3::z()),
            _ => ([0.0; 3], [0.0; 3], Vector3::repeat(1.0).normalize()),
        };
        let polarization = match id {
            5 => Some(Vector3::x()),
            6 => Some(Vector3::y()),
            _ => None,
        };
        Ok(Self {
            id,
            grid_deg,
            material_deg,
            ell_grid: ell,
            family,
            polarization,
        })
    }

    pub fn ell_global(&self) -> Vector3<f64> {
        box_rotation(&self.grid_deg).to_global(&self.ell_grid)
    }

    pub fn polarization_global(&self) -> Option<Vector3<f64>> {
        let r = box_rotation(&self.grid_deg);
        self.polarization.map(|s| r.to_global(&s))
    }

    pub fn rock() -> PoroelasticBase {
        PoroelasticBase::sandstone()
    }

    pub fn plane_wave(&self) -> Result<PlaneWaveSolution> {
        let [y, p, r] = self.material_deg.map(f64::to_radians);
        build_plane_wave(&PlaneWaveSpec {
            ell: self.ell_global(),
            omega: 2.0 * std::f64::consts::PI * CASE_FREQUENCY_HZ,
            family: self.family,
            polarization: self.polarization_global(),
            material: Material::poroelastic(&Self::rock())?,
            rotation: rotation_from_angles(y, p, r),
        })
    }

    /// Cube edge: one wavelength, or one decay length for the slow P wave.
    pub fn edge(&self, sol: &PlaneWaveSolution) -> Result<f64> {
        match self.family {
            WaveFamily::SlowP => sol
                .decay_length()
                .ok_or_else(|| Error::Config("slow P wave without decay".into())),
            _ => Ok(sol.wavelength()),
        }
    }

    /// 1.25 periods, or for the slow P wave 1.25 crossings of the cube by
    /// a fast P wave along material axis 1.
    pub fn t_end(&self, sol: &PlaneWaveSolution) -> Result<f64> {
        match self.family {
            WaveFamily::SlowP => {
                let [y, p, r] = self.material_deg.map(f64::to_radians);
                let rot = rotation_from_angles(y, p, r);
                let fast = build_plane_wave(&PlaneWaveSpec {
                    ell: rot.to_global(&Vector3::x()),
                    omega: sol.omega,
                    family: WaveFamily::FastP,
                    polarization: None,
                    material: Material::poroelastic(&Self::rock())?,
                    rotation: rot,
                })?;
                Ok(CASE_PERIODS * self.edge(sol)? / fast.phase_speed())
            }
            _ => Ok(CASE_PERIODS * sol.period()),
        }
    }
}

/// Plane-wave case `id` on an `n³` grid.
pub fn build_case(id: usize, n: usize) -> Result<SimulationConfig> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "cases need at least 4 cells per edge, got {n}"
        )));
    }
    let def = CaseDefinition::new(id)?;
    let sol = def.plane_wave().map_err(|e| Error::Case {
        case: id,
        source: Box::new(e),
    })?;
    let ell = def.ell_global();
    let config = SimulationConfig {
        grid: GridConfig {
            mapping: GridMapping::ScaledBox {
                edge: def.edge(&sol)?,
                center: [0.0; 3],
                rotation_deg: def.grid_deg,
            },
            dims: [n; 3],
        },
        materials: MaterialLayout::Homogeneous {
            material: MaterialSpec::Poroelastic(CaseDefinition::rock()),
            axes_deg: def.material_deg,
        },
        boundary: BoundarySpec::uniform(BoundaryCondition::AnalyticFill),
        initial: InitialCondition::PlaneWave {
            ell: [ell.x, ell.y, ell.z],
            frequency_hz: CASE_FREQUENCY_HZ,
            family: def.family.into(),
            polarization: def.polarization_global().map(|s| [s.x, s.y, s.z]),
        },
        limiter: LimiterChoice {
            strength_ratio: StrengthRatio::EFull,
            function: LimiterFunction::None,
        },
        cfl: 0.9,
        t_end: def.t_end(&sol)?,
        viscous: true,
        output: OutputConfig::default(),
    };
    config.validate()?;
    Ok(config)
}

/// Case 5 on the tilted grid with edge one wavelength and an MC limiter
/// using the given strength ratio.
pub fn build_limiter_case(n: usize, ratio: StrengthRatio) -> Result<SimulationConfig> {
    let mut config = build_case(5, n)?;
    let GridMapping::ScaledBox { edge, .. } = config.grid.mapping else {
        unreachable!("plane-wave cases use box grids");
    };
    config.grid.mapping = GridMapping::Tilt {
        length: edge,
        sigma: TILT_SLOPE,
    };
    config.limiter = LimiterChoice {
        strength_ratio: ratio,
        function: LimiterFunction::Mc,
    };
    Ok(config)
}

pub const DEMO_T_END: f64 = 400e-6;
pub const DEMO_FREQUENCY_HZ: f64 = 1e4;

/// Acoustic pulse in brine striking the undulating sandstone bed.
pub fn build_demo(dims: [usize; 3], viscous: bool) -> Result<SimulationConfig> {
    use BoundaryCondition::*;
    let config = SimulationConfig {
        grid: GridConfig {
            mapping: GridMapping::UndulatingBed(UndulatingBed::default()),
            dims,
        },
        materials: MaterialLayout::Bed {
            rock: PoroelasticBase::sandstone(),
            eta_d: 1.0,
        },
        boundary: BoundarySpec {
            faces: [[ReflectX; 2], [ReflectY; 2], [Extrapolate0; 2]],
        },
        initial: InitialCondition::Pulse {
            amplitude: 1.0,
            frequency_hz: DEMO_FREQUENCY_HZ,
            offset_wavelengths: 0.6,
        },
        limiter: LimiterChoice {
            strength_ratio: StrengthRatio::EFull,
            function: LimiterFunction::Mc,
        },
        cfl: 0.9,
        t_end: DEMO_T_END,
        viscous,
        output: OutputConfig {
            slice_layer: Some(demo_slice_layer(dims[2])),
            ..OutputConfig::default()
        },
    };
    config.validate()?;
    Ok(config)
}

/// Interior ξ3 index of the first cell layer below `z_bot`.
pub fn demo_slice_layer(n3: usize) -> usize {
    let bed = UndulatingBed::default();
    ((bed.xi_bot * n3 as f64).floor() as usize).saturating_sub(1)
}

/// Raised-cosine pulse `(p, q_z)` at height `z`.
pub fn pulse(z: f64, z_center: f64, wavelength: f64, amplitude: f64, impedance: f64) -> (f64, f64) {
    if (z - z_center).abs() < wavelength / 2.0 {
        let p = 0.5
            * amplitude
            * (1.0 + (2.0 * std::f64::consts::PI * (z - z_center) / wavelength).cos());
        (p, -p / impedance)
    } else {
        (0.0, 0.0)
    }
}
