//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridMapping;
use crate::limiter::LimiterChoice;
use crate::materials::{FluidMaterial, Material, PoroelasticBase};
use crate::solver::BoundarySpec;
use crate::system::WaveFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaterialSpec {
    Poroelastic(PoroelasticBase),
    /// Pore fluid bulk modulus (Pa) and density (kg/m³).
    Fluid { kf: f64, rho_f: f64 },
}

impl MaterialSpec {
    pub fn build(&self) -> Result<Material> {
        match self {
            MaterialSpec::Poroelastic(b) => Material::poroelastic(b),
            MaterialSpec::Fluid { kf, rho_f } => Ok(Material::Fluid(FluidMaterial::new(*kf, *rho_f)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaterialLayout {
    /// One material everywhere, principal axes rotated by yaw/pitch/roll
    /// (degrees).
    Homogeneous {
        material: MaterialSpec,
        #[serde(default)]
        axes_deg: [f64; 3],
    },
    /// Rock below the bed surface of an undulating-bed grid, its own pore
    /// fluid above; the rock's 3-axis follows the surface normal.
    Bed {
        rock: PoroelasticBase,
        /// Interface discharge efficiency.
        #[serde(default = "one")]
        eta_d: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    FastP,
    S1,
    S2,
    SlowP,
    Acoustic,
}

impl From<FamilyName> for WaveFamily {
    fn from(f: FamilyName) -> Self {
        match f {
            FamilyName::FastP => WaveFamily::FastP,
            FamilyName::S1 => WaveFamily::S1,
            FamilyName::S2 => WaveFamily::S2,
            FamilyName::SlowP => WaveFamily::SlowP,
            FamilyName::Acoustic => WaveFamily::Acoustic,
        }
    }
}

impl From<WaveFamily> for FamilyName {
    fn from(f: WaveFamily) -> Self {
        match f {
            WaveFamily::FastP => FamilyName::FastP,
            WaveFamily::S1 => FamilyName::S1,
            WaveFamily::S2 => FamilyName::S2,
            WaveFamily::SlowP => FamilyName::SlowP,
            WaveFamily::Acoustic => FamilyName::Acoustic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    Zero,
    /// Analytic plane wave; `ell` and `polarization` in global axes.
    PlaneWave {
        ell: [f64; 3],
        frequency_hz: f64,
        family: FamilyName,
        #[serde(default)]
        polarization: Option<[f64; 3]>,
    },
    /// Raised-cosine pressure pulse travelling in −z through the fluid.
    Pulse {
        /// Peak pressure (Pa).
        amplitude: f64,
        frequency_hz: f64,
        /// Centre height above the bed crest in wavelengths.
        offset_wavelengths: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Vtk,
    CsvSlice,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Steps between snapshots; 0 writes only the final state.
    #[serde(default)]
    pub every: usize,
    #[serde(default)]
    pub formats: Vec<OutputFormat>,
    /// Interior ξ3 layer written by the csv slice; defaults to the middle.
    #[serde(default)]
    pub slice_layer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub mapping: GridMapping,
    pub dims: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub grid: GridConfig,
    pub materials: MaterialLayout,
    pub boundary: BoundarySpec,
    pub initial: InitialCondition,
    #[serde(default)]
    pub limiter: LimiterChoice,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Simulated time (s).
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub viscous: bool,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_cfl() -> f64 {
    0.9
}

fn default_true() -> bool {
    true
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.grid.dims.contains(&0) {
            return bad(format!("grid dims must be positive, got {:?}", self.grid.dims));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and non-negative, got {}", self.t_end));
        }
        if let MaterialLayout::Bed { eta_d, .. } = &self.materials {
            if !matches!(self.grid.mapping, GridMapping::UndulatingBed(_)) {
                return bad("bed materials need an undulating-bed grid".into());
            }
            if !(0.0..=1.0).contains(eta_d) {
                return bad(format!("eta_d must lie in [0, 1], got {eta_d}"));
            }
        }
        match &self.initial {
            InitialCondition::PlaneWave {
                ell, frequency_hz, ..
            } => {
                if (Vector3::from(*ell).norm() - 1.0).abs() > 1e-9 {
                    return bad("plane-wave ell must be a unit vector".into());
                }
                if !(*frequency_hz > 0.0) {
                    return bad("plane-wave frequency must be positive".into());
                }
            }
            InitialCondition::Pulse { frequency_hz, .. } => {
                if !matches!(self.materials, MaterialLayout::Bed { .. }) {
                    return bad("pulse initial condition needs bed materials".into());
                }
                if !(*frequency_hz > 0.0) {
                    return bad("pulse frequency must be positive".into());
                }
            }
            InitialCondition::Zero => {}
        }
        if self.boundary.needs_analytic()
            && !matches!(self.initial, InitialCondition::PlaneWave { .. })
        {
            return bad("analytic-fill boundaries need a plane-wave initial condition".into());
        }
        Ok(())
    }
}
