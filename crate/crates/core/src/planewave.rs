//! Analytic damped plane waves of the full viscous system.
//!
//! A solution `Q = Re[v exp(i(k ℓ·x − ωt))]` satisfies
//! `−iωv + ikǍv = Dv`. With `v = E^{-1/2} w` this becomes
//! `E^{1/2}ǍE^{-1/2} w = k⁻¹ (ωI − i E^{1/2}DE^{-1/2}) w`, which is solved
//! in the material principal axes.

use nalgebra::{Complex, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};
use crate::materials::{energy_matrix, state_transform_matrix, AxesRotation, Material};
use crate::state::{self, StateVector, NVARS};
use crate::system::{assemble_poro, energy_square_roots, WaveFamily};

type C = Complex<f64>;
type CVector = SVector<C, NVARS>;
type CMatrix = SMatrix<C, NVARS, NVARS>;

/// Relative gap below which two shear wavenumbers are treated as one
/// degenerate pair.
const DEGENERATE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PlaneWaveSpec {
    /// Unit propagation direction in global axes.
    pub ell: Vector3<f64>,
    pub omega: f64,
    pub family: WaveFamily,
    /// Solid velocity polarization for shear waves, global axes.
    pub polarization: Option<Vector3<f64>>,
    pub material: Material,
    pub rotation: AxesRotation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSolution {
    pub k: C,
    /// Eigenvector in global axes with unit E-norm.
    pub v: CVector,
    pub ell: Vector3<f64>,
    pub omega: f64,
    pub family: WaveFamily,
}

impl PlaneWaveSolution {
    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.k.re.abs()
    }

    pub fn decay_length(&self) -> Option<f64> {
        (self.k.im != 0.0).then(|| 1.0 / self.k.im.abs())
    }

    pub fn phase_speed(&self) -> f64 {
        self.omega / self.k.re
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn evaluate(&self, x: &Vector3<f64>, t: f64) -> StateVector {
        let phase = C::new(0.0, 1.0) * (self.k * self.ell.dot(x) - C::from(self.omega * t));
        let e = phase.exp();
        self.v.map(|c| (c * e).re)
    }
}

pub fn build_plane_wave(spec: &PlaneWaveSpec) -> Result<PlaneWaveSolution> {
    let norm = spec.ell.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "propagation direction must be a unit vector, |ℓ| = {norm}"
        )));
    }
    if !(spec.omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "angular frequency must be positive, got {}",
            spec.omega
        )));
    }
    if let Some(s) = spec.polarization {
        if (s.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "polarization must be a unit vector".into(),
            ));
        }
    }
    match &spec.material {
        Material::Fluid(f) => {
            if !matches!(spec.family, WaveFamily::Acoustic | WaveFamily::FastP) {
                return Err(Error::AmbiguousFamily(format!(
                    "a fluid carries only acoustic waves, {} requested",
                    spec.family.name()
                )));
            }
            let c = 1.0 / (2.0 * f.rho_f).sqrt();
            let mut v = CVector::zeros();
            v[state::P] = C::from(f.impedance * c);
            for i in 0..3 {
                v[state::Q1 + i] = C::from(spec.ell[i] * c);
            }
            Ok(PlaneWaveSolution {
                k: C::from(spec.omega / f.sound_speed),
                v,
                ell: spec.ell,
                omega: spec.omega,
                family: WaveFamily::Acoustic,
            })
        }
        Material::Poroelastic(d) => poro_plane_wave(spec, d),
    }
}

fn complexify(m: &SMatrix<f64, NVARS, NVARS>) -> CMatrix {
    m.map(C::from)
}

fn poro_plane_wave(
    spec: &PlaneWaveSpec,
    d: &crate::materials::PoroelasticDerived,
) -> Result<PlaneWaveSolution> {
    let rot = &spec.rotation;
    let n = rot.to_material(&spec.ell);
    let sys = assemble_poro(d, &n);
    let e = energy_matrix(&spec.material)?.full;
    let (h, hi) = energy_square_roots(&e)?;
    let s = complexify(&(h * sys.a_breve * hi));
    let dp = complexify(&(h * sys.dissipation * hi));
    let b = CMatrix::identity() * C::from(spec.omega) - dp * C::new(0.0, 1.0);
    let decomposition_failed = || Error::DecompositionFailed {
        material: "poroelastic".into(),
        direction: [spec.ell.x, spec.ell.y, spec.ell.z],
    };
    let b_inv = b.try_inverse().ok_or_else(decomposition_failed)?;
    let lambdas = (b_inv * s).eigenvalues().ok_or_else(decomposition_failed)?;
    let largest = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);

    // Right-going branches, fastest phase speed first.
    let mut roots: Vec<C> = lambdas
        .iter()
        .filter(|l| l.norm() > 1e-8 * largest)
        .map(|l| C::from(1.0) / l)
        .filter(|k| k.re > 0.0)
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    if roots.len() != 4 {
        return Err(Error::AmbiguousFamily(format!(
            "expected 4 right-going branches, found {}",
            roots.len()
        )));
    }
    let close = |a: C, b: C| (a - b).norm() <= DEGENERATE_TOLERANCE * a.norm();
    if close(roots[0], roots[1]) || close(roots[2], roots[3]) {
        return Err(Error::AmbiguousFamily(
            "longitudinal branch coincides with a shear branch".into(),
        ));
    }
    let index = match spec.family {
        WaveFamily::FastP => 0,
        WaveFamily::S1 => 1,
        WaveFamily::S2 => 2,
        WaveFamily::SlowP => 3,
        WaveFamily::Acoustic => {
            return Err(Error::AmbiguousFamily(
                "acoustic waves need a fluid material".into(),
            ))
        }
    };
    let k = roots[index];
    let degenerate = spec.family.is_shear() && close(roots[1], roots[2]);

    let to_global = complexify(&state_transform_matrix(rot, false));
    let hi_c = complexify(&hi);
    let lambda = if degenerate {
        (C::from(1.0) / roots[1] + C::from(1.0) / roots[2]) * 0.5
    } else {
        C::from(1.0) / k
    };
    let null = null_vectors(&(s - b * lambda), if degenerate { 2 } else { 1 })
        .ok_or_else(decomposition_failed)?;
    // Candidate eigenvectors in global axes.
    let cands: Vec<CVector> = null.iter().map(|w| to_global * (hi_c * w)).collect();
    let e_global = complexify(&energy_matrix(&spec.material)?.in_global_axes(rot));

    let solid = |v: &CVector| -> [C; 3] { [v[state::V1], v[state::V2], v[state::V3]] };
    let dot = |u: [C; 3], s: &Vector3<f64>| u[0] * s.x + u[1] * s.y + u[2] * s.z;

    let reference = if spec.family.is_shear() {
        match spec.polarization {
            Some(s) => s,
            None if degenerate => {
                let s1 = crate::system::reference_axis(&spec.ell);
                if spec.family == WaveFamily::S1 {
                    s1
                } else {
                    spec.ell.cross(&s1).normalize()
                }
            }
            None => {
                let u = solid(&cands[0]);
                let k = (0..3)
                    .max_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm()))
                    .unwrap_or(0);
                let mut axis = Vector3::zeros();
                axis[k] = 1.0;
                axis
            }
        }
    } else {
        spec.ell
    };

    let mut v = if degenerate {
        // Maximize |u·s| over unit E-norm vectors of the shear plane.
        let g = SMatrix::<C, 2, 2>::from_fn(|i, j| cands[i].dotc(&(e_global * cands[j])));
        let bvec = nalgebra::Vector2::from_fn(|j, _| dot(solid(&cands[j]), &reference).conj());
        let c = g.try_inverse().ok_or_else(decomposition_failed)? * bvec;
        cands[0] * c[0] + cands[1] * c[1]
    } else {
        cands[0]
    };
    let enorm = v.dotc(&(e_global * v)).re.sqrt();
    v /= C::from(enorm);
    let z = dot(solid(&v), &reference);
    if z.norm() <= 1e-14 * v.norm() {
        return Err(Error::AmbiguousFamily(format!(
            "{} wave has no solid velocity along the reference direction",
            spec.family.name()
        )));
    }
    v *= z.conj() / C::from(z.norm());
    Ok(PlaneWaveSolution {
        k,
        v,
        ell: spec.ell,
        omega: spec.omega,
        family: spec.family,
    })
}

/// Right singular vectors for the `count` smallest singular values.
fn null_vectors(m: &CMatrix, count: usize) -> Option<Vec<CVector>> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..NVARS).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    Some(
        order[..count]
            .iter()
            .map(|&i| v_t.row(i).transpose().map(|c| c.conj()))
            .collect(),
    )
}

/// Energy norm of the residual `−iωv + ikǍv − Dv`, with the system
/// assembled in global axes. The solution itself has unit energy norm.
pub fn residual(sol: &PlaneWaveSolution, material: &Material, rotation: &AxesRotation) -> Result<f64> {
    let (a, dmat, e) = match material {
        Material::Fluid(f) => {
            let s = crate::system::assemble_fluid(f, &sol.ell);
            (s.a_breve, s.dissipation, energy_matrix(material)?.full)
        }
        Material::Poroelastic(d) => {
            let n = rotation.to_material(&sol.ell);
            let s = assemble_poro(d, &n);
            let t = state_transform_matrix(rotation, false);
            let ti = state_transform_matrix(rotation, true);
            let e = energy_matrix(material)?.in_global_axes(rotation);
            (t * s.a_breve * ti, t * s.dissipation * ti, e)
        }
    };
    let i = C::new(0.0, 1.0);
    let r = sol.v * (-i * sol.omega) + complexify(&a) * sol.v * (i * sol.k)
        - complexify(&dmat) * sol.v;
    Ok(r.dotc(&(complexify(&e) * r)).re.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{rotation_from_angles, FluidMaterial, PoroelasticBase};
    use rand::{Rng, SeedableRng};

    const OMEGA: f64 = 2.0 * std::f64::consts::PI * 1e4;

    fn spec(base: PoroelasticBase, ell: Vector3<f64>, family: WaveFamily) -> PlaneWaveSpec {
        PlaneWaveSpec {
            ell,
            omega: OMEGA,
            family,
            polarization: None,
            material: Material::poroelastic(&base).unwrap(),
            rotation: AxesRotation::identity(),
        }
    }

    #[test]
    fn inviscid_fast_p_speed_along_axis_one() {
        let s = spec(PoroelasticBase::sandstone().inviscid(), Vector3::x(), WaveFamily::FastP);
        let sol = build_plane_wave(&s).unwrap();
        assert!((sol.phase_speed() - 6000.0).abs() / 6000.0 < 0.005);
        assert!(sol.k.im.abs() < 1e-12 * sol.k.re);
    }

    #[test]
    fn viscous_waves_decay_and_slow_p_most() {
        let mut worst = (0.0, WaveFamily::FastP);
        for f in [WaveFamily::FastP, WaveFamily::S1, WaveFamily::S2, WaveFamily::SlowP] {
            let sol = build_plane_wave(&spec(PoroelasticBase::sandstone(), Vector3::x(), f)).unwrap();
            assert!(sol.k.im > 0.0, "{f:?}");
            let r = sol.k.im / sol.k.re;
            if r > worst.0 {
                worst = (r, f);
            }
        }
        assert_eq!(worst.1, WaveFamily::SlowP);
    }

    #[test]
    fn residual_unit_norm_and_phase_random_directions() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let ell = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let rot = rotation_from_angles(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            for f in [WaveFamily::FastP, WaveFamily::S1, WaveFamily::S2, WaveFamily::SlowP] {
                let mut s = spec(PoroelasticBase::sandstone(), ell, f);
                s.rotation = rot;
                let sol = build_plane_wave(&s).unwrap();
                let res = residual(&sol, &s.material, &rot).unwrap();
                assert!(res <= 1e-9 * OMEGA, "{f:?} residual {res}");
                let e = energy_matrix(&s.material).unwrap().in_global_axes(&rot);
                let en = sol.v.dotc(&(complexify(&e) * sol.v));
                assert!((en.re - 1.0).abs() < 1e-10 && en.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_shear_follows_polarization() {
        for (pol, fam) in [(Vector3::x(), WaveFamily::S1), (Vector3::y(), WaveFamily::S2)] {
            let mut s = spec(PoroelasticBase::sandstone(), Vector3::z(), fam);
            s.polarization = Some(pol);
            let sol = build_plane_wave(&s).unwrap();
            let u = Vector3::new(sol.v[state::V1], sol.v[state::V2], sol.v[state::V3]);
            let along = u.dot(&pol.map(C::from));
            assert!(along.im.abs() < 1e-12 * along.re && along.re > 0.0);
            let other = pol.cross(&Vector3::z());
            assert!(u.dot(&other.map(C::from)).norm() < 1e-9 * along.norm());
        }
    }

    #[test]
    fn fluid_closed_form() {
        let f = FluidMaterial::brine();
        let ell = Vector3::new(1.0, 2.0, 2.0) / 3.0;
        let s = PlaneWaveSpec {
            ell,
            omega: OMEGA,
            family: WaveFamily::Acoustic,
            polarization: None,
            material: Material::Fluid(f),
            rotation: AxesRotation::identity(),
        };
        let sol = build_plane_wave(&s).unwrap();
        assert_eq!(sol.k, C::from(OMEGA / f.sound_speed));
        assert!(residual(&sol, &s.material, &s.rotation).unwrap() <= 1e-9 * OMEGA);
    }

    #[test]
    fn evaluation_periodicity_and_decay() {
        let inv = build_plane_wave(&spec(
            PoroelasticBase::sandstone().inviscid(),
            Vector3::x(),
            WaveFamily::FastP,
        ))
        .unwrap();
        let x = Vector3::new(0.3, -0.1, 0.2);
        let a = inv.evaluate(&x, 1e-5);
        let b = inv.evaluate(&x, 1e-5 + inv.period());
        for i in 0..NVARS {
            assert!((a[i] - b[i]).abs() <= 1e-9 * inv.v[i].norm());
        }
        assert_eq!(inv.evaluate(&Vector3::zeros(), 0.0), inv.v.map(|c| c.re));

        let sol = build_plane_wave(&spec(PoroelasticBase::sandstone(), Vector3::x(), WaveFamily::SlowP)).unwrap();
        let d = sol.decay_length().unwrap();
        let env = |x: f64| {
            // Envelope from the quadrature pair at a quarter-period offset.
            let p0 = sol.evaluate(&Vector3::new(x, 0.0, 0.0), 0.0)[state::P];
            let p1 = sol.evaluate(&Vector3::new(x, 0.0, 0.0), sol.period() / 4.0)[state::P];
            p0.hypot(p1)
        };
        assert!((env(d) / env(0.0) - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn reversed_direction_mirrors_solution() {
        for f in [WaveFamily::FastP, WaveFamily::SlowP] {
            let ell = Vector3::new(0.2, 0.3, 0.9).normalize();
            let a = build_plane_wave(&spec(PoroelasticBase::sandstone(), ell, f)).unwrap();
            let b = build_plane_wave(&spec(PoroelasticBase::sandstone(), -ell, f)).unwrap();
            assert!((a.k - b.k).norm() < 1e-9 * a.k.norm());
            for i in state::V1..=state::Q3 {
                assert!((a.v[i] + b.v[i]).norm() < 1e-8 * a.v.norm());
            }
            for i in 0..=state::P {
                assert!((a.v[i] - b.v[i]).norm() < 1e-8 * a.v.norm());
            }
        }
    }
}
