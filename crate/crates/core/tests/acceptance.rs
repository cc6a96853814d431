//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Positional arguments filter criteria by name.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DVector, Matrix3, Vector3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use porowave::grid::{cell_volume_centroid, face_normal_area};
use porowave::harness::{self, cases, DemoOutcome};
use porowave::limiter::StrengthRatio;
use porowave::materials::{
    derive_poroelastic, rotation_from_angles, AxesRotation, FluidMaterial, Material,
    PoroelasticBase,
};
use porowave::riemann::{
    discharge_impedance, interface_matrices, solve_interface, solve_same_material, FaceSolver,
    InterfaceKind, InterfaceSpec,
};
use porowave::solver::source_step;
use porowave::state::{self, StateVector, NVARS};
use porowave::system::{assemble_poro, eigendecompose, Direction, Medium, WaveFamily};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sandstone(id: usize, rot: AxesRotation) -> Medium {
    let d = derive_poroelastic(&PoroelasticBase::sandstone()).unwrap();
    Medium::new(id, Material::Poroelastic(d), rot).unwrap()
}

fn random_rotation(rng: &mut StdRng) -> AxesRotation {
    let pi = std::f64::consts::PI;
    rotation_from_angles(
        rng.random_range(-pi..pi),
        rng.random_range(-pi / 2.0..pi / 2.0),
        rng.random_range(-pi..pi),
    )
}

fn random_unit(rng: &mut StdRng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn material_speeds() -> Outcome {
    let base = PoroelasticBase::sandstone().inviscid();
    let m = Medium::new(0, Material::poroelastic(&base).unwrap(), AxesRotation::identity()).unwrap();
    let speeds = |n: Vector3<f64>, family: WaveFamily| -> Vec<f64> {
        eigendecompose(&m, &n)
            .unwrap()
            .right_going()
            .filter(|w| w.label.family == family)
            .map(|w| w.speed)
            .collect()
    };
    let x = Vector3::x();
    let z = Vector3::z();
    let shear_x: Vec<f64> = [speeds(x, WaveFamily::S1), speeds(x, WaveFamily::S2)].concat();
    let shear_z: Vec<f64> = [speeds(z, WaveFamily::S1), speeds(z, WaveFamily::S2)].concat();
    // The tabulated axis-1 shear speed is the slower of the two, polarized
    // along axis 3.
    let slow_shear_x = shear_x.iter().cloned().fold(f64::INFINITY, f64::min);
    let checks = [
        ("c_pf1", speeds(x, WaveFamily::FastP)[0], 6000.0),
        ("c_pf3", speeds(z, WaveFamily::FastP)[0], 5260.0),
        ("c_s1", slow_shear_x, 3480.0),
        ("c_s3a", shear_z[0], 3520.0),
        ("c_s3b", shear_z[1], 3520.0),
        ("c_ps1", speeds(x, WaveFamily::SlowP)[0], 1030.0),
        ("c_ps3", speeds(z, WaveFamily::SlowP)[0], 746.0),
    ];
    let worst = checks.iter().map(|c| rel(c.1, c.2)).fold(0.0, f64::max);
    let detail = checks
        .iter()
        .map(|(n, got, want)| format!("{n}={got:.1}/{want}"))
        .collect::<Vec<_>>()
        .join(" ");
    check(worst <= 5e-3, format!("{detail} worst={worst:.2e}"))
}

fn dissipation_times() -> Outcome {
    let m = sandstone(0, AxesRotation::identity());
    let dt = 1e-8;
    let tau = |component: usize| {
        let mut q = StateVector::zeros();
        q[component] = 1.0;
        let out = source_step(&q, &m, dt);
        -dt / out[component].ln()
    };
    let t1 = tau(state::Q1);
    let t3 = tau(state::Q3);
    let e = rel(t1, 5.95e-6).max(rel(t3, 1.82e-6));
    check(e <= 1e-2, format!("tau_d1={:.4} us tau_d3={:.4} us rel={e:.2e}", t1 * 1e6, t3 * 1e6))
}

fn symmetrization() -> Outcome {
    let mut rng = StdRng::seed_from_u64(77);
    let d = derive_poroelastic(&PoroelasticBase::sandstone()).unwrap();
    let mut worst_sym: f64 = 0.0;
    let mut worst_gram: f64 = 0.0;
    for _ in 0..100 {
        let medium = sandstone(0, random_rotation(&mut rng));
        let n = random_unit(&mut rng);
        let n_mat = medium.rotation.to_material(&n);
        let a = medium.to_global * assemble_poro(&d, &n_mat).a_breve * medium.to_material;
        let ea = medium.energy * a;
        worst_sym = worst_sym.max((ea - ea.transpose()).norm() / ea.norm());
        let basis = eigendecompose(&medium, &n).unwrap();
        for (i, wi) in basis.waves.iter().enumerate() {
            for (j, wj) in basis.waves.iter().enumerate() {
                let g = wi.vector.dot(&(medium.energy * wj.vector));
                let want = if i == j { 1.0 } else { 0.0 };
                worst_gram = worst_gram.max((g - want).abs());
            }
        }
    }
    check(
        worst_sym <= 1e-12 && worst_gram <= 1e-9,
        format!("asym={worst_sym:.2e} gram={worst_gram:.2e}"),
    )
}

/// Volume of a trilinear hexahedron by 4-point Gauss-Legendre quadrature
/// of the Jacobian determinant.
fn volume_oracle(v: &[Vector3<f64>; 8]) -> f64 {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
    let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
    let nodes = [(-b, wb), (-a, wa), (a, wa), (b, wb)];
    let mut vol = 0.0;
    for &(x, wx) in &nodes {
        for &(y, wy) in &nodes {
            for &(z, wz) in &nodes {
                let s = [(x + 1.0) / 2.0, (y + 1.0) / 2.0, (z + 1.0) / 2.0];
                let mut jac = Matrix3::zeros();
                for c in 0..8 {
                    let e = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
                    let lin = |k: usize| if e[k] == 1 { s[k] } else { 1.0 - s[k] };
                    let dlin = |k: usize| if e[k] == 1 { 1.0 } else { -1.0 };
                    let grad = Vector3::new(
                        dlin(0) * lin(1) * lin(2),
                        lin(0) * dlin(1) * lin(2),
                        lin(0) * lin(1) * dlin(2),
                    );
                    jac += v[c] * grad.transpose();
                }
                vol += wx * wy * wz * jac.determinant() / 8.0;
            }
        }
    }
    vol
}

fn geometry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst_closure: f64 = 0.0;
    let mut worst_volume: f64 = 0.0;
    for _ in 0..1000 {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let v: [Vector3<f64>; 8] = std::array::from_fn(|c| {
            let corner = Vector3::new((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64);
            (corner + Vector3::from_fn(|_, _| rng.random_range(-0.25..0.25))) * scale
        });
        let p = |a: usize, b: usize, c: usize| v[a + 2 * b + 4 * c];
        let mut sum = Vector3::zeros();
        let mut amax: f64 = 0.0;
        for s in 0..2 {
            let sign = if s == 1 { 1.0 } else { -1.0 };
            let faces = [
                face_normal_area([p(s, 0, 0), p(s, 1, 0), p(s, 0, 1), p(s, 1, 1)], Vector3::x()),
                face_normal_area([p(0, s, 0), p(0, s, 1), p(1, s, 0), p(1, s, 1)], Vector3::y()),
                face_normal_area([p(0, 0, s), p(1, 0, s), p(0, 1, s), p(1, 1, s)], Vector3::z()),
            ];
            for f in faces {
                sum += f.normal * f.area * sign;
                amax = amax.max(f.area);
            }
        }
        worst_closure = worst_closure.max(sum.norm() / amax);
        let (vol, _) = cell_volume_centroid(&v);
        worst_volume = worst_volume.max(rel(vol, volume_oracle(&v)));
    }
    check(
        worst_closure <= 1e-12 && worst_volume <= 1e-12,
        format!("closure={worst_closure:.2e} volume={worst_volume:.2e}"),
    )
}

fn convergence(ids: &[usize], lo: f64, hi: f64) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for &id in ids {
        let r = harness::run_convergence(id, &[20, 40, 80]).map_err(|e| e.to_string())?;
        let rate = r.rate_l1.unwrap_or(f64::NAN);
        ok &= (lo..=hi).contains(&rate);
        parts.push(format!(
            "case {id}: l1={:.3e},{:.3e},{:.3e} rate={rate:.3}",
            r.l1[0], r.l1[1], r.l1[2]
        ));
    }
    check(ok, parts.join("; "))
}

fn limiter_max(n: usize, ratio: StrengthRatio) -> Result<f64, String> {
    let c = cases::build_limiter_case(n, ratio).map_err(|e| e.to_string())?;
    harness::run_and_measure(&c).map(|e| e.max).map_err(|e| e.to_string())
}

fn limiter_comparison() -> Outcome {
    let c50 = limiter_max(50, StrengthRatio::Classical)?;
    let e50 = limiter_max(50, StrengthRatio::EFull)?;
    let c100 = limiter_max(100, StrengthRatio::Classical)?;
    let e100 = limiter_max(100, StrengthRatio::EFull)?;
    let (r50, r100) = (e50 / c50, e100 / c100);
    let ok = rel(c50, 4.21e-2) <= 0.3 && rel(e50, 1.58e-2) <= 0.3 && r50 <= 0.5 && r100 < r50;
    check(
        ok,
        format!(
            "50: classical={c50:.3e} e-full={e50:.3e} ratio={r50:.3}; 100: classical={c100:.3e} e-full={e100:.3e} ratio={r100:.3}"
        ),
    )
}

fn random_state(rng: &mut StdRng) -> StateVector {
    let mut q = StateVector::from_fn(|_, _| rng.random_range(-1.0..1.0));
    for i in 0..=state::P {
        q[i] *= 1e6;
    }
    q
}

fn interface_residual(rng: &mut StdRng, fluid: bool, eta_d: f64) -> f64 {
    let left = sandstone(0, random_rotation(rng));
    let right = if fluid {
        Medium::new(1, Material::Fluid(FluidMaterial::brine()), AxesRotation::identity()).unwrap()
    } else {
        let stiff = PoroelasticBase::sandstone().with_moduli_scaled(rng.random_range(0.5..2.0));
        Medium::new(1, Material::poroelastic(&stiff).unwrap(), random_rotation(rng)).unwrap()
    };
    let n = random_unit(rng);
    let spec = InterfaceSpec::between(&left, &right, eta_d).unwrap();
    let z_f = discharge_impedance(&left, &right);
    let ql = random_state(rng);
    let mut qr = random_state(rng);
    if fluid {
        for i in 0..NVARS {
            if ![state::P, state::Q1, state::Q2, state::Q3].contains(&i) {
                qr[i] = 0.0;
            }
        }
    }
    let bl = eigendecompose(&left, &n).unwrap();
    let br = eigendecompose(&right, &n).unwrap();
    let ws = solve_interface(&ql, &qr, &bl, &br, &spec, z_f).unwrap();
    let ql_star = ql + ws.sum(Direction::Left);
    let qr_star = qr - ws.sum(Direction::Right);
    let (cl, cr) = interface_matrices(spec.kind, &n, eta_d, z_f);
    let lhs = &cl * DVector::from_column_slice(ql_star.as_slice());
    let rhs = &cr * DVector::from_column_slice(qr_star.as_slice());
    let row_scale = |m: &nalgebra::DMatrix<f64>, q: &StateVector| {
        m.row_iter()
            .map(|r| r.iter().zip(q.iter()).map(|(a, b)| (a * b).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let scale = row_scale(&cl, &ql_star).max(row_scale(&cr, &qr_star));
    (lhs - rhs).amax() / scale
}

fn interface_solver() -> Outcome {
    let mut rng = StdRng::seed_from_u64(31);
    let mut worst_pp: f64 = 0.0;
    let mut worst_pf: f64 = 0.0;
    for eta in [0.0, 0.5, 1.0] {
        for _ in 0..1000 {
            worst_pp = worst_pp.max(interface_residual(&mut rng, false, eta));
            worst_pf = worst_pf.max(interface_residual(&mut rng, true, eta));
        }
    }
    let mut worst_same: f64 = 0.0;
    for _ in 0..100 {
        let rot = random_rotation(&mut rng);
        let left = sandstone(0, rot);
        let right = sandstone(1, rot);
        let n = random_unit(&mut rng);
        let fs = FaceSolver::new(&left, &right, &n, 1.0).unwrap();
        assert_eq!(InterfaceSpec::between(&left, &right, 1.0).unwrap().kind, InterfaceKind::PoroPoro);
        let ql = random_state(&mut rng);
        let qr = random_state(&mut rng);
        let a = solve_same_material(&ql, &qr, &eigendecompose(&left, &n).unwrap(), &left.energy);
        let b = fs.wave_set(&ql, &qr, n);
        let scale = a.amdq.amax().max(a.apdq.amax());
        worst_same = worst_same
            .max((a.amdq - b.amdq).amax() / scale)
            .max((a.apdq - b.apdq).amax() / scale);
    }
    check(
        worst_pp <= 1e-9 && worst_pf <= 1e-9 && worst_same <= 1e-9,
        format!("poro-poro={worst_pp:.2e} poro-fluid={worst_pf:.2e} identical={worst_same:.2e}"),
    )
}

fn demo() -> Outcome {
    let d: DemoOutcome = harness::run_demo([60, 60, 120], None).map_err(|e| e.to_string())?;
    let (i, v) = (&d.inviscid, &d.viscous);
    let detail = format!(
        "steps={} energy inviscid={:.4e} viscous={:.4e}; rock energy {:.3e}/{:.3e}; symmetry {:.2e}/{:.2e}; slice |p| {:.3e}",
        d.steps,
        i.final_energy,
        v.final_energy,
        i.rock_energy,
        v.rock_energy,
        i.symmetry_error,
        v.symmetry_error,
        v.slice_peak_pressure
    );
    let finite = i.final_energy.is_finite() && v.final_energy.is_finite();
    let ok = finite
        && i.symmetry_error <= 1e-10
        && v.symmetry_error <= 1e-10
        && v.final_energy < i.final_energy
        && i.rock_energy > 0.0
        && v.rock_energy > 0.0
        && v.slice_peak_pressure > 0.0;
    check(ok, detail)
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("material_speeds", material_speeds),
        ("dissipation_times", dissipation_times),
        ("symmetrization", symmetrization),
        ("geometry", geometry),
        ("interface_solver", interface_solver),
        ("convergence_grid_aligned", || convergence(&[0, 5, 6, 3], 1.8, 2.2)),
        ("convergence_oblique", || convergence(&[32], 0.8, 1.2)),
        ("limiter_comparison", limiter_comparison),
        ("demo", demo),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name} ({secs:.1}s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
