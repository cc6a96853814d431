//! The 13-component state vector and its index layout.
//!
//! Ordering: `(τ11, τ22, τ33, τ23, τ13, τ12, p, v1, v2, v3, q1, q2, q3)`.
//! Stresses use Voigt order; `v` is the solid velocity and `q` the fluid
//! flow rate relative to the solid. In a fluid only `p` and `q` are used,
//! the remaining entries are identically zero.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

pub const NVARS: usize = 13;

pub type StateVector = SVector<f64, NVARS>;
pub type Matrix13 = SMatrix<f64, NVARS, NVARS>;

pub const TAU11: usize = 0;
pub const TAU22: usize = 1;
pub const TAU33: usize = 2;
pub const TAU23: usize = 3;
pub const TAU13: usize = 4;
pub const TAU12: usize = 5;
pub const P: usize = 6;
pub const V1: usize = 7;
pub const V2: usize = 8;
pub const V3: usize = 9;
pub const Q1: usize = 10;
pub const Q2: usize = 11;
pub const Q3: usize = 12;

/// Field names as written to output files.
pub const FIELD_NAMES: [&str; NVARS] = [
    "tau_xx", "tau_yy", "tau_zz", "tau_yz", "tau_xz", "tau_xy", "p", "v_x", "v_y", "v_z", "q_x",
    "q_y", "q_z",
];

pub fn solid_velocity(q: &StateVector) -> Vector3<f64> {
    Vector3::new(q[V1], q[V2], q[V3])
}

pub fn fluid_flow(q: &StateVector) -> Vector3<f64> {
    Vector3::new(q[Q1], q[Q2], q[Q3])
}

/// Stress components as a symmetric 3×3 tensor.
pub fn stress_tensor(q: &StateVector) -> Matrix3<f64> {
    Matrix3::new(
        q[TAU11], q[TAU12], q[TAU13], //
        q[TAU12], q[TAU22], q[TAU23], //
        q[TAU13], q[TAU23], q[TAU33],
    )
}

pub fn set_stress_tensor(q: &mut StateVector, t: &Matrix3<f64>) {
    q[TAU11] = t[(0, 0)];
    q[TAU22] = t[(1, 1)];
    q[TAU33] = t[(2, 2)];
    q[TAU23] = t[(1, 2)];
    q[TAU13] = t[(0, 2)];
    q[TAU12] = t[(0, 1)];
}
