//! Logically rectangular mapped hexahedral grids.
//!
//! Computational coordinates are `ξ ∈ [0,1]³`; ghost layers are generated
//! by evaluating the mapping outside that cube. Cell `(i,j,k)` of the
//! extended (ghost-inclusive) index space covers
//! `ξ_d ∈ [(i_d − g)Δξ_d, (i_d − g + 1)Δξ_d]`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{rotation_from_angles, AxesRotation};

pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    /// Unit normal, oriented along increasing grid index.
    pub normal: Vector3<f64>,
    pub area: f64,
}

/// Normal and area of the bilinear patch `r(u,w)` through the four corners
/// `[r(0,0), r(1,0), r(0,1), r(1,1)]`, with the normal along `∂u × ∂w`.
///
/// The area-weighted normal is the integral of the local normal over the
/// patch, which reduces to the cross product of the edge-midpoint vectors.
pub fn face_normal_area(r: [Vector3<f64>; 4], placeholder: Vector3<f64>) -> FaceGeometry {
    let du = (r[1] + r[3] - r[0] - r[2]) * 0.5;
    let dw = (r[2] + r[3] - r[0] - r[1]) * 0.5;
    let na = du.cross(&dw);
    let area = na.norm();
    if area == 0.0 {
        FaceGeometry {
            normal: placeholder,
            area: 0.0,
        }
    } else {
        FaceGeometry {
            normal: na / area,
            area,
        }
    }
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Trilinear map of a cell; `v[a + 2b + 4c]` is the corner at local
/// coordinates `(a, b, c)`.
fn trilinear(v: &[Vector3<f64>; 8], e: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>) {
    let mut r = Vector3::zeros();
    let mut jac = Matrix3::zeros();
    for c in 0..2 {
        for b in 0..2 {
            for a in 0..2 {
                let corner = v[a + 2 * b + 4 * c];
                let w = [
                    if a == 1 { e[0] } else { 1.0 - e[0] },
                    if b == 1 { e[1] } else { 1.0 - e[1] },
                    if c == 1 { e[2] } else { 1.0 - e[2] },
                ];
                let dw = [
                    if a == 1 { 1.0 } else { -1.0 },
                    if b == 1 { 1.0 } else { -1.0 },
                    if c == 1 { 1.0 } else { -1.0 },
                ];
                r += corner * (w[0] * w[1] * w[2]);
                jac.column_mut(0).axpy(dw[0] * w[1] * w[2], &corner, 1.0);
                jac.column_mut(1).axpy(w[0] * dw[1] * w[2], &corner, 1.0);
                jac.column_mut(2).axpy(w[0] * w[1] * dw[2], &corner, 1.0);
            }
        }
    }
    (r, jac)
}

/// Volume and centroid of a trilinear hexahedron by 2×2×2 Gauss-Legendre
/// quadrature, which is exact for both integrands.
pub fn cell_volume_centroid(v: &[Vector3<f64>; 8]) -> (f64, Vector3<f64>) {
    let mut vol = 0.0;
    let mut moment = Vector3::zeros();
    for &a in &GAUSS2 {
        for &b in &GAUSS2 {
            for &c in &GAUSS2 {
                let (r, jac) = trilinear(v, [a, b, c]);
                let det = jac.determinant() / 8.0;
                vol += det;
                moment += r * det;
            }
        }
    }
    (vol, moment / vol)
}

/// Parameters of the undulating sandstone bed and its grid mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndulatingBed {
    pub z0: f64,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
    pub z_bot: f64,
    pub z_top: f64,
    pub xi_bot: f64,
    pub xi_int: f64,
    pub xi_top: f64,
    pub r_bot: f64,
    pub r_top: f64,
}

impl Default for UndulatingBed {
    fn default() -> Self {
        let lx = 2.0;
        let ly = 2.0;
        let xi_bot = 0.15;
        let xi_top = 0.9;
        Self {
            z0: 0.0,
            lx,
            ly,
            hx: 3.0 * lx / (16.0 * std::f64::consts::PI),
            hy: 3.0 * ly / (16.0 * std::f64::consts::PI),
            z_bot: -1.0,
            z_top: 0.5,
            xi_bot,
            xi_int: 0.6,
            xi_top,
            r_bot: 2.0 / xi_bot,
            r_top: 2.0 / (1.0 - xi_top),
        }
    }
}

impl UndulatingBed {
    pub fn z_int(&self, x: f64, y: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        self.z0 + self.hx * (tau * x / self.lx).cos() + self.hy * (tau * y / self.ly).cos()
    }

    /// Upward unit normal of the bed surface above `(x, y)`.
    pub fn surface_normal(&self, x: f64, y: f64) -> Vector3<f64> {
        let tau = 2.0 * std::f64::consts::PI;
        let dzdx = -self.hx * tau / self.lx * (tau * x / self.lx).sin();
        let dzdy = -self.hy * tau / self.ly * (tau * y / self.ly).sin();
        Vector3::new(-dzdx, -dzdy, 1.0).normalize()
    }

    pub fn dz_bot(&self) -> f64 {
        (self.z0 - self.hx - self.hy - self.z_bot) / (self.xi_int - self.xi_bot)
    }

    pub fn dz_top(&self) -> f64 {
        (self.z_top - self.z0 - self.hx - self.hy) / (self.xi_top - self.xi_int)
    }

    fn blend(&self, xi3: f64, xi_star: f64) -> f64 {
        let t = (xi3 - xi_star) / (self.xi_int - xi_star);
        0.5 * ((1.0 + 8.0 * t * t).sqrt() - 1.0)
    }

    pub fn z(&self, x: f64, y: f64, xi3: f64) -> f64 {
        if xi3 < self.xi_bot {
            self.z_bot + self.dz_bot() / self.r_bot * (self.r_bot * (xi3 - self.xi_bot)).sinh()
        } else if xi3 < self.xi_int {
            let a = self.z_int(x, y) - (self.z0 - self.hx - self.hy);
            self.z_bot + self.dz_bot() * (xi3 - self.xi_bot) + a * self.blend(xi3, self.xi_bot)
        } else if xi3 < self.xi_top {
            let a = self.z_int(x, y) - (self.z0 + self.hx + self.hy);
            self.z_top + self.dz_top() * (xi3 - self.xi_top) + a * self.blend(xi3, self.xi_top)
        } else {
            self.z_top + self.dz_top() / self.r_top * (self.r_top * (xi3 - self.xi_top)).sinh()
        }
    }

    pub fn map(&self, xi: [f64; 3]) -> Vector3<f64> {
        let x = xi[0] * self.lx / 2.0;
        let y = xi[1] * self.ly / 2.0;
        Vector3::new(x, y, self.z(x, y, xi[2]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridMapping {
    /// Cube of edge `edge` centred at `center`, rotated by yaw/pitch/roll
    /// (degrees) about its centre.
    ScaledBox {
        edge: f64,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default)]
        rotation_deg: [f64; 3],
    },
    /// Cube `[-L/2, L/2]³` whose ξ3 surfaces tilt in x below the mid-plane
    /// and in y above it.
    Tilt { length: f64, sigma: f64 },
    UndulatingBed(UndulatingBed),
}

impl GridMapping {
    pub fn unit_cube() -> Self {
        GridMapping::ScaledBox {
            edge: 1.0,
            center: [0.5; 3],
            rotation_deg: [0.0; 3],
        }
    }

    pub fn map(&self, xi: [f64; 3]) -> Vector3<f64> {
        match self {
            GridMapping::ScaledBox {
                edge,
                center,
                rotation_deg,
            } => {
                let local = Vector3::new(xi[0] - 0.5, xi[1] - 0.5, xi[2] - 0.5) * *edge;
                let r = box_rotation(rotation_deg);
                Vector3::from(*center) + r.matrix * local
            }
            GridMapping::Tilt { length, sigma } => {
                let [a, b, c] = xi.map(|x| 2.0 * x - 1.0);
                let h = length / 2.0;
                let z = if c < 0.0 {
                    c + sigma * a * c.powi(3)
                } else {
                    c + sigma * b * c.powi(3)
                };
                Vector3::new(a * h, b * h, z * h)
            }
            GridMapping::UndulatingBed(bed) => bed.map(xi),
        }
    }

    /// Largest jump in value, first and second ξ3-derivative across the
    /// tilt map's seam at ξ3 = ½, sampled over the seam plane.
    pub fn tilt_seam_mismatch(&self) -> Option<f64> {
        let GridMapping::Tilt { length, sigma } = *self else {
            return None;
        };
        // z(c) = (c + σ s c³) L/2 on each branch, s = ξ1' below and ξ2' above.
        let derivs = |s: f64, c: f64| {
            let h = length / 2.0;
            [
                (c + sigma * s * c.powi(3)) * h,
                (1.0 + 3.0 * sigma * s * c * c) * h,
                6.0 * sigma * s * c * h,
            ]
        };
        let mut worst: f64 = 0.0;
        for ia in 0..=10 {
            for ib in 0..=10 {
                let a = -1.0 + 0.2 * ia as f64;
                let b = -1.0 + 0.2 * ib as f64;
                let lo = derivs(a, 0.0);
                let hi = derivs(b, 0.0);
                for d in 0..3 {
                    worst = worst.max((lo[d] - hi[d]).abs());
                }
            }
        }
        Some(worst)
    }
}

pub(crate) fn box_rotation(deg: &[f64; 3]) -> AxesRotation {
    let [y, p, r] = deg.map(f64::to_radians);
    rotation_from_angles(y, p, r)
}

/// Geometry of a mapped grid including `GHOST` layers on every side.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    pub mapping: GridMapping,
    /// Interior cell counts.
    pub dims: [usize; 3],
    pub ghost: usize,
    /// Ghost-inclusive cell counts.
    pub ext: [usize; 3],
    /// Vertices, `(ext[0]+1) × (ext[1]+1) × (ext[2]+1)`, first index fastest.
    pub vertices: Vec<Vector3<f64>>,
    pub volume: Vec<f64>,
    pub centroid: Vec<Vector3<f64>>,
    /// `faces[d][cell]` is the face on the low-`d` side of `cell`.
    pub faces: [Vec<FaceGeometry>; 3],
}

impl MappedGrid {
    pub fn build(mapping: GridMapping, dims: [usize; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "grid dimensions must be positive, got {dims:?}"
            )));
        }
        let g = GHOST;
        let ext = dims.map(|n| n + 2 * g);
        let vdims = ext.map(|n| n + 1);
        let mut vertices = Vec::with_capacity(vdims[0] * vdims[1] * vdims[2]);
        for k in 0..vdims[2] {
            for j in 0..vdims[1] {
                for i in 0..vdims[0] {
                    let xi = [
                        (i as f64 - g as f64) / dims[0] as f64,
                        (j as f64 - g as f64) / dims[1] as f64,
                        (k as f64 - g as f64) / dims[2] as f64,
                    ];
                    vertices.push(mapping.map(xi));
                }
            }
        }
        let vid = |i: usize, j: usize, k: usize| i + vdims[0] * (j + vdims[1] * k);

        let ncell = ext[0] * ext[1] * ext[2];
        let mut volume = Vec::with_capacity(ncell);
        let mut centroid = Vec::with_capacity(ncell);
        let mut faces: [Vec<FaceGeometry>; 3] = std::array::from_fn(|_| Vec::with_capacity(ncell));
        for k in 0..ext[2] {
            for j in 0..ext[1] {
                for i in 0..ext[0] {
                    let corners: [Vector3<f64>; 8] = std::array::from_fn(|m| {
                        vertices[vid(i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1))]
                    });
                    let (v, c) = cell_volume_centroid(&corners);
                    if !(v > 0.0) {
                        return Err(Error::InvertedCell {
                            index: [i, j, k],
                            volume: v,
                        });
                    }
                    volume.push(v);
                    centroid.push(c);
                    // Low ξ1 face, parameterized by (ξ2, ξ3).
                    faces[0].push(face_normal_area(
                        [corners[0], corners[2], corners[4], corners[6]],
                        Vector3::x(),
                    ));
                    // Low ξ2 face, parameterized by (ξ3, ξ1).
                    faces[1].push(face_normal_area(
                        [corners[0], corners[4], corners[1], corners[5]],
                        Vector3::y(),
                    ));
                    // Low ξ3 face, parameterized by (ξ1, ξ2).
                    faces[2].push(face_normal_area(
                        [corners[0], corners[1], corners[2], corners[3]],
                        Vector3::z(),
                    ));
                }
            }
        }
        Ok(Self {
            mapping,
            dims,
            ghost: g,
            ext,
            vertices,
            volume,
            centroid,
            faces,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.ext[0] * self.ext[1] * self.ext[2]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.ext[0] * (j + self.ext[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.ext[0];
        let j = (idx / self.ext[0]) % self.ext[1];
        let k = idx / (self.ext[0] * self.ext[1]);
        [i, j, k]
    }

    /// Index step between neighbours along direction `d`.
    pub fn stride(&self, d: usize) -> usize {
        match d {
            0 => 1,
            1 => self.ext[0],
            _ => self.ext[0] * self.ext[1],
        }
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..3).all(|d| c[d] >= self.ghost && c[d] < self.ghost + self.dims[d])
    }

    /// Extended indices of interior cells, in storage order.
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let g = self.ghost;
        (g..g + self.dims[2]).flat_map(move |k| {
            (g..g + self.dims[1])
                .flat_map(move |j| (g..g + self.dims[0]).map(move |i| self.index(i, j, k)))
        })
    }

    /// Computational coordinates of the centre of extended cell `idx`.
    pub fn cell_xi(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        std::array::from_fn(|d| (c[d] as f64 - self.ghost as f64 + 0.5) / self.dims[d] as f64)
    }

    /// Cell volume divided by the computational cell volume.
    pub fn capacity(&self, idx: usize) -> f64 {
        self.volume[idx] * (self.dims[0] * self.dims[1] * self.dims[2]) as f64
    }

    pub fn interior_volume(&self) -> f64 {
        self.interior_indices().map(|i| self.volume[i]).sum()
    }

    /// Outward `Σ n A` over the six faces of a cell.
    pub fn closure_residual(&self, idx: usize) -> Vector3<f64> {
        let mut s = Vector3::zeros();
        for d in 0..3 {
            let lo = self.faces[d][idx];
            let hi = self.faces[d][idx + self.stride(d)];
            s += hi.normal * hi.area - lo.normal * lo.area;
        }
        s
    }
}
