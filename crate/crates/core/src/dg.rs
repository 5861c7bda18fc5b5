//! Semi-discrete nodal DG operator for the 2D viscoelastic system with penalty fluxes.
//!
//! Per element the unknowns are stored field-major: `q[(k * NFIELDS + f) * np + i]`
//! with fields `[s11, s33, s13, y1, y2, y5, v1, v3]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::materials::ViscoCoefficients;
use crate::mesh::{DgMesh, FaceLink, Marker};
use crate::quadrature::TriangleRule;
use crate::refelem::ReferenceElement;

pub const NFIELDS: usize = 8;
pub const S11: usize = 0;
pub const S33: usize = 1;
pub const S13: usize = 2;
pub const Y1: usize = 3;
pub const Y2: usize = 4;
pub const Y5: usize = 5;
pub const V1: usize = 6;
pub const V3: usize = 7;
pub const FIELD_NAMES: [&str; NFIELDS] = ["s11", "s33", "s13", "y1", "y2", "y5", "v1", "v3"];

const MAX_NP: usize = 45;
const MAX_NFP: usize = 9;

/// Impedance that makes the penalty parameters dimensionless: 1 GPa per km/s.
pub const DEFAULT_Z_REF: f64 = 1.0e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DgError {
    #[error("state has length {got}, expected {expected}")]
    Shape { got: usize, expected: usize },
    #[error("non-finite value in element {element}")]
    NonFinite { element: usize },
    #[error("no boundary condition for marker {0}")]
    MissingBoundary(u32),
    #[error("element {element} references material {id}, only {count} given")]
    MaterialId { element: usize, id: usize, count: usize },
    #[error("prescribed boundary without exterior data")]
    MissingExterior,
    #[error("penalty parameters must be non-negative")]
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub alpha_sigma: f64,
    pub alpha_v: f64,
    /// Reference impedance in Pa s/m.
    pub z_ref: f64,
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::uniform(0.5)
    }
}

impl Penalty {
    pub fn uniform(alpha: f64) -> Self {
        Penalty { alpha_sigma: alpha, alpha_v: alpha, z_ref: DEFAULT_Z_REF }
    }

    pub fn sigma_eff(&self) -> f64 {
        self.alpha_sigma / self.z_ref
    }

    pub fn v_eff(&self) -> f64 {
        self.alpha_v * self.z_ref
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    FreeSurface,
    Absorbing,
    /// Exterior state taken from an [`ExteriorField`].
    Prescribed,
}

impl std::str::FromStr for BoundaryKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "free_surface" => Ok(BoundaryKind::FreeSurface),
            "absorbing" => Ok(BoundaryKind::Absorbing),
            "prescribed" => Ok(BoundaryKind::Prescribed),
            _ => Err(format!("unknown boundary condition `{s}`")),
        }
    }
}

/// Exterior trace data `[s11, s33, s13, v1, v3]` for prescribed boundaries.
pub trait ExteriorField: Send + Sync {
    fn eval(&self, x: f64, z: f64, t: f64) -> [f64; 5];
}

/// Stress-block rows of `A_n = n1 A1 + n3 A3` against `(v1, v3)`.
pub fn normal_matrix(n1: f64, n3: f64) -> [[f64; 2]; 3] {
    [[n1, 0.0], [0.0, n3], [n3, n1]]
}

/// `A_n^T s`, the traction.
#[inline]
pub fn traction(s: [f64; 3], n1: f64, n3: f64) -> [f64; 2] {
    [s[0] * n1 + s[2] * n3, s[2] * n1 + s[1] * n3]
}

/// Jumps `[[A_n^T s]]` and `[[v]]` (exterior minus interior) on a boundary face.
pub fn apply_bc(kind: BoundaryKind, tr_in: [f64; 2], v_in: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    match kind {
        BoundaryKind::FreeSurface => ([-2.0 * tr_in[0], -2.0 * tr_in[1]], [0.0, 0.0]),
        BoundaryKind::Absorbing => ([-tr_in[0], -tr_in[1]], [-v_in[0], -v_in[1]]),
        BoundaryKind::Prescribed => panic!("prescribed boundaries need exterior data"),
    }
}

/// Penalty flux from traction and velocity jumps:
/// `F_s = A_n [[v]]/2 + a_s A_n [[Tr]]/2`, `F_v = [[Tr]]/2 + a_v A_n^T A_n [[v]]/2`.
#[inline]
pub fn numerical_flux(dtr: [f64; 2], dv: [f64; 2], n1: f64, n3: f64, a_s: f64, a_v: f64) -> ([f64; 3], [f64; 2]) {
    let an = |u: [f64; 2]| [n1 * u[0], n3 * u[1], n3 * u[0] + n1 * u[1]];
    let av = an(dv);
    let at = an(dtr);
    let fs = [
        0.5 * (av[0] + a_s * at[0]),
        0.5 * (av[1] + a_s * at[1]),
        0.5 * (av[2] + a_s * at[2]),
    ];
    let nn = n1 * n3;
    let fv = [
        0.5 * (dtr[0] + a_v * (dv[0] + nn * dv[1])),
        0.5 * (dtr[1] + a_v * (nn * dv[0] + dv[1])),
    ];
    (fs, fv)
}

/// Boundary-condition kind per mesh marker.
pub type BoundaryConditions = BTreeMap<Marker, BoundaryKind>;

pub fn uniform_boundary(kind: BoundaryKind) -> BoundaryConditions {
    [Marker::LEFT, Marker::RIGHT, Marker::BOTTOM, Marker::TOP].into_iter().map(|m| (m, kind)).collect()
}

#[derive(Debug, Clone)]
struct ElementMaterial {
    c: [[f64; 3]; 3],
    c_inv: [[f64; 3]; 3],
    qs_s: [[f64; 6]; 6],
    rho: f64,
}

pub struct DgOperator {
    pub re: ReferenceElement,
    pub mesh: DgMesh,
    pub materials: Vec<ViscoCoefficients>,
    pub penalty: Penalty,
    pub bc: BoundaryConditions,
    exterior: Option<Arc<dyn ExteriorField>>,
    elem_mat: Vec<ElementMaterial>,
    dr: Vec<f64>,
    ds: Vec<f64>,
    lift: [Vec<f64>; 3],
    mass: Vec<f64>,
}

impl std::fmt::Debug for DgOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DgOperator")
            .field("order", &self.re.n)
            .field("elements", &self.mesh.num_elements())
            .field("penalty", &self.penalty)
            .field("bc", &self.bc)
            .finish()
    }
}

fn flat(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

impl DgOperator {
    pub fn new(
        re: ReferenceElement,
        mesh: DgMesh,
        materials: Vec<ViscoCoefficients>,
        penalty: Penalty,
        bc: BoundaryConditions,
    ) -> Result<Self, DgError> {
        if !(penalty.alpha_sigma >= 0.0 && penalty.alpha_v >= 0.0 && penalty.z_ref > 0.0) {
            return Err(DgError::Penalty);
        }
        for links in &mesh.conn.links {
            for l in links {
                if let FaceLink::Boundary(m) = l {
                    if !bc.contains_key(m) {
                        return Err(DgError::MissingBoundary(m.0));
                    }
                }
            }
        }
        let mut elem_mat = Vec::with_capacity(mesh.num_elements());
        for (k, &id) in mesh.mesh.material.iter().enumerate() {
            let m = materials
                .get(id)
                .ok_or(DgError::MaterialId { element: k, id, count: materials.len() })?;
            elem_mat.push(ElementMaterial {
                c: std::array::from_fn(|i| std::array::from_fn(|j| m.c[(i, j)])),
                c_inv: std::array::from_fn(|i| std::array::from_fn(|j| m.c_inv[(i, j)])),
                qs_s: std::array::from_fn(|i| std::array::from_fn(|j| m.qs_s[(i, j)])),
                rho: m.rho,
            });
        }
        let dr = flat(&re.dr);
        let ds = flat(&re.ds);
        let lift = [flat(&re.lift[0]), flat(&re.lift[1]), flat(&re.lift[2])];
        let mass = flat(&re.mass);
        Ok(DgOperator { re, mesh, materials, penalty, bc, exterior: None, elem_mat, dr, ds, lift, mass })
    }

    pub fn with_exterior(mut self, ext: Arc<dyn ExteriorField>) -> Self {
        self.exterior = Some(ext);
        self
    }

    pub fn has_prescribed(&self) -> bool {
        self.bc.values().any(|&b| b == BoundaryKind::Prescribed)
    }

    pub fn np(&self) -> usize {
        self.re.np
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn state_len(&self) -> usize {
        self.num_elements() * NFIELDS * self.np()
    }

    #[inline]
    pub fn idx(&self, k: usize, f: usize, i: usize) -> usize {
        (k * NFIELDS + f) * self.re.np + i
    }

    pub fn zero_state(&self) -> Vec<f64> {
        vec![0.0; self.state_len()]
    }

    /// Nodal interpolant of `f(x, z) -> [s11, s33, s13, y1, y2, y5, v1, v3]`.
    pub fn interpolate<F: Fn(f64, f64) -> [f64; NFIELDS]>(&self, f: F) -> Vec<f64> {
        let mut q = self.zero_state();
        for k in 0..self.num_elements() {
            for i in 0..self.np() {
                let (x, z) = self.mesh.node(k, i);
                let u = f(x, z);
                for (c, val) in u.iter().enumerate() {
                    q[self.idx(k, c, i)] = *val;
                }
            }
        }
        q
    }

    pub fn check_finite(&self, q: &[f64]) -> Result<(), DgError> {
        let chunk = NFIELDS * self.np();
        match q.chunks(chunk).position(|c| c.iter().any(|v| !v.is_finite())) {
            Some(element) => Err(DgError::NonFinite { element }),
            None => Ok(()),
        }
    }

    /// `dq/dt` for the homogeneous system; sources are added separately.
    pub fn rhs(&self, q: &[f64], t: f64, dq: &mut [f64]) -> Result<(), DgError> {
        let expected = self.state_len();
        if q.len() != expected || dq.len() != expected {
            return Err(DgError::Shape { got: q.len().min(dq.len()), expected });
        }
        if self.has_prescribed() && self.exterior.is_none() {
            return Err(DgError::MissingExterior);
        }
        let chunk = NFIELDS * self.np();
        dq.par_chunks_mut(chunk).enumerate().for_each(|(k, out)| self.element_rhs(k, q, t, out));
        Ok(())
    }

    fn element_rhs(&self, k: usize, q: &[f64], t: f64, out: &mut [f64]) {
        let np = self.re.np;
        let nfp = self.re.nfp;
        let g = &self.mesh.geom[k];
        let base = k * NFIELDS * np;
        let field = |kk: usize, f: usize| -> &[f64] {
            let b = (kk * NFIELDS + f) * np;
            &q[b..b + np]
        };

        // Strong-form volume terms: stress rows before C, velocity rows before 1/rho.
        let mut rs = [[0.0f64; MAX_NP]; 3];
        let mut rv = [[0.0f64; MAX_NP]; 2];
        let deriv = |u: &[f64], dx: &mut [f64; MAX_NP], dz: &mut [f64; MAX_NP]| {
            for i in 0..np {
                let row_r = &self.dr[i * np..(i + 1) * np];
                let row_s = &self.ds[i * np..(i + 1) * np];
                let mut ur = 0.0;
                let mut us = 0.0;
                for j in 0..np {
                    ur += row_r[j] * u[j];
                    us += row_s[j] * u[j];
                }
                dx[i] = g.rx * ur + g.sx * us;
                dz[i] = g.rz * ur + g.sz * us;
            }
        };
        let (mut ax, mut az, mut bx, mut bz) = ([0.0; MAX_NP], [0.0; MAX_NP], [0.0; MAX_NP], [0.0; MAX_NP]);
        deriv(field(k, V1), &mut ax, &mut az);
        deriv(field(k, V3), &mut bx, &mut bz);
        for i in 0..np {
            rs[0][i] = ax[i];
            rs[1][i] = bz[i];
            rs[2][i] = az[i] + bx[i];
        }
        deriv(field(k, S11), &mut ax, &mut az);
        for i in 0..np {
            rv[0][i] = ax[i];
        }
        deriv(field(k, S33), &mut ax, &mut az);
        for i in 0..np {
            rv[1][i] = az[i];
        }
        deriv(field(k, S13), &mut ax, &mut az);
        for i in 0..np {
            rv[0][i] += az[i];
            rv[1][i] += ax[i];
        }

        let a_s = self.penalty.sigma_eff();
        let a_v = self.penalty.v_eff();
        let (s11, s33, s13, v1, v3) = (field(k, S11), field(k, S33), field(k, S13), field(k, V1), field(k, V3));
        for f in 0..3 {
            let fg = &g.faces[f];
            let (n1, n3) = (fg.nx, fg.nz);
            let fmask = &self.re.fmask[f];
            let mut fs = [[0.0f64; MAX_NFP]; 3];
            let mut fv = [[0.0f64; MAX_NFP]; 2];
            for i in 0..nfp {
                let vi = fmask[i];
                let tr_in = traction([s11[vi], s33[vi], s13[vi]], n1, n3);
                let v_in = [v1[vi], v3[vi]];
                let (dtr, dv) = match self.mesh.conn.links[k][f] {
                    FaceLink::Interior { elem, face } => {
                        let vo = self.re.fmask[face][self.mesh.face_perm[k][f][i]];
                        let s_out = [field(elem, S11)[vo], field(elem, S33)[vo], field(elem, S13)[vo]];
                        let tr_out = traction(s_out, n1, n3);
                        (
                            [tr_out[0] - tr_in[0], tr_out[1] - tr_in[1]],
                            [field(elem, V1)[vo] - v_in[0], field(elem, V3)[vo] - v_in[1]],
                        )
                    }
                    FaceLink::Boundary(m) => match self.bc[&m] {
                        BoundaryKind::Prescribed => {
                            let (x, z) = self.mesh.node(k, vi);
                            let e = self.exterior.as_ref().expect("checked in rhs").eval(x, z, t);
                            let tr_out = traction([e[0], e[1], e[2]], n1, n3);
                            ([tr_out[0] - tr_in[0], tr_out[1] - tr_in[1]], [e[3] - v_in[0], e[4] - v_in[1]])
                        }
                        kind => apply_bc(kind, tr_in, v_in),
                    },
                };
                let (a, b) = numerical_flux(dtr, dv, n1, n3, a_s, a_v);
                for c in 0..3 {
                    fs[c][i] = a[c];
                }
                fv[0][i] = b[0];
                fv[1][i] = b[1];
            }
            let scale = fg.jf / g.j;
            let lift = &self.lift[f];
            for j in 0..np {
                let row = &lift[j * nfp..(j + 1) * nfp];
                let mut acc = [0.0f64; 5];
                for i in 0..nfp {
                    let l = row[i];
                    acc[0] += l * fs[0][i];
                    acc[1] += l * fs[1][i];
                    acc[2] += l * fs[2][i];
                    acc[3] += l * fv[0][i];
                    acc[4] += l * fv[1][i];
                }
                rs[0][j] += scale * acc[0];
                rs[1][j] += scale * acc[1];
                rs[2][j] += scale * acc[2];
                rv[0][j] += scale * acc[3];
                rv[1][j] += scale * acc[4];
            }
        }

        // Material stage: ds/dt = C r + (Qs S) q, dy/dt = (Qs S) q, dv/dt = r / rho.
        let m = &self.elem_mat[k];
        let qk = &q[base..base + 6 * np];
        for i in 0..np {
            let mut u = [0.0f64; 6];
            for (c, uc) in u.iter_mut().enumerate() {
                *uc = qk[c * np + i];
            }
            for row in 0..6 {
                let mut acc = 0.0;
                for col in 0..6 {
                    acc += m.qs_s[row][col] * u[col];
                }
                if row < 3 {
                    acc += m.c[row][0] * rs[0][i] + m.c[row][1] * rs[1][i] + m.c[row][2] * rs[2][i];
                }
                out[row * np + i] = acc;
            }
            out[V1 * np + i] = rv[0][i] / m.rho;
            out[V3 * np + i] = rv[1][i] / m.rho;
        }
    }

    /// `1/2 sum_k J [ s^T C^-1 s + |y|^2 + rho |v|^2 ]` integrated with the exact mass matrix.
    pub fn energy(&self, q: &[f64]) -> f64 {
        let np = self.np();
        let chunk = NFIELDS * np;
        q.par_chunks(chunk)
            .enumerate()
            .map(|(k, qk)| {
                let m = &self.elem_mat[k];
                let f = |c: usize| &qk[c * np..(c + 1) * np];
                let ip = |a: &[f64], b: &[f64]| -> f64 {
                    let mut s = 0.0;
                    for i in 0..np {
                        let row = &self.mass[i * np..(i + 1) * np];
                        let mut t = 0.0;
                        for j in 0..np {
                            t += row[j] * b[j];
                        }
                        s += a[i] * t;
                    }
                    s
                };
                let mut e = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        if m.c_inv[a][b] != 0.0 {
                            e += m.c_inv[a][b] * ip(f(a), f(b));
                        }
                    }
                }
                for c in [Y1, Y2, Y5] {
                    e += ip(f(c), f(c));
                }
                for c in [V1, V3] {
                    e += m.rho * ip(f(c), f(c));
                }
                0.5 * self.mesh.geom[k].j * e
            })
            .sum()
    }

    /// Quadrature L2 norms `(||q - exact||, ||exact||)` summed over all fields,
    /// using a rule of degree `degree`.
    pub fn l2_error<F: Fn(f64, f64) -> [f64; NFIELDS] + Sync>(&self, q: &[f64], exact: F, degree: usize) -> (f64, f64) {
        let rule = TriangleRule::new(degree);
        let interp = self.re.interpolation_matrix(&rule.r, &rule.s);
        let np = self.np();
        let (e2, n2) = (0..self.num_elements())
            .into_par_iter()
            .map(|k| {
                let tri = self.mesh.mesh.elements[k];
                let v = tri.map(|i| self.mesh.mesh.vertices[i]);
                let j = self.mesh.geom[k].j;
                let (mut e2, mut n2) = (0.0, 0.0);
                for p in 0..rule.len() {
                    let (r, s) = (rule.r[p], rule.s[p]);
                    let (l1, l2, l3) = (-(r + s) / 2.0, (1.0 + r) / 2.0, (1.0 + s) / 2.0);
                    let x = l1 * v[0][0] + l2 * v[1][0] + l3 * v[2][0];
                    let z = l1 * v[0][1] + l2 * v[1][1] + l3 * v[2][1];
                    let ex = exact(x, z);
                    for c in 0..NFIELDS {
                        let b = (k * NFIELDS + c) * np;
                        let mut uh = 0.0;
                        for i in 0..np {
                            uh += interp[(p, i)] * q[b + i];
                        }
                        e2 += rule.w[p] * j * (uh - ex[c]).powi(2);
                        n2 += rule.w[p] * j * ex[c].powi(2);
                    }
                }
                (e2, n2)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        (e2.sqrt(), n2.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{derive_visco_coefficients, MaterialSpec};
    use crate::mesh::{Bounds, Mesh};

    fn operator(n: usize, nx: usize, kind: BoundaryKind, alpha: f64) -> DgOperator {
        let re = ReferenceElement::new(n).unwrap();
        let mesh = DgMesh::new(Mesh::uniform(nx, nx, Bounds::new(-1.0, 1.0, -1.0, 1.0)).unwrap(), &re).unwrap();
        let mat = derive_visco_coefficients(&MaterialSpec::preset("sandstone").unwrap()).unwrap();
        DgOperator::new(re, mesh, vec![mat], Penalty::uniform(alpha), uniform_boundary(kind)).unwrap()
    }

    #[test]
    fn normal_matrix_axes() {
        assert_eq!(normal_matrix(1.0, 0.0), [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(normal_matrix(0.0, 1.0), [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn normal_matrix_transpose_is_traction() {
        let (n1, n3) = (0.6, 0.8);
        let a = normal_matrix(n1, n3);
        let s = [1.5, -0.3, 0.7];
        let t = [
            a[0][0] * s[0] + a[1][0] * s[1] + a[2][0] * s[2],
            a[0][1] * s[0] + a[1][1] * s[1] + a[2][1] * s[2],
        ];
        assert_eq!(t, traction(s, n1, n3));
    }

    #[test]
    fn continuous_traces_give_zero_flux() {
        let (fs, fv) = numerical_flux([0.0; 2], [0.0; 2], 0.6, 0.8, 3.0, 2.0);
        assert_eq!(fs, [0.0; 3]);
        assert_eq!(fv, [0.0; 2]);
    }

    #[test]
    fn boundary_jumps() {
        assert_eq!(apply_bc(BoundaryKind::FreeSurface, [0.0; 2], [1.0, 2.0]), ([0.0; 2], [0.0; 2]));
        assert_eq!(apply_bc(BoundaryKind::Absorbing, [0.0; 2], [0.0; 2]), ([0.0; 2], [0.0; 2]));
        // Free surface: average traction of interior and implied exterior vanishes.
        let tr = [0.3, -1.1];
        let (dtr, _) = apply_bc(BoundaryKind::FreeSurface, tr, [0.0; 2]);
        assert_eq!([tr[0] + 0.5 * dtr[0], tr[1] + 0.5 * dtr[1]], [0.0, 0.0]);
    }

    #[test]
    fn zero_state_zero_rhs() {
        let op = operator(2, 2, BoundaryKind::FreeSurface, 0.5);
        let q = op.zero_state();
        let mut dq = vec![1.0; q.len()];
        op.rhs(&q, 0.0, &mut dq).unwrap();
        assert!(dq.iter().all(|&v| v == 0.0));
        assert_eq!(op.energy(&q), 0.0);
    }

    #[test]
    fn constant_velocity_energy() {
        let op = operator(3, 3, BoundaryKind::FreeSurface, 0.5);
        let c = 2.0;
        let q = op.interpolate(|_, _| [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, c, 0.0]);
        let e = op.energy(&q);
        assert!((e - 0.5 * 2500.0 * c * c * 4.0).abs() < 1e-9 * e);
    }

    #[test]
    fn rejects_missing_boundary() {
        let re = ReferenceElement::new(1).unwrap();
        let mesh = DgMesh::new(Mesh::uniform(1, 1, Bounds::new(0.0, 1.0, 0.0, 1.0)).unwrap(), &re).unwrap();
        let mat = derive_visco_coefficients(&MaterialSpec::preset("sandstone").unwrap()).unwrap();
        let mut bc = uniform_boundary(BoundaryKind::Absorbing);
        bc.remove(&Marker::TOP);
        assert_eq!(
            DgOperator::new(re, mesh, vec![mat], Penalty::default(), bc).unwrap_err(),
            DgError::MissingBoundary(4)
        );
    }

    #[test]
    fn nan_reported_with_element() {
        let op = operator(1, 2, BoundaryKind::Absorbing, 0.5);
        let mut q = op.zero_state();
        let i = op.idx(5, V3, 1);
        q[i] = f64::NAN;
        assert_eq!(op.check_finite(&q), Err(DgError::NonFinite { element: 5 }));
    }
}
