//! Nodal basis and reference operators on the triangle `(-1,-1), (1,-1), (-1,1)`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::quadrature::{grad_jacobi_p, jacobi_gl, jacobi_p};

pub const MAX_ORDER: usize = 8;
const NODE_TOL: f64 = 1e-10;

/// Reference face lengths (faces `s = -1`, `r + s = 0`, `r = -1`).
pub const FACE_LENGTH: [f64; 3] = [2.0, 2.0 * std::f64::consts::SQRT_2, 2.0];
/// Outward unit normals of the reference faces.
pub const FACE_NORMAL: [(f64, f64); 3] = [
    (0.0, -1.0),
    (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    (-1.0, 0.0),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefElemError {
    #[error("polynomial order {0} outside 1..={MAX_ORDER}")]
    Order(usize),
    #[error("point ({0}, {1}) lies outside the reference triangle")]
    Outside(f64, f64),
    #[error("Vandermonde matrix is singular")]
    Singular,
}

/// Warp & Blend blend parameters for N = 1..15.
const ALPHA_OPT: [f64; 15] = [
    0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832, 1.3648, 1.4773, 1.4959, 1.5743,
    1.5770, 1.6223, 1.6258,
];

pub fn num_nodes(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

fn vandermonde_1d(n: usize, r: &[f64]) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(r.len(), n + 1);
    for j in 0..=n {
        for (i, p) in jacobi_p(r, 0.0, 0.0, j).into_iter().enumerate() {
            v[(i, j)] = p;
        }
    }
    v
}

fn warp_factor(n: usize, rout: &[f64]) -> Vec<f64> {
    let lgl = jacobi_gl(0.0, 0.0, n);
    let req: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let veq = vandermonde_1d(n, &req);
    let pmat = vandermonde_1d(n, rout).transpose();
    // Lagrange basis through equidistant points evaluated at rout.
    let lmat = veq.transpose().lu().solve(&pmat).expect("equidistant Vandermonde");
    let d = DVector::from_iterator(n + 1, lgl.iter().zip(&req).map(|(a, b)| a - b));
    let warp = lmat.transpose() * d;
    rout.iter()
        .zip(warp.iter())
        .map(|(&r, &w)| {
            if r.abs() < 1.0 - 1e-10 {
                w / (1.0 - r * r)
            } else {
                0.0
            }
        })
        .collect()
}

/// Warp & Blend nodes in equilateral coordinates.
fn nodes_equilateral(n: usize) -> (Vec<f64>, Vec<f64>) {
    let alpha = if n < 16 { ALPHA_OPT[n - 1] } else { 5.0 / 3.0 };
    let np = num_nodes(n);
    let (mut l1, mut l3) = (Vec::with_capacity(np), Vec::with_capacity(np));
    for i in 0..=n {
        for j in 0..=(n - i) {
            l1.push(i as f64 / n as f64);
            l3.push(j as f64 / n as f64);
        }
    }
    let l2: Vec<f64> = l1.iter().zip(&l3).map(|(a, b)| 1.0 - a - b).collect();
    let s3 = 3f64.sqrt();
    let mut x: Vec<f64> = (0..np).map(|i| -l2[i] + l3[i]).collect();
    let mut y: Vec<f64> = (0..np).map(|i| (-l2[i] - l3[i] + 2.0 * l1[i]) / s3).collect();
    let arg = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p - q).collect() };
    let w1 = warp_factor(n, &arg(&l3, &l2));
    let w2 = warp_factor(n, &arg(&l1, &l3));
    let w3 = warp_factor(n, &arg(&l2, &l1));
    let (c2, s2) = ((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
    let (c4, s4) = ((4.0 * std::f64::consts::PI / 3.0).cos(), (4.0 * std::f64::consts::PI / 3.0).sin());
    for i in 0..np {
        let warp1 = 4.0 * l2[i] * l3[i] * w1[i] * (1.0 + (alpha * l1[i]).powi(2));
        let warp2 = 4.0 * l1[i] * l3[i] * w2[i] * (1.0 + (alpha * l2[i]).powi(2));
        let warp3 = 4.0 * l1[i] * l2[i] * w3[i] * (1.0 + (alpha * l3[i]).powi(2));
        x[i] += warp1 + c2 * warp2 + c4 * warp3;
        y[i] += s2 * warp2 + s4 * warp3;
    }
    (x, y)
}

fn xy_to_rs(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let s3 = 3f64.sqrt();
    x.iter()
        .zip(y)
        .map(|(&x, &y)| {
            let l1 = (s3 * y + 1.0) / 3.0;
            let l2 = (-3.0 * x - s3 * y + 2.0) / 6.0;
            let l3 = (3.0 * x - s3 * y + 2.0) / 6.0;
            (-l2 + l3 - l1, -l2 - l3 + l1)
        })
        .unzip()
}

fn rs_to_ab(r: f64, s: f64) -> (f64, f64) {
    let a = if (s - 1.0).abs() > 1e-14 { 2.0 * (1.0 + r) / (1.0 - s) - 1.0 } else { -1.0 };
    (a, s)
}

fn mode_indices(n: usize) -> Vec<(usize, usize)> {
    let mut m = Vec::with_capacity(num_nodes(n));
    for i in 0..=n {
        for j in 0..=(n - i) {
            m.push((i, j));
        }
    }
    m
}

fn simplex_p(a: f64, b: f64, i: usize, j: usize) -> f64 {
    let h1 = jacobi_p(&[a], 0.0, 0.0, i)[0];
    let h2 = jacobi_p(&[b], 2.0 * i as f64 + 1.0, 0.0, j)[0];
    std::f64::consts::SQRT_2 * h1 * h2 * (1.0 - b).powi(i as i32)
}

fn grad_simplex_p(a: f64, b: f64, id: usize, jd: usize) -> (f64, f64) {
    let fa = jacobi_p(&[a], 0.0, 0.0, id)[0];
    let dfa = grad_jacobi_p(&[a], 0.0, 0.0, id)[0];
    let gb = jacobi_p(&[b], 2.0 * id as f64 + 1.0, 0.0, jd)[0];
    let dgb = grad_jacobi_p(&[b], 2.0 * id as f64 + 1.0, 0.0, jd)[0];
    let half = 0.5 * (1.0 - b);
    let mut dr = dfa * gb;
    let mut ds = dfa * gb * 0.5 * (1.0 + a);
    if id > 0 {
        dr *= half.powi(id as i32 - 1);
        ds *= half.powi(id as i32 - 1);
    }
    let mut tmp = dgb * half.powi(id as i32);
    if id > 0 {
        tmp -= 0.5 * id as f64 * gb * half.powi(id as i32 - 1);
    }
    ds += fa * tmp;
    let scale = 2f64.powf(id as f64 + 0.5);
    (dr * scale, ds * scale)
}

/// Orthonormal modal basis evaluated at `(r, s)` points, one row per point.
pub fn vandermonde(n: usize, r: &[f64], s: &[f64]) -> DMatrix<f64> {
    let modes = mode_indices(n);
    let mut v = DMatrix::zeros(r.len(), modes.len());
    for (p, (&ri, &si)) in r.iter().zip(s).enumerate() {
        let (a, b) = rs_to_ab(ri, si);
        for (m, &(i, j)) in modes.iter().enumerate() {
            v[(p, m)] = simplex_p(a, b, i, j);
        }
    }
    v
}

pub fn grad_vandermonde(n: usize, r: &[f64], s: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let modes = mode_indices(n);
    let mut vr = DMatrix::zeros(r.len(), modes.len());
    let mut vs = DMatrix::zeros(r.len(), modes.len());
    for (p, (&ri, &si)) in r.iter().zip(s).enumerate() {
        let (a, b) = rs_to_ab(ri, si);
        for (m, &(i, j)) in modes.iter().enumerate() {
            let (dr, ds) = grad_simplex_p(a, b, i, j);
            vr[(p, m)] = dr;
            vs[(p, m)] = ds;
        }
    }
    (vr, vs)
}

/// Reference operators for polynomial degree `n`.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub n: usize,
    pub np: usize,
    pub nfp: usize,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
    pub v_inv: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub mass_inv: DMatrix<f64>,
    /// Strong differentiation `Dr`, `Ds`.
    pub dr: DMatrix<f64>,
    pub ds: DMatrix<f64>,
    /// Weak differentiation `mass * Dr`, `mass * Ds`.
    pub sr: DMatrix<f64>,
    pub ss: DMatrix<f64>,
    /// Volume node indices on each face, ordered along the face.
    pub fmask: [Vec<usize>; 3],
    /// Face mass in reference arc length, `nfp x nfp`.
    pub face_mass: [DMatrix<f64>; 3],
    /// `mass^-1 * E_f * face_mass[f]`, `np x nfp`.
    pub lift: [DMatrix<f64>; 3],
}

impl ReferenceElement {
    pub fn new(n: usize) -> Result<Self, RefElemError> {
        if !(1..=MAX_ORDER).contains(&n) {
            return Err(RefElemError::Order(n));
        }
        let np = num_nodes(n);
        let nfp = n + 1;
        let (x, y) = nodes_equilateral(n);
        let (r, s) = xy_to_rs(&x, &y);
        let v = vandermonde(n, &r, &s);
        let v_inv = v.clone().try_inverse().ok_or(RefElemError::Singular)?;
        let mass_inv = &v * v.transpose();
        let mass = &v_inv.transpose() * &v_inv;
        let (vr, vs) = grad_vandermonde(n, &r, &s);
        let dr = &vr * &v_inv;
        let ds = &vs * &v_inv;
        let sr = &mass * &dr;
        let ss = &mass * &ds;

        let pick = |pred: &dyn Fn(f64, f64) -> bool| -> Vec<usize> {
            (0..np).filter(|&i| pred(r[i], s[i])).collect()
        };
        let mut f1 = pick(&|_, s| (s + 1.0).abs() < NODE_TOL);
        let mut f2 = pick(&|r, s| (r + s).abs() < NODE_TOL);
        let mut f3 = pick(&|r, _| (r + 1.0).abs() < NODE_TOL);
        // Counter-clockwise traversal along each face.
        f1.sort_by(|&a, &b| r[a].partial_cmp(&r[b]).unwrap());
        f2.sort_by(|&a, &b| r[b].partial_cmp(&r[a]).unwrap());
        f3.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
        let fmask = [f1, f2, f3];
        for f in &fmask {
            assert_eq!(f.len(), nfp);
        }

        let face_param = |f: usize, i: usize| -> f64 {
            match f {
                0 => r[i],
                1 => -r[i],
                _ => -s[i],
            }
        };
        let mut face_mass: [DMatrix<f64>; 3] = Default::default();
        let mut lift: [DMatrix<f64>; 3] = Default::default();
        for f in 0..3 {
            let t: Vec<f64> = fmask[f].iter().map(|&i| face_param(f, i)).collect();
            let v1 = vandermonde_1d(n, &t);
            let edge = (&v1 * v1.transpose()).try_inverse().ok_or(RefElemError::Singular)?;
            let mf = edge * (FACE_LENGTH[f] / 2.0);
            let mut e = DMatrix::zeros(np, nfp);
            for (j, &i) in fmask[f].iter().enumerate() {
                for k in 0..nfp {
                    e[(i, k)] = mf[(j, k)];
                }
            }
            lift[f] = &mass_inv * e;
            face_mass[f] = mf;
        }
        Ok(ReferenceElement { n, np, nfp, r, s, v, v_inv, mass, mass_inv, dr, ds, sr, ss, fmask, face_mass, lift })
    }

    /// Lagrange basis values at a reference point.
    pub fn basis_at(&self, r: f64, s: f64) -> Result<DVector<f64>, RefElemError> {
        let tol = 1e-10;
        if r < -1.0 - tol || s < -1.0 - tol || r + s > tol {
            return Err(RefElemError::Outside(r, s));
        }
        let psi = vandermonde(self.n, &[r], &[s]);
        Ok(self.v_inv.transpose() * psi.transpose().column(0))
    }

    /// Evaluates the nodal expansion `values` at `(r, s)`.
    pub fn interpolate(&self, values: &[f64], r: f64, s: f64) -> Result<f64, RefElemError> {
        let l = self.basis_at(r, s)?;
        Ok(l.iter().zip(values).map(|(a, b)| a * b).sum())
    }

    /// Interpolation matrix from nodal values to arbitrary reference points.
    pub fn interpolation_matrix(&self, r: &[f64], s: &[f64]) -> DMatrix<f64> {
        vandermonde(self.n, r, s) * &self.v_inv
    }

    /// Reference area.
    pub fn area(&self) -> f64 {
        2.0
    }
}
