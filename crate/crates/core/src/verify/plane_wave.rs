//! Plane-wave eigenmodes `q exp(i(w t - k.x))` of the 2D viscoelastic system.
//!
//! The dispersion problem is posed on the rate-form unknowns `(s, e, v)`:
//! `ds/dt = C A dv + M e`, `de/dt = T P A dv - Lambda e`, `rho dv/dt = A^T ds`,
//! and the memory part is then expressed in the solver's energy-normalised unknowns.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::dg::{ExteriorField, NFIELDS};
use crate::materials::{mode_projection, ViscoCoefficients};

type C = Complex64;
const DIM: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaneWaveError {
    #[error("wave vector must be non-zero")]
    ZeroWaveVector,
    #[error("eigenproblem failed to converge")]
    NoConvergence,
    #[error("degenerate modes: {0}")]
    Degenerate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveMode {
    pub omega: C,
    pub sigma: [C; 3],
    /// Rate-form memory variables.
    pub e: [C; 3],
    /// Solver memory unknowns.
    pub y: [C; 3],
    pub v: [C; 2],
    /// `|(H - w) q| / |q|` in balanced variables.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveSolution {
    pub k: (f64, f64),
    /// Quasi-P first, then quasi-S.
    pub modes: [PlaneWaveMode; 2],
    pub gamma: [f64; 2],
    /// Set when `k` had to be perturbed to split a defective eigenvalue.
    pub perturbed: bool,
    z: Matrix3<f64>,
}

fn b_matrix(k1: f64, k3: f64) -> [[f64; 2]; 3] {
    [[k1, 0.0], [0.0, k3], [k3, k1]]
}

/// Dispersion matrix `H` with `w q = H q` for `q = (s, e, v)`.
pub fn dispersion_matrix(c: &ViscoCoefficients, k: (f64, f64)) -> SMatrix<C, DIM, DIM> {
    let b = b_matrix(k.0, k.1);
    let p = mode_projection();
    let i = C::i();
    let mut h = SMatrix::<C, DIM, DIM>::zeros();
    for r in 0..3 {
        for col in 0..3 {
            h[(r, 3 + col)] = -i * c.m[(r, col)];
        }
        h[(3 + r, 3 + r)] = i * c.lambda[r];
        for j in 0..2 {
            let cb: f64 = (0..3).map(|m| c.c[(r, m)] * b[m][j]).sum();
            let tpb: f64 = c.t[r] * (0..3).map(|m| p[(r, m)] * b[m][j]).sum::<f64>();
            h[(r, 6 + j)] = C::from(-cb);
            h[(3 + r, 6 + j)] = C::from(-tpb);
            h[(6 + j, r)] = C::from(-b[r][j] / c.rho);
        }
    }
    h
}

/// Diagonal scaling that puts every unknown in velocity units.
fn balance(c: &ViscoCoefficients) -> SVector<f64, DIM> {
    let speed = c.lambda_max();
    let z = c.rho * speed;
    let g = c.gamma.max().max(1.0);
    let l = c.lambda.max().max(1e-300);
    SVector::<f64, DIM>::from_fn(|i, _| match i {
        0..=2 => 1.0 / z,
        3..=5 => g / (z * l),
        _ => 1.0,
    })
}

fn solve(c: &ViscoCoefficients, k: (f64, f64)) -> Result<Vec<(C, SVector<C, DIM>, f64)>, PlaneWaveError> {
    let h = dispersion_matrix(c, k);
    let d = balance(c);
    let hb = SMatrix::<C, DIM, DIM>::from_fn(|i, j| h[(i, j)] * d[i] / d[j]);
    let schur = nalgebra::Schur::try_new(hb, 1e-15, 10_000).ok_or(PlaneWaveError::NoConvergence)?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(DIM);
    for n in 0..DIM {
        let w = t[(n, n)];
        let a = hb - SMatrix::<C, DIM, DIM>::identity() * w;
        let svd = a.svd(false, true);
        let vt = svd.v_t.ok_or(PlaneWaveError::NoConvergence)?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        let xb = SVector::<C, DIM>::from_fn(|i, _| vt[(imin, i)].conj());
        let residual = (a * xb).norm() / xb.norm();
        let x = SVector::<C, DIM>::from_fn(|i, _| xb[i] / d[i]);
        out.push((w, x, residual));
    }
    Ok(out)
}

fn build_mode(c: &ViscoCoefficients, k: (f64, f64), omega: C, x: &SVector<C, DIM>, residual: f64) -> PlaneWaveMode {
    // Unit velocity amplitude, dominant component real and positive.
    let v = [x[6], x[7]];
    let vn = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let pivot = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    let scale = pivot.conj() / (pivot.norm() * vn);
    let q: Vec<C> = x.iter().map(|a| a * scale).collect();
    let b = b_matrix(k.0, k.1);
    let p = mode_projection();
    let eps: [C; 3] = std::array::from_fn(|r| -(b[r][0] * q[6] + b[r][1] * q[7]) / omega);
    let xi: Vector3<C> = Vector3::from_fn(|r, _| {
        let pe: C = (0..3).map(|m| eps[m] * p[(r, m)]).sum();
        pe * c.lambda[r] / (C::i() * omega + c.lambda[r])
    });
    let y = c.y_from_xi.map(C::from) * xi;
    PlaneWaveMode {
        omega,
        sigma: [q[0], q[1], q[2]],
        e: [q[3], q[4], q[5]],
        y: [y[0], y[1], y[2]],
        v: [q[6], q[7]],
        residual,
    }
}

/// The quasi-P and quasi-S modes travelling along `+k`.
pub fn plane_wave_modes(c: &ViscoCoefficients, k: (f64, f64)) -> Result<PlaneWaveSolution, PlaneWaveError> {
    if k.0 == 0.0 && k.1 == 0.0 {
        return Err(PlaneWaveError::ZeroWaveVector);
    }
    let mut kk = k;
    let mut perturbed = false;
    loop {
        let mut sols = solve(c, kk)?;
        sols.sort_by(|a, b| b.0.re.partial_cmp(&a.0.re).unwrap());
        let (wp, ws) = (sols[0].0, sols[1].0);
        if !(ws.re > 1e-10 * wp.re) {
            return Err(PlaneWaveError::Degenerate(format!("shear frequency {ws} has no propagating part")));
        }
        if (wp - ws).norm() <= 1e-8 * wp.norm() {
            if perturbed {
                return Err(PlaneWaveError::Degenerate(format!("coincident frequencies {wp} and {ws}")));
            }
            perturbed = true;
            kk = (k.0 * (1.0 + 1e-12), k.1 * (1.0 - 1e-12));
            continue;
        }
        let modes = [
            build_mode(c, kk, sols[0].0, &sols[0].1, sols[0].2),
            build_mode(c, kk, sols[1].0, &sols[1].1, sols[1].2),
        ];
        return Ok(PlaneWaveSolution { k: kk, modes, gamma: [1.0, 1.0], perturbed, z: c.z });
    }
}

impl PlaneWaveSolution {
    fn phase(&self, m: &PlaneWaveMode, x: f64, z: f64, t: f64) -> C {
        (C::i() * (m.omega * t - self.k.0 * x - self.k.1 * z)).exp()
    }

    /// Real state `[s11, s33, s13, y1, y2, y5, v1, v3]`.
    pub fn field(&self, x: f64, z: f64, t: f64) -> [f64; NFIELDS] {
        let mut out = [0.0; NFIELDS];
        for (m, g) in self.modes.iter().zip(self.gamma) {
            let e = self.phase(m, x, z, t) * g;
            let amp = [m.sigma[0], m.sigma[1], m.sigma[2], m.y[0], m.y[1], m.y[2], m.v[0], m.v[1]];
            for (o, a) in out.iter_mut().zip(amp) {
                *o += (a * e).re;
            }
        }
        out
    }

    /// Time derivative of [`PlaneWaveSolution::field`].
    pub fn time_derivative(&self, x: f64, z: f64, t: f64) -> [f64; NFIELDS] {
        let mut out = [0.0; NFIELDS];
        for (m, g) in self.modes.iter().zip(self.gamma) {
            let e = self.phase(m, x, z, t) * g * C::i() * m.omega;
            let amp = [m.sigma[0], m.sigma[1], m.sigma[2], m.y[0], m.y[1], m.y[2], m.v[0], m.v[1]];
            for (o, a) in out.iter_mut().zip(amp) {
                *o += (a * e).re;
            }
        }
        out
    }

    /// Rate-form memory `e` and the shifted memory `a = e - z(s)` at a point.
    pub fn memory(&self, x: f64, z: f64, t: f64) -> ([f64; 3], [f64; 3]) {
        let mut e = [0.0; 3];
        let mut a = [0.0; 3];
        for (m, g) in self.modes.iter().zip(self.gamma) {
            let ph = self.phase(m, x, z, t) * g;
            for r in 0..3 {
                let zs: C = (0..3).map(|j| m.sigma[j] * self.z[(r, j)]).sum();
                e[r] += (m.e[r] * ph).re;
                a[r] += ((m.e[r] - zs) * ph).re;
            }
        }
        (e, a)
    }
}

impl ExteriorField for PlaneWaveSolution {
    fn eval(&self, x: f64, z: f64, t: f64) -> [f64; 5] {
        let f = self.field(x, z, t);
        [f[0], f[1], f[2], f[6], f[7]]
    }
}
