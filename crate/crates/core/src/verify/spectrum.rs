//! Dense assembly of the semi-discrete operator and its eigenvalues.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dg::{DgError, DgOperator};

pub const MAX_DENSE_UNKNOWNS: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("{0} unknowns exceed the dense limit of {MAX_DENSE_UNKNOWNS}")]
    TooLarge(usize),
    #[error("operator with prescribed boundary data is affine, not linear")]
    Affine,
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error("LAPACK dgeev failed with info = {0}")]
    Lapack(i32),
}

/// Column-major dense matrix of the homogeneous right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseOperator {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(&self.data[j * self.n..(j + 1) * self.n]) {
                    *yi += a * xj;
                }
            }
        }
        y
    }
}

/// Applies the operator to every unit vector.
pub fn assemble_global_operator(op: &DgOperator) -> Result<DenseOperator, SpectrumError> {
    let n = op.state_len();
    if n > MAX_DENSE_UNKNOWNS {
        return Err(SpectrumError::TooLarge(n));
    }
    if op.has_prescribed() {
        return Err(SpectrumError::Affine);
    }
    let mut data = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for (j, col) in data.chunks_mut(n).enumerate() {
        e[j] = 1.0;
        op.rhs(&e, 0.0, col)?;
        e[j] = 0.0;
    }
    Ok(DenseOperator { n, data })
}

/// All eigenvalues via LAPACK `dgeev`.
pub fn eigenvalues(a: &DenseOperator) -> Result<Vec<Complex64>, SpectrumError> {
    let n = a.n as i32;
    let mut m = a.data.clone();
    let mut wr = vec![0.0; a.n];
    let mut wi = vec![0.0; a.n];
    let mut dummy = [0.0f64; 1];
    let mut info = 0;
    let mut query = [0.0f64; 1];
    let mut vr0 = [0.0f64; 1];
    unsafe {
        lapack::dgeev(b'N', b'N', n, &mut m, n, &mut wr, &mut wi, &mut dummy, 1, &mut vr0, 1, &mut query, -1, &mut info);
    }
    if info != 0 {
        return Err(SpectrumError::Lapack(info));
    }
    let lwork = query[0] as i32;
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut vr = [0.0f64; 1];
    unsafe {
        lapack::dgeev(b'N', b'N', n, &mut m, n, &mut wr, &mut wi, &mut dummy, 1, &mut vr, 1, &mut work, lwork, &mut info);
    }
    if info != 0 {
        return Err(SpectrumError::Lapack(info));
    }
    Ok(wr.into_iter().zip(wi).map(|(r, i)| Complex64::new(r, i)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub max_real: f64,
    pub spectral_radius: f64,
    /// Largest `|Im|`, the propagation part of the spectrum.
    pub max_imag: f64,
    pub eigenvalues: Vec<Complex64>,
}

pub fn summarize(eigs: Vec<Complex64>) -> SpectrumSummary {
    let max_real = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let spectral_radius = eigs.par_iter().map(|z| z.norm()).reduce(|| 0.0, f64::max);
    let max_imag = eigs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    SpectrumSummary { max_real, spectral_radius, max_imag, eigenvalues: eigs }
}

pub fn operator_spectrum(op: &DgOperator) -> Result<SpectrumSummary, SpectrumError> {
    let a = assemble_global_operator(op)?;
    Ok(summarize(eigenvalues(&a)?))
}
