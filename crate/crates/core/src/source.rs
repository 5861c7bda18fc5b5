//! Source wavelets, point-source injection and receivers.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::dg::{DgOperator, NFIELDS, S11, S13, S33, V1, V3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("point ({0}, {1}) is outside the mesh")]
    Outside(f64, f64),
    #[error("field `{0}` cannot be a source target")]
    Target(String),
    #[error("central frequency must be positive, got {0}")]
    Frequency(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletKind {
    Ricker,
    GaussCosine,
}

impl std::str::FromStr for WaveletKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ricker" => Ok(WaveletKind::Ricker),
            "gauss_cosine" => Ok(WaveletKind::GaussCosine),
            _ => Err(format!("unknown wavelet `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelet {
    pub kind: WaveletKind,
    pub f0: f64,
    pub t0: f64,
}

pub fn ricker(t: f64, f0: f64, t0: f64) -> f64 {
    let a = (PI * f0 * (t - t0)).powi(2);
    (1.0 - 2.0 * a) * (-a).exp()
}

/// `exp(-dw^2 (t - t0)^2 / 4) cos(w (t - t0))` with `w = 2 pi f0`, `dw = w / 2`.
pub fn gauss_cosine(t: f64, f0: f64, t0: f64) -> f64 {
    let w = 2.0 * PI * f0;
    let dw = w / 2.0;
    let tau = t - t0;
    (-dw * dw * tau * tau / 4.0).exp() * (w * tau).cos()
}

impl Wavelet {
    pub fn new(kind: WaveletKind, f0: f64, t0: f64) -> Result<Self, SourceError> {
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(SourceError::Frequency(f0));
        }
        Ok(Wavelet { kind, f0, t0 })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            WaveletKind::Ricker => ricker(t, self.f0, self.t0),
            WaveletKind::GaussCosine => gauss_cosine(t, self.f0, self.t0),
        }
    }

    /// Continuous transform `int f(t) exp(-i w t) dt`.
    pub fn spectrum(&self, omega: f64) -> Complex64 {
        let shift = Complex64::from_polar(1.0, -omega * self.t0);
        match self.kind {
            WaveletKind::Ricker => {
                let a = PI * self.f0;
                let g = PI.sqrt() / a * (-omega * omega / (4.0 * a * a)).exp();
                shift * g * omega * omega / (2.0 * a * a)
            }
            WaveletKind::GaussCosine => {
                let wb = 2.0 * PI * self.f0;
                let dw = wb / 2.0;
                let e = |x: f64| (-(x / dw).powi(2)).exp();
                shift * PI.sqrt() / dw * (e(omega + wb) + e(omega - wb))
            }
        }
    }

    /// Half-width of the effective support around `t0`.
    pub fn half_width(&self) -> f64 {
        match self.kind {
            WaveletKind::Ricker => 2.0 / self.f0,
            WaveletKind::GaussCosine => 6.0 / (PI * self.f0),
        }
    }
}

pub fn field_index(name: &str) -> Option<usize> {
    crate::dg::FIELD_NAMES.iter().position(|&f| f == name)
}

/// Point source `amplitude * w(t) * delta(x - x0)` added to weighted field rows.
/// A point on a shared edge or vertex is split evenly over the elements that
/// contain it.
#[derive(Debug, Clone)]
pub struct PointSource {
    pub wavelet: Wavelet,
    pub amplitude: f64,
    pub position: (f64, f64),
    pub targets: Vec<(usize, f64)>,
    /// `(element, M^-1 l(x0) / (J m))` for each of the `m` host elements.
    pub parts: Vec<(usize, Vec<f64>)>,
    rho: Vec<f64>,
}

impl PointSource {
    pub fn new(
        op: &DgOperator,
        wavelet: Wavelet,
        amplitude: f64,
        position: (f64, f64),
        targets: Vec<(usize, f64)>,
    ) -> Result<Self, SourceError> {
        for &(f, _) in &targets {
            if ![S11, S33, S13, V1, V3].contains(&f) {
                return Err(SourceError::Target(crate::dg::FIELD_NAMES.get(f).unwrap_or(&"?").to_string()));
            }
        }
        let hosts = op.mesh.locate_all(position.0, position.1);
        if hosts.is_empty() {
            return Err(SourceError::Outside(position.0, position.1));
        }
        let share = 1.0 / hosts.len() as f64;
        let mut parts = Vec::with_capacity(hosts.len());
        let mut rho = Vec::with_capacity(hosts.len());
        for (k, r, s) in hosts {
            let l = op.re.basis_at(r, s).map_err(|_| SourceError::Outside(position.0, position.1))?;
            let d = &op.re.mass_inv * l * (share / op.mesh.geom[k].j);
            parts.push((k, d.as_slice().to_vec()));
            rho.push(op.materials[op.mesh.mesh.material[k]].rho);
        }
        Ok(PointSource { wavelet, amplitude, position, targets, parts, rho })
    }

    /// Adds the source to `dq` at time `t`. Velocity rows receive `f / rho`.
    pub fn add_to(&self, op: &DgOperator, dq: &mut [f64], t: f64) {
        let w = self.amplitude * self.wavelet.value(t);
        if w == 0.0 {
            return;
        }
        for ((k, delta), rho) in self.parts.iter().zip(&self.rho) {
            for &(f, weight) in &self.targets {
                let scale = if f == V1 || f == V3 { w * weight / rho } else { w * weight };
                let base = op.idx(*k, f, 0);
                for (d, c) in dq[base..base + delta.len()].iter_mut().zip(delta) {
                    *d += scale * c;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Receiver {
    pub position: (f64, f64),
    pub element: usize,
    pub weights: Vec<f64>,
}

/// Receivers sampling every field at each recorded time.
#[derive(Debug, Clone, Default)]
pub struct ReceiverSet {
    pub receivers: Vec<Receiver>,
    pub times: Vec<f64>,
    /// `traces[receiver][sample]`, all fields.
    pub traces: Vec<Vec<[f64; NFIELDS]>>,
}

impl ReceiverSet {
    pub fn new(op: &DgOperator, positions: &[(f64, f64)]) -> Result<Self, SourceError> {
        let mut receivers = Vec::with_capacity(positions.len());
        for &(x, z) in positions {
            let (k, r, s) = op.mesh.locate(x, z).ok_or(SourceError::Outside(x, z))?;
            let l = op.re.basis_at(r, s).map_err(|_| SourceError::Outside(x, z))?;
            receivers.push(Receiver { position: (x, z), element: k, weights: l.as_slice().to_vec() });
        }
        let traces = vec![Vec::new(); receivers.len()];
        Ok(ReceiverSet { receivers, times: Vec::new(), traces })
    }

    pub fn sample(&self, op: &DgOperator, q: &[f64], i: usize) -> [f64; NFIELDS] {
        let rc = &self.receivers[i];
        std::array::from_fn(|f| {
            let base = op.idx(rc.element, f, 0);
            rc.weights.iter().zip(&q[base..base + rc.weights.len()]).map(|(w, v)| w * v).sum()
        })
    }

    pub fn record(&mut self, op: &DgOperator, q: &[f64], t: f64) {
        self.times.push(t);
        for i in 0..self.receivers.len() {
            let v = self.sample(op, q, i);
            self.traces[i].push(v);
        }
    }

    /// One field of one receiver as a time series.
    pub fn series(&self, receiver: usize, field: usize) -> Vec<f64> {
        self.traces[receiver].iter().map(|s| s[field]).collect()
    }
}
