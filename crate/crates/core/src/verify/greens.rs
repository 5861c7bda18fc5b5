//! Frequency-domain Green's function of a vertical point force in a homogeneous
//! isotropic viscoelastic plane, and time-domain synthesis of receiver traces.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

use super::hankel::hankel2_01;
use crate::materials::MaterialSpec;
use crate::source::Wavelet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error("trace length {t_max} s does not cover the wavelet (needs at least {needed} s)")]
    TooShort { t_max: f64, needed: f64 },
    #[error("sample interval {dt} s exceeds the Nyquist limit {limit} s")]
    Undersampled { dt: f64, limit: f64 },
    #[error("receiver coincides with the source")]
    AtSource,
}

/// How the complex body-wave speeds are built from the moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedForm {
    /// `rho cp^2 = c11 + K (M1 - 1) + G (M2 - 1)`, `rho cs^2 = c55 M2`: the
    /// `C11` and `C55` entries of the complex plane-strain stiffness.
    Consistent,
    /// `rho cp^2 = (c11 + c33) M1 + c33 M2`, `rho cs^2 = c33 M2`.
    Printed,
}

impl std::str::FromStr for SpeedForm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "consistent" => Ok(SpeedForm::Consistent),
            "printed" => Ok(SpeedForm::Printed),
            _ => Err(format!("unknown speed form `{s}`")),
        }
    }
}

/// Complex `(c_p, c_s)` at angular frequency `omega`.
pub fn complex_speeds(spec: &MaterialSpec, omega: f64, form: SpeedForm) -> (Complex64, Complex64) {
    let m1 = spec.relaxation.complex_modulus(1, omega);
    let m2 = spec.relaxation.complex_modulus(2, omega);
    let c = &spec.stiffness;
    let (c11, c33, c55) = (c.get(1, 1), c.get(3, 3), c.get(5, 5));
    let (p, s) = match form {
        SpeedForm::Consistent => {
            let m = c.moduli();
            (c11 + m.k * (m1 - 1.0) + m.g * (m2 - 1.0), c55 * m2)
        }
        SpeedForm::Printed => ((c11 + c33) * m1 + c33 * m2, c33 * m2),
    };
    ((p / spec.rho).sqrt(), (s / spec.rho).sqrt())
}

/// Displacement transform `(u1, u3)` at `(x, z)` relative to the source for a unit
/// impulsive force in `+x3`. Zero at `omega = 0`; conjugate for negative `omega`.
pub fn greens_frequency(spec: &MaterialSpec, x: f64, z: f64, omega: f64, form: SpeedForm) -> (Complex64, Complex64) {
    if omega == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if omega < 0.0 {
        let (a, b) = greens_frequency(spec, x, z, -omega, form);
        return (a.conj(), b.conj());
    }
    let r2 = x * x + z * z;
    let r = r2.sqrt();
    let (cp, cs) = complex_speeds(spec, omega, form);
    let (p0, p1) = hankel2_01(omega * r / cp);
    let (s0, s1) = hankel2_01(omega * r / cs);
    let i = Complex64::i();
    let near = s1 / (omega * r * cs) - p1 / (omega * r * cp);
    let g1 = -i * PI / 2.0 * (p0 / (cp * cp) + near);
    let g3 = i * PI / 2.0 * (s0 / (cs * cs) - near);
    let pre = 1.0 / (2.0 * PI * spec.rho);
    (pre * x * z / r2 * (g1 + g3), pre / r2 * (z * z * g1 - x * x * g3))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensTrace {
    pub t: Vec<f64>,
    pub v1: Vec<f64>,
    pub v3: Vec<f64>,
    /// Relative Parseval mismatch of the synthesized velocity over one period.
    pub parseval_error: f64,
}

/// Particle-velocity traces for a force `amplitude * w(t)` in `+x3`, sampled at
/// `0, dt, ..` up to `t_max`. The grid uses `df = 1 / (2 t_max)` up to
/// `8 f0`, with a cosine taper over the top tenth of the band.
pub fn greens_trace(
    spec: &MaterialSpec,
    x: f64,
    z: f64,
    wavelet: &Wavelet,
    amplitude: f64,
    t_max: f64,
    dt: f64,
    form: SpeedForm,
) -> Result<GreensTrace, GreensError> {
    let synth = GreensSynthesis::new(spec, x, z, wavelet, amplitude, t_max, form)?;
    let limit = synth.period / (2 * synth.coeffs.len() + 1) as f64;
    if dt > limit {
        return Err(GreensError::Undersampled { dt, limit });
    }
    let nt = (t_max / dt * (1.0 + 1e-12)).floor() as usize + 1;
    let t: Vec<f64> = (0..nt).map(|j| j as f64 * dt).collect();
    Ok(synth.trace(t))
}

/// Same synthesis evaluated at arbitrary times in `[0, t_max]`.
pub fn greens_trace_at(
    spec: &MaterialSpec,
    x: f64,
    z: f64,
    wavelet: &Wavelet,
    amplitude: f64,
    t_max: f64,
    times: &[f64],
    form: SpeedForm,
) -> Result<GreensTrace, GreensError> {
    Ok(GreensSynthesis::new(spec, x, z, wavelet, amplitude, t_max, form)?.trace(times.to_vec()))
}

/// Fourier-series coefficients of the period-`2 t_max` velocity,
/// `v(t) = sum_n c_n exp(i w_n t) + c.c.`
struct GreensSynthesis {
    period: f64,
    dw: f64,
    coeffs: Vec<(Complex64, Complex64)>,
}

impl GreensSynthesis {
    fn new(
        spec: &MaterialSpec,
        x: f64,
        z: f64,
        wavelet: &Wavelet,
        amplitude: f64,
        t_max: f64,
        form: SpeedForm,
    ) -> Result<Self, GreensError> {
        if x == 0.0 && z == 0.0 {
            return Err(GreensError::AtSource);
        }
        let needed = wavelet.t0 + wavelet.half_width();
        if t_max < needed {
            return Err(GreensError::TooShort { t_max, needed });
        }
        let period = 2.0 * t_max;
        let dw = 2.0 * PI / period;
        let w_max = 2.0 * PI * 8.0 * wavelet.f0;
        let nw = (w_max / dw).ceil() as usize;
        let taper_start = 0.9 * w_max;
        let coeffs = (1..=nw)
            .into_par_iter()
            .map(|n| {
                let w = n as f64 * dw;
                let taper = if w <= taper_start {
                    1.0
                } else if w >= w_max {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * (w - taper_start) / (w_max - taper_start)).cos())
                };
                let (u1, u3) = greens_frequency(spec, x, z, w, form);
                let f = Complex64::i() * w * wavelet.spectrum(w) * amplitude * taper / period;
                (u1 * f, u3 * f)
            })
            .collect();
        Ok(GreensSynthesis { period, dw, coeffs })
    }

    fn at(&self, t: f64) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for (n, (c1, c3)) in self.coeffs.iter().enumerate() {
            let e = Complex64::from_polar(1.0, (n + 1) as f64 * self.dw * t);
            a += 2.0 * (c1 * e).re;
            b += 2.0 * (c3 * e).re;
        }
        (a, b)
    }

    /// Relative mismatch between time- and frequency-domain energy over one period.
    fn parseval_error(&self) -> f64 {
        let m = 2 * self.coeffs.len() + 2;
        let h = self.period / m as f64;
        let time_energy: f64 = (0..m)
            .into_par_iter()
            .map(|j| {
                let (a, b) = self.at(j as f64 * h);
                (a * a + b * b) * h
            })
            .sum();
        let freq_energy: f64 =
            self.period * self.coeffs.iter().map(|(a, b)| 2.0 * (a.norm_sqr() + b.norm_sqr())).sum::<f64>();
        if freq_energy > 0.0 {
            (time_energy - freq_energy).abs() / freq_energy
        } else {
            0.0
        }
    }

    fn trace(&self, t: Vec<f64>) -> GreensTrace {
        let (v1, v3): (Vec<f64>, Vec<f64>) = t.par_iter().map(|&tj| self.at(tj)).unzip();
        GreensTrace { t, v1, v3, parseval_error: self.parseval_error() }
    }
}
