//! Hankel functions of the second kind, orders 0 and 1, for complex argument
//! with `Re z > 0`.

use num_complex::Complex64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Series below this modulus, asymptotic expansion above.
pub const SWITCH: f64 = 12.0;

/// `(H0^(2)(z), H1^(2)(z))`.
pub fn hankel2_01(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() <= SWITCH {
        let (j0, j1, y0, y1) = bessel_series(z);
        let i = Complex64::i();
        (j0 - i * y0, j1 - i * y1)
    } else {
        (asymptotic(z, 0.0), asymptotic(z, 1.0))
    }
}

fn bessel_series(z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let q = z * z / 4.0;
    let half = z / 2.0;
    let mut j0 = Complex64::new(0.0, 0.0);
    let mut j1 = Complex64::new(0.0, 0.0);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    // t0 = (-q)^m / (m!)^2, t1 = (-q)^m / (m! (m+1)!)
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut h = 0.0;
    for m in 0..200 {
        let mf = m as f64;
        let t1 = t0 / (mf + 1.0);
        let h_next = h + 1.0 / (mf + 1.0);
        j0 += t0;
        j1 += t1;
        s0 += t0 * h;
        s1 += t1 * (h + h_next);
        if m > 2 && t0.norm() < 1e-18 * j0.norm().max(1e-300) && t1.norm() < 1e-18 {
            break;
        }
        t0 = -t0 * q / ((mf + 1.0) * (mf + 1.0));
        h = h_next;
    }
    j1 *= half;
    s1 *= half;
    let lg = (half).ln() + EULER_GAMMA;
    let y0 = (2.0 / PI) * (lg * j0 - s0);
    let y1 = (2.0 / PI) * lg * j1 - 2.0 / (PI * z) - s1 / PI;
    (j0, j1, y0, y1)
}

fn asymptotic(z: Complex64, nu: f64) -> Complex64 {
    let mu = 4.0 * nu * nu;
    let mi = Complex64::new(0.0, -1.0);
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * mi * (mu - odd * odd) / (kf * 8.0 * z);
        let n = next.norm();
        if n > prev {
            break;
        }
        term = next;
        sum += term;
        prev = n;
        if n < 1e-17 {
            break;
        }
    }
    let chi = z - nu * PI / 2.0 - PI / 4.0;
    (2.0 / (PI * z)).sqrt() * (-Complex64::i() * chi).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_limits() {
        let (h0, h1) = hankel2_01(Complex64::new(1e-4, 0.0));
        assert!((h0.re - 1.0).abs() < 1e-8);
        // Y0(x) ~ (2/pi)(ln(x/2) + gamma), Y1(x) ~ -2/(pi x)
        assert!((-h0.im - 2.0 / PI * ((5e-5f64).ln() + EULER_GAMMA)).abs() < 1e-7);
        assert!((-h1.im + 2.0 / (PI * 1e-4)).abs() < 1e-7 * 2.0 / (PI * 1e-4));
    }

    #[test]
    fn branches_agree_at_switch() {
        for arg in [0.0, -0.05, -0.1] {
            let z = Complex64::from_polar(SWITCH, arg);
            let (j0, j1, y0, y1) = bessel_series(z);
            let i = Complex64::i();
            let (a0, a1) = (asymptotic(z, 0.0), asymptotic(z, 1.0));
            assert!((j0 - i * y0 - a0).norm() < 1e-10 * a0.norm());
            assert!((j1 - i * y1 - a1).norm() < 1e-10 * a1.norm());
        }
    }
}
