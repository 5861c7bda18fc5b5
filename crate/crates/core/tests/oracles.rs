mod common;

use common::oracles::*;
use num_complex::Complex64;
use visco_dg::materials::{characteristic_speeds, compliance_inverse, derive_visco_coefficients, MaterialSpec};
use visco_dg::verify::greens::{greens_frequency, SpeedForm};
use visco_dg::verify::hankel::hankel2_01;
use visco_dg::verify::plane_wave::plane_wave_modes;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn moduli_match_reference() {
    let s = MaterialSpec::preset("sandstone").unwrap().stiffness.moduli();
    assert!(rel(s.d, SANDSTONE_D) < 1e-14 && rel(s.g, SANDSTONE_G) < 1e-14 && rel(s.k, SANDSTONE_K) < 1e-12);
    let c = MaterialSpec::preset("clay_shale").unwrap().stiffness.moduli();
    assert!(rel(c.d, CLAY_SHALE_D) < 1e-14 && rel(c.g, CLAY_SHALE_G) < 1e-14 && rel(c.k, CLAY_SHALE_K) < 1e-13);
}

#[test]
fn compliance_matches_reference() {
    let c = compliance_inverse(&MaterialSpec::preset("sandstone").unwrap()).unwrap();
    let got = [c.r11, c.r12, c.r13, c.r33].map(|r| r * 1e9);
    for (g, w) in got.iter().zip(SANDSTONE_COMPLIANCE) {
        assert!(rel(*g, w) < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn first_t_coefficient() {
    let c = derive_visco_coefficients(&MaterialSpec::preset("sandstone").unwrap()).unwrap();
    assert!(rel(c.t[0], SANDSTONE_T1) < 1e-12, "{}", c.t[0]);
}

#[test]
fn characteristic_speed_per_preset() {
    for (name, want) in LAMBDA_MAX {
        let got = characteristic_speeds(&MaterialSpec::preset(name).unwrap());
        assert!(rel(got, want) < 1e-12, "{name}: {got} vs {want}");
    }
}

#[test]
fn hankel_against_high_precision() {
    for [zr, zi, h0r, h0i, h1r, h1i] in HANKEL2 {
        let (h0, h1) = hankel2_01(Complex64::new(zr, zi));
        let (w0, w1) = (Complex64::new(h0r, h0i), Complex64::new(h1r, h1i));
        assert!((h0 - w0).norm() < 1e-10 * w0.norm(), "H0 at {zr}{zi:+}i");
        assert!((h1 - w1).norm() < 1e-10 * w1.norm(), "H1 at {zr}{zi:+}i");
    }
}

#[test]
fn plane_wave_frequencies() {
    let c = derive_visco_coefficients(&MaterialSpec::preset("sandstone").unwrap()).unwrap();
    for [k1, k3, pr, pi, sr, si] in SANDSTONE_PLANE_WAVE {
        let sol = plane_wave_modes(&c, (k1, k3)).unwrap();
        let (p, s) = (sol.modes[0].omega, sol.modes[1].omega);
        let (wp, ws) = (Complex64::new(pr, pi), Complex64::new(sr, si));
        assert!((p - wp).norm() < 1e-10 * wp.norm(), "P {p} vs {wp}");
        assert!((s - ws).norm() < 1e-10 * ws.norm(), "S {s} vs {ws}");
    }
}

#[test]
fn elastic_greens_function() {
    let spec = MaterialSpec::preset("sandstone").unwrap().elastic_limit();
    for [w, u1r, u1i, u3r, u3i] in ELASTIC_GREENS {
        let (u1, u3) = greens_frequency(&spec, 250.0, 250.0, w, SpeedForm::Consistent);
        let (w1, w3) = (Complex64::new(u1r, u1i), Complex64::new(u3r, u3i));
        assert!((u1 - w1).norm() < 1e-9 * w1.norm(), "u1 at {w}: {u1} vs {w1}");
        assert!((u3 - w3).norm() < 1e-9 * w3.norm(), "u3 at {w}: {u3} vs {w3}");
    }
}
