//! Anisotropic Zener media: raw specifications and the derived coefficient blocks
//! of the 2D symmetric first-order system.
//!
//! Strain and stress are handled in 2D Voigt order `[e11, e33, g13]` and
//! `[s11, s33, s13]`. The three attenuation modes are projections of the strain,
//! `P = [[1, 1, 0], [1/2, -1/2, 0], [0, 0, 1]]` (dilatation, deviatoric normal
//! difference, shear), with mode stiffnesses `Gamma = diag(K, 4G, c55)`.

use nalgebra::{Matrix2, Matrix3, Matrix6, SymmetricEigen, Vector3};
use num_complex::Complex64;
use thiserror::Error;

pub const GPA: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("density must be positive, got {0}")]
    Density(f64),
    #[error("stiffness matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("stiffness matrix is not symmetric (entry {0},{1})")]
    NotSymmetric(usize, usize),
    #[error("mode {mode}: need tau_eps >= tau_sig > 0, got tau_eps = {tau_eps}, tau_sig = {tau_sig}")]
    RelaxationTimes { mode: usize, tau_eps: f64, tau_sig: f64 },
    #[error("stiffness block is singular (condition number {0:.3e})")]
    Singular(f64),
    #[error("relaxed stiffness is not positive definite (smallest eigenvalue {0:.3e})")]
    RelaxedNotPositive(f64),
    #[error("unknown material preset `{0}`")]
    UnknownPreset(String),
}

/// Full 6x6 Voigt stiffness in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stiffness(pub [[f64; 6]; 6]);

impl Stiffness {
    #[allow(clippy::too_many_arguments)]
    pub fn orthotropic(
        c11: f64,
        c12: f64,
        c13: f64,
        c22: f64,
        c23: f64,
        c33: f64,
        c44: f64,
        c55: f64,
        c66: f64,
    ) -> Self {
        let mut c = [[0.0; 6]; 6];
        c[0][0] = c11;
        c[0][1] = c12;
        c[1][0] = c12;
        c[0][2] = c13;
        c[2][0] = c13;
        c[1][1] = c22;
        c[1][2] = c23;
        c[2][1] = c23;
        c[2][2] = c33;
        c[3][3] = c44;
        c[4][4] = c55;
        c[5][5] = c66;
        Stiffness(c)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i - 1][j - 1]
    }

    /// Upper-left normal-stress block.
    pub fn normal_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[i][j])
    }

    /// Plane-strain block acting on `[e11, e33, g13]`.
    pub fn block_2d(&self) -> Matrix3<f64> {
        let c = &self.0;
        Matrix3::new(
            c[0][0], c[0][2], c[0][4], //
            c[2][0], c[2][2], c[2][4], //
            c[4][0], c[4][2], c[4][4],
        )
    }

    pub fn moduli(&self) -> Moduli {
        let d = (self.get(1, 1) + self.get(2, 2) + self.get(3, 3)) / 3.0;
        let g = (self.get(4, 4) + self.get(5, 5) + self.get(6, 6)) / 3.0;
        Moduli { k: d - 4.0 / 3.0 * g, g, d }
    }
}

/// `D`, `G` and `K = D - 4G/3`, all in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moduli {
    pub k: f64,
    pub g: f64,
    pub d: f64,
}

pub fn derive_moduli(spec: &MaterialSpec) -> Moduli {
    spec.stiffness.moduli()
}

/// One Zener mechanism, times in s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationPair {
    pub tau_eps: f64,
    pub tau_sig: f64,
}

impl RelaxationPair {
    pub fn new(tau_eps: f64, tau_sig: f64) -> Self {
        RelaxationPair { tau_eps, tau_sig }
    }

    /// `T = (1/tau_sig)(tau_sig/tau_eps - 1)`; non-positive, zero in the elastic limit.
    pub fn t_coeff(&self) -> f64 {
        (self.tau_sig / self.tau_eps - 1.0) / self.tau_sig
    }

    pub fn is_elastic(&self) -> bool {
        self.tau_eps == self.tau_sig
    }

    /// Relaxation function normalised so that `chi(0+) = 1` (unrelaxed) and
    /// `chi(inf) = tau_sig/tau_eps`.
    pub fn chi(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let r = self.tau_sig / self.tau_eps;
        r * (1.0 - (1.0 - self.tau_eps / self.tau_sig) * (-t / self.tau_sig).exp())
    }

    /// Memory kernel `phi(t) = d chi/dt = T exp(-t/tau_sig)` for `t >= 0`.
    pub fn phi(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.t_coeff() * (-t / self.tau_sig).exp()
    }

    pub fn phi0(&self) -> f64 {
        self.t_coeff()
    }

    /// Complex modulus under the `exp(-i w t)` transform, `M(inf) = 1`.
    pub fn complex_modulus(&self, omega: f64) -> Complex64 {
        let i = Complex64::i();
        let num = 1.0 + i * omega * self.tau_eps;
        let den = 1.0 + i * omega * self.tau_sig;
        (self.tau_sig / self.tau_eps) * num / den
    }
}

/// Per-mode relaxation pairs; the 2D system uses the dilatational mode and the
/// first shear mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationModel {
    pub modes: [RelaxationPair; 4],
}

impl RelaxationModel {
    pub fn mode(&self, nu: usize) -> RelaxationPair {
        self.modes[nu - 1]
    }

    pub fn chi(&self, nu: usize, t: f64) -> f64 {
        self.mode(nu).chi(t)
    }

    pub fn complex_modulus(&self, nu: usize, omega: f64) -> Complex64 {
        self.mode(nu).complex_modulus(omega)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub name: String,
    pub stiffness: Stiffness,
    pub rho: f64,
    pub relaxation: RelaxationModel,
}

impl MaterialSpec {
    pub fn new(
        name: impl Into<String>,
        stiffness: Stiffness,
        rho: f64,
        modes: [RelaxationPair; 4],
    ) -> Result<Self, MaterialError> {
        if !(rho > 0.0) {
            return Err(MaterialError::Density(rho));
        }
        for i in 0..6 {
            for j in 0..i {
                let (a, b) = (stiffness.0[i][j], stiffness.0[j][i]);
                if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(1.0) {
                    return Err(MaterialError::NotSymmetric(i + 1, j + 1));
                }
            }
        }
        let full = Matrix6::from_fn(|i, j| stiffness.0[i][j]);
        if full.cholesky().is_none() || stiffness.block_2d().cholesky().is_none() {
            return Err(MaterialError::NotPositiveDefinite);
        }
        for (mode, p) in modes.iter().enumerate() {
            if !(p.tau_sig > 0.0 && p.tau_eps >= p.tau_sig) {
                return Err(MaterialError::RelaxationTimes {
                    mode: mode + 1,
                    tau_eps: p.tau_eps,
                    tau_sig: p.tau_sig,
                });
            }
        }
        Ok(MaterialSpec { name: name.into(), stiffness, rho, relaxation: RelaxationModel { modes } })
    }

    pub fn preset(name: &str) -> Result<Self, MaterialError> {
        let pair = RelaxationPair::new;
        match name {
            "clay_shale" => MaterialSpec::new(
                name,
                gpa_orthotropic([66.6, 19.7, 39.4, 66.6, 39.4, 39.9, 10.9, 10.9, 23.4]),
                2590.0,
                [pair(8.00e-3, 7.49e-3), pair(8.00e-3, 7.25e-3), pair(8.00e-3, 7.25e-3), pair(8.00e-3, 7.25e-3)],
            ),
            "phenolic" => MaterialSpec::new(
                name,
                gpa_orthotropic([11.7, 6.7, 7.0, 15.4, 7.0, 17.4, 3.8, 3.5, 3.1]),
                1364.0,
                [pair(6.4e-3, 6.00e-3), pair(6.4e-3, 5.80e-3), pair(6.4e-3, 5.60e-3), pair(6.4e-3, 5.30e-3)],
            ),
            "sandstone" => MaterialSpec::new(
                name,
                gpa_orthotropic([25.6, 9.4, 9.4, 25.6, 9.4, 25.6, 16.2, 16.2, 16.2]),
                2500.0,
                sandstone_times(),
            ),
            // Same normal stiffnesses with c44 = c55 = c66 = (c11 - c13)/2, so the
            // plane-strain block is isotropic.
            "sandstone_iso" => MaterialSpec::new(
                name,
                gpa_orthotropic([25.6, 9.4, 9.4, 25.6, 9.4, 25.6, 8.1, 8.1, 8.1]),
                2500.0,
                sandstone_times(),
            ),
            _ => Err(MaterialError::UnknownPreset(name.to_string())),
        }
    }

    pub const PRESETS: [&'static str; 4] = ["clay_shale", "phenolic", "sandstone", "sandstone_iso"];

    /// Same medium with `tau_eps = tau_sig` in every mode.
    pub fn elastic_limit(&self) -> Self {
        let mut out = self.clone();
        for p in out.relaxation.modes.iter_mut() {
            p.tau_eps = p.tau_sig;
        }
        out
    }

    /// Relaxation pairs driving the dilatational, deviatoric and shear 2D modes.
    pub fn mode_pairs_2d(&self) -> [RelaxationPair; 3] {
        let m = &self.relaxation;
        [m.mode(1), m.mode(2), m.mode(2)]
    }

    pub fn is_elastic(&self) -> bool {
        self.mode_pairs_2d().iter().all(|p| p.is_elastic())
    }
}

fn gpa_orthotropic(v: [f64; 9]) -> Stiffness {
    let g = v.map(|x| x * GPA);
    Stiffness::orthotropic(g[0], g[1], g[2], g[3], g[4], g[5], g[6], g[7], g[8])
}

fn sandstone_times() -> [RelaxationPair; 4] {
    let pair = RelaxationPair::new;
    [pair(3.72e-3, 3.36e-3), pair(3.78e-3, 3.30e-3), pair(3.78e-3, 3.30e-3), pair(3.78e-3, 3.30e-3)]
}

/// Entries of the inverse of the normal-stress stiffness block, in 1/Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceEntries {
    pub r11: f64,
    pub r12: f64,
    pub r13: f64,
    pub r33: f64,
    pub inverse: Matrix3<f64>,
}

pub fn compliance_inverse(spec: &MaterialSpec) -> Result<ComplianceEntries, MaterialError> {
    let c = spec.stiffness.normal_block();
    let inverse = checked_inverse(&c)?;
    Ok(ComplianceEntries {
        r11: inverse[(0, 0)],
        r12: inverse[(0, 1)],
        r13: inverse[(0, 2)],
        r33: inverse[(2, 2)],
        inverse,
    })
}

fn checked_inverse(c: &Matrix3<f64>) -> Result<Matrix3<f64>, MaterialError> {
    let sv = c.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(MaterialError::Singular(cond));
    }
    c.try_inverse().ok_or(MaterialError::Singular(cond))
}

/// Largest unrelaxed phase speed over propagation along x, z and the diagonal.
pub fn characteristic_speeds(spec: &MaterialSpec) -> f64 {
    max_christoffel_speed(&spec.stiffness.block_2d(), spec.rho)
}

pub fn max_christoffel_speed(c: &Matrix3<f64>, rho: f64) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [(1.0, 0.0), (0.0, 1.0), (h, h)]
        .iter()
        .map(|&(n1, n3)| {
            christoffel(c, n1, n3)
                .symmetric_eigenvalues()
                .iter()
                .fold(0.0f64, |m, &e| m.max((e.max(0.0) / rho).sqrt()))
        })
        .fold(0.0, f64::max)
}

/// `B^T C B` for the unit direction `(n1, n3)`; `B` maps velocity to `[e11, e33, g13]`.
pub fn christoffel(c: &Matrix3<f64>, n1: f64, n3: f64) -> Matrix2<f64> {
    let b = nalgebra::Matrix3x2::new(n1, 0.0, 0.0, n3, n3, n1);
    b.transpose() * c * b
}

/// Mode projection `P`.
pub fn mode_projection() -> Matrix3<f64> {
    Matrix3::new(1.0, 1.0, 0.0, 0.5, -0.5, 0.0, 0.0, 0.0, 1.0)
}

/// Everything derived from a [`MaterialSpec`] for the 2D system.
///
/// The solver's memory unknowns `y` are energy-normalised internal strains:
/// the stored energy is `s^T C^-1 s / 2 + |y|^2 / 2` and the source block `s`
/// is symmetric negative semi-definite by construction. The rate-form memory
/// variables `e` (with `ds/dt = C de/dt + M e`, `de/dt = T P de/dt - e/tau`) and
/// the shifted variables `a = e - z(s)` are recovered with
/// [`ViscoCoefficients::memory_to_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct ViscoCoefficients {
    pub moduli: Moduli,
    pub compliance: ComplianceEntries,
    pub d1: f64,
    pub d2: f64,
    pub p_lambda: f64,
    pub p_mu1: f64,
    pub p_mu2: f64,
    /// `T_i` per 2D mode, 1/s.
    pub t: Vector3<f64>,
    /// `1/tau_sig` per 2D mode.
    pub lambda: Vector3<f64>,
    /// Mode stiffnesses `diag(K, 4G, c55)`.
    pub gamma: Vector3<f64>,
    /// Relaxation strengths `Gamma (1 - tau_sig/tau_eps)`.
    pub delta: Vector3<f64>,
    /// Unrelaxed plane-strain stiffness `C`.
    pub c: Matrix3<f64>,
    pub c_inv: Matrix3<f64>,
    /// `M = P^T Gamma`, the memory-to-stress coupling.
    pub m: Matrix3<f64>,
    /// Stress-to-`z` map `T P C^-1`.
    pub z: Matrix3<f64>,
    /// Memory relaxation block `W = -(Lambda + z M)`.
    pub w: Matrix3<f64>,
    /// Rate-form generator `[[M z, M], [W z, W]]` acting on `(s, a)`.
    pub generator: Matrix6<f64>,
    /// `blockdiag(C^-1, I)`.
    pub qs_inv: Matrix6<f64>,
    /// `blockdiag(C, I)`.
    pub qs: Matrix6<f64>,
    /// Source block for `(s, y)`, symmetric negative semi-definite.
    pub s: Matrix6<f64>,
    /// `qs * s`, applied nodewise by the solver.
    pub qs_s: Matrix6<f64>,
    /// `a = a_from_y * y`.
    pub a_from_y: Matrix3<f64>,
    /// `N^(1/2) E`, giving `y` from the Zener internal strain.
    pub y_from_xi: Matrix3<f64>,
    pub rho: f64,
}

pub fn derive_visco_coefficients(spec: &MaterialSpec) -> Result<ViscoCoefficients, MaterialError> {
    let moduli = spec.stiffness.moduli();
    let compliance = compliance_inverse(spec)?;
    let (r11, r12, r13, r33) = (compliance.r11, compliance.r12, compliance.r13, compliance.r33);
    let d1 = r11 + r12 + r13;
    let d2 = r33 + 2.0 * r13;
    let (k, g) = (moduli.k, moduli.g);

    let pairs = spec.mode_pairs_2d();
    let t = Vector3::from_fn(|i, _| pairs[i].t_coeff());
    let lambda = Vector3::from_fn(|i, _| 1.0 / pairs[i].tau_sig);
    let c = spec.stiffness.block_2d();
    let gamma = Vector3::new(k, 4.0 * g, c[(2, 2)]);
    let delta = Vector3::from_fn(|i, _| gamma[i] * (1.0 - pairs[i].tau_sig / pairs[i].tau_eps));

    let c_inv = checked_inverse(&c)?;
    let p = mode_projection();
    let m = p.transpose() * Matrix3::from_diagonal(&gamma);
    let z = Matrix3::from_diagonal(&t) * p * c_inv;
    let w = -(Matrix3::from_diagonal(&lambda) + z * m);

    let mut generator = Matrix6::zeros();
    generator.fixed_view_mut::<3, 3>(0, 0).copy_from(&(m * z));
    generator.fixed_view_mut::<3, 3>(0, 3).copy_from(&m);
    generator.fixed_view_mut::<3, 3>(3, 0).copy_from(&(w * z));
    generator.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);

    let mut qs_inv = Matrix6::identity();
    qs_inv.fixed_view_mut::<3, 3>(0, 0).copy_from(&c_inv);
    let mut qs = Matrix6::identity();
    qs.fixed_view_mut::<3, 3>(0, 0).copy_from(&c);

    // Energy-normalised memory: y = N^(1/2) E xi with E = diag(sqrt(delta)),
    // N = I - E P C^-1 P^T E, which is SPD iff the relaxed stiffness is.
    let e = Matrix3::from_diagonal(&delta.map(f64::sqrt));
    let f = p * c_inv;
    let n = Matrix3::identity() - e * f * p.transpose() * e;
    let n = (n + n.transpose()) * 0.5;
    let eig = SymmetricEigen::new(n);
    let min_ev = eig.eigenvalues.min();
    if min_ev <= 0.0 {
        return Err(MaterialError::RelaxedNotPositive(min_ev));
    }
    let n_half = eig.eigenvectors
        * Matrix3::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    // S = -R^T Lambda R with R = [E F, -N^(1/2)].
    let mut r = nalgebra::Matrix3x6::zeros();
    r.fixed_view_mut::<3, 3>(0, 0).copy_from(&(e * f));
    r.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-n_half));
    let s = -(r.transpose() * Matrix3::from_diagonal(&lambda) * r);
    let s = (s + s.transpose()) * 0.5;
    let qs_s = qs * s;

    // a = -T E^-1 N^(1/2) y, with -T_i/sqrt(delta_i) = sqrt(|T_i| / (Gamma_i tau_sig_i)).
    let d_s = Vector3::from_fn(|i, _| {
        if gamma[i] > 0.0 {
            (t[i].abs() * lambda[i] / gamma[i]).sqrt()
        } else {
            0.0
        }
    });
    let a_from_y = Matrix3::from_diagonal(&d_s) * n_half;

    Ok(ViscoCoefficients {
        moduli,
        compliance,
        d1,
        d2,
        p_lambda: k * (2.0 * d1 + d2),
        p_mu1: g * (d1 - 2.0 * d2),
        p_mu2: 2.0 * g * (d1 - d2),
        t,
        lambda,
        gamma,
        delta,
        c,
        c_inv,
        m,
        z,
        w,
        generator,
        qs_inv,
        qs,
        s,
        qs_s,
        a_from_y,
        y_from_xi: n_half * e,
        rho: spec.rho,
    })
}

impl ViscoCoefficients {
    /// `z(s)` for a stress vector `[s11, s33, s13]`.
    pub fn z_of(&self, sigma: &Vector3<f64>) -> Vector3<f64> {
        self.z * sigma
    }

    /// Shifted memory `a` from the solver's energy-normalised unknowns.
    pub fn a_of(&self, y: &Vector3<f64>) -> Vector3<f64> {
        self.a_from_y * y
    }

    /// `e = a + z(s)`.
    pub fn memory_to_physical(&self, a: &Vector3<f64>, sigma: &Vector3<f64>) -> Vector3<f64> {
        a + self.z_of(sigma)
    }

    pub fn physical_to_memory(&self, e: &Vector3<f64>, sigma: &Vector3<f64>) -> Vector3<f64> {
        e - self.z_of(sigma)
    }

    /// Complex plane-strain stiffness `C + P^T Gamma diag(M - 1) P`.
    pub fn complex_stiffness(&self, spec: &MaterialSpec, omega: f64) -> nalgebra::Matrix3<Complex64> {
        let pairs = spec.mode_pairs_2d();
        let p = mode_projection().map(Complex64::from);
        let dm = nalgebra::Matrix3::from_fn(|i, j| {
            if i == j {
                (pairs[i].complex_modulus(omega) - 1.0) * self.gamma[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        self.c.map(Complex64::from) + p.transpose() * dm * p
    }

    pub fn lambda_max(&self) -> f64 {
        max_christoffel_speed(&self.c, self.rho)
    }

    /// Spectral radius of `Qs S`, the fastest relaxation rate in 1/s.
    pub fn max_relaxation_rate(&self) -> f64 {
        // Qs S is similar to the symmetric Qs^(1/2) S Qs^(1/2).
        let e = SymmetricEigen::new(self.qs);
        let half = e.eigenvectors * Matrix6::from_diagonal(&e.eigenvalues.map(f64::sqrt)) * e.eigenvectors.transpose();
        let m = half * self.s * half;
        SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sandstone() -> MaterialSpec {
        MaterialSpec::preset("sandstone").unwrap()
    }

    #[test]
    fn sandstone_moduli() {
        let m = derive_moduli(&sandstone());
        assert!((m.d - 25.6e9).abs() < 1e-3);
        assert!((m.g - 16.2e9).abs() < 1e-3);
        assert!((m.k - 4.0e9).abs() < 1e-3);
    }

    #[test]
    fn shear_free_moduli() {
        let c = 7.0e9;
        let s = Stiffness::orthotropic(c, 0.0, 0.0, c, 0.0, c, 0.0, 0.0, 0.0);
        let m = s.moduli();
        assert_eq!((m.d, m.g, m.k), (c, 0.0, c));
    }

    #[test]
    fn identity_block_compliance() {
        let c = 3.0e9;
        let spec = MaterialSpec::new(
            "diag",
            Stiffness::orthotropic(c, 0.0, 0.0, c, 0.0, c, c, c, c),
            1000.0,
            [RelaxationPair::new(1e-3, 1e-3); 4],
        )
        .unwrap();
        let r = compliance_inverse(&spec).unwrap();
        assert!((r.r11 - 1.0 / c).abs() < 1e-24);
        assert_eq!((r.r12, r.r13), (0.0, 0.0));
    }

    #[test]
    fn chi_limits() {
        let p = RelaxationPair::new(3.72e-3, 3.36e-3);
        assert!((p.chi(0.0) - 1.0).abs() < 1e-15);
        assert!((p.chi(100.0 * p.tau_sig) - p.tau_sig / p.tau_eps).abs() < 1e-14);
        assert_eq!(p.chi(-1.0), 0.0);
        let e = RelaxationPair::new(2e-3, 2e-3);
        for t in [0.0, 1e-3, 1.0] {
            assert_eq!(e.chi(t), 1.0);
        }
    }

    #[test]
    fn modulus_limits() {
        let p = RelaxationPair::new(3.72e-3, 3.36e-3);
        let hi = p.complex_modulus(1e12);
        assert!((hi - 1.0).norm() < 1e-8);
        let lo = p.complex_modulus(0.0);
        assert_eq!(lo.im, 0.0);
        for w in [10.0, 300.0, 1e4] {
            assert!(p.complex_modulus(w).im >= 0.0);
            assert!((p.complex_modulus(-w) - p.complex_modulus(w).conj()).norm() < 1e-15);
        }
        let e = RelaxationPair::new(2e-3, 2e-3);
        assert_eq!(e.complex_modulus(123.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn t_coefficient_sandstone() {
        let v = derive_visco_coefficients(&sandstone()).unwrap();
        assert!((v.t[0] - (1.0 / 3.36e-3) * (3.36 / 3.72 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn elastic_limit_zeroes_memory_coupling() {
        let v = derive_visco_coefficients(&sandstone().elastic_limit()).unwrap();
        assert_eq!(v.t, Vector3::zeros());
        assert_eq!(v.z, Matrix3::zeros());
        assert_eq!(v.s.fixed_view::<3, 6>(0, 0).abs().max(), 0.0);
        assert_eq!(v.s.fixed_view::<3, 3>(3, 0).abs().max(), 0.0);
        let decay = v.s.fixed_view::<3, 3>(3, 3).into_owned();
        assert!((decay + Matrix3::from_diagonal(&v.lambda)).abs().max() < 1e-9);
    }

    #[test]
    fn source_block_is_dissipative_for_presets() {
        for name in MaterialSpec::PRESETS {
            let v = derive_visco_coefficients(&MaterialSpec::preset(name).unwrap()).unwrap();
            let top = v.s.symmetric_eigenvalues().max();
            assert!(top <= 1e-8 * v.s.norm(), "{name}: {top}");
        }
    }

    #[test]
    fn rate_memory_generator_is_indefinite() {
        let v = derive_visco_coefficients(&sandstone()).unwrap();
        let sr = v.qs_inv * v.generator;
        let sym = (sr + sr.transpose()) * 0.5;
        assert!(sym.symmetric_eigenvalues().max() > 0.0);
    }

    #[test]
    fn memory_round_trip() {
        let v = derive_visco_coefficients(&sandstone()).unwrap();
        let sigma = Vector3::new(1.0e6, -3.0e5, 2.0e5);
        let a = Vector3::new(0.3, -0.1, 0.7);
        let e = v.memory_to_physical(&a, &sigma);
        assert!((v.physical_to_memory(&e, &sigma) - a).norm() < 1e-15);
        assert_eq!(v.memory_to_physical(&a, &Vector3::zeros()), a);
    }

    #[test]
    fn sandstone_speed() {
        let s = sandstone();
        let lam = characteristic_speeds(&s);
        assert!(lam >= (25.6e9f64 / 2500.0).sqrt());
        let iso = MaterialSpec::preset("sandstone_iso").unwrap();
        assert!((characteristic_speeds(&iso) - 3200.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let s = sandstone();
        assert!(matches!(
            MaterialSpec::new("x", s.stiffness, -1.0, s.relaxation.modes),
            Err(MaterialError::Density(_))
        ));
        let mut modes = s.relaxation.modes;
        modes[1] = RelaxationPair::new(1e-3, 2e-3);
        assert!(matches!(
            MaterialSpec::new("x", s.stiffness, 2500.0, modes),
            Err(MaterialError::RelaxationTimes { mode: 2, .. })
        ));
        assert!(MaterialSpec::preset("granite").is_err());
    }
}
