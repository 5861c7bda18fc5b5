//! Five-stage, fourth-order low-storage Runge-Kutta (Carpenter and Kennedy, 1994).

use thiserror::Error;

use crate::mesh::DgMesh;

/// Stage coefficients `a_i`, `b_i`, `c_i` as the published rationals.
pub const RK4A: [f64; 5] = [
    0.0,
    -567_301_805_773.0 / 1_357_537_059_087.0,
    -2_404_267_990_393.0 / 2_016_746_695_238.0,
    -3_550_918_686_646.0 / 2_091_501_179_385.0,
    -1_275_806_237_668.0 / 842_570_457_699.0,
];
pub const RK4B: [f64; 5] = [
    1_432_997_174_477.0 / 9_575_080_441_755.0,
    5_161_836_677_717.0 / 13_612_068_292_357.0,
    1_720_146_321_549.0 / 2_090_206_949_498.0,
    3_134_564_353_537.0 / 4_481_467_310_338.0,
    2_277_821_191_437.0 / 14_882_151_754_819.0,
];
pub const RK4C: [f64; 5] = [
    0.0,
    1_432_997_174_477.0 / 9_575_080_441_755.0,
    2_526_269_341_429.0 / 6_820_363_183_256.0,
    2_006_345_519_317.0 / 3_224_310_063_776.0,
    2_802_321_613_138.0 / 2_924_317_926_251.0,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error("CFL number must be positive, got {0}")]
    Cfl(f64),
    #[error("wave speed must be positive, got {0}")]
    Speed(f64),
    #[error("time step must be positive, got {0}")]
    Step(f64),
    #[error("element {0} has zero measure")]
    ZeroMeasure(usize),
    #[error("non-finite state at step {step} (t = {t:e}), entry {index}")]
    NonFinite { step: usize, t: f64, index: usize },
    #[error("right-hand side failed at step {step}: {msg}")]
    Rhs { step: usize, msg: String },
}

/// Trace-inequality constant `(N+1)(N+2)/2`.
pub fn default_c_n(n: usize) -> f64 {
    ((n + 1) * (n + 2)) as f64 / 2.0
}

/// `min_k C_CFL / (lambda_k C_N max_f J^f / J)` with `lambda_k` taken from
/// `speeds[material id]`.
pub fn estimate_dt(mesh: &DgMesh, speeds: &[f64], n: usize, c_cfl: f64, c_n: Option<f64>) -> Result<f64, TimeError> {
    if !(c_cfl > 0.0 && c_cfl.is_finite()) {
        return Err(TimeError::Cfl(c_cfl));
    }
    let c_n = c_n.unwrap_or_else(|| default_c_n(n));
    let mut dt = f64::INFINITY;
    for (k, g) in mesh.geom.iter().enumerate() {
        if g.j <= 0.0 {
            return Err(TimeError::ZeroMeasure(k));
        }
        let lam = speeds[mesh.mesh.material[k]];
        if !(lam > 0.0) {
            return Err(TimeError::Speed(lam));
        }
        let jf = g.faces.iter().map(|f| f.jf).fold(0.0, f64::max);
        dt = dt.min(c_cfl / (lam * c_n * jf / g.j));
    }
    Ok(dt)
}

/// Largest step keeping `-rate dt` well inside the real-axis stability interval.
pub fn relaxation_step_limit(rate: f64) -> f64 {
    if rate > 0.0 {
        2.0 / rate
    } else {
        f64::INFINITY
    }
}

/// Two-register stepper: the state plus one residual.
#[derive(Debug, Clone)]
pub struct Lsrk45 {
    resid: Vec<f64>,
    rate: Vec<f64>,
}

impl Lsrk45 {
    pub fn new(len: usize) -> Self {
        Lsrk45 { resid: vec![0.0; len], rate: vec![0.0; len] }
    }

    /// One step `t -> t + dt`. `f(q, t, dq)` writes the time derivative.
    pub fn step<F>(&mut self, f: &mut F, q: &mut [f64], t: f64, dt: f64) -> Result<(), String>
    where
        F: FnMut(&[f64], f64, &mut [f64]) -> Result<(), String>,
    {
        self.resid.iter_mut().for_each(|r| *r = 0.0);
        for s in 0..5 {
            f(q, t + RK4C[s] * dt, &mut self.rate)?;
            let (a, b) = (RK4A[s], RK4B[s]);
            for ((r, qi), k) in self.resid.iter_mut().zip(q.iter_mut()).zip(&self.rate) {
                *r = a * *r + dt * k;
                *qi += b * *r;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvanceOptions {
    pub dt: f64,
    /// Check the state for NaN/Inf every this many steps (0 disables).
    pub nan_check_every: usize,
}

impl AdvanceOptions {
    pub fn new(dt: f64) -> Self {
        AdvanceOptions { dt, nan_check_every: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvanceStats {
    pub steps: usize,
    pub last_dt: f64,
}

/// Number of steps of size at most `dt` needed to cover `[t0, t1]`.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> usize {
    let n = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil();
    n.max(0.0) as usize
}

/// Integrate `q` from `t0` to exactly `t1`. The observer sees `(step, t, q)` after
/// every completed step, starting with step 0 at `t0`.
pub fn advance<F, O>(
    mut f: F,
    q: &mut [f64],
    t0: f64,
    t1: f64,
    opts: AdvanceOptions,
    mut observer: O,
) -> Result<AdvanceStats, TimeError>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<(), String>,
    O: FnMut(usize, f64, &[f64]),
{
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(TimeError::Step(opts.dt));
    }
    let steps = step_count(t0, t1, opts.dt);
    let mut rk = Lsrk45::new(q.len());
    observer(0, t0, q);
    let mut t = t0;
    let mut last_dt = 0.0;
    for n in 1..=steps {
        let dt = if n == steps { t1 - t } else { opts.dt };
        rk.step(&mut f, q, t, dt).map_err(|msg| TimeError::Rhs { step: n, msg })?;
        t = if n == steps { t1 } else { t0 + n as f64 * opts.dt };
        last_dt = dt;
        let check = opts.nan_check_every > 0 && (n % opts.nan_check_every == 0 || n == steps);
        if check {
            if let Some(index) = q.iter().position(|v| !v.is_finite()) {
                return Err(TimeError::NonFinite { step: n, t, index });
            }
        }
        observer(n, t, q);
    }
    Ok(AdvanceStats { steps, last_dt })
}
