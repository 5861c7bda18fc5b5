//! The four command-line workflows: simulate, convergence, spectrum and
//! greens-compare. Each returns its results and optionally writes them to disk.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::dg::{BoundaryConditions, BoundaryKind, DgError, DgOperator, Penalty, V1, V3};
use crate::io::{self, IoError, Summary};
use crate::materials::{derive_visco_coefficients, MaterialError, MaterialSpec, ViscoCoefficients};
use crate::mesh::{DgMesh, Mesh, MeshError};
use crate::refelem::{RefElemError, ReferenceElement};
use crate::source::{PointSource, ReceiverSet, SourceError, WaveletKind};
use crate::timeint::{advance, estimate_dt, relaxation_step_limit, AdvanceOptions, TimeError};
use crate::verify::greens::{greens_trace_at, GreensError};
use crate::verify::plane_wave::{plane_wave_modes, PlaneWaveError};
use crate::verify::spectrum::{operator_spectrum, SpectrumError};

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    RefElem(#[from] RefElemError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error(transparent)]
    PlaneWave(#[from] PlaneWaveError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Setup(String),
}

impl WorkflowError {
    /// The run started but the numerics failed (blow-up, eigen-solver failure).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            WorkflowError::Time(TimeError::NonFinite { .. } | TimeError::Rhs { .. })
                | WorkflowError::Dg(DgError::NonFinite { .. })
                | WorkflowError::Spectrum(SpectrumError::Lapack(_))
                | WorkflowError::PlaneWave(PlaneWaveError::NoConvergence)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, WorkflowError::Io(IoError::File { .. }))
    }
}

/// Operator plus the per-material coefficients it was built from.
pub struct Setup {
    pub op: DgOperator,
    pub specs: Vec<MaterialSpec>,
    pub coeffs: Vec<ViscoCoefficients>,
}

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh, WorkflowError> {
    let mut mesh = match &cfg.mesh_file {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| IoError::File { path: p.display().to_string(), source: e })?;
            Mesh::parse(&text)?
        }
        None => Mesh::uniform(cfg.nx, cfg.nz, cfg.bounds)?,
    };
    if let Some((_, z)) = cfg.layer {
        mesh.assign_layers(z, 0, 1);
    }
    Ok(mesh)
}

pub fn boundary_conditions(cfg: &RunConfig, mesh: &Mesh) -> BoundaryConditions {
    mesh.boundary.iter().map(|&(_, _, m)| (m, cfg.boundary_kind(m))).collect()
}

pub fn build(cfg: &RunConfig) -> Result<Setup, WorkflowError> {
    build_with(cfg, cfg.order, build_mesh(cfg)?, cfg.penalty)
}

fn build_with(cfg: &RunConfig, order: usize, mesh: Mesh, penalty: Penalty) -> Result<Setup, WorkflowError> {
    let specs = cfg.materials();
    let coeffs = specs.iter().map(derive_visco_coefficients).collect::<Result<Vec<_>, _>>()?;
    let bc = boundary_conditions(cfg, &mesh);
    let re = ReferenceElement::new(order)?;
    let dg_mesh = DgMesh::new(mesh, &re)?;
    let op = DgOperator::new(re, dg_mesh, coeffs.clone(), penalty, bc)?;
    Ok(Setup { op, specs, coeffs })
}

/// CFL step, further capped so the stiffest relaxation mode stays inside the
/// stability region.
pub fn time_step(op: &DgOperator, coeffs: &[ViscoCoefficients], cfl: f64, c_n: Option<f64>) -> Result<f64, TimeError> {
    let speeds: Vec<f64> = coeffs.iter().map(ViscoCoefficients::lambda_max).collect();
    let dt = estimate_dt(&op.mesh, &speeds, op.re.n, cfl, c_n)?;
    Ok(coeffs.iter().map(|c| relaxation_step_limit(c.max_relaxation_rate())).fold(dt, f64::min))
}

/// Uniform random nodal data scaled so stress, memory and velocity carry
/// comparable energy.
pub fn random_state(op: &DgOperator, seed: u64) -> Vec<f64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut q = op.zero_state();
    let np = op.np();
    for k in 0..op.num_elements() {
        let m = &op.materials[op.mesh.mesh.material[k]];
        let c = m.c[(0, 0)];
        let s = 1e6;
        let scale = [s, s, s, s / c.sqrt(), s / c.sqrt(), s / c.sqrt(), s / (c * m.rho).sqrt(), s / (c * m.rho).sqrt()];
        for (f, sc) in scale.iter().enumerate() {
            for i in 0..np {
                q[op.idx(k, f, i)] = sc * rng.gen_range(-1.0..1.0);
            }
        }
    }
    q
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub dt: f64,
    pub steps: usize,
    pub receivers: ReceiverSet,
    /// `(t, E)` every `energy_every` steps.
    pub energy: Vec<(f64, f64)>,
    pub state: Vec<f64>,
    pub summary: Summary,
}

/// Runs from `q0` (zero when `None`) to `t_final`.
pub fn simulate(cfg: &RunConfig, q0: Option<Vec<f64>>, out: Option<&Path>) -> Result<SimulationResult, WorkflowError> {
    let setup = build(cfg)?;
    run_setup(cfg, &setup, q0, out)
}

pub fn run_setup(
    cfg: &RunConfig,
    setup: &Setup,
    q0: Option<Vec<f64>>,
    out: Option<&Path>,
) -> Result<SimulationResult, WorkflowError> {
    let op = &setup.op;
    if op.has_prescribed() {
        return Err(WorkflowError::Setup("prescribed boundaries need an exterior solution; use `convergence`".into()));
    }
    let source = cfg
        .source
        .as_ref()
        .map(|s| PointSource::new(op, s.wavelet, s.amplitude, s.position, s.targets.clone()))
        .transpose()?;
    let mut receivers = ReceiverSet::new(op, &cfg.receivers)?;
    let dt = time_step(op, &setup.coeffs, cfg.cfl, cfg.c_n)?;
    let mut q = match q0 {
        Some(q) if q.len() == op.state_len() => q,
        Some(q) => return Err(DgError::Shape { got: q.len(), expected: op.state_len() }.into()),
        None => op.zero_state(),
    };
    let mut energy = Vec::new();
    let mut snapshot_err = None;
    let started = std::time::Instant::now();
    let mut opts = AdvanceOptions::new(dt);
    opts.nan_check_every = cfg.nan_check_every;
    let steps_total = crate::timeint::step_count(0.0, cfg.t_final, dt);
    let stats = advance(
        |q, t, dq| {
            op.rhs(q, t, dq).map_err(|e| e.to_string())?;
            if let Some(s) = &source {
                s.add_to(op, dq, t);
            }
            Ok(())
        },
        &mut q,
        0.0,
        cfg.t_final,
        opts,
        |n, t, q| {
            let last = n == steps_total;
            if n % cfg.sample_every == 0 || last {
                receivers.record(op, q, t);
            }
            if cfg.energy_every > 0 && (n % cfg.energy_every == 0 || last) {
                energy.push((t, op.energy(q)));
            }
            if let (Some(dir), true) = (out, cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0) {
                if let Err(e) = io::write_snapshot(op, q, t, &dir.join(format!("snapshot_{n:06}.vtk"))) {
                    snapshot_err.get_or_insert(e);
                }
            }
        },
    )?;
    if let Some(e) = snapshot_err {
        return Err(e.into());
    }
    op.check_finite(&q)?;

    let mut summary = Summary::default();
    summary.add("workflow", "simulate");
    summary.add("material", setup.specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", "));
    summary.add("elastic", cfg.elastic);
    summary.add("order", op.re.n);
    summary.add("elements", op.num_elements());
    summary.add("alpha_sigma", op.penalty.alpha_sigma);
    summary.add("alpha_v", op.penalty.alpha_v);
    summary.add("dt", dt);
    summary.add("steps", stats.steps);
    summary.add("t_final", cfg.t_final);
    summary.add("final_energy", op.energy(&q));
    summary.add("wall_seconds", started.elapsed().as_secs_f64());
    if let Some(dir) = out {
        io::write_file(&dir.join("traces.csv"), &io::trace_table(&receivers)?)?;
        if !energy.is_empty() {
            let (t, e): (Vec<f64>, Vec<f64>) = energy.iter().copied().unzip();
            io::write_csv(&dir.join("energy.csv"), &[("t", &t), ("energy", &e)])?;
        }
        io::write_snapshot(op, &q, cfg.t_final, &dir.join("final.vtk"))?;
        io::write_file(&dir.join("summary.txt"), &summary.render())?;
    }
    Ok(SimulationResult { dt, steps: stats.steps, receivers, energy, state: q, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub nx: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub error: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(error)` against `log(h)` per order.
    pub slopes: Vec<(usize, f64)>,
    pub summary: Summary,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Plane-wave refinement study. The exact solution drives every boundary and
/// the error is measured at `t_final` over all fields.
pub fn convergence(cfg: &RunConfig, out: Option<&Path>) -> Result<ConvergenceReport, WorkflowError> {
    if cfg.layer.is_some() || cfg.mesh_file.is_some() {
        return Err(WorkflowError::Setup("convergence runs on a uniform single-material mesh".into()));
    }
    let mut cfg = cfg.clone();
    cfg.bc.clear();
    cfg.bc_default = BoundaryKind::Prescribed;
    let coeffs = derive_visco_coefficients(&cfg.materials()[0])?;
    let sol = Arc::new(plane_wave_modes(&coeffs, cfg.wave_k)?);
    let mut rows = Vec::new();
    for &order in &cfg.conv_orders {
        for &nx in &cfg.conv_nx {
            let nz = ((nx as f64) * (cfg.bounds.z1 - cfg.bounds.z0) / (cfg.bounds.x1 - cfg.bounds.x0)).round().max(1.0) as usize;
            let mesh = Mesh::uniform(nx, nz, cfg.bounds)?;
            let mut setup = build_with(&cfg, order, mesh, cfg.penalty)?;
            setup.op = setup.op.with_exterior(sol.clone());
            let op = &setup.op;
            let mut q = op.interpolate(|x, z| sol.field(x, z, 0.0));
            let dt = time_step(op, &setup.coeffs, cfg.cfl, cfg.c_n)?;
            let mut opts = AdvanceOptions::new(dt);
            opts.nan_check_every = cfg.nan_check_every;
            let stats = advance(|q, t, dq| op.rhs(q, t, dq).map_err(|e| e.to_string()), &mut q, 0.0, cfg.t_final, opts, |_, _, _| {})?;
            let t = cfg.t_final;
            let (error, norm) = op.l2_error(&q, |x, z| sol.field(x, z, t), 2 * order + 2);
            let h = (cfg.bounds.x1 - cfg.bounds.x0) / nx as f64;
            rows.push(ConvergenceRow { order, nx, h, dt, steps: stats.steps, error, relative_error: error / norm });
        }
    }
    let slopes: Vec<(usize, f64)> = cfg
        .conv_orders
        .iter()
        .map(|&n| {
            let r: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.order == n).collect();
            let h: Vec<f64> = r.iter().map(|r| r.h).collect();
            let e: Vec<f64> = r.iter().map(|r| r.relative_error).collect();
            (n, loglog_slope(&h, &e))
        })
        .collect();
    let mut summary = Summary::default();
    summary.add("workflow", "convergence");
    summary.add("material", &cfg.material.name);
    summary.add("wave_k", format!("{} {}", cfg.wave_k.0, cfg.wave_k.1));
    summary.add("omega_p", sol.modes[0].omega);
    summary.add("omega_s", sol.modes[1].omega);
    for (n, s) in &slopes {
        summary.add(&format!("slope_n{n}"), format!("{s:.4}"));
        let e: Vec<f64> = rows.iter().filter(|r| r.order == *n).map(|r| r.relative_error).collect();
        if e.windows(2).any(|w| w[1] >= w[0]) {
            summary.add(&format!("warning_n{n}"), "error does not decrease monotonically under refinement");
        }
    }
    if let Some(dir) = out {
        let col = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        let (o, nx, h, dt, st, e, re) = (
            col(|r| r.order as f64),
            col(|r| r.nx as f64),
            col(|r| r.h),
            col(|r| r.dt),
            col(|r| r.steps as f64),
            col(|r| r.error),
            col(|r| r.relative_error),
        );
        io::write_csv(
            &dir.join("convergence.csv"),
            &[("order", &o), ("nx", &nx), ("h", &h), ("dt", &dt), ("steps", &st), ("error", &e), ("relative_error", &re)],
        )?;
        io::write_file(&dir.join("summary.txt"), &summary.render())?;
    }
    Ok(ConvergenceReport { rows, slopes, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub alpha: f64,
    pub max_real: f64,
    pub spectral_radius: f64,
    pub max_imag: f64,
}

/// Dense spectrum of the semi-discrete operator for every `alpha` in the sweep.
pub fn spectrum(cfg: &RunConfig, out: Option<&Path>) -> Result<(Vec<SpectrumRow>, Summary), WorkflowError> {
    let mut rows = Vec::new();
    for &alpha in &cfg.alpha_sweep {
        let penalty = Penalty { alpha_sigma: alpha, alpha_v: alpha, z_ref: cfg.penalty.z_ref };
        let setup = build_with(cfg, cfg.order, build_mesh(cfg)?, penalty)?;
        let s = operator_spectrum(&setup.op)?;
        if let Some(dir) = out {
            let re: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
            let im: Vec<f64> = s.eigenvalues.iter().map(|z| z.im).collect();
            io::write_csv(&dir.join(format!("eigenvalues_alpha_{alpha}.csv")), &[("re", &re), ("im", &im)])?;
        }
        rows.push(SpectrumRow { alpha, max_real: s.max_real, spectral_radius: s.spectral_radius, max_imag: s.max_imag });
    }
    let mut summary = Summary::default();
    summary.add("workflow", "spectrum");
    summary.add("material", &cfg.material.name);
    for r in &rows {
        summary.add(
            &format!("alpha_{}", r.alpha),
            format!("max_re {:e} radius {} max_im {}", r.max_real, r.spectral_radius, r.max_imag),
        );
    }
    if let Some(dir) = out {
        let col = |f: fn(&SpectrumRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        let (a, m, r, i) = (col(|r| r.alpha), col(|r| r.max_real), col(|r| r.spectral_radius), col(|r| r.max_imag));
        io::write_csv(&dir.join("spectrum.csv"), &[("alpha", &a), ("max_real", &m), ("spectral_radius", &r), ("max_imag", &i)])?;
        io::write_file(&dir.join("summary.txt"), &summary.render())?;
    }
    Ok((rows, summary))
}

#[derive(Debug, Clone)]
pub struct GreensComparison {
    pub t: Vec<f64>,
    /// Solver `[v1, v3]` at the first receiver.
    pub numeric: [Vec<f64>; 2],
    pub analytic: [Vec<f64>; 2],
    /// Relative L2 misfit of `v1` and `v3`.
    pub misfit: [f64; 2],
    pub parseval_error: f64,
    pub summary: Summary,
}

pub fn relative_misfit(a: &[f64], reference: &[f64]) -> f64 {
    let e: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum();
    let n: f64 = reference.iter().map(|y| y * y).sum();
    (e / n).sqrt()
}

/// Solver run against the frequency-domain Green's function at the first receiver.
pub fn greens_compare(cfg: &RunConfig, out: Option<&Path>) -> Result<GreensComparison, WorkflowError> {
    let src = cfg.source.as_ref().ok_or_else(|| WorkflowError::Setup("greens-compare needs a source".into()))?;
    if src.wavelet.kind != WaveletKind::GaussCosine {
        return Err(WorkflowError::Setup("greens-compare needs `source_kind = gauss_cosine`".into()));
    }
    let weight = match src.targets.as_slice() {
        [(f, w)] if *f == V3 => *w,
        _ => return Err(WorkflowError::Setup("greens-compare needs a single vertical force, `source_targets = v3`".into())),
    };
    if cfg.layer.is_some() {
        return Err(WorkflowError::Setup("greens-compare needs a homogeneous medium".into()));
    }
    let &(rx, rz) = cfg.receivers.first().ok_or_else(|| WorkflowError::Setup("greens-compare needs a receiver".into()))?;
    let sim = simulate(cfg, None, None)?;
    let spec = &cfg.materials()[0];
    let t = sim.receivers.times.clone();
    let g = greens_trace_at(
        spec,
        rx - src.position.0,
        rz - src.position.1,
        &src.wavelet,
        src.amplitude * weight,
        cfg.t_final,
        &t,
        cfg.speed_form,
    )?;
    let numeric = [sim.receivers.series(0, V1), sim.receivers.series(0, V3)];
    let misfit = [relative_misfit(&numeric[0], &g.v1), relative_misfit(&numeric[1], &g.v3)];
    let mut summary = sim.summary.clone();
    summary.entries[0].1 = "greens-compare".into();
    summary.add("speed_form", format!("{:?}", cfg.speed_form).to_lowercase());
    summary.add("misfit_v1", misfit[0]);
    summary.add("misfit_v3", misfit[1]);
    summary.add("parseval_error", g.parseval_error);
    if let Some(dir) = out {
        io::write_csv(
            &dir.join("greens_compare.csv"),
            &[("t", &t), ("v1_dg", &numeric[0]), ("v3_dg", &numeric[1]), ("v1_analytic", &g.v1), ("v3_analytic", &g.v3)],
        )?;
        io::write_file(&dir.join("summary.txt"), &summary.render())?;
    }
    Ok(GreensComparison { t, numeric, analytic: [g.v1, g.v3], misfit, parseval_error: g.parseval_error, summary })
}

/// Largest `|v|` sample and its time.
pub fn peak(t: &[f64], v: &[f64]) -> (f64, f64) {
    let i = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
    (v.get(i).map_or(0.0, |x| x.abs()), t.get(i).copied().unwrap_or(0.0))
}

