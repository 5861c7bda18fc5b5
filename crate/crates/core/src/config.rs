//! `key = value` run configuration. Quantities carry unit suffixes and are
//! converted to SI while parsing; unknown or repeated keys are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dg::{BoundaryKind, Penalty, DEFAULT_Z_REF, FIELD_NAMES, S11, S13, S33, V1, V3};
use crate::materials::{MaterialSpec, RelaxationPair, Stiffness};
use crate::mesh::{Bounds, Marker};
use crate::refelem::MAX_ORDER;
use crate::source::{Wavelet, WaveletKind};
use crate::units::{parse_quantity, Dimension};
use crate::verify::greens::SpeedForm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is set more than once")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}`: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Read { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub wavelet: Wavelet,
    pub position: (f64, f64),
    pub amplitude: f64,
    pub targets: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialSpec,
    /// Material above `interface_z`, for two-layer models.
    pub layer: Option<(MaterialSpec, f64)>,
    /// Forces `tau_eps = tau_sig` in every material.
    pub elastic: bool,
    pub bounds: Bounds,
    pub nx: usize,
    pub nz: usize,
    pub mesh_file: Option<PathBuf>,
    pub order: usize,
    pub penalty: Penalty,
    pub cfl: f64,
    pub c_n: Option<f64>,
    pub t_final: f64,
    pub bc: BTreeMap<Marker, BoundaryKind>,
    pub bc_default: BoundaryKind,
    pub source: Option<SourceConfig>,
    pub receivers: Vec<(f64, f64)>,
    /// Steps between VTK snapshots, 0 disables them.
    pub snapshot_every: usize,
    pub sample_every: usize,
    /// Steps between energy samples, 0 disables them.
    pub energy_every: usize,
    pub nan_check_every: usize,
    pub seed: u64,
    pub speed_form: SpeedForm,
    pub conv_orders: Vec<usize>,
    pub conv_nx: Vec<usize>,
    /// Plane-wave vector in 1/m.
    pub wave_k: (f64, f64),
    pub alpha_sweep: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            material: MaterialSpec::preset("sandstone").expect("built-in preset"),
            layer: None,
            elastic: false,
            bounds: Bounds::new(-1000.0, 1000.0, -1000.0, 1000.0),
            nx: 16,
            nz: 16,
            mesh_file: None,
            order: 3,
            penalty: Penalty::uniform(0.5),
            cfl: 0.5,
            c_n: None,
            t_final: 0.3,
            bc: BTreeMap::new(),
            bc_default: BoundaryKind::Absorbing,
            source: None,
            receivers: Vec::new(),
            snapshot_every: 0,
            sample_every: 1,
            energy_every: 0,
            nan_check_every: 50,
            seed: 0,
            speed_form: SpeedForm::Consistent,
            conv_orders: vec![1, 2, 3],
            conv_nx: vec![4, 8, 16, 32],
            wave_k: (std::f64::consts::PI / 1000.0, std::f64::consts::PI / 1000.0),
            alpha_sweep: vec![0.0, 0.5, 1.0],
        }
    }
}

const KEYS: &[&str] = &[
    "material",
    "material_upper",
    "interface_z",
    "elastic",
    "x_min",
    "x_max",
    "z_min",
    "z_max",
    "nx",
    "nz",
    "mesh_file",
    "order",
    "alpha",
    "alpha_sigma",
    "alpha_v",
    "z_ref",
    "cfl",
    "c_n",
    "t_final",
    "bc",
    "bc_left",
    "bc_right",
    "bc_bottom",
    "bc_top",
    "source_kind",
    "source_f0",
    "source_t0",
    "source_x",
    "source_z",
    "source_amplitude",
    "source_targets",
    "receivers",
    "snapshot_every",
    "sample_every",
    "energy_every",
    "nan_check_every",
    "seed",
    "greens_speed_form",
    "convergence_orders",
    "convergence_nx",
    "wave_k1",
    "wave_k3",
    "alpha_sweep",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

fn entries(text: &str, known: &[&str]) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let e = Entry { line, key: k.trim(), value: v.trim() };
        if e.key.is_empty() || e.value.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !known.contains(&e.key) {
            return Err(ConfigError::UnknownKey { line, key: e.key.to_string() });
        }
        if out.insert(e.key.to_string(), (e.line, e.value.to_string())).is_some() {
            return Err(ConfigError::Duplicate { line, key: e.key.to_string() });
        }
    }
    Ok(out)
}

struct Reader {
    map: BTreeMap<String, (usize, String)>,
}

impl Reader {
    fn err(&self, key: &str, msg: impl ToString) -> ConfigError {
        let line = self.map.get(key).map_or(0, |e| e.0);
        ConfigError::Value { line, key: key.to_string(), msg: msg.to_string() }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.1.as_str())
    }

    fn quantity(&self, key: &str, dim: Dimension) -> Result<Option<f64>, ConfigError> {
        self.raw(key)
            .map(|v| parse_quantity(v, dim).map_err(|e| self.err(key, e)))
            .transpose()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| v.parse::<T>().map_err(|e| self.err(key, e))).transpose()
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.split(',').map(|x| x.trim().parse::<T>().map_err(|e| self.err(key, e))).collect())
            .transpose()
    }
}

fn bool_value(r: &Reader, key: &str) -> Result<Option<bool>, ConfigError> {
    match r.raw(key) {
        None => Ok(None),
        Some("true" | "yes" | "1") => Ok(Some(true)),
        Some("false" | "no" | "0") => Ok(Some(false)),
        Some(v) => Err(r.err(key, format!("expected true or false, got `{v}`"))),
    }
}

fn load_material(value: &str, base: Option<&Path>) -> Result<MaterialSpec, String> {
    if MaterialSpec::PRESETS.contains(&value) {
        return MaterialSpec::preset(value).map_err(|e| e.to_string());
    }
    let path = match base {
        Some(b) if Path::new(value).is_relative() => b.join(value),
        _ => PathBuf::from(value),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        format!("`{value}` is neither a preset ({}) nor a readable file: {e}", MaterialSpec::PRESETS.join(", "))
    })?;
    parse_material(&text, &path.display().to_string()).map_err(|e| e.to_string())
}

const MATERIAL_KEYS: &[&str] = &[
    "name", "rho", "c11", "c12", "c13", "c22", "c23", "c33", "c44", "c55", "c66", "tau_eps1", "tau_sig1", "tau_eps2",
    "tau_sig2", "tau_eps3", "tau_sig3", "tau_eps4", "tau_sig4",
];

/// Orthotropic material file: `rho`, `c11` .. `c66` and `tau_eps1` .. `tau_sig4`.
pub fn parse_material(text: &str, default_name: &str) -> Result<MaterialSpec, ConfigError> {
    let r = Reader { map: entries(text, MATERIAL_KEYS)? };
    let need = |key: &str, dim| r.quantity(key, dim)?.ok_or_else(|| ConfigError::Invalid(format!("missing `{key}`")));
    let mut c = [0.0; 9];
    for (slot, key) in c.iter_mut().zip(["c11", "c12", "c13", "c22", "c23", "c33", "c44", "c55", "c66"]) {
        *slot = need(key, Dimension::Pressure)?;
    }
    let rho = need("rho", Dimension::Density)?;
    let mut modes = [RelaxationPair::new(1.0, 1.0); 4];
    for (nu, m) in modes.iter_mut().enumerate() {
        let te = need(&format!("tau_eps{}", nu + 1), Dimension::Time)?;
        let ts = need(&format!("tau_sig{}", nu + 1), Dimension::Time)?;
        *m = RelaxationPair::new(te, ts);
    }
    let stiffness = Stiffness::orthotropic(c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8]);
    let name = r.raw("name").unwrap_or(default_name);
    MaterialSpec::new(name, stiffness, rho, modes).map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn parse_targets(r: &Reader, key: &str) -> Result<Option<Vec<(usize, f64)>>, ConfigError> {
    let Some(v) = r.raw(key) else { return Ok(None) };
    let mut out = Vec::new();
    for part in v.split(',') {
        let (name, w) = match part.split_once(':') {
            Some((n, w)) => (n.trim(), w.trim().parse::<f64>().map_err(|e| r.err(key, e))?),
            None => (part.trim(), 1.0),
        };
        let f = FIELD_NAMES
            .iter()
            .position(|&n| n == name)
            .filter(|f| [S11, S33, S13, V1, V3].contains(f))
            .ok_or_else(|| r.err(key, format!("`{name}` is not one of s11, s33, s13, v1, v3")))?;
        out.push((f, w));
    }
    Ok(Some(out))
}

/// `x z; x z; ..` with length units on every coordinate.
fn parse_points(r: &Reader, key: &str) -> Result<Option<Vec<(f64, f64)>>, ConfigError> {
    let Some(v) = r.raw(key) else { return Ok(None) };
    let mut out = Vec::new();
    for p in v.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = p.split_once(',').ok_or_else(|| r.err(key, format!("`{p}` is not `x, z`")))?;
        let x = parse_quantity(a, Dimension::Length).map_err(|e| r.err(key, e))?;
        let z = parse_quantity(b, Dimension::Length).map_err(|e| r.err(key, e))?;
        out.push((x, z));
    }
    Ok(Some(out))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_in(text, None)
}

/// Reads a config file; relative material and mesh paths resolve against its directory.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: path.display().to_string(), msg: e.to_string() })?;
    parse_config_in(&text, path.parent())
}

fn parse_config_in(text: &str, base: Option<&Path>) -> Result<RunConfig, ConfigError> {
    use Dimension::*;
    let r = Reader { map: entries(text, KEYS)? };
    let mut c = RunConfig::default();

    if let Some(v) = r.raw("material") {
        c.material = load_material(v, base).map_err(|e| r.err("material", e))?;
    }
    let upper = r.raw("material_upper").map(|v| load_material(v, base).map_err(|e| r.err("material_upper", e)));
    match (upper.transpose()?, r.quantity("interface_z", Length)?) {
        (Some(m), Some(z)) => c.layer = Some((m, z)),
        (None, None) => {}
        _ => return Err(ConfigError::Invalid("`material_upper` and `interface_z` must be given together".into())),
    }
    c.elastic = bool_value(&r, "elastic")?.unwrap_or(false);
    let b = c.bounds;
    c.bounds = Bounds::new(
        r.quantity("x_min", Length)?.unwrap_or(b.x0),
        r.quantity("x_max", Length)?.unwrap_or(b.x1),
        r.quantity("z_min", Length)?.unwrap_or(b.z0),
        r.quantity("z_max", Length)?.unwrap_or(b.z1),
    );
    c.nx = r.parse("nx")?.unwrap_or(c.nx);
    c.nz = r.parse("nz")?.unwrap_or(c.nx);
    c.mesh_file = r.raw("mesh_file").map(|p| match base {
        Some(b) if Path::new(p).is_relative() => b.join(p),
        _ => PathBuf::from(p),
    });
    c.order = r.parse("order")?.unwrap_or(c.order);

    let alpha = r.quantity("alpha", Dimensionless)?.unwrap_or(0.5);
    c.penalty = Penalty {
        alpha_sigma: r.quantity("alpha_sigma", Dimensionless)?.unwrap_or(alpha),
        alpha_v: r.quantity("alpha_v", Dimensionless)?.unwrap_or(alpha),
        z_ref: r.quantity("z_ref", Impedance)?.unwrap_or(DEFAULT_Z_REF),
    };
    c.cfl = r.quantity("cfl", Dimensionless)?.unwrap_or(c.cfl);
    c.c_n = r.quantity("c_n", Dimensionless)?;
    c.t_final = r.quantity("t_final", Time)?.unwrap_or(c.t_final);

    c.bc_default = r.parse("bc")?.unwrap_or(c.bc_default);
    for (key, m) in [("bc_left", Marker::LEFT), ("bc_right", Marker::RIGHT), ("bc_bottom", Marker::BOTTOM), ("bc_top", Marker::TOP)] {
        if let Some(kind) = r.parse::<BoundaryKind>(key)? {
            c.bc.insert(m, kind);
        }
    }

    let source_keys = ["source_kind", "source_f0", "source_t0", "source_x", "source_z", "source_amplitude", "source_targets"];
    if source_keys.iter().any(|k| r.raw(k).is_some()) {
        let kind = r.parse::<WaveletKind>("source_kind")?.unwrap_or(WaveletKind::Ricker);
        let f0 = r
            .quantity("source_f0", Frequency)?
            .ok_or_else(|| ConfigError::Invalid("a source needs `source_f0`".into()))?;
        let t0 = r.quantity("source_t0", Time)?.unwrap_or(1.2 / f0);
        let wavelet = Wavelet::new(kind, f0, t0).map_err(|e| r.err("source_f0", e))?;
        let position = (r.quantity("source_x", Length)?.unwrap_or(0.0), r.quantity("source_z", Length)?.unwrap_or(0.0));
        let amplitude = r.quantity("source_amplitude", Force)?.unwrap_or(1.0);
        let targets = parse_targets(&r, "source_targets")?.unwrap_or_else(|| vec![(V3, 1.0)]);
        c.source = Some(SourceConfig { wavelet, position, amplitude, targets });
    }
    c.receivers = parse_points(&r, "receivers")?.unwrap_or_default();
    c.snapshot_every = r.parse("snapshot_every")?.unwrap_or(0);
    c.sample_every = r.parse("sample_every")?.unwrap_or(1);
    c.energy_every = r.parse("energy_every")?.unwrap_or(0);
    c.nan_check_every = r.parse("nan_check_every")?.unwrap_or(c.nan_check_every);
    c.seed = r.parse("seed")?.unwrap_or(0);
    c.speed_form = r.parse("greens_speed_form")?.unwrap_or(c.speed_form);
    c.conv_orders = r.list("convergence_orders")?.unwrap_or(c.conv_orders);
    c.conv_nx = r.list("convergence_nx")?.unwrap_or(c.conv_nx);
    c.wave_k = (
        r.quantity("wave_k1", Dimensionless)?.unwrap_or(c.wave_k.0),
        r.quantity("wave_k3", Dimensionless)?.unwrap_or(c.wave_k.1),
    );
    c.alpha_sweep = r.list("alpha_sweep")?.unwrap_or(c.alpha_sweep);

    validate(&c, &r)?;
    Ok(c)
}

fn validate(c: &RunConfig, r: &Reader) -> Result<(), ConfigError> {
    let b = &c.bounds;
    if !(b.x1 > b.x0 && b.z1 > b.z0) {
        return Err(ConfigError::Invalid(format!("empty domain [{}, {}] x [{}, {}]", b.x0, b.x1, b.z0, b.z1)));
    }
    if c.nx == 0 || c.nz == 0 {
        return Err(r.err(if c.nx == 0 { "nx" } else { "nz" }, "must be at least 1"));
    }
    if !(1..=MAX_ORDER).contains(&c.order) {
        return Err(r.err("order", format!("must be in 1..={MAX_ORDER}")));
    }
    for (key, v) in [("alpha_sigma", c.penalty.alpha_sigma), ("alpha_v", c.penalty.alpha_v)] {
        if !(v >= 0.0 && v.is_finite()) {
            let key = if r.raw(key).is_some() { key } else { "alpha" };
            return Err(r.err(key, "must be non-negative"));
        }
    }
    if !(c.penalty.z_ref > 0.0) {
        return Err(r.err("z_ref", "must be positive"));
    }
    if !(c.cfl > 0.0 && c.cfl <= 10.0) {
        return Err(r.err("cfl", "must be in (0, 10]"));
    }
    if c.c_n.is_some_and(|v| !(v > 0.0)) {
        return Err(r.err("c_n", "must be positive"));
    }
    if !(c.t_final > 0.0 && c.t_final.is_finite()) {
        return Err(r.err("t_final", "must be positive"));
    }
    if c.sample_every == 0 {
        return Err(r.err("sample_every", "must be at least 1"));
    }
    if c.mesh_file.is_none() {
        let inside = |&(x, z): &(f64, f64)| x >= b.x0 && x <= b.x1 && z >= b.z0 && z <= b.z1;
        if let Some(p) = c.receivers.iter().find(|p| !inside(p)) {
            return Err(r.err("receivers", format!("({}, {}) lies outside the domain", p.0, p.1)));
        }
        if let Some(s) = c.source.as_ref().filter(|s| !inside(&s.position)) {
            return Err(r.err("source_x", format!("({}, {}) lies outside the domain", s.position.0, s.position.1)));
        }
    }
    if c.conv_orders.is_empty() || c.conv_orders.iter().any(|n| !(1..=MAX_ORDER).contains(n)) {
        return Err(r.err("convergence_orders", format!("orders must be in 1..={MAX_ORDER}")));
    }
    let distinct: BTreeSet<_> = c.conv_nx.iter().collect();
    if distinct.len() < 2 || c.conv_nx.contains(&0) {
        return Err(r.err("convergence_nx", "needs at least two distinct positive sizes"));
    }
    if c.wave_k.0 == 0.0 && c.wave_k.1 == 0.0 {
        return Err(r.err("wave_k1", "wave vector must be non-zero"));
    }
    if c.alpha_sweep.is_empty() || c.alpha_sweep.iter().any(|a| !(*a >= 0.0)) {
        return Err(r.err("alpha_sweep", "values must be non-negative"));
    }
    Ok(())
}

impl RunConfig {
    /// Material list indexed by mesh material id, with the elastic switch applied.
    pub fn materials(&self) -> Vec<MaterialSpec> {
        let mut v = vec![self.material.clone()];
        if let Some((m, _)) = &self.layer {
            v.push(m.clone());
        }
        if self.elastic {
            v.iter_mut().for_each(|m| *m = m.elastic_limit());
        }
        v
    }

    pub fn boundary_kind(&self, m: Marker) -> BoundaryKind {
        self.bc.get(&m).copied().unwrap_or(self.bc_default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        let c = parse_config("# nothing\n\n").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.penalty.alpha_sigma, 0.5);
        assert_eq!(c.cfl, 0.5);
    }

    #[test]
    fn units_are_normalised() {
        let c = parse_config(
            "x_min = -0.5 km\nx_max = 500 m\nz_min = -50000 cm\nz_max = 0.5 km\nt_final = 300 ms\n\
             source_kind = gauss_cosine\nsource_f0 = 45 Hz\nsource_t0 = 50 ms\nsource_amplitude = 2 kN\n\
             source_targets = v3:1, s11:0.5\nreceivers = 250 m, 250 m; -0.25 km, 250 m\n",
        )
        .unwrap();
        assert_eq!(c.bounds, Bounds::new(-500.0, 500.0, -500.0, 500.0));
        assert!((c.t_final - 0.3).abs() < 1e-15);
        let s = c.source.unwrap();
        assert_eq!(s.wavelet.kind, WaveletKind::GaussCosine);
        assert_eq!(s.amplitude, 2000.0);
        assert_eq!(s.targets, vec![(V3, 1.0), (S11, 0.5)]);
        assert_eq!(c.receivers, vec![(250.0, 250.0), (-250.0, 250.0)]);
    }

    #[test]
    fn unknown_and_repeated_keys_fail_closed() {
        assert_eq!(
            parse_config("order = 3\nspeed = 4\n"),
            Err(ConfigError::UnknownKey { line: 2, key: "speed".into() })
        );
        assert_eq!(
            parse_config("order = 3\n\norder = 2\n"),
            Err(ConfigError::Duplicate { line: 3, key: "order".into() })
        );
        assert_eq!(parse_config("order 3\n"), Err(ConfigError::Syntax { line: 1 }));
    }

    #[test]
    fn bad_values_report_their_line() {
        match parse_config("nx = 4\nt_final = 2\n") {
            Err(ConfigError::Value { line: 2, key, .. }) => assert_eq!(key, "t_final"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("order = 9"), Err(ConfigError::Value { line: 1, .. })));
        assert!(matches!(parse_config("alpha = -1"), Err(ConfigError::Value { line: 1, .. })));
        assert!(matches!(parse_config("cfl = 0"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse_config("receivers = 5 km, 0 m"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse_config("source_f0 = 10 Hz\nsource_targets = y1"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse_config("material = granite"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse_config("interface_z = 0 m"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn boundary_overrides() {
        let c = parse_config("bc = free_surface\nbc_top = absorbing\n").unwrap();
        assert_eq!(c.boundary_kind(Marker::TOP), BoundaryKind::Absorbing);
        assert_eq!(c.boundary_kind(Marker::LEFT), BoundaryKind::FreeSurface);
    }

    #[test]
    fn material_file_round_trip() {
        let text = "rho = 2500 kg/m3\nc11 = 25.6 GPa\nc12 = 9.4 GPa\nc13 = 9.4 GPa\nc22 = 25.6 GPa\n\
                    c23 = 9.4 GPa\nc33 = 25.6 GPa\nc44 = 16.2 GPa\nc55 = 16.2 GPa\nc66 = 16.2 GPa\n\
                    tau_eps1 = 3.72 ms\ntau_sig1 = 3.36 ms\ntau_eps2 = 3.78 ms\ntau_sig2 = 3.30 ms\n\
                    tau_eps3 = 3.78 ms\ntau_sig3 = 3.30 ms\ntau_eps4 = 3.78 ms\ntau_sig4 = 3.30 ms\n";
        let m = parse_material(text, "custom").unwrap();
        let s = MaterialSpec::preset("sandstone").unwrap();
        assert_eq!(m.stiffness, s.stiffness);
        assert_eq!(m.rho, s.rho);
        assert!(parse_material("rho = 1 kg/m3", "x").is_err());
    }

    #[test]
    fn elastic_switch_applies_to_all_layers() {
        let c = parse_config("elastic = true\nmaterial_upper = clay_shale\ninterface_z = 0 m\n").unwrap();
        assert!(c.materials().iter().all(MaterialSpec::is_elastic));
        assert_eq!(c.materials().len(), 2);
    }
}
