//! CSV traces, VTK legacy snapshots and plain-text run summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::dg::{DgOperator, FIELD_NAMES, NFIELDS};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("column `{name}` has {got} rows, expected {want}")]
    Ragged { name: String, got: usize, want: usize },
    #[error("CSV parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("VTK parse error at line {line}: {msg}")]
    Vtk { line: usize, msg: String },
}

pub fn write_file(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| file_err(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| file_err(path, e))
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File { path: path.display().to_string(), source }
}

/// CSV with a header row. Values use the shortest round-trip representation.
pub fn csv_table(columns: &[(&str, &[f64])]) -> Result<String, IoError> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    for (name, c) in columns {
        if c.len() != rows {
            return Err(IoError::Ragged { name: name.to_string(), got: c.len(), want: rows });
        }
    }
    let mut out = columns.iter().map(|c| c.0).collect::<Vec<_>>().join(",");
    out.push('\n');
    for i in 0..rows {
        for (j, (_, c)) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:?}", c[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(path: &Path, columns: &[(&str, &[f64])]) -> Result<(), IoError> {
    write_file(path, &csv_table(columns)?)
}

/// Header and columns of a CSV written by [`csv_table`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (n, line) in lines.enumerate() {
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != header.len() {
            return Err(IoError::Csv { line: n + 2, msg: format!("expected {} values", header.len()) });
        }
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v.parse().map_err(|_| IoError::Csv { line: n + 2, msg: format!("bad number `{v}`") })?);
        }
    }
    Ok((header, cols))
}

/// Nodal snapshot: every DG node is a point, every element a linear cell on its
/// three corner nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub points: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub fields: Vec<(String, Vec<f64>)>,
}

const SNAPSHOT_FIELDS: [usize; 5] = [crate::dg::V1, crate::dg::V3, crate::dg::S11, crate::dg::S33, crate::dg::S13];

impl Snapshot {
    pub fn from_state(op: &DgOperator, q: &[f64]) -> Snapshot {
        let np = op.np();
        let k_count = op.num_elements();
        let points = (0..k_count * np).map(|g| [op.mesh.x[g], op.mesh.z[g]]).collect();
        let n = op.re.n;
        // Warp-blend ordering puts the corners at 0, n and np - 1.
        let cells = (0..k_count).map(|k| [k * np, k * np + n, k * np + np - 1]).collect();
        let fields = SNAPSHOT_FIELDS
            .iter()
            .map(|&f| {
                let mut v = Vec::with_capacity(k_count * np);
                for k in 0..k_count {
                    let b = op.idx(k, f, 0);
                    v.extend_from_slice(&q[b..b + np]);
                }
                (FIELD_NAMES[f].to_string(), v)
            })
            .collect();
        Snapshot { points, cells, fields }
    }

    pub fn to_vtk(&self, title: &str) -> String {
        let mut s = String::new();
        s.push_str("# vtk DataFile Version 3.0\n");
        s.push_str(title.lines().next().unwrap_or(""));
        s.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{} {} 0", p[0], p[1]);
        }
        let _ = writeln!(s, "CELLS {} {}", self.cells.len(), 4 * self.cells.len());
        for c in &self.cells {
            let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {}", self.cells.len());
        for _ in &self.cells {
            s.push_str("5\n");
        }
        let _ = writeln!(s, "POINT_DATA {}", self.points.len());
        for (name, v) in &self.fields {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for x in v {
                let _ = writeln!(s, "{x}");
            }
        }
        s
    }

    pub fn parse_vtk(text: &str) -> Result<Snapshot, IoError> {
        let lines: Vec<&str> = text.lines().collect();
        let err = |line: usize, msg: &str| IoError::Vtk { line: line + 1, msg: msg.to_string() };
        let num = |line: usize, tok: &str| -> Result<f64, IoError> { tok.parse().map_err(|_| err(line, "bad number")) };
        let count = |line: usize, tok: Option<&str>| -> Result<usize, IoError> {
            tok.and_then(|t| t.parse().ok()).ok_or_else(|| err(line, "bad count"))
        };
        if lines.first().map_or(true, |l| !l.starts_with("# vtk DataFile")) {
            return Err(err(0, "missing VTK header"));
        }
        if lines.get(2).map(|l| l.trim()) != Some("ASCII") {
            return Err(err(2, "only ASCII files are supported"));
        }
        let mut i = 3;
        let mut snap = Snapshot { points: Vec::new(), cells: Vec::new(), fields: Vec::new() };
        while i < lines.len() {
            let mut tok = lines[i].split_whitespace();
            match tok.next() {
                Some("POINTS") => {
                    let n = count(i, tok.next())?;
                    for j in 0..n {
                        let l = i + 1 + j;
                        let t: Vec<&str> = lines.get(l).ok_or_else(|| err(l, "truncated"))?.split_whitespace().collect();
                        if t.len() != 3 {
                            return Err(err(l, "expected 3 coordinates"));
                        }
                        snap.points.push([num(l, t[0])?, num(l, t[1])?]);
                    }
                    i += n + 1;
                }
                Some("CELLS") => {
                    let n = count(i, tok.next())?;
                    for j in 0..n {
                        let l = i + 1 + j;
                        let t: Vec<usize> = lines
                            .get(l)
                            .ok_or_else(|| err(l, "truncated"))?
                            .split_whitespace()
                            .map(|x| x.parse().map_err(|_| err(l, "bad index")))
                            .collect::<Result<_, _>>()?;
                        if t.len() != 4 || t[0] != 3 {
                            return Err(err(l, "expected a triangle"));
                        }
                        snap.cells.push([t[1], t[2], t[3]]);
                    }
                    i += n + 1;
                }
                Some("CELL_TYPES") => i += count(i, tok.next())? + 1,
                Some("SCALARS") => {
                    let name = tok.next().ok_or_else(|| err(i, "missing name"))?.to_string();
                    let n = snap.points.len();
                    let mut v = Vec::with_capacity(n);
                    for j in 0..n {
                        let l = i + 2 + j;
                        v.push(num(l, lines.get(l).ok_or_else(|| err(l, "truncated"))?.trim())?);
                    }
                    snap.fields.push((name, v));
                    i += n + 2;
                }
                _ => i += 1,
            }
        }
        Ok(snap)
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|f| f.0 == name).map(|f| f.1.as_slice())
    }
}

pub fn write_snapshot(op: &DgOperator, q: &[f64], t: f64, path: &Path) -> Result<(), IoError> {
    write_file(path, &Snapshot::from_state(op, q).to_vtk(&format!("visco-dg snapshot t = {t}")))
}

/// Receiver traces: `t` then `r<i>_<field>` for every receiver and field.
pub fn trace_table(set: &crate::source::ReceiverSet) -> Result<String, IoError> {
    let mut names = Vec::new();
    let mut data = Vec::new();
    for r in 0..set.receivers.len() {
        for (f, name) in FIELD_NAMES.iter().enumerate().take(NFIELDS) {
            names.push(format!("r{r}_{name}"));
            data.push(set.series(r, f));
        }
    }
    let mut cols: Vec<(&str, &[f64])> = vec![("t", &set.times)];
    cols.extend(names.iter().map(String::as_str).zip(data.iter().map(Vec::as_slice)));
    csv_table(&cols)
}

/// `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn add(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    }
}
