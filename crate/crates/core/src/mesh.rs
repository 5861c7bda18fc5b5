//! Conforming triangular meshes, face connectivity and affine geometric factors.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::refelem::{ReferenceElement, FACE_LENGTH};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("degenerate mesh parameters: {0}")]
    Degenerate(String),
    #[error("element {element} has non-positive Jacobian {j:e}")]
    Inverted { element: usize, j: f64 },
    #[error("edge ({0}, {1}) is shared by more than two elements")]
    OverShared(usize, usize),
    #[error("boundary edge ({0}, {1}) of element {2} carries no boundary marker")]
    Unmarked(usize, usize, usize),
    #[error("face nodes of element {0} face {1} do not match their neighbour")]
    Mismatch(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex index {0} out of range")]
    VertexIndex(usize),
}

/// Boundary tag attached to a mesh edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marker(pub u32);

impl Marker {
    pub const LEFT: Marker = Marker(1);
    pub const RIGHT: Marker = Marker(2);
    pub const BOTTOM: Marker = Marker(3);
    pub const TOP: Marker = Marker(4);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl Bounds {
    pub fn new(x0: f64, x1: f64, z0: f64, z1: f64) -> Self {
        Bounds { x0, x1, z0, z1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.z1 - self.z0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub elements: Vec<[usize; 3]>,
    pub material: Vec<usize>,
    pub boundary: Vec<(usize, usize, Marker)>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Local vertices of face `f`: faces are `(v0,v1)`, `(v1,v2)`, `(v2,v0)`.
pub fn face_vertices(tri: &[usize; 3], f: usize) -> (usize, usize) {
    (tri[f], tri[(f + 1) % 3])
}

impl Mesh {
    /// `2 nx nz` triangles from bisecting a uniform quad grid along its diagonals.
    /// The right-angle corner is vertex 0, so the diagonal is reference face 1.
    pub fn uniform(nx: usize, nz: usize, b: Bounds) -> Result<Mesh, MeshError> {
        if nx == 0 || nz == 0 {
            return Err(MeshError::Degenerate(format!("nx = {nx}, nz = {nz}")));
        }
        if !(b.x1 > b.x0 && b.z1 > b.z0) {
            return Err(MeshError::Degenerate(format!("bounds {b:?}")));
        }
        let xs: Vec<f64> = (0..=nx).map(|i| b.x0 + (b.x1 - b.x0) * i as f64 / nx as f64).collect();
        let zs: Vec<f64> = (0..=nz).map(|j| b.z0 + (b.z1 - b.z0) * j as f64 / nz as f64).collect();
        Mesh::tensor(&xs, &zs)
    }

    /// Bisected quad grid on strictly increasing grid lines `xs` and `zs`.
    pub fn tensor(xs: &[f64], zs: &[f64]) -> Result<Mesh, MeshError> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| x.is_finite());
        if !increasing(xs) || !increasing(zs) {
            return Err(MeshError::Degenerate("grid lines must be finite and strictly increasing".into()));
        }
        let (nx, nz) = (xs.len() - 1, zs.len() - 1);
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let vertices = zs.iter().flat_map(|&z| xs.iter().map(move |&x| [x, z])).collect();
        let mut elements = Vec::with_capacity(2 * nx * nz);
        for j in 0..nz {
            for i in 0..nx {
                elements.push([id(i + 1, j), id(i + 1, j + 1), id(i, j)]);
                elements.push([id(i, j + 1), id(i, j), id(i + 1, j + 1)]);
            }
        }
        let mut boundary = Vec::new();
        for i in 0..nx {
            boundary.push((id(i, 0), id(i + 1, 0), Marker::BOTTOM));
            boundary.push((id(i, nz), id(i + 1, nz), Marker::TOP));
        }
        for j in 0..nz {
            boundary.push((id(0, j), id(0, j + 1), Marker::LEFT));
            boundary.push((id(nx, j), id(nx, j + 1), Marker::RIGHT));
        }
        let material = vec![0; elements.len()];
        Ok(Mesh { vertices, elements, material, boundary })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_area(&self, k: usize) -> f64 {
        let [a, b, c] = self.elements[k].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, k: usize) -> [f64; 2] {
        let [a, b, c] = self.elements[k].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Tags elements whose centroid lies above `z_interface` with `above`, the rest with `below`.
    pub fn assign_layers(&mut self, z_interface: f64, below: usize, above: usize) {
        for k in 0..self.elements.len() {
            self.material[k] = if self.centroid(k)[1] > z_interface { above } else { below };
        }
    }

    /// Plain-text format: `vertices n` / `x z` lines, `triangles m` / `a b c [material]`
    /// lines, `boundary l` / `a b marker` lines; `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
        }
        let _ = writeln!(s, "triangles {}", self.elements.len());
        for (t, m) in self.elements.iter().zip(&self.material) {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], m);
        }
        let _ = writeln!(s, "boundary {}", self.boundary.len());
        for (a, b, m) in &self.boundary {
            let _ = writeln!(s, "{} {} {}", a, b, m.0);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Mesh, MeshError> {
        let err = |line: usize, msg: &str| MeshError::Parse { line, msg: msg.to_string() };
        let mut mesh = Mesh { vertices: vec![], elements: vec![], material: vec![], boundary: vec![] };
        let all: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let mut pos = 0;
        let section = |name: &str, pos: &mut usize| -> Result<Vec<(usize, Vec<&str>)>, MeshError> {
            let (ln, l) = *all.get(*pos).ok_or_else(|| err(0, &format!("missing `{name}` section")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(err(ln, &format!("expected `{name} <count>`")));
            }
            let count: usize = it.next().and_then(|c| c.parse().ok()).ok_or_else(|| err(ln, "bad count"))?;
            *pos += 1;
            let rows: Vec<(usize, Vec<&str>)> = all
                .get(*pos..*pos + count)
                .ok_or_else(|| err(ln, "section shorter than its count"))?
                .iter()
                .map(|(ln, l)| (*ln, l.split_whitespace().collect()))
                .collect();
            *pos += count;
            Ok(rows)
        };
        let num = |ln: usize, s: &str| -> Result<f64, MeshError> { s.parse().map_err(|_| err(ln, "bad number")) };
        let idx = |ln: usize, s: &str| -> Result<usize, MeshError> { s.parse().map_err(|_| err(ln, "bad index")) };
        for (ln, f) in section("vertices", &mut pos)? {
            if f.len() != 2 {
                return Err(err(ln, "vertex needs 2 coordinates"));
            }
            mesh.vertices.push([num(ln, f[0])?, num(ln, f[1])?]);
        }
        for (ln, f) in section("triangles", &mut pos)? {
            if f.len() != 3 && f.len() != 4 {
                return Err(err(ln, "triangle needs 3 vertices and an optional material id"));
            }
            mesh.elements.push([idx(ln, f[0])?, idx(ln, f[1])?, idx(ln, f[2])?]);
            mesh.material.push(if f.len() == 4 { idx(ln, f[3])? } else { 0 });
        }
        for (ln, f) in section("boundary", &mut pos)? {
            if f.len() != 3 {
                return Err(err(ln, "boundary edge needs 2 vertices and a marker"));
            }
            let m: u32 = f[2].parse().map_err(|_| err(ln, "bad marker"))?;
            mesh.boundary.push((idx(ln, f[0])?, idx(ln, f[1])?, Marker(m)));
        }
        if let Some((ln, _)) = all.get(pos) {
            return Err(err(*ln, "trailing content"));
        }
        for t in &mesh.elements {
            for &v in t {
                if v >= mesh.vertices.len() {
                    return Err(MeshError::VertexIndex(v));
                }
            }
        }
        Ok(mesh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceLink {
    Interior { elem: usize, face: usize },
    Boundary(Marker),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connectivity {
    pub links: Vec<[FaceLink; 3]>,
}

impl Connectivity {
    pub fn interior_face_count(&self) -> usize {
        self.links
            .iter()
            .flatten()
            .filter(|l| matches!(l, FaceLink::Interior { .. }))
            .count()
            / 2
    }

    pub fn boundary_face_count(&self) -> usize {
        self.links.iter().flatten().filter(|l| matches!(l, FaceLink::Boundary(_))).count()
    }
}

pub fn connect(mesh: &Mesh) -> Result<Connectivity, MeshError> {
    let mut owners: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for (k, t) in mesh.elements.iter().enumerate() {
        for f in 0..3 {
            let (a, b) = face_vertices(t, f);
            owners.entry(edge_key(a, b)).or_default().push((k, f));
        }
    }
    let markers: HashMap<(usize, usize), Marker> =
        mesh.boundary.iter().map(|&(a, b, m)| (edge_key(a, b), m)).collect();
    let mut links = vec![[FaceLink::Boundary(Marker(0)); 3]; mesh.elements.len()];
    let mut keys: Vec<_> = owners.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let own = &owners[&key];
        match own.as_slice() {
            [(k, f)] => {
                let m = markers.get(&key).ok_or(MeshError::Unmarked(key.0, key.1, *k))?;
                links[*k][*f] = FaceLink::Boundary(*m);
            }
            [(k1, f1), (k2, f2)] => {
                links[*k1][*f1] = FaceLink::Interior { elem: *k2, face: *f2 };
                links[*k2][*f2] = FaceLink::Interior { elem: *k1, face: *f1 };
            }
            _ => return Err(MeshError::OverShared(key.0, key.1)),
        }
    }
    Ok(Connectivity { links })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub nx: f64,
    pub nz: f64,
    /// Physical face length over reference face length.
    pub jf: f64,
}

/// Affine factors: `d/dx = rx d/dr + sx d/ds`, `d/dz = rz d/dr + sz d/ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub rx: f64,
    pub sx: f64,
    pub rz: f64,
    pub sz: f64,
    pub j: f64,
    pub faces: [FaceGeometry; 3],
}

pub fn element_geometry(v: [[f64; 2]; 3]) -> ElementGeometry {
    let xr = 0.5 * (v[1][0] - v[0][0]);
    let xs = 0.5 * (v[2][0] - v[0][0]);
    let zr = 0.5 * (v[1][1] - v[0][1]);
    let zs = 0.5 * (v[2][1] - v[0][1]);
    let j = xr * zs - xs * zr;
    let (rx, sx, rz, sz) = (zs / j, -zr / j, -xs / j, xr / j);
    let grads = [(-sx, -sz), (rx + sx, rz + sz), (-rx, -rz)];
    let mut faces = [FaceGeometry { nx: 0.0, nz: 0.0, jf: 0.0 }; 3];
    for f in 0..3 {
        let (gx, gz) = grads[f];
        let norm = gx.hypot(gz);
        let (a, b) = (v[f], v[(f + 1) % 3]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        faces[f] = FaceGeometry { nx: gx / norm, nz: gz / norm, jf: len / FACE_LENGTH[f] };
    }
    ElementGeometry { rx, sx, rz, sz, j, faces }
}

/// Mesh plus everything the DG operator needs at a given polynomial order.
#[derive(Debug, Clone)]
pub struct DgMesh {
    pub mesh: Mesh,
    pub conn: Connectivity,
    pub geom: Vec<ElementGeometry>,
    /// Physical node coordinates, `k * np + i`.
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// For interior faces: neighbour face-node index matching each local face node.
    pub face_perm: Vec<[Vec<usize>; 3]>,
    pub np: usize,
    pub nfp: usize,
}

impl DgMesh {
    pub fn new(mesh: Mesh, re: &ReferenceElement) -> Result<DgMesh, MeshError> {
        let conn = connect(&mesh)?;
        let np = re.np;
        let nfp = re.nfp;
        let k_count = mesh.elements.len();
        let mut geom = Vec::with_capacity(k_count);
        let mut x = vec![0.0; k_count * np];
        let mut z = vec![0.0; k_count * np];
        for (k, tri) in mesh.elements.iter().enumerate() {
            let v = tri.map(|i| mesh.vertices[i]);
            let g = element_geometry(v);
            if !(g.j > 0.0) {
                return Err(MeshError::Inverted { element: k, j: g.j });
            }
            geom.push(g);
            for i in 0..np {
                let (r, s) = (re.r[i], re.s[i]);
                let (l1, l2, l3) = (-(r + s) / 2.0, (1.0 + r) / 2.0, (1.0 + s) / 2.0);
                x[k * np + i] = l1 * v[0][0] + l2 * v[1][0] + l3 * v[2][0];
                z[k * np + i] = l1 * v[0][1] + l2 * v[1][1] + l3 * v[2][1];
            }
        }
        let mut face_perm = vec![[vec![], vec![], vec![]]; k_count];
        for k in 0..k_count {
            let h = mesh.element_area(k).sqrt();
            for f in 0..3 {
                if let FaceLink::Interior { elem, face } = conn.links[k][f] {
                    let mut perm = Vec::with_capacity(nfp);
                    for &i in &re.fmask[f] {
                        let (xi, zi) = (x[k * np + i], z[k * np + i]);
                        let found = re.fmask[face].iter().position(|&j| {
                            let (xj, zj) = (x[elem * np + j], z[elem * np + j]);
                            (xi - xj).hypot(zi - zj) < 1e-10 * h.max(1e-300)
                        });
                        perm.push(found.ok_or(MeshError::Mismatch(k, f))?);
                    }
                    face_perm[k][f] = perm;
                }
            }
        }
        Ok(DgMesh { mesh, conn, geom, x, z, face_perm, np, nfp })
    }

    pub fn num_elements(&self) -> usize {
        self.geom.len()
    }

    pub fn node(&self, k: usize, i: usize) -> (f64, f64) {
        (self.x[k * self.np + i], self.z[k * self.np + i])
    }

    /// Element containing `(x, z)` and the reference coordinates of the point.
    /// Points on shared edges go to the lowest element id.
    pub fn locate(&self, x: f64, z: f64) -> Option<(usize, f64, f64)> {
        self.locate_all(x, z).into_iter().next()
    }

    /// Every element whose closure contains `(x, z)`, in id order.
    pub fn locate_all(&self, x: f64, z: f64) -> Vec<(usize, f64, f64)> {
        let tol = 1e-10;
        let mut out = Vec::new();
        for (k, tri) in self.mesh.elements.iter().enumerate() {
            let v0 = self.mesh.vertices[tri[0]];
            let g = &self.geom[k];
            let (dx, dz) = (x - v0[0], z - v0[1]);
            let r = -1.0 + g.rx * dx + g.rz * dz;
            let s = -1.0 + g.sx * dx + g.sz * dz;
            if r >= -1.0 - tol && s >= -1.0 - tol && r + s <= tol {
                out.push((k, r, s));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Bounds {
        Bounds::new(0.0, 1.0, 0.0, 1.0)
    }

    #[test]
    fn two_triangle_square() {
        let m = Mesh::uniform(1, 1, unit()).unwrap();
        assert_eq!(m.num_elements(), 2);
        let area: f64 = (0..2).map(|k| m.element_area(k)).sum();
        assert!((area - 1.0).abs() < 1e-15);
        let c = connect(&m).unwrap();
        assert_eq!(c.interior_face_count(), 1);
        assert_eq!(c.boundary_face_count(), 4);
    }

    #[test]
    fn uniform_four_by_four() {
        let m = Mesh::uniform(4, 4, unit()).unwrap();
        assert_eq!(m.num_elements(), 32);
        let re = ReferenceElement::new(2).unwrap();
        let d = DgMesh::new(m, &re).unwrap();
        let j0 = d.geom[0].j;
        assert!(d.geom.iter().all(|g| (g.j - j0).abs() < 1e-15));
    }

    #[test]
    fn reference_congruent_element() {
        let g = element_geometry([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]]);
        assert_eq!((g.j, g.rx, g.sx, g.rz, g.sz), (1.0, 1.0, 0.0, 0.0, 1.0));
        for f in 0..3 {
            assert!((g.faces[f].jf - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scaled_element() {
        let s = 3.5;
        let g = element_geometry([[-s, -s], [s, -s], [-s, s]]);
        assert!((g.j - s * s).abs() < 1e-12);
        for f in 0..3 {
            assert!((g.faces[f].jf - s).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_polygon_normals() {
        let g = element_geometry([[0.1, 0.2], [1.3, -0.4], [0.7, 2.0]]);
        let (mut sx, mut sz) = (0.0, 0.0);
        for (f, len) in g.faces.iter().zip(FACE_LENGTH) {
            sx += f.nx * f.jf * len;
            sz += f.nz * f.jf * len;
        }
        assert!(sx.abs() < 1e-14 && sz.abs() < 1e-14);
    }

    #[test]
    fn rejects_inverted_and_degenerate() {
        assert!(Mesh::uniform(0, 3, unit()).is_err());
        assert!(Mesh::uniform(2, 2, Bounds::new(1.0, 0.0, 0.0, 1.0)).is_err());
        let mut m = Mesh::uniform(1, 1, unit()).unwrap();
        m.elements[0].swap(1, 2);
        let re = ReferenceElement::new(1).unwrap();
        assert!(matches!(DgMesh::new(m, &re), Err(MeshError::Inverted { element: 0, .. })));
    }

    #[test]
    fn hanging_node_rejected() {
        // Left square split in two, right square not: the middle vertex hangs.
        let mesh = Mesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [1.0, 0.5]],
            elements: vec![[0, 1, 6], [0, 6, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4]],
            material: vec![0; 5],
            boundary: vec![(0, 1, Marker(3)), (1, 2, Marker(3)), (2, 5, Marker(2)), (5, 4, Marker(4)), (4, 3, Marker(4)), (3, 0, Marker(1))],
        };
        assert!(matches!(connect(&mesh), Err(MeshError::Unmarked(..))));
    }

    #[test]
    fn text_round_trip() {
        let mut m = Mesh::uniform(3, 2, Bounds::new(-1.0, 2.0, 0.0, 1.5)).unwrap();
        m.assign_layers(0.75, 0, 1);
        let back = Mesh::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(matches!(Mesh::parse("vertices 1\n0 0\ntriangles 1\n"), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn locate_tie_breaks_low() {
        let re = ReferenceElement::new(1).unwrap();
        let d = DgMesh::new(Mesh::uniform(2, 2, unit()).unwrap(), &re).unwrap();
        let (k, _, _) = d.locate(0.25, 0.25).unwrap();
        assert_eq!(k, 0);
        assert!(d.locate(2.0, 0.5).is_none());
    }
}
