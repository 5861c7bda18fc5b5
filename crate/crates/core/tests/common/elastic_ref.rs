//! Plain elastic P-SV nodal DG: five fields per node, stored node-major as
//! `[s11, s33, s13, v1, v3]`. Shares only the reference element and the mesh
//! geometry with the library.

use nalgebra::{DVector, Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};
use visco_dg::dg::{BoundaryConditions, BoundaryKind};
use visco_dg::mesh::{DgMesh, FaceLink};
use visco_dg::refelem::ReferenceElement;

pub struct ElasticDg<'a> {
    re: &'a ReferenceElement,
    mesh: &'a DgMesh,
    c: Matrix3<f64>,
    rho: f64,
    tau_s: f64,
    tau_v: f64,
    bc: BoundaryConditions,
    /// `neighbour[k][f][i]`: global node index facing local face node `i`.
    neighbour: Vec<[Vec<Option<usize>>; 3]>,
}

impl<'a> ElasticDg<'a> {
    pub fn new(re: &'a ReferenceElement, mesh: &'a DgMesh, c: Matrix3<f64>, rho: f64, tau_s: f64, tau_v: f64, bc: BoundaryConditions) -> Self {
        let np = re.np;
        let mut neighbour = Vec::with_capacity(mesh.num_elements());
        for k in 0..mesh.num_elements() {
            let per_face = std::array::from_fn(|f| {
                re.fmask[f]
                    .iter()
                    .map(|&i| match mesh.conn.links[k][f] {
                        FaceLink::Interior { elem, face } => {
                            let (x, z) = mesh.node(k, i);
                            let j = re.fmask[face]
                                .iter()
                                .copied()
                                .min_by(|&a, &b| {
                                    let da = dist(mesh.node(elem, a), (x, z));
                                    let db = dist(mesh.node(elem, b), (x, z));
                                    da.total_cmp(&db)
                                })
                                .unwrap();
                            Some(elem * np + j)
                        }
                        FaceLink::Boundary(_) => None,
                    })
                    .collect()
            });
            neighbour.push(per_face);
        }
        ElasticDg { re, mesh, c, rho, tau_s, tau_v, bc, neighbour }
    }

    pub fn len(&self) -> usize {
        self.mesh.num_elements() * self.re.np * 5
    }

    pub fn rhs(&self, q: &[f64], dq: &mut [f64]) {
        let np = self.re.np;
        let node = |g: usize| -> [f64; 5] { std::array::from_fn(|c| q[5 * g + c]) };
        for k in 0..self.mesh.num_elements() {
            let geo = &self.mesh.geom[k];
            let col = |c: usize| DVector::from_fn(np, |i, _| q[5 * (k * np + i) + c]);
            let dx = |u: &DVector<f64>| (&self.re.dr * u) * geo.rx + (&self.re.ds * u) * geo.sx;
            let dz = |u: &DVector<f64>| (&self.re.dr * u) * geo.rz + (&self.re.ds * u) * geo.sz;
            let (s11, s33, s13, v1, v3) = (col(0), col(1), col(2), col(3), col(4));
            let mut strain = [dx(&v1), dz(&v3), dz(&v1) + dx(&v3)];
            let mut force = [dx(&s11) + dz(&s13), dx(&s13) + dz(&s33)];

            for f in 0..3 {
                let fg = &geo.faces[f];
                let an = Matrix3x2::new(fg.nx, 0.0, 0.0, fg.nz, fg.nz, fg.nx);
                let ata: Matrix2<f64> = an.transpose() * an;
                let nfp = self.re.nfp;
                let mut flux = vec![DVector::zeros(nfp); 5];
                for (i, &vi) in self.re.fmask[f].iter().enumerate() {
                    let inner = node(k * np + vi);
                    let outer = match (self.neighbour[k][f][i], self.mesh.conn.links[k][f]) {
                        (Some(g), _) => node(g),
                        (None, FaceLink::Boundary(m)) => match self.bc[&m] {
                            BoundaryKind::FreeSurface => {
                                let t = an.transpose() * Vector3::new(inner[0], inner[1], inner[2]);
                                let mut o = inner;
                                // Mirror the traction, keep the velocity.
                                let sig = self.traction_to_stress(-t, fg.nx, fg.nz, inner);
                                o[..3].copy_from_slice(&sig);
                                o
                            }
                            BoundaryKind::Absorbing => [0.0; 5],
                            BoundaryKind::Prescribed => unreachable!(),
                        },
                        (None, FaceLink::Interior { .. }) => unreachable!(),
                    };
                    let t_in = an.transpose() * Vector3::new(inner[0], inner[1], inner[2]);
                    let t_out = an.transpose() * Vector3::new(outer[0], outer[1], outer[2]);
                    let dt = t_out - t_in;
                    let dv = Vector2::new(outer[3] - inner[3], outer[4] - inner[4]);
                    let fs = (an * dv + an * dt * self.tau_s) * 0.5;
                    let fv = (dt + ata * dv * self.tau_v) * 0.5;
                    for c in 0..3 {
                        flux[c][i] = fs[c];
                    }
                    flux[3][i] = fv[0];
                    flux[4][i] = fv[1];
                }
                let w = fg.jf / geo.j;
                for c in 0..3 {
                    strain[c] += (&self.re.lift[f] * &flux[c]) * w;
                }
                force[0] += (&self.re.lift[f] * &flux[3]) * w;
                force[1] += (&self.re.lift[f] * &flux[4]) * w;
            }

            for i in 0..np {
                let e = Vector3::new(strain[0][i], strain[1][i], strain[2][i]);
                let s = self.c * e;
                let g = 5 * (k * np + i);
                dq[g] = s[0];
                dq[g + 1] = s[1];
                dq[g + 2] = s[2];
                dq[g + 3] = force[0][i] / self.rho;
                dq[g + 4] = force[1][i] / self.rho;
            }
        }
    }

    /// Exterior stress state whose traction is `t`; only the traction enters the flux.
    fn traction_to_stress(&self, t: Vector2<f64>, n1: f64, n3: f64, inner: [f64; 5]) -> [f64; 3] {
        // s_out = s_in + A_n (A_n^T A_n)^-1 (t - A_n^T s_in) reproduces traction t.
        let an = Matrix3x2::new(n1, 0.0, 0.0, n3, n3, n1);
        let s_in = Vector3::new(inner[0], inner[1], inner[2]);
        let ata: Matrix2<f64> = an.transpose() * an;
        let corr = an * ata.try_inverse().unwrap() * (t - an.transpose() * s_in);
        let s = s_in + corr;
        [s[0], s[1], s[2]]
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}
