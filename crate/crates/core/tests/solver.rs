use proptest::prelude::*;
use visco_dg::config::parse_config;
use visco_dg::dg::{uniform_boundary, BoundaryKind, DgOperator, Penalty, NFIELDS, S11, V1, V3};
use visco_dg::io::{write_snapshot, Snapshot};
use visco_dg::materials::{derive_visco_coefficients, MaterialSpec};
use visco_dg::mesh::{Bounds, DgMesh, Mesh};
use visco_dg::refelem::{ReferenceElement, MAX_ORDER};
use visco_dg::source::{PointSource, ReceiverSet, Wavelet, WaveletKind};
use visco_dg::verify::greens::{greens_trace, greens_trace_at, SpeedForm};
use visco_dg::workflows::{self, peak};

fn operator(n: usize, nx: usize, b: Bounds) -> DgOperator {
    let re = ReferenceElement::new(n).unwrap();
    let mesh = DgMesh::new(Mesh::uniform(nx, nx, b).unwrap(), &re).unwrap();
    let mat = derive_visco_coefficients(&MaterialSpec::preset("sandstone").unwrap()).unwrap();
    DgOperator::new(re, mesh, vec![mat], Penalty::uniform(0.5), uniform_boundary(BoundaryKind::FreeSurface)).unwrap()
}

fn unit() -> Bounds {
    Bounds::new(0.0, 1.0, 0.0, 1.0)
}

/// Largest `|int delta_h p - p(x0)|` over monomials `x^a z^b`, `a + b <= N`.
fn moment_error(op: &DgOperator, src: &PointSource) -> f64 {
    let n = op.re.n;
    let (x0, z0) = src.position;
    let mut worst = 0.0f64;
    for a in 0..=n {
        for b in 0..=n - a {
            let p = |x: f64, z: f64| (x - 0.5).powi(a as i32) * (z - 0.5).powi(b as i32);
            let mut integral = 0.0;
            for (k, delta) in &src.parts {
                let j = op.mesh.geom[*k].j;
                for i in 0..op.np() {
                    let (x, z) = op.mesh.node(*k, i);
                    let md: f64 = (0..op.np()).map(|l| op.re.mass[(i, l)] * delta[l]).sum();
                    integral += j * p(x, z) * md;
                }
            }
            worst = worst.max((integral - p(x0, z0)).abs());
        }
    }
    worst
}

fn ricker() -> Wavelet {
    Wavelet::new(WaveletKind::Ricker, 10.0, 0.1).unwrap()
}

#[test]
fn point_source_reproduces_polynomial_moments() {
    for n in 1..=MAX_ORDER {
        let op = operator(n, 2, unit());
        for pos in [(0.37, 0.21), (0.5, 0.3), (0.5, 0.5), (0.0, 0.0)] {
            let src = PointSource::new(&op, ricker(), 1.0, pos, vec![(V3, 1.0)]).unwrap();
            let err = moment_error(&op, &src);
            assert!(err < 1e-12, "N = {n}, {pos:?}: {err:e}");
        }
    }
    let op = operator(3, 2, unit());
    let hosts = |p| PointSource::new(&op, ricker(), 1.0, p, vec![(V3, 1.0)]).unwrap().parts.len();
    assert_eq!(hosts((0.37, 0.21)), 1);
    assert_eq!(hosts((0.5, 0.3)), 2);
    assert_eq!(hosts((0.5, 0.5)), 6);
}

#[test]
fn injection_touches_only_target_rows() {
    let op = operator(3, 2, unit());
    let src = PointSource::new(&op, ricker(), 2.0, (0.3, 0.6), vec![(V1, 1.0)]).unwrap();
    let mut dq = op.zero_state();
    src.add_to(&op, &mut dq, 0.1);
    let (k, delta) = &src.parts[0];
    let rho = op.materials[0].rho;
    for e in 0..op.num_elements() {
        for f in 0..NFIELDS {
            for i in 0..op.np() {
                let got = dq[op.idx(e, f, i)];
                let want = if e == *k && f == V1 { 2.0 * delta[i] / rho } else { 0.0 };
                assert!((got - want).abs() <= 1e-15 * want.abs().max(1.0), "element {e} field {f} node {i}");
            }
        }
    }
    assert!(PointSource::new(&op, ricker(), 1.0, (2.0, 0.5), vec![(V1, 1.0)]).is_err());
    assert!(PointSource::new(&op, ricker(), 1.0, (0.5, 0.5), vec![(3, 1.0)]).is_err());
}

#[test]
fn receiver_on_a_node_reads_the_nodal_value() {
    let op = operator(3, 3, unit());
    let q = workflows::random_state(&op, 5);
    // Node 4 is the interior node of the cubic element.
    let (k, i) = (4, (0..op.np()).find(|&i| op.re.r[i] > -0.9 && op.re.s[i] > -0.9 && op.re.r[i] + op.re.s[i] < -0.1).unwrap());
    let set = ReceiverSet::new(&op, &[op.mesh.node(k, i)]).unwrap();
    let got = set.sample(&op, &q, 0);
    for (f, g) in got.iter().enumerate() {
        let want = q[op.idx(k, f, i)];
        assert!((g - want).abs() <= 1e-12 * want.abs().max(1.0), "field {f}");
    }
}

#[test]
fn resting_medium_in_uniform_motion_gives_constant_traces() {
    let cfg = parse_config(
        "material = sandstone\nx_min = -1 km\nx_max = 1 km\nz_min = -1 km\nz_max = 1 km\nnx = 3\norder = 2\n\
         bc = free_surface\nt_final = 50 ms\nreceivers = 123 m, -456 m; 0 m, 0 m\n",
    )
    .unwrap();
    let setup = workflows::build(&cfg).unwrap();
    let q0 = setup.op.interpolate(|_, _| {
        let mut u = [0.0; NFIELDS];
        u[V1] = 0.3;
        u[V3] = -0.1;
        u
    });
    let res = workflows::run_setup(&cfg, &setup, Some(q0), None).unwrap();
    for r in 0..2 {
        // Stress is measured against the impedance scale rho c |v|, about 2e6 Pa.
        for (f, want, tol) in [(V1, 0.3, 1e-10), (V3, -0.1, 1e-10), (S11, 0.0, 1e-3)] {
            let bad = res.receivers.series(r, f).iter().map(|v| (v - want).abs()).fold(0.0, f64::max);
            assert!(bad < tol, "receiver {r} field {f}: {bad:e}");
        }
    }
}

#[test]
fn snapshot_of_two_triangles() {
    let op = operator(2, 1, unit());
    let q = workflows::random_state(&op, 1);
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("two_cells.vtk");
    write_snapshot(&op, &q, 0.25, &path).unwrap();
    let snap = Snapshot::parse_vtk(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(snap.cells.len(), 2);
    assert_eq!(snap.points.len(), 2 * op.np());
    let v3 = snap.field("v3").unwrap();
    for k in 0..2 {
        for i in 0..op.np() {
            assert_eq!(v3[k * op.np() + i], q[op.idx(k, V3, i)]);
        }
    }
    for c in &snap.cells {
        let [a, b, d] = c.map(|i| snap.points[i]);
        assert!((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]) > 0.0);
    }
}

#[test]
fn analytic_trace_is_causal() {
    let spec = MaterialSpec::preset("sandstone_iso").unwrap();
    let w = Wavelet::new(WaveletKind::GaussCosine, 45.0, 0.05).unwrap();
    let g = greens_trace(&spec, 250.0, 250.0, &w, 1.0, 0.3, 2e-4, SpeedForm::Consistent).unwrap();
    let (p1, _) = peak(&g.t, &g.v1);
    let (p3, _) = peak(&g.t, &g.v3);
    // The P wave reaches the receiver after about 0.11 s plus the wavelet onset.
    for (t, (a, b)) in g.t.iter().zip(g.v1.iter().zip(&g.v3)) {
        if *t < 0.1 {
            assert!(a.abs() < 1e-3 * p1 && b.abs() < 1e-3 * p3, "t = {t}");
        }
    }
    assert!(g.parseval_error < 1e-10);
}

#[test]
fn mirrored_receivers_see_mirrored_motion() {
    let spec = MaterialSpec::preset("sandstone_iso").unwrap();
    let w = Wavelet::new(WaveletKind::GaussCosine, 45.0, 0.05).unwrap();
    let times: Vec<f64> = (0..300).map(|i| i as f64 * 1e-3).collect();
    let a = greens_trace_at(&spec, 130.0, 70.0, &w, 1.0, 0.3, &times, SpeedForm::Consistent).unwrap();
    let b = greens_trace_at(&spec, -130.0, 70.0, &w, 1.0, 0.3, &times, SpeedForm::Consistent).unwrap();
    let c = greens_trace_at(&spec, -130.0, -70.0, &w, 1.0, 0.3, &times, SpeedForm::Consistent).unwrap();
    let (p1, _) = peak(&times, &a.v1);
    let (p3, _) = peak(&times, &a.v3);
    for i in 0..times.len() {
        assert!((a.v1[i] + b.v1[i]).abs() < 1e-12 * p1 && (a.v3[i] - b.v3[i]).abs() < 1e-12 * p3);
        assert!((a.v1[i] - c.v1[i]).abs() < 1e-12 * p1 && (a.v3[i] - c.v3[i]).abs() < 1e-12 * p3);
    }

    // The bisected grid is invariant under the half turn, so the solver traces
    // and their misfits agree at (x, z) and (-x, -z).
    let cfg = parse_config(
        "material = sandstone_iso\nx_min = -200 m\nx_max = 200 m\nz_min = -200 m\nz_max = 200 m\nnx = 8\norder = 2\n\
         t_final = 0.12 s\nbc = absorbing\nsource_kind = gauss_cosine\nsource_f0 = 45 Hz\nsource_t0 = 50 ms\n\
         source_targets = v3\nreceivers = 130 m, 70 m; -130 m, -70 m\n",
    )
    .unwrap();
    let res = workflows::simulate(&cfg, None, None).unwrap();
    let t = &res.receivers.times;
    let g = greens_trace_at(&spec, 130.0, 70.0, &w, 1.0, 0.12, t, SpeedForm::Consistent).unwrap();
    let mut misfits = Vec::new();
    for r in 0..2 {
        let (v1, v3) = (res.receivers.series(r, V1), res.receivers.series(r, V3));
        misfits.push((workflows::relative_misfit(&v1, &g.v1), workflows::relative_misfit(&v3, &g.v3)));
    }
    let scale = peak(t, &res.receivers.series(0, V3)).0;
    for f in [V1, V3] {
        for (x, y) in res.receivers.series(0, f).iter().zip(res.receivers.series(1, f)) {
            assert!((x - y).abs() < 1e-9 * scale);
        }
    }
    assert!((misfits[0].0 - misfits[1].0).abs() < 1e-6 && (misfits[0].1 - misfits[1].1).abs() < 1e-6, "{misfits:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moments_hold_anywhere(n in 1usize..=6, x in 0.0f64..=1.0, z in 0.0f64..=1.0) {
        let op = operator(n, 3, unit());
        let src = PointSource::new(&op, ricker(), 1.0, (x, z), vec![(V3, 1.0)]).unwrap();
        prop_assert!(moment_error(&op, &src) < 1e-12);
    }
}
