use enrfem::barycentric::{next, prev};
use enrfem::enrichment::{element_basis, EnrichmentFamily, FamilyId, WeightParams};
use enrfem::projection::{
    error_decomposition_check, lattice, linf_bound, lipschitz_grad, project_enriched, quasi_optimal_scan,
};
use enrfem::study::BenchProblem;
use enrfem::{ElementBasis, FeSpace, TriGeom, TriMesh};
use nalgebra::{Point2, Vector2};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64)
}

/// A counter-clockwise triangle with minimum angle bounded away from zero.
fn triangle() -> impl Strategy<Value = [Point2<f64>; 3]> {
    (point(), point(), point()).prop_filter_map("flat triangle", |(a, b, c)| {
        let mut p = [Point2::new(a.0, a.1), Point2::new(b.0, b.1), Point2::new(c.0, c.1)];
        let cross = (p[1] - p[0]).perp(&(p[2] - p[0]));
        if cross < 0.0 {
            p.swap(1, 2);
        }
        let longest = [(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()]
            .into_iter()
            .fold(0.0, f64::max);
        (cross.abs() > 0.1 * longest * longest).then_some(p)
    })
}

fn weight() -> impl Strategy<Value = WeightParams> {
    (0.0..3.0f64, 0.0..3.0f64, 0.0..3.0f64).prop_map(|(m, a, b)| WeightParams::new(m, a, b).unwrap())
}

fn edge_family() -> impl Strategy<Value = EnrichmentFamily> {
    (0usize..6, weight(), 0.5..3.0f64, 0.5..3.0f64).prop_map(|(i, w, a1, b1)| {
        let ids = [
            FamilyId::E10,
            FamilyId::E11,
            FamilyId::E12,
            FamilyId::E13,
            FamilyId::E14,
        ];
        if i < 5 {
            EnrichmentFamily::preset(ids[i], w).unwrap()
        } else {
            EnrichmentFamily::e15(w, a1, b1).unwrap()
        }
    })
}

fn bary() -> impl Strategy<Value = [f64; 3]> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)
        .prop_filter("zero sum", |(a, b, c)| a + b + c > 1e-3)
        .prop_map(|(a, b, c)| {
            let s = a + b + c;
            [a / s, b / s, c / s]
        })
}

/// Barycentric triple of the point at parameter `t` from local vertex `lo`
/// to local vertex `hi`, exact zero at the third vertex.
fn on_edge(lo: usize, hi: usize, t: f64) -> [f64; 3] {
    let mut lam = [0.0; 3];
    lam[lo] = 1.0 - t;
    lam[hi] = t;
    lam
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn barycentric_round_trip(p in triangle(), lam in bary()) {
        let t = TriGeom::new(p[0], p[1], p[2]).unwrap();
        let back = t.lambda(t.point(&lam));
        prop_assert!((back.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..3 {
            prop_assert!((back[i] - lam[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn lambda_gradients_match_finite_differences(p in triangle(), lam in bary()) {
        let t = TriGeom::new(p[0], p[1], p[2]).unwrap();
        let x = t.point(&lam);
        let h = 1e-6;
        for i in 0..3 {
            let fd = Vector2::new(
                (t.lambda(x + Vector2::new(h, 0.0))[i] - t.lambda(x - Vector2::new(h, 0.0))[i]) / (2.0 * h),
                (t.lambda(x + Vector2::new(0.0, h))[i] - t.lambda(x - Vector2::new(0.0, h))[i]) / (2.0 * h),
            );
            prop_assert!((fd - t.grad_lambda()[i]).norm() < 1e-7 * t.grad_lambda()[i].norm().max(1.0));
        }
    }

    #[test]
    fn kronecker_conditions(fam in edge_family(), p in triangle(), ids in prop::array::uniform3(0usize..50)) {
        prop_assume!(ids[0] != ids[1] && ids[1] != ids[2] && ids[0] != ids[2]);
        let t = TriGeom::with_ids(p, ids).unwrap();
        let b = element_basis(&fam, &t).unwrap();
        prop_assert!(b.kronecker_residual(b.edge_rule()) < 1e-10);
    }

    #[test]
    fn trace_support(fam in edge_family(), p in triangle(), s in 0.0..1.0f64) {
        let b = element_basis(&fam, &TriGeom::new(p[0], p[1], p[2]).unwrap()).unwrap();
        for k in 0..3 {
            for e in [next(k), prev(k)] {
                let v = b.values(&on_edge(next(e), prev(e), s));
                prop_assert!(v[k + 3].abs() <= 1e-12, "phi_{} on edge {e}: {}", k + 4, v[k + 3]);
            }
        }
    }

    /// Two triangles on either side of a shared edge, with arbitrary global
    /// ids, agree on every shape function that lives on the edge.
    #[test]
    fn shared_edge_traces_agree(
        fam in edge_family(),
        a in point(), b in point(), side in 0.2..2.0f64, along in -0.5..1.5f64,
        ids in prop::array::uniform4(0usize..100),
    ) {
        let (pa, pb) = (Point2::new(a.0, a.1), Point2::new(b.0, b.1));
        let d = pb - pa;
        prop_assume!(d.norm() > 0.2);
        prop_assume!(ids[0] != ids[1] && ids[0] != ids[2] && ids[0] != ids[3] && ids[1] != ids[2] && ids[1] != ids[3]);
        let normal = Vector2::new(-d.y, d.x);
        let pc = pa + d * along + normal * side;
        let pd = pa + d * along - normal * side;
        // Left: (a, b, c); right: (b, a, d). The shared edge is opposite local vertex 2 in both.
        let left = ElementBasis::new(&fam, &TriGeom::with_ids([pa, pb, pc], [ids[0], ids[1], ids[2]]).unwrap(), &enrfem::Rule1D::gauss_legendre(16).unwrap()).unwrap();
        let right = ElementBasis::new(&fam, &TriGeom::with_ids([pb, pa, pd], [ids[1], ids[0], ids[3]]).unwrap(), &enrfem::Rule1D::gauss_legendre(16).unwrap()).unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            // t runs from a to b: local 0 → 1 on the left, local 1 → 0 on the right.
            let l = left.values(&on_edge(0, 1, t));
            let r = right.values(&on_edge(1, 0, t));
            prop_assert!((l[5] - r[5]).abs() <= 1e-10, "edge function {} vs {}", l[5], r[5]);
            prop_assert!((l[0] - r[1]).abs() <= 1e-10 && (l[1] - r[0]).abs() <= 1e-10);
        }
    }

    #[test]
    fn scale_invariance(fam in edge_family(), p in triangle(), c in prop::sample::select(vec![-2.0, 0.5, 10.0]), lam in bary()) {
        let t = TriGeom::new(p[0], p[1], p[2]).unwrap();
        let u = element_basis(&fam, &t).unwrap().values(&lam);
        let v = element_basis(&fam.clone().scaled(c), &t).unwrap().values(&lam);
        for k in 0..6 {
            prop_assert!((u[k] - v[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn partition_of_unity(fam in edge_family(), p in triangle(), lam in bary()) {
        let b = element_basis(&fam, &TriGeom::new(p[0], p[1], p[2]).unwrap()).unwrap();
        let v = b.values(&lam);
        // Constants have every vertex value and edge average equal to 1.
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn linear_reproduction(fam in edge_family(), p in triangle(), c in prop::array::uniform3(-5.0..5.0f64)) {
        let t = TriGeom::new(p[0], p[1], p[2]).unwrap();
        let b = element_basis(&fam, &t).unwrap();
        let g = |x: Point2<f64>| c[0] + c[1] * x.x + c[2] * x.y;
        let proj = project_enriched(&b, g);
        for lam in lattice(8) {
            prop_assert!((g(t.point(&lam)) - proj.eval(&b, &lam)).abs() <= 1e-10);
        }
    }

    #[test]
    fn error_decomposition(fam in edge_family(), p in triangle(), problem in 1usize..=4) {
        let pr = BenchProblem::get(problem).unwrap();
        let b = element_basis(&fam, &TriGeom::new(p[0], p[1], p[2]).unwrap()).unwrap();
        prop_assert!(error_decomposition_check(&b, |x| pr.u(x), &lattice(6)) <= 1e-10);
    }

    /// The element `L∞` estimate holds for the benchmark solutions on small
    /// triangles inside the unit square.
    #[test]
    fn linf_bound_holds(x in 0.0..0.6f64, y in 0.0..0.6f64, s in 0.05..0.35f64, problem in 1usize..=4) {
        let pr = BenchProblem::get(problem).unwrap();
        let t = TriGeom::new(Point2::new(x, y), Point2::new(x + s, y + 0.3 * s), Point2::new(x + 0.2 * s, y + s)).unwrap();
        let b = element_basis(&EnrichmentFamily::e10(WeightParams::UNWEIGHTED), &t).unwrap();
        let proj = project_enriched(&b, |p| pr.u(p));
        let err = lattice(20).iter().map(|l| (pr.u(t.point(l)) - proj.eval(&b, l)).abs()).fold(0.0, f64::max);
        let l = lipschitz_grad(|p| pr.grad_u(p), 101);
        prop_assert!(err <= linf_bound(&b, l), "{err} > {}", linf_bound(&b, l));
    }

    #[test]
    fn mesh_counting_law(n in 1usize..6, levels in 0usize..3) {
        let m = TriMesh::friedrichs_keller(n).unwrap().refined(levels);
        let t = 2 * n * n * 4usize.pow(levels as u32);
        prop_assert_eq!(m.n_triangles(), t);
        prop_assert_eq!(m.n_vertices() + m.n_triangles(), m.n_edges() + 1);
        for (v, &b) in m.vertices().iter().zip(m.boundary_vertex()) {
            let on = v.x == 0.0 || v.x == 1.0 || v.y == 0.0 || v.y == 1.0;
            prop_assert_eq!(on, b);
        }
        for e in m.edges() {
            prop_assert!(e.vertices[0] < e.vertices[1]);
        }
    }
}

#[test]
fn quasi_optimal_endpoints() {
    let scan = quasi_optimal_scan(0.01);
    let max = scan.iter().map(|s| s.1).fold(0.0, f64::max);
    let ends = scan[0].1.max(scan[scan.len() - 1].1);
    assert_eq!(max, ends);
}

#[test]
fn patch_test_zero_data() {
    let m = TriMesh::friedrichs_keller(4).unwrap();
    let s = FeSpace::with_defaults(&m, Some(&EnrichmentFamily::e11(WeightParams::UNWEIGHTED))).unwrap();
    let sol = s.assemble(&|_| 0.0).unwrap().solve(1e-12).unwrap();
    assert!(sol.x.iter().all(|&v| v == 0.0));
}

#[test]
fn galerkin_residual() {
    let m = TriMesh::friedrichs_keller(4).unwrap().refined(1);
    let p = BenchProblem::get(3).unwrap();
    for fam in [
        None,
        Some(EnrichmentFamily::e12(WeightParams::new(1.0, 0.0, 1.0).unwrap())),
    ] {
        let s = FeSpace::with_defaults(&m, fam.as_ref()).unwrap();
        let sys = s.assemble(&|x| p.source(x)).unwrap();
        let sol = sys.solve(1e-12).unwrap();
        let ku = sys.matrix.mul_vec(&sol.x);
        let fnorm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let worst = ku.iter().zip(&sys.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-9 * fnorm, "{worst}");
    }
}

#[test]
fn enriched_beats_linear_on_every_problem() {
    let m = TriMesh::friedrichs_keller(4).unwrap().refined(1);
    let lin = FeSpace::with_defaults(&m, None).unwrap();
    for id in [FamilyId::E10, FamilyId::E11, FamilyId::E12] {
        let enr = FeSpace::with_defaults(
            &m,
            Some(&EnrichmentFamily::preset(id, WeightParams::UNWEIGHTED).unwrap()),
        )
        .unwrap();
        for p in BenchProblem::all() {
            let err = |s: &FeSpace| {
                let x = s.assemble(&|x| p.source(x)).unwrap().solve(1e-12).unwrap().x;
                s.energy_error(&x, &|x| p.grad_u(x)).unwrap()
            };
            assert!(err(&enr) < err(&lin), "{id} problem {}", p.id);
        }
    }
}
