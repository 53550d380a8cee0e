//! Library results against values computed independently here: composite
//! Simpson integration, closed-form spectra and hand-derived constants.

use std::f64::consts::PI;

use enrfem::enrichment::{build_G, EnrichmentFamily, WeightParams};
use enrfem::fem::SparseSystem;
use enrfem::projection::{e15_constant, optimize_parameters};
use enrfem::{FeSpace, Rule1D, TriGeom, TriMesh};

fn simpson<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn g_diagonal_matches_simpson() {
    let t = TriGeom::reference();
    let gl = Rule1D::gauss_legendre(16).unwrap();
    let w = WeightParams::UNWEIGHTED;
    // ω = 3 on every edge; the trace is 3 f(t) g(1 - t).
    let cases: [(EnrichmentFamily, fn(f64) -> f64, f64); 4] = [
        (
            EnrichmentFamily::e10(w),
            |t| 3.0 * t.sin() * (1.0 - t).sin(),
            3.0 * (1f64.sin() - 1f64.cos()) / 2.0,
        ),
        (
            EnrichmentFamily::e11(w),
            |t| 3.0 * (t.exp() - 1.0) * ((1.0 - t).exp() - 1.0),
            0.845154514622864294,
        ),
        (
            EnrichmentFamily::e12(w),
            |t| 3.0 * (t.exp() - 1.0) * (1.0 - t).sin(),
            0.625669724278932669,
        ),
        (
            EnrichmentFamily::e13(w),
            |t| 3.0 * t.sin() * ((1.0 - t).cos() - 1.0),
            -0.116886605183736088,
        ),
    ];
    for (fam, trace, frozen) in cases {
        let oracle = simpson(trace, 2000);
        assert!((oracle - frozen).abs() < 1e-12, "{} oracle {oracle}", fam.id);
        let g = build_G(&fam, &t, &gl).unwrap();
        for i in 0..3 {
            assert!(
                (g.g[(i, i)] - frozen).abs() < 1e-14,
                "{} G{i}{i} = {}",
                fam.id,
                g.g[(i, i)]
            );
        }
    }
}

#[test]
fn weighted_g_matches_simpson() {
    // On an edge, ω_{μ,α,β} reduces to t^α (1-t)^β.
    let w = WeightParams::new(1.0, 2.0, 1.0).unwrap();
    let g = build_G(
        &EnrichmentFamily::e10(w),
        &TriGeom::reference(),
        &Rule1D::gauss_legendre(16).unwrap(),
    )
    .unwrap();
    let oracle = simpson(|t| t * t * (1.0 - t) * t.sin() * (1.0 - t).sin(), 2000);
    assert!((g.g[(0, 0)] - oracle).abs() < 1e-12);
}

#[test]
fn linear_condition_numbers_match_five_point_spectrum() {
    // On Friedrichs-Keller meshes the P1 stiffness is the 5-point stencil,
    // whose extreme eigenvalues give κ = cot²(π / 2n).
    let mut m = TriMesh::friedrichs_keller(4).unwrap();
    for n in [4usize, 8, 16, 32, 64] {
        let s = FeSpace::with_defaults(&m, None).unwrap();
        let sys = SparseSystem::new(s.assemble_stiffness().unwrap(), vec![0.0; s.n_dofs()]);
        let want = (1.0 / (PI / (2.0 * n as f64)).tan()).powi(2);
        let got = sys.condition_number().unwrap();
        assert!((got - want).abs() < 1e-6 * want, "n={n}: {got} vs {want}");
        m = m.refine_uniform();
    }
}

#[test]
fn e15_constants_by_hand() {
    // B(4, 1) = 1/4, so H = 4 and 𝒞 = (1 + 4.5·4)/8.
    assert!((e15_constant(0.0, 1.0, 0.0, 2.0, 0.0) - 19.0 / 8.0).abs() < 1e-13);
    // B(3, 2) = 1/12 at (0,0,1).
    assert!((e15_constant(0.0, 0.0, 1.0, 2.0, 0.0) - (1.0 + 4.5 * 12.0) / 8.0).abs() < 1e-12);
    // μ = 1: B(3, 1) = 1/3, factor μ+1 = 2.
    assert!((e15_constant(1.0, 0.0, 0.0, 2.0, 0.0) - (1.0 + 4.5 * 2.0 * 3.0) / 8.0).abs() < 1e-12);
    let r = optimize_parameters(2.0, 0.0, 0.01).unwrap();
    assert_eq!(r.grid_points, 101 * 102 / 2);
    assert!((r.c_min - 19.0 / 8.0).abs() < 1e-13);
}
