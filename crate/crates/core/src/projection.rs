//! Linear and enriched projectors, interpolation errors and the constants
//! of the `L²` error bound `‖g - Π g‖ ≤ 𝒞_{μ,α,β} h²`.

use nalgebra::{Matrix2, Point2, Vector2};
use rayon::prelude::*;
use statrs::function::beta::ln_beta;

use crate::barycentric::{next, prev, TriGeom};
use crate::enrichment::{ElementBasis, EnrichmentFamily, Factor, FamilyKind, WeightParams};
use crate::mesh::TriMesh;
use crate::quadrature::{Rule1D, RuleTri};
use crate::{Error, Result};

/// `π_lin[g] = Σ g(v_r) λ_r` on one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearProjection {
    pub vertex_values: [f64; 3],
}

impl LinearProjection {
    pub fn eval(&self, lam: &[f64; 3]) -> f64 {
        (0..3).map(|r| self.vertex_values[r] * lam[r]).sum()
    }
}

pub fn project_linear<G: Fn(Point2<f64>) -> f64>(geom: &TriGeom, g: G) -> LinearProjection {
    LinearProjection {
        vertex_values: geom.vertex_functionals(g),
    }
}

/// `π_enr[g] = Σ g(v_i) φ_i + Σ 𝓛̃_i(g) φ_{i+3}`, stored by its six
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichedProjection {
    pub coeffs: [f64; 6],
}

impl EnrichedProjection {
    pub fn eval(&self, basis: &ElementBasis, lam: &[f64; 3]) -> f64 {
        basis.values(lam).iter().zip(&self.coeffs).map(|(p, c)| p * c).sum()
    }
}

pub fn project_enriched<G: Fn(Point2<f64>) -> f64>(basis: &ElementBasis, g: G) -> EnrichedProjection {
    let geom = basis.geom();
    let v = geom.vertex_functionals(&g);
    let e = basis.edge_functionals(|lam| g(geom.point(lam)));
    EnrichedProjection {
        coeffs: [v[0], v[1], v[2], e[0], e[1], e[2]],
    }
}

/// Largest `|ε_enr - ε_lin - Σ_ℓ ⟨ε[λ̃], g_ℓ⟩ 𝓔_ℓ(g)|` over `samples`, with
/// `𝓔_ℓ(g) = ½ Σ_{i≠ℓ} g(v_i) - 𝓛̃_ℓ(g)`.
pub fn error_decomposition_check<G: Fn(Point2<f64>) -> f64>(basis: &ElementBasis, g: G, samples: &[[f64; 3]]) -> f64 {
    let geom = basis.geom();
    let lin = project_linear(geom, &g);
    let enr = project_enriched(basis, &g);
    let v = lin.vertex_values;
    let e: [f64; 3] = std::array::from_fn(|l| 0.5 * (v[next(l)] + v[prev(l)]) - enr.coeffs[l + 3]);
    let g_cols: [[f64; 3]; 3] = std::array::from_fn(|l| basis.g_column(l));
    samples
        .iter()
        .map(|lam| {
            let gx = g(geom.point(lam));
            let lhs = gx - enr.eval(basis, lam);
            let lt = basis.corrected_enrichment(lam);
            let rhs = gx - lin.eval(lam)
                + (0..3)
                    .map(|l| (0..3).map(|m| lt[m] * g_cols[l][m]).sum::<f64>() * e[l])
                    .sum::<f64>();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Barycentric lattice `(i/m, j/m, 1 - (i+j)/m)`, `(m+1)(m+2)/2` points.
pub fn lattice(m: usize) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity((m + 1) * (m + 2) / 2);
    for i in 0..=m {
        for j in 0..=(m - i) {
            let (a, b) = (i as f64 / m as f64, j as f64 / m as f64);
            pts.push([1.0 - a - b, a, b]);
        }
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationErrors {
    pub linf: f64,
    pub l2: f64,
}

/// Sampling density of the per-element lattice used for `L∞` errors.
pub const LINF_LATTICE: usize = 20;

/// Errors of the element-wise linear (`family = None`) or enriched
/// projection of `g` over a whole mesh: `L∞` on a lattice of each element,
/// `L²` with `quad`.
pub fn interpolation_errors<G>(
    mesh: &TriMesh,
    family: Option<&EnrichmentFamily>,
    g: G,
    edge_rule: &Rule1D,
    quad: &RuleTri,
) -> Result<InterpolationErrors>
where
    G: Fn(Point2<f64>) -> f64 + Sync,
{
    let pts = lattice(LINF_LATTICE);
    let parts = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let geom = mesh.geom(t)?;
            let err: Box<dyn Fn(&[f64; 3]) -> f64> = match family {
                None => {
                    let p = project_linear(&geom, &g);
                    let geom = geom.clone();
                    let g = &g;
                    Box::new(move |lam| g(geom.point(lam)) - p.eval(lam))
                }
                Some(f) => {
                    let basis = ElementBasis::new(f, &geom, edge_rule)?;
                    let p = project_enriched(&basis, &g);
                    let g = &g;
                    Box::new(move |lam| g(basis.geom().point(lam)) - p.eval(&basis, lam))
                }
            };
            let linf = pts.iter().map(|l| err(l).abs()).fold(0.0, f64::max);
            let l2 = quad.integrate(geom.area(), |l| err(l).powi(2));
            Ok((linf, l2))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolationErrors {
        linf: parts.iter().map(|p| p.0).fold(0.0, f64::max),
        l2: parts.iter().map(|p| p.1).sum::<f64>().sqrt(),
    })
}

/// Right-hand side of the element `L∞` bound
/// `(L/8)(1 + (3/2) max_i ‖⟨g_i, λ̃⟩‖_∞) h_E²`, the norm sampled on a lattice.
pub fn linf_bound(basis: &ElementBasis, lipschitz_grad: f64) -> f64 {
    let sup = lattice(LINF_LATTICE)
        .iter()
        .map(|lam| {
            let v = basis.values(lam);
            v[3].abs().max(v[4].abs()).max(v[5].abs())
        })
        .fold(0.0, f64::max);
    let h = basis.geom().diameter();
    lipschitz_grad / 8.0 * (1.0 + 1.5 * sup) * h * h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub k: f64,
    pub h_alpha_beta: f64,
    pub lipschitz_grad: f64,
    pub c: f64,
    pub domain_area: f64,
    pub weight: WeightParams,
    /// Whether `μ + α + β = 1`, the setting of the `L²` estimate.
    pub on_simplex: bool,
}

/// Samples per factor for `K`.
pub const K_SAMPLES: usize = 2001;
/// Gauss-Jacobi nodes for `H_{α,β}`.
pub const H_NODES: usize = 32;

/// `𝒞 = (L/8)(1 + 9(μ+1)K²H/2)√|Ω|`.
pub fn bound_constant(mu: f64, k: f64, h: f64, lipschitz_grad: f64, domain_area: f64) -> f64 {
    lipschitz_grad / 8.0 * (1.0 + 4.5 * (mu + 1.0) * k * k * h) * domain_area.sqrt()
}

fn edge_factors(family: &EnrichmentFamily) -> Result<(&WeightParams, &[Factor; 6])> {
    match &family.kind {
        FamilyKind::EdgeProduct { weight, factors } => Ok((weight, factors)),
        _ => Err(Error::invalid(format!(
            "bound constants are defined for edge-product families, not {}",
            family.id
        ))),
    }
}

fn split_power(f: &Factor) -> (f64, Option<&Factor>) {
    match f {
        Factor::Identity => (1.0, None),
        Factor::Power(p) => (*p, None),
        other => (0.0, Some(other)),
    }
}

/// `K = max_ℓ ‖f_ℓ‖_∞` on `[0, 1]`, sampled.
pub fn factor_bound(family: &EnrichmentFamily) -> Result<f64> {
    let (_, f) = edge_factors(family)?;
    Ok(f.iter().map(|f| f.sup_abs(K_SAMPLES)).fold(0.0, f64::max))
}

/// `H_{α,β} = max_i 1/|∫₀¹ t^α (1-t)^β f_{2i-1}(t) f_{2i}(1-t) dt|`.
pub fn h_constant(family: &EnrichmentFamily) -> Result<f64> {
    let (w, f) = edge_factors(family)?;
    let mut h: f64 = 0.0;
    for i in 0..3 {
        // Pure powers go into the Jacobi weight so the rule stays exact.
        let (pa, fa) = split_power(&f[2 * i]);
        let (pb, fb) = split_power(&f[2 * i + 1]);
        let rule = Rule1D::gauss_jacobi(H_NODES, w.alpha + pa, w.beta + pb)?;
        let integral = rule.integrate(|t| fa.map_or(1.0, |f| f.value(t)) * fb.map_or(1.0, |f| f.value(1.0 - t)));
        if integral == 0.0 || !integral.is_finite() {
            return Err(Error::invalid(format!(
                "H is infinite for {}: edge integral {integral}",
                family.id
            )));
        }
        h = h.max(1.0 / integral.abs());
    }
    Ok(h)
}

/// `sup ‖∇²g‖₂` over an `n × n` grid of `[0,1]²`, from central differences of
/// the gradient.
pub fn lipschitz_grad<G: Fn(Point2<f64>) -> Vector2<f64>>(grad: G, n: usize) -> f64 {
    let d = 1e-5;
    let n = n.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = Point2::new(i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let gx = (grad(p + Vector2::new(d, 0.0)) - grad(p - Vector2::new(d, 0.0))) / (2.0 * d);
            let gy = (grad(p + Vector2::new(0.0, d)) - grad(p - Vector2::new(0.0, d))) / (2.0 * d);
            let j = Matrix2::from_columns(&[gx, gy]);
            let h = (j + j.transpose()) * 0.5;
            let ev = h.symmetric_eigenvalues();
            worst = worst.max(ev[0].abs().max(ev[1].abs()));
        }
    }
    worst
}

pub fn bound_constants<G: Fn(Point2<f64>) -> Vector2<f64>>(
    family: &EnrichmentFamily,
    grad_g: G,
    domain_area: f64,
) -> Result<BoundConstants> {
    let (w, _) = edge_factors(family)?;
    let k = factor_bound(family)?;
    let h = h_constant(family)?;
    let l = lipschitz_grad(grad_g, 101);
    Ok(BoundConstants {
        k,
        h_alpha_beta: h,
        lipschitz_grad: l,
        c: bound_constant(w.mu, k, h, l, domain_area),
        domain_area,
        weight: *w,
        on_simplex: (w.mu + w.alpha + w.beta - 1.0).abs() < 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub alpha1: f64,
    pub beta1: f64,
    pub step: f64,
    /// `(μ, α, β)` minimizing `𝒞` on the grid (first in scan order on ties).
    pub argmin: (f64, f64, f64),
    pub c_min: f64,
    /// `𝒞` at `(0, 1, 0)` and `(0, 0, 1)`.
    pub c_010: f64,
    pub c_001: f64,
    pub grid_points: usize,
    /// Whether the grid argmin agrees with the predicted optimum.
    pub verdict: bool,
}

/// `𝒞_{μ,α,β}` for `E15(α₁, β₁)` with `L = |Ω| = 1`, using `K = 1` and
/// `H = 1/B(α+α₁+1, β+β₁+1)`.
pub fn e15_constant(mu: f64, alpha: f64, beta: f64, alpha1: f64, beta1: f64) -> f64 {
    let h = (-ln_beta(alpha + alpha1 + 1.0, beta + beta1 + 1.0)).exp();
    bound_constant(mu, 1.0, h, 1.0, 1.0)
}

/// Brute-force minimization of `𝒞` for `E15` over `μ + α + β = 1`,
/// `μ, α, β ≥ 0`, on a grid of spacing `step`.
pub fn optimize_parameters(alpha1: f64, beta1: f64, step: f64) -> Result<OptimizeReport> {
    if !(alpha1 >= 0.0 && beta1 >= 0.0) {
        return Err(Error::invalid("alpha1 and beta1 must be >= 0"));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::invalid(format!("grid step must lie in (0, 0.5], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    if ((n as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("grid step {step} must divide 1")));
    }
    let mut best = (f64::INFINITY, (0.0, 0.0, 0.0));
    let mut count = 0;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let mu = i as f64 / n as f64;
            let alpha = j as f64 / n as f64;
            let beta = (n - i - j) as f64 / n as f64;
            let c = e15_constant(mu, alpha, beta, alpha1, beta1);
            count += 1;
            if c < best.0 {
                best = (c, (mu, alpha, beta));
            }
        }
    }
    let c_010 = e15_constant(0.0, 1.0, 0.0, alpha1, beta1);
    let c_001 = e15_constant(0.0, 0.0, 1.0, alpha1, beta1);
    let tie = (c_010 - c_001).abs() <= 1e-10 * c_010.max(c_001);
    // With α₁ = β₁ the two endpoints tie, and so does (1, 0, 0):
    // 2/B(a+1, a+1) = 1/B(a+2, a+1).
    let verdict = if alpha1 == beta1 {
        tie && c_010 - best.0 <= 1e-10 * best.0
    } else if alpha1 > beta1 {
        best.1 == (0.0, 1.0, 0.0)
    } else {
        best.1 == (0.0, 0.0, 1.0)
    };
    Ok(OptimizeReport {
        alpha1,
        beta1,
        step,
        argmin: best.1,
        c_min: best.0,
        c_010,
        c_001,
        grid_points: count,
        verdict,
    })
}

/// `B(α+1, β+1)` along `μ = 0`, `α + β = 1`, sampled at `step`: pairs
/// `(α, value)`.
pub fn quasi_optimal_scan(step: f64) -> Vec<(f64, f64)> {
    let n = (1.0 / step).round().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            let a = i as f64 / n as f64;
            (a, ln_beta(a + 1.0, 2.0 - a).exp())
        })
        .collect()
}
