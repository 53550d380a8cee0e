//! Global finite element spaces on a [`TriMesh`]: DOF numbering with
//! homogeneous Dirichlet elimination, Galerkin assembly for `-Δu = f`,
//! linear solves and spectral condition numbers.

use nalgebra::{DMatrix, DVector, Point2, SymmetricEigen, Vector2};
use rayon::prelude::*;

use crate::barycentric::TriGeom;
use crate::enrichment::{ElementBasis, EnrichmentFamily};
use crate::mesh::TriMesh;
use crate::quadrature::{Rule1D, RuleTri, DEFAULT_EDGE_NODES, DEFAULT_TRIANGLE_DEGREE};
use crate::sparse::{lanczos, norm, pcg, CsrMatrix};
use crate::{Error, Result};

/// Largest system handled by dense Cholesky and dense eigensolves.
pub const DENSE_LIMIT: usize = 2000;

/// Relative residual of the CG solves inside inverse Lanczos.
pub const INNER_CG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Linear,
    Enriched,
}

/// Interior vertices are numbered first, in vertex order, then interior
/// edges in edge order. Boundary entities carry no DOF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub kind: ElementKind,
    pub vertex_dof: Vec<Option<usize>>,
    pub edge_dof: Vec<Option<usize>>,
    pub n_dofs: usize,
}

impl DofMap {
    pub fn new(mesh: &TriMesh, kind: ElementKind) -> Self {
        let mut n = 0;
        let mut number = |boundary: bool| {
            (!boundary).then(|| {
                n += 1;
                n - 1
            })
        };
        let vertex_dof: Vec<_> = mesh.boundary_vertex().iter().map(|&b| number(b)).collect();
        let edge_dof: Vec<_> = match kind {
            ElementKind::Linear => vec![None; mesh.n_edges()],
            ElementKind::Enriched => mesh.boundary_edge().iter().map(|&b| number(b)).collect(),
        };
        Self {
            kind,
            vertex_dof,
            edge_dof,
            n_dofs: n,
        }
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.vertex_dof.iter().flatten().count()
    }
}

pub fn build_dof_map(mesh: &TriMesh, kind: ElementKind) -> DofMap {
    DofMap::new(mesh, kind)
}

#[derive(Debug, Clone)]
enum LocalBasis {
    Linear(TriGeom),
    Enriched(Box<ElementBasis>),
}

impl LocalBasis {
    fn geom(&self) -> &TriGeom {
        match self {
            LocalBasis::Linear(g) => g,
            LocalBasis::Enriched(b) => b.geom(),
        }
    }
}

/// Local shape functions of every element with their global DOFs.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: TriMesh,
    dofs: DofMap,
    family: Option<EnrichmentFamily>,
    bases: Vec<LocalBasis>,
    local_dofs: Vec<[Option<usize>; 6]>,
    quad: RuleTri,
}

impl FeSpace {
    pub fn linear(mesh: &TriMesh, quad: RuleTri) -> Result<Self> {
        Self::build(mesh, None, &Rule1D::gauss_legendre(DEFAULT_EDGE_NODES)?, quad)
    }

    /// Enriched space. The family must be [`conforming`](EnrichmentFamily::conforming)
    /// so that element bases glue continuously across edges.
    pub fn enriched(mesh: &TriMesh, family: &EnrichmentFamily, edge_rule: &Rule1D, quad: RuleTri) -> Result<Self> {
        if !family.conforming() {
            return Err(Error::invalid(format!(
                "family {} is not edge-localized and vertex-vanishing with equal edge traces; \
                 it cannot build a global space",
                family.id
            )));
        }
        Self::build(mesh, Some(family), edge_rule, quad)
    }

    /// Linear space with the default interior rule, or enriched with the
    /// default edge and interior rules.
    pub fn with_defaults(mesh: &TriMesh, family: Option<&EnrichmentFamily>) -> Result<Self> {
        let quad = RuleTri::new(DEFAULT_TRIANGLE_DEGREE)?;
        match family {
            None => Self::linear(mesh, quad),
            Some(f) => Self::enriched(mesh, f, &Rule1D::gauss_legendre(DEFAULT_EDGE_NODES)?, quad),
        }
    }

    fn build(mesh: &TriMesh, family: Option<&EnrichmentFamily>, edge_rule: &Rule1D, quad: RuleTri) -> Result<Self> {
        if quad.degree() < 2 {
            return Err(Error::Quadrature(format!("interior rule degree {} < 2", quad.degree())));
        }
        let kind = if family.is_some() {
            ElementKind::Enriched
        } else {
            ElementKind::Linear
        };
        let dofs = DofMap::new(mesh, kind);
        let bases = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| {
                let geom = mesh.geom(t)?;
                match family {
                    None => Ok(LocalBasis::Linear(geom)),
                    Some(f) => ElementBasis::new(f, &geom, edge_rule)
                        .map(|b| LocalBasis::Enriched(Box::new(b)))
                        .map_err(|e| match e {
                            Error::NotAdmissible { family, ratio, .. } => Error::NotAdmissible {
                                family,
                                element: Some(t),
                                ratio,
                            },
                            other => other.at_stage(format!("element {t}")),
                        }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let local_dofs = mesh
            .triangles()
            .iter()
            .zip(mesh.tri_edges())
            .map(|(tri, te)| {
                let mut d = [None; 6];
                for k in 0..3 {
                    d[k] = dofs.vertex_dof[tri[k]];
                    d[k + 3] = dofs.edge_dof[te[k]];
                }
                d
            })
            .collect();
        Ok(Self {
            mesh: mesh.clone(),
            dofs,
            family: family.cloned(),
            bases,
            local_dofs,
            quad,
        })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn kind(&self) -> ElementKind {
        self.dofs.kind
    }

    pub fn family(&self) -> Option<&EnrichmentFamily> {
        self.family.as_ref()
    }

    pub fn quadrature(&self) -> &RuleTri {
        &self.quad
    }

    pub fn geom(&self, t: usize) -> &TriGeom {
        self.bases[t].geom()
    }

    pub fn element_basis(&self, t: usize) -> Option<&ElementBasis> {
        match &self.bases[t] {
            LocalBasis::Enriched(b) => Some(b),
            LocalBasis::Linear(_) => None,
        }
    }

    /// Global DOF of each local shape function; `None` when eliminated or
    /// absent.
    pub fn local_dofs(&self, t: usize) -> &[Option<usize>; 6] {
        &self.local_dofs[t]
    }

    fn n_local(&self) -> usize {
        match self.kind() {
            ElementKind::Linear => 3,
            ElementKind::Enriched => 6,
        }
    }

    /// Local shape function values; entries past `n_local` are zero.
    pub fn shape_values(&self, t: usize, lam: &[f64; 3]) -> [f64; 6] {
        match &self.bases[t] {
            LocalBasis::Linear(_) => [lam[0], lam[1], lam[2], 0.0, 0.0, 0.0],
            LocalBasis::Enriched(b) => b.values(lam),
        }
    }

    pub fn shape_gradients(&self, t: usize, lam: &[f64; 3]) -> Result<[Vector2<f64>; 6]> {
        match &self.bases[t] {
            LocalBasis::Linear(g) => {
                let gl = g.grad_lambda();
                Ok([
                    gl[0],
                    gl[1],
                    gl[2],
                    Vector2::zeros(),
                    Vector2::zeros(),
                    Vector2::zeros(),
                ])
            }
            LocalBasis::Enriched(b) => b.gradients(lam),
        }
    }

    /// `u_h` at barycentric `lam` of element `t`.
    pub fn eval(&self, t: usize, lam: &[f64; 3], coeffs: &[f64]) -> f64 {
        let v = self.shape_values(t, lam);
        self.local_dofs[t]
            .iter()
            .zip(v)
            .filter_map(|(d, v)| d.map(|d| coeffs[d] * v))
            .sum()
    }

    pub fn eval_grad(&self, t: usize, lam: &[f64; 3], coeffs: &[f64]) -> Result<Vector2<f64>> {
        let g = self.shape_gradients(t, lam)?;
        Ok(self.local_dofs[t]
            .iter()
            .zip(g)
            .filter_map(|(d, g)| d.map(|d| g * coeffs[d]))
            .sum())
    }

    /// Local stiffness `∫_E ∇φ_i·∇φ_j` by the interior rule.
    pub fn local_stiffness(&self, t: usize) -> Result<DMatrix<f64>> {
        let n = self.n_local();
        let area = self.geom(t).area();
        let mut k = DMatrix::zeros(n, n);
        for (p, &w) in self.quad.points().iter().zip(self.quad.weights()) {
            let g = self.shape_gradients(t, p)?;
            let wa = w * area;
            for i in 0..n {
                for j in i..n {
                    k[(i, j)] += wa * g[i].dot(&g[j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                k[(i, j)] = k[(j, i)];
            }
        }
        Ok(k)
    }

    /// Local load `∫_E f φ_i`.
    pub fn local_load<F: Fn(Point2<f64>) -> f64>(&self, t: usize, f: &F) -> [f64; 6] {
        let geom = self.geom(t);
        let area = geom.area();
        let mut out = [0.0; 6];
        for (p, &w) in self.quad.points().iter().zip(self.quad.weights()) {
            let fv = w * area * f(geom.point(p));
            for (o, v) in out.iter_mut().zip(self.shape_values(t, p)) {
                *o += fv * v;
            }
        }
        out
    }

    pub fn assemble_stiffness(&self) -> Result<CsrMatrix> {
        let n = self.n_local();
        let locals = (0..self.mesh.n_triangles())
            .into_par_iter()
            .map(|t| self.local_stiffness(t).map_err(|e| e.at_stage(format!("element {t}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut trip = Vec::with_capacity(locals.len() * n * n);
        for (t, k) in locals.iter().enumerate() {
            let d = &self.local_dofs[t];
            for i in 0..n {
                let Some(gi) = d[i] else { continue };
                for j in 0..n {
                    if let Some(gj) = d[j] {
                        trip.push((gi, gj, k[(i, j)]));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.n_dofs(), self.n_dofs(), &trip)
    }

    pub fn assemble_load<F: Fn(Point2<f64>) -> f64 + Sync>(&self, f: &F) -> Vec<f64> {
        let locals: Vec<[f64; 6]> = (0..self.mesh.n_triangles())
            .into_par_iter()
            .map(|t| self.local_load(t, f))
            .collect();
        let mut rhs = vec![0.0; self.n_dofs()];
        for (t, l) in locals.iter().enumerate() {
            for (d, v) in self.local_dofs[t].iter().zip(l) {
                if let Some(d) = d {
                    rhs[*d] += v;
                }
            }
        }
        rhs
    }

    pub fn assemble<F: Fn(Point2<f64>) -> f64 + Sync>(&self, f: &F) -> Result<SparseSystem> {
        let matrix = self.assemble_stiffness()?;
        let rhs = self.assemble_load(f);
        Ok(SparseSystem::new(matrix, rhs))
    }

    /// Coefficients of the interpolant: `g` at interior vertices and, for
    /// enriched spaces, the edge averages on interior edges.
    pub fn interpolate<G: Fn(Point2<f64>) -> f64>(&self, g: G, edge_rule: &Rule1D) -> Vec<f64> {
        let mut c = vec![0.0; self.n_dofs()];
        for (v, d) in self.dofs.vertex_dof.iter().enumerate() {
            if let Some(d) = d {
                c[*d] = g(self.mesh.vertices()[v]);
            }
        }
        for (e, d) in self.dofs.edge_dof.iter().enumerate() {
            if let Some(d) = d {
                let [a, b] = self.mesh.edges()[e].vertices.map(|v| self.mesh.vertices()[v]);
                c[*d] = edge_rule.integrate(|t| g(Point2::from(a.coords * (1.0 - t) + b.coords * t)));
            }
        }
        c
    }

    /// `(Σ_E ∫_E |∇u - ∇u_h|²)^{1/2}`.
    pub fn energy_error<G: Fn(Point2<f64>) -> Vector2<f64> + Sync>(&self, coeffs: &[f64], grad_u: &G) -> Result<f64> {
        let parts = (0..self.mesh.n_triangles())
            .into_par_iter()
            .map(|t| {
                let geom = self.geom(t);
                let mut s = 0.0;
                for (p, &w) in self.quad.points().iter().zip(self.quad.weights()) {
                    let d = grad_u(geom.point(p)) - self.eval_grad(t, p, coeffs)?;
                    s += w * d.norm_squared();
                }
                Ok(s * geom.area())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(parts.iter().sum::<f64>().sqrt())
    }

    /// `(Σ_E ∫_E |u - u_h|²)^{1/2}`.
    pub fn l2_error<G: Fn(Point2<f64>) -> f64 + Sync>(&self, coeffs: &[f64], u: &G) -> f64 {
        let parts: Vec<f64> = (0..self.mesh.n_triangles())
            .into_par_iter()
            .map(|t| {
                let geom = self.geom(t);
                let s: f64 = self
                    .quad
                    .points()
                    .iter()
                    .zip(self.quad.weights())
                    .map(|(p, &w)| w * (u(geom.point(p)) - self.eval(t, p, coeffs)).powi(2))
                    .sum();
                s * geom.area()
            })
            .collect();
        parts.iter().sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Dense Cholesky up to [`DENSE_LIMIT`] unknowns, CG beyond.
    #[default]
    Auto,
    Cg,
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub method: SolveMethod,
    /// CG iterations; 0 for the dense path.
    pub iterations: usize,
    /// `‖b - Kx‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Stiffness matrix and load vector on the free DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub symmetric: bool,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Self {
        let symmetric = matrix.symmetry_defect() <= 1e-12 * matrix.max_abs();
        Self { matrix, rhs, symmetric }
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    pub fn with_rhs(&self, rhs: Vec<f64>) -> Self {
        Self {
            matrix: self.matrix.clone(),
            rhs,
            symmetric: self.symmetric,
        }
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        let kx = self.matrix.mul_vec(x);
        let r: Vec<f64> = self.rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
        let b = norm(&self.rhs);
        if b == 0.0 {
            norm(&r)
        } else {
            norm(&r) / b
        }
    }

    pub fn solve(&self, tol: f64) -> Result<Solution> {
        self.solve_with(SolveMethod::Auto, tol)
    }

    pub fn solve_with(&self, method: SolveMethod, tol: f64) -> Result<Solution> {
        let n = self.n();
        if n == 0 {
            return Ok(Solution {
                x: Vec::new(),
                method,
                iterations: 0,
                relative_residual: 0.0,
            });
        }
        let dense = match method {
            SolveMethod::Auto => n <= DENSE_LIMIT,
            SolveMethod::Dense => true,
            SolveMethod::Cg => false,
        };
        if dense {
            let chol = self
                .matrix
                .to_dense()
                .cholesky()
                .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
            let x: Vec<f64> = chol
                .solve(&DVector::from_column_slice(&self.rhs))
                .iter()
                .copied()
                .collect();
            let relative_residual = self.residual(&x);
            Ok(Solution {
                x,
                method: SolveMethod::Dense,
                iterations: 0,
                relative_residual,
            })
        } else {
            let out = pcg(&self.matrix, &self.rhs, tol, 10 * n)?;
            Ok(Solution {
                x: out.x,
                method: SolveMethod::Cg,
                iterations: out.iterations,
                relative_residual: out.relative_residual,
            })
        }
    }

    /// Smallest Ritz value of a 20-step Lanczos run; positive for SPD
    /// systems.
    pub fn smallest_ritz(&self) -> Result<f64> {
        let out = lanczos(
            self.n(),
            |x, y| {
                self.matrix.mul_vec_into(x, y);
                Ok(())
            },
            20,
            0.0,
        )?;
        Ok(out.ritz[0])
    }

    /// 2-norm condition number `λ_max / λ_min`: dense eigenvalues up to
    /// [`DENSE_LIMIT`] unknowns, Lanczos beyond.
    pub fn condition_number(&self) -> Result<f64> {
        let n = self.n();
        if n == 0 {
            return Err(Error::invalid("condition number of an empty system"));
        }
        if n > DENSE_LIMIT {
            return self.condition_number_lanczos(1e-6);
        }
        let ev = SymmetricEigen::new(self.matrix.to_dense()).eigenvalues;
        ratio(ev.min(), ev.max())
    }

    /// `λ_max` by Lanczos on `K`, `λ_min` by Lanczos on `K⁻¹` with CG
    /// solves to [`INNER_CG_TOL`]; both stop at relative Ritz residual `tol`.
    pub fn condition_number_lanczos(&self, tol: f64) -> Result<f64> {
        let n = self.n();
        let top = lanczos(
            n,
            |x, y| {
                self.matrix.mul_vec_into(x, y);
                Ok(())
            },
            600,
            tol,
        )?;
        if !top.converged {
            return Err(Error::NotConverged {
                iterations: top.steps,
                residual: f64::NAN,
            });
        }
        let inv = lanczos(
            n,
            |x, y| {
                let s = pcg(&self.matrix, x, INNER_CG_TOL, 10 * n)?;
                y.copy_from_slice(&s.x);
                Ok(())
            },
            300,
            tol,
        )?;
        if !inv.converged {
            return Err(Error::NotConverged {
                iterations: inv.steps,
                residual: f64::NAN,
            });
        }
        ratio(1.0 / inv.ritz.last().unwrap(), *top.ritz.last().unwrap())
    }
}

fn ratio(lmin: f64, lmax: f64) -> Result<f64> {
    if !(lmin > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {lmin:e}")));
    }
    Ok(lmax / lmin)
}
