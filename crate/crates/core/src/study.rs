//! Benchmark Poisson problems on the unit square and the convergence-study
//! driver: energy and `L²` errors, EOCs and condition numbers over a
//! sequence of refined Friedrichs-Keller meshes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::{Point2, Vector2};

use crate::enrichment::{EnrichmentFamily, FamilyId, WeightParams};
use crate::fem::{FeSpace, Solution, SolveMethod, SparseSystem};
use crate::mesh::TriMesh;
use crate::quadrature::{Rule1D, RuleTri, DEFAULT_EDGE_NODES, DEFAULT_TRIANGLE_DEGREE};
use crate::{Error, Result};

/// `-Δu = f` on `[0,1]²` with `u = 0` on the boundary.
#[derive(Debug, Clone, Copy)]
pub struct BenchProblem {
    pub id: usize,
    pub description: &'static str,
    u: fn(Point2<f64>) -> f64,
    grad_u: fn(Point2<f64>) -> Vector2<f64>,
    f: fn(Point2<f64>) -> f64,
}

fn ex(s: f64) -> f64 {
    // e^{s(1-s)}, written e^{-s(s-1)} where the source terms use it.
    (-s * (s - 1.0)).exp()
}

fn u1(p: Point2<f64>) -> f64 {
    (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin()
}
fn grad_u1(p: Point2<f64>) -> Vector2<f64> {
    let (sx, cx) = (2.0 * PI * p.x).sin_cos();
    let (sy, cy) = (2.0 * PI * p.y).sin_cos();
    Vector2::new(2.0 * PI * cx * sy, 2.0 * PI * sx * cy)
}
fn f1(p: Point2<f64>) -> f64 {
    8.0 * PI * PI * (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin()
}

fn u2(p: Point2<f64>) -> f64 {
    ((p.x * (1.0 - p.x)).exp() - 1.0) * (2.0 * PI * p.y).sin()
}
fn grad_u2(p: Point2<f64>) -> Vector2<f64> {
    let e = (p.x * (1.0 - p.x)).exp();
    let (sy, cy) = (2.0 * PI * p.y).sin_cos();
    Vector2::new(e * (1.0 - 2.0 * p.x) * sy, (e - 1.0) * 2.0 * PI * cy)
}
fn f2(p: Point2<f64>) -> f64 {
    let (x, s) = (p.x, (2.0 * PI * p.y).sin());
    2.0 * ex(x) * s + 4.0 * PI * PI * s * (ex(x) - 1.0) - ex(x) * s * (2.0 * x - 1.0).powi(2)
}

fn u3(p: Point2<f64>) -> f64 {
    ((p.x * (1.0 - p.x)).exp() - 1.0) * ((p.y * (1.0 - p.y)).exp() - 1.0)
}
fn grad_u3(p: Point2<f64>) -> Vector2<f64> {
    let (ex_, ey) = ((p.x * (1.0 - p.x)).exp(), (p.y * (1.0 - p.y)).exp());
    Vector2::new(
        ex_ * (1.0 - 2.0 * p.x) * (ey - 1.0),
        ey * (1.0 - 2.0 * p.y) * (ex_ - 1.0),
    )
}
fn f3(p: Point2<f64>) -> f64 {
    let (x, y) = (p.x, p.y);
    2.0 * ex(x) * (ex(y) - 1.0) + 2.0 * ex(y) * (ex(x) - 1.0)
        - ex(x) * (2.0 * x - 1.0).powi(2) * (ex(y) - 1.0)
        - ex(y) * (2.0 * y - 1.0).powi(2) * (ex(x) - 1.0)
}

fn u4(p: Point2<f64>) -> f64 {
    p.x * p.y * (1.0 - p.x) * (1.0 - p.y)
}
fn grad_u4(p: Point2<f64>) -> Vector2<f64> {
    Vector2::new(
        (1.0 - 2.0 * p.x) * p.y * (1.0 - p.y),
        (1.0 - 2.0 * p.y) * p.x * (1.0 - p.x),
    )
}
fn f4(p: Point2<f64>) -> f64 {
    -2.0 * p.x * (p.x - 1.0) - 2.0 * p.y * (p.y - 1.0)
}

const PROBLEMS: [BenchProblem; 4] = [
    BenchProblem {
        id: 1,
        description: "u = sin(2πx) sin(2πy)",
        u: u1,
        grad_u: grad_u1,
        f: f1,
    },
    BenchProblem {
        id: 2,
        description: "u = (exp(x(1-x)) - 1) sin(2πy)",
        u: u2,
        grad_u: grad_u2,
        f: f2,
    },
    BenchProblem {
        id: 3,
        description: "u = (exp(x(1-x)) - 1)(exp(y(1-y)) - 1)",
        u: u3,
        grad_u: grad_u3,
        f: f3,
    },
    BenchProblem {
        id: 4,
        description: "u = xy(1-x)(1-y)",
        u: u4,
        grad_u: grad_u4,
        f: f4,
    },
];

impl BenchProblem {
    pub fn get(id: usize) -> Result<Self> {
        PROBLEMS
            .get(id.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::invalid(format!("problem id must be 1..=4, got {id}")))
    }

    pub fn all() -> [BenchProblem; 4] {
        PROBLEMS
    }

    pub fn u(&self, p: Point2<f64>) -> f64 {
        (self.u)(p)
    }

    pub fn grad_u(&self, p: Point2<f64>) -> Vector2<f64> {
        (self.grad_u)(p)
    }

    pub fn source(&self, p: Point2<f64>) -> f64 {
        (self.f)(p)
    }
}

pub fn energy_error(space: &FeSpace, coeffs: &[f64], problem: &BenchProblem) -> Result<f64> {
    space.energy_error(coeffs, &|p| problem.grad_u(p))
}

pub fn l2_error(space: &FeSpace, coeffs: &[f64], problem: &BenchProblem) -> f64 {
    space.l2_error(coeffs, &|p| problem.u(p))
}

/// Assembles and solves one problem on `space`.
pub fn solve_problem(
    space: &FeSpace,
    problem: &BenchProblem,
    method: SolveMethod,
    tol: f64,
) -> Result<(SparseSystem, Solution)> {
    let sys = space.assemble(&|p| problem.source(p))?;
    let sol = sys.solve_with(method, tol)?;
    Ok((sys, sol))
}

/// `log₂(e_prev / e)`, NaN unless both are positive.
pub fn eoc(prev: f64, cur: f64) -> f64 {
    if prev > 0.0 && cur > 0.0 {
        (prev / cur).log2()
    } else {
        f64::NAN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problems: Vec<usize>,
    pub families: Vec<FamilyId>,
    pub weight: WeightParams,
    /// Squares per side of the level-0 mesh.
    pub base_n: usize,
    /// Number of levels, starting at 0.
    pub levels: usize,
    pub quad_degree: usize,
    pub edge_nodes: usize,
    pub solver_tol: f64,
    pub method: SolveMethod,
    pub condition_numbers: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problems: vec![1, 2, 3, 4],
            families: vec![FamilyId::E10, FamilyId::E11, FamilyId::E12],
            weight: WeightParams::UNWEIGHTED,
            base_n: 4,
            levels: 5,
            quad_degree: DEFAULT_TRIANGLE_DEGREE,
            edge_nodes: DEFAULT_EDGE_NODES,
            solver_tol: 1e-12,
            method: SolveMethod::Auto,
            condition_numbers: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub problem: usize,
    pub level: usize,
    pub h: f64,
    pub dofs_lin: usize,
    pub dofs_enr: usize,
    pub err_lin: f64,
    /// One entry per configured family.
    pub err_enr: Vec<f64>,
    pub l2_lin: f64,
    pub l2_enr: Vec<f64>,
    pub eoc_lin: f64,
    pub eoc_enr: Vec<f64>,
    pub kappa_lin: f64,
    pub kappa_enr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    /// Seconds since the Unix epoch at completion.
    pub timestamp: u64,
}

struct Variant {
    space: FeSpace,
    system: SparseSystem,
    kappa: f64,
}

fn variant(mesh: &TriMesh, family: Option<&EnrichmentFamily>, cfg: &StudyConfig, edge: &Rule1D) -> Result<Variant> {
    let quad = RuleTri::new(cfg.quad_degree)?;
    let space = match family {
        None => FeSpace::linear(mesh, quad)?,
        Some(f) => FeSpace::enriched(mesh, f, edge, quad)?,
    };
    let matrix = space.assemble_stiffness()?;
    let system = SparseSystem::new(matrix, vec![0.0; space.n_dofs()]);
    let kappa = if cfg.condition_numbers && system.n() > 0 {
        system.condition_number()?
    } else {
        f64::NAN
    };
    Ok(Variant { space, system, kappa })
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.levels == 0 {
        return Err(Error::invalid("study needs at least one level"));
    }
    let problems = cfg
        .problems
        .iter()
        .map(|&p| BenchProblem::get(p))
        .collect::<Result<Vec<_>>>()?;
    let families = cfg
        .families
        .iter()
        .map(|&id| EnrichmentFamily::preset(id, cfg.weight))
        .collect::<Result<Vec<_>>>()?;
    let edge = Rule1D::gauss_legendre(cfg.edge_nodes)?;

    let mut mesh = TriMesh::friedrichs_keller(cfg.base_n)?;
    let mut rows: Vec<StudyRow> = Vec::new();
    for level in 0..cfg.levels {
        if level > 0 {
            mesh = mesh.refine_uniform();
        }
        let h = mesh.metrics()?.h;
        let lin = variant(&mesh, None, cfg, &edge).map_err(|e| e.at_stage(format!("level {level}, linear")))?;
        let enr = families
            .iter()
            .map(|f| variant(&mesh, Some(f), cfg, &edge).map_err(|e| e.at_stage(format!("level {level}, {}", f.id))))
            .collect::<Result<Vec<_>>>()?;

        for p in &problems {
            let run = |v: &Variant, label: &str| -> Result<(f64, f64)> {
                let sys = v.system.with_rhs(v.space.assemble_load(&|x| p.source(x)));
                let sol = sys
                    .solve_with(cfg.method, cfg.solver_tol)
                    .map_err(|e| e.at_stage(format!("level {level}, {label}, problem {}", p.id)))?;
                Ok((energy_error(&v.space, &sol.x, p)?, l2_error(&v.space, &sol.x, p)))
            };
            let (err_lin, l2_lin) = run(&lin, "linear")?;
            let mut err_enr = Vec::new();
            let mut l2_enr = Vec::new();
            for (v, f) in enr.iter().zip(&families) {
                let (e, l) = run(v, f.id.as_str())?;
                err_enr.push(e);
                l2_enr.push(l);
            }
            let prev = rows.iter().rev().find(|r| r.problem == p.id && r.level + 1 == level);
            let eoc_lin = prev.map_or(f64::NAN, |r| eoc(r.err_lin, err_lin));
            let eoc_enr = (0..families.len())
                .map(|i| prev.map_or(f64::NAN, |r| eoc(r.err_enr[i], err_enr[i])))
                .collect();
            rows.push(StudyRow {
                problem: p.id,
                level,
                h,
                dofs_lin: lin.space.n_dofs(),
                dofs_enr: enr.first().map_or(0, |v| v.space.n_dofs()),
                err_lin,
                err_enr,
                l2_lin,
                l2_enr,
                eoc_lin,
                eoc_enr,
                kappa_lin: lin.kappa,
                kappa_enr: enr.iter().map(|v| v.kappa).collect(),
            });
        }
    }
    rows.sort_by_key(|r| (r.problem, r.level));
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        timestamp,
    })
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9e}")
    }
}

impl StudyReport {
    pub fn family_labels(&self) -> Vec<&'static str> {
        self.config.families.iter().map(|f| f.as_str()).collect()
    }

    pub fn header(&self) -> Vec<String> {
        let fams = self.family_labels();
        let mut h: Vec<String> = ["problem", "level", "h", "dofs_lin", "dofs_enr", "err_lin"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(fams.iter().map(|f| format!("err_{f}")));
        h.push("l2_lin".into());
        h.extend(fams.iter().map(|f| format!("l2_{f}")));
        h.push("eoc_lin".into());
        h.extend(fams.iter().map(|f| format!("eoc_{f}")));
        h.push("kappa_lin".into());
        h.extend(fams.iter().map(|f| format!("kappa_{f}")));
        h
    }

    pub fn rows_for(&self, problem: usize) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(move |r| r.problem == problem)
    }

    /// CSV with `# ` metadata lines; everything except the timestamp line is
    /// a function of the configuration.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "# meta families={}", self.family_labels().join(","));
        let _ = writeln!(
            s,
            "# meta mu={} alpha={} beta={}",
            c.weight.mu, c.weight.alpha, c.weight.beta
        );
        let _ = writeln!(
            s,
            "# meta base_n={} levels={} quad_degree={} edge_nodes={}",
            c.base_n, c.levels, c.quad_degree, c.edge_nodes
        );
        let _ = writeln!(s, "# meta solver={:?} tol={:e}", c.method, c.solver_tol);
        let _ = writeln!(
            s,
            "# meta kappa=2-norm condition number of the stiffness matrix on the free DOFs"
        );
        let _ = writeln!(
            s,
            "# meta err=energy seminorm, l2=L2 norm, eoc=log2 ratio of energy errors"
        );
        let _ = writeln!(s, "# meta timestamp={}", self.timestamp);
        let _ = writeln!(s, "{}", self.header().join(","));
        for r in &self.rows {
            let mut f: Vec<String> = vec![
                r.problem.to_string(),
                r.level.to_string(),
                num(r.h),
                r.dofs_lin.to_string(),
                r.dofs_enr.to_string(),
                num(r.err_lin),
            ];
            f.extend(r.err_enr.iter().map(|&x| num(x)));
            f.push(num(r.l2_lin));
            f.extend(r.l2_enr.iter().map(|&x| num(x)));
            f.push(num(r.eoc_lin));
            f.extend(r.eoc_enr.iter().map(|&x| num(x)));
            f.push(num(r.kappa_lin));
            f.extend(r.kappa_enr.iter().map(|&x| num(x)));
            let _ = writeln!(s, "{}", f.join(","));
        }
        s
    }

    /// Whitespace-separated blocks `h err_lin err_<family>...`, one per
    /// problem, separated by two blank lines.
    pub fn to_dat(&self) -> String {
        let mut s = String::new();
        let mut first = true;
        for &p in &self.config.problems {
            if !first {
                s.push_str("\n\n");
            }
            first = false;
            let _ = writeln!(s, "# problem {p}");
            let _ = writeln!(
                s,
                "# h err_lin {}",
                self.family_labels()
                    .iter()
                    .map(|f| format!("err_{f}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            for r in self.rows_for(p) {
                let mut f = vec![num(r.h), num(r.err_lin)];
                f.extend(r.err_enr.iter().map(|&x| num(x)));
                let _ = writeln!(s, "{}", f.join(" "));
            }
        }
        s
    }
}
