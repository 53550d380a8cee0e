//! `enrfem` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use enrfem::enrichment::build_G;
use enrfem::fem::SolveMethod;
use enrfem::projection::{interpolation_errors, optimize_parameters};
use enrfem::quadrature::{DEFAULT_EDGE_NODES, DEFAULT_TRIANGLE_DEGREE};
use enrfem::study::{self, run_study, StudyConfig};
use enrfem::{
    BenchProblem, ElementBasis, EnrichmentFamily, FamilyId, FeSpace, Point2, Rule1D, RuleTri, TriGeom, TriMesh,
    WeightParams,
};

#[derive(Parser)]
#[command(
    name = "enrfem",
    version,
    about = "Enriched linear triangles for -Δu = f on the unit square"
)]
struct Cli {
    /// Degree of the triangle quadrature rule (2, 5, 8, 11, 14 or 20).
    #[arg(long, global = true, default_value_t = DEFAULT_TRIANGLE_DEGREE)]
    quad_degree: usize,
    /// Gauss-Legendre nodes for edge averages.
    #[arg(long, global = true, default_value_t = DEFAULT_EDGE_NODES)]
    edge_nodes: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a refined Friedrichs-Keller mesh in OFF format.
    Mesh {
        /// Squares per side of the level-0 mesh.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print G, its singular values and Kronecker residuals for one family.
    Check {
        #[command(flatten)]
        family: FamilyArgs,
        /// Seed for the random test triangle.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Element-wise interpolation errors of a benchmark solution per level.
    Project {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1)]
        problem: usize,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        base_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the E15 bound constant over the parameter simplex.
    Optimize {
        #[arg(long)]
        alpha1: f64,
        #[arg(long)]
        beta1: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Solve one benchmark problem and write the coefficients.
    Solve {
        #[arg(long, default_value_t = 1)]
        problem: usize,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 4)]
        base_n: usize,
        /// Use the plain linear element instead of the enriched one.
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Skip the condition number estimate.
        #[arg(long)]
        no_kappa: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study over problems, families and refinement levels.
    Study {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        problems: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "E10,E11,E12")]
        families: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        base_n: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        no_kappa: bool,
        /// CSV report; a gnuplot `.dat` file is written next to it.
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, default_value = "E10")]
    family: String,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// E15 exponent on the first edge factor.
    #[arg(long, default_value_t = 1.0)]
    alpha1: f64,
    /// E15 exponent on the second edge factor.
    #[arg(long, default_value_t = 1.0)]
    beta1: f64,
    /// Power used by E4 and E8.
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
}

impl FamilyArgs {
    fn build(&self) -> Result<EnrichmentFamily> {
        let id: FamilyId = self.family.parse()?;
        let w = WeightParams::new(self.mu, self.alpha, self.beta)?;
        Ok(match id {
            FamilyId::E15 => EnrichmentFamily::e15(w, self.alpha1, self.beta1)?,
            FamilyId::E4 => EnrichmentFamily::e4(self.exponent)?,
            FamilyId::E8 => EnrichmentFamily::e8(self.exponent)?,
            FamilyId::Custom => bail!("custom families are only available through the library"),
            other => EnrichmentFamily::preset(other, w)?,
        })
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let quad = RuleTri::new(cli.quad_degree)?;
    let edge = Rule1D::gauss_legendre(cli.edge_nodes)?;
    match cli.command {
        Command::Mesh { n, level, out } => {
            let mesh = TriMesh::friedrichs_keller(n)?.refined(level);
            let mut w = output(out.as_deref())?;
            mesh.write_off(&mut w)?;
            w.flush()?;
            let m = mesh.metrics()?;
            eprintln!(
                "vertices={} edges={} triangles={} h={:.6e} h/rho={:.6}",
                mesh.n_vertices(),
                mesh.n_edges(),
                mesh.n_triangles(),
                m.h,
                m.regularity_ratio
            );
        }
        Command::Check { family, seed } => check(&family.build()?, seed, &edge)?,
        Command::Project {
            family,
            problem,
            levels,
            base_n,
            out,
        } => {
            let fam = family.build()?;
            let prob = BenchProblem::get(problem)?;
            let mut w = output(out.as_deref())?;
            writeln!(w, "level,h,linf_lin,l2_lin,linf_enr,l2_enr")?;
            let mut mesh = TriMesh::friedrichs_keller(base_n)?;
            for level in 0..levels {
                if level > 0 {
                    mesh = mesh.refine_uniform();
                }
                let h = mesh.metrics()?.h;
                let lin = interpolation_errors(&mesh, None, |p| prob.u(p), &edge, &quad)?;
                let enr = interpolation_errors(&mesh, Some(&fam), |p| prob.u(p), &edge, &quad)?;
                writeln!(
                    w,
                    "{level},{h:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                    lin.linf, lin.l2, enr.linf, enr.l2
                )?;
            }
            w.flush()?;
        }
        Command::Optimize { alpha1, beta1, step } => {
            let r = optimize_parameters(alpha1, beta1, step)?;
            println!("grid_points={}", r.grid_points);
            println!("argmin mu={} alpha={} beta={}", r.argmin.0, r.argmin.1, r.argmin.2);
            println!("c_min={:.12e}", r.c_min);
            println!("c_010={:.12e}", r.c_010);
            println!("c_001={:.12e}", r.c_001);
            println!("verdict={}", if r.verdict { "pass" } else { "fail" });
        }
        Command::Solve {
            problem,
            family,
            level,
            base_n,
            linear,
            tol,
            no_kappa,
            out,
        } => {
            let prob = BenchProblem::get(problem)?;
            let mesh = TriMesh::friedrichs_keller(base_n)?.refined(level);
            let space = if linear {
                FeSpace::linear(&mesh, quad)?
            } else {
                FeSpace::enriched(&mesh, &family.build()?, &edge, quad)?
            };
            let (system, sol) = study::solve_problem(&space, &prob, SolveMethod::Auto, tol)?;
            let err = study::energy_error(&space, &sol.x, &prob)?;
            let kappa = if no_kappa || system.n() == 0 {
                f64::NAN
            } else {
                system.condition_number()?
            };
            let label = if linear {
                "linear".to_string()
            } else {
                family.family.to_ascii_uppercase()
            };
            let mut w = output(out.as_deref())?;
            writeln!(w, "# element={label} problem={problem} level={level}")?;
            writeln!(
                w,
                "# n_dofs={} energy_error={err:.9e} kappa={kappa:.9e}",
                space.n_dofs()
            )?;
            writeln!(
                w,
                "# iterations={} residual={:.3e}",
                sol.iterations, sol.relative_residual
            )?;
            writeln!(w, "dof,value")?;
            for (i, x) in sol.x.iter().enumerate() {
                writeln!(w, "{i},{x:.17e}")?;
            }
            w.flush()?;
            eprintln!("n_dofs={} energy_error={err:.6e} kappa={kappa:.6e}", space.n_dofs());
        }
        Command::Study {
            problems,
            families,
            mu,
            alpha,
            beta,
            levels,
            base_n,
            tol,
            no_kappa,
            out,
        } => {
            let cfg = StudyConfig {
                problems,
                families: families.iter().map(|f| f.parse()).collect::<enrfem::Result<_>>()?,
                weight: WeightParams::new(mu, alpha, beta)?,
                base_n,
                levels,
                quad_degree: cli.quad_degree,
                edge_nodes: cli.edge_nodes,
                solver_tol: tol,
                condition_numbers: !no_kappa,
                ..StudyConfig::default()
            };
            let report = run_study(&cfg)?;
            std::fs::write(&out, report.to_csv()).with_context(|| format!("writing {}", out.display()))?;
            let dat = out.with_extension("dat");
            std::fs::write(&dat, report.to_dat()).with_context(|| format!("writing {}", dat.display()))?;
            eprintln!("wrote {} and {}", out.display(), dat.display());
        }
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn random_triangle(seed: u64) -> Result<TriGeom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut p: Vec<Point2<f64>> = (0..3).map(|_| Point2::new(rng.random(), rng.random())).collect();
        let cross = (p[1] - p[0]).perp(&(p[2] - p[0]));
        if cross.abs() < 0.1 {
            continue;
        }
        if cross < 0.0 {
            p.swap(1, 2);
        }
        return Ok(TriGeom::with_ids([p[0], p[1], p[2]], [0, 1, 2])?);
    }
}

fn check(family: &EnrichmentFamily, seed: u64, edge: &Rule1D) -> Result<()> {
    for (name, geom) in [("reference", TriGeom::reference()), ("random", random_triangle(seed)?)] {
        let v = geom.vertices();
        println!(
            "[{name}] ({}, {}) ({}, {}) ({}, {})",
            v[0].x, v[0].y, v[1].x, v[1].y, v[2].x, v[2].y
        );
        let g = build_G(family, &geom, edge)?;
        for r in 0..3 {
            println!(
                "G[{r}] = {:+.12e} {:+.12e} {:+.12e}",
                g.g[(r, 0)],
                g.g[(r, 1)],
                g.g[(r, 2)]
            );
        }
        let s = g.singular_values;
        println!("singular values = {:.6e} {:.6e} {:.6e}", s[0], s[1], s[2]);
        if g.singular {
            println!("admissible = no");
            continue;
        }
        println!("admissible = yes");
        let basis = ElementBasis::new(family, &geom, edge)?;
        println!("kronecker residual = {:.3e}", basis.kronecker_residual(edge));
    }
    Ok(())
}
