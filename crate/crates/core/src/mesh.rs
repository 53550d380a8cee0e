//! Triangulations of the unit square: Friedrichs-Keller construction, red
//! refinement, edge connectivity and shape-regularity metrics.

use std::io::{BufRead, Write};

use nalgebra::Point2;

use crate::barycentric::{cross, next, prev, TriGeom};
use crate::{Error, Result};

/// Undirected edge stored from the lower to the higher vertex index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// One or two adjacent triangles, ascending.
    pub triangles: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point2<f64>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// `tri_edges[t][k]` is the edge opposite local vertex `k` of triangle `t`.
    tri_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshMetrics {
    pub h: f64,
    pub h_e: Vec<f64>,
    /// Inscribed-circle diameter `2|E| / s`, `s` the semiperimeter.
    pub rho_e: Vec<f64>,
    pub regularity_ratio: f64,
}

impl TriMesh {
    /// Builds connectivity for an arbitrary triangle list. Triangles must be
    /// counter-clockwise and every edge may be shared by at most two of them.
    pub fn new(vertices: Vec<Point2<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::with_level(vertices, triangles, 0)
    }

    fn with_level(vertices: Vec<Point2<f64>>, triangles: Vec<[usize; 3]>, level: usize) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::MalformedMesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::MalformedMesh(format!("triangle {t} repeats a vertex")));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let det = cross(b - a, c - a);
            if !(det > 0.0) {
                return Err(Error::DegenerateTriangle {
                    index: t,
                    area: 0.5 * det,
                });
            }
        }

        let mut half: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[next(k)], tri[prev(k)]);
                half.push((a.min(b), a.max(b), t, k));
            }
        }
        half.sort_unstable();

        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (lo, hi, t, k) in half {
            match edges.last_mut() {
                Some(e) if e.vertices == [lo, hi] => {
                    if e.triangles.len() == 2 {
                        return Err(Error::MalformedMesh(format!(
                            "edge ({lo}, {hi}) has more than two triangles"
                        )));
                    }
                    e.triangles.push(t);
                }
                _ => edges.push(Edge {
                    vertices: [lo, hi],
                    triangles: vec![t],
                }),
            }
            tri_edges[t][k] = edges.len() - 1;
        }

        let boundary_edge: Vec<bool> = edges.iter().map(|e| e.triangles.len() == 1).collect();
        let mut boundary_vertex = vec![false; nv];
        for (e, &b) in edges.iter().zip(&boundary_edge) {
            if b {
                boundary_vertex[e.vertices[0]] = true;
                boundary_vertex[e.vertices[1]] = true;
            }
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            boundary_vertex,
            boundary_edge,
            level,
        })
    }

    /// `n × n` squares on `[0,1]²`, each split along its bottom-left to
    /// top-right diagonal. Vertices are numbered row-major from the origin.
    pub fn friedrichs_keller(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("friedrichs_keller needs n >= 1".into()));
        }
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for row in 0..=n {
            for col in 0..=n {
                vertices.push(Point2::new(col as f64 / n as f64, row as f64 / n as f64));
            }
        }
        let id = |row: usize, col: usize| row * (n + 1) + col;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for row in 0..n {
            for col in 0..n {
                let (v00, v10) = (id(row, col), id(row, col + 1));
                let (v01, v11) = (id(row + 1, col), id(row + 1, col + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::new(vertices, triangles)
    }

    /// Red refinement: every triangle is split into four through its edge
    /// midpoints. Parent vertices keep their indices; the midpoint of edge
    /// `e` gets index `n_vertices + e`.
    pub fn refine_uniform(&self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| {
            let [a, b] = e.vertices.map(|v| self.vertices[v]);
            Point2::from((a.coords + b.coords) * 0.5)
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (tri, te) in self.triangles.iter().zip(&self.tri_edges) {
            let [a, b, c] = *tri;
            // Edge opposite vertex k joins the other two.
            let m_bc = nv + te[0];
            let m_ca = nv + te[1];
            let m_ab = nv + te[2];
            triangles.push([a, m_ab, m_ca]);
            triangles.push([m_ab, b, m_bc]);
            triangles.push([m_ca, m_bc, c]);
            triangles.push([m_bc, m_ca, m_ab]);
        }
        Self::with_level(vertices, triangles, self.level + 1).expect("red refinement of a valid mesh is valid")
    }

    /// Applies [`refine_uniform`](Self::refine_uniform) `levels` times.
    pub fn refined(&self, levels: usize) -> Self {
        let mut m = self.clone();
        for _ in 0..levels {
            m = m.refine_uniform();
        }
        m
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tri_edges(&self) -> &[[usize; 3]] {
        &self.tri_edges
    }

    pub fn boundary_vertex(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn boundary_edge(&self) -> &[bool] {
        &self.boundary_edge
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Geometry of triangle `t` carrying global vertex ids.
    pub fn geom(&self, t: usize) -> Result<TriGeom> {
        let tri = self.triangles[t];
        TriGeom::with_ids(tri.map(|v| self.vertices[v]), tri).map_err(|e| match e {
            Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { index: t, area },
            other => other,
        })
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|v| self.vertices[v]);
                0.5 * cross(b - a, c - a)
            })
            .sum()
    }

    pub fn metrics(&self) -> Result<MeshMetrics> {
        let mut h_e = Vec::with_capacity(self.triangles.len());
        let mut rho_e = Vec::with_capacity(self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| self.vertices[v]);
            let area = 0.5 * cross(b - a, c - a);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            let l = [(b - c).norm(), (c - a).norm(), (a - b).norm()];
            let s = 0.5 * (l[0] + l[1] + l[2]);
            h_e.push(l[0].max(l[1]).max(l[2]));
            rho_e.push(2.0 * area / s);
        }
        let h = h_e.iter().copied().fold(0.0, f64::max);
        let regularity_ratio = h_e.iter().zip(&rho_e).map(|(h, r)| h / r).fold(0.0, f64::max);
        Ok(MeshMetrics {
            h,
            h_e,
            rho_e,
            regularity_ratio,
        })
    }

    /// Writes `V E T`, one `x y` line per vertex and one `a b c` line per
    /// triangle.
    pub fn write_off<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.n_vertices(), self.n_edges(), self.n_triangles())?;
        for p in &self.vertices {
            writeln!(w, "{:.16e} {:.16e}", p.x, p.y)?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read_off<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .map(|l| l.map_err(Error::from))
            .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#')));
        let bad = |what: &str| Error::MalformedMesh(what.to_string());
        let header = lines.next().ok_or_else(|| bad("empty input"))??;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("header must be `V E T`"))?;
        let [nv, ne, nt] = counts[..] else {
            return Err(bad("header must be `V E T`"));
        };
        let mut vertices = Vec::with_capacity(nv);
        for i in 0..nv {
            let line = lines.next().ok_or_else(|| bad("missing vertex line"))??;
            let xy: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::MalformedMesh(format!("vertex {i}: bad coordinate")))?;
            if xy.len() != 2 {
                return Err(Error::MalformedMesh(format!("vertex {i}: expected two coordinates")));
            }
            vertices.push(Point2::new(xy[0], xy[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for i in 0..nt {
            let line = lines.next().ok_or_else(|| bad("missing triangle line"))??;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::MalformedMesh(format!("triangle {i}: bad index")))?;
            let [a, b, c] = idx[..] else {
                return Err(Error::MalformedMesh(format!("triangle {i}: expected three indices")));
            };
            triangles.push([a, b, c]);
        }
        let mesh = Self::new(vertices, triangles)?;
        if mesh.n_edges() != ne {
            return Err(Error::MalformedMesh(format!(
                "header declares {ne} edges, connectivity has {}",
                mesh.n_edges()
            )));
        }
        Ok(mesh)
    }
}
