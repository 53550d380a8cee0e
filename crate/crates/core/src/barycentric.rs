//! Triangle geometry, barycentric coordinates and the vertex functionals of
//! the linear Lagrange element.
//!
//! Local indices are 0-based: vertex `i` is opposite edge `i`, and edge `i`
//! runs between vertices [`next(i)`] and [`prev(i)`]. The cyclic convention
//! `λ₄ = λ₁, λ₅ = λ₂` of 1-based notation is `next`/`prev` here.

use nalgebra::{Point2, Vector2};

use crate::{Error, Result};

/// `(i + 1) mod 3`.
#[inline]
pub const fn next(i: usize) -> usize {
    (i + 1) % 3
}

/// `(i + 2) mod 3`.
#[inline]
pub const fn prev(i: usize) -> usize {
    (i + 2) % 3
}

#[inline]
pub(crate) fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// How an edge is parametrized by `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `t ↦ t v_{i+1} + (1-t) v_{i+2}`.
    Local,
    /// `t = 0` at the endpoint with the lower global vertex id.
    Canonical,
}

/// Per-edge flags telling whether the canonical orientation of local edge `i`
/// is the reverse of its local orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeFlips(pub [bool; 3]);

impl EdgeFlips {
    pub const LOCAL: EdgeFlips = EdgeFlips([false; 3]);

    #[inline]
    pub fn flipped(&self, edge: usize) -> bool {
        self.0[edge]
    }
}

/// A non-degenerate, counter-clockwise triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriGeom {
    vertices: [Point2<f64>; 3],
    ids: Option<[usize; 3]>,
    /// `(v1 - v3) × (v2 - v3)`, twice the signed area.
    det: f64,
    grad: [Vector2<f64>; 3],
    edge_lengths: [f64; 3],
}

impl TriGeom {
    /// Standalone triangle. Without global ids its canonical edge
    /// orientation is the local one.
    pub fn new(v1: Point2<f64>, v2: Point2<f64>, v3: Point2<f64>) -> Result<Self> {
        Self::build([v1, v2, v3], None)
    }

    /// Triangle whose vertices carry global ids, used to decide canonical
    /// edge orientation.
    pub fn with_ids(vertices: [Point2<f64>; 3], ids: [usize; 3]) -> Result<Self> {
        Self::build(vertices, Some(ids))
    }

    fn build(vertices: [Point2<f64>; 3], ids: Option<[usize; 3]>) -> Result<Self> {
        let [v1, v2, v3] = vertices;
        let det = cross(v1 - v3, v2 - v3);
        let scale = [(v1 - v2).norm(), (v2 - v3).norm(), (v3 - v1).norm()]
            .into_iter()
            .fold(0.0f64, f64::max);
        if !det.is_finite() || det <= 1e-14 * scale * scale {
            return Err(Error::DegenerateTriangle {
                index: 0,
                area: 0.5 * det,
            });
        }
        let perp = |d: Vector2<f64>| Vector2::new(d.y, -d.x) / det;
        let grad = [perp(v2 - v3), perp(v3 - v1), perp(v1 - v2)];
        let edge_lengths = [(v2 - v3).norm(), (v1 - v3).norm(), (v1 - v2).norm()];
        Ok(Self {
            vertices,
            ids,
            det,
            grad,
            edge_lengths,
        })
    }

    /// The reference triangle `(0,0), (1,0), (0,1)`.
    pub fn reference() -> Self {
        Self::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0))
            .expect("reference triangle is valid")
    }

    pub fn vertices(&self) -> &[Point2<f64>; 3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point2<f64> {
        self.vertices[i]
    }

    pub fn ids(&self) -> Option<[usize; 3]> {
        self.ids
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    /// Constant gradients `∇λᵢ`.
    pub fn grad_lambda(&self) -> &[Vector2<f64>; 3] {
        &self.grad
    }

    /// `|eᵢ|`, the length of the edge opposite vertex `i`.
    pub fn edge_lengths(&self) -> &[f64; 3] {
        &self.edge_lengths
    }

    /// Longest edge.
    pub fn diameter(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Point2<f64> {
        Point2::from((self.vertices[0].coords + self.vertices[1].coords + self.vertices[2].coords) / 3.0)
    }

    /// Barycentric coordinates of `x` by the cross-product formulas. Points
    /// outside the triangle give coordinates outside `[0, 1]`.
    pub fn lambda(&self, x: Point2<f64>) -> [f64; 3] {
        let [v1, v2, v3] = self.vertices;
        [
            cross(x - v3, v2 - v3) / self.det,
            cross(x - v3, v3 - v1) / self.det,
            cross(x - v1, v1 - v2) / self.det,
        ]
    }

    /// Cartesian point with barycentric coordinates `lam`.
    pub fn point(&self, lam: &[f64; 3]) -> Point2<f64> {
        let [v1, v2, v3] = self.vertices;
        Point2::from(lam[0] * v1.coords + lam[1] * v2.coords + lam[2] * v3.coords)
    }

    /// Whether local edge `i` is traversed against its canonical orientation.
    pub fn flip(&self, i: usize) -> bool {
        // Local orientation has t = 0 at v_{i+2}; canonical wants t = 0 at the lower id.
        self.ids.is_some_and(|ids| ids[prev(i)] > ids[next(i)])
    }

    pub fn canonical_flips(&self) -> EdgeFlips {
        EdgeFlips([self.flip(0), self.flip(1), self.flip(2)])
    }

    /// Point on edge `i` at parameter `t`.
    pub fn edge_param(&self, i: usize, t: f64, orientation: Orientation) -> Point2<f64> {
        self.point(&self.edge_bary(i, t, self.flips_for(orientation).flipped(i)))
    }

    /// Barycentric coordinates of the point at parameter `t` on edge `i`,
    /// exact on the edge (`λᵢ = 0`).
    pub fn edge_bary(&self, i: usize, t: f64, flipped: bool) -> [f64; 3] {
        let mut lam = [0.0; 3];
        if flipped {
            lam[next(i)] = 1.0 - t;
            lam[prev(i)] = t;
        } else {
            lam[next(i)] = t;
            lam[prev(i)] = 1.0 - t;
        }
        lam
    }

    pub fn flips_for(&self, orientation: Orientation) -> EdgeFlips {
        match orientation {
            Orientation::Local => EdgeFlips::LOCAL,
            Orientation::Canonical => self.canonical_flips(),
        }
    }

    /// `(g(v₁), g(v₂), g(v₃))`, the degrees of freedom of the linear element.
    pub fn vertex_functionals<G: Fn(Point2<f64>) -> f64>(&self, g: G) -> [f64; 3] {
        [g(self.vertices[0]), g(self.vertices[1]), g(self.vertices[2])]
    }
}
