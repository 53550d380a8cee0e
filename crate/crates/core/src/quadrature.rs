//! One-dimensional Gauss rules on `[0, 1]` and quadrature on triangles.
//!
//! All 1D rules live on the unit interval. A Gauss-Jacobi rule integrates
//! `∫₀¹ t^α (1-t)^β f(t) dt`, the weight being folded into the weights, so
//! `Σ wᵢ = B(α+1, β+1)`. Gauss-Legendre is the `α = β = 0` case.
//!
//! Triangle rules are expressed in barycentric coordinates with weights that
//! sum to one; multiply by the element area to integrate over a triangle.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::beta::ln_beta;

use crate::{Error, Result};

/// Largest Gauss-Legendre rule that can be requested.
pub const MAX_LEGENDRE_NODES: usize = 64;

/// Largest Gauss-Jacobi rule that can be requested.
pub const MAX_JACOBI_NODES: usize = 256;

/// Exactness degrees accepted by [`RuleTri::new`].
pub const TRIANGLE_DEGREES: [usize; 6] = [2, 5, 8, 11, 14, 20];

/// Default exactness degree for element integrals.
pub const DEFAULT_TRIANGLE_DEGREE: usize = 14;

/// Default node count for edge functionals.
pub const DEFAULT_EDGE_NODES: usize = 16;

/// A Gauss rule on `[0, 1]` for the weight `t^α (1-t)^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
    beta: f64,
}

impl Rule1D {
    /// Gauss-Legendre rule with `k` nodes mapped to `[0, 1]`.
    pub fn gauss_legendre(k: usize) -> Result<Self> {
        if !(1..=MAX_LEGENDRE_NODES).contains(&k) {
            return Err(Error::Quadrature(format!(
                "Gauss-Legendre node count {k} outside 1..={MAX_LEGENDRE_NODES}"
            )));
        }
        let mut nodes = vec![0.0; k];
        let mut weights = vec![0.0; k];
        // Roots of P_k by Newton from Chebyshev-like guesses; the rule is
        // symmetric so only half of the roots are computed.
        let m = k.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(k, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(k, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // x is the i-th largest root on [-1, 1]
            nodes[k - 1 - i] = 0.5 * (1.0 + x);
            nodes[i] = 0.5 * (1.0 - x);
            weights[k - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        Ok(Self {
            nodes,
            weights,
            alpha: 0.0,
            beta: 0.0,
        })
    }

    /// Gauss-Jacobi rule with `k` nodes for the weight `t^α (1-t)^β` on `[0, 1]`.
    ///
    /// Nodes come from the Golub-Welsch eigenproblem of the Jacobi matrix and
    /// are polished by Newton steps on the orthonormal recurrence; weights are
    /// the Christoffel numbers of the polished nodes.
    pub fn gauss_jacobi(k: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Quadrature(format!(
                "Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
            )));
        }
        if !(1..=MAX_JACOBI_NODES).contains(&k) {
            return Err(Error::Quadrature(format!(
                "Gauss-Jacobi node count {k} outside 1..={MAX_JACOBI_NODES}"
            )));
        }
        // On [-1, 1] the weight is (1-x)^a (1+x)^b with t = (1+x)/2.
        let (a, b) = (beta, alpha);
        let rec = JacobiRecurrence::new(k, a, b);

        let mut jm = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            jm[(i, i)] = rec.diag[i];
            if i + 1 < k {
                let s = rec.offdiag_sq[i + 1].sqrt();
                jm[(i, i + 1)] = s;
                jm[(i + 1, i)] = s;
            }
        }
        let mut xs: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
        xs.sort_by(|p, q| p.total_cmp(q));

        let mut nodes = Vec::with_capacity(k);
        let mut weights = Vec::with_capacity(k);
        let scale = 2f64.powf(-(a + b + 1.0));
        for x0 in xs {
            let mut x = x0;
            for _ in 0..3 {
                let (q, dq, _) = rec.eval(x);
                if dq == 0.0 {
                    break;
                }
                let step = q / dq;
                if !step.is_finite() {
                    break;
                }
                let xn = x - step;
                if (xn - x0).abs() > 1e-6 || xn <= -1.0 || xn >= 1.0 {
                    break;
                }
                x = xn;
            }
            let (_, _, christoffel) = rec.eval(x);
            nodes.push(0.5 * (1.0 + x));
            weights.push(scale / christoffel);
        }
        Ok(Self {
            nodes,
            weights,
            alpha,
            beta,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(α, β)` of the weight absorbed into the weights.
    pub fn jacobi_exponents(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(tᵢ)`, i.e. `∫₀¹ t^α (1-t)^β f(t) dt` up to quadrature error.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Legendre polynomial `P_k(x)` and its derivative.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if k == 0 {
        return (1.0, 0.0);
    }
    for n in 2..=k {
        let nf = n as f64;
        let p2 = ((2.0 * nf - 1.0) * x * p1 - (nf - 1.0) * p0) / nf;
        p0 = p1;
        p1 = p2;
    }
    let kf = k as f64;
    let d = kf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Three-term recurrence of the monic Jacobi polynomials for the weight
/// `(1-x)^a (1+x)^b` on `[-1, 1]`.
struct JacobiRecurrence {
    k: usize,
    diag: Vec<f64>,
    /// `offdiag_sq[n]` is the coefficient `b_n` for `n ≥ 1`; entry 0 holds `μ₀`.
    offdiag_sq: Vec<f64>,
}

impl JacobiRecurrence {
    fn new(k: usize, a: f64, b: f64) -> Self {
        let ab = a + b;
        let mut diag = Vec::with_capacity(k + 1);
        let mut offdiag_sq = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let nf = n as f64;
            let s = 2.0 * nf + ab;
            let d = if n == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            diag.push(d);
            let o = match n {
                0 => (ab + 1.0) * std::f64::consts::LN_2 + ln_beta(a + 1.0, b + 1.0),
                1 => 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab)),
                _ => 4.0 * nf * (nf + a) * (nf + b) * (nf + ab) / (s * s * (s + 1.0) * (s - 1.0)),
            };
            offdiag_sq.push(if n == 0 { o.exp() } else { o });
        }
        Self { k, diag, offdiag_sq }
    }

    /// Orthonormal `q_k(x)`, its derivative and `Σ_{j<k} q_j(x)²`.
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let mu0 = self.offdiag_sq[0];
        let mut q_prev = 0.0;
        let mut dq_prev = 0.0;
        let mut q = 1.0 / mu0.sqrt();
        let mut dq = 0.0;
        let mut sum = 0.0;
        let mut sb_prev = 0.0;
        for n in 0..self.k {
            sum += q * q;
            let sb = self.offdiag_sq[n + 1].sqrt();
            let q_next = ((x - self.diag[n]) * q - sb_prev * q_prev) / sb;
            let dq_next = (q + (x - self.diag[n]) * dq - sb_prev * dq_prev) / sb;
            q_prev = q;
            dq_prev = dq;
            q = q_next;
            dq = dq_next;
            sb_prev = sb;
        }
        (q, dq, sum)
    }
}

/// Quadrature rule on a triangle in barycentric coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTri {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl RuleTri {
    /// Rule exact for polynomials of total degree `degree`.
    ///
    /// Degrees 2 and 5 use the classical symmetric 3- and 7-point rules; the
    /// higher degrees use a collapsed (Duffy) product of Gauss-Jacobi and
    /// Gauss-Legendre rules, which has positive weights.
    pub fn new(degree: usize) -> Result<Self> {
        if !TRIANGLE_DEGREES.contains(&degree) {
            return Err(Error::Quadrature(format!(
                "unsupported triangle rule degree {degree}; expected one of {TRIANGLE_DEGREES:?}"
            )));
        }
        match degree {
            2 => Ok(Self::strang_fix_3()),
            5 => Ok(Self::radon_7()),
            _ => Self::collapsed(degree),
        }
    }

    fn strang_fix_3() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    fn radon_7() -> Self {
        let s15 = 15f64.sqrt();
        let a = (6.0 - s15) / 21.0;
        let b = (6.0 + s15) / 21.0;
        let wa = (155.0 - s15) / 1200.0;
        let wb = (155.0 + s15) / 1200.0;
        let third = 1.0 / 3.0;
        let mut points = vec![[third; 3]];
        let mut weights = vec![9.0 / 40.0];
        for (c, w) in [(a, wa), (b, wb)] {
            let o = 1.0 - 2.0 * c;
            points.extend([[o, c, c], [c, o, c], [c, c, o]]);
            weights.extend([w; 3]);
        }
        Self {
            points,
            weights,
            degree: 5,
        }
    }

    fn collapsed(degree: usize) -> Result<Self> {
        let k = (degree + 2) / 2;
        // x = s, y = (1-s) u; the Jacobian (1-s) is the Jacobi weight in s.
        let rs = Rule1D::gauss_jacobi(k, 0.0, 1.0)?;
        let ru = Rule1D::gauss_legendre(k)?;
        let mut points = Vec::with_capacity(k * k);
        let mut weights = Vec::with_capacity(k * k);
        for (&s, &ws) in rs.nodes().iter().zip(rs.weights()) {
            for (&u, &wu) in ru.nodes().iter().zip(ru.weights()) {
                let x = s;
                let y = (1.0 - s) * u;
                points.push([1.0 - x - y, x, y]);
                weights.push(2.0 * ws * wu);
            }
        }
        Ok(Self {
            points,
            weights,
            degree,
        })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `area · Σ wᵢ f(λᵢ)`.
    pub fn integrate<F: FnMut(&[f64; 3]) -> f64>(&self, area: f64, mut f: F) -> f64 {
        area * self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * f(p))
            .sum::<f64>()
    }
}
