//! Weighted enrichment of the linear triangle: the weight `ω_{μ,α,β}`,
//! enrichment families, edge-average functionals, the admissibility matrix
//! `G` and the enriched basis `φ₁..φ₆`.
//!
//! Families are evaluated on barycentric triples. Each family reports values
//! `λ̃_k` and partial derivatives `∂λ̃_k/∂λ_m`; spatial gradients follow from
//! the constant `∇λ_m`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix3, Point2, Vector2};

use crate::barycentric::{next, prev, EdgeFlips, TriGeom};
use crate::quadrature::{Rule1D, DEFAULT_EDGE_NODES};
use crate::{Error, Result};

/// Singular-value ratio below which `G` is treated as singular. `G` is also
/// singular when `σ_max` is below this fraction of the largest sampled `|λ̃|`.
pub const KERNEL_THRESHOLD: f64 = 1e-12;

const VERTICES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// `s^p` with `0⁰ = 1`; tiny negative bases from round-off are clamped to 0.
#[inline]
fn pw(s: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return s;
    }
    let s = if s < 0.0 && s > -1e-12 { 0.0 } else { s };
    if p == 2.0 {
        s * s
    } else {
        s.powf(p)
    }
}

/// `d/ds s^p`; infinite at `s = 0` when `p < 1`.
#[inline]
fn dpw(s: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    if s <= 0.0 {
        return if p > 1.0 { 0.0 } else { f64::INFINITY };
    }
    p * s.powf(p - 1.0)
}

/// `d · c`, treating an infinite `d` against `c = 0` as the finite one-sided
/// limit 0.
#[inline]
fn chain(d: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        Ok(0.0)
    } else if d.is_finite() {
        Ok(d * c)
    } else {
        Err(Error::NonFiniteGradient(format!("derivative {d} against factor {c}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self::UNWEIGHTED
    }
}

impl WeightParams {
    /// `μ = α = β = 0`; `ω ≡ 3`.
    pub const UNWEIGHTED: WeightParams = WeightParams {
        mu: 0.0,
        alpha: 0.0,
        beta: 0.0,
    };

    pub fn new(mu: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be >= 0, got {mu}")));
        }
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha and beta must be > -1, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { mu, alpha, beta })
    }

    /// Whether element assembly can use this weight (`α, β ≥ 0`).
    pub fn assembly_ready(&self) -> bool {
        self.alpha >= 0.0 && self.beta >= 0.0
    }

    fn require_assembly(&self) -> Result<()> {
        if self.assembly_ready() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "element assembly needs alpha, beta >= 0, got ({}, {})",
                self.alpha, self.beta
            )))
        }
    }

    /// `Σ_j (1-λ_j)^μ λ_{j+1}^α λ_{j+2}^β`.
    pub fn value(&self, lam: &[f64; 3]) -> f64 {
        (0..3)
            .map(|j| pw(1.0 - lam[j], self.mu) * pw(lam[next(j)], self.alpha) * pw(lam[prev(j)], self.beta))
            .sum()
    }

    /// Value and partials `∂ω/∂λ_m`.
    pub fn jet(&self, lam: &[f64; 3]) -> Result<(f64, [f64; 3])> {
        let mut v = 0.0;
        let mut d = [0.0; 3];
        for j in 0..3 {
            let (b, c) = (next(j), prev(j));
            let fa = pw(1.0 - lam[j], self.mu);
            let fb = pw(lam[b], self.alpha);
            let fc = pw(lam[c], self.beta);
            v += fa * fb * fc;
            d[j] -= chain(dpw(1.0 - lam[j], self.mu), fb * fc)?;
            d[b] += chain(dpw(lam[b], self.alpha), fa * fc)?;
            d[c] += chain(dpw(lam[c], self.beta), fa * fb)?;
        }
        Ok((v, d))
    }
}

/// `ω_{μ,α,β}(x)` on a triangle.
pub fn weight(params: &WeightParams, geom: &TriGeom, x: Point2<f64>) -> f64 {
    params.value(&geom.lambda(x))
}

/// `∇ω_{μ,α,β}(x)`.
pub fn weight_gradient(params: &WeightParams, geom: &TriGeom, x: Point2<f64>) -> Result<Vector2<f64>> {
    let (_, d) = params.jet(&geom.lambda(x))?;
    Ok(combine(&d, geom.grad_lambda()))
}

#[inline]
fn combine(d: &[f64; 3], g: &[Vector2<f64>; 3]) -> Vector2<f64> {
    g[0] * d[0] + g[1] * d[1] + g[2] * d[2]
}

/// A scalar function on `[0, 1]` with its derivative.
#[derive(Clone)]
pub enum Factor {
    Identity,
    /// `1 - s`
    OneMinus,
    Sin,
    /// `cos s - 1`
    CosMinusOne,
    /// `eˢ - 1`
    ExpMinusOne,
    Exp,
    /// `e^{cs}`
    ExpScaled(f64),
    /// `ln(1 + s)`
    Log1p,
    /// `s^p`, `0⁰ = 1`
    Power(f64),
    Custom(Arc<CustomFactor>),
}

pub struct CustomFactor {
    pub name: String,
    pub value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub derivative: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Identity => write!(f, "s"),
            Factor::OneMinus => write!(f, "1-s"),
            Factor::Sin => write!(f, "sin(s)"),
            Factor::CosMinusOne => write!(f, "cos(s)-1"),
            Factor::ExpMinusOne => write!(f, "exp(s)-1"),
            Factor::Exp => write!(f, "exp(s)"),
            Factor::ExpScaled(c) => write!(f, "exp({c}s)"),
            Factor::Log1p => write!(f, "ln(1+s)"),
            Factor::Power(p) => write!(f, "s^{p}"),
            Factor::Custom(c) => write!(f, "{}", c.name),
        }
    }
}

impl Factor {
    pub fn custom(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Factor::Custom(Arc::new(CustomFactor {
            name: name.into(),
            value: Box::new(value),
            derivative: Box::new(derivative),
        }))
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Factor::Identity => s,
            Factor::OneMinus => 1.0 - s,
            Factor::Sin => s.sin(),
            Factor::CosMinusOne => s.cos() - 1.0,
            Factor::ExpMinusOne => s.exp_m1(),
            Factor::Exp => s.exp(),
            Factor::ExpScaled(c) => (c * s).exp(),
            Factor::Log1p => s.ln_1p(),
            Factor::Power(p) => pw(s, *p),
            Factor::Custom(c) => (c.value)(s),
        }
    }

    /// May be infinite for `Power(p)` with `p < 1` at `s = 0`.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Factor::Identity => 1.0,
            Factor::OneMinus => -1.0,
            Factor::Sin => s.cos(),
            Factor::CosMinusOne => -s.sin(),
            Factor::ExpMinusOne | Factor::Exp => s.exp(),
            Factor::ExpScaled(c) => c * (c * s).exp(),
            Factor::Log1p => 1.0 / (1.0 + s),
            Factor::Power(p) => dpw(s, *p),
            Factor::Custom(c) => (c.derivative)(s),
        }
    }

    /// `max |f|` over `n` equispaced samples of `[0, 1]`.
    pub fn sup_abs(&self, n: usize) -> f64 {
        let n = n.max(2);
        (0..n)
            .map(|i| self.value(i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    E3,
    E4,
    E8,
    E10,
    E11,
    E12,
    E13,
    E14,
    E15,
    W1,
    Custom,
}

impl FamilyId {
    pub const EDGE_FAMILIES: [FamilyId; 6] = [
        FamilyId::E10,
        FamilyId::E11,
        FamilyId::E12,
        FamilyId::E13,
        FamilyId::E14,
        FamilyId::E15,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyId::E3 => "E3",
            FamilyId::E4 => "E4",
            FamilyId::E8 => "E8",
            FamilyId::E10 => "E10",
            FamilyId::E11 => "E11",
            FamilyId::E12 => "E12",
            FamilyId::E13 => "E13",
            FamilyId::E14 => "E14",
            FamilyId::E15 => "E15",
            FamilyId::W1 => "W1",
            FamilyId::Custom => "CUSTOM",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s.trim().to_ascii_uppercase().as_str() {
            "E3" => FamilyId::E3,
            "E4" => FamilyId::E4,
            "E8" => FamilyId::E8,
            "E10" => FamilyId::E10,
            "E11" => FamilyId::E11,
            "E12" => FamilyId::E12,
            "E13" => FamilyId::E13,
            "E14" => FamilyId::E14,
            "E15" => FamilyId::E15,
            "W1" => FamilyId::W1,
            "CUSTOM" => FamilyId::Custom,
            _ => return Err(Error::InvalidArgument(format!("unknown family `{s}`"))),
        };
        Ok(id)
    }
}

#[derive(Debug, Clone)]
pub enum FamilyKind {
    /// `λ̃_k = ω f_{2k-1}(λ_{k+1}) f_{2k}(λ_{k+2})`; `factors[2k]`, `factors[2k+1]`
    /// pair up for 0-based `k`.
    EdgeProduct { weight: WeightParams, factors: [Factor; 6] },
    /// `λ̃_k = ω Π_ℓ f_ℓ(λ_k)`.
    WeightedVertex { weight: WeightParams, factors: Vec<Factor> },
    /// `λ̃_k = Π_ℓ f_ℓ(λ_k)`.
    VertexProduct { factors: Vec<Factor> },
    /// `λ̃_k = f_k(λ_k) Π_{m≠k} λ_m^{p_m - 1}`.
    Cofactor { factors: [Factor; 3], exponents: [f64; 3] },
}

/// Three enrichment functions on a generic triangle.
#[derive(Debug, Clone)]
pub struct EnrichmentFamily {
    pub id: FamilyId,
    pub kind: FamilyKind,
    /// Constant multiplier applied to every `λ̃_k`.
    pub scale: f64,
}

impl EnrichmentFamily {
    fn edge(id: FamilyId, weight: WeightParams, odd: Factor, even: Factor) -> Self {
        let factors = [odd.clone(), even.clone(), odd.clone(), even.clone(), odd, even];
        Self {
            id,
            kind: FamilyKind::EdgeProduct { weight, factors },
            scale: 1.0,
        }
    }

    /// `sin · sin`
    pub fn e10(weight: WeightParams) -> Self {
        Self::edge(FamilyId::E10, weight, Factor::Sin, Factor::Sin)
    }

    /// `(eˢ-1) · (eˢ-1)`
    pub fn e11(weight: WeightParams) -> Self {
        Self::edge(FamilyId::E11, weight, Factor::ExpMinusOne, Factor::ExpMinusOne)
    }

    /// `(eˢ-1) · sin`
    pub fn e12(weight: WeightParams) -> Self {
        Self::edge(FamilyId::E12, weight, Factor::ExpMinusOne, Factor::Sin)
    }

    /// `sin · (cos-1)`
    pub fn e13(weight: WeightParams) -> Self {
        Self::edge(FamilyId::E13, weight, Factor::Sin, Factor::CosMinusOne)
    }

    /// `ln(1+s) · s`
    pub fn e14(weight: WeightParams) -> Self {
        Self::edge(FamilyId::E14, weight, Factor::Log1p, Factor::Identity)
    }

    /// `s^{α₁} · s^{β₁}`
    pub fn e15(weight: WeightParams, alpha1: f64, beta1: f64) -> Result<Self> {
        if !(alpha1 >= 0.0 && beta1 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "E15 needs alpha1, beta1 >= 0, got ({alpha1}, {beta1})"
            )));
        }
        Ok(Self::edge(
            FamilyId::E15,
            weight,
            Factor::Power(alpha1),
            Factor::Power(beta1),
        ))
    }

    /// `ω λ_k (1 - λ_k)`
    pub fn w1(weight: WeightParams) -> Self {
        Self {
            id: FamilyId::W1,
            kind: FamilyKind::WeightedVertex {
                weight,
                factors: vec![Factor::Identity, Factor::OneMinus],
            },
            scale: 1.0,
        }
    }

    /// `e^{λ_k}`
    pub fn e3() -> Self {
        Self {
            id: FamilyId::E3,
            kind: FamilyKind::VertexProduct {
                factors: vec![Factor::Exp],
            },
            scale: 1.0,
        }
    }

    /// `λ_k^p`, `p > 1`
    pub fn e4(p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("E4 needs exponent > 1, got {p}")));
        }
        Ok(Self {
            id: FamilyId::E4,
            kind: FamilyKind::VertexProduct {
                factors: vec![Factor::Power(p)],
            },
            scale: 1.0,
        })
    }

    /// `e^{k λ_k} Π_{m≠k} λ_m^{p-1}` with 1-based `k`, `p > 1`
    pub fn e8(p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("E8 needs exponent > 1, got {p}")));
        }
        Ok(Self {
            id: FamilyId::E8,
            kind: FamilyKind::Cofactor {
                factors: [Factor::ExpScaled(1.0), Factor::ExpScaled(2.0), Factor::ExpScaled(3.0)],
                exponents: [p; 3],
            },
            scale: 1.0,
        })
    }

    /// Catalog entry with default extra parameters (`α₁ = β₁ = 1` for E15,
    /// exponent 2 for E4 and E8). E3, E4 and E8 ignore `weight`.
    pub fn preset(id: FamilyId, weight: WeightParams) -> Result<Self> {
        Ok(match id {
            FamilyId::E3 => Self::e3(),
            FamilyId::E4 => Self::e4(2.0)?,
            FamilyId::E8 => Self::e8(2.0)?,
            FamilyId::E10 => Self::e10(weight),
            FamilyId::E11 => Self::e11(weight),
            FamilyId::E12 => Self::e12(weight),
            FamilyId::E13 => Self::e13(weight),
            FamilyId::E14 => Self::e14(weight),
            FamilyId::E15 => Self::e15(weight, 1.0, 1.0)?,
            FamilyId::W1 => Self::w1(weight),
            FamilyId::Custom => return Err(Error::InvalidArgument("CUSTOM families are built from factors".into())),
        })
    }

    pub fn custom(kind: FamilyKind) -> Self {
        Self {
            id: FamilyId::Custom,
            kind,
            scale: 1.0,
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn weight(&self) -> Option<&WeightParams> {
        match &self.kind {
            FamilyKind::EdgeProduct { weight, .. } | FamilyKind::WeightedVertex { weight, .. } => Some(weight),
            _ => None,
        }
    }

    /// Checks the parameters needed to integrate `∇λ̃` over elements.
    pub fn validate_for_assembly(&self) -> Result<()> {
        if let Some(w) = self.weight() {
            w.require_assembly()?;
        }
        if let FamilyKind::Cofactor { exponents, .. } = &self.kind {
            if exponents.iter().any(|&p| !(p > 1.0)) {
                return Err(Error::InvalidArgument("cofactor exponents must be > 1".into()));
            }
        }
        if !(self.scale != 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "family scale must be nonzero, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// `(λ̃₁, λ̃₂, λ̃₃)` at barycentric `lam`. For edge-product families,
    /// `flips[k]` evaluates `λ̃_k` against the reversed orientation of edge `k`.
    pub fn values(&self, lam: &[f64; 3], flips: EdgeFlips) -> [f64; 3] {
        let c = self.scale;
        match &self.kind {
            FamilyKind::EdgeProduct { weight, factors } => std::array::from_fn(|k| {
                let l = oriented(lam, k, flips.flipped(k));
                c * weight.value(&l) * factors[2 * k].value(l[next(k)]) * factors[2 * k + 1].value(l[prev(k)])
            }),
            FamilyKind::WeightedVertex { weight, factors } => {
                let w = weight.value(lam);
                std::array::from_fn(|k| c * w * factors.iter().map(|f| f.value(lam[k])).product::<f64>())
            }
            FamilyKind::VertexProduct { factors } => {
                std::array::from_fn(|k| c * factors.iter().map(|f| f.value(lam[k])).product::<f64>())
            }
            FamilyKind::Cofactor { factors, exponents } => std::array::from_fn(|k| {
                c * factors[k].value(lam[k])
                    * pw(lam[next(k)], exponents[next(k)] - 1.0)
                    * pw(lam[prev(k)], exponents[prev(k)] - 1.0)
            }),
        }
    }

    /// Values and partials `d[k][m] = ∂λ̃_k/∂λ_m`.
    pub fn jet(&self, lam: &[f64; 3], flips: EdgeFlips) -> Result<([f64; 3], [[f64; 3]; 3])> {
        let mut v = [0.0; 3];
        let mut d = [[0.0; 3]; 3];
        match &self.kind {
            FamilyKind::EdgeProduct { weight, factors } => {
                for k in 0..3 {
                    let flip = flips.flipped(k);
                    let l = oriented(lam, k, flip);
                    let (a, b) = (next(k), prev(k));
                    let (w, dw) = weight.jet(&l)?;
                    let (f, g) = (&factors[2 * k], &factors[2 * k + 1]);
                    let (fv, gv) = (f.value(l[a]), g.value(l[b]));
                    v[k] = w * fv * gv;
                    let mut dk = [dw[0] * fv * gv, dw[1] * fv * gv, dw[2] * fv * gv];
                    dk[a] += chain(f.derivative(l[a]), w * gv)?;
                    dk[b] += chain(g.derivative(l[b]), w * fv)?;
                    if flip {
                        dk.swap(a, b);
                    }
                    d[k] = dk;
                }
            }
            FamilyKind::WeightedVertex { weight, factors } => {
                let (w, dw) = weight.jet(lam)?;
                for k in 0..3 {
                    let (p, dp) = product_jet(factors, lam[k])?;
                    v[k] = w * p;
                    d[k] = [dw[0] * p, dw[1] * p, dw[2] * p];
                    d[k][k] += w * dp;
                }
            }
            FamilyKind::VertexProduct { factors } => {
                for k in 0..3 {
                    let (p, dp) = product_jet(factors, lam[k])?;
                    v[k] = p;
                    d[k][k] = dp;
                }
            }
            FamilyKind::Cofactor { factors, exponents } => {
                for k in 0..3 {
                    let (a, b) = (next(k), prev(k));
                    let fv = factors[k].value(lam[k]);
                    let pa = pw(lam[a], exponents[a] - 1.0);
                    let pb = pw(lam[b], exponents[b] - 1.0);
                    v[k] = fv * pa * pb;
                    d[k][k] = chain(factors[k].derivative(lam[k]), pa * pb)?;
                    d[k][a] = chain(dpw(lam[a], exponents[a] - 1.0), fv * pb)?;
                    d[k][b] = chain(dpw(lam[b], exponents[b] - 1.0), fv * pa)?;
                }
            }
        }
        let c = self.scale;
        Ok((v.map(|x| c * x), d.map(|r| r.map(|x| c * x))))
    }

    /// Whether every `λ̃_k` vanishes at the three vertices, under either
    /// orientation of every edge.
    pub fn vanishes_at_vertices(&self) -> bool {
        [EdgeFlips::LOCAL, EdgeFlips([true; 3])]
            .iter()
            .all(|&fl| VERTICES.iter().all(|v| self.values(v, fl).iter().all(|&x| x == 0.0)))
    }

    /// Orientation used on `geom`: canonical for edge-localized families,
    /// whose traces are glued across elements, local otherwise. Flipping a
    /// family that is not edge-localized can make two `λ̃_k` coincide.
    pub fn flips_on(&self, geom: &TriGeom) -> EdgeFlips {
        if self.edge_localized() {
            geom.canonical_flips()
        } else {
            EdgeFlips::LOCAL
        }
    }

    /// Whether `λ̃_k` vanishes on the two edges other than `e_k`.
    pub fn edge_localized(&self) -> bool {
        match &self.kind {
            FamilyKind::EdgeProduct { factors, .. } => factors.iter().all(|f| f.value(0.0) == 0.0),
            _ => false,
        }
    }

    /// Edge trace of `λ̃_k` on `e_k` at local parameter `t`.
    pub fn edge_trace(&self, k: usize, t: f64, flipped: bool) -> f64 {
        let mut lam = [0.0; 3];
        lam[next(k)] = t;
        lam[prev(k)] = 1.0 - t;
        let mut fl = EdgeFlips::LOCAL;
        fl.0[k] = flipped;
        self.values(&lam, fl)[k]
    }

    /// Whether every edge trace is invariant under `t ↔ 1 - t`.
    pub fn trace_symmetric(&self) -> bool {
        (0..3).all(|k| {
            (0..=16).all(|i| {
                let t = i as f64 / 16.0;
                let (a, b) = (self.edge_trace(k, t, false), self.edge_trace(k, 1.0 - t, false));
                (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1e-300)
            })
        })
    }

    /// Edge-localized, vertex-vanishing, and with the same trace on all
    /// three local edges: the conditions under which canonically oriented
    /// elements glue into an `H¹`-conforming space.
    pub fn conforming(&self) -> bool {
        self.vanishes_at_vertices()
            && self.edge_localized()
            && (0..=16).all(|i| {
                let t = i as f64 / 16.0;
                let r = self.edge_trace(0, t, false);
                (1..3).all(|k| (self.edge_trace(k, t, false) - r).abs() <= 1e-14 * r.abs().max(1.0))
            })
    }
}

/// `lam` with entries `k+1` and `k+2` exchanged when `flip` is set.
#[inline]
fn oriented(lam: &[f64; 3], k: usize, flip: bool) -> [f64; 3] {
    let mut l = *lam;
    if flip {
        l.swap(next(k), prev(k));
    }
    l
}

fn product_jet(factors: &[Factor], s: f64) -> Result<(f64, f64)> {
    let vals: Vec<f64> = factors.iter().map(|f| f.value(s)).collect();
    let p = vals.iter().product();
    let mut dp = 0.0;
    for (i, f) in factors.iter().enumerate() {
        let rest: f64 = vals
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v)
            .product();
        dp += chain(f.derivative(s), rest)?;
    }
    Ok((p, dp))
}

/// Enrichment values at `x`, canonically oriented by the triangle's ids.
pub fn enrichment_values(family: &EnrichmentFamily, geom: &TriGeom, x: Point2<f64>) -> [f64; 3] {
    family.values(&geom.lambda(x), family.flips_on(geom))
}

pub fn enrichment_gradients(family: &EnrichmentFamily, geom: &TriGeom, x: Point2<f64>) -> Result<[Vector2<f64>; 3]> {
    let (_, d) = family.jet(&geom.lambda(x), family.flips_on(geom))?;
    let g = geom.grad_lambda();
    Ok(d.map(|row| combine(&row, g)))
}

/// `(1/|e_j|) ∫_{e_j} g`, computed as `∫₀¹ g(param(t)) dt` with `rule`.
/// A Jacobi rule yields the correspondingly weighted average.
pub fn edge_average<G: Fn(Point2<f64>) -> f64>(geom: &TriGeom, j: usize, g: G, rule: &Rule1D) -> f64 {
    edge_average_bary(j, |lam| g(geom.point(lam)), rule)
}

/// [`edge_average`] for a function of the barycentric triple.
pub fn edge_average_bary<G: Fn(&[f64; 3]) -> f64>(j: usize, g: G, rule: &Rule1D) -> f64 {
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&t, &w)| {
            let mut lam = [0.0; 3];
            lam[next(j)] = t;
            lam[prev(j)] = 1.0 - t;
            w * g(&lam)
        })
        .sum()
}

/// `G` with its singular values and kernel verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    /// Rows are functionals `𝓛̃_j`, columns are functions `λ̃_i`.
    pub g: Matrix3<f64>,
    /// Descending.
    pub singular_values: [f64; 3],
    pub singular: bool,
    /// Whether the vertex-vanishing form `G_{ji} = 𝓛̃_j(λ̃_i)` was used.
    pub vanishing: bool,
}

impl GMatrix {
    pub fn ratio(&self) -> f64 {
        if self.singular_values[0] == 0.0 {
            0.0
        } else {
            self.singular_values[2] / self.singular_values[0]
        }
    }

    pub fn condition(&self) -> f64 {
        1.0 / self.ratio()
    }
}

#[allow(non_snake_case)]
pub fn build_G(family: &EnrichmentFamily, geom: &TriGeom, rule: &Rule1D) -> Result<GMatrix> {
    build_g_oriented(family, family.flips_on(geom), rule)
}

fn vertex_values(family: &EnrichmentFamily, flips: EdgeFlips) -> [[f64; 3]; 3] {
    // [r][m] = λ̃_m(v_r)
    VERTICES.map(|v| family.values(&v, flips))
}

fn build_g_oriented(family: &EnrichmentFamily, flips: EdgeFlips, rule: &Rule1D) -> Result<GMatrix> {
    if let Some(w) = family.weight() {
        w.require_assembly()?;
    }
    let vanishing = family.vanishes_at_vertices();
    let vv = vertex_values(family, flips);
    let mut g: Matrix3<f64> = Matrix3::zeros();
    // Magnitude of the data entering G; a G made of round-off is singular.
    let mut mag = vv.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for j in 0..3 {
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let mut lam = [0.0; 3];
            lam[next(j)] = t;
            lam[prev(j)] = 1.0 - t;
            let v = family.values(&lam, flips);
            for i in 0..3 {
                g[(j, i)] += w * v[i];
                mag = mag.max(v[i].abs());
            }
        }
        if !vanishing {
            for i in 0..3 {
                // 𝓛̃_j(λ_r) = 1/2 for r ≠ j, 0 for r = j.
                g[(j, i)] -= 0.5 * (vv[next(j)][i] + vv[prev(j)][i]);
            }
        }
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite entry in G for {}", family.id)));
    }
    let sv = g.svd(false, false).singular_values;
    let mut s = [sv[0], sv[1], sv[2]];
    s.sort_by(|a, b| b.total_cmp(a));
    let singular = !(s[0] > KERNEL_THRESHOLD * mag) || s[2] / s[0] < KERNEL_THRESHOLD;
    Ok(GMatrix {
        g,
        singular_values: s,
        singular,
        vanishing,
    })
}

/// Admissible enriched basis `φ₁..φ₆` on one triangle.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    geom: TriGeom,
    family: EnrichmentFamily,
    flips: EdgeFlips,
    g: GMatrix,
    g_inv: Matrix3<f64>,
    /// `[r][m] = λ̃_m(v_r)`.
    vertex_vals: [[f64; 3]; 3],
    edge_rule: Rule1D,
}

impl ElementBasis {
    /// Builds the basis in the orientation of [`EnrichmentFamily::flips_on`]
    /// with `rule` for the edge functionals.
    pub fn new(family: &EnrichmentFamily, geom: &TriGeom, rule: &Rule1D) -> Result<Self> {
        Self::with_flips(family, geom, family.flips_on(geom), rule)
    }

    pub fn with_flips(family: &EnrichmentFamily, geom: &TriGeom, flips: EdgeFlips, rule: &Rule1D) -> Result<Self> {
        family.validate_for_assembly()?;
        let g = build_g_oriented(family, flips, rule)?;
        let g_inv = match (g.singular, g.g.try_inverse()) {
            (false, Some(inv)) => inv,
            _ => {
                return Err(Error::NotAdmissible {
                    family: family.id.to_string(),
                    element: None,
                    ratio: g.ratio(),
                })
            }
        };
        Ok(Self {
            geom: geom.clone(),
            family: family.clone(),
            flips,
            vertex_vals: vertex_values(family, flips),
            g,
            g_inv,
            edge_rule: rule.clone(),
        })
    }

    pub fn geom(&self) -> &TriGeom {
        &self.geom
    }

    pub fn family(&self) -> &EnrichmentFamily {
        &self.family
    }

    pub fn flips(&self) -> EdgeFlips {
        self.flips
    }

    pub fn g(&self) -> &GMatrix {
        &self.g
    }

    pub fn g_inv(&self) -> &Matrix3<f64> {
        &self.g_inv
    }

    /// `g_i = (g_{i,1}, g_{i,2}, g_{i,3})`, column `i` of `G⁻¹`.
    pub fn g_column(&self, i: usize) -> [f64; 3] {
        [self.g_inv[(0, i)], self.g_inv[(1, i)], self.g_inv[(2, i)]]
    }

    pub fn kappa_g(&self) -> f64 {
        self.g.condition()
    }

    /// `ε[λ̃_m] = λ̃_m - Σ_r λ̃_m(v_r) λ_r`, or `λ̃_m` itself for vanishing
    /// families.
    pub fn corrected_enrichment(&self, lam: &[f64; 3]) -> [f64; 3] {
        let mut v = self.family.values(lam, self.flips);
        if !self.g.vanishing {
            for (m, vm) in v.iter_mut().enumerate() {
                *vm -= (0..3).map(|r| self.vertex_vals[r][m] * lam[r]).sum::<f64>();
            }
        }
        v
    }

    /// `⟨ε[λ̃], g_i⟩` for `i = 1, 2, 3`.
    fn enriched_part(&self, e: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|m| e[m] * self.g_inv[(m, i)]).sum())
    }

    /// `φ₁..φ₆` at barycentric `lam`.
    pub fn values(&self, lam: &[f64; 3]) -> [f64; 6] {
        let e = self.corrected_enrichment(lam);
        let p = self.enriched_part(&e);
        let mut out = [0.0; 6];
        for i in 0..3 {
            out[i] = lam[i] - 0.5 * (p[next(i)] + p[prev(i)]);
            out[i + 3] = p[i];
        }
        out
    }

    pub fn value_at(&self, x: Point2<f64>) -> [f64; 6] {
        self.values(&self.geom.lambda(x))
    }

    /// `∇φ₁..∇φ₆` at barycentric `lam`.
    pub fn gradients(&self, lam: &[f64; 3]) -> Result<[Vector2<f64>; 6]> {
        let (_, mut d) = self.family.jet(lam, self.flips)?;
        if !self.g.vanishing {
            for (m, dm) in d.iter_mut().enumerate() {
                for r in 0..3 {
                    dm[r] -= self.vertex_vals[r][m];
                }
            }
        }
        let gl = self.geom.grad_lambda();
        let ge: [Vector2<f64>; 3] = d.map(|row| combine(&row, gl));
        let gp: [Vector2<f64>; 3] = std::array::from_fn(|i| (0..3).map(|m| ge[m] * self.g_inv[(m, i)]).sum());
        let mut out = [Vector2::zeros(); 6];
        for i in 0..3 {
            out[i] = gl[i] - (gp[next(i)] + gp[prev(i)]) * 0.5;
            out[i + 3] = gp[i];
        }
        Ok(out)
    }

    pub fn gradient_at(&self, x: Point2<f64>) -> Result<[Vector2<f64>; 6]> {
        self.gradients(&self.geom.lambda(x))
    }

    pub fn edge_rule(&self) -> &Rule1D {
        &self.edge_rule
    }

    /// `(𝓛̃₁(g), 𝓛̃₂(g), 𝓛̃₃(g))` for a function of the barycentric triple.
    pub fn edge_functionals<G: Fn(&[f64; 3]) -> f64>(&self, g: G) -> [f64; 3] {
        std::array::from_fn(|j| edge_average_bary(j, &g, &self.edge_rule))
    }

    /// Largest deviation over the 36 conditions `𝓛_r(φ_i) = δ_ir`,
    /// `𝓛̃_s(φ_i) = 0`, `𝓛_r(φ_{j+3}) = 0`, `𝓛̃_s(φ_{j+3}) = δ_js`, with the
    /// edge functionals evaluated by `rule`.
    pub fn kronecker_residual(&self, rule: &Rule1D) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..3 {
            let v = self.values(&VERTICES[r]);
            for (i, &vi) in v.iter().enumerate() {
                let want = if i == r { 1.0 } else { 0.0 };
                worst = worst.max((vi - want).abs());
            }
        }
        for s in 0..3 {
            let mut acc = [0.0; 6];
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                let mut lam = [0.0; 3];
                lam[next(s)] = t;
                lam[prev(s)] = 1.0 - t;
                for (a, v) in acc.iter_mut().zip(self.values(&lam)) {
                    *a += w * v;
                }
            }
            for (i, &a) in acc.iter().enumerate() {
                let want = if i == s + 3 { 1.0 } else { 0.0 };
                worst = worst.max((a - want).abs());
            }
        }
        worst
    }
}

/// [`ElementBasis::new`] with the default 16-node Gauss-Legendre edge rule.
pub fn element_basis(family: &EnrichmentFamily, geom: &TriGeom) -> Result<ElementBasis> {
    let rule = Rule1D::gauss_legendre(DEFAULT_EDGE_NODES)?;
    ElementBasis::new(family, geom, &rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gl() -> Rule1D {
        Rule1D::gauss_legendre(DEFAULT_EDGE_NODES).unwrap()
    }

    fn random_triangle(rng: &mut ChaCha8Rng) -> TriGeom {
        loop {
            let p: Vec<Point2<f64>> = (0..3)
                .map(|_| Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let ids = [
                rng.random_range(0..100),
                rng.random_range(100..200),
                rng.random_range(200..300),
            ];
            let (a, mut b, mut c) = (p[0], p[1], p[2]);
            let (mut ib, mut ic) = (ids[1], ids[2]);
            if crate::barycentric::cross(b - a, c - a) < 0.0 {
                std::mem::swap(&mut b, &mut c);
                std::mem::swap(&mut ib, &mut ic);
            }
            if let Ok(t) = TriGeom::with_ids([a, b, c], [ids[0], ib, ic]) {
                if t.area() > 0.05 {
                    return t;
                }
            }
        }
    }

    fn interior(rng: &mut ChaCha8Rng) -> [f64; 3] {
        let u: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
        let s: f64 = u.iter().sum();
        u.map(|x| 0.005 + 0.985 * x / s)
    }

    #[test]
    fn weight_examples() {
        let t = TriGeom::reference();
        let w = WeightParams::UNWEIGHTED;
        let c = t.centroid();
        assert_eq!(weight(&w, &t, c), 3.0);
        assert_eq!(weight(&w, &t, t.vertex(0)), 3.0);
        let w010 = WeightParams::new(0.0, 1.0, 0.0).unwrap();
        for x in [c, t.vertex(2), Point2::new(0.1, 0.7)] {
            assert!((weight(&w010, &t, x) - 1.0).abs() < 1e-15);
            assert!(weight_gradient(&w010, &t, x).unwrap().norm() < 1e-14);
        }
        let w011 = WeightParams::new(0.0, 1.0, 1.0).unwrap();
        assert!((weight(&w011, &t, c) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(weight_gradient(&w, &t, c).unwrap(), Vector2::zeros());
        assert!(WeightParams::new(-0.1, 0.0, 0.0).is_err());
        assert!(WeightParams::new(0.0, -1.0, 0.0).is_err());
        assert!(WeightParams::new(0.0, -0.5, 2.0).is_ok());
    }

    #[test]
    fn weight_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..20 {
            let t = random_triangle(&mut rng);
            let p = WeightParams::new(
                rng.random_range(0.0..3.0),
                rng.random_range(-0.9..3.0),
                rng.random_range(-0.9..3.0),
            )
            .unwrap();
            for _ in 0..100 {
                let x = t.point(&interior(&mut rng));
                let g = weight_gradient(&p, &t, x).unwrap();
                let fx =
                    (weight(&p, &t, x + Vector2::new(h, 0.0)) - weight(&p, &t, x - Vector2::new(h, 0.0))) / (2.0 * h);
                let fy =
                    (weight(&p, &t, x + Vector2::new(0.0, h)) - weight(&p, &t, x - Vector2::new(0.0, h))) / (2.0 * h);
                let scale = g.norm().max(1.0);
                assert!(
                    (g - Vector2::new(fx, fy)).norm() < 1e-6 * scale,
                    "{g} vs ({fx}, {fy}) for {p:?}"
                );
            }
        }
    }

    #[test]
    fn fractional_exponent_on_edge_is_an_error() {
        let p = WeightParams::new(0.0, 0.5, 0.5).unwrap();
        let t = TriGeom::reference();
        // Midpoint of edge 0: λ₁ = 0, the other two 1/2.
        assert!(matches!(
            weight_gradient(&p, &t, Point2::new(0.5, 0.5)),
            Err(Error::NonFiniteGradient(_))
        ));
        // Interior points are fine.
        assert!(weight_gradient(&p, &t, t.centroid()).is_ok());
    }

    #[test]
    fn enrichment_value_examples() {
        let t = TriGeom::reference();
        let e10 = EnrichmentFamily::e10(WeightParams::UNWEIGHTED);
        for j in 0..3 {
            assert_eq!(enrichment_values(&e10, &t, t.vertex(j)), [0.0; 3]);
        }
        for v in enrichment_values(&e10, &t, t.centroid()) {
            assert!((v - 3.0 * (1.0f64 / 3.0).sin().powi(2)).abs() < 1e-15);
        }
        let e3 = EnrichmentFamily::e3();
        assert_eq!(enrichment_values(&e3, &t, t.vertex(0)), [std::f64::consts::E, 1.0, 1.0]);
        let e15 = EnrichmentFamily::e15(WeightParams::UNWEIGHTED, 0.0, 0.0).unwrap();
        assert_eq!(enrichment_values(&e15, &t, Point2::new(0.2, 0.3)), [3.0; 3]);
        for g in enrichment_gradients(&e15, &t, Point2::new(0.2, 0.3)).unwrap() {
            assert_eq!(g, Vector2::zeros());
        }
    }

    fn all_families() -> Vec<EnrichmentFamily> {
        let w = WeightParams::new(0.5, 1.5, 2.0).unwrap();
        vec![
            EnrichmentFamily::e10(w),
            EnrichmentFamily::e11(w),
            EnrichmentFamily::e12(WeightParams::UNWEIGHTED),
            EnrichmentFamily::e13(w),
            EnrichmentFamily::e14(w),
            EnrichmentFamily::e15(w, 2.0, 1.0).unwrap(),
            EnrichmentFamily::w1(w),
            EnrichmentFamily::e3(),
            EnrichmentFamily::e4(2.5).unwrap(),
            EnrichmentFamily::e8(2.0).unwrap(),
        ]
    }

    #[test]
    fn enrichment_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-6;
        for fam in all_families() {
            for _ in 0..5 {
                let t = random_triangle(&mut rng);
                for _ in 0..20 {
                    let x = t.point(&interior(&mut rng));
                    let g = enrichment_gradients(&fam, &t, x).unwrap();
                    for k in 0..3 {
                        let f = |y: Point2<f64>| enrichment_values(&fam, &t, y)[k];
                        let fd = Vector2::new(
                            (f(x + Vector2::new(h, 0.0)) - f(x - Vector2::new(h, 0.0))) / (2.0 * h),
                            (f(x + Vector2::new(0.0, h)) - f(x - Vector2::new(0.0, h))) / (2.0 * h),
                        );
                        assert!((g[k] - fd).norm() < 1e-6 * g[k].norm().max(1.0), "{:?} k={k}", fam.id);
                    }
                }
            }
        }
    }

    #[test]
    fn scaled_family_scales_gradients() {
        let t = TriGeom::reference();
        let f = EnrichmentFamily::e12(WeightParams::UNWEIGHTED);
        let s = f.clone().scaled(-2.0);
        let x = Point2::new(0.3, 0.4);
        let (a, b) = (
            enrichment_gradients(&f, &t, x).unwrap(),
            enrichment_gradients(&s, &t, x).unwrap(),
        );
        for k in 0..3 {
            assert!((b[k] + 2.0 * a[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn edge_average_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_triangle(&mut rng);
        let rule = gl();
        for j in 0..3 {
            assert!(edge_average(&t, j, |x| t.lambda(x)[j], &rule).abs() < 1e-14);
            for i in (0..3).filter(|&i| i != j) {
                assert!((edge_average(&t, j, |x| t.lambda(x)[i], &rule) - 0.5).abs() < 1e-14);
            }
            assert!((edge_average(&t, j, |_| 1.0, &rule) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn e10_g_closed_form() {
        // ∫₀¹ sin t sin(1-t) dt = (sin 1 - cos 1)/2
        let want = 3.0 * (1f64.sin() - 1f64.cos()) / 2.0;
        assert!((want - 0.451753).abs() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fam = EnrichmentFamily::e10(WeightParams::UNWEIGHTED);
        for _ in 0..10 {
            let g = build_G(&fam, &random_triangle(&mut rng), &gl()).unwrap();
            assert!(g.vanishing && !g.singular);
            for i in 0..3 {
                for j in 0..3 {
                    let w = if i == j { want } else { 0.0 };
                    assert!((g.g[(i, j)] - w).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn w1_g_is_hollow() {
        let fam = EnrichmentFamily::w1(WeightParams::new(0.0, 1.0, 1.0).unwrap());
        let g = build_G(&fam, &TriGeom::reference(), &gl()).unwrap().g;
        for i in 0..3 {
            assert!(g[(i, i)].abs() < 1e-15);
            for j in (0..3).filter(|&j| j != i) {
                assert!(g[(i, j)] > 0.0);
            }
        }
        let det = g[(0, 1)] * g[(1, 2)] * g[(2, 0)] + g[(0, 2)] * g[(1, 0)] * g[(2, 1)];
        assert!((g.determinant() - det).abs() < 1e-15 && det > 0.0);
    }

    #[test]
    fn g_scales_linearly() {
        let t = TriGeom::reference();
        let f = EnrichmentFamily::e13(WeightParams::new(1.0, 1.0, 0.0).unwrap());
        let a = build_G(&f, &t, &gl()).unwrap();
        let b = build_G(&f.clone().scaled(10.0), &t, &gl()).unwrap();
        assert!((b.g - a.g * 10.0).abs().max() < 1e-14);
        assert_eq!(a.singular, b.singular);
    }

    #[test]
    fn kronecker_conditions_every_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let finer = Rule1D::gauss_legendre(24).unwrap();
        for fam in all_families() {
            for _ in 0..10 {
                let t = random_triangle(&mut rng);
                let b = element_basis(&fam, &t).unwrap();
                assert!(b.kronecker_residual(b.edge_rule()) < 1e-12, "{:?}", fam.id);
            }
        }
        // Smooth families are already resolved by the default rule.
        for fam in [
            EnrichmentFamily::e10(WeightParams::UNWEIGHTED),
            EnrichmentFamily::e13(WeightParams::new(1.0, 2.0, 1.0).unwrap()),
        ] {
            let b = element_basis(&fam, &random_triangle(&mut rng)).unwrap();
            assert!(b.kronecker_residual(&finer) < 1e-10, "{:?}", fam.id);
        }
    }

    #[test]
    fn diagonal_g_gives_scaled_enrichment() {
        let t = TriGeom::reference();
        let fam = EnrichmentFamily::e11(WeightParams::new(1.0, 0.0, 1.0).unwrap());
        let b = element_basis(&fam, &t).unwrap();
        let lam = [0.2, 0.5, 0.3];
        let v = b.values(&lam);
        let e = fam.values(&lam, b.flips());
        for k in 0..3 {
            assert!((v[k + 3] - e[k] / b.g().g[(k, k)]).abs() < 1e-14);
        }
    }

    #[test]
    fn basis_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for fam in all_families() {
            let t = random_triangle(&mut rng);
            let b = element_basis(&fam, &t).unwrap();
            for _ in 0..10 {
                let x = t.point(&interior(&mut rng));
                let g = b.gradient_at(x).unwrap();
                for i in 0..6 {
                    let fd = Vector2::new(
                        (b.value_at(x + Vector2::new(h, 0.0))[i] - b.value_at(x - Vector2::new(h, 0.0))[i]) / (2.0 * h),
                        (b.value_at(x + Vector2::new(0.0, h))[i] - b.value_at(x - Vector2::new(0.0, h))[i]) / (2.0 * h),
                    );
                    assert!((g[i] - fd).norm() < 1e-5 * g[i].norm().max(1.0), "{:?} i={i}", fam.id);
                }
            }
        }
    }

    #[test]
    fn singular_family_is_not_admissible() {
        let fam = EnrichmentFamily::e15(WeightParams::UNWEIGHTED, 0.0, 0.0).unwrap();
        let g = build_G(&fam, &TriGeom::reference(), &gl()).unwrap();
        assert!(g.singular && !g.vanishing);
        assert!(matches!(
            element_basis(&fam, &TriGeom::reference()),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn flags() {
        let w = WeightParams::UNWEIGHTED;
        assert!(EnrichmentFamily::e10(w).conforming());
        assert!(EnrichmentFamily::e10(w).trace_symmetric());
        assert!(!EnrichmentFamily::e12(w).trace_symmetric());
        assert!(EnrichmentFamily::e12(w).conforming());
        assert!(!EnrichmentFamily::e3().vanishes_at_vertices());
        assert!(!EnrichmentFamily::e4(2.0).unwrap().vanishes_at_vertices());
        assert!(EnrichmentFamily::e8(2.0).unwrap().vanishes_at_vertices());
        assert!(EnrichmentFamily::w1(w).vanishes_at_vertices());
        assert!(!EnrichmentFamily::w1(w).edge_localized());
        assert!(!EnrichmentFamily::e15(w, 0.0, 1.0).unwrap().vanishes_at_vertices());
        assert!(
            EnrichmentFamily::e15(WeightParams::new(0.0, 1.0, 1.0).unwrap(), 0.0, 1.0)
                .unwrap()
                .vanishes_at_vertices()
        );
        assert!(EnrichmentFamily::e15(w, 1.0, -1.0).is_err());
        assert_eq!("e12".parse::<FamilyId>().unwrap(), FamilyId::E12);
        assert!("E9".parse::<FamilyId>().is_err());
    }

    #[test]
    fn negative_exponents_rejected_for_assembly() {
        let fam = EnrichmentFamily::e10(WeightParams::new(0.0, -0.5, 0.0).unwrap());
        assert!(build_G(&fam, &TriGeom::reference(), &gl()).is_err());
        assert!(element_basis(&fam, &TriGeom::reference()).is_err());
    }
}
