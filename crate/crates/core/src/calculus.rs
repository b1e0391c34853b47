//! The ϑ-Laplacian, the gradient form Γ, and the power identity
//! `Δu^m = 2u^{m/2}Δu^{m/2} + 2Γ(u^{m/2})`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{VertexField, POSITIVITY_FLOOR};
use crate::graph::WeightedGraph;

/// `Δu(x) = (1/ϑ(x)) Σ_{y∼x} ω_xy (u(y) − u(x))`.
pub fn laplacian(g: &WeightedGraph, u: &[f64]) -> VertexField {
    debug_assert_eq!(u.len(), g.len());
    VertexField::from_fn(g.len(), |x| {
        let s: f64 = g.neighbors(x).iter().map(|&(y, w)| w * (u[y] - u[x])).sum();
        s / g.theta(x)
    })
}

/// `Γ(u,v)(x) = (1/(2ϑ(x))) Σ_{y∼x} ω_xy (u(y) − u(x))(v(y) − v(x))`.
pub fn gamma(g: &WeightedGraph, u: &[f64], v: &[f64]) -> VertexField {
    debug_assert_eq!(u.len(), g.len());
    debug_assert_eq!(v.len(), g.len());
    VertexField::from_fn(g.len(), |x| {
        let s: f64 = g
            .neighbors(x)
            .iter()
            .map(|&(y, w)| w * (u[y] - u[x]) * (v[y] - v[x]))
            .sum();
        s / (2.0 * g.theta(x))
    })
}

/// `Γ(u) = Γ(u, u)`.
pub fn gamma_sq(g: &WeightedGraph, u: &[f64]) -> VertexField {
    gamma(g, u, u)
}

/// Residual of the power identity together with the magnitude it is measured
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual {
    pub residual: VertexField,
    /// Largest `(1/ϑ(x)) Σ ω_xy (|u^m(y)| + |u^m(x)|)`, the size of the
    /// terms entering `Δu^m`.
    pub scale: f64,
}

impl IdentityResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.max_abs()
    }

    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.max_abs()
        } else {
            self.max_abs() / self.scale
        }
    }
}

/// `Δ(u^m) − 2u^{m/2}Δ(u^{m/2}) − 2Γ(u^{m/2})` at every vertex. Requires
/// `u > 0`.
pub fn power_identity_residual(g: &WeightedGraph, u: &VertexField, m: f64) -> Result<IdentityResidual> {
    u.check_len(g)?;
    u.check_positive(g, POSITIVITY_FLOOR)?;
    if !m.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent m = {m}")));
    }
    let um = u.powf(m);
    let uh = u.powf(m / 2.0);
    let lap_um = laplacian(g, &um);
    let lap_uh = laplacian(g, &uh);
    let gam = gamma_sq(g, &uh);
    let residual = VertexField::from_fn(g.len(), |x| lap_um[x] - 2.0 * uh[x] * lap_uh[x] - 2.0 * gam[x]);
    let scale = (0..g.len())
        .map(|x| {
            let s: f64 = g.neighbors(x).iter().map(|&(y, w)| w * (um[y].abs() + um[x].abs())).sum();
            s / g.theta(x)
        })
        .fold(0.0, f64::max);
    Ok(IdentityResidual { residual, scale })
}

/// How `|∇f|²` is read on a graph when probing the continuum chain rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientConvention {
    /// `|∇f|² = 2Γ(f)`.
    #[default]
    TwiceGamma,
    /// `|∇f|² = Γ(f)`.
    Gamma,
}

/// Both sides of the continuum formula
/// `Δu^p = p u^{p−1} Δu + ((p−1)/p) u^{−p} |∇u^p|²` evaluated on a graph.
pub fn chain_rule_sides(
    g: &WeightedGraph,
    u: &VertexField,
    p: f64,
    convention: GradientConvention,
) -> (VertexField, VertexField) {
    let up = u.powf(p);
    let lhs = laplacian(g, &up);
    let lap_u = laplacian(g, u);
    let grad_sq = match convention {
        GradientConvention::TwiceGamma => gamma_sq(g, &up).map(|v| 2.0 * v),
        GradientConvention::Gamma => gamma_sq(g, &up),
    };
    let rhs = VertexField::from_fn(g.len(), |x| {
        p * u[x].powf(p - 1.0) * lap_u[x] + (p - 1.0) / p * u[x].powf(-p) * grad_sq[x]
    });
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRuleWitness {
    pub u: VertexField,
    pub vertex: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Relative gap above which the two sides count as different.
pub const CHAIN_RULE_TOL: f64 = 1e-8;

/// First vertex where the chain-rule sides differ for this particular `u`.
pub fn chain_rule_violation(
    g: &WeightedGraph,
    u: &VertexField,
    p: f64,
    convention: GradientConvention,
) -> Option<ChainRuleWitness> {
    let (lhs, rhs) = chain_rule_sides(g, u, p, convention);
    (0..g.len())
        .find(|&x| {
            let scale = 1.0 + lhs[x].abs().max(rhs[x].abs());
            (lhs[x] - rhs[x]).abs() > CHAIN_RULE_TOL * scale
        })
        .map(|x| ChainRuleWitness { u: u.clone(), vertex: x, lhs: lhs[x], rhs: rhs[x] })
}

/// Samples `budget` random fields `u ∈ (0.1, 10)` looking for a vertex where
/// the continuum chain rule breaks.
pub fn chain_rule_counterexample<R: Rng + ?Sized>(
    g: &WeightedGraph,
    p: f64,
    convention: GradientConvention,
    budget: usize,
    rng: &mut R,
) -> Result<Option<ChainRuleWitness>> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("chain rule exponent p = {p}")));
    }
    for _ in 0..budget {
        let u = VertexField::from_fn(g.len(), |_| rng.random_range(0.1..10.0));
        if let Some(w) = chain_rule_violation(g, &u, p, convention) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
