//! Pointwise gradient estimates and the space-time Harnack inequality,
//! evaluated numerically with explicit margins.

use std::fmt;

use crate::calculus::{gamma_sq, laplacian};
use crate::error::{Error, Result};
use crate::field::{VertexField, POSITIVITY_FLOOR};
use crate::graph::{GraphConstants, WeightedGraph};
use crate::paths::{distance_matrix, shortest_paths, validate_shortest_path};
use crate::pme::{hypothesis_check, state_hypotheses, HypothesisReport, PmeProblem, Trajectory};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    /// The theorem's hypotheses do not hold, so there is nothing to check.
    Vacuous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
        })
    }
}

/// Slack allowed on `rhs − lhs ≥ 0` before a check counts as failed.
pub fn pass_tolerance(lhs: f64, rhs: f64) -> f64 {
    1e-9 * (1.0 + lhs.abs() + rhs.abs())
}

fn judge(lhs: f64, rhs: f64) -> Status {
    if rhs - lhs >= -pass_tolerance(lhs, rhs) || rhs == f64::INFINITY {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// One inequality `lhs ≤ rhs` at a vertex pair and time pair. Pointwise
/// estimates use `y = x` and `T1 = T2 = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub x: usize,
    pub y: usize,
    pub t1: f64,
    pub t2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: Status,
}

impl EstimateRow {
    fn new(x: usize, y: usize, t1: f64, t2: f64, lhs: f64, rhs: f64, vacuous: bool) -> Self {
        let status = if vacuous { Status::Vacuous } else { judge(lhs, rhs) };
        EstimateRow { x, y, t1, t2, lhs, rhs, margin: rhs - lhs, status }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatusCounts {
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
}

impl EstimateReport {
    pub fn merge(&mut self, other: EstimateReport) {
        self.rows.extend(other.rows);
    }

    pub fn counts(&self) -> StatusCounts {
        let mut c = StatusCounts::default();
        for r in &self.rows {
            match r.status {
                Status::Pass => c.pass += 1,
                Status::Fail => c.fail += 1,
                Status::Vacuous => c.vacuous += 1,
            }
        }
        c
    }

    /// No row failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    /// Row with the smallest margin among non-vacuous rows.
    pub fn worst(&self) -> Option<&EstimateRow> {
        self.rows
            .iter()
            .filter(|r| r.status != Status::Vacuous)
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    /// Sorts rows by `(x, y, T1, T2)` so that merged reports compare equal
    /// regardless of assembly order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.x, a.y).cmp(&(b.x, b.y)).then(a.t1.total_cmp(&b.t1)).then(a.t2.total_cmp(&b.t2))
        });
    }
}

fn check_inputs(g: &WeightedGraph, u: &VertexField, psi: &VertexField, delta: &VertexField, m: f64) -> Result<()> {
    u.check_len(g)?;
    psi.check_len(g)?;
    delta.check_len(g)?;
    u.check_positive(g, POSITIVITY_FLOOR)?;
    if let Some(x) = delta.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDelta(g.label(x).into()));
    }
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("gradient estimates need m > 1, got {m}")));
    }
    Ok(())
}

/// Ingredients shared by both gradient estimates at a single state.
struct GradientTerms {
    um: VertexField,
    uh: VertexField,
    gamma_uh: VertexField,
    lap_uh: VertexField,
    ut: VertexField,
    d_theta: f64,
}

impl GradientTerms {
    fn new(g: &WeightedGraph, u: &VertexField, psi: &VertexField, delta: &VertexField, m: f64) -> Self {
        let um = u.powf(m);
        let uh = u.powf(m / 2.0);
        let lap_um = laplacian(g, &um);
        let ut = VertexField::from_fn(g.len(), |x| (lap_um[x] - psi[x] * um[x]) / delta[x]);
        GradientTerms {
            gamma_uh: gamma_sq(g, &uh),
            lap_uh: laplacian(g, &uh),
            um,
            uh,
            ut,
            d_theta: GraphConstants::of(g).d_theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub report: EstimateReport,
    /// Per-vertex `(−Δu^{m/2}, D_ϑ u^{m/2})`; the first must not exceed the second.
    pub reduced: Vec<(f64, f64)>,
    /// Largest relative gap between the full left-hand side and
    /// `−Δu^{m/2}/u^{m/2}`.
    pub form_gap: f64,
}

/// `Γ(u^{m/2})/u^m − (δu_t + ψu^m)/(2u^m) ≤ D_ϑ` with `u_t` recovered from
/// the equation. Rows are stamped with time `t`.
pub fn check_t1(
    g: &WeightedGraph,
    u: &VertexField,
    psi: &VertexField,
    delta: &VertexField,
    m: f64,
    t: f64,
) -> Result<GradientReport> {
    check_inputs(g, u, psi, delta, m)?;
    let terms = GradientTerms::new(g, u, psi, delta, m);
    let mut rows = Vec::with_capacity(g.len());
    let mut reduced = Vec::with_capacity(g.len());
    let mut form_gap = 0.0f64;
    for x in 0..g.len() {
        let um = terms.um[x];
        let source = delta[x] * terms.ut[x] + psi[x] * um;
        let lhs = terms.gamma_uh[x] / um - source / (2.0 * um);
        rows.push(EstimateRow::new(x, x, t, t, lhs, terms.d_theta, false));

        let neg_lap = -terms.lap_uh[x];
        reduced.push((neg_lap, terms.d_theta * terms.uh[x]));
        let alt = neg_lap / terms.uh[x];
        let scale = 1.0
            + (terms.gamma_uh[x] + (delta[x] * terms.ut[x]).abs() / 2.0 + (psi[x] * um).abs() / 2.0) / um
            + alt.abs();
        form_gap = form_gap.max((lhs - alt).abs() / scale);
    }
    Ok(GradientReport { report: EstimateReport { rows }, reduced, form_gap })
}

/// `Γ(u^{m/2})/u^m − u_t/u + ψ/2 ≤ D_ϑ`. Every row is vacuous unless
/// `u > 0`, `u_t > 0` and `δ < 0` hold at all vertices.
pub fn check_t2(
    g: &WeightedGraph,
    u: &VertexField,
    psi: &VertexField,
    delta: &VertexField,
    m: f64,
    t: f64,
) -> Result<EstimateReport> {
    check_inputs(g, u, psi, delta, m)?;
    let terms = GradientTerms::new(g, u, psi, delta, m);
    let vacuous = !(terms.ut.iter().all(|&v| v > 0.0) && delta.iter().all(|&d| d < 0.0));
    let rows = (0..g.len())
        .map(|x| {
            let lhs = terms.gamma_uh[x] / terms.um[x] - terms.ut[x] / u[x] + psi[x] / 2.0;
            EstimateRow::new(x, x, t, t, lhs, terms.d_theta, vacuous)
        })
        .collect();
    Ok(EstimateReport { rows })
}

/// Both gradient estimates at every stored state of a trajectory.
pub fn check_trajectory(p: &PmeProblem, traj: &Trajectory) -> Result<(EstimateReport, EstimateReport, f64)> {
    let mut t1 = EstimateReport::default();
    let mut t2 = EstimateReport::default();
    let mut gap = 0.0f64;
    for (&t, u) in traj.times.iter().zip(&traj.states) {
        let psi = p.psi_at(t);
        let r = check_t1(&p.graph, u, &psi, &p.delta, p.m, t)?;
        gap = gap.max(r.form_gap);
        t1.merge(r.report);
        t2.merge(check_t2(&p.graph, u, &psi, &p.delta, p.m, t)?);
    }
    Ok((t1, t2, gap))
}

/// The shortest-path functional
///
/// `Φ = Σ_k [ ½∫_{t_k}^{t_{k+1}} ψ(x_k,t)dt + η²/(2(T2−T1)²) ∫_{t_k}^{t_{k+1}} (t−t_k)² (ψ(x_{k+1},t) − ψ(x_k,t)) dt ]`
///
/// over the equal partition `t_k = T1 + k(T2−T1)/η`. A single-vertex path
/// gives 0.
pub fn phi(g: &WeightedGraph, path: &[usize], psi: &[Poly], t1: f64, t2: f64) -> Result<f64> {
    validate_shortest_path(g, path)?;
    if !(t1 < t2) {
        return Err(Error::InvalidParameter(format!("need T1 < T2, got [{t1}, {t2}]")));
    }
    Ok(phi_terms(path, psi, t1, t2, SquareAnchor::Start))
}

#[derive(Clone, Copy)]
enum SquareAnchor {
    /// `(t − t_k)²`
    Start,
    /// `(t − t_{k+1})²`
    End,
}

fn phi_terms(path: &[usize], psi: &[Poly], t1: f64, t2: f64, anchor: SquareAnchor) -> f64 {
    let eta = path.len() - 1;
    if eta == 0 {
        return 0.0;
    }
    let span = t2 - t1;
    let len = span / eta as f64;
    let weight = (eta * eta) as f64 / (2.0 * span * span);
    let square = match anchor {
        SquareAnchor::Start => Poly::shifted_square(0.0),
        SquareAnchor::End => Poly::shifted_square(len),
    };
    (0..eta)
        .map(|k| {
            let tk = t1 + k as f64 * span / eta as f64;
            let here = psi[path[k]].shift(tk);
            let next = psi[path[k + 1]].shift(tk);
            let first = 0.5 * here.antiderivative().eval(len);
            let second = (&square * &(&next - &here)).antiderivative().eval(len);
            first + weight * second
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiMin {
    pub value: f64,
    pub path: Vec<usize>,
    pub paths_considered: usize,
    /// The path cap was hit; `value` may exceed the true minimum.
    pub truncated: bool,
    /// Same minimisation with the square anchored at the segment end.
    pub end_anchored: f64,
}

/// Minimum of Φ over the enumerated shortest paths from `x` to `y`; ties go
/// to the lexicographically first path.
pub fn min_phi(g: &WeightedGraph, x: usize, y: usize, psi: &[Poly], t1: f64, t2: f64, cap: usize) -> Result<PhiMin> {
    if !(t1 < t2) {
        return Err(Error::InvalidParameter(format!("need T1 < T2, got [{t1}, {t2}]")));
    }
    let sp = shortest_paths(g, x, y, cap)?;
    let mut best: Option<(f64, &Vec<usize>)> = None;
    let mut end_anchored = f64::INFINITY;
    for path in &sp.paths {
        let v = phi_terms(path, psi, t1, t2, SquareAnchor::Start);
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, path));
        }
        end_anchored = end_anchored.min(phi_terms(path, psi, t1, t2, SquareAnchor::End));
    }
    let (value, path) = best.expect("at least one shortest path");
    Ok(PhiMin {
        value,
        path: path.clone(),
        paths_considered: sp.paths.len(),
        truncated: sp.truncated,
        end_anchored,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport {
    pub x: usize,
    pub y: usize,
    pub t1: f64,
    pub t2: f64,
    /// `u(x, T1)`
    pub lhs: f64,
    /// `u(y, T2) · exp(exponent)`
    pub rhs: f64,
    pub exponent: f64,
    pub distance: usize,
    pub phi: PhiMin,
    /// Exponent rebuilt with each segment's square anchored at its end time,
    /// the form the single-edge argument produces. Diagnostic only.
    pub end_anchored_exponent: f64,
    pub status: Status,
}

impl HarnackReport {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }

    pub fn row(&self) -> EstimateRow {
        EstimateRow {
            x: self.x,
            y: self.y,
            t1: self.t1,
            t2: self.t2,
            lhs: self.lhs,
            rhs: self.rhs,
            margin: self.margin(),
            status: self.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedPsiReport {
    pub lhs: f64,
    pub rhs: f64,
    pub exponent: f64,
    /// Exponent of the path-functional bound at the same points.
    pub path_exponent: f64,
    /// `path_exponent ≤ exponent`.
    pub ordering_holds: bool,
    pub status: Status,
}

impl BoundedPsiReport {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Harnack checks against one integrated trajectory. Distances, constants
/// and hypotheses are computed once and reused across `(x, y, T1, T2)`
/// queries.
pub struct HarnackVerifier<'a> {
    problem: &'a PmeProblem,
    traj: &'a Trajectory,
    hypotheses: HypothesisReport,
    consts: GraphConstants,
    dist: Vec<Vec<Option<usize>>>,
}

impl<'a> HarnackVerifier<'a> {
    pub fn new(problem: &'a PmeProblem, traj: &'a Trajectory) -> Result<Self> {
        problem.validate_theorem_mode()?;
        Ok(HarnackVerifier {
            hypotheses: hypothesis_check(problem, traj),
            consts: GraphConstants::of(&problem.graph),
            dist: distance_matrix(&problem.graph),
            problem,
            traj,
        })
    }

    pub fn hypotheses(&self) -> &HypothesisReport {
        &self.hypotheses
    }

    fn endpoints(&self, x: usize, y: usize, t1: f64, t2: f64) -> Result<(usize, f64, f64, bool)> {
        let g = &self.problem.graph;
        if !(t1 < t2) {
            return Err(Error::InvalidParameter(format!("need T1 < T2, got [{t1}, {t2}]")));
        }
        let eta = self.dist[x][y].ok_or_else(|| Error::Disconnected { a: g.label(x).into(), b: g.label(y).into() })?;
        let outside = || Error::InvalidParameter(format!("[{t1}, {t2}] is outside the trajectory span"));
        let ux = self.traj.state_at(t1).ok_or_else(outside)?;
        let uy = self.traj.state_at(t2).ok_or_else(outside)?;
        let mut holds = self.hypotheses.hold_within(t1, t2);
        // interpolated endpoints are checked on their own
        for (t, u) in [(t1, &ux), (t2, &uy)] {
            holds &= state_hypotheses(self.problem, u, t).holds();
        }
        Ok((eta, ux[x], uy[y], holds))
    }

    fn distance_term(&self, eta: usize, span: f64) -> f64 {
        let m = self.problem.m;
        4.0 * self.consts.theta_max * (eta * eta) as f64 / (m * m * self.consts.omega_min * span)
    }

    /// `u(x,T1) ≤ u(y,T2) exp{D_ϑ(T2−T1) + 4ϑ_max dist²/(m²ω_min(T2−T1)) + min Φ}`.
    pub fn bound(&self, x: usize, y: usize, t1: f64, t2: f64, cap: usize) -> Result<HarnackReport> {
        let (eta, lhs, uy, holds) = self.endpoints(x, y, t1, t2)?;
        let span = t2 - t1;
        let phi = min_phi(&self.problem.graph, x, y, &self.problem.psi, t1, t2, cap)?;
        let base = self.consts.d_theta * span + if eta == 0 { 0.0 } else { self.distance_term(eta, span) };
        let exponent = base + phi.value;
        let rhs = uy * exponent.exp();
        let status = if holds { judge(lhs, rhs) } else { Status::Vacuous };
        Ok(HarnackReport {
            x,
            y,
            t1,
            t2,
            lhs,
            rhs,
            exponent,
            distance: eta,
            end_anchored_exponent: base + phi.end_anchored,
            phi,
            status,
        })
    }

    /// `u(x,T1) ≤ u(y,T2) exp{(D_ϑ + 5C0/6)(T2−T1) + 4ϑ_max dist²/(m²ω_min(T2−T1))}`
    /// for `|ψ| ≤ C0` on `[T1, T2]`.
    pub fn bounded_psi(&self, x: usize, y: usize, t1: f64, t2: f64, c0: f64, cap: usize) -> Result<BoundedPsiReport> {
        let g = &self.problem.graph;
        for (z, p) in self.problem.psi.iter().enumerate() {
            let peak = p.max_abs_on(t1, t2);
            if peak > c0 * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::SourceBound { label: g.label(z).into(), t: t1, value: peak, c0 });
            }
        }
        let path = self.bound(x, y, t1, t2, cap)?;
        let span = t2 - t1;
        let eta = path.distance;
        let exponent = (self.consts.d_theta + 5.0 * c0 / 6.0) * span
            + if eta == 0 { 0.0 } else { self.distance_term(eta, span) };
        let uy = self.traj.state_at(t2).expect("checked by bound")[y];
        let rhs = uy * exponent.exp();
        let status = if path.status == Status::Vacuous { Status::Vacuous } else { judge(path.lhs, rhs) };
        Ok(BoundedPsiReport {
            lhs: path.lhs,
            rhs,
            exponent,
            path_exponent: path.exponent,
            ordering_holds: path.exponent <= exponent + 1e-12 * (1.0 + exponent.abs()),
            status,
        })
    }
}

/// One-off Harnack check; see [`HarnackVerifier::bound`].
#[allow(clippy::too_many_arguments)]
pub fn harnack_bound(
    problem: &PmeProblem,
    traj: &Trajectory,
    x: usize,
    y: usize,
    t1: f64,
    t2: f64,
    cap: usize,
) -> Result<HarnackReport> {
    HarnackVerifier::new(problem, traj)?.bound(x, y, t1, t2, cap)
}

/// One-off bounded-source check; see [`HarnackVerifier::bounded_psi`].
#[allow(clippy::too_many_arguments)]
pub fn harnack_bounded_psi(
    problem: &PmeProblem,
    traj: &Trajectory,
    x: usize,
    y: usize,
    t1: f64,
    t2: f64,
    c0: f64,
    cap: usize,
) -> Result<BoundedPsiReport> {
    HarnackVerifier::new(problem, traj)?.bounded_psi(x, y, t1, t2, c0, cap)
}
