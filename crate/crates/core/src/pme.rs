//! The weighted porous medium equation `δ(x) u_t = Δu^m − ψ(x,t) u^m` on a
//! finite graph: problem description, right-hand side, time stepping and
//! the structural hypotheses `u > 0`, `u_t > 0`, `δ < 0`, `m > 1`.

use crate::calculus::laplacian;
use crate::error::{Error, Result};
use crate::field::{VertexField, POSITIVITY_FLOOR};
use crate::graph::WeightedGraph;
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq)]
pub struct PmeProblem {
    pub graph: WeightedGraph,
    pub m: f64,
    pub delta: VertexField,
    /// `ψ(x, ·)` per vertex, a polynomial of degree ≤ 3 in absolute time.
    pub psi: Vec<Poly>,
    pub u0: VertexField,
    pub t1: f64,
    pub t2: f64,
}

impl PmeProblem {
    /// Problem with spatially uniform `δ`, `ψ` and initial data.
    pub fn uniform(graph: WeightedGraph, m: f64, delta: f64, psi: Poly, u0: f64, t1: f64, t2: f64) -> Result<Self> {
        let n = graph.len();
        let p = PmeProblem {
            graph,
            m,
            delta: VertexField::constant(n, delta),
            psi: vec![psi; n],
            u0: VertexField::constant(n, u0),
            t1,
            t2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        self.delta.check_len(g)?;
        self.u0.check_len(g)?;
        if self.psi.len() != g.len() {
            return Err(Error::FieldLength { expected: g.len(), got: self.psi.len() });
        }
        if let Some(x) = self.delta.iter().position(|&d| d == 0.0 || !d.is_finite()) {
            return Err(Error::ZeroDelta(g.label(x).into()));
        }
        if let Some(x) = self.psi.iter().position(|p| p.degree() > 3) {
            return Err(Error::InvalidParameter(format!("psi at {} has degree above 3", g.label(x))));
        }
        self.u0.check_positive(g, POSITIVITY_FLOOR)?;
        if !self.m.is_finite() {
            return Err(Error::InvalidParameter(format!("m = {}", self.m)));
        }
        if !(self.t1 < self.t2) || !self.t1.is_finite() || !self.t2.is_finite() {
            return Err(Error::InvalidParameter(format!("time span [{}, {}]", self.t1, self.t2)));
        }
        Ok(())
    }

    /// Additional requirement of the estimate checks: `m > 1`.
    pub fn validate_theorem_mode(&self) -> Result<()> {
        self.validate()?;
        if !(self.m > 1.0) {
            return Err(Error::InvalidParameter(format!("theorem checks need m > 1, got {}", self.m)));
        }
        Ok(())
    }

    pub fn psi_at(&self, t: f64) -> VertexField {
        VertexField::from_fn(self.graph.len(), |x| self.psi[x].eval(t))
    }

    /// Parses a problem document. `load_graph` resolves the `graph <ref>`
    /// line. Recognised records:
    ///
    /// ```text
    /// graph <path>
    /// m=<float>
    /// delta <label|all> <float>
    /// psi <label|all> <c0> [c1 c2 c3]
    /// u0 <label|all> <float>
    /// tspan <T1> <T2>
    /// ```
    ///
    /// `all` assigns every vertex; later lines override earlier ones. `ψ`
    /// defaults to zero; `δ` and `u0` must cover every vertex.
    pub fn parse(text: &str, load_graph: impl FnOnce(&str) -> Result<WeightedGraph>) -> Result<Self> {
        let mut graph_ref = None;
        let mut m = None;
        let mut tspan = None;
        let mut records: Vec<(usize, &str, &str, Vec<f64>)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let floats = |ts: &[&str]| -> Result<Vec<f64>> {
                ts.iter()
                    .map(|t| t.parse::<f64>().map_err(|_| Error::parse(lineno, format!("invalid number `{t}`"))))
                    .collect()
            };
            match tokens[0] {
                "graph" if tokens.len() == 2 => graph_ref = Some((lineno, tokens[1])),
                t if t.starts_with("m=") && tokens.len() == 1 => m = Some(floats(&[&t[2..]])?[0]),
                "m" if tokens.len() == 2 => m = Some(floats(&tokens[1..])?[0]),
                "tspan" if tokens.len() == 3 => {
                    let v = floats(&tokens[1..])?;
                    tspan = Some((v[0], v[1]));
                }
                "delta" | "u0" if tokens.len() == 3 => {
                    records.push((lineno, tokens[0], tokens[1], floats(&tokens[2..])?));
                }
                "psi" if (3..=6).contains(&tokens.len()) => {
                    records.push((lineno, tokens[0], tokens[1], floats(&tokens[2..])?));
                }
                other => return Err(Error::parse(lineno, format!("unrecognised problem record `{other}`"))),
            }
        }

        let (graph_line, graph_ref) = graph_ref.ok_or_else(|| Error::parse(1, "missing `graph <path>` line"))?;
        let graph = load_graph(graph_ref).map_err(|e| e.context(format!("problem line {graph_line}")))?;
        let m = m.ok_or_else(|| Error::parse(1, "missing `m=<float>`"))?;
        let (t1, t2) = tspan.ok_or_else(|| Error::parse(1, "missing `tspan <T1> <T2>`"))?;

        let n = graph.len();
        let mut delta = vec![None; n];
        let mut u0 = vec![None; n];
        let mut psi = vec![Poly::zero(); n];
        for (lineno, kind, target, values) in records {
            let targets: Vec<usize> = if target == "all" {
                (0..n).collect()
            } else {
                vec![graph.index_of(target).map_err(|e| Error::parse(lineno, e.to_string()))?]
            };
            for x in targets {
                match kind {
                    "delta" => delta[x] = Some(values[0]),
                    "u0" => u0[x] = Some(values[0]),
                    _ => psi[x] = Poly::new(values.clone()),
                }
            }
        }
        let complete = |v: Vec<Option<f64>>, what: &str| -> Result<VertexField> {
            v.iter()
                .enumerate()
                .map(|(x, v)| v.ok_or_else(|| Error::parse(1, format!("no {what} for vertex {}", graph.label(x)))))
                .collect::<Result<Vec<f64>>>()
                .map(VertexField::new)
        };
        let problem = PmeProblem {
            delta: complete(delta, "delta")?,
            u0: complete(u0, "u0")?,
            graph,
            m,
            psi,
            t1,
            t2,
        };
        problem.validate()?;
        Ok(problem)
    }
}

fn rhs_unchecked(p: &PmeProblem, u: &[f64], t: f64) -> VertexField {
    let um: Vec<f64> = u.iter().map(|v| v.powf(p.m)).collect();
    let lap = laplacian(&p.graph, &um);
    VertexField::from_fn(u.len(), |x| (lap[x] - p.psi[x].eval(t) * um[x]) / p.delta[x])
}

/// `u_t = (Δu^m − ψ u^m) / δ`.
pub fn rhs(p: &PmeProblem, u: &VertexField, t: f64) -> Result<VertexField> {
    u.check_len(&p.graph)?;
    u.check_positive(&p.graph, POSITIVITY_FLOOR)?;
    if let Some(x) = p.delta.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDelta(p.graph.label(x).into()));
    }
    Ok(rhs_unchecked(p, u, t))
}

/// `δu_t − Δu^m + ψu^m` at every vertex.
pub fn equation_residual(p: &PmeProblem, u: &VertexField, u_t: &VertexField, t: f64) -> VertexField {
    let um = u.powf(p.m);
    let lap = laplacian(&p.graph, &um);
    VertexField::from_fn(u.len(), |x| p.delta[x] * u_t[x] - lap[x] + p.psi[x].eval(t) * um[x])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Classical RK4 with this many equal steps per output interval.
    FixedRk4 { substeps: usize },
    /// RK4 with step doubling; the local error per unit time is kept below
    /// the configured tolerance.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutputGrid {
    /// `count` equal intervals over the problem's time span.
    Uniform(usize),
    /// These times plus the span endpoints, sorted and deduplicated.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub tol: f64,
    pub positivity_floor: f64,
    pub blowup_ceiling: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::Adaptive,
            tol: 1e-8,
            positivity_floor: 1e-12,
            blowup_ceiling: 1e12,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VertexField>,
    /// `u_t` from the equation at each stored state.
    pub derivatives: Vec<VertexField>,
    /// Sum of accepted local error estimates over each output interval
    /// (zero for the first entry and for fixed-step runs).
    pub errors: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty trajectory"))
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let eps = 1e-12 * (1.0 + t.abs());
        self.times.iter().position(|&s| (s - t).abs() <= eps)
    }

    /// State at `t`: the stored state when `t` is a grid time, otherwise
    /// cubic Hermite interpolation between neighbouring states.
    pub fn state_at(&self, t: f64) -> Option<VertexField> {
        if let Some(i) = self.locate(t) {
            return Some(self.states[i].clone());
        }
        let (a, b) = self.span();
        if t < a || t > b {
            return None;
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let (y0, y1) = (&self.states[i], &self.states[i + 1]);
        let (d0, d1) = (&self.derivatives[i], &self.derivatives[i + 1]);
        Some(VertexField::from_fn(y0.len(), |x| {
            h00 * y0[x] + h10 * h * d0[x] + h01 * y1[x] + h11 * h * d1[x]
        }))
    }

    /// Indices of stored states with `a ≤ t ≤ b`.
    pub fn indices_within(&self, a: f64, b: f64) -> impl Iterator<Item = usize> + '_ {
        let eps = 1e-12 * (1.0 + a.abs().max(b.abs()));
        (0..self.len()).filter(move |&i| self.times[i] >= a - eps && self.times[i] <= b + eps)
    }
}

fn rk4_step(p: &PmeProblem, u: &[f64], t: f64, h: f64) -> Vec<f64> {
    let k1 = rhs_unchecked(p, u, t);
    let y: Vec<f64> = u.iter().zip(k1.iter()).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = rhs_unchecked(p, &y, t + 0.5 * h);
    let y: Vec<f64> = u.iter().zip(k2.iter()).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = rhs_unchecked(p, &y, t + 0.5 * h);
    let y: Vec<f64> = u.iter().zip(k3.iter()).map(|(a, k)| a + h * k).collect();
    let k4 = rhs_unchecked(p, &y, t + h);
    (0..u.len())
        .map(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Monitor<'a> {
    p: &'a PmeProblem,
    cfg: &'a IntegratorConfig,
}

impl Monitor<'_> {
    /// Blow-up and positivity checks on a candidate state.
    fn check(&self, u: &[f64], t: f64) -> Result<()> {
        let norm = max_abs(u);
        if !(norm <= self.cfg.blowup_ceiling) {
            return Err(Error::BlowUp { t, norm });
        }
        if let Some(x) = u.iter().position(|&v| !(v >= self.cfg.positivity_floor)) {
            return Err(Error::PositivityLoss { t, label: self.p.graph.label(x).into(), value: u[x] });
        }
        Ok(())
    }
}

/// Integrates the problem over `[T1, T2]`, storing states on `grid`.
pub fn integrate(p: &PmeProblem, cfg: &IntegratorConfig, grid: &OutputGrid) -> Result<Trajectory> {
    p.validate()?;
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {}", cfg.tol)));
    }
    let times = output_times(p, grid)?;
    let monitor = Monitor { p, cfg };
    monitor.check(&p.u0, p.t1)?;

    let mut u: Vec<f64> = p.u0.values().to_vec();
    let mut traj = Trajectory {
        times: vec![times[0]],
        states: vec![p.u0.clone()],
        derivatives: vec![rhs_unchecked(p, &u, times[0])],
        errors: vec![0.0],
    };
    let mut steps = 0usize;
    let mut h = (p.t2 - p.t1) / 100.0;

    for w in times.windows(2) {
        let (start, end) = (w[0], w[1]);
        let mut err_sum = 0.0;
        match cfg.scheme {
            Scheme::FixedRk4 { substeps } => {
                if substeps == 0 {
                    return Err(Error::InvalidParameter("substeps must be positive".into()));
                }
                let dt = (end - start) / substeps as f64;
                for k in 0..substeps {
                    let t = start + k as f64 * dt;
                    u = rk4_step(p, &u, t, dt);
                    monitor.check(&u, t + dt)?;
                }
            }
            Scheme::Adaptive => {
                let mut t = start;
                while t < end {
                    steps += 1;
                    if steps > cfg.max_steps {
                        return Err(Error::InvalidParameter(format!("step budget {} exhausted at t = {t}", cfg.max_steps)));
                    }
                    // absorb remainders too small to step on their own
                    let clipped = t + 1.01 * h >= end;
                    let step = if clipped { end - t } else { h };
                    if step <= 1e-15 * (1.0 + t.abs()) {
                        let norm = max_abs(&u);
                        // step collapse while the solution explodes
                        if norm > 1e6 * max_abs(&p.u0).max(1.0) {
                            return Err(Error::BlowUp { t, norm });
                        }
                        return Err(Error::StepUnderflow { t, h: step });
                    }
                    let full = rk4_step(p, &u, t, step);
                    let mid = rk4_step(p, &u, t, 0.5 * step);
                    let half = rk4_step(p, &mid, t + 0.5 * step, 0.5 * step);
                    let err = full
                        .iter()
                        .zip(&half)
                        .map(|(a, b)| (b - a).abs() / 15.0 / b.abs().max(1.0))
                        .fold(0.0, f64::max);
                    let bad = !err.is_finite() || half.iter().any(|v| !v.is_finite() || *v <= 0.0);
                    let target = cfg.tol * step;
                    let accepted = !bad && err <= target;
                    if accepted {
                        let next: Vec<f64> = full.iter().zip(&half).map(|(a, b)| b + (b - a) / 15.0).collect();
                        monitor.check(&next, t + step)?;
                        u = next;
                        t = if clipped { end } else { t + step };
                        err_sum += err;
                    }
                    let factor = if bad {
                        0.25
                    } else if err == 0.0 {
                        4.0
                    } else {
                        (0.9 * (target / err).powf(0.25)).clamp(0.2, 4.0)
                    };
                    h = if accepted && clipped { h.max(step * factor) } else { step * factor };
                }
            }
        }
        let state = VertexField::new(u.clone());
        traj.derivatives.push(rhs_unchecked(p, &u, end));
        traj.states.push(state);
        traj.times.push(end);
        traj.errors.push(err_sum);
    }
    Ok(traj)
}

fn output_times(p: &PmeProblem, grid: &OutputGrid) -> Result<Vec<f64>> {
    let mut times = match grid {
        OutputGrid::Uniform(0) => return Err(Error::InvalidParameter("output grid needs at least one interval".into())),
        OutputGrid::Uniform(n) => {
            let span = p.t2 - p.t1;
            let mut v: Vec<f64> = (0..*n).map(|i| p.t1 + span * i as f64 / *n as f64).collect();
            v.push(p.t2);
            v
        }
        OutputGrid::Times(ts) => {
            if let Some(t) = ts.iter().find(|&&t| !(t >= p.t1 && t <= p.t2)) {
                return Err(Error::InvalidParameter(format!("output time {t} outside [{}, {}]", p.t1, p.t2)));
            }
            let mut v = ts.clone();
            v.push(p.t1);
            v.push(p.t2);
            v
        }
    };
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    Ok(times)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRow {
    pub t: f64,
    pub u_positive: bool,
    pub ut_positive: bool,
    pub delta_negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub m_gt_one: bool,
    pub rows: Vec<HypothesisRow>,
}

impl HypothesisReport {
    pub fn all_hold(&self) -> bool {
        self.m_gt_one && self.rows.iter().all(HypothesisRow::holds)
    }

    /// True when every stored state with time in `[a, b]` satisfies the
    /// hypotheses.
    pub fn hold_within(&self, a: f64, b: f64) -> bool {
        let eps = 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.m_gt_one && self.rows.iter().filter(|r| r.t >= a - eps && r.t <= b + eps).all(HypothesisRow::holds)
    }
}

impl HypothesisRow {
    pub fn holds(&self) -> bool {
        self.u_positive && self.ut_positive && self.delta_negative
    }
}

/// Hypotheses of a single state: `u > 0`, `u_t > 0` (from the equation) and
/// `δ < 0`, at every vertex.
pub fn state_hypotheses(p: &PmeProblem, u: &VertexField, t: f64) -> HypothesisRow {
    let u_positive = u.is_positive();
    let ut_positive = u_positive && rhs_unchecked(p, u, t).iter().all(|&v| v > 0.0);
    HypothesisRow { t, u_positive, ut_positive, delta_negative: p.delta.iter().all(|&d| d < 0.0) }
}

/// Reports, never fails.
pub fn hypothesis_check(p: &PmeProblem, traj: &Trajectory) -> HypothesisReport {
    HypothesisReport {
        m_gt_one: p.m > 1.0,
        rows: traj.times.iter().zip(&traj.states).map(|(&t, u)| state_hypotheses(p, u, t)).collect(),
    }
}
