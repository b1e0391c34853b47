//! Browser bindings for the graph porous medium toolkit. Every export takes
//! plain numbers and strings and returns a JSON document for the page to draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use graph_pme::estimate::HarnackVerifier;
use graph_pme::experiment::constant_solution;
use graph_pme::generate::{generate_graph, GraphSpec, MeasureMode, WeightMode};
use graph_pme::kernel::{heat_kernel_series, mass_check, KernelBounds, DEFAULT_EPS};
use graph_pme::paths::{distances_from, DEFAULT_PATH_CAP};
use graph_pme::pme::{hypothesis_check, integrate, IntegratorConfig, OutputGrid, PmeProblem};
use graph_pme::poly::Poly;
use graph_pme::{Error, GraphConstants, Result, VertexField, WeightedGraph};

/// Largest graph the page may request.
pub const MAX_VERTICES: usize = 60;

fn build_graph(spec: &str, random_weights: bool, seed: u64, measure: MeasureMode) -> Result<WeightedGraph> {
    let spec: GraphSpec = spec.parse()?;
    if spec.vertex_count() > MAX_VERTICES {
        return Err(Error::InvalidParameter(format!("the demo is limited to {MAX_VERTICES} vertices")));
    }
    let weights = if random_weights { WeightMode::Random } else { WeightMode::Unit };
    generate_graph(spec, weights, measure, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn vertex(g: &WeightedGraph, label: &str) -> Result<usize> {
    g.index_of(label).or_else(|_| {
        label
            .parse::<usize>()
            .ok()
            .filter(|&i| i < g.len())
            .ok_or_else(|| Error::InvalidParameter(format!("no vertex `{label}`")))
    })
}

fn graph_json(g: &WeightedGraph) -> Value {
    let c = GraphConstants::of(g);
    json!({
        "name": g.name(),
        "labels": g.labels(),
        "theta": g.thetas(),
        "edges": g.edges().iter().map(|e| json!([e.a, e.b, e.weight])).collect::<Vec<_>>(),
        "d_theta": c.d_theta,
        "d_omega": c.d_omega,
        "omega_min": c.omega_min,
        "theta_max": c.theta_max,
    })
}

/// Heat kernel row `p(t, source, ·)` with both bounds at every vertex.
pub fn kernel_profile(spec: &str, random_weights: bool, seed: u64, t: f64, m: f64, c0: f64, source: &str) -> Result<String> {
    let g = build_graph(spec, random_weights, seed, MeasureMode::Degree)?;
    let x = vertex(&g, source)?;
    let k = heat_kernel_series(&g, t, DEFAULT_EPS)?;
    let bounds = KernelBounds::new(&g);
    let upper = bounds.upper(t, x, c0, m)?;
    let dist = distances_from(&g, x);
    let rows = (0..g.len())
        .map(|y| {
            let p = k.get(x, y);
            let lower = bounds.lower(t, x, y, c0, m)?;
            Ok(json!({
                "vertex": y,
                "distance": dist[y],
                "p": p,
                "upper": upper,
                "lower": lower,
                "upper_holds": p <= upper + 1e-9,
                "lower_holds": lower <= p + 1e-9,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mass = mass_check(&k, &g);
    Ok(json!({
        "graph": graph_json(&g),
        "source": x,
        "t": t,
        "m": m,
        "order": k.order,
        "mass_deviation": mass.max_deviation,
        "rows": rows,
    })
    .to_string())
}

/// Integrates `Δu^m = δu_t + ψu^m` from a bump of height `1 + bump` at the
/// first vertex that halves with each step of graph distance.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    spec: &str,
    random_weights: bool,
    seed: u64,
    m: f64,
    delta: f64,
    psi: f64,
    bump: f64,
    t_end: f64,
    outputs: usize,
) -> Result<String> {
    let g = build_graph(spec, random_weights, seed, MeasureMode::Unit)?;
    let dist = distances_from(&g, 0);
    let u0 = VertexField::from_fn(g.len(), |x| 1.0 + bump * 0.5f64.powi(dist[x].unwrap_or(0) as i32));
    let n = g.len();
    let p = PmeProblem {
        graph: g,
        m,
        delta: VertexField::constant(n, delta),
        psi: vec![Poly::constant(psi); n],
        u0,
        t1: 0.0,
        t2: t_end,
    };
    p.validate()?;
    let traj = integrate(&p, &IntegratorConfig::default(), &OutputGrid::Uniform(outputs.clamp(1, 400)))?;
    let hyp = hypothesis_check(&p, &traj);
    Ok(json!({
        "graph": graph_json(&p.graph),
        "times": traj.times,
        "states": traj.states.iter().map(|u| u.values()).collect::<Vec<_>>(),
        "hypotheses": hyp.rows.iter().map(|r| r.holds()).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Harnack check on the spatially constant solution from `u0`, with `T1`
/// and `T2` given as fractions of the blow-up time.
#[allow(clippy::too_many_arguments)]
pub fn harnack(
    spec: &str,
    seed: u64,
    m: f64,
    psi: f64,
    u0: f64,
    x: &str,
    y: &str,
    f1: f64,
    f2: f64,
) -> Result<String> {
    if !(0.0 <= f1 && f1 < f2 && f2 < 1.0) {
        return Err(Error::InvalidParameter("need 0 ≤ T1 < T2 < blow-up time".into()));
    }
    if !(m > 1.0 && psi > 0.0 && u0 > 0.0) {
        return Err(Error::InvalidParameter("need m > 1, ψ > 0 and u0 > 0".into()));
    }
    let g = build_graph(spec, false, seed, MeasureMode::Unit)?;
    let (x, y) = (vertex(&g, x)?, vertex(&g, y)?);
    let blowup = u0.powf(1.0 - m) / ((m - 1.0) * psi);
    let (t1, t2) = (f1 * blowup, f2 * blowup);
    let p = PmeProblem::uniform(g, m, -1.0, Poly::constant(psi), u0, 0.0, t2)?;
    let traj = integrate(&p, &IntegratorConfig::default(), &OutputGrid::Times(vec![t1]))?;
    let v = HarnackVerifier::new(&p, &traj)?;
    let r = v.bound(x, y, t1, t2, DEFAULT_PATH_CAP)?;
    let b = v.bounded_psi(x, y, t1, t2, psi, DEFAULT_PATH_CAP)?;
    Ok(json!({
        "graph": graph_json(&p.graph),
        "t1": t1,
        "t2": t2,
        "blowup": blowup,
        "exact": [constant_solution(u0, m, psi, t1), constant_solution(u0, m, psi, t2)],
        "lhs": r.lhs,
        "rhs": r.rhs,
        "exponent": r.exponent,
        "distance": r.distance,
        "phi": r.phi.value,
        "path": r.phi.path,
        "paths_considered": r.phi.paths_considered,
        "status": r.status.to_string(),
        "bounded_rhs": b.rhs,
        "bounded_exponent": b.exponent,
        "ordering_holds": b.ordering_holds,
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = kernelProfile)]
pub fn kernel_profile_js(
    spec: &str,
    random_weights: bool,
    seed: u32,
    t: f64,
    m: f64,
    c0: f64,
    source: &str,
) -> std::result::Result<String, JsError> {
    js(kernel_profile(spec, random_weights, seed as u64, t, m, c0, source))
}

#[wasm_bindgen(js_name = simulate)]
#[allow(clippy::too_many_arguments)]
pub fn simulate_js(
    spec: &str,
    random_weights: bool,
    seed: u32,
    m: f64,
    delta: f64,
    psi: f64,
    bump: f64,
    t_end: f64,
    outputs: u32,
) -> std::result::Result<String, JsError> {
    js(simulate(spec, random_weights, seed as u64, m, delta, psi, bump, t_end, outputs as usize))
}

#[wasm_bindgen(js_name = harnack)]
#[allow(clippy::too_many_arguments)]
pub fn harnack_js(
    spec: &str,
    seed: u32,
    m: f64,
    psi: f64,
    u0: f64,
    x: &str,
    y: &str,
    f1: f64,
    f2: f64,
) -> std::result::Result<String, JsError> {
    js(harnack(spec, seed as u64, m, psi, u0, x, y, f1, f2))
}
