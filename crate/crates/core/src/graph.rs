//! Weighted graphs with a vertex measure.
//!
//! A [`WeightedGraph`] is finite, undirected and immutable once built. Every
//! edge carries a positive weight `ω_xy = ω_yx` and every vertex a positive
//! measure `ϑ(x)`. Vertices are addressed by dense indices internally and by
//! string labels in documents and reports.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    theta: Vec<f64>,
    edges: Vec<Edge>,
    /// Neighbour lists sorted by neighbour index.
    adj: Vec<Vec<(usize, f64)>>,
}

/// Incremental construction; all invariants are checked in [`GraphBuilder::build`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    name: String,
    vertices: Vec<(String, f64)>,
    edges: Vec<(String, String, f64)>,
}

impl GraphBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        GraphBuilder { name: name.into(), ..Default::default() }
    }

    pub fn vertex(mut self, label: impl Into<String>, theta: f64) -> Self {
        self.vertices.push((label.into(), theta));
        self
    }

    pub fn edge(mut self, a: impl Into<String>, b: impl Into<String>, weight: f64) -> Self {
        self.edges.push((a.into(), b.into(), weight));
        self
    }

    pub fn build(self) -> Result<WeightedGraph> {
        build_graph(self.name, self.vertices, self.edges, None)
    }
}

/// Shared constructor for the builder and the document parser. `lines`, when
/// given, maps vertex/edge positions to document line numbers for diagnostics.
fn build_graph(
    name: String,
    vertices: Vec<(String, f64)>,
    edges: Vec<(String, String, f64)>,
    lines: Option<(&[usize], &[usize])>,
) -> Result<WeightedGraph> {
    let at = |err: Error, line: Option<usize>| match line {
        Some(l) => Error::parse(l, err.to_string()),
        None => err,
    };

    if vertices.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut labels = Vec::with_capacity(vertices.len());
    let mut index = HashMap::with_capacity(vertices.len());
    let mut theta = Vec::with_capacity(vertices.len());
    for (i, (label, t)) in vertices.into_iter().enumerate() {
        let line = lines.map(|(v, _)| v[i]);
        if !(t > 0.0) || !t.is_finite() {
            return Err(at(Error::NonPositiveMeasure { label, theta: t }, line));
        }
        if index.insert(label.clone(), labels.len()).is_some() {
            return Err(at(Error::DuplicateVertex(label), line));
        }
        labels.push(label);
        theta.push(t);
    }

    let n = labels.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut out_edges = Vec::with_capacity(edges.len());
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    for (i, (a, b, w)) in edges.into_iter().enumerate() {
        let line = lines.map(|(_, e)| e[i]);
        let ia = *index.get(&a).ok_or_else(|| at(Error::UnknownVertex(a.clone()), line))?;
        let ib = *index.get(&b).ok_or_else(|| at(Error::UnknownVertex(b.clone()), line))?;
        if ia == ib {
            return Err(at(Error::SelfLoop(a), line));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(at(Error::NonPositiveWeight { a, b, weight: w }, line));
        }
        let key = (ia.min(ib), ia.max(ib));
        if seen.insert(key, ()).is_some() {
            return Err(at(Error::DuplicateEdge { a, b }, line));
        }
        adj[ia].push((ib, w));
        adj[ib].push((ia, w));
        out_edges.push(Edge { a: ia, b: ib, weight: w });
    }
    for list in &mut adj {
        list.sort_by_key(|&(j, _)| j);
    }

    Ok(WeightedGraph { name, labels, index, theta, edges: out_edges, adj })
}

impl WeightedGraph {
    pub fn builder(name: impl Into<String>) -> GraphBuilder {
        GraphBuilder::new(name)
    }

    /// Parses the line-oriented graph document:
    ///
    /// ```text
    /// graph <name>
    /// v <label> theta=<float>
    /// e <label> <label> w=<float>
    /// # comment
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut name: Option<String> = None;
        let mut vertices = Vec::new();
        let mut vertex_lines = Vec::new();
        let mut edges = Vec::new();
        let mut edge_lines = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "graph" => {
                    if name.is_some() {
                        return Err(Error::parse(lineno, "duplicate graph header"));
                    }
                    if tokens.len() != 2 {
                        return Err(Error::parse(lineno, "expected `graph <name>`"));
                    }
                    name = Some(tokens[1].to_string());
                }
                _ if name.is_none() => {
                    return Err(Error::parse(lineno, "document must start with `graph <name>`"));
                }
                "v" => {
                    if tokens.len() != 3 {
                        return Err(Error::parse(lineno, "expected `v <label> theta=<float>`"));
                    }
                    let theta = keyed_float(tokens[2], "theta", lineno)?;
                    vertices.push((tokens[1].to_string(), theta));
                    vertex_lines.push(lineno);
                }
                "e" => {
                    if tokens.len() != 4 {
                        return Err(Error::parse(lineno, "expected `e <label> <label> w=<float>`"));
                    }
                    let w = keyed_float(tokens[3], "w", lineno)?;
                    edges.push((tokens[1].to_string(), tokens[2].to_string(), w));
                    edge_lines.push(lineno);
                }
                other => {
                    return Err(Error::parse(lineno, format!("unknown record `{other}`")));
                }
            }
        }
        let name = name.ok_or_else(|| Error::parse(1, "empty document: missing `graph <name>` header"))?;
        if vertices.is_empty() {
            return Err(Error::parse(text.lines().count().max(1), "graph declares no vertices"));
        }
        build_graph(name, vertices, edges, Some((&vertex_lines, &edge_lines)))
    }

    /// Renders the graph back into the document format.
    pub fn to_document(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph {}", self.name);
        for (label, t) in self.labels.iter().zip(&self.theta) {
            let _ = writeln!(s, "v {label} theta={t:?}");
        }
        for e in &self.edges {
            let _ = writeln!(s, "e {} {} w={:?}", self.labels[e.a], self.labels[e.b], e.weight);
        }
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn theta(&self, x: usize) -> f64 {
        self.theta[x]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adj[x].binary_search_by_key(&y, |&(j, _)| j).ok().map(|k| self.adj[x][k].1)
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.adj[x].iter().map(|&(_, w)| w).sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.len()).map(|x| self.degree(x)).collect()
    }

    /// Same graph with the measure replaced by `ϑ(x) = deg(x)`. Isolated
    /// vertices would get measure zero, so they are rejected.
    pub fn with_degree_measure(&self) -> Result<Self> {
        let mut g = self.clone();
        for x in 0..g.len() {
            let d = g.degree(x);
            if d <= 0.0 {
                return Err(Error::NonPositiveMeasure { label: g.labels[x].clone(), theta: d });
            }
            g.theta[x] = d;
        }
        Ok(g)
    }

    /// True when `ϑ(x) = deg(x)` at every vertex, to relative tolerance `rtol`.
    pub fn measure_is_degree(&self, rtol: f64) -> bool {
        (0..self.len()).all(|x| {
            let d = self.degree(x);
            (self.theta[x] - d).abs() <= rtol * d.max(self.theta[x])
        })
    }

    pub fn is_connected(&self) -> bool {
        crate::paths::distances_from(self, 0).iter().all(Option::is_some)
    }

    pub fn total_measure(&self) -> f64 {
        self.theta.iter().sum()
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn keyed_float(token: &str, key: &str, line: usize) -> Result<f64> {
    let value = token
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::parse(line, format!("expected `{key}=<float>`, found `{token}`")))?;
    value
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid number `{value}`")))
}

/// Derived scalars of a graph. See [`GraphConstants::of`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphConstants {
    pub degree: Vec<f64>,
    /// `max_{y∼x} deg(x)/ω_xy` (0 for an edgeless graph).
    pub d_omega: f64,
    /// `max_x deg(x)/ϑ(x)`.
    pub d_theta: f64,
    /// Smallest edge weight (`+∞` for an edgeless graph).
    pub omega_min: f64,
    pub theta_max: f64,
}

impl GraphConstants {
    pub fn of(g: &WeightedGraph) -> Self {
        let degree = g.degrees();
        let mut d_omega = 0.0f64;
        let mut omega_min = f64::INFINITY;
        for (x, &deg) in degree.iter().enumerate() {
            for &(_, w) in g.neighbors(x) {
                d_omega = d_omega.max(deg / w);
                omega_min = omega_min.min(w);
            }
        }
        let d_theta = (0..g.len()).map(|x| degree[x] / g.theta(x)).fold(0.0, f64::max);
        let theta_max = g.thetas().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        GraphConstants { degree, d_omega, d_theta, omega_min, theta_max }
    }
}
