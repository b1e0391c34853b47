use std::ops::{Deref, Index};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Default floor below which a field is not treated as strictly positive.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// One real value per vertex, aligned with the graph's vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexField(Vec<f64>);

impl VertexField {
    pub fn new(values: Vec<f64>) -> Self {
        VertexField(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexField(vec![c; n])
    }

    /// Builds a field and checks it has one value per vertex of `g`.
    pub fn on(g: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.len() {
            return Err(Error::FieldLength { expected: g.len(), got: values.len() });
        }
        Ok(VertexField(values))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        VertexField((0..n).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        VertexField(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        VertexField(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn powf(&self, p: f64) -> Self {
        self.map(|v| v.powf(p))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    /// Errors on the first vertex where the field is below `floor`.
    pub fn check_positive(&self, g: &WeightedGraph, floor: f64) -> Result<()> {
        match self.0.iter().position(|&v| !(v >= floor) || v <= 0.0) {
            Some(x) => Err(Error::NonPositiveField { label: g.label(x).to_string(), value: self.0[x] }),
            None => Ok(()),
        }
    }

    pub fn check_len(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.len() {
            return Err(Error::FieldLength { expected: g.len(), got: self.len() });
        }
        Ok(())
    }

    /// Parses a field document of `f <label> <float>` lines; every vertex of
    /// `g` must be assigned exactly once.
    pub fn parse(g: &WeightedGraph, text: &str) -> Result<Self> {
        let mut values = vec![None; g.len()];
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 || tokens[0] != "f" {
                return Err(Error::parse(lineno, "expected `f <label> <float>`"));
            }
            let x = g.index_of(tokens[1]).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let v: f64 = tokens[2]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid number `{}`", tokens[2])))?;
            if values[x].replace(v).is_some() {
                return Err(Error::parse(lineno, format!("vertex {} assigned twice", tokens[1])));
            }
        }
        let values: Option<Vec<f64>> = values.iter().copied().collect();
        match values {
            Some(v) => Ok(VertexField(v)),
            None => {
                let missing = values_missing(g, text);
                Err(Error::parse(text.lines().count().max(1), format!("no value for vertex {missing}")))
            }
        }
    }
}

fn values_missing(g: &WeightedGraph, text: &str) -> String {
    g.labels()
        .iter()
        .find(|l| !text.lines().any(|line| line.split_whitespace().nth(1) == Some(l.as_str())))
        .cloned()
        .unwrap_or_default()
}

impl Deref for VertexField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for VertexField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for VertexField {
    fn from(v: Vec<f64>) -> Self {
        VertexField(v)
    }
}
