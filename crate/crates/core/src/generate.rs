//! Deterministic graph generators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedGraph};

pub const MAX_CONNECT_RETRIES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSpec {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    /// Centre plus `n` leaves.
    Star(usize),
    Gnp { n: usize, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    #[default]
    Unit,
    /// Uniform in `[0.5, 2.0]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureMode {
    #[default]
    Unit,
    Degree,
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// `path_<n>`, `cycle_<n>`, `complete_<n>`, `star_<n>`, `random_gnp_<n>_<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown graph generator `{s}`"));
        let count = |v: &str| v.parse::<usize>().map_err(|_| bad());
        let spec = if let Some(rest) = s.strip_prefix("random_gnp_") {
            let (n, p) = rest.split_once('_').ok_or_else(bad)?;
            GraphSpec::Gnp { n: count(n)?, p: p.parse().map_err(|_| bad())? }
        } else if let Some(n) = s.strip_prefix("path_") {
            GraphSpec::Path(count(n)?)
        } else if let Some(n) = s.strip_prefix("cycle_") {
            GraphSpec::Cycle(count(n)?)
        } else if let Some(n) = s.strip_prefix("complete_") {
            GraphSpec::Complete(count(n)?)
        } else if let Some(n) = s.strip_prefix("star_") {
            GraphSpec::Star(count(n)?)
        } else {
            return Err(bad());
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Path(n) => write!(f, "path_{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle_{n}"),
            GraphSpec::Complete(n) => write!(f, "complete_{n}"),
            GraphSpec::Star(n) => write!(f, "star_{n}"),
            GraphSpec::Gnp { n, p } => write!(f, "random_gnp_{n}_{p}"),
        }
    }
}

impl GraphSpec {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            GraphSpec::Path(n) | GraphSpec::Complete(n) => n >= 1,
            GraphSpec::Cycle(n) => n >= 3,
            GraphSpec::Star(n) => n >= 1,
            GraphSpec::Gnp { n, p } => n >= 1 && (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid generator parameters `{self}`")))
        }
    }

    pub fn vertex_count(&self) -> usize {
        match *self {
            GraphSpec::Path(n) | GraphSpec::Cycle(n) | GraphSpec::Complete(n) => n,
            GraphSpec::Star(n) => n + 1,
            GraphSpec::Gnp { n, .. } => n,
        }
    }

    fn edge_pairs<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(usize, usize)> {
        match *self {
            GraphSpec::Path(n) => (1..n).map(|i| (i - 1, i)).collect(),
            GraphSpec::Cycle(n) => (0..n).map(|i| (i, (i + 1) % n)).collect(),
            GraphSpec::Complete(n) => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
            GraphSpec::Star(n) => (1..=n).map(|i| (0, i)).collect(),
            GraphSpec::Gnp { n, p } => {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if rng.random::<f64>() < p {
                            out.push((i, j));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Builds a graph from `spec`. Random G(n,p) graphs are redrawn until
/// connected, up to [`MAX_CONNECT_RETRIES`] attempts.
pub fn generate_graph<R: Rng + ?Sized>(
    spec: GraphSpec,
    weights: WeightMode,
    measure: MeasureMode,
    rng: &mut R,
) -> Result<WeightedGraph> {
    spec.validate()?;
    let attempts = if matches!(spec, GraphSpec::Gnp { .. }) { MAX_CONNECT_RETRIES } else { 1 };
    for _ in 0..attempts {
        let pairs = spec.edge_pairs(rng);
        let mut b = GraphBuilder::new(spec.to_string());
        for i in 0..spec.vertex_count() {
            b = b.vertex(format!("v{i}"), 1.0);
        }
        for (i, j) in pairs {
            let w = match weights {
                WeightMode::Unit => 1.0,
                WeightMode::Random => rng.random_range(0.5..=2.0),
            };
            b = b.edge(format!("v{i}"), format!("v{j}"), w);
        }
        let g = b.build()?;
        if !g.is_connected() {
            continue;
        }
        return match measure {
            MeasureMode::Unit => Ok(g),
            MeasureMode::Degree if g.len() == 1 => Ok(g),
            MeasureMode::Degree => g.with_degree_measure(),
        };
    }
    Err(Error::ConnectivityRetries(attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn parse_specs() {
        assert_eq!("path_3".parse::<GraphSpec>().unwrap(), GraphSpec::Path(3));
        assert_eq!("random_gnp_10_0.4".parse::<GraphSpec>().unwrap(), GraphSpec::Gnp { n: 10, p: 0.4 });
        assert!("cycle_2".parse::<GraphSpec>().is_err());
        assert!("grid_3".parse::<GraphSpec>().is_err());
        assert!("random_gnp_10_1.5".parse::<GraphSpec>().is_err());
        for s in ["path_3", "cycle_5", "complete_4", "star_3", "random_gnp_7_0.5"] {
            assert_eq!(s.parse::<GraphSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn cycle4() {
        let g = generate_graph(GraphSpec::Cycle(4), WeightMode::Unit, MeasureMode::Unit, &mut rng(0)).unwrap();
        assert_eq!((g.len(), g.edge_count()), (4, 4));
        assert!(g.degrees().iter().all(|&d| d == 2.0));
        let g = generate_graph(GraphSpec::Cycle(4), WeightMode::Random, MeasureMode::Unit, &mut rng(0)).unwrap();
        for x in 0..4 {
            let s: f64 = g.neighbors(x).iter().map(|&(_, w)| w).sum();
            assert_eq!(g.degree(x), s);
            assert!(g.neighbors(x).iter().all(|&(_, w)| (0.5..=2.0).contains(&w)));
        }
    }

    #[test]
    fn path3_end_to_end_distance() {
        let g = generate_graph(GraphSpec::Path(3), WeightMode::Unit, MeasureMode::Unit, &mut rng(0)).unwrap();
        assert_eq!(distance(&g, 0, 2), Some(2));
    }

    #[test]
    fn gnp_is_deterministic_and_connected() {
        let spec = GraphSpec::Gnp { n: 10, p: 0.4 };
        let a = generate_graph(spec, WeightMode::Random, MeasureMode::Degree, &mut rng(1)).unwrap();
        let b = generate_graph(spec, WeightMode::Random, MeasureMode::Degree, &mut rng(1)).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.to_document(), b.to_document());
        assert!(a.is_connected());
        assert!(a.measure_is_degree(0.0));
    }

    #[test]
    fn sparse_gnp_exhausts_retries() {
        let spec = GraphSpec::Gnp { n: 30, p: 0.0 };
        let err = generate_graph(spec, WeightMode::Unit, MeasureMode::Unit, &mut rng(1)).unwrap_err();
        assert_eq!(err, Error::ConnectivityRetries(MAX_CONNECT_RETRIES));
    }
}
