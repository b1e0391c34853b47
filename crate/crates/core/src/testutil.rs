//! Fixtures shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generate::{generate_graph, GraphSpec, MeasureMode, WeightMode};
use crate::graph::WeightedGraph;

pub fn k2() -> WeightedGraph {
    WeightedGraph::parse("graph k2\nv a theta=1\nv b theta=1\ne a b w=1\n").unwrap()
}

pub fn star3() -> WeightedGraph {
    generate_graph(GraphSpec::Star(3), WeightMode::Unit, MeasureMode::Unit, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap()
}

/// Connected G(n, p) graph with weights in `[0.5, 2]`; `degree` selects
/// `ϑ = deg` instead of `ϑ ≡ 1`.
pub fn random_graph(n: usize, seed: u64, degree: bool) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(0.15..0.6);
    let measure = if degree { MeasureMode::Degree } else { MeasureMode::Unit };
    generate_graph(GraphSpec::Gnp { n, p }, WeightMode::Random, measure, &mut rng)
        .or_else(|_| generate_graph(GraphSpec::Path(n), WeightMode::Random, measure, &mut rng))
        .unwrap()
}
