//! Random instance generators for test ensembles and benchmarks.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, VertexField, WeightedGraph};
use crate::model::ProblemSpec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus extra edges with probability `extra`, with
/// measures and weights drawn uniformly from the given ranges.
pub fn random_graph(
    rng: &mut impl Rng,
    n: usize,
    mu: Range<f64>,
    w: Range<f64>,
    extra: f64,
) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        edges.push(Edge::new(u, v, rng.random_range(w.clone())));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !present[a][b] && rng.random_bool(extra) {
                edges.push(Edge::new(a, b, rng.random_range(w.clone())));
            }
        }
    }
    let mu = (0..n).map(|_| rng.random_range(mu.clone())).collect();
    WeightedGraph::from_indices(mu, edges).expect("generated graph is valid")
}

/// Graph with 2..=max_n vertices, μ, w ∈ (0.5, 2).
pub fn standard_graph(rng: &mut impl Rng, max_n: usize) -> WeightedGraph {
    let n = rng.random_range(2..=max_n);
    random_graph(rng, n, 0.5..2.0, 0.5..2.0, 0.3)
}

pub fn random_field(rng: &mut impl Rng, n: usize, range: Range<f64>) -> VertexField {
    VertexField::from_fn(n, |_| rng.random_range(range.clone()))
}

/// Exponent pair with A, B ∈ (0.5, 2).
pub fn exponents(rng: &mut impl Rng) -> (f64, f64) {
    (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0))
}

/// Classic instance with h₁ ∈ (0.5, 2) and h₂ drawn from `h2`.
pub fn classic_instance(rng: &mut impl Rng, max_n: usize, h2: Range<f64>) -> (WeightedGraph, ProblemSpec) {
    let g = standard_graph(rng, max_n);
    let n = g.len();
    let h1 = random_field(rng, n, 0.5..2.0);
    let h2 = random_field(rng, n, h2);
    let (a, b) = exponents(rng);
    let spec = ProblemSpec::classic(h1, h2, a, b).expect("valid classic spec");
    (g, spec)
}

/// Generalized instance with h₁, h₂ ∈ (0.5, 2).
pub fn generalized_instance(rng: &mut impl Rng, max_n: usize) -> (WeightedGraph, ProblemSpec) {
    let g = standard_graph(rng, max_n);
    let n = g.len();
    let h1 = random_field(rng, n, 0.5..2.0);
    let h2 = random_field(rng, n, 0.5..2.0);
    let (a, b) = exponents(rng);
    let spec = ProblemSpec::generalized(h1, h2, a, b).expect("valid generalized spec");
    (g, spec)
}

/// Generalized instance with A·max h₁ < B·min h₂ (`positive`) or
/// A·min h₁ > B·max h₂, the ratio between the two sides in (1.5, 4).
pub fn multiplicity_instance(
    rng: &mut impl Rng,
    max_n: usize,
    positive: bool,
) -> (WeightedGraph, ProblemSpec) {
    let g = standard_graph(rng, max_n);
    let n = g.len();
    let (a, b) = exponents(rng);
    let small = random_field(rng, n, 0.5..1.0);
    let gap = rng.random_range(1.5..4.0);
    let large_floor = small.max_value() * gap;
    let large = random_field(rng, n, large_floor..large_floor * 1.5);
    let spec = if positive {
        // A·h₁ small, B·h₂ large
        let h1 = VertexField::from_fn(n, |x| small[x] / a);
        let h2 = VertexField::from_fn(n, |x| large[x] / b);
        ProblemSpec::generalized(h1, h2, a, b)
    } else {
        let h1 = VertexField::from_fn(n, |x| large[x] / a);
        let h2 = VertexField::from_fn(n, |x| small[x] / b);
        ProblemSpec::generalized(h1, h2, a, b)
    };
    (g, spec.expect("valid generalized spec"))
}
