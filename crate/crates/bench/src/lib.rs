//! Fixed benchmark instances.

use tzitzeica::testkit::{random_field, random_graph, rng};
use tzitzeica::{ProblemSpec, WeightedGraph};

/// Graph with `n` vertices from a fixed seed.
pub fn graph(n: usize) -> WeightedGraph {
    random_graph(&mut rng(n as u64), n, 0.5..2.0, 0.5..2.0, 0.3)
}

pub fn classic(n: usize) -> ProblemSpec {
    let mut r = rng(1000 + n as u64);
    ProblemSpec::classic(
        random_field(&mut r, n, 0.5..2.0),
        random_field(&mut r, n, -2.0..-0.5),
        1.2,
        0.8,
    )
    .expect("valid spec")
}

pub fn generalized(n: usize) -> ProblemSpec {
    let mut r = rng(2000 + n as u64);
    ProblemSpec::generalized(
        random_field(&mut r, n, 0.5..1.0),
        random_field(&mut r, n, 1.5..2.0),
        1.0,
        1.0,
    )
    .expect("valid spec")
}
