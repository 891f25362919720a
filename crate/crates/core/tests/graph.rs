use approx::assert_relative_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use tzitzeica::testkit::{random_field, random_graph, rng, standard_graph};
use tzitzeica::{elliptic_constant, graph_constants, Edge, Error, VertexField, WeightedGraph};

/// Second eigenvalue of −Δ from a full dense eigendecomposition of the
/// symmetric matrix W̃ with W̃_xy = −w_xy/√(μ_x μ_y), W̃_xx = deg(x)/μ_x.
fn lambda1_oracle(g: &WeightedGraph) -> f64 {
    let n = g.len();
    let mu = g.mu();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        let off = -e.weight / (mu[e.a] * mu[e.b]).sqrt();
        m[(e.a, e.b)] += off;
        m[(e.b, e.a)] += off;
        m[(e.a, e.a)] += e.weight / mu[e.a];
        m[(e.b, e.b)] += e.weight / mu[e.b];
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

fn total_weight(g: &WeightedGraph) -> f64 {
    g.edges().iter().map(|e| e.weight).sum()
}

#[test]
fn construction_rejects_bad_input() {
    let e = |a, b, w| Edge::new(a, b, w);
    assert!(matches!(
        WeightedGraph::from_indices(vec![1.0, 0.0], vec![e(0, 1, 1.0)]),
        Err(Error::NonPositiveMeasure { .. })
    ));
    assert!(matches!(
        WeightedGraph::from_indices(vec![1.0, 1.0], vec![e(0, 1, -1.0)]),
        Err(Error::NonPositiveWeight { .. })
    ));
    assert!(matches!(
        WeightedGraph::from_indices(vec![1.0, 1.0], vec![e(0, 0, 1.0)]),
        Err(Error::SelfLoop { .. })
    ));
    assert!(matches!(
        WeightedGraph::from_indices(vec![1.0, 1.0], vec![e(0, 1, 1.0), e(1, 0, 2.0)]),
        Err(Error::DuplicateEdge { .. })
    ));
    assert!(matches!(
        WeightedGraph::from_indices(vec![1.0; 4], vec![e(0, 1, 1.0), e(2, 3, 1.0)]),
        Err(Error::Disconnected { .. })
    ));
    assert!(matches!(
        WeightedGraph::from_indices(vec![1.0, 1.0], vec![e(0, 2, 1.0)]),
        Err(Error::UnknownVertex { .. })
    ));
}

#[test]
fn misaligned_field_is_rejected() {
    let g = WeightedGraph::from_indices(vec![1.0, 1.0], vec![Edge::new(0, 1, 1.0)]).unwrap();
    let u = VertexField::zeros(3);
    assert!(matches!(g.laplacian(&u), Err(Error::Dimension { .. })));
    assert!(matches!(g.integrate(&u), Err(Error::Dimension { .. })));
}

#[test]
fn integrate_and_average_match_direct_sums() {
    let g = WeightedGraph::from_indices(
        vec![0.5, 1.25, 2.0, 0.75],
        vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 2.0), Edge::new(2, 3, 0.5)],
    )
    .unwrap();
    let f = VertexField::new(vec![1.5, -2.0, 0.25, -0.75]).unwrap();
    let direct = 0.5 * 1.5 + 1.25 * -2.0 + 2.0 * 0.25 + 0.75 * -0.75;
    assert_relative_eq!(g.integrate(&f).unwrap(), direct, epsilon = 1e-15);
    assert_relative_eq!(g.average(&f).unwrap(), direct / 4.5, epsilon = 1e-15);
    assert_eq!(g.integrate(&VertexField::constant(4, 1.0)).unwrap(), g.volume());
    assert_eq!(g.average(&VertexField::constant(4, -3.5)).unwrap(), -3.5);
}

#[test]
fn average_matches_oracle_on_random_fields() {
    let mut r = rng(3);
    for _ in 0..50 {
        let g = standard_graph(&mut r, 10);
        let f = random_field(&mut r, g.len(), -5.0..5.0);
        let mut num = 0.0;
        let mut den = 0.0;
        for x in 0..g.len() {
            num += g.mu()[x] * f[x];
            den += g.mu()[x];
        }
        assert_relative_eq!(g.average(&f).unwrap(), num / den, epsilon = 1e-14, max_relative = 1e-14);
    }
}

#[test]
fn lambda1_matches_dense_eigensolver() {
    let mut r = rng(4);
    for _ in 0..50 {
        let g = random_graph(&mut r, 6, 0.2..3.0, 0.2..3.0, 0.4);
        let got = graph_constants(&g).lambda1.unwrap();
        assert_relative_eq!(got, lambda1_oracle(&g), max_relative = 1e-9);
    }
}

#[test]
fn k2_constants_and_tight_bound() {
    let g = WeightedGraph::from_indices(vec![1.0, 1.0], vec![Edge::new(0, 1, 1.0)]).unwrap();
    let c = graph_constants(&g);
    assert_eq!(c.volume, 2.0);
    assert_eq!(c.w0, 1.0);
    assert_eq!(c.ell, 2);
    assert_relative_eq!(c.lambda1.unwrap(), 2.0, epsilon = 1e-12);
    assert_relative_eq!(elliptic_constant(&g), 1.0, epsilon = 1e-12);
    let u = VertexField::new(vec![0.0, 1.0]).unwrap();
    let lap = g.laplacian(&u).unwrap();
    let ratio = (u.max_value() - u.min_value()) / (elliptic_constant(&g) * lap.sup_norm());
    assert_relative_eq!(ratio, 1.0, epsilon = 1e-12);
}

#[test]
fn single_vertex_has_no_spectral_gap() {
    let g = WeightedGraph::from_indices(vec![2.0], vec![]).unwrap();
    let c = graph_constants(&g);
    assert_eq!(c.lambda1, None);
    assert_eq!(c.elliptic_constant(), 0.0);
    assert_eq!(g.laplacian(&VertexField::constant(1, 3.0)).unwrap()[0], 0.0);
}

#[test]
fn elliptic_estimate_has_no_violations() {
    let mut r = rng(5);
    for _ in 0..100 {
        let g = standard_graph(&mut r, 12);
        let c = elliptic_constant(&g);
        let u = random_field(&mut r, g.len(), -3.0..3.0);
        let lap = g.laplacian(&u).unwrap();
        assert!(u.max_value() - u.min_value() <= c * lap.sup_norm() * (1.0 + 1e-12));
    }
}

fn graph_and_field() -> impl Strategy<Value = (WeightedGraph, VertexField)> {
    (any::<u64>(), 2usize..=12).prop_map(|(seed, n)| {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.1..5.0, 0.1..5.0, 0.3);
        let u = random_field(&mut r, n, -10.0..10.0);
        (g, u)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn divergence_vanishes((g, u) in graph_and_field()) {
        let total = g.integrate(&g.laplacian(&u).unwrap()).unwrap();
        prop_assert!(total.abs() <= 1e-10 * (1.0 + u.sup_norm() * total_weight(&g)));
    }

    #[test]
    fn integration_by_parts((g, u) in graph_and_field()) {
        let lhs = g.integrate(&g.gradient_norm_sq(&u).unwrap()).unwrap();
        let lap = g.laplacian(&u).unwrap();
        let rhs = -g.integrate(&VertexField::from_fn(g.len(), |x| u[x] * lap[x])).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300));
        prop_assert!((lhs - g.dirichlet_energy(&u).unwrap()).abs() <= 1e-10 * lhs.abs().max(1e-300));
    }

    #[test]
    fn gradient_form_is_nonnegative((g, u) in graph_and_field()) {
        prop_assert!(g.gradient_norm_sq(&u).unwrap().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn matrix_form_matches_operator((g, u) in graph_and_field()) {
        let direct = g.laplacian(&u).unwrap();
        let mv = g.laplacian_matrix() * u.as_vector();
        let scale = 1.0 + u.sup_norm() * total_weight(&g) / g.mu().iter().copied().fold(f64::INFINITY, f64::min);
        for x in 0..g.len() {
            prop_assert!((direct[x] - mv[x]).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn poincare_on_mean_zero_fields((g, u) in graph_and_field()) {
        let mean = g.average(&u).unwrap();
        let v = VertexField::from_fn(g.len(), |x| u[x] - mean);
        let lambda1 = graph_constants(&g).lambda1.unwrap();
        let lhs = g.dirichlet_energy(&v).unwrap();
        let lap = g.laplacian(&v).unwrap();
        let rhs = g.integrate(&VertexField::from_fn(g.len(), |x| lap[x] * lap[x])).unwrap() / lambda1;
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn lambda1_is_invariant_under_relabeling(seed in any::<u64>(), n in 2usize..=10) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.1..5.0, 0.1..5.0, 0.3);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let mut mu = vec![0.0; n];
        for x in 0..n {
            mu[perm[x]] = g.mu()[x];
        }
        let edges = g.edges().iter().map(|e| Edge::new(perm[e.a], perm[e.b], e.weight)).collect();
        let h = WeightedGraph::from_indices(mu, edges).unwrap();
        let (a, b) = (graph_constants(&g), graph_constants(&h));
        prop_assert!((a.lambda1.unwrap() - b.lambda1.unwrap()).abs() <= 1e-10 * a.lambda1.unwrap());
        prop_assert_eq!(a.ell, b.ell);
    }
}
