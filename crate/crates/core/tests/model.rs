use approx::assert_relative_eq;
use proptest::prelude::*;
use tzitzeica::testkit::{classic_instance, generalized_instance, random_field, rng};
use tzitzeica::{
    energy, energy_gradient, jacobian, residual, residual_homotopy, Edge, EquationKind, Error,
    HomotopyParams, ProblemSpec, TzitzeicaMap, VertexField, WeightedGraph,
};

fn k2() -> WeightedGraph {
    WeightedGraph::from_indices(vec![1.0, 1.0], vec![Edge::new(0, 1, 1.0)]).unwrap()
}

fn weight_table(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; g.len()]; g.len()];
    for e in g.edges() {
        w[e.a][e.b] = e.weight;
        w[e.b][e.a] = e.weight;
    }
    w
}

/// Residual evaluated straight from the formulas over a dense weight table.
fn residual_oracle(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> Vec<f64> {
    let w = weight_table(g);
    let (a, b) = (spec.a(), spec.b());
    (0..g.len())
        .map(|x| {
            let lap: f64 = (0..g.len()).map(|y| w[x][y] * (u[y] - u[x])).sum::<f64>() / g.mu()[x];
            let (h1, h2) = (spec.h1()[x], spec.h2()[x]);
            let nonlinear = match spec.kind() {
                EquationKind::Classic => h1 * (a * u[x]).exp() + h2 * (-b * u[x]).exp(),
                EquationKind::Generalized => {
                    h1 * (a * u[x]).exp() * ((a * u[x]).exp() - 1.0)
                        + h2 * (-b * u[x]).exp() * ((-b * u[x]).exp() - 1.0)
                }
            };
            -lap + nonlinear
        })
        .collect()
}

/// J with the Dirichlet term as a double sum over ordered vertex pairs, and
/// the sum of the absolute values of its terms.
fn energy_oracle(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> (f64, f64) {
    let w = weight_table(g);
    let (a, b) = (spec.a(), spec.b());
    let mut dirichlet = 0.0;
    let mut potential = 0.0;
    let mut scale = 0.0;
    for x in 0..g.len() {
        for y in 0..g.len() {
            dirichlet += 0.5 * w[x][y] * (u[y] - u[x]).powi(2);
        }
        let pa = (a * u[x]).exp() - 1.0;
        let pb = (-b * u[x]).exp() - 1.0;
        let (pos, neg) = (spec.h1()[x] * pa * pa / (2.0 * a), spec.h2()[x] * pb * pb / (2.0 * b));
        potential += g.mu()[x] * (pos - neg);
        scale += g.mu()[x] * (pos + neg);
    }
    (0.5 * dirichlet + potential, 0.5 * dirichlet + scale)
}

fn five_vertex() -> WeightedGraph {
    WeightedGraph::from_indices(
        vec![1.0, 0.5, 2.0, 1.5, 0.75],
        vec![
            Edge::new(0, 1, 1.0),
            Edge::new(1, 2, 0.5),
            Edge::new(2, 3, 2.0),
            Edge::new(3, 4, 1.5),
            Edge::new(4, 0, 0.7),
        ],
    )
    .unwrap()
}

#[test]
fn classic_residual_matches_oracle() {
    let g = five_vertex();
    let mut r = rng(21);
    for _ in 0..50 {
        let spec = ProblemSpec::classic(
            random_field(&mut r, 5, 0.5..2.0),
            random_field(&mut r, 5, -2.0..2.0),
            1.3,
            0.7,
        )
        .unwrap();
        let u = random_field(&mut r, 5, -2.0..2.0);
        let got = residual(&spec, &g, &u).unwrap();
        for (x, want) in residual_oracle(&spec, &g, &u).into_iter().enumerate() {
            assert_relative_eq!(got[x], want, epsilon = 1e-13, max_relative = 1e-13);
        }
    }
}

#[test]
fn generalized_zero_field_is_a_root() {
    let mut r = rng(22);
    for _ in 0..20 {
        let (g, spec) = generalized_instance(&mut r, 10);
        assert!(residual(&spec, &g, &VertexField::zeros(g.len())).unwrap().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn balanced_classic_zero_field_is_a_root() {
    let spec = ProblemSpec::classic(VertexField::constant(2, 1.0), VertexField::constant(2, -1.0), 1.0, 1.0).unwrap();
    assert!(residual(&spec, &k2(), &VertexField::zeros(2)).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn homotopy_endpoints() {
    let mut r = rng(23);
    for _ in 0..20 {
        let (g, spec) = classic_instance(&mut r, 8, -2.0..-0.5);
        let n = g.len();
        let u = random_field(&mut r, n, -1.0..1.0);
        let eps = tzitzeica::default_epsilon(&spec);
        let at0 = residual_homotopy(&spec, &g, &u, HomotopyParams::classic(&spec, 0.0, eps).unwrap()).unwrap();
        assert_eq!(at0, residual(&spec, &g, &u).unwrap());
        let at1 = residual_homotopy(&spec, &g, &VertexField::zeros(n), HomotopyParams::classic(&spec, 1.0, eps).unwrap()).unwrap();
        assert!(at1.iter().all(|v| *v == 0.0));

        let (g, spec) = generalized_instance(&mut r, 8);
        let u = random_field(&mut r, g.len(), -1.0..1.0);
        let at1 = residual_homotopy(&spec, &g, &u, HomotopyParams::generalized(&spec, 1.0).unwrap()).unwrap();
        assert_eq!(at1, residual(&spec, &g, &u).unwrap());
    }
}

#[test]
fn generalized_t0_has_doubled_exponents_only() {
    let spec = ProblemSpec::generalized(VertexField::constant(2, 1.5), VertexField::constant(2, 0.5), 1.0, 2.0).unwrap();
    let u = VertexField::new(vec![0.3, -0.2]).unwrap();
    let got = residual_homotopy(&spec, &k2(), &u, HomotopyParams::generalized(&spec, 0.0).unwrap()).unwrap();
    let lap = k2().laplacian(&u).unwrap();
    for x in 0..2 {
        let want = -lap[x] + 1.5 * (2.0 * u[x]).exp() + 0.5 * (-4.0 * u[x]).exp();
        assert_relative_eq!(got[x], want, max_relative = 1e-14);
    }
}

#[test]
fn classic_homotopy_rejects_nonnegative_h2() {
    let spec = ProblemSpec::classic(VertexField::constant(2, 1.0), VertexField::new(vec![-1.0, 0.5]).unwrap(), 1.0, 1.0).unwrap();
    match HomotopyParams::classic(&spec, 0.5, 0.1) {
        Err(Error::InvalidHomotopy(msg)) => assert!(msg.contains("h2")),
        other => panic!("unexpected {other:?}"),
    }
    let ok = ProblemSpec::classic(VertexField::constant(2, 1.0), VertexField::constant(2, -1.0), 1.0, 1.0).unwrap();
    assert!(HomotopyParams::classic(&ok, 1.5, 0.1).is_err());
    assert!(HomotopyParams::classic(&ok, 0.5, 0.0).is_err());
    assert!(HomotopyParams::generalized(&ok, 0.5).is_err());
}

#[test]
fn spec_validation() {
    let one = VertexField::constant(2, 1.0);
    assert!(ProblemSpec::classic(one.clone(), one.clone(), 0.0, 1.0).is_err());
    assert!(ProblemSpec::classic(one.clone(), one.clone(), 1.0, f64::INFINITY).is_err());
    assert!(ProblemSpec::generalized(VertexField::new(vec![1.0, -0.1]).unwrap(), one.clone(), 1.0, 1.0).is_err());
    assert!(ProblemSpec::classic(one, VertexField::constant(3, 1.0), 1.0, 1.0).is_err());
}

#[test]
fn overflow_is_a_range_error() {
    let spec = ProblemSpec::classic(VertexField::constant(2, 1.0), VertexField::constant(2, -1.0), 2.0, 1.0).unwrap();
    let u = VertexField::new(vec![400.0, 0.0]).unwrap();
    assert!(matches!(residual(&spec, &k2(), &u), Err(Error::ExponentOverflow { vertex: 0, .. })));
    let g_spec = ProblemSpec::generalized(VertexField::constant(2, 1.0), VertexField::constant(2, 1.0), 1.0, 1.0).unwrap();
    let u = VertexField::new(vec![0.0, -360.0]).unwrap();
    assert!(matches!(residual(&g_spec, &k2(), &u), Err(Error::ExponentOverflow { vertex: 1, .. })));
    assert!(residual(&g_spec, &k2(), &VertexField::new(vec![0.0, -340.0]).unwrap()).is_ok());
}

#[test]
fn jacobian_at_zero() {
    let eps = 1e-3;
    let g = five_vertex();
    let spec = ProblemSpec::classic(VertexField::constant(5, eps), VertexField::constant(5, -eps), 1.0, 1.0).unwrap();
    let j = jacobian(&spec, &g, &VertexField::zeros(5)).unwrap();
    let want = -g.laplacian_matrix() + nalgebra::DMatrix::<f64>::identity(5, 5) * (2.0 * eps);
    assert!((&j - &want).amax() < 1e-15);
    assert_eq!(j.determinant().signum(), 1.0);

    let mut r = rng(24);
    let (g, spec) = generalized_instance(&mut r, 8);
    let j = jacobian(&spec, &g, &VertexField::zeros(g.len())).unwrap();
    let mut want = -g.laplacian_matrix();
    for x in 0..g.len() {
        want[(x, x)] += spec.a() * spec.h1()[x] - spec.b() * spec.h2()[x];
    }
    assert!((&j - &want).amax() < 1e-14);
}

#[test]
fn energy_values() {
    let spec = ProblemSpec::generalized(VertexField::constant(2, 1.5), VertexField::constant(2, 0.5), 2.0, 0.5).unwrap();
    assert_eq!(energy(&spec, &k2(), &VertexField::zeros(2)).unwrap(), 0.0);
    let c: f64 = 0.3;
    // Vol·[h₁(e^{Ac}−1)²/(2A) − h₂(e^{−Bc}−1)²/(2B)]
    let closed = 2.0 * (1.5 * ((2.0 * c).exp() - 1.0).powi(2) / 4.0 - 0.5 * ((-0.5 * c).exp() - 1.0).powi(2) / 1.0);
    assert_relative_eq!(energy(&spec, &k2(), &VertexField::constant(2, c)).unwrap(), closed, max_relative = 1e-14);

    let classic = ProblemSpec::classic(VertexField::constant(2, 1.0), VertexField::constant(2, 1.0), 1.0, 1.0).unwrap();
    assert_eq!(energy(&classic, &k2(), &VertexField::zeros(2)), Err(Error::UnsupportedFunctional));
    assert_eq!(energy_gradient(&classic, &k2(), &VertexField::zeros(2)), Err(Error::UnsupportedFunctional));
}

#[test]
fn energy_matches_oracle() {
    let mut r = rng(25);
    for _ in 0..50 {
        let (g, spec) = generalized_instance(&mut r, 10);
        let u = random_field(&mut r, g.len(), -1.5..1.5);
        let (want, scale) = energy_oracle(&spec, &g, &u);
        let got = energy(&spec, &g, &u).unwrap();
        assert!((got - want).abs() <= 1e-12 * scale, "{got} {want} {scale}");
    }
}

/// Normwise relative error of the central-difference L²(μ) gradient of J.
fn fd_gradient_error(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> f64 {
    let tau = 1e-6;
    let grad = energy_gradient(spec, g, u).unwrap();
    let mut err: f64 = 0.0;
    for x in 0..g.len() {
        let mut plus = u.clone();
        let mut minus = u.clone();
        plus[x] += tau;
        minus[x] -= tau;
        let fd = (energy(spec, g, &plus).unwrap() - energy(spec, g, &minus).unwrap()) / (2.0 * tau) / g.mu()[x];
        err = err.max((fd - grad[x]).abs());
    }
    err / grad.sup_norm().max(1.0)
}

#[test]
fn energy_gradient_matches_finite_differences() {
    let mut r = rng(26);
    for _ in 0..10 {
        let (g, spec) = generalized_instance(&mut r, 8);
        for _ in 0..50 {
            let u = random_field(&mut r, g.len(), -1.0..1.0);
            assert!(fd_gradient_error(&spec, &g, &u) <= 1e-5);
            assert_eq!(energy_gradient(&spec, &g, &u).unwrap(), residual(&spec, &g, &u).unwrap());
        }
    }
}

#[test]
fn integral_obstruction_is_positive() {
    let mut r = rng(27);
    for _ in 0..20 {
        let (g, spec) = classic_instance(&mut r, 10, 0.5..2.0);
        for _ in 0..100 {
            let u = random_field(&mut r, g.len(), -5.0..5.0);
            assert!(g.integrate(&residual(&spec, &g, &u).unwrap()).unwrap() > 0.0);
        }
    }
}

fn instance(kind_seed: u64) -> (WeightedGraph, ProblemSpec, Option<HomotopyParams>) {
    let mut r = rng(kind_seed);
    match kind_seed % 3 {
        0 => {
            let (g, s) = classic_instance(&mut r, 8, -2.0..2.0);
            (g, s, None)
        }
        1 => {
            let (g, s) = classic_instance(&mut r, 8, -2.0..-0.5);
            let t = (kind_seed % 7) as f64 / 6.0;
            let hp = HomotopyParams::classic(&s, t, tzitzeica::default_epsilon(&s)).unwrap();
            (g, s, Some(hp))
        }
        _ => {
            let (g, s) = generalized_instance(&mut r, 8);
            let t = (kind_seed % 5) as f64 / 4.0;
            (g, s.clone(), Some(HomotopyParams::generalized(&s, t).unwrap()))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_central_differences(seed in any::<u64>()) {
        let (g, spec, hp) = instance(seed);
        let map = match hp {
            Some(hp) => TzitzeicaMap::deformed(&spec, &g, hp).unwrap(),
            None => TzitzeicaMap::new(&spec, &g).unwrap(),
        };
        let u = random_field(&mut rng(seed ^ 0xabc), g.len(), -1.0..1.0);
        let j = map.jacobian(&u).unwrap();
        let tau = 1e-6;
        for x in 0..g.len() {
            let mut plus = u.clone();
            let mut minus = u.clone();
            plus[x] += tau;
            minus[x] -= tau;
            let fp = map.residual(&plus).unwrap();
            let fm = map.residual(&minus).unwrap();
            for y in 0..g.len() {
                let fd = (fp[y] - fm[y]) / (2.0 * tau);
                prop_assert!((fd - j[(y, x)]).abs() <= 1e-6 * (1.0 + j[(y, x)].abs()));
            }
        }
    }

    #[test]
    fn jacobian_is_mu_symmetric(seed in any::<u64>()) {
        let (g, spec, _) = instance(seed);
        let u = random_field(&mut rng(seed ^ 0xdef), g.len(), -1.0..1.0);
        let j = jacobian(&spec, &g, &u).unwrap();
        let mut m = j.clone();
        for x in 0..g.len() {
            for y in 0..g.len() {
                m[(x, y)] = g.mu()[x] * j[(x, y)];
            }
        }
        prop_assert!((&m - m.transpose()).amax() <= 1e-12 * (1.0 + m.amax()));
    }
}
