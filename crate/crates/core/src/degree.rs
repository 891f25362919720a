//! Empirical Brouwer degree: enumerate isolated zeros in the a priori ball
//! with multi-start deflated Newton and sum the Jacobian determinant signs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coupling;
use crate::error::{Error, Result};
use crate::estimates::{bounds_classic, bounds_classic_homotopy, bounds_generalized};
use crate::graph::{VertexField, WeightedGraph};
use crate::linalg::Lu;
use crate::model::{default_epsilon, EquationKind, HomotopyParams, ProblemSpec, TzitzeicaMap};
use crate::scalar;
use crate::solvers::{newton_deflated_map, newton_deflated_undamped, SolverConfig};

/// Roots closer than this in sup norm are merged.
pub const DEDUP_RADIUS: f64 = 1e-5;
/// Starts processed concurrently against one snapshot of known roots.
const WAVE: usize = 16;
/// Roots a single start may contribute before moving on.
const ROOTS_PER_START: usize = 4;
/// Halton sets at radius, radius/4, …, radius/4^(SCALES−1); roots of the
/// generalized map cluster near 0.
const SCALES: u64 = 3;
/// Rounds of segment restarts between known roots.
const REFINE_ROUNDS: usize = 8;
const SEGMENT_POINTS: [f64; 3] = [0.25, 0.5, 0.75];
const INVERSE_ITERATIONS: usize = 30;
const NULL_STEPS: [f64; 5] = [0.005, 0.015, 0.04, 0.1, 0.3];
const SINGLE_VERTEX_CELLS: usize = 1 << 16;
/// Deformation parameters checked by [`verify_homotopy_invariance`].
pub const HOMOTOPY_CHECK_GRID: [f64; 3] = [0.0, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    /// Exhaustive: scalar enumeration or the integral obstruction.
    Proven,
    /// Multi-start search; roots may have been missed.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    /// Distinct roots in lexicographic order.
    pub solutions: Vec<VertexField>,
    pub signs: Vec<i8>,
    pub degree: i64,
    /// Ball radius; infinite when the degree was settled without a ball.
    pub radius: f64,
    pub starts_used: usize,
    pub exhaustive_confidence: Confidence,
}

impl DegreeReport {
    fn from_roots(
        mut roots: Vec<(VertexField, i8)>,
        radius: f64,
        starts_used: usize,
        exhaustive_confidence: Confidence,
    ) -> Self {
        roots.sort_by(|a, b| {
            a.0.iter()
                .zip(b.0.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let degree = roots.iter().map(|(_, s)| i64::from(*s)).sum();
        let (solutions, signs) = roots.into_iter().unzip();
        DegreeReport {
            solutions,
            signs,
            degree,
            radius,
            starts_used,
            exhaustive_confidence,
        }
    }
}

/// Radius of the ball containing every root of `map`, from the
/// configuration override or the applicable a priori bound.
pub fn apriori_radius(map: &TzitzeicaMap<'_>, cfg: &SolverConfig) -> Result<f64> {
    if let Some(r) = cfg.radius {
        return Ok(r);
    }
    let spec = map.spec();
    let bounds = match (spec.kind(), map.homotopy()) {
        (EquationKind::Classic, None) => bounds_classic(spec)?,
        (EquationKind::Classic, Some(hp)) => bounds_classic_homotopy(spec, hp.epsilon())?,
        (EquationKind::Generalized, _) => bounds_generalized(spec, map.graph())?,
    };
    Ok(bounds.radius)
}

/// Classic residual with h₁ > 0 and h₂ ≥ 0 integrates to a positive number
/// for every field, since ∫Δu dμ = 0.
fn integral_obstruction(map: &TzitzeicaMap<'_>) -> bool {
    (0..map.dim()).all(|x| match map.pointwise(x) {
        crate::model::Pointwise::Classic { c1, c2, .. } => c1 > 0.0 && c2 >= 0.0,
        crate::model::Pointwise::Generalized { .. } => false,
    })
}

pub fn estimate_degree(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    cfg: &SolverConfig,
    n_starts: usize,
) -> Result<DegreeReport> {
    estimate_degree_map(&TzitzeicaMap::new(spec, g)?, cfg, n_starts)
}

/// Degree of an arbitrary (possibly deformed) map on its a priori ball.
pub fn estimate_degree_map(map: &TzitzeicaMap<'_>, cfg: &SolverConfig, n_starts: usize) -> Result<DegreeReport> {
    cfg.validate()?;
    if integral_obstruction(map) {
        return Ok(DegreeReport::from_roots(
            Vec::new(),
            cfg.radius.unwrap_or(f64::INFINITY),
            0,
            Confidence::Proven,
        ));
    }
    let radius = apriori_radius(map, cfg)?;
    let n = map.dim();

    let mut starts = structured_starts(map, radius)?;
    for k in 0..SCALES {
        let scaled = radius * f64::from(-2 * k as i32).exp2();
        starts.extend(halton_starts(n, n_starts, scaled, cfg.seed.wrapping_add(k)));
    }

    let mut known: Vec<VertexField> = Vec::new();
    run_waves(map, &starts, &mut known, radius, cfg)?;
    let mut starts_used = starts.len();

    // saddles between known roots: restart from points on connecting segments
    let mut paired = 0;
    for _ in 0..REFINE_ROUNDS {
        let fresh = known.len();
        if paired == fresh {
            break;
        }
        let mut segment_starts = Vec::new();
        for j in paired..fresh {
            for i in 0..j {
                for s in SEGMENT_POINTS {
                    let p = known[i].as_vector() * (1.0 - s) + known[j].as_vector() * s;
                    segment_starts.push(VertexField::from_vector(p));
                }
            }
        }
        for root in &known[paired..fresh] {
            segment_starts.extend(null_direction_starts(map, root)?);
            segment_starts.extend(flip_starts(root));
        }
        paired = fresh;
        starts_used += segment_starts.len();
        run_waves(map, &segment_starts, &mut known, radius, cfg)?;
    }

    let mut roots = Vec::with_capacity(known.len());
    for root in known {
        // certify from scratch
        let residual = map.residual(&root)?.sup_norm();
        if !(residual < cfg.tol) {
            continue;
        }
        let sign = Lu::new(map.jacobian(&root)?).det_sign();
        if sign == 0 {
            return Err(Error::DegenerateRoot { residual });
        }
        roots.push((root, sign));
    }
    Ok(DegreeReport::from_roots(roots, radius, starts_used, Confidence::Heuristic))
}

/// Points `root ± s·v` with `v` the direction of the Jacobian's
/// smallest-magnitude eigenvalue, where a nearby partner root is born.
fn null_direction_starts(map: &TzitzeicaMap<'_>, root: &VertexField) -> Result<Vec<VertexField>> {
    let n = map.dim();
    let lu = Lu::new(map.jacobian(root)?);
    let mut v = nalgebra::DVector::from_fn(n, |x, _| 1.0 + 0.1 * x as f64);
    for _ in 0..INVERSE_ITERATIONS {
        let Some(next) = lu.solve(&v) else {
            return Ok(Vec::new());
        };
        let scale = next.amax();
        if !(scale > 0.0 && scale.is_finite()) {
            return Ok(Vec::new());
        }
        v = next / scale;
    }
    let mut starts = Vec::with_capacity(2 * NULL_STEPS.len());
    for s in NULL_STEPS {
        for sign in [1.0, -1.0] {
            starts.push(VertexField::from_vector(root.as_vector() + &v * (sign * s)));
        }
    }
    Ok(starts)
}

/// `root` with one coordinate negated at a time; roots that differ from a
/// known one by a single vertex changing side are common.
fn flip_starts(root: &VertexField) -> Vec<VertexField> {
    (0..root.len())
        .filter(|&x| root[x].abs() > DEDUP_RADIUS)
        .map(|x| {
            let mut start = root.clone();
            start[x] = -start[x];
            start
        })
        .collect()
}

/// Explores `starts` in waves against a snapshot of `known`, merging new
/// roots in start order.
fn run_waves(
    map: &TzitzeicaMap<'_>,
    starts: &[VertexField],
    known: &mut Vec<VertexField>,
    radius: f64,
    cfg: &SolverConfig,
) -> Result<()> {
    for wave in starts.chunks(WAVE) {
        let snapshot = known.clone();
        let found: Vec<Vec<VertexField>> = wave
            .par_iter()
            .map(|start| explore(map, start, &snapshot, radius, cfg))
            .collect::<Result<_>>()?;
        for root in found.into_iter().flatten() {
            if known.iter().all(|k| k.sup_distance(&root) > DEDUP_RADIUS) {
                known.push(root);
            }
        }
    }
    Ok(())
}

/// Runs deflated Newton from `start` repeatedly, collecting new roots inside
/// the ball.
fn explore(
    map: &TzitzeicaMap<'_>,
    start: &VertexField,
    snapshot: &[VertexField],
    radius: f64,
    cfg: &SolverConfig,
) -> Result<Vec<VertexField>> {
    let mut local = snapshot.to_vec();
    let mut found = Vec::new();
    for _ in 0..ROOTS_PER_START {
        let mut report = match newton_deflated_map(map, &local, start, cfg) {
            Ok(r) => r,
            Err(Error::ExponentOverflow { .. }) => break,
            Err(e) => return Err(e),
        };
        if !report.converged {
            match newton_deflated_undamped(map, &local, start, cfg) {
                Ok(r) if r.converged => report = r,
                Ok(_) | Err(Error::ExponentOverflow { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let is_root = report.residual_norm < cfg.tol
            && local
                .iter()
                .all(|k| k.sup_distance(&report.solution) > cfg.deflation_radius);
        if !is_root {
            break;
        }
        if report.jac_sign == 0 {
            return Err(Error::DegenerateRoot {
                residual: report.residual_norm,
            });
        }
        if report.solution.sup_norm() < radius {
            found.push(report.solution.clone());
        }
        local.push(report.solution);
    }
    Ok(found)
}

/// u ≡ 0 plus the ends of the coupling branches from the decoupled roots.
fn structured_starts(map: &TzitzeicaMap<'_>, radius: f64) -> Result<Vec<VertexField>> {
    let mut starts = vec![VertexField::zeros(map.dim())];
    starts.extend(coupling::branch_ends(map, radius)?);
    Ok(starts)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|p| *p * *p <= candidate).all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    value
}

/// Halton points with a seeded Cranley–Patterson shift, mapped into the
/// cube [−radius, radius]ⁿ.
pub fn halton_starts(n: usize, count: usize, radius: f64, seed: u64) -> Vec<VertexField> {
    let primes = first_primes(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            VertexField::from_fn(n, |x| {
                let p = (radical_inverse(i, primes[x]) + shift[x]).fract();
                radius * (2.0 * p - 1.0)
            })
        })
        .collect()
}

/// Exhaustive degree on a single vertex, where Δ ≡ 0 and the equation is
/// the scalar equation φ(u) = 0.
pub fn degree_single_vertex(spec: &ProblemSpec) -> Result<DegreeReport> {
    if spec.len() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: spec.len(),
        });
    }
    let phi = spec.pointwise(0);
    let (lo, hi) = match spec.kind() {
        EquationKind::Classic => {
            if spec.h2()[0] >= 0.0 {
                return Ok(DegreeReport::from_roots(Vec::new(), f64::INFINITY, 0, Confidence::Proven));
            }
            let b = bounds_classic(spec)?;
            (b.lower - 1.0, b.upper + 1.0)
        }
        EquationKind::Generalized => {
            // μ cancels from the bound on one vertex
            let g = WeightedGraph::from_indices(vec![1.0], vec![])?;
            let b = bounds_generalized(spec, &g)?;
            (b.lower - 1.0, b.upper + 1.0)
        }
    };
    let mut roots = Vec::new();
    for r in scalar::bracket_roots(|v| phi.value(v), lo, hi, SINGLE_VERTEX_CELLS) {
        let d = phi.derivative(r);
        if d.abs() < 1e-12 {
            return Err(Error::DegenerateRoot {
                residual: phi.value(r).abs(),
            });
        }
        roots.push((VertexField::constant(1, r), if d > 0.0 { 1 } else { -1 }));
    }
    let radius = lo.abs().max(hi.abs());
    Ok(DegreeReport::from_roots(roots, radius, 0, Confidence::Proven))
}

fn deformation(spec: &ProblemSpec, t: f64) -> Result<HomotopyParams> {
    match spec.kind() {
        EquationKind::Classic => HomotopyParams::classic(spec, t, default_epsilon(spec)),
        EquationKind::Generalized => HomotopyParams::generalized(spec, t),
    }
}

/// Degree estimates of the deformed map at each `t`.
pub fn homotopy_degrees(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    cfg: &SolverConfig,
    ts: &[f64],
    n_starts: usize,
) -> Result<Vec<(f64, DegreeReport)>> {
    ts.iter()
        .map(|&t| {
            let map = TzitzeicaMap::deformed(spec, g, deformation(spec, t)?)?;
            Ok((t, estimate_degree_map(&map, cfg, n_starts)?))
        })
        .collect()
}

/// True iff the degree estimates agree across [`HOMOTOPY_CHECK_GRID`].
pub fn verify_homotopy_invariance(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    cfg: &SolverConfig,
    n_starts: usize,
) -> Result<bool> {
    let degrees = homotopy_degrees(spec, g, cfg, &HOMOTOPY_CHECK_GRID, n_starts)?;
    Ok(degrees.windows(2).all(|w| w[0].1.degree == w[1].1.degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn one(h1: f64, h2: f64, kind: EquationKind) -> ProblemSpec {
        ProblemSpec::new(
            kind,
            VertexField::constant(1, h1),
            VertexField::constant(1, h2),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn scalar_classic_balanced() {
        let r = degree_single_vertex(&one(1.0, -1.0, EquationKind::Classic)).unwrap();
        assert_eq!(r.degree, 1);
        assert_eq!(r.solutions.len(), 1);
        assert!(r.solutions[0][0].abs() < 1e-12);
        assert_eq!(r.exhaustive_confidence, Confidence::Proven);
    }

    #[test]
    fn scalar_classic_positive_has_no_roots() {
        let r = degree_single_vertex(&one(1.0, 1.0, EquationKind::Classic)).unwrap();
        assert_eq!(r.degree, 0);
        assert!(r.solutions.is_empty());
    }

    #[test]
    fn scalar_generalized_two_roots() {
        let r = degree_single_vertex(&one(1.0, 3.0, EquationKind::Generalized)).unwrap();
        assert_eq!(r.solutions.len(), 2);
        assert!(r.solutions[0][0].abs() < 1e-12);
        assert!(r.solutions[1][0] > 0.0);
        assert_eq!(r.degree, 0);
        assert_eq!(r.signs, vec![-1, 1]);
    }

    #[test]
    fn halton_is_deterministic_and_in_cube() {
        let a = halton_starts(5, 32, 2.0, 9);
        assert_eq!(a, halton_starts(5, 32, 2.0, 9));
        assert_ne!(a, halton_starts(5, 32, 2.0, 10));
        assert!(a.iter().all(|p| p.sup_norm() <= 2.0));
    }

    #[test]
    fn obstruction_short_circuit() {
        let g = WeightedGraph::from_indices(vec![1.0, 1.0], vec![Edge::new(0, 1, 1.0)]).unwrap();
        let spec = ProblemSpec::classic(
            VertexField::constant(2, 1.0),
            VertexField::constant(2, 0.5),
            1.0,
            1.0,
        )
        .unwrap();
        let r = estimate_degree(&spec, &g, &SolverConfig::default(), 16).unwrap();
        assert_eq!(r.degree, 0);
        assert!(r.solutions.is_empty());
        assert_eq!(r.exhaustive_confidence, Confidence::Proven);
    }

    #[test]
    fn classic_degree_one_on_k2() {
        let g = WeightedGraph::from_indices(vec![1.0, 2.0], vec![Edge::new(0, 1, 0.5)]).unwrap();
        let spec = ProblemSpec::classic(
            VertexField::new(vec![1.0, 1.5]).unwrap(),
            VertexField::new(vec![-0.7, -1.3]).unwrap(),
            1.2,
            0.9,
        )
        .unwrap();
        let r = estimate_degree(&spec, &g, &SolverConfig::default(), 32).unwrap();
        assert_eq!(r.degree, 1);
        assert_eq!(r.solutions.len(), 1);
    }

    #[test]
    fn mixed_sign_classic_needs_radius() {
        let g = WeightedGraph::from_indices(vec![1.0, 1.0], vec![Edge::new(0, 1, 1.0)]).unwrap();
        let spec = ProblemSpec::classic(
            VertexField::constant(2, 1.0),
            VertexField::new(vec![-1.0, 1.0]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            estimate_degree(&spec, &g, &SolverConfig::default(), 8),
            Err(Error::BoundsInapplicable(_))
        ));
        let cfg = SolverConfig {
            radius: Some(5.0),
            ..SolverConfig::default()
        };
        assert!(estimate_degree(&spec, &g, &cfg, 8).is_ok());
    }
}
