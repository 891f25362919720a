use serde::Serialize;

use super::{
    choose_barriers, minimize_box, newton, newton_map, BarrierPair, Branch, SolveReport,
    SolverConfig,
};
use crate::coupling;
use crate::degree::{apriori_radius, estimate_degree_map};
use crate::error::{Error, Result};
use crate::graph::{VertexField, WeightedGraph};
use crate::model::{ProblemSpec, TzitzeicaMap, EXPONENT_CAP};
use crate::scalar;

const FALLBACK_STARTS: usize = 64;

/// Two distinct solutions of the generalized equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplicity {
    pub branch: Branch,
    pub barriers: BarrierPair,
    /// `[zero solution, one-signed solution]`.
    pub solutions: Vec<SolveReport>,
    /// Energy along the box minimization (empty on the negative branch).
    pub energy_trace: Vec<f64>,
}

/// Returns u ≡ 0 and a second, one-signed solution.
///
/// Positive branch: the interior minimizer of J over [δ, β]. Negative
/// branch: the box [−β, −δ] is not a minimization box, so the second root
/// is tracked in the coupling strength from the vertexwise negative roots,
/// falling back to a full root enumeration when that branch turns back or
/// ends at a root of mixed sign.
pub fn find_two_solutions(spec: &ProblemSpec, g: &WeightedGraph, cfg: &SolverConfig) -> Result<Multiplicity> {
    let barriers = choose_barriers(spec, g)?;
    let zero = newton(spec, g, &VertexField::zeros(g.len()), cfg)?;

    let (second, energy_trace) = match barriers.branch {
        Branch::Positive => {
            let m = minimize_box(spec, g, &barriers, cfg)?;
            (m.report, m.energy_trace)
        }
        Branch::Negative => (negative_root(spec, g, &barriers, cfg)?, Vec::new()),
    };
    if !second.converged {
        return Err(Error::MultiplicityFailure(format!(
            "second solution did not converge (residual {:e})",
            second.residual_norm
        )));
    }
    let gap = second.solution.sup_distance(&zero.solution);
    if !(gap > cfg.deflation_radius) {
        return Err(Error::MultiplicityFailure(format!(
            "second solution is within {gap:e} of the zero solution"
        )));
    }
    Ok(Multiplicity {
        branch: barriers.branch,
        barriers,
        solutions: vec![zero, second],
        energy_trace,
    })
}

fn negative_root(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    barriers: &BarrierPair,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let map = TzitzeicaMap::new(spec, g)?;
    let radius = apriori_radius(&map, cfg)?;
    let negative = |r: &SolveReport| r.converged && r.solution.iter().all(|v| *v < 0.0);

    // φ_x < 0 on [−δ, 0) and φ_x → +∞ as v → −∞
    let start = (0..g.len())
        .map(|x| {
            let phi = map.pointwise(x);
            let right = -barriers.delta;
            let mut left = 2.0 * right;
            while phi.value(left) <= 0.0 {
                left *= 2.0;
                if phi.max_exponent(left) > EXPONENT_CAP {
                    return None;
                }
            }
            Some(scalar::bisect(|v| phi.value(v), left, right))
        })
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::MultiplicityFailure("no negative scalar root".into()))?;

    if let Some(end) = coupling::branch_end(&map, &VertexField::new(start)?, radius)? {
        let polished = newton_map(&map, &end, cfg)?;
        if negative(&polished) {
            return Ok(polished);
        }
    }
    let roots = estimate_degree_map(&map, cfg, FALLBACK_STARTS)?;
    for root in roots.solutions {
        let polished = newton_map(&map, &root, cfg)?;
        if negative(&polished) {
            return Ok(polished);
        }
    }
    Err(Error::MultiplicityFailure("no negative solution found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn k2() -> WeightedGraph {
        WeightedGraph::from_indices(vec![1.0, 1.0], vec![Edge::new(0, 1, 1.0)]).unwrap()
    }

    fn spec(h1: f64, h2: f64) -> ProblemSpec {
        ProblemSpec::generalized(
            VertexField::constant(2, h1),
            VertexField::constant(2, h2),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn first_branch_on_k2() {
        let m = find_two_solutions(&spec(1.0, 3.0), &k2(), &SolverConfig::default()).unwrap();
        assert_eq!(m.branch, Branch::Positive);
        assert!(m.solutions[0].solution.sup_norm() < 1e-10);
        assert!(m.solutions[1].solution.iter().all(|v| *v >= m.barriers.delta));
    }

    #[test]
    fn mirror_branch_on_k2() {
        let m = find_two_solutions(&spec(3.0, 1.0), &k2(), &SolverConfig::default()).unwrap();
        assert_eq!(m.branch, Branch::Negative);
        assert!(m.solutions[1].solution.iter().all(|v| *v < 0.0));
        // constant coefficients: the root is the constant scalar root
        assert!(m.barriers.strictly_contains(&m.solutions[1].solution));
    }

    #[test]
    fn hypothesis_violation() {
        assert!(find_two_solutions(&spec(1.0, 1.0), &k2(), &SolverConfig::default()).is_err());
    }
}
