//! Barrier construction and box-constrained minimization of the energy of
//! the generalized equation.
//!
//! For constants δ < β with G(δ) < 0 < G(β) pointwise, any local minimizer of
//! J over {δ ≤ u ≤ β} is strictly interior, hence a critical point of J and
//! a solution of G(u) = 0.

use serde::Serialize;

use super::{SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{VertexField, WeightedGraph};
use crate::linalg::Lu;
use crate::model::{energy, energy_gradient, jacobian, residual, EquationKind, ProblemSpec};

const ARMIJO: f64 = 1e-4;
const SEARCH_STEPS: i32 = 60;
const POLISH_STEPS: usize = 5;

/// Which multiplicity hypothesis holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// A·max h₁ < B·min h₂: second solution in (δ, β).
    Positive,
    /// A·min h₁ > B·max h₂: second solution in (−β, −δ).
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierPair {
    pub delta: f64,
    pub beta: f64,
    pub branch: Branch,
}

impl BarrierPair {
    pub fn lower(&self) -> f64 {
        match self.branch {
            Branch::Positive => self.delta,
            Branch::Negative => -self.beta,
        }
    }

    pub fn upper(&self) -> f64 {
        match self.branch {
            Branch::Positive => self.beta,
            Branch::Negative => -self.delta,
        }
    }

    /// Strict pointwise containment in the open box.
    pub fn strictly_contains(&self, u: &VertexField) -> bool {
        u.iter().all(|v| self.lower() < *v && *v < self.upper())
    }
}

pub fn theorem_branch(spec: &ProblemSpec) -> Option<Branch> {
    if spec.kind() != EquationKind::Generalized || !spec.h2_all_positive() {
        return None;
    }
    let (a, b) = (spec.a(), spec.b());
    if a * spec.h1().max_value() < b * spec.h2().min_value() {
        Some(Branch::Positive)
    } else if a * spec.h1().min_value() > b * spec.h2().max_value() {
        Some(Branch::Negative)
    } else {
        None
    }
}

/// Sign of the generalized residual on the constant field `c`: +1 if
/// positive everywhere, −1 if negative everywhere, 0 otherwise.
fn constant_sign(spec: &ProblemSpec, g: &WeightedGraph, c: f64) -> Result<i8> {
    let r = residual(spec, g, &VertexField::constant(g.len(), c))?;
    Ok(if r.iter().all(|v| *v > 0.0) {
        1
    } else if r.iter().all(|v| *v < 0.0) {
        -1
    } else {
        0
    })
}

/// Finds barriers by halving δ = 2⁻ᵏ until G(±δ) < 0 and doubling β from 2δ
/// until G(±β) > 0, both pointwise on constant fields.
pub fn choose_barriers(spec: &ProblemSpec, g: &WeightedGraph) -> Result<BarrierPair> {
    spec.check_graph(g)?;
    let branch = theorem_branch(spec).ok_or_else(|| {
        Error::BarrierInapplicable(
            "requires h1, h2 > 0 and A*max h1 < B*min h2 or A*min h1 > B*max h2".into(),
        )
    })?;
    let side = match branch {
        Branch::Positive => 1.0,
        Branch::Negative => -1.0,
    };

    let mut delta = None;
    for k in 1..=SEARCH_STEPS {
        let d = f64::from(-k).exp2();
        if constant_sign(spec, g, side * d)? < 0 {
            delta = Some(d);
            break;
        }
    }
    let delta = delta.ok_or_else(|| Error::BarrierInapplicable("no lower barrier found".into()))?;

    let mut beta = None;
    let mut b = 2.0 * delta;
    for _ in 0..SEARCH_STEPS {
        match constant_sign(spec, g, side * b) {
            Ok(1) => {
                beta = Some(b);
                break;
            }
            Ok(_) => b *= 2.0,
            Err(Error::ExponentOverflow { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let beta = beta.ok_or_else(|| Error::BarrierInapplicable("no upper barrier found".into()))?;
    Ok(BarrierPair { delta, beta, branch })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxMinimum {
    pub report: SolveReport,
    /// J at the start and after every accepted descent step; the final
    /// Newton polish is not recorded.
    pub energy_trace: Vec<f64>,
}

fn project(u: &VertexField, lo: f64, hi: f64) -> VertexField {
    VertexField::from_fn(u.len(), |x| u[x].clamp(lo, hi))
}

fn mu_dot(g: &WeightedGraph, a: &VertexField, b: &VertexField) -> f64 {
    g.mu().iter().zip(a.iter().zip(b.iter())).map(|(m, (x, y))| m * x * y).sum()
}

/// Minimizes J over {δ ≤ u ≤ β} by projected gradient descent with Armijo
/// backtracking (Barzilai–Borwein trial steps), switching to Newton steps
/// once the iterate is interior and the Newton direction descends.
pub fn minimize_box(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    bp: &BarrierPair,
    cfg: &SolverConfig,
) -> Result<BoxMinimum> {
    cfg.validate()?;
    if bp.branch != Branch::Positive {
        return Err(Error::BarrierInapplicable(
            "the mirrored box has G > 0 on its lower face; its minimizer is not interior".into(),
        ));
    }
    let (lo, hi) = (bp.lower(), bp.upper());
    if !(0.0 < lo && lo < hi) {
        return Err(Error::BarrierInapplicable(format!("invalid box [{lo}, {hi}]")));
    }
    let n = g.len();
    let budget = cfg.max_iter * 50;

    let mut u = VertexField::constant(n, lo);
    let mut j = energy(spec, g, &u)?;
    let mut grad = energy_gradient(spec, g, &u)?;
    let mut trace = vec![j];
    let mut history = vec![grad.sup_norm()];
    let mut bb_step = 1.0;
    let mut iterations = 0;

    loop {
        let pg = project(&VertexField::from_vector(u.as_vector() - grad.as_vector()), lo, hi);
        let pg_norm = pg.sup_distance(&u);
        if pg_norm < cfg.tol || iterations >= budget {
            break;
        }

        let mut next = None;
        if u.iter().all(|v| lo < *v && *v < hi) {
            let lu = Lu::new(jacobian(spec, g, &u)?);
            if let Some(d) = lu.solve(&-grad.as_vector()) {
                let d = VertexField::from_vector(d);
                let slope = mu_dot(g, &grad, &d);
                if slope < 0.0 {
                    let mut s = 1.0;
                    while s >= cfg.damping.min_step {
                        let trial = VertexField::from_vector(u.as_vector() + d.as_vector() * s);
                        if trial.iter().all(|v| lo < *v && *v < hi) {
                            if let Ok(jt) = energy(spec, g, &trial) {
                                if jt <= j + ARMIJO * s * slope {
                                    next = Some((trial, jt));
                                    break;
                                }
                            }
                        }
                        s *= cfg.damping.shrink;
                    }
                }
            }
        }

        if next.is_none() {
            let mut s = bb_step;
            while s >= cfg.damping.min_step * 1e-6 {
                let trial = project(
                    &VertexField::from_vector(u.as_vector() - grad.as_vector() * s),
                    lo,
                    hi,
                );
                let change = VertexField::from_vector(trial.as_vector() - u.as_vector());
                if let Ok(jt) = energy(spec, g, &trial) {
                    if jt <= j + ARMIJO * mu_dot(g, &grad, &change) {
                        next = Some((trial, jt));
                        break;
                    }
                }
                s *= cfg.damping.shrink;
            }
        }

        let Some((trial, jt)) = next else { break };
        let new_grad = energy_gradient(spec, g, &trial)?;
        let du = VertexField::from_vector(trial.as_vector() - u.as_vector());
        let dg = VertexField::from_vector(new_grad.as_vector() - grad.as_vector());
        let curvature = mu_dot(g, &du, &dg);
        bb_step = if curvature > 0.0 {
            (mu_dot(g, &du, &du) / curvature).clamp(1e-10, 1e10)
        } else {
            (bb_step * 2.0).min(1e10)
        };
        u = trial;
        j = jt;
        grad = new_grad;
        trace.push(j);
        history.push(grad.sup_norm());
        iterations += 1;
    }

    // once J stalls at rounding level, finish with plain Newton on G
    for _ in 0..POLISH_STEPS {
        if grad.sup_norm() < cfg.tol || !u.iter().all(|v| lo < *v && *v < hi) {
            break;
        }
        let Some(d) = Lu::new(jacobian(spec, g, &u)?).solve(&-grad.as_vector()) else { break };
        let trial = VertexField::from_vector(u.as_vector() + d);
        if !trial.iter().all(|v| lo < *v && *v < hi) {
            break;
        }
        let Ok(new_grad) = energy_gradient(spec, g, &trial) else { break };
        if !(new_grad.sup_norm() < grad.sup_norm()) {
            break;
        }
        u = trial;
        grad = new_grad;
        history.push(grad.sup_norm());
    }

    if let Some(x) = u.iter().position(|v| !(lo < *v && *v < hi)) {
        return Err(Error::InteriorViolation { vertex: x, value: u[x] });
    }
    let residual_norm = grad.sup_norm();
    let jac_sign = Lu::new(jacobian(spec, g, &u)?).det_sign();
    Ok(BoxMinimum {
        report: SolveReport {
            converged: residual_norm < cfg.tol && jac_sign != 0,
            solution: u,
            residual_norm,
            iterations,
            jac_sign,
            residual_history: history,
        },
        energy_trace: trace,
    })
}
