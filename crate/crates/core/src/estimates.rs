//! Closed-form a priori bounds on solutions, used as the search ball for the
//! solvers and the degree estimator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{graph_constants, WeightedGraph};
use crate::model::{EquationKind, ProblemSpec};

/// Pointwise bounds `lower ≤ u(x) ≤ upper` satisfied by every solution, and
/// the radius of a sup-norm ball strictly containing them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriBox {
    pub lower: f64,
    pub upper: f64,
    pub radius: f64,
    pub margin: f64,
}

impl AprioriBox {
    /// radius = 1.5·max(|lower|, |upper|) + 1.
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper);
        let extent = lower.abs().max(upper.abs());
        let radius = 1.5 * extent + 1.0;
        AprioriBox {
            lower,
            upper,
            radius,
            margin: radius - extent,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Bounds for −Δu + h₁e^{Au} + h₂e^{−Bu} = 0 when h₂ < 0, obtained at the
/// extremal vertices of a solution.
pub fn bounds_classic(spec: &ProblemSpec) -> Result<AprioriBox> {
    if spec.kind() != EquationKind::Classic {
        return Err(Error::BoundsInapplicable(
            "classic bounds requested for the generalized equation".into(),
        ));
    }
    if let Some(x) = spec.h2().iter().position(|v| !(*v < 0.0)) {
        return Err(Error::BoundsInapplicable(format!(
            "requires h2 < 0 everywhere, h2[{x}] = {}",
            spec.h2()[x]
        )));
    }
    let ab = spec.a() + spec.b();
    let lower = (-spec.h2().max_value() / spec.h1().max_value()).ln() / ab;
    let upper = (-spec.h2().min_value() / spec.h1().min_value()).ln() / ab;
    Ok(AprioriBox::new(lower, upper))
}

/// Bounds valid uniformly along the classic deformation with endpoint ε:
/// its coefficients satisfy ε ≤ −h₂(t) ≤ −min h₂ and ε ≤ h₁(t) ≤ max h₁
/// for ε ≤ min(min h₁, −max h₂).
pub fn bounds_classic_homotopy(spec: &ProblemSpec, epsilon: f64) -> Result<AprioriBox> {
    let base = bounds_classic(spec)?;
    let (min_h1, max_h2) = (spec.h1().min_value(), spec.h2().max_value());
    if !(epsilon > 0.0 && epsilon <= min_h1.min(-max_h2)) {
        return Err(Error::BoundsInapplicable(format!(
            "deformation endpoint eps = {epsilon} must lie in (0, min(min h1, -max h2)]"
        )));
    }
    let ab = spec.a() + spec.b();
    let lower = (epsilon / spec.h1().max_value()).ln() / ab;
    let upper = (-spec.h2().min_value() / epsilon).ln() / ab;
    Ok(AprioriBox::new(lower.min(base.lower), upper.max(base.upper)))
}

/// Intermediate constants of the generalized bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralizedConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

pub fn generalized_constants(spec: &ProblemSpec, g: &WeightedGraph) -> Result<GeneralizedConstants> {
    if spec.kind() != EquationKind::Generalized {
        return Err(Error::BoundsInapplicable(
            "generalized bounds requested for the classic equation".into(),
        ));
    }
    spec.check_graph(g)?;
    if let Some(x) = spec.h2().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::BoundsInapplicable(format!(
            "requires h2 > 0 everywhere, h2[{x}] = {}",
            spec.h2()[x]
        )));
    }
    let (a, b) = (spec.a(), spec.b());
    let (min_h1, max_h1) = (spec.h1().min_value(), spec.h1().max_value());
    let (min_h2, max_h2) = (spec.h2().min_value(), spec.h2().max_value());
    let consts = graph_constants(g);
    let (vol, mu0) = (consts.volume, consts.mu0);

    let c1 = (0.5 + (max_h2 / (4.0 * min_h1) + 0.25).sqrt()).ln() / a;
    let c2 = max_h2 * vol + max_h1 * f64::max(0.25, (2.0 * a * c1).exp()) * vol;
    let c3 = -(0.5 + (c2 / (min_h2 * mu0) + 0.25).sqrt()).ln() / b;
    Ok(GeneralizedConstants { c1, c2, c3 })
}

/// Bounds for the generalized equation with h₁, h₂ > 0, uniform in the
/// deformation parameter t ∈ [0, 1].
pub fn bounds_generalized(spec: &ProblemSpec, g: &WeightedGraph) -> Result<AprioriBox> {
    let c = generalized_constants(spec, g)?;
    Ok(AprioriBox::new(c.c3, c.c1))
}

/// C with max u − min u ≤ C‖Δu‖∞ for every field u.
pub fn elliptic_constant(g: &WeightedGraph) -> f64 {
    graph_constants(g).elliptic_constant()
}
