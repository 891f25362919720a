//! Root finding and variational minimization for the Tzitzéica maps.

mod continuation;
mod minimize;
mod multiplicity;
mod newton;

use serde::Serialize;

use crate::graph::VertexField;

pub use continuation::{
    continuation, default_t_grid, march, trace_continuation, ContinuationPath, Stage,
};
pub use minimize::{choose_barriers, minimize_box, theorem_branch, BarrierPair, BoxMinimum, Branch};
pub use multiplicity::{find_two_solutions, Multiplicity};
pub use newton::{newton, newton_deflated, newton_deflated_map, newton_map};
pub(crate) use newton::newton_deflated_undamped;

/// Backtracking line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Damping {
    pub shrink: f64,
    pub min_step: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Damping {
            shrink: 0.5,
            min_step: (-30f64).exp2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Target for the sup norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub damping: Damping,
    pub deflation_radius: f64,
    pub seed: u64,
    /// Overrides the a priori ball radius used for degree estimation.
    pub radius: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 200,
            damping: Damping::default(),
            deflation_radius: 1e-5,
            seed: 0,
            radius: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let d = &self.damping;
        if !(self.tol > 0.0)
            || self.max_iter == 0
            || !(d.shrink > 0.0 && d.shrink < 1.0)
            || !(d.min_step > 0.0)
            || !(self.deflation_radius > 0.0)
            || self.radius.is_some_and(|r| !(r > 0.0 && r.is_finite()))
        {
            return Err(crate::Error::InvalidSpec(format!(
                "invalid solver configuration {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solution: VertexField,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Sign of det of the Jacobian at `solution`; 0 when degenerate.
    pub jac_sign: i8,
    pub converged: bool,
    /// Residual sup norm before each iteration, ending with the final value.
    #[serde(skip)]
    pub residual_history: Vec<f64>,
}
