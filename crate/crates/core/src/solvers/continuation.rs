use super::{newton_map, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{VertexField, WeightedGraph};
use crate::model::{EquationKind, HomotopyParams, ProblemSpec, TzitzeicaMap};

/// Substeps between two grid points may be halved at most this many times.
const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub t: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationPath {
    /// Solved stages in marching order, including inserted substeps.
    pub stages: Vec<Stage>,
    /// Parameter value that could not be reached, if the path broke.
    pub broken_at: Option<f64>,
}

impl ContinuationPath {
    pub fn last(&self) -> Option<&Stage> {
        self.stages.last()
    }

    pub fn into_result(self) -> Result<Vec<Stage>> {
        match self.broken_at {
            None => Ok(self.stages),
            Some(t) => Err(Error::ContinuationBroken {
                t,
                reached: self.stages.last().map_or(f64::NAN, |s| s.t),
            }),
        }
    }
}

/// Uniform 21-point grid from t = 1 down to t = 0.
pub fn default_t_grid() -> Vec<f64> {
    (0..=20).rev().map(|k| k as f64 / 20.0).collect()
}

/// Natural-parameter continuation over `grid`. Each solved stage seeds the
/// next; a failed substep is halved up to 2¹⁰ times before the path is
/// declared broken.
pub fn march<F>(grid: &[f64], start: &VertexField, mut solve_at: F) -> Result<ContinuationPath>
where
    F: FnMut(f64, &VertexField) -> Result<SolveReport>,
{
    let Some(&first) = grid.first() else {
        return Err(Error::InvalidHomotopy("empty continuation grid".into()));
    };
    let mut stages = Vec::with_capacity(grid.len());
    let report = solve_at(first, start)?;
    if !report.converged {
        return Ok(ContinuationPath {
            stages,
            broken_at: Some(first),
        });
    }
    let mut t = first;
    let mut u = report.solution.clone();
    stages.push(Stage { t, report });

    for &target in &grid[1..] {
        let full = target - t;
        let mut h = full;
        while t != target {
            let t_try = if (target - t).abs() <= h.abs() { target } else { t + h };
            let report = match solve_at(t_try, &u) {
                Ok(r) => r,
                Err(Error::ExponentOverflow { .. }) => {
                    return Ok(ContinuationPath {
                        stages,
                        broken_at: Some(t_try),
                    })
                }
                Err(e) => return Err(e),
            };
            if report.converged {
                t = t_try;
                u = report.solution.clone();
                stages.push(Stage { t, report });
            } else {
                h *= 0.5;
                if h.abs() < full.abs() / f64::from(1u32 << MAX_HALVINGS) {
                    return Ok(ContinuationPath {
                        stages,
                        broken_at: Some(t_try),
                    });
                }
            }
        }
    }
    Ok(ContinuationPath {
        stages,
        broken_at: None,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&1.0) || grid.last() != Some(&0.0) {
        return Err(Error::InvalidHomotopy(
            "continuation grid must run from t = 1 to t = 0".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidHomotopy(
            "continuation grid must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Follows the deformation of `spec` from t = 1 back to t = 0 starting at
/// `start`, recording every solved stage. `epsilon` is the classic endpoint
/// coefficient and is ignored for the generalized equation.
pub fn trace_continuation(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    t_grid: &[f64],
    epsilon: f64,
    start: &VertexField,
    cfg: &SolverConfig,
) -> Result<ContinuationPath> {
    check_grid(t_grid)?;
    let base = match spec.kind() {
        EquationKind::Classic => HomotopyParams::classic(spec, 1.0, epsilon)?,
        EquationKind::Generalized => HomotopyParams::generalized(spec, 1.0)?,
    };
    march(t_grid, start, |t, u| {
        let map = TzitzeicaMap::deformed(spec, g, base.with_t(t))?;
        newton_map(&map, u, cfg)
    })
}

/// Continuation from u ≡ 0 at t = 1; errors if any stage cannot be solved.
pub fn continuation(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    t_grid: &[f64],
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Stage>> {
    trace_continuation(spec, g, t_grid, epsilon, &VertexField::zeros(g.len()), cfg)?.into_result()
}
