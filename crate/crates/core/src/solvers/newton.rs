use nalgebra::DVector;

use super::{SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{VertexField, WeightedGraph};
use crate::linalg::Lu;
use crate::model::{ProblemSpec, TzitzeicaMap};

const ARMIJO: f64 = 1e-4;

/// Damped Newton on the undeformed residual.
pub fn newton(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    start: &VertexField,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    newton_map(&TzitzeicaMap::new(spec, g)?, start, cfg)
}

pub fn newton_map(map: &TzitzeicaMap<'_>, start: &VertexField, cfg: &SolverConfig) -> Result<SolveReport> {
    solve(map, start, &[], cfg, true)
}

/// Newton on the deflated residual M(u)·F(u) with
/// M(u) = Π_k (1 + 1/‖u − u_k‖₂²), so that `known` roots repel the iteration.
pub fn newton_deflated(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    known: &[VertexField],
    start: &VertexField,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    newton_deflated_map(&TzitzeicaMap::new(spec, g)?, known, start, cfg)
}

pub fn newton_deflated_map(
    map: &TzitzeicaMap<'_>,
    known: &[VertexField],
    start: &VertexField,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    solve(map, start, known, cfg, true)
}

/// Deflated Newton taking full steps, stopping on overflow. Its basins
/// differ from the damped iteration's, which matters for root enumeration.
pub(crate) fn newton_deflated_undamped(
    map: &TzitzeicaMap<'_>,
    known: &[VertexField],
    start: &VertexField,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    solve(map, start, known, cfg, false)
}

/// ln M(u) and its gradient.
fn deflation(u: &DVector<f64>, known: &[VertexField]) -> (f64, DVector<f64>) {
    let mut log_m = 0.0;
    let mut grad = DVector::zeros(u.len());
    for k in known {
        let diff = u - k.as_vector();
        let s = diff.norm_squared();
        log_m += (1.0 / s).ln_1p();
        grad -= diff * (2.0 / (s * (s + 1.0)));
    }
    (log_m, grad)
}

fn merit(u: &DVector<f64>, f: &VertexField, known: &[VertexField]) -> f64 {
    let base = f.norm_squared();
    if known.is_empty() {
        base
    } else {
        let (log_m, _) = deflation(u, known);
        base * (2.0 * log_m).exp()
    }
}

fn solve(
    map: &TzitzeicaMap<'_>,
    start: &VertexField,
    known: &[VertexField],
    cfg: &SolverConfig,
    damped: bool,
) -> Result<SolveReport> {
    cfg.validate()?;
    if start.len() != map.dim() {
        return Err(Error::Dimension {
            expected: map.dim(),
            found: start.len(),
        });
    }
    let mut u = start.clone();
    let mut f = map.residual(&u)?;
    let mut history = vec![f.sup_norm()];
    let mut iterations = 0;

    let finish = |u: VertexField, f: VertexField, iterations, history, converged: bool| {
        let residual_norm = f.sup_norm();
        let jac_sign = match map.jacobian(&u) {
            Ok(jac) => Lu::new(jac).det_sign(),
            Err(_) => 0,
        };
        let too_close = known
            .iter()
            .any(|k| k.sup_distance(&u) <= cfg.deflation_radius);
        SolveReport {
            converged: converged && jac_sign != 0 && !too_close && residual_norm < cfg.tol,
            solution: u,
            residual_norm,
            iterations,
            jac_sign,
            residual_history: history,
        }
    };

    while iterations < cfg.max_iter {
        if f.sup_norm() < cfg.tol {
            return Ok(finish(u, f, iterations, history, true));
        }
        let lu = Lu::new(map.jacobian(&u)?);
        let Some(step) = lu.solve(&-f.as_vector()) else {
            return Ok(finish(u, f, iterations, history, false));
        };
        let direction = if known.is_empty() {
            step
        } else {
            // Newton step of M·F from the plain step via Sherman–Morrison.
            let (_, grad_log_m) = deflation(u.as_vector(), known);
            let denom = 1.0 - grad_log_m.dot(&step);
            if !denom.is_finite() || denom.abs() < 1e-14 {
                return Ok(finish(u, f, iterations, history, false));
            }
            step / denom
        };

        if !damped {
            iterations += 1;
            let trial = VertexField::from_vector(u.as_vector() + &direction);
            match map.residual(&trial) {
                Ok(ft) if trial.iter().all(|v| v.is_finite()) => {
                    u = trial;
                    f = ft;
                    history.push(f.sup_norm());
                    continue;
                }
                _ => return Ok(finish(u, f, iterations, history, false)),
            }
        }

        let phi0 = merit(u.as_vector(), &f, known);
        let mut s = 1.0;
        let accepted = loop {
            let trial = VertexField::from_vector(u.as_vector() + &direction * s);
            if trial.iter().all(|v| v.is_finite()) {
                if let Ok(ft) = map.residual(&trial) {
                    let phi = merit(trial.as_vector(), &ft, known);
                    if phi <= (1.0 - 2.0 * ARMIJO * s) * phi0 {
                        break Some((trial, ft));
                    }
                }
            }
            s *= cfg.damping.shrink;
            if s < cfg.damping.min_step {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((trial, ft)) => {
                u = trial;
                f = ft;
                history.push(f.sup_norm());
            }
            None => return Ok(finish(u, f, iterations, history, false)),
        }
    }
    let converged = f.sup_norm() < cfg.tol;
    Ok(finish(u, f, iterations, history, converged))
}
