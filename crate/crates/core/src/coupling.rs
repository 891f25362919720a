//! Pseudo-arclength continuation in the coupling strength `s` of
//! H(u, s) = −sΔu + φ(u), from the decoupled roots at s = 0 to roots of the
//! full map at s = 1.
//!
//! The pointwise a priori bounds do not depend on the edge weights, so they
//! hold uniformly in `s` and no branch can leave the ball.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::VertexField;
use crate::linalg::Lu;
use crate::model::{TzitzeicaMap, EXPONENT_CAP};
use crate::scalar;

/// Decoupled root combinations tracked at most.
pub(crate) const MAX_BRANCHES: usize = 4096;
const SCALAR_CELLS: usize = 1 << 12;
const MAX_STEPS: usize = 4000;
const H_INIT: f64 = 0.05;
const H_MAX: f64 = 0.25;
const H_MIN: f64 = 1e-7;
const CORRECTOR_ITERS: usize = 8;
const CORRECTOR_TOL: f64 = 1e-11;

/// Roots of the vertex-`x` nonlinearity inside [−radius, radius].
pub(crate) fn scalar_roots(map: &TzitzeicaMap<'_>, x: usize, radius: f64) -> Vec<f64> {
    let phi = map.pointwise(x);
    let safe = |v: f64| {
        if phi.max_exponent(v) > EXPONENT_CAP {
            f64::NAN
        } else {
            phi.value(v)
        }
    };
    scalar::bracket_roots(safe, -radius, radius, SCALAR_CELLS)
}

/// Every combination of per-vertex roots, or `None` past [`MAX_BRANCHES`].
pub(crate) fn decoupled_roots(map: &TzitzeicaMap<'_>, radius: f64) -> Option<Vec<VertexField>> {
    let n = map.dim();
    let per_vertex: Vec<Vec<f64>> = (0..n).map(|x| scalar_roots(map, x, radius)).collect();
    let total = per_vertex
        .iter()
        .try_fold(1usize, |acc, r| acc.checked_mul(r.len()))
        .filter(|t| *t <= MAX_BRANCHES)?;
    Some(
        (0..total)
            .map(|mut index| {
                VertexField::from_fn(n, |x| {
                    let roots = &per_vertex[x];
                    let v = roots[index % roots.len()];
                    index /= roots.len();
                    v
                })
            })
            .collect(),
    )
}

struct Coupled<'m, 'a> {
    map: &'m TzitzeicaMap<'a>,
    lap: DMatrix<f64>,
}

impl Coupled<'_, '_> {
    /// H(u, s) = F(u) + (1 − s)Δu, since F(u) = −Δu + φ(u).
    fn value(&self, u: &DVector<f64>, s: f64) -> Result<DVector<f64>> {
        let field = VertexField::from_vector(u.clone());
        let f = self.map.residual(&field)?;
        Ok(f.into_vector() + (&self.lap * u) * (1.0 - s))
    }

    /// [H_u | H_s] as an n × (n + 1) block.
    fn jacobian(&self, u: &DVector<f64>, s: f64) -> Result<DMatrix<f64>> {
        let n = u.len();
        let field = VertexField::from_vector(u.clone());
        let hu = self.map.jacobian(&field)? + &self.lap * (1.0 - s);
        let hs = -(&self.lap * u);
        let mut m = DMatrix::zeros(n, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&hu);
        m.set_column(n, &hs);
        Ok(m)
    }

    fn bordered(&self, x: &DVector<f64>, row: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = x.len() - 1;
        let top = self.jacobian(&x.rows(0, n).into_owned(), x[n])?;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n + 1)).copy_from(&top);
        m.set_row(n, &row.transpose());
        Ok(m)
    }

    fn tangent(&self, x: &DVector<f64>, previous: &DVector<f64>) -> Result<Option<DVector<f64>>> {
        let n = x.len() - 1;
        let m = self.bordered(x, previous)?;
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        Ok(Lu::new(m).solve(&rhs).map(|t| t.normalize()))
    }

    /// Newton on [H(x); τ·(x − x_pred)] = 0.
    fn correct(&self, predicted: &DVector<f64>, tangent: &DVector<f64>) -> Result<Option<(DVector<f64>, usize)>> {
        let n = predicted.len() - 1;
        let mut x = predicted.clone();
        for iter in 0..CORRECTOR_ITERS {
            let h = self.value(&x.rows(0, n).into_owned(), x[n])?;
            let mut rhs = DVector::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&-&h);
            rhs[n] = -tangent.dot(&(&x - predicted));
            if h.amax() < CORRECTOR_TOL && rhs[n].abs() < CORRECTOR_TOL {
                return Ok(Some((x, iter)));
            }
            let Some(dx) = Lu::new(self.bordered(&x, tangent)?).solve(&rhs) else {
                return Ok(None);
            };
            x += dx;
        }
        let h = self.value(&x.rows(0, n).into_owned(), x[n])?;
        Ok((h.amax() < CORRECTOR_TOL).then_some((x, CORRECTOR_ITERS)))
    }

    /// Follows the branch through `start` at s = 0; returns the point where
    /// it crosses s = 1, or `None` when it returns to s = 0 or is lost.
    fn track(&self, start: &VertexField, radius: f64) -> Result<Option<VertexField>> {
        let n = start.len();
        let mut x = DVector::zeros(n + 1);
        x.rows_mut(0, n).copy_from(start.as_vector());
        let mut up = DVector::zeros(n + 1);
        up[n] = 1.0;
        let Some(mut tangent) = self.tangent(&x, &up)? else {
            return Ok(None);
        };
        if tangent[n] < 0.0 {
            tangent = -tangent;
        }
        let mut h = H_INIT;
        for _ in 0..MAX_STEPS {
            let predicted = &x + &tangent * h;
            let corrected = match self.correct(&predicted, &tangent) {
                Ok(c) => c,
                Err(Error::ExponentOverflow { .. }) => None,
                Err(e) => return Err(e),
            };
            let Some((next, iters)) = corrected.filter(|(next, _)| (next - &x).norm() < 2.0 * h) else {
                h *= 0.5;
                if h < H_MIN {
                    return Ok(None);
                }
                continue;
            };
            if next[n] >= 1.0 {
                // interpolate to s = 1; the caller polishes with Newton
                let w = (1.0 - x[n]) / (next[n] - x[n]);
                let u = x.rows(0, n) * (1.0 - w) + next.rows(0, n) * w;
                return Ok(Some(VertexField::from_vector(u)));
            }
            if next[n] < 0.0 || next.rows(0, n).amax() > 2.0 * radius {
                return Ok(None);
            }
            let Some(mut t) = self.tangent(&next, &tangent)? else {
                return Ok(None);
            };
            if t.dot(&tangent) < 0.0 {
                t = -t;
            }
            x = next;
            tangent = t;
            if iters <= 3 {
                h = (h * 1.5).min(H_MAX);
            }
        }
        Ok(None)
    }
}

/// Approximate root of the full map on the branch through the decoupled
/// root `start`, if the branch reaches s = 1.
pub(crate) fn branch_end(map: &TzitzeicaMap<'_>, start: &VertexField, radius: f64) -> Result<Option<VertexField>> {
    let coupled = Coupled {
        map,
        lap: map.graph().laplacian_matrix(),
    };
    coupled.track(start, radius)
}

/// Approximate roots of the full map reached from the decoupled roots.
pub(crate) fn branch_ends(map: &TzitzeicaMap<'_>, radius: f64) -> Result<Vec<VertexField>> {
    let Some(starts) = decoupled_roots(map, radius) else {
        return Ok(Vec::new());
    };
    let coupled = Coupled {
        map,
        lap: map.graph().laplacian_matrix(),
    };
    let ends: Vec<Option<VertexField>> = starts
        .par_iter()
        .map(|s| coupled.track(s, radius))
        .collect::<Result<_>>()?;
    Ok(ends.into_iter().flatten().collect())
}
