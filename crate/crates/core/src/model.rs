//! The Tzitzéica residual maps, their homotopy deformations, Jacobians, and
//! the energy functional of the generalized equation.
//!
//! Classic map:      F(u) = −Δu + h₁e^{Au} + h₂e^{−Bu}
//! Generalized map:  G(u) = −Δu + h₁e^{Au}(e^{Au}−1) + h₂e^{−Bu}(e^{−Bu}−1)

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexField, WeightedGraph};

/// Largest exponent the residual is allowed to evaluate.
pub const EXPONENT_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    Classic,
    Generalized,
}

impl std::fmt::Display for EquationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquationKind::Classic => "classic",
            EquationKind::Generalized => "generalized",
        })
    }
}

impl std::str::FromStr for EquationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "classic" => Ok(EquationKind::Classic),
            "generalized" => Ok(EquationKind::Generalized),
            other => Err(format!("unknown equation kind '{other}'")),
        }
    }
}

/// Equation kind, coefficient functions and exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    kind: EquationKind,
    h1: VertexField,
    h2: VertexField,
    a: f64,
    b: f64,
}

impl ProblemSpec {
    pub fn new(kind: EquationKind, h1: VertexField, h2: VertexField, a: f64, b: f64) -> Result<Self> {
        if h1.len() != h2.len() {
            return Err(Error::Dimension {
                expected: h1.len(),
                found: h2.len(),
            });
        }
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "exponents must be positive and finite (A = {a}, B = {b})"
            )));
        }
        if let Some(x) = h1.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "h1 must be positive, h1[{x}] = {}",
                h1[x]
            )));
        }
        Ok(ProblemSpec { kind, h1, h2, a, b })
    }

    pub fn classic(h1: VertexField, h2: VertexField, a: f64, b: f64) -> Result<Self> {
        Self::new(EquationKind::Classic, h1, h2, a, b)
    }

    pub fn generalized(h1: VertexField, h2: VertexField, a: f64, b: f64) -> Result<Self> {
        Self::new(EquationKind::Generalized, h1, h2, a, b)
    }

    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn h1(&self) -> &VertexField {
        &self.h1
    }

    pub fn h2(&self) -> &VertexField {
        &self.h2
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.h1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h1.is_empty()
    }

    pub fn h2_all_negative(&self) -> bool {
        self.h2.iter().all(|v| *v < 0.0)
    }

    pub fn h2_all_positive(&self) -> bool {
        self.h2.iter().all(|v| *v > 0.0)
    }

    /// Same kind and exponents with replaced coefficients.
    pub fn with_coefficients(&self, h1: VertexField, h2: VertexField) -> Result<Self> {
        Self::new(self.kind, h1, h2, self.a, self.b)
    }

    pub fn check_graph(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.len() {
            return Err(Error::Dimension {
                expected: g.len(),
                found: self.len(),
            });
        }
        Ok(())
    }

    /// The vertex-`x` nonlinearity of the undeformed map.
    pub fn pointwise(&self, x: usize) -> Pointwise {
        Pointwise::new(self, x, None)
    }
}

/// Deformation parameter `t` and, for the classic equation, the endpoint
/// coefficient ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomotopyParams {
    t: f64,
    epsilon: f64,
}

impl HomotopyParams {
    /// Classic deformation
    /// F̃(u,t) = −Δu + [tε+(1−t)h₁]e^{Au} + [−tε+(1−t)h₂]e^{−Bu}.
    /// Valid for every t ∈ [0,1] exactly when ε > 0 and h₂ < 0 everywhere.
    pub fn classic(spec: &ProblemSpec, t: f64, epsilon: f64) -> Result<Self> {
        if spec.kind() != EquationKind::Classic {
            return Err(Error::InvalidHomotopy(
                "classic deformation requested for the generalized equation".into(),
            ));
        }
        check_t(t)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidHomotopy(format!(
                "t*eps + (1-t)*h1(x) > 0 requires eps > 0 (eps = {epsilon})"
            )));
        }
        if let Some(x) = spec.h2().iter().position(|v| !(*v < 0.0)) {
            return Err(Error::InvalidHomotopy(format!(
                "-t*eps + (1-t)*h2(x) < 0 fails at vertex {x} for t = 0 (h2 = {})",
                spec.h2()[x]
            )));
        }
        Ok(HomotopyParams { t, epsilon })
    }

    /// Generalized deformation
    /// G̃(u,t) = −Δu + h₁e^{Au}(e^{Au}−t) + h₂e^{−Bu}(e^{−Bu}−t).
    pub fn generalized(spec: &ProblemSpec, t: f64) -> Result<Self> {
        if spec.kind() != EquationKind::Generalized {
            return Err(Error::InvalidHomotopy(
                "generalized deformation requested for the classic equation".into(),
            ));
        }
        check_t(t)?;
        Ok(HomotopyParams { t, epsilon: 0.0 })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub(crate) fn with_t(self, t: f64) -> Self {
        HomotopyParams { t, ..self }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidHomotopy(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// Default classic deformation endpoint ε = min(min h₁, −max h₂)/4.
pub fn default_epsilon(spec: &ProblemSpec) -> f64 {
    let min_h1 = spec.h1().min_value();
    let max_h2 = spec.h2().max_value();
    min_h1.min(-max_h2) / 4.0
}

/// Scalar nonlinearity at one vertex, `v ↦ φ(v)`, so that the residual is
/// `−Δu(x) + φ_x(u(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pointwise {
    /// c₁e^{Av} + c₂e^{−Bv}
    Classic { c1: f64, c2: f64, a: f64, b: f64 },
    /// h₁e^{Av}(e^{Av}−t) + h₂e^{−Bv}(e^{−Bv}−t)
    Generalized { h1: f64, h2: f64, a: f64, b: f64, t: f64 },
}

impl Pointwise {
    fn new(spec: &ProblemSpec, x: usize, hp: Option<&HomotopyParams>) -> Self {
        let (a, b) = (spec.a, spec.b);
        let (h1, h2) = (spec.h1[x], spec.h2[x]);
        match spec.kind {
            EquationKind::Classic => match hp {
                None => Pointwise::Classic { c1: h1, c2: h2, a, b },
                Some(hp) => {
                    let (t, eps) = (hp.t, hp.epsilon);
                    Pointwise::Classic {
                        c1: t * eps + (1.0 - t) * h1,
                        c2: -t * eps + (1.0 - t) * h2,
                        a,
                        b,
                    }
                }
            },
            EquationKind::Generalized => Pointwise::Generalized {
                h1,
                h2,
                a,
                b,
                t: hp.map_or(1.0, |hp| hp.t),
            },
        }
    }

    /// Largest exponent evaluated at `v`.
    pub fn max_exponent(&self, v: f64) -> f64 {
        match *self {
            Pointwise::Classic { a, b, .. } => (a * v).max(-b * v),
            Pointwise::Generalized { a, b, .. } => 2.0 * (a * v).max(-b * v),
        }
    }

    pub fn value(&self, v: f64) -> f64 {
        match *self {
            Pointwise::Classic { c1, c2, a, b } => c1 * (a * v).exp() + c2 * (-b * v).exp(),
            Pointwise::Generalized { h1, h2, a, b, t } => {
                let ea = (a * v).exp();
                let eb = (-b * v).exp();
                h1 * ea * (ea - t) + h2 * eb * (eb - t)
            }
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match *self {
            Pointwise::Classic { c1, c2, a, b } => {
                a * c1 * (a * v).exp() - b * c2 * (-b * v).exp()
            }
            Pointwise::Generalized { h1, h2, a, b, t } => {
                let ea = (a * v).exp();
                let eb = (-b * v).exp();
                h1 * (2.0 * a * ea * ea - t * a * ea) + h2 * (-2.0 * b * eb * eb + t * b * eb)
            }
        }
    }
}

/// A residual map `u ↦ −Δu + φ(u)` bound to a graph, optionally deformed.
#[derive(Debug, Clone)]
pub struct TzitzeicaMap<'a> {
    spec: &'a ProblemSpec,
    graph: &'a WeightedGraph,
    homotopy: Option<HomotopyParams>,
}

impl<'a> TzitzeicaMap<'a> {
    pub fn new(spec: &'a ProblemSpec, graph: &'a WeightedGraph) -> Result<Self> {
        spec.check_graph(graph)?;
        Ok(TzitzeicaMap {
            spec,
            graph,
            homotopy: None,
        })
    }

    pub fn deformed(
        spec: &'a ProblemSpec,
        graph: &'a WeightedGraph,
        hp: HomotopyParams,
    ) -> Result<Self> {
        spec.check_graph(graph)?;
        Ok(TzitzeicaMap {
            spec,
            graph,
            homotopy: Some(hp),
        })
    }

    pub fn spec(&self) -> &'a ProblemSpec {
        self.spec
    }

    pub fn graph(&self) -> &'a WeightedGraph {
        self.graph
    }

    pub fn homotopy(&self) -> Option<HomotopyParams> {
        self.homotopy
    }

    pub fn dim(&self) -> usize {
        self.graph.len()
    }

    pub fn pointwise(&self, x: usize) -> Pointwise {
        Pointwise::new(self.spec, x, self.homotopy.as_ref())
    }

    fn check_exponents(&self, u: &VertexField) -> Result<()> {
        for x in 0..u.len() {
            let exponent = self.pointwise(x).max_exponent(u[x]);
            if !(exponent <= EXPONENT_CAP) {
                return Err(Error::ExponentOverflow {
                    vertex: x,
                    exponent,
                    cap: EXPONENT_CAP,
                });
            }
        }
        Ok(())
    }

    pub fn residual(&self, u: &VertexField) -> Result<VertexField> {
        let lap = self.graph.laplacian(u)?;
        self.check_exponents(u)?;
        Ok(VertexField::from_fn(u.len(), |x| {
            -lap[x] + self.pointwise(x).value(u[x])
        }))
    }

    /// −Δ plus the diagonal of pointwise derivatives.
    pub fn jacobian(&self, u: &VertexField) -> Result<DMatrix<f64>> {
        self.spec.check_graph(self.graph)?;
        if u.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: u.len(),
            });
        }
        self.check_exponents(u)?;
        let mut m = -self.graph.laplacian_matrix();
        for x in 0..u.len() {
            m[(x, x)] += self.pointwise(x).derivative(u[x]);
        }
        Ok(m)
    }
}

/// Undeformed residual F(u) or G(u) depending on the spec kind.
pub fn residual(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> Result<VertexField> {
    TzitzeicaMap::new(spec, g)?.residual(u)
}

/// Deformed residual F̃(u,t) or G̃(u,t).
pub fn residual_homotopy(
    spec: &ProblemSpec,
    g: &WeightedGraph,
    u: &VertexField,
    hp: HomotopyParams,
) -> Result<VertexField> {
    TzitzeicaMap::deformed(spec, g, hp)?.residual(u)
}

pub fn jacobian(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> Result<DMatrix<f64>> {
    TzitzeicaMap::new(spec, g)?.jacobian(u)
}

/// J(u) = ½∫|∇u|² dμ + ∫[h₁(e^{Au}−1)²/(2A) − h₂(e^{−Bu}−1)²/(2B)] dμ.
///
/// Its L²(μ) gradient is exactly the generalized residual G(u).
pub fn energy(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> Result<f64> {
    if spec.kind() != EquationKind::Generalized {
        return Err(Error::UnsupportedFunctional);
    }
    let map = TzitzeicaMap::new(spec, g)?;
    map.check_exponents(u)?;
    let dirichlet = g.dirichlet_energy(u)?;
    let (a, b) = (spec.a(), spec.b());
    let potential: f64 = (0..u.len())
        .map(|x| {
            let pa = (a * u[x]).exp_m1();
            let pb = (-b * u[x]).exp_m1();
            g.mu()[x] * (spec.h1()[x] * pa * pa / (2.0 * a) - spec.h2()[x] * pb * pb / (2.0 * b))
        })
        .sum();
    Ok(0.5 * dirichlet + potential)
}

/// DJ(u) in the μ-weighted inner product; shares the residual code path.
pub fn energy_gradient(spec: &ProblemSpec, g: &WeightedGraph, u: &VertexField) -> Result<VertexField> {
    if spec.kind() != EquationKind::Generalized {
        return Err(Error::UnsupportedFunctional);
    }
    residual(spec, g, u)
}
