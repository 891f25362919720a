//! Finite connected weighted graphs with a vertex measure, and the discrete
//! differential and integral operators defined on them.

use std::collections::{HashMap, VecDeque};
use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// An undirected edge between two vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, weight: f64) -> Self {
        Edge { a, b, weight }
    }
}

/// A real-valued function on the vertex set, aligned with the graph's
/// vertex ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexField(DVector<f64>);

impl VertexField {
    /// Builds a field, rejecting non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(VertexField(DVector::from_vec(values)))
    }

    pub fn zeros(n: usize) -> Self {
        VertexField(DVector::zeros(n))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        VertexField(DVector::from_element(n, value))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        let mut f = f;
        VertexField(DVector::from_fn(n, |i, _| f(i)))
    }

    pub(crate) fn from_vector(v: DVector<f64>) -> Self {
        VertexField(v)
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sup-norm distance to another field of the same length.
    pub fn sup_distance(&self, other: &VertexField) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Deref for VertexField {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl DerefMut for VertexField {
    fn deref_mut(&mut self) -> &mut DVector<f64> {
        &mut self.0
    }
}

impl Serialize for VertexField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

/// Connected finite graph with positive vertex measure and symmetric
/// positive edge weights. Immutable once built.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    labels: Vec<String>,
    mu: Vec<f64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Validates and builds a graph. Edges are stored once per unordered
    /// pair; connectivity is checked by breadth-first traversal.
    pub fn new(labels: Vec<String>, mu: Vec<f64>, edges: Vec<Edge>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if mu.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: mu.len(),
            });
        }
        let mut seen_labels = HashMap::with_capacity(n);
        for label in &labels {
            if seen_labels.insert(label.as_str(), ()).is_some() {
                return Err(Error::DuplicateVertex {
                    label: label.clone(),
                });
            }
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::NonPositiveMeasure {
                    label: labels[i].clone(),
                    mu: m,
                });
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        let mut stored = Vec::with_capacity(edges.len());
        let mut pairs = HashMap::with_capacity(edges.len());
        for e in edges {
            for index in [e.a, e.b] {
                if index >= n {
                    return Err(Error::UnknownVertex { index, n });
                }
            }
            if e.a == e.b {
                return Err(Error::SelfLoop {
                    label: labels[e.a].clone(),
                });
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::NonPositiveWeight {
                    a: labels[e.a].clone(),
                    b: labels[e.b].clone(),
                    weight: e.weight,
                });
            }
            let key = (e.a.min(e.b), e.a.max(e.b));
            if pairs.insert(key, ()).is_some() {
                return Err(Error::DuplicateEdge {
                    a: labels[key.0].clone(),
                    b: labels[key.1].clone(),
                });
            }
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
            stored.push(Edge::new(key.0, key.1, e.weight));
        }

        let g = WeightedGraph {
            labels,
            mu,
            edges: stored,
            adjacency,
        };
        let dist = g.bfs(0);
        if let Some(far) = dist.iter().position(|d| d.is_none()) {
            return Err(Error::Disconnected {
                a: g.labels[0].clone(),
                b: g.labels[far].clone(),
            });
        }
        Ok(g)
    }

    /// Graph with labels `v0, v1, ...`.
    pub fn from_indices(mu: Vec<f64>, edges: Vec<Edge>) -> Result<Self> {
        let labels = (0..mu.len()).map(|i| format!("v{i}")).collect();
        Self::new(labels, mu, edges)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn volume(&self) -> f64 {
        self.mu.iter().sum()
    }

    fn check_aligned(&self, u: &VertexField) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: u.len(),
            });
        }
        Ok(())
    }

    /// Δu(x) = (1/μ(x)) Σ_{y∼x} w_xy (u(y) − u(x)).
    pub fn laplacian(&self, u: &VertexField) -> Result<VertexField> {
        self.check_aligned(u)?;
        Ok(VertexField::from_fn(self.len(), |x| {
            let ux = u[x];
            let s: f64 = self.adjacency[x].iter().map(|&(y, w)| w * (u[y] - ux)).sum();
            s / self.mu[x]
        }))
    }

    /// Dense matrix of Δ in the vertex ordering.
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for x in 0..n {
            let inv = 1.0 / self.mu[x];
            for &(y, w) in &self.adjacency[x] {
                m[(x, y)] += w * inv;
                m[(x, x)] -= w * inv;
            }
        }
        m
    }

    /// |∇u|²(x) = (1/(2μ(x))) Σ_{y∼x} w_xy (u(y) − u(x))².
    pub fn gradient_norm_sq(&self, u: &VertexField) -> Result<VertexField> {
        self.check_aligned(u)?;
        Ok(VertexField::from_fn(self.len(), |x| {
            let ux = u[x];
            let s: f64 = self.adjacency[x]
                .iter()
                .map(|&(y, w)| w * (u[y] - ux).powi(2))
                .sum();
            s / (2.0 * self.mu[x])
        }))
    }

    /// Dirichlet energy ∫|∇u|² dμ, summed edgewise.
    pub fn dirichlet_energy(&self, u: &VertexField) -> Result<f64> {
        self.check_aligned(u)?;
        Ok(self
            .edges
            .iter()
            .map(|e| e.weight * (u[e.a] - u[e.b]).powi(2))
            .sum())
    }

    pub fn integrate(&self, f: &VertexField) -> Result<f64> {
        self.check_aligned(f)?;
        Ok(self.mu.iter().zip(f.iter()).map(|(m, v)| m * v).sum())
    }

    pub fn average(&self, f: &VertexField) -> Result<f64> {
        Ok(self.integrate(f)? / self.volume())
    }

    /// Unweighted hop distances from `source`; `None` marks unreachable vertices.
    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for &(y, _) in &self.adjacency[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Largest shortest-path edge count over all vertex pairs.
    pub fn diameter(&self) -> usize {
        (0..self.len())
            .flat_map(|s| self.bfs(s).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }

    /// Spectrum of −Δ, computed on the symmetric similar matrix
    /// diag(√μ)(−Δ)diag(1/√μ) = diag(1/√μ) L diag(1/√μ).
    pub fn spectrum(&self) -> Vec<f64> {
        let n = self.len();
        let lap = self.laplacian_matrix();
        let sqrt_mu: Vec<f64> = self.mu.iter().map(|m| m.sqrt()).collect();
        let sym = DMatrix::from_fn(n, n, |i, j| {
            let v = -lap[(i, j)] * sqrt_mu[i] / sqrt_mu[j];
            if i == j {
                v
            } else {
                // average the two mirrored entries to remove rounding asymmetry
                0.5 * (v - lap[(j, i)] * sqrt_mu[j] / sqrt_mu[i])
            }
        });
        linalg::symmetric_eigenvalues(&sym, EIGEN_TOL)
    }
}

const EIGEN_TOL: f64 = 1e-12;

/// Field-independent constants entering the elliptic estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphConstants {
    pub volume: f64,
    pub w0: f64,
    pub mu0: f64,
    /// Diameter plus one: vertex count of a longest shortest path.
    pub ell: usize,
    /// First nonzero eigenvalue of −Δ; absent on a single vertex.
    pub lambda1: Option<f64>,
}

impl GraphConstants {
    /// C = √((ℓ−1)·Vol(G)/(w₀λ₁)), or 0 on a single vertex.
    pub fn elliptic_constant(&self) -> f64 {
        match self.lambda1 {
            Some(l1) => ((self.ell - 1) as f64 * self.volume / (self.w0 * l1)).sqrt(),
            None => 0.0,
        }
    }
}

pub fn graph_constants(g: &WeightedGraph) -> GraphConstants {
    let volume = g.volume();
    let mu0 = g.mu().iter().copied().fold(f64::INFINITY, f64::min);
    let w0 = g
        .edges()
        .iter()
        .map(|e| e.weight)
        .fold(f64::INFINITY, f64::min);
    let (w0, lambda1) = if g.len() < 2 {
        (f64::NAN, None)
    } else {
        (w0, Some(g.spectrum()[1]))
    };
    GraphConstants {
        volume,
        w0: if w0.is_finite() { w0 } else { 0.0 },
        mu0,
        ell: g.diameter() + 1,
        lambda1,
    }
}
