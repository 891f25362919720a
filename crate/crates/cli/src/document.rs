//! The line-oriented graph file format.
//!
//! ```text
//! # comment
//! param equation classic
//! param A 1.0
//! vertex a 1 1 -1
//! vertex b 1 1 -1
//! edge a b 1
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use tzitzeica::{Edge, EquationKind, ProblemSpec, VertexField, WeightedGraph};

/// Where in the input a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    /// Two vertices with no path between them.
    Vertices(String, String),
    EndOfFile,
    File(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Vertices(a, b) => write!(f, "vertices '{a}' and '{b}'"),
            Location::EndOfFile => write!(f, "end of file"),
            Location::File(p) => write!(f, "file '{p}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            location: Location::Line(line),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexRecord {
    pub label: String,
    pub mu: f64,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub a: String,
    pub b: String,
    pub weight: f64,
}

/// Optional inline parameters; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub equation: Option<EquationKind>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

/// A parsed graph file. Labels are unique, every edge endpoint is declared,
/// μ, w and h₁ are positive, and the graph is connected.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDocument {
    pub params: Params,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

fn number(token: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::at(line, format!("invalid {what} '{token}'"))),
    }
}

fn positive(token: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    let v = number(token, line, what)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ParseError::at(line, format!("{what} must be positive, found {v}")))
    }
}

fn kind_name(kind: EquationKind) -> &'static str {
    match kind {
        EquationKind::Classic => "classic",
        EquationKind::Generalized => "generalized",
    }
}

impl GraphDocument {
    pub fn parse_file(path: &Path) -> Result<Self, ParseError> {
        let bytes = std::fs::read(path).map_err(|e| ParseError {
            location: Location::File(path.display().to_string()),
            message: format!("cannot read: {e}"),
        })?;
        Self::parse_bytes(&bytes)
    }

    pub fn parse_bytes(bytes: &[u8]) -> Result<Self, ParseError> {
        let mut lines = Vec::new();
        for (i, raw) in bytes.split(|b| *b == b'\n').enumerate() {
            let text = std::str::from_utf8(raw).map_err(|_| ParseError::at(i + 1, "invalid UTF-8"))?;
            lines.push(text);
        }
        Self::parse_lines(&lines)
    }

    pub fn parse_str(text: &str) -> Result<Self, ParseError> {
        Self::parse_lines(&text.split('\n').collect::<Vec<_>>())
    }

    fn parse_lines(lines: &[&str]) -> Result<Self, ParseError> {
        let mut doc = GraphDocument {
            params: Params::default(),
            vertices: Vec::new(),
            edges: Vec::new(),
        };
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edge_lines: HashMap<(usize, usize), usize> = HashMap::new();

        for (i, raw) in lines.iter().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some((&head, args)) = tokens.split_first() else { continue };
            match head {
                "vertex" => {
                    let [label, mu, h1, h2] = args else {
                        return Err(ParseError::at(line, "expected 'vertex <label> <mu> <h1> <h2>'"));
                    };
                    if let Some(first) = index.get(*label) {
                        return Err(ParseError::at(
                            line,
                            format!("duplicate vertex '{label}' (first declared as vertex {})", first + 1),
                        ));
                    }
                    let record = VertexRecord {
                        label: label.to_string(),
                        mu: positive(mu, line, "mu")?,
                        h1: positive(h1, line, "h1")?,
                        h2: number(h2, line, "h2")?,
                    };
                    index.insert(record.label.clone(), doc.vertices.len());
                    doc.vertices.push(record);
                }
                "edge" => {
                    let [a, b, w] = args else {
                        return Err(ParseError::at(line, "expected 'edge <labelA> <labelB> <weight>'"));
                    };
                    let lookup = |l: &str| {
                        index
                            .get(l)
                            .copied()
                            .ok_or_else(|| ParseError::at(line, format!("unknown vertex '{l}'")))
                    };
                    let (ia, ib) = (lookup(a)?, lookup(b)?);
                    if ia == ib {
                        return Err(ParseError::at(line, format!("self-loop at '{a}'")));
                    }
                    let key = (ia.min(ib), ia.max(ib));
                    if let Some(first) = edge_lines.get(&key) {
                        return Err(ParseError::at(
                            line,
                            format!("edge {a}-{b} already declared on line {first}"),
                        ));
                    }
                    edge_lines.insert(key, line);
                    doc.edges.push(EdgeRecord {
                        a: a.to_string(),
                        b: b.to_string(),
                        weight: positive(w, line, "weight")?,
                    });
                }
                "param" => {
                    let [name, value] = args else {
                        return Err(ParseError::at(line, "expected 'param <name> <value>'"));
                    };
                    let p = &mut doc.params;
                    let duplicate = match *name {
                        "equation" => p
                            .equation
                            .replace(value.parse().map_err(|e: String| ParseError::at(line, e))?)
                            .is_some(),
                        "A" => p.a.replace(positive(value, line, "A")?).is_some(),
                        "B" => p.b.replace(positive(value, line, "B")?).is_some(),
                        other => return Err(ParseError::at(line, format!("unknown parameter '{other}'"))),
                    };
                    if duplicate {
                        return Err(ParseError::at(line, format!("parameter '{name}' set twice")));
                    }
                }
                other => return Err(ParseError::at(line, format!("unknown record '{other}'"))),
            }
        }

        if doc.vertices.is_empty() {
            return Err(ParseError {
                location: Location::EndOfFile,
                message: "no vertex records".into(),
            });
        }
        // connectivity is checked here so the error can name two labels
        doc.graph()?;
        Ok(doc)
    }

    /// The weighted graph, with vertices in declaration order.
    pub fn graph(&self) -> Result<WeightedGraph, ParseError> {
        let index: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.label.as_str(), i))
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(index[e.a.as_str()], index[e.b.as_str()], e.weight))
            .collect();
        WeightedGraph::new(
            self.vertices.iter().map(|v| v.label.clone()).collect(),
            self.vertices.iter().map(|v| v.mu).collect(),
            edges,
        )
        .map_err(|e| match e {
            tzitzeica::Error::Disconnected { a, b } => ParseError {
                location: Location::Vertices(a, b),
                message: "graph is disconnected".into(),
            },
            other => ParseError {
                location: Location::EndOfFile,
                message: other.to_string(),
            },
        })
    }

    pub fn spec(&self, kind: EquationKind, a: f64, b: f64) -> tzitzeica::Result<ProblemSpec> {
        let h1 = VertexField::new(self.vertices.iter().map(|v| v.h1).collect())?;
        let h2 = VertexField::new(self.vertices.iter().map(|v| v.h2).collect())?;
        ProblemSpec::new(kind, h1, h2, a, b)
    }

    /// Document for an in-memory instance, with the kind and exponents as
    /// inline parameters.
    pub fn from_problem(g: &WeightedGraph, spec: &ProblemSpec) -> Self {
        let labels = g.labels();
        GraphDocument {
            params: Params {
                equation: Some(spec.kind()),
                a: Some(spec.a()),
                b: Some(spec.b()),
            },
            vertices: (0..g.len())
                .map(|x| VertexRecord {
                    label: labels[x].clone(),
                    mu: g.mu()[x],
                    h1: spec.h1()[x],
                    h2: spec.h2()[x],
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    a: labels[e.a].clone(),
                    b: labels[e.b].clone(),
                    weight: e.weight,
                })
                .collect(),
        }
    }

    /// Serializes to the file format; parsing the output gives back `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(kind) = self.params.equation {
            s += &format!("param equation {}\n", kind_name(kind));
        }
        if let Some(a) = self.params.a {
            s += &format!("param A {a}\n");
        }
        if let Some(b) = self.params.b {
            s += &format!("param B {b}\n");
        }
        for v in &self.vertices {
            s += &format!("vertex {} {} {} {}\n", v.label, v.mu, v.h1, v.h2);
        }
        for e in &self.edges {
            s += &format!("edge {} {} {}\n", e.a, e.b, e.weight);
        }
        s
    }
}
