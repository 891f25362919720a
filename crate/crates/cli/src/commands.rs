//! One function per subcommand, each producing a report value.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use tzitzeica::degree::HOMOTOPY_CHECK_GRID;
use tzitzeica::{
    bounds_classic, bounds_generalized, continuation, default_epsilon, default_t_grid,
    degree_single_vertex, energy, energy_gradient, estimate_degree, find_two_solutions,
    graph_constants, homotopy_degrees, newton, residual, AprioriBox, EquationKind, ProblemSpec,
    SolveReport, SolverConfig, VertexField, WeightedGraph,
};

use crate::report::{to_value, SCHEMA_VERSION};
use crate::{CliError, Command, Common, Equation, GraphDocument};

const ELLIPTIC_FIELDS: usize = 200;
const GRADIENT_FIELDS: usize = 50;
const GRADIENT_STEP: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-5;
const OBSTRUCTION_FIELDS: usize = 100;

/// A finished command: the report to write and, for `check`, the failure
/// to signal after writing it.
pub struct Done {
    pub report: Value,
    pub failure: Option<CliError>,
}

/// Flags merged with the inline parameters of the graph file.
struct Resolved {
    kind: EquationKind,
    a: f64,
    b: f64,
    cfg: SolverConfig,
    starts: usize,
}

fn resolve(c: &Common, doc: &GraphDocument) -> Result<Resolved, CliError> {
    let kind = match (c.equation, doc.params.equation) {
        (Some(Equation::Classic), _) => EquationKind::Classic,
        (Some(Equation::Generalized), _) => EquationKind::Generalized,
        (None, Some(k)) => k,
        (None, None) => {
            return Err(CliError::usage(
                "missing --equation (and no 'param equation' in the graph file)",
            ))
        }
    };
    let a = c.a.or(doc.params.a).unwrap_or(1.0);
    let b = c.b.or(doc.params.b).unwrap_or(1.0);
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if !positive(a) || !positive(b) {
        return Err(CliError::usage(format!("--A and --B must be positive and finite (A = {a}, B = {b})")));
    }
    if !positive(c.tol) {
        return Err(CliError::usage(format!("--tol must be positive, found {}", c.tol)));
    }
    if c.max_iter == 0 || c.starts == 0 {
        return Err(CliError::usage("--max-iter and --starts must be at least 1"));
    }
    if let Some(r) = c.radius.filter(|r| !positive(*r)) {
        return Err(CliError::usage(format!("--radius must be positive, found {r}")));
    }
    let cfg = SolverConfig {
        tol: c.tol,
        max_iter: c.max_iter,
        seed: c.seed,
        radius: c.radius,
        ..SolverConfig::default()
    };
    Ok(Resolved { kind, a, b, cfg, starts: c.starts })
}

fn kind_name(kind: EquationKind) -> &'static str {
    match kind {
        EquationKind::Classic => "classic",
        EquationKind::Generalized => "generalized",
    }
}

fn apriori_box(spec: &ProblemSpec, g: &WeightedGraph) -> tzitzeica::Result<AprioriBox> {
    match spec.kind() {
        EquationKind::Classic => bounds_classic(spec),
        EquationKind::Generalized => bounds_generalized(spec, g),
    }
}

fn field(u: &VertexField) -> Value {
    to_value(&u.to_vec())
}

fn solve_value(r: &SolveReport) -> Value {
    json!({
        "solution": field(&r.solution),
        "residual_norm": r.residual_norm,
        "iterations": r.iterations,
        "jac_sign": r.jac_sign,
        "converged": r.converged,
    })
}

fn in_box(b: &tzitzeica::Result<AprioriBox>, u: &VertexField) -> Value {
    match b {
        Ok(b) => Value::Bool(u.iter().all(|v| b.contains(*v))),
        Err(_) => Value::Null,
    }
}

pub fn execute(command: &Command) -> Result<Done, CliError> {
    let started = Instant::now();
    let common = command.common();
    let doc = GraphDocument::parse_file(&common.graph)?;
    let resolved = resolve(common, &doc)?;
    let g = doc.graph()?;
    let spec = doc.spec(resolved.kind, resolved.a, resolved.b)?;

    let (result, failure) = match command {
        Command::Solve(_) => (solve(&spec, &g, &resolved)?, None),
        Command::Degree(_) => (degree(&spec, &g, &resolved)?, None),
        Command::Bounds(_) => (json!({}), None),
        Command::Multiplicity(_) => (multiplicity(&spec, &g, &resolved)?, None),
        Command::Check(_) => check(&spec, &g, &resolved)?,
    };

    let constants = graph_constants(&g);
    let mut constants_value = to_value(&constants);
    constants_value["elliptic_constant"] = json!(constants.elliptic_constant());
    constants_value["diameter"] = json!(g.diameter());

    let mut report = Map::new();
    report.insert("schema_version".into(), json!(SCHEMA_VERSION));
    report.insert("command".into(), json!(command.name()));
    report.insert(
        "config".into(),
        json!({
            "graph": common.graph.display().to_string(),
            "equation": kind_name(resolved.kind),
            "A": resolved.a,
            "B": resolved.b,
            "tol": resolved.cfg.tol,
            "max_iter": resolved.cfg.max_iter,
            "starts": resolved.starts,
            "seed": resolved.cfg.seed,
            "radius": resolved.cfg.radius,
        }),
    );
    report.insert(
        "graph".into(),
        json!({
            "vertices": g.len(),
            "edges": g.edges().len(),
            "labels": g.labels(),
            "constants": constants_value,
        }),
    );
    match apriori_box(&spec, &g) {
        Ok(b) => report.insert("bounds".into(), to_value(&b)),
        Err(e) => report.insert("bounds".into(), json!({ "inapplicable": e.to_string() })),
    };
    report.insert("result".into(), result);
    if !common.no_timestamp {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        report.insert("timestamp_unix".into(), json!(now));
        report.insert("wall_time_seconds".into(), json!(started.elapsed().as_secs_f64()));
    }
    Ok(Done { report: Value::Object(report), failure })
}

fn solve(spec: &ProblemSpec, g: &WeightedGraph, r: &Resolved) -> Result<Value, CliError> {
    let n = g.len();
    let (method, report, stages) = match spec.kind() {
        EquationKind::Classic if spec.h2().iter().all(|v| *v >= 0.0) => {
            return Err(CliError::numerical(tzitzeica::Error::NoSolution.to_string()));
        }
        EquationKind::Classic if spec.h2_all_negative() => {
            let stages = continuation(spec, g, &default_t_grid(), default_epsilon(spec), &r.cfg)?;
            let summary: Vec<Value> = stages
                .iter()
                .map(|s| json!({"t": s.t, "iterations": s.report.iterations, "residual_norm": s.report.residual_norm}))
                .collect();
            let last = stages.into_iter().last().expect("grid ends at t = 0").report;
            // one Newton pass on the undeformed map confirms the endpoint
            let polished = newton(spec, g, &last.solution, &r.cfg)?;
            ("continuation", polished, summary)
        }
        _ => ("newton", newton(spec, g, &VertexField::zeros(n), &r.cfg)?, Vec::new()),
    };
    if !report.converged {
        return Err(CliError::numerical(format!(
            "solver did not converge: residual {:e} after {} iterations",
            report.residual_norm, report.iterations
        )));
    }
    let mut v = solve_value(&report);
    v["method"] = json!(method);
    v["stages"] = Value::Array(stages);
    v["in_box"] = in_box(&apriori_box(spec, g), &report.solution);
    Ok(v)
}

fn degree(spec: &ProblemSpec, g: &WeightedGraph, r: &Resolved) -> Result<Value, CliError> {
    let d = if g.len() == 1 {
        degree_single_vertex(spec)?
    } else {
        estimate_degree(spec, g, &r.cfg, r.starts)?
    };
    Ok(json!({
        "degree": d.degree,
        "signs": d.signs,
        "solutions": d.solutions.iter().map(field).collect::<Vec<_>>(),
        "radius": d.radius,
        "starts_used": d.starts_used,
        "confidence": to_value(&d.exhaustive_confidence),
    }))
}

fn multiplicity(spec: &ProblemSpec, g: &WeightedGraph, r: &Resolved) -> Result<Value, CliError> {
    let m = find_two_solutions(spec, g, &r.cfg)?;
    let bp = m.barriers;
    let other = &m.solutions[1].solution;
    let energies: Vec<f64> = m
        .solutions
        .iter()
        .map(|s| energy(spec, g, &s.solution))
        .collect::<tzitzeica::Result<_>>()?;
    Ok(json!({
        "branch": to_value(&m.branch),
        "barriers": {
            "delta": bp.delta,
            "beta": bp.beta,
            "lower": bp.lower(),
            "upper": bp.upper(),
        },
        "solutions": m.solutions.iter().map(solve_value).collect::<Vec<_>>(),
        "energies": energies,
        "separation": other.sup_distance(&m.solutions[0].solution),
        "in_barrier_box": bp.strictly_contains(other),
        "energy_trace_length": m.energy_trace.len(),
    }))
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn skipped(reason: impl Into<String>) -> Value {
    json!({ "status": "skipped", "reason": reason.into() })
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> VertexField {
    VertexField::from_fn(n, |_| rng.random_range(-scale..scale))
}

fn check_elliptic(g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Result<Value, CliError> {
    let c = graph_constants(g).elliptic_constant();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..ELLIPTIC_FIELDS {
        let u = random_field(rng, g.len(), 3.0);
        let lap = g.laplacian(&u)?.sup_norm();
        let osc = u.max_value() - u.min_value();
        if osc > c * lap * (1.0 + 1e-12) {
            violations += 1;
        }
        if lap > 0.0 {
            worst = worst.max(osc / (c * lap));
        }
    }
    Ok(json!({
        "status": status(violations == 0),
        "fields": ELLIPTIC_FIELDS,
        "violations": violations,
        "max_ratio": worst,
        "constant": c,
    }))
}

fn check_gradient(spec: &ProblemSpec, g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Result<Value, CliError> {
    if spec.kind() != EquationKind::Generalized {
        return Ok(skipped("the energy functional exists for the generalized equation only"));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..GRADIENT_FIELDS {
        let u = random_field(rng, g.len(), 1.0);
        let grad = energy_gradient(spec, g, &u)?;
        let mut err: f64 = 0.0;
        for x in 0..g.len() {
            let mut plus = u.clone();
            let mut minus = u.clone();
            plus[x] += GRADIENT_STEP;
            minus[x] -= GRADIENT_STEP;
            let fd = (energy(spec, g, &plus)? - energy(spec, g, &minus)?) / (2.0 * GRADIENT_STEP) / g.mu()[x];
            err = err.max((fd - grad[x]).abs());
        }
        worst = worst.max(err / grad.sup_norm().max(1.0));
    }
    Ok(json!({
        "status": status(worst <= GRADIENT_TOL),
        "fields": GRADIENT_FIELDS,
        "max_relative_error": worst,
        "tolerance": GRADIENT_TOL,
    }))
}

fn check_obstruction(spec: &ProblemSpec, g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Result<Value, CliError> {
    if spec.kind() != EquationKind::Classic || !spec.h2().iter().all(|v| *v >= 0.0) {
        return Ok(skipped("requires the classic equation with h2 >= 0"));
    }
    let mut smallest = f64::INFINITY;
    for _ in 0..OBSTRUCTION_FIELDS {
        let u = random_field(rng, g.len(), 5.0);
        smallest = smallest.min(g.integrate(&residual(spec, g, &u)?)?);
    }
    Ok(json!({
        "status": status(smallest > 0.0),
        "fields": OBSTRUCTION_FIELDS,
        "min_integral": smallest,
    }))
}

fn check_homotopy(spec: &ProblemSpec, g: &WeightedGraph, r: &Resolved) -> Result<Value, CliError> {
    if spec.kind() == EquationKind::Classic && !spec.h2_all_negative() {
        return Ok(skipped("the classic deformation requires h2 < 0"));
    }
    let degrees = match homotopy_degrees(spec, g, &r.cfg, &HOMOTOPY_CHECK_GRID, r.starts) {
        Ok(d) => d,
        Err(e) if e.is_validation() => return Ok(skipped(e.to_string())),
        // a degenerate root leaves the sign sum undefined, not violated
        Err(e @ tzitzeica::Error::DegenerateRoot { .. }) => {
            return Ok(json!({ "status": "inconclusive", "reason": e.to_string() }))
        }
        Err(e) => return Err(e.into()),
    };
    let invariant = degrees.windows(2).all(|w| w[0].1.degree == w[1].1.degree);
    Ok(json!({
        "status": status(invariant),
        "t": degrees.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
        "degrees": degrees.iter().map(|(_, d)| d.degree).collect::<Vec<_>>(),
    }))
}

fn check(spec: &ProblemSpec, g: &WeightedGraph, r: &Resolved) -> Result<(Value, Option<CliError>), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.cfg.seed);
    let checks = json!({
        "elliptic_estimate": check_elliptic(g, &mut rng)?,
        "energy_gradient": check_gradient(spec, g, &mut rng)?,
        "integral_obstruction": check_obstruction(spec, g, &mut rng)?,
        "homotopy_invariance": check_homotopy(spec, g, r)?,
    });
    let failed: Vec<&str> = checks
        .as_object()
        .expect("object")
        .iter()
        .filter(|(_, v)| v["status"] == "fail")
        .map(|(k, _)| k.as_str())
        .collect();
    let failure = (!failed.is_empty())
        .then(|| CliError::numerical(format!("invariant violated: {}", failed.join(", "))));
    Ok((json!({ "checks": checks, "passed": failed.is_empty() }), failure))
}
