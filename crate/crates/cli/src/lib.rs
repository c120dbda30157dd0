//! Command implementations behind the `sagesimplex` binary.
//!
//! Every command returns an [`Outcome`]: a process exit code and the JSON
//! document printed on stdout. The binary only parses flags and reads files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sagesimplex::certificates::{self, Certificate, SageMode, SageOptions, SageOutcome};
use sagesimplex::decompose::{self, DecomposeOptions};
use sagesimplex::geometry::{self, ConvexRegion, MomentMode, MomentRegion};
use sagesimplex::oracle;
use sagesimplex::signomial::{self, ExponentVector, Signomial, SupportPartition};
use sagesimplex::solver;
use sagesimplex::univariate;

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub json: Value,
}

impl Outcome {
    fn new(code: i32, json: Value) -> Self {
        Self { code, json }
    }

    /// Input or structure error (exit 3).
    pub fn input_error(msg: impl fmt::Display) -> Self {
        Self::new(EXIT_INPUT, json!({ "error": msg.to_string() }))
    }
}

/// Result of a fallible step that already carries its exit-3 outcome.
type Step<T> = std::result::Result<T, Outcome>;

fn lift<T, E: fmt::Display>(r: std::result::Result<T, E>) -> Step<T> {
    r.map_err(Outcome::input_error)
}

// ---------------------------------------------------------------------------
// Input schemas

/// `{"dimension": n, "terms": [{"c": .., "alpha": [..]}], "positive_support"?: [[..]]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    pub dimension: usize,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_support: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub c: f64,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub f: Signomial,
    pub declared: Option<Vec<ExponentVector>>,
}

impl Problem {
    pub fn parse(src: &str) -> sagesimplex::Result<Self> {
        let raw: ProblemJson = serde_json::from_str(src)
            .map_err(|e| sagesimplex::Error::Input(format!("malformed problem JSON: {e}")))?;
        Self::from_json(raw)
    }

    pub fn from_json(raw: ProblemJson) -> sagesimplex::Result<Self> {
        let f = Signomial::new(raw.dimension, raw.terms.into_iter().map(|t| (t.c, t.alpha)))?;
        let declared = raw
            .positive_support
            .map(|a| a.into_iter().map(ExponentVector::new).collect::<sagesimplex::Result<Vec<_>>>())
            .transpose()?;
        Ok(Self { f, declared })
    }

    pub fn from_signomial(f: Signomial) -> Self {
        Self { f, declared: None }
    }

    pub fn to_json(&self) -> ProblemJson {
        ProblemJson {
            dimension: self.f.dimension(),
            terms: self
                .f
                .terms()
                .iter()
                .map(|t| TermJson {
                    c: t.coeff,
                    alpha: t.exponent.coords().to_vec(),
                })
                .collect(),
            positive_support: self
                .declared
                .as_ref()
                .map(|a| a.iter().map(|e| e.coords().to_vec()).collect()),
        }
    }

    pub fn partition(&self) -> sagesimplex::Result<SupportPartition> {
        signomial::partition_support(&self.f, self.declared.as_deref())
    }
}

/// A region in `x`-space, or a region given directly in moment coordinates
/// (`{"type": "moment_polytope", "anchor": k, "vertices": [[..]]}`).
#[derive(Debug, Clone)]
pub enum Region {
    X(ConvexRegion),
    Moment(MomentRegion),
}

#[derive(Deserialize)]
struct MomentPolytopeJson {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    anchor: usize,
    vertices: Vec<Vec<f64>>,
}

impl Region {
    pub fn parse(src: &str) -> sagesimplex::Result<Self> {
        let value: Value = serde_json::from_str(src)
            .map_err(|e| sagesimplex::Error::Input(format!("malformed region JSON: {e}")))?;
        if value.get("type").and_then(Value::as_str) == Some("moment_polytope") {
            let m: MomentPolytopeJson = serde_json::from_value(value)
                .map_err(|e| sagesimplex::Error::Input(format!("malformed moment region: {e}")))?;
            debug_assert_eq!(m.kind, "moment_polytope");
            return Ok(Region::Moment(MomentRegion::from_vertices(m.anchor, m.vertices)?));
        }
        serde_json::from_value(value)
            .map(Region::X)
            .map_err(|e| sagesimplex::Error::Input(format!("malformed region JSON: {e}")))
    }

    fn x(&self) -> Step<&ConvexRegion> {
        match self {
            Region::X(x) => Ok(x),
            Region::Moment(_) => Err(Outcome::input_error(
                "this command needs an x-space region, not a moment polytope",
            )),
        }
    }
}

/// Tunables shared by the commands. All are exposed as flags and
/// `SAGESIMPLEX_*` environment variables by the binary.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Witness threshold: `f(x) < −tol` counts as a violation.
    pub tol: f64,
    pub grid_depth: usize,
    pub falsify_budget: usize,
    pub seed: u64,
    pub sage_iterations: usize,
    pub sage_restarts: usize,
    pub verify_samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: oracle::TAU_EVAL,
            grid_depth: geometry::DEFAULT_GRID_DEPTH,
            falsify_budget: 4000,
            seed: 7,
            sage_iterations: 500,
            sage_restarts: 5,
            verify_samples: 400,
        }
    }
}

impl Settings {
    fn sage_options(&self, hint: Option<Vec<f64>>) -> SageOptions {
        SageOptions {
            max_iter: self.sage_iterations,
            restarts: self.sage_restarts,
            seed: self.seed,
            hint,
            grid_depth: self.grid_depth,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }))
}

fn witness(f: &Signomial, x: &[f64]) -> Value {
    json!({ "x": x, "f": f.eval(x) })
}

/// A violator below `−tol`, if the oracle finds one.
fn find_witness(f: &Signomial, x: &ConvexRegion, s: &Settings) -> Option<Vec<f64>> {
    oracle::falsify(f, x, s.falsify_budget, s.seed).filter(|p| f.eval(p) < -s.tol)
}

/// Moment-space image of `x`: exact for the full space and intervals,
/// sampled for bounded polytopes.
pub fn moment_region_for(
    x: &ConvexRegion,
    a: &[ExponentVector],
    anchor: usize,
    depth: usize,
) -> sagesimplex::Result<MomentRegion> {
    let mode = match x {
        ConvexRegion::FullSpace { .. } | ConvexRegion::Interval { .. } => MomentMode::ExactPolytopeVertices,
        ConvexRegion::VertexPolytope { .. } => MomentMode::Sample { depth },
    };
    geometry::build_moment_region(x, a, anchor, mode)
}

// ---------------------------------------------------------------------------
// check

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Signed SAGE over the whole space.
    Global,
    /// Signed X-SAGE over the region.
    Constrained,
    /// Signed X-SAGE, then the sign-free moment-space decomposition.
    Sage,
}

impl std::str::FromStr for CheckMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "global" => Ok(Self::Global),
            "constrained" => Ok(Self::Constrained),
            "sage" => Ok(Self::Sage),
            other => Err(format!("unknown mode {other:?} (global|constrained|sage)")),
        }
    }
}

pub fn cmd_check(problem: &Problem, region: Option<&Region>, mode: CheckMode, s: &Settings) -> Outcome {
    match check_inner(problem, region, mode, s) {
        Ok(o) | Err(o) => o,
    }
}

fn check_inner(problem: &Problem, region: Option<&Region>, mode: CheckMode, s: &Settings) -> Step<Outcome> {
    let f = &problem.f;
    let n = f.dimension();
    let x = match (mode, region) {
        (CheckMode::Global, _) | (_, None) => ConvexRegion::full_space(n),
        (_, Some(r)) => r.x()?.clone(),
    };
    if x.dimension() != n {
        return Err(Outcome::input_error(format!(
            "region has dimension {}, problem has dimension {n}",
            x.dimension()
        )));
    }
    let part = lift(problem.partition())?;
    let falsified = |note: Option<String>| {
        find_witness(f, &x, s).map(|p| {
            let mut j = json!({ "verdict": "falsified", "witness": witness(f, &p) });
            if let Some(note) = note {
                j["note"] = json!(note);
            }
            Outcome::new(EXIT_FALSIFIED, j)
        })
    };

    let hint = oracle::falsify(f, &x, 64, s.seed);
    let signed = lift(certificates::sage_membership(
        &part,
        &x,
        SageMode::SignedNonnegC,
        &s.sage_options(hint),
    ))?;
    let search = match signed {
        SageOutcome::Member { certificate, search } => {
            let cert = Certificate::Sage(certificate);
            let check = certificates::verify_certificate(&cert, f, &x, s.verify_samples);
            if check.pass {
                if let Some(o) = falsified(Some("certificate rejected by a sampled violator".into())) {
                    return Ok(o);
                }
                return Ok(Outcome::new(
                    EXIT_CERTIFIED,
                    json!({
                        "verdict": "certified",
                        "mode": mode,
                        "certificate": to_value(&cert),
                        "verification": to_value(&check),
                    }),
                ));
            }
            json!({ "best_slack": search.best_slack, "rejected_certificate": to_value(&check) })
        }
        SageOutcome::NotFound { search } => to_value(&search),
        SageOutcome::Decomposed { .. } => json!({}),
    };

    let mut attempts = vec![json!({ "method": "signed_sage", "search": search })];
    if mode == CheckMode::Sage && signomial::validate_simplex_problem(&part).eligible {
        match decomposition_certificate(problem, &part, &x, s) {
            Ok((dec, check)) if check.pass => {
                if let Some(o) = falsified(Some("decomposition rejected by a sampled violator".into())) {
                    return Ok(o);
                }
                return Ok(Outcome::new(
                    EXIT_CERTIFIED,
                    json!({
                        "verdict": "certified",
                        "mode": mode,
                        "decomposition": to_value(&dec),
                        "verification": to_value(&check),
                    }),
                ));
            }
            Ok((_, check)) => attempts.push(json!({ "method": "decomposition", "rejected": to_value(&check) })),
            Err(e) => attempts.push(json!({ "method": "decomposition", "error": e })),
        }
    }
    if let Some(o) = falsified(None) {
        return Ok(o);
    }
    let best_slack = attempts[0]["search"]["best_slack"].clone();
    Ok(Outcome::new(
        EXIT_INCONCLUSIVE,
        json!({
            "verdict": "inconclusive",
            "mode": mode,
            "best_slack": best_slack,
            "attempts": attempts,
        }),
    ))
}

fn decomposition_certificate(
    problem: &Problem,
    part: &SupportPartition,
    x: &ConvexRegion,
    s: &Settings,
) -> std::result::Result<(decompose::Decomposition, decompose::DecompositionCheck), String> {
    let anchor = geometry::default_anchor(&part.positive);
    let y = moment_region_for(x, &part.positive, anchor, s.grid_depth).map_err(|e| e.to_string())?;
    let dec = decompose::decompose(part, &y, &DecomposeOptions::default()).map_err(|e| e.to_string())?;
    if dec.epsilon_used > 0.0 {
        return Err(format!("decomposition needed a shift ε = {:e}", dec.epsilon_used));
    }
    let check = decompose::verify_decomposition(&dec, &problem.f, Some(x), Some(&y), s.verify_samples);
    Ok((dec, check))
}

// ---------------------------------------------------------------------------
// decompose

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeFlags {
    pub epsilon: f64,
    /// Keep the parts' coefficients on `A` nonnegative: no gauge fixing, and
    /// a part with a negative coefficient is a failure.
    pub nonnegative_coefficients: bool,
}

impl Default for DecomposeFlags {
    fn default() -> Self {
        Self {
            epsilon: DecomposeOptions::default().epsilon_max,
            nonnegative_coefficients: false,
        }
    }
}

pub fn cmd_decompose(problem: &Problem, region: &Region, flags: &DecomposeFlags, s: &Settings) -> Outcome {
    match decompose_inner(problem, region, flags, s) {
        Ok(o) | Err(o) => o,
    }
}

fn decompose_inner(problem: &Problem, region: &Region, flags: &DecomposeFlags, s: &Settings) -> Step<Outcome> {
    let part = lift(problem.partition())?;
    let diag = signomial::validate_simplex_problem(&part);
    if !diag.eligible {
        return Err(Outcome::new(
            EXIT_INPUT,
            json!({ "error": "instance is not eligible for decomposition", "diagnostics": to_value(&diag) }),
        ));
    }
    let (x, y) = match region {
        Region::X(x) => {
            if x.dimension() != problem.f.dimension() {
                return Err(Outcome::input_error("region and problem dimensions differ"));
            }
            let anchor = geometry::default_anchor(&part.positive);
            (Some(x), lift(moment_region_for(x, &part.positive, anchor, s.grid_depth))?)
        }
        Region::Moment(y) => {
            if y.dim() + 1 != part.positive.len() || y.anchor >= part.positive.len() {
                return Err(Outcome::input_error("moment region does not match the positive support"));
            }
            (None, y.clone())
        }
    };
    let opts = DecomposeOptions {
        epsilon_max: flags.epsilon,
        gauge: !flags.nonnegative_coefficients,
        ..DecomposeOptions::default()
    };
    let dec = match decompose::decompose(&part, &y, &opts) {
        Ok(d) => d,
        Err(sagesimplex::Error::Decomposition(msg)) => {
            let w = x.and_then(|x| find_witness(&problem.f, x, s));
            let code = if w.is_some() || msg.contains("negative on the region") {
                EXIT_FALSIFIED
            } else {
                EXIT_INCONCLUSIVE
            };
            let mut j = json!({ "error": msg });
            if let Some(p) = w {
                j["witness"] = witness(&problem.f, &p);
            }
            return Ok(Outcome::new(code, j));
        }
        Err(e) => return Err(Outcome::input_error(e)),
    };
    let check = decompose::verify_decomposition(&dec, &problem.f, x, Some(&y), s.verify_samples);
    let mut code = if check.pass { EXIT_CERTIFIED } else { EXIT_INCONCLUSIVE };
    let mut notes = Vec::new();
    if flags.nonnegative_coefficients && !dec.signed() {
        code = EXIT_INCONCLUSIVE;
        notes.push("a part has a negative coefficient on A".to_string());
    }
    let mut out = to_value(&dec);
    out["verification"] = to_value(&check);
    if !notes.is_empty() {
        out["errors"] = json!(notes);
    }
    Ok(Outcome::new(code, out))
}

// ---------------------------------------------------------------------------
// minimize

pub fn cmd_minimize(problem: &Problem, region: &Region, s: &Settings) -> Outcome {
    match minimize_inner(problem, region, s) {
        Ok(o) | Err(o) => o,
    }
}

/// Bounded stand-in for an unbounded region, for the grid oracle.
fn truncate(x: &ConvexRegion, len: f64) -> Option<ConvexRegion> {
    match x {
        ConvexRegion::FullSpace { .. } => None,
        ConvexRegion::Interval { lower, upper } => {
            let lo = if lower.is_finite() { *lower } else if upper.is_finite() { upper - len } else { -len };
            let hi = if upper.is_finite() { *upper } else { lo.max(-len) + 2.0 * len };
            ConvexRegion::interval(lo, hi).ok()
        }
        ConvexRegion::VertexPolytope { vertices, rays } => {
            let mut pts = vertices.clone();
            for v in vertices {
                for r in rays {
                    pts.push(v.iter().zip(r).map(|(p, q)| p + len * q).collect());
                }
            }
            ConvexRegion::polytope(pts, vec![]).ok()
        }
    }
}

fn moment_minimum(part: &SupportPartition, y: &MomentRegion) -> Value {
    match solver::moment_program(part, y, 1e-12) {
        Ok(sol) => json!({
            "value": sol.f_at_recovered.unwrap_or(sol.report.value),
            "argmin": sol.recovered_x,
            "program_value": sol.report.value,
            "moment_point": sol.report.minimizer,
            "status": sol.report.status,
            "gap": sol.report.gap,
            "anchor": part.positive[y.anchor].coords(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Moment-space region: only the moment program applies.
fn minimize_moment(problem: &Problem, y: &MomentRegion) -> Step<Outcome> {
    let part = lift(problem.partition())?;
    let diag = signomial::validate_simplex_problem(&part);
    if !diag.eligible {
        return Err(Outcome::new(
            EXIT_INPUT,
            json!({ "error": "not eligible for the moment program", "diagnostics": to_value(&diag) }),
        ));
    }
    if y.anchor >= part.positive.len() || y.dim() + 1 != part.positive.len() {
        return Err(Outcome::input_error("moment region does not match the positive support"));
    }
    let m = moment_minimum(&part, y);
    let Some(value) = m["value"].as_f64() else {
        return Err(Outcome::new(EXIT_INCONCLUSIVE, json!({ "error": m["error"].clone(), "moment": m })));
    };
    Ok(Outcome::new(
        EXIT_CERTIFIED,
        json!({ "value": value, "argmin": m["argmin"].clone(), "gap": null, "moment": m, "oracle": null }),
    ))
}

fn minimize_inner(problem: &Problem, region: &Region, s: &Settings) -> Step<Outcome> {
    let f = &problem.f;
    let x = match region {
        Region::X(x) => x,
        Region::Moment(y) => return minimize_moment(problem, y),
    };
    if x.dimension() != f.dimension() {
        return Err(Outcome::input_error("region and problem dimensions differ"));
    }
    let resolution = s.grid_depth.max(1) * 10;
    let oracle_json = if x.is_bounded() {
        let g = lift(oracle::grid_min(f, x, resolution))?;
        json!({ "value": g.value, "argmin": g.argmin, "candidates": g.candidates, "grid_points": g.grid_points })
    } else if let ConvexRegion::FullSpace { .. } = x {
        let res = match f.dimension() {
            1 => 4000,
            2 => 400,
            3 => 60,
            _ => 12,
        };
        let g = oracle::global_min_estimate(f, 4.0, res);
        json!({ "value": g.value, "argmin": g.argmin, "half_width": g.half_width, "boundary_limited": g.boundary_limited })
    } else {
        let t = truncate(x, 50.0).ok_or_else(|| Outcome::input_error("cannot truncate region"))?;
        let g = lift(oracle::grid_min(f, &t, resolution))?;
        json!({ "value": g.value, "argmin": g.argmin, "truncated_to": 50.0 })
    };

    let moment_json = match problem.partition() {
        Ok(part) if signomial::validate_simplex_problem(&part).eligible => {
            let anchor = geometry::default_anchor(&part.positive);
            match moment_region_for(x, &part.positive, anchor, s.grid_depth) {
                Ok(y) => moment_minimum(&part, &y),
                Err(e) => json!({ "error": e.to_string() }),
            }
        }
        Ok(part) => json!({ "error": "not eligible", "diagnostics": to_value(&signomial::validate_simplex_problem(&part)) }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let ov = oracle_json["value"].as_f64();
    let mv = moment_json["value"].as_f64();
    let value = match (mv, ov) {
        (Some(m), Some(o)) => m.min(o),
        (Some(m), None) => m,
        (None, Some(o)) => o,
        (None, None) => return Err(Outcome::input_error("no minimization path succeeded")),
    };
    let argmin = if mv.is_some_and(|m| m <= value) && !moment_json["argmin"].is_null() {
        moment_json["argmin"].clone()
    } else {
        oracle_json["argmin"].clone()
    };
    let gap = match (mv, ov) {
        (Some(m), Some(o)) => Some((m - o).abs()),
        _ => None,
    };
    Ok(Outcome::new(
        EXIT_CERTIFIED,
        json!({ "value": value, "argmin": argmin, "gap": gap, "moment": moment_json, "oracle": oracle_json }),
    ))
}

// ---------------------------------------------------------------------------
// univariate

#[derive(Debug, Clone, PartialEq)]
pub enum Univariate {
    Coincide { alpha1: f64, alpha2: f64, b: Vec<f64>, lower: f64, upper: f64 },
    Split { problem: Problem, lower: f64, upper: f64 },
    Counterexample { alphas: [f64; 2], betas: [f64; 2], lower: f64, upper: f64, b: f64 },
    Descartes { problem: Problem, lower: f64, upper: f64, resolution: usize },
}

impl PartialEq for Problem {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.declared == other.declared
    }
}

pub fn cmd_univariate(sub: &Univariate, s: &Settings) -> Outcome {
    match univariate_inner(sub, s) {
        Ok(o) | Err(o) => o,
    }
}

fn univariate_inner(sub: &Univariate, s: &Settings) -> Step<Outcome> {
    match sub {
        Univariate::Coincide { alpha1, alpha2, b, lower, upper } => {
            let x = lift(ConvexRegion::interval(*lower, *upper))?;
            let c = lift(univariate::cone_coincidence(*alpha1, *alpha2, b, &x))?;
            Ok(Outcome::new(EXIT_CERTIFIED, to_value(&c)))
        }
        Univariate::Split { problem, lower, upper } => {
            let x = lift(ConvexRegion::interval(*lower, *upper))?;
            let sp = lift(univariate::proportional_split_1d(&problem.f, &x))?;
            Ok(Outcome::new(EXIT_CERTIFIED, to_value(&sp)))
        }
        Univariate::Counterexample { alphas, betas, lower, upper, b } => {
            let x = lift(ConvexRegion::interval(*lower, *upper))?;
            let ce = lift(univariate::counterexample(*alphas, *betas, &x, *b))?;
            let problem = Problem::from_signomial(ce.signomial.clone());
            let check = cmd_check(&problem, Some(&Region::X(x)), CheckMode::Constrained, s);
            let mut out = to_value(&ce);
            out["problem"] = to_value(&problem.to_json());
            out["check_exit"] = json!(check.code);
            out["check"] = check.json;
            let code = if check.code == EXIT_INCONCLUSIVE { EXIT_CERTIFIED } else { EXIT_INCONCLUSIVE };
            if code != EXIT_CERTIFIED {
                out["error"] = json!("self-check did not end inconclusive");
            }
            Ok(Outcome::new(code, out))
        }
        Univariate::Descartes { problem, lower, upper, resolution } => {
            let rb = lift(univariate::count_roots_bound_check(&problem.f, *lower, *upper, *resolution))?;
            let code = if rb.pass { EXIT_CERTIFIED } else { EXIT_INCONCLUSIVE };
            Ok(Outcome::new(code, to_value(&rb)))
        }
    }
}

// ---------------------------------------------------------------------------
// sample

/// Path of the moment-space CSV next to the `x`-space one.
pub fn moment_csv_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("samples");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_moment.{ext}"))
}

fn csv(prefix: &str, rows: &[(Vec<f64>, f64)]) -> String {
    let m = rows.first().map_or(0, |r| r.0.len());
    let mut s = String::new();
    let header: Vec<String> = (1..=m).map(|k| format!("{prefix}{k}")).chain(["f".to_string()]).collect();
    s.push_str(&header.join(","));
    s.push('\n');
    for (p, v) in rows {
        let line: Vec<String> = p.iter().chain(std::iter::once(v)).map(|x| format!("{x:?}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// The two CSV documents: `(x1,…,xn,f)` on a grid of `X`, and the anchored
/// moment images `(v1,…,vm,f)` with `F(v) = f(x) e^{−⟨ᾱ, x⟩}`.
pub fn sample_tables(problem: &Problem, x: &ConvexRegion, depth: usize) -> sagesimplex::Result<(String, Option<String>, Value)> {
    if !x.is_bounded() {
        return Err(sagesimplex::Error::UnsupportedRegion("sampling needs a bounded region".into()));
    }
    if x.dimension() != problem.f.dimension() {
        return Err(sagesimplex::Error::DimensionMismatch {
            expected: problem.f.dimension(),
            got: x.dimension(),
        });
    }
    let pts = x.sample_grid(depth)?;
    let rows: Vec<(Vec<f64>, f64)> = pts.iter().map(|p| (p.clone(), problem.f.eval(p))).collect();
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let (moment, note) = match problem.partition() {
        Ok(part) => {
            let anchor = geometry::default_anchor(&part.positive);
            let abar = part.positive[anchor].clone();
            let mrows = pts
                .iter()
                .map(|p| {
                    let v = geometry::moment_map(&part.positive, anchor, p)?;
                    Ok((v, problem.f.eval(p) * (-abar.dot(p)).exp()))
                })
                .collect::<sagesimplex::Result<Vec<_>>>()?;
            (Some(csv("v", &mrows)), json!({ "anchor": abar.coords() }))
        }
        Err(e) => (None, json!({ "moment_skipped": e.to_string() })),
    };
    let summary = json!({ "points": rows.len(), "min_f": min, "moment": note });
    Ok((csv("x", &rows), moment, summary))
}

pub fn cmd_sample(problem: &Problem, region: &Region, depth: usize, out: &Path) -> Outcome {
    let x = match region.x() {
        Ok(x) => x,
        Err(o) => return o,
    };
    let (xs, ms, mut summary) = match sample_tables(problem, x, depth) {
        Ok(t) => t,
        Err(e) => return Outcome::input_error(e),
    };
    if let Err(e) = std::fs::write(out, xs) {
        return Outcome::input_error(format!("cannot write {}: {e}", out.display()));
    }
    summary["x_csv"] = json!(out.display().to_string());
    if let Some(ms) = ms {
        let mp = moment_csv_path(out);
        if let Err(e) = std::fs::write(&mp, ms) {
            return Outcome::input_error(format!("cannot write {}: {e}", mp.display()));
        }
        summary["moment_csv"] = json!(mp.display().to_string());
    }
    Outcome::new(EXIT_CERTIFIED, summary)
}
