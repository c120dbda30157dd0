//! AGE and signed SAGE certificates: circuit numbers, the relative-entropy
//! condition with a support-function correction, the Minkowski-sum search
//! and independent re-verification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{self, DecomposeOptions, Decomposition};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, ConvexRegion, MomentMode, MomentRegion};
use crate::linalg;
use crate::oracle;
use crate::signomial::{self, ExponentVector, Signomial, SupportPartition, Term};
use crate::solver::{self, EntropySolution};

/// Absolute slack tolerance on certificate inequalities.
pub const TAU_CERT: f64 = 1e-7;

/// `D(u, v) = Σ u_i ln(u_i / v_i)` with `0 ln 0 = 0`; `+∞` when some
/// `u_i > 0` meets `v_i = 0`.
pub fn relative_entropy(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in u.iter().zip(v) {
        if *a == 0.0 {
            continue;
        }
        if *b <= 0.0 {
            return f64::INFINITY;
        }
        s += a * (a / b).ln();
    }
    s
}

/// `Θ = Π_{λ_α > 0} (c_α / λ_α)^{λ_α}`, evaluated in log space. Zero when a
/// weighted coefficient vanishes.
pub fn circuit_number(c: &[f64], lambda: &[f64]) -> f64 {
    let mut log = 0.0;
    for (ci, li) in c.iter().zip(lambda) {
        if *li > 0.0 {
            if *ci <= 0.0 {
                return 0.0;
            }
            log += li * (ci / li).ln();
        }
    }
    log.exp()
}

/// `Σ_α ν_α (β − α)`.
pub fn balance_direction(nu: &[f64], beta: &ExponentVector, a: &[ExponentVector]) -> Vec<f64> {
    let mut dir = vec![0.0; beta.dim()];
    for (v, alpha) in nu.iter().zip(a) {
        for (k, dk) in dir.iter_mut().enumerate() {
            *dk += v * (beta.coords()[k] - alpha.coords()[k]);
        }
    }
    dir
}

/// `σ_X(dir)` evaluated on `dir / scale` so the ray tolerance is relative to
/// the size of the terms that produced `dir`.
pub fn scaled_support(x: &ConvexRegion, dir: &[f64], scale: f64) -> f64 {
    if !(scale > 0.0) || !scale.is_finite() {
        return x.support_function(dir);
    }
    let y: Vec<f64> = dir.iter().map(|d| d / scale).collect();
    let s = x.support_function(&y);
    if s.is_finite() {
        s * scale
    } else {
        s
    }
}

fn balance_scale(nu: &[f64], beta: &ExponentVector, a: &[ExponentVector]) -> f64 {
    let spread = a
        .iter()
        .map(|alpha| linalg::norm_inf(&linalg::sub(alpha.coords(), beta.coords())))
        .fold(0.0, f64::max);
    nu.iter().sum::<f64>() * spread.max(1.0)
}

/// Returns `(D(ν, e·c), σ_X(Σ ν_α (β − α)))`.
pub fn age_terms(
    nu: &[f64],
    c: &[f64],
    beta: &ExponentVector,
    a: &[ExponentVector],
    x: &ConvexRegion,
) -> (f64, f64) {
    let ec: Vec<f64> = c.iter().map(|v| std::f64::consts::E * v).collect();
    let entropy = relative_entropy(nu, &ec);
    let dir = balance_direction(nu, beta, a);
    let support = scaled_support(x, &dir, balance_scale(nu, beta, a));
    (entropy, support)
}

/// Witness for `Σ c_α e^α + d e^β ≥ 0` on `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeCertificate {
    pub alphas: Vec<Vec<f64>>,
    pub coeffs: Vec<f64>,
    pub beta: Vec<f64>,
    pub d: f64,
    pub nu: Vec<f64>,
    pub entropy_value: f64,
    pub support_value: f64,
    /// `d − (σ + D)`.
    pub slack: f64,
    pub feasible: bool,
    pub method: String,
    #[serde(default)]
    pub gap: f64,
}

impl AgeCertificate {
    /// The circuit signomial this certificate speaks about.
    pub fn signomial(&self) -> Result<Signomial> {
        let mut terms: Vec<(f64, Vec<f64>)> = self
            .coeffs
            .iter()
            .zip(&self.alphas)
            .map(|(c, a)| (*c, a.clone()))
            .collect();
        terms.push((self.d, self.beta.clone()));
        Signomial::new(self.beta.len(), terms)
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble_age(
    a: &[ExponentVector],
    c: &[f64],
    beta: &ExponentVector,
    d: f64,
    nu: Vec<f64>,
    x: &ConvexRegion,
    method: &str,
    gap: f64,
) -> AgeCertificate {
    let (entropy_value, support_value) = age_terms(&nu, c, beta, a, x);
    let slack = d - (entropy_value + support_value);
    AgeCertificate {
        alphas: a.iter().map(|p| p.coords().to_vec()).collect(),
        coeffs: c.to_vec(),
        beta: beta.coords().to_vec(),
        d,
        nu,
        entropy_value,
        support_value,
        slack,
        feasible: slack >= -TAU_CERT,
        method: method.into(),
        gap,
    }
}

fn check_age_input(c: &[f64], beta: &ExponentVector, a: &[ExponentVector]) -> Result<()> {
    check_dim(a.len(), c.len())?;
    for alpha in a {
        check_dim(beta.dim(), alpha.dim())?;
    }
    if let Some(bad) = c.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::Input(format!(
            "AGE coefficients must be finite and nonnegative, got {bad}"
        )));
    }
    Ok(())
}

/// Global AGE test for a simplex `A`: feasible iff `d ≥ −Θ(c, λ^{(β)})`
/// when `β ∈ conv(A)`, with witness `ν = Θ λ`. Outside the hull only
/// `ν = 0` balances, so the test reduces to `d ≥ 0`.
pub fn age_global(
    c: &[f64],
    d: f64,
    beta: &ExponentVector,
    a: &[ExponentVector],
) -> Result<AgeCertificate> {
    check_age_input(c, beta, a)?;
    let full = ConvexRegion::full_space(beta.dim());
    let bary = match signomial::barycentric(a, beta) {
        Ok(b) => Some(b),
        Err(Error::NoBarycentric { .. }) => None,
        Err(e) => return Err(e),
    };
    match bary {
        Some(b) if b.in_hull => {
            let theta = circuit_number(c, &b.weights);
            let nu = b.weights.iter().map(|l| theta * l).collect();
            Ok(assemble_age(a, c, beta, d, nu, &full, "circuit_number", 0.0))
        }
        _ => Ok(assemble_age(
            a,
            c,
            beta,
            d,
            vec![0.0; c.len()],
            &full,
            "outside_hull",
            0.0,
        )),
    }
}

/// Constrained AGE test: minimizes `σ_X(Σ ν_α (β − α)) + D(ν, e·c)` and
/// compares with `d`.
pub fn age_constrained(
    c: &[f64],
    d: f64,
    beta: &ExponentVector,
    a: &[ExponentVector],
    x: &ConvexRegion,
) -> Result<AgeCertificate> {
    check_age_input(c, beta, a)?;
    check_dim(beta.dim(), x.dimension())?;
    if let ConvexRegion::FullSpace { .. } = x {
        return age_global(c, d, beta, a);
    }
    let sol = solve_age(c, beta, a, x)?;
    Ok(assemble_age(a, c, beta, d, sol.nu, x, &sol.method, sol.gap))
}

fn solve_age(
    c: &[f64],
    beta: &ExponentVector,
    a: &[ExponentVector],
    x: &ConvexRegion,
) -> Result<EntropySolution> {
    let tol = 1e-11 * (1.0 + c.iter().sum::<f64>());
    solver::minimize_entropy_sigma(c, beta, a, x, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SageMode {
    /// Nonnegative per-β coefficient vectors (the X-SAGE cone).
    SignedNonnegC,
    /// Sign-free coefficients through the moment-space decomposition.
    FreeC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SageOptions {
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// A point near the minimizer of `f` on `X`, used for a warm start.
    pub hint: Option<Vec<f64>>,
    /// Grid depth for sampled moment regions in warm starts and `FreeC`.
    pub grid_depth: usize,
}

impl Default for SageOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            restarts: 5,
            seed: 7,
            hint: None,
            grid_depth: geometry::DEFAULT_GRID_DEPTH,
        }
    }
}

/// A point of the signed X-SAGE cone: per-β AGE certificates whose
/// coefficient vectors add up to at most `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SageCertificate {
    pub alphas: Vec<Vec<f64>>,
    pub coeffs: Vec<f64>,
    pub splits: Vec<AgeCertificate>,
    /// `c − Σ_β c^{(β)}`; nonnegative for a valid certificate.
    pub leftover: Vec<f64>,
    /// Smallest split slack.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SageSearch {
    /// Best value found of `min_β (d_β − min_ν G_β)` over the splits tried.
    pub best_slack: f64,
    pub beta_slacks: Vec<f64>,
    pub best_split: Vec<Vec<f64>>,
    pub iterations: usize,
    pub starts_tried: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SageOutcome {
    Member {
        certificate: SageCertificate,
        search: SageSearch,
    },
    Decomposed {
        decomposition: Decomposition,
    },
    /// No certificate found. This is not a proof of non-membership.
    NotFound { search: SageSearch },
}

impl SageOutcome {
    pub fn is_member(&self) -> bool {
        !matches!(self, SageOutcome::NotFound { .. })
    }
}

/// Serialized certificate, consumed by [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    Age(AgeCertificate),
    Sage(SageCertificate),
}

struct SageProblem<'a> {
    a: &'a [ExponentVector],
    c: &'a [f64],
    betas: &'a [ExponentVector],
    d: &'a [f64],
    x: &'a ConvexRegion,
}

struct SageEval {
    slacks: Vec<f64>,
    grads: Vec<Vec<f64>>,
    sols: Vec<EntropySolution>,
}

impl SageEval {
    fn min(&self) -> f64 {
        self.slacks.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl SageProblem<'_> {
    fn eval(&self, w: &[Vec<f64>]) -> Result<SageEval> {
        let mut slacks = Vec::with_capacity(w.len());
        let mut grads = Vec::with_capacity(w.len());
        let mut sols = Vec::with_capacity(w.len());
        for (k, row) in w.iter().enumerate() {
            let sol = solve_age(row, &self.betas[k], self.a, self.x)?;
            slacks.push(self.d[k] - sol.value);
            // ∂/∂w_α of −min G equals e^{⟨α − β, x*⟩} = ν_α / w_α.
            let g = row
                .iter()
                .zip(&sol.nu)
                .map(|(wa, na)| if *wa > 0.0 { na / wa } else { 0.0 })
                .collect();
            grads.push(g);
            sols.push(sol);
        }
        Ok(SageEval {
            slacks,
            grads,
            sols,
        })
    }

    /// Projects every column onto `{w ≥ floor, Σ_β w_β,α = c_α}`.
    fn project(&self, w: &mut [Vec<f64>]) {
        let nb = w.len();
        for (j, &cj) in self.c.iter().enumerate() {
            if cj <= 0.0 {
                for row in w.iter_mut() {
                    row[j] = 0.0;
                }
                continue;
            }
            let floor = 1e-9 * cj / nb as f64;
            let col: Vec<f64> = w.iter().map(|r| r[j] - floor).collect();
            let p = geometry::project_simplex(&col, cj - nb as f64 * floor);
            for (row, v) in w.iter_mut().zip(p) {
                row[j] = v + floor;
            }
        }
    }
}

fn soft_min(s: &[f64], t: f64) -> (f64, Vec<f64>) {
    let m = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = s.iter().map(|v| (-(v - m) / t).exp()).collect();
    let z: f64 = e.iter().sum();
    (m - t * z.ln(), e.iter().map(|v| v / z).collect())
}

/// Searches the signed X-SAGE cone for `f` by projected supergradient ascent
/// on `max_split min_β (d_β − min_ν G_β)`, with a soft minimum whose
/// temperature is annealed, from several warm starts.
pub fn sage_membership(
    part: &SupportPartition,
    x: &ConvexRegion,
    mode: SageMode,
    opts: &SageOptions,
) -> Result<SageOutcome> {
    check_dim(part.dimension, x.dimension())?;
    if mode == SageMode::FreeC {
        return sage_free(part, x, opts);
    }
    let a = &part.positive;
    let c = &part.positive_coeffs;
    let betas = &part.negative;
    let d = &part.negative_coeffs;
    let not_found = |reason: &str, slack: f64| SageOutcome::NotFound {
        search: SageSearch {
            best_slack: slack,
            beta_slacks: Vec::new(),
            best_split: Vec::new(),
            iterations: 0,
            starts_tried: Vec::new(),
            reason: Some(reason.into()),
        },
    };
    if let Some(neg) = c.iter().find(|v| **v < 0.0) {
        return Ok(not_found(
            &format!("positive support carries a negative coefficient {neg}"),
            f64::NEG_INFINITY,
        ));
    }
    if betas.is_empty() {
        let certificate = SageCertificate {
            alphas: a.iter().map(|p| p.coords().to_vec()).collect(),
            coeffs: c.clone(),
            splits: Vec::new(),
            leftover: c.clone(),
            slack: 0.0,
        };
        return Ok(SageOutcome::Member {
            certificate,
            search: SageSearch {
                best_slack: 0.0,
                beta_slacks: Vec::new(),
                best_split: Vec::new(),
                iterations: 0,
                starts_tried: vec!["posynomial".into()],
                reason: None,
            },
        });
    }
    let prob = SageProblem {
        a,
        c,
        betas,
        d,
        x,
    };
    let nb = betas.len();
    let cmax = c.iter().chain(d.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut starts: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    if let Some(w) = fenchel_start(part, x, opts) {
        starts.push(("fenchel".into(), w));
    }
    if let Some(h) = hint_point(part, x, opts) {
        let weights: Vec<f64> = betas
            .iter()
            .zip(d)
            .map(|(b, db)| -db * b.dot(&h).clamp(-700.0, 700.0).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total.is_finite() {
            let w = weights
                .iter()
                .map(|wb| c.iter().map(|ca| ca * wb / total).collect())
                .collect();
            starts.push(("proportional".into(), w));
        }
    }
    starts.push((
        "uniform".into(),
        (0..nb)
            .map(|_| c.iter().map(|v| v / nb as f64).collect())
            .collect(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while starts.len() < opts.restarts.max(1) {
        let raw: Vec<Vec<f64>> = (0..nb)
            .map(|_| (0..c.len()).map(|_| rng.gen_range(0.05..1.0)).collect())
            .collect();
        let w = (0..nb)
            .map(|k| {
                (0..c.len())
                    .map(|j| {
                        let col: f64 = raw.iter().map(|r| r[j]).sum();
                        c[j] * raw[k][j] / col
                    })
                    .collect()
            })
            .collect();
        starts.push((format!("random{}", starts.len()), w));
    }
    starts.truncate(opts.restarts.max(1));

    let mut best: Option<(f64, Vec<Vec<f64>>, SageEval)> = None;
    let mut total_iter = 0;
    let mut tried = Vec::new();
    for (name, start) in starts {
        tried.push(name);
        let mut w = start;
        prob.project(&mut w);
        let mut ev = prob.eval(&w)?;
        let improve = |w: &Vec<Vec<f64>>, ev: SageEval, best: &mut Option<(f64, Vec<Vec<f64>>, SageEval)>| {
            let m = ev.min();
            if best.as_ref().is_none_or(|b| m > b.0) {
                *best = Some((m, w.clone(), ev));
            }
        };
        let first_min = ev.min();
        improve(&w, prob.eval(&w)?, &mut best);
        if first_min >= -TAU_CERT {
            break;
        }
        let mut temp = 0.05 * cmax.max(1e-300);
        let temp_min = 1e-9 * cmax.max(1e-300);
        let mut eta = f64::NAN;
        let mut last_best = first_min;
        let mut since_improve = 0;
        for _ in 0..opts.max_iter {
            total_iter += 1;
            let (sv, p) = soft_min(&ev.slacks, temp);
            let grad: Vec<Vec<f64>> = (0..c.len())
                .map(|j| (0..nb).map(|k| p[k] * ev.grads[k][j]).collect::<Vec<f64>>())
                .collect();
            // grad is column-major here; transpose to rows.
            let g: Vec<Vec<f64>> = (0..nb).map(|k| (0..c.len()).map(|j| grad[j][k]).collect()).collect();
            let gmax = g.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
            if gmax == 0.0 {
                break;
            }
            if eta.is_nan() {
                eta = 0.1 * c.iter().cloned().fold(0.0, f64::max) / gmax;
            }
            let mut accepted = false;
            for _ in 0..30 {
                let mut w2: Vec<Vec<f64>> = w
                    .iter()
                    .zip(&g)
                    .map(|(r, gr)| r.iter().zip(gr).map(|(a, b)| a + eta * b).collect())
                    .collect();
                prob.project(&mut w2);
                let ev2 = prob.eval(&w2)?;
                let (sv2, _) = soft_min(&ev2.slacks, temp);
                let lin: f64 = w2
                    .iter()
                    .zip(&w)
                    .zip(&g)
                    .map(|((r2, r), gr)| {
                        r2.iter().zip(r).zip(gr).map(|((a, b), gg)| (a - b) * gg).sum::<f64>()
                    })
                    .sum();
                if sv2 >= sv + 1e-4 * lin && lin > 0.0 {
                    w = w2;
                    ev = ev2;
                    eta *= 1.5;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            let m = ev.min();
            if accepted {
                improve(&w, prob.eval(&w)?, &mut best);
            }
            if m >= -TAU_CERT {
                break;
            }
            if !accepted {
                temp *= 0.5;
                eta = f64::NAN;
            } else {
                temp = (temp * 0.97).max(temp_min);
            }
            if m > last_best + 1e-12 * (1.0 + cmax) {
                last_best = m;
                since_improve = 0;
            } else {
                since_improve += 1;
            }
            if since_improve > 80 || temp < temp_min * 1e-3 {
                break;
            }
        }
        if best.as_ref().is_some_and(|b| b.0 >= -TAU_CERT) {
            break;
        }
    }
    let (best_min, best_w, best_ev) = best.expect("at least one start");
    let search = SageSearch {
        best_slack: best_min,
        beta_slacks: best_ev.slacks.clone(),
        best_split: best_w.clone(),
        iterations: total_iter,
        starts_tried: tried,
        reason: None,
    };
    if best_min < -TAU_CERT {
        return Ok(SageOutcome::NotFound { search });
    }
    let splits: Vec<AgeCertificate> = best_ev
        .sols
        .into_iter()
        .enumerate()
        .map(|(k, sol)| assemble_age(a, &best_w[k], &betas[k], d[k], sol.nu, x, &sol.method, sol.gap))
        .collect();
    let leftover: Vec<f64> = (0..c.len())
        .map(|j| c[j] - best_w.iter().map(|r| r[j]).sum::<f64>())
        .collect();
    let slack = splits.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
    Ok(SageOutcome::Member {
        certificate: SageCertificate {
            alphas: a.iter().map(|p| p.coords().to_vec()).collect(),
            coeffs: c.clone(),
            splits,
            leftover,
            slack,
        },
        search,
    })
}

/// Moment region used by warm starts and the sign-free mode.
pub(crate) fn region_for(
    part: &SupportPartition,
    x: &ConvexRegion,
    depth: usize,
) -> Option<MomentRegion> {
    let anchor = geometry::default_anchor(&part.positive);
    if part.positive.len() != part.dimension + 1 {
        return None;
    }
    geometry::build_moment_region(x, &part.positive, anchor, MomentMode::Sample { depth }).ok()
}

fn fenchel_start(
    part: &SupportPartition,
    x: &ConvexRegion,
    opts: &SageOptions,
) -> Option<Vec<Vec<f64>>> {
    if !part.is_eligible() {
        return None;
    }
    let y = region_for(part, x, opts.grid_depth)?;
    let dec = decompose::decompose(part, &y, &DecomposeOptions::default()).ok()?;
    let mut rows = vec![vec![0.0; part.positive.len()]; part.negative.len()];
    for p in &dec.parts {
        let k = part
            .negative
            .iter()
            .position(|b| b.coords() == p.beta.as_slice())?;
        rows[k] = p.coeffs.iter().map(|v| v.max(0.0)).collect();
    }
    Some(rows)
}

fn hint_point(part: &SupportPartition, x: &ConvexRegion, opts: &SageOptions) -> Option<Vec<f64>> {
    if let Some(h) = &opts.hint {
        return Some(h.clone());
    }
    let f = part.to_signomial();
    match x {
        _ if x.is_bounded() => oracle::grid_min(&f, x, 20).ok().map(|g| g.argmin),
        ConvexRegion::FullSpace { dim } => {
            if *dim <= 3 {
                Some(oracle::global_min_estimate(&f, 3.0, 24).argmin)
            } else {
                Some(vec![0.0; *dim])
            }
        }
        ConvexRegion::Interval { lower, upper } => {
            let (lo, hi) = match (lower.is_finite(), upper.is_finite()) {
                (true, false) => (*lower, lower + 20.0),
                (false, true) => (upper - 20.0, *upper),
                _ => (-20.0, 20.0),
            };
            let w = ConvexRegion::interval(lo, hi).ok()?;
            oracle::grid_min(&f, &w, 400).ok().map(|g| g.argmin)
        }
        ConvexRegion::VertexPolytope { vertices, .. } => Some(vertices[0].clone()),
    }
}

fn sage_free(part: &SupportPartition, x: &ConvexRegion, opts: &SageOptions) -> Result<SageOutcome> {
    let fail = |reason: String| SageOutcome::NotFound {
        search: SageSearch {
            best_slack: f64::NEG_INFINITY,
            beta_slacks: Vec::new(),
            best_split: Vec::new(),
            iterations: 0,
            starts_tried: vec!["decompose".into()],
            reason: Some(reason),
        },
    };
    let diag = signomial::validate_simplex_problem(part);
    if !diag.eligible {
        return Ok(fail(diag.reasons.join("; ")));
    }
    let Some(y) = region_for(part, x, opts.grid_depth) else {
        return Ok(fail("no moment region for this region".into()));
    };
    match decompose::decompose(part, &y, &DecomposeOptions::default()) {
        Ok(decomposition) => Ok(SageOutcome::Decomposed { decomposition }),
        Err(e) => Ok(fail(e.to_string())),
    }
}

/// Independent re-check of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub pass: bool,
    pub worst_slack: f64,
    /// Most negative coefficient of `f − Σ parts` (must be ≥ −τ).
    pub coefficient_residual: f64,
    pub sampled_min: Option<f64>,
    pub failures: Vec<String>,
}

/// Recomputes every inequality of `cert` from scratch and spot-checks
/// `f ≥ −τ_eval` on `samples` points of `X`.
pub fn verify_certificate(
    cert: &Certificate,
    f: &Signomial,
    x: &ConvexRegion,
    samples: usize,
) -> CertificateCheck {
    let mut failures = Vec::new();
    let splits: Vec<&AgeCertificate> = match cert {
        Certificate::Age(a) => vec![a],
        Certificate::Sage(s) => s.splits.iter().collect(),
    };
    let mut worst = f64::INFINITY;
    let mut parts = Signomial::constant(f.dimension(), 0.0).expect("dimension");
    for (k, s) in splits.iter().enumerate() {
        let exps: Result<Vec<ExponentVector>> = s
            .alphas
            .iter()
            .map(|v| ExponentVector::new(v.clone()))
            .collect();
        let (Ok(a), Ok(beta)) = (exps, ExponentVector::new(s.beta.clone())) else {
            failures.push(format!("split {k}: malformed exponents"));
            continue;
        };
        if s.nu.len() != a.len() || s.coeffs.len() != a.len() || beta.dim() != x.dimension() {
            failures.push(format!("split {k}: dimension mismatch"));
            continue;
        }
        if s.nu.iter().any(|v| *v < 0.0) {
            failures.push(format!("split {k}: negative nu entry"));
        }
        if s.coeffs.iter().any(|v| *v < -TAU_CERT) {
            failures.push(format!("split {k}: negative coefficient in a signed split"));
        }
        let c: Vec<f64> = s.coeffs.iter().map(|v| v.max(0.0)).collect();
        let (ent, sup) = age_terms(&s.nu, &c, &beta, &a, x);
        let slack = s.d - (ent + sup);
        worst = worst.min(slack);
        if !(slack >= -TAU_CERT) {
            failures.push(format!("split {k}: AGE inequality violated (slack {slack:.3e})"));
        }
        match s.signomial() {
            Ok(p) => parts = parts.add(&p).expect("same dimension"),
            Err(e) => failures.push(format!("split {k}: {e}")),
        }
    }
    if splits.is_empty() {
        worst = 0.0;
    }
    // f − Σ parts must be a nonnegative combination of exponentials.
    let rest = f.add(&parts.scale(-1.0)).expect("same dimension");
    let scale = f.coeff_scale().max(1.0);
    let coefficient_residual = rest
        .terms()
        .iter()
        .map(|t| t.coeff)
        .fold(0.0_f64, f64::min);
    if coefficient_residual < -TAU_CERT * scale {
        failures.push(format!(
            "certificate does not match f (residual coefficient {coefficient_residual:.3e})"
        ));
    }
    let sampled_min = if samples > 0 {
        let pts = oracle::sample_points(x, samples, 11);
        let m = pts.iter().map(|p| f.eval(p)).fold(f64::INFINITY, f64::min);
        if m < -oracle::TAU_EVAL * scale {
            failures.push(format!("f is negative on a sample point ({m:.3e})"));
        }
        Some(m)
    } else {
        None
    };
    CertificateCheck {
        pass: failures.is_empty(),
        worst_slack: worst,
        coefficient_residual,
        sampled_min,
        failures,
    }
}

impl SageCertificate {
    pub fn into_certificate(self) -> Certificate {
        Certificate::Sage(self)
    }
}

/// Leftover terms of `f` not covered by a split, as signomial terms.
pub fn leftover_terms(cert: &SageCertificate) -> Vec<Term> {
    cert.alphas
        .iter()
        .zip(&cert.leftover)
        .filter(|(_, c)| c.abs() > 0.0)
        .map(|(a, c)| Term {
            coeff: *c,
            exponent: ExponentVector::new(a.clone()).expect("finite"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ev(v: &[f64]) -> ExponentVector {
        ExponentVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(relative_entropy(&[1.0, 1.0], &[e, e]), -2.0, epsilon = 1e-15);
        assert_eq!(relative_entropy(&[0.3, 2.0], &[0.3, 2.0]), 0.0);
        assert_abs_diff_eq!(relative_entropy(&[0.0, 1.0], &[e, e]), -1.0, epsilon = 1e-15);
        assert_eq!(relative_entropy(&[1.0], &[0.0]), f64::INFINITY);
    }

    #[test]
    fn circuit_number_examples() {
        assert_abs_diff_eq!(circuit_number(&[1.0, 1.0], &[0.5, 0.5]), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            circuit_number(&[16.0, 0.5, 0.5], &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]),
            12.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            circuit_number(&[4.0, 0.5, 0.5], &[1.0 / 3.0; 3]),
            3.0,
            epsilon = 1e-12
        );
        assert_eq!(circuit_number(&[0.0, 1.0], &[0.5, 0.5]), 0.0);
    }

    #[test]
    fn global_age_threshold() {
        let a = [ev(&[0.0]), ev(&[2.0])];
        let cert = age_global(&[1.0, 1.0], -2.0, &ev(&[1.0]), &a).unwrap();
        assert!(cert.feasible);
        assert_abs_diff_eq!(cert.nu[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cert.entropy_value, -2.0, epsilon = 1e-14);
        assert!(!age_global(&[1.0, 1.0], -2.01, &ev(&[1.0]), &a).unwrap().feasible);
        assert!(age_global(&[1.0, 1.0], 0.0, &ev(&[3.0]), &a).unwrap().feasible);
        assert!(!age_global(&[1.0, 1.0], -0.1, &ev(&[3.0]), &a).unwrap().feasible);
        assert!(age_global(&[-1.0, 1.0], 0.0, &ev(&[1.0]), &a).is_err());
    }

    #[test]
    fn constrained_age_on_a_point() {
        let a = [ev(&[0.0]), ev(&[2.0])];
        let x = ConvexRegion::point(vec![0.0]);
        let cert = age_constrained(&[1.0, 1.0], -2.0, &ev(&[1.0]), &a, &x).unwrap();
        assert!(cert.feasible, "{cert:?}");
        assert!(!age_constrained(&[1.0, 1.0], -2.001, &ev(&[1.0]), &a, &x).unwrap().feasible);
        let cert = age_constrained(&[1.0, 1.0], 0.5, &ev(&[1.0]), &a, &x).unwrap();
        assert!(cert.feasible);
    }

    #[test]
    fn constrained_beats_global_on_subsets() {
        // 1 + e^{2x} − 2.5 e^{x} is negative near 0 but nonnegative on [2, 3].
        let a = [ev(&[0.0]), ev(&[2.0])];
        let x = ConvexRegion::interval(2.0, 3.0).unwrap();
        assert!(!age_global(&[1.0, 1.0], -2.5, &ev(&[1.0]), &a).unwrap().feasible);
        assert!(age_constrained(&[1.0, 1.0], -2.5, &ev(&[1.0]), &a, &x).unwrap().feasible);
    }

    #[test]
    fn certificate_tampering_is_detected() {
        let a = [ev(&[0.0]), ev(&[2.0])];
        let f = Signomial::new(1, [(1.0, vec![0.0]), (1.0, vec![2.0]), (-2.0, vec![1.0])]).unwrap();
        let cert = age_global(&[1.0, 1.0], -2.0, &ev(&[1.0]), &a).unwrap();
        let x = ConvexRegion::full_space(1);
        assert!(verify_certificate(&Certificate::Age(cert.clone()), &f, &x, 200).pass);
        let mut bad = cert;
        bad.nu[0] += 1.0;
        let r = verify_certificate(&Certificate::Age(bad), &f, &x, 0);
        assert!(!r.pass);
    }

    #[test]
    fn trivial_certificate_for_constant() {
        let f = Signomial::constant(1, 1.0).unwrap();
        let part = signomial::partition_support(&f, None).unwrap();
        let x = ConvexRegion::interval(-1.0, 1.0).unwrap();
        let out = sage_membership(&part, &x, SageMode::SignedNonnegC, &SageOptions::default()).unwrap();
        let SageOutcome::Member { certificate, .. } = out else {
            panic!("constant should be certified");
        };
        assert!(verify_certificate(&Certificate::Sage(certificate), &f, &x, 50).pass);
    }
}
