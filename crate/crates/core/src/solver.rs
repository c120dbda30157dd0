//! Convex engines: away-step Frank–Wolfe over atom lists, a bracketing 1D
//! minimizer, the entropy + support-function minimization behind the AGE
//! test, and the moment-space program.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, ConvexRegion, MomentKind, MomentRegion, TAU_RAY};
use crate::linalg;
use crate::signomial::{self, ExponentVector, SupportPartition};

pub const FW_TOL: f64 = 1e-6;
pub const FW_MAX_ITER: usize = 10_000;
pub const TOL_1D: f64 = 1e-8;
pub const BOX_MAX_ITER: usize = 200;
/// Active-set bookkeeping for away steps is used up to this many atoms.
pub const AWAY_STEP_ATOMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    BudgetExhausted,
    /// No descent step found before the tolerance was met.
    Stalled,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub minimizer: Vec<f64>,
    pub value: f64,
    /// FW duality gap, bracket width or Newton decrement, by engine.
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Objective value after every iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// A point of the power cone `Pow^λ = {(x, z) : Π x_i^{λ_i} ≥ |z|, x ≥ 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConePoint {
    pub x: Vec<f64>,
    pub z: f64,
    pub weights: Vec<f64>,
}

impl PowerConePoint {
    /// `Σ λ_i ln x_i − ln |z|`; nonnegative inside the cone, zero on its
    /// surface.
    pub fn log_margin(&self) -> f64 {
        let mut s = 0.0;
        for (x, l) in self.x.iter().zip(&self.weights) {
            if *l > 0.0 {
                if *x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                s += l * x.ln();
            }
        }
        if self.z == 0.0 {
            f64::INFINITY
        } else {
            s - self.z.abs().ln()
        }
    }
}

pub fn powercone_contains(p: &PowerConePoint, tol: f64) -> bool {
    if p.x.iter().any(|x| *x < 0.0) {
        return false;
    }
    if p.z == 0.0 {
        return true;
    }
    let degenerate = p
        .x
        .iter()
        .zip(&p.weights)
        .any(|(x, l)| *l > 0.0 && *x == 0.0);
    if degenerate {
        return p.z.abs() <= tol;
    }
    p.log_margin() >= -tol
}

/// A differentiable objective for the FW engine.
pub trait Objective {
    fn value(&self, v: &[f64]) -> f64;
    fn gradient(&self, v: &[f64]) -> Vec<f64>;
}

/// Adapts a pair of closures to [`Objective`].
pub struct FnObjective<F, G> {
    pub f: F,
    pub g: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value(&self, v: &[f64]) -> f64 {
        (self.f)(v)
    }
    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        (self.g)(v)
    }
}

/// Result of a FW run: the report plus the convex weights on the atoms.
#[derive(Debug, Clone)]
pub struct FwResult {
    pub report: SolveReport,
    pub weights: Vec<f64>,
}

/// Frank–Wolfe over `conv(atoms)` with exact line search on segments and
/// away steps. The gap is `max_a ⟨∇F(v), v − a⟩`.
pub fn minimize_fw(
    obj: &dyn Objective,
    atoms: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<FwResult> {
    let Some(first) = atoms.first() else {
        return Err(Error::Input("Frank-Wolfe needs at least one atom".into()));
    };
    let m = first.len();
    for a in atoms {
        check_dim(m, a.len())?;
    }
    let mut start = 0;
    let mut best = f64::INFINITY;
    for (i, a) in atoms.iter().enumerate() {
        let fa = obj.value(a);
        if !fa.is_finite() {
            return Err(Error::NonFiniteAtom {
                index: i,
                atom: a.clone(),
            });
        }
        if fa < best {
            best = fa;
            start = i;
        }
    }
    let away = atoms.len() <= AWAY_STEP_ATOMS;
    let mut w = vec![0.0; atoms.len()];
    w[start] = 1.0;
    let mut v = atoms[start].clone();
    let mut fv = best;
    let mut history = vec![fv];
    let mut gap = f64::INFINITY;
    let mut status = SolveStatus::BudgetExhausted;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it;
        let g = obj.gradient(&v);
        let gv = linalg::dot(&g, &v);
        let (s, gs) = argmin_dot(atoms, &g);
        gap = gv - gs;
        if gap <= tol {
            status = SolveStatus::Converged;
            break;
        }
        let mut dir_away = None;
        if away {
            let (a_idx, ga) = argmax_dot(atoms, &g, &w);
            let away_gap = ga - gv;
            if away_gap > gap && w[a_idx] < 1.0 {
                dir_away = Some(a_idx);
            }
        }
        let (d, tmax) = match dir_away {
            Some(a) => (linalg::sub(&v, &atoms[a]), w[a] / (1.0 - w[a])),
            None => (linalg::sub(&atoms[s], &v), 1.0),
        };
        let t = line_search(obj, &v, &d, tmax);
        let cand: Vec<f64> = v.iter().zip(&d).map(|(x, y)| x + t * y).collect();
        let fc = obj.value(&cand);
        if !(fc <= fv) {
            // Numerical stall: no decrease along the chosen direction.
            iterations = it + 1;
            break;
        }
        match dir_away {
            Some(a) => {
                for wi in w.iter_mut() {
                    *wi *= 1.0 + t;
                }
                w[a] -= t;
                if t >= tmax || w[a] < 1e-15 {
                    w[a] = 0.0;
                }
            }
            None => {
                for wi in w.iter_mut() {
                    *wi *= 1.0 - t;
                }
                w[s] += t;
            }
        }
        v = cand;
        fv = fc;
        history.push(fv);
        iterations = it + 1;
    }
    if status != SolveStatus::Converged {
        let g = obj.gradient(&v);
        gap = linalg::dot(&g, &v) - argmin_dot(atoms, &g).1;
        if gap <= tol {
            status = SolveStatus::Converged;
        }
    }
    Ok(FwResult {
        report: SolveReport {
            minimizer: v,
            value: fv,
            gap,
            iterations,
            status,
            history,
        },
        weights: w,
    })
}

fn argmin_dot(atoms: &[Vec<f64>], g: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, a) in atoms.iter().enumerate() {
        let d = linalg::dot(g, a);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn argmax_dot(atoms: &[Vec<f64>], g: &[f64], w: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, a) in atoms.iter().enumerate() {
        if w[i] > 0.0 {
            let d = linalg::dot(g, a);
            if d > best.1 {
                best = (i, d);
            }
        }
    }
    best
}

/// Minimizes the convex `t ↦ F(v + t d)` on `[0, tmax]` by bisection on the
/// directional derivative.
fn line_search(obj: &dyn Objective, v: &[f64], d: &[f64], tmax: f64) -> f64 {
    let slope = |t: f64| {
        let p: Vec<f64> = v.iter().zip(d).map(|(x, y)| x + t * y).collect();
        linalg::dot(&obj.gradient(&p), d)
    };
    if slope(tmax) <= 0.0 {
        return tmax;
    }
    let (mut lo, mut hi) = (0.0, tmax);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let s = slope(mid);
        if s.is_nan() || s > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * tmax {
            break;
        }
    }
    lo
}

/// Minimizes a convex function on `[lower, upper]`, either bound possibly
/// infinite. Golden section; unbounded sides are bracketed by doubling.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, tol: f64) -> SolveReport {
    let fv = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (bracket, mut evals) = match bracket_1d(&fv, lower, upper) {
        Ok(b) => b,
        Err((x, v, n)) => {
            return SolveReport {
                minimizer: vec![x],
                value: v,
                gap: f64::INFINITY,
                iterations: n,
                status: SolveStatus::BudgetExhausted,
                history: Vec::new(),
            }
        }
    };
    let (mut a, mut b) = bracket;
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = fv(c);
    let mut fd = fv(d);
    while b - a > tol * (1.0 + a.abs().max(b.abs())) && evals < 10_000 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = fv(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = fv(d);
        }
        evals += 1;
    }
    // The bracket ends are candidates too: minima at the region boundary.
    let mut best = (c, fc);
    for x in [a, b, d] {
        let v = fv(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    SolveReport {
        minimizer: vec![best.0],
        value: best.1,
        gap: b - a,
        iterations: evals,
        status: SolveStatus::Converged,
        history: Vec::new(),
    }
}

/// Like [`minimize_1d`] but bisects on the sign of the derivative, which
/// locates interior minimizers to full precision.
pub fn minimize_1d_with_derivative<F, D>(
    f: F,
    df: D,
    lower: f64,
    upper: f64,
    tol: f64,
) -> SolveReport
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let fv = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (bracket, mut evals) = match bracket_1d(&fv, lower, upper) {
        Ok(b) => b,
        Err((x, v, n)) => {
            return SolveReport {
                minimizer: vec![x],
                value: v,
                gap: f64::INFINITY,
                iterations: n,
                status: SolveStatus::BudgetExhausted,
                history: Vec::new(),
            }
        }
    };
    let (mut a, mut b) = bracket;
    if df(a) >= 0.0 {
        b = a;
    } else if df(b) <= 0.0 {
        a = b;
    }
    while b - a > tol * 1e-6 * (1.0 + a.abs().max(b.abs())) && evals < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let s = df(mid);
        if s > 0.0 {
            b = mid;
        } else if s < 0.0 {
            a = mid;
        } else {
            a = mid;
            b = mid;
        }
        evals += 1;
    }
    let x = 0.5 * (a + b);
    SolveReport {
        minimizer: vec![x],
        value: fv(x),
        gap: b - a,
        iterations: evals,
        status: SolveStatus::Converged,
        history: Vec::new(),
    }
}

/// Finds a finite bracket containing a minimizer. On failure returns the best
/// point seen and the evaluation count.
#[allow(clippy::type_complexity)]
fn bracket_1d<F: Fn(f64) -> f64>(
    f: &F,
    lower: f64,
    upper: f64,
) -> std::result::Result<((f64, f64), usize), (f64, f64, usize)> {
    const MAX_EXPAND: usize = 60;
    if lower.is_finite() && upper.is_finite() {
        return Ok(((lower, upper), 0));
    }
    // Walk from `x0` in direction `s` with doubling steps while f decreases.
    let walk = |x0: f64, s: f64, limit: f64| -> std::result::Result<((f64, f64), usize), (f64, f64, usize)> {
        let mut prev = x0;
        let mut fprev = f(x0);
        let mut h = 1.0;
        let mut back = x0;
        for k in 0..MAX_EXPAND {
            let mut x = x0 + s * h;
            let mut hit_limit = false;
            if (s > 0.0 && x >= limit) || (s < 0.0 && x <= limit) {
                x = limit;
                hit_limit = true;
            }
            let fx = f(x);
            // Strict: a plateau (often an underflow to 0) is not a bracket.
            if fx > fprev {
                let (lo, hi) = if s > 0.0 { (back, x) } else { (x, back) };
                return Ok(((lo, hi), k + 1));
            }
            if hit_limit {
                let (lo, hi) = if s > 0.0 { (prev, x) } else { (x, prev) };
                return Ok(((lo, hi), k + 1));
            }
            back = prev;
            prev = x;
            fprev = fx;
            h *= 2.0;
        }
        Err((prev, fprev, MAX_EXPAND))
    };
    match (lower.is_finite(), upper.is_finite()) {
        (true, false) => walk(lower, 1.0, f64::INFINITY),
        (false, true) => walk(upper, -1.0, f64::NEG_INFINITY),
        _ => {
            let (f0, fr, fl) = (f(0.0), f(1.0), f(-1.0));
            if fr < f0 {
                walk(0.0, 1.0, f64::INFINITY)
            } else if fl < f0 {
                walk(0.0, -1.0, f64::NEG_INFINITY)
            } else {
                Ok(((-1.0, 1.0), 3))
            }
        }
    }
}

/// `G(ν) = σ_X(Σ ν_α (β − α)) + D(ν, e·c)`, the constrained AGE functional.
pub fn entropy_sigma_value(
    nu: &[f64],
    c: &[f64],
    beta: &ExponentVector,
    a: &[ExponentVector],
    x: &ConvexRegion,
) -> f64 {
    let n = beta.dim();
    let mut dir = vec![0.0; n];
    for (nu_a, alpha) in nu.iter().zip(a) {
        for (k, dk) in dir.iter_mut().enumerate() {
            *dk += nu_a * (beta.coords()[k] - alpha.coords()[k]);
        }
    }
    let ec: Vec<f64> = c.iter().map(|ci| std::f64::consts::E * ci).collect();
    x.support_function(&dir) + crate::certificates::relative_entropy(nu, &ec)
}

/// Minimizer of the AGE functional together with the dual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySolution {
    pub nu: Vec<f64>,
    /// `G(ν)` recomputed exactly at the returned `ν`.
    pub value: f64,
    /// Upper bound on `G(ν) − min G`.
    pub gap: f64,
    /// Minimizer of `Σ c_α e^{⟨α − β, x⟩}` over `X`, when one was found.
    pub dual_point: Option<Vec<f64>>,
    pub method: String,
    pub report: SolveReport,
}

/// Minimizes `G(ν)` over `ν ≥ 0`. Uses the identity
/// `min_ν G(ν) = −inf_{x ∈ X} Σ c_α e^{⟨α − β, x⟩}`: the convex problem in
/// `x` is solved and `ν_α = c_α e^{⟨α − β, x*⟩}` is read off. The
/// full space uses the closed form `ν = Θ λ`.
pub fn minimize_entropy_sigma(
    c: &[f64],
    beta: &ExponentVector,
    a: &[ExponentVector],
    x: &ConvexRegion,
    tol: f64,
) -> Result<EntropySolution> {
    check_dim(a.len(), c.len())?;
    let n = beta.dim();
    check_dim(n, x.dimension())?;
    if let Some(bad) = c.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::Input(format!(
            "AGE coefficients must be nonnegative, got {bad}"
        )));
    }
    let zero = || EntropySolution {
        nu: vec![0.0; c.len()],
        value: 0.0,
        gap: 0.0,
        dual_point: None,
        method: "zero".into(),
        report: SolveReport {
            minimizer: vec![0.0; c.len()],
            value: 0.0,
            gap: 0.0,
            iterations: 0,
            status: SolveStatus::Converged,
            history: Vec::new(),
        },
    };
    if c.iter().all(|v| *v == 0.0) {
        return Ok(zero());
    }
    let active: Vec<usize> = (0..c.len()).filter(|&i| c[i] > 0.0).collect();
    let diffs: Vec<Vec<f64>> = a
        .iter()
        .map(|alpha| linalg::sub(alpha.coords(), beta.coords()))
        .collect();
    let phi = |p: &[f64]| -> f64 {
        active
            .iter()
            .map(|&i| c[i] * linalg::dot(&diffs[i], p).min(geometry::EXP_LIMIT).exp())
            .sum()
    };
    let phi_grad = |p: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; n];
        for &i in &active {
            let w = c[i] * linalg::dot(&diffs[i], p).min(geometry::EXP_LIMIT).exp();
            for (gk, dk) in g.iter_mut().zip(&diffs[i]) {
                *gk += w * dk;
            }
        }
        g
    };
    let hess = |p: &[f64]| -> Vec<Vec<f64>> {
        let mut h = vec![vec![0.0; n]; n];
        for &i in &active {
            let w = c[i] * linalg::dot(&diffs[i], p).min(geometry::EXP_LIMIT).exp();
            for r in 0..n {
                for s in 0..n {
                    h[r][s] += w * diffs[i][r] * diffs[i][s];
                }
            }
        }
        h
    };
    let nu_at = |p: &[f64]| -> Vec<f64> {
        (0..c.len())
            .map(|i| {
                if c[i] > 0.0 {
                    c[i] * linalg::dot(&diffs[i], p).min(geometry::EXP_LIMIT).exp()
                } else {
                    0.0
                }
            })
            .collect()
    };
    let g_at = |nu: &[f64]| entropy_sigma_value(nu, c, beta, a, x);

    // Keep whichever of ν(x*) and ν = 0 is better.
    let finish = |nu: Vec<f64>, xs: Option<Vec<f64>>, lower: f64, method: &str, report: SolveReport| {
        let value = g_at(&nu);
        let (nu, value, xs) = if value.is_finite() && value <= 0.0 {
            (nu, value, xs)
        } else {
            (vec![0.0; c.len()], 0.0, None)
        };
        EntropySolution {
            gap: (value - lower).max(0.0),
            nu,
            value,
            dual_point: xs,
            method: method.into(),
            report,
        }
    };

    match x {
        ConvexRegion::FullSpace { .. } => {
            let Ok(bary) = signomial::barycentric(a, beta) else {
                return Ok(zero());
            };
            if !bary.in_hull {
                return Ok(zero());
            }
            let theta = crate::certificates::circuit_number(c, &bary.weights);
            let nu: Vec<f64> = bary.weights.iter().map(|l| theta * l).collect();
            let report = SolveReport {
                minimizer: nu.clone(),
                value: -theta,
                gap: 0.0,
                iterations: 0,
                status: SolveStatus::Converged,
                history: Vec::new(),
            };
            Ok(finish(nu, None, -theta, "closed_form", report))
        }
        ConvexRegion::Interval { lower, upper } => {
            let f1 = |t: f64| phi(&[t]);
            let d1 = |t: f64| phi_grad(&[t])[0];
            let rep = minimize_1d_with_derivative(f1, d1, *lower, *upper, tol.min(TOL_1D));
            let xs = rep.minimizer[0];
            let mut nu = nu_at(&[xs]);
            rebalance_1d(&mut nu, a, beta, *lower, *upper);
            let inf_phi = rep.value;
            let report = SolveReport {
                minimizer: nu.clone(),
                ..rep.clone()
            };
            let lower_bound = if rep.converged() { -inf_phi } else { f64::NEG_INFINITY };
            // Unbounded sides: the infimum may sit at infinity, where φ → 0.
            let lower_bound = if rep.converged() && !x.is_bounded() {
                lower_bound.min(0.0)
            } else {
                lower_bound
            };
            Ok(finish(nu, Some(vec![xs]), lower_bound, "interval_1d", report))
        }
        ConvexRegion::VertexPolytope { vertices, rays } => {
            let obj = FnObjective {
                f: |p: &[f64]| phi(p),
                g: |p: &[f64]| phi_grad(p),
            };
            if let Some((lo, hi)) = x.as_box() {
                let rep = minimize_box(&phi, &phi_grad, &hess, &lo, &hi, tol);
                let xs = rep.minimizer.clone();
                let lower_bound = -(rep.value) - rep.gap;
                let nu = nu_at(&xs);
                let report = SolveReport {
                    minimizer: nu.clone(),
                    ..rep
                };
                return Ok(finish(nu, Some(xs), lower_bound, "projected_newton", report));
            }
            if rays.is_empty() {
                let fw = minimize_fw(&obj, vertices, tol, FW_MAX_ITER)?;
                let xs = if fw.report.converged() {
                    fw.report.minimizer.clone()
                } else {
                    newton_polish(&phi, &phi_grad, &hess, fw.report.minimizer.clone(), x)
                };
                let lower_bound = -(fw.report.value);
                let nu = nu_at(&xs);
                let report = SolveReport {
                    minimizer: nu.clone(),
                    ..fw.report
                };
                return Ok(finish(nu, Some(xs), lower_bound - report.gap, "frank_wolfe", report));
            }
            // Truncate the rays at length L, doubling until the dual point
            // makes the support value finite.
            let mut len = 1.0;
            let mut last = None;
            for _ in 0..30 {
                let mut atoms = vertices.clone();
                for v in vertices {
                    for r in rays {
                        atoms.push(v.iter().zip(r).map(|(p, q)| p + len * q).collect());
                    }
                }
                let fw = minimize_fw(&obj, &atoms, tol, FW_MAX_ITER)?;
                let xs = fw.report.minimizer.clone();
                let g = phi_grad(&xs);
                let finite = rays.iter().all(|r| -linalg::dot(&g, r) <= TAU_RAY);
                let nu = nu_at(&xs);
                let report = SolveReport {
                    minimizer: nu.clone(),
                    ..fw.report
                };
                if finite {
                    return Ok(finish(nu, Some(xs), f64::NEG_INFINITY, "frank_wolfe_truncated", report));
                }
                last = Some(report);
                len *= 2.0;
            }
            let mut sol = zero();
            sol.method = "frank_wolfe_truncated".into();
            sol.gap = f64::INFINITY;
            if let Some(r) = last {
                sol.report = SolveReport {
                    status: SolveStatus::BudgetExhausted,
                    ..r
                };
            }
            Ok(sol)
        }
    }
}

/// Projected Newton for a smooth convex function on the box `[lo, hi]`.
/// Coordinates held at a bound by the gradient take a scaled gradient step;
/// the rest a Newton step. The reported gap is the exact linear-minimization
/// gap over the box.
pub fn minimize_box(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    hess: &dyn Fn(&[f64]) -> Vec<Vec<f64>>,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
) -> SolveReport {
    let n = lo.len();
    let clamp = |p: Vec<f64>| -> Vec<f64> {
        p.into_iter()
            .enumerate()
            .map(|(k, v)| v.clamp(lo[k], hi[k]))
            .collect()
    };
    let box_gap = |p: &[f64], g: &[f64]| -> f64 {
        (0..n)
            .map(|k| g[k] * p[k] - (g[k] * lo[k]).min(g[k] * hi[k]))
            .sum::<f64>()
            .max(0.0)
    };
    let mut x: Vec<f64> = (0..n).map(|k| 0.5 * (lo[k] + hi[k])).collect();
    let mut fx = f(&x);
    let mut history = vec![fx];
    let mut status = SolveStatus::BudgetExhausted;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..BOX_MAX_ITER {
        iterations = it;
        let g = grad(&x);
        gap = box_gap(&x, &g);
        if gap <= tol {
            status = SolveStatus::Converged;
            break;
        }
        let h = hess(&x);
        let width = |k: usize| 1e-12 * (1.0 + hi[k] - lo[k]);
        let held: Vec<bool> = (0..n)
            .map(|k| (x[k] <= lo[k] + width(k) && g[k] > 0.0) || (x[k] >= hi[k] - width(k) && g[k] < 0.0))
            .collect();
        let free: Vec<usize> = (0..n).filter(|&k| !held[k]).collect();
        let mut d = vec![0.0; n];
        for k in 0..n {
            if held[k] {
                d[k] = -g[k] / h[k][k].max(f64::MIN_POSITIVE);
            }
        }
        if !free.is_empty() {
            let scale = free.iter().map(|&k| h[k][k].abs()).fold(0.0, f64::max);
            let rows: Vec<Vec<f64>> = free
                .iter()
                .map(|&r| {
                    free.iter()
                        .map(|&c| h[r][c] + if r == c { 1e-14 * scale } else { 0.0 })
                        .collect()
                })
                .collect();
            let rhs: Vec<f64> = free.iter().map(|&k| -g[k]).collect();
            match linalg::solve_square(&rows, &rhs) {
                Some(step) => {
                    for (i, &k) in free.iter().enumerate() {
                        d[k] = step[i];
                    }
                }
                None => {
                    for &k in &free {
                        d[k] = -g[k] / h[k][k].max(f64::MIN_POSITIVE);
                    }
                }
            }
        }
        let gnorm = linalg::norm2(&g);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            let cand = clamp(x.iter().zip(&d).map(|(a, b)| a + t * b).collect());
            let fc = f(&cand);
            let decrease: f64 = g.iter().zip(cand.iter().zip(&x)).map(|(gk, (c, a))| gk * (c - a)).sum();
            // Near the optimum φ is flat to rounding; fall back to the gradient.
            let flat = fc <= fx + 4.0 * f64::EPSILON * fx.abs()
                && box_gap(&cand, &grad(&cand)) < gap
                && linalg::norm2(&grad(&cand)) <= gnorm;
            if fc <= fx + 1e-4 * decrease || flat {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            status = SolveStatus::Stalled;
            break;
        };
        if cand == x {
            status = SolveStatus::Stalled;
            break;
        }
        x = cand;
        fx = fc;
        history.push(fx);
    }
    SolveReport {
        minimizer: x,
        value: fx,
        gap,
        iterations,
        status,
        history,
    }
}

/// Damped Newton steps on a smooth convex function, kept inside `region`.
/// Frank-Wolfe stalls near interior minimizers; this sharpens them.
fn newton_polish(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    hess: &dyn Fn(&[f64]) -> Vec<Vec<f64>>,
    mut x: Vec<f64>,
    region: &ConvexRegion,
) -> Vec<f64> {
    let mut fx = f(&x);
    for _ in 0..50 {
        let g = grad(&x);
        let mut h = hess(&x);
        let scale = h.iter().enumerate().map(|(i, r)| r[i].abs()).fold(0.0, f64::max);
        for (i, r) in h.iter_mut().enumerate() {
            r[i] += 1e-14 * scale.max(f64::MIN_POSITIVE);
        }
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let Some(step) = linalg::solve_square(&h, &neg) else { break };
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-12 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            if region.contains(&cand, 1e-9 * (1.0 + linalg::norm_inf(&cand))) {
                let fc = f(&cand);
                // Near the optimum φ is flat to rounding; fall back to the gradient.
                let flat = fc <= fx + 4.0 * f64::EPSILON * fx.abs()
                    && linalg::norm2(&grad(&cand)) < linalg::norm2(&g);
                if fc < fx || flat {
                    x = cand;
                    fx = fc;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved || t * linalg::norm_inf(&step) < 1e-15 * (1.0 + linalg::norm_inf(&x)) {
            break;
        }
    }
    x
}

/// On a half-line the balance `Σ ν_α (β − α)` must point away from the
/// unbounded end. Scales down the offending side to restore it exactly when
/// the 1D solve leaves a tiny violation.
fn rebalance_1d(nu: &mut [f64], a: &[ExponentVector], beta: &ExponentVector, lower: f64, upper: f64) {
    let b = beta.coords()[0];
    let bal: f64 = nu.iter().zip(a).map(|(v, al)| v * (b - al.coords()[0])).sum();
    let pos: f64 = nu
        .iter()
        .zip(a)
        .map(|(v, al)| (v * (b - al.coords()[0])).max(0.0))
        .sum();
    let neg: f64 = nu
        .iter()
        .zip(a)
        .map(|(v, al)| (-(v * (b - al.coords()[0]))).max(0.0))
        .sum();
    // Upper end infinite needs bal ≤ 0; lower end infinite needs bal ≥ 0.
    let need_nonpos = upper.is_infinite() && bal > 0.0 && neg > 0.0;
    let need_nonneg = lower.is_infinite() && bal < 0.0 && pos > 0.0;
    if need_nonpos {
        let s = neg / pos;
        for (v, al) in nu.iter_mut().zip(a) {
            if b - al.coords()[0] > 0.0 {
                *v *= s;
            }
        }
    } else if need_nonneg {
        let s = pos / neg;
        for (v, al) in nu.iter_mut().zip(a) {
            if b - al.coords()[0] < 0.0 {
                *v *= s;
            }
        }
    }
}

/// `F(v) = c_ᾱ + Σ c_α v_α + Σ_β d_β Π_α v_α^{λ_α}` in anchored
/// coordinates (`v_ᾱ = 1`). Convex on the orthant when every `d_β < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentObjective {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub monomials: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    /// Exponents over the anchored coordinates; the anchor weight is implied.
    pub weights: Vec<f64>,
}

impl Monomial {
    pub fn base(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for (l, x) in self.weights.iter().zip(v) {
            if *l != 0.0 {
                if *x <= 0.0 {
                    return 0.0;
                }
                s += l * x.ln();
            }
        }
        s.exp()
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let m = self.base(v);
        self.weights
            .iter()
            .zip(v)
            .map(|(l, x)| if *l == 0.0 { 0.0 } else { self.coeff * l * m / x })
            .collect()
    }
}

impl MomentObjective {
    /// Builds `F` from a partition with anchor index `anchor` into `A`.
    pub fn from_partition(part: &SupportPartition, anchor: usize) -> Result<Self> {
        if anchor >= part.positive.len() {
            return Err(Error::Input(format!("anchor index {anchor} out of range")));
        }
        let linear = part
            .positive_coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != anchor)
            .map(|(_, c)| *c)
            .collect();
        let monomials = part
            .negative_coeffs
            .iter()
            .zip(&part.barycentric)
            .map(|(d, b)| Monomial {
                coeff: *d,
                weights: b
                    .weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != anchor)
                    .map(|(_, l)| *l)
                    .collect(),
            })
            .collect();
        Ok(Self {
            constant: part.positive_coeffs[anchor],
            linear,
            monomials,
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn hessian(&self, v: &[f64]) -> Vec<Vec<f64>> {
        let m = self.dim();
        let mut h = vec![vec![0.0; m]; m];
        for mono in &self.monomials {
            let b = mono.base(v);
            for i in 0..m {
                let li = mono.weights[i];
                if li == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let lj = mono.weights[j];
                    if lj == 0.0 {
                        continue;
                    }
                    let mut e = li * lj / (v[i] * v[j]);
                    if i == j {
                        e -= li / (v[i] * v[i]);
                    }
                    h[i][j] += mono.coeff * b * e;
                }
            }
        }
        h
    }
}

impl Objective for MomentObjective {
    fn value(&self, v: &[f64]) -> f64 {
        self.constant
            + linalg::dot(&self.linear, v)
            + self
                .monomials
                .iter()
                .map(|m| m.coeff * m.base(v))
                .sum::<f64>()
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g = self.linear.clone();
        for m in &self.monomials {
            for (gi, di) in g.iter_mut().zip(m.gradient(v)) {
                *gi += di;
            }
        }
        g
    }
}

/// Solution of the moment program with the reconstructed power-cone points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSolution {
    pub report: SolveReport,
    /// `z_β = Π v^{λ^{(β)}}` at the minimizer.
    pub z: Vec<f64>,
    pub cone_points: Vec<PowerConePoint>,
    /// `x*` with `φ(x*) = v*`, when the moment map can be inverted.
    pub recovered_x: Option<Vec<f64>>,
    /// `f(x*)`, which differs from the program value by the factor
    /// `e^{⟨ᾱ, x*⟩}`.
    pub f_at_recovered: Option<f64>,
    /// FW weights on the atoms of `Y` (empty on the orthant).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atom_weights: Vec<f64>,
}

/// Minimizes `F` over the moment region: Frank–Wolfe over the atoms of a
/// bounded representation, damped Newton on the positive orthant.
pub fn moment_program(
    part: &SupportPartition,
    y: &MomentRegion,
    tol: f64,
) -> Result<MomentSolution> {
    let diag = signomial::validate_simplex_problem(part);
    if !diag.eligible {
        return Err(Error::Structure(format!(
            "instance is not eligible for the moment program ({}); use the AGE/SAGE paths",
            diag.reasons.join("; ")
        )));
    }
    if part.negative_coeffs.iter().any(|d| *d >= 0.0) {
        return Err(Error::Structure("negative support coefficients must be < 0".into()));
    }
    let obj = MomentObjective::from_partition(part, y.anchor)?;
    check_dim(obj.dim(), y.dim())?;
    let (report, atom_weights) = solve_moment_objective(&obj, y, tol)?;
    let v = &report.minimizer;
    let z: Vec<f64> = obj.monomials.iter().map(|m| m.base(v)).collect();
    let cone_points = obj
        .monomials
        .iter()
        .zip(&part.barycentric)
        .zip(&z)
        .map(|((_, b), zb)| {
            let mut xs = Vec::with_capacity(part.positive.len());
            let mut k = 0;
            for i in 0..part.positive.len() {
                if i == y.anchor {
                    xs.push(1.0);
                } else {
                    xs.push(v[k]);
                    k += 1;
                }
            }
            PowerConePoint {
                x: xs,
                z: *zb,
                weights: b.weights.clone(),
            }
        })
        .collect();
    let recovered_x = if v.iter().all(|t| *t > 0.0) {
        geometry::recover_point(&part.positive, y.anchor, v).ok()
    } else {
        None
    };
    let f_at_recovered = recovered_x
        .as_ref()
        .map(|x| part.to_signomial().eval(x));
    Ok(MomentSolution {
        report,
        z,
        cone_points,
        recovered_x,
        f_at_recovered,
        atom_weights,
    })
}

/// Minimizes a moment objective over a region; shared with the decomposition.
pub fn solve_moment_objective(
    obj: &MomentObjective,
    y: &MomentRegion,
    tol: f64,
) -> Result<(SolveReport, Vec<f64>)> {
    match &y.kind {
        MomentKind::PositiveOrthant { .. } => Ok((minimize_orthant(obj, tol, 500), Vec::new())),
        MomentKind::Polytope { vertices: atoms } | MomentKind::SampledHull { points: atoms } => {
            let fw = minimize_fw(obj, atoms, tol, FW_MAX_ITER)?;
            Ok((fw.report, fw.weights))
        }
    }
}

/// Damped Newton for `F` over the open positive orthant, with a
/// fraction-to-boundary rule. The reported gap is half the squared Newton
/// decrement.
pub fn minimize_orthant(obj: &MomentObjective, tol: f64, max_iter: usize) -> SolveReport {
    let m = obj.dim();
    let mut v = vec![1.0; m];
    let mut fv = obj.value(&v);
    let mut history = vec![fv];
    let mut gap = f64::INFINITY;
    let mut status = SolveStatus::BudgetExhausted;
    let mut iterations = 0;
    if m == 0 {
        return SolveReport {
            minimizer: v,
            value: fv,
            gap: 0.0,
            iterations: 0,
            status: SolveStatus::Converged,
            history,
        };
    }
    for it in 0..max_iter {
        iterations = it;
        let g = obj.gradient(&v);
        let mut h = obj.hessian(&v);
        // Scale-aware regularization keeps the system solvable when F is
        // linear in some coordinates.
        let diag_scale = (0..m).map(|i| h[i][i].abs()).fold(0.0, f64::max);
        let mu = 1e-10 * diag_scale.max(1e-12);
        for (i, row) in h.iter_mut().enumerate() {
            row[i] += mu;
        }
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut step = match linalg::solve_square(&h, &neg_g) {
            Some(s) if linalg::dot(&s, &g) < 0.0 => s,
            _ => {
                // Fall back to a scaled gradient step.
                neg_g.iter().zip(&v).map(|(d, x)| d * x * x).collect()
            }
        };
        let dec = -linalg::dot(&step, &g);
        gap = 0.5 * dec.max(0.0);
        // Gradient scaled by v is the natural optimality measure at the
        // orthant boundary.
        let kkt = g
            .iter()
            .zip(&v)
            .map(|(gi, vi)| (gi * vi).abs())
            .fold(0.0, f64::max);
        // Rounding in g_i v_i scales with the size of the terms, not of F.
        let terms = obj.constant.abs()
            + obj.linear.iter().zip(&v).map(|(c, x)| (c * x).abs()).sum::<f64>()
            + obj.monomials.iter().map(|m| (m.coeff * m.base(&v)).abs()).sum::<f64>();
        if gap <= tol && (kkt <= 1e-9 * (1.0 + terms) || gap <= 1e-15 * (1.0 + terms)) {
            status = SolveStatus::Converged;
            break;
        }
        let mut tmax = 1.0_f64;
        for (s, x) in step.iter().zip(&v) {
            if *s < 0.0 {
                tmax = tmax.min(0.99 * x / -s);
            }
        }
        for s in step.iter_mut() {
            *s *= tmax;
        }
        let mut t = 1.0;
        let slope = linalg::dot(&step, &g);
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = v.iter().zip(&step).map(|(x, s)| x + t * s).collect();
            let fc = obj.value(&cand);
            if fc.is_finite() && fc <= fv + 1e-4 * t * slope {
                v = cand;
                fv = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        history.push(fv);
        iterations = it + 1;
        if !accepted {
            if gap <= tol.max(1e-12 * (1.0 + fv.abs())) {
                status = SolveStatus::Converged;
            }
            break;
        }
        if !fv.is_finite() || fv < -1e15 || linalg::norm_inf(&v) > 1e15 {
            status = SolveStatus::Diverged;
            break;
        }
    }
    SolveReport {
        minimizer: v,
        value: fv,
        gap,
        iterations,
        status,
        history,
    }
}
