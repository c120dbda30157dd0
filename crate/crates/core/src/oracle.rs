//! Brute-force reference computations: grid minima with local refinement,
//! falsification search and 1D root finding. Everything here evaluates `f`
//! at feasible points only, so reported minima are upper bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, ConvexRegion};
use crate::linalg;
use crate::signomial::Signomial;

/// Absolute threshold below which a value counts as negative.
pub const TAU_EVAL: f64 = 1e-9;
/// Cap on grid sizes; resolutions are reduced to fit.
pub const MAX_GRID_POINTS: usize = 2_000_000;

const REFINE_SEEDS: usize = 5;
const REFINE_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMin {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Refined seeds as `(point, value)`, best first.
    pub candidates: Vec<(Vec<f64>, f64)>,
    pub grid_points: usize,
}

/// Minimum of `f` over a bounded region: a grid of the given resolution,
/// then projected-gradient refinement from the best separated grid points.
pub fn grid_min(f: &Signomial, x: &ConvexRegion, resolution: usize) -> Result<GridMin> {
    check_dim(f.dimension(), x.dimension())?;
    if !x.is_bounded() {
        return Err(Error::UnsupportedRegion("grid search needs a bounded region".into()));
    }
    let resolution = resolution.max(1);
    let pts = grid(x, resolution);
    let diam = diameter(&pts);
    let spacing = if diam > 0.0 { diam / resolution as f64 } else { 0.0 };
    let mut scored: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, p)| (f.eval(p), i)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut seeds: Vec<usize> = Vec::new();
    for (_, i) in &scored {
        if seeds.len() == REFINE_SEEDS {
            break;
        }
        let far = seeds
            .iter()
            .all(|s| linalg::norm_inf(&linalg::sub(&pts[*s], &pts[*i])) > 2.0 * spacing);
        if far || spacing == 0.0 && seeds.is_empty() {
            seeds.push(*i);
        }
    }
    let mut candidates: Vec<(Vec<f64>, f64)> = seeds
        .iter()
        .map(|&i| refine(f, x, pts[i].clone(), spacing.max(1e-6)))
        .collect();
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (argmin, value) = candidates[0].clone();
    Ok(GridMin {
        value,
        argmin,
        candidates,
        grid_points: pts.len(),
    })
}

fn diameter(pts: &[Vec<f64>]) -> f64 {
    let Some(first) = pts.first() else { return 0.0 };
    let d = first.len();
    (0..d)
        .map(|k| {
            let lo = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn tensor_grid(lo: &[f64], hi: &[f64], res: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let mut res = res;
    while (res + 1).pow(d as u32) > MAX_GRID_POINTS && res > 1 {
        res -= 1;
    }
    let n = res + 1;
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|k| {
                    let i = idx % n;
                    idx /= n;
                    lo[k] + (hi[k] - lo[k]) * i as f64 / res as f64
                })
                .collect()
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn grid(x: &ConvexRegion, res: usize) -> Vec<Vec<f64>> {
    match x {
        ConvexRegion::Interval { lower, upper } => tensor_grid(&[*lower], &[*upper], res),
        ConvexRegion::VertexPolytope { vertices, .. } => {
            if let Some((lo, hi)) = geometry::box_bounds(vertices) {
                return tensor_grid(&lo, &hi, res);
            }
            let m = vertices.len();
            let mut depth = res;
            while depth > 1 && binomial(depth + m - 1, m - 1) > MAX_GRID_POINTS as f64 / 10.0 {
                depth -= 1;
            }
            geometry::barycentric_grid(vertices, depth)
        }
        ConvexRegion::FullSpace { .. } => Vec::new(),
    }
}

fn project(x: &ConvexRegion, p: &[f64]) -> Vec<f64> {
    match x {
        ConvexRegion::FullSpace { .. } => p.to_vec(),
        ConvexRegion::Interval { lower, upper } => vec![p[0].clamp(*lower, *upper)],
        ConvexRegion::VertexPolytope { vertices, rays } => {
            if rays.is_empty() {
                if let Some((lo, hi)) = geometry::box_bounds(vertices) {
                    return p.iter().zip(lo.iter().zip(&hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect();
                }
            }
            if rays.is_empty() && strictly_inside_simplex(vertices, p) {
                return p.to_vec();
            }
            geometry::project_onto_polytope(vertices, rays, p).0
        }
    }
}

/// Exact barycentric test for a full-dimensional simplex; `false` otherwise.
fn strictly_inside_simplex(vertices: &[Vec<f64>], p: &[f64]) -> bool {
    let n = p.len();
    if vertices.len() != n + 1 {
        return false;
    }
    let mut rows: Vec<Vec<f64>> = (0..n).map(|k| vertices.iter().map(|v| v[k]).collect()).collect();
    rows.push(vec![1.0; n + 1]);
    let mut rhs = p.to_vec();
    rhs.push(1.0);
    linalg::solve_square(&rows, &rhs).is_some_and(|w| w.iter().all(|v| *v >= 0.0))
}

fn fd_gradient(f: &Signomial, p: &[f64]) -> Vec<f64> {
    (0..p.len())
        .map(|k| {
            let h = 1e-6 * (1.0 + p[k].abs());
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[k] += h;
            b[k] -= h;
            (f.eval(&a) - f.eval(&b)) / (2.0 * h)
        })
        .collect()
}

/// Projected gradient descent with backtracking from `start`.
fn refine(f: &Signomial, x: &ConvexRegion, start: Vec<f64>, step0: f64) -> (Vec<f64>, f64) {
    let mut p = start;
    let mut fp = f.eval(&p);
    let mut step = step0;
    for _ in 0..REFINE_STEPS {
        let g = fd_gradient(f, &p);
        let gn = linalg::norm2(&g);
        if !(gn > 0.0) || !gn.is_finite() {
            break;
        }
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - step * b / gn).collect();
            let q = project(x, &trial);
            let fq = f.eval(&q);
            if fq < fp {
                p = q;
                fp = fq;
                step *= 2.0;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (p, fp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMin {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub half_width: f64,
    /// The minimizer sat on the box boundary after all enlargements.
    pub boundary_limited: bool,
}

/// Minimum estimate over `R^n` by grid search on `[−w, w]^n`, doubling `w`
/// while the minimizer sits on the boundary.
pub fn global_min_estimate(f: &Signomial, w: f64, resolution: usize) -> GlobalMin {
    let n = f.dimension();
    let mut w = w.max(1e-3);
    let mut best: Option<GlobalMin> = None;
    for _ in 0..4 {
        let lo = vec![-w; n];
        let hi = vec![w; n];
        let bx = ConvexRegion::cuboid(&lo, &hi).expect("valid box");
        let g = grid_min(f, &bx, resolution).expect("bounded box");
        let spacing = 2.0 * w / resolution.max(1) as f64;
        let on_edge = g.argmin.iter().any(|v| (v.abs() - w).abs() <= spacing);
        let cand = GlobalMin {
            value: g.value,
            argmin: g.argmin,
            half_width: w,
            boundary_limited: on_edge,
        };
        let better = best.as_ref().is_none_or(|b| cand.value < b.value);
        if better {
            best = Some(cand);
        }
        if !on_edge {
            break;
        }
        w *= 2.0;
    }
    best.expect("one round")
}

/// `count` points of `X`: a grid for bounded regions, random points in a
/// growing window otherwise.
pub fn sample_points(x: &ConvexRegion, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let count = count.max(1);
    let n = x.dimension();
    if x.is_bounded() {
        let mut res = 1;
        loop {
            let g = grid(x, res);
            if g.len() >= count || res > 4096 {
                return g;
            }
            res *= 2;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    match x {
        ConvexRegion::FullSpace { .. } => {
            for i in 0..count {
                let w = window(i, count);
                out.push((0..n).map(|_| rng.gen_range(-w..=w)).collect());
            }
        }
        ConvexRegion::Interval { lower, upper } => {
            for i in 0..count {
                let w = window(i, count);
                let v = match (lower.is_finite(), upper.is_finite()) {
                    (true, false) => lower + rng.gen_range(0.0..=w),
                    (false, true) => upper - rng.gen_range(0.0..=w),
                    _ => rng.gen_range(-w..=w),
                };
                out.push(vec![v]);
            }
        }
        ConvexRegion::VertexPolytope { vertices, rays } => {
            for i in 0..count {
                let w = window(i, count);
                let mut lam: Vec<f64> = (0..vertices.len()).map(|_| rng.gen_range(0.0..1.0_f64)).collect();
                let s: f64 = lam.iter().sum();
                lam.iter_mut().for_each(|l| *l /= s);
                let mut p = vec![0.0; n];
                for (l, v) in lam.iter().zip(vertices) {
                    for (pk, vk) in p.iter_mut().zip(v) {
                        *pk += l * vk;
                    }
                }
                for r in rays {
                    let t = rng.gen_range(0.0..=w);
                    for (pk, rk) in p.iter_mut().zip(r) {
                        *pk += t * rk;
                    }
                }
                out.push(p);
            }
        }
    }
    out
}

/// Sampling window that grows from 1 to about 100 across the sample.
fn window(i: usize, count: usize) -> f64 {
    10f64.powf(2.0 * i as f64 / count.max(2) as f64)
}

/// Searches for `x ∈ X` with `f(x) < −τ_eval`. Returns the best violator.
pub fn falsify(f: &Signomial, x: &ConvexRegion, budget: usize, seed: u64) -> Option<Vec<f64>> {
    let budget = budget.max(16);
    let n = f.dimension();
    let bad = |v: f64| v < -TAU_EVAL;
    if x.is_bounded() {
        let res = ((budget as f64).powf(1.0 / n.max(1) as f64)).floor().max(2.0) as usize;
        let g = grid_min(f, x, res).ok()?;
        return bad(g.value).then_some(g.argmin);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut consider = |p: Vec<f64>, v: f64| {
        if bad(v) && best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((p, v));
        }
    };
    match x {
        ConvexRegion::FullSpace { .. } if n <= 3 => {
            let res = ((budget as f64).powf(1.0 / n as f64)).floor().max(4.0) as usize;
            let g = global_min_estimate(f, 2.0, res);
            consider(g.argmin, g.value);
        }
        ConvexRegion::Interval { lower, upper } => {
            for w in [1.0, 10.0, 100.0] {
                let (lo, hi) = match (lower.is_finite(), upper.is_finite()) {
                    (true, false) => (*lower, lower + w),
                    (false, true) => (upper - w, *upper),
                    _ => (-w, w),
                };
                let win = ConvexRegion::interval(lo, hi).expect("finite window");
                if let Ok(g) = grid_min(f, &win, budget / 3) {
                    consider(g.argmin, g.value);
                }
            }
        }
        _ => {}
    }
    for p in sample_points(x, budget, seed) {
        let v = f.eval(&p);
        if v < 0.0 {
            let (q, fq) = refine(f, x, p.clone(), 0.1);
            consider(q, fq);
        }
        consider(p, v);
    }
    best.map(|b| b.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    pub multiplicity: usize,
}

/// Real roots of a univariate signomial on `[lo, hi]` with multiplicities,
/// from sign changes and touching minima of `|f|` on a grid.
pub fn find_roots_1d(f: &Signomial, lo: f64, hi: f64, resolution: usize) -> Result<Vec<Root>> {
    check_dim(1, f.dimension())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Input(format!("bad root interval [{lo}, {hi}]")));
    }
    let n = resolution.max(2);
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|x| f.eval(&[*x])).collect();
    let df = f.derivative(0);
    let mut found: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            found.push(xs[i]);
        } else if a * b < 0.0 {
            found.push(bisect(|t| f.eval(&[t]), xs[i], xs[i + 1]));
        }
    }
    if vals[n] == 0.0 {
        found.push(xs[n]);
    }
    // Touching roots: interior local minima of |f| where f' changes sign.
    for i in 1..n {
        let (l, m, r) = (vals[i - 1].abs(), vals[i].abs(), vals[i + 1].abs());
        if m <= l && m <= r && vals[i - 1] * vals[i + 1] > 0.0 {
            let d0 = df.eval(&[xs[i - 1]]);
            let d1 = df.eval(&[xs[i + 1]]);
            if d0 * d1 < 0.0 {
                let t = bisect(|s| df.eval(&[s]), xs[i - 1], xs[i + 1]);
                let scale = term_scale(f, t, 0);
                if f.eval(&[t]).abs() <= 1e-9 * scale.max(1.0) {
                    found.push(t);
                }
            }
        }
    }
    found.sort_by(f64::total_cmp);
    let mut roots: Vec<Root> = Vec::new();
    for t in found {
        if roots.last().is_some_and(|r| (r.x - t).abs() <= 1e-6 * (1.0 + t.abs())) {
            continue;
        }
        roots.push(Root {
            x: t,
            multiplicity: multiplicity(f, t),
        });
    }
    Ok(roots)
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `Σ |c_i| |α_i|^k e^{α_i x}`: the size of the terms of the `k`-th derivative.
fn term_scale(f: &Signomial, x: f64, k: i32) -> f64 {
    f.terms()
        .iter()
        .map(|t| {
            let a = t.exponent.coords()[0];
            t.coeff.abs() * a.abs().powi(k) * (a * x).exp()
        })
        .sum()
}

fn multiplicity(f: &Signomial, x: f64) -> usize {
    let mut g = f.derivative(0);
    for k in 1..8_i32 {
        let scale = term_scale(f, x, k);
        if scale == 0.0 || g.eval(&[x]).abs() > 1e-5 * scale {
            return k as usize;
        }
        g = g.derivative(0);
    }
    8
}
