//! Feasibility regions `X`, their support functions and recession cones, and
//! the moment map `φ(x) = (exp⟨α − ᾱ, x⟩)_{α ≠ ᾱ}` into the exponential
//! moment space.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::signomial::{self, ExponentVector};

/// Directions with `⟨y, r⟩` above this on some ray get `σ_X(y) = +∞`.
pub const TAU_RAY: f64 = 1e-10;
/// Residual tolerance for membership in the image of the moment map.
pub const TAU_LIN: f64 = 1e-8;
/// Largest exponent argument accepted by the moment map.
pub const EXP_LIMIT: f64 = 700.0;

/// A nonempty convex region. Polytopes are given by vertices and recession
/// rays.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexRegion {
    FullSpace { dim: usize },
    Interval { lower: f64, upper: f64 },
    VertexPolytope { vertices: Vec<Vec<f64>>, rays: Vec<Vec<f64>> },
}

/// One-dimensional closed convex cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cone1D {
    Line,
    Zero,
    NonNegative,
    NonPositive,
}

impl Cone1D {
    pub fn dual(self) -> Cone1D {
        match self {
            Cone1D::Line => Cone1D::Zero,
            Cone1D::Zero => Cone1D::Line,
            other => other,
        }
    }

    /// The cone as an interval `[lo, hi]`.
    pub fn as_interval(self) -> (f64, f64) {
        match self {
            Cone1D::Line => (f64::NEG_INFINITY, f64::INFINITY),
            Cone1D::Zero => (0.0, 0.0),
            Cone1D::NonNegative => (0.0, f64::INFINITY),
            Cone1D::NonPositive => (f64::NEG_INFINITY, 0.0),
        }
    }
}

impl ConvexRegion {
    pub fn full_space(dim: usize) -> Self {
        ConvexRegion::FullSpace { dim }
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::Input(format!("invalid interval [{lower}, {upper}]")));
        }
        if lower == upper && lower.is_infinite() {
            return Err(Error::Input("degenerate infinite interval".into()));
        }
        Ok(ConvexRegion::Interval { lower, upper })
    }

    pub fn polytope(vertices: Vec<Vec<f64>>, rays: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::Input("polytope needs at least one vertex".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::Input("polytope dimension must be positive".into()));
        }
        for p in vertices.iter().chain(&rays) {
            check_dim(n, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("non-finite polytope coordinate".into()));
            }
        }
        if rays.iter().any(|r| r.iter().all(|v| *v == 0.0)) {
            return Err(Error::Input("rays must be nonzero".into()));
        }
        Ok(ConvexRegion::VertexPolytope { vertices, rays })
    }

    pub fn point(p: Vec<f64>) -> Self {
        ConvexRegion::VertexPolytope {
            vertices: vec![p],
            rays: Vec::new(),
        }
    }

    /// Axis-aligned box `Π [lo_i, hi_i]` as a vertex polytope.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let n = lo.len();
        let vertices = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                    .collect()
            })
            .collect();
        Self::polytope(vertices, Vec::new())
    }

    pub fn dimension(&self) -> usize {
        match self {
            ConvexRegion::FullSpace { dim } => *dim,
            ConvexRegion::Interval { .. } => 1,
            ConvexRegion::VertexPolytope { vertices, .. } => vertices[0].len(),
        }
    }

    /// Lower and upper corners when the region is an axis-aligned box.
    pub fn as_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            ConvexRegion::VertexPolytope { vertices, rays } if rays.is_empty() => box_bounds(vertices),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexRegion::FullSpace { .. } => false,
            ConvexRegion::Interval { lower, upper } => lower.is_finite() && upper.is_finite(),
            ConvexRegion::VertexPolytope { rays, .. } => rays.is_empty(),
        }
    }

    /// Vertices and rays of the region in the common V-representation.
    pub fn vertices_and_rays(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        match self {
            ConvexRegion::FullSpace { dim } => {
                let mut rays = Vec::with_capacity(2 * dim);
                for i in 0..*dim {
                    for s in [1.0, -1.0] {
                        let mut r = vec![0.0; *dim];
                        r[i] = s;
                        rays.push(r);
                    }
                }
                (vec![vec![0.0; *dim]], rays)
            }
            ConvexRegion::Interval { lower, upper } => {
                let mut v = Vec::new();
                let mut r = Vec::new();
                if lower.is_finite() {
                    v.push(vec![*lower]);
                } else {
                    r.push(vec![-1.0]);
                }
                if upper.is_finite() {
                    if upper != lower {
                        v.push(vec![*upper]);
                    }
                } else {
                    r.push(vec![1.0]);
                }
                if v.is_empty() {
                    v.push(vec![0.0]);
                }
                (v, r)
            }
            ConvexRegion::VertexPolytope { vertices, rays } => (vertices.clone(), rays.clone()),
        }
    }

    /// `σ_X(y) = sup { ⟨y, x⟩ : x ∈ X }`, possibly `+∞`.
    pub fn support_function(&self, y: &[f64]) -> f64 {
        match self {
            ConvexRegion::FullSpace { .. } => {
                if linalg::norm_inf(y) <= TAU_RAY {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ConvexRegion::Interval { lower, upper } => {
                let y = y[0];
                if y > TAU_RAY {
                    if upper.is_finite() {
                        y * upper
                    } else {
                        f64::INFINITY
                    }
                } else if y < -TAU_RAY {
                    if lower.is_finite() {
                        y * lower
                    } else {
                        f64::INFINITY
                    }
                } else {
                    // |y| within tolerance: ignore the unbounded ends.
                    [*lower, *upper]
                        .iter()
                        .filter(|e| e.is_finite())
                        .map(|e| y * e)
                        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
                        .unwrap_or(0.0)
                }
            }
            ConvexRegion::VertexPolytope { vertices, rays } => {
                if rays.iter().any(|r| linalg::dot(y, r) > TAU_RAY) {
                    return f64::INFINITY;
                }
                vertices
                    .iter()
                    .map(|v| linalg::dot(y, v))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Membership test. Bounded polytopes with affinely independent vertex
    /// sets use barycentric coordinates; other polytopes a projection.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        match self {
            ConvexRegion::FullSpace { .. } => true,
            ConvexRegion::Interval { lower, upper } => x[0] >= lower - tol && x[0] <= upper + tol,
            ConvexRegion::VertexPolytope { vertices, rays } => {
                polytope_distance(vertices, rays, x) <= tol
            }
        }
    }

    /// Deterministic grid of points of a bounded region. Intervals get
    /// `depth + 1` uniform points; polytopes a barycentric grid of the given
    /// depth over their vertex list (vertices always included).
    pub fn sample_grid(&self, depth: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            ConvexRegion::FullSpace { .. } => Err(Error::UnsupportedRegion(
                "cannot sample an unbounded region".into(),
            )),
            ConvexRegion::Interval { lower, upper } => {
                if !self.is_bounded() {
                    return Err(Error::UnsupportedRegion(
                        "cannot sample an unbounded interval".into(),
                    ));
                }
                if depth == 0 || lower == upper {
                    let mut v = vec![vec![*lower]];
                    if upper != lower {
                        v.push(vec![*upper]);
                    }
                    return Ok(v);
                }
                Ok((0..=depth)
                    .map(|i| vec![lower + (upper - lower) * i as f64 / depth as f64])
                    .collect())
            }
            ConvexRegion::VertexPolytope { vertices, rays } => {
                if !rays.is_empty() {
                    return Err(Error::UnsupportedRegion(
                        "cannot sample a polytope with recession rays".into(),
                    ));
                }
                Ok(barycentric_grid(vertices, depth))
            }
        }
    }
}

/// All points `Σ (k_i / depth) v_i` with nonnegative integers `k` summing to
/// `depth`.
pub fn barycentric_grid(vertices: &[Vec<f64>], depth: usize) -> Vec<Vec<f64>> {
    let m = vertices.len();
    let n = vertices[0].len();
    if m == 1 || depth == 0 {
        return vertices.to_vec();
    }
    let mut out = Vec::new();
    let mut counts = vec![0usize; m];
    fn rec(
        i: usize,
        left: usize,
        counts: &mut [usize],
        vertices: &[Vec<f64>],
        depth: usize,
        n: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        let m = counts.len();
        if i == m - 1 {
            counts[i] = left;
            let mut p = vec![0.0; n];
            for (k, v) in counts.iter().zip(vertices) {
                if *k > 0 {
                    let w = *k as f64 / depth as f64;
                    for (pj, vj) in p.iter_mut().zip(v) {
                        *pj += w * vj;
                    }
                }
            }
            out.push(p);
            return;
        }
        for k in (0..=left).rev() {
            counts[i] = k;
            rec(i + 1, left - k, counts, vertices, depth, n, out);
        }
    }
    rec(0, depth, &mut counts, vertices, depth, n, &mut out);
    out
}

/// Euclidean distance from `x` to `conv(V) + cone(R)`, computed by an
/// active-set projected-gradient scheme on the combination weights.
/// Axis-aligned box spanned by the vertices, when the vertex set is exactly
/// its corners.
pub(crate) fn box_bounds(vertices: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let d = vertices.first()?.len();
    let lo: Vec<f64> = (0..d).map(|k| vertices.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|k| vertices.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    if vertices.len() != 1 << d {
        return None;
    }
    let corner = |v: &Vec<f64>| (0..d).all(|k| v[k] == lo[k] || v[k] == hi[k]);
    if !vertices.iter().all(corner) {
        return None;
    }
    let mut codes: Vec<usize> = vertices
        .iter()
        .map(|v| (0..d).fold(0, |acc, k| acc | usize::from(v[k] == hi[k] && hi[k] != lo[k]) << k))
        .collect();
    codes.sort_unstable();
    codes.dedup();
    let flat = (0..d).filter(|&k| hi[k] == lo[k]).count();
    if codes.len() != (1 << (d - flat)) {
        return None;
    }
    Some((lo, hi))
}

fn polytope_distance(vertices: &[Vec<f64>], rays: &[Vec<f64>], x: &[f64]) -> f64 {
    let n = x.len();
    if rays.is_empty() && vertices.len() <= n + 1 {
        let pts: Vec<ExponentVector> = vertices
            .iter()
            .map(|v| ExponentVector::new(v.clone()).expect("finite"))
            .collect();
        if signomial::is_affinely_independent(&pts) {
            let target = ExponentVector::new(x.to_vec()).expect("finite");
            if let Ok(b) = signomial::barycentric(&pts, &target) {
                if b.in_hull {
                    return b.residual;
                }
            }
        }
    }
    project_onto_polytope(vertices, rays, x).1
}

/// Projection onto `conv(V) + cone(R)`; returns (point, distance).
pub(crate) fn project_onto_polytope(
    vertices: &[Vec<f64>],
    rays: &[Vec<f64>],
    x: &[f64],
) -> (Vec<f64>, f64) {
    let m = vertices.len();
    let k = rays.len();
    let n = x.len();
    let point = |theta: &[f64], mu: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; n];
        for (t, v) in theta.iter().zip(vertices) {
            for (pj, vj) in p.iter_mut().zip(v) {
                *pj += t * vj;
            }
        }
        for (s, r) in mu.iter().zip(rays) {
            for (pj, rj) in p.iter_mut().zip(r) {
                *pj += s * rj;
            }
        }
        p
    };
    let mut theta = vec![1.0 / m as f64; m];
    let mut mu = vec![0.0; k];
    let lip = vertices
        .iter()
        .chain(rays)
        .map(|v| v.iter().map(|a| a * a).sum::<f64>())
        .sum::<f64>()
        .max(1e-300);
    let step = 1.0 / lip;
    let mut best = f64::INFINITY;
    // Accelerated projected gradient on ½‖Vθ + Rμ − x‖².
    let (mut theta_prev, mut mu_prev) = (theta.clone(), mu.clone());
    let mut t_acc = 1.0_f64;
    for it in 0..20_000 {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
        let beta = (t_acc - 1.0) / t_next;
        let yt: Vec<f64> = theta
            .iter()
            .zip(&theta_prev)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        let ym: Vec<f64> = mu.iter().zip(&mu_prev).map(|(a, b)| a + beta * (a - b)).collect();
        let r = linalg::sub(&point(&yt, &ym), x);
        let gt: Vec<f64> = vertices.iter().map(|v| linalg::dot(v, &r)).collect();
        let gm: Vec<f64> = rays.iter().map(|v| linalg::dot(v, &r)).collect();
        theta_prev = theta;
        mu_prev = mu;
        let raw: Vec<f64> = yt.iter().zip(&gt).map(|(a, g)| a - step * g).collect();
        theta = project_simplex(&raw, 1.0);
        mu = ym
            .iter()
            .zip(&gm)
            .map(|(a, g)| (a - step * g).max(0.0))
            .collect();
        t_acc = t_next;
        if it % 50 == 0 {
            let d = linalg::norm2(&linalg::sub(&point(&theta, &mu), x));
            if d < 1e-13 || (best.is_finite() && (best - d).abs() <= 1e-15 * (1.0 + best)) {
                best = best.min(d);
                break;
            }
            best = best.min(d);
        }
    }
    let p = point(&theta, &mu);
    let d = linalg::norm2(&linalg::sub(&p, x));
    (p, d.min(best))
}

/// Euclidean projection onto `{w ≥ 0, Σ w = total}`.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    if total <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - total) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Recession cone of a one-dimensional region and its dual.
pub fn recession_dual_1d(x: &ConvexRegion) -> Result<(Cone1D, Cone1D)> {
    let rec = match x {
        ConvexRegion::FullSpace { dim: 1 } => Cone1D::Line,
        ConvexRegion::Interval { lower, upper } => {
            match (lower.is_finite(), upper.is_finite()) {
                (true, true) => Cone1D::Zero,
                (true, false) => Cone1D::NonNegative,
                (false, true) => Cone1D::NonPositive,
                (false, false) => Cone1D::Line,
            }
        }
        ConvexRegion::VertexPolytope { vertices, rays } if vertices[0].len() == 1 => {
            let pos = rays.iter().any(|r| r[0] > 0.0);
            let neg = rays.iter().any(|r| r[0] < 0.0);
            match (pos, neg) {
                (true, true) => Cone1D::Line,
                (true, false) => Cone1D::NonNegative,
                (false, true) => Cone1D::NonPositive,
                (false, false) => Cone1D::Zero,
            }
        }
        _ => {
            return Err(Error::Input(
                "recession cone is only computed for one-dimensional regions".into(),
            ))
        }
    };
    Ok((rec, rec.dual()))
}

/// Default anchor: the lexicographically smallest exponent.
pub fn default_anchor(a: &[ExponentVector]) -> usize {
    (0..a.len())
        .min_by(|&i, &j| a[i].lex_cmp(&a[j]))
        .unwrap_or(0)
}

/// `φ(x) = (exp⟨α − ᾱ, x⟩)_{α ∈ A ∖ {ᾱ}}`, in the order of `a`.
pub fn moment_map(a: &[ExponentVector], anchor: usize, x: &[f64]) -> Result<Vec<f64>> {
    let bar = &a[anchor];
    check_dim(bar.dim(), x.len())?;
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != anchor)
        .map(|(_, alpha)| {
            let arg = alpha.dot(x) - bar.dot(x);
            if arg > EXP_LIMIT {
                Err(Error::Range(arg))
            } else {
                Ok(arg.exp())
            }
        })
        .collect()
}

/// Inverts the moment map: solves `⟨α − ᾱ, x⟩ = ln v_α`. Underdetermined
/// systems return the minimum-norm solution.
pub fn recover_point(a: &[ExponentVector], anchor: usize, v: &[f64]) -> Result<Vec<f64>> {
    let bar = &a[anchor];
    let n = bar.dim();
    check_dim(a.len() - 1, v.len())?;
    if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::Input(format!("moment coordinate {bad} is not positive")));
    }
    let rows: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != anchor)
        .map(|(_, alpha)| linalg::sub(alpha.coords(), bar.coords()))
        .collect();
    if linalg::rank(&rows, linalg::RANK_PIVOT_REL) < rows.len() {
        return Err(Error::Structure(
            "exponent differences are linearly dependent".into(),
        ));
    }
    let rhs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    if rows.len() == n {
        return linalg::solve_square(&rows, &rhs)
            .ok_or_else(|| Error::Structure("singular moment system".into()));
    }
    let (x, residual) = linalg::least_squares(&rows, n, &rhs);
    if residual > TAU_LIN {
        return Err(Error::NotInImage { residual });
    }
    Ok(x)
}

/// The exponential moment space `Y = φ(X)` or a representation of it, in
/// anchored coordinates indexed by `A ∖ {ᾱ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRegion {
    pub anchor: usize,
    pub kind: MomentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MomentKind {
    /// Image of the whole space: the open positive orthant.
    PositiveOrthant { dim: usize },
    /// Convex hull of the listed points (exact description).
    Polytope { vertices: Vec<Vec<f64>> },
    /// Convex hull of sampled images (inner approximation of `Y`).
    SampledHull { points: Vec<Vec<f64>> },
}

impl MomentRegion {
    pub fn dim(&self) -> usize {
        match &self.kind {
            MomentKind::PositiveOrthant { dim } => *dim,
            MomentKind::Polytope { vertices: p } | MomentKind::SampledHull { points: p } => {
                p.first().map_or(0, |v| v.len())
            }
        }
    }

    /// Atoms of a bounded representation; `None` for the orthant.
    pub fn atoms(&self) -> Option<&[Vec<f64>]> {
        match &self.kind {
            MomentKind::PositiveOrthant { .. } => None,
            MomentKind::Polytope { vertices: p } | MomentKind::SampledHull { points: p } => {
                Some(p)
            }
        }
    }

    /// A representative interior point: the atom centroid, or all ones.
    pub fn centroid(&self) -> Vec<f64> {
        match self.atoms() {
            None => vec![1.0; self.dim()],
            Some(p) => {
                let mut c = vec![0.0; self.dim()];
                for q in p {
                    for (ci, qi) in c.iter_mut().zip(q) {
                        *ci += qi / p.len() as f64;
                    }
                }
                c
            }
        }
    }

    /// Builds a region directly in moment coordinates.
    pub fn from_vertices(anchor: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Input("moment polytope needs a vertex".into()));
        }
        let d = vertices[0].len();
        for v in &vertices {
            check_dim(d, v.len())?;
            if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::Input(
                    "moment coordinates must be finite and strictly positive".into(),
                ));
            }
        }
        Ok(Self {
            anchor,
            kind: MomentKind::Polytope { vertices },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MomentMode {
    /// Images of the vertices only; exact when `φ` maps `X` onto the hull of
    /// its vertex images (always the case in one dimension).
    ExactPolytopeVertices,
    /// Images of a barycentric grid of the given depth.
    Sample { depth: usize },
}

/// Default grid depth for sampled moment regions.
pub const DEFAULT_GRID_DEPTH: usize = 10;

pub fn build_moment_region(
    x: &ConvexRegion,
    a: &[ExponentVector],
    anchor: usize,
    mode: MomentMode,
) -> Result<MomentRegion> {
    if anchor >= a.len() {
        return Err(Error::Input(format!("anchor index {anchor} out of range")));
    }
    check_dim(a[anchor].dim(), x.dimension())?;
    if let ConvexRegion::FullSpace { .. } = x {
        return Ok(MomentRegion {
            anchor,
            kind: MomentKind::PositiveOrthant { dim: a.len() - 1 },
        });
    }
    if !x.is_bounded() {
        return Err(Error::UnsupportedRegion(
            "moment regions are built for bounded regions or the full space".into(),
        ));
    }
    let pts = match mode {
        MomentMode::ExactPolytopeVertices => x.vertices_and_rays().0,
        MomentMode::Sample { depth } => x.sample_grid(depth)?,
    };
    let images = pts
        .iter()
        .map(|p| moment_map(a, anchor, p))
        .collect::<Result<Vec<_>>>()?;
    let kind = match mode {
        MomentMode::ExactPolytopeVertices => MomentKind::Polytope { vertices: images },
        MomentMode::Sample { .. } => MomentKind::SampledHull { points: images },
    };
    Ok(MomentRegion { anchor, kind })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AConvexity {
    /// No violation among the tested pairs. Not a proof.
    Consistent { pairs_tested: usize },
    Refuted {
        x1: Vec<f64>,
        x2: Vec<f64>,
        midpoint_moment: Vec<f64>,
        recovered: Vec<f64>,
        distance: f64,
    },
}

/// Heuristic A-convexity test: for sampled pairs `x₁, x₂ ∈ X` the moment
/// midpoint `(φ(x₁) + φ(x₂)) / 2` must pull back into `X`.
pub fn a_convexity_diagnostic(
    x: &ConvexRegion,
    a: &[ExponentVector],
    anchor: usize,
    samples: usize,
) -> Result<AConvexity> {
    if !x.is_bounded() {
        return Err(Error::UnsupportedRegion(
            "A-convexity diagnostic needs a bounded region".into(),
        ));
    }
    if a.len() - 1 != x.dimension() {
        return Err(Error::UnsupportedRegion(
            "A-convexity diagnostic needs |A| - 1 equal to the dimension".into(),
        ));
    }
    // Smallest grid depth giving at least `samples` points.
    let mut depth = 1;
    let mut grid = x.sample_grid(depth)?;
    while grid.len() < samples && depth < 200 {
        depth += 1;
        grid = x.sample_grid(depth)?;
    }
    let images = grid
        .iter()
        .map(|p| moment_map(a, anchor, p))
        .collect::<Result<Vec<_>>>()?;
    let scale = grid.iter().map(|p| linalg::norm_inf(p)).fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let mut tested = 0;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let mid: Vec<f64> = images[i]
                .iter()
                .zip(&images[j])
                .map(|(p, q)| 0.5 * (p + q))
                .collect();
            let rec = recover_point(a, anchor, &mid)?;
            tested += 1;
            if !x.contains(&rec, tol) {
                let distance = match x {
                    ConvexRegion::VertexPolytope { vertices, rays } => {
                        project_onto_polytope(vertices, rays, &rec).1
                    }
                    ConvexRegion::Interval { lower, upper } => {
                        (lower - rec[0]).max(rec[0] - upper).max(0.0)
                    }
                    ConvexRegion::FullSpace { .. } => 0.0,
                };
                return Ok(AConvexity::Refuted {
                    x1: grid[i].clone(),
                    x2: grid[j].clone(),
                    midpoint_moment: mid,
                    recovered: rec,
                    distance,
                });
            }
        }
    }
    Ok(AConvexity::Consistent {
        pairs_tested: tested,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RegionJson {
    Fullspace {
        dimension: usize,
    },
    Interval {
        #[serde(default)]
        lower: Option<BoundJson>,
        #[serde(default)]
        upper: Option<BoundJson>,
    },
    Vpolytope {
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        rays: Vec<Vec<f64>>,
    },
}

/// Interval bound: a number, or `"inf"` / `"-inf"` (also `null` or absent).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BoundJson {
    Num(f64),
    Text(String),
}

impl BoundJson {
    fn value(&self, default: f64) -> Result<f64> {
        match self {
            BoundJson::Num(v) => Ok(*v),
            BoundJson::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Input(format!("invalid bound {other:?}"))),
            },
        }
        .map(|v| if v.is_nan() { default } else { v })
    }

    fn from_value(v: f64) -> Option<BoundJson> {
        if v.is_finite() {
            Some(BoundJson::Num(v))
        } else if v > 0.0 {
            Some(BoundJson::Text("inf".into()))
        } else {
            Some(BoundJson::Text("-inf".into()))
        }
    }
}

impl Serialize for ConvexRegion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match self {
            ConvexRegion::FullSpace { dim } => RegionJson::Fullspace { dimension: *dim },
            ConvexRegion::Interval { lower, upper } => RegionJson::Interval {
                lower: BoundJson::from_value(*lower),
                upper: BoundJson::from_value(*upper),
            },
            ConvexRegion::VertexPolytope { vertices, rays } => RegionJson::Vpolytope {
                vertices: vertices.clone(),
                rays: rays.clone(),
            },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexRegion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RegionJson::deserialize(d)?;
        let region = match raw {
            RegionJson::Fullspace { dimension } => {
                if dimension == 0 {
                    return Err(D::Error::custom("dimension must be positive"));
                }
                Ok(ConvexRegion::full_space(dimension))
            }
            RegionJson::Interval { lower, upper } => {
                let lo = lower
                    .map_or(Ok(f64::NEG_INFINITY), |b| b.value(f64::NEG_INFINITY))
                    .map_err(D::Error::custom)?;
                let hi = upper
                    .map_or(Ok(f64::INFINITY), |b| b.value(f64::INFINITY))
                    .map_err(D::Error::custom)?;
                ConvexRegion::interval(lo, hi)
            }
            RegionJson::Vpolytope { vertices, rays } => ConvexRegion::polytope(vertices, rays),
        };
        region.map_err(D::Error::custom)
    }
}
