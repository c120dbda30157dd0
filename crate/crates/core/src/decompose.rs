//! Splitting a nonnegative simplex signomial into circuit parts, one per
//! negative term, by peeling tangent planes of the concave negative terms at
//! the moment-space minimizer.

use serde::{Deserialize, Serialize};

use crate::certificates::TAU_CERT;
use crate::error::{Error, Result};
use crate::geometry::{ConvexRegion, MomentRegion};
use crate::linalg;
use crate::oracle;
use crate::signomial::{self, ExponentVector, Signomial, SupportPartition, Term};
use crate::solver::{self, MomentObjective, Objective, SolveReport};

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeOptions {
    /// Largest shift `ε e^{ᾱ}` tried when the minimizer is not attained.
    pub epsilon_max: f64,
    /// Stopping tolerance of the moment solves, relative to the coefficient scale.
    pub tol: f64,
    /// Fix the tangent in directions normal to a lower-dimensional `Y`.
    pub gauge: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            epsilon_max: 1e-3,
            tol: 1e-10,
            gauge: true,
        }
    }
}

/// One circuit signomial `Σ_α c_α^{(β)} e^α + d_β e^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPart {
    pub beta: Vec<f64>,
    /// Coefficients over `A`, in the order of `Decomposition::alphas`.
    pub coeffs: Vec<f64>,
    pub d: f64,
    pub terms: Vec<Term>,
    /// Tangent data; absent for the last part, which is the remainder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Vec<f64>>,
    /// Minimum of the part over `Y` in anchored moment coordinates.
    pub moment_min: f64,
}

impl CircuitPart {
    pub fn to_signomial(&self) -> Signomial {
        Signomial::from_terms(self.beta.len(), self.terms.clone()).expect("valid part")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub dimension: usize,
    pub anchor: usize,
    pub alphas: Vec<Vec<f64>>,
    pub parts: Vec<CircuitPart>,
    /// `γ = h(v*) − ⟨∇h(v*), v*⟩` for each tangent split, in peel order.
    pub gamma: Vec<f64>,
    /// Shift added to the anchor coefficient: the parts sum to `f + ε e^{ᾱ}`.
    pub epsilon_used: f64,
    /// Whether a part was modified off `aff(Y)`; such parts are nonnegative
    /// on `aff(Y)` only.
    pub gauge_applied: bool,
    pub notes: Vec<String>,
}

impl Decomposition {
    /// True when every part has nonnegative coefficients on `A`.
    pub fn signed(&self) -> bool {
        self.parts
            .iter()
            .all(|p| p.coeffs.iter().all(|c| *c >= -TAU_CERT))
    }
}

/// Result of one tangent split of a moment objective.
#[derive(Debug, Clone)]
pub struct SplitStep {
    pub part: MomentObjective,
    pub remainder: MomentObjective,
    pub v_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub gamma: f64,
    pub gauge: Option<Vec<f64>>,
    pub report: SolveReport,
}

/// Splits off monomial `k` of `obj`: the part is the negative term plus its
/// tangent majorant at the minimizer of `obj` over `y`. `absent` marks
/// anchored coordinates whose coefficient in `f` is zero; the gauge removes
/// them from the part when `Y` has normal directions.
pub fn fenchel_split(
    obj: &MomentObjective,
    k: usize,
    y: &MomentRegion,
    absent: &[bool],
    tol: f64,
) -> Result<SplitStep> {
    if k >= obj.monomials.len() {
        return Err(Error::Input(format!("no negative term with index {k}")));
    }
    let (report, _) = solver::solve_moment_objective(obj, y, tol)?;
    let v = report.minimizer.clone();
    let mono = &obj.monomials[k];
    let h = -mono.coeff * mono.base(&v);
    let y_star: Vec<f64> = mono.gradient(&v).iter().map(|g| -g).collect();
    let gamma = h - linalg::dot(&y_star, &v);

    let mut linear = y_star.clone();
    let mut constant = gamma;
    let mut gauge = None;
    if let Some(atoms) = y.atoms() {
        let normals = linalg::affine_hull_normals(atoms, 1e-6);
        if !normals.is_empty() {
            if let Some(mu) = gauge_multipliers(&normals, &linear, absent) {
                for ((n, off), m) in normals.iter().zip(&mu) {
                    for (l, nj) in linear.iter_mut().zip(n) {
                        *l += m * nj;
                    }
                    constant -= m * off;
                }
                for l in linear.iter_mut() {
                    if l.abs() < 1e-13 * (1.0 + h.abs()) {
                        *l = 0.0;
                    }
                }
                gauge = Some(mu);
            }
        }
    }
    let part = MomentObjective {
        constant,
        linear: linear.clone(),
        monomials: vec![mono.clone()],
    };
    let remainder = MomentObjective {
        constant: obj.constant - constant,
        linear: obj.linear.iter().zip(&linear).map(|(a, b)| a - b).collect(),
        monomials: obj
            .monomials
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, m)| m.clone())
            .collect(),
    };
    Ok(SplitStep {
        part,
        remainder,
        v_star: v,
        y_star,
        gamma,
        gauge,
        report,
    })
}

/// Multipliers `μ` with `(linear + Σ μ_k n_k)_j = 0` on absent coordinates
/// chosen from the highest index down, one per normal.
fn gauge_multipliers(normals: &[(Vec<f64>, f64)], linear: &[f64], absent: &[bool]) -> Option<Vec<f64>> {
    let mut chosen: Vec<usize> = Vec::new();
    for j in (0..linear.len()).rev() {
        if chosen.len() == normals.len() {
            break;
        }
        if !absent.get(j).copied().unwrap_or(false) {
            continue;
        }
        let mut trial = chosen.clone();
        trial.push(j);
        let rows: Vec<Vec<f64>> = trial
            .iter()
            .map(|&r| normals.iter().map(|(n, _)| n[r]).collect())
            .collect();
        if linalg::rank(&rows, 1e-9) == trial.len() {
            chosen = trial;
        }
    }
    if chosen.is_empty() {
        return None;
    }
    let rows: Vec<Vec<f64>> = chosen
        .iter()
        .map(|&r| normals.iter().map(|(n, _)| n[r]).collect())
        .collect();
    let rhs: Vec<f64> = chosen.iter().map(|&r| -linear[r]).collect();
    let (mu, _) = linalg::least_squares(&rows, normals.len(), &rhs);
    Some(mu)
}

/// Decomposes an eligible `f` that is nonnegative on the region behind `y`
/// into `|B|` circuit parts that are nonnegative on `y`.
pub fn decompose(
    part: &SupportPartition,
    y: &MomentRegion,
    opts: &DecomposeOptions,
) -> Result<Decomposition> {
    let diag = signomial::validate_simplex_problem(part);
    if !diag.eligible {
        return Err(Error::Structure(format!(
            "instance is not eligible for decomposition ({})",
            diag.reasons.join("; ")
        )));
    }
    if let Some(d) = part.negative_coeffs.iter().find(|d| **d >= 0.0) {
        return Err(Error::Structure(format!(
            "negative-support coefficient {d} is not negative"
        )));
    }
    let obj = MomentObjective::from_partition(part, y.anchor)?;
    let scale = part.to_signomial().coeff_scale().max(1.0);
    let tol = opts.tol * scale;

    let (check, _) = solver::solve_moment_objective(&obj, y, tol)?;
    if check.value < -(opts.epsilon_max + TAU_CERT * scale) {
        return Err(Error::Decomposition(format!(
            "f is negative on the region: moment minimum {:.6e} at v = {:?}",
            check.value, check.minimizer
        )));
    }

    let centroid = y.centroid();
    let mut order: Vec<usize> = (0..obj.monomials.len()).collect();
    let weight = |i: usize| obj.monomials[i].coeff.abs() * obj.monomials[i].base(&centroid);
    order.sort_by(|a, b| weight(*b).total_cmp(&weight(*a)));

    let absent: Vec<bool> = obj.linear.iter().map(|c| *c == 0.0).collect();
    let mut eps = 0.0;
    let mut last_err;
    loop {
        match peel(part, &obj, y, &order, &absent, eps, tol, opts.gauge) {
            Ok(mut dec) => {
                if eps > 0.0 {
                    dec.notes.push(format!(
                        "minimizer not attained; decomposed f + {eps:.3e} e^alpha_anchor"
                    ));
                }
                return Ok(dec);
            }
            Err(e) => last_err = e,
        }
        eps = if eps == 0.0 { 1e-9 * scale } else { 2.0 * eps };
        if eps > opts.epsilon_max {
            return Err(Error::Decomposition(format!(
                "no decomposition with shift up to {:.1e}: {last_err}",
                opts.epsilon_max
            )));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn peel(
    part: &SupportPartition,
    obj: &MomentObjective,
    y: &MomentRegion,
    order: &[usize],
    absent: &[bool],
    eps: f64,
    tol: f64,
    gauge: bool,
) -> Result<Decomposition> {
    let scale = part.to_signomial().coeff_scale().max(1.0);
    let mut rem = obj.clone();
    rem.constant += eps;
    rem.monomials = order.iter().map(|&i| obj.monomials[i].clone()).collect();
    let no_gauge = vec![false; absent.len()];
    let absent = if gauge { absent } else { &no_gauge };

    let mut parts = Vec::new();
    let mut gammas = Vec::new();
    let mut gauge_applied = false;
    for (step, &bi) in order.iter().enumerate() {
        let last = step + 1 == order.len();
        let (piece, tangent) = if last {
            (rem.clone(), None)
        } else {
            let s = fenchel_split(&rem, 0, y, absent, tol)?;
            if !s.report.converged() {
                return Err(Error::Decomposition(format!(
                    "minimizer not attained ({:?} after {} iterations, gap {:.3e})",
                    s.report.status, s.report.iterations, s.report.gap
                )));
            }
            gammas.push(s.gamma);
            gauge_applied |= s.gauge.is_some();
            rem = s.remainder.clone();
            (s.part.clone(), Some(s))
        };
        let (rep, _) = solver::solve_moment_objective(&piece, y, tol)?;
        if rep.value < -TAU_CERT * scale {
            return Err(Error::Decomposition(format!(
                "part for beta {:?} has moment minimum {:.3e}",
                part.negative[bi].coords(),
                rep.value
            )));
        }
        parts.push(to_part(part, y.anchor, bi, &piece, rep.value, tangent.as_ref()));
    }
    let mut notes = Vec::new();
    if gauge_applied {
        notes.push("tangent parts were gauged along the normal space of aff(Y); they are nonnegative on aff(Y)".into());
    }
    Ok(Decomposition {
        dimension: part.dimension,
        anchor: y.anchor,
        alphas: part.positive.iter().map(|a| a.coords().to_vec()).collect(),
        parts,
        gamma: gammas,
        epsilon_used: eps,
        gauge_applied,
        notes,
    })
}

fn to_part(
    part: &SupportPartition,
    anchor: usize,
    bi: usize,
    piece: &MomentObjective,
    moment_min: f64,
    step: Option<&SplitStep>,
) -> CircuitPart {
    let mut coeffs = Vec::with_capacity(part.positive.len());
    let mut k = 0;
    for i in 0..part.positive.len() {
        if i == anchor {
            coeffs.push(piece.constant);
        } else {
            coeffs.push(piece.linear[k]);
            k += 1;
        }
    }
    let beta = part.negative[bi].clone();
    let d = part.negative_coeffs[bi];
    let mut terms: Vec<Term> = part
        .positive
        .iter()
        .zip(&coeffs)
        .filter(|(_, c)| **c != 0.0)
        .map(|(a, c)| Term {
            coeff: *c,
            exponent: a.clone(),
        })
        .collect();
    terms.push(Term {
        coeff: d,
        exponent: beta.clone(),
    });
    CircuitPart {
        beta: beta.coords().to_vec(),
        coeffs,
        d,
        terms,
        tangent: step.map(|s| s.y_star.clone()),
        split_point: step.map(|s| s.v_star.clone()),
        gauge: step.and_then(|s| s.gauge.clone()),
        moment_min,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub pass: bool,
    /// `‖Σ parts − f − ε e^{ᾱ}‖∞` over coefficients.
    pub resummation_residual: f64,
    pub structure_ok: bool,
    /// Per part: minimum over `Y` (moment coordinates) when `Y` is given.
    pub moment_minima: Vec<f64>,
    /// Per part: smallest sampled value on `X` when `X` is given.
    pub sampled_minima: Vec<f64>,
    pub failures: Vec<String>,
}

/// Re-checks a decomposition against `f` from scratch: the parts must sum
/// to `f + ε e^{ᾱ}`, each must be a circuit over `A` with exactly one
/// negative term of `f`, and each must be nonnegative on `Y` and on samples
/// of `X`.
pub fn verify_decomposition(
    dec: &Decomposition,
    f: &Signomial,
    x: Option<&ConvexRegion>,
    y: Option<&MomentRegion>,
    samples: usize,
) -> DecompositionCheck {
    let mut failures = Vec::new();
    let scale = f.coeff_scale().max(1.0);
    let alphas: Vec<ExponentVector> = dec
        .alphas
        .iter()
        .filter_map(|a| ExponentVector::new(a.clone()).ok())
        .collect();

    let mut sum = Signomial::constant(f.dimension(), 0.0).expect("dimension");
    for p in &dec.parts {
        match Signomial::from_terms(f.dimension(), p.terms.clone()) {
            Ok(s) => sum = sum.add(&s).expect("dimension"),
            Err(e) => failures.push(format!("part {:?}: {e}", p.beta)),
        }
    }
    let mut target = f.clone();
    if let Some(anchor) = alphas.get(dec.anchor) {
        let shift = Signomial::new(f.dimension(), [(dec.epsilon_used, anchor.coords().to_vec())])
            .expect("dimension");
        target = target.add(&shift).expect("dimension");
    }
    let diff = sum.add(&target.scale(-1.0)).expect("dimension");
    let resummation_residual = diff.terms().iter().fold(0.0_f64, |m, t| m.max(t.coeff.abs()));
    if resummation_residual > TAU_CERT * scale {
        failures.push(format!("parts do not sum to f (residual {resummation_residual:.3e})"));
    }

    let mut structure_ok = true;
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for p in &dec.parts {
        let Ok(beta) = ExponentVector::new(p.beta.clone()) else {
            structure_ok = false;
            continue;
        };
        if alphas.iter().any(|a| a.approx_eq(&beta, 0.0)) {
            structure_ok = false;
            failures.push(format!("part {:?}: beta lies in A", p.beta));
        }
        for t in &p.terms {
            let in_a = alphas.iter().any(|a| a.approx_eq(&t.exponent, 0.0));
            let is_beta = t.exponent.approx_eq(&beta, 0.0);
            if !in_a && !is_beta {
                structure_ok = false;
                failures.push(format!("part {:?}: stray exponent {:?}", p.beta, t.exponent.coords()));
            }
            if is_beta && (t.coeff - f.coefficient_of(&beta)).abs() > TAU_CERT * scale {
                structure_ok = false;
                failures.push(format!(
                    "part {:?}: negative coefficient {} differs from f's {}",
                    p.beta,
                    t.coeff,
                    f.coefficient_of(&beta)
                ));
            }
        }
        if seen.iter().any(|s| s == &p.beta) {
            structure_ok = false;
            failures.push(format!("beta {:?} appears in two parts", p.beta));
        }
        seen.push(p.beta.clone());
    }
    let negatives = f
        .terms()
        .iter()
        .filter(|t| !alphas.iter().any(|a| a.approx_eq(&t.exponent, 0.0)))
        .count();
    if negatives != seen.len() {
        structure_ok = false;
        failures.push(format!(
            "f has {negatives} terms off A but the decomposition has {} parts",
            seen.len()
        ));
    }

    let mut moment_minima = Vec::new();
    if let Some(y) = y {
        for p in &dec.parts {
            let Some(obj) = part_objective(p, &alphas, y.anchor) else {
                failures.push(format!("part {:?}: beta has no barycentric coordinates", p.beta));
                continue;
            };
            match solver::solve_moment_objective(&obj, y, 1e-10 * scale) {
                Ok((rep, _)) => {
                    let mut m = rep.value;
                    if let Some(atoms) = y.atoms() {
                        for a in atoms {
                            m = m.min(obj.value(a));
                        }
                    }
                    if m < -TAU_CERT * scale {
                        failures.push(format!("part {:?} is negative on Y ({m:.3e})", p.beta));
                    }
                    moment_minima.push(m);
                }
                Err(e) => failures.push(format!("part {:?}: {e}", p.beta)),
            }
        }
    }
    let mut sampled_minima = Vec::new();
    if let Some(x) = x {
        if samples > 0 {
            let pts = oracle::sample_points(x, samples, 5);
            for p in &dec.parts {
                let s = p.to_signomial();
                let m = pts.iter().map(|q| s.eval(q)).fold(f64::INFINITY, f64::min);
                let tol = oracle::TAU_EVAL.max(1e-6) * scale;
                if m < -tol {
                    failures.push(format!("part {:?} is negative on a sample of X ({m:.3e})", p.beta));
                }
                sampled_minima.push(m);
            }
        }
    }
    DecompositionCheck {
        pass: failures.is_empty(),
        resummation_residual,
        structure_ok,
        moment_minima,
        sampled_minima,
        failures,
    }
}

/// The anchored moment objective of a single part.
pub fn part_objective(p: &CircuitPart, alphas: &[ExponentVector], anchor: usize) -> Option<MomentObjective> {
    let beta = ExponentVector::new(p.beta.clone()).ok()?;
    let bary = signomial::barycentric(alphas, &beta).ok()?;
    let mut linear = Vec::new();
    let mut weights = Vec::new();
    for i in 0..alphas.len() {
        if i != anchor {
            linear.push(p.coeffs[i]);
            weights.push(bary.weights[i]);
        }
    }
    Some(MomentObjective {
        constant: p.coeffs[anchor],
        linear,
        monomials: vec![solver::Monomial { coeff: p.d, weights }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, MomentMode};
    use approx::assert_abs_diff_eq;

    fn quartic_pair(shift: f64) -> SupportPartition {
        let f = Signomial::new(
            2,
            [
                (shift, vec![0.0, 0.0]),
                (1.0, vec![4.0, 2.0]),
                (1.0, vec![2.0, 4.0]),
                (-12.0, vec![1.0, 1.0]),
                (-3.0, vec![2.0, 2.0]),
            ],
        )
        .unwrap();
        signomial::partition_support(&f, None).unwrap()
    }

    #[test]
    fn single_negative_term_is_its_own_part() {
        let f = Signomial::new(1, [(1.0, vec![0.0]), (1.0, vec![2.0]), (-2.0, vec![1.0])]).unwrap();
        let part = signomial::partition_support(&f, None).unwrap();
        let y = geometry::build_moment_region(
            &ConvexRegion::full_space(1),
            &part.positive,
            0,
            MomentMode::ExactPolytopeVertices,
        )
        .unwrap();
        let dec = decompose(&part, &y, &DecomposeOptions::default()).unwrap();
        assert_eq!(dec.parts.len(), 1);
        assert!(dec.gamma.is_empty());
        let check = verify_decomposition(&dec, &f, Some(&ConvexRegion::interval(-3.0, 3.0).unwrap()), Some(&y), 200);
        assert!(check.pass, "{check:?}");
    }

    #[test]
    fn two_term_split_sums_back() {
        let part = quartic_pair(20.0);
        let y = geometry::build_moment_region(
            &ConvexRegion::full_space(2),
            &part.positive,
            geometry::default_anchor(&part.positive),
            MomentMode::ExactPolytopeVertices,
        )
        .unwrap();
        let dec = decompose(&part, &y, &DecomposeOptions::default()).unwrap();
        assert_eq!(dec.parts.len(), 2);
        let f = part.to_signomial();
        let check = verify_decomposition(&dec, &f, None, Some(&y), 0);
        assert!(check.pass, "{check:?}");
        assert!(check.resummation_residual < 1e-9);
    }

    #[test]
    fn negative_input_is_rejected() {
        let part = quartic_pair(19.0);
        let y = geometry::build_moment_region(
            &ConvexRegion::full_space(2),
            &part.positive,
            0,
            MomentMode::ExactPolytopeVertices,
        )
        .unwrap();
        let err = decompose(&part, &y, &DecomposeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Decomposition(_)), "{err}");
    }

    #[test]
    fn gauge_zeroes_absent_coordinates() {
        let normals = vec![(vec![1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt()], 1.0 / 3f64.sqrt())];
        let mu = gauge_multipliers(&normals, &[0.3, 0.1, 0.1], &[true, true, false]).unwrap();
        let lin: Vec<f64> = (0..3).map(|j| [0.3, 0.1, 0.1][j] + mu[0] * normals[0].0[j]).collect();
        assert_abs_diff_eq!(lin[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lin[0], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(lin[2], 0.2, epsilon = 1e-14);
    }
}
