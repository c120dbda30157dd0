//! Univariate tools: Descartes' rule of signs, the cone-coincidence test
//! for `|A| = 2`, the proportional split at the minimizer and the explicit
//! counterexample construction.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, Cone1D, ConvexRegion};
use crate::oracle::{self, Root};
use crate::signomial::{ExponentVector, Signomial, Term};
use crate::solver;

/// Sign changes in a coefficient sequence, zeros skipped.
pub fn sign_changes(coeffs: &[f64]) -> usize {
    let mut last = 0.0_f64;
    let mut n = 0;
    for &c in coeffs {
        if c == 0.0 {
            continue;
        }
        if last != 0.0 && (c > 0.0) != (last > 0.0) {
            n += 1;
        }
        last = c;
    }
    n
}

/// Sign changes of a univariate signomial with terms sorted by exponent.
pub fn signomial_sign_changes(f: &Signomial) -> Result<usize> {
    check_dim(1, f.dimension())?;
    let c: Vec<f64> = f.sorted_terms().iter().map(|t| t.coeff).collect();
    Ok(sign_changes(&c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootBound {
    pub sign_changes: usize,
    pub roots_with_multiplicity: usize,
    pub roots: Vec<Root>,
    pub pass: bool,
}

/// Checks that the real roots found on `[lo, hi]`, with multiplicity, do
/// not exceed the number of sign changes.
pub fn count_roots_bound_check(f: &Signomial, lo: f64, hi: f64, resolution: usize) -> Result<RootBound> {
    let sc = signomial_sign_changes(f)?;
    let roots = oracle::find_roots_1d(f, lo, hi, resolution)?;
    let total = roots.iter().map(|r| r.multiplicity).sum();
    Ok(RootBound {
        sign_changes: sc,
        roots_with_multiplicity: total,
        roots,
        pass: total <= sc,
    })
}

/// A triple `β1 < α < β2` with `α ∈ A` and `β1, β2 ∈ B`, if one exists.
pub fn separates(a: &[f64], b: &[f64]) -> Option<(f64, f64, f64)> {
    for &alpha in a {
        let below = b.iter().cloned().filter(|v| *v < alpha).fold(f64::NEG_INFINITY, f64::max);
        let above = b.iter().cloned().filter(|v| *v > alpha).fold(f64::INFINITY, f64::min);
        if below.is_finite() && above.is_finite() {
            return Some((below, alpha, above));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Coincide,
    Differ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coincidence {
    pub verdict: Verdict,
    pub recession_cone: Cone1D,
    pub dual_cone: Cone1D,
    /// `[α1, α2] − rec(X)*` as an interval.
    pub minkowski_difference: (f64, f64),
    pub outside: Vec<f64>,
    pub separation: Option<(f64, f64, f64)>,
    pub reasons: Vec<String>,
}

/// Decides whether the signed X-SAGE cone and the cone of nonnegative
/// signomials on `X` agree for `A = {α1, α2}` and negative support `B`.
pub fn cone_coincidence(alpha1: f64, alpha2: f64, b: &[f64], x: &ConvexRegion) -> Result<Coincidence> {
    check_dim(1, x.dimension())?;
    if !(alpha1 < alpha2) {
        return Err(Error::Input(format!("need alpha1 < alpha2, got {alpha1} and {alpha2}")));
    }
    if let Some(v) = b.iter().find(|v| **v == alpha1 || **v == alpha2 || !v.is_finite()) {
        return Err(Error::Input(format!("negative exponent {v} must be finite and outside A")));
    }
    let (rec, dual) = geometry::recession_dual_1d(x)?;
    let (klo, khi) = dual.as_interval();
    let lo = alpha1 - khi;
    let hi = alpha2 - klo;
    let mut reasons = Vec::new();
    let single_point = matches!(x, ConvexRegion::Interval { lower, upper } if lower == upper);
    let outside: Vec<f64> = b.iter().cloned().filter(|v| *v < lo || *v > hi).collect();
    let separation = separates(&[alpha1, alpha2], b);
    let verdict = if single_point {
        reasons.push("X is a single point".into());
        Verdict::Coincide
    } else {
        if !outside.is_empty() {
            reasons.push(format!("{outside:?} outside [{lo}, {hi}]"));
        }
        if let Some((b1, a, b2)) = separation {
            reasons.push(format!("{a} separates {b1} and {b2}"));
        }
        if outside.is_empty() && separation.is_none() {
            Verdict::Coincide
        } else {
            Verdict::Differ
        }
    };
    Ok(Coincidence {
        verdict,
        recession_cone: rec,
        dual_cone: dual,
        minkowski_difference: (lo, hi),
        outside,
        separation,
        reasons,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionalSplit {
    /// The endpoint of `X` where `f` is minimal.
    pub at: f64,
    pub weights: Vec<f64>,
    pub parts: Vec<Signomial>,
    pub f_at: f64,
}

/// For `f = c1 e^{α1} + c2 e^{α2} + Σ d_β e^β` with minimum over `X` at the
/// finite endpoint `a`, splits `c` in proportion `w_β ∝ −d_β e^{β a}`.
pub fn proportional_split_1d(f: &Signomial, x: &ConvexRegion) -> Result<ProportionalSplit> {
    check_dim(1, f.dimension())?;
    let ConvexRegion::Interval { lower, upper } = x else {
        return Err(Error::UnsupportedRegion("proportional split needs an interval".into()));
    };
    let reflected = !lower.is_finite();
    if reflected && !upper.is_finite() {
        return Err(Error::Input("X needs a finite endpoint".into()));
    }
    let (g, lo, hi) = if reflected {
        (f.reflect(), -upper, -lower)
    } else {
        (f.clone(), *lower, *upper)
    };
    let pos: Vec<&Term> = g.terms().iter().filter(|t| t.coeff > 0.0).collect();
    let neg: Vec<&Term> = g.terms().iter().filter(|t| t.coeff < 0.0).collect();
    if pos.len() != 2 || neg.is_empty() {
        return Err(Error::Structure(format!(
            "need two positive terms and at least one negative term, got {} and {}",
            pos.len(),
            neg.len()
        )));
    }
    let fa = g.eval(&[lo]);
    let win_hi = if hi.is_finite() { hi } else { lo + 50.0 };
    let win = ConvexRegion::interval(lo, win_hi)?;
    let gm = oracle::grid_min(&g, &win, 2000)?;
    let tol = 1e-9 * g.coeff_scale().max(1.0);
    if gm.value < fa - tol && (gm.argmin[0] - lo).abs() > 1e-6 {
        return Err(Error::Structure(format!(
            "f is not minimal at the endpoint {}: f = {} at {}",
            if reflected { *upper } else { lo },
            gm.value,
            if reflected { -gm.argmin[0] } else { gm.argmin[0] }
        )));
    }
    let raw: Vec<f64> = neg
        .iter()
        .map(|t| -t.coeff * (t.exponent.coords()[0] * lo).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let parts: Vec<Signomial> = neg
        .iter()
        .zip(&weights)
        .map(|(t, w)| {
            let mut terms: Vec<Term> = pos
                .iter()
                .map(|p| Term {
                    coeff: p.coeff * w,
                    exponent: p.exponent.clone(),
                })
                .collect();
            terms.push((*t).clone());
            let s = Signomial::from_terms(1, terms).expect("one-dimensional");
            if reflected {
                s.reflect()
            } else {
                s
            }
        })
        .collect();
    Ok(ProportionalSplit {
        at: if reflected { *upper } else { lo },
        weights,
        parts,
        f_at: fa,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub signomial: Signomial,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    /// Where `f` attains its minimum value 0 on `X`.
    pub zero: f64,
}

/// Builds `f = c1 e^{α1} + c2 e^{α2} + d1 e^{β1} + d2 e^{β2}`, nonnegative on
/// `X` and zero somewhere on it, for `β1 < α1 < β2 < α2`, `a = inf X` finite
/// and `b ∈ X`, `b ≠ a`. A finite supremum with infinite infimum is handled
/// by reflection.
pub fn counterexample(
    alphas: [f64; 2],
    betas: [f64; 2],
    x: &ConvexRegion,
    b: f64,
) -> Result<Counterexample> {
    check_dim(1, x.dimension())?;
    let ConvexRegion::Interval { lower, upper } = *x else {
        return Err(Error::UnsupportedRegion("counterexample needs an interval".into()));
    };
    if lower.is_finite() {
        return counterexample_lower(alphas, betas, lower, upper, b);
    }
    if !upper.is_finite() {
        return Err(Error::Input("X = R has no finite endpoint".into()));
    }
    let mut ra = [-alphas[0], -alphas[1]];
    let mut rb = [-betas[0], -betas[1]];
    ra.sort_by(f64::total_cmp);
    rb.sort_by(f64::total_cmp);
    let r = counterexample_lower(ra, rb, -upper, -lower, -b)?;
    let c_of = |s: &Signomial, e: f64| s.coefficient_of(&ExponentVector::new(vec![e]).expect("finite"));
    let signomial = r.signomial.reflect();
    Ok(Counterexample {
        c1: c_of(&signomial, alphas[0].min(alphas[1])),
        c2: c_of(&signomial, alphas[0].max(alphas[1])),
        d1: c_of(&signomial, betas[0].min(betas[1])),
        d2: c_of(&signomial, betas[0].max(betas[1])),
        zero: -r.zero,
        signomial,
    })
}

fn counterexample_lower(alphas: [f64; 2], betas: [f64; 2], a: f64, upper: f64, b: f64) -> Result<Counterexample> {
    let [al1, al2] = alphas;
    let [be1, be2] = betas;
    if !(be1 < al1 && al1 < be2 && be2 < al2) {
        return Err(Error::Input(format!(
            "need beta1 < alpha1 < beta2 < alpha2, got {be1} < {al1} < {be2} < {al2}"
        )));
    }
    if !(b > a && b <= upper) {
        return Err(Error::Input(format!("b = {b} must lie in X and differ from inf X = {a}")));
    }
    // Normalize α1 to 0; multiplying by e^{α1 x} afterwards keeps the sign.
    let (a2, b1, b2) = (al2 - al1, be1 - al1, be2 - al1);
    let c2 = -1.0 / ((a2 * a).exp() - (a2 * b).exp());
    let d2 = 2.0 / ((b2 * a).exp() - (b2 * b).exp());
    let d1 = (-(c2 * (a2 * a).exp() + d2 * (b2 * a).exp()) / (b1 * a).exp()).min(0.0) - 1.0;
    let tail = |t: f64| c2 * (a2 * t).exp() + d1 * (b1 * t).exp() + d2 * (b2 * t).exp();
    let hi = if upper.is_finite() { upper } else { b.max(a + 1.0) * 2.0 - a + 10.0 };
    let n = 4000;
    let step = (hi - a) / n as f64;
    let (mut best_t, mut best_v) = (a, tail(a));
    for i in 1..=n {
        let t = a + step * i as f64;
        let v = tail(t);
        if v < best_v {
            best_t = t;
            best_v = v;
        }
    }
    let rep = solver::minimize_1d(tail, (best_t - step).max(a), (best_t + step).min(hi), 1e-12);
    if rep.value < best_v {
        best_t = rep.minimizer[0];
        best_v = rep.value;
    }
    if !upper.is_finite() && (best_t - hi).abs() < 2.0 * step {
        return Err(Error::Range(best_t));
    }
    let c1 = -best_v;
    let signomial = Signomial::new(
        1,
        [
            (c1, vec![al1]),
            (c2, vec![al2]),
            (d1, vec![be1]),
            (d2, vec![be2]),
        ],
    )?;
    Ok(Counterexample {
        signomial,
        c1,
        c2,
        d1,
        d2,
        zero: best_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn descartes_counts() {
        assert_eq!(sign_changes(&[1.0, -2.0, 1.0]), 2);
        assert_eq!(sign_changes(&[1.0, 0.0, 2.0]), 0);
        assert_eq!(sign_changes(&[-1.0, 0.0, 2.0, -3.0]), 2);
        assert_eq!(sign_changes(&[]), 0);
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separates(&[0.0, 1.0], &[-1.0, 0.5]), Some((-1.0, 0.0, 0.5)));
        assert_eq!(separates(&[0.0, 1.0], &[0.2, 0.5]), None);
    }

    fn half_line() -> ConvexRegion {
        ConvexRegion::interval(0.0, f64::INFINITY).unwrap()
    }

    #[test]
    fn coincidence_cases() {
        let r = ConvexRegion::interval(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(cone_coincidence(0.0, 1.0, &[0.3, 0.7], &r).unwrap().verdict, Verdict::Coincide);
        assert_eq!(cone_coincidence(0.0, 1.0, &[1.5], &r).unwrap().verdict, Verdict::Differ);
        let bounded = ConvexRegion::interval(0.0, 1.0).unwrap();
        let c = cone_coincidence(0.0, 1.0, &[-1.0, 0.5], &bounded).unwrap();
        assert_eq!(c.verdict, Verdict::Differ);
        assert!(c.separation.is_some());
        assert_eq!(cone_coincidence(0.0, 1.0, &[-1.0, 2.0], &bounded).unwrap().verdict, Verdict::Differ);
        assert_eq!(cone_coincidence(0.0, 1.0, &[-1.0, -2.0], &half_line()).unwrap().verdict, Verdict::Coincide);
        let half = ConvexRegion::interval(0.0, f64::INFINITY).unwrap();
        let c = cone_coincidence(0.0, 1.0, &[2.0], &half).unwrap();
        assert_eq!(c.minkowski_difference, (f64::NEG_INFINITY, 1.0));
        assert_eq!(c.verdict, Verdict::Differ);
        assert_eq!(cone_coincidence(0.0, 1.0, &[-3.0], &half).unwrap().verdict, Verdict::Coincide);
    }

    #[test]
    fn counterexample_reference_values() {
        let x = ConvexRegion::interval(0.0, 1.0).unwrap();
        let ce = counterexample([0.0, 1.0], [-1.0, 0.5], &x, 1.0).unwrap();
        assert_abs_diff_eq!(ce.c2, 0.581977, epsilon = 1e-6);
        assert_abs_diff_eq!(ce.d2, 2.0 / (1.0 - 0.5f64.exp()), epsilon = 1e-12);
        assert_abs_diff_eq!(ce.d1, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ce.c1, 3.868890899, epsilon = 1e-6);
        let g = oracle::grid_min(&ce.signomial, &x, 2000).unwrap();
        assert!(g.value > -1e-9 && g.value < 1e-6);
    }

    #[test]
    fn reflected_counterexample_is_nonnegative() {
        let x = ConvexRegion::interval(f64::NEG_INFINITY, 0.0).unwrap();
        let ce = counterexample([-1.0, 0.0], [-0.5, 1.0], &x, -1.0).unwrap();
        let w = ConvexRegion::interval(-30.0, 0.0).unwrap();
        let g = oracle::grid_min(&ce.signomial, &w, 4000).unwrap();
        assert!(g.value > -1e-8, "{g:?}");
        assert!(g.value < 1e-6);
    }

    #[test]
    fn proportional_split_sums_back() {
        // Increasing on [0, ∞): minimum at the endpoint 0.
        let f = Signomial::new(
            1,
            [(2.0, vec![0.0]), (3.0, vec![2.0]), (-1.0, vec![-1.0]), (-0.5, vec![1.0])],
        )
        .unwrap();
        let x = ConvexRegion::interval(0.0, f64::INFINITY).unwrap();
        let s = proportional_split_1d(&f, &x).unwrap();
        assert_abs_diff_eq!(s.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let mut sum = Signomial::constant(1, 0.0).unwrap();
        for p in &s.parts {
            sum = sum.add(p).unwrap();
        }
        let diff = sum.add(&f.scale(-1.0)).unwrap();
        assert!(diff.terms().iter().all(|t| t.coeff.abs() < 1e-12));
        for p in &s.parts {
            assert!(p.eval(&[0.0]) >= -1e-12);
        }
    }
}
