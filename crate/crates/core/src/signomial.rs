//! Signomials `f(x) = Σ c · exp⟨α, x⟩`, their positive/negative support
//! split and the barycentric coordinates tying the two together.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, RANK_PIVOT_REL};

/// Exponents closer than this (per coordinate) are merged.
pub const TAU_EXP: f64 = 1e-12;
/// Tolerance for barycentric reconstruction and the `[0, 1]` box test.
pub const TAU_BARY: f64 = 1e-8;
/// Coefficients below this magnitude are dropped.
pub const ZERO_COEFF: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExponentVector(Vec<f64>);

impl ExponentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite exponent entry {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.0, x)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Lexicographic comparison, used for the default anchor and sorting.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl TryFrom<Vec<f64>> for ExponentVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ExponentVector> for Vec<f64> {
    fn from(e: ExponentVector) -> Self {
        e.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(rename = "c")]
    pub coeff: f64,
    #[serde(rename = "alpha")]
    pub exponent: ExponentVector,
}

#[derive(Debug, Clone, Deserialize)]
struct RawSignomial {
    dimension: usize,
    terms: Vec<Term>,
}

/// A finite exponential sum. Exponents are pairwise distinct (up to
/// [`TAU_EXP`]) and no stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignomial")]
pub struct Signomial {
    dimension: usize,
    terms: Vec<Term>,
}

impl TryFrom<RawSignomial> for Signomial {
    type Error = Error;
    fn try_from(raw: RawSignomial) -> Result<Self> {
        Signomial::from_terms(raw.dimension, raw.terms)
    }
}

impl Signomial {
    /// Builds a signomial from `(coefficient, exponent)` pairs, merging
    /// near-duplicate exponents and dropping zero coefficients.
    pub fn new<I>(dimension: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<f64>)>,
    {
        let terms = terms
            .into_iter()
            .map(|(c, a)| {
                Ok(Term {
                    coeff: c,
                    exponent: ExponentVector::new(a)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(dimension, terms)
    }

    pub fn from_terms(dimension: usize, terms: Vec<Term>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            check_dim(dimension, t.exponent.dim())?;
            if !t.coeff.is_finite() {
                return Err(Error::Input(format!("non-finite coefficient {}", t.coeff)));
            }
            match merged
                .iter_mut()
                .find(|m| m.exponent.approx_eq(&t.exponent, TAU_EXP))
            {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.abs() >= ZERO_COEFF);
        Ok(Self {
            dimension,
            terms: merged,
        })
    }

    pub fn constant(dimension: usize, c: f64) -> Result<Self> {
        Self::new(dimension, [(c, vec![0.0; dimension])])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient attached to `exponent`, zero when absent.
    pub fn coefficient_of(&self, exponent: &ExponentVector) -> f64 {
        self.terms
            .iter()
            .find(|t| t.exponent.approx_eq(exponent, TAU_EXP))
            .map_or(0.0, |t| t.coeff)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        Ok(self.eval(x))
    }

    /// Unchecked evaluation for hot loops; `x` must have the right length.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.exponent.dot(x).exp())
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dimension];
        for t in &self.terms {
            let w = t.coeff * t.exponent.dot(x).exp();
            for (gi, a) in g.iter_mut().zip(t.exponent.coords()) {
                *gi += w * a;
            }
        }
        g
    }

    /// Partial derivative along `axis`, again a signomial.
    pub fn derivative(&self, axis: usize) -> Signomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * t.exponent.coords()[axis],
                exponent: t.exponent.clone(),
            })
            .collect();
        Self::from_terms(self.dimension, terms).expect("derivative keeps structure")
    }

    pub fn add(&self, other: &Signomial) -> Result<Signomial> {
        check_dim(self.dimension, other.dimension)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::from_terms(self.dimension, terms)
    }

    pub fn scale(&self, s: f64) -> Signomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * s,
                exponent: t.exponent.clone(),
            })
            .collect();
        Self::from_terms(self.dimension, terms).expect("scaling keeps structure")
    }

    /// `f + shift` on the constant term.
    pub fn add_constant(&self, shift: f64) -> Signomial {
        let c = Signomial::constant(self.dimension, shift).expect("positive dimension");
        self.add(&c).expect("same dimension")
    }

    /// Multiplies by `exp⟨s, x⟩`, i.e. shifts every exponent by `s`.
    pub fn shift_exponents(&self, s: &[f64]) -> Result<Signomial> {
        check_dim(self.dimension, s.len())?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    coeff: t.coeff,
                    exponent: ExponentVector::new(
                        t.exponent.coords().iter().zip(s).map(|(a, b)| a + b).collect(),
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(self.dimension, terms)
    }

    /// `x ↦ f(−x)`.
    pub fn reflect(&self) -> Signomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff,
                exponent: ExponentVector(t.exponent.coords().iter().map(|a| -a).collect()),
            })
            .collect();
        Self::from_terms(self.dimension, terms).expect("reflection keeps structure")
    }

    /// Terms sorted by exponent (lexicographically).
    pub fn sorted_terms(&self) -> Vec<Term> {
        let mut t = self.terms.clone();
        t.sort_by(|a, b| a.exponent.lex_cmp(&b.exponent));
        t
    }

    /// Largest coefficient magnitude, used to scale tolerances.
    pub fn coeff_scale(&self) -> f64 {
        self.terms.iter().fold(0.0_f64, |m, t| m.max(t.coeff.abs()))
    }
}

/// Barycentric coordinates of one negative-support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barycentric {
    pub weights: Vec<f64>,
    /// All weights in `[0, 1]` within [`TAU_BARY`].
    pub in_hull: bool,
    /// Some weight was within tolerance of the box and got clamped.
    pub clamped: bool,
    pub residual: f64,
}

pub fn is_affinely_independent(points: &[ExponentVector]) -> bool {
    let Some(p0) = points.first() else {
        return true;
    };
    if points.len() > p0.dim() + 1 {
        return false;
    }
    let diffs: Vec<Vec<f64>> = points
        .iter()
        .skip(1)
        .map(|p| linalg::sub(p.coords(), p0.coords()))
        .collect();
    linalg::rank(&diffs, RANK_PIVOT_REL) == diffs.len()
}

/// Writes `beta` as an affine combination of `a`.
pub fn barycentric(a: &[ExponentVector], beta: &ExponentVector) -> Result<Barycentric> {
    if a.is_empty() {
        return Err(Error::NoBarycentric {
            beta: beta.coords().to_vec(),
        });
    }
    let n = beta.dim();
    for p in a {
        check_dim(n, p.dim())?;
    }
    if !is_affinely_independent(a) {
        return Err(Error::Structure(
            "positive support is not affinely independent".into(),
        ));
    }
    let k = a.len();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| a.iter().map(|p| p.coords()[i]).collect())
        .collect();
    rows.push(vec![1.0; k]);
    let mut rhs = beta.coords().to_vec();
    rhs.push(1.0);
    let (mut w, residual) = linalg::least_squares(&rows, k, &rhs);
    let scale = 1.0 + a.iter().map(|p| linalg::norm_inf(p.coords())).fold(0.0, f64::max);
    if residual > TAU_BARY * scale {
        return Err(Error::NoBarycentric {
            beta: beta.coords().to_vec(),
        });
    }
    let in_hull = w.iter().all(|&x| x >= -TAU_BARY && x <= 1.0 + TAU_BARY);
    let mut clamped = false;
    if in_hull {
        for x in w.iter_mut() {
            if *x < 0.0 || *x > 1.0 {
                *x = x.clamp(0.0, 1.0);
                clamped = true;
            }
        }
    }
    Ok(Barycentric {
        weights: w,
        in_hull,
        clamped,
        residual,
    })
}

/// The positive support `A` (simplex vertices), the negative support `B`,
/// their coefficients and the barycentric table `λ^{(β)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPartition {
    pub dimension: usize,
    pub positive: Vec<ExponentVector>,
    pub positive_coeffs: Vec<f64>,
    pub negative: Vec<ExponentVector>,
    pub negative_coeffs: Vec<f64>,
    pub barycentric: Vec<Barycentric>,
    pub declared: bool,
}

impl SupportPartition {
    /// Reassembles `f` from the partition.
    pub fn to_signomial(&self) -> Signomial {
        let terms = self
            .positive
            .iter()
            .zip(&self.positive_coeffs)
            .chain(self.negative.iter().zip(&self.negative_coeffs))
            .map(|(e, &c)| Term {
                coeff: c,
                exponent: e.clone(),
            })
            .collect();
        Signomial::from_terms(self.dimension, terms).expect("partition is well formed")
    }

    pub fn is_eligible(&self) -> bool {
        validate_simplex_problem(self).eligible
    }
}

/// Splits `f` into positive support `A` and negative support `B`.
///
/// With `declared_a`, `A` is taken as given (coefficients may have any sign
/// and may be zero) and every remaining term must be negative. Without it,
/// `A` collects the positive-coefficient exponents.
pub fn partition_support(
    f: &Signomial,
    declared_a: Option<&[ExponentVector]>,
) -> Result<SupportPartition> {
    let n = f.dimension();
    let (positive, positive_coeffs, negative, negative_coeffs) = match declared_a {
        Some(a) => {
            for p in a {
                check_dim(n, p.dim())?;
            }
            let coeffs: Vec<f64> = a.iter().map(|p| f.coefficient_of(p)).collect();
            let mut neg = Vec::new();
            let mut neg_c = Vec::new();
            for t in f.terms() {
                if a.iter().any(|p| p.approx_eq(&t.exponent, TAU_EXP)) {
                    continue;
                }
                if t.coeff > 0.0 {
                    return Err(Error::Structure(format!(
                        "term with exponent {:?} has positive coefficient but is not in the declared positive support",
                        t.exponent.coords()
                    )));
                }
                neg.push(t.exponent.clone());
                neg_c.push(t.coeff);
            }
            (a.to_vec(), coeffs, neg, neg_c)
        }
        None => {
            let mut pos = Vec::new();
            let mut pos_c = Vec::new();
            let mut neg = Vec::new();
            let mut neg_c = Vec::new();
            for t in f.terms() {
                if t.coeff > 0.0 {
                    pos.push(t.exponent.clone());
                    pos_c.push(t.coeff);
                } else {
                    neg.push(t.exponent.clone());
                    neg_c.push(t.coeff);
                }
            }
            (pos, pos_c, neg, neg_c)
        }
    };
    if !is_affinely_independent(&positive) {
        return Err(Error::Structure(
            "positive support is not affinely independent".into(),
        ));
    }
    let barycentric = negative
        .iter()
        .map(|b| barycentric(&positive, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(SupportPartition {
        dimension: n,
        positive,
        positive_coeffs,
        negative,
        negative_coeffs,
        barycentric,
        declared: declared_a.is_some(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaDiagnostic {
    pub beta: Vec<f64>,
    pub weights: Vec<f64>,
    pub in_hull: bool,
    pub is_vertex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexDiagnostics {
    pub affinely_independent: bool,
    pub betas: Vec<BetaDiagnostic>,
    pub eligible: bool,
    pub reasons: Vec<String>,
}

/// Checks the combinatorial hypotheses of the main decomposition result:
/// `A` is a simplex vertex set and every `β` lies in `conv(A) \ A`.
pub fn validate_simplex_problem(part: &SupportPartition) -> SimplexDiagnostics {
    let affinely_independent = is_affinely_independent(&part.positive);
    let mut reasons = Vec::new();
    if !affinely_independent {
        reasons.push("positive support is not affinely independent".to_string());
    }
    let betas: Vec<BetaDiagnostic> = part
        .negative
        .iter()
        .zip(&part.barycentric)
        .map(|(b, bary)| {
            let is_vertex = part.positive.iter().any(|a| a.approx_eq(b, TAU_EXP));
            if !bary.in_hull {
                reasons.push(format!(
                    "beta {:?} lies outside conv(A) (barycentric weights {:?})",
                    b.coords(),
                    bary.weights
                ));
            }
            if is_vertex {
                reasons.push(format!("beta {:?} coincides with a vertex of A", b.coords()));
            }
            BetaDiagnostic {
                beta: b.coords().to_vec(),
                weights: bary.weights.clone(),
                in_hull: bary.in_hull,
                is_vertex,
            }
        })
        .collect();
    SimplexDiagnostics {
        affinely_independent,
        eligible: reasons.is_empty(),
        betas,
        reasons,
    }
}

/// A polynomial `Σ c y^α` reinterpreted as a signomial through `y = exp(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialForm {
    pub signomial: Signomial,
}

impl PolynomialForm {
    /// Log-transforms a positive interval `[lo, hi]` of the `y` variable.
    pub fn log_interval(lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::Input(format!(
                "interval [{lo}, {hi}] is not a subset of the nonnegative half-line"
            )));
        }
        Ok((lo.ln(), hi.ln()))
    }

    /// Maps a point of the positive orthant to `x = ln y`.
    pub fn log_point(y: &[f64]) -> Result<Vec<f64>> {
        y.iter()
            .map(|&v| {
                if v > 0.0 {
                    Ok(v.ln())
                } else {
                    Err(Error::Input(format!("coordinate {v} is not positive")))
                }
            })
            .collect()
    }
}

/// Reinterprets a polynomial with nonnegative integer exponents as a
/// signomial.
pub fn poly_to_signomial(dimension: usize, terms: &[(f64, Vec<f64>)]) -> Result<PolynomialForm> {
    for (_, e) in terms {
        if let Some(bad) = e.iter().find(|v| !(**v >= 0.0 && v.fract() == 0.0)) {
            return Err(Error::Input(format!(
                "polynomial exponent {bad} is not a nonnegative integer"
            )));
        }
    }
    Ok(PolynomialForm {
        signomial: Signomial::new(dimension, terms.iter().cloned())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn quartic_pair() -> Signomial {
        Signomial::new(
            2,
            [
                (13.0, vec![0.0, 0.0]),
                (1.0, vec![4.0, 2.0]),
                (1.0, vec![2.0, 4.0]),
                (-12.0, vec![1.0, 1.0]),
                (-3.0, vec![2.0, 2.0]),
            ],
        )
        .unwrap()
    }

    fn ev(v: &[f64]) -> ExponentVector {
        ExponentVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_abs_diff_eq!(quartic_pair().evaluate(&[0.0, 0.0]).unwrap(), 0.0, epsilon = 1e-12);
        let one = Signomial::constant(3, 1.0).unwrap();
        assert_eq!(one.evaluate(&[0.3, -2.0, 7.0]).unwrap(), 1.0);
        let g = Signomial::new(
            2,
            [
                (1.0, vec![4.0, 1.0]),
                (-10.0, vec![3.0, 0.0]),
                (37.0, vec![2.0, 1.0]),
                (-60.0, vec![1.0, 0.0]),
                (36.0, vec![0.0, 0.0]),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(g.evaluate(&[2f64.ln(), 0.0]).unwrap(), 0.0, epsilon = 1e-10);
        assert!(matches!(
            quartic_pair().evaluate(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn merges_duplicates_and_drops_zeros() {
        let f = Signomial::new(1, [(1.0, vec![1.0]), (2.0, vec![1.0 + 1e-14]), (0.0, vec![3.0])])
            .unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.terms()[0].coeff, 3.0);
        let g = Signomial::new(1, [(1.0, vec![1.0]), (-1.0, vec![1.0])]).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn partition_of_quartic_pair() {
        let a = [ev(&[0.0, 0.0]), ev(&[4.0, 2.0]), ev(&[2.0, 4.0])];
        let p = partition_support(&quartic_pair(), Some(&a)).unwrap();
        assert_eq!(p.negative.len(), 2);
        let expect = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
        for (bary, e) in p.barycentric.iter().zip(expect) {
            for (w, x) in bary.weights.iter().zip(e) {
                assert_abs_diff_eq!(*w, x, epsilon = 1e-12);
            }
            assert!(bary.in_hull);
        }
        assert_eq!(p.to_signomial(), quartic_pair());
        assert!(validate_simplex_problem(&p).eligible);
    }

    #[test]
    fn partition_without_negative_terms() {
        let f = Signomial::new(1, [(1.0, vec![0.0]), (1.0, vec![1.0])]).unwrap();
        let p = partition_support(&f, None).unwrap();
        assert!(p.negative.is_empty());
        assert!(validate_simplex_problem(&p).eligible);
    }

    #[test]
    fn partition_of_the_five_term_family() {
        let f = Signomial::new(
            2,
            [
                (4.0, vec![0.0, 0.0]),
                (-12.0, vec![1.0, 0.0]),
                (13.0, vec![2.0, 1.0]),
                (-6.0, vec![3.0, 0.0]),
                (1.0, vec![4.0, 0.0]),
            ],
        )
        .unwrap();
        let a = [ev(&[0.0, 0.0]), ev(&[2.0, 1.0]), ev(&[4.0, 0.0])];
        let p = partition_support(&f, Some(&a)).unwrap();
        assert_eq!(p.negative, vec![ev(&[1.0, 0.0]), ev(&[3.0, 0.0])]);
        // Both betas sit on the edge conv{(0,0),(4,0)}.
        assert_abs_diff_eq!(p.barycentric[0].weights[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(p.barycentric[0].weights[2], 0.25, epsilon = 1e-12);
        assert!(validate_simplex_problem(&p).eligible);
    }

    #[test]
    fn declared_support_rejects_stray_positive_terms() {
        let a = [ev(&[0.0, 0.0]), ev(&[4.0, 2.0])];
        assert!(matches!(
            partition_support(&quartic_pair(), Some(&a)),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn affinely_dependent_support_is_rejected() {
        let f = Signomial::new(1, [(1.0, vec![0.0]), (1.0, vec![1.0]), (1.0, vec![2.0])]).unwrap();
        assert!(matches!(partition_support(&f, None), Err(Error::Structure(_))));
    }

    #[test]
    fn beta_outside_affine_hull() {
        let a = [ev(&[0.0, 0.0]), ev(&[1.0, 0.0])];
        let err = barycentric(&a, &ev(&[0.5, 1.0])).unwrap_err();
        assert!(matches!(err, Error::NoBarycentric { .. }));
    }

    #[test]
    fn barycentric_examples() {
        let b = barycentric(&[ev(&[0.0]), ev(&[1.0])], &ev(&[0.5])).unwrap();
        assert_abs_diff_eq!(b.weights[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b.weights[1], 0.5, epsilon = 1e-14);
        let simplex = [
            ev(&[0.0, 0.0, 0.0]),
            ev(&[1.0, 0.0, 0.0]),
            ev(&[0.0, 1.0, 0.0]),
            ev(&[0.0, 0.0, 1.0]),
        ];
        let b = barycentric(&simplex, &ev(&[0.6, 0.2, 0.2])).unwrap();
        for (w, e) in b.weights.iter().zip([0.0, 0.6, 0.2, 0.2]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-12);
        }
        let tri = [ev(&[0.0, 0.0]), ev(&[4.0, 2.0]), ev(&[2.0, 4.0])];
        let b = barycentric(&tri, &ev(&[2.0, 2.0])).unwrap();
        for w in b.weights {
            assert_abs_diff_eq!(w, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn outside_hull_is_flagged_not_eligible() {
        let f = Signomial::new(
            1,
            [(1.0, vec![3.0]), (-4.5, vec![2.0]), (6.0, vec![1.0]), (-2.0, vec![0.0])],
        )
        .unwrap();
        let p = partition_support(&f, Some(&[ev(&[1.0]), ev(&[3.0])])).unwrap();
        let diag = validate_simplex_problem(&p);
        assert!(!diag.eligible);
        for b in &diag.betas {
            assert_eq!(b.in_hull, b.beta[0] == 2.0);
        }
    }

    #[test]
    fn polynomial_reinterpretation() {
        let p = poly_to_signomial(2, &[(1.0, vec![0.0, 0.0]), (1.0, vec![2.0, 1.0])]).unwrap();
        assert_eq!(p.signomial.terms().len(), 2);
        assert_eq!(p.signomial.coefficient_of(&ev(&[2.0, 1.0])), 1.0);
        assert!(poly_to_signomial(1, &[(1.0, vec![1.0]), (-2.0, vec![0.5]), (1.0, vec![0.0])]).is_err());
        assert!(poly_to_signomial(1, &[(1.0, vec![-1.0])]).is_err());
        let (lo, hi) = PolynomialForm::log_interval(1.0, std::f64::consts::E).unwrap();
        assert_abs_diff_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn json_schema_round_trip() {
        let f = quartic_pair();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"alpha\""));
        let g: Signomial = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let bad = r#"{"dimension": 2, "terms": [{"c": 1.0, "alpha": [1.0]}]}"#;
        assert!(serde_json::from_str::<Signomial>(bad).is_err());
    }
}
