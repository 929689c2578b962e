//! Problem data model: domain, piecewise coefficients, boundary matrices,
//! transmission matrix and its minors, validation and case analysis.
//!
//! The boundary conditions are
//!
//! ```text
//! V1(y) = a10*y(a) - a11*y'(a) - lambda*(a10'*y(a) - a11'*y'(a)) = 0
//! V2(y) = a20*y(b) - a21*y'(b) + lambda*(a20'*y(b) - a21'*y'(b)) = 0
//! ```
//!
//! and the transmission conditions couple the one-sided limits at `c`:
//!
//! ```text
//! Vj(y) = bj0m*y(c-) + bj1m*y'(c-) + bj0p*y(c+) + bj1p*y'(c+) = 0,  j = 1, 2.
//! ```
//!
//! The transmission matrix `T` is 2x4 with row `j = (bj0m, bj1m, bj0p, bj1p)`;
//! `Delta_kj` is the determinant of its k-th and j-th columns. `Delta12` and
//! `Delta34` (the determinants of the minus and plus 2x2 blocks) govern
//! solvability of the interface jump in either direction.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Endpoints and interface point, `a < c < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemDomain {
    pub a: f64,
    pub c: f64,
    pub b: f64,
}

impl ProblemDomain {
    pub fn new(a: f64, c: f64, b: f64) -> Self {
        Self { a, c, b }
    }

    /// Length of the left piece `[a, c]`.
    pub fn left_len(&self) -> f64 {
        self.c - self.a
    }

    /// Length of the right piece `[c, b]`.
    pub fn right_len(&self) -> f64 {
        self.b - self.c
    }
}

/// A real-valued potential evaluator on one piece.
///
/// The solver only needs pointwise evaluation; the CLI problem-file format
/// produces polynomials (a constant is a one-coefficient polynomial), while
/// library users may install any closure.
#[derive(Clone)]
pub enum Potential {
    /// Coefficients in ascending degree order: `c0 + c1*x + c2*x^2 + ...`.
    Polynomial(Vec<f64>),
    /// Arbitrary evaluator.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Polynomial(vec![0.0])
    }

    pub fn constant(v: f64) -> Self {
        Potential::Polynomial(vec![v])
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Polynomial(coeffs) => {
                coeffs.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
            }
            Potential::Custom(f) => f(x),
        }
    }

    /// Maximum of `|q|` sampled on `[lo, hi]`; used for the default search floor.
    pub fn max_abs_on(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let n = samples.max(2);
        (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * (i as f64) / ((n - 1) as f64);
                self.eval(x).abs()
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Potential::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Piecewise equation coefficients: constant `p` per piece, arbitrary `q`.
///
/// `q_minus` is evaluated on the closed interval `[a, c]` (its value at `c`
/// is the left limit `q(c-)`), `q_plus` on `[c, b]` (right limit at `c`).
#[derive(Debug, Clone)]
pub struct PieceCoefficients {
    pub p_minus: f64,
    pub p_plus: f64,
    pub q_minus: Potential,
    pub q_plus: Potential,
}

/// Boundary condition coefficients of both endpoints plus the derived
/// determinants `theta1 = det B0` and `theta2 = det B1`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCoefficients {
    pub alpha10: f64,
    pub alpha11: f64,
    pub alpha10p: f64,
    pub alpha11p: f64,
    pub alpha20: f64,
    pub alpha21: f64,
    pub alpha20p: f64,
    pub alpha21p: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl BoundaryCoefficients {
    /// Build from the left quadruple `(a10, a11, a10', a11')` and the right
    /// quadruple `(a20, a21, a20', a21')`; the thetas are computed.
    pub fn new(left: [f64; 4], right: [f64; 4]) -> Self {
        let [alpha10, alpha11, alpha10p, alpha11p] = left;
        let [alpha20, alpha21, alpha20p, alpha21p] = right;
        Self {
            alpha10,
            alpha11,
            alpha10p,
            alpha11p,
            alpha20,
            alpha21,
            alpha20p,
            alpha21p,
            theta1: alpha11 * alpha10p - alpha10 * alpha11p,
            theta2: alpha21 * alpha20p - alpha20 * alpha21p,
        }
    }

    /// Left boundary functional `V1` applied to `(y(a), y'(a))`.
    pub fn v1(&self, y: f64, dy: f64, lambda: f64) -> f64 {
        self.alpha10 * y - self.alpha11 * dy - lambda * (self.alpha10p * y - self.alpha11p * dy)
    }

    /// Right boundary functional `V2` applied to `(y(b), y'(b))`.
    pub fn v2(&self, y: f64, dy: f64, lambda: f64) -> f64 {
        self.alpha20 * y - self.alpha21 * dy + lambda * (self.alpha20p * y - self.alpha21p * dy)
    }

    /// Magnitude scale of `V1`'s coefficients at a given `lambda`.
    pub fn v1_scale(&self, lambda: f64) -> f64 {
        self.alpha10.abs().max(self.alpha11.abs())
            + lambda.abs() * self.alpha10p.abs().max(self.alpha11p.abs())
    }

    /// Magnitude scale of `V2`'s coefficients at a given `lambda`.
    pub fn v2_scale(&self, lambda: f64) -> f64 {
        self.alpha20.abs().max(self.alpha21.abs())
            + lambda.abs() * self.alpha20p.abs().max(self.alpha21p.abs())
    }
}

/// The six 2x2 minors of the transmission matrix, `d_kj` = columns `k` and `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minors {
    pub d12: f64,
    pub d13: f64,
    pub d14: f64,
    pub d23: f64,
    pub d24: f64,
    pub d34: f64,
}

/// Transmission matrix with row `j = (bj0-, bj1-, bj0+, bj1+)` and its
/// precomputed minors.
#[derive(Debug, Clone, Copy)]
pub struct TransmissionCoefficients {
    pub beta: [[f64; 4]; 2],
    pub delta: Minors,
}

impl TransmissionCoefficients {
    pub fn new(beta: [[f64; 4]; 2]) -> Self {
        let minor = |k: usize, j: usize| beta[0][k] * beta[1][j] - beta[0][j] * beta[1][k];
        Self {
            beta,
            delta: Minors {
                d12: minor(0, 1),
                d13: minor(0, 2),
                d14: minor(0, 3),
                d23: minor(1, 2),
                d24: minor(1, 3),
                d34: minor(2, 3),
            },
        }
    }

    /// Identity interface: `y` and `y'` continuous across `c`.
    pub fn continuity() -> Self {
        Self::new([[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]])
    }

    /// Residuals of both transmission rows on a pair of one-sided states.
    pub fn row_residuals(&self, minus: (f64, f64), plus: (f64, f64)) -> [f64; 2] {
        let row = |j: usize| {
            self.beta[j][0] * minus.0
                + self.beta[j][1] * minus.1
                + self.beta[j][2] * plus.0
                + self.beta[j][3] * plus.1
        };
        [row(0), row(1)]
    }

    /// Sum of absolute row terms, the natural scale for residual comparison.
    pub fn row_scales(&self, minus: (f64, f64), plus: (f64, f64)) -> [f64; 2] {
        let row = |j: usize| {
            (self.beta[j][0] * minus.0).abs()
                + (self.beta[j][1] * minus.1).abs()
                + (self.beta[j][2] * plus.0).abs()
                + (self.beta[j][3] * plus.1).abs()
        };
        [row(0), row(1)]
    }
}

/// Minor of columns `k < j` (1-based) of the transmission matrix.
pub fn delta(tm: &TransmissionCoefficients, k: usize, j: usize) -> Result<f64, ModelError> {
    if k < 1 || j > 4 || k >= j {
        return Err(ModelError::MinorIndex { k, j });
    }
    Ok(tm.beta[0][k - 1] * tm.beta[1][j - 1] - tm.beta[0][j - 1] * tm.beta[1][k - 1])
}

/// Full problem description prior to validation.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub domain: ProblemDomain,
    pub coeffs: PieceCoefficients,
    pub bc: BoundaryCoefficients,
    pub tm: TransmissionCoefficients,
    /// Enforce the sign assumptions `theta1, theta2, Delta12, Delta34 > 0`
    /// as errors instead of warnings.
    pub strict: bool,
}

/// Which of the four coefficient cases applies, by the zero pattern of
/// `(alpha11', alpha21')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `alpha21' != 0`, `alpha11' != 0`
    I,
    /// `alpha21' != 0`, `alpha11' == 0`
    II,
    /// `alpha21' == 0`, `alpha11' != 0`
    III,
    /// `alpha21' == 0`, `alpha11' == 0`
    IV,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseTag::I => write!(f, "i"),
            CaseTag::II => write!(f, "ii"),
            CaseTag::III => write!(f, "iii"),
            CaseTag::IV => write!(f, "iv"),
        }
    }
}

/// Case tag plus the `Delta24 = 0` degeneracy flag. When `Delta24` vanishes
/// every leading term of the characteristic-function asymptotics carries a
/// zero factor, so those formulas are uninformative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCase {
    pub tag: CaseTag,
    pub degenerate_leading: bool,
}

/// Classify the coefficient case. `|coef| <= zero_tol` counts as zero;
/// the default tolerance is exact zero.
pub fn classify(
    bc: &BoundaryCoefficients,
    tm: &TransmissionCoefficients,
    zero_tol: f64,
) -> AsymptoticCase {
    let a11p_zero = bc.alpha11p.abs() <= zero_tol;
    let a21p_zero = bc.alpha21p.abs() <= zero_tol;
    let tag = match (a21p_zero, a11p_zero) {
        (false, false) => CaseTag::I,
        (false, true) => CaseTag::II,
        (true, false) => CaseTag::III,
        (true, true) => CaseTag::IV,
    };
    AsymptoticCase {
        tag,
        degenerate_leading: tm.delta.d24.abs() <= zero_tol,
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("domain ordering violated: need a < c < b, got a={a}, c={c}, b={b}")]
    DomainOrder { a: f64, c: f64, b: f64 },
    #[error("p must be positive on both pieces: p_minus={p_minus}, p_plus={p_plus}")]
    NonpositiveP { p_minus: f64, p_plus: f64 },
    #[error("singular transmission matrix: Delta12={d12}, Delta34={d34} (both must be nonzero)")]
    SingularTransmission { d12: f64, d34: f64 },
    #[error("all four coefficients of boundary condition {which} are zero")]
    DegenerateBoundary { which: &'static str },
    #[error("q is not finite at x={x} on the {piece} piece")]
    NonFinitePotential { x: f64, piece: &'static str },
    #[error("coefficient {name} is not finite")]
    NonFiniteCoefficient { name: &'static str },
    #[error("strict mode: sign assumption violated, {what}")]
    SignAssumption { what: String },
    #[error("minor index out of range: need 1 <= k < j <= 4, got k={k}, j={j}")]
    MinorIndex { k: usize, j: usize },
}

/// Non-fatal findings attached to a validated problem in non-strict mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationWarning {
    Theta1NotPositive(f64),
    Theta2NotPositive(f64),
    Delta12NotPositive(f64),
    Delta34NotPositive(f64),
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::Theta1NotPositive(v) => write!(f, "theta1 = {v} <= 0"),
            ValidationWarning::Theta2NotPositive(v) => write!(f, "theta2 = {v} <= 0"),
            ValidationWarning::Delta12NotPositive(v) => write!(f, "Delta12 = {v} < 0"),
            ValidationWarning::Delta34NotPositive(v) => write!(f, "Delta34 = {v} < 0"),
        }
    }
}

/// A problem that passed the hard invariants. Immutable; safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct ValidatedProblem {
    spec: ProblemSpec,
    warnings: Vec<ValidationWarning>,
    case: AsymptoticCase,
}

impl ValidatedProblem {
    pub fn domain(&self) -> &ProblemDomain {
        &self.spec.domain
    }

    pub fn coeffs(&self) -> &PieceCoefficients {
        &self.spec.coeffs
    }

    pub fn bc(&self) -> &BoundaryCoefficients {
        &self.spec.bc
    }

    pub fn tm(&self) -> &TransmissionCoefficients {
        &self.spec.tm
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Case classification at exact zero tolerance, fixed at validation time.
    pub fn case(&self) -> AsymptoticCase {
        self.case
    }

    pub fn warnings(&self) -> &[ValidationWarning] {
        &self.warnings
    }

    /// Default eigenvalue search floor `-(10 * max|q|)` over both pieces.
    pub fn lambda_floor(&self) -> f64 {
        let d = &self.spec.domain;
        let q_max = self
            .spec
            .coeffs
            .q_minus
            .max_abs_on(d.a, d.c, 129)
            .max(self.spec.coeffs.q_plus.max_abs_on(d.c, d.b, 129));
        -10.0 * q_max
    }
}

const Q_VALIDATION_SAMPLES: usize = 33;

/// Check the hard invariants and return a validated handle.
///
/// Hard errors: domain ordering, non-positive `p`, singular transmission
/// blocks, an all-zero boundary quadruple, non-finite coefficients. The
/// paper's standing sign assumptions (`theta1, theta2 > 0`,
/// `Delta12, Delta34 > 0`) are warnings unless `spec.strict` is set.
pub fn validate(spec: ProblemSpec) -> Result<ValidatedProblem, ModelError> {
    let ProblemDomain { a, c, b } = spec.domain;
    if !(a.is_finite() && c.is_finite() && b.is_finite()) {
        return Err(ModelError::NonFiniteCoefficient { name: "domain point" });
    }
    if !(a < c && c < b) {
        return Err(ModelError::DomainOrder { a, c, b });
    }
    if !(spec.coeffs.p_minus > 0.0 && spec.coeffs.p_plus > 0.0)
        || !spec.coeffs.p_minus.is_finite()
        || !spec.coeffs.p_plus.is_finite()
    {
        return Err(ModelError::NonpositiveP {
            p_minus: spec.coeffs.p_minus,
            p_plus: spec.coeffs.p_plus,
        });
    }

    let bc = &spec.bc;
    let left = [bc.alpha10, bc.alpha11, bc.alpha10p, bc.alpha11p];
    let right = [bc.alpha20, bc.alpha21, bc.alpha20p, bc.alpha21p];
    if left.iter().any(|v| !v.is_finite()) || right.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteCoefficient { name: "boundary coefficient" });
    }
    if left.iter().all(|&v| v == 0.0) {
        return Err(ModelError::DegenerateBoundary { which: "left" });
    }
    if right.iter().all(|&v| v == 0.0) {
        return Err(ModelError::DegenerateBoundary { which: "right" });
    }

    if spec.tm.beta.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteCoefficient { name: "transmission coefficient" });
    }
    let d12 = spec.tm.delta.d12;
    let d34 = spec.tm.delta.d34;
    if d12 == 0.0 || d34 == 0.0 {
        return Err(ModelError::SingularTransmission { d12, d34 });
    }

    for i in 0..Q_VALIDATION_SAMPLES {
        let t = (i as f64) / ((Q_VALIDATION_SAMPLES - 1) as f64);
        let xl = a + (c - a) * t;
        if !spec.coeffs.q_minus.eval(xl).is_finite() {
            return Err(ModelError::NonFinitePotential { x: xl, piece: "left" });
        }
        let xr = c + (b - c) * t;
        if !spec.coeffs.q_plus.eval(xr).is_finite() {
            return Err(ModelError::NonFinitePotential { x: xr, piece: "right" });
        }
    }

    let mut warnings = Vec::new();
    if !(bc.theta1 > 0.0) {
        warnings.push(ValidationWarning::Theta1NotPositive(bc.theta1));
    }
    if !(bc.theta2 > 0.0) {
        warnings.push(ValidationWarning::Theta2NotPositive(bc.theta2));
    }
    if d12 < 0.0 {
        warnings.push(ValidationWarning::Delta12NotPositive(d12));
    }
    if d34 < 0.0 {
        warnings.push(ValidationWarning::Delta34NotPositive(d34));
    }
    if spec.strict && !warnings.is_empty() {
        let what = warnings
            .iter()
            .map(ValidationWarning::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ModelError::SignAssumption { what });
    }

    let case = classify(&spec.bc, &spec.tm, 0.0);
    Ok(ValidatedProblem { spec, warnings, case })
}
