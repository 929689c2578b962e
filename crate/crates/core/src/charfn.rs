//! The characteristic function `w(lambda)` as a Wronskian of `phi` and `psi`.
//!
//! On each piece the Wronskian `W[phi, psi] = phi psi' - phi' psi` is
//! constant in `x` (constant `p` per piece). Because both solutions pass
//! through the same interface jump `L` with `det L = Delta12 / Delta34`,
//! the two piece Wronskians satisfy
//!
//! ```text
//! Delta12 * w_minus = Delta34 * w_plus
//! ```
//!
//! and that common value is taken as the canonical `w`. Its zeros are
//! exactly the eigenvalues. Evaluating both sides independently (`w_minus`
//! from the integrated `psi` at `a`, `w_plus` from the integrated `phi` at
//! `b`) gives a built-in consistency check on the integration: the relative
//! defect between them is reported with every sample.

use thiserror::Error;

use crate::fundamental::{build_phi, build_psi, left_initial_phi, FundamentalError, FundamentalSolution};
use crate::model::ValidatedProblem;

/// One evaluation of the characteristic function with its cross-check.
#[derive(Debug, Clone, Copy)]
pub struct CharSample {
    pub lambda: f64,
    /// Wronskian of `(phi-, psi-)` on the left piece.
    pub w_minus: f64,
    /// Wronskian of `(phi+, psi+)` on the right piece.
    pub w_plus: f64,
    /// Canonical value `Delta12 * w_minus`.
    pub w: f64,
    /// Relative defect between `Delta12 * w_minus` and `Delta34 * w_plus`.
    pub consistency: f64,
}

#[derive(Debug, Error)]
pub enum CharfnError {
    #[error(
        "two-sided Wronskian consistency defect {defect:e} exceeds {limit:e} at lambda = {lambda} (integration failure)"
    )]
    Consistency {
        lambda: f64,
        defect: f64,
        limit: f64,
        sample: CharSample,
    },
    #[error(transparent)]
    Fundamental(#[from] FundamentalError),
}

/// Defect above which a sample is rejected as an integration failure.
pub const CONSISTENCY_LIMIT: f64 = 1e-6;

// Noise floor for the defect denominator: near eigenvalues both scaled
// Wronskians vanish and their difference is cancellation noise, so the
// denominator keeps a small multiple of the product magnitude (plus an
// absolute floor against 0/0).
const DEFECT_FLOOR_REL: f64 = 1e-8;
const DEFECT_FLOOR_ABS: f64 = 1e-300;

fn wronskian(u: crate::integrate::PhaseState, v: crate::integrate::PhaseState) -> f64 {
    u.y * v.dy - u.dy * v.y
}

fn wronskian_magnitude(u: crate::integrate::PhaseState, v: crate::integrate::PhaseState) -> f64 {
    (u.y * v.dy).abs() + (u.dy * v.y).abs()
}

/// Assemble a sample from already-built fundamental solutions.
pub fn sample_from(
    problem: &ValidatedProblem,
    phi: &FundamentalSolution,
    psi: &FundamentalSolution,
) -> CharSample {
    let d12 = problem.tm().delta.d12;
    let d34 = problem.tm().delta.d34;
    let w_minus = wronskian(phi.at_a(), psi.at_a());
    let w_plus = wronskian(phi.at_b(), psi.at_b());
    let lhs = d12 * w_minus;
    let rhs = d34 * w_plus;
    let mag = d12.abs() * wronskian_magnitude(phi.at_a(), psi.at_a())
        + d34.abs() * wronskian_magnitude(phi.at_b(), psi.at_b());
    let floor = DEFECT_FLOOR_REL * mag + DEFECT_FLOOR_ABS;
    let consistency = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(floor);
    CharSample {
        lambda: phi.lambda,
        w_minus,
        w_plus,
        w: lhs,
        consistency,
    }
}

/// Build `phi` and `psi` at `lambda` and evaluate the characteristic
/// function; errors if the two-sided defect signals an integration failure.
pub fn char_eval(
    problem: &ValidatedProblem,
    lambda: f64,
    tol: f64,
) -> Result<CharSample, CharfnError> {
    let phi = build_phi(problem, lambda, tol)?;
    let psi = build_psi(problem, lambda, tol)?;
    let sample = sample_from(problem, &phi, &psi);
    if sample.consistency > CONSISTENCY_LIMIT {
        return Err(CharfnError::Consistency {
            lambda,
            defect: sample.consistency,
            limit: CONSISTENCY_LIMIT,
            sample,
        });
    }
    Ok(sample)
}

/// Redundant formula check: the canonical `w` evaluated at `x = a`, with
/// `phi(a), phi'(a)` substituted from the launch data instead of any
/// integration. Expects `psi` already built at the same `lambda`.
pub fn char_at_a(problem: &ValidatedProblem, psi: &FundamentalSolution) -> f64 {
    let phi_a = left_initial_phi(problem.bc(), psi.lambda);
    problem.tm().delta.d12 * wronskian(phi_a, psi.at_a())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental::build_psi;
    use crate::model::{
        validate, BoundaryCoefficients, PieceCoefficients, Potential, ProblemDomain, ProblemSpec,
        TransmissionCoefficients,
    };
    use std::f64::consts::PI;

    fn paper_example() -> ValidatedProblem {
        validate(ProblemSpec {
            domain: ProblemDomain::new(-PI, 0.0, PI),
            coeffs: PieceCoefficients {
                p_minus: 1.0,
                p_plus: 1.0,
                q_minus: Potential::zero(),
                q_plus: Potential::zero(),
            },
            bc: BoundaryCoefficients::new([1.0, 0.0, 0.0, 1.0], [0.0, -1.0, 1.0, 0.0]),
            tm: TransmissionCoefficients::new([[1.0, 0.0, -2.0, 0.0], [0.0, 1.0, 0.0, -1.0]]),
            strict: false,
        })
        .unwrap()
    }

    fn dirichlet_continuity() -> ValidatedProblem {
        validate(ProblemSpec {
            domain: ProblemDomain::new(0.0, 0.5 * PI, PI),
            coeffs: PieceCoefficients {
                p_minus: 1.0,
                p_plus: 1.0,
                q_minus: Potential::zero(),
                q_plus: Potential::zero(),
            },
            bc: BoundaryCoefficients::new([1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]),
            tm: TransmissionCoefficients::continuity(),
            strict: false,
        })
        .unwrap()
    }

    /// Hand-derived trigonometric characteristic value of the paper example,
    /// obtained from closed-form shooting with the half jump at 0:
    /// `w = mu^4 (2 S^2 - C^2) + 3 mu^3 S C + 3 mu S C + 2 C^2 - S^2`
    /// with `S = sin(mu pi)`, `C = cos(mu pi)` (and `Delta12 = 1`).
    fn paper_example_w_closed(mu: f64) -> f64 {
        let s = (mu * PI).sin();
        let c = (mu * PI).cos();
        mu.powi(4) * (2.0 * s * s - c * c) + 3.0 * mu.powi(3) * s * c + 3.0 * mu * s * c
            + 2.0 * c * c
            - s * s
    }

    #[test]
    fn dirichlet_zeros_at_integer_squares() {
        // w(lambda) proportional to sin(sqrt(lambda) pi): sign changes
        // bracket n^2 and nowhere else.
        let problem = dirichlet_continuity();
        for n in 1..=10 {
            let lam = (n * n) as f64;
            let lo = char_eval(&problem, lam - 0.5, 1e-11).unwrap().w;
            let hi = char_eval(&problem, lam + 0.5, 1e-11).unwrap().w;
            assert!(lo * hi < 0.0, "no sign change around {lam}");
            // Bisection to 1e-9 and compare against the integer square.
            let (mut a, mut b) = (lam - 0.5, lam + 0.5);
            let (mut fa, _) = (lo, hi);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = char_eval(&problem, m, 1e-11).unwrap().w;
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let root = 0.5 * (a + b);
            assert!(
                (root - lam).abs() <= 1e-6 * lam,
                "root {root} vs {lam}"
            );
        }
    }

    #[test]
    fn paper_example_matches_trig_oracle() {
        let problem = paper_example();
        for i in 0..40 {
            let mu = 0.17 + 0.24 * i as f64;
            let lambda = mu * mu;
            let sample = char_eval(&problem, lambda, 1e-12).unwrap();
            let expected = paper_example_w_closed(mu);
            let scale = expected.abs().max(mu.powi(4));
            assert!(
                (sample.w - expected).abs() <= 1e-8 * scale,
                "mu = {mu}: {} vs {}",
                sample.w,
                expected
            );
        }
    }

    #[test]
    fn two_sided_identity_holds() {
        let problem = paper_example();
        let d12 = problem.tm().delta.d12;
        let d34 = problem.tm().delta.d34;
        for i in 0..25 {
            let lambda = -6.0 + 4.3 * i as f64;
            let s = char_eval(&problem, lambda, 1e-12).unwrap();
            assert!(
                s.consistency <= 1e-8,
                "lambda = {lambda}: defect {}",
                s.consistency
            );
            let lhs = d12 * s.w_minus;
            let rhs = d34 * s.w_plus;
            assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()).max(1e-12));
        }
    }

    #[test]
    fn wronskian_constant_on_each_piece() {
        let problem = paper_example();
        let lambda = 13.7;
        let phi = crate::fundamental::build_phi(&problem, lambda, 1e-12).unwrap();
        let psi = crate::fundamental::build_psi(&problem, lambda, 1e-12).unwrap();
        let d = problem.domain();
        for (lo, hi, left) in [(d.a, d.c, true), (d.c, d.b, false)] {
            let w_at = |x: f64| {
                let (u, v) = if left {
                    (phi.left.eval(x), psi.left.eval(x))
                } else {
                    (phi.right.eval(x), psi.right.eval(x))
                };
                u.y * v.dy - u.dy * v.y
            };
            let vals: Vec<f64> = (0..11)
                .map(|i| w_at(lo + (hi - lo) * i as f64 / 10.0))
                .collect();
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - vals[0]).abs()));
            assert!(spread <= 1e-8 * scale, "spread {spread:e} vs scale {scale:e}");
        }
    }

    #[test]
    fn char_at_a_agrees_with_char_eval() {
        let problem = paper_example();
        for i in 0..50 {
            let lambda = -4.0 + 2.13 * i as f64;
            let sample = char_eval(&problem, lambda, 1e-12).unwrap();
            let psi = build_psi(&problem, lambda, 1e-12).unwrap();
            let redundant = char_at_a(&problem, &psi);
            let scale = sample.w.abs().max(redundant.abs()).max(1e-12);
            assert!(
                (sample.w - redundant).abs() <= 1e-8 * scale,
                "lambda = {lambda}: {} vs {}",
                sample.w,
                redundant
            );
            assert!(sample.w.signum() == redundant.signum() || sample.w.abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn lambda_zero_is_finite() {
        let problem = dirichlet_continuity();
        let s = char_eval(&problem, 0.0, 1e-11).unwrap();
        assert!(s.w.is_finite());
        // phi(x) = x at lambda = 0, psi(x) = x - pi; w_minus = phi psi' - phi' psi = pi.
        assert!((s.w - PI).abs() < 1e-9, "w(0) = {}", s.w);
    }

    #[test]
    fn continuity_in_lambda_on_grid() {
        let problem = paper_example();
        let n = 200;
        let (lo, hi) = (0.0, 30.0);
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                char_eval(&problem, lo + (hi - lo) * i as f64 / n as f64, 1e-11)
                    .unwrap()
                    .w
            })
            .collect();
        // Neighboring differences bounded by ~3x the local Lipschitz estimate
        // from the previous gap (no spurious jumps).
        for i in 2..vals.len() {
            let prev = (vals[i - 1] - vals[i - 2]).abs();
            let cur = (vals[i] - vals[i - 1]).abs();
            let scale = vals[i].abs().max(vals[i - 1].abs()).max(1.0);
            assert!(
                cur <= 3.0 * prev + 1e-3 * scale,
                "jump at node {i}: {cur:e} after {prev:e}"
            );
        }
    }
}
