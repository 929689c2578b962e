//! Fundamental solutions `phi` (launched at `a`) and `psi` (launched at `b`),
//! carried across the interface by the exact transmission jump.
//!
//! The launch data make each solution satisfy its boundary condition as an
//! algebraic identity:
//!
//! ```text
//! phi:  y(a) = a11 - lambda*a11',   y'(a) = a10 - lambda*a10'
//! psi:  y(b) = a21 + lambda*a21',   y'(b) = a20 + lambda*a20'
//! ```
//!
//! At `c` the two transmission rows form a 2x2 linear system relating the
//! one-sided states; the jump maps solve it directly (Cramer on the minus or
//! plus block), so both rows hold to machine precision by construction. The
//! maps are mutual inverses whenever `Delta12` and `Delta34` are nonzero.

use thiserror::Error;

use crate::integrate::{ivp_solve, IntegrateError, PhaseState, Trajectory};
use crate::model::{BoundaryCoefficients, TransmissionCoefficients, ValidatedProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FundamentalKind {
    /// Left-launched solution satisfying the boundary condition at `a`.
    Phi,
    /// Right-launched solution satisfying the boundary condition at `b`.
    Psi,
}

/// A fundamental solution over both pieces with the interface jump recorded.
///
/// `jump_in` is the one-sided state at `c` on the launch side, `jump_out`
/// the state on the continued side; the pair satisfies both transmission
/// rows exactly.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub kind: FundamentalKind,
    pub lambda: f64,
    /// Trajectory covering `[a, c]` (for `phi` integrated a -> c, for `psi`
    /// integrated c -> a).
    pub left: Trajectory,
    /// Trajectory covering `[c, b]`.
    pub right: Trajectory,
    pub jump_in: PhaseState,
    pub jump_out: PhaseState,
}

impl FundamentalSolution {
    /// One-sided state at the interface from the left piece.
    pub fn at_c_minus(&self) -> PhaseState {
        match self.kind {
            FundamentalKind::Phi => self.jump_in,
            FundamentalKind::Psi => self.jump_out,
        }
    }

    /// One-sided state at the interface from the right piece.
    pub fn at_c_plus(&self) -> PhaseState {
        match self.kind {
            FundamentalKind::Phi => self.jump_out,
            FundamentalKind::Psi => self.jump_in,
        }
    }

    pub fn at_a(&self) -> PhaseState {
        match self.kind {
            FundamentalKind::Phi => self.left.start_state(),
            FundamentalKind::Psi => self.left.end_state(),
        }
    }

    pub fn at_b(&self) -> PhaseState {
        match self.kind {
            FundamentalKind::Phi => self.right.end_state(),
            FundamentalKind::Psi => self.right.start_state(),
        }
    }

    /// Evaluate on the piece containing `x`; at `x = c` the `side` of the
    /// interface must be chosen explicitly via [`Self::at_c_minus`] /
    /// [`Self::at_c_plus`] (this method returns the left limit there).
    pub fn eval(&self, x: f64, c: f64) -> PhaseState {
        if x <= c {
            self.left.eval(x)
        } else {
            self.right.eval(x)
        }
    }
}

#[derive(Debug, Error)]
pub enum FundamentalError {
    #[error("singular transmission block: {which} = 0")]
    SingularTransmission { which: &'static str },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Launch state of `phi` at `a`; boundary condition (at `a`) holds identically.
pub fn left_initial_phi(bc: &BoundaryCoefficients, lambda: f64) -> PhaseState {
    PhaseState::new(
        bc.alpha11 - lambda * bc.alpha11p,
        bc.alpha10 - lambda * bc.alpha10p,
    )
}

/// Launch state of `psi` at `b`; boundary condition (at `b`) holds identically.
pub fn right_initial_psi(bc: &BoundaryCoefficients, lambda: f64) -> PhaseState {
    PhaseState::new(
        bc.alpha21 + lambda * bc.alpha21p,
        bc.alpha20 + lambda * bc.alpha20p,
    )
}

/// Map the state at `c-` to the state at `c+` by solving both transmission
/// rows for `(y(c+), y'(c+))`. Requires `Delta34 != 0`.
pub fn transmit_left_to_right(
    tm: &TransmissionCoefficients,
    state_minus: PhaseState,
) -> Result<PhaseState, FundamentalError> {
    let d34 = tm.delta.d34;
    if d34 == 0.0 {
        return Err(FundamentalError::SingularTransmission { which: "Delta34" });
    }
    let b = tm.beta;
    let r1 = -(b[0][0] * state_minus.y + b[0][1] * state_minus.dy);
    let r2 = -(b[1][0] * state_minus.y + b[1][1] * state_minus.dy);
    // Cramer on the plus block [[b103, b113], [b203, b213]].
    Ok(PhaseState::new(
        (r1 * b[1][3] - r2 * b[0][3]) / d34,
        (b[0][2] * r2 - b[1][2] * r1) / d34,
    ))
}

/// Map the state at `c+` to the state at `c-`; inverse of
/// [`transmit_left_to_right`]. Requires `Delta12 != 0`.
pub fn transmit_right_to_left(
    tm: &TransmissionCoefficients,
    state_plus: PhaseState,
) -> Result<PhaseState, FundamentalError> {
    let d12 = tm.delta.d12;
    if d12 == 0.0 {
        return Err(FundamentalError::SingularTransmission { which: "Delta12" });
    }
    let b = tm.beta;
    let r1 = -(b[0][2] * state_plus.y + b[0][3] * state_plus.dy);
    let r2 = -(b[1][2] * state_plus.y + b[1][3] * state_plus.dy);
    Ok(PhaseState::new(
        (r1 * b[1][1] - r2 * b[0][1]) / d12,
        (b[0][0] * r2 - b[1][0] * r1) / d12,
    ))
}

/// Build `phi` at `lambda`: launch at `a`, integrate to `c`, jump, integrate
/// to `b`.
pub fn build_phi(
    problem: &ValidatedProblem,
    lambda: f64,
    tol: f64,
) -> Result<FundamentalSolution, FundamentalError> {
    let d = problem.domain();
    let co = problem.coeffs();
    let start = left_initial_phi(problem.bc(), lambda);
    let left = ivp_solve(co.p_minus, &co.q_minus, lambda, d.a, start, d.c, tol)?;
    let at_c_minus = left.end_state();
    let at_c_plus = transmit_left_to_right(problem.tm(), at_c_minus)?;
    let right = ivp_solve(co.p_plus, &co.q_plus, lambda, d.c, at_c_plus, d.b, tol)?;
    Ok(FundamentalSolution {
        kind: FundamentalKind::Phi,
        lambda,
        left,
        right,
        jump_in: at_c_minus,
        jump_out: at_c_plus,
    })
}

/// Build `psi` at `lambda`: launch at `b`, integrate to `c`, jump, integrate
/// to `a`.
pub fn build_psi(
    problem: &ValidatedProblem,
    lambda: f64,
    tol: f64,
) -> Result<FundamentalSolution, FundamentalError> {
    let d = problem.domain();
    let co = problem.coeffs();
    let start = right_initial_psi(problem.bc(), lambda);
    let right = ivp_solve(co.p_plus, &co.q_plus, lambda, d.b, start, d.c, tol)?;
    let at_c_plus = right.end_state();
    let at_c_minus = transmit_right_to_left(problem.tm(), at_c_plus)?;
    let left = ivp_solve(co.p_minus, &co.q_minus, lambda, d.c, at_c_minus, d.a, tol)?;
    Ok(FundamentalSolution {
        kind: FundamentalKind::Psi,
        lambda,
        left,
        right,
        jump_in: at_c_plus,
        jump_out: at_c_minus,
    })
}

/// Residuals of both transmission rows on the solution's interface pair,
/// alongside their magnitude scales.
pub fn transmission_residuals(
    tm: &TransmissionCoefficients,
    sol: &FundamentalSolution,
) -> ([f64; 2], [f64; 2]) {
    let minus = sol.at_c_minus();
    let plus = sol.at_c_plus();
    (
        tm.row_residuals((minus.y, minus.dy), (plus.y, plus.dy)),
        tm.row_scales((minus.y, minus.dy), (plus.y, plus.dy)),
    )
}
