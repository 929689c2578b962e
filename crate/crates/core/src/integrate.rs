//! Initial-value integration of `-p y'' + q(x) y = lambda y` on a single
//! piece, as the first-order system `(y, y')' = (y', (q(x) - lambda) y / p)`.
//!
//! The engine is an adaptive embedded Dormand-Prince 4(5) pair with mixed
//! absolute/relative error control and dense output by cubic Hermite
//! interpolation over accepted steps. Integration may run left-to-right or
//! right-to-left; the endpoint is always hit exactly.
//!
//! Everything is parameterized by `lambda = mu^2` so that negative spectral
//! parameters need no complex arithmetic.
//!
//! [`picard_solution`] provides an independent cross-check: fixed-point
//! iteration of the Volterra integral equation obtained from the variation
//! of parameters,
//!
//! ```text
//! y(x) = base(x) + 1/(sqrt(p) mu) * int_{x0}^{x} sin[mu (x-z)/sqrt(p)] q(z) y(z) dz
//! ```
//!
//! with `base` the trigonometric solution of the `q = 0` problem carrying
//! the same initial data, discretized by composite trapezoid quadrature on a
//! uniform grid. The differentiated form supplies `y'`.

use thiserror::Error;

use crate::model::Potential;

/// The pair `(y, y')` at a point; the state vector of the shooting system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub y: f64,
    pub dy: f64,
}

impl PhaseState {
    pub fn new(y: f64, dy: f64) -> Self {
        Self { y, dy }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.dy.is_finite()
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.y.abs().max(self.dy.abs())
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    state: PhaseState,
    /// Derivative of the state: `(y', y'')`.
    slope: PhaseState,
}

/// Dense-output trajectory over one piece.
///
/// Sample points are stored in integration order (strictly monotone in the
/// direction of travel), first at `x0`, last at `x1`. Evaluation between
/// nodes is cubic Hermite in each component, which reproduces the nodes
/// exactly.
#[derive(Debug, Clone)]
pub struct Trajectory {
    nodes: Vec<Node>,
}

impl Trajectory {
    /// Launch point of the integration.
    pub fn x0(&self) -> f64 {
        self.nodes.first().expect("trajectory has nodes").x
    }

    /// Target point of the integration.
    pub fn x1(&self) -> f64 {
        self.nodes.last().expect("trajectory has nodes").x
    }

    pub fn start_state(&self) -> PhaseState {
        self.nodes.first().expect("trajectory has nodes").state
    }

    pub fn end_state(&self) -> PhaseState {
        self.nodes.last().expect("trajectory has nodes").state
    }

    /// Sample nodes in integration order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, PhaseState)> + '_ {
        self.nodes.iter().map(|n| (n.x, n.state))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Evaluate the interpolant at `x`, which must lie within the covered
    /// span (a small tolerance absorbs roundoff at the endpoints).
    pub fn eval(&self, x: f64) -> PhaseState {
        let ascending = self.x1() >= self.x0();
        let n = self.nodes.len();
        if n == 1 {
            return self.nodes[0].state;
        }
        // Index of the left node of the bracketing segment.
        let seg = {
            let pos = self.nodes.partition_point(|node| {
                if ascending {
                    node.x <= x
                } else {
                    node.x >= x
                }
            });
            pos.clamp(1, n - 1) - 1
        };
        let l = &self.nodes[seg];
        let r = &self.nodes[seg + 1];
        if x == l.x {
            return l.state;
        }
        if x == r.x {
            return r.state;
        }
        let h = r.x - l.x;
        let t = (x - l.x) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let hermite = |yl: f64, ml: f64, yr: f64, mr: f64| {
            h00 * yl + h10 * h * ml + h01 * yr + h11 * h * mr
        };
        PhaseState {
            y: hermite(l.state.y, l.slope.y, r.state.y, r.slope.y),
            dy: hermite(l.state.dy, l.slope.dy, r.state.dy, r.slope.dy),
        }
    }
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("step size underflow near x = {x} (stiffness or blowup)")]
    StepSizeUnderflow { x: f64 },
    #[error("state became non-finite near x = {x}")]
    NonFiniteState { x: f64 },
    #[error("step budget exhausted near x = {x}")]
    TooManySteps { x: f64 },
    #[error("invalid argument: {0}")]
    BadArgument(&'static str),
    #[error("Picard kernel undefined for lambda = {lambda} (requires lambda > 0)")]
    PicardKernel { lambda: f64 },
    #[error(
        "Picard iteration diverging at iteration {iteration}: sup-difference grew from {previous:e} to {current:e}"
    )]
    PicardNonConvergence {
        iteration: usize,
        previous: f64,
        current: f64,
    },
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 4_000_000;

/// Integrate the piece equation from `(x0, state0)` to `x1`.
///
/// `tol` controls the local error per step (used as both absolute and
/// relative weight); the endpoint state is returned exactly at `x1`.
pub fn ivp_solve(
    p: f64,
    q: &Potential,
    lambda: f64,
    x0: f64,
    state0: PhaseState,
    x1: f64,
    tol: f64,
) -> Result<Trajectory, IntegrateError> {
    if x0 == x1 {
        return Err(IntegrateError::BadArgument("x0 and x1 must differ"));
    }
    if !(tol > 0.0) {
        return Err(IntegrateError::BadArgument("tol must be positive"));
    }
    if !(p > 0.0) {
        return Err(IntegrateError::BadArgument("p must be positive"));
    }
    if !state0.is_finite() {
        return Err(IntegrateError::NonFiniteState { x: x0 });
    }

    let rhs = |x: f64, s: PhaseState| PhaseState {
        y: s.dy,
        dy: (q.eval(x) - lambda) * s.y / p,
    };

    let span = x1 - x0;
    let h_floor = 64.0 * f64::EPSILON * span.abs().max(x0.abs()).max(x1.abs());
    let mut h = span / 100.0;
    let mut x = x0;
    let mut state = state0;
    let mut k0 = rhs(x, state);
    let mut nodes = Vec::with_capacity(128);
    nodes.push(Node { x, state, slope: k0 });

    let mut steps = 0usize;
    while x != x1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(IntegrateError::TooManySteps { x });
        }
        // Do not step past the target.
        let mut hitting_end = false;
        if (x + h - x1) * span.signum() >= 0.0 {
            h = x1 - x;
            hitting_end = true;
        }
        if h.abs() < h_floor {
            if hitting_end {
                // Remaining gap is below resolution; snap to the target.
                let slope = rhs(x1, state);
                nodes.push(Node { x: x1, state, slope });
                break;
            }
            return Err(IntegrateError::StepSizeUnderflow { x });
        }

        let mut k = [PhaseState::new(0.0, 0.0); 7];
        k[0] = k0;
        for (i, row) in A.iter().enumerate() {
            let mut ys = state;
            for (j, &aij) in row.iter().take(i + 1).enumerate() {
                ys.y += h * aij * k[j].y;
                ys.dy += h * aij * k[j].dy;
            }
            k[i + 1] = rhs(x + h * stage_offset(i + 1), ys);
        }

        let mut y5 = state;
        let mut err = PhaseState::new(0.0, 0.0);
        for i in 0..7 {
            y5.y += h * B5[i] * k[i].y;
            y5.dy += h * B5[i] * k[i].dy;
            err.y += h * (B5[i] - B4[i]) * k[i].y;
            err.dy += h * (B5[i] - B4[i]) * k[i].dy;
        }
        if !y5.is_finite() {
            return Err(IntegrateError::NonFiniteState { x });
        }

        let weight = |cur: f64, new: f64, e: f64| e.abs() / (tol + tol * cur.abs().max(new.abs()));
        let err_norm = weight(state.y, y5.y, err.y).max(weight(state.dy, y5.dy, err.dy));

        if err_norm <= 1.0 {
            x = if hitting_end { x1 } else { x + h };
            state = y5;
            k0 = rhs(x, state);
            nodes.push(Node { x, state, slope: k0 });
            let scale = if err_norm > 0.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h *= scale;
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    Ok(Trajectory { nodes })
}

fn stage_offset(stage: usize) -> f64 {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    C[stage]
}

/// The trigonometric base term of the Volterra equation: the exact solution
/// of the `q = 0` problem with the given initial data, valid for
/// `lambda > 0`.
#[derive(Debug, Clone, Copy)]
pub struct TrigBase {
    omega: f64,
    x0: f64,
    y0: f64,
    dy0: f64,
}

impl TrigBase {
    pub fn new(p: f64, lambda: f64, x0: f64, state0: PhaseState) -> Result<Self, IntegrateError> {
        if !(lambda > 0.0) {
            return Err(IntegrateError::PicardKernel { lambda });
        }
        if !(p > 0.0) {
            return Err(IntegrateError::BadArgument("p must be positive"));
        }
        Ok(Self {
            omega: (lambda / p).sqrt(),
            x0,
            y0: state0.y,
            dy0: state0.dy,
        })
    }

    /// Value and derivative of the base term at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let d = x - self.x0;
        let (s, c) = (self.omega * d).sin_cos();
        (
            self.y0 * c + self.dy0 * s / self.omega,
            -self.y0 * self.omega * s + self.dy0 * c,
        )
    }
}

/// Fixed-point (Picard) iteration of the Volterra integral equation on a
/// uniform grid, independent of the Runge-Kutta path.
///
/// Works in either direction (`x1` may be below `x0`); the oriented trapezoid
/// quadrature handles the sign. Requires `lambda > 0` because the displayed
/// kernel carries `1/mu`. Fails with `PicardNonConvergence` if the
/// sup-difference between successive iterates grows after a burn-in of
/// three iterations.
pub fn picard_solution(
    p: f64,
    q: &Potential,
    lambda: f64,
    base: &TrigBase,
    x0: f64,
    x1: f64,
    iterations: usize,
    grid: usize,
) -> Result<Trajectory, IntegrateError> {
    if !(lambda > 0.0) {
        return Err(IntegrateError::PicardKernel { lambda });
    }
    if iterations < 1 {
        return Err(IntegrateError::BadArgument("iterations must be >= 1"));
    }
    if grid < 2 {
        return Err(IntegrateError::BadArgument("grid must be >= 2"));
    }
    if x0 == x1 {
        return Err(IntegrateError::BadArgument("x0 and x1 must differ"));
    }

    let n = grid;
    let h = (x1 - x0) / ((n - 1) as f64);
    let sp = p.sqrt();
    let mu = lambda.sqrt();
    let xs: Vec<f64> = (0..n).map(|i| x0 + h * i as f64).collect();
    let qs: Vec<f64> = xs.iter().map(|&x| q.eval(x)).collect();
    // sin(mu (x - z) / sqrt(p)) separates into running integrals of
    // cos(theta(z)) q y and sin(theta(z)) q y with theta = mu x / sqrt(p).
    let thetas: Vec<(f64, f64)> = xs.iter().map(|&x| (mu * x / sp).sin_cos()).collect();

    let base_vals: Vec<(f64, f64)> = xs.iter().map(|&x| base.eval(x)).collect();
    let mut y: Vec<f64> = base_vals.iter().map(|v| v.0).collect();

    let kernel_integrals = |y: &[f64]| {
        let mut cints = vec![0.0; n];
        let mut sints = vec![0.0; n];
        let mut c_acc = 0.0;
        let mut s_acc = 0.0;
        for i in 1..n {
            let g_prev = qs[i - 1] * y[i - 1];
            let g_cur = qs[i] * y[i];
            c_acc += 0.5 * h * (thetas[i - 1].1 * g_prev + thetas[i].1 * g_cur);
            s_acc += 0.5 * h * (thetas[i - 1].0 * g_prev + thetas[i].0 * g_cur);
            cints[i] = c_acc;
            sints[i] = s_acc;
        }
        (cints, sints)
    };

    let mut prev_diff = f64::INFINITY;
    for m in 1..=iterations {
        let (cints, sints) = kernel_integrals(&y);
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            let (sin_t, cos_t) = thetas[i];
            let next = base_vals[i].0 + (sin_t * cints[i] - cos_t * sints[i]) / (sp * mu);
            diff = diff.max((next - y[i]).abs());
            scale = scale.max(next.abs());
            y[i] = next;
        }
        if m > 3 && diff > prev_diff && diff > 1e-13 * scale.max(1.0) {
            return Err(IntegrateError::PicardNonConvergence {
                iteration: m,
                previous: prev_diff,
                current: diff,
            });
        }
        prev_diff = diff;
    }

    // Differentiated equation on the converged iterate.
    let (cints, sints) = kernel_integrals(&y);
    let nodes = (0..n)
        .map(|i| {
            let (sin_t, cos_t) = thetas[i];
            let dy = base_vals[i].1 + (cos_t * cints[i] + sin_t * sints[i]) / p;
            let state = PhaseState::new(y[i], dy);
            let slope = PhaseState::new(dy, (qs[i] - lambda) * y[i] / p);
            Node { x: xs[i], state, slope }
        })
        .collect();

    Ok(Trajectory { nodes })
}
