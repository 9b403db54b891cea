//! The delayed iteration, its shadow sequence, and run orchestration.
//!
//! The scheme holds the iterate at x_0 for the first tau steps, then moves
//! with the gradient evaluated tau iterations back:
//!
//!   x_{t+1} = x_0                          for 0 <= t < tau
//!   x_{t+1} = x_t - eta * grad f(x_{t-tau}) for t >= tau
//!
//! The shadow sequence applies the same step sizes without the delay,
//! x~_{t+1} = x~_t - eta * grad f(x_t), starting from x~_0 = x_0. Its squared
//! distance to the minimizer contracts every step, which is what the bound
//! checkers consume.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{axpy, dist, dist_sq, norm_sq};

/// A differentiable objective. `grad` must be the exact analytic gradient of
/// `eval`; the test suites cross-check the two by central differences.
/// Implementations are read-only and safe to share across threads.
pub trait GradientOracle {
    fn dimension(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescentError {
    DimensionMismatch { expected: usize, got: usize },
    /// Step size must be positive and finite.
    BadStepSize,
    /// The delay must be at least 1.
    ZeroDelay,
    /// A run must cover at least the warmup segment.
    HorizonTooShort { max_iters: usize, tau: u32 },
    /// The oracle produced a non-finite value at iteration t.
    NonFinite { t: usize },
}

impl fmt::Display for DescentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DescentError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: oracle has {expected}, point has {got}")
            }
            DescentError::BadStepSize => write!(f, "step size must be positive and finite"),
            DescentError::ZeroDelay => write!(f, "delay tau must be at least 1"),
            DescentError::HorizonTooShort { max_iters, tau } => {
                write!(f, "max_iters = {max_iters} is shorter than the warmup tau = {tau}")
            }
            DescentError::NonFinite { t } => {
                write!(f, "objective or gradient became non-finite at iteration {t}")
            }
        }
    }
}

struct HistoryEntry {
    x: Vec<f64>,
    /// Gradient at x, filled the first time anything needs it.
    grad: Option<Vec<f64>>,
}

/// Walking state of one delayed run.
///
/// `history` holds the min(t, tau)+1 most recent iterates, oldest in front,
/// so the front entry is always x_{max(0, t-tau)} and the back is x_t. Each
/// entry carries its gradient once computed; a point's gradient is evaluated
/// exactly once per run no matter how many consumers ask for it.
pub struct DelayedRunState {
    t: usize,
    eta: f64,
    tau: u32,
    x0: Vec<f64>,
    history: VecDeque<HistoryEntry>,
    shadow: Vec<f64>,
}

impl DelayedRunState {
    pub fn new(x0: Vec<f64>, eta: f64, tau: u32) -> Result<Self, DescentError> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(DescentError::BadStepSize);
        }
        if tau == 0 {
            return Err(DescentError::ZeroDelay);
        }
        let mut history = VecDeque::with_capacity(tau as usize + 1);
        history.push_back(HistoryEntry {
            x: x0.clone(),
            grad: None,
        });
        Ok(Self {
            t: 0,
            eta,
            tau,
            shadow: x0.clone(),
            x0,
            history,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn dimension(&self) -> usize {
        self.x0.len()
    }

    /// The current iterate x_t.
    pub fn current(&self) -> &[f64] {
        &self.history.back().expect("history is never empty").x
    }

    /// The oldest stored iterate, x_{max(0, t-tau)}.
    pub fn oldest(&self) -> &[f64] {
        &self.history.front().expect("history is never empty").x
    }

    /// The shadow iterate x~_t.
    pub fn shadow(&self) -> &[f64] {
        &self.shadow
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    fn check_oracle<O: GradientOracle + ?Sized>(&self, oracle: &O) -> Result<(), DescentError> {
        if oracle.dimension() != self.x0.len() {
            return Err(DescentError::DimensionMismatch {
                expected: oracle.dimension(),
                got: self.x0.len(),
            });
        }
        Ok(())
    }

    fn fill_grad<O: GradientOracle + ?Sized>(entry: &mut HistoryEntry, oracle: &O) {
        if entry.grad.is_none() {
            entry.grad = Some(oracle.grad(&entry.x));
        }
    }

    /// Gradient at the current iterate, computing and caching it on first use.
    pub fn current_grad<O: GradientOracle + ?Sized>(&mut self, oracle: &O) -> &[f64] {
        let back = self.history.back_mut().expect("history is never empty");
        Self::fill_grad(back, oracle);
        back.grad.as_deref().expect("just filled")
    }
}

/// One delayed step: pushes x_{t+1} and advances t. During warmup (t < tau)
/// the new iterate is a bitwise copy of x_0.
pub fn dgd_step<O: GradientOracle + ?Sized>(
    state: &mut DelayedRunState,
    oracle: &O,
) -> Result<(), DescentError> {
    state.check_oracle(oracle)?;
    let next = if state.t < state.tau as usize {
        state.x0.clone()
    } else {
        let front = state.history.front_mut().expect("history is never empty");
        DelayedRunState::fill_grad(front, oracle);
        let g = front.grad.as_deref().expect("just filled").to_vec();
        let mut next = state.current().to_vec();
        axpy(&mut next, -state.eta, &g);
        next
    };
    state.history.push_back(HistoryEntry { x: next, grad: None });
    if state.history.len() > state.tau as usize + 1 {
        state.history.pop_front();
    }
    state.t += 1;
    Ok(())
}

/// One shadow step: x~ moves with the gradient at the actual current iterate.
/// Call before [`dgd_step`] so the gradient of x_t is computed once and shared.
pub fn shadow_step<O: GradientOracle + ?Sized>(
    state: &mut DelayedRunState,
    oracle: &O,
) -> Result<(), DescentError> {
    state.check_oracle(oracle)?;
    let eta = state.eta;
    let back = state.history.back_mut().expect("history is never empty");
    DelayedRunState::fill_grad(back, oracle);
    let g = back.grad.as_deref().expect("just filled");
    for (s, gi) in state.shadow.iter_mut().zip(g) {
        *s -= eta * gi;
    }
    Ok(())
}

/// Quantities recorded at iteration t, before stepping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    /// ||x_t - x*||
    pub dist: f64,
    /// f(x_t) - f*
    pub cost_gap: f64,
    /// ||grad f(x_t)||^2
    pub grad_sq: f64,
    /// ||x_t - x~_t||^2
    pub dev_sq: f64,
    /// ||x~_t - x*||^2
    pub shadow_dist_sq: f64,
}

/// Per-iteration record of a completed run, rows consecutive from t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub eta: f64,
    pub tau: u32,
    /// Dataset seed, when the caller ran against generated data.
    pub seed: Option<u64>,
    /// Identifier of the objective, when the caller provides one.
    pub problem: Option<String>,
    /// Absolute iterate-space accuracy of the reference point behind the
    /// dist, cost_gap and shadow_dist_sq columns. 0 means exact to rounding;
    /// a reference found by an iterative solver should record its tolerance
    /// here so checks can tell signal from reference error.
    pub reference_resolution: f64,
    pub rows: Vec<TraceRow>,
}

/// Runs the delayed scheme for `max_iters` steps, recording one row per
/// iterate including the final one (`max_iters + 1` rows in total).
pub fn run<O: GradientOracle + ?Sized>(
    oracle: &O,
    x0: &[f64],
    eta: f64,
    tau: u32,
    max_iters: usize,
    x_star: &[f64],
    f_star: f64,
) -> Result<RunTrace, DescentError> {
    if max_iters < tau as usize {
        return Err(DescentError::HorizonTooShort { max_iters, tau });
    }
    if x_star.len() != x0.len() {
        return Err(DescentError::DimensionMismatch {
            expected: x0.len(),
            got: x_star.len(),
        });
    }
    let mut state = DelayedRunState::new(x0.to_vec(), eta, tau)?;
    state.check_oracle(oracle)?;
    let mut rows = Vec::with_capacity(max_iters + 1);
    for t in 0..=max_iters {
        let grad_sq = norm_sq(state.current_grad(oracle));
        let x = state.current();
        let row = TraceRow {
            t,
            dist: dist(x, x_star),
            cost_gap: oracle.eval(x) - f_star,
            grad_sq,
            dev_sq: dist_sq(x, state.shadow()),
            shadow_dist_sq: dist_sq(state.shadow(), x_star),
        };
        if !row.dist.is_finite() || !row.cost_gap.is_finite() || !row.grad_sq.is_finite() {
            return Err(DescentError::NonFinite { t });
        }
        rows.push(row);
        if t < max_iters {
            shadow_step(&mut state, oracle)?;
            dgd_step(&mut state, oracle)?;
        }
    }
    Ok(RunTrace {
        eta,
        tau,
        seed: None,
        problem: None,
        reference_resolution: 0.0,
        rows,
    })
}

/// Central-difference gradient, (f(x + h e_i) - f(x - h e_i)) / (2h) per
/// coordinate. The independent check against analytic gradients.
pub fn finite_difference_grad<O: GradientOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    h: f64,
) -> Vec<f64> {
    assert!(h > 0.0, "step h must be positive");
    let mut out = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let fp = oracle.eval(&probe);
        probe[i] = xi - h;
        let fm = oracle.eval(&probe);
        probe[i] = xi;
        out[i] = (fp - fm) / (2.0 * h);
    }
    out
}
