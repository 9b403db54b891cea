//! Closed-form constants and step-size thresholds for the delayed iteration.
//!
//! The delay tau, the smoothness constant L, the strong convexity modulus mu
//! (or a Polyak-Lojasiewicz constant zeta) and the Young split q determine how
//! large a step size the contraction arguments tolerate. Everything here is a
//! pure f64 function of its arguments.

use core::fmt;
use libm::{floor, sqrt};

/// Invalid input to one of the constant or threshold evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantsError {
    /// The index would be below 1/2, the smallest admissible half-integer.
    HalfIntegerTooSmall,
    /// The value is not of the form k/2 for an integer k.
    NotHalfIntegral,
    /// Named parameter must be strictly positive and finite.
    NotPositive(&'static str),
    /// Named parameter must be nonnegative and finite.
    Negative(&'static str),
    /// Strong convexity cannot exceed smoothness.
    MuAboveL,
    /// The delay must be at least one iteration.
    ZeroDelay,
    /// The strongly convex threshold needs mu > 0.
    StrongConvexityRequired,
    /// The gradient-dominated threshold needs zeta > 0.
    PlConstantRequired,
}

impl fmt::Display for ConstantsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantsError::HalfIntegerTooSmall => {
                write!(f, "half-integer index must be at least 1/2")
            }
            ConstantsError::NotHalfIntegral => {
                write!(f, "value is not of the form k/2 for an integer k")
            }
            ConstantsError::NotPositive(name) => {
                write!(f, "{name} must be a positive finite number")
            }
            ConstantsError::Negative(name) => {
                write!(f, "{name} must be a nonnegative finite number")
            }
            ConstantsError::MuAboveL => {
                write!(f, "strong convexity mu cannot exceed smoothness L")
            }
            ConstantsError::ZeroDelay => write!(f, "delay tau must be at least 1"),
            ConstantsError::StrongConvexityRequired => {
                write!(f, "threshold requires strong convexity mu > 0")
            }
            ConstantsError::PlConstantRequired => {
                write!(f, "threshold requires a gradient-domination constant zeta > 0")
            }
        }
    }
}

/// Index n = k/2 with k >= 1. The resolvent constant [`j_constant`] is only
/// defined on this grid; anything else is rejected rather than interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfInteger {
    twice: u64,
}

impl HalfInteger {
    /// Builds n = twice/2. Rejects twice = 0.
    pub fn from_twice(twice: u64) -> Result<Self, ConstantsError> {
        if twice == 0 {
            return Err(ConstantsError::HalfIntegerTooSmall);
        }
        Ok(Self { twice })
    }

    /// Accepts x only when it is exactly k/2 for an integer k >= 1.
    pub fn from_value(x: f64) -> Result<Self, ConstantsError> {
        if !x.is_finite() {
            return Err(ConstantsError::NotHalfIntegral);
        }
        // Doubling a finite f64 in range is exact, so the half-integer test
        // reduces to an integrality test.
        let twice = 2.0 * x;
        if twice != floor(twice) || twice > u64::MAX as f64 {
            return Err(ConstantsError::NotHalfIntegral);
        }
        if twice < 1.0 {
            return Err(ConstantsError::HalfIntegerTooSmall);
        }
        Ok(Self { twice: twice as u64 })
    }

    pub fn twice_value(self) -> u64 {
        self.twice
    }

    /// n as a float; exact, since k/2 is representable.
    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

/// Problem and algorithm parameters a step-size threshold depends on.
///
/// `mu` and `zeta` may be zero when the corresponding regime does not apply;
/// the thresholds that need them reject such policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizePolicy {
    /// Smoothness constant L (gradient Lipschitz modulus).
    pub l: f64,
    /// Strong convexity modulus, 0 when absent.
    pub mu: f64,
    /// Gradient-domination (PL) constant, 0 when absent.
    pub zeta: f64,
    /// Gradient delay in iterations.
    pub tau: u32,
    /// Young-inequality split, q > 0. The classical threshold is q = 1.
    pub q: f64,
}

impl StepSizePolicy {
    pub fn new(l: f64, mu: f64, zeta: f64, tau: u32, q: f64) -> Result<Self, ConstantsError> {
        if !l.is_finite() || l <= 0.0 {
            return Err(ConstantsError::NotPositive("L"));
        }
        if !mu.is_finite() || mu < 0.0 {
            return Err(ConstantsError::Negative("mu"));
        }
        if mu > l {
            return Err(ConstantsError::MuAboveL);
        }
        if !zeta.is_finite() || zeta < 0.0 {
            return Err(ConstantsError::Negative("zeta"));
        }
        if tau == 0 {
            return Err(ConstantsError::ZeroDelay);
        }
        if !q.is_finite() || q <= 0.0 {
            return Err(ConstantsError::NotPositive("q"));
        }
        Ok(Self { l, mu, zeta, tau, q })
    }
}

/// Resolvent growth constant J_n: 1.455 for n = 1/2, 1.25 for n = 1 and 1.2
/// for n >= 3/2. It bounds (1 - x/n)^(-n) <= 1 + J_n x on 0 < x <= 1/5.
pub fn j_constant(n: HalfInteger) -> f64 {
    match n.twice {
        1 => 1.455,
        2 => 1.25,
        _ => 1.2,
    }
}

/// Harmonic mean curvature alpha = 2 mu L / (mu + L), the contraction modulus
/// of a plain gradient step at eta = 1/L scale. Lies in [mu, L].
pub fn alpha(mu: f64, l: f64) -> Result<f64, ConstantsError> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(ConstantsError::NotPositive("mu"));
    }
    if !l.is_finite() || l <= 0.0 {
        return Err(ConstantsError::NotPositive("L"));
    }
    if mu > l {
        return Err(ConstantsError::MuAboveL);
    }
    Ok(2.0 * mu * l / (mu + l))
}

// tau / (sqrt(factor * J * tau^2 + 1) + 1). c_tau and the strongly convex
// threshold at q = 1 must agree bit for bit, so both route through here with
// factor 6 computed the same way.
fn sqrt_branch(tau: f64, j: f64, factor: f64) -> f64 {
    tau / (sqrt(factor * j * tau * tau + 1.0) + 1.0)
}

fn j_of_delay(tau: u32) -> f64 {
    debug_assert!(tau >= 1);
    match HalfInteger::from_twice(2 * tau as u64) {
        Ok(n) => j_constant(n),
        Err(_) => unreachable!(),
    }
}

/// Dimensionless step cap C_tau = tau / (sqrt(6 J_tau tau^2 + 1) + 1) for the
/// strongly convex bound. Strictly increasing in tau with limit 1/sqrt(7.2).
pub fn c_tau(tau: u32) -> f64 {
    assert!(tau >= 1, "delay must be at least 1");
    sqrt_branch(tau as f64, j_of_delay(tau), 6.0)
}

/// Dimensionless step cap D_tau = 2 tau / (sqrt(1 + 4 J_tau tau^2) + 1) for
/// the gradient-dominated bound.
pub fn d_tau(tau: u32) -> f64 {
    assert!(tau >= 1, "delay must be at least 1");
    2.0 * sqrt_branch(tau as f64, j_of_delay(tau), 4.0)
}

/// Largest admissible step size for a mu-strongly convex, L-smooth objective
/// under delay tau and split q:
///
///   min{ L(1+q) / (5 alpha),  tau / (sqrt(2 J_tau tau^2 (2 + 1/q) + 1) + 1) } / (tau L)
///
/// Both branches are evaluated and the smaller taken. At q = 1 the second
/// branch equals [`c_tau`] and always binds, so the result is c_tau(tau)/(L tau).
pub fn max_step_strongly_convex(policy: StepSizePolicy) -> Result<f64, ConstantsError> {
    if policy.mu <= 0.0 {
        return Err(ConstantsError::StrongConvexityRequired);
    }
    let a = alpha(policy.mu, policy.l)?;
    let first = policy.l * (1.0 + policy.q) / (5.0 * a);
    let factor = 2.0 * (2.0 + 1.0 / policy.q);
    let second = sqrt_branch(policy.tau as f64, j_of_delay(policy.tau), factor);
    Ok(first.min(second) / (policy.tau as f64 * policy.l))
}

/// Largest admissible step size for an L-smooth objective satisfying a PL
/// inequality with constant zeta under delay tau:
///
///   min{ L / (5 zeta),  D_tau } / (L tau)
pub fn max_step_pl(policy: StepSizePolicy) -> Result<f64, ConstantsError> {
    if policy.zeta <= 0.0 {
        return Err(ConstantsError::PlConstantRequired);
    }
    let first = policy.l / (5.0 * policy.zeta);
    let second = d_tau(policy.tau);
    Ok(first.min(second) / (policy.l * policy.tau as f64))
}
