//! Mechanical checks of the convergence guarantees along recorded runs, plus
//! standalone brute-force oracles for the resolvent growth bound and the
//! damped window recursion behind the step-size thresholds.
//!
//! Every checker is a pure function of an immutable trace: evaluating the
//! same trace twice, or across threads, yields identical reports. Inequality
//! comparisons carry a relative slack of [`RELATIVE_SLACK`] to absorb
//! floating-point accumulation; an excess below slack is recorded as a
//! warning rather than a violation, because the bounds are mathematically
//! strict while traces carry rounding noise.
//!
//! Trace checks additionally carry an absolute resolution floor. Once a run
//! converges, the compared quantities keep shrinking until the difference
//! between the two sides falls below the rounding error accumulated in the
//! iterates themselves, plus whatever accuracy the trace's reference point
//! was computed to; an apparent excess below that level measures noise, not
//! the inequality, and judging it either way would be dishonest. Such rows
//! are counted as unresolved and reported as such.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use libm::{exp, log, pow};

use crate::constants::{
    alpha, j_constant, max_step_pl, max_step_strongly_convex, ConstantsError, HalfInteger,
    StepSizePolicy,
};
use crate::descent::RunTrace;

/// Relative slack applied to every inequality comparison.
pub const RELATIVE_SLACK: f64 = 1e-9;

/// Tolerance for the closed-form identity cross-check of the window
/// recursion, which is an equality rather than an inequality.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// Headroom multiplier in the trace resolution floor. Per-step rounding of
/// an iterate update is a small multiple of machine epsilon times the
/// iterate scale; gradient evaluations contribute a factor growing with the
/// data size through their inner products. 256 covers both with a wide
/// margin for the problem sizes this crate targets.
pub const RESOLUTION_FACTOR: f64 = 256.0;

/// Invalid input to a checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyError {
    /// A constant or threshold evaluation rejected its parameters.
    Constants(ConstantsError),
    /// The policy's delay does not match the delay recorded in the trace.
    DelayMismatch { policy: u32, trace: u32 },
    /// The trace has fewer rows than the check's anchor iteration needs.
    TraceTooShort { needed: usize, got: usize },
    /// The normalizing value at the anchor iteration is zero.
    ZeroDenominator,
    /// The tail window is too small for a line fit.
    TooFewPoints { needed: usize, got: usize },
    /// The sequence is constant, so the fit quality is undefined.
    DegenerateSequence,
    /// A metric value is not finite.
    NonFiniteInput,
    /// The window-decay hypothesis fails for the instance.
    ConditionFails,
    /// The instance's parameters are out of range.
    BadInstance(&'static str),
    /// The envelope parameters are out of range.
    BadBound(&'static str),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Constants(e) => write!(f, "{e}"),
            VerifyError::DelayMismatch { policy, trace } => {
                write!(f, "policy delay {policy} does not match trace delay {trace}")
            }
            VerifyError::TraceTooShort { needed, got } => {
                write!(f, "trace has {got} rows but the check needs {needed}")
            }
            VerifyError::ZeroDenominator => {
                write!(f, "anchor value is zero, nothing to normalize by")
            }
            VerifyError::TooFewPoints { needed, got } => {
                write!(f, "tail window has {got} points but the fit needs {needed}")
            }
            VerifyError::DegenerateSequence => {
                write!(f, "sequence is constant, fit quality undefined")
            }
            VerifyError::NonFiniteInput => write!(f, "metric contains a non-finite value"),
            VerifyError::ConditionFails => {
                write!(f, "window-decay condition fails for this instance")
            }
            VerifyError::BadInstance(what) => write!(f, "bad instance: {what}"),
            VerifyError::BadBound(what) => write!(f, "bad envelope: {what}"),
        }
    }
}

impl From<ConstantsError> for VerifyError {
    fn from(e: ConstantsError) -> Self {
        VerifyError::Constants(e)
    }
}

/// Whether a check actually ran. A check is not applicable when its
/// hypothesis fails, most commonly a step size above the admissible
/// threshold; such runs are still monitored elsewhere, but the envelope
/// guarantee says nothing about them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Checked,
    NotApplicable,
}

/// One comparison that exceeded its bound. `margin` is the excess relative
/// to the larger side's magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// Iteration index, or flat grid index for parameter sweeps.
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Outcome of checking one inequality over a trace or grid.
///
/// `violations` holds excesses above slack, `warnings` those below it.
/// `worst_margin` is the largest signed relative margin over every checked
/// point, so a comfortable pass is very negative and a near-tight pass sits
/// just below zero. It is minus infinity when nothing was checked.
/// `unresolved` counts rows whose apparent excess sat under the resolution
/// floor, too small for double precision to decide.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub id: &'static str,
    pub status: CheckStatus,
    /// Why the check did not apply, when `status` says so.
    pub reason: Option<&'static str>,
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
    pub unresolved: usize,
    pub worst_margin: f64,
}

impl ViolationReport {
    fn new(id: &'static str) -> Self {
        Self {
            id,
            status: CheckStatus::Checked,
            reason: None,
            checked: 0,
            violations: Vec::new(),
            warnings: Vec::new(),
            unresolved: 0,
            worst_margin: f64::NEG_INFINITY,
        }
    }

    fn not_applicable(id: &'static str, reason: &'static str) -> Self {
        Self {
            status: CheckStatus::NotApplicable,
            reason: Some(reason),
            ..Self::new(id)
        }
    }

    pub fn applicable(&self) -> bool {
        self.status == CheckStatus::Checked
    }

    /// Ran and found no violation. Warnings do not fail a report.
    pub fn passed(&self) -> bool {
        self.applicable() && self.violations.is_empty()
    }

    /// Records one `lhs <= rhs` comparison. Non-finite values on either side
    /// are violations outright: an overflow or NaN means the run or the bound
    /// left the regime the guarantee describes.
    fn record(&mut self, t: usize, lhs: f64, rhs: f64) {
        self.checked += 1;
        if !lhs.is_finite() || !rhs.is_finite() {
            self.worst_margin = f64::INFINITY;
            self.violations.push(Violation { t, lhs, rhs, margin: f64::INFINITY });
            return;
        }
        let scale = lhs.abs().max(rhs.abs());
        let excess = lhs - rhs;
        let margin = if scale == 0.0 { 0.0 } else { excess / scale };
        if margin > self.worst_margin {
            self.worst_margin = margin;
        }
        if excess > RELATIVE_SLACK * scale {
            self.violations.push(Violation { t, lhs, rhs, margin });
        } else if excess > 0.0 {
            self.warnings.push(Violation { t, lhs, rhs, margin });
        }
    }

    /// Records one `lhs <= rhs` comparison subject to a resolution floor on
    /// the difference. An apparent excess no larger than the rounding noise
    /// accumulated in the compared quantities cannot be told apart from a
    /// true tie, so such a row is counted as unresolved instead of judged.
    /// Holds, sub-slack warnings and excesses above the floor are recorded
    /// as usual.
    fn record_floored(&mut self, t: usize, lhs: f64, rhs: f64, floor: f64) {
        if lhs.is_finite() && rhs.is_finite() {
            let excess = lhs - rhs;
            if excess > RELATIVE_SLACK * lhs.abs().max(rhs.abs()) && excess <= floor {
                self.checked += 1;
                self.unresolved += 1;
                return;
            }
        }
        self.record(t, lhs, rhs);
    }

    /// Records one `lhs == rhs` cross-check at [`IDENTITY_TOLERANCE`].
    /// `floor` joins the two sides in the relative scale so that a pair of
    /// nearly cancelling values cannot inflate the margin.
    fn record_identity(&mut self, t: usize, lhs: f64, rhs: f64, floor: f64) {
        self.checked += 1;
        if !lhs.is_finite() || !rhs.is_finite() || !floor.is_finite() {
            self.worst_margin = f64::INFINITY;
            self.violations.push(Violation { t, lhs, rhs, margin: f64::INFINITY });
            return;
        }
        let scale = lhs.abs().max(rhs.abs()).max(floor.abs());
        let gap = (lhs - rhs).abs();
        let margin = if scale == 0.0 { 0.0 } else { gap / scale };
        if margin > self.worst_margin {
            self.worst_margin = margin;
        }
        if margin > IDENTITY_TOLERANCE {
            self.violations.push(Violation { t, lhs, rhs, margin });
        }
    }

    /// One human-readable line: id, status, counts, worst margin.
    pub fn summary_line(&self) -> String {
        match self.status {
            CheckStatus::Checked => format!(
                "{}: {} checked={} violations={} warnings={} unresolved={} worst_margin={:e}",
                self.id,
                if self.violations.is_empty() { "pass" } else { "FAIL" },
                self.checked,
                self.violations.len(),
                self.warnings.len(),
                self.unresolved,
                self.worst_margin,
            ),
            CheckStatus::NotApplicable => format!(
                "{}: not-applicable ({})",
                self.id,
                self.reason.unwrap_or("hypothesis fails"),
            ),
        }
    }

    /// Machine-readable key=value record, one line, same fields.
    pub fn key_value_record(&self) -> String {
        let status = match self.status {
            CheckStatus::Checked => {
                if self.violations.is_empty() {
                    "pass"
                } else {
                    "fail"
                }
            }
            CheckStatus::NotApplicable => "not-applicable",
        };
        format!(
            "id={} status={} checked={} violations={} warnings={} unresolved={} worst_margin={:e}",
            self.id,
            status,
            self.checked,
            self.violations.len(),
            self.warnings.len(),
            self.unresolved,
            self.worst_margin,
        )
    }
}

/// Which recorded column a geometric envelope bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundTarget {
    /// Distance to the minimizer; decays like rate^(t/2).
    Distance,
    /// Squared distance of the undelayed shadow sequence; decays like rate^t.
    ShadowDistanceSq,
    /// Cost gap f(x_t) - f_*; decays like rate^t from the anchor iteration.
    CostGap,
}

/// A geometric envelope `column[t] <= coefficient * rate^e * column[offset]`
/// where the exponent e is (t - offset)/2 for [`BoundTarget::Distance`] and
/// t - offset otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    pub coefficient: f64,
    pub rate: f64,
    pub offset: usize,
    pub target: BoundTarget,
}

impl BoundSpec {
    /// Validates rate in (0,1) and a positive coefficient, at least 1 for
    /// the distance envelope (its prefactor is a norm inflation, never a
    /// shrink).
    pub fn new(
        coefficient: f64,
        rate: f64,
        offset: usize,
        target: BoundTarget,
    ) -> Result<Self, VerifyError> {
        if !rate.is_finite() || rate <= 0.0 || rate >= 1.0 {
            return Err(VerifyError::BadBound("rate must lie in (0, 1)"));
        }
        if !coefficient.is_finite() || coefficient <= 0.0 {
            return Err(VerifyError::BadBound("coefficient must be positive"));
        }
        if target == BoundTarget::Distance && coefficient < 1.0 {
            return Err(VerifyError::BadBound("distance prefactor must be at least 1"));
        }
        Ok(Self { coefficient, rate, offset, target })
    }
}

fn column(trace: &RunTrace, target: BoundTarget, t: usize) -> f64 {
    let row = &trace.rows[t];
    match target {
        BoundTarget::Distance => row.dist,
        BoundTarget::ShadowDistanceSq => row.shadow_dist_sq,
        BoundTarget::CostGap => row.cost_gap,
    }
}

/// Per-row resolution floors over a prefix-scaled column: by row t the run
/// has accumulated rounding up to a small multiple of eps per step at the
/// largest scale seen so far, so the floor grows with both t and the prefix
/// peak, plus a constant base for error baked into the column itself. Rows
/// of a converged tail fall below it; early rows never do.
fn resolution_floors(scales: impl Iterator<Item = f64>, base: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut peak = 0.0f64;
    for (i, s) in scales.enumerate() {
        peak = peak.max(s.abs());
        out.push(RESOLUTION_FACTOR * f64::EPSILON * (i + 1) as f64 * peak + base);
    }
    out
}

/// Noise amplitude of iterate-space quantities measured against the
/// reference point: rounding drift plus the recorded accuracy of the
/// reference itself.
fn iterate_resolution(trace: &RunTrace) -> Vec<f64> {
    resolution_floors(trace.rows.iter().map(|r| r.dist), trace.reference_resolution)
}

/// The iterate-shadow deviation never touches the reference point, so its
/// noise is rounding drift alone.
fn deviation_resolution(trace: &RunTrace) -> Vec<f64> {
    resolution_floors(trace.rows.iter().map(|r| r.dist), 0.0)
}

/// Noise amplitude of cost-gap quantities: the gap is a difference of two
/// objective values, so it cancels to eps at the objective scale, on top of
/// the drift the iterates feed through the curvature.
fn gap_resolution(trace: &RunTrace) -> Vec<f64> {
    resolution_floors(trace.rows.iter().map(|r| r.cost_gap), 0.0)
}

/// Per-row noise amplitude in the native space of a bound target. Squared
/// targets report the noise of the quantity being squared; the difference
/// floor converts it with [`squared_difference_floor`].
fn target_resolution(trace: &RunTrace, target: BoundTarget) -> Vec<f64> {
    match target {
        BoundTarget::Distance | BoundTarget::ShadowDistanceSq => iterate_resolution(trace),
        BoundTarget::CostGap => gap_resolution(trace),
    }
}

/// Smallest trustworthy difference between two squared quantities whose
/// roots carry absolute noise `n`: |a^2 - b^2| below 2*max(a,b)*n + n^2 is
/// within rounding of a tie.
fn squared_difference_floor(scale_sq: f64, n: f64) -> f64 {
    2.0 * libm::sqrt(scale_sq.max(0.0)) * n + n * n
}

/// Compares one recorded column against a geometric envelope anchored at the
/// spec's offset row. Every row from the anchor on is checked.
pub fn check_envelope(
    trace: &RunTrace,
    spec: &BoundSpec,
    id: &'static str,
) -> Result<ViolationReport, VerifyError> {
    let len = trace.rows.len();
    if len <= spec.offset {
        return Err(VerifyError::TraceTooShort { needed: spec.offset + 1, got: len });
    }
    let anchor = column(trace, spec.target, spec.offset);
    let floors = target_resolution(trace, spec.target);
    let mut report = ViolationReport::new(id);
    for t in spec.offset..len {
        let steps = (t - spec.offset) as f64;
        let e = match spec.target {
            BoundTarget::Distance => steps / 2.0,
            _ => steps,
        };
        let rhs = spec.coefficient * pow(spec.rate, e) * anchor;
        let lhs = column(trace, spec.target, t);
        let floor = match spec.target {
            BoundTarget::ShadowDistanceSq => squared_difference_floor(lhs.max(rhs), floors[t]),
            _ => floors[t],
        };
        report.record_floored(t, lhs, rhs, floor);
    }
    Ok(report)
}

fn ensure_same_delay(trace: &RunTrace, policy: &StepSizePolicy) -> Result<(), VerifyError> {
    if policy.tau != trace.tau {
        return Err(VerifyError::DelayMismatch { policy: policy.tau, trace: trace.tau });
    }
    Ok(())
}

/// Multiplicative prefactor of the distance envelope,
/// 1 / (1 - J_{tau/2} L tau eta). Positive and at least 1 whenever the step
/// size is admissible; rejected when the denominator is not positive.
pub fn distance_prefactor(policy: &StepSizePolicy, eta: f64) -> Result<f64, VerifyError> {
    let n = HalfInteger::from_twice(policy.tau as u64)?;
    let denom = 1.0 - j_constant(n) * policy.l * policy.tau as f64 * eta;
    if !denom.is_finite() || denom <= 0.0 {
        return Err(VerifyError::BadBound("prefactor denominator must be positive"));
    }
    Ok(1.0 / denom)
}

/// Checks the distance column of a strongly convex run against its envelope
///
///   dist_t <= B * (1 - eta alpha / (1+q))^(t/2) * dist_0
///
/// with B the [`distance_prefactor`]. A step size above
/// [`max_step_strongly_convex`] makes the report not-applicable rather than
/// a failure; the guarantee simply does not cover such runs.
pub fn check_distance_envelope(
    trace: &RunTrace,
    policy: &StepSizePolicy,
) -> Result<ViolationReport, VerifyError> {
    const ID: &str = "distance-envelope";
    ensure_same_delay(trace, policy)?;
    let eta = trace.eta;
    let eta_max = max_step_strongly_convex(*policy)?;
    if !(eta > 0.0 && eta <= eta_max) {
        return Ok(ViolationReport::not_applicable(ID, "step size above admissible threshold"));
    }
    let a = alpha(policy.mu, policy.l)?;
    let rate = 1.0 - eta * a / (1.0 + policy.q);
    let b = distance_prefactor(policy, eta)?;
    let spec = BoundSpec::new(b, rate, 0, BoundTarget::Distance)?;
    check_envelope(trace, &spec, ID)
}

/// Checks the shadow sequence's squared distance against its envelope
///
///   shadow_dist_sq_t <= (1 - alpha eta / (1+q))^t * dist_0^2
///
/// under the same admissibility threshold as the distance envelope. The
/// anchor equals dist_0^2 because the shadow starts at the same point.
pub fn check_shadow_envelope(
    trace: &RunTrace,
    policy: &StepSizePolicy,
) -> Result<ViolationReport, VerifyError> {
    const ID: &str = "shadow-envelope";
    ensure_same_delay(trace, policy)?;
    let eta = trace.eta;
    let eta_max = max_step_strongly_convex(*policy)?;
    if !(eta > 0.0 && eta <= eta_max) {
        return Ok(ViolationReport::not_applicable(ID, "step size above admissible threshold"));
    }
    let a = alpha(policy.mu, policy.l)?;
    let rate = 1.0 - a * eta / (1.0 + policy.q);
    let spec = BoundSpec::new(1.0, rate, 0, BoundTarget::ShadowDistanceSq)?;
    check_envelope(trace, &spec, ID)
}

/// Checks the cost gap of a gradient-dominated run against the envelope
///
///   gap_t <= (1 - eta zeta)^(t - tau) * gap_tau    for t >= tau,
///
/// anchored where the delayed iterates first move. With tau = 0 in the trace
/// this reduces to the classical undelayed descent envelope, admissible for
/// eta <= 1/L; otherwise admissibility is [`max_step_pl`].
pub fn check_pl_envelope(
    trace: &RunTrace,
    l: f64,
    zeta: f64,
) -> Result<ViolationReport, VerifyError> {
    const ID: &str = "pl-envelope";
    if !l.is_finite() || l <= 0.0 {
        return Err(VerifyError::Constants(ConstantsError::NotPositive("L")));
    }
    if !zeta.is_finite() || zeta <= 0.0 {
        return Err(VerifyError::Constants(ConstantsError::NotPositive("zeta")));
    }
    let tau = trace.tau;
    let eta = trace.eta;
    let eta_max = if tau == 0 {
        1.0 / l
    } else {
        max_step_pl(StepSizePolicy::new(l, 0.0, zeta, tau, 1.0)?)?
    };
    if !(eta > 0.0 && eta <= eta_max) {
        return Ok(ViolationReport::not_applicable(ID, "step size above admissible threshold"));
    }
    let rate = 1.0 - eta * zeta;
    if rate <= 0.0 {
        return Ok(ViolationReport::not_applicable(ID, "contraction degenerates at this step"));
    }
    let spec = BoundSpec::new(1.0, rate, tau as usize, BoundTarget::CostGap)?;
    check_envelope(trace, &spec, ID)
}

/// Gradient energy accumulated over the delay window ending before t:
/// zero at t = 0, the sum of grad_sq over the last min(t, tau) rows
/// otherwise.
fn window_energy(trace: &RunTrace, t: usize) -> f64 {
    let lo = t.saturating_sub(trace.tau as usize);
    trace.rows[lo..t].iter().map(|r| r.grad_sq).sum()
}

/// Checks the one-step recursion that drives the shadow envelope:
///
///   sd_{t+1} <= (1 - alpha eta/(1+q)) sd_t - (eta/(2L) - eta^2) g_t
///              + eta^2 tau (alpha eta/q + 2 L eta) W_t
///
/// where sd is the shadow squared distance, g_t the recorded squared
/// gradient norm and W_t the delay-window gradient energy. The recursion is
/// an identity-level consequence of curvature, so it is monitored at every
/// step regardless of step-size admissibility.
pub fn monitor_shadow_recursion(
    trace: &RunTrace,
    policy: &StepSizePolicy,
) -> Result<ViolationReport, VerifyError> {
    ensure_same_delay(trace, policy)?;
    let a = alpha(policy.mu, policy.l)?;
    let eta = trace.eta;
    let tau = trace.tau as f64;
    let rate = 1.0 - a * eta / (1.0 + policy.q);
    let descent = eta / (2.0 * policy.l) - eta * eta;
    let spill = eta * eta * tau * (a * eta / policy.q + 2.0 * policy.l * eta);
    let floors = iterate_resolution(trace);
    let mut report = ViolationReport::new("shadow-recursion");
    for t in 0..trace.rows.len().saturating_sub(1) {
        let row = &trace.rows[t];
        let rhs = rate * row.shadow_dist_sq - descent * row.grad_sq
            + spill * window_energy(trace, t);
        let lhs = trace.rows[t + 1].shadow_dist_sq;
        let floor = squared_difference_floor(lhs.max(rhs), floors[t + 1]);
        report.record_floored(t + 1, lhs, rhs, floor);
    }
    Ok(report)
}

/// Checks that the delayed iterates never stray from the shadow sequence by
/// more than the window's gradient energy allows:
///
///   dev_sq_t <= eta^2 tau W_t.
///
/// This holds for any step size, so there is no admissibility gate.
pub fn check_deviation(trace: &RunTrace) -> Result<ViolationReport, VerifyError> {
    let eta = trace.eta;
    let tau = trace.tau as f64;
    let floors = deviation_resolution(trace);
    let mut report = ViolationReport::new("deviation-window");
    for t in 0..trace.rows.len() {
        let rhs = eta * eta * tau * window_energy(trace, t);
        let lhs = trace.rows[t].dev_sq;
        let floor = squared_difference_floor(lhs.max(rhs), floors[t]);
        report.record_floored(t, lhs, rhs, floor);
    }
    Ok(report)
}

/// Number of strictly increasing consecutive steps in a sequence. Used as an
/// oscillation probe on runs past the admissible step-size threshold.
pub fn count_strict_increases(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] > w[0]).count()
}

fn grid_points(step: f64) -> Result<usize, VerifyError> {
    if !step.is_finite() || step <= 0.0 || step > 0.2 {
        return Err(VerifyError::BadInstance("grid step must lie in (0, 0.2]"));
    }
    // Round so that steps like 1e-3 land exactly on the 0.2 endpoint.
    Ok(libm::round(0.2 / step) as usize)
}

/// Brute-force sweep of the resolvent growth bound
///
///   (1 - x/n)^(-n) <= 1 + J_n x    for x in (0, 0.2]
///
/// over every index in `n_set` and the grid x = k*step. Violation indices
/// are flat: index i of `n_set` contributes points i*points + (k-1).
pub fn j_bound_sweep(n_set: &[HalfInteger], step: f64) -> Result<ViolationReport, VerifyError> {
    let points = grid_points(step)?;
    let mut report = ViolationReport::new("j-bound");
    for (i, &n) in n_set.iter().enumerate() {
        let j = j_constant(n);
        let nv = n.value();
        for k in 1..=points {
            let x = k as f64 * step;
            let lhs = pow(1.0 - x / nv, -nv);
            report.record(i * points + (k - 1), lhs, 1.0 + j * x);
        }
    }
    Ok(report)
}

/// The half-integer indices 1/2, 1, ..., up to `max` inclusive, the default
/// index set for [`j_bound_sweep`].
pub fn half_integers_up_to(max: u64) -> Vec<HalfInteger> {
    (1..=2 * max)
        .map(|twice| match HalfInteger::from_twice(twice) {
            Ok(n) => n,
            Err(_) => unreachable!(),
        })
        .collect()
}

/// Large-index limit of the growth bound: exp(x) <= 1 + 1.2 x on (0, 0.2],
/// checked on the same grid.
pub fn j_bound_limit_sweep(step: f64) -> Result<ViolationReport, VerifyError> {
    let points = grid_points(step)?;
    let mut report = ViolationReport::new("j-bound-limit");
    for k in 1..=points {
        let x = k as f64 * step;
        report.record(k - 1, exp(x), 1.0 + 1.2 * x);
    }
    Ok(report)
}

fn j_bound_fixed(
    n: HalfInteger,
    j: f64,
    step: f64,
    id: &'static str,
) -> Result<ViolationReport, VerifyError> {
    if !j.is_finite() || j <= 0.0 {
        return Err(VerifyError::BadInstance("probe constant must be positive"));
    }
    let points = grid_points(step)?;
    let nv = n.value();
    let mut report = ViolationReport::new(id);
    for k in 1..=points {
        let x = k as f64 * step;
        let lhs = pow(1.0 - x / nv, -nv);
        report.record(k - 1, lhs, 1.0 + j * x);
    }
    Ok(report)
}

/// Tightness probe: at index 1/2 the constant 1.455 cannot be lowered to the
/// next table value 1.25. The returned report is expected to carry
/// violations; an empty report would mean the table is slack.
pub fn j_bound_tightness_probe(step: f64) -> Result<ViolationReport, VerifyError> {
    match HalfInteger::from_twice(1) {
        Ok(half) => j_bound_fixed(half, 1.25, step, "j-bound-tightness"),
        Err(_) => unreachable!(),
    }
}

/// Sweeps one index with a caller-supplied constant in place of the table
/// value, to locate counterexamples for constants below the table.
pub fn j_bound_probe(n: HalfInteger, j: f64, step: f64) -> Result<ViolationReport, VerifyError> {
    j_bound_fixed(n, j, step, "j-bound-probe")
}

fn validate_window_params(c: f64, delta: f64, damping: f64, tau: u32) -> Result<(), VerifyError> {
    if !c.is_finite() || c <= 0.0 || c >= 1.0 {
        return Err(VerifyError::BadInstance("contraction must lie in (0, 1)"));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(VerifyError::BadInstance("spill must be nonnegative"));
    }
    if !damping.is_finite() || damping <= 0.0 {
        return Err(VerifyError::BadInstance("damping must be positive"));
    }
    if tau == 0 {
        return Err(VerifyError::BadInstance("window length must be at least 1"));
    }
    Ok(())
}

/// Hypothesis of the window-decay lemma: the spill accumulated over any
/// window prefix stays under the damping's geometric budget,
///
///   sum_{k<j} c^k delta <= c^j damping    for every j in 1..=tau.
///
/// All j are checked even though the j = tau case binds (the ratio of the
/// two sides only moves one way in j); the shortcut lives in
/// [`window_condition_anchor_only`] and property tests pin their agreement.
pub fn window_condition(c: f64, delta: f64, damping: f64, tau: u32) -> Result<bool, VerifyError> {
    validate_window_params(c, delta, damping, tau)?;
    let mut prefix = 0.0;
    for j in 1..=tau {
        prefix += pow(c, (j - 1) as f64) * delta;
        if prefix > pow(c, j as f64) * damping {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The j = tau shortcut of [`window_condition`].
pub fn window_condition_anchor_only(
    c: f64,
    delta: f64,
    damping: f64,
    tau: u32,
) -> Result<bool, VerifyError> {
    validate_window_params(c, delta, damping, tau)?;
    let prefix: f64 = (0..tau).map(|k| pow(c, k as f64) * delta).sum();
    Ok(prefix <= pow(c, tau as f64) * damping)
}

/// One instance of the damped window recursion
///
///   a_{t+1} = c a_t + delta (b_{t-1} + ... + b_{max(t-tau,0)}) - damping b_t
///
/// run at equality, the worst case the lemma covers. The admissibility flag
/// caches [`window_condition`] at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionInstance {
    pub c: f64,
    pub delta: f64,
    pub damping: f64,
    pub tau: u32,
    pub a0: f64,
    pub b: Vec<f64>,
    admissible: bool,
}

impl RecursionInstance {
    pub fn new(
        c: f64,
        delta: f64,
        damping: f64,
        tau: u32,
        a0: f64,
        b: Vec<f64>,
    ) -> Result<Self, VerifyError> {
        validate_window_params(c, delta, damping, tau)?;
        if !a0.is_finite() || a0 <= 0.0 {
            return Err(VerifyError::BadInstance("initial value must be positive"));
        }
        if b.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(VerifyError::BadInstance("b must be nonnegative and finite"));
        }
        let admissible = window_condition(c, delta, damping, tau)?;
        Ok(Self { c, delta, damping, tau, a0, b, admissible })
    }

    pub fn admissible(&self) -> bool {
        self.admissible
    }
}

/// Both halves of the window-recursion oracle: the geometric envelope on the
/// recursion values and the closed-form expansion cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionReport {
    pub envelope: ViolationReport,
    pub closed_form: ViolationReport,
}

/// Runs the recursion at equality for `horizon + 1` steps and checks, for
/// every t <= horizon, the decay a_{t+1} <= c^{t+1} a_0 and the agreement of
/// the recursion with its unrolled closed form. The closed form groups each
/// b_j with the bracket
///
///   w_m = sum_{k<m} c^k delta - c^m damping
///
/// where m is how many steps ago b_j entered; contributions older than the
/// window decay geometrically with the full-window bracket w_tau.
pub fn decay_recursion_oracle(
    instance: &RecursionInstance,
    horizon: usize,
) -> Result<RecursionReport, VerifyError> {
    if !instance.admissible {
        return Err(VerifyError::ConditionFails);
    }
    if instance.b.len() <= horizon {
        return Err(VerifyError::BadInstance("b is shorter than the horizon"));
    }
    let (c, delta, damping) = (instance.c, instance.delta, instance.damping);
    let tau = instance.tau as usize;

    // Geometric and prefix tables shared by the envelope and the closed
    // form; c_pows[k] = c^k and spill_prefix[m] = sum_{k<m} c^k delta.
    let mut c_pows = Vec::with_capacity(horizon + 2);
    for k in 0..=horizon + 1 {
        c_pows.push(pow(c, k as f64));
    }
    let mut spill_prefix = Vec::with_capacity(horizon + 2);
    spill_prefix.push(0.0);
    for k in 0..=horizon {
        spill_prefix.push(spill_prefix[k] + c_pows[k] * delta);
    }
    let bracket = |m: usize| spill_prefix[m] - c_pows[m] * damping;

    let mut envelope = ViolationReport::new("window-decay");
    let mut closed_form = ViolationReport::new("closed-form-identity");
    let mut a = instance.a0;
    for t in 0..=horizon {
        let lo = t.saturating_sub(tau);
        let window: f64 = instance.b[lo..t].iter().sum();
        a = c * a + delta * window - damping * instance.b[t];
        let geometric = c_pows[t + 1] * instance.a0;
        envelope.record(t + 1, a, geometric);

        // Closed form: recent b_j carry their own bracket, older ones the
        // full-window bracket discounted geometrically.
        let mut cf = geometric;
        for j in lo..=t {
            cf += if j == t { -damping * instance.b[t] } else { bracket(t - j) * instance.b[j] };
        }
        if t > tau {
            for j in 0..t - tau {
                cf += c_pows[t - tau - j] * bracket(tau) * instance.b[j];
            }
        }
        closed_form.record_identity(t + 1, a, cf, geometric);
    }
    Ok(RecursionReport { envelope, closed_form })
}

/// Log errors of a run: `dist[t] = ln(dist_t / dist_0)` and
/// `gap[t] = ln(gap_t / gap_tau)`, the gap anchored where the delayed
/// iterates first move. Each sequence is truncated at the first
/// non-positive or non-finite value, where the logarithm leaves the reals.
#[derive(Debug, Clone, PartialEq)]
pub struct LogErrors {
    pub dist: Vec<f64>,
    pub gap: Vec<f64>,
}

fn log_ratio_series(values: impl Iterator<Item = f64>, anchor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for v in values {
        if !v.is_finite() || v <= 0.0 {
            break;
        }
        out.push(log(v / anchor));
    }
    out
}

pub fn log_error_metrics(trace: &RunTrace) -> Result<LogErrors, VerifyError> {
    let tau = trace.tau as usize;
    if trace.rows.len() <= tau {
        return Err(VerifyError::TraceTooShort { needed: tau + 1, got: trace.rows.len() });
    }
    let dist0 = trace.rows[0].dist;
    let gap_anchor = trace.rows[tau].cost_gap;
    if !dist0.is_finite() || dist0 <= 0.0 || !gap_anchor.is_finite() || gap_anchor <= 0.0 {
        return Err(VerifyError::ZeroDenominator);
    }
    Ok(LogErrors {
        dist: log_ratio_series(trace.rows.iter().map(|r| r.dist), dist0),
        gap: log_ratio_series(trace.rows.iter().map(|r| r.cost_gap), gap_anchor),
    })
}

/// Ordinary least squares over the tail of a metric sequence. The tail is
/// the last ceil(len * tail_fraction) points, indexed by their global
/// position so the slope is per iteration. Returns (slope, r_squared).
pub fn slope_fit(xs: &[f64], tail_fraction: f64) -> Result<(f64, f64), VerifyError> {
    if !tail_fraction.is_finite() || tail_fraction <= 0.0 || tail_fraction > 1.0 {
        return Err(VerifyError::BadInstance("tail fraction must lie in (0, 1]"));
    }
    let take = libm::ceil(xs.len() as f64 * tail_fraction) as usize;
    if take < 10 {
        return Err(VerifyError::TooFewPoints { needed: 10, got: take });
    }
    let start = xs.len() - take;
    let tail = &xs[start..];
    if tail.iter().any(|v| !v.is_finite()) {
        return Err(VerifyError::NonFiniteInput);
    }
    let n = take as f64;
    let mean_t = tail.iter().enumerate().map(|(i, _)| (start + i) as f64).sum::<f64>() / n;
    let mean_x = tail.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stx = 0.0;
    let mut sxx = 0.0;
    for (i, &x) in tail.iter().enumerate() {
        let dt = (start + i) as f64 - mean_t;
        let dx = x - mean_x;
        stt += dt * dt;
        stx += dt * dx;
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(VerifyError::DegenerateSequence);
    }
    let slope = stx / stt;
    let ss_res = sxx - slope * stx;
    Ok((slope, 1.0 - ss_res / sxx))
}
