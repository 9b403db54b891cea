//! Randomized cross-module properties: the checkers against synthetic traces
//! built to sit exactly on their bounds, the window-condition shortcut
//! against the full scan, the step-size thresholds against the recursion
//! hypothesis they were solved from, and the iterate/shadow difference
//! identity replayed step by step.

use dgd_core::constants::{alpha, max_step_pl, max_step_strongly_convex, StepSizePolicy};
use dgd_core::descent::{dgd_step, run, shadow_step, DelayedRunState, GradientOracle, TraceRow};
use dgd_core::linalg::{axpy, dist, norm};
use dgd_core::problems::{constants_of, gen_regression_data, Problem};
use dgd_core::rng::NormalSource;
use dgd_core::verify::{
    check_envelope, count_strict_increases, decay_recursion_oracle, log_error_metrics, slope_fit,
    window_condition, window_condition_anchor_only, BoundSpec, BoundTarget, RecursionInstance,
    VerifyError, RESOLUTION_FACTOR,
};
use proptest::prelude::*;

fn geometric_trace(rate: f64, len: usize, tau: u32) -> dgd_core::descent::RunTrace {
    let rows = (0..len)
        .map(|t| TraceRow {
            t,
            dist: libm::pow(rate, t as f64 / 2.0),
            cost_gap: libm::pow(rate, t as f64),
            grad_sq: 0.0,
            dev_sq: 0.0,
            shadow_dist_sq: libm::pow(rate, t as f64),
        })
        .collect();
    dgd_core::descent::RunTrace {
        eta: 0.1,
        tau,
        seed: None,
        problem: None,
        reference_resolution: 0.0,
        rows,
    }
}

// The spill bound either holds at every window prefix or first breaks at the
// full window, so the full scan and the last-prefix shortcut must agree.
#[test]
fn window_shortcut_agrees_on_100k_instances() {
    let mut src = NormalSource::new(20_240_601, 0);
    let (mut holds, mut breaks) = (0u32, 0u32);
    for i in 0..100_000 {
        let c = 0.02 + 0.96 * src.uniform_open_closed();
        let damping = 5.0 * src.uniform_open_closed();
        let tau = 1 + (src.uniform_open_closed() * 12.0) as u32;
        // center the spill on the largest admissible value so both verdicts
        // appear in bulk
        let budget = libm::pow(c, tau as f64) * damping * (1.0 - c) / (1.0 - libm::pow(c, tau as f64));
        let delta = 2.0 * src.uniform_open_closed() * budget;
        let full = window_condition(c, delta, damping, tau).unwrap();
        let anchor = window_condition_anchor_only(c, delta, damping, tau).unwrap();
        assert_eq!(full, anchor, "case {i}: c={c} delta={delta} damping={damping} tau={tau}");
        if full {
            holds += 1;
        } else {
            breaks += 1;
        }
    }
    assert!(holds > 10_000, "holds={holds}");
    assert!(breaks > 10_000, "breaks={breaks}");
}

// The strongly convex threshold was solved precisely so that the recursion
// behind the distance envelope satisfies the window condition; running at
// the threshold itself must therefore stay admissible.
#[test]
fn strongly_convex_threshold_implies_window_condition() {
    let mut src = NormalSource::new(414, 0);
    for _ in 0..2000 {
        let l = 0.5 + 50.0 * src.uniform_open_closed();
        let mu = l * src.uniform_open_closed();
        let tau = 1 + (src.uniform_open_closed() * 10.0) as u32;
        let q = 0.1 + 10.0 * src.uniform_open_closed();
        let policy = StepSizePolicy::new(l, mu, 0.0, tau, q).unwrap();
        let eta_max = max_step_strongly_convex(policy).unwrap();
        for eta in [eta_max, 0.37 * eta_max] {
            let a = alpha(mu, l).unwrap();
            let c = 1.0 - eta * a / (1.0 + q);
            let delta = (2.0 + 1.0 / q) * eta * eta * eta * tau as f64 * l;
            let damping = eta / (2.0 * l) - eta * eta;
            assert!(damping > 0.0);
            assert!(
                window_condition(c, delta, damping, tau).unwrap(),
                "l={l} mu={mu} tau={tau} q={q} eta={eta}"
            );
        }
    }
}

#[test]
fn pl_threshold_implies_window_condition() {
    let mut src = NormalSource::new(415, 0);
    for _ in 0..2000 {
        let l = 0.5 + 50.0 * src.uniform_open_closed();
        let zeta = l * src.uniform_open_closed();
        let tau = 1 + (src.uniform_open_closed() * 30.0) as u32;
        let policy = StepSizePolicy::new(l, 0.0, zeta, tau, 1.0).unwrap();
        let eta = max_step_pl(policy).unwrap();
        let c = 1.0 - eta * zeta;
        let delta = eta * eta * eta * l * l * tau as f64 / 2.0;
        let damping = (eta - l * eta * eta) / 2.0;
        assert!(damping > 0.0);
        assert!(
            window_condition(c, delta, damping, tau).unwrap(),
            "l={l} zeta={zeta} tau={tau}"
        );
    }
}

// 1000 random admissible recursion instances, delays up to 8, horizon 200:
// the decay envelope never breaks and the unrolled closed form reproduces
// the recursion to 1e-10 relative.
#[test]
fn recursion_oracle_holds_in_bulk() {
    let mut src = NormalSource::new(909, 0);
    let horizon = 200;
    for i in 0..1000 {
        let c = 0.1 + 0.85 * src.uniform_open_closed();
        let damping = 0.1 + 9.9 * src.uniform_open_closed();
        let tau = 1 + (src.uniform_open_closed() * 8.0) as u32;
        let a0 = 10.0 * src.uniform_open_closed();
        // place the spill strictly inside the admissible region
        let prefix: f64 = (0..tau).map(|k| libm::pow(c, k as f64)).sum();
        let delta = 0.999 * src.uniform_open_closed() * libm::pow(c, tau as f64) * damping / prefix;
        let b: Vec<f64> = (0..=horizon)
            .map(|t| src.uniform_open_closed() * libm::pow(c, t as f64) * a0)
            .collect();
        let inst = RecursionInstance::new(c, delta, damping, tau, a0, b).unwrap();
        assert!(inst.admissible(), "case {i} must be admissible by construction");
        let rep = decay_recursion_oracle(&inst, horizon).unwrap();
        assert!(rep.envelope.passed(), "case {i}: {}", rep.envelope.summary_line());
        assert!(rep.closed_form.passed(), "case {i}: {}", rep.closed_form.summary_line());
    }
}

// Replays the iteration by hand and checks that the gap between the delayed
// iterate and its shadow is exactly the step size times the sum of the
// gradients still in flight.
#[test]
fn iterate_shadow_difference_identity() {
    let problem = gen_regression_data(30, 4, 11).unwrap();
    let (eta, tau, steps) = (0.01, 3u32, 100usize);
    let x0 = vec![0.5, -1.0, 2.0, 0.0];
    let mut state = DelayedRunState::new(x0.clone(), eta, tau).unwrap();
    let mut grads: Vec<Vec<f64>> = Vec::new();
    let mut dev_sq_replay = Vec::new();
    for t in 0..=steps {
        let x_t = state.current().to_vec();
        let shadow_t = state.shadow().to_vec();
        let lo = t.saturating_sub(tau as usize);
        let mut predicted = vec![0.0; x_t.len()];
        for g in &grads[lo..t] {
            axpy(&mut predicted, eta, g);
        }
        let actual: Vec<f64> = x_t.iter().zip(&shadow_t).map(|(a, b)| a - b).collect();
        let err = dist(&actual, &predicted);
        let scale = norm(&actual).max(norm(&predicted)).max(1e-30);
        assert!(err <= 1e-10 * scale, "t={t}: err={err} scale={scale}");
        dev_sq_replay.push(dgd_core::linalg::dist_sq(&x_t, &shadow_t));
        grads.push(problem.grad(&x_t));
        shadow_step(&mut state, &problem).unwrap();
        dgd_step(&mut state, &problem).unwrap();
    }
    // the recorded trace must agree with the replay bit for bit
    let trace = run(&problem, &x0, eta, tau, steps, &[0.0; 4], 0.0).unwrap();
    let recorded: Vec<f64> = trace.rows.iter().map(|r| r.dev_sq).collect();
    assert_eq!(recorded, dev_sq_replay);
}

// A delayed run on a single-mode objective decays along one geometric rate,
// so the tail of its log error is a straight line. Wider instances mix
// modes and only straighten out asymptotically.
#[test]
fn log_error_tail_is_linear_on_a_single_mode_run() {
    let p = Problem::Ridge(gen_regression_data(100, 1, 42).unwrap());
    let k = constants_of(&p, 1e-10).unwrap();
    let policy = StepSizePolicy::new(k.l, k.mu, k.zeta, 5, 1.0).unwrap();
    let eta = 0.1 / 5.0;
    assert!(eta <= max_step_strongly_convex(policy).unwrap());
    let trace = run(&p, &[0.0], eta, 5, 400, &k.x_star, k.f_star).unwrap();
    let logs = log_error_metrics(&trace).unwrap();
    let (slope, r2) = slope_fit(&logs.dist, 0.5).unwrap();
    assert!(slope < 0.0, "slope={slope}");
    assert!(r2 >= 0.99, "r2={r2}");
}

proptest! {
    // A trace sitting exactly on a geometric envelope passes with no
    // violations and no warnings; lifting any single later entry by 2e-6
    // relative produces exactly one violation, at that entry, unless the
    // entry has decayed so far that the lift is smaller than the resolution
    // floor on differences, in which case the row is reported unresolved
    // rather than judged. (Lifting the anchor entry instead rescales the
    // whole envelope, so it is excluded.)
    #[test]
    fn prop_envelope_soundness(
        rate in 0.5f64..0.99,
        len in 20usize..120,
        bump in 1usize..119,
        which in 0usize..3,
    ) {
        let bump = 1 + bump % (len - 1);
        let target = [BoundTarget::Distance, BoundTarget::ShadowDistanceSq, BoundTarget::CostGap][which];
        let spec = BoundSpec::new(1.0, rate, 0, target).unwrap();
        let clean = geometric_trace(rate, len, 1);
        let report = check_envelope(&clean, &spec, "probe").unwrap();
        prop_assert!(report.passed());
        prop_assert_eq!(report.checked, len);
        prop_assert!(report.warnings.is_empty());
        prop_assert_eq!(report.unresolved, 0);

        let mut bumped = clean.clone();
        let (lhs, rhs) = match target {
            BoundTarget::Distance => {
                bumped.rows[bump].dist *= 1.0 + 2e-6;
                (bumped.rows[bump].dist, clean.rows[bump].dist)
            }
            BoundTarget::ShadowDistanceSq => {
                bumped.rows[bump].shadow_dist_sq *= 1.0 + 2e-6;
                (bumped.rows[bump].shadow_dist_sq, clean.rows[bump].shadow_dist_sq)
            }
            BoundTarget::CostGap => {
                bumped.rows[bump].cost_gap *= 1.0 + 2e-6;
                (bumped.rows[bump].cost_gap, clean.rows[bump].cost_gap)
            }
        };
        // the column peaks at the anchor value 1, so the per-row noise is
        // the bare rounding allowance; squared targets compare differences
        // at twice the root scale
        let noise = RESOLUTION_FACTOR * f64::EPSILON * (bump + 1) as f64;
        let floor = match target {
            BoundTarget::ShadowDistanceSq => 2.0 * libm::sqrt(lhs) * noise + noise * noise,
            _ => noise,
        };
        let report = check_envelope(&bumped, &spec, "probe").unwrap();
        if lhs - rhs > floor {
            prop_assert_eq!(report.violations.len(), 1);
            prop_assert_eq!(report.violations[0].t, bump);
            prop_assert!((report.violations[0].margin - 2e-6).abs() < 1e-7);
            prop_assert_eq!(report.unresolved, 0);
        } else {
            prop_assert!(report.violations.is_empty());
            prop_assert_eq!(report.unresolved, 1);
        }
    }

    #[test]
    fn prop_count_increases_bounds(xs in proptest::collection::vec(-1e6f64..1e6, 0..200)) {
        let up = count_strict_increases(&xs);
        prop_assert!(up <= xs.len().saturating_sub(1));
        let mut rev: Vec<f64> = xs.clone();
        rev.reverse();
        let down = count_strict_increases(&rev);
        // increases of one direction are non-decreases of the other; ties
        // are counted by neither
        prop_assert!(up + down <= xs.len().saturating_sub(1));
    }

    #[test]
    fn prop_slope_fit_recovers_affine(
        a in prop_oneof![-2.0f64..-1e-3, 1e-3f64..2.0],
        b in -5.0f64..5.0,
        len in 30usize..120,
        frac in 0.4f64..1.0,
    ) {
        let xs: Vec<f64> = (0..len).map(|t| b + a * t as f64).collect();
        let (slope, r2) = slope_fit(&xs, frac).unwrap();
        prop_assert!((slope - a).abs() <= 1e-9 * a.abs());
        prop_assert!(r2 > 1.0 - 1e-9);
    }

    #[test]
    fn prop_log_errors_linear_in_t(rate in 0.3f64..0.95, tau in 0u32..6) {
        let trace = geometric_trace(rate, 50, tau);
        let m = log_error_metrics(&trace).unwrap();
        prop_assert_eq!(m.dist.len(), 50);
        prop_assert_eq!(m.dist[0], 0.0);
        prop_assert_eq!(m.gap[tau as usize], 0.0);
        let half_log = libm::log(rate) / 2.0;
        for (t, v) in m.dist.iter().enumerate() {
            let want = t as f64 * half_log;
            prop_assert!((v - want).abs() <= 1e-11 * (1.0 + want.abs()), "t={}", t);
        }
        let (slope, r2) = slope_fit(&m.dist, 0.5).unwrap();
        prop_assert!((slope - half_log).abs() <= 1e-9 * half_log.abs());
        prop_assert!(r2 > 1.0 - 1e-9);
    }

    // Degenerate grids and windows are rejected, never misreported.
    #[test]
    fn prop_slope_fit_rejects_short_tails(len in 0usize..30, frac in 0.01f64..0.3) {
        let xs: Vec<f64> = (0..len).map(|t| t as f64).collect();
        let take = libm::ceil(len as f64 * frac) as usize;
        let out = slope_fit(&xs, frac);
        if take < 10 {
            prop_assert_eq!(out, Err(VerifyError::TooFewPoints { needed: 10, got: take }));
        } else {
            prop_assert!(out.is_ok());
        }
    }
}
