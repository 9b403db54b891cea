//! Subcommand implementations. Each returns Ok(true) when every applicable
//! check passed, Ok(false) on a bound violation, Err on configuration or IO
//! problems; main maps those onto exit codes 0, 1, 2.

use std::path::PathBuf;

use dgd_core::constants::{alpha, HalfInteger, StepSizePolicy};
use dgd_core::descent::{run, RunTrace};
use dgd_core::problems::{constants_of, Problem, ProblemConstants};
use dgd_core::rng::NormalSource;
use dgd_core::verify::{
    check_deviation, check_distance_envelope, check_pl_envelope, check_shadow_envelope,
    decay_recursion_oracle, distance_prefactor, half_integers_up_to, j_bound_limit_sweep,
    j_bound_probe, j_bound_sweep, j_bound_tightness_probe, log_error_metrics,
    monitor_shadow_recursion, slope_fit, LogErrors, RecursionInstance, VerifyError,
    ViolationReport,
};

use crate::dataset::{self, Dataset};
use crate::expr::eval_eta;
use crate::trace_csv::{CsvRow, CsvTrace};
use crate::{config_err, CliError};

fn verr(e: VerifyError) -> CliError {
    CliError::Data(e.to_string())
}

pub fn cmd_gen_data(problem: &str, m: usize, d: usize, seed: u64, out: &PathBuf) -> Result<(), CliError> {
    let ds = dataset::generate(problem, m, d, seed)?;
    ds.save(out)?;
    print!("wrote {} problem={} m={} d={} seed={}", out.display(), ds.problem, ds.m, ds.d, ds.seed);
    match ds.lambda_min {
        Some(lm) => println!(" lambda_min={lm}"),
        None => println!(" mu_reg={}", ds.mu_reg),
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub m: Option<usize>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub tau: u32,
    pub eta_spec: String,
    pub q: f64,
    pub max_iters: Option<usize>,
    pub tol: f64,
    pub data: Option<PathBuf>,
    pub x0: Option<String>,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 42;

/// Loads the dataset file when it exists, otherwise generates one from the
/// flags (and saves it if a path was given). Flags passed alongside an
/// existing file must agree with its contents.
fn resolve_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    if let Some(path) = &cfg.data {
        if path.exists() {
            let ds = Dataset::load(path)?;
            if cfg.problem.as_deref().is_some_and(|p| p != ds.problem) {
                return Err(config_err(format!(
                    "--problem disagrees with {} (holds {})",
                    path.display(),
                    ds.problem
                )));
            }
            if cfg.m.is_some_and(|m| m != ds.m)
                || cfg.d.is_some_and(|d| d != ds.d)
                || cfg.seed.is_some_and(|s| s != ds.seed)
            {
                return Err(config_err(format!(
                    "shape or seed flags disagree with {} (m={} d={} seed={})",
                    path.display(),
                    ds.m,
                    ds.d,
                    ds.seed
                )));
            }
            return Ok(ds);
        }
    }
    let problem = cfg
        .problem
        .as_deref()
        .ok_or_else(|| config_err("--problem is required when no dataset file is loaded"))?;
    let m = cfg.m.ok_or_else(|| config_err("--m is required when generating data"))?;
    let d = cfg.d.ok_or_else(|| config_err("--d is required when generating data"))?;
    let ds = dataset::generate(problem, m, d, cfg.seed.unwrap_or(DEFAULT_SEED))?;
    if let Some(path) = &cfg.data {
        ds.save(path)?;
    }
    Ok(ds)
}

fn parse_x0(spec: Option<&str>, d: usize) -> Result<Vec<f64>, CliError> {
    let Some(spec) = spec else {
        return Ok(vec![0.0; d]);
    };
    let parts: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let x0 = parts.map_err(|_| config_err(format!("--x0 must be a comma list of numbers, got '{spec}'")))?;
    if x0.len() != d {
        return Err(config_err(format!("--x0 has {} entries, problem dimension is {d}", x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(config_err("--x0 entries must be finite"));
    }
    Ok(x0)
}

/// How accurately the trace's reference point is known in iterate space.
/// A curvature-bounded minimizer is found by descent to gradient norm tol,
/// which pins it within tol/mu of the true optimum; the flat problem's
/// reference is a direct pseudo-inverse solve, exact to rounding.
fn reference_resolution(k: &ProblemConstants, tol: f64) -> f64 {
    if k.mu > 0.0 {
        tol / k.mu
    } else {
        0.0
    }
}

/// Every check that applies to this problem class, in report order. The
/// envelope checks gate themselves on admissibility; the recursion monitor
/// and the deviation window hold unconditionally and are always on.
fn run_reports(trace: &RunTrace, k: &ProblemConstants, q: f64) -> Result<Vec<ViolationReport>, CliError> {
    let mut reports = Vec::new();
    if k.mu > 0.0 {
        let policy = StepSizePolicy::new(k.l, k.mu, k.zeta, trace.tau, q).map_err(|e| verr(e.into()))?;
        reports.push(check_distance_envelope(trace, &policy).map_err(verr)?);
        reports.push(check_shadow_envelope(trace, &policy).map_err(verr)?);
        reports.push(monitor_shadow_recursion(trace, &policy).map_err(verr)?);
    }
    reports.push(check_pl_envelope(trace, k.l, k.zeta).map_err(verr)?);
    reports.push(check_deviation(trace).map_err(verr)?);
    Ok(reports)
}

fn all_applicable_pass(reports: &[ViolationReport]) -> bool {
    reports.iter().all(|r| !r.applicable() || r.passed())
}

/// The plotted guarantee column: the distance envelope for curvature-bounded
/// problems, the anchored cost envelope for the flat one. Empty when the
/// corresponding report was not applicable.
fn bound_column(
    trace: &RunTrace,
    k: &ProblemConstants,
    q: f64,
    reports: &[ViolationReport],
) -> Result<Vec<Option<f64>>, CliError> {
    let n = trace.rows.len();
    let mut out = vec![None; n];
    let applicable = |id: &str| reports.iter().any(|r| r.id == id && r.applicable());
    if k.mu > 0.0 && applicable("distance-envelope") {
        let policy = StepSizePolicy::new(k.l, k.mu, k.zeta, trace.tau, q).map_err(|e| verr(e.into()))?;
        let b = distance_prefactor(&policy, trace.eta).map_err(verr)?;
        let a = alpha(k.mu, k.l).map_err(|e| verr(e.into()))?;
        let rate = 1.0 - trace.eta * a / (1.0 + q);
        let d0 = trace.rows[0].dist;
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = Some(b * libm::pow(rate, t as f64 / 2.0) * d0);
        }
    } else if k.mu == 0.0 && applicable("pl-envelope") {
        let rate = 1.0 - trace.eta * k.zeta;
        let tau = trace.tau as usize;
        let anchor = trace.rows[tau].cost_gap;
        for (t, slot) in out.iter_mut().enumerate().skip(tau) {
            *slot = Some(libm::pow(rate, (t - tau) as f64) * anchor);
        }
    }
    Ok(out)
}

fn validate_common(tau: u32, q: f64, tol: f64) -> Result<(), CliError> {
    if tau == 0 {
        return Err(config_err("--tau must be at least 1"));
    }
    if !q.is_finite() || q <= 0.0 {
        return Err(config_err("--q must be positive and finite"));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(config_err("--tol must be positive and finite"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble_csv(
    ds: &Dataset,
    k: &ProblemConstants,
    cfg: &RunConfig,
    eta: f64,
    max_iters: usize,
    x0: &[f64],
    trace: &RunTrace,
    logs: Option<&LogErrors>,
    bound: &[Option<f64>],
    reports: &[ViolationReport],
) -> CsvTrace {
    let mut csv = CsvTrace::default();
    csv.push_meta("version", 1);
    csv.push_meta("problem", &ds.problem);
    csv.push_meta("m", ds.m);
    csv.push_meta("d", ds.d);
    csv.push_meta("seed", ds.seed);
    csv.push_meta("mu_reg", ds.mu_reg);
    if let Some(lm) = ds.lambda_min {
        csv.push_meta("lambda_min", lm);
    }
    csv.push_meta("tau", cfg.tau);
    csv.push_meta("q", cfg.q);
    csv.push_meta("eta_spec", &cfg.eta_spec);
    csv.push_meta("eta", eta);
    csv.push_meta("l", k.l);
    csv.push_meta("mu", k.mu);
    csv.push_meta("zeta", k.zeta);
    csv.push_meta("f_star", k.f_star);
    csv.push_meta("tol", cfg.tol);
    csv.push_meta("max_iters", max_iters);
    let x0_text: Vec<String> = x0.iter().map(|v| v.to_string()).collect();
    csv.push_meta("x0", x0_text.join(","));
    let minimizer = if k.mu > 0.0 {
        format!("grad_norm<={}", cfg.tol)
    } else {
        "pseudo_inverse".to_string()
    };
    csv.push_meta("minimizer", minimizer);
    for r in reports {
        csv.push_meta("check", r.key_value_record());
    }
    csv.rows = trace
        .rows
        .iter()
        .enumerate()
        .map(|(t, row)| CsvRow {
            t: row.t,
            dist: row.dist,
            cost_gap: row.cost_gap,
            grad_sq: row.grad_sq,
            dev_sq: row.dev_sq,
            log_dist: logs.and_then(|l| l.dist.get(t).copied()),
            log_gap: logs.and_then(|l| l.gap.get(t).copied()),
            bound: bound[t],
        })
        .collect();
    csv
}

pub fn cmd_run(cfg: &RunConfig) -> Result<bool, CliError> {
    validate_common(cfg.tau, cfg.q, cfg.tol)?;
    let ds = resolve_dataset(cfg)?;
    let problem = ds.problem()?;
    let k = constants_of(&problem, cfg.tol).map_err(|e| CliError::Data(e.to_string()))?;
    let eta = eval_eta(&cfg.eta_spec, k.l, cfg.tau)?;
    let max_iters = cfg.max_iters.unwrap_or(200 * cfg.tau as usize);
    let x0 = parse_x0(cfg.x0.as_deref(), ds.d)?;
    let mut trace = run(&problem, &x0, eta, cfg.tau, max_iters, &k.x_star, k.f_star)
        .map_err(|e| CliError::Data(e.to_string()))?;
    trace.seed = Some(ds.seed);
    trace.problem = Some(ds.problem.clone());
    trace.reference_resolution = reference_resolution(&k, cfg.tol);

    let reports = run_reports(&trace, &k, cfg.q)?;
    let logs = log_error_metrics(&trace).ok();
    let bound = bound_column(&trace, &k, cfg.q, &reports)?;
    let csv = assemble_csv(&ds, &k, cfg, eta, max_iters, &x0, &trace, logs.as_ref(), &bound, &reports);
    csv.save(&cfg.out)?;

    println!("eta={eta} from '{}' with L={} tau={}", cfg.eta_spec, k.l, cfg.tau);
    for r in &reports {
        println!("{}", r.summary_line());
    }
    println!("wrote {} rows={}", cfg.out.display(), csv.rows.len());
    Ok(all_applicable_pass(&reports))
}

/// The randomized battery for the damped window recursion: instances drawn
/// strictly inside their own admissible region must decay geometrically and
/// agree with the unrolled closed form at every step.
fn recursion_battery(instances: usize, seed: u64) -> Result<bool, CliError> {
    let horizon = 200;
    let mut src = NormalSource::new(seed, 0);
    let mut envelope_bad = 0usize;
    let mut identity_bad = 0usize;
    for _ in 0..instances {
        let c = 0.1 + 0.85 * src.uniform_open_closed();
        let damping = 0.1 + 9.9 * src.uniform_open_closed();
        let tau = 1 + (src.uniform_open_closed() * 8.0) as u32;
        let a0 = 10.0 * src.uniform_open_closed();
        let prefix: f64 = (0..tau).map(|k| libm::pow(c, k as f64)).sum();
        let delta = 0.999 * src.uniform_open_closed() * libm::pow(c, tau as f64) * damping / prefix;
        let b: Vec<f64> = (0..=horizon)
            .map(|t| src.uniform_open_closed() * libm::pow(c, t as f64) * a0)
            .collect();
        let inst = RecursionInstance::new(c, delta, damping, tau, a0, b).map_err(verr)?;
        if !inst.admissible() {
            return Err(CliError::Data("generated instance escaped its admissible region".into()));
        }
        let rep = decay_recursion_oracle(&inst, horizon).map_err(verr)?;
        envelope_bad += rep.envelope.violations.len();
        identity_bad += rep.closed_form.violations.len();
    }
    let ok = envelope_bad == 0 && identity_bad == 0;
    println!(
        "window-recursion: {} instances={instances} envelope_violations={envelope_bad} identity_violations={identity_bad}",
        if ok { "pass" } else { "fail" }
    );
    Ok(ok)
}

/// Degenerate zero-spill instances: the recursion is plain damped decay and
/// the condition holds for free.
fn zero_spill_battery(seed: u64) -> Result<bool, CliError> {
    let horizon = 100;
    let mut src = NormalSource::new(seed, 1);
    let mut bad = 0usize;
    let count = 10;
    for _ in 0..count {
        let c = 0.1 + 0.85 * src.uniform_open_closed();
        let damping = 0.1 + 9.9 * src.uniform_open_closed();
        let tau = 1 + (src.uniform_open_closed() * 8.0) as u32;
        let a0 = 10.0 * src.uniform_open_closed();
        let b: Vec<f64> = (0..=horizon).map(|_| src.uniform_open_closed() * a0).collect();
        let inst = RecursionInstance::new(c, 0.0, damping, tau, a0, b).map_err(verr)?;
        let rep = decay_recursion_oracle(&inst, horizon).map_err(verr)?;
        bad += rep.envelope.violations.len() + rep.closed_form.violations.len();
    }
    let ok = bad == 0;
    println!(
        "window-recursion-zero-spill: {} instances={count} violations={bad}",
        if ok { "pass" } else { "fail" }
    );
    Ok(ok)
}

pub fn cmd_verify_lemmas(
    step: f64,
    instances: usize,
    seed: u64,
    probe_j: Option<f64>,
) -> Result<bool, CliError> {
    if let Some(j) = probe_j {
        let half = HalfInteger::from_twice(1).map_err(|e| verr(e.into()))?;
        let report = j_bound_probe(half, j, step).map_err(verr)?;
        println!("{}", report.summary_line());
        if let Some(v) = report.violations.first() {
            let x = (v.t as f64 + 1.0) * step;
            println!("counterexample: n=1/2 J={j} x={x} lhs={} rhs={}", v.lhs, v.rhs);
            return Ok(false);
        }
        return Ok(true);
    }
    if instances == 0 {
        return Err(config_err("--instances must be at least 1"));
    }
    let mut all = true;

    let sweep = j_bound_sweep(&half_integers_up_to(50), step).map_err(verr)?;
    println!("{}", sweep.summary_line());
    all &= sweep.passed();

    let limit = j_bound_limit_sweep(step).map_err(verr)?;
    println!("{}", limit.summary_line());
    all &= limit.passed();

    // This probe runs a deliberately undersized growth factor; the battery
    // is only healthy if it detects the failure.
    let tight = j_bound_tightness_probe(step).map_err(verr)?;
    let fired = !tight.violations.is_empty();
    println!(
        "j-bound-tightness: {} violations={} (a silent probe means the detector is broken)",
        if fired { "fired" } else { "silent" },
        tight.violations.len()
    );
    all &= fired;

    all &= recursion_battery(instances, seed)?;
    all &= zero_spill_battery(seed)?;
    Ok(all)
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub problem: String,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    pub taus: String,
    pub etas: String,
    pub q: f64,
    pub max_iters: Option<usize>,
    pub tol: f64,
    pub tail: f64,
    pub out: PathBuf,
}

struct SweepRow {
    tau: u32,
    eta_spec: String,
    eta: Option<f64>,
    admissible: Option<bool>,
    slope: Option<f64>,
    r_squared: Option<f64>,
    violations: Option<usize>,
    warnings: Option<usize>,
    status: String,
}

impl SweepRow {
    fn line(&self) -> String {
        let opt_f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_b = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.tau,
            self.eta_spec,
            opt_f(self.eta),
            opt_b(self.admissible),
            opt_f(self.slope),
            opt_f(self.r_squared),
            opt_u(self.violations),
            opt_u(self.warnings),
            self.status
        )
    }
}

/// Error text as a single CSV cell: commas would split it.
fn status_text(e: &CliError) -> String {
    e.to_string().replace(',', ";")
}

fn sweep_cell(
    problem: &Problem,
    k: &ProblemConstants,
    tau: u32,
    eta_spec: &str,
    q: f64,
    max_iters: Option<usize>,
    tol: f64,
    tail: f64,
) -> (SweepRow, usize) {
    let mut row = SweepRow {
        tau,
        eta_spec: eta_spec.to_string(),
        eta: None,
        admissible: None,
        slope: None,
        r_squared: None,
        violations: None,
        warnings: None,
        status: String::new(),
    };
    let eta = match eval_eta(eta_spec, k.l, tau) {
        Ok(v) => v,
        Err(e) => {
            row.status = status_text(&e);
            return (row, 0);
        }
    };
    row.eta = Some(eta);
    let iters = max_iters.unwrap_or(200 * tau as usize);
    let x0 = vec![0.0; k.x_star.len()];
    let mut trace = match run(problem, &x0, eta, tau, iters, &k.x_star, k.f_star) {
        Ok(t) => t,
        Err(e) => {
            row.status = status_text(&CliError::Data(e.to_string()));
            return (row, 0);
        }
    };
    trace.reference_resolution = reference_resolution(k, tol);
    let reports = match run_reports(&trace, k, q) {
        Ok(r) => r,
        Err(e) => {
            row.status = status_text(&e);
            return (row, 0);
        }
    };
    let envelope_id = if k.mu > 0.0 { "distance-envelope" } else { "pl-envelope" };
    row.admissible = Some(reports.iter().any(|r| r.id == envelope_id && r.applicable()));
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    row.violations = Some(violations);
    row.warnings = Some(reports.iter().map(|r| r.warnings.len()).sum());
    let fit = log_error_metrics(&trace).and_then(|logs| {
        let series = if k.mu > 0.0 { &logs.dist } else { &logs.gap };
        slope_fit(series, tail)
    });
    match fit {
        Ok((slope, r2)) => {
            row.slope = Some(slope);
            row.r_squared = Some(r2);
            row.status = "ok".to_string();
        }
        Err(e) => row.status = status_text(&verr(e)),
    }
    (row, violations)
}

pub const SWEEP_HEADER: &str = "tau,eta_spec,eta,admissible,slope,r_squared,violations,warnings,status";

pub fn cmd_sweep(cfg: &SweepConfig) -> Result<bool, CliError> {
    if !cfg.q.is_finite() || cfg.q <= 0.0 {
        return Err(config_err("--q must be positive and finite"));
    }
    if !cfg.tol.is_finite() || cfg.tol <= 0.0 {
        return Err(config_err("--tol must be positive and finite"));
    }
    if !cfg.tail.is_finite() || cfg.tail <= 0.0 || cfg.tail > 1.0 {
        return Err(config_err("--tail must lie in (0, 1]"));
    }
    let taus: Vec<u32> = cfg
        .taus
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| config_err(format!("bad delay '{s}' in --taus"))))
        .collect::<Result<_, _>>()?;
    if taus.is_empty() || taus.contains(&0) {
        return Err(config_err("--taus must be a nonempty comma list of delays >= 1"));
    }
    let etas: Vec<String> = cfg.etas.split(',').map(|s| s.trim().to_string()).collect();
    if etas.is_empty() || etas.iter().any(String::is_empty) {
        return Err(config_err("--etas must be a nonempty comma list of step expressions"));
    }

    let ds = dataset::generate(&cfg.problem, cfg.m, cfg.d, cfg.seed)?;
    let problem = ds.problem()?;
    let k = constants_of(&problem, cfg.tol).map_err(|e| CliError::Data(e.to_string()))?;

    let mut out = String::new();
    for (key, value) in [
        ("version", "1".to_string()),
        ("problem", ds.problem.clone()),
        ("m", ds.m.to_string()),
        ("d", ds.d.to_string()),
        ("seed", ds.seed.to_string()),
        ("q", cfg.q.to_string()),
        ("tol", cfg.tol.to_string()),
        ("tail", cfg.tail.to_string()),
        ("max_iters", cfg.max_iters.map(|v| v.to_string()).unwrap_or_else(|| "200*tau".to_string())),
        ("l", k.l.to_string()),
        ("mu", k.mu.to_string()),
        ("zeta", k.zeta.to_string()),
    ] {
        out.push_str(&format!("# {key}={value}\n"));
    }
    out.push_str(SWEEP_HEADER);
    out.push('\n');

    let mut total_violations = 0usize;
    for &tau in &taus {
        for eta_spec in &etas {
            let (row, violations) =
                sweep_cell(&problem, &k, tau, eta_spec, cfg.q, cfg.max_iters, cfg.tol, cfg.tail);
            total_violations += violations;
            out.push_str(&row.line());
            out.push('\n');
        }
    }
    std::fs::write(&cfg.out, &out).map_err(|e| CliError::Io(cfg.out.clone(), e))?;
    println!("wrote {} rows={}", cfg.out.display(), taus.len() * etas.len());
    Ok(total_violations == 0)
}
