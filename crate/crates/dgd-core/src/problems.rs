//! The three synthetic objectives the experiment suite runs on: ridge
//! regularized least squares, l2-regularized logistic regression, and an
//! underdetermined least-squares fit. Each comes with seeded data generation,
//! exact gradients, curvature constants, and a minimizer oracle.
//!
//! The underdetermined problem is the gradient-domination example: with d > m
//! and A A^T positive definite, half the squared gradient norm dominates zeta
//! times the cost gap (a Polyak-Lojasiewicz inequality), even though the cost
//! is nowhere strongly convex.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::{cos, exp, log1p};

use crate::descent::GradientOracle;
use crate::linalg::{
    axpy, cholesky_factor, cholesky_solve, gram, gram_t, mat_t_vec, mat_vec, norm, norm_sq,
    sym_eigenvalues, LinalgError,
};
use crate::rng::NormalSource;

/// Ridge weight the generators bake into regression and classification
/// problems; tests and the CLI both run the generated instances as-is.
pub const DEFAULT_REGULARIZER: f64 = 0.1;

/// Iteration bound for the delay-free reference descent; generous for any
/// conditioning the generators produce.
pub const MINIMIZER_ITERATION_CAP: usize = 500_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    /// m and d must both be at least 1.
    EmptyShape,
    /// Buffer length disagrees with the declared shape.
    ShapeMismatch { expected: usize, got: usize },
    /// Classification labels must be exactly +1 or -1.
    BadLabel { index: usize },
    /// The ridge weight must be finite and nonnegative.
    BadRegularizer,
    /// Class-balanced generation needs an even sample count.
    OddSampleCount { m: usize },
    /// The flat least-squares problem needs more unknowns than equations.
    NotUnderdetermined { m: usize, d: usize },
    /// A A^T must be positive definite for the minimizer to be well defined.
    SingularGram,
    /// Every regeneration attempt produced a degenerate Gram matrix.
    ExhaustedAttempts { attempts: u32 },
    Linalg(LinalgError),
    /// Plain gradient descent hit the iteration cap before reaching tol.
    IterationCap { iters: usize, grad_norm: f64 },
    /// Step scale and tolerance must be positive and finite.
    BadSolverInput,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::EmptyShape => write!(f, "m and d must both be at least 1"),
            ProblemError::ShapeMismatch { expected, got } => {
                write!(f, "buffer length {got} does not match the declared shape ({expected})")
            }
            ProblemError::BadLabel { index } => {
                write!(f, "label at index {index} is not +1 or -1")
            }
            ProblemError::BadRegularizer => {
                write!(f, "ridge weight must be finite and nonnegative")
            }
            ProblemError::OddSampleCount { m } => {
                write!(f, "class-balanced generation needs an even m, got {m}")
            }
            ProblemError::NotUnderdetermined { m, d } => {
                write!(f, "flat least squares needs d > m, got m = {m}, d = {d}")
            }
            ProblemError::SingularGram => write!(f, "A A^T is not positive definite"),
            ProblemError::ExhaustedAttempts { attempts } => {
                write!(f, "no positive definite Gram after {attempts} attempts")
            }
            ProblemError::Linalg(e) => write!(f, "linear algebra failure: {e}"),
            ProblemError::IterationCap { iters, grad_norm } => {
                write!(
                    f,
                    "reference descent stopped at the {iters}-iteration cap with gradient norm {grad_norm:e}"
                )
            }
            ProblemError::BadSolverInput => {
                write!(f, "solver scale and tolerance must be positive and finite")
            }
        }
    }
}

impl From<LinalgError> for ProblemError {
    fn from(e: LinalgError) -> Self {
        ProblemError::Linalg(e)
    }
}

fn check_shape(m: usize, d: usize, a_len: usize, vec_len: usize) -> Result<(), ProblemError> {
    if m == 0 || d == 0 {
        return Err(ProblemError::EmptyShape);
    }
    if a_len != m * d {
        return Err(ProblemError::ShapeMismatch { expected: m * d, got: a_len });
    }
    if vec_len != m {
        return Err(ProblemError::ShapeMismatch { expected: m, got: vec_len });
    }
    Ok(())
}

fn check_regularizer(mu_reg: f64) -> Result<(), ProblemError> {
    if !mu_reg.is_finite() || mu_reg < 0.0 {
        return Err(ProblemError::BadRegularizer);
    }
    Ok(())
}

/// f(x) = (1/m) sum_i (y_i - A_i.x)^2 + (mu/2) ||x||^2, data rows A_i.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeLSProblem {
    a: Vec<f64>,
    y: Vec<f64>,
    mu_reg: f64,
    m: usize,
    d: usize,
}

impl RidgeLSProblem {
    pub fn new(
        m: usize,
        d: usize,
        a: Vec<f64>,
        y: Vec<f64>,
        mu_reg: f64,
    ) -> Result<Self, ProblemError> {
        check_shape(m, d, a.len(), y.len())?;
        check_regularizer(mu_reg)?;
        Ok(Self { a, y, mu_reg, m, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Data matrix, row major, m x d.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn mu_reg(&self) -> f64 {
        self.mu_reg
    }
}

impl GradientOracle for RidgeLSProblem {
    fn dimension(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut r = mat_vec(&self.a, self.m, self.d, x);
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri = yi - *ri;
        }
        norm_sq(&r) / self.m as f64 + 0.5 * self.mu_reg * norm_sq(x)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut r = mat_vec(&self.a, self.m, self.d, x);
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri = yi - *ri;
        }
        let mut g = mat_t_vec(&self.a, self.m, self.d, &r);
        let scale = -2.0 / self.m as f64;
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = scale * *gi + self.mu_reg * xi;
        }
        g
    }
}

/// ln(1 + e^{-z}) without overflow for large |z|.
fn softplus_neg(z: f64) -> f64 {
    if z >= 0.0 {
        log1p(exp(-z))
    } else {
        -z + log1p(exp(z))
    }
}

/// 1/(1 + e^z), the magnitude of d/dz ln(1 + e^{-z}).
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = exp(-z);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + exp(z))
    }
}

/// f(x) = (1/m) sum_i ln(1 + e^{-y_i A_i.x}) + (mu/2) ||x||^2, labels +-1.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProblem {
    a: Vec<f64>,
    y: Vec<f64>,
    mu_reg: f64,
    m: usize,
    d: usize,
}

impl LogisticProblem {
    pub fn new(
        m: usize,
        d: usize,
        a: Vec<f64>,
        y: Vec<f64>,
        mu_reg: f64,
    ) -> Result<Self, ProblemError> {
        check_shape(m, d, a.len(), y.len())?;
        check_regularizer(mu_reg)?;
        for (index, &yi) in y.iter().enumerate() {
            if yi != 1.0 && yi != -1.0 {
                return Err(ProblemError::BadLabel { index });
            }
        }
        Ok(Self { a, y, mu_reg, m, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn mu_reg(&self) -> f64 {
        self.mu_reg
    }
}

impl GradientOracle for LogisticProblem {
    fn dimension(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let z = mat_vec(&self.a, self.m, self.d, x);
        let mut acc = 0.0;
        for (zi, yi) in z.iter().zip(&self.y) {
            acc += softplus_neg(yi * zi);
        }
        acc / self.m as f64 + 0.5 * self.mu_reg * norm_sq(x)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let z = mat_vec(&self.a, self.m, self.d, x);
        let m_f = self.m as f64;
        let mut w = Vec::with_capacity(self.m);
        for (zi, yi) in z.iter().zip(&self.y) {
            w.push(-yi * sigmoid_neg(yi * zi) / m_f);
        }
        let mut g = mat_t_vec(&self.a, self.m, self.d, &w);
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi += self.mu_reg * xi;
        }
        g
    }
}

/// f(x) = 1/2 ||A x - b||^2 with d > m, so the fit is exact at the minimum
/// and the cost satisfies a gradient-domination inequality with constant
/// lambda_min(A A^T).
#[derive(Debug, Clone, PartialEq)]
pub struct PLLeastSquares {
    a: Vec<f64>,
    b: Vec<f64>,
    m: usize,
    d: usize,
}

impl PLLeastSquares {
    pub fn new(m: usize, d: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self, ProblemError> {
        check_shape(m, d, a.len(), b.len())?;
        if d <= m {
            return Err(ProblemError::NotUnderdetermined { m, d });
        }
        // A Cholesky factorization succeeding is the positive definiteness
        // check on A A^T.
        cholesky_factor(&gram(&a, m, d), m).map_err(|_| ProblemError::SingularGram)?;
        Ok(Self { a, b, m, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

impl GradientOracle for PLLeastSquares {
    fn dimension(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut r = mat_vec(&self.a, self.m, self.d, x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        0.5 * norm_sq(&r)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut r = mat_vec(&self.a, self.m, self.d, x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        mat_t_vec(&self.a, self.m, self.d, &r)
    }
}

/// Tagged union over the three objectives, for callers that pick a problem
/// at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Ridge(RidgeLSProblem),
    Logistic(LogisticProblem),
    Pl(PLLeastSquares),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Ridge(_) => "ridge_ls",
            Problem::Logistic(_) => "logistic",
            Problem::Pl(_) => "pl_ls",
        }
    }
}

impl GradientOracle for Problem {
    fn dimension(&self) -> usize {
        match self {
            Problem::Ridge(p) => p.dimension(),
            Problem::Logistic(p) => p.dimension(),
            Problem::Pl(p) => p.dimension(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Problem::Ridge(p) => p.eval(x),
            Problem::Logistic(p) => p.eval(x),
            Problem::Pl(p) => p.eval(x),
        }
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Problem::Ridge(p) => p.grad(x),
            Problem::Logistic(p) => p.grad(x),
            Problem::Pl(p) => p.grad(x),
        }
    }
}

/// Regression targets y_i = A_i.1 + cos(A_i.1) + xi_i with noise variance
/// 1/4 (half a standard normal). Stream 0 carries the matrix entries, row
/// major; stream 1 the noise.
pub fn gen_regression_data(m: usize, d: usize, seed: u64) -> Result<RidgeLSProblem, ProblemError> {
    if m == 0 || d == 0 {
        return Err(ProblemError::EmptyShape);
    }
    let a = NormalSource::new(seed, 0).normal_vec(m * d);
    let noise = NormalSource::new(seed, 1).normal_vec(m);
    let mut y = Vec::with_capacity(m);
    for i in 0..m {
        let s: f64 = a[i * d..(i + 1) * d].iter().sum();
        y.push(s + cos(s) + 0.5 * noise[i]);
    }
    RidgeLSProblem::new(m, d, a, y, DEFAULT_REGULARIZER)
}

/// Rows are unit-variance Gaussians centered at the all-ones vector times
/// the label; the first m/2 rows are labeled +1, the rest -1. Stream 0
/// carries the matrix entries.
pub fn gen_classification_data(
    m: usize,
    d: usize,
    seed: u64,
) -> Result<LogisticProblem, ProblemError> {
    if m == 0 || d == 0 {
        return Err(ProblemError::EmptyShape);
    }
    if !m.is_multiple_of(2) {
        return Err(ProblemError::OddSampleCount { m });
    }
    let mut a = NormalSource::new(seed, 0).normal_vec(m * d);
    let mut y = Vec::with_capacity(m);
    for i in 0..m {
        let label = if i < m / 2 { 1.0 } else { -1.0 };
        y.push(label);
        for v in &mut a[i * d..(i + 1) * d] {
            *v += label;
        }
    }
    LogisticProblem::new(m, d, a, y, DEFAULT_REGULARIZER)
}

/// Standard Gaussian A and b, redrawn from fresh stream pairs (2k, 2k+1)
/// until A A^T is positive definite. With continuous data a retry is a
/// probability-zero event; the bound only guarantees termination.
pub fn gen_pl_data(m: usize, d: usize, seed: u64) -> Result<PLLeastSquares, ProblemError> {
    if m == 0 || d == 0 {
        return Err(ProblemError::EmptyShape);
    }
    if d <= m {
        return Err(ProblemError::NotUnderdetermined { m, d });
    }
    const ATTEMPTS: u32 = 32;
    for k in 0..ATTEMPTS as u64 {
        let a = NormalSource::new(seed, 2 * k).normal_vec(m * d);
        let b = NormalSource::new(seed, 2 * k + 1).normal_vec(m);
        match PLLeastSquares::new(m, d, a, b) {
            Ok(p) => return Ok(p),
            Err(ProblemError::SingularGram) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ProblemError::ExhaustedAttempts { attempts: ATTEMPTS })
}

/// Curvature constants and the minimizer of one problem instance.
///
/// l is a certified smoothness constant, mu the strong convexity modulus
/// (zero when absent), zeta the gradient-domination constant. For strongly
/// convex instances zeta = mu: the quadratic lower bound implies gradient
/// domination with the same constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConstants {
    pub l: f64,
    pub mu: f64,
    pub zeta: f64,
    pub x_star: Vec<f64>,
    pub f_star: f64,
}

/// Eigenvalues of the smaller of A^T A (d x d) and A A^T (m x m), ascending.
/// The nonzero spectra agree, so the top entry is the squared spectral norm
/// of A either way.
fn small_gram_spectrum(a: &[f64], m: usize, d: usize) -> Result<Vec<f64>, ProblemError> {
    let (g, n) = if d <= m { (gram_t(a, m, d), d) } else { (gram(a, m, d), m) };
    sym_eigenvalues(&g, n).map_err(ProblemError::Linalg)
}

/// Smoothness, convexity, and gradient-domination constants plus the
/// minimizer. Strongly convex instances locate the minimizer by the
/// delay-free reference descent at the given gradient tolerance; the flat
/// problem uses its pseudo-inverse solution.
pub fn constants_of(problem: &Problem, tol: f64) -> Result<ProblemConstants, ProblemError> {
    match problem {
        Problem::Ridge(p) => {
            let spectrum = small_gram_spectrum(p.a(), p.m(), p.d())?;
            let m_f = p.m() as f64;
            let lmax = *spectrum.last().expect("shape checked at construction");
            // With d > m the design Gram A^T A is rank deficient, so its
            // smallest eigenvalue is exactly zero and only the ridge term
            // contributes curvature.
            let lmin = if p.d() <= p.m() { spectrum[0] } else { 0.0 };
            let l = 2.0 * lmax / m_f + p.mu_reg();
            let mu = 2.0 * lmin / m_f + p.mu_reg();
            let (x_star, f_star) = reference_minimizer(p, &vec![0.0; p.d()], l, tol)?;
            Ok(ProblemConstants { l, mu, zeta: mu, x_star, f_star })
        }
        Problem::Logistic(p) => {
            let spectrum = small_gram_spectrum(p.a(), p.m(), p.d())?;
            let lmax = *spectrum.last().expect("shape checked at construction");
            // Quarter bound on the logistic curvature.
            let l = lmax / (4.0 * p.m() as f64) + p.mu_reg();
            let mu = p.mu_reg();
            let (x_star, f_star) = reference_minimizer(p, &vec![0.0; p.d()], l, tol)?;
            Ok(ProblemConstants { l, mu, zeta: mu, x_star, f_star })
        }
        Problem::Pl(p) => {
            // d > m at construction, so the small Gram is A A^T, whose
            // smallest eigenvalue is the gradient-domination constant.
            let spectrum = small_gram_spectrum(p.a(), p.m(), p.d())?;
            let l = *spectrum.last().expect("shape checked at construction");
            let zeta = spectrum[0];
            let x_star = minimizer_pseudo_inverse(p)?;
            let f_star = p.eval(&x_star);
            Ok(ProblemConstants { l, mu: 0.0, zeta, x_star, f_star })
        }
    }
}

/// Minimum-norm interpolant A^T (A A^T)^{-1} b of the flat least-squares
/// problem. With d > m the fit is exact, so this is the minimizer.
pub fn minimizer_pseudo_inverse(p: &PLLeastSquares) -> Result<Vec<f64>, ProblemError> {
    let g = gram(p.a(), p.m(), p.d());
    let w = cholesky_solve(&g, p.m(), p.b()).map_err(|_| ProblemError::SingularGram)?;
    Ok(mat_t_vec(p.a(), p.m(), p.d(), &w))
}

/// Plain gradient descent with step 1/l from x0, stopped when the gradient
/// norm drops to tol. Returns the final point and its objective value.
/// Needs curvature to terminate; on flat objectives it reports the cap
/// instead of spinning forever.
pub fn reference_minimizer<O: GradientOracle + ?Sized>(
    oracle: &O,
    x0: &[f64],
    l: f64,
    tol: f64,
) -> Result<(Vec<f64>, f64), ProblemError> {
    if !l.is_finite() || l <= 0.0 || !tol.is_finite() || tol <= 0.0 {
        return Err(ProblemError::BadSolverInput);
    }
    if x0.len() != oracle.dimension() {
        return Err(ProblemError::ShapeMismatch {
            expected: oracle.dimension(),
            got: x0.len(),
        });
    }
    let eta = 1.0 / l;
    let mut x = x0.to_vec();
    for _ in 0..MINIMIZER_ITERATION_CAP {
        let g = oracle.grad(&x);
        if norm(&g) <= tol {
            let f = oracle.eval(&x);
            return Ok((x, f));
        }
        axpy(&mut x, -eta, &g);
    }
    let grad_norm = norm(&oracle.grad(&x));
    if grad_norm <= tol {
        let f = oracle.eval(&x);
        return Ok((x, f));
    }
    Err(ProblemError::IterationCap { iters: MINIMIZER_ITERATION_CAP, grad_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::finite_difference_grad;
    use crate::linalg::{dist, dist_sq};

    #[test]
    fn regression_shapes_deterministic() {
        let p = gen_regression_data(1000, 10, 42).unwrap();
        assert_eq!(p.m(), 1000);
        assert_eq!(p.d(), 10);
        assert_eq!(p.a().len(), 10_000);
        assert_eq!(p.y().len(), 1000);
        assert_eq!(p.mu_reg(), DEFAULT_REGULARIZER);
        let q = gen_regression_data(1000, 10, 42).unwrap();
        assert_eq!(p, q);
        let r = gen_regression_data(1000, 10, 43).unwrap();
        assert_ne!(p.a(), r.a());
    }

    #[test]
    fn regression_noise_variance_recovered() {
        let p = gen_regression_data(1000, 10, 42).unwrap();
        let mut resid = Vec::with_capacity(1000);
        for i in 0..1000 {
            let s: f64 = p.a()[i * 10..(i + 1) * 10].iter().sum();
            resid.push(p.y()[i] - s - s.cos());
        }
        let mean: f64 = resid.iter().sum::<f64>() / 1000.0;
        let var: f64 = resid.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / 999.0;
        assert!((var - 0.25).abs() <= 0.03, "noise variance off: {var}");
    }

    #[test]
    fn classification_labels_and_class_means() {
        let p = gen_classification_data(1000, 10, 42).unwrap();
        assert!(p.y()[..500].iter().all(|&v| v == 1.0));
        assert!(p.y()[500..].iter().all(|&v| v == -1.0));
        for (lo, sign) in [(0usize, 1.0), (500, -1.0)] {
            for j in 0..10 {
                let mean: f64 =
                    (lo..lo + 500).map(|i| p.a()[i * 10 + j]).sum::<f64>() / 500.0;
                assert!(
                    (mean - sign).abs() <= 0.15,
                    "class mean {mean} in column {j} far from {sign}"
                );
            }
        }
        assert_eq!(p, gen_classification_data(1000, 10, 42).unwrap());
    }

    #[test]
    fn classification_rejects_odd_m() {
        assert!(matches!(
            gen_classification_data(999, 10, 1),
            Err(ProblemError::OddSampleCount { m: 999 })
        ));
    }

    #[test]
    fn pl_shape_and_positive_spectrum() {
        let p = gen_pl_data(6, 15, 7).unwrap();
        assert_eq!(p.m(), 6);
        assert_eq!(p.d(), 15);
        let eig = sym_eigenvalues(&gram(p.a(), 6, 15), 6).unwrap();
        assert_eq!(eig.len(), 6);
        assert!(eig[0] > 0.0, "lambda_min = {}", eig[0]);
        assert_eq!(p, gen_pl_data(6, 15, 7).unwrap());
    }

    #[test]
    fn pl_rejects_bad_shapes_and_singular_gram() {
        assert!(matches!(
            gen_pl_data(15, 6, 1),
            Err(ProblemError::NotUnderdetermined { m: 15, d: 6 })
        ));
        assert!(matches!(
            gen_pl_data(6, 6, 1),
            Err(ProblemError::NotUnderdetermined { .. })
        ));
        // Two equal rows make A A^T singular.
        let a = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert!(matches!(
            PLLeastSquares::new(2, 3, a, vec![1.0, 2.0]),
            Err(ProblemError::SingularGram)
        ));
    }

    #[test]
    fn construction_validation() {
        assert!(matches!(
            RidgeLSProblem::new(2, 2, vec![0.0; 3], vec![0.0; 2], 0.1),
            Err(ProblemError::ShapeMismatch { expected: 4, got: 3 })
        ));
        assert!(matches!(
            RidgeLSProblem::new(0, 2, vec![], vec![], 0.1),
            Err(ProblemError::EmptyShape)
        ));
        assert!(matches!(
            RidgeLSProblem::new(1, 1, vec![1.0], vec![1.0], -0.5),
            Err(ProblemError::BadRegularizer)
        ));
        assert!(matches!(
            RidgeLSProblem::new(1, 1, vec![1.0], vec![1.0], f64::NAN),
            Err(ProblemError::BadRegularizer)
        ));
        assert!(matches!(
            LogisticProblem::new(2, 1, vec![1.0, 2.0], vec![1.0, 0.5], 0.1),
            Err(ProblemError::BadLabel { index: 1 })
        ));
    }

    #[test]
    fn problem_names() {
        let r = gen_regression_data(4, 2, 1).unwrap();
        let c = gen_classification_data(4, 2, 1).unwrap();
        let p = gen_pl_data(2, 4, 1).unwrap();
        assert_eq!(Problem::Ridge(r).name(), "ridge_ls");
        assert_eq!(Problem::Logistic(c).name(), "logistic");
        assert_eq!(Problem::Pl(p).name(), "pl_ls");
    }

    #[test]
    fn ridge_constants_identity_design() {
        let eye = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let y = vec![1.0, -2.0, 0.5];
        let p = RidgeLSProblem::new(3, 3, eye, y.clone(), 0.0).unwrap();
        let c = constants_of(&Problem::Ridge(p), 1e-10).unwrap();
        assert_eq!(c.l, 2.0 / 3.0);
        assert_eq!(c.mu, 2.0 / 3.0);
        // f = (1/3) ||y - x||^2, so the minimizer is y itself.
        assert!(dist(&c.x_star, &y) <= 1e-10);
        assert!(c.f_star.abs() <= 1e-20);
    }

    #[test]
    fn logistic_constants_zero_data() {
        let p = LogisticProblem::new(2, 2, vec![0.0; 4], vec![1.0, -1.0], 0.3).unwrap();
        let c = constants_of(&Problem::Logistic(p), 1e-10).unwrap();
        assert_eq!(c.l, 0.3);
        assert_eq!(c.mu, 0.3);
        assert_eq!(c.x_star, vec![0.0, 0.0]);
        assert!((c.f_star - core::f64::consts::LN_2).abs() <= 1e-15);
    }

    #[test]
    fn pl_constants_known_singular_values() {
        // A = U diag(2, 1) V^T with U a rotation and V orthonormal columns,
        // so the Gram spectrum is exactly {4, 1}.
        let (cs, sn) = (0.3f64.cos(), 0.3f64.sin());
        let u = [[cs, -sn], [sn, cs]];
        let v1 = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
        let v2 = [2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0];
        let mut a = vec![0.0; 6];
        for i in 0..2 {
            for j in 0..3 {
                a[i * 3 + j] = u[i][0] * 2.0 * v1[j] + u[i][1] * v2[j];
            }
        }
        let p = PLLeastSquares::new(2, 3, a, vec![0.7, -0.2]).unwrap();
        let c = constants_of(&Problem::Pl(p), 1e-10).unwrap();
        assert!((c.l - 4.0).abs() <= 1e-12, "l = {}", c.l);
        assert!((c.zeta - 1.0).abs() <= 1e-12, "zeta = {}", c.zeta);
        assert_eq!(c.mu, 0.0);
    }

    #[test]
    fn pseudo_inverse_orthonormal_rows_and_zero_target() {
        let rows = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let p = PLLeastSquares::new(2, 3, rows.clone(), vec![3.0, 4.0]).unwrap();
        assert_eq!(minimizer_pseudo_inverse(&p).unwrap(), vec![3.0, 4.0, 0.0]);
        let z = PLLeastSquares::new(2, 3, rows, vec![0.0, 0.0]).unwrap();
        assert_eq!(minimizer_pseudo_inverse(&z).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn pseudo_inverse_normal_equation_residual() {
        let p = gen_pl_data(6, 15, 7).unwrap();
        let xs = minimizer_pseudo_inverse(&p).unwrap();
        let mut r = mat_vec(p.a(), 6, 15, &xs);
        for (ri, bi) in r.iter_mut().zip(p.b()) {
            *ri -= bi;
        }
        let res = norm(&mat_t_vec(p.a(), 6, 15, &r));
        assert!(res <= 1e-10, "normal equation residual {res:e}");
    }

    struct Shifted {
        c: Vec<f64>,
    }

    impl GradientOracle for Shifted {
        fn dimension(&self) -> usize {
            self.c.len()
        }

        fn eval(&self, x: &[f64]) -> f64 {
            0.5 * dist_sq(x, &self.c)
        }

        fn grad(&self, x: &[f64]) -> Vec<f64> {
            x.iter().zip(&self.c).map(|(xi, ci)| xi - ci).collect()
        }
    }

    struct Linear;

    impl GradientOracle for Linear {
        fn dimension(&self) -> usize {
            1
        }

        fn eval(&self, x: &[f64]) -> f64 {
            x[0]
        }

        fn grad(&self, _x: &[f64]) -> Vec<f64> {
            vec![1.0]
        }
    }

    #[test]
    fn reference_minimizer_one_exact_step_and_fixed_point() {
        let o = Shifted { c: vec![2.0, -1.0] };
        let (xs, fs) = reference_minimizer(&o, &[0.0, 0.0], 1.0, 1e-12).unwrap();
        assert_eq!(xs, vec![2.0, -1.0]);
        assert_eq!(fs, 0.0);
        let (again, _) = reference_minimizer(&o, &xs, 1.0, 1e-12).unwrap();
        assert_eq!(again, xs);
    }

    #[test]
    fn reference_minimizer_meets_its_stopping_rule() {
        let p = gen_regression_data(200, 8, 5).unwrap();
        let c = constants_of(&Problem::Ridge(p.clone()), 1e-10).unwrap();
        assert!(norm(&p.grad(&c.x_star)) <= 1e-10);
    }

    #[test]
    fn reference_minimizer_rejections() {
        assert!(matches!(
            reference_minimizer(&Linear, &[0.0], 1.0, 1e-10),
            Err(ProblemError::IterationCap { .. })
        ));
        assert!(matches!(
            reference_minimizer(&Linear, &[0.0], 0.0, 1e-10),
            Err(ProblemError::BadSolverInput)
        ));
        assert!(matches!(
            reference_minimizer(&Linear, &[0.0], 1.0, -1.0),
            Err(ProblemError::BadSolverInput)
        ));
        assert!(matches!(
            reference_minimizer(&Linear, &[0.0, 0.0], 1.0, 1e-10),
            Err(ProblemError::ShapeMismatch { expected: 1, got: 2 })
        ));
    }

    fn worst_grad_mismatch<O: GradientOracle>(o: &O, seed: u64) -> f64 {
        let mut src = NormalSource::new(seed, 9);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let x = src.normal_vec(o.dimension());
            let g = o.grad(&x);
            let fd = finite_difference_grad(o, &x, 1e-5);
            let rel = dist(&g, &fd) / norm(&g).max(1e-6);
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn gradients_match_central_differences() {
        let r = worst_grad_mismatch(&gen_regression_data(50, 5, 3).unwrap(), 100);
        assert!(r <= 1e-8, "ridge gradient mismatch {r:e}");
        let c = worst_grad_mismatch(&gen_classification_data(50, 5, 3).unwrap(), 101);
        assert!(c <= 1e-8, "logistic gradient mismatch {c:e}");
        let p = worst_grad_mismatch(&gen_pl_data(4, 9, 3).unwrap(), 102);
        assert!(p <= 1e-8, "flat ls gradient mismatch {p:e}");
    }

    // lhs >= rhs up to relative slack of 1e-9 on the larger magnitude.
    fn ge_with_slack(lhs: f64, rhs: f64) -> bool {
        lhs >= rhs - 1e-9 * lhs.abs().max(rhs.abs()).max(1.0)
    }

    #[test]
    fn smoothness_holds_at_random_pairs() {
        let ridge = gen_regression_data(120, 6, 11).unwrap();
        let logistic = gen_classification_data(120, 6, 11).unwrap();
        let flat = gen_pl_data(6, 15, 11).unwrap();
        let cases: [(&dyn GradientOracle, f64, &str); 3] = [
            (&ridge, constants_of(&Problem::Ridge(ridge.clone()), 1e-10).unwrap().l, "ridge"),
            (
                &logistic,
                constants_of(&Problem::Logistic(logistic.clone()), 1e-10).unwrap().l,
                "logistic",
            ),
            (&flat, constants_of(&Problem::Pl(flat.clone()), 1e-10).unwrap().l, "flat"),
        ];
        for (oracle, l, tag) in cases {
            let mut src = NormalSource::new(77, 0);
            for _ in 0..1000 {
                let mut x = src.normal_vec(oracle.dimension());
                let mut y = src.normal_vec(oracle.dimension());
                for v in x.iter_mut().chain(y.iter_mut()) {
                    *v *= 2.0;
                }
                let lhs = dist(&oracle.grad(&y), &oracle.grad(&x));
                let rhs = l * dist(&y, &x) * (1.0 + 1e-9);
                assert!(lhs <= rhs, "{tag}: gradient jump {lhs} exceeds {rhs}");
            }
        }
    }

    #[test]
    fn strong_convexity_holds_at_random_pairs() {
        let ridge = gen_regression_data(120, 6, 11).unwrap();
        let logistic = gen_classification_data(120, 6, 11).unwrap();
        let cases: [(&dyn GradientOracle, f64, &str); 2] = [
            (&ridge, constants_of(&Problem::Ridge(ridge.clone()), 1e-10).unwrap().mu, "ridge"),
            (
                &logistic,
                constants_of(&Problem::Logistic(logistic.clone()), 1e-10).unwrap().mu,
                "logistic",
            ),
        ];
        for (oracle, mu, tag) in cases {
            assert!(mu > 0.0);
            let mut src = NormalSource::new(78, 0);
            for _ in 0..1000 {
                let x = src.normal_vec(oracle.dimension());
                let y = src.normal_vec(oracle.dimension());
                let g = oracle.grad(&x);
                let mut inner = 0.0;
                for i in 0..x.len() {
                    inner += g[i] * (y[i] - x[i]);
                }
                let lhs = oracle.eval(&y);
                let rhs = oracle.eval(&x) + inner + 0.5 * mu * dist_sq(&y, &x);
                assert!(ge_with_slack(lhs, rhs), "{tag}: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn coercivity_holds_at_random_points() {
        let ridge = gen_regression_data(120, 6, 11).unwrap();
        let logistic = gen_classification_data(120, 6, 11).unwrap();
        let cases: [(&dyn GradientOracle, ProblemConstants, &str); 2] = [
            (&ridge, constants_of(&Problem::Ridge(ridge.clone()), 1e-10).unwrap(), "ridge"),
            (
                &logistic,
                constants_of(&Problem::Logistic(logistic.clone()), 1e-10).unwrap(),
                "logistic",
            ),
        ];
        for (oracle, c, tag) in cases {
            let mut src = NormalSource::new(79, 0);
            for _ in 0..1000 {
                let mut x = src.normal_vec(oracle.dimension());
                for v in x.iter_mut() {
                    *v *= 2.0;
                }
                let g = oracle.grad(&x);
                let mut inner = 0.0;
                for i in 0..x.len() {
                    inner += (x[i] - c.x_star[i]) * g[i];
                }
                let rhs = c.mu * c.l / (c.mu + c.l) * dist_sq(&x, &c.x_star)
                    + norm_sq(&g) / (c.mu + c.l);
                assert!(ge_with_slack(inner, rhs), "{tag}: {inner} < {rhs}");
            }
        }
    }

    #[test]
    fn gradient_domination_holds_at_random_points() {
        let flat = gen_pl_data(6, 15, 11).unwrap();
        let c = constants_of(&Problem::Pl(flat.clone()), 1e-10).unwrap();
        let mut src = NormalSource::new(80, 0);
        for _ in 0..1000 {
            let mut x = src.normal_vec(flat.dimension());
            for v in x.iter_mut() {
                *v *= 2.0;
            }
            let lhs = 0.5 * norm_sq(&flat.grad(&x));
            let rhs = c.zeta * (flat.eval(&x) - c.f_star) - 1e-9;
            assert!(lhs >= rhs, "{lhs} < {rhs}");
        }
    }
}
