//! Matrix-valued Hardy inequalities on step functions: Schatten norms, the
//! trace inequality, the Loewner-order inequalities for `p ∈ [1, 2]`, and a
//! randomized search for Loewner violations when `p > 2`.

mod engine;
mod linalg;
mod path;
mod search;

pub use linalg::{
    hermitian_drift, matrix_abs_power, matrix_power_psd, min_eigenvalue, schatten_norm, spectral_norm, symmetrize, trace, CMatrix,
};
pub use path::{matrix_serde, MatrixPath};
pub use search::{counterexample_search, random_psd, random_psd_path, CounterexampleConfig, SearchOutcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::birman_product_constant;
use crate::quadrature::{QuadConfig, QuadError};
use crate::weights::ext_real;
use crate::Branch;
use engine::{PowerSteps, Sides};

/// Loewner tolerance relative to the spectral norm of the left side.
pub const LOEWNER_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (drift {drift:e})")]
    NotHermitian { drift: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("invalid exponent {0}")]
    InvalidExponent(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("alpha = {alpha} equals p - 1 = {}; the constant degenerates", p - 1.0)]
    DegenerateExponent { p: f64, alpha: f64 },
    #[error("alpha = {alpha} is on the wrong side of p - 1 = {} for the {branch} branch", p - 1.0)]
    BranchMismatch { p: f64, alpha: f64, branch: Branch },
    #[error("the {branch} iterated inequality of order {order} needs alpha beyond {}, got {alpha}", match branch { Branch::Minus => p - 1.0, Branch::Plus => *order as f64 * p - 1.0 })]
    HypothesisGap { branch: Branch, p: f64, alpha: f64, order: usize },
    #[error("the Loewner-order inequality is stated for p in [1, 2], got p = {p}")]
    LoewnerRange { p: f64 },
    #[error("operator order must be at least 1")]
    InvalidOrder,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integral diverges near x = {endpoint}")]
    Divergent { endpoint: f64 },
    #[error(transparent)]
    Quadrature(QuadError),
}

impl From<QuadError> for OpError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::Divergent { endpoint } => OpError::Divergent { endpoint },
            other => OpError::Quadrature(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpCheck {
    Trace,
    HansenBase,
    Operator,
    IteratedOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoewnerVerdict {
    LoewnerHolds,
    /// The matrix inequality fails but its trace holds.
    TraceOnlyHolds,
    LoewnerViolated,
}

impl LoewnerVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            LoewnerVerdict::LoewnerHolds => "LoewnerHolds",
            LoewnerVerdict::TraceOnlyHolds => "TraceOnlyHolds",
            LoewnerVerdict::LoewnerViolated => "LoewnerViolated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// `y = x^{p/|α−p+1|}` onto the `α = −1` case.
    ChangeOfVariables,
    /// `y = 1/x`, `G(y) = F(1/y) y^{−2}` onto the opposite branch.
    Reflection,
}

/// Agreement between the direct sides and the sides recomputed through a
/// substitution, as relative spectral-norm differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformCheck {
    pub kind: TransformKind,
    pub lhs_rel_diff: f64,
    pub rhs_rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoewnerReport {
    pub check: OpCheck,
    pub branch: Branch,
    pub p: f64,
    pub alpha: f64,
    pub order: usize,
    #[serde(with = "ext_real")]
    pub b: f64,
    pub constant: f64,
    #[serde(with = "matrix_serde")]
    pub lhs_matrix: CMatrix,
    #[serde(with = "matrix_serde")]
    pub rhs_matrix: CMatrix,
    /// Smallest eigenvalue of `LHS − RHS`.
    pub min_eig_diff: f64,
    pub trace_lhs: f64,
    pub trace_rhs: f64,
    /// Largest entrywise quadrature error of the right side, constant included.
    pub quad_error: f64,
    pub tol: f64,
    pub verdict: LoewnerVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform_check: Option<TransformCheck>,
}

impl LoewnerReport {
    pub fn trace_margin(&self) -> f64 {
        self.trace_lhs - self.trace_rhs
    }

    /// Trace inequality within the report's tolerance.
    pub fn trace_holds(&self) -> bool {
        self.trace_margin() >= -(self.tol * self.lhs_matrix.nrows() as f64)
    }

    /// `min_eig_diff / ‖LHS‖`, zero for a vanishing left side.
    pub fn relative_margin(&self) -> f64 {
        let n = spectral_norm(&self.lhs_matrix);
        if n > 0.0 {
            self.min_eig_diff / n
        } else {
            self.min_eig_diff
        }
    }
}

struct Setup {
    check: OpCheck,
    branch: Branch,
    p: f64,
    alpha: f64,
    order: usize,
    b: f64,
    absolute: bool,
}

fn validate_exponents(branch: Branch, p: f64, alpha: f64, order: usize) -> Result<(), OpError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(OpError::InvalidExponent(p));
    }
    if !alpha.is_finite() {
        return Err(OpError::InvalidParameter(format!("alpha must be finite, got {alpha}")));
    }
    if order == 0 {
        return Err(OpError::InvalidOrder);
    }
    if order == 1 && alpha == p - 1.0 {
        return Err(OpError::DegenerateExponent { p, alpha });
    }
    let ok = match branch {
        Branch::Minus => alpha < p - 1.0,
        Branch::Plus => alpha > order as f64 * p - 1.0,
    };
    match (ok, order) {
        (true, _) => Ok(()),
        (false, 1) => Err(OpError::BranchMismatch { p, alpha, branch }),
        (false, _) => Err(OpError::HypothesisGap { branch, p, alpha, order }),
    }
}

fn report(s: &Setup, sides: Sides, constant: f64) -> LoewnerReport {
    let c = nalgebra::Complex::new(constant, 0.0);
    let rhs = symmetrize(&(&sides.rhs_integral * c));
    let lhs = sides.lhs;
    let quad_error = constant * sides.err;
    let diff = &lhs - &rhs;
    let min_eig_diff = min_eigenvalue(&diff);
    let tol = LOEWNER_REL_TOL * spectral_norm(&lhs) + 10.0 * quad_error;
    let (trace_lhs, trace_rhs) = (trace(&lhs), trace(&rhs));
    let verdict = if min_eig_diff >= -tol {
        LoewnerVerdict::LoewnerHolds
    } else if trace_lhs - trace_rhs >= -tol * lhs.nrows() as f64 {
        LoewnerVerdict::TraceOnlyHolds
    } else {
        LoewnerVerdict::LoewnerViolated
    };
    LoewnerReport {
        check: s.check,
        branch: s.branch,
        p: s.p,
        alpha: s.alpha,
        order: s.order,
        b: s.b,
        constant,
        lhs_matrix: lhs,
        rhs_matrix: rhs,
        min_eig_diff,
        trace_lhs,
        trace_rhs,
        quad_error,
        tol,
        verdict,
        transform_check: None,
    }
}

fn run(s: &Setup, f: &MatrixPath, cfg: &QuadConfig) -> Result<LoewnerReport, OpError> {
    validate_exponents(s.branch, s.p, s.alpha, s.order)?;
    if !s.absolute && !f.is_psd() {
        return Err(OpError::NotPsd { min_eig: f.values().iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min) });
    }
    let steps = PowerSteps::from_path(f, s.b);
    let sides = steps.sides(s.branch, s.order, s.alpha, s.p, s.b, s.absolute, cfg)?;
    Ok(report(s, sides, birman_product_constant(s.p, s.alpha, s.order)))
}

fn check_b(b: f64) -> Result<(), OpError> {
    if !(b > 0.0) {
        return Err(OpError::InvalidParameter(format!("b must be positive, got {b}")));
    }
    Ok(())
}

fn check_loewner_range(p: f64) -> Result<(), OpError> {
    if !(1.0..=2.0).contains(&p) {
        return Err(OpError::LoewnerRange { p });
    }
    Ok(())
}

/// `tr ∫_0^b x^α |F|^p` against `((|α−p+1|)/p)^p tr ∫_0^b x^{α−p} |H∓,1 F|^p`
/// for Hermitian, not necessarily semidefinite, `F`.
pub fn check_trace_ineq(branch: Branch, p: f64, alpha: f64, b: f64, f: &MatrixPath, cfg: &QuadConfig) -> Result<LoewnerReport, OpError> {
    check_b(b)?;
    run(&Setup { check: OpCheck::Trace, branch, p, alpha, order: 1, b, absolute: true }, f, cfg)
}

/// `∫ x^{−1} F^p ≥ ∫ x^{−1−p} (∫_0^x F)^p` in the Loewner order, `p ∈ [1, 2]`.
pub fn check_hansen_base(f: &MatrixPath, p: f64, cfg: &QuadConfig) -> Result<LoewnerReport, OpError> {
    check_loewner_range(p)?;
    let mut r = run(
        &Setup { check: OpCheck::HansenBase, branch: Branch::Minus, p, alpha: -1.0, order: 1, b: f64::INFINITY, absolute: false },
        f,
        cfg,
    )?;
    r.check = OpCheck::HansenBase;
    Ok(r)
}

/// Loewner-order power inequality on `(0, ∞)` for PSD `F`, `p ∈ [1, 2]`, with the
/// substitution consistency check attached.
pub fn check_operator_ineq(branch: Branch, p: f64, alpha: f64, f: &MatrixPath, cfg: &QuadConfig) -> Result<LoewnerReport, OpError> {
    check_loewner_range(p)?;
    let mut r = operator_report(branch, p, alpha, f, cfg)?;
    r.transform_check = Some(transform_check(branch, p, alpha, f, &r, cfg)?);
    Ok(r)
}

/// As [`check_operator_ineq`] without the `p ≤ 2` restriction or the
/// substitution check; used to probe `p > 2`.
pub fn operator_report(branch: Branch, p: f64, alpha: f64, f: &MatrixPath, cfg: &QuadConfig) -> Result<LoewnerReport, OpError> {
    run(&Setup { check: OpCheck::Operator, branch, p, alpha, order: 1, b: f64::INFINITY, absolute: false }, f, cfg)
}

/// Iterated Loewner-order inequality of order `ℓ` for PSD `F`, `p ∈ [1, 2]`.
pub fn check_iterated_operator(
    branch: Branch,
    p: f64,
    alpha: f64,
    order: usize,
    f: &MatrixPath,
    cfg: &QuadConfig,
) -> Result<LoewnerReport, OpError> {
    if order == 1 {
        return check_operator_ineq(branch, p, alpha, f, cfg);
    }
    check_loewner_range(p)?;
    run(&Setup { check: OpCheck::IteratedOperator, branch, p, alpha, order, b: f64::INFINITY, absolute: false }, f, cfg)
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = spectral_norm(b).max(spectral_norm(a));
    if scale == 0.0 {
        0.0
    } else {
        spectral_norm(&(a - b)) / scale
    }
}

/// Recomputes both sides through the substitution used to derive the
/// inequality: onto the `α = −1` case for the minus branch, and through
/// `y = 1/x` onto the minus branch with `β = 2p − 2 − α` for the plus branch.
fn transform_check(
    branch: Branch,
    p: f64,
    alpha: f64,
    f: &MatrixPath,
    direct: &LoewnerReport,
    cfg: &QuadConfig,
) -> Result<TransformCheck, OpError> {
    let rhs_integral = &direct.rhs_matrix * nalgebra::Complex::new(1.0 / direct.constant, 0.0);
    let inf = f64::INFINITY;
    match branch {
        Branch::Minus => {
            let kappa = (alpha - p + 1.0).abs();
            let g = PowerSteps::from_path(f, inf).substituted(kappa / p, (1.0 + alpha) / kappa);
            let s = g.sides(Branch::Minus, 1, -1.0, p, inf, false, cfg)?;
            let r = kappa / p;
            let c = |x: f64| nalgebra::Complex::new(x, 0.0);
            Ok(TransformCheck {
                kind: TransformKind::ChangeOfVariables,
                lhs_rel_diff: rel_diff(&s.lhs, &(&direct.lhs_matrix * c(r))),
                rhs_rel_diff: rel_diff(&s.rhs_integral, &(rhs_integral * c(r.powf(p + 1.0)))),
            })
        }
        Branch::Plus => {
            let beta = 2.0 * p - 2.0 - alpha;
            let g = PowerSteps::from_path(f, inf).reflected();
            let s = g.sides(Branch::Minus, 1, beta, p, inf, false, cfg)?;
            Ok(TransformCheck {
                kind: TransformKind::Reflection,
                lhs_rel_diff: rel_diff(&s.lhs, &direct.lhs_matrix),
                rhs_rel_diff: rel_diff(&s.rhs_integral, &rhs_integral),
            })
        }
    }
}
