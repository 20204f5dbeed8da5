//! Both sides of the scalar Hardy, Birman and ad hoc weighted inequalities.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{self, birman_product_constant, ConstantsError, PowerParams};
use crate::hardy::{hardy_apply_with_error, CustomPath, HardyError, HardyKind, PathForm, ScalarPath};
use crate::quadrature::{self, Endpoint, QuadConfig, QuadError};
use crate::weights::{
    ext_real, validate_hypothesis, HypothesisClause, Interval, MonotoneWeight, Weight, WeightError, WeightKind, WeightSpec,
};
use crate::Branch;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityId {
    AdHocMinus,
    AdHocPlus,
    PowerMinus,
    PowerPlus,
    Iterated,
    DiffForm,
    BirmanChain,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::AdHocMinus => "ad-hoc-minus",
            InequalityId::AdHocPlus => "ad-hoc-plus",
            InequalityId::PowerMinus => "power-minus",
            InequalityId::PowerPlus => "power-plus",
            InequalityId::Iterated => "iterated",
            InequalityId::DiffForm => "diff-form",
            InequalityId::BirmanChain => "birman-chain",
        }
    }
}

impl std::fmt::Display for InequalityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InequalityId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        use InequalityId::*;
        [AdHocMinus, AdHocPlus, PowerMinus, PowerPlus, Iterated, DiffForm, BirmanChain]
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown inequality '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithinError,
    Violated,
    /// The left side diverges; nothing to compare.
    InconclusiveDivergent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinError => "holds_within_error",
            Verdict::Violated => "violated",
            Verdict::InconclusiveDivergent => "inconclusive_divergent",
        }
    }

    pub fn is_violation(self) -> bool {
        self == Verdict::Violated
    }
}

/// Margins within this multiple of the summed error bars are undecided.
pub const VERDICT_ERROR_FACTOR: f64 = 10.0;

/// `Holds` if `margin ≥ 10·err`, `HoldsWithinError` if `|margin| < 10·err`,
/// `Violated` otherwise.
pub fn verdict(margin: f64, err_sum: f64) -> Verdict {
    let band = VERDICT_ERROR_FACTOR * err_sum;
    if margin >= band {
        Verdict::Holds
    } else if margin.abs() < band {
        Verdict::HoldsWithinError
    } else {
        Verdict::Violated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(with = "ext_real")]
    pub b: f64,
    /// Free-form description of weights or test function.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl ReportParams {
    fn new(p: f64, b: f64) -> Self {
        ReportParams { p, alpha: None, branch: None, order: None, n: None, k: None, b, detail: String::new() }
    }

    /// Compact `ℓ`/`n,k`/detail column for tabular output.
    pub fn extra(&self) -> String {
        let mut parts = Vec::new();
        if let Some(b) = self.branch {
            parts.push(b.to_string());
        }
        if let Some(l) = self.order {
            parts.push(format!("l={l}"));
        }
        if let (Some(n), Some(k)) = (self.n, self.k) {
            parts.push(format!("n={n};k={k}"));
        }
        if self.b.is_finite() {
            parts.push(format!("b={}", self.b));
        }
        if !self.detail.is_empty() {
            parts.push(self.detail.clone());
        }
        parts.join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub params: ReportParams,
    #[serde(with = "ext_real")]
    pub lhs: f64,
    #[serde(with = "ext_real")]
    pub rhs: f64,
    /// `rhs/lhs`; 0 when both sides vanish.
    #[serde(with = "ext_real")]
    pub ratio: f64,
    /// `lhs − rhs`
    #[serde(with = "ext_real")]
    pub margin: f64,
    /// Absolute error estimates of `(lhs, rhs)`.
    pub quad_errors: (f64, f64),
    pub verdict: Verdict,
}

impl InequalityReport {
    fn build(id: InequalityId, params: ReportParams, lhs: Side, rhs: Side) -> Self {
        let (l, r) = (lhs.value, rhs.value);
        let ratio = if r == 0.0 { 0.0 } else { r / l };
        let margin = l - r;
        let verdict = if l == INF {
            Verdict::InconclusiveDivergent
        } else if r == INF {
            Verdict::Violated
        } else {
            verdict(margin, lhs.err + rhs.err)
        };
        InequalityReport { id, params, lhs: l, rhs: r, ratio, margin, quad_errors: (lhs.err, rhs.err), verdict }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("hypothesis violated ({clause:?}): {detail}")]
    Hypothesis { clause: HypothesisClause, detail: String },
    #[error(
        "alpha = {alpha} lies in the excluded range for the {branch} branch of order {order} \
         (need alpha < p - 1 for minus, alpha > order*p - 1 for plus; p = {p})"
    )]
    HypothesisGap { branch: Branch, p: f64, alpha: f64, order: usize },
    #[error("no exact derivative of order {0} is available for this path")]
    MissingDerivative(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Quadrature(QuadError),
}

/// One side of an inequality with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Side {
    value: f64,
    err: f64,
}

impl Side {
    fn scaled(self, c: f64) -> Side {
        if c == 0.0 {
            return Side { value: 0.0, err: 0.0 };
        }
        Side { value: c * self.value, err: c.abs() * self.err }
    }
}

/// `∫_lo^hi g` with an optional power-law hint at `lo`; divergence is `+∞`.
fn side_integral(
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    bps: &[f64],
    lower_exp: Option<f64>,
    tail_exp: Option<f64>,
    cfg: &QuadConfig,
) -> Result<Side, VerifyError> {
    if !(lo < hi) {
        return Ok(Side { value: 0.0, err: 0.0 });
    }
    let mut c = cfg.clone().without_hints();
    if let Some(e) = lower_exp {
        if lo.is_finite() && e != 0.0 && e > -1.0 {
            c = c.with_hint(Endpoint::Lower, e);
        }
    }
    if let Some(e) = tail_exp {
        if hi == INF && e < -1.0 {
            c = c.with_tail_hint(Endpoint::Upper, e);
        }
    }
    match quadrature::integrate_with_breakpoints(g, lo, hi, bps, &c) {
        Ok(r) => Ok(Side { value: r.value, err: r.err_estimate }),
        Err(QuadError::Divergent { .. }) => Ok(Side { value: INF, err: 0.0 }),
        Err(e) => Err(VerifyError::Quadrature(e)),
    }
}

/// `∫_lo^hi v(x)·[(H F)(x)]^p dx`, with the inner operator evaluated at every
/// node. Inner error bars are folded in through `p·rhs·max relative error`.
fn outer_hardy_integral(
    kind: &HardyKind,
    f: &ScalarPath,
    log_v: impl Fn(f64) -> f64,
    p: f64,
    lo: f64,
    hi: f64,
    bps: &[f64],
    lower_exp: Option<f64>,
    tail_exp: Option<f64>,
    cfg: &QuadConfig,
) -> Result<Side, VerifyError> {
    let failure: RefCell<Option<HardyError>> = RefCell::new(None);
    let worst_rel = RefCell::new(0.0f64);
    let g = |x: f64| {
        let lw = log_v(x);
        if lw == f64::NEG_INFINITY {
            return 0.0;
        }
        match hardy_apply_with_error(kind, f, x, cfg) {
            Ok(e) => {
                if e.value != 0.0 {
                    let r = e.err / e.value.abs();
                    let mut wr = worst_rel.borrow_mut();
                    *wr = wr.max(r);
                }
                let direct = lw.exp() * e.value.abs().powf(p);
                if direct.is_finite() {
                    direct
                } else {
                    // Weight overflow against a vanishing operator value.
                    (lw + p * e.value.abs().ln()).exp()
                }
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        }
    };
    let side = side_integral(g, lo, hi, bps, lower_exp, tail_exp, cfg);
    if let Some(e) = failure.into_inner() {
        return match e {
            HardyError::Divergent { .. } => Ok(Side { value: INF, err: 0.0 }),
            other => Err(other.into()),
        };
    }
    let mut side = side?;
    side.err += p * side.value.abs() * worst_rel.into_inner();
    Ok(side)
}

fn sampled_nonnegative(f: &ScalarPath) -> bool {
    let (lo, hi) = f.support();
    if !(lo < hi) {
        return true;
    }
    let mut xs = Interval { a: lo, b: hi }.samples(129, 12.0);
    xs.extend(f.breakpoints());
    xs.into_iter().all(|x| f.value(x) >= 0.0)
}

/// `|F|` as a path; `F` itself when it is sampled nonnegative, which keeps
/// any exact integral oracle.
pub fn norm_path(f: &ScalarPath) -> ScalarPath {
    if sampled_nonnegative(f) {
        return f.clone();
    }
    let g = f.clone();
    let mut c = CustomPath::new("abs", move |x| g.value(x).abs()).with_breakpoints(f.breakpoints());
    let (lo, hi) = f.support();
    c = c.with_support(lo, hi);
    ScalarPath::custom(c, f.interval)
}

fn check_p(p: f64) -> Result<(), VerifyError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(VerifyError::InvalidParameter(format!("p must be finite and at least 1, got {p}")));
    }
    Ok(())
}

/// Restricts `F` to `(0, b)`; its interval must cover that range.
fn on_half_interval(f: &ScalarPath, b: f64) -> Result<ScalarPath, VerifyError> {
    if !(b > 0.0) {
        return Err(VerifyError::InvalidParameter(format!("upper endpoint must be positive, got {b}")));
    }
    if !(f.interval.a <= 0.0 && f.interval.b >= b) {
        return Err(VerifyError::InvalidParameter(format!("path interval {} does not contain (0, {b})", f.interval)));
    }
    f.validate().map_err(VerifyError::InvalidParameter)?;
    Ok(norm_path(f).with_interval(Interval { a: 0.0, b }))
}

fn clip_support(f: &ScalarPath) -> (f64, f64) {
    let (lo, hi) = f.support();
    (lo.max(f.interval.a), hi.min(f.interval.b))
}

/// Power-law growth exponent of `F` at `+∞`, when the path has one.
fn tail_exponent(f: &ScalarPath) -> Option<f64> {
    let g = f.local_exponent(INF);
    (f.support().1 == INF && g != 0.0).then_some(g)
}

/// `∫_0^b x^α F^p` for a path already restricted to `(0, b)`.
/// `x^α |y|^p`, through logarithms when the direct product overflows.
fn weighted_power(x: f64, alpha: f64, y: f64, p: f64) -> f64 {
    let direct = x.powf(alpha) * y.abs().powf(p);
    if direct.is_finite() {
        direct
    } else {
        (alpha * x.ln() + p * y.abs().ln()).exp()
    }
}

fn power_lhs(f: &ScalarPath, p: f64, alpha: f64, cfg: &QuadConfig) -> Result<Side, VerifyError> {
    let (lo, hi) = clip_support(f);
    let hint = (lo == 0.0).then(|| alpha + p * f.local_exponent(0.0));
    let tail = tail_exponent(f).map(|g| alpha + p * g);
    side_integral(|x| weighted_power(x, alpha, f.value(x), p), lo, hi, &f.breakpoints(), hint, tail, cfg)
}

/// `∫_0^b x^{α−ℓp}(H∓,ℓ F)^p`.
fn power_rhs_integral(branch: Branch, f: &ScalarPath, p: f64, alpha: f64, order: usize, cfg: &QuadConfig) -> Result<Side, VerifyError> {
    let b = f.interval.b;
    let (s0, s1) = clip_support(f);
    if !(s0 < s1) {
        return Ok(Side { value: 0.0, err: 0.0 });
    }
    let kind = HardyKind::new(branch, order);
    let e = alpha - order as f64 * p;
    let mut bps = f.breakpoints();
    bps.extend([s0, s1].into_iter().filter(|x| x.is_finite()));
    let (lo, hi, hint, tail) = match branch {
        Branch::Minus => (s0, b, (s0 == 0.0).then(|| alpha + p * f.local_exponent(0.0)), Some(alpha - p)),
        Branch::Plus => (0.0, s1, Some(e), tail_exponent(f).map(|g| alpha + p * g)),
    };
    outer_hardy_integral(&kind, f, |x| e * x.ln(), p, lo, hi, &bps, hint, tail, cfg)
}

fn power_family(
    id: InequalityId,
    branch: Branch,
    p: f64,
    alpha: f64,
    order: usize,
    b: f64,
    f: &ScalarPath,
    cfg: &QuadConfig,
) -> Result<InequalityReport, VerifyError> {
    check_p(p)?;
    if order == 0 {
        return Err(VerifyError::InvalidParameter("order must be at least 1".into()));
    }
    let ok = match branch {
        Branch::Minus => alpha < p - 1.0,
        Branch::Plus => alpha > order as f64 * p - 1.0,
    };
    if !ok {
        if order == 1 {
            PowerParams { p, alpha, branch, b }.validate()?;
        }
        return Err(VerifyError::HypothesisGap { branch, p, alpha, order });
    }
    let f = on_half_interval(f, b)?;
    let constant = birman_product_constant(p, alpha, order);
    let lhs = power_lhs(&f, p, alpha, cfg)?;
    let rhs = if lhs.value == INF {
        Side { value: f64::NAN, err: 0.0 }
    } else {
        power_rhs_integral(branch, &f, p, alpha, order, cfg)?.scaled(constant)
    };
    let mut params = ReportParams::new(p, b);
    params.alpha = Some(alpha);
    params.branch = Some(branch);
    if id == InequalityId::Iterated {
        params.order = Some(order);
    }
    params.detail = path_label(&f);
    Ok(InequalityReport::build(id, params, lhs, rhs))
}

/// Short label for a test function.
pub fn path_label(f: &ScalarPath) -> String {
    match &f.form {
        PathForm::PowerCutoff { sigma, lo, hi, .. } => format!("x^{sigma} on [{lo},{hi}]"),
        PathForm::PolyExp { coeffs, rate } => format!("poly{coeffs:?}*exp(-{rate}x)"),
        PathForm::PolyBump { lo, hi, .. } => format!("poly bump on [{lo},{hi}]"),
        PathForm::Step { grid, .. } => format!("step on {} cells", grid.len() - 1),
        PathForm::Sampled { grid, .. } => format!("sampled on {} nodes", grid.len()),
        PathForm::Custom(c) => c.name.clone(),
    }
}

/// `∫_0^b x^α F^p ≥ (|α−p+1|/p)^p ∫_0^b x^{α−p}(H∓,1F)^p`, Minus for
/// `α < p−1` and Plus for `α > p−1`.
pub fn check_power(branch: Branch, p: f64, alpha: f64, b: f64, f: &ScalarPath, cfg: &QuadConfig) -> Result<InequalityReport, VerifyError> {
    let id = match branch {
        Branch::Minus => InequalityId::PowerMinus,
        Branch::Plus => InequalityId::PowerPlus,
    };
    power_family(id, branch, p, alpha, 1, b, f, cfg)
}

/// `∫_0^b x^α F^p ≥ ∏_{k=1}^{ℓ}(|α−kp+1|/p)^p ∫_0^b x^{α−ℓp}(H∓,ℓF)^p`, valid
/// for `α < p−1` (Minus) or `α > ℓp−1` (Plus).
pub fn check_iterated(
    branch: Branch,
    p: f64,
    alpha: f64,
    order: usize,
    b: f64,
    f: &ScalarPath,
    cfg: &QuadConfig,
) -> Result<InequalityReport, VerifyError> {
    power_family(InequalityId::Iterated, branch, p, alpha, order, b, f, cfg)
}

/// The ad hoc weighted inequality for a monotone pair `(w₁, w₂)`:
/// `∫ w₁^p(∓w₁′)^{1−p}w₂^p|F|^p ≥ p^{−p}∫(∓w₁′)(H∓,1(w₂|F|))^p`.
pub fn check_adhoc(
    branch: Branch,
    w1: &MonotoneWeight,
    w2: &WeightSpec,
    p: f64,
    f: &ScalarPath,
    cfg: &QuadConfig,
) -> Result<InequalityReport, VerifyError> {
    check_p(p)?;
    let r = validate_hypothesis(w1, w2, p, branch, cfg)?;
    if let Some(clause) = r.violated {
        return Err(VerifyError::Hypothesis { clause, detail: r.diagnostics.last().cloned().unwrap_or_default() });
    }
    let interval = w1.interval();
    if !(f.interval.a <= interval.a && f.interval.b >= interval.b) {
        return Err(VerifyError::InvalidParameter(format!("path interval {} does not contain {interval}", f.interval)));
    }
    f.validate().map_err(VerifyError::InvalidParameter)?;
    let f = norm_path(f).with_interval(interval);
    let (v, w) = constants::monotone_pair_weights(w1, w2, p);
    let (s0, s1) = clip_support(&f);
    let mut bps = f.breakpoints();
    bps.extend(w1.base.kind.breakpoints());
    bps.extend(w2.kind.breakpoints());

    let lhs_hint = (s0 == interval.a).then(|| w.local_exponent(s0) + p * f.local_exponent(s0));
    let lhs = side_integral(
        |x| {
            let fx = f.value(x);
            if fx == 0.0 {
                0.0
            } else {
                w.value(x) * fx.powf(p)
            }
        },
        s0,
        s1,
        &bps,
        lhs_hint,
        None,
        cfg,
    )?;

    let unit_w2 = matches!(w2.kind, WeightKind::Power { alpha } if alpha == 0.0);
    let kind = if unit_w2 { HardyKind::new(branch, 1) } else { HardyKind::generalized(branch, None, Some(w2.clone())) };
    let rhs = if lhs.value == INF || !(s0 < s1) {
        Side { value: if lhs.value == INF { f64::NAN } else { 0.0 }, err: 0.0 }
    } else {
        bps.extend([s0, s1].into_iter().filter(|x| x.is_finite()));
        let (lo, hi) = match branch {
            Branch::Minus => (s0, interval.b),
            Branch::Plus => (interval.a, s1),
        };
        let hint = (lo == interval.a).then(|| v.local_exponent(lo));
        outer_hardy_integral(&kind, &f, |x| v.value(x).ln(), p, lo, hi, &bps, hint, None, cfg)?.scaled(p.powf(-p))
    };
    let id = match branch {
        Branch::Minus => InequalityId::AdHocMinus,
        Branch::Plus => InequalityId::AdHocPlus,
    };
    let mut params = ReportParams::new(p, interval.b);
    params.branch = Some(branch);
    params.detail = format!("w1={}; w2={}; F={}", kind_label(&w1.base.kind), kind_label(&w2.kind), path_label(&f));
    Ok(InequalityReport::build(id, params, lhs, rhs))
}

fn kind_label(k: &WeightKind) -> String {
    format!("{k:?}")
}

/// `∫_0^b x^α|f^{(n)}|^p ≥ ∏_{j=1}^{k}|α−jp+1|^p/p^{kp} ∫_0^b x^{α−kp}|f^{(n−k)}|^p`
/// for `f` supported inside `(0, b)` with exact derivatives up to order `n`.
pub fn check_birman_chain(
    p: f64,
    alpha: f64,
    n: usize,
    k: usize,
    f: &ScalarPath,
    b: f64,
    cfg: &QuadConfig,
) -> Result<InequalityReport, VerifyError> {
    check_p(p)?;
    if !(1 <= k && k <= n) {
        return Err(VerifyError::InvalidParameter(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    if !alpha.is_finite() {
        return Err(VerifyError::InvalidParameter(format!("alpha must be finite, got {alpha}")));
    }
    if !(b > 0.0) || !(f.interval.a <= 0.0 && f.interval.b >= b) {
        return Err(VerifyError::InvalidParameter(format!("path interval {} does not contain (0, {b})", f.interval)));
    }
    f.validate().map_err(VerifyError::InvalidParameter)?;
    let f = f.with_interval(Interval { a: 0.0, b });
    let top = f.derivative_path(n).ok_or(VerifyError::MissingDerivative(n))?;
    let low = f.derivative_path(n - k).ok_or(VerifyError::MissingDerivative(n - k))?;
    let (s0, s1) = clip_support(&f);
    let mut bps = f.breakpoints();
    bps.extend([s0, s1].into_iter().filter(|x| x.is_finite()));
    let lhs = side_integral(weighted_abs_power(&top, alpha, p), s0, s1, &bps, None, None, cfg)?;
    let constant = birman_product_constant(p, alpha, k);
    let rhs = side_integral(weighted_abs_power(&low, alpha - k as f64 * p, p), s0, s1, &bps, None, None, cfg)?.scaled(constant);
    let id = if n == 1 && k == 1 { InequalityId::DiffForm } else { InequalityId::BirmanChain };
    let mut params = ReportParams::new(p, b);
    params.alpha = Some(alpha);
    params.n = Some(n);
    params.k = Some(k);
    params.detail = path_label(&f);
    Ok(InequalityReport::build(id, params, lhs, rhs))
}

/// `x ↦ x^e·|g(x)|^p`
fn weighted_abs_power(g: &ScalarPath, e: f64, p: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        let v = g.value(x).abs();
        if v == 0.0 {
            0.0
        } else {
            x.powf(e) * v.powf(p)
        }
    }
}

/// `∫_0^b x^α|f′|^p ≥ (|α−p+1|/p)^p ∫_0^b x^{α−p}|f|^p` for compactly
/// supported `f`; any `α`.
pub fn check_diff_form(p: f64, alpha: f64, f: &ScalarPath, b: f64, cfg: &QuadConfig) -> Result<InequalityReport, VerifyError> {
    check_birman_chain(p, alpha, 1, 1, f, b, cfg)
}

/// Extremal family for the power inequality: `x^σ` on `(0, 1]` with
/// `σ = (p−1−α)/p − 1 + ε` (Minus), or `x^τ` on `[1, ∞)` with
/// `τ = −(1+α)/p − ε` (Plus). Returns the path and its upper endpoint `b`.
pub fn extremal_path(branch: Branch, p: f64, alpha: f64, eps: f64) -> (ScalarPath, f64) {
    match branch {
        Branch::Minus => {
            let sigma = (p - 1.0 - alpha) / p - 1.0 + eps;
            let path = ScalarPath::new(PathForm::PowerCutoff { coef: 1.0, sigma, lo: 0.0, hi: 1.0 }, Interval { a: 0.0, b: 1.0 });
            (path, 1.0)
        }
        Branch::Plus => {
            let tau = -(1.0 + alpha) / p - eps;
            let path = ScalarPath::new(PathForm::PowerCutoff { coef: 1.0, sigma: tau, lo: 1.0, hi: INF }, Interval::half_line());
            (path, INF)
        }
    }
}

/// Exact normalized ratio along the extremal family:
/// `(κ/p)^p/(κ/p+ε)^p` (Minus), `(κ/p)^{p−1}/(κ/p+ε)^{p−1}` (Plus), `κ = |α−p+1|`.
pub fn extremal_ratio(branch: Branch, p: f64, alpha: f64, eps: f64) -> f64 {
    let r = (alpha - p + 1.0).abs() / p;
    let e = match branch {
        Branch::Minus => p,
        Branch::Plus => p - 1.0,
    };
    (r / (r + eps)).powf(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessPoint {
    pub eps: f64,
    /// `rhs/lhs` of the power inequality on the extremal path.
    pub ratio: f64,
    /// Closed form of the same ratio.
    pub exact: f64,
}

/// Ratios `rhs/lhs` along the extremal family; they climb to 1 as `ε ↓ 0`.
pub fn sharpness_probe(
    branch: Branch,
    p: f64,
    alpha: f64,
    eps_ladder: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<SharpnessPoint>, VerifyError> {
    check_p(p)?;
    PowerParams { p, alpha, branch, b: INF }.validate()?;
    eps_ladder
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(VerifyError::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
            }
            let (path, b) = extremal_path(branch, p, alpha, eps);
            let r = check_power(branch, p, alpha, b, &path, cfg)?;
            Ok(SharpnessPoint { eps, ratio: r.ratio, exact: extremal_ratio(branch, p, alpha, eps) })
        })
        .collect()
}

impl From<QuadError> for VerifyError {
    fn from(e: QuadError) -> Self {
        VerifyError::Quadrature(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Monotonicity;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(verdict(1.0, 0.01), Verdict::Holds);
        assert_eq!(verdict(0.05, 0.01), Verdict::HoldsWithinError);
        assert_eq!(verdict(-0.05, 0.01), Verdict::HoldsWithinError);
        assert_eq!(verdict(-1.0, 0.01), Verdict::Violated);
        assert_eq!(verdict(0.0, 0.0), Verdict::Holds);
    }

    #[test]
    fn power_examples() {
        let r = check_power(Branch::Minus, 2.0, 0.0, INF, &ScalarPath::exp_decay(), &cfg()).unwrap();
        assert!(close(r.lhs, 0.5, 1e-12), "{r:?}");
        assert!(close(r.rhs, 2f64.ln() / 2.0, 1e-9), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        let one = ScalarPath::constant(1.0);
        let r = check_power(Branch::Plus, 2.0, 4.0, 1.0, &one, &cfg()).unwrap();
        assert!(close(r.lhs, 0.2, 1e-12) && close(r.rhs, 3.0 / 40.0, 1e-10), "{r:?}");
        assert!(close(r.ratio, 3.0 / 8.0, 1e-10));
        let zero = ScalarPath::constant(0.0);
        let r = check_power(Branch::Minus, 2.0, 0.0, INF, &zero, &cfg()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.margin, r.verdict), (0.0, 0.0, 0.0, Verdict::Holds));
    }

    #[test]
    fn iterated_examples() {
        let e = ScalarPath::exp_decay();
        let r = check_iterated(Branch::Minus, 2.0, 0.0, 2, INF, &e, &cfg()).unwrap();
        assert!(close(r.lhs, 0.5, 1e-12));
        assert!(close(r.rhs, 0.332_360_385_419_985_4, 1e-8), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        let a = check_iterated(Branch::Minus, 2.0, 0.0, 1, INF, &e, &cfg()).unwrap();
        let b = check_power(Branch::Minus, 2.0, 0.0, INF, &e, &cfg()).unwrap();
        assert!((a.rhs - b.rhs).abs() <= 1e-12 * b.rhs && a.lhs == b.lhs);
        let one = ScalarPath::constant(1.0).with_interval(Interval::new(0.0, 1.0).unwrap());
        let r = check_iterated(Branch::Minus, 1.0, -2.0, 2, 1.0, &one, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::InconclusiveDivergent);
        assert!(matches!(check_iterated(Branch::Plus, 2.0, 2.0, 2, INF, &e, &cfg()), Err(VerifyError::HypothesisGap { .. })));
    }

    #[test]
    fn adhoc_examples() {
        let half = Interval::half_line();
        let w1 = MonotoneWeight::new(WeightSpec::exp_decay(1.0, half).unwrap(), Monotonicity::Decreasing).unwrap();
        let w2 = WeightSpec::power(0.0, half).unwrap();
        let e = ScalarPath::exp_decay();
        let r = check_adhoc(Branch::Minus, &w1, &w2, 2.0, &e, &cfg()).unwrap();
        assert!(close(r.lhs, 1.0 / 3.0, 1e-10) && close(r.rhs, 1.0 / 12.0, 1e-10), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        let r = check_adhoc(Branch::Minus, &w1, &w2, 1.0, &e, &cfg()).unwrap();
        assert!(close(r.lhs, 0.5, 1e-10) && close(r.rhs, 0.5, 1e-10), "{r:?}");
        assert_eq!(r.verdict, Verdict::HoldsWithinError);
        let r = check_adhoc(Branch::Minus, &w1, &w2, 2.0, &ScalarPath::constant(0.0), &cfg()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.verdict), (0.0, 0.0, Verdict::Holds));
        assert!(matches!(check_adhoc(Branch::Plus, &w1, &w2, 2.0, &e, &cfg()), Err(VerifyError::Hypothesis { .. })));
    }

    #[test]
    fn birman_examples() {
        let f = ScalarPath::bump(4, 1.0);
        let r = check_birman_chain(2.0, 0.0, 1, 1, &f, 1.0, &cfg()).unwrap();
        assert_eq!(r.id, InequalityId::DiffForm);
        assert!(close(r.lhs, 4.0 / 45045.0, 1e-10) && close(r.rhs, 1.0 / 180180.0, 1e-10), "{r:?}");
        let r = check_birman_chain(2.0, 0.0, 2, 2, &f, 1.0, &cfg()).unwrap();
        assert!(close(r.lhs, 24.0 / 5005.0, 1e-10) && close(r.rhs, 1.0 / 11440.0, 1e-10), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        let r = check_birman_chain(2.0, 0.0, 2, 2, &ScalarPath::bump(4, 1.0).scaled(0.0), 1.0, &cfg()).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let step = ScalarPath::new(PathForm::Step { grid: vec![0.2, 0.5], values: vec![1.0] }, Interval::new(0.0, 1.0).unwrap());
        assert_eq!(check_birman_chain(2.0, 0.0, 2, 1, &step, 1.0, &cfg()).unwrap_err(), VerifyError::MissingDerivative(2));
    }

    #[test]
    fn sharpness_examples() {
        let pts = sharpness_probe(Branch::Minus, 2.0, 0.0, &[0.5, 0.2, 0.1, 0.05, 0.01], &cfg()).unwrap();
        assert!(close(pts[0].ratio, 0.25, 1e-9), "{pts:?}");
        assert!(close(pts[4].ratio, 0.25 / 0.51 / 0.51, 1e-8), "{pts:?}");
        for w in pts.windows(2) {
            assert!(w[1].ratio > w[0].ratio);
        }
        for pt in &pts {
            assert!(close(pt.ratio, pt.exact, 1e-6), "{pt:?}");
        }
        let pts = sharpness_probe(Branch::Plus, 2.0, 3.0, &[0.2, 0.1, 0.05], &cfg()).unwrap();
        for pt in &pts {
            assert!(close(pt.ratio, pt.exact, 1e-6), "{pt:?}");
        }
    }
}
