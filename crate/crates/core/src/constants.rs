//! Optimal power-weight constants and Muckenhoupt-type functionals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{self, sup_search, Endpoint, QuadConfig, QuadError, SearchConfig, SearchError, SupLocation};
use crate::weights::{ext_real, FnWeight, Interval, MonotoneWeight, Monotonicity, Weight, WeightError, WeightSpec};
use crate::Branch;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstantsError {
    #[error("alpha = {alpha} equals p - 1 = {}; no Hardy inequality at this exponent", p - 1.0)]
    DegenerateExponent { p: f64, alpha: f64 },
    #[error("alpha = {alpha} is on the wrong side of p - 1 for the {branch} branch (p = {p})")]
    BranchMismatch { p: f64, alpha: f64, branch: Branch },
    #[error("exponent p must be finite and at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("weights live on different intervals: {0} vs {1}")]
    IntervalMismatch(Interval, Interval),
    #[error("{direction:?} weight cannot serve the {branch} branch")]
    DirectionMismatch { direction: Monotonicity, branch: Branch },
    #[error("quadrature failed at c = {c}: {source}")]
    Quadrature { c: f64, source: QuadError },
    #[error("supremum search failed: {0}")]
    Search(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Power-weight parameters `(p, α, b)` with the branch fixed by the sign of
/// `α − (p − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub p: f64,
    pub alpha: f64,
    pub branch: Branch,
    #[serde(with = "ext_real")]
    pub b: f64,
}

impl PowerParams {
    /// Picks the branch from `α`.
    pub fn new(p: f64, alpha: f64, b: f64) -> Result<Self, ConstantsError> {
        let branch = if alpha < p - 1.0 { Branch::Minus } else { Branch::Plus };
        let params = PowerParams { p, alpha, branch, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ConstantsError> {
        check_p(self.p)?;
        if !self.alpha.is_finite() {
            return Err(ConstantsError::DegenerateExponent { p: self.p, alpha: self.alpha });
        }
        if self.alpha == self.p - 1.0 {
            return Err(ConstantsError::DegenerateExponent { p: self.p, alpha: self.alpha });
        }
        let ok = match self.branch {
            Branch::Minus => self.alpha < self.p - 1.0,
            Branch::Plus => self.alpha > self.p - 1.0,
        };
        if !ok {
            return Err(ConstantsError::BranchMismatch { p: self.p, alpha: self.alpha, branch: self.branch });
        }
        if !(self.b > 0.0) {
            return Err(ConstantsError::Weight(WeightError::InvalidSpec(format!("upper endpoint must be positive, got {}", self.b))));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<(), ConstantsError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(ConstantsError::InvalidExponent(p));
    }
    Ok(())
}

/// Conjugate exponent `p′ = p/(p − 1)`, `∞` at `p = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// `p^{1/p}(p′)^{1/p′}`, equal to 1 at `p = 1`.
pub fn bracket_factor(p: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        let q = conjugate(p);
        p.powf(1.0 / p) * q.powf(1.0 / q)
    }
}

/// `(|α − p + 1|/p)^p`
pub fn optimal_power_constant(params: &PowerParams) -> Result<f64, ConstantsError> {
    params.validate()?;
    Ok(((params.alpha - params.p + 1.0).abs() / params.p).powf(params.p))
}

/// `∏_{j=1}^{k} |α − jp + 1|^p / p^{kp}`. A vanishing factor gives 0.
pub fn birman_product_constant(p: f64, alpha: f64, k: usize) -> f64 {
    (1..=k).map(|j| ((alpha - j as f64 * p + 1.0).abs() / p).powf(p)).product()
}

/// Two-sided bound `A ≤ C₀ ≤ p^{1/p}(p′)^{1/p′}A` on the smallest constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantBracket {
    #[serde(rename = "A", with = "ext_real")]
    pub a: f64,
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    pub p: f64,
    #[serde(with = "ext_real")]
    pub c_star: f64,
    pub location: SupLocation,
    pub evaluations: usize,
}

impl ConstantBracket {
    fn from_sup(a: f64, p: f64, c_star: f64, location: SupLocation, evaluations: usize) -> Self {
        ConstantBracket { a, lower: a, upper: bracket_factor(p) * a, p, c_star, location, evaluations }
    }
}

/// Weighted integrand with endpoint exponents, for one Muckenhoupt factor.
struct Factor<'a> {
    base: &'a dyn Weight,
    base_power: f64,
    extra: Option<&'a dyn Weight>,
    extra_power: f64,
}

impl Factor<'_> {
    fn value(&self, x: f64) -> f64 {
        let b = self.base.value(x);
        let b = if self.base_power == 1.0 { b } else { b.powf(self.base_power) };
        match self.extra {
            Some(e) => {
                let v = e.value(x);
                if v == 0.0 {
                    0.0
                } else {
                    b * v.powf(self.extra_power)
                }
            }
            None => b,
        }
    }

    fn exponent(&self, x0: f64) -> f64 {
        self.base_power * self.base.local_exponent(x0) + self.extra.map_or(0.0, |e| self.extra_power * e.local_exponent(x0))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.base.breakpoints();
        if let Some(e) = self.extra {
            v.extend(e.breakpoints());
        }
        v
    }

    /// `∫_lo^hi`; divergence maps to `+∞`, numerical breakdown to NaN.
    fn integral(&self, lo: f64, hi: f64, interval: Interval, cfg: &QuadConfig) -> Result<f64, QuadError> {
        let mut c = cfg.clone().without_hints();
        // Factors span many decades as c moves; only relative accuracy counts.
        c.abs_tol = f64::MIN_POSITIVE;
        if lo == interval.a && lo.is_finite() {
            let g = self.exponent(lo);
            if g != 0.0 && g > -1.0 {
                c = c.with_hint(Endpoint::Lower, g);
            }
        }
        if hi == interval.b && hi.is_finite() {
            let g = self.exponent(hi);
            if g != 0.0 && g > -1.0 {
                c = c.with_hint(Endpoint::Upper, g);
            }
        }
        match quadrature::integrate_with_breakpoints(|x| self.value(x), lo, hi, &self.breakpoints(), &c) {
            Ok(r) => Ok(r.value),
            Err(QuadError::Divergent { .. }) => Ok(f64::INFINITY),
            Err(QuadError::NonFinite { .. } | QuadError::NonConvergent { .. }) => Ok(f64::NAN),
            Err(e) => Err(e),
        }
    }
}

fn search_error<E: std::error::Error>(e: SearchError<E>) -> ConstantsError {
    ConstantsError::Search(e.to_string())
}

/// `ess sup_{(lo,hi)} ψ/w`, by scan and refinement. Weights in scope are
/// continuous, so this is the plain supremum.
fn ess_sup_ratio(psi: Option<&dyn Weight>, w: &dyn Weight, lo: f64, hi: f64) -> Result<f64, ConstantsError> {
    let ratio = |x: f64| -> Result<f64, std::convert::Infallible> {
        let num = psi.map_or(1.0, |s| s.value(x));
        let den = w.value(x);
        Ok(if den == 0.0 {
            if num == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY
            }
        } else {
            num / den
        })
    };
    let cfg = SearchConfig { grid_nodes: 128, refine_iterations: 40 };
    Ok(sup_search(ratio, lo, hi, &cfg).map_err(search_error)?.value)
}

/// `A∓` for the pair `(v, w)`: the supremum over `c` of
/// `(∫_c^b v)^{1/p}(∫_a^c w^{−p′/p})^{1/p′}` (Minus; mirrored for Plus),
/// with `‖1/w‖_∞` as the second factor at `p = 1`.
pub fn muckenhoupt_a(
    v: &dyn Weight,
    w: &dyn Weight,
    p: f64,
    direction: Branch,
    cfg: &QuadConfig,
) -> Result<ConstantBracket, ConstantsError> {
    muckenhoupt_a_tilde(v, w, None, None, p, direction, cfg)
}

/// `Ã∓` for the generalized operator `φ(x)∫ψF`. Absent `φ`, `ψ` are 1.
pub fn muckenhoupt_a_tilde(
    v: &dyn Weight,
    w: &dyn Weight,
    phi: Option<&dyn Weight>,
    psi: Option<&dyn Weight>,
    p: f64,
    direction: Branch,
    cfg: &QuadConfig,
) -> Result<ConstantBracket, ConstantsError> {
    check_p(p)?;
    let interval = v.interval();
    for other in [Some(w), phi, psi].into_iter().flatten() {
        if other.interval() != interval {
            return Err(ConstantsError::IntervalMismatch(interval, other.interval()));
        }
    }
    let Interval { a, b } = interval;
    let q = conjugate(p);
    let outer = Factor { base: v, base_power: 1.0, extra: phi, extra_power: p };
    let inner = Factor { base: w, base_power: -q / p, extra: psi, extra_power: q };

    // A factor that diverges at its fixed end diverges for every c.
    let m = interval.at_parameter(0.0);
    let (fixed_out, fixed_in) = match direction {
        Branch::Minus => ((m, b), (a, m)),
        Branch::Plus => ((a, m), (m, b)),
    };
    let quad_err = |source| ConstantsError::Quadrature { c: m, source };
    let mut divergent = outer.integral(fixed_out.0, fixed_out.1, interval, cfg).map_err(quad_err)? == f64::INFINITY;
    if p > 1.0 && !divergent {
        divergent = inner.integral(fixed_in.0, fixed_in.1, interval, cfg).map_err(quad_err)? == f64::INFINITY;
    }
    if divergent {
        return Ok(ConstantBracket::from_sup(f64::INFINITY, p, m, SupLocation::Interior, 2));
    }

    let objective = |c: f64| -> Result<f64, ConstantsError> {
        let (out_lo, out_hi, in_lo, in_hi) = match direction {
            Branch::Minus => (c, b, a, c),
            Branch::Plus => (a, c, c, b),
        };
        let f1 = outer.integral(out_lo, out_hi, interval, cfg).map_err(|source| ConstantsError::Quadrature { c, source })?;
        let f2 = if p == 1.0 {
            ess_sup_ratio(psi, w, in_lo, in_hi)?
        } else {
            inner.integral(in_lo, in_hi, interval, cfg).map_err(|source| ConstantsError::Quadrature { c, source })?
        };
        if f1.is_nan() || f2.is_nan() {
            return Ok(f64::NAN);
        }
        if f1 == 0.0 || f2 == 0.0 {
            return Ok(0.0);
        }
        Ok(if p == 1.0 { f1 * f2 } else { f1.powf(1.0 / p) * f2.powf(1.0 / q) })
    };
    let r = sup_search(objective, a, b, &SearchConfig::default()).map_err(|e| match e {
        SearchError::Evaluation { source, .. } => source,
        other => search_error(other),
    })?;
    Ok(ConstantBracket::from_sup(r.value, p, r.c_star, r.location, r.evaluations))
}

/// The pair `v = ∓w₁′`, `w = w₁^p(∓w₁′)^{1−p}w₂^p` attached to `(w₁, w₂)`,
/// as weights on the common interval.
pub fn monotone_pair_weights(w1: &MonotoneWeight, w2: &WeightSpec, p: f64) -> (FnWeight, FnWeight) {
    let interval = w1.interval();
    let (a, b) = (interval.a, interval.b);
    let g1 = |x0: f64| w1.base.kind.local_exponent(x0);
    // A power-like w₁ ~ x^γ has slope ~ x^{γ−1}; a regular one a regular slope.
    let slope_exp = |x0: f64| if g1(x0) != 0.0 { g1(x0) - 1.0 } else { 0.0 };
    let w_exp = |x0: f64| p * g1(x0) + (1.0 - p) * slope_exp(x0) + p * w2.kind.local_exponent(x0);
    let fin = |x0: f64, f: &dyn Fn(f64) -> f64| if x0.is_finite() { f(x0) } else { 0.0 };

    let w1v = w1.clone();
    let v = FnWeight::new(interval, move |x| w1v.slope(x)).with_exponents(fin(a, &slope_exp), fin(b, &slope_exp));
    let (w1w, w2w) = (w1.clone(), w2.clone());
    let w = FnWeight::new(interval, move |x| {
        let s = w1w.slope(x);
        let base = w1w.value(x).powf(p) * w2w.kind.value(x).powf(p);
        // Underflowed tails: w₁ and its slope vanish together.
        if p == 1.0 || base == 0.0 {
            base
        } else {
            base * s.powf(1.0 - p)
        }
    })
    .with_exponents(fin(a, &w_exp), fin(b, &w_exp));
    (v, w)
}

/// Numerical `Ã∓` for the monotone pair `(w₁, w₂)` with `φ = 1`, `ψ = w₂`.
pub fn monotone_pair_a_tilde(
    w1: &MonotoneWeight,
    w2: &WeightSpec,
    p: f64,
    direction: Branch,
    cfg: &QuadConfig,
) -> Result<ConstantBracket, ConstantsError> {
    check_p(p)?;
    if w1.branch() != direction {
        return Err(ConstantsError::DirectionMismatch { direction: w1.direction, branch: direction });
    }
    if w1.interval() != w2.interval {
        return Err(ConstantsError::IntervalMismatch(w1.interval(), w2.interval));
    }
    let (v, w) = monotone_pair_weights(w1, w2, p);
    muckenhoupt_a_tilde(&v, &w, None, Some(w2), p, direction, cfg)
}

/// Closed form of `Ã∓` for a monotone pair, from the endpoint limits of `w₁`:
/// `(p/p′)^{1/p′}[1 − (w₁(b)/w₁(a))^{1/p}]` (Minus, `p > 1`),
/// `1 − w₁(b)/w₁(a)` at `p = 1`, with `a`, `b` swapped for Plus.
pub fn a_tilde_closed_form(w1: &MonotoneWeight, p: f64, direction: Branch) -> Result<f64, ConstantsError> {
    check_p(p)?;
    if w1.branch() != direction {
        return Err(ConstantsError::DirectionMismatch { direction: w1.direction, branch: direction });
    }
    let (la, lb) = w1.limits();
    // Ratio of the limit at the far end to the limit at the anchored end.
    let (near, far) = match direction {
        Branch::Minus => (la, lb),
        Branch::Plus => (lb, la),
    };
    let ratio = if far == 0.0 || near == f64::INFINITY {
        0.0
    } else if near == far {
        1.0
    } else {
        far / near
    };
    if p == 1.0 {
        Ok(1.0 - ratio)
    } else {
        let q = conjugate(p);
        Ok((p / q).powf(1.0 / q) * (1.0 - ratio.powf(1.0 / p)))
    }
}

/// Point where the interior maximizer sits: `w₁(c*) = w₁(a)^{1/p}w₁(b)^{1/p′}`
/// (Minus), with the roles of the endpoints swapped for Plus.
pub fn a_tilde_maximizer_level(w1: &MonotoneWeight, p: f64) -> f64 {
    let (la, lb) = w1.limits();
    let q = conjugate(p);
    let (near, far) = match w1.branch() {
        Branch::Minus => (la, lb),
        Branch::Plus => (lb, la),
    };
    near.powf(1.0 / p) * far.powf(1.0 / q)
}
