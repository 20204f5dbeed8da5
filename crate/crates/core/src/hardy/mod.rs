//! Hardy-type operators `H∓,ℓ` and the generalized first-order `H∓,φ,ψ`.

mod path;

pub use path::{CustomPath, PathForm, ScalarPath};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{self, Endpoint, QuadConfig, QuadError};
use crate::weights::{Interval, WeightSpec};
use crate::Branch;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyKind {
    pub direction: Branch,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<WeightSpec>,
}

impl HardyKind {
    pub fn new(direction: Branch, order: usize) -> Self {
        HardyKind { direction, order, phi: None, psi: None }
    }

    pub fn minus(order: usize) -> Self {
        HardyKind::new(Branch::Minus, order)
    }

    pub fn plus(order: usize) -> Self {
        HardyKind::new(Branch::Plus, order)
    }

    /// `x ↦ φ(x)∫ψF`, first order only.
    pub fn generalized(direction: Branch, phi: Option<WeightSpec>, psi: Option<WeightSpec>) -> Self {
        HardyKind { direction, order: 1, phi, psi }
    }

    pub fn is_generalized(&self) -> bool {
        self.phi.is_some() || self.psi.is_some()
    }

    pub fn validate(&self) -> Result<(), HardyError> {
        if self.order == 0 {
            return Err(HardyError::InvalidOrder(self.order));
        }
        if self.is_generalized() && self.order != 1 {
            return Err(HardyError::GeneralizedOrder(self.order));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("operator order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("generalized operators are first order, got order {0}")]
    GeneralizedOrder(usize),
    #[error("x = {x} lies outside {interval}")]
    OutsideInterval { x: f64, interval: Interval },
    #[error("generalized operator needs F >= 0; F({x}) = {value}")]
    NegativeInput { x: f64, value: f64 },
    #[error("defining integral diverges near x = {endpoint}")]
    Divergent { endpoint: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("grid must be strictly ascending")]
    UnsortedGrid,
    #[error(transparent)]
    Quadrature(QuadError),
}

impl From<QuadError> for HardyError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::Divergent { endpoint } => HardyError::Divergent { endpoint },
            other => HardyError::Quadrature(other),
        }
    }
}

/// A value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn check_point(f: &ScalarPath, x: f64) -> Result<(), HardyError> {
    if !(x.is_finite() && f.interval.contains_closed(x)) {
        return Err(HardyError::OutsideInterval { x, interval: f.interval });
    }
    Ok(())
}

/// Quadrature config carrying the path's endpoint exponents on `[lo, hi]`;
/// `growth` is the extra power a kernel adds at an infinite end.
fn path_config(f: &ScalarPath, lo: f64, hi: f64, growth: f64, cfg: &QuadConfig) -> QuadConfig {
    let mut c = cfg.clone();
    if hi == f64::INFINITY {
        let g = f.local_exponent(hi);
        if g != 0.0 && g + growth < -1.0 {
            c = c.with_tail_hint(Endpoint::Upper, g + growth);
        }
    }
    let (g_lo, g_hi) = (f.local_exponent(lo), f.local_exponent(hi));
    if lo.is_finite() && g_lo != 0.0 && g_lo > -1.0 {
        c = c.with_hint(Endpoint::Lower, g_lo);
    }
    if hi.is_finite() && g_hi != 0.0 && g_hi > -1.0 {
        c = c.with_hint(Endpoint::Upper, g_hi);
    }
    c
}

/// `∫_lo^hi K_k(t) g(t) F(t) dt` for `k = 1..=order`, where
/// `K_k(t) = |anchor − t|^{k−1}/(k−1)!` and `g` is an optional extra factor.
/// The range is clipped to the support of `F`.
fn kernel_moments(
    f: &ScalarPath,
    extra: Option<&WeightSpec>,
    anchor: f64,
    lo: f64,
    hi: f64,
    order: usize,
    cfg: &QuadConfig,
) -> Result<Vec<Estimate>, HardyError> {
    let (s_lo, s_hi) = f.support();
    let (lo, hi) = (lo.max(s_lo), hi.min(s_hi));
    if !(lo < hi) {
        return Ok(vec![Estimate { value: 0.0, err: 0.0 }; order]);
    }
    if order == 1 && extra.is_none() {
        if let Some(v) = f.exact_integral(lo, hi) {
            if v.is_infinite() {
                let endpoint = if f.local_exponent(lo) <= -1.0 || hi.is_finite() { lo } else { hi };
                return Err(HardyError::Divergent { endpoint });
            }
            return Ok(vec![Estimate { value: v, err: 0.0 }]);
        }
    }
    let facts: Vec<f64> = (0..order).map(factorial).collect();
    let integrand = |t: f64, out: &mut [f64]| {
        let base = f.value(t) * extra.map_or(1.0, |w| w.kind.value(t));
        let u = (anchor - t).abs();
        let mut upow = 1.0;
        for k in 0..order {
            out[k] = base * upow / facts[k];
            upow *= u;
        }
    };
    let mut bps = f.breakpoints();
    if let Some(w) = extra {
        bps.extend(w.kind.breakpoints());
    }
    let c = path_config(f, lo, hi, (order - 1) as f64, cfg);
    let r = quadrature::integrate_components(integrand, order, lo, hi, &bps, &c)?;
    Ok(r.values.into_iter().zip(r.errors).map(|(value, err)| Estimate { value, err }).collect())
}

/// Integration range of the operator at `x`.
fn range(kind: &HardyKind, f: &ScalarPath, x: f64) -> (f64, f64) {
    match kind.direction {
        Branch::Minus => (f.interval.a, x),
        Branch::Plus => (x, f.interval.b),
    }
}

fn check_nonnegative(f: &ScalarPath, lo: f64, hi: f64) -> Result<(), HardyError> {
    let (s_lo, s_hi) = f.support();
    let (lo, hi) = (lo.max(s_lo), hi.min(s_hi));
    if !(lo < hi) {
        return Ok(());
    }
    let mut xs = Interval { a: lo, b: hi }.samples(129, 12.0);
    xs.extend(f.breakpoints().into_iter().filter(|&b| b >= lo && b <= hi));
    for x in xs {
        let v = f.value(x);
        if v < 0.0 {
            return Err(HardyError::NegativeInput { x, value: v });
        }
    }
    Ok(())
}

/// `(H F)(x)` with an absolute error estimate.
pub fn hardy_apply_with_error(kind: &HardyKind, f: &ScalarPath, x: f64, cfg: &QuadConfig) -> Result<Estimate, HardyError> {
    kind.validate()?;
    f.validate().map_err(HardyError::InvalidPath)?;
    check_point(f, x)?;
    let (lo, hi) = range(kind, f, x);
    if kind.is_generalized() {
        check_nonnegative(f, lo, hi)?;
        let m = kernel_moments(f, kind.psi.as_ref(), x, lo, hi, 1, cfg)?[0];
        let phi = kind.phi.as_ref().map_or(1.0, |w| w.kind.value(x));
        return Ok(Estimate { value: phi * m.value, err: phi.abs() * m.err });
    }
    let m = kernel_moments(f, None, x, lo, hi, kind.order, cfg)?;
    Ok(m[kind.order - 1])
}

/// `(H F)(x)`: `∫_a^x F` / `∫_x^b F` for order 1, the factorial kernel
/// `∫|x−t|^{ℓ−1}F(t)dt/(ℓ−1)!` above, and `φ(x)∫ψF` when generalized.
pub fn hardy_apply(kind: &HardyKind, f: &ScalarPath, x: f64, cfg: &QuadConfig) -> Result<f64, HardyError> {
    hardy_apply_with_error(kind, f, x, cfg).map(|e| e.value)
}

/// Nested value, kernel value and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelComparison {
    pub nested: f64,
    pub kernel: f64,
    pub diff: f64,
}

fn nested(branch: Branch, f: &ScalarPath, order: usize, x: f64, cfg: &QuadConfig) -> Result<f64, HardyError> {
    if order == 1 {
        return hardy_apply(&HardyKind::new(branch, 1), f, x, cfg);
    }
    let (lo, hi) = match branch {
        Branch::Minus => (f.interval.a, x),
        Branch::Plus => (x, f.interval.b),
    };
    // Inner failures surface through this cell; quadrature only sees NaN.
    let failure = std::cell::RefCell::new(None);
    let inner = |t: f64| match nested(branch, f, order - 1, t, cfg) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let c = path_config(f, lo, hi, (order - 1) as f64, cfg);
    let r = quadrature::integrate_with_breakpoints(inner, lo, hi, &f.breakpoints(), &c);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value)
}

/// Compares the ℓ-fold nested integral, computed by repeated first-order
/// application, with the one-shot factorial kernel.
pub fn iterated_equals_kernel(
    branch: Branch,
    f: &ScalarPath,
    order: usize,
    x: f64,
    cfg: &QuadConfig,
) -> Result<KernelComparison, HardyError> {
    if order == 0 {
        return Err(HardyError::InvalidOrder(order));
    }
    f.validate().map_err(HardyError::InvalidPath)?;
    check_point(f, x)?;
    let nested = nested(branch, f, order, x, cfg)?;
    let kernel = hardy_apply(&HardyKind::new(branch, order), f, x, cfg)?;
    Ok(KernelComparison { nested, kernel, diff: nested - kernel })
}

/// `(H F)` sampled on an ascending grid, returned as a piecewise-linear path.
///
/// Segment integrals are computed in parallel and chained with the Taylor
/// shift of the iterated kernel, so the whole grid costs one pass over the
/// integration range.
pub fn hardy_path(kind: &HardyKind, f: &ScalarPath, grid: &[f64], cfg: &QuadConfig) -> Result<ScalarPath, HardyError> {
    Ok(hardy_path_with_error(kind, f, grid, cfg)?.0)
}

/// As [`hardy_path`], also returning the accumulated absolute error bound at
/// each node.
pub fn hardy_path_with_error(
    kind: &HardyKind,
    f: &ScalarPath,
    grid: &[f64],
    cfg: &QuadConfig,
) -> Result<(ScalarPath, Vec<f64>), HardyError> {
    kind.validate()?;
    f.validate().map_err(HardyError::InvalidPath)?;
    if grid.is_empty() {
        return Err(HardyError::InvalidPath("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HardyError::UnsortedGrid);
    }
    for &x in grid {
        check_point(f, x)?;
    }
    let order = kind.order;
    let extra = kind.psi.as_ref();
    let n = grid.len();
    if kind.is_generalized() {
        let (lo, hi) = match kind.direction {
            Branch::Minus => (f.interval.a, grid[n - 1]),
            Branch::Plus => (grid[0], f.interval.b),
        };
        check_nonnegative(f, lo, hi)?;
    }

    // Oriented so that the chain runs away from the anchored end.
    let (head, segs): (Vec<Estimate>, Vec<Vec<Estimate>>) = match kind.direction {
        Branch::Minus => {
            let head = kernel_moments(f, extra, grid[0], f.interval.a, grid[0], order, cfg)?;
            let segs = (0..n - 1)
                .into_par_iter()
                .map(|i| kernel_moments(f, extra, grid[i + 1], grid[i], grid[i + 1], order, cfg))
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<Result<_, _>>()?;
            (head, segs)
        }
        Branch::Plus => {
            let head = kernel_moments(f, extra, grid[n - 1], grid[n - 1], f.interval.b, order, cfg)?;
            let segs = (0..n - 1)
                .into_par_iter()
                .map(|i| {
                    let j = n - 2 - i;
                    kernel_moments(f, extra, grid[j], grid[j], grid[j + 1], order, cfg)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<Result<_, _>>()?;
            (head, segs)
        }
    };

    let mut state = head;
    let mut chain = vec![state[order - 1]];
    for (i, local) in segs.iter().enumerate() {
        let h = match kind.direction {
            Branch::Minus => grid[i + 1] - grid[i],
            Branch::Plus => grid[n - 1 - i] - grid[n - 2 - i],
        };
        let mut next = Vec::with_capacity(order);
        for k in 1..=order {
            let mut v = local[k - 1].value;
            let mut e = local[k - 1].err;
            for j in 1..=k {
                let c = h.powi((k - j) as i32) / factorial(k - j);
                v += c * state[j - 1].value;
                e += c * state[j - 1].err;
            }
            next.push(Estimate { value: v, err: e });
        }
        state = next;
        chain.push(state[order - 1]);
    }
    if kind.direction == Branch::Plus {
        chain.reverse();
    }
    let mut values: Vec<f64> = chain.iter().map(|e| e.value).collect();
    let errs: Vec<f64> = chain.iter().map(|e| e.err).collect();
    if let Some(phi) = &kind.phi {
        for (v, &x) in values.iter_mut().zip(grid) {
            *v *= phi.kind.value(x);
        }
    }
    let path = ScalarPath::new(PathForm::Sampled { grid: grid.to_vec(), values }, f.interval);
    Ok((path, errs))
}
