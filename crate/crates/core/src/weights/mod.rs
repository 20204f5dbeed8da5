//! Weight functions on real intervals.
//!
//! A [`WeightSpec`] pairs a closed-form or tabulated [`WeightKind`] with the
//! interval it lives on. Closed forms carry exact derivatives and, where one
//! exists, exact antiderivatives; everything else falls back to quadrature.

mod kind;
pub(crate) use kind::power_integral;
mod monotone;

pub use kind::WeightKind;
pub use monotone::{validate_hypothesis, HypothesisClause, MonotoneWeight, Monotonicity, ValidationResult};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::quadrature::{self, Endpoint, QuadConfig, QuadError, QuadResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("x = {x} lies outside the weight interval {interval}")]
    OutsideInterval { x: f64, interval: Interval },
    #[error("integral of the weight diverges at x = {endpoint}")]
    Divergent { endpoint: f64 },
    #[error("invalid weight: {0}")]
    InvalidSpec(String),
    #[error("weights live on different intervals: {0} and {1}")]
    IntervalMismatch(Interval, Interval),
    #[error("exponent p = {0} must be at least 1")]
    InvalidExponent(f64),
    #[error("limit of the weight at x = {endpoint} is indeterminate; supply it explicitly")]
    IndeterminateLimit { endpoint: f64 },
    #[error(transparent)]
    Quadrature(QuadError),
}

impl From<QuadError> for WeightError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::Divergent { endpoint } => WeightError::Divergent { endpoint },
            other => WeightError::Quadrature(other),
        }
    }
}

/// Extended-real number that serializes infinities as `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v == f64::INFINITY {
            s.serialize_str("inf")
        } else if v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(v)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal(v)),
            Raw::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtReal(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(ExtReal(f64::NEG_INFINITY)),
                "nan" => Ok(ExtReal(f64::NAN)),
                other => other.parse::<f64>().map(ExtReal).map_err(|_| serde::de::Error::custom(format!("not an extended real: {s:?}"))),
            },
        }
    }
}

/// Serde adapter for plain `f64` fields that may hold infinities.
pub mod ext_real {
    use super::ExtReal;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtReal(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        ExtReal::deserialize(d).map(|e| e.0)
    }
}

/// Open interval `(a, b)` with `−∞ ≤ a < b ≤ ∞`. Serialized as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(ExtReal, ExtReal)", into = "(ExtReal, ExtReal)")]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, WeightError> {
        if a.is_nan() || b.is_nan() || !(a < b) || a == f64::INFINITY || b == f64::NEG_INFINITY {
            return Err(WeightError::InvalidSpec(format!("interval ({a}, {b}) is empty or malformed")));
        }
        Ok(Interval { a, b })
    }

    /// `(0, ∞)`
    pub fn half_line() -> Self {
        Interval { a: 0.0, b: f64::INFINITY }
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    /// Point of the interval for parameter `s ∈ ℝ`: logistic on finite
    /// intervals, exponential toward an infinite end. Used for sample ladders.
    pub fn at_parameter(&self, s: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match (a.is_finite(), b.is_finite()) {
            (true, true) => a + (b - a) / (1.0 + (-s).exp()),
            (true, false) => a + a.abs().max(1.0) * s.exp(),
            (false, true) => b - b.abs().max(1.0) * (-s).exp(),
            (false, false) => s.sinh(),
        }
    }

    /// `n` interior points spread over the parameter range `[−span, span]`.
    pub fn samples(&self, n: usize, span: f64) -> Vec<f64> {
        let n = n.max(2);
        (0..n).map(|i| self.at_parameter(-span + 2.0 * span * i as f64 / (n - 1) as f64)).filter(|&x| self.contains_open(x)).collect()
    }
}

impl TryFrom<(ExtReal, ExtReal)> for Interval {
    type Error = WeightError;
    fn try_from((a, b): (ExtReal, ExtReal)) -> Result<Self, Self::Error> {
        Interval::new(a.0, b.0)
    }
}

impl From<Interval> for (ExtReal, ExtReal) {
    fn from(i: Interval) -> Self {
        (ExtReal(i.a), ExtReal(i.b))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Anything that can be evaluated pointwise as a nonnegative weight.
pub trait Weight: Send + Sync {
    fn value(&self, x: f64) -> f64;

    fn interval(&self) -> Interval;

    /// Exponent `γ` with `w(x) ~ |x − x0|^γ` near the finite endpoint `x0`.
    fn local_exponent(&self, _x0: f64) -> f64 {
        0.0
    }

    /// Interior points where the weight is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Weight backed by an arbitrary closure.
#[derive(Clone)]
pub struct FnWeight {
    interval: Interval,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    exponents: (f64, f64),
}

impl FnWeight {
    pub fn new(interval: Interval, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FnWeight { interval, f: Arc::new(f), exponents: (0.0, 0.0) }
    }

    /// Declares the power-law behaviour at the lower and upper endpoints.
    pub fn with_exponents(mut self, lower: f64, upper: f64) -> Self {
        self.exponents = (lower, upper);
        self
    }
}

impl fmt::Debug for FnWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnWeight").field("interval", &self.interval).finish_non_exhaustive()
    }
}

impl Weight for FnWeight {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn interval(&self) -> Interval {
        self.interval
    }
    fn local_exponent(&self, x0: f64) -> f64 {
        if x0 == self.interval.a {
            self.exponents.0
        } else if x0 == self.interval.b {
            self.exponents.1
        } else {
            0.0
        }
    }
}

/// A weight kind together with its interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub kind: WeightKind,
    pub interval: Interval,
}

impl WeightSpec {
    /// Validates parameters and checks nonnegativity on a sample ladder.
    pub fn new(kind: WeightKind, interval: Interval) -> Result<Self, WeightError> {
        kind.validate(&interval)?;
        let spec = WeightSpec { kind, interval };
        for x in interval.samples(129, 12.0) {
            let v = spec.kind.value(x);
            if v.is_nan() || v < 0.0 {
                return Err(WeightError::InvalidSpec(format!("weight is negative or undefined at x = {x} (value {v})")));
            }
        }
        Ok(spec)
    }

    /// Serde-deserialized specs bypass [`WeightSpec::new`]; call this to
    /// re-run the checks.
    pub fn validated(self) -> Result<Self, WeightError> {
        WeightSpec::new(self.kind, self.interval)
    }

    pub fn power(alpha: f64, interval: Interval) -> Result<Self, WeightError> {
        WeightSpec::new(WeightKind::Power { alpha }, interval)
    }

    pub fn exp_decay(rate: f64, interval: Interval) -> Result<Self, WeightError> {
        WeightSpec::new(WeightKind::ExpDecay { rate }, interval)
    }

    /// Value at `x`; endpoints are allowed and give the formula's limit.
    pub fn eval(&self, x: f64) -> Result<f64, WeightError> {
        if !self.interval.contains_closed(x) || x.is_infinite() {
            return Err(WeightError::OutsideInterval { x, interval: self.interval });
        }
        Ok(self.kind.value(x))
    }

    pub fn derivative(&self, x: f64) -> Result<f64, WeightError> {
        if !self.interval.contains_closed(x) || x.is_infinite() {
            return Err(WeightError::OutsideInterval { x, interval: self.interval });
        }
        Ok(self.kind.derivative(x))
    }

    /// `∫_lo^hi w`. Exact (zero error) for closed forms other than products.
    pub fn antiderivative(&self, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult, WeightError> {
        for x in [lo, hi] {
            if !(x >= self.interval.a && x <= self.interval.b) {
                return Err(WeightError::OutsideInterval { x, interval: self.interval });
            }
        }
        if lo > hi {
            let mut r = self.antiderivative(hi, lo, cfg)?;
            r.value = -r.value;
            return Ok(r);
        }
        if lo == hi {
            return Ok(exact(0.0));
        }
        if let Some(v) = self.kind.exact_integral(lo, hi)? {
            return Ok(exact(v));
        }
        let mut c = cfg.clone().without_hints();
        if lo.is_finite() {
            let g = self.kind.local_exponent(lo);
            if g != 0.0 && g > -1.0 {
                c = c.with_hint(Endpoint::Lower, g);
            }
        }
        if hi.is_finite() {
            let g = self.kind.local_exponent(hi);
            if g != 0.0 && g > -1.0 {
                c = c.with_hint(Endpoint::Upper, g);
            }
        }
        let r = quadrature::integrate_with_breakpoints(|x| self.kind.value(x), lo, hi, &self.kind.breakpoints(), &c)?;
        Ok(r)
    }
}

fn exact(value: f64) -> QuadResult {
    QuadResult { value, err_estimate: 0.0, subdivisions_used: 0, converged: true }
}

impl Weight for WeightSpec {
    fn value(&self, x: f64) -> f64 {
        self.kind.value(x)
    }
    fn interval(&self) -> Interval {
        self.interval
    }
    fn local_exponent(&self, x0: f64) -> f64 {
        self.kind.local_exponent(x0)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.kind.breakpoints()
    }
}

/// Value of `w` at `x`.
pub fn eval_weight(w: &WeightSpec, x: f64) -> Result<f64, WeightError> {
    w.eval(x)
}

/// `∫_lo^hi w`, exact where a closed form exists.
pub fn weight_antiderivative(w: &WeightSpec, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult, WeightError> {
    w.antiderivative(lo, hi, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn interval_json_round_trip() {
        let i = Interval::half_line();
        let s = serde_json::to_string(&i).unwrap();
        assert_eq!(s, r#"[0.0,"inf"]"#);
        let back: Interval = serde_json::from_str(r#"[0, "inf"]"#).unwrap();
        assert_eq!(back, i);
        assert!(serde_json::from_str::<Interval>(r#"[2, 1]"#).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let w: WeightSpec = serde_json::from_str(r#"{"kind":"power","alpha":-2.0,"interval":[0,"inf"]}"#).unwrap();
        assert_eq!(w.kind, WeightKind::Power { alpha: -2.0 });
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(v["kind"], "power");
        assert_eq!(v["interval"][1], "inf");
    }

    #[test]
    fn eval_examples() {
        let p = WeightSpec::power(-2.0, Interval::half_line()).unwrap();
        assert_eq!(p.eval(2.0).unwrap(), 0.25);
        let e = WeightSpec::exp_decay(1.0, Interval::half_line()).unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        let prod = WeightSpec::new(
            WeightKind::Product { factors: vec![WeightKind::Power { alpha: 1.0 }, WeightKind::ExpDecay { rate: 1.0 }] },
            Interval::half_line(),
        )
        .unwrap();
        assert!((prod.eval(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(p.eval(-1.0), Err(WeightError::OutsideInterval { .. })));
    }

    #[test]
    fn antiderivative_examples() {
        let cfg = QuadConfig::default();
        let one = WeightSpec::power(0.0, Interval::half_line()).unwrap();
        let r = one.antiderivative(0.0, 3.0, &cfg).unwrap();
        assert_eq!((r.value, r.err_estimate), (3.0, 0.0));
        let inv2 = WeightSpec::power(-2.0, Interval::half_line()).unwrap();
        assert_eq!(inv2.antiderivative(2.0, INF, &cfg).unwrap().value, 0.5);
        let inv1 = WeightSpec::power(-1.0, Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(inv1.antiderivative(0.0, 1.0, &cfg).unwrap_err(), WeightError::Divergent { endpoint: 0.0 });
    }

    #[test]
    fn negative_weight_rejected() {
        let k = WeightKind::Affine { offset: -1.0, scale: 1.0, base: Box::new(WeightKind::ExpDecay { rate: 1.0 }) };
        assert!(WeightSpec::new(k, Interval::half_line()).is_err());
    }
}
