use serde::{Deserialize, Serialize};

use super::{ext_real, Interval, Weight, WeightError, WeightSpec};
use crate::quadrature::{self, QuadConfig, QuadError};
use crate::Branch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Decreasing,
    Increasing,
}

impl Monotonicity {
    /// Decreasing weights pair with the left-anchored operator.
    pub fn branch(self) -> Branch {
        match self {
            Monotonicity::Decreasing => Branch::Minus,
            Monotonicity::Increasing => Branch::Plus,
        }
    }
}

/// A monotone weight `w₁` with its endpoint limits `w₁(a+)`, `w₁(b−)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneWeight {
    pub base: WeightSpec,
    pub direction: Monotonicity,
    #[serde(with = "limits_serde")]
    pub endpoint_limits: (f64, f64),
}

mod limits_serde {
    use super::ext_real;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Pair(#[serde(with = "ext_real")] f64, #[serde(with = "ext_real")] f64);

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        Pair(v.0, v.1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let Pair(a, b) = Pair::deserialize(d)?;
        Ok((a, b))
    }
}

impl MonotoneWeight {
    /// Computes the endpoint limits from the closed form.
    pub fn new(base: WeightSpec, direction: Monotonicity) -> Result<Self, WeightError> {
        let Interval { a, b } = base.interval;
        let la = base.kind.limit(a);
        let lb = base.kind.limit(b);
        if la.is_nan() {
            return Err(WeightError::IndeterminateLimit { endpoint: a });
        }
        if lb.is_nan() {
            return Err(WeightError::IndeterminateLimit { endpoint: b });
        }
        Ok(MonotoneWeight { base, direction, endpoint_limits: (la, lb) })
    }

    /// Uses caller-supplied limits (tabulated data, products).
    pub fn with_limits(base: WeightSpec, direction: Monotonicity, limits: (f64, f64)) -> Self {
        MonotoneWeight { base, direction, endpoint_limits: limits }
    }

    pub fn interval(&self) -> Interval {
        self.base.interval
    }

    pub fn value(&self, x: f64) -> f64 {
        self.base.kind.value(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.base.kind.derivative(x)
    }

    /// `−w₁′` for decreasing weights, `w₁′` for increasing ones.
    pub fn slope(&self, x: f64) -> f64 {
        match self.direction {
            Monotonicity::Decreasing => -self.derivative(x),
            Monotonicity::Increasing => self.derivative(x),
        }
    }

    pub fn branch(&self) -> Branch {
        self.direction.branch()
    }

    /// `(w₁(a+), w₁(b−))`
    pub fn limits(&self) -> (f64, f64) {
        self.endpoint_limits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisClause {
    /// Monotonicity direction does not match the branch.
    Direction,
    Nonnegativity,
    Monotonicity,
    /// `∓w₁′` vanishes where `[∓w₁′]^{1−p}` is needed.
    NonvanishingDerivative,
    EndpointLimits,
    LocalIntegrability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub passed: bool,
    pub violated: Option<HypothesisClause>,
    /// One line per check; integrability lines are numerical evidence on a
    /// ladder of compacta, not proofs.
    pub diagnostics: Vec<String>,
}

impl ValidationResult {
    fn fail(mut diagnostics: Vec<String>, clause: HypothesisClause, msg: String) -> Self {
        diagnostics.push(msg);
        ValidationResult { passed: false, violated: Some(clause), diagnostics }
    }
}

const SAMPLES: usize = 257;
const SAMPLE_SPAN: f64 = 12.0;
const LADDER: [f64; 4] = [2.0, 4.0, 8.0, 12.0];

/// Checks the sign, monotonicity and local integrability requirements on
/// `(w₁, w₂)` for the given branch. Sampling based: a pass is evidence.
pub fn validate_hypothesis(
    w1: &MonotoneWeight,
    w2: &WeightSpec,
    p: f64,
    branch: Branch,
    cfg: &QuadConfig,
) -> Result<ValidationResult, WeightError> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(WeightError::InvalidExponent(p));
    }
    if w1.interval() != w2.interval {
        return Err(WeightError::IntervalMismatch(w1.interval(), w2.interval));
    }
    let interval = w1.interval();
    let mut diag = Vec::new();

    if w1.branch() != branch {
        return Ok(ValidationResult::fail(
            diag,
            HypothesisClause::Direction,
            format!("{:?} weight cannot serve the {branch} branch", w1.direction),
        ));
    }

    let xs = interval.samples(SAMPLES, SAMPLE_SPAN);
    for &x in &xs {
        let (v1, v2) = (w1.value(x), w2.value(x));
        if !(v1 >= 0.0) || !(v2 >= 0.0) {
            return Ok(ValidationResult::fail(
                diag,
                HypothesisClause::Nonnegativity,
                format!("negative or undefined weight at x = {x}: w1 = {v1}, w2 = {v2}"),
            ));
        }
    }
    diag.push(format!("w1, w2 nonnegative at {} samples", xs.len()));

    for &x in &xs {
        let s = w1.slope(x);
        let scale = 1e-12 * (1.0 + w1.derivative(x).abs());
        if !(s >= -scale) {
            return Ok(ValidationResult::fail(
                diag,
                HypothesisClause::Monotonicity,
                format!("derivative has the wrong sign at x = {x} (∓w1' = {s})"),
            ));
        }
    }
    for pair in xs.windows(2) {
        let (u, v) = (w1.value(pair[0]), w1.value(pair[1]));
        let tol = 1e-12 * u.abs().max(v.abs());
        let ok = match w1.direction {
            super::Monotonicity::Decreasing => v <= u + tol,
            super::Monotonicity::Increasing => v >= u - tol,
        };
        if !ok {
            return Ok(ValidationResult::fail(
                diag,
                HypothesisClause::Monotonicity,
                format!("w1 not {:?} between x = {} and x = {}", w1.direction, pair[0], pair[1]),
            ));
        }
    }
    diag.push(format!("w1 {:?} on {} samples", w1.direction, xs.len()).to_lowercase());

    if p > 1.0 {
        // Points where w₁ itself under- or overflows carry no information.
        let informative = |x: f64| {
            let v = w1.value(x);
            v.is_normal() && v < f64::MAX
        };
        if let Some(&x) = xs.iter().find(|&&x| informative(x) && !(w1.slope(x) > 0.0)) {
            return Ok(ValidationResult::fail(
                diag,
                HypothesisClause::NonvanishingDerivative,
                format!("w1' vanishes at x = {x}; [∓w1']^(1-p) is undefined there"),
            ));
        }
    }

    let (la, lb) = w1.limits();
    let consistent = la >= 0.0
        && lb >= 0.0
        && match w1.direction {
            Monotonicity::Decreasing => la >= lb,
            Monotonicity::Increasing => la <= lb,
        };
    let (lo_lim, hi_lim) = if la <= lb { (la, lb) } else { (lb, la) };
    let inside = xs.iter().all(|&x| {
        let v = w1.value(x);
        v >= lo_lim * (1.0 - 1e-12) && v <= hi_lim * (1.0 + 1e-12)
    });
    if !consistent || !inside {
        return Ok(ValidationResult::fail(
            diag,
            HypothesisClause::EndpointLimits,
            format!("endpoint limits ({la}, {lb}) are inconsistent with the sampled values"),
        ));
    }

    let quad_cfg = cfg.clone().without_hints();
    let weighted = |x: f64| {
        let s = w1.slope(x);
        let w = w2.value(x);
        if p == 1.0 {
            w
        } else {
            s.powf(1.0 - p) * w.powf(p)
        }
    };
    'ladder: for &span in &LADDER {
        let (lo, hi) = (interval.at_parameter(-span), interval.at_parameter(span));
        for (label, r) in [
            ("[∓w1']^(1-p) w2^p", quadrature::integrate(weighted, lo, hi, &quad_cfg)),
            ("w2", quadrature::integrate(|x| w2.value(x), lo, hi, &quad_cfg)),
        ] {
            match r {
                Ok(q) => diag.push(format!("∫ {label} over [{lo:.3e}, {hi:.3e}] = {:.6e}", q.value)),
                // Overflow on the wider compacts is a floating-point limit, not divergence.
                Err(QuadError::NonFinite { x }) if span > LADDER[0] => {
                    diag.push(format!("∫ {label}: integrand overflows at x = {x:.3e}, ladder stopped"));
                    break 'ladder;
                }
                Err(e @ (QuadError::Divergent { .. } | QuadError::NonFinite { .. })) => {
                    return Ok(ValidationResult::fail(
                        diag,
                        HypothesisClause::LocalIntegrability,
                        format!("∫ {label} over [{lo:.3e}, {hi:.3e}] failed: {e}"),
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(ValidationResult { passed: true, violated: None, diagnostics: diag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightKind;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn inverse_power_passes() {
        let w1 = MonotoneWeight::new(WeightSpec::power(-1.0, Interval::half_line()).unwrap(), Monotonicity::Decreasing).unwrap();
        assert_eq!(w1.limits(), (f64::INFINITY, 0.0));
        let w2 = WeightSpec::power(0.0, Interval::half_line()).unwrap();
        let r = validate_hypothesis(&w1, &w2, 2.0, Branch::Minus, &cfg()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn increasing_declared_decreasing_fails() {
        let w1 = MonotoneWeight::with_limits(
            WeightSpec::power(1.0, Interval::half_line()).unwrap(),
            Monotonicity::Decreasing,
            (0.0, f64::INFINITY),
        );
        let w2 = WeightSpec::power(0.0, Interval::half_line()).unwrap();
        let r = validate_hypothesis(&w1, &w2, 2.0, Branch::Minus, &cfg()).unwrap();
        assert_eq!(r.violated, Some(HypothesisClause::Monotonicity));
    }

    #[test]
    fn exponential_p_one_passes() {
        let w1 = MonotoneWeight::new(WeightSpec::exp_decay(1.0, Interval::half_line()).unwrap(), Monotonicity::Decreasing).unwrap();
        let w2 = WeightSpec::power(0.0, Interval::half_line()).unwrap();
        let r = validate_hypothesis(&w1, &w2, 1.0, Branch::Minus, &cfg()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn errors_and_direction() {
        let w1 = MonotoneWeight::new(WeightSpec::exp_decay(1.0, Interval::half_line()).unwrap(), Monotonicity::Decreasing).unwrap();
        let w2 = WeightSpec::power(0.0, Interval::half_line()).unwrap();
        assert_eq!(validate_hypothesis(&w1, &w2, 0.5, Branch::Minus, &cfg()).unwrap_err(), WeightError::InvalidExponent(0.5));
        let other = WeightSpec::power(0.0, Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(validate_hypothesis(&w1, &other, 2.0, Branch::Minus, &cfg()), Err(WeightError::IntervalMismatch(..))));
        let r = validate_hypothesis(&w1, &w2, 2.0, Branch::Plus, &cfg()).unwrap();
        assert_eq!(r.violated, Some(HypothesisClause::Direction));
    }

    #[test]
    fn flat_stretch_fails_for_p_above_one() {
        let base = WeightSpec::new(
            WeightKind::Tabulated { grid: vec![0.0, 1.0, 2.0, 3.0], values: vec![3.0, 2.0, 2.0, 1.0] },
            Interval::new(0.0, 3.0).unwrap(),
        )
        .unwrap();
        let w1 = MonotoneWeight::with_limits(base, Monotonicity::Decreasing, (3.0, 1.0));
        let w2 = WeightSpec::power(0.0, Interval::new(0.0, 3.0).unwrap()).unwrap();
        let r = validate_hypothesis(&w1, &w2, 2.0, Branch::Minus, &cfg()).unwrap();
        assert_eq!(r.violated, Some(HypothesisClause::NonvanishingDerivative));
        let r = validate_hypothesis(&w1, &w2, 1.0, Branch::Minus, &cfg()).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
