use serde::{Deserialize, Serialize};

use super::{Interval, WeightError};

const INF: f64 = f64::INFINITY;

/// Closed-form or tabulated weight shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `x^α`
    Power {
        alpha: f64,
    },
    /// `e^{−λx}`
    ExpDecay {
        rate: f64,
    },
    /// `c·x^α`
    ScaledPower {
        coef: f64,
        alpha: f64,
    },
    /// `(x + s)^α`
    ShiftedPower {
        shift: f64,
        alpha: f64,
    },
    /// `offset + scale·base(x)`
    Affine {
        offset: f64,
        scale: f64,
        base: Box<WeightKind>,
    },
    /// Piecewise-linear through `(grid[i], values[i])`, constant beyond the grid.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
    Product {
        factors: Vec<WeightKind>,
    },
}

fn invalid(msg: impl Into<String>) -> WeightError {
    WeightError::InvalidSpec(msg.into())
}

fn finite(name: &str, v: f64) -> Result<(), WeightError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn power_limit(alpha: f64, x: f64) -> f64 {
    if x == INF || x == 0.0 {
        let grows = (x == INF) == (alpha > 0.0);
        if alpha == 0.0 {
            1.0
        } else if grows {
            INF
        } else {
            0.0
        }
    } else {
        x.powf(alpha)
    }
}

/// `∫_lo^hi x^α dx` for `0 ≤ lo < hi ≤ ∞`.
pub(crate) fn power_integral(alpha: f64, lo: f64, hi: f64) -> Result<f64, WeightError> {
    let beta = alpha + 1.0;
    if hi == INF {
        if beta >= 0.0 {
            return Err(WeightError::Divergent { endpoint: INF });
        }
        if lo == 0.0 {
            return Err(WeightError::Divergent { endpoint: 0.0 });
        }
        return Ok(-lo.powf(beta) / beta);
    }
    if lo == 0.0 {
        if beta <= 0.0 {
            return Err(WeightError::Divergent { endpoint: 0.0 });
        }
        return Ok(hi.powf(beta) / beta);
    }
    let log_ratio = (hi / lo).ln();
    if beta == 0.0 {
        Ok(log_ratio)
    } else {
        Ok(lo.powf(beta) * (beta * log_ratio).exp_m1() / beta)
    }
}

impl WeightKind {
    pub(super) fn validate(&self, interval: &Interval) -> Result<(), WeightError> {
        match self {
            WeightKind::Power { alpha } => {
                finite("alpha", *alpha)?;
                if interval.a < 0.0 {
                    return Err(invalid("power weights need an interval inside [0, ∞)"));
                }
            }
            WeightKind::ExpDecay { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(invalid(format!("decay rate must be positive, got {rate}")));
                }
            }
            WeightKind::ScaledPower { coef, alpha } => {
                finite("alpha", *alpha)?;
                if !(coef.is_finite() && *coef > 0.0) {
                    return Err(invalid(format!("coefficient must be positive, got {coef}")));
                }
                if interval.a < 0.0 {
                    return Err(invalid("power weights need an interval inside [0, ∞)"));
                }
            }
            WeightKind::ShiftedPower { shift, alpha } => {
                finite("alpha", *alpha)?;
                finite("shift", *shift)?;
                if interval.a + shift < 0.0 {
                    return Err(invalid("shifted power needs x + shift ≥ 0 on the interval"));
                }
            }
            WeightKind::Affine { offset, scale, base } => {
                finite("offset", *offset)?;
                finite("scale", *scale)?;
                base.validate(interval)?;
            }
            WeightKind::Tabulated { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(invalid("tabulated weight needs ≥ 2 nodes and one value per node"));
                }
                if grid.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                    return Err(invalid("tabulated grid and values must be finite"));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("tabulated grid must be strictly ascending"));
                }
                if values.iter().any(|&v| v < 0.0) {
                    return Err(invalid("tabulated values must be nonnegative"));
                }
            }
            WeightKind::Product { factors } => {
                if factors.is_empty() {
                    return Err(invalid("product weight needs at least one factor"));
                }
                for f in factors {
                    f.validate(interval)?;
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            WeightKind::Power { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    x.powf(*alpha)
                }
            }
            WeightKind::ExpDecay { rate } => (-rate * x).exp(),
            WeightKind::ScaledPower { coef, alpha } => coef * WeightKind::Power { alpha: *alpha }.value(x),
            WeightKind::ShiftedPower { shift, alpha } => WeightKind::Power { alpha: *alpha }.value(x + shift),
            WeightKind::Affine { offset, scale, base } => {
                if *scale == 0.0 {
                    *offset
                } else {
                    offset + scale * base.value(x)
                }
            }
            WeightKind::Tabulated { grid, values } => tabulated_value(grid, values, x),
            WeightKind::Product { factors } => factors.iter().map(|f| f.value(x)).product(),
        }
    }

    /// Exact derivative; for tabulated weights the slope of the segment to the
    /// right of `x` (zero outside the grid).
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            WeightKind::Power { alpha } => {
                if *alpha == 0.0 {
                    0.0
                } else {
                    alpha * x.powf(alpha - 1.0)
                }
            }
            WeightKind::ExpDecay { rate } => -rate * (-rate * x).exp(),
            WeightKind::ScaledPower { coef, alpha } => coef * WeightKind::Power { alpha: *alpha }.derivative(x),
            WeightKind::ShiftedPower { shift, alpha } => WeightKind::Power { alpha: *alpha }.derivative(x + shift),
            WeightKind::Affine { scale, base, .. } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    scale * base.derivative(x)
                }
            }
            WeightKind::Tabulated { grid, values } => {
                let n = grid.len();
                if x < grid[0] || x >= grid[n - 1] {
                    return 0.0;
                }
                let i = grid.partition_point(|&g| g <= x) - 1;
                (values[i + 1] - values[i]) / (grid[i + 1] - grid[i])
            }
            WeightKind::Product { factors } => {
                let vals: Vec<f64> = factors.iter().map(|f| f.value(x)).collect();
                factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        let others: f64 = vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
                        f.derivative(x) * others
                    })
                    .sum()
            }
        }
    }

    /// `∫_lo^hi` in closed form, `None` when no closed form is implemented.
    pub(super) fn exact_integral(&self, lo: f64, hi: f64) -> Result<Option<f64>, WeightError> {
        Ok(Some(match self {
            WeightKind::Power { alpha } => power_integral(*alpha, lo, hi)?,
            WeightKind::ScaledPower { coef, alpha } => coef * power_integral(*alpha, lo, hi)?,
            WeightKind::ShiftedPower { shift, alpha } => {
                let r = power_integral(*alpha, lo + shift, hi + shift);
                match r {
                    Err(WeightError::Divergent { endpoint }) => return Err(WeightError::Divergent { endpoint: endpoint - shift }),
                    other => other?,
                }
            }
            WeightKind::ExpDecay { rate } => {
                if lo == -INF {
                    return Err(WeightError::Divergent { endpoint: -INF });
                }
                if hi == INF {
                    (-rate * lo).exp() / rate
                } else {
                    -(-rate * lo).exp() * (-rate * (hi - lo)).exp_m1() / rate
                }
            }
            WeightKind::Affine { offset, scale, base } => {
                let mut v = 0.0;
                if *offset != 0.0 {
                    if lo.is_infinite() || hi.is_infinite() {
                        let endpoint = if hi.is_infinite() { hi } else { lo };
                        return Err(WeightError::Divergent { endpoint });
                    }
                    v += offset * (hi - lo);
                }
                if *scale != 0.0 {
                    match base.exact_integral(lo, hi)? {
                        Some(b) => v += scale * b,
                        None => return Ok(None),
                    }
                }
                v
            }
            WeightKind::Tabulated { grid, values } => {
                let n = grid.len();
                if hi == INF && values[n - 1] > 0.0 {
                    return Err(WeightError::Divergent { endpoint: INF });
                }
                if lo == -INF && values[0] > 0.0 {
                    return Err(WeightError::Divergent { endpoint: -INF });
                }
                let clamp = |x: f64| x.clamp(grid[0] - 1.0, grid[n - 1] + 1.0);
                tabulated_primitive(grid, values, clamp(hi)) - tabulated_primitive(grid, values, clamp(lo))
            }
            WeightKind::Product { factors } if factors.len() == 1 => return factors[0].exact_integral(lo, hi),
            WeightKind::Product { .. } => return Ok(None),
        }))
    }

    pub fn local_exponent(&self, x0: f64) -> f64 {
        match self {
            WeightKind::Power { alpha } | WeightKind::ScaledPower { alpha, .. } => {
                if x0 == 0.0 {
                    *alpha
                } else {
                    0.0
                }
            }
            WeightKind::ShiftedPower { shift, alpha } => {
                if x0 + shift == 0.0 {
                    *alpha
                } else {
                    0.0
                }
            }
            WeightKind::Affine { offset, scale, base } => {
                if *scale == 0.0 {
                    0.0
                } else if *offset != 0.0 {
                    base.local_exponent(x0).min(0.0)
                } else {
                    base.local_exponent(x0)
                }
            }
            WeightKind::Product { factors } => factors.iter().map(|f| f.local_exponent(x0)).sum(),
            WeightKind::ExpDecay { .. } | WeightKind::Tabulated { .. } => 0.0,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            WeightKind::Tabulated { grid, .. } => grid.clone(),
            WeightKind::Affine { base, .. } => base.breakpoints(),
            WeightKind::Product { factors } => {
                let mut v: Vec<f64> = factors.iter().flat_map(|f| f.breakpoints()).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            _ => Vec::new(),
        }
    }

    /// One-sided limit at an endpoint of the interval; NaN when the closed
    /// forms give an indeterminate product.
    pub fn limit(&self, x0: f64) -> f64 {
        match self {
            WeightKind::Power { alpha } => power_limit(*alpha, x0),
            WeightKind::ScaledPower { coef, alpha } => coef * power_limit(*alpha, x0),
            WeightKind::ShiftedPower { shift, alpha } => power_limit(*alpha, x0 + shift),
            WeightKind::ExpDecay { rate } => (-rate * x0).exp(),
            WeightKind::Affine { offset, scale, base } => {
                if *scale == 0.0 {
                    *offset
                } else {
                    offset + scale * base.limit(x0)
                }
            }
            WeightKind::Tabulated { grid, values } => tabulated_value(grid, values, x0),
            WeightKind::Product { factors } => factors.iter().map(|f| f.limit(x0)).product(),
        }
    }
}

fn tabulated_value(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    if x <= grid[0] {
        return values[0];
    }
    if x >= grid[n - 1] {
        return values[n - 1];
    }
    let i = grid.partition_point(|&g| g <= x) - 1;
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    values[i] + t * (values[i + 1] - values[i])
}

/// `∫_{grid[0]}^x` of the tabulated weight with flat extrapolation.
fn tabulated_primitive(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    if x <= grid[0] {
        return (x - grid[0]) * values[0];
    }
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let (g0, g1) = (grid[i], grid[i + 1]);
        if x <= g0 {
            break;
        }
        let right = x.min(g1);
        let v_right = tabulated_value(grid, values, right);
        acc += 0.5 * (values[i] + v_right) * (right - g0);
    }
    if x > grid[n - 1] {
        acc += (x - grid[n - 1]) * values[n - 1];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_integral_cases() {
        assert_eq!(power_integral(0.0, 0.0, 3.0).unwrap(), 3.0);
        assert_eq!(power_integral(-2.0, 2.0, INF).unwrap(), 0.5);
        assert!(power_integral(-1.0, 0.0, 1.0).is_err());
        assert!(power_integral(-1.0, 1.0, INF).is_err());
        assert!((power_integral(-1.0, 1.0, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        // Near the logarithmic case the expm1 form stays accurate.
        let v = power_integral(-1.0 + 1e-12, 1.0, 2.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-11);
    }

    #[test]
    fn tabulated_interpolates_and_integrates() {
        let k = WeightKind::Tabulated { grid: vec![0.0, 1.0, 3.0], values: vec![2.0, 0.0, 1.0] };
        assert_eq!(k.value(0.5), 1.0);
        assert_eq!(k.value(2.0), 0.5);
        assert_eq!(k.value(10.0), 1.0);
        assert_eq!(k.derivative(0.5), -2.0);
        assert_eq!(k.derivative(1.0), 0.5);
        assert_eq!(k.exact_integral(0.0, 3.0).unwrap(), Some(2.0));
        assert_eq!(k.exact_integral(0.5, 2.0).unwrap(), Some(0.25 + 0.25));
    }

    #[test]
    fn product_derivative() {
        let k = WeightKind::Product { factors: vec![WeightKind::Power { alpha: 2.0 }, WeightKind::ExpDecay { rate: 1.0 }] };
        let x = 1.3f64;
        let expected = (2.0 * x - x * x) * (-x).exp();
        assert!((k.derivative(x) - expected).abs() < 1e-14);
    }

    #[test]
    fn limits() {
        assert_eq!(WeightKind::Power { alpha: -1.0 }.limit(0.0), INF);
        assert_eq!(WeightKind::Power { alpha: -1.0 }.limit(INF), 0.0);
        assert_eq!(WeightKind::ExpDecay { rate: 2.0 }.limit(INF), 0.0);
        let a = WeightKind::Affine { offset: 1.0, scale: 1.0, base: Box::new(WeightKind::ExpDecay { rate: 1.0 }) };
        assert_eq!((a.limit(0.0), a.limit(INF)), (2.0, 1.0));
        let indeterminate = WeightKind::Product { factors: vec![WeightKind::Power { alpha: 1.0 }, WeightKind::ExpDecay { rate: 1.0 }] };
        assert!(indeterminate.limit(INF).is_nan());
    }
}
