use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::weights::{power_integral, Interval};

const INF: f64 = f64::INFINITY;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Caller-supplied path with optional derivative and antiderivative oracles.
#[derive(Clone)]
pub struct CustomPath {
    pub name: String,
    pub f: RealFn,
    /// `derivatives[k]` is the `(k+1)`-th derivative.
    pub derivatives: Vec<RealFn>,
    pub antiderivative: Option<RealFn>,
    pub breakpoints: Vec<f64>,
    /// Closed interval outside of which the path vanishes.
    pub support: Option<(f64, f64)>,
}

impl CustomPath {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomPath {
            name: name.into(),
            f: Arc::new(f),
            derivatives: Vec::new(),
            antiderivative: None,
            breakpoints: Vec::new(),
            support: None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivatives.push(Arc::new(d));
        self
    }

    pub fn with_antiderivative(mut self, a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.antiderivative = Some(Arc::new(a));
        self
    }

    pub fn with_breakpoints(mut self, bps: Vec<f64>) -> Self {
        self.breakpoints = bps;
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }
}

impl fmt::Debug for CustomPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPath")
            .field("name", &self.name)
            .field("derivatives", &self.derivatives.len())
            .field("antiderivative", &self.antiderivative.is_some())
            .finish()
    }
}

impl PartialEq for CustomPath {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// Shapes a scalar path can take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PathForm {
    /// `coef·x^σ` on `[lo, hi]`, zero elsewhere.
    PowerCutoff { coef: f64, sigma: f64, lo: f64, hi: f64 },
    /// `(Σ c_k x^k)·e^{−λx}` with `λ ≥ 0`.
    PolyExp { coeffs: Vec<f64>, rate: f64 },
    /// Polynomial on `[lo, hi]`, zero elsewhere.
    PolyBump { coeffs: Vec<f64>, lo: f64, hi: f64 },
    /// `values[i]` on `[grid[i], grid[i+1])`, zero outside `[grid[0], grid[m])`.
    Step { grid: Vec<f64>, values: Vec<f64> },
    /// Piecewise-linear through the samples, zero outside the grid.
    Sampled { grid: Vec<f64>, values: Vec<f64> },
    #[serde(skip)]
    Custom(CustomPath),
}

/// A scalar function on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPath {
    #[serde(flatten)]
    pub form: PathForm,
    pub interval: Interval,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

fn poly_integral(coeffs: &[f64], lo: f64, hi: f64) -> f64 {
    let prim = |x: f64| coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, &c)| acc * x + c / (k + 1) as f64) * x;
    prim(hi) - prim(lo)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `Γ(k+1, y) = ∫_y^∞ t^k e^{−t} dt` for integer `k`.
fn upper_gamma(k: usize, y: f64) -> f64 {
    if y == INF {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=k {
        term *= y / j as f64;
        sum += term;
    }
    factorial(k) * (-y).exp() * sum
}

/// `γ(k+1, y) = ∫_0^y t^k e^{−t} dt` for integer `k`, series below the mode.
fn lower_gamma(k: usize, y: f64) -> f64 {
    if y == INF {
        return factorial(k);
    }
    if y <= 0.0 {
        return 0.0;
    }
    if y < (k + 1) as f64 {
        let mut term = 1.0 / (k + 1) as f64;
        let mut sum = term;
        let mut n = 1;
        while term > 1e-17 * sum && n < 500 {
            term *= y / (k + 1 + n) as f64;
            sum += term;
            n += 1;
        }
        (-y).exp() * y.powi(k as i32 + 1) * sum
    } else {
        factorial(k) - upper_gamma(k, y)
    }
}

/// `∫_lo^hi t^k e^{−λt} dt` for `0 ≤ lo ≤ hi ≤ ∞`, `λ > 0`.
fn exp_moment(k: usize, rate: f64, lo: f64, hi: f64) -> f64 {
    let (y0, y1) = (rate * lo, rate * hi);
    let raw = if y0 >= (k + 1) as f64 { upper_gamma(k, y0) - upper_gamma(k, y1) } else { lower_gamma(k, y1) - lower_gamma(k, y0) };
    raw / rate.powi(k as i32 + 1)
}

impl ScalarPath {
    pub fn new(form: PathForm, interval: Interval) -> Self {
        ScalarPath { form, interval }
    }

    /// `e^{−x}` on `(0, ∞)`.
    pub fn exp_decay() -> Self {
        ScalarPath::new(PathForm::PolyExp { coeffs: vec![1.0], rate: 1.0 }, Interval::half_line())
    }

    /// Constant on `(0, ∞)`.
    pub fn constant(c: f64) -> Self {
        ScalarPath::new(PathForm::PolyExp { coeffs: vec![c], rate: 0.0 }, Interval::half_line())
    }

    pub fn polynomial(coeffs: Vec<f64>, interval: Interval) -> Self {
        ScalarPath::new(PathForm::PolyExp { coeffs, rate: 0.0 }, interval)
    }

    /// `(x(1−x))^m` on `[0, 1]`, zero elsewhere, viewed on `(0, b)`.
    pub fn bump(m: usize, b: f64) -> Self {
        // Expand x^m (1 − x)^m.
        let mut coeffs = vec![0.0; 2 * m + 1];
        for j in 0..=m {
            let binom = factorial(m) / (factorial(j) * factorial(m - j));
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[m + j] = sign * binom;
        }
        ScalarPath::new(PathForm::PolyBump { coeffs, lo: 0.0, hi: 1.0 }, Interval { a: 0.0, b })
    }

    pub fn custom(c: CustomPath, interval: Interval) -> Self {
        ScalarPath::new(PathForm::Custom(c), interval)
    }

    /// Same function viewed on a different interval.
    pub fn with_interval(&self, interval: Interval) -> Self {
        ScalarPath { form: self.form.clone(), interval }
    }

    /// `λ·F`
    pub fn scaled(&self, lambda: f64) -> Self {
        let form = match &self.form {
            PathForm::PowerCutoff { coef, sigma, lo, hi } => PathForm::PowerCutoff { coef: coef * lambda, sigma: *sigma, lo: *lo, hi: *hi },
            PathForm::PolyExp { coeffs, rate } => PathForm::PolyExp { coeffs: coeffs.iter().map(|c| c * lambda).collect(), rate: *rate },
            PathForm::PolyBump { coeffs, lo, hi } => {
                PathForm::PolyBump { coeffs: coeffs.iter().map(|c| c * lambda).collect(), lo: *lo, hi: *hi }
            }
            PathForm::Step { grid, values } => PathForm::Step { grid: grid.clone(), values: values.iter().map(|v| v * lambda).collect() },
            PathForm::Sampled { grid, values } => {
                PathForm::Sampled { grid: grid.clone(), values: values.iter().map(|v| v * lambda).collect() }
            }
            PathForm::Custom(c) => {
                let f = c.f.clone();
                let mut out = CustomPath::new(format!("{}*{lambda}", c.name), move |x| lambda * f(x));
                for d in &c.derivatives {
                    let d = d.clone();
                    out = out.with_derivative(move |x| lambda * d(x));
                }
                if let Some(a) = &c.antiderivative {
                    let a = a.clone();
                    out = out.with_antiderivative(move |x| lambda * a(x));
                }
                out.breakpoints = c.breakpoints.clone();
                out.support = c.support;
                PathForm::Custom(out)
            }
        };
        ScalarPath { form, interval: self.interval }
    }

    /// Euclidean norm `x ↦ ‖(F₁(x), …, F_d(x))‖` of a vector path.
    pub fn norm_of(components: &[ScalarPath]) -> Self {
        let interval = components.first().map(|c| c.interval).unwrap_or_else(Interval::half_line);
        let parts: Vec<ScalarPath> = components.to_vec();
        let mut bps: Vec<f64> = parts.iter().flat_map(|c| c.breakpoints()).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let custom = CustomPath::new("norm", move |x| parts.iter().map(|c| c.value(x).powi(2)).sum::<f64>().sqrt()).with_breakpoints(bps);
        ScalarPath::custom(custom, interval)
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.form {
            PathForm::PowerCutoff { coef, sigma, lo, hi } => {
                if x >= *lo && x <= *hi {
                    coef * x.powf(*sigma)
                } else {
                    0.0
                }
            }
            PathForm::PolyExp { coeffs, rate } => {
                let p = horner(coeffs, x);
                if *rate == 0.0 {
                    p
                } else {
                    p * (-rate * x).exp()
                }
            }
            PathForm::PolyBump { coeffs, lo, hi } => {
                if x >= *lo && x <= *hi {
                    horner(coeffs, x)
                } else {
                    0.0
                }
            }
            PathForm::Step { grid, values } => {
                let m = grid.len();
                if x < grid[0] || x >= grid[m - 1] {
                    0.0
                } else {
                    values[grid.partition_point(|&g| g <= x) - 1]
                }
            }
            PathForm::Sampled { grid, values } => {
                let m = grid.len();
                if x < grid[0] || x > grid[m - 1] {
                    0.0
                } else if x == grid[m - 1] {
                    values[m - 1]
                } else {
                    let i = grid.partition_point(|&g| g <= x) - 1;
                    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
                    values[i] + t * (values[i + 1] - values[i])
                }
            }
            PathForm::Custom(c) => (c.f)(x),
        }
    }

    /// Closed interval outside of which the path vanishes, clipped to the
    /// path interval.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = match &self.form {
            PathForm::PowerCutoff { lo, hi, .. } | PathForm::PolyBump { lo, hi, .. } => (*lo, *hi),
            PathForm::Step { grid, .. } | PathForm::Sampled { grid, .. } => (grid[0], grid[grid.len() - 1]),
            PathForm::PolyExp { .. } => (self.interval.a, self.interval.b),
            PathForm::Custom(c) => c.support.unwrap_or((self.interval.a, self.interval.b)),
        };
        (lo.max(self.interval.a), hi.min(self.interval.b))
    }

    /// Points inside the interval where the path is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match &self.form {
            PathForm::PowerCutoff { lo, hi, .. } | PathForm::PolyBump { lo, hi, .. } => vec![*lo, *hi],
            PathForm::Step { grid, .. } | PathForm::Sampled { grid, .. } => grid.clone(),
            PathForm::PolyExp { .. } => Vec::new(),
            PathForm::Custom(c) => c.breakpoints.clone(),
        };
        v.retain(|&x| x.is_finite() && self.interval.contains_open(x));
        v
    }

    /// Exponent `γ` with `F(x) ~ (x − x0)^γ` at a finite end of the support,
    /// or `F(x) ~ x^γ` as `x0 = ∞`; 0 when unknown or regular.
    pub fn local_exponent(&self, x0: f64) -> f64 {
        match &self.form {
            PathForm::PowerCutoff { sigma, lo, .. } if x0 == 0.0 && *lo == 0.0 => *sigma,
            PathForm::PowerCutoff { sigma, hi, .. } if x0 == INF && *hi == INF => *sigma,
            _ => 0.0,
        }
    }

    /// `∫_lo^hi F` in closed form. `Some(∞)` flags a divergent integral;
    /// `None` means no closed form is available.
    pub fn exact_integral(&self, lo: f64, hi: f64) -> Option<f64> {
        if lo > hi {
            return self.exact_integral(hi, lo).map(|v| -v);
        }
        let (s_lo, s_hi) = self.support();
        let (lo, hi) = (lo.max(s_lo), hi.min(s_hi));
        if !(lo < hi) {
            return Some(0.0);
        }
        match &self.form {
            PathForm::PowerCutoff { coef, sigma, .. } => {
                if lo < 0.0 {
                    return None;
                }
                Some(power_integral(*sigma, lo, hi).map(|v| coef * v).unwrap_or(INF))
            }
            PathForm::PolyExp { coeffs, rate } => {
                if *rate == 0.0 {
                    if hi == INF || lo == -INF {
                        return Some(if coeffs.iter().all(|&c| c == 0.0) { 0.0 } else { INF });
                    }
                    return Some(poly_integral(coeffs, lo, hi));
                }
                if lo < 0.0 {
                    return None;
                }
                Some(coeffs.iter().enumerate().map(|(k, &c)| if c == 0.0 { 0.0 } else { c * exp_moment(k, *rate, lo, hi) }).sum())
            }
            PathForm::PolyBump { coeffs, .. } => Some(poly_integral(coeffs, lo, hi)),
            PathForm::Step { grid, values } => {
                let mut acc = 0.0;
                for i in 0..values.len() {
                    let (g0, g1) = (grid[i].max(lo), grid[i + 1].min(hi));
                    if g1 > g0 {
                        acc += values[i] * (g1 - g0);
                    }
                }
                Some(acc)
            }
            PathForm::Sampled { grid, .. } => {
                let mut acc = 0.0;
                for i in 0..grid.len() - 1 {
                    let (g0, g1) = (grid[i].max(lo), grid[i + 1].min(hi));
                    if g1 > g0 {
                        acc += 0.5 * (self.value(g0) + self.value(g1)) * (g1 - g0);
                    }
                }
                Some(acc)
            }
            PathForm::Custom(c) => c.antiderivative.as_ref().map(|a| a(hi) - a(lo)),
        }
    }

    /// The `n`-th derivative as a path, when an exact one is available.
    /// Cutoff discontinuities are ignored: the result is the classical
    /// derivative away from the cut points.
    pub fn derivative_path(&self, n: usize) -> Option<ScalarPath> {
        if n == 0 {
            return Some(self.clone());
        }
        let form = match &self.form {
            PathForm::PowerCutoff { coef, sigma, lo, hi } => {
                let mut c = *coef;
                let mut s = *sigma;
                for _ in 0..n {
                    c *= s;
                    s -= 1.0;
                }
                PathForm::PowerCutoff { coef: c, sigma: s, lo: *lo, hi: *hi }
            }
            PathForm::PolyExp { coeffs, rate } => {
                let mut cs = coeffs.clone();
                for _ in 0..n {
                    let d = poly_derivative(&cs);
                    let mut next = vec![0.0; cs.len().max(d.len())];
                    for (k, v) in d.iter().enumerate() {
                        next[k] += v;
                    }
                    for (k, v) in cs.iter().enumerate() {
                        next[k] -= rate * v;
                    }
                    cs = next;
                }
                PathForm::PolyExp { coeffs: cs, rate: *rate }
            }
            PathForm::PolyBump { coeffs, lo, hi } => {
                let mut cs = coeffs.clone();
                for _ in 0..n {
                    cs = poly_derivative(&cs);
                }
                if cs.is_empty() {
                    cs.push(0.0);
                }
                PathForm::PolyBump { coeffs: cs, lo: *lo, hi: *hi }
            }
            PathForm::Sampled { grid, values } if n == 1 => {
                let slopes = (0..grid.len() - 1).map(|i| (values[i + 1] - values[i]) / (grid[i + 1] - grid[i])).collect();
                PathForm::Step { grid: grid.clone(), values: slopes }
            }
            PathForm::Step { .. } | PathForm::Sampled { .. } => return None,
            PathForm::Custom(c) => {
                if c.derivatives.len() < n {
                    return None;
                }
                let mut out = CustomPath {
                    name: format!("{}^({n})", c.name),
                    f: c.derivatives[n - 1].clone(),
                    derivatives: c.derivatives[n..].to_vec(),
                    antiderivative: None,
                    breakpoints: c.breakpoints.clone(),
                    support: c.support,
                };
                if n == 1 {
                    out.antiderivative = Some(c.f.clone());
                } else {
                    out.antiderivative = Some(c.derivatives[n - 2].clone());
                }
                PathForm::Custom(out)
            }
        };
        Some(ScalarPath { form, interval: self.interval })
    }

    /// Checks grids and parameters.
    pub fn validate(&self) -> Result<(), String> {
        match &self.form {
            PathForm::Step { grid, values } => {
                if grid.len() < 2 || values.len() + 1 != grid.len() {
                    return Err("step path needs m+1 grid points for m values".into());
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err("step grid must be strictly ascending".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err("step values must be finite".into());
                }
            }
            PathForm::Sampled { grid, values } => {
                if grid.len() < 2 || values.len() != grid.len() {
                    return Err("sampled path needs one value per grid point".into());
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err("sampled grid must be strictly ascending".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err("sampled values must be finite".into());
                }
            }
            PathForm::PolyExp { rate, .. } if !(*rate >= 0.0) => return Err("decay rate must be nonnegative".into()),
            PathForm::PowerCutoff { lo, hi, .. } | PathForm::PolyBump { lo, hi, .. } if !(lo < hi) => {
                return Err("cutoff interval is empty".into())
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadConfig};

    #[test]
    fn gamma_pieces_agree_with_quadrature() {
        let cfg = QuadConfig::default();
        for k in 0..5 {
            for &(lo, hi) in &[(0.0, 0.3), (0.0, 7.0), (2.0, 9.0), (6.0, INF), (1e-9, 1e-3)] {
                let exact = exp_moment(k, 1.5, lo, hi);
                let q = integrate(|t| t.powi(k as i32) * (-1.5 * t).exp(), lo, hi, &cfg).unwrap().value;
                assert!((exact - q).abs() <= 1e-13 * q.abs().max(1e-300) + 1e-300, "k={k} [{lo},{hi}] {exact} {q}");
            }
        }
    }

    #[test]
    fn bump_expansion() {
        let b = ScalarPath::bump(4, 1.0);
        let x = 0.3f64;
        assert!((b.value(x) - (x * (1.0 - x)).powi(4)).abs() < 1e-15);
        assert_eq!(b.value(1.5), 0.0);
        // ∫ (x(1−x))^4 = B(5,5) = 1/630
        assert!((b.exact_integral(0.0, 1.0).unwrap() - 1.0 / 630.0).abs() < 1e-15);
    }

    #[test]
    fn polyexp_derivative() {
        let f = ScalarPath::new(PathForm::PolyExp { coeffs: vec![0.0, 1.0], rate: 2.0 }, Interval::half_line());
        let d = f.derivative_path(2).unwrap();
        // (x e^{−2x})'' = (4x − 4) e^{−2x}
        let x = 0.7f64;
        assert!((d.value(x) - (4.0 * x - 4.0) * (-2.0 * x).exp()).abs() < 1e-14);
    }

    #[test]
    fn step_and_sampled_integrals() {
        let s = ScalarPath::new(PathForm::Step { grid: vec![1.0, 2.0, 4.0], values: vec![3.0, 1.0] }, Interval::half_line());
        assert_eq!(s.exact_integral(0.0, INF), Some(5.0));
        assert_eq!(s.exact_integral(1.5, 3.0), Some(2.5));
        let l = ScalarPath::new(PathForm::Sampled { grid: vec![0.0, 1.0, 2.0], values: vec![0.0, 2.0, 0.0] }, Interval::half_line());
        assert_eq!(l.exact_integral(0.0, INF), Some(2.0));
        assert_eq!(l.exact_integral(0.5, 1.0), Some(0.75));
    }

    #[test]
    fn divergent_is_flagged() {
        assert_eq!(ScalarPath::constant(1.0).exact_integral(0.0, INF), Some(INF));
        let p = ScalarPath::new(PathForm::PowerCutoff { coef: 1.0, sigma: -1.0, lo: 0.0, hi: 1.0 }, Interval::half_line());
        assert_eq!(p.exact_integral(0.0, 1.0), Some(INF));
    }

    #[test]
    fn serde_round_trip() {
        let s = ScalarPath::exp_decay();
        let j = serde_json::to_string(&s).unwrap();
        let back: ScalarPath = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
