//! Both sides of the matrix inequalities for paths of the form `M_i x^γ` on
//! consecutive intervals. Left sides are exact; right sides integrate the
//! matrix power of the (exact, piecewise) Hardy transform by quadrature.

use nalgebra::Complex;
use rayon::prelude::*;

use super::linalg::{power_unchecked, CMatrix};
use super::{MatrixPath, OpError};
use crate::quadrature::{integrate_hermitian, Endpoint, QuadConfig};
use crate::Branch;

/// `∫_lo^hi x^e dx`, infinite when divergent.
pub(crate) fn power_integral(e: f64, lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    if hi.is_infinite() {
        return if e < -1.0 { -lo.powf(e + 1.0) / (e + 1.0) } else { f64::INFINITY };
    }
    if lo == 0.0 {
        return if e > -1.0 { hi.powf(e + 1.0) / (e + 1.0) } else { f64::INFINITY };
    }
    if e == -1.0 {
        (hi / lo).ln()
    } else {
        (hi.powf(e + 1.0) - lo.powf(e + 1.0)) / (e + 1.0)
    }
}

fn real(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

#[derive(Debug, Clone)]
struct Piece {
    lo: f64,
    hi: f64,
    m: CMatrix,
}

/// `F(x) = M_i x^γ` on `[lo_i, hi_i)`, zero elsewhere; pieces ascending.
#[derive(Debug, Clone)]
pub(crate) struct PowerSteps {
    dim: usize,
    gamma: f64,
    pieces: Vec<Piece>,
}

pub(crate) struct Sides {
    pub lhs: CMatrix,
    /// Right-hand integral without the constant.
    pub rhs_integral: CMatrix,
    pub err: f64,
}

#[derive(Debug, Clone)]
enum Form {
    Const(CMatrix),
    /// `base + slope·∫ t^γ` from `anchor` towards `x`.
    Ramp {
        base: CMatrix,
        slope: CMatrix,
        gamma: f64,
        anchor: f64,
    },
    /// `Σ c_j |x − origin|^j`
    Poly {
        origin: f64,
        coeffs: Vec<CMatrix>,
    },
}

#[derive(Debug, Clone)]
struct Segment {
    lo: f64,
    hi: f64,
    form: Form,
}

impl Segment {
    fn eval(&self, x: f64) -> CMatrix {
        match &self.form {
            Form::Const(m) => m.clone(),
            Form::Ramp { base, slope, gamma, anchor } => {
                let w = if x >= *anchor { power_integral(*gamma, *anchor, x) } else { power_integral(*gamma, x, *anchor) };
                base + slope * real(w)
            }
            Form::Poly { origin, coeffs } => {
                let u = (x - origin).abs();
                let mut acc = coeffs[coeffs.len() - 1].clone();
                for c in coeffs.iter().rev().skip(1) {
                    acc = acc * real(u) + c;
                }
                acc
            }
        }
    }

    fn degree(&self) -> usize {
        match &self.form {
            Form::Const(_) => 0,
            Form::Ramp { .. } => 1,
            Form::Poly { coeffs, .. } => coeffs.len() - 1,
        }
    }

    /// `∫ x^e f(H(x)) dx` over the segment, with its error estimate.
    fn integrate(&self, dim: usize, e: f64, p: f64, absolute: bool, cfg: &QuadConfig) -> Result<(CMatrix, f64), OpError> {
        if let Form::Const(m) = &self.form {
            if is_zero(m) {
                return Ok((CMatrix::zeros(dim, dim), 0.0));
            }
            let w = power_integral(e, self.lo, self.hi);
            if w.is_infinite() {
                let endpoint = if self.hi.is_infinite() { self.hi } else { self.lo };
                return Err(OpError::Divergent { endpoint });
            }
            return Ok((power_unchecked(m, p, absolute) * real(w), 0.0));
        }
        let mut c = cfg.clone().without_hints();
        if self.lo == 0.0 && e != 0.0 {
            if e <= -1.0 {
                return Err(OpError::Divergent { endpoint: 0.0 });
            }
            c = c.with_hint(Endpoint::Lower, e);
        }
        if self.hi.is_infinite() {
            let tail = e + p * self.degree() as f64;
            if tail >= -1.0 {
                return Err(OpError::Divergent { endpoint: self.hi });
            }
            c = c.with_tail_hint(Endpoint::Upper, tail);
        }
        let r = integrate_hermitian(|x| power_unchecked(&self.eval(x), p, absolute) * real(x.powf(e)), dim, self.lo, self.hi, &[], &c)?;
        Ok((r.value, r.err_estimate))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Coefficients in `u` of `I_ℓ(x0 + u)` given `I_1..I_ℓ` at `x0` and the
/// step value `f` on the segment.
fn taylor_coeffs(moments: &[CMatrix], f: Option<&CMatrix>, order: usize) -> Vec<CMatrix> {
    let mut coeffs: Vec<CMatrix> = (0..order).map(|m| &moments[order - 1 - m] * real(1.0 / factorial(m))).collect();
    if let Some(f) = f {
        coeffs.push(f * real(1.0 / factorial(order)));
    }
    coeffs
}

/// `I_k(x0 + h)` for all `k` from the values at `x0`.
fn taylor_shift(moments: &[CMatrix], f: &CMatrix, h: f64) -> Vec<CMatrix> {
    (1..=moments.len())
        .map(|k| {
            let mut acc = f * real(h.powi(k as i32) / factorial(k));
            for j in 1..=k {
                acc += &moments[j - 1] * real(h.powi((k - j) as i32) / factorial(k - j));
            }
            acc
        })
        .collect()
}

impl PowerSteps {
    /// Step path restricted to `(0, b)`.
    pub fn from_path(f: &MatrixPath, b: f64) -> Self {
        let pieces = f
            .grid()
            .windows(2)
            .zip(f.values())
            .filter(|(w, _)| w[0] < b)
            .map(|(w, m)| Piece { lo: w[0], hi: w[1].min(b), m: m.clone() })
            .collect();
        PowerSteps { dim: f.dim(), gamma: 0.0, pieces }
    }

    /// `G(x) = F(x^{1/s}) x^γ` for a step path `F`.
    pub fn substituted(&self, s: f64, gamma: f64) -> Self {
        let pieces = self.pieces.iter().map(|q| Piece { lo: q.lo.powf(s), hi: q.hi.powf(s), m: q.m.clone() }).collect();
        PowerSteps { dim: self.dim, gamma, pieces }
    }

    /// `G(y) = F(1/y) y^{−2}` for a step path `F`.
    pub fn reflected(&self) -> Self {
        let pieces = self.pieces.iter().rev().map(|q| Piece { lo: 1.0 / q.hi, hi: 1.0 / q.lo, m: q.m.clone() }).collect();
        PowerSteps { dim: self.dim, gamma: -2.0, pieces }
    }

    fn first_order_segments(&self, branch: Branch, b: f64) -> Vec<Segment> {
        let zero = CMatrix::zeros(self.dim, self.dim);
        let mut segs = Vec::new();
        let mut acc = zero.clone();
        match branch {
            Branch::Minus => {
                let mut cursor = 0.0;
                for q in &self.pieces {
                    if q.lo > cursor && !is_zero(&acc) {
                        segs.push(Segment { lo: cursor, hi: q.lo, form: Form::Const(acc.clone()) });
                    }
                    let form = Form::Ramp { base: acc.clone(), slope: q.m.clone(), gamma: self.gamma, anchor: q.lo };
                    segs.push(Segment { lo: q.lo, hi: q.hi, form });
                    acc += &q.m * real(power_integral(self.gamma, q.lo, q.hi));
                    cursor = q.hi;
                }
                if cursor < b && !is_zero(&acc) {
                    segs.push(Segment { lo: cursor, hi: b, form: Form::Const(acc) });
                }
            }
            Branch::Plus => {
                let mut cursor = b;
                for q in self.pieces.iter().rev() {
                    if q.hi < cursor && !is_zero(&acc) {
                        segs.push(Segment { lo: q.hi, hi: cursor, form: Form::Const(acc.clone()) });
                    }
                    let form = Form::Ramp { base: acc.clone(), slope: q.m.clone(), gamma: self.gamma, anchor: q.hi };
                    segs.push(Segment { lo: q.lo, hi: q.hi, form });
                    acc += &q.m * real(power_integral(self.gamma, q.lo, q.hi));
                    cursor = q.lo;
                }
                if cursor > 0.0 && !is_zero(&acc) {
                    segs.push(Segment { lo: 0.0, hi: cursor, form: Form::Const(acc) });
                }
            }
        }
        segs
    }

    /// Segments of `H∓,ℓ F` for a step path (`γ = 0`, contiguous pieces).
    fn iterated_segments(&self, branch: Branch, order: usize, b: f64) -> Vec<Segment> {
        let zero = CMatrix::zeros(self.dim, self.dim);
        let mut moments = vec![zero; order];
        let mut segs = Vec::new();
        let Some((first, last)) = self.pieces.first().zip(self.pieces.last()) else {
            return segs;
        };
        match branch {
            Branch::Minus => {
                for q in &self.pieces {
                    let coeffs = taylor_coeffs(&moments, Some(&q.m), order);
                    segs.push(Segment { lo: q.lo, hi: q.hi, form: Form::Poly { origin: q.lo, coeffs } });
                    moments = taylor_shift(&moments, &q.m, q.hi - q.lo);
                }
                if last.hi < b {
                    let coeffs = taylor_coeffs(&moments, None, order);
                    segs.push(Segment { lo: last.hi, hi: b, form: Form::Poly { origin: last.hi, coeffs } });
                }
            }
            Branch::Plus => {
                for q in self.pieces.iter().rev() {
                    let coeffs = taylor_coeffs(&moments, Some(&q.m), order);
                    segs.push(Segment { lo: q.lo, hi: q.hi, form: Form::Poly { origin: q.hi, coeffs } });
                    moments = taylor_shift(&moments, &q.m, q.hi - q.lo);
                }
                let coeffs = taylor_coeffs(&moments, None, order);
                segs.push(Segment { lo: 0.0, hi: first.lo, form: Form::Poly { origin: first.lo, coeffs } });
            }
        }
        segs
    }

    /// Left side `∫ x^α f(F)` and right integral `∫ x^{α−ℓp} f(H∓,ℓ F)` over
    /// `(0, b)`, with `f = |·|^p` when `absolute` and `(·)^p` otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn sides(
        &self,
        branch: Branch,
        order: usize,
        alpha: f64,
        p: f64,
        b: f64,
        absolute: bool,
        cfg: &QuadConfig,
    ) -> Result<Sides, OpError> {
        let d = self.dim;
        let mut lhs = CMatrix::zeros(d, d);
        for q in &self.pieces {
            if is_zero(&q.m) {
                continue;
            }
            let w = power_integral(alpha + p * self.gamma, q.lo, q.hi);
            if w.is_infinite() {
                return Err(OpError::Divergent { endpoint: q.lo });
            }
            lhs += power_unchecked(&q.m, p, absolute) * real(w);
        }
        let segs = if order == 1 {
            self.first_order_segments(branch, b)
        } else {
            debug_assert!(self.gamma == 0.0);
            self.iterated_segments(branch, order, b)
        };
        let e = alpha - order as f64 * p;
        let parts: Vec<(CMatrix, f64)> = segs.par_iter().map(|s| s.integrate(d, e, p, absolute, cfg)).collect::<Result<_, _>>()?;
        let mut rhs_integral = CMatrix::zeros(d, d);
        let mut err = 0.0;
        for (m, e) in parts {
            rhs_integral += m;
            err += e;
        }
        Ok(Sides { lhs: super::symmetrize(&lhs), rhs_integral: super::symmetrize(&rhs_integral), err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_integrals() {
        assert!((power_integral(-1.0, 1.0, 2.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(power_integral(-3.0, 2.0, f64::INFINITY), 0.125);
        assert_eq!(power_integral(-1.0, 2.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(power_integral(1.0, 0.0, 2.0), 2.0);
        assert_eq!(power_integral(-1.0, 0.0, 2.0), f64::INFINITY);
    }

    #[test]
    fn taylor_shift_matches_kernel() {
        // F = 1 on [0, h): I_k(h) = h^k / k!.
        let one = CMatrix::identity(1, 1);
        let m = taylor_shift(&[CMatrix::zeros(1, 1), CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)], &one, 2.0);
        let got: Vec<f64> = m.iter().map(|x| x[(0, 0)].re).collect();
        assert_eq!(got, vec![2.0, 2.0, 8.0 / 6.0]);
        let seg = Segment { lo: 0.0, hi: 1.0, form: Form::Poly { origin: 1.0, coeffs: taylor_coeffs(&m, None, 3) } };
        // Past the step, I_3(2 + u) = 4/3 + 2u + u^2.
        assert!((seg.eval(0.5)[(0, 0)].re - (8.0 / 6.0 + 1.0 + 0.25)).abs() < 1e-14);
    }
}
