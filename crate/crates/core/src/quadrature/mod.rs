//! Adaptive Gauss–Kronrod integration on finite, semi-infinite and
//! endpoint-singular intervals, plus the one-dimensional supremum search used
//! for Muckenhoupt functionals.
//!
//! All integrals are reduced to a finite parameter interval:
//!
//! * `[lo, ∞)` is mapped by `x = lo + s·t/(1−t)` with `s = |lo|` (or 1 when
//!   `lo = 0`), which keeps power-law tails polynomial in `t`;
//! * an endpoint singularity `(x − lo)^γ`, `γ > −1`, announced through a hint
//!   is removed by `x = lo + u^{1/(1+γ)}`.
//!
//! Every piece shares one subdivision budget and one priority queue, so the
//! result is deterministic for a given integrand and configuration.

mod kronrod;
mod matrix;
mod search;

pub use matrix::{integrate_hermitian, MatrixQuadResult};
pub use search::{sup_search, SearchConfig, SearchError, SupLocation, SupResult};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kronrod::NODES;

/// Which end of an interval a singularity hint refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Endpoint behaviour `|x − endpoint|^γ` with `γ > −1`.
    #[serde(default)]
    pub singularity_exponent_hints: Vec<(Endpoint, f64)>,
    /// Decay `|x|^γ` with `γ < −1` at an infinite endpoint.
    #[serde(default)]
    pub tail_exponent_hints: Vec<(Endpoint, f64)>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            singularity_exponent_hints: Vec::new(),
            tail_exponent_hints: Vec::new(),
        }
    }
}

impl QuadConfig {
    pub fn with_hint(mut self, endpoint: Endpoint, exponent: f64) -> Self {
        self.singularity_exponent_hints.retain(|(e, _)| *e != endpoint);
        self.singularity_exponent_hints.push((endpoint, exponent));
        self
    }

    pub fn with_tail_hint(mut self, endpoint: Endpoint, exponent: f64) -> Self {
        self.tail_exponent_hints.retain(|(e, _)| *e != endpoint);
        self.tail_exponent_hints.push((endpoint, exponent));
        self
    }

    pub fn without_hints(mut self) -> Self {
        self.singularity_exponent_hints.clear();
        self.tail_exponent_hints.clear();
        self
    }

    fn hint(&self, endpoint: Endpoint) -> Option<f64> {
        self.singularity_exponent_hints.iter().find(|(e, _)| *e == endpoint).map(|(_, g)| *g)
    }

    fn tail_hint(&self, endpoint: Endpoint) -> Option<f64> {
        self.tail_exponent_hints.iter().find(|(e, _)| *e == endpoint).map(|(_, g)| *g)
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(QuadError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::InvalidConfig("max_subdivisions must be at least 1".into()));
        }
        for &(_, g) in &self.singularity_exponent_hints {
            if !(g > -1.0) {
                return Err(QuadError::InvalidConfig(format!("singularity exponent {g} is not integrable (needs > -1)")));
            }
        }
        for &(_, g) in &self.tail_exponent_hints {
            if !(g < -1.0) {
                return Err(QuadError::InvalidConfig(format!("tail exponent {g} is not integrable (needs < -1)")));
            }
        }
        Ok(())
    }

    /// Tolerance target for a value of magnitude `scale`.
    pub fn target(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error(
        "quadrature did not converge within the subdivision budget \
         (estimate {} ± {})", partial.value, partial.err_estimate
    )]
    NonConvergent { partial: QuadResult },
    #[error("integral diverges near x = {endpoint}")]
    Divergent { endpoint: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid integration bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
}

/// Integrates a scalar function over `[lo, hi]` (either bound may be infinite).
pub fn integrate<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breakpoints(f, lo, hi, &[], cfg)
}

/// As [`integrate`], with interior points where the integrand is known to be
/// non-smooth. Points outside `(lo, hi)` are ignored.
pub fn integrate_with_breakpoints<F>(f: F, lo: f64, hi: f64, breakpoints: &[f64], cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    let out = integrate_components(|x, out: &mut [f64]| out[0] = f(x), 1, lo, hi, breakpoints, cfg)?;
    Ok(QuadResult { value: out.values[0], err_estimate: out.errors[0], subdivisions_used: out.subdivisions_used, converged: true })
}

/// Result of integrating a vector of real components over one shared
/// subdivision tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentQuad {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub subdivisions_used: usize,
}

/// Integrates `dim` real components at once. `f(x, out)` must fill `out`.
/// Panels are refined by the largest component error, and the convergence
/// test uses the max-norm of the value vector.
pub fn integrate_components<F>(
    f: F,
    dim: usize,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<ComponentQuad, QuadError>
where
    F: Fn(f64, &mut [f64]),
{
    cfg.validate()?;
    if lo.is_nan() || hi.is_nan() {
        return Err(QuadError::InvalidBounds { lo, hi });
    }
    if lo == hi {
        return Ok(ComponentQuad { values: vec![0.0; dim], errors: vec![0.0; dim], subdivisions_used: 0 });
    }
    if lo > hi {
        let mut r = integrate_components(f, dim, hi, lo, breakpoints, &mirror_hints(cfg))?;
        r.values.iter_mut().for_each(|v| *v = -*v);
        return Ok(r);
    }
    if (lo.is_infinite() && lo > 0.0) || (hi.is_infinite() && hi < 0.0) {
        return Err(QuadError::InvalidBounds { lo, hi });
    }

    let pieces = build_pieces(lo, hi, breakpoints, cfg);
    match run_adaptive(&f, dim, &pieces, cfg) {
        Ok(r) => Ok(r),
        // An integrand that overflows next to an endpoint is usually a
        // non-integrable singularity; the ladder decides.
        Err(e @ (QuadError::NonConvergent { .. } | QuadError::NonFinite { .. })) => match detect_divergence(&f, dim, lo, hi, cfg) {
            Some(endpoint) => Err(QuadError::Divergent { endpoint }),
            None => Err(e),
        },
        Err(e) => Err(e),
    }
}

fn mirror_hints(cfg: &QuadConfig) -> QuadConfig {
    let mut c = cfg.clone();
    for (e, _) in c.singularity_exponent_hints.iter_mut().chain(c.tail_exponent_hints.iter_mut()) {
        *e = match e {
            Endpoint::Lower => Endpoint::Upper,
            Endpoint::Upper => Endpoint::Lower,
        };
    }
    c
}

/// Change of variables from the parameter `t` of a piece to `x`.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = lo + u^q`, `q = 1/(1+γ)`.
    LowerSingular {
        lo: f64,
        q: f64,
    },
    /// `x = hi − u^q`.
    UpperSingular {
        hi: f64,
        q: f64,
    },
    /// `x = lo + s·t/(1−t)`, `t ∈ [0, 1)`.
    ToPlusInfinity {
        lo: f64,
        s: f64,
    },
    /// `x = hi − s·t/(1−t)`.
    ToMinusInfinity {
        hi: f64,
        s: f64,
    },
    /// `x = lo + s·(t^{−1/δ} − 1)`, flattening a `x^{−1−δ}` tail.
    PowerTailPlus {
        lo: f64,
        s: f64,
        d: f64,
    },
    /// `x = hi − s·(t^{−1/δ} − 1)`.
    PowerTailMinus {
        hi: f64,
        s: f64,
        d: f64,
    },
}

impl Map {
    /// Returns `(x, dx/dt)`; `None` when `t` maps onto the (excluded) endpoint
    /// after rounding.
    fn eval(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            Map::Identity => Some((t, 1.0)),
            Map::LowerSingular { lo, q } => {
                let d = t.powf(q);
                let x = lo + d;
                if x <= lo || t <= 0.0 {
                    None
                } else {
                    Some((x, q * d / t))
                }
            }
            Map::UpperSingular { hi, q } => {
                let d = t.powf(q);
                let x = hi - d;
                if x >= hi || t <= 0.0 {
                    None
                } else {
                    Some((x, q * d / t))
                }
            }
            Map::ToPlusInfinity { lo, s } => {
                let r = 1.0 - t;
                if r <= 0.0 {
                    return None;
                }
                let x = lo + s * t / r;
                if !x.is_finite() {
                    return None;
                }
                Some((x, s / (r * r)))
            }
            Map::ToMinusInfinity { hi, s } => {
                let r = 1.0 - t;
                if r <= 0.0 {
                    return None;
                }
                let x = hi - s * t / r;
                if !x.is_finite() {
                    return None;
                }
                Some((x, s / (r * r)))
            }
            Map::PowerTailPlus { lo, s, d } | Map::PowerTailMinus { hi: lo, s, d } => {
                if t <= 0.0 {
                    return None;
                }
                let u = t.powf(-1.0 / d);
                let off = s * (u - 1.0);
                let x = if matches!(self, Map::PowerTailPlus { .. }) { lo + off } else { lo - off };
                let jac = s / d * u / t;
                if !x.is_finite() || !jac.is_finite() {
                    return None;
                }
                Some((x, jac))
            }
        }
    }

    fn inverse(&self, x: f64) -> f64 {
        match *self {
            Map::Identity => x,
            Map::LowerSingular { lo, q } => (x - lo).powf(1.0 / q),
            Map::UpperSingular { hi, q } => (hi - x).powf(1.0 / q),
            Map::ToPlusInfinity { lo, s } => tail_parameter((x - lo) / s),
            Map::ToMinusInfinity { hi, s } => tail_parameter((hi - x) / s),
            Map::PowerTailPlus { lo, s, d } => power_tail_parameter((x - lo) / s, d),
            Map::PowerTailMinus { hi, s, d } => power_tail_parameter((hi - x) / s, d),
        }
    }
}

#[derive(Debug, Clone)]
struct Piece {
    map: Map,
    /// Parameter-space cut points, ascending, including both ends.
    cuts: Vec<f64>,
}

fn piece(map: Map, x_lo: f64, x_hi: f64, breakpoints: &[f64]) -> Piece {
    let (mut t_lo, mut t_hi) = (map.inverse(x_lo), map.inverse(x_hi));
    if t_lo > t_hi {
        std::mem::swap(&mut t_lo, &mut t_hi);
    }
    let mut cuts = vec![t_lo];
    let mut inner: Vec<f64> =
        breakpoints.iter().filter(|&&b| b > x_lo && b < x_hi).map(|&b| map.inverse(b)).filter(|&t| t > t_lo && t < t_hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(t_hi);
    Piece { map, cuts }
}

fn tail_parameter(d: f64) -> f64 {
    if d.is_infinite() {
        1.0
    } else {
        d / (1.0 + d)
    }
}

fn power_tail_parameter(r: f64, d: f64) -> f64 {
    if r.is_infinite() {
        0.0
    } else {
        (1.0 + r).powf(-d)
    }
}

/// Map toward `+∞` from `lo`, flattening a power tail when hinted.
fn plus_tail(lo: f64, tail: Option<f64>) -> Map {
    let s = infinite_scale(lo);
    match tail {
        Some(g) => Map::PowerTailPlus { lo, s, d: -1.0 - g },
        None => Map::ToPlusInfinity { lo, s },
    }
}

fn minus_tail(hi: f64, tail: Option<f64>) -> Map {
    let s = infinite_scale(hi);
    match tail {
        Some(g) => Map::PowerTailMinus { hi, s, d: -1.0 - g },
        None => Map::ToMinusInfinity { hi, s },
    }
}

fn infinite_scale(anchor: f64) -> f64 {
    anchor.abs().max(1.0)
}

fn build_pieces(lo: f64, hi: f64, bps: &[f64], cfg: &QuadConfig) -> Vec<Piece> {
    let lower_hint = if lo.is_finite() { cfg.hint(Endpoint::Lower) } else { None };
    let upper_hint = if hi.is_finite() { cfg.hint(Endpoint::Upper) } else { None };
    let q = |g: f64| 1.0 / (1.0 + g);

    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => match (lower_hint, upper_hint) {
            (None, None) => vec![piece(Map::Identity, lo, hi, bps)],
            (Some(g), None) => vec![piece(Map::LowerSingular { lo, q: q(g) }, lo, hi, bps)],
            (None, Some(g)) => vec![piece(Map::UpperSingular { hi, q: q(g) }, lo, hi, bps)],
            (Some(gl), Some(gu)) => {
                let mid = 0.5 * (lo + hi);
                vec![piece(Map::LowerSingular { lo, q: q(gl) }, lo, mid, bps), piece(Map::UpperSingular { hi, q: q(gu) }, mid, hi, bps)]
            }
        },
        (true, false) => {
            let tail = cfg.tail_hint(Endpoint::Upper);
            match lower_hint {
                None => vec![piece(plus_tail(lo, tail), lo, hi, bps)],
                Some(g) => {
                    let m = lo + infinite_scale(lo);
                    vec![piece(Map::LowerSingular { lo, q: q(g) }, lo, m, bps), piece(plus_tail(m, tail), m, hi, bps)]
                }
            }
        }
        (false, true) => {
            let tail = cfg.tail_hint(Endpoint::Lower);
            match upper_hint {
                None => vec![piece(minus_tail(hi, tail), lo, hi, bps)],
                Some(g) => {
                    let m = hi - infinite_scale(hi);
                    vec![piece(minus_tail(m, tail), lo, m, bps), piece(Map::UpperSingular { hi, q: q(g) }, m, hi, bps)]
                }
            }
        }
        (false, false) => vec![
            piece(minus_tail(0.0, cfg.tail_hint(Endpoint::Lower)), lo, 0.0, bps),
            piece(plus_tail(0.0, cfg.tail_hint(Endpoint::Upper)), 0.0, hi, bps),
        ],
    }
}

#[derive(Debug, Clone)]
struct Panel {
    piece: usize,
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    worst: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; older panels first on ties.
        self.worst.total_cmp(&other.worst).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn eval_panel<F>(
    f: &F,
    dim: usize,
    pieces: &[Piece],
    piece_idx: usize,
    lo: f64,
    hi: f64,
    seq: usize,
    scratch: &mut Vec<f64>,
) -> Result<Panel, QuadError>
where
    F: Fn(f64, &mut [f64]),
{
    let map = pieces[piece_idx].map;
    let ts = kronrod::abscissae(lo, hi);
    scratch.clear();
    scratch.resize(NODES * dim, 0.0);
    for (k, &t) in ts.iter().enumerate() {
        let row = &mut scratch[k * dim..(k + 1) * dim];
        if let Some((x, jac)) = map.eval(t) {
            f(x, row);
            for v in row.iter_mut() {
                if !v.is_finite() {
                    return Err(QuadError::NonFinite { x });
                }
                *v *= jac;
            }
            if row.iter().any(|v| !v.is_finite()) {
                // Finite integrand times an overflowing Jacobian: only possible
                // extremely close to an infinite end.
                row.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut samples = [0.0; NODES];
    for c in 0..dim {
        for k in 0..NODES {
            samples[k] = scratch[k * dim + c];
        }
        let (v, e) = kronrod::apply(&samples, 0.5 * (hi - lo));
        values[c] = v;
        errors[c] = e;
    }
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    Ok(Panel { piece: piece_idx, lo, hi, values, errors, worst, seq })
}

fn run_adaptive<F>(f: &F, dim: usize, pieces: &[Piece], cfg: &QuadConfig) -> Result<ComponentQuad, QuadError>
where
    F: Fn(f64, &mut [f64]),
{
    let mut scratch = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    for (pi, p) in pieces.iter().enumerate() {
        for w in p.cuts.windows(2) {
            if w[1] > w[0] {
                heap.push(eval_panel(f, dim, pieces, pi, w[0], w[1], seq, &mut scratch)?);
                seq += 1;
            }
        }
    }
    let mut subdivisions = 0usize;
    loop {
        let (values, errors) = totals(&heap, dim);
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let err = errors.iter().cloned().fold(0.0, f64::max);
        if err <= cfg.target(scale) {
            return Ok(ComponentQuad { values, errors, subdivisions_used: subdivisions });
        }
        let partial = || QuadResult { value: values[0], err_estimate: err, subdivisions_used: subdivisions, converged: false };
        if subdivisions >= cfg.max_subdivisions {
            return Err(QuadError::NonConvergent { partial: partial() });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Panel too narrow to split further in floating point.
            heap.push(worst);
            return Err(QuadError::NonConvergent { partial: partial() });
        }
        let left = eval_panel(f, dim, pieces, worst.piece, worst.lo, mid, seq, &mut scratch)?;
        let right = eval_panel(f, dim, pieces, worst.piece, mid, worst.hi, seq + 1, &mut scratch)?;
        seq += 2;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Sums panel contributions in a fixed order (piece, then position) so the
/// result does not depend on heap layout.
fn totals(heap: &BinaryHeap<Panel>, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|a, b| a.piece.cmp(&b.piece).then(a.lo.total_cmp(&b.lo)));
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for p in panels {
        for c in 0..dim {
            values[c] += p.values[c];
            errors[c] += p.errors[c];
        }
    }
    (values, errors)
}

/// Growth test on a ladder of truncations approaching each endpoint. The
/// truncation points approach the endpoint doubly exponentially, so a
/// logarithmic divergence doubles each increment; three successive doublings
/// are taken as divergence.
fn detect_divergence<F>(f: &F, dim: usize, lo: f64, hi: f64, cfg: &QuadConfig) -> Option<f64>
where
    F: Fn(f64, &mut [f64]),
{
    const DOUBLING: f64 = 1.9;
    let ladder_cfg = QuadConfig {
        rel_tol: cfg.rel_tol.max(1e-8),
        abs_tol: cfg.abs_tol,
        max_subdivisions: cfg.max_subdivisions,
        singularity_exponent_hints: Vec::new(),
        tail_exponent_hints: Vec::new(),
    };
    let grows = |points: &[f64]| -> bool {
        let mut incs = Vec::new();
        for w in points.windows(2) {
            let (a, b) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            if !(b > a) {
                return false;
            }
            let pieces = build_pieces(a, b, &[], &ladder_cfg);
            match run_adaptive(f, dim, &pieces, &ladder_cfg) {
                Ok(r) => incs.push(r.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
                Err(QuadError::NonConvergent { partial }) => incs.push(partial.value.abs()),
                Err(_) => return false,
            }
        }
        incs.len() >= 4 && incs.windows(2).skip(incs.len() - 4).all(|w| w[1] >= DOUBLING * w[0] && w[1] > 0.0)
    };

    let width = if lo.is_finite() && hi.is_finite() { 0.5 * (hi - lo) } else { f64::INFINITY };
    let h = width.min(1.0);
    let exps = [1.0, 2.0, 4.0, 8.0, 16.0];

    if lo.is_finite() {
        let pts: Vec<f64> = exps.iter().map(|&k| lo + h * 10f64.powf(-k)).collect();
        if grows(&pts) {
            return Some(lo);
        }
    } else {
        let anchor = if hi.is_finite() { hi.min(0.0) } else { 0.0 };
        let pts: Vec<f64> = exps.iter().map(|&k| anchor - 10f64.powf(k)).collect();
        if grows(&pts) {
            return Some(lo);
        }
    }
    if hi.is_finite() {
        let pts: Vec<f64> = exps.iter().map(|&k| hi - h * 10f64.powf(-k)).collect();
        if grows(&pts) {
            return Some(hi);
        }
    } else {
        let anchor = if lo.is_finite() { lo.max(0.0) } else { 0.0 };
        let pts: Vec<f64> = exps.iter().map(|&k| anchor + 10f64.powf(k)).collect();
        if grows(&pts) {
            return Some(hi);
        }
    }
    None
}
