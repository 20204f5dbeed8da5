//! Grid-plus-golden-section supremum search over an open interval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupLocation {
    Interior,
    /// Best value at the lower edge of the scan; the supremum may be a limit.
    LowerEndpoint,
    UpperEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub c_star: f64,
    /// `+∞` when the objective grows without bound toward an endpoint.
    pub value: f64,
    pub location: SupLocation,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub grid_nodes: usize,
    pub refine_iterations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { grid_nodes: 512, refine_iterations: 80 }
    }
}

#[derive(Debug, Error)]
pub enum SearchError<E: std::error::Error + 'static> {
    #[error("objective failed at c = {c}: {source}")]
    Evaluation {
        c: f64,
        #[source]
        source: E,
    },
    #[error("invalid search interval ({lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("objective is undefined at every scan node")]
    NoFiniteValue,
}

/// Parametrisation `c = map(s)` of the open interval by a bounded `s` range.
#[derive(Debug, Clone, Copy)]
enum Coord {
    /// `c = lo + e^s`
    Above { lo: f64 },
    /// `c = hi − e^s`
    Below { hi: f64 },
    /// `c = lo + (hi − lo)·σ(s)`
    Logit { lo: f64, hi: f64 },
    /// `c = sinh(s)`
    Line,
}

impl Coord {
    fn new(lo: f64, hi: f64) -> (Coord, f64, f64) {
        let tiny = |x: f64| if x == 0.0 { -40.0 } else { (x.abs() * 1e-13).ln() };
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                // Reach within a relative 1e-13 of a nonzero edge.
                let w = (hi - lo).ln();
                let edge = |x: f64| if x == 0.0 { -30.0 } else { (tiny(x) - w).min(-30.0) };
                (Coord::Logit { lo, hi }, edge(lo), -edge(hi))
            }
            (true, false) => (Coord::Above { lo }, tiny(lo), 40.0 + lo.abs().max(1.0).ln()),
            (false, true) => (Coord::Below { hi }, tiny(hi), 40.0 + hi.abs().max(1.0).ln()),
            (false, false) => (Coord::Line, -40.0, 40.0),
        }
    }

    fn at(&self, s: f64) -> f64 {
        match *self {
            Coord::Above { lo } => lo + s.exp(),
            Coord::Below { hi } => hi - s.exp(),
            Coord::Logit { lo, hi } => {
                if s >= 0.0 {
                    hi - (hi - lo) / (1.0 + s.exp())
                } else {
                    lo + (hi - lo) / (1.0 + (-s).exp())
                }
            }
            Coord::Line => s.sinh(),
        }
    }

    /// Whether increasing `s` moves `c` toward the upper end.
    fn ascending(&self) -> bool {
        !matches!(self, Coord::Below { .. })
    }
}

/// Approximates `sup_{lo<c<hi} g(c)`.
///
/// NaN values of `g` are skipped; `+∞` is a legal value. A coarse scan in a
/// log/logit coordinate is refined by golden-section search around the best
/// node. When the best node is at the edge of the scan and `g` is still
/// climbing there without slowing down, the supremum is reported as `+∞`.
pub fn sup_search<G, E>(g: G, lo: f64, hi: f64, cfg: &SearchConfig) -> Result<SupResult, SearchError<E>>
where
    G: Fn(f64) -> Result<f64, E> + Sync,
    E: std::error::Error + Send + 'static,
{
    if !(lo < hi) {
        return Err(SearchError::InvalidInterval { lo, hi });
    }
    let (coord, s_lo, s_hi) = Coord::new(lo, hi);
    let n = cfg.grid_nodes.max(3);
    let step = (s_hi - s_lo) / (n - 1) as f64;
    let inside = |c: f64| c > lo && c < hi;

    let eval = |s: f64| -> Result<f64, SearchError<E>> {
        let c = coord.at(s);
        if !inside(c) {
            return Ok(f64::NAN);
        }
        g(c).map_err(|source| SearchError::Evaluation { c, source })
    };

    let ss: Vec<f64> = (0..n).map(|i| s_lo + step * i as f64).collect();
    let raw: Vec<Result<f64, SearchError<E>>> = ss.par_iter().map(|&s| eval(s)).collect();
    // Sequential pass so the reported failure is the first in scan order.
    let vals: Vec<f64> = raw.into_iter().collect::<Result<_, _>>()?;
    let mut evaluations = n;

    let mut best: Option<usize> = None;
    for (i, &v) in vals.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |b| v > vals[b]) {
            best = Some(i);
        }
    }
    let mut bi = best.ok_or(SearchError::NoFiniteValue)?;
    let first_valid = vals.iter().position(|v| !v.is_nan()).unwrap();
    let last_valid = vals.iter().rposition(|v| !v.is_nan()).unwrap();
    // A plateau touching an edge of the scan is an endpoint supremum.
    if vals[last_valid] >= vals[bi] {
        bi = last_valid;
    } else if vals[first_valid] >= vals[bi] {
        bi = first_valid;
    }

    if vals[bi] == f64::INFINITY {
        return Ok(SupResult { c_star: coord.at(ss[bi]), value: f64::INFINITY, location: SupLocation::Interior, evaluations });
    }

    let at_low_s = bi == first_valid;
    let at_high_s = bi == last_valid;
    if at_low_s || at_high_s {
        // Probe growth toward the edge at widening offsets.
        let dir = if at_high_s { -1.0 } else { 1.0 };
        let s0 = ss[bi];
        let g1 = eval(s0 + 5.0 * dir)?;
        let g2 = eval(s0 + 10.0 * dir)?;
        evaluations += 2;
        let d1 = vals[bi] - g1;
        let d2 = g1 - g2;
        let location = endpoint_location(coord, at_high_s);
        let noise = 1e-8 * vals[bi].abs().max(f64::MIN_POSITIVE);
        if d1 > noise && d2 > noise && d1 >= 0.5 * d2 {
            return Ok(SupResult { c_star: coord.at(s0), value: f64::INFINITY, location, evaluations });
        }
    }

    // Golden-section refinement in s on the neighbouring bracket.
    let mut a = ss[bi.saturating_sub(1).max(first_valid)];
    let mut b = ss[(bi + 1).min(last_valid)];
    let mut best_s = ss[bi];
    let mut best_v = vals[bi];
    if b > a {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let score = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
        let mut f1 = score(eval(x1)?);
        let mut f2 = score(eval(x2)?);
        evaluations += 2;
        for _ in 0..cfg.refine_iterations {
            if f1 > best_v {
                best_v = f1;
                best_s = x1;
            }
            if f2 > best_v {
                best_v = f2;
                best_s = x2;
            }
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = score(eval(x1)?);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = score(eval(x2)?);
            }
            evaluations += 1;
            if (b - a).abs() <= 1e-14 * (1.0 + best_s.abs()) {
                break;
            }
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f > best_v {
                best_v = f;
                best_s = x;
            }
        }
    }

    let location = if bi == first_valid {
        endpoint_location(coord, false)
    } else if bi == last_valid {
        endpoint_location(coord, true)
    } else {
        SupLocation::Interior
    };
    Ok(SupResult { c_star: coord.at(best_s), value: best_v, location, evaluations })
}

fn endpoint_location(coord: Coord, high_s: bool) -> SupLocation {
    if high_s == coord.ascending() {
        SupLocation::UpperEndpoint
    } else {
        SupLocation::LowerEndpoint
    }
}
