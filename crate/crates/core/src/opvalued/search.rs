use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{power_unchecked, spectral_norm, CMatrix};
use super::{operator_report, LoewnerReport, LoewnerVerdict, MatrixPath, OpError};
use crate::quadrature::QuadConfig;
use crate::Branch;

fn gaussian_matrix<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Random PSD matrix: a scaled rank-one projector or a Wishart sample, with
/// equal probability.
pub fn random_psd<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let amplitude = rng.sample::<f64, _>(StandardNormal).exp();
    if rng.random_bool(0.5) {
        let v = gaussian_matrix(rng, dim).column(0).into_owned();
        let n = v.norm_squared();
        super::symmetrize(&(&v * v.adjoint() * Complex::new(amplitude / n, 0.0)))
    } else {
        let g = gaussian_matrix(rng, dim);
        super::symmetrize(&(&g * g.adjoint() * Complex::new(amplitude / dim as f64, 0.0)))
    }
}

/// Random PSD step path with `n_steps` values and log-uniform step lengths.
pub fn random_psd_path<R: Rng>(rng: &mut R, dim: usize, n_steps: usize) -> MatrixPath {
    let mut grid = vec![rng.random_range(-1.0f64..1.0).exp()];
    for _ in 0..n_steps {
        let last = grid[grid.len() - 1];
        grid.push(last + rng.random_range(-1.5f64..1.5).exp());
    }
    let values = (0..n_steps).map(|_| random_psd(rng, dim)).collect();
    MatrixPath::new(grid, values).expect("random path is valid by construction")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub branch: Branch,
    pub p: f64,
    pub alpha: f64,
    pub dim: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Total number of candidate evaluations.
    pub budget: usize,
    /// Evaluations per restart before drawing a fresh random path.
    pub restart_len: usize,
    #[serde(default)]
    pub quad: QuadConfig,
}

impl CounterexampleConfig {
    pub fn new(p: f64, alpha: f64, seed: u64, budget: usize) -> Self {
        CounterexampleConfig {
            branch: Branch::Minus,
            p,
            alpha,
            dim: 2,
            n_steps: 2,
            seed,
            budget,
            restart_len: 50,
            quad: QuadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub config: CounterexampleConfig,
    pub evaluations: usize,
    pub restarts: usize,
    /// Candidates whose evaluation failed numerically.
    pub failures: usize,
    /// Most negative `min_eig_diff/‖LHS‖` found.
    pub best_relative_margin: f64,
    /// Best candidate, rescaled so that `‖LHS‖ = 1`.
    pub best: Option<LoewnerReport>,
    pub best_path: Option<MatrixPath>,
    /// ChaCha stream index of the restart that produced the best candidate.
    pub best_stream: Option<u64>,
    pub violation_found: bool,
    /// Candidates whose trace inequality failed.
    pub trace_failures: usize,
    /// Smallest `(tr LHS − tr RHS)/tr LHS` over all candidates.
    pub worst_trace_relative_margin: f64,
}

struct Candidate {
    rel: f64,
    report: LoewnerReport,
    path: MatrixPath,
}

struct RestartStats {
    best: Option<Candidate>,
    evaluations: usize,
    failures: usize,
    trace_failures: usize,
    worst_trace: f64,
}

impl RestartStats {
    fn evaluate(&mut self, cfg: &CounterexampleConfig, path: &MatrixPath) -> Option<(f64, LoewnerReport)> {
        self.evaluations += 1;
        match operator_report(cfg.branch, cfg.p, cfg.alpha, path, &cfg.quad) {
            Ok(r) => {
                if !r.trace_holds() {
                    self.trace_failures += 1;
                }
                if r.trace_lhs > 0.0 {
                    self.worst_trace = self.worst_trace.min(r.trace_margin() / r.trace_lhs);
                }
                Some((r.relative_margin(), r))
            }
            Err(_) => {
                self.failures += 1;
                None
            }
        }
    }
}

fn perturb<R: Rng>(path: &MatrixPath, rng: &mut R, sigma: f64) -> Result<MatrixPath, OpError> {
    let n = path.values().len();
    if rng.random_bool(0.75) {
        let i = rng.random_range(0..n);
        let mut values = path.values().to_vec();
        let scale = spectral_norm(&values[i]).max(1e-3);
        let h = super::symmetrize(&gaussian_matrix(rng, path.dim()));
        let moved = &values[i] + h * Complex::new(sigma * scale, 0.0);
        values[i] = power_unchecked(&moved, 1.0, false);
        path.with_values(values)
    } else {
        let k = rng.random_range(0..=n);
        let mut steps: Vec<f64> = std::iter::once(path.grid()[0]).chain(path.grid().windows(2).map(|w| w[1] - w[0])).collect();
        steps[k] *= (sigma * rng.sample::<f64, _>(StandardNormal)).exp();
        let grid = steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        path.with_grid(grid)
    }
}

fn run_restart(cfg: &CounterexampleConfig, stream: u64, len: usize) -> RestartStats {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut stats = RestartStats { best: None, evaluations: 0, failures: 0, trace_failures: 0, worst_trace: f64::INFINITY };
    let mut path = random_psd_path(&mut rng, cfg.dim, cfg.n_steps);
    let mut current = stats.evaluate(cfg, &path);
    let mut sigma = 0.3;
    let keep = |stats: &mut RestartStats, rel: f64, report: &LoewnerReport, path: &MatrixPath| {
        if stats.best.as_ref().map_or(true, |b| rel < b.rel) {
            stats.best = Some(Candidate { rel, report: report.clone(), path: path.clone() });
        }
    };
    if let Some((rel, r)) = &current {
        keep(&mut stats, *rel, r, &path);
    }
    while stats.evaluations < len {
        let Ok(next) = perturb(&path, &mut rng, sigma) else {
            stats.evaluations += 1;
            stats.failures += 1;
            continue;
        };
        let Some((rel, report)) = stats.evaluate(cfg, &next) else {
            sigma = (sigma * 0.8f64).max(1e-3);
            continue;
        };
        if current.as_ref().map_or(true, |(c, _)| rel < *c) {
            keep(&mut stats, rel, &report, &next);
            path = next;
            current = Some((rel, report));
            sigma = (sigma * 1.5f64).min(2.0);
        } else {
            sigma = (sigma * 0.8f64).max(1e-3);
        }
    }
    stats
}

/// Scales a report of a `p`-homogeneous check by `factor`.
fn rescaled(mut r: LoewnerReport, factor: f64) -> LoewnerReport {
    let c = Complex::new(factor, 0.0);
    r.lhs_matrix *= c;
    r.rhs_matrix *= c;
    r.min_eig_diff *= factor;
    r.trace_lhs *= factor;
    r.trace_rhs *= factor;
    r.quad_error *= factor;
    r.tol *= factor;
    r
}

/// Randomized search for a PSD step path violating the Loewner-order power
/// inequality: independent restarts from random paths, each followed by
/// hill descent on `min_eig_diff/‖LHS‖`. The trace inequality is checked on
/// every candidate.
pub fn counterexample_search(cfg: &CounterexampleConfig) -> Result<SearchOutcome, OpError> {
    if !(cfg.p >= 1.0 && cfg.p.is_finite()) {
        return Err(OpError::InvalidExponent(cfg.p));
    }
    if cfg.budget == 0 || cfg.dim == 0 || cfg.n_steps == 0 || cfg.restart_len == 0 {
        return Err(OpError::InvalidParameter("budget, dim, n_steps and restart_len must be positive".into()));
    }
    super::validate_exponents(cfg.branch, cfg.p, cfg.alpha, 1)?;
    let restarts = cfg.budget.div_ceil(cfg.restart_len);
    let stats: Vec<RestartStats> =
        (0..restarts).into_par_iter().map(|r| run_restart(cfg, r as u64, cfg.restart_len.min(cfg.budget - r * cfg.restart_len))).collect();

    let mut out = SearchOutcome {
        config: cfg.clone(),
        evaluations: 0,
        restarts,
        failures: 0,
        best_relative_margin: f64::INFINITY,
        best: None,
        best_path: None,
        best_stream: None,
        violation_found: false,
        trace_failures: 0,
        worst_trace_relative_margin: f64::INFINITY,
    };
    let mut best: Option<(u64, Candidate)> = None;
    for (r, s) in stats.into_iter().enumerate() {
        out.evaluations += s.evaluations;
        out.failures += s.failures;
        out.trace_failures += s.trace_failures;
        out.worst_trace_relative_margin = out.worst_trace_relative_margin.min(s.worst_trace);
        if let Some(c) = s.best {
            if best.as_ref().map_or(true, |(_, b)| c.rel < b.rel) {
                best = Some((r as u64, c));
            }
        }
    }
    if let Some((stream, c)) = best {
        let norm = spectral_norm(&c.report.lhs_matrix);
        let factor = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        let report = rescaled(c.report, factor);
        out.violation_found = report.verdict != LoewnerVerdict::LoewnerHolds;
        out.best_relative_margin = c.rel;
        out.best_path = Some(c.path.scaled(factor.powf(1.0 / cfg.p)));
        out.best = Some(report);
        out.best_stream = Some(stream);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_paths_are_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_psd_path(&mut rng, 3, 4);
            assert!(f.is_psd() && f.dim() == 3 && f.grid().len() == 5);
        }
    }

    #[test]
    fn search_is_reproducible_and_sound_at_p2() {
        let mut cfg = CounterexampleConfig::new(2.0, 0.0, 11, 120);
        cfg.restart_len = 40;
        let a = counterexample_search(&cfg).unwrap();
        let b = counterexample_search(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.evaluations, a.restarts, a.trace_failures), (120, 3, 0));
        assert!(!a.violation_found && a.best_relative_margin > -1e-8, "{a:?}");
        let best = a.best.unwrap();
        assert!((spectral_norm(&best.lhs_matrix) - 1.0).abs() < 1e-12);
    }
}
