//! Cartesian sweeps over scalar inequality cells, written as CSV.

use std::path::Path;

use hardy_core::quadrature::QuadConfig;
use hardy_core::verify::{self, InequalityId, InequalityReport, Verdict};
use hardy_core::weights::ext_real;
use hardy_core::Branch;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ErrorTag;
use crate::families::family_path;
use crate::output::{fmt_f64, to_json_line, RunManifest, SCHEMA};
use crate::CliError;

pub const CSV_HEADER: [&str; 9] = ["ineq", "p", "alpha", "extra", "lhs", "rhs", "ratio", "margin", "verdict"];

fn default_family() -> Vec<String> {
    vec!["exp".into()]
}

fn one() -> Vec<usize> {
    vec![1]
}

fn minus() -> Vec<Branch> {
    vec![Branch::Minus]
}

fn half_line() -> Vec<Bound> {
    vec![Bound(f64::INFINITY)]
}

/// Upper endpoint that accepts `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bound(#[serde(with = "ext_real")] pub f64);

/// Sweep grids. Axes that do not apply to an inequality are ignored for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: String,
    pub ineq: Vec<String>,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
    #[serde(default = "default_family")]
    pub family: Vec<String>,
    #[serde(default = "one")]
    pub order: Vec<usize>,
    #[serde(default = "minus")]
    pub branch: Vec<Branch>,
    #[serde(default = "one")]
    pub n: Vec<usize>,
    #[serde(default = "one")]
    pub k: Vec<usize>,
    #[serde(default = "half_line")]
    pub b: Vec<Bound>,
    /// Parameter of the `extremal` family.
    #[serde(default)]
    pub eps: Option<f64>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad sweep config: {e}")))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Usage(format!("unsupported schema '{}', expected '{SCHEMA}'", cfg.schema)));
        }
        for id in &cfg.ineq {
            parse_ineq(id)?;
        }
        Ok(cfg)
    }

    /// Cells in a fixed order: ineq, p, alpha, family, b, then the
    /// inequality-specific axes.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for id in &self.ineq {
            let id = parse_ineq(id).expect("checked on parse");
            for &p in &self.p {
                for &alpha in &self.alpha {
                    for family in &self.family {
                        for &Bound(b) in &self.b {
                            let base = Cell {
                                id,
                                p,
                                alpha,
                                family: family.clone(),
                                b,
                                eps: self.eps,
                                branch: None,
                                order: None,
                                n: None,
                                k: None,
                            };
                            match id {
                                InequalityId::Iterated => {
                                    for &branch in &self.branch {
                                        for &order in &self.order {
                                            out.push(Cell { branch: Some(branch), order: Some(order), ..base.clone() });
                                        }
                                    }
                                }
                                InequalityId::BirmanChain => {
                                    for &n in &self.n {
                                        for &k in self.k.iter().filter(|&&k| k <= n) {
                                            out.push(Cell { n: Some(n), k: Some(k), ..base.clone() });
                                        }
                                    }
                                }
                                _ => out.push(base),
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn parse_ineq(s: &str) -> Result<InequalityId, CliError> {
    let id: InequalityId = s.parse().map_err(CliError::Usage)?;
    match id {
        InequalityId::AdHocMinus | InequalityId::AdHocPlus => {
            Err(CliError::Usage(format!("'{s}' needs weights; use the check-adhoc subcommand")))
        }
        _ => Ok(id),
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: InequalityId,
    pub p: f64,
    pub alpha: f64,
    pub family: String,
    pub b: f64,
    pub eps: Option<f64>,
    pub branch: Option<Branch>,
    pub order: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
}

impl Cell {
    pub fn extra(&self) -> String {
        let mut parts = vec![format!("family={}", self.family)];
        if let Some(b) = self.branch {
            parts.push(b.to_string());
        }
        if let Some(l) = self.order {
            parts.push(format!("l={l}"));
        }
        if let (Some(n), Some(k)) = (self.n, self.k) {
            parts.push(format!("n={n};k={k}"));
        }
        if self.b.is_finite() {
            parts.push(format!("b={}", self.b));
        }
        parts.join(";")
    }

    pub fn evaluate(&self, cfg: &QuadConfig) -> Result<InequalityReport, Failure> {
        let (p, alpha, b) = (self.p, self.alpha, self.b);
        let branch = match self.id {
            InequalityId::PowerPlus => Branch::Plus,
            InequalityId::Iterated => self.branch.unwrap_or(Branch::Minus),
            _ => Branch::Minus,
        };
        let f = family_path(&self.family, b, branch, p, alpha, self.eps).map_err(|e| Failure {
            tag: "InvalidFamily".into(),
            numerical: false,
            message: e.to_string(),
        })?;
        let r = match self.id {
            InequalityId::PowerMinus | InequalityId::PowerPlus => verify::check_power(branch, p, alpha, b, &f, cfg),
            InequalityId::Iterated => verify::check_iterated(branch, p, alpha, self.order.unwrap_or(1), b, &f, cfg),
            InequalityId::DiffForm => verify::check_diff_form(p, alpha, &f, b, cfg),
            InequalityId::BirmanChain => verify::check_birman_chain(p, alpha, self.n.unwrap_or(1), self.k.unwrap_or(1), &f, b, cfg),
            InequalityId::AdHocMinus | InequalityId::AdHocPlus => unreachable!("rejected on parse"),
        };
        r.map_err(|e| Failure { tag: e.tag().into(), numerical: e.is_numerical(), message: e.to_string() })
    }
}

/// Error of one cell, with its tag for the verdict column.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub tag: String,
    pub numerical: bool,
    pub message: String,
}

impl From<Failure> for CliError {
    fn from(f: Failure) -> Self {
        if f.numerical {
            CliError::Numerical(f.message)
        } else {
            CliError::Usage(f.message)
        }
    }
}

/// Outcome of one cell: a report, or the error that stopped it.
pub type Row = Result<InequalityReport, Failure>;

/// Runs every cell in the current pool; rows keep the cell order.
pub fn run_cells(cells: &[Cell], cfg: &QuadConfig) -> Vec<Row> {
    cells.par_iter().map(|c| c.evaluate(cfg)).collect()
}

/// Exit code of a batch: 1 on any violation, else 3 on any numerical
/// failure or divergent cell, else 0.
pub fn batch_exit_code(rows: &[Row]) -> i32 {
    let violated = rows.iter().any(|r| matches!(r, Ok(rep) if rep.verdict == Verdict::Violated));
    let numerical = rows.iter().any(|r| match r {
        Ok(rep) => rep.verdict == Verdict::InconclusiveDivergent,
        Err(f) => f.numerical,
    });
    if violated {
        1
    } else if numerical {
        3
    } else {
        0
    }
}

/// CSV with the manifest as leading `#` comment lines.
pub fn write_csv(manifest: &RunManifest, cells: &[Cell], rows: &[Row]) -> Result<String, CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let manifest_json = to_json_line(manifest)?;
    let mut out = format!("# schema: {SCHEMA}\n# manifest: {manifest_json}\n");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(io)?;
    for (cell, row) in cells.iter().zip(rows) {
        let head = [cell.id.as_str().to_string(), fmt_f64(cell.p), fmt_f64(cell.alpha), cell.extra()];
        let tail = match row {
            Ok(r) => [fmt_f64(r.lhs), fmt_f64(r.rhs), fmt_f64(r.ratio), fmt_f64(r.margin), r.verdict.as_str().to_string()],
            Err(f) => [String::new(), String::new(), String::new(), String::new(), f.tag.clone()],
        };
        w.write_record(head.iter().chain(tail.iter())).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(out)
}

/// Writes `body` to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => crate::output::write_file(p, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
