//! Acceptance criteria, one pass/fail line each.

use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hardy_core::constants::{a_tilde_closed_form, a_tilde_maximizer_level, monotone_pair_a_tilde};
use hardy_core::hardy::ScalarPath;
use hardy_core::opvalued::{check_operator_ineq, counterexample_search, random_psd_path, CounterexampleConfig, LoewnerVerdict, OpError};
use hardy_core::quadrature::{QuadConfig, SupLocation};
use hardy_core::verify::{check_power, sharpness_probe, Verdict};
use hardy_core::weights::{Interval, MonotoneWeight, Monotonicity, WeightKind, WeightSpec};
use hardy_core::Branch;
use hardy_lab::sweep::{run_cells, Cell, SweepConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

const INF: f64 = f64::INFINITY;

const CONSTANT_TOL: f64 = 1e-6;
const CONSTANT_TIME: Duration = Duration::from_secs(1);
const PAIR_TOL: f64 = 1e-6;
const MAXIMIZER_TOL: f64 = 1e-4;
const PAIR_TIME: Duration = Duration::from_secs(30);
const LADDER: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];
const LADDER_FLOOR: f64 = 0.95;
const LADDER_TOL: f64 = 1e-6;
const SWEEP_CELLS: usize = 200;
const SWEEP_TIME: Duration = Duration::from_secs(300);
const FRULLANI_TOL: f64 = 1e-8;
const SEEDS_PER_CELL: u64 = 1000;
const LOEWNER_TOL: f64 = 1e-8;
const SCALAR_AGREEMENT: f64 = 1e-9;
const OPERATOR_TIME: Duration = Duration::from_secs(300);
const SEARCH_BUDGET: usize = 100_000;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardy-lab"))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| v.to_string().trim_matches('"').parse().unwrap())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn classical_constant(dir: &Path) -> Outcome {
    let out = dir.join("constant.json");
    let start = Instant::now();
    let status = bin()
        .args(["constant", "--kind", "power", "--p", "2", "--alpha", "0", "--direction", "minus", "--json"])
        .arg(&out)
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    let r = &read_json(&out)["result"];
    let (a, lo, hi) = (num(&r["A"]), num(&r["C0_lower"]), num(&r["C0_upper"]));
    let sharp = num(&r["optimal_constant"]).powf(-0.5);
    let pass = status.status.code() == Some(0)
        && (a - 1.0).abs() < CONSTANT_TOL
        && (lo - 1.0).abs() < CONSTANT_TOL
        && (hi - 2.0).abs() < CONSTANT_TOL
        && (hi - sharp).abs() < CONSTANT_TOL
        && elapsed < CONSTANT_TIME;
    Outcome { pass, detail: format!("A = {a:.12}, bracket [{lo:.12}, {hi:.12}], 1/sqrt(1/4) = {sharp}, {elapsed:.2?}") }
}

fn monotone_weights() -> Vec<(&'static str, WeightKind, Interval, Monotonicity)> {
    let half = Interval::half_line();
    let recip = WeightKind::ShiftedPower { shift: 1.0, alpha: -1.0 };
    let exp = WeightKind::ExpDecay { rate: 1.0 };
    let affine = |offset, scale, base: &WeightKind| WeightKind::Affine { offset, scale, base: Box::new(base.clone()) };
    use Monotonicity::*;
    vec![
        ("exp(-x)", exp.clone(), half, Decreasing),
        ("1+1/(1+x)", affine(1.0, 1.0, &recip), half, Decreasing),
        ("(1+x)^-2", WeightKind::ShiftedPower { shift: 1.0, alpha: -2.0 }, half, Decreasing),
        ("2+exp(-x)", affine(2.0, 1.0, &exp), half, Decreasing),
        ("1/x on (1,inf)", WeightKind::Power { alpha: -1.0 }, Interval::new(1.0, INF).unwrap(), Decreasing),
        ("x^2 on (0,2)", WeightKind::Power { alpha: 2.0 }, Interval::new(0.0, 2.0).unwrap(), Increasing),
        ("2-1/(1+x)", affine(2.0, -1.0, &recip), half, Increasing),
        ("x on (0,1)", WeightKind::Power { alpha: 1.0 }, Interval::new(0.0, 1.0).unwrap(), Increasing),
        ("2-exp(-x)", affine(2.0, -1.0, &exp), half, Increasing),
        ("(1+x)^0.5 on (0,3)", WeightKind::ShiftedPower { shift: 1.0, alpha: 0.5 }, Interval::new(0.0, 3.0).unwrap(), Increasing),
    ]
}

fn monotone_pair_agreement() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut worst_level, mut cases, mut interior) = (0.0f64, 0.0f64, 0, 0);
    let mut failures = Vec::new();
    for (name, kind, interval, mono) in monotone_weights() {
        let w1 = MonotoneWeight::new(WeightSpec::new(kind, interval).unwrap(), mono).unwrap();
        let w2 = WeightSpec::power(0.0, interval).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            cases += 1;
            let branch = mono.branch();
            let closed = a_tilde_closed_form(&w1, p, branch).unwrap();
            match monotone_pair_a_tilde(&w1, &w2, p, branch, &cfg()) {
                Ok(r) => {
                    let err = rel(r.a, closed);
                    worst = worst.max(err);
                    if !(err < PAIR_TOL) {
                        failures.push(format!("{name} p={p}"));
                    }
                    let level = a_tilde_maximizer_level(&w1, p);
                    if r.location == SupLocation::Interior && p > 1.0 && level > 0.0 && level.is_finite() {
                        let e = rel(w1.value(r.c_star), level);
                        worst_level = worst_level.max(e);
                        interior += 1;
                        if !(e < MAXIMIZER_TOL) {
                            failures.push(format!("{name} p={p} maximizer"));
                        }
                    }
                }
                Err(e) => failures.push(format!("{name} p={p}: {e}")),
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: failures.is_empty() && elapsed < PAIR_TIME,
        detail: format!(
            "{cases} cases, worst rel err {worst:.1e}, {interior} interior maximizers, worst level err {worst_level:.1e}, {elapsed:.2?}{}",
            if failures.is_empty() { String::new() } else { format!(", failed: {}", failures.join("; ")) }
        ),
    }
}

fn sharpness_ladders() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (p, alpha) in [(2.0, 0.0), (2.0, 0.5), (3.0, 0.0), (1.5, -1.0)] {
        match sharpness_probe(Branch::Minus, p, alpha, &LADDER, &cfg()) {
            Ok(pts) => {
                let monotone = pts.windows(2).all(|w| w[1].ratio > w[0].ratio);
                pass &= monotone;
                if (p, alpha) == (2.0, 0.0) {
                    let dev = pts.iter().map(|pt| (pt.ratio - 0.25 / (0.5 + pt.eps).powi(2)).abs()).fold(0.0, f64::max);
                    let last = pts[pts.len() - 1].ratio;
                    pass &= dev < LADDER_TOL && last > LADDER_FLOOR;
                    notes.push(format!("(2,0) last {last:.5}, dev {dev:.1e}"));
                } else {
                    notes.push(format!("({p},{alpha}) monotone {monotone}"));
                }
            }
            Err(e) => {
                pass = false;
                notes.push(format!("({p},{alpha}) {e}"));
            }
        }
    }
    Outcome { pass, detail: notes.join(", ") }
}

fn sweep_configs() -> Vec<&'static str> {
    vec![
        r#"{"schema":"hardy-lab/v1","ineq":["power-minus"],"p":[1.5,2,3],"alpha":[-0.5,0,0.25],
            "family":["exp","poly-exp","step","bump"]}"#,
        r#"{"schema":"hardy-lab/v1","ineq":["power-minus"],"p":[2.5],"alpha":[0],"family":["exp","step"]}"#,
        r#"{"schema":"hardy-lab/v1","ineq":["power-plus"],"p":[1.5,2,3],"alpha":[2.5,3,4],
            "family":["exp","poly-exp","step","bump"]}"#,
        r#"{"schema":"hardy-lab/v1","ineq":["iterated"],"p":[1.5,2,3],"alpha":[-0.5,0.25],
            "family":["exp","poly-exp","step","bump"],"order":[1,2,3],"branch":["minus"]}"#,
        r#"{"schema":"hardy-lab/v1","ineq":["birman-chain"],"p":[1.5,2,3],"alpha":[-0.5,0.25,0.7],
            "family":["bump"],"n":[1,2,3],"k":[1,2,3]}"#,
    ]
}

fn inequality_suite() -> Outcome {
    let start = Instant::now();
    let cells: Vec<Cell> = sweep_configs().iter().flat_map(|c| SweepConfig::parse(c).unwrap().cells()).collect();
    let rows = run_cells(&cells, &cfg());
    let elapsed = start.elapsed();
    let mut bad = Vec::new();
    let mut min_margin = INF;
    for (cell, row) in cells.iter().zip(&rows) {
        match row {
            Ok(r) if r.verdict != Verdict::Violated && r.margin > 0.0 => min_margin = min_margin.min(r.margin),
            Ok(r) => bad.push(format!(
                "{} p={} a={} {}: {} margin {:e}",
                cell.id.as_str(),
                cell.p,
                cell.alpha,
                cell.extra(),
                r.verdict.as_str(),
                r.margin
            )),
            Err(f) => bad.push(format!("{} p={} a={} {}: {}", cell.id.as_str(), cell.p, cell.alpha, cell.extra(), f.tag)),
        }
    }
    Outcome {
        pass: cells.len() == SWEEP_CELLS && bad.is_empty() && elapsed < SWEEP_TIME,
        detail: format!(
            "{} cells, {} not positive, min margin {min_margin:.3e}, {elapsed:.2?}{}",
            cells.len(),
            bad.len(),
            if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }
        ),
    }
}

fn frullani() -> Outcome {
    let r = check_power(Branch::Minus, 2.0, 0.0, INF, &ScalarPath::exp_decay(), &cfg()).unwrap();
    let (dl, dr) = ((r.lhs - 0.5).abs(), (r.rhs - LN_2 / 2.0).abs());
    Outcome { pass: dl < FRULLANI_TOL && dr < FRULLANI_TOL, detail: format!("lhs {:.15}, rhs {:.15}", r.lhs, r.rhs) }
}

enum CellResult {
    Checked { holds: usize, worst: f64, d1: f64 },
    Degenerate,
}

fn operator_cell(p: f64, alpha: f64) -> Result<CellResult, OpError> {
    let outcomes: Vec<Result<(bool, f64, f64), OpError>> = (0..SEEDS_PER_CELL)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_psd_path(&mut rng, 2, 2);
            let r = check_operator_ineq(Branch::Minus, p, alpha, &f, &cfg())?;
            let margin = r.relative_margin();
            let ok = r.verdict == LoewnerVerdict::LoewnerHolds && margin >= -LOEWNER_TOL;
            let g = random_psd_path(&mut rng, 1, 2);
            let m = check_operator_ineq(Branch::Minus, p, alpha, &g, &cfg())?;
            let s = check_power(Branch::Minus, p, alpha, INF, &g.diagonal_entry(0), &cfg())
                .map_err(|e| OpError::InvalidParameter(e.to_string()))?;
            let d1 = rel(m.lhs_matrix[(0, 0)].re, s.lhs).max(rel(m.rhs_matrix[(0, 0)].re, s.rhs));
            Ok((ok, margin, d1))
        })
        .collect();
    let mut holds = 0;
    let (mut worst, mut d1) = (INF, 0.0f64);
    for o in outcomes {
        match o {
            Ok((ok, m, d)) => {
                holds += ok as usize;
                worst = worst.min(m);
                d1 = d1.max(d);
            }
            Err(OpError::DegenerateExponent { .. }) => return Ok(CellResult::Degenerate),
            Err(e) => return Err(e),
        }
    }
    Ok(CellResult::Checked { holds, worst, d1 })
}

fn operator_suite() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for p in [1.0, 1.5, 2.0] {
        for alpha in [0.0, -0.5, 0.3 * (p - 1.0)] {
            match operator_cell(p, alpha) {
                Ok(CellResult::Checked { holds, worst, d1 }) => {
                    let ok = holds as u64 == SEEDS_PER_CELL && d1 < SCALAR_AGREEMENT;
                    pass &= ok;
                    if !ok {
                        notes.push(format!("({p},{alpha}) holds {holds}, worst {worst:.1e}, d=1 {d1:.1e}"));
                    }
                }
                Ok(CellResult::Degenerate) => notes.push(format!("({p},{alpha}) excluded: alpha = p-1")),
                Err(e) => {
                    pass = false;
                    notes.push(format!("({p},{alpha}) {e}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < OPERATOR_TIME;
    notes.push(format!("{elapsed:.2?}"));
    Outcome { pass, detail: notes.join(", ") }
}

fn trace_separation() -> Outcome {
    let mut c = CounterexampleConfig::new(3.0, 0.0, 0, SEARCH_BUDGET);
    c.quad = cfg();
    let start = Instant::now();
    match counterexample_search(&c) {
        Ok(o) => Outcome {
            pass: o.trace_failures == 0 && o.evaluations == SEARCH_BUDGET,
            detail: format!(
                "{} evaluations, {} trace failures, most negative Loewner margin {:.3e}, violation found {}, {:.2?}",
                o.evaluations,
                o.trace_failures,
                o.best_relative_margin,
                o.violation_found,
                start.elapsed()
            ),
        },
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn reproducibility(dir: &Path) -> Outcome {
    let sweep_cfg = dir.join("sweep.json");
    std::fs::write(&sweep_cfg, sweep_configs()[0]).unwrap();
    let runs: [(&str, Vec<String>); 3] = [
        ("counterexample", ["counterexample", "--p", "1.5", "--seed", "11", "--budget", "300", "--json"].map(String::from).to_vec()),
        ("sharpness", ["sharpness", "--branch", "minus", "--p", "2", "--alpha", "0", "--json"].map(String::from).to_vec()),
        ("sweep", vec!["sweep".into(), "--config".into(), sweep_cfg.display().to_string(), "--csv".into()]),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, args) in runs {
        let out = dir.join(format!("{name}.out"));
        let mut bodies = Vec::new();
        for _ in 0..2 {
            bin().arg("--deterministic").args(&args).arg(&out).output().unwrap();
            bodies.push(std::fs::read(&out).unwrap());
        }
        let same = bodies[0] == bodies[1] && !bodies[0].is_empty();
        pass &= same;
        notes.push(format!("{name} {}", if same { "identical" } else { "differs" }));
    }
    Outcome { pass, detail: notes.join(", ") }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("classical constant", Box::new(|| classical_constant(dir.path()))),
        ("monotone-pair closed form", Box::new(monotone_pair_agreement)),
        ("sharpness ladder", Box::new(sharpness_ladders)),
        ("inequality suite", Box::new(inequality_suite)),
        ("frullani spot value", Box::new(frullani)),
        ("operator suite", Box::new(operator_suite)),
        ("trace vs loewner at p=3", Box::new(trace_separation)),
        ("deterministic reruns", Box::new(|| reproducibility(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!("[{}] {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
