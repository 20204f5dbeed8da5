//! Subcommand bodies. Each returns its exit code; errors map through [`CliError`].

use std::path::Path;

use hardy_core::constants::{
    a_tilde_closed_form, a_tilde_maximizer_level, monotone_pair_a_tilde, muckenhoupt_a, muckenhoupt_a_tilde, ConstantBracket, PowerParams,
};
use hardy_core::opvalued::{self, counterexample_search, CounterexampleConfig, LoewnerReport, LoewnerVerdict, MatrixPath};
use hardy_core::verify::{self, InequalityReport, Verdict};
use hardy_core::weights::{ExtReal, Interval, MonotoneWeight, Monotonicity, Weight, WeightSpec};
use hardy_core::Branch;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::families::family_path;
use crate::output::{envelope, fmt_f64, write_file, RunManifest, SCHEMA};
use crate::sweep::{self, batch_exit_code, parse_ineq, run_cells, Cell};
use crate::CliError;

/// Writes the JSON report when a path was given.
fn report<T: Serialize>(manifest: &RunManifest, path: Option<&Path>, result: &T) -> Result<(), CliError> {
    if let Some(path) = path {
        write_file(path, &envelope(manifest, result)?)?;
    }
    Ok(())
}

fn params<T: Serialize>(args: &T, global: &GlobalOpts) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let (Value::Object(map), Ok(Value::Object(g))) = (&mut v, serde_json::to_value(global)) {
        map.remove("json");
        map.remove("csv");
        for (k, x) in g {
            if k != "deterministic" {
                map.insert(k, x);
            }
        }
    }
    v
}

fn manifest<T: Serialize>(command: &str, args: &T, global: &GlobalOpts, seed: Option<u64>, out: Option<&Path>) -> RunManifest {
    RunManifest::new(command, params(args, global), seed, global.deterministic, out)
}

fn parse_weight(name: &str, text: &str) -> Result<WeightSpec, CliError> {
    let spec: WeightSpec = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--{name}: {e}")))?;
    Ok(spec.validated()?)
}

fn scalar_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Holds | Verdict::HoldsWithinError => 0,
        Verdict::Violated => 1,
        Verdict::InconclusiveDivergent => 3,
    }
}

fn e(x: f64) -> String {
    fmt_f64(x)
}

fn bracket_json(b: &ConstantBracket) -> Value {
    json!({
        "A": ExtReal(b.a),
        "C0_lower": ExtReal(b.lower),
        "C0_upper": ExtReal(b.upper),
        "c_star": ExtReal(b.c_star),
        "location": b.location,
        "evaluations": b.evaluations,
    })
}

pub fn constant(args: &ConstantArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let cfg = global.quad();
    let (p, alpha, b) = (args.p, args.alpha, args.b);
    if !(b > 0.0) {
        return Err(CliError::Usage(format!("--b must be positive, got {b}")));
    }
    let interval = Interval::new(0.0, b)?;
    let v = WeightSpec::power(alpha - p, interval)?;
    let w = WeightSpec::power(alpha, interval)?;
    let branch = Branch::from(args.direction);
    let bracket = muckenhoupt_a(&v, &w, p, branch, &cfg)?;
    let sharp = PowerParams { p, alpha, branch, b }.validate().ok().map(|_| {
        let kappa = (alpha - p + 1.0).abs();
        (p / kappa, (kappa / p).powf(p))
    });
    let mut result = bracket_json(&bracket);
    result["p"] = json!(p);
    result["alpha"] = json!(alpha);
    result["direction"] = json!(branch);
    result["b"] = json!(ExtReal(b));
    result["C0_sharp"] = json!(sharp.map(|s| s.0));
    result["optimal_constant"] = json!(sharp.map(|s| s.1));
    report(&manifest("constant", args, global, None, args.json.as_deref()), args.json.as_deref(), &result)?;
    println!("constant: A = {}, C0 in [{}, {}], c* = {}", e(bracket.a), e(bracket.lower), e(bracket.upper), e(bracket.c_star));
    Ok(if bracket.a.is_finite() { 0 } else { 1 })
}

pub fn muckenhoupt(args: &MuckenhouptArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let cfg = global.quad();
    let p = args.p;
    let (bracket, extra) = if let Some(w1) = &args.w1 {
        let mono = match args.monotonicity.expect("clap requires it") {
            MonotonicityArg::Decreasing => Monotonicity::Decreasing,
            MonotonicityArg::Increasing => Monotonicity::Increasing,
        };
        let w1 = MonotoneWeight::new(parse_weight("w1", w1)?, mono)?;
        let w2 = parse_weight("w2", args.w2.as_deref().expect("clap requires it"))?;
        let branch = args.direction.map(Branch::from).unwrap_or(mono.branch());
        let bracket = monotone_pair_a_tilde(&w1, &w2, p, branch, &cfg)?;
        let closed = a_tilde_closed_form(&w1, p, branch)?;
        let level = a_tilde_maximizer_level(&w1, p);
        let at_c = if bracket.c_star.is_finite() { w1.value(bracket.c_star) } else { f64::NAN };
        let extra = json!({
            "direction": branch,
            "closed_form": ExtReal(closed),
            "maximizer_level": ExtReal(level),
            "w1_at_c_star": ExtReal(at_c),
        });
        (bracket, extra)
    } else {
        let v = parse_weight("v", args.v.as_deref().expect("clap requires it"))?;
        let w = parse_weight("w", args.w.as_deref().expect("clap requires it"))?;
        let phi = args.phi.as_deref().map(|t| parse_weight("phi", t)).transpose()?;
        let psi = args.psi.as_deref().map(|t| parse_weight("psi", t)).transpose()?;
        let branch = Branch::from(args.direction.expect("clap requires it"));
        let bracket =
            muckenhoupt_a_tilde(&v, &w, phi.as_ref().map(|x| x as &dyn Weight), psi.as_ref().map(|x| x as &dyn Weight), p, branch, &cfg)?;
        (bracket, json!({ "direction": branch }))
    };
    let mut result = bracket_json(&bracket);
    result["p"] = json!(p);
    if let (Value::Object(r), Value::Object(x)) = (&mut result, extra) {
        r.extend(x);
    }
    report(&manifest("muckenhoupt", args, global, None, args.json.as_deref()), args.json.as_deref(), &result)?;
    let mut line =
        format!("muckenhoupt: A = {}, C0 in [{}, {}], c* = {}", e(bracket.a), e(bracket.lower), e(bracket.upper), e(bracket.c_star));
    if let Some(c) = result.get("closed_form").and_then(|v| serde_json::from_value::<ExtReal>(v.clone()).ok()) {
        line.push_str(&format!(", closed form = {}", e(c.0)));
    }
    println!("{line}");
    Ok(if bracket.a.is_finite() { 0 } else { 1 })
}

fn verify_summary(r: &InequalityReport) -> String {
    format!(
        "{}: lhs = {}, rhs = {}, ratio = {}, margin = {}, verdict = {}",
        r.id,
        e(r.lhs),
        e(r.rhs),
        e(r.ratio),
        e(r.margin),
        r.verdict.as_str()
    )
}

pub fn verify(args: &VerifyArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let id = parse_ineq(&args.ineq)?;
    if args.p_grid.is_some() || args.alpha_grid.is_some() {
        return verify_grid(args, global, id);
    }
    let p = args.p.expect("clap requires --p without --p-grid");
    let alpha = args.alpha.ok_or_else(|| CliError::Usage("--alpha is required".into()))?;
    let cell = Cell {
        id,
        p,
        alpha,
        family: args.family.clone(),
        b: args.b,
        eps: args.eps,
        branch: Some(args.branch.into()),
        order: Some(args.order),
        n: Some(args.n),
        k: Some(args.k),
    };
    let r = cell.evaluate(&global.quad())?;
    report(&manifest("verify", args, global, None, args.json.as_deref()), args.json.as_deref(), &r)?;
    println!("{}", verify_summary(&r));
    Ok(scalar_exit(r.verdict))
}

fn verify_grid(args: &VerifyArgs, global: &GlobalOpts, id: verify::InequalityId) -> Result<i32, CliError> {
    let ps = args.p_grid.clone().or(args.p.map(|p| vec![p])).unwrap_or_default();
    let alphas = args
        .alpha_grid
        .clone()
        .or(args.alpha.map(|a| vec![a]))
        .ok_or_else(|| CliError::Usage("--alpha or --alpha-grid is required".into()))?;
    let mut cells = Vec::new();
    for &p in &ps {
        for &alpha in &alphas {
            cells.push(Cell {
                id,
                p,
                alpha,
                family: args.family.clone(),
                b: args.b,
                eps: args.eps,
                branch: (id == verify::InequalityId::Iterated).then_some(args.branch.into()),
                order: (id == verify::InequalityId::Iterated).then_some(args.order),
                n: (id == verify::InequalityId::BirmanChain).then_some(args.n),
                k: (id == verify::InequalityId::BirmanChain).then_some(args.k),
            });
        }
    }
    finish_batch("verify", args, global, &cells, args.csv.as_deref())
}

fn finish_batch<T: Serialize>(command: &str, args: &T, global: &GlobalOpts, cells: &[Cell], out: Option<&Path>) -> Result<i32, CliError> {
    let rows = run_cells(cells, &global.quad());
    let m = manifest(command, args, global, None, out);
    sweep::emit(out, &sweep::write_csv(&m, cells, &rows)?)?;
    let failed = rows.iter().filter(|r| r.is_err()).count();
    let violated = rows.iter().filter(|r| matches!(r, Ok(x) if x.verdict == Verdict::Violated)).count();
    for f in rows.iter().filter_map(|r| r.as_ref().err()) {
        eprintln!("{}: {}", f.tag, f.message);
    }
    let summary = format!("{command}: {} cells, {violated} violated, {failed} failed", cells.len());
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(batch_exit_code(&rows))
}

pub fn sweep_cmd(args: &SweepArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let config = sweep::SweepConfig::parse(&text)?;
    let cells = config.cells();
    let recorded = json!({ "config": config, "csv": args.csv });
    finish_batch("sweep", &recorded, global, &cells, args.csv.as_deref())
}

pub fn sharpness(args: &SharpnessArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let branch = Branch::from(args.branch);
    let points = verify::sharpness_probe(branch, args.p, args.alpha, &args.eps, &global.quad())?;
    let monotone = points.windows(2).all(|w| (w[1].eps < w[0].eps) == (w[1].ratio >= w[0].ratio));
    let max_dev = points.iter().map(|pt| (pt.ratio - pt.exact).abs()).fold(0.0, f64::max);
    let result = json!({
        "branch": branch,
        "p": args.p,
        "alpha": args.alpha,
        "points": points,
        "monotone": monotone,
        "max_abs_deviation": max_dev,
    });
    report(&manifest("sharpness", args, global, None, args.json.as_deref()), args.json.as_deref(), &result)?;
    let ladder: Vec<String> = points.iter().map(|pt| format!("{}:{}", pt.eps, e(pt.ratio))).collect();
    println!("sharpness: {} (monotone = {monotone}, max |ratio - exact| = {})", ladder.join(" "), e(max_dev));
    let exceeded = points.iter().any(|pt| pt.ratio > 1.0 + 1e-9);
    Ok(if exceeded { 1 } else { 0 })
}

pub fn check_adhoc(args: &AdhocArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let mono = match args.monotonicity {
        MonotonicityArg::Decreasing => Monotonicity::Decreasing,
        MonotonicityArg::Increasing => Monotonicity::Increasing,
    };
    let w1 = MonotoneWeight::new(parse_weight("w1", &args.w1)?, mono)?;
    let w2 = parse_weight("w2", &args.w2)?;
    let branch = mono.branch();
    let f = family_path(&args.family, f64::INFINITY, branch, args.p, 0.0, None)?;
    let r = verify::check_adhoc(branch, &w1, &w2, args.p, &f, &global.quad())?;
    report(&manifest("check-adhoc", args, global, None, args.json.as_deref()), args.json.as_deref(), &r)?;
    println!("{}", verify_summary(&r));
    Ok(scalar_exit(r.verdict))
}

fn read_path(path: &Path) -> Result<MatrixPath, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Value::Object(map) = &mut v {
        if let Some(schema) = map.remove("schema") {
            if schema != SCHEMA {
                return Err(CliError::Usage(format!("unsupported schema {schema}, expected '{SCHEMA}'")));
            }
        }
    }
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn loewner_summary(r: &LoewnerReport) -> String {
    format!(
        "opcheck {:?}: min eig(lhs - rhs) = {}, tol = {}, tr lhs = {}, tr rhs = {}, verdict = {}",
        r.check,
        e(r.min_eig_diff),
        e(r.tol),
        e(r.trace_lhs),
        e(r.trace_rhs),
        r.verdict.as_str()
    )
}

pub fn opcheck(args: &OpcheckArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let f = read_path(&args.steps)?;
    if let Some(d) = args.dim {
        if d != f.dim() {
            return Err(CliError::Usage(format!("--dim {d} does not match the path dimension {}", f.dim())));
        }
    }
    let cfg = global.quad();
    let branch = Branch::from(args.branch);
    let r = match args.check {
        OpCheckKind::Operator => opvalued::check_operator_ineq(branch, args.p, args.alpha, &f, &cfg)?,
        OpCheckKind::Trace => opvalued::check_trace_ineq(branch, args.p, args.alpha, args.b, &f, &cfg)?,
        OpCheckKind::Hansen => opvalued::check_hansen_base(&f, args.p, &cfg)?,
        OpCheckKind::Iterated => opvalued::check_iterated_operator(branch, args.p, args.alpha, args.order, &f, &cfg)?,
    };
    report(&manifest("opcheck", args, global, None, args.json.as_deref()), args.json.as_deref(), &r)?;
    println!("{}", loewner_summary(&r));
    let ok = match args.check {
        OpCheckKind::Trace => r.trace_holds(),
        _ => r.verdict == LoewnerVerdict::LoewnerHolds,
    };
    Ok(if ok { 0 } else { 1 })
}

pub fn counterexample(args: &CounterexampleArgs, global: &GlobalOpts) -> Result<i32, CliError> {
    let cfg = CounterexampleConfig {
        branch: args.branch.into(),
        p: args.p,
        alpha: args.alpha,
        dim: args.dim,
        n_steps: args.n_steps,
        seed: args.seed,
        budget: args.budget,
        restart_len: args.restart_len,
        quad: global.quad(),
    };
    let out = counterexample_search(&cfg)?;
    report(&manifest("counterexample", args, global, Some(args.seed), args.json.as_deref()), args.json.as_deref(), &out)?;
    println!(
        "counterexample: {} evaluations, {} failed, most negative relative margin = {}, loewner violation = {}, trace failures = {}",
        out.evaluations,
        out.failures,
        e(out.best_relative_margin),
        out.violation_found,
        out.trace_failures
    );
    // Past p = 2 a Loewner violation is a finding, not a failure.
    let contradicts = out.trace_failures > 0 || (out.violation_found && args.p <= 2.0);
    Ok(if contradicts { 1 } else { 0 })
}
