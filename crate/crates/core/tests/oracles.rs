//! Closed-form values frozen from hand computation.

use std::f64::consts::LN_2;

use hardy_core::constants::{muckenhoupt_a, optimal_power_constant, PowerParams};
use hardy_core::hardy::{hardy_apply, HardyKind, PathForm, ScalarPath};
use hardy_core::opvalued::{check_hansen_base, check_iterated_operator, check_operator_ineq, CMatrix, MatrixPath};
use hardy_core::quadrature::QuadConfig;
use hardy_core::verify::{check_power, extremal_ratio, sharpness_probe, Verdict};
use hardy_core::weights::{Interval, WeightSpec};
use hardy_core::Branch;

const INF: f64 = f64::INFINITY;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn unit_block() -> MatrixPath {
    MatrixPath::from_real(2, vec![1.0, 2.0], &[vec![1.0, 0.0, 0.0, 1.0]]).unwrap()
}

fn is_scalar(m: &CMatrix, c: f64, tol: f64) -> bool {
    let d = m - CMatrix::identity(2, 2) * nalgebra::Complex::new(c, 0.0);
    d.iter().all(|z| z.norm() <= tol * c.abs())
}

#[test]
fn frullani_spot_value() {
    let r = check_power(Branch::Minus, 2.0, 0.0, INF, &ScalarPath::exp_decay(), &cfg()).unwrap();
    assert!((r.lhs - 0.5).abs() < 1e-8, "{r:?}");
    assert!((r.rhs - LN_2 / 2.0).abs() < 1e-8, "{r:?}");
    assert!(rel(r.ratio, LN_2) < 1e-12);
    assert_eq!(r.verdict, Verdict::Holds);
}

#[test]
fn classical_constant() {
    let half = Interval::half_line();
    let v = WeightSpec::power(-2.0, half).unwrap();
    let w = WeightSpec::power(0.0, half).unwrap();
    let b = muckenhoupt_a(&v, &w, 2.0, Branch::Minus, &cfg()).unwrap();
    assert!((b.a - 1.0).abs() < 1e-6 && (b.upper - 2.0).abs() < 1e-6, "{b:?}");
    let c = optimal_power_constant(&PowerParams::new(2.0, 0.0, INF).unwrap()).unwrap();
    assert_eq!(c, 0.25);
    // Smallest norm constant is (1/4)^(-1/2) = 2, the top of the bracket.
    assert!((c.powf(-0.5) - b.upper).abs() < 1e-6);
}

#[test]
fn first_and_second_order_operators_on_exp() {
    let f = ScalarPath::exp_decay();
    for x in [0.1, 1.0, 3.0] {
        let h1 = hardy_apply(&HardyKind::minus(1), &f, x, &cfg()).unwrap();
        assert!(rel(h1, 1.0 - (-x).exp()) < 1e-12);
        let h2 = hardy_apply(&HardyKind::minus(2), &f, x, &cfg()).unwrap();
        assert!(rel(h2, x - 1.0 + (-x).exp()) < 1e-10);
        let p1 = hardy_apply(&HardyKind::plus(1), &f, x, &cfg()).unwrap();
        assert!(rel(p1, (-x).exp()) < 1e-12);
    }
}

#[test]
fn hansen_base_on_unit_block() {
    let r = check_hansen_base(&unit_block(), 2.0, &cfg()).unwrap();
    assert!(is_scalar(&r.lhs_matrix, LN_2, 1e-12), "{r:?}");
    assert!(is_scalar(&r.rhs_matrix, LN_2 - 0.5, 1e-9), "{r:?}");
}

#[test]
fn operator_and_iterated_on_unit_block() {
    let r = check_operator_ineq(Branch::Minus, 2.0, 0.0, &unit_block(), &cfg()).unwrap();
    assert!(is_scalar(&r.lhs_matrix, 1.0, 1e-12));
    assert!(is_scalar(&r.rhs_matrix, (1.0 - LN_2) / 2.0, 1e-9), "{r:?}");
    let t = r.transform_check.unwrap();
    assert!(t.lhs_rel_diff < 1e-10 && t.rhs_rel_diff < 1e-8, "{t:?}");

    let r = check_iterated_operator(Branch::Minus, 2.0, 0.0, 2, &unit_block(), &cfg()).unwrap();
    assert_eq!(r.constant, 9.0 / 16.0);
    let integral = 0.25 * (1.0 - 4.0 * LN_2 + 3.0 - 1.5 + 7.0 / 24.0) + (0.5 - 0.375 + 2.25 / 24.0);
    assert!(is_scalar(&r.rhs_matrix, 9.0 / 16.0 * integral, 1e-9), "{r:?}");
}

#[test]
fn sharpness_ladder_closed_form() {
    let ladder = [0.2, 0.1, 0.05, 0.02, 0.01];
    let pts = sharpness_probe(Branch::Minus, 2.0, 0.0, &ladder, &cfg()).unwrap();
    for pt in &pts {
        let want = 0.25 / (0.5 + pt.eps).powi(2);
        assert!((pt.ratio - want).abs() < 1e-6, "{pt:?}");
        assert!((pt.exact - want).abs() < 1e-15);
    }
    assert!(pts[4].ratio > 0.95);
    assert!((extremal_ratio(Branch::Minus, 2.0, 0.0, 0.01) - 0.9611687812379854).abs() < 1e-15);
}

#[test]
fn step_scalar_path_matches_matrix_diagonal() {
    let f = ScalarPath::new(PathForm::Step { grid: vec![1.0, 2.0], values: vec![1.0] }, Interval::half_line());
    let s = check_power(Branch::Minus, 2.0, 0.0, INF, &f, &cfg()).unwrap();
    assert!((s.lhs - 1.0).abs() < 1e-12);
    assert!((s.rhs - (1.0 - LN_2) / 2.0).abs() < 1e-9, "{s:?}");
}
