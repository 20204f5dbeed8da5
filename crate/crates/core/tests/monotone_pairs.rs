//! Numerical supremum of the monotone-pair functional against its closed form.

use std::time::Instant;

use hardy_core::constants::{a_tilde_closed_form, a_tilde_maximizer_level, monotone_pair_a_tilde};
use hardy_core::quadrature::{QuadConfig, SupLocation};
use hardy_core::weights::{Interval, MonotoneWeight, Monotonicity, WeightKind, WeightSpec};

const INF: f64 = f64::INFINITY;

fn shifted_recip() -> WeightKind {
    WeightKind::ShiftedPower { shift: 1.0, alpha: -1.0 }
}

fn affine(offset: f64, scale: f64, base: WeightKind) -> WeightKind {
    WeightKind::Affine { offset, scale, base: Box::new(base) }
}

fn weights() -> Vec<(&'static str, WeightKind, Interval, Monotonicity)> {
    let half = Interval::half_line();
    let unit = Interval::new(0.0, 1.0).unwrap();
    let tail = Interval::new(1.0, INF).unwrap();
    let exp = WeightKind::ExpDecay { rate: 1.0 };
    use Monotonicity::*;
    vec![
        ("exp(-x)", exp.clone(), half, Decreasing),
        ("1+1/(1+x)", affine(1.0, 1.0, shifted_recip()), half, Decreasing),
        ("(1+x)^-2", WeightKind::ShiftedPower { shift: 1.0, alpha: -2.0 }, half, Decreasing),
        ("2+exp(-x)", affine(2.0, 1.0, exp.clone()), half, Decreasing),
        ("1/x on (1,inf)", WeightKind::Power { alpha: -1.0 }, tail, Decreasing),
        ("x^2 on (0,2)", WeightKind::Power { alpha: 2.0 }, Interval::new(0.0, 2.0).unwrap(), Increasing),
        ("2-1/(1+x)", affine(2.0, -1.0, shifted_recip()), half, Increasing),
        ("x on (0,1)", WeightKind::Power { alpha: 1.0 }, unit, Increasing),
        ("2-exp(-x)", affine(2.0, -1.0, exp), half, Increasing),
        ("(1+x)^0.5 on (0,3)", WeightKind::ShiftedPower { shift: 1.0, alpha: 0.5 }, Interval::new(0.0, 3.0).unwrap(), Increasing),
    ]
}

#[test]
fn numerical_supremum_matches_closed_form() {
    let start = Instant::now();
    let cfg = QuadConfig::default();
    let mut interior = 0;
    for (name, kind, interval, mono) in weights() {
        let spec = WeightSpec::new(kind, interval).unwrap();
        let w1 = MonotoneWeight::new(spec, mono).unwrap();
        let w2 = WeightSpec::power(0.0, interval).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let branch = mono.branch();
            let closed = a_tilde_closed_form(&w1, p, branch).unwrap();
            let r = monotone_pair_a_tilde(&w1, &w2, p, branch, &cfg).unwrap();
            let err = (r.a - closed).abs() / closed.abs().max(1e-300);
            assert!(err < 1e-6, "{name} p={p}: numeric {} vs closed {closed}", r.a);
            if r.location == SupLocation::Interior && p > 1.0 {
                let level = a_tilde_maximizer_level(&w1, p);
                if level > 0.0 && level.is_finite() {
                    let got = w1.value(r.c_star);
                    assert!((got - level).abs() / level < 1e-4, "{name} p={p}: w1(c*) = {got}, level {level}");
                    interior += 1;
                }
            }
        }
    }
    assert!(interior >= 8, "only {interior} interior maximizers checked");
    assert!(start.elapsed().as_secs_f64() < 30.0, "took {:?}", start.elapsed());
}
