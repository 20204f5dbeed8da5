//! Property checks on random step functions.

use hardy_core::hardy::{hardy_apply, iterated_equals_kernel, HardyKind, PathForm, ScalarPath};
use hardy_core::quadrature::QuadConfig;
use hardy_core::verify::{check_iterated, check_power, Verdict};
use hardy_core::weights::Interval;
use hardy_core::Branch;
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn step(grid: &[f64], values: &[f64]) -> ScalarPath {
    ScalarPath::new(PathForm::Step { grid: grid.to_vec(), values: values.to_vec() }, Interval::half_line())
}

/// Ascending grid from positive gaps, with `n` nonnegative heights.
fn step_parts(max_cells: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_cells).prop_flat_map(|n| {
        (0.05f64..2.0, prop::collection::vec(0.05f64..2.0, n), prop::collection::vec(0.0f64..3.0, n)).prop_map(|(start, gaps, values)| {
            let mut grid = vec![start];
            for g in gaps {
                grid.push(grid[grid.len() - 1] + g);
            }
            (grid, values)
        })
    })
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_linear(
        (grid, u) in step_parts(4),
        seed in prop::collection::vec(0.0f64..3.0, 4),
        a in -2.0f64..2.0,
        c in -2.0f64..2.0,
        x in 0.0f64..8.0,
        plus in any::<bool>(),
        order in 1usize..=3,
    ) {
        let v: Vec<f64> = seed[..u.len()].to_vec();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(s, t)| a * s + c * t).collect();
        let kind = HardyKind::new(if plus { Branch::Plus } else { Branch::Minus }, order);
        let h = |vals: &[f64]| hardy_apply(&kind, &step(&grid, vals), x, &cfg()).unwrap();
        prop_assert!(near(h(&mix), a * h(&u) + c * h(&v), 1e-9));
    }

    #[test]
    fn operators_are_monotone(
        (grid, u) in step_parts(4),
        bumps in prop::collection::vec(0.0f64..1.0, 4),
        x in 0.0f64..8.0,
        plus in any::<bool>(),
        order in 1usize..=3,
    ) {
        let bigger: Vec<f64> = u.iter().zip(&bumps).map(|(s, d)| s + d).collect();
        let kind = HardyKind::new(if plus { Branch::Plus } else { Branch::Minus }, order);
        let lo = hardy_apply(&kind, &step(&grid, &u), x, &cfg()).unwrap();
        let hi = hardy_apply(&kind, &step(&grid, &bigger), x, &cfg()).unwrap();
        prop_assert!(hi >= lo - 1e-12 * (1.0 + lo.abs()));
    }

    #[test]
    fn nested_integrals_match_kernel((grid, u) in step_parts(3), x in 0.1f64..7.0, plus in any::<bool>(), order in 2usize..=3) {
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let k = iterated_equals_kernel(branch, &step(&grid, &u), order, x, &cfg()).unwrap();
        prop_assert!(near(k.nested, k.kernel, 1e-8), "{k:?}");
    }

    #[test]
    fn power_inequality_holds_on_steps((grid, u) in step_parts(4), p in 1.0f64..3.5, gap in 0.05f64..2.0, plus in any::<bool>()) {
        let (branch, alpha) = if plus { (Branch::Plus, p - 1.0 + gap) } else { (Branch::Minus, p - 1.0 - gap) };
        let r = check_power(branch, p, alpha, INF, &step(&grid, &u), &cfg()).unwrap();
        prop_assert!(!r.verdict.is_violation(), "{r:?}");
        if r.lhs > 0.0 {
            prop_assert!(r.margin > 0.0, "{r:?}");
        }
    }

    #[test]
    fn sides_are_p_homogeneous((grid, u) in step_parts(3), p in 1.0f64..3.0, lambda in 0.1f64..5.0) {
        let alpha = p - 1.5;
        let f = step(&grid, &u);
        let a = check_power(Branch::Minus, p, alpha, INF, &f, &cfg()).unwrap();
        let b = check_power(Branch::Minus, p, alpha, INF, &f.scaled(lambda), &cfg()).unwrap();
        let s = lambda.powf(p);
        prop_assert!(near(b.lhs, s * a.lhs, 1e-9) && near(b.rhs, s * a.rhs, 1e-8));
    }

    #[test]
    fn dilation_scales_both_sides((grid, u) in step_parts(3), p in 1.0f64..3.0, lambda in 0.25f64..4.0, plus in any::<bool>()) {
        // F(x/λ) has sides scaled by λ^(α+1).
        let (branch, alpha) = if plus { (Branch::Plus, p) } else { (Branch::Minus, p - 2.0) };
        let stretched: Vec<f64> = grid.iter().map(|g| g * lambda).collect();
        let a = check_power(branch, p, alpha, INF, &step(&grid, &u), &cfg()).unwrap();
        let b = check_power(branch, p, alpha, INF, &step(&stretched, &u), &cfg()).unwrap();
        let s = lambda.powf(alpha + 1.0);
        prop_assert!(near(b.lhs, s * a.lhs, 1e-9) && near(b.rhs, s * a.rhs, 1e-8), "{a:?} {b:?}");
    }

    #[test]
    fn first_order_iterated_is_power((grid, u) in step_parts(3), p in 1.0f64..3.0, plus in any::<bool>()) {
        let (branch, alpha) = if plus { (Branch::Plus, p - 0.5) } else { (Branch::Minus, p - 1.5) };
        let f = step(&grid, &u);
        let a = check_power(branch, p, alpha, INF, &f, &cfg()).unwrap();
        let b = check_iterated(branch, p, alpha, 1, INF, &f, &cfg()).unwrap();
        prop_assert!(near(a.lhs, b.lhs, 1e-12) && near(a.rhs, b.rhs, 1e-12));
    }

    #[test]
    fn iterated_inequality_holds((grid, u) in step_parts(3), p in 1.0f64..3.0, order in 2usize..=3, gap in 0.1f64..1.5, plus in any::<bool>()) {
        let (branch, alpha) = if plus { (Branch::Plus, order as f64 * p - 1.0 + gap) } else { (Branch::Minus, p - 1.0 - gap) };
        let r = check_iterated(branch, p, alpha, order, INF, &step(&grid, &u), &cfg()).unwrap();
        prop_assert!(matches!(r.verdict, Verdict::Holds | Verdict::HoldsWithinError), "{r:?}");
    }
}
