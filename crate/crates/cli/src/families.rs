//! Named test functions for the scalar checks.

use hardy_core::hardy::{PathForm, ScalarPath};
use hardy_core::verify::extremal_path;
use hardy_core::weights::Interval;
use hardy_core::Branch;

use crate::CliError;

pub const FAMILIES: &[&str] = &["exp", "poly-exp", "step", "bump", "extremal"];

/// Path for `name` viewed on `(0, b)`. `extremal` needs `eps` and the branch.
pub fn family_path(name: &str, b: f64, branch: Branch, p: f64, alpha: f64, eps: Option<f64>) -> Result<ScalarPath, CliError> {
    let on = |form: PathForm| ScalarPath::new(form, Interval::half_line());
    let path = match name {
        "exp" => ScalarPath::exp_decay(),
        "poly-exp" => on(PathForm::PolyExp { coeffs: vec![1.0, 2.0, 0.5], rate: 1.5 }),
        "step" => on(PathForm::Step { grid: vec![0.25, 0.75, 1.5, 3.0], values: vec![1.0, 0.4, 2.0] }),
        "bump" => ScalarPath::bump(4, f64::INFINITY),
        "extremal" => {
            let eps = eps.ok_or_else(|| CliError::Usage("family 'extremal' needs --eps".into()))?;
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::Usage(format!("--eps must lie in (0, 1), got {eps}")));
            }
            extremal_path(branch, p, alpha, eps).0.with_interval(Interval::half_line())
        }
        other => {
            return Err(CliError::Usage(format!("unknown family '{other}'; expected one of {}", FAMILIES.join(", "))));
        }
    };
    if !(b > 0.0) {
        return Err(CliError::Usage(format!("b must be positive, got {b}")));
    }
    Ok(if b.is_finite() { path.with_interval(Interval { a: 0.0, b }) } else { path })
}
