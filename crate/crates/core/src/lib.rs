//! Numerical toolkit for weighted Hardy-type inequalities.
//!
//! The crate evaluates Hardy operators and their iterates, computes optimal
//! and Muckenhoupt-type constants, checks scalar and matrix-valued
//! inequalities by adaptive quadrature, and searches for Loewner-order
//! counterexamples.

pub mod constants;
pub mod hardy;
pub mod opvalued;
pub mod quadrature;
pub mod verify;
pub mod weights;

use serde::{Deserialize, Serialize};

/// Direction of a Hardy operator: `Minus` integrates from the left end up to
/// `x`, `Plus` from `x` to the right end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
