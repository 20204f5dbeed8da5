use hardy_core::constants::ConstantsError;
use hardy_core::hardy::HardyError;
use hardy_core::opvalued::OpError;
use hardy_core::verify::VerifyError;
use hardy_core::weights::WeightError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Short, stable name of an error for tabular output.
pub trait ErrorTag {
    fn tag(&self) -> &'static str;
    fn is_numerical(&self) -> bool;
}

impl ErrorTag for WeightError {
    fn tag(&self) -> &'static str {
        match self {
            WeightError::OutsideInterval { .. } => "OutsideInterval",
            WeightError::Divergent { .. } => "Divergent",
            WeightError::InvalidSpec(_) => "InvalidWeight",
            WeightError::IntervalMismatch(..) => "IntervalMismatch",
            WeightError::InvalidExponent(_) => "InvalidExponent",
            WeightError::IndeterminateLimit { .. } => "IndeterminateLimit",
            WeightError::Quadrature(_) => "QuadratureFailure",
        }
    }

    fn is_numerical(&self) -> bool {
        matches!(self, WeightError::Divergent { .. } | WeightError::Quadrature(_))
    }
}

impl ErrorTag for ConstantsError {
    fn tag(&self) -> &'static str {
        match self {
            ConstantsError::DegenerateExponent { .. } => "DegenerateExponent",
            ConstantsError::BranchMismatch { .. } => "BranchMismatch",
            ConstantsError::InvalidExponent(_) => "InvalidExponent",
            ConstantsError::IntervalMismatch(..) => "IntervalMismatch",
            ConstantsError::DirectionMismatch { .. } => "DirectionMismatch",
            ConstantsError::Quadrature { .. } => "QuadratureFailure",
            ConstantsError::Search(_) => "SearchFailure",
            ConstantsError::Weight(e) => e.tag(),
        }
    }

    fn is_numerical(&self) -> bool {
        match self {
            ConstantsError::Quadrature { .. } | ConstantsError::Search(_) => true,
            ConstantsError::Weight(e) => e.is_numerical(),
            _ => false,
        }
    }
}

impl ErrorTag for HardyError {
    fn tag(&self) -> &'static str {
        match self {
            HardyError::InvalidOrder(_) => "InvalidOrder",
            HardyError::GeneralizedOrder(_) => "GeneralizedOrder",
            HardyError::OutsideInterval { .. } => "OutsideInterval",
            HardyError::NegativeInput { .. } => "NegativeInput",
            HardyError::Divergent { .. } => "Divergent",
            HardyError::InvalidPath(_) => "InvalidPath",
            HardyError::UnsortedGrid => "UnsortedGrid",
            HardyError::Quadrature(_) => "QuadratureFailure",
        }
    }

    fn is_numerical(&self) -> bool {
        matches!(self, HardyError::Divergent { .. } | HardyError::Quadrature(_))
    }
}

impl ErrorTag for VerifyError {
    fn tag(&self) -> &'static str {
        match self {
            VerifyError::Hypothesis { .. } => "HypothesisViolated",
            VerifyError::HypothesisGap { .. } => "HypothesisGap",
            VerifyError::MissingDerivative(_) => "MissingDerivative",
            VerifyError::InvalidParameter(_) => "InvalidParameter",
            VerifyError::Hardy(e) => e.tag(),
            VerifyError::Weight(e) => e.tag(),
            VerifyError::Constants(e) => e.tag(),
            VerifyError::Quadrature(_) => "QuadratureFailure",
        }
    }

    fn is_numerical(&self) -> bool {
        match self {
            VerifyError::Hardy(e) => e.is_numerical(),
            VerifyError::Weight(e) => e.is_numerical(),
            VerifyError::Constants(e) => e.is_numerical(),
            VerifyError::Quadrature(_) => true,
            _ => false,
        }
    }
}

impl ErrorTag for OpError {
    fn tag(&self) -> &'static str {
        match self {
            OpError::NotSquare { .. } => "NotSquare",
            OpError::NonFinite => "NonFinite",
            OpError::NotHermitian { .. } => "NotHermitian",
            OpError::NotPsd { .. } => "NotPsd",
            OpError::InvalidExponent(_) => "InvalidExponent",
            OpError::DimensionMismatch { .. } => "DimensionMismatch",
            OpError::InvalidGrid(_) => "InvalidGrid",
            OpError::DegenerateExponent { .. } => "DegenerateExponent",
            OpError::BranchMismatch { .. } => "BranchMismatch",
            OpError::HypothesisGap { .. } => "HypothesisGap",
            OpError::LoewnerRange { .. } => "LoewnerRange",
            OpError::InvalidOrder => "InvalidOrder",
            OpError::InvalidParameter(_) => "InvalidParameter",
            OpError::Divergent { .. } => "Divergent",
            OpError::Quadrature(_) => "QuadratureFailure",
        }
    }

    fn is_numerical(&self) -> bool {
        matches!(self, OpError::Divergent { .. } | OpError::Quadrature(_))
    }
}

macro_rules! into_cli {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                if e.is_numerical() {
                    CliError::Numerical(e.to_string())
                } else {
                    CliError::Usage(e.to_string())
                }
            }
        }
    )*};
}

into_cli!(WeightError, ConstantsError, HardyError, VerifyError, OpError);
