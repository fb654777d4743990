use thiserror::Error;

/// Errors raised while building or validating the network model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("degenerate geometry: nodes {0} and {1} share a coordinate")]
    DegenerateGeometry(&'static str, &'static str),
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },
}

/// Stage of the allocation pipeline at which infeasibility was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Stage {
    /// No transmit power can satisfy the circuit-power requirement.
    ReflectionCoefficient,
    /// Continuous relaxation, high time-share branch (SCA).
    HighRho,
    /// Continuous relaxation, low time-share branch.
    LowRho,
    /// Continuous relaxation, direct-link-dominant case.
    DirectCase,
    /// Integer conversion of the time-share.
    IntegerConversion,
    /// Power re-optimization at the integer split.
    PowerReoptimization,
    /// Exhaustive search found no feasible split.
    Exhaustive,
}

impl core::fmt::Display for Stage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Stage::ReflectionCoefficient => "reflection-coefficient",
            Stage::HighRho => "high-rho",
            Stage::LowRho => "low-rho",
            Stage::DirectCase => "direct-case",
            Stage::IntegerConversion => "integer-conversion",
            Stage::PowerReoptimization => "power-reoptimization",
            Stage::Exhaustive => "exhaustive",
        };
        f.write_str(s)
    }
}

/// Errors raised by the allocator and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("infeasible at stage {0}")]
    Infeasible(Stage),
    #[error("transmit power {p0} W is below the circuit-power floor {floor} W")]
    InfeasiblePower { p0: f64, floor: f64 },
    #[error("bisection interval is empty: lo={lo}, hi={hi}")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("search space too large: min(M, N) = {0} exceeds 4")]
    SearchTooLarge(usize),
    #[error("exhaustive search limited to L <= 1000, got {0}")]
    TooManySubframes(usize),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}
