use thiserror::Error;

/// Errors raised by the simulator.
///
/// Most variants are contract violations by the caller. [`Error::ZeroProbabilityCollapse`]
/// and [`Error::InvariantViolation`] signal that the simulator itself reached an
/// impossible state; see [`Error::is_internal`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("amplitude vector of length {len} is not a power of two >= 2")]
    BadDimension { len: usize },
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("control and target must differ (both {0})")]
    SameControlTarget(usize),
    #[error("gate is not unitary: max |U^dagger U - I| = {deviation}")]
    NonUnitary { deviation: f64 },
    #[error("expected a {expected}-qubit state, got {actual} qubits")]
    WrongQubitCount { expected: usize, actual: usize },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("ensemble weights must be non-negative and sum to 1 (sum {sum})")]
    WeightSum { sum: f64 },
    #[error("projection onto outcome {outcome} of qubit {index} has probability {probability}")]
    ZeroProbabilityCollapse {
        index: usize,
        outcome: u8,
        probability: f64,
    },
    #[error("qubit {index} is not in a computational basis state")]
    NotCollapsed { index: usize },
    #[error("{rounds} rounds need {branches} branches, over the budget of {budget}")]
    BranchBudgetExceeded {
        rounds: usize,
        branches: u128,
        budget: u64,
    },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("rounds must be at least 1")]
    InvalidRounds,
    #[error("distributions have mismatched rounds ({left} vs {right})")]
    RoundsMismatch { left: usize, right: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("count {count} outside 0..={rounds}")]
    CountOutOfRange { count: usize, rounds: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("{what} must be at least 1")]
    InvalidSize { what: &'static str },
    #[error("reference distribution has zero mass at observed count {count}")]
    ZeroReferenceMass { count: usize },
    #[error("every bin was pooled away (all expected counts below {threshold})")]
    AllBinsPooled { threshold: f64 },
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// True when the error means the simulator broke its own invariants rather
    /// than being handed bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbabilityCollapse { .. } | Error::InvariantViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
