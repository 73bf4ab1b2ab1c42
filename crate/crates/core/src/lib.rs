//! Simulation of a CNOT ancilla cascade run by Bob on his half of an EPR pair,
//! and of the group-based bit transmission scheme built on it.
//!
//! * [`qcore`]: dense state vectors, density operators, gates, measurement.
//! * [`distinguisher`]: the cascade itself, sampled and enumerated exactly.
//! * [`stats`]: empirical laws, total variation, chi-square, likelihood ratios.
//! * [`protocol`]: Alice/Bob experiments, the no-signaling audit, and a
//!   teleportation baseline.
//!
//! ```
//! use epr_cascade::{exact_count_distribution, BasisChoice, CascadeConfig};
//!
//! let cfg = CascadeConfig::default();
//! let comp = exact_count_distribution(&BasisChoice::Computational.bob_ensemble()?, &cfg)?;
//! let diag = exact_count_distribution(&BasisChoice::Diagonal.bob_ensemble()?, &cfg)?;
//! assert!(comp.max_abs_difference(&diag) < 1e-12);
//! # Ok::<(), epr_cascade::Error>(())
//! ```

pub mod distinguisher;
pub mod error;
pub mod protocol;
pub mod qcore;
pub mod rng;
pub mod stats;

pub use distinguisher::{
    binomial_distribution, cascade_step, exact_count_distribution,
    exact_count_distribution_with_budget, exact_sequence_distribution, run_cascade,
    step_zero_probability, AncillaSpec, CascadeConfig, CascadeResult, CountDistribution,
    DEFAULT_BRANCH_BUDGET,
};
pub use error::{Error, Result};
pub use protocol::{
    alice_prepare_and_measure, classify_group, no_signaling_audit, reference_laws,
    run_transmission_experiment, teleport_branch, teleport_with_ccc, transmit_group,
    uncorrected_average_fidelity, AuditReport, BasisChoice, GroupRecord, TeleportOutcome,
    TransmissionReport, TrialRecord, Verdict,
};
pub use qcore::{
    density_from_ensemble, epr_pair, Amplitude, DensityOperator, GateMatrix, MeasurementRecord,
    PureState,
};
pub use rng::SeedStreams;
pub use stats::{
    chi_square_gof, empirical_distribution, log_likelihood_ratio, second_level_summary,
    total_variation, EmpiricalDistribution, HypothesisTestResult, SecondLevelSummary,
};
