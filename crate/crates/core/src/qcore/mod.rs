//! Dense state-vector and density-operator kernel.
//!
//! Registers are small (at most a dozen qubits), so everything is a plain
//! `Vec` of complex amplitudes. Qubit 0 is the most significant bit of a basis
//! index throughout the crate.
//!
//! Measurements are projective in the computational basis. The cascade only
//! ever needs that: a "direction of an eigenvector" on the target qubit is read
//! as `{|0⟩, |1⟩}`.

mod density;
mod gate;
mod state;

pub use density::{density_from_ensemble, DensityOperator};
pub use gate::GateMatrix;
pub use state::{epr_pair, MeasurementRecord, PureState};

/// A complex amplitude; both parts must be finite.
pub type Amplitude = num_complex::Complex64;

/// Tolerance for validating caller-supplied states and operators.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

/// Projections below this probability are refused rather than renormalized.
pub(crate) const COLLAPSE_FLOOR: f64 = 1e-15;
