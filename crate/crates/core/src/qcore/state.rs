use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{Amplitude, DensityOperator, GateMatrix, COLLAPSE_FLOOR, VALIDATION_TOL};
use crate::error::{Error, Result};

/// Outcome of a single computational-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub qubit_index: usize,
    pub outcome: u8,
    /// Born probability of the realized outcome.
    pub probability: f64,
}

/// Normalized amplitude vector over `num_qubits` qubits.
///
/// Basis index bit layout: qubit 0 is the most significant bit, so for two
/// qubits index 2 = `|10⟩` (qubit 0 set, qubit 1 clear).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

impl PureState {
    /// Validates length (a power of two, at least 2), finiteness and norm (within `1e-9`).
    pub fn new(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::BadDimension { len });
        }
        if let Some(index) = amplitudes
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        let state = Self::from_raw(amplitudes);
        state.check_normalized()?;
        Ok(state)
    }

    /// Real amplitudes, validated like [`PureState::new`].
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Scales an arbitrary non-zero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sqr.is_finite() && norm_sqr > 0.0) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let scale = norm_sqr.sqrt().recip();
        Self::new(amplitudes.into_iter().map(|z| z * scale).collect())
    }

    pub(crate) fn from_raw(amplitudes: Vec<Amplitude>) -> Self {
        debug_assert!(amplitudes.len().is_power_of_two() && amplitudes.len() >= 2);
        let num_qubits = amplitudes.len().trailing_zeros() as usize;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    /// Computational basis state `|index⟩` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize {
            return Err(Error::BadDimension { len: 0 });
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange { index, num_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self::from_raw(amplitudes))
    }

    pub fn zero() -> Self {
        Self::from_raw(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
    }

    pub fn one() -> Self {
        Self::from_raw(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    /// (|0⟩ + |1⟩)/√2
    pub fn plus() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::from_raw(vec![h, h])
    }

    /// (|0⟩ − |1⟩)/√2
    pub fn minus() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::from_raw(vec![h, -h])
    }

    /// Single-qubit state `a|0⟩ + b|1⟩`, validated.
    pub fn qubit(a: Amplitude, b: Amplitude) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(())
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn require_qubits(&self, expected: usize) -> Result<()> {
        if self.num_qubits != expected {
            return Err(Error::WrongQubitCount {
                expected,
                actual: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Bit mask of `qubit` inside a basis index.
    #[inline]
    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Kronecker product `self ⊗ right`; `self` occupies the leading qubits.
    pub fn tensor_with(&self, right: &PureState) -> Result<PureState> {
        self.check_normalized()?;
        right.check_normalized()?;
        let mut out = Vec::with_capacity(self.dim() * right.dim());
        for &l in &self.amplitudes {
            out.extend(right.amplitudes.iter().map(|&r| l * r));
        }
        Ok(Self::from_raw(out))
    }

    /// Flips `target` on every basis string where `control` is set.
    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<PureState> {
        self.check_index(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(Error::SameControlTarget(control));
        }
        let (cm, tm) = (self.mask(control), self.mask(target));
        let mut out = self.amplitudes.clone();
        for i in 0..self.dim() {
            // visit each swapped pair once, from its target-clear member
            if i & cm != 0 && i & tm == 0 {
                out.swap(i, i | tm);
            }
        }
        Ok(Self::from_raw(out))
    }

    pub fn apply_single_qubit(&self, gate: &GateMatrix, index: usize) -> Result<PureState> {
        self.check_index(index)?;
        if gate.dimension() != 2 {
            return Err(Error::BadDimension {
                len: gate.entries().len(),
            });
        }
        let deviation = gate.unitarity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        let m = self.mask(index);
        let mut out = self.amplitudes.clone();
        for i in (0..self.dim()).filter(|i| i & m == 0) {
            let (lo, hi) = (self.amplitudes[i], self.amplitudes[i | m]);
            out[i] = gate.entry(0, 0) * lo + gate.entry(0, 1) * hi;
            out[i | m] = gate.entry(1, 0) * lo + gate.entry(1, 1) * hi;
        }
        Ok(Self::from_raw(out))
    }

    /// Born probabilities `(p0, p1)` of measuring `index` in the computational basis.
    pub fn outcome_probability(&self, index: usize) -> Result<(f64, f64)> {
        self.check_index(index)?;
        let m = self.mask(index);
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, z) in self.amplitudes.iter().enumerate() {
            if i & m == 0 {
                p0 += z.norm_sqr();
            } else {
                p1 += z.norm_sqr();
            }
        }
        let total = p0 + p1;
        Ok((p0 / total, p1 / total))
    }

    /// Projects `index` onto `outcome` and renormalizes. Returns the Born
    /// probability of that outcome together with the collapsed state.
    pub fn project(&self, index: usize, outcome: u8) -> Result<(f64, PureState)> {
        let (p0, p1) = self.outcome_probability(index)?;
        let probability = if outcome == 0 { p0 } else { p1 };
        if probability < COLLAPSE_FLOOR {
            return Err(Error::ZeroProbabilityCollapse {
                index,
                outcome,
                probability,
            });
        }
        let m = self.mask(index);
        let keep_set = outcome != 0;
        let scale = (probability * self.norm_sqr()).sqrt().recip();
        let out = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                if (i & m != 0) == keep_set {
                    z * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((probability, Self::from_raw(out)))
    }

    /// Samples a computational-basis measurement of `index` and collapses.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &self,
        index: usize,
        rng: &mut R,
    ) -> Result<(MeasurementRecord, PureState)> {
        let (p0, _) = self.outcome_probability(index)?;
        let outcome = if rng.random::<f64>() < p0 { 0 } else { 1 };
        let (probability, state) = self.project(index, outcome)?;
        Ok((
            MeasurementRecord {
                qubit_index: index,
                outcome,
                probability,
            },
            state,
        ))
    }

    /// Drops a qubit that has already collapsed to `|0⟩` or `|1⟩`, returning the
    /// state of the remaining qubits in their original order.
    pub fn remove_measured_qubit(&self, index: usize) -> Result<PureState> {
        self.check_index(index)?;
        if self.num_qubits == 1 {
            return Err(Error::BadDimension { len: 1 });
        }
        let (p0, p1) = self.outcome_probability(index)?;
        let kept_bit = if p1 <= 1e-12 {
            0
        } else if p0 <= 1e-12 {
            1
        } else {
            return Err(Error::NotCollapsed { index });
        };
        let m = self.mask(index);
        let out = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| usize::from(i & m != 0) == kept_bit)
            .map(|(_, &z)| z)
            .collect();
        Ok(Self::from_raw(out))
    }

    /// Single-qubit marginal obtained by tracing out every other qubit.
    pub fn reduced_density(&self, index: usize) -> Result<DensityOperator> {
        self.check_index(index)?;
        let m = self.mask(index);
        let mut rho = [Complex64::new(0.0, 0.0); 4];
        for i in (0..self.dim()).filter(|i| i & m == 0) {
            let (lo, hi) = (self.amplitudes[i], self.amplitudes[i | m]);
            rho[0] += lo * lo.conj();
            rho[1] += lo * hi.conj();
            rho[2] += hi * lo.conj();
            rho[3] += hi * hi.conj();
        }
        Ok(DensityOperator::from_raw(1, rho.to_vec()))
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        other.require_qubits(self.num_qubits)?;
        let inner: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(inner.norm_sqr())
    }

    /// Entrywise comparison of amplitudes (global phase matters).
    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// The shared Bell state (|00⟩ + |11⟩)/√2; qubit 0 is Alice's, qubit 1 is Bob's.
pub fn epr_pair() -> PureState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    PureState::from_raw(vec![h, z, z, h])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ancilla() -> PureState {
        let s5 = 5f64.sqrt();
        PureState::from_real(&[1.0 / s5, 2.0 / s5]).unwrap()
    }

    #[test]
    fn epr_amplitudes() {
        let epr = epr_pair();
        let expected = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (z, e) in epr.amplitudes().iter().zip(expected) {
            assert!((z - c(e)).norm() < 1e-15);
        }
        let (p0, p1) = epr.outcome_probability(1).unwrap();
        assert!((p0 - 0.5).abs() < 1e-15 && (p1 - 0.5).abs() < 1e-15);
        let rho = epr.reduced_density(0).unwrap();
        assert!(rho.max_abs_difference(&DensityOperator::maximally_mixed()) < 1e-15);
    }

    #[test]
    fn tensor_ordering() {
        let s = PureState::zero().tensor_with(&PureState::one()).unwrap();
        assert!(s.approx_eq(&PureState::basis(2, 0b01).unwrap(), 0.0));

        let s = PureState::plus().tensor_with(&PureState::zero()).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(s.approx_eq(&PureState::from_real(&[h, 0.0, h, 0.0]).unwrap(), 1e-15));

        let s = PureState::one().tensor_with(&ancilla()).unwrap();
        let s5 = 5f64.sqrt();
        let expected = PureState::from_real(&[0.0, 0.0, 1.0 / s5, 2.0 / s5]).unwrap();
        assert!(s.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn tensor_rejects_unnormalized() {
        let bad = PureState::from_raw(vec![c(1.0), c(1.0)]);
        assert!(matches!(
            PureState::zero().tensor_with(&bad),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn cnot_basics() {
        let s = PureState::basis(2, 0b10).unwrap().apply_cnot(0, 1).unwrap();
        assert!(s.approx_eq(&PureState::basis(2, 0b11).unwrap(), 0.0));
        let s = PureState::basis(2, 0b00).unwrap().apply_cnot(0, 1).unwrap();
        assert!(s.approx_eq(&PureState::basis(2, 0b00).unwrap(), 0.0));
        // reversed roles
        let s = PureState::basis(2, 0b01).unwrap().apply_cnot(1, 0).unwrap();
        assert!(s.approx_eq(&PureState::basis(2, 0b11).unwrap(), 0.0));
    }

    #[test]
    fn cnot_errors() {
        let s = epr_pair();
        assert_eq!(s.apply_cnot(1, 1), Err(Error::SameControlTarget(1)));
        assert!(matches!(
            s.apply_cnot(0, 2),
            Err(Error::QubitOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn cnot_on_plus_and_ancilla_matches_closed_form() {
        // {|0⟩(|0⟩+2|1⟩)/√5 ± |1⟩(|1⟩+2|0⟩)/√5}/√2, written out in the basis
        let s5 = 5f64.sqrt();
        let k = 1.0 / (s5 * 2f64.sqrt());
        for (input, sign) in [(PureState::plus(), 1.0), (PureState::minus(), -1.0)] {
            let out = input
                .tensor_with(&ancilla())
                .unwrap()
                .apply_cnot(0, 1)
                .unwrap();
            let expected = PureState::from_real(&[k, 2.0 * k, sign * 2.0 * k, sign * k]).unwrap();
            assert!(out.approx_eq(&expected, 1e-15));
            let (p0, p1) = out.outcome_probability(1).unwrap();
            assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_gates() {
        let s = PureState::zero()
            .apply_single_qubit(&GateMatrix::hadamard(), 0)
            .unwrap();
        assert!(s.approx_eq(&PureState::plus(), 1e-15));
        let s = PureState::plus()
            .apply_single_qubit(&GateMatrix::pauli_z(), 0)
            .unwrap();
        assert!(s.approx_eq(&PureState::minus(), 1e-15));
        assert!(matches!(
            s.apply_single_qubit(&GateMatrix::pauli_x(), 1),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(s.apply_single_qubit(&GateMatrix::cnot(), 0).is_err());
    }

    #[test]
    fn ancilla_probabilities() {
        let (p0, p1) = ancilla().outcome_probability(0).unwrap();
        assert!((p0 - 0.2).abs() < 1e-15);
        assert!((p1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn deterministic_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (rec, post) = PureState::one().measure_qubit(0, &mut rng).unwrap();
            assert_eq!(rec.outcome, 1);
            assert_eq!(rec.probability, 1.0);
            assert!(post.approx_eq(&PureState::one(), 0.0));
        }
    }

    #[test]
    fn measurement_collapses_control_as_in_first_gate() {
        // outcome 0 leaves the control in (|0⟩ ± 2|1⟩)/√5, outcome 1 in (2|0⟩ ± |1⟩)/√5
        let s5 = 5f64.sqrt();
        for (input, sign) in [(PureState::plus(), 1.0), (PureState::minus(), -1.0)] {
            let joint = input
                .tensor_with(&ancilla())
                .unwrap()
                .apply_cnot(0, 1)
                .unwrap();
            let (p, post) = joint.project(1, 0).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
            let control = post.remove_measured_qubit(1).unwrap();
            let want = PureState::from_real(&[1.0 / s5, sign * 2.0 / s5]).unwrap();
            assert!(control.approx_eq(&want, 1e-12));

            let (_, post) = joint.project(1, 1).unwrap();
            let control = post.remove_measured_qubit(1).unwrap();
            let want = PureState::from_real(&[2.0 / s5, sign / s5]).unwrap();
            assert!(control.approx_eq(&want, 1e-12));
        }
    }

    #[test]
    fn zero_probability_projection_is_internal_error() {
        let err = PureState::zero().project(0, 1).unwrap_err();
        assert!(err.is_internal());
    }

    #[test]
    fn remove_requires_collapse() {
        assert!(matches!(
            epr_pair().remove_measured_qubit(0),
            Err(Error::NotCollapsed { index: 0 })
        ));
    }

    #[test]
    fn reduced_density_of_product() {
        let rho = PureState::basis(2, 0b01)
            .unwrap()
            .reduced_density(0)
            .unwrap();
        let expected = DensityOperator::pure(&PureState::zero());
        assert!(rho.max_abs_difference(&expected) < 1e-15);
    }

    #[test]
    fn reduced_density_of_second_gate_state_has_unit_trace() {
        // control (|0⟩ + 2|1⟩)/√5 through a CNOT with a fresh ancilla; trace out the
        // target by summing |amp|² products directly
        let s5 = 5f64.sqrt();
        let control = PureState::from_real(&[1.0 / s5, 2.0 / s5]).unwrap();
        let joint = control
            .tensor_with(&ancilla())
            .unwrap()
            .apply_cnot(0, 1)
            .unwrap();
        let a = joint.amplitudes();
        let direct00 = a[0].norm_sqr() + a[1].norm_sqr();
        let direct11 = a[2].norm_sqr() + a[3].norm_sqr();
        let rho = joint.reduced_density(0).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!((rho.entry(0, 0).re - direct00).abs() < 1e-15);
        assert!((rho.entry(1, 1).re - direct11).abs() < 1e-15);
        let direct01 = a[0] * a[2].conj() + a[1] * a[3].conj();
        assert!((rho.entry(0, 1) - direct01).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            PureState::from_real(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            PureState::from_real(&[1.0, 0.0, 0.0]),
            Err(Error::BadDimension { len: 3 })
        ));
        assert!(matches!(
            PureState::from_real(&[f64::NAN, 0.0]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(PureState::normalized(vec![c(0.0), c(0.0)]).is_err());
    }
}
