//! Bob's CNOT ancilla cascade.
//!
//! Each round attaches a fresh ancilla `a|0⟩ + b|1⟩` as the target of a CNOT
//! controlled by Bob's qubit, measures the ancilla in the computational basis
//! and throws it away. The observable is the number of rounds whose ancilla
//! reads `0`.
//!
//! Two independent routes are provided:
//!
//! * [`run_cascade`] samples one run on a state vector, collapsing as it goes.
//! * [`exact_count_distribution`] enumerates every outcome branch on the
//!   density operator of the control, never renormalizing, so each leaf's
//!   trace is its probability.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{Amplitude, DensityOperator, GateMatrix, PureState, VALIDATION_TOL};

/// Default cap on the number of enumerated branches (`2^20`, i.e. 20 rounds).
pub const DEFAULT_BRANCH_BUDGET: u64 = 1 << 20;

/// Ancilla preparation `a|0⟩ + b|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncillaSpec {
    a: Amplitude,
    b: Amplitude,
}

impl AncillaSpec {
    pub fn new(a: Amplitude, b: Amplitude) -> Result<Self> {
        PureState::qubit(a, b)?;
        Ok(Self { a, b })
    }

    /// Scales `(a, b)` to unit norm first.
    pub fn normalized(a: Amplitude, b: Amplitude) -> Result<Self> {
        let s = PureState::normalized(vec![a, b])?;
        Ok(Self {
            a: s.amplitude(0),
            b: s.amplitude(1),
        })
    }

    pub fn real(a: f64, b: f64) -> Result<Self> {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    pub fn a(&self) -> Amplitude {
        self.a
    }

    pub fn b(&self) -> Amplitude {
        self.b
    }

    /// Probability that the ancilla reads 0 when the control is `|0⟩`: `|a|²`.
    pub fn zero_probability_given_control_zero(&self) -> f64 {
        self.a.norm_sqr()
    }

    /// Probability that the ancilla reads 0 when the control is `|1⟩`: `|b|²`.
    pub fn zero_probability_given_control_one(&self) -> f64 {
        self.b.norm_sqr()
    }

    pub fn state(&self) -> PureState {
        PureState::from_raw(vec![self.a, self.b])
    }
}

impl Default for AncillaSpec {
    /// (|0⟩ + 2|1⟩)/√5
    fn default() -> Self {
        let s5 = 5f64.sqrt();
        Self {
            a: Complex64::new(1.0 / s5, 0.0),
            b: Complex64::new(2.0 / s5, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeConfig {
    pub rounds: usize,
    pub ancilla: AncillaSpec,
}

impl CascadeConfig {
    pub fn new(rounds: usize, ancilla: AncillaSpec) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidRounds);
        }
        Ok(Self { rounds, ancilla })
    }

    pub fn with_rounds(rounds: usize) -> Result<Self> {
        Self::new(rounds, AncillaSpec::default())
    }
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            rounds: 5,
            ancilla: AncillaSpec::default(),
        }
    }
}

/// One sampled run of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeResult {
    pub outcomes: Vec<u8>,
    pub zero_count: usize,
    /// Born probability of each realized outcome, in round order.
    pub step_probabilities: Vec<f64>,
    /// Bob's qubit after the last round, conditioned on the observed outcomes.
    pub final_control: PureState,
}

/// Probability mass over zero-counts `0..=rounds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountDistribution {
    rounds: usize,
    mass: Vec<f64>,
}

impl CountDistribution {
    pub fn new(rounds: usize, mass: Vec<f64>) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidRounds);
        }
        if mass.len() != rounds + 1 {
            return Err(Error::InvalidDistribution(format!(
                "{} entries for {rounds} rounds",
                mass.len()
            )));
        }
        if let Some(c) = mass.iter().position(|m| !m.is_finite() || *m < -1e-12) {
            return Err(Error::InvalidDistribution(format!(
                "mass {} at count {c}",
                mass[c]
            )));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {sum}")));
        }
        Ok(Self { rounds, mass })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass at `count`, zero outside the support.
    pub fn get(&self, count: usize) -> f64 {
        self.mass.get(count).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(c, m)| c as f64 * m)
            .sum()
    }

    /// `w·a + (1 − w)·b`
    pub fn mixture(w: f64, a: &Self, b: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidProbability(w));
        }
        if a.rounds != b.rounds {
            return Err(Error::RoundsMismatch {
                left: a.rounds,
                right: b.rounds,
            });
        }
        let mass = a
            .mass
            .iter()
            .zip(&b.mass)
            .map(|(x, y)| w * x + (1.0 - w) * y)
            .collect();
        Self::new(a.rounds, mass)
    }

    /// Largest entrywise difference; infinite when the rounds differ.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        if self.rounds != other.rounds {
            return f64::INFINITY;
        }
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

fn require_single_qubit(control: &PureState) -> Result<()> {
    if control.num_qubits() != 1 {
        return Err(Error::WrongQubitCount {
            expected: 1,
            actual: control.num_qubits(),
        });
    }
    Ok(())
}

/// `CNOT(control ⊗ ancilla)` with qubit 0 the control and qubit 1 the target,
/// before the target is measured.
pub fn cascade_step(control: &PureState, ancilla: &AncillaSpec) -> Result<PureState> {
    require_single_qubit(control)?;
    control.tensor_with(&ancilla.state())?.apply_cnot(0, 1)
}

/// Born probability that the target of [`cascade_step`] reads 0.
pub fn step_zero_probability(control: &PureState, ancilla: &AncillaSpec) -> Result<f64> {
    let (p0, _) = cascade_step(control, ancilla)?.outcome_probability(1)?;
    Ok(p0)
}

/// Samples `cfg.rounds` rounds: attach a fresh ancilla, CNOT, measure the
/// target, collapse, discard the target.
pub fn run_cascade<R: Rng + ?Sized>(
    control: &PureState,
    cfg: &CascadeConfig,
    rng: &mut R,
) -> Result<CascadeResult> {
    require_single_qubit(control)?;
    let mut control = control.clone();
    let mut outcomes = Vec::with_capacity(cfg.rounds);
    let mut step_probabilities = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let joint = cascade_step(&control, &cfg.ancilla)?;
        let (record, post) = joint.measure_qubit(1, rng)?;
        outcomes.push(record.outcome);
        step_probabilities.push(record.probability);
        control = post.remove_measured_qubit(1).map_err(|e| {
            Error::InvariantViolation(format!("target did not collapse after measurement: {e}"))
        })?;
    }
    let zero_count = outcomes.iter().filter(|&&o| o == 0).count();
    Ok(CascadeResult {
        outcomes,
        zero_count,
        step_probabilities,
        final_control: control,
    })
}

/// Exact law of the zero-count under the default branch budget.
pub fn exact_count_distribution(
    input: &DensityOperator,
    cfg: &CascadeConfig,
) -> Result<CountDistribution> {
    exact_count_distribution_with_budget(input, cfg, DEFAULT_BRANCH_BUDGET)
}

pub fn exact_count_distribution_with_budget(
    input: &DensityOperator,
    cfg: &CascadeConfig,
    budget: u64,
) -> Result<CountDistribution> {
    let leaves = exact_sequence_distribution_with_budget(input, cfg, budget)?;
    let mut mass = vec![0.0; cfg.rounds + 1];
    for (seq, p) in leaves.iter().enumerate() {
        // outcome bits that are 0 count toward the zero-count
        let ones = seq.count_ones() as usize;
        mass[cfg.rounds - ones] += p;
    }
    CountDistribution::new(cfg.rounds, mass)
        .map_err(|e| Error::InvariantViolation(format!("branch tree lost mass: {e}")))
}

/// Probability of every full outcome sequence. Index bit `rounds − 1 − r` holds
/// the outcome of round `r`, so the first round is the most significant bit.
pub fn exact_sequence_distribution(
    input: &DensityOperator,
    cfg: &CascadeConfig,
) -> Result<Vec<f64>> {
    exact_sequence_distribution_with_budget(input, cfg, DEFAULT_BRANCH_BUDGET)
}

pub fn exact_sequence_distribution_with_budget(
    input: &DensityOperator,
    cfg: &CascadeConfig,
    budget: u64,
) -> Result<Vec<f64>> {
    if cfg.rounds == 0 {
        return Err(Error::InvalidRounds);
    }
    if input.num_qubits() != 1 {
        return Err(Error::WrongQubitCount {
            expected: 1,
            actual: input.num_qubits(),
        });
    }
    input.validate()?;
    let branches = 1u128.checked_shl(cfg.rounds as u32).unwrap_or(u128::MAX);
    if cfg.rounds >= 64 || branches > u128::from(budget) {
        return Err(Error::BranchBudgetExceeded {
            rounds: cfg.rounds,
            branches,
            budget,
        });
    }
    let tree = BranchTree::new(&cfg.ancilla);
    let mut leaves = vec![0.0; 1 << cfg.rounds];
    let rho: Mat2 = input.entries().try_into().expect("single-qubit operator");
    tree.descend(&rho, cfg.rounds, 0, &mut leaves);
    Ok(leaves)
}

type Mat2 = [Complex64; 4];
type Mat4 = [Complex64; 16];

/// Unnormalized conditional-operator propagation through CNOT-and-project.
struct BranchTree {
    cnot: Mat4,
    ancilla: Mat2,
}

impl BranchTree {
    fn new(ancilla: &AncillaSpec) -> Self {
        let cnot: Mat4 = GateMatrix::cnot()
            .entries()
            .try_into()
            .expect("two-qubit gate");
        let (a, b) = (ancilla.a(), ancilla.b());
        let ancilla = [a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()];
        Self { cnot, ancilla }
    }

    fn descend(&self, rho: &Mat2, remaining: usize, prefix: usize, leaves: &mut [f64]) {
        if remaining == 0 {
            leaves[prefix] = (rho[0] + rho[3]).re;
            return;
        }
        for outcome in 0..2 {
            let next = self.step(rho, outcome);
            self.descend(&next, remaining - 1, (prefix << 1) | outcome, leaves);
        }
    }

    /// Tr_target[(I ⊗ |o⟩⟨o|) U (ρ ⊗ σ) U† (I ⊗ |o⟩⟨o|)]
    fn step(&self, rho: &Mat2, outcome: usize) -> Mat2 {
        let joint = kron(rho, &self.ancilla);
        let evolved = mul4(&mul4(&self.cnot, &joint), &adjoint4(&self.cnot));
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for r in 0..2 {
            for c in 0..2 {
                out[r * 2 + c] = evolved[(2 * r + outcome) * 4 + (2 * c + outcome)];
            }
        }
        out
    }
}

fn kron(x: &Mat2, y: &Mat2) -> Mat4 {
    let mut out = [Complex64::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = x[(r / 2) * 2 + c / 2] * y[(r % 2) * 2 + c % 2];
        }
    }
    out
}

fn mul4(x: &Mat4, y: &Mat4) -> Mat4 {
    let mut out = [Complex64::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = (0..4).map(|k| x[r * 4 + k] * y[k * 4 + c]).sum();
        }
    }
    out
}

fn adjoint4(x: &Mat4) -> Mat4 {
    let mut out = [Complex64::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = x[c * 4 + r].conj();
        }
    }
    out
}

/// `mass[c] = C(k, c) pᶜ (1 − p)^(k − c)`
pub fn binomial_distribution(k: usize, p: f64) -> Result<CountDistribution> {
    if k == 0 {
        return Err(Error::InvalidRounds);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut mass = Vec::with_capacity(k + 1);
    let mut choose = 1.0f64;
    for c in 0..=k {
        if c > 0 {
            choose = choose * (k - c + 1) as f64 / c as f64;
        }
        mass.push(choose * p.powi(c as i32) * (1.0 - p).powi((k - c) as i32));
    }
    CountDistribution::new(k, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s5() -> f64 {
        5f64.sqrt()
    }

    #[test]
    fn step_probabilities_from_the_worked_example() {
        let anc = AncillaSpec::default();
        let cases = [
            (PureState::zero(), 0.2),
            (PureState::one(), 0.8),
            (PureState::plus(), 0.5),
            (PureState::minus(), 0.5),
            (
                PureState::from_real(&[1.0 / s5(), 2.0 / s5()]).unwrap(),
                17.0 / 25.0,
            ),
            (
                PureState::from_real(&[1.0 / s5(), -2.0 / s5()]).unwrap(),
                17.0 / 25.0,
            ),
            (
                PureState::from_real(&[2.0 / s5(), 1.0 / s5()]).unwrap(),
                8.0 / 25.0,
            ),
            (
                PureState::from_real(&[2.0 / s5(), -1.0 / s5()]).unwrap(),
                8.0 / 25.0,
            ),
        ];
        for (control, want) in cases {
            let got = step_zero_probability(&control, &anc).unwrap();
            assert!((got - want).abs() < 1e-12, "{control:?}: {got} vs {want}");
        }
    }

    #[test]
    fn step_probability_closed_form() {
        // |c0|²|a|² + |c1|²|b|² for a complex ancilla and control
        let anc =
            AncillaSpec::normalized(Complex64::new(0.3, 0.4), Complex64::new(-0.2, 0.9)).unwrap();
        let control =
            PureState::normalized(vec![Complex64::new(0.6, -0.1), Complex64::new(0.2, 0.7)])
                .unwrap();
        let c = control.amplitudes();
        let want = c[0].norm_sqr() * anc.a().norm_sqr() + c[1].norm_sqr() * anc.b().norm_sqr();
        let got = step_zero_probability(&control, &anc).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn second_gate_state_matches_closed_form() {
        // {|0⟩(|0⟩+2|1⟩)/√5 ± 2|1⟩(|1⟩+2|0⟩)/√5}/√5
        for sign in [1.0, -1.0] {
            let control = PureState::from_real(&[1.0 / s5(), sign * 2.0 / s5()]).unwrap();
            let out = cascade_step(&control, &AncillaSpec::default()).unwrap();
            let want =
                PureState::from_real(&[1.0 / 5.0, 2.0 / 5.0, sign * 4.0 / 5.0, sign * 2.0 / 5.0])
                    .unwrap();
            assert!(out.approx_eq(&want, 1e-15));
        }
    }

    #[test]
    fn trivial_ancilla_keeps_zero() {
        let anc = AncillaSpec::real(1.0, 0.0).unwrap();
        let out = cascade_step(&PureState::zero(), &anc).unwrap();
        assert!(out.approx_eq(&PureState::basis(2, 0).unwrap(), 0.0));
        let cfg = CascadeConfig::new(7, anc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let run = run_cascade(&PureState::zero(), &cfg, &mut rng).unwrap();
        assert_eq!(run.zero_count, 7);
        assert!(run.outcomes.iter().all(|&o| o == 0));
    }

    #[test]
    fn run_records_are_consistent() {
        let cfg = CascadeConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let run = run_cascade(&PureState::plus(), &cfg, &mut rng).unwrap();
            assert_eq!(run.outcomes.len(), 5);
            assert_eq!(
                run.zero_count,
                run.outcomes.iter().filter(|&&o| o == 0).count()
            );
            assert!(run.step_probabilities.iter().all(|&p| p > 0.0 && p <= 1.0));
            assert!((run.final_control.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn branch_chain_after_first_outcome() {
        // from |+⟩: outcome 0 then next step 17/25, outcome 1 then 8/25
        let anc = AncillaSpec::default();
        for start in [PureState::plus(), PureState::minus()] {
            let joint = cascade_step(&start, &anc).unwrap();
            for (outcome, want) in [(0u8, 17.0 / 25.0), (1, 8.0 / 25.0)] {
                let (_, post) = joint.project(1, outcome).unwrap();
                let control = post.remove_measured_qubit(1).unwrap();
                let p = step_zero_probability(&control, &anc).unwrap();
                assert!((p - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binomial_values() {
        let d = binomial_distribution(5, 0.2).unwrap();
        let want = [0.32768, 0.4096, 0.2048, 0.0512, 0.0064, 0.00032];
        for (g, w) in d.mass().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        let argmax = |d: &CountDistribution| {
            (0..=d.rounds())
                .max_by(|&x, &y| d.get(x).total_cmp(&d.get(y)))
                .unwrap()
        };
        assert_eq!(argmax(&d), 1);
        assert_eq!(argmax(&binomial_distribution(5, 0.8).unwrap()), 4);
        let zero = binomial_distribution(9, 0.0).unwrap();
        assert_eq!(zero.get(0), 1.0);
        assert!(zero.mass()[1..].iter().all(|&m| m == 0.0));
        assert_eq!(
            binomial_distribution(5, 1.5),
            Err(Error::InvalidProbability(1.5))
        );
        assert_eq!(binomial_distribution(0, 0.5), Err(Error::InvalidRounds));
    }

    #[test]
    fn mixed_single_round() {
        let cfg = CascadeConfig::with_rounds(1).unwrap();
        let d = exact_count_distribution(&DensityOperator::maximally_mixed(), &cfg).unwrap();
        assert!((d.get(0) - 0.5).abs() < 1e-15 && (d.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn branch_budget() {
        let cfg = CascadeConfig::with_rounds(21).unwrap();
        let err = exact_count_distribution(&DensityOperator::maximally_mixed(), &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::BranchBudgetExceeded { rounds: 21, .. }
        ));
        let cfg = CascadeConfig::with_rounds(6).unwrap();
        assert!(exact_count_distribution_with_budget(
            &DensityOperator::maximally_mixed(),
            &cfg,
            32
        )
        .is_err());
        let cfg = CascadeConfig::with_rounds(100).unwrap();
        assert!(exact_count_distribution(&DensityOperator::maximally_mixed(), &cfg).is_err());
    }

    #[test]
    fn count_distribution_validation() {
        assert!(CountDistribution::new(2, vec![0.5, 0.5]).is_err());
        assert!(CountDistribution::new(1, vec![0.7, 0.7]).is_err());
        assert!(CountDistribution::new(1, vec![1.1, -0.1]).is_err());
        assert!(CountDistribution::new(0, vec![1.0]).is_err());
        CountDistribution::new(1, vec![1.0 + 1e-13, -1e-13]).unwrap();
    }

    #[test]
    fn config_rejects_zero_rounds() {
        assert_eq!(CascadeConfig::with_rounds(0), Err(Error::InvalidRounds));
        assert!(AncillaSpec::real(1.0, 1.0).is_err());
    }
}
