//! Alice → Bob experiments over shared EPR pairs.
//!
//! Alice encodes a bit by her measurement basis on a whole group of pairs
//! (0 → computational, 1 → diagonal). Bob runs the cascade on each of his
//! halves and classifies the group from its zero-counts. Group boundaries are
//! a pre-agreed schedule; nothing in the simulation tells Bob where a group
//! starts.
//!
//! [`no_signaling_audit`] compares the exact laws Bob sees under either basis,
//! and [`teleport_with_ccc`] is ordinary teleportation with the two classical
//! bits delivered, used to validate the state-vector kernel.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distinguisher::{
    binomial_distribution, exact_count_distribution, exact_sequence_distribution, run_cascade,
    CascadeConfig, CountDistribution,
};
use crate::error::{Error, Result};
use crate::qcore::{density_from_ensemble, epr_pair, DensityOperator, GateMatrix, PureState};
use crate::rng::SeedStreams;
use crate::stats::{empirical_distribution, second_level_summary, SecondLevelSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisChoice {
    /// {|0⟩, |1⟩}
    Computational,
    /// {(|0⟩ ± |1⟩)/√2}
    Diagonal,
}

impl BasisChoice {
    /// Bit mapping used by the transmission experiment: 0 → computational, 1 → diagonal.
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            BasisChoice::Diagonal
        } else {
            BasisChoice::Computational
        }
    }

    pub fn bit(self) -> bool {
        self == BasisChoice::Diagonal
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisChoice::Computational => "computational",
            BasisChoice::Diagonal => "diagonal",
        }
    }

    /// Bob's qubit when Alice's outcome is unknown: an even mixture of the two
    /// post-measurement states of this basis.
    pub fn bob_ensemble(self) -> Result<DensityOperator> {
        let (s0, s1) = match self {
            BasisChoice::Computational => (PureState::zero(), PureState::one()),
            BasisChoice::Diagonal => (PureState::plus(), PureState::minus()),
        };
        density_from_ensemble(&[(0.5, s0), (0.5, s1)])
    }
}

/// Measures Alice's half of a fresh EPR pair in `basis` and returns her outcome
/// with Bob's collapsed qubit. The diagonal basis is a Hadamard followed by a
/// computational measurement.
pub fn alice_prepare_and_measure<R: Rng + ?Sized>(
    basis: BasisChoice,
    rng: &mut R,
) -> Result<(u8, PureState)> {
    let mut pair = epr_pair();
    if basis == BasisChoice::Diagonal {
        pair = pair.apply_single_qubit(&GateMatrix::hadamard(), 0)?;
    }
    let (record, post) = pair.measure_qubit(0, rng)?;
    let bob = post.remove_measured_qubit(0)?;
    Ok((record.outcome, bob))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub alice_basis: BasisChoice,
    pub alice_outcome: u8,
    pub bob_zero_count: usize,
    pub bob_outcomes: Vec<u8>,
}

impl TrialRecord {
    /// Bob's outcomes as a string of `0`/`1` characters.
    pub fn outcome_string(&self) -> String {
        self.bob_outcomes
            .iter()
            .map(|&o| if o == 0 { '0' } else { '1' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRecord {
    basis: BasisChoice,
    trials: Vec<TrialRecord>,
}

impl GroupRecord {
    pub fn new(basis: BasisChoice, trials: Vec<TrialRecord>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::InvalidSize { what: "group size" });
        }
        if trials.iter().any(|t| t.alice_basis != basis) {
            return Err(Error::InvalidDistribution(
                "trial basis differs from its group".into(),
            ));
        }
        Ok(Self { basis, trials })
    }

    pub fn basis(&self) -> BasisChoice {
        self.basis
    }

    pub fn trials(&self) -> &[TrialRecord] {
        &self.trials
    }

    pub fn zero_counts(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.bob_zero_count).collect()
    }
}

/// `n` trials: Alice measures in `basis`, Bob runs the cascade on his half.
pub fn transmit_group<R: Rng + ?Sized>(
    basis: BasisChoice,
    n: usize,
    cfg: &CascadeConfig,
    rng: &mut R,
) -> Result<GroupRecord> {
    if n == 0 {
        return Err(Error::InvalidSize { what: "group size" });
    }
    let trials = (0..n)
        .map(|_| {
            let (alice_outcome, bob) = alice_prepare_and_measure(basis, rng)?;
            let run = run_cascade(&bob, cfg, rng)?;
            Ok(TrialRecord {
                alice_basis: basis,
                alice_outcome,
                bob_zero_count: run.zero_count,
                bob_outcomes: run.outcomes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GroupRecord::new(basis, trials)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub guessed_basis: BasisChoice,
    /// Σ log d_comp[c] − log d_diag[c]; ±∞ when one reference excludes a count.
    pub log_likelihood_ratio: f64,
    /// The ratio was exactly zero and a coin flip decided.
    pub tie_broken: bool,
    pub summary: SecondLevelSummary,
}

/// Likelihood-ratio decision between the two reference laws.
///
/// Positive ratio → computational, negative → diagonal. A ratio of exactly 0
/// is settled by one fair draw from `rng` (`true` → computational).
pub fn classify_group<R: Rng + ?Sized>(
    group: &GroupRecord,
    d_comp: &CountDistribution,
    d_diag: &CountDistribution,
    rng: &mut R,
) -> Result<Verdict> {
    if d_comp.rounds() != d_diag.rounds() {
        return Err(Error::RoundsMismatch {
            left: d_comp.rounds(),
            right: d_diag.rounds(),
        });
    }
    let counts = group.zero_counts();
    let mut llr = 0.0;
    let (mut excluded_by_comp, mut excluded_by_diag) = (false, false);
    for &c in &counts {
        let (pc, pd) = (d_comp.get(c), d_diag.get(c));
        match (pc > 0.0, pd > 0.0) {
            (true, true) => llr += pc.ln() - pd.ln(),
            (false, true) => excluded_by_comp = true,
            (true, false) => excluded_by_diag = true,
            (false, false) => {
                return Err(Error::InvariantViolation(format!(
                    "count {c} has zero mass under both references"
                )))
            }
        }
    }
    match (excluded_by_comp, excluded_by_diag) {
        (true, true) => {
            return Err(Error::InvariantViolation(
                "group is impossible under both references".into(),
            ))
        }
        (true, false) => llr = f64::NEG_INFINITY,
        (false, true) => llr = f64::INFINITY,
        (false, false) => {}
    }
    let tie_broken = llr == 0.0;
    let guessed_basis = if llr > 0.0 {
        BasisChoice::Computational
    } else if llr < 0.0 {
        BasisChoice::Diagonal
    } else if rng.random::<bool>() {
        BasisChoice::Computational
    } else {
        BasisChoice::Diagonal
    };
    let summary = second_level_summary(&empirical_distribution(&counts, d_comp.rounds())?);
    Ok(Verdict {
        guessed_basis,
        log_likelihood_ratio: llr,
        tie_broken,
        summary,
    })
}

/// Exact zero-count laws Bob faces under each basis: `(computational, diagonal)`.
pub fn reference_laws(cfg: &CascadeConfig) -> Result<(CountDistribution, CountDistribution)> {
    Ok((
        exact_count_distribution(&BasisChoice::Computational.bob_ensemble()?, cfg)?,
        exact_count_distribution(&BasisChoice::Diagonal.bob_ensemble()?, cfg)?,
    ))
}

/// Mean zero-count conditioned on Alice's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalMean {
    pub alice_basis: BasisChoice,
    pub alice_outcome: u8,
    pub trials: usize,
    pub mean_zero_count: f64,
}

pub fn conditional_means<'a>(
    trials: impl IntoIterator<Item = &'a TrialRecord>,
) -> Vec<ConditionalMean> {
    let mut acc = [[(0usize, 0usize); 2]; 2];
    for t in trials {
        let slot = &mut acc[usize::from(t.alice_basis.bit())][usize::from(t.alice_outcome)];
        slot.0 += 1;
        slot.1 += t.bob_zero_count;
    }
    let mut out = Vec::new();
    for basis in [BasisChoice::Computational, BasisChoice::Diagonal] {
        for outcome in 0..2u8 {
            let (n, sum) = acc[usize::from(basis.bit())][usize::from(outcome)];
            if n > 0 {
                out.push(ConditionalMean {
                    alice_basis: basis,
                    alice_outcome: outcome,
                    trials: n,
                    mean_zero_count: sum as f64 / n as f64,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionReport {
    pub num_bits: usize,
    pub group_size: usize,
    pub rounds: usize,
    pub bit_errors: usize,
    pub bit_error_rate: f64,
    /// Wilson score interval at `confidence_level`.
    pub confidence_interval: [f64; 2],
    pub confidence_level: f64,
    pub ties_broken: usize,
    /// Alice's message as `0`/`1` characters.
    pub sent: String,
    pub decoded: String,
    pub reference_computational: CountDistribution,
    pub reference_diagonal: CountDistribution,
    /// Pooled zero-count statistics over all groups sent in each basis.
    pub summary_computational: Option<SecondLevelSummary>,
    pub summary_diagonal: Option<SecondLevelSummary>,
    pub conditional_means: Vec<ConditionalMean>,
    #[serde(skip)]
    pub groups: Vec<GroupRecord>,
}

const MESSAGE_DOMAIN: u64 = 0;
const GROUP_DOMAIN: u64 = 1;
const Z_95: f64 = 1.959_963_984_540_054;

/// Sends `num_bits` random bits, one group of `n` pairs per bit, and decodes
/// each with [`classify_group`] against the exact reference laws.
///
/// Alice's message comes from one stream of the message domain; group `i`
/// (trials and tie-break) uses stream `i` of the group domain. Groups run on
/// the ambient rayon pool and are assembled in order.
pub fn run_transmission_experiment(
    num_bits: usize,
    n: usize,
    cfg: &CascadeConfig,
    streams: &SeedStreams,
) -> Result<TransmissionReport> {
    if num_bits == 0 {
        return Err(Error::InvalidSize {
            what: "number of bits",
        });
    }
    if n == 0 {
        return Err(Error::InvalidSize { what: "group size" });
    }
    let (d_comp, d_diag) = reference_laws(cfg)?;
    let mut message_rng = streams.domain(MESSAGE_DOMAIN).stream(0);
    let message: Vec<bool> = (0..num_bits).map(|_| message_rng.random()).collect();
    let group_streams = streams.domain(GROUP_DOMAIN);

    let decoded: Vec<(GroupRecord, Verdict)> = message
        .par_iter()
        .enumerate()
        .map(|(i, &bit)| {
            let mut rng = group_streams.stream(i as u64);
            let group = transmit_group(BasisChoice::from_bit(bit), n, cfg, &mut rng)?;
            let verdict = classify_group(&group, &d_comp, &d_diag, &mut rng)?;
            Ok((group, verdict))
        })
        .collect::<Result<_>>()?;

    let bit_errors = decoded
        .iter()
        .filter(|(g, v)| g.basis() != v.guessed_basis)
        .count();
    let ties_broken = decoded.iter().filter(|(_, v)| v.tie_broken).count();
    let to_char = |b: bool| if b { '1' } else { '0' };
    let sent = message.iter().map(|&b| to_char(b)).collect();
    let decoded_bits = decoded
        .iter()
        .map(|(_, v)| to_char(v.guessed_basis.bit()))
        .collect();

    let pooled = |basis: BasisChoice| -> Result<Option<SecondLevelSummary>> {
        let counts: Vec<usize> = decoded
            .iter()
            .filter(|(g, _)| g.basis() == basis)
            .flat_map(|(g, _)| g.zero_counts())
            .collect();
        if counts.is_empty() {
            return Ok(None);
        }
        Ok(Some(second_level_summary(&empirical_distribution(
            &counts, cfg.rounds,
        )?)))
    };
    let summary_computational = pooled(BasisChoice::Computational)?;
    let summary_diagonal = pooled(BasisChoice::Diagonal)?;
    let groups: Vec<GroupRecord> = decoded.into_iter().map(|(g, _)| g).collect();
    let conditional_means = conditional_means(groups.iter().flat_map(|g| g.trials()));

    Ok(TransmissionReport {
        num_bits,
        group_size: n,
        rounds: cfg.rounds,
        bit_errors,
        bit_error_rate: bit_errors as f64 / num_bits as f64,
        confidence_interval: wilson_interval(bit_errors, num_bits, Z_95),
        confidence_level: 0.95,
        ties_broken,
        sent,
        decoded: decoded_bits,
        reference_computational: d_comp,
        reference_diagonal: d_diag,
        summary_computational,
        summary_diagonal,
        conditional_means,
        groups,
    })
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> [f64; 2] {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n_f)) / (1.0 + z2 / n_f);
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / (1.0 + z2 / n_f);
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub rounds: usize,
    pub d_computational: CountDistribution,
    pub d_diagonal: CountDistribution,
    /// max |d_computational[c] − d_diagonal[c]|
    pub max_abs_difference: f64,
    /// Largest difference between the two laws of the full outcome sequence.
    pub sequence_distribution_difference: f64,
    /// ½·D(|+⟩⟨+|) + ½·D(|−⟩⟨−|), each from its own branch tree.
    pub diagonal_from_components: CountDistribution,
    /// ½·Bin(k, |a|²) + ½·Bin(k, |b|²)
    pub binomial_mixture: CountDistribution,
    /// Largest gap between `d_diagonal` and either independent reconstruction.
    pub decomposition_max_abs_difference: f64,
}

/// Exact comparison of what Bob can observe under the two bases.
pub fn no_signaling_audit(cfg: &CascadeConfig) -> Result<AuditReport> {
    let comp = BasisChoice::Computational.bob_ensemble()?;
    let diag = BasisChoice::Diagonal.bob_ensemble()?;
    let d_computational = exact_count_distribution(&comp, cfg)?;
    let d_diagonal = exact_count_distribution(&diag, cfg)?;
    let max_abs_difference = d_computational.max_abs_difference(&d_diagonal);

    let seq_comp = exact_sequence_distribution(&comp, cfg)?;
    let seq_diag = exact_sequence_distribution(&diag, cfg)?;
    let sequence_distribution_difference = seq_comp
        .iter()
        .zip(&seq_diag)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let d_plus = exact_count_distribution(&DensityOperator::pure(&PureState::plus()), cfg)?;
    let d_minus = exact_count_distribution(&DensityOperator::pure(&PureState::minus()), cfg)?;
    let diagonal_from_components = CountDistribution::mixture(0.5, &d_plus, &d_minus)?;
    let binomial_mixture = CountDistribution::mixture(
        0.5,
        &binomial_distribution(
            cfg.rounds,
            cfg.ancilla.zero_probability_given_control_zero(),
        )?,
        &binomial_distribution(cfg.rounds, cfg.ancilla.zero_probability_given_control_one())?,
    )?;
    let decomposition_max_abs_difference = d_diagonal
        .max_abs_difference(&diagonal_from_components)
        .max(d_diagonal.max_abs_difference(&binomial_mixture));

    Ok(AuditReport {
        rounds: cfg.rounds,
        d_computational,
        d_diagonal,
        max_abs_difference,
        sequence_distribution_difference,
        diagonal_from_components,
        binomial_mixture,
        decomposition_max_abs_difference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TeleportOutcome {
    /// Alice's two classical bits: (input qubit, her EPR half).
    pub alice_bits: [u8; 2],
    pub fidelity: f64,
}

fn teleport_prepare(input: &PureState) -> Result<PureState> {
    if input.num_qubits() != 1 {
        return Err(Error::WrongQubitCount {
            expected: 1,
            actual: input.num_qubits(),
        });
    }
    // qubit 0: input, 1: Alice's EPR half, 2: Bob's EPR half
    input
        .tensor_with(&epr_pair())?
        .apply_cnot(0, 1)?
        .apply_single_qubit(&GateMatrix::hadamard(), 0)
}

fn bob_after(post: &PureState, bits: [u8; 2], corrected: bool) -> Result<PureState> {
    let mut bob = post.remove_measured_qubit(0)?.remove_measured_qubit(0)?;
    if corrected {
        if bits[1] == 1 {
            bob = bob.apply_single_qubit(&GateMatrix::pauli_x(), 0)?;
        }
        if bits[0] == 1 {
            bob = bob.apply_single_qubit(&GateMatrix::pauli_z(), 0)?;
        }
    }
    Ok(bob)
}

/// Standard teleportation: Bell measurement by Alice, the two bits sent over
/// a classical channel, Pauli correction by Bob. Returns |⟨input|bob⟩|².
pub fn teleport_with_ccc<R: Rng + ?Sized>(
    input: &PureState,
    rng: &mut R,
) -> Result<TeleportOutcome> {
    let state = teleport_prepare(input)?;
    let (m0, state) = state.measure_qubit(0, rng)?;
    let (m1, state) = state.measure_qubit(1, rng)?;
    let bits = [m0.outcome, m1.outcome];
    let bob = bob_after(&state, bits, true)?;
    Ok(TeleportOutcome {
        alice_bits: bits,
        fidelity: input.fidelity(&bob)?,
    })
}

/// Forces Alice's outcome to `bits`; returns `(probability, fidelity)` with or
/// without Bob's correction.
pub fn teleport_branch(input: &PureState, bits: [u8; 2], corrected: bool) -> Result<(f64, f64)> {
    let state = teleport_prepare(input)?;
    let (p0, state) = state.project(0, bits[0])?;
    let (p1, state) = state.project(1, bits[1])?;
    let bob = bob_after(&state, bits, corrected)?;
    Ok((p0 * p1, input.fidelity(&bob)?))
}

/// Probability-weighted fidelity over all four outcomes when Bob skips the
/// correction.
pub fn uncorrected_average_fidelity(input: &PureState) -> Result<f64> {
    let mut total = 0.0;
    for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let (p, f) = teleport_branch(input, bits, false)?;
        total += p * f;
    }
    Ok(total)
}
