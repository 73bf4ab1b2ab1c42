use std::f64::consts::PI;

use epr_cascade::protocol::{ConditionalMean, TransmissionReport};
use epr_cascade::{
    chi_square_gof, empirical_distribution, exact_count_distribution, no_signaling_audit,
    run_cascade, run_transmission_experiment, second_level_summary, teleport_branch,
    teleport_with_ccc, total_variation, uncorrected_average_fidelity, Amplitude, AuditReport,
    CountDistribution, DensityOperator, HypothesisTestResult, PureState, SecondLevelSummary,
    SeedStreams,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CommandKind, RunConfig};
use crate::CliError;

/// Environment variable capping the worker threads used for trials.
pub const THREADS_ENV: &str = "EPR_CASCADE_THREADS";

/// Identical inputs at or below this gap count as indistinguishable.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    pub results: Payload,
    pub tool_version: &'static str,
    pub seed: u64,
    /// Trial-level records for csv output.
    #[serde(skip)]
    pub trials: Vec<TrialRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial_index: usize,
    pub alice_basis: Option<&'static str>,
    pub alice_outcome: Option<u8>,
    pub outcomes: String,
    pub zero_count: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Exact(ExactResult),
    Simulate(SimulateResult),
    Audit(AuditResult),
    Transmit(TransmitResult),
    Teleport(TeleportResult),
}

/// `[re, im]` pairs of the normalized single-qubit amplitudes.
type Amplitudes = [[f64; 2]; 2];

fn amplitudes(a: Amplitude, b: Amplitude) -> Amplitudes {
    [[a.re, a.im], [b.re, b.im]]
}

fn state_amplitudes(s: &PureState) -> Amplitudes {
    amplitudes(s.amplitude(0), s.amplitude(1))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactResult {
    pub state: String,
    pub state_amplitudes: Amplitudes,
    pub ancilla_amplitudes: Amplitudes,
    pub distribution: CountDistribution,
    pub mean_zero_count: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResult {
    pub state: String,
    pub state_amplitudes: Amplitudes,
    pub ancilla_amplitudes: Amplitudes,
    pub trials: usize,
    pub counts: Vec<u64>,
    pub empirical: CountDistribution,
    pub exact: CountDistribution,
    pub total_variation: f64,
    /// Absent when too few trials leave no bin above the pooling threshold.
    pub chi_square: Option<HypothesisTestResult>,
    pub second_level: SecondLevelSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditResult {
    #[serde(flatten)]
    pub audit: AuditReport,
    pub ancilla_amplitudes: Amplitudes,
    pub total_variation: f64,
    /// Whether any exact statistic Bob can compute differs between the bases.
    pub distinguishable: bool,
    pub statement: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransmitResult {
    #[serde(flatten)]
    pub transmission: TransmissionReport,
    pub ancilla_amplitudes: Amplitudes,
}

#[derive(Debug, Clone, Serialize)]
pub struct TeleportResult {
    pub trials: usize,
    /// Fidelity of the sampled run, worst case and mean.
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    /// Worst corrected fidelity over all four forced outcomes of every input.
    pub min_fidelity_all_outcomes: f64,
    /// Occurrences of Alice's outcomes 00, 01, 10, 11 in the sampled runs.
    pub outcome_counts: [usize; 4],
    /// Outcome-averaged fidelity when Bob skips the correction, averaged over inputs.
    pub mean_uncorrected_fidelity: f64,
}

/// Runs the configured command on a thread pool sized by [`THREADS_ENV`].
pub fn run_command(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize =
            raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
                CliError::Config(format!("{THREADS_ENV} must be a positive integer"))
            })?;
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &RunConfig) -> Result<Report, CliError> {
    let cascade = cfg.cascade()?;
    let ancilla_amplitudes = amplitudes(cascade.ancilla.a(), cascade.ancilla.b());
    let streams = SeedStreams::new(cfg.seed);
    let mut trials = Vec::new();

    let results = match cfg.command {
        CommandKind::Exact => {
            let input = cfg.state.as_ref().expect("validated").to_state()?;
            let distribution = exact_count_distribution(&DensityOperator::pure(&input), &cascade)?;
            Payload::Exact(ExactResult {
                state: cfg.state.as_ref().expect("validated").label(),
                state_amplitudes: state_amplitudes(&input),
                ancilla_amplitudes,
                mean_zero_count: distribution.mean(),
                distribution,
            })
        }
        CommandKind::Simulate => {
            let input = cfg.state.as_ref().expect("validated").to_state()?;
            let exact = exact_count_distribution(&DensityOperator::pure(&input), &cascade)?;
            let runs = (0..cfg.trials)
                .into_par_iter()
                .map(|i| run_cascade(&input, &cascade, &mut streams.stream(i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            let counts: Vec<usize> = runs.iter().map(|r| r.zero_count).collect();
            let emp = empirical_distribution(&counts, cascade.rounds)?;
            let empirical = emp.frequencies();
            trials = runs
                .iter()
                .enumerate()
                .map(|(i, r)| TrialRow {
                    trial_index: i,
                    alice_basis: None,
                    alice_outcome: None,
                    outcomes: bits(&r.outcomes),
                    zero_count: r.zero_count,
                })
                .collect();
            Payload::Simulate(SimulateResult {
                state: cfg.state.as_ref().expect("validated").label(),
                state_amplitudes: state_amplitudes(&input),
                ancilla_amplitudes,
                trials: cfg.trials,
                counts: emp.counts().to_vec(),
                total_variation: total_variation(&empirical, &exact)?,
                chi_square: match chi_square_gof(&emp, &exact) {
                    Ok(r) => Some(r),
                    Err(epr_cascade::Error::AllBinsPooled { .. }) => None,
                    Err(e) => return Err(e.into()),
                },
                second_level: second_level_summary(&emp),
                empirical,
                exact,
            })
        }
        CommandKind::Audit => {
            let audit = no_signaling_audit(&cascade)?;
            let tv = total_variation(&audit.d_computational, &audit.d_diagonal)?;
            let gap = audit
                .max_abs_difference
                .max(audit.sequence_distribution_difference);
            let distinguishable = gap > EQUALITY_TOLERANCE;
            let statement = if distinguishable {
                format!("Bob's exact statistics differ between the bases (max gap {gap:e})")
            } else {
                format!(
                    "Bob's zero-count and outcome-sequence laws are identical under both bases \
                     (max gap {gap:e}); no decision rule can beat a coin flip"
                )
            };
            Payload::Audit(AuditResult {
                audit,
                ancilla_amplitudes,
                total_variation: tv,
                distinguishable,
                statement,
            })
        }
        CommandKind::Transmit => {
            let transmission =
                run_transmission_experiment(cfg.num_bits, cfg.group_size, &cascade, &streams)?;
            trials = transmission
                .groups
                .iter()
                .flat_map(|g| g.trials())
                .enumerate()
                .map(|(i, t)| TrialRow {
                    trial_index: i,
                    alice_basis: Some(t.alice_basis.name()),
                    alice_outcome: Some(t.alice_outcome),
                    outcomes: t.outcome_string(),
                    zero_count: t.bob_zero_count,
                })
                .collect();
            Payload::Transmit(TransmitResult {
                transmission,
                ancilla_amplitudes,
            })
        }
        CommandKind::Teleport => Payload::Teleport(teleport_sweep(cfg.trials, &streams)?),
    };

    Ok(Report {
        command: cfg.command.name(),
        config: cfg.clone(),
        results,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        trials,
    })
}

fn bits(outcomes: &[u8]) -> String {
    outcomes
        .iter()
        .map(|&o| if o == 0 { '0' } else { '1' })
        .collect()
}

/// Uniform point on the Bloch sphere.
fn random_qubit<R: Rng>(rng: &mut R) -> PureState {
    let cos_theta: f64 = 1.0 - 2.0 * rng.random::<f64>();
    let phi = 2.0 * PI * rng.random::<f64>();
    let half = cos_theta.clamp(-1.0, 1.0).acos() / 2.0;
    PureState::normalized(vec![
        Amplitude::new(half.cos(), 0.0),
        Amplitude::from_polar(half.sin(), phi),
    ])
    .expect("unit vector")
}

struct TeleportTrial {
    sampled: f64,
    bits: [u8; 2],
    worst_branch: f64,
    uncorrected: f64,
}

fn teleport_sweep(n: usize, streams: &SeedStreams) -> Result<TeleportResult, CliError> {
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i as u64);
            let input = random_qubit(&mut rng);
            let out = teleport_with_ccc(&input, &mut rng)?;
            let mut worst_branch = f64::INFINITY;
            for b in [[0, 0], [0, 1], [1, 0], [1, 1]] {
                worst_branch = worst_branch.min(teleport_branch(&input, b, true)?.1);
            }
            Ok(TeleportTrial {
                sampled: out.fidelity,
                bits: out.alice_bits,
                worst_branch,
                uncorrected: uncorrected_average_fidelity(&input)?,
            })
        })
        .collect::<Result<Vec<_>, epr_cascade::Error>>()?;
    let mut outcome_counts = [0usize; 4];
    for r in &rows {
        outcome_counts[usize::from(r.bits[0]) * 2 + usize::from(r.bits[1])] += 1;
    }
    let nf = n as f64;
    Ok(TeleportResult {
        trials: n,
        min_fidelity: rows.iter().map(|r| r.sampled).fold(f64::INFINITY, f64::min),
        mean_fidelity: rows.iter().map(|r| r.sampled).sum::<f64>() / nf,
        min_fidelity_all_outcomes: rows
            .iter()
            .map(|r| r.worst_branch)
            .fold(f64::INFINITY, f64::min),
        outcome_counts,
        mean_uncorrected_fidelity: rows.iter().map(|r| r.uncorrected).sum::<f64>() / nf,
    })
}

/// Conditional mean zero-counts of a transmit report.
pub fn transmit_conditional_means(report: &Report) -> Option<&[ConditionalMean]> {
    match &report.results {
        Payload::Transmit(t) => Some(&t.transmission.conditional_means),
        _ => None,
    }
}
