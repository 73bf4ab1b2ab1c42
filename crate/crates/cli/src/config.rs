use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epr_cascade::{Amplitude, AncillaSpec, CascadeConfig, PureState};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_ROUNDS: usize = 5;
pub const DEFAULT_GROUP_SIZE: usize = 10;
pub const DEFAULT_SIMULATE_TRIALS: usize = 10_000;
pub const DEFAULT_TELEPORT_TRIALS: usize = 100;
pub const DEFAULT_BITS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Exact zero-count law for one input state
    Exact,
    /// Monte Carlo cascades compared against the exact law
    Simulate,
    /// Exact comparison of Bob's statistics under both of Alice's bases
    Audit,
    /// Group-based bit transmission and its bit-error rate
    Transmit,
    /// Teleportation with the classical channel, as a simulator check
    Teleport,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Exact => "exact",
            CommandKind::Simulate => "simulate",
            CommandKind::Audit => "audit",
            CommandKind::Transmit => "transmit",
            CommandKind::Teleport => "teleport",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Bob's cascade input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputState {
    /// One of `0`, `1`, `+`, `-`.
    Named(String),
    /// `[a0_re, a0_im, a1_re, a1_im]`, normalized on use.
    Amplitudes([f64; 4]),
}

impl InputState {
    pub fn to_state(&self) -> Result<PureState, CliError> {
        match self {
            InputState::Named(name) => match name.as_str() {
                "0" => Ok(PureState::zero()),
                "1" => Ok(PureState::one()),
                "+" => Ok(PureState::plus()),
                "-" => Ok(PureState::minus()),
                other => Err(CliError::Config(format!(
                    "unknown state {other:?}; expected one of 0, 1, +, -"
                ))),
            },
            InputState::Amplitudes([a, b, c, d]) => {
                PureState::normalized(vec![Amplitude::new(*a, *b), Amplitude::new(*c, *d)])
                    .map_err(|e| CliError::Config(format!("--amp: {e}")))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InputState::Named(name) => name.clone(),
            InputState::Amplitudes(v) => format!("{},{},{},{}", v[0], v[1], v[2], v[3]),
        }
    }
}

/// A fully validated run. Serialized verbatim into every report so the report
/// can be regenerated from its own echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub rounds: usize,
    /// Ancilla amplitudes as given, `[a_re, a_im, b_re, b_im]`, before normalization.
    pub ancilla: [f64; 4],
    pub state: Option<InputState>,
    pub trials: usize,
    pub group_size: usize,
    pub num_bits: usize,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn ancilla_spec(&self) -> Result<AncillaSpec, CliError> {
        let [ar, ai, br, bi] = self.ancilla;
        AncillaSpec::normalized(Amplitude::new(ar, ai), Amplitude::new(br, bi))
            .map_err(|e| CliError::Config(format!("--ancilla: {e}")))
    }

    pub fn cascade(&self) -> Result<CascadeConfig, CliError> {
        CascadeConfig::new(self.rounds, self.ancilla_spec()?)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.rounds == 0 {
            return Err(CliError::Config("--rounds must be at least 1".into()));
        }
        for (name, v) in [
            ("--trials", self.trials),
            ("--group-size", self.group_size),
            ("--bits", self.num_bits),
        ] {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be at least 1")));
            }
        }
        self.ancilla_spec()?;
        match (&self.state, self.command) {
            (Some(s), _) => {
                s.to_state()?;
            }
            (None, CommandKind::Exact | CommandKind::Simulate) => {
                return Err(CliError::Config(format!(
                    "{} needs --state or --amp",
                    self.command.name()
                )))
            }
            (None, _) => {}
        }
        if self.output_format == OutputFormat::Csv
            && !matches!(self.command, CommandKind::Simulate | CommandKind::Transmit)
        {
            return Err(CliError::Config(format!(
                "csv output holds trial records; `{}` has none, use --format json",
                self.command.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "epr-cascade",
    version,
    about = "EPR pair CNOT-cascade simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact zero-count distribution for an input state
    Exact {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Monte Carlo cascade trials with goodness of fit against the exact law
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_SIMULATE_TRIALS)]
        trials: usize,
    },
    /// Compare Bob's exact statistics under Alice's two bases
    Audit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Send random bits, one group of EPR pairs per bit, and measure the error rate
    Transmit {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = DEFAULT_GROUP_SIZE)]
        group_size: usize,
        #[arg(long = "bits", default_value_t = DEFAULT_BITS)]
        bits: usize,
    },
    /// Teleport random states with the classical correction bits
    Teleport {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = DEFAULT_TELEPORT_TRIALS)]
        trials: usize,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Cascade rounds per run
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    rounds: usize,
    /// Ancilla amplitudes "a,b" (real) or "a_re,a_im,b_re,b_im"; normalized on use
    #[arg(long, default_value = "1,2", allow_hyphen_values = true)]
    ancilla: String,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of standard output
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Named input state: 0, 1, + or -
    #[arg(long, allow_hyphen_values = true, conflicts_with = "amp")]
    state: Option<String>,
    /// Explicit input amplitudes "a0_re,a0_im,a1_re,a1_im"
    #[arg(long, allow_hyphen_values = true)]
    amp: Option<String>,
}

fn parse_numbers(flag: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Config(format!("{flag}: invalid number {s:?}")))
        })
        .collect()
}

fn parse_ancilla(raw: &str) -> Result<[f64; 4], CliError> {
    match *parse_numbers("--ancilla", raw)?.as_slice() {
        [a, b] => Ok([a, 0.0, b, 0.0]),
        [ar, ai, br, bi] => Ok([ar, ai, br, bi]),
        _ => Err(CliError::Config(
            "--ancilla expects \"a,b\" or \"a_re,a_im,b_re,b_im\"".into(),
        )),
    }
}

fn parse_input(input: InputArgs) -> Result<Option<InputState>, CliError> {
    if let Some(raw) = input.amp {
        let v = parse_numbers("--amp", &raw)?;
        let arr: [f64; 4] = v
            .try_into()
            .map_err(|_| CliError::Config("--amp expects four numbers".into()))?;
        return Ok(Some(InputState::Amplitudes(arr)));
    }
    Ok(input.state.map(InputState::Named))
}

/// Parses `argv` (including the program name) into a validated config.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;

    let (command, common, input, trials, group_size, bits) = match cli.command {
        Command::Exact { common, input } => {
            (CommandKind::Exact, common, Some(input), None, None, None)
        }
        Command::Simulate {
            common,
            input,
            trials,
        } => (
            CommandKind::Simulate,
            common,
            Some(input),
            Some(trials),
            None,
            None,
        ),
        Command::Audit { common } => (CommandKind::Audit, common, None, None, None, None),
        Command::Transmit {
            common,
            group_size,
            bits,
        } => (
            CommandKind::Transmit,
            common,
            None,
            None,
            Some(group_size),
            Some(bits),
        ),
        Command::Teleport { common, trials } => (
            CommandKind::Teleport,
            common,
            None,
            Some(trials),
            None,
            None,
        ),
    };

    let config = RunConfig {
        command,
        rounds: common.rounds,
        ancilla: parse_ancilla(&common.ancilla)?,
        state: input.map(parse_input).transpose()?.flatten(),
        trials: trials.unwrap_or(match command {
            CommandKind::Teleport => DEFAULT_TELEPORT_TRIALS,
            _ => DEFAULT_SIMULATE_TRIALS,
        }),
        group_size: group_size.unwrap_or(DEFAULT_GROUP_SIZE),
        num_bits: bits.unwrap_or(DEFAULT_BITS),
        seed: common.seed,
        output_format: common.format,
        output_path: common.out,
    };
    config.validate()?;
    Ok(config)
}
