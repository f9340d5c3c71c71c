//! Command-line front end for the regccrf library.
//!
//! Subcommands: `compile` turns a regex or automaton file into a language
//! skeleton, `check` inspects one, `experiment` runs the built-in synthetic
//! studies, `build-bio` constructs a BIO well-formedness language, and
//! `train`/`decode` fit and apply models on line-oriented data files.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 constraint
//! violation, 4 budget exceeded.

mod data;
mod lang;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regccrf::automata::DEFAULT_STATE_BUDGET;
use regccrf::train::TrainConfig;

#[derive(Debug)]
enum CliError {
    /// Bad arguments or malformed input files. Exit 2.
    Usage(String),
    /// Data outside the constraint language, or an unusable (ambiguous)
    /// constraint. Exit 3.
    Violation(String),
    /// A state or enumeration budget was exceeded. Exit 4.
    Budget(String),
    /// Everything else. Exit 1.
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Violation(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Violation(m)
            | CliError::Budget(m)
            | CliError::Failure(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "regccrf",
    version,
    about = "Linear-chain CRFs constrained to a regular language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a regex or automaton file into a language skeleton model
    Compile(CompileArgs),
    /// Check ambiguity of a language file, or membership of label sequences
    Check(CheckArgs),
    /// Run a built-in synthetic experiment
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Build a BIO well-formedness language from a role inventory
    BuildBio(BuildBioArgs),
    /// Train a model on parallel token and label files
    Train(TrainArgs),
    /// Label token files with a trained model
    Decode(DecodeArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

/// SGD hyperparameters, defaulting to the library's `TrainConfig`.
#[derive(Args, Clone)]
struct TrainFlags {
    /// Base RNG seed
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    seed: u64,
    /// Number of SGD steps
    #[arg(long, default_value_t = TrainConfig::default().steps)]
    steps: usize,
    /// Minibatch size
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    batch_size: usize,
    /// Initial learning rate
    #[arg(long = "lr", default_value_t = TrainConfig::default().learning_rate)]
    lr: f64,
    /// Steps between learning-rate decays (0 disables decay)
    #[arg(long, default_value_t = TrainConfig::default().lr_decay_every)]
    lr_decay_every: usize,
    /// Fraction removed from the learning rate at each decay
    #[arg(long, default_value_t = TrainConfig::default().lr_decay_frac)]
    lr_decay_frac: f64,
}

impl TrainFlags {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            steps: self.steps,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            lr_decay_every: self.lr_decay_every,
            lr_decay_frac: self.lr_decay_frac,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    /// Regex over the label alphabet; symbols are single characters or
    /// [bracketed] names
    regex: Option<String>,
    /// Compile this automaton file instead, keeping its edges as given
    #[arg(long, conflicts_with = "regex")]
    nfa_file: Option<PathBuf>,
    /// Comma-separated label alphabet; inferred from the regex when omitted
    #[arg(long, value_delimiter = ',')]
    alphabet: Option<Vec<String>>,
    /// Cap on determinization states
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    state_budget: usize,
    /// Keep one tag per edge instead of merging classes by (state, label)
    #[arg(long)]
    no_class_reduction: bool,
    /// Write the compiled skeleton model here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format (text when omitted; csv is not available here)
    #[arg(long = "output", value_enum)]
    output: Option<OutputFormat>,
}

#[derive(Args)]
struct CheckArgs {
    /// Compiled model file or raw automaton file
    lang: PathBuf,
    /// Report whether every accepted string has a unique accepting path
    #[arg(long)]
    ambiguity: bool,
    /// Label file whose lines are tested for membership
    #[arg(long)]
    membership: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Two-branch task where constrained decoding falls behind as k grows
    ArbitraryGap(ArbitraryGapArgs),
    /// Three-string task where the two regimens disagree on the mode
    MapInference(MapInferenceArgs),
}

#[derive(Args)]
struct ArbitraryGapArgs {
    /// Smallest k in the sweep (sequences have length 2k)
    #[arg(long, default_value_t = 1)]
    k_lo: u32,
    /// Largest k in the sweep, at most 20
    #[arg(long, default_value_t = 10)]
    k_hi: u32,
    /// Independent training runs averaged per k
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    train: TrainFlags,
    /// Table format
    #[arg(long = "output", value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapInferenceArgs {
    /// Independent training runs to average
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    train: TrainFlags,
    /// Table format
    #[arg(long = "output", value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildBioArgs {
    /// Comma-separated core roles (at most one base span each)
    #[arg(long, value_delimiter = ',')]
    core: Vec<String>,
    /// Comma-separated non-core roles (spans repeat freely)
    #[arg(long, value_delimiter = ',')]
    noncore: Vec<String>,
    /// Roles whose continuation spans need a completed base span first
    #[arg(long, value_delimiter = ',')]
    continuation: Vec<String>,
    /// Cap on constructed states
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    state_budget: usize,
    /// Keep one tag per edge instead of merging classes by (state, label)
    #[arg(long)]
    no_class_reduction: bool,
    /// Write the language skeleton model here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format (text when omitted; csv is not available here)
    #[arg(long = "output", value_enum)]
    output: Option<OutputFormat>,
}

#[derive(Args)]
struct TrainArgs {
    /// Token file: one sequence per line, whitespace-separated
    #[arg(long)]
    data: PathBuf,
    /// Label file parallel to --data
    #[arg(long)]
    labels: PathBuf,
    /// Compiled language file; trains the constrained model over it
    #[arg(long)]
    constrained: Option<PathBuf>,
    /// Drop lines whose labels fall outside the language instead of aborting
    #[arg(long, requires = "constrained")]
    drop_violations: bool,
    #[command(flatten)]
    train: TrainFlags,
    /// Write the trained model here
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    /// Trained or skeleton model file
    #[arg(long)]
    model: PathBuf,
    /// Token file to label
    #[arg(long)]
    data: PathBuf,
    /// Write label lines here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Compile(args) => ops::compile(args),
        Command::Check(args) => ops::check(args),
        Command::Experiment(ExperimentCommand::ArbitraryGap(args)) => ops::arbitrary_gap(args),
        Command::Experiment(ExperimentCommand::MapInference(args)) => ops::map_inference(args),
        Command::BuildBio(args) => ops::build_bio(args),
        Command::Train(args) => ops::train(args),
        Command::Decode(args) => ops::decode(args),
    }
}
