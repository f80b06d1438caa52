//! Command-line front end: score, oracle, errors, confusion,
//! mentions-heuristic, simulate, sweep, report.
//!
//! Exit codes: 0 success, 1 validation error (bad flags or undefined
//! results), 2 I/O or parse error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "corefeval",
    version,
    about = "Coreference evaluation toolkit: metric suite, oracle transforms, error taxonomy, \
             anaphoricity diagnostics, and a deterministic toy pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Directory reports are written to.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Score predicted clusterings against gold.
    Score {
        /// Gold corpus (column text or JSON lines; sniffed by content).
        #[arg(long)]
        gold: PathBuf,
        /// Predictions (same formats).
        #[arg(long)]
        pred: PathBuf,
        /// Score size-1 clusters instead of dropping them.
        #[arg(long)]
        keep_singletons: bool,
        /// Also write the tab-separated companion table.
        #[arg(long)]
        tsv: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Apply a gold-informed transform to detector candidates or run the
    /// oracle linker; emits transformed predictions plus an operations record.
    Oracle {
        /// Gold corpus.
        #[arg(long)]
        corpus: PathBuf,
        /// Predictions carrying candidate spans.
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum)]
        mode: OracleMode,
        /// Which gold span set the transform targets.
        #[arg(long, value_enum, default_value_t = GoldArg::Anaphoric)]
        gold: GoldArg,
        /// Antecedent budget for the pruned oracle linker.
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Categorize clustering errors and report the score delta per type.
    Errors {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Also break conflated entities into sub-types.
        #[arg(long)]
        subtype: bool,
        #[arg(long)]
        tsv: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Confusion index of an acceptor over singleton vs. anaphoric mentions.
    Confusion {
        /// Gold corpus with singleton annotation.
        #[arg(long)]
        gold: PathBuf,
        /// Predictions; accepted spans are the candidates when present,
        /// otherwise every clustered span.
        #[arg(long)]
        accepted: PathBuf,
        /// Bin by span width (bins 1..=N, wider spans collapse into the last).
        #[arg(long, num_args = 0..=1, default_missing_value = "30")]
        by_width: Option<usize>,
        /// Restrict to surfaces occurring as both singleton and anaphoric
        /// mention within one document.
        #[arg(long)]
        shared_text: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Generate the recall-oriented mention set from gold syntax.
    MentionsHeuristic {
        /// Corpus with POS and constituency layers.
        #[arg(long)]
        corpus: PathBuf,
        /// Also report pre-merge recall and anaphoric share.
        #[arg(long)]
        stats: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Generate a synthetic corpus and run the toy pipeline over it.
    Simulate {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        docs: usize,
        #[arg(long, default_value_t = 80)]
        min_tokens: usize,
        #[arg(long, default_value_t = 160)]
        max_tokens: usize,
        /// Singletons generated per anaphoric mention.
        #[arg(long, default_value_t = 0.3)]
        singleton_rate: f64,
        /// Chance a non-first entity mention is a pronoun.
        #[arg(long, default_value_t = 0.35)]
        pronoun_rate: f64,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the toy pipeline across a hyperparameter grid.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        /// Max span widths, comma-separated.
        #[arg(long, value_delimiter = ',')]
        l: Vec<usize>,
        /// Candidates kept per word, comma-separated.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        /// Antecedent window sizes, comma-separated.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Combined report: metrics, cluster statistics, error taxonomy,
    /// conflation sub-types, and link-score diagnostics where available.
    Report {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        tsv: bool,
        #[command(flatten)]
        out: OutDir,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    /// Remove every non-gold candidate.
    PerfectP,
    /// Add every missing gold mention.
    PerfectR,
    /// Candidates become exactly the gold set.
    PerfectPr,
    /// Remove only as many top-scoring extras as there are missing golds.
    BudgetP,
    /// Link every candidate to its nearest preceding gold-cluster mate.
    OracleLinker,
    /// Oracle linker restricted to the top-K coarse-scored antecedents.
    OracleLinkerPruned,
}

impl OracleMode {
    pub fn name(self) -> &'static str {
        match self {
            OracleMode::PerfectP => "perfect-p",
            OracleMode::PerfectR => "perfect-r",
            OracleMode::PerfectPr => "perfect-pr",
            OracleMode::BudgetP => "budget-p",
            OracleMode::OracleLinker => "oracle-linker",
            OracleMode::OracleLinkerPruned => "oracle-linker-pruned",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GoldArg {
    Anaphoric,
    All,
}

impl GoldArg {
    pub fn mode(self) -> corefeval::GoldMode {
        match self {
            GoldArg::Anaphoric => corefeval::GoldMode::Anaphoric,
            GoldArg::All => corefeval::GoldMode::All,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GoldArg::Anaphoric => "anaphoric",
            GoldArg::All => "all",
        }
    }
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Max span width.
    #[arg(long, default_value_t = 30)]
    l: usize,
    /// Candidates kept per word.
    #[arg(long, default_value_t = 0.4)]
    lambda: f64,
    /// Antecedents considered per candidate.
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Minimum pair score for a non-dummy link.
    #[arg(long, default_value_t = 0.5)]
    dummy_threshold: f64,
}

impl PipelineArgs {
    pub fn config(&self) -> corefeval::sim::PipelineConfig {
        corefeval::sim::PipelineConfig {
            l: self.l,
            lambda: self.lambda,
            k: self.k,
            dummy_threshold: self.dummy_threshold,
            ..Default::default()
        }
    }
}

/// Command failure carrying its exit code.
pub enum Failure {
    /// Bad flags, inconsistent inputs, undefined results: exit 1.
    Validation(String),
    /// Unreadable or unparseable inputs, write failures: exit 2.
    InputOutput(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::InputOutput(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::InputOutput(m) => m,
        }
    }
}

impl From<corefeval::CorefError> for Failure {
    fn from(e: corefeval::CorefError) -> Self {
        match e {
            corefeval::CorefError::Invalid(_) => Failure::Validation(e.to_string()),
            _ => Failure::InputOutput(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::InputOutput(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

fn dispatch(cli: Cli) -> CmdResult {
    if let Ok(threads) = std::env::var("COREFEVAL_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| Failure::Validation(format!("COREFEVAL_THREADS={threads} is not a number")))?;
        // ignore "already initialized": only the first call can win
        let _ = corefeval::configure_thread_pool(n);
    }
    match cli.command {
        Command::Score { gold, pred, keep_singletons, tsv, out } => {
            commands::score(&gold, &pred, keep_singletons, tsv, &out.out)
        }
        Command::Oracle { corpus, pred, mode, gold, k, out } => {
            commands::oracle(&corpus, &pred, mode, gold, k, &out.out)
        }
        Command::Errors { gold, pred, subtype, tsv, out } => {
            commands::errors(&gold, &pred, subtype, tsv, &out.out)
        }
        Command::Confusion { gold, accepted, by_width, shared_text, out } => {
            commands::confusion(&gold, &accepted, by_width, shared_text, &out.out)
        }
        Command::MentionsHeuristic { corpus, stats, out } => {
            commands::mentions_heuristic(&corpus, stats, &out.out)
        }
        Command::Simulate {
            seed,
            docs,
            min_tokens,
            max_tokens,
            singleton_rate,
            pronoun_rate,
            pipeline,
            out,
        } => commands::simulate(
            seed,
            docs,
            (min_tokens, max_tokens),
            singleton_rate,
            pronoun_rate,
            &pipeline,
            &out.out,
        ),
        Command::Sweep { corpus, l, lambda, k, out } => {
            commands::sweep(&corpus, &l, &lambda, &k, &out.out)
        }
        Command::Report { gold, pred, tsv, out } => commands::report(&gold, &pred, tsv, &out.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
