use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spellcluster::affinity::ApConfig;
use spellcluster::evaluation::{evaluate, EvaluationError};
use spellcluster::generator::{generate_corpus, EditWeights, GeneratorSpec};
use spellcluster::io::{self, CorpusFormat, CorpusSource, IoError};
use spellcluster::pipeline::{run_pipeline, PipelineConfig, PipelineError};
use spellcluster::string_metrics::WinklerParams;

/// Cluster spelling variants of transliterated proper nouns.
#[derive(Debug, Parser)]
#[command(name = "spellcluster", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a corpus into a JSON cluster book.
    Cluster(ClusterArgs),
    /// Score a cluster book against a truth CSV.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus and its truth CSV.
    Generate(GenerateArgs),
    /// Generate, cluster and evaluate in one step.
    RunBench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Plain,
    Csv,
}

#[derive(Debug, Args)]
struct PipelineFlags {
    #[arg(long, default_value_t = 0.65)]
    damping: f64,
    /// Minimum Jaro-Winkler similarity between a member and its exemplar.
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value_t = 2)]
    passes: usize,
    /// Cluster all tokens together instead of by first letter.
    #[arg(long)]
    no_partition: bool,
    /// File with one stopword per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    prefix_scale: f64,
    #[arg(long, default_value_t = 4)]
    max_prefix: usize,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    #[arg(long, default_value_t = 15)]
    stability_window: usize,
    /// Power applied to Levenshtein distances before negation.
    #[arg(long, default_value_t = 1)]
    distance_exponent: u32,
    /// Process partitions one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Column holding the phrases (csv only).
    #[arg(long)]
    column: Option<String>,
    /// Cluster book path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Cluster book JSON.
    #[arg(long)]
    input: PathBuf,
    /// CSV with header token,cluster_id.
    #[arg(long)]
    truth: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GeneratorFlags {
    #[arg(long, default_value_t = 200)]
    bases: usize,
    #[arg(long, default_value_t = 2)]
    min_variants: usize,
    #[arg(long, default_value_t = 5)]
    max_variants: usize,
    /// Relative weights for substitute,delete,insert,transpose.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [1.0, 1.0, 1.0, 1.0])]
    edit_weights: Vec<f64>,
    /// Allow edits to the first character.
    #[arg(long)]
    edit_first_letter: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Corpus path, one phrase per line.
    #[arg(long)]
    output: PathBuf,
    /// Truth CSV path.
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    generator: GeneratorFlags,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the cluster book here.
    #[arg(long)]
    book: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorFlags,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::InvalidSource(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(format!("{} [{}]", e, e.code())),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::EmptyInput | PipelineError::NothingToCluster => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<EvaluationError> for CliError {
    fn from(e: EvaluationError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl PipelineFlags {
    fn to_config(&self) -> Result<PipelineConfig, CliError> {
        let winkler =
            WinklerParams::new(self.prefix_scale, self.max_prefix).map_err(|e| CliError::Usage(e.to_string()))?;
        let stopwords = match &self.stopwords {
            Some(path) => io::load_stopwords(path)?,
            None => BTreeSet::new(),
        };
        let config = PipelineConfig {
            jw_threshold: self.threshold,
            passes: self.passes,
            partition_by_first_letter: !self.no_partition,
            stopwords,
            winkler,
            ap: ApConfig {
                damping: self.damping,
                max_iterations: self.max_iterations,
                stability_window: self.stability_window,
                distance_exponent: self.distance_exponent,
            },
            parallel: !self.sequential,
        };
        config.validate()?;
        Ok(config)
    }
}

impl GeneratorFlags {
    fn to_spec(&self) -> Result<GeneratorSpec, CliError> {
        let w = &self.edit_weights;
        let spec = GeneratorSpec {
            base_count: self.bases,
            variants_per_base: self.min_variants..=self.max_variants,
            edit_weights: EditWeights {
                substitute: w[0],
                delete: w[1],
                insert: w[2],
                transpose: w[3],
            },
            preserve_first_letter: !self.edit_first_letter,
            seed: self.seed,
        };
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cluster(args) => {
            let config = args.pipeline.to_config()?;
            let format = match args.format {
                Format::Plain => CorpusFormat::Plain,
                Format::Csv => CorpusFormat::Csv,
            };
            let source = CorpusSource::new(&args.input, format, args.column)?;
            let phrases = io::load_corpus(&source)?;
            let book = run_pipeline(&phrases, &config)?;
            emit(&io::cluster_book_to_json(&book), args.output.as_deref())
        }
        Command::Evaluate(args) => {
            let book = io::read_cluster_book(&args.input)?;
            let truth = io::load_truth(&args.truth)?;
            let report = evaluate(&book, &truth)?;
            emit(&io::report_to_json(&report), args.output.as_deref())
        }
        Command::Generate(args) => {
            let corpus = generate_corpus(&args.generator.to_spec()?).map_err(|e| CliError::Usage(e.to_string()))?;
            io::write_corpus(&corpus.phrases, &args.output)?;
            io::write_truth(&corpus.truth, &args.truth)?;
            Ok(())
        }
        Command::RunBench(args) => {
            let spec = args.generator.to_spec()?;
            let config = args.pipeline.to_config()?;
            let corpus = generate_corpus(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
            let book = run_pipeline(&corpus.phrases, &config)?;
            if let Some(path) = &args.book {
                io::write_cluster_book(&book, path)?;
            }
            let report = evaluate(&book, &corpus.truth)?;
            emit(&io::report_to_json(&report), args.output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
