use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tabmeta::config::PipelineConfig;
use tabmeta::{pipeline, Error, NEGATIVE_LABEL};

/// Build synthetic relation-extraction tables with retrieved context and
/// inferred column headers.
#[derive(Parser, Debug)]
#[command(name = "tabmeta", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct Overrides {
    /// JSON configuration file; flags take precedence over its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    rows_min: Option<usize>,
    #[arg(long, global = true)]
    rows_max: Option<usize>,
    #[arg(long, global = true)]
    tables_per_relation: Option<usize>,
    #[arg(long, global = true)]
    negative_fraction: Option<f64>,
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[arg(long, global = true)]
    train_ratio: Option<f64>,
    /// Primary input file
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    /// Primary output file
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index a JSON Lines paragraph corpus
    BuildIndex,
    /// Build the entity-to-header map from a JSON Lines table corpus
    BuildHeaderMap,
    /// Generate positive and negative tables from a triple file
    Generate,
    /// Attach contexts and/or headers to a dataset
    Enrich {
        /// Corpus index snapshot used for context retrieval
        #[arg(long)]
        context: Option<PathBuf>,
        /// Header map snapshot used for header inference
        #[arg(long)]
        headers: Option<PathBuf>,
    },
    /// Split a dataset into train and validation files
    Split {
        #[arg(long)]
        train_output: PathBuf,
        #[arg(long)]
        validation_output: PathBuf,
    },
    /// Score predictions against gold labels; prints a JSON report
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value = NEGATIVE_LABEL)]
        negative_label: String,
    },
}

impl Overrides {
    fn resolve(&self) -> tabmeta::Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.seed {
            config.master_seed = v;
        }
        if let Some(v) = self.rows_min {
            config.rows_min = v;
        }
        if let Some(v) = self.rows_max {
            config.rows_max = v;
        }
        if let Some(v) = self.tables_per_relation {
            config.tables_per_relation = v;
        }
        if let Some(v) = self.negative_fraction {
            config.negative_fraction = v;
        }
        if let Some(v) = self.top_k {
            config.top_k = v;
        }
        if let Some(v) = self.train_ratio {
            config.set_train_ratio(v);
        }
        if let Some(v) = &self.input {
            config.input = Some(v.clone());
        }
        if let Some(v) = &self.output {
            config.output = Some(v.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("missing --{flag} (or `{flag}` in the config file)")).into())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = cli.overrides.resolve()?;
    match &cli.command {
        Command::BuildIndex => {
            let (input, output) = (required(&config.input, "input")?, required(&config.output, "output")?);
            pipeline::build_index_file(input, output).context("build-index failed")?;
        }
        Command::BuildHeaderMap => {
            let (input, output) = (required(&config.input, "input")?, required(&config.output, "output")?);
            pipeline::build_header_map_file(input, output).context("build-header-map failed")?;
        }
        Command::Generate => {
            let (input, output) = (required(&config.input, "input")?, required(&config.output, "output")?);
            pipeline::generate_file(input, output, &config).context("generate failed")?;
        }
        Command::Enrich { context, headers } => {
            let (input, output) = (required(&config.input, "input")?, required(&config.output, "output")?);
            pipeline::enrich_file(input, output, context.as_deref(), headers.as_deref(), &config)
                .context("enrich failed")?;
        }
        Command::Split {
            train_output,
            validation_output,
        } => {
            let input = required(&config.input, "input")?;
            pipeline::split_file(input, train_output, validation_output, &config).context("split failed")?;
        }
        Command::Score {
            gold,
            pred,
            negative_label,
        } => {
            let report = pipeline::score_files(gold, pred, negative_label).context("score failed")?;
            println!("{}", serde_json::to_string(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .json()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();

    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let usage = matches!(err.downcast_ref::<Error>(), Some(Error::Config(_)));
            tracing::error!(error = format!("{err:#}"), "command failed");
            eprintln!("error: {err:#}");
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
