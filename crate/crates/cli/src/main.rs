mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riskexplain::backend::BackendKind;
use riskexplain::report::{ReportFormat, ReportMode};

use crate::config::Overrides;

/// Project-contextualized risk explanations for class-level software metrics.
///
/// Exit codes: 0 success, 2 input error, 3 empty selection, 4 backend failure.
/// The remote API key is read from RISKEXPLAIN_API_KEY only.
#[derive(Debug, Parser)]
#[command(name = "riskexplain", version)]
struct Cli {
    /// TOML config file (flags override its values)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Machine-readable JSON on standard output
    #[arg(long, global = true)]
    json: bool,

    /// Suppress progress output on standard error
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the per-project baseline table and dataset summary
    Stats {
        #[command(flatten)]
        dataset: DatasetArgs,
    },
    /// Print the explanation prompt for one or more classes
    Prompt {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        prompt: PromptArgs,
    },
    /// Explain one or more classes and print their reports
    Explain {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        prompt: PromptArgs,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also print the prompt sent to the backend
        #[arg(long)]
        show_prompt: bool,
    },
    /// Run the whole pipeline over a dataset and write the project report
    Batch {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        prompt: PromptArgs,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Only the K most severe classes by overall band
        #[arg(long, value_name = "K")]
        top_k: Option<usize>,
    },
    /// Check an explanation text for descriptive, contextual and actionable content
    Validate {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        select: SelectArgs,
        /// File holding the explanation text (`-` for standard input)
        #[arg(long, value_name = "FILE")]
        text: PathBuf,
    },
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Per-class metrics CSV (PROMISE layout by default)
    dataset: PathBuf,
    /// Project name (default: guessed from the file name)
    #[arg(long)]
    project: Option<String>,
    /// Project version (default: from the file name or version column)
    #[arg(long = "project-version", value_name = "VERSION")]
    version: Option<String>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// Class selector: exact full or simple name, glob, or substring
    #[arg(long = "class", value_name = "SELECTOR")]
    class: String,
}

#[derive(Debug, Args)]
struct PromptArgs {
    /// Leave the project baseline statistics out of the prompt
    #[arg(long)]
    no_baseline: bool,
    /// Audience named in the prompt
    #[arg(long)]
    audience: Option<String>,
    /// Project phrase in the prompt, e.g. "Apache Ant 1.7 project"
    #[arg(long)]
    project_label: Option<String>,
}

#[derive(Debug, Args)]
struct BackendArgs {
    #[arg(long, value_name = "remote|offline")]
    backend: Option<BackendKind>,
    /// Chat-completions endpoint URL
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_retries: Option<u32>,
    /// Maximum concurrent remote requests
    #[arg(long)]
    max_parallel: Option<usize>,
    /// Regenerations allowed when an explanation is incomplete
    #[arg(long)]
    max_regenerations: Option<u32>,
    #[arg(long, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Bypass the response cache
    #[arg(long)]
    no_cache: bool,
    /// Offline backend (unless --backend is given), temperature 0, cache on
    #[arg(long)]
    reproducible: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_name = "explained|metrics_only")]
    mode: Option<ReportMode>,
    #[arg(long, value_name = "markdown|json")]
    format: Option<ReportFormat>,
    /// Write report files here instead of printing them
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides::default();
        let (dataset, prompt, backend, output) = match &self.command {
            Command::Stats { dataset } | Command::Validate { dataset, .. } => {
                (dataset, None, None, None)
            }
            Command::Prompt {
                dataset, prompt, ..
            } => (dataset, Some(prompt), None, None),
            Command::Explain {
                dataset,
                prompt,
                backend,
                output,
                ..
            }
            | Command::Batch {
                dataset,
                prompt,
                backend,
                output,
                ..
            } => (dataset, Some(prompt), Some(backend), Some(output)),
        };
        o.project = dataset.project.clone();
        o.version = dataset.version.clone();
        if let Some(p) = prompt {
            o.no_baseline = p.no_baseline;
            o.audience = p.audience.clone();
            o.project_label = p.project_label.clone();
        }
        if let Some(b) = backend {
            o.backend = b.backend;
            o.endpoint = b.endpoint.clone();
            o.model = b.model.clone();
            o.temperature = b.temperature;
            o.max_retries = b.max_retries;
            o.max_parallel = b.max_parallel;
            o.max_regenerations = b.max_regenerations;
            o.cache_dir = b.cache_dir.clone();
            o.no_cache = b.no_cache;
            o.reproducible = b.reproducible;
        }
        if let Some(out) = output {
            o.mode = out.mode;
            o.format = out.format;
            o.out_dir = out.out_dir.clone();
        }
        if self.json {
            o.format = Some(ReportFormat::Json);
        }
        o
    }

    fn dataset_path(&self) -> &PathBuf {
        match &self.command {
            Command::Stats { dataset }
            | Command::Prompt { dataset, .. }
            | Command::Explain { dataset, .. }
            | Command::Batch { dataset, .. }
            | Command::Validate { dataset, .. } => &dataset.dataset,
        }
    }
}

fn run(cli: &Cli) -> Result<(), error::CliError> {
    let file = match &cli.config {
        Some(path) => config::FileConfig::load(path)?,
        None => config::FileConfig::default(),
    };
    let env = |key: &str| std::env::var(key).ok();
    let rc = config::resolve(cli.dataset_path(), file, &cli.overrides(), &env)?;
    let ui = commands::Ui {
        json: cli.json,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Stats { .. } => commands::stats(&rc, &ui),
        Command::Prompt { select, .. } => commands::prompt(&rc, &select.class, &ui),
        Command::Explain {
            select,
            show_prompt,
            ..
        } => commands::explain(&rc, &select.class, *show_prompt, &ui),
        Command::Batch { top_k, .. } => commands::batch(&rc, *top_k, &ui),
        Command::Validate { select, text, .. } => commands::validate(&rc, &select.class, text, &ui),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
