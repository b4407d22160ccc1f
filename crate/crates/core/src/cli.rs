//! Command-line front end: `train`, `eval`, `synth` and `run`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ModelConfig, ModelKind, Prior};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::factor::MessageMode;
use crate::io;
use crate::pipeline::{train, Trained};
use crate::report::{ConvergenceSummary, CorpusStats, EvalSettings, Metrics, RunConfig, RunReport};
use crate::synth::sample_corpus;

#[derive(Debug, Parser)]
#[command(name = "mclda", version, about = "Acoustic unit discovery with LDA and Markov chain LDA")]
pub struct Cli {
    /// Worker threads for inference (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate a model on a codes file and write decoded units.
    Train(TrainArgs),
    /// Score unit sequences against reference alignments.
    Eval(EvalArgs),
    /// Sample a synthetic corpus with known units.
    Synth(SynthArgs),
    /// Train and evaluate in one go.
    Run(RunArgs),
}

/// Model settings. Flags override a `--config` JSON file, which overrides
/// the built-in defaults.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// JSON model configuration; allows vector and per-unit priors.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelKind::McLda)]
    pub model: ModelKind,
    /// Number of units [default: 50]
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Code vocabulary size [default: 512]
    #[arg(long = "V")]
    pub v: Option<usize>,
    /// Symmetric Dirichlet prior over units [default: 1.0]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Symmetric Dirichlet prior over codes [default: 0.0001]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Self-transition weight [default: 10]
    #[arg(long = "a")]
    pub a: Option<f64>,
    /// Convergence threshold on the largest sepset KL per sweep [default: 1e-5]
    #[arg(long)]
    pub tol: Option<f64>,
    /// [default: 200]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// [default: mean]
    #[arg(long, value_enum)]
    pub mode: Option<MessageMode>,
    /// Message damping weight in (0, 1] [default: 1]
    #[arg(long)]
    pub damping: Option<f64>,
    /// Seed for the initial soft assignments.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<ModelConfig> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&io::read_text(path)?)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?,
            None => ModelConfig::default(),
        };
        if let Some(k) = self.k {
            c.num_units = k;
        }
        if let Some(v) = self.v {
            c.vocab_size = v;
        }
        if let Some(alpha) = self.alpha {
            c.alpha = Prior::Symmetric(alpha);
        }
        if let Some(beta) = self.beta {
            c.beta = Prior::Symmetric(beta);
        }
        if let Some(a) = self.a {
            c.self_transition = a;
        }
        if let Some(tol) = self.tol {
            c.tol = tol;
        }
        if let Some(m) = self.max_iters {
            c.max_iters = m;
        }
        if let Some(mode) = self.mode {
            c.message_mode = mode;
        }
        if let Some(d) = self.damping {
            c.damping = d;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub codes: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Frame length in ms.
    #[arg(long, default_value_t = 20)]
    pub frame_ms: u64,
    #[arg(long)]
    pub units_out: PathBuf,
    #[arg(long)]
    pub posteriors_out: Option<PathBuf>,
    /// Optional JSON report with the convergence trace.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub units: PathBuf,
    #[arg(long)]
    pub alignments: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub frame_ms: u64,
    #[arg(long, default_value_t = 20)]
    pub tolerance_ms: u64,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of utterances.
    #[arg(long = "M", default_value_t = 50)]
    pub m: usize,
    /// Codes per utterance.
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
    #[arg(long = "K", default_value_t = 50)]
    pub k: usize,
    #[arg(long = "V", default_value_t = 512)]
    pub v: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub beta: f64,
    #[arg(long = "a", default_value_t = 10.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub frame_ms: u64,
    #[arg(long)]
    pub codes_out: PathBuf,
    #[arg(long)]
    pub alignments_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long)]
    pub alignments: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 20)]
    pub frame_ms: u64,
    #[arg(long, default_value_t = 20)]
    pub tolerance_ms: u64,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub units_out: Option<PathBuf>,
    #[arg(long)]
    pub posteriors_out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 on success, 1 for invalid input, 2 for I/O failures.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Run(a) => cmd_run(a),
    }
}

fn fit(codes: &Path, model: &ModelArgs) -> Result<(Corpus, ModelConfig, Trained)> {
    let config = model.resolve()?;
    let corpus = io::parse_codes_file(codes, config.vocab_size)?;
    let trained = train(&corpus, &config, model.model, model.seed)?;
    Ok((corpus, config, trained))
}

fn write_outputs(trained: &Trained, units_out: Option<&Path>, posteriors_out: Option<&Path>) -> Result<()> {
    if let Some(path) = units_out {
        io::write_text(path, &io::format_units(&trained.units))?;
    }
    if let Some(path) = posteriors_out {
        io::write_text(path, &io::format_posteriors(&trained.posteriors))?;
    }
    Ok(())
}

fn training_report(corpus: &Corpus, config: &ModelConfig, model: &ModelArgs, trained: &Trained) -> RunReport {
    RunReport {
        convergence: Some(ConvergenceSummary::from(&trained.trace)),
        config: Some(RunConfig {
            model: model.model,
            seed: model.seed,
            model_config: config.clone(),
        }),
        corpus: Some(CorpusStats::new(corpus, config.num_units)),
        ..RunReport::default()
    }
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let (corpus, config, trained) = fit(&a.codes, &a.model)?;
    write_outputs(&trained, Some(&a.units_out), a.posteriors_out.as_deref())?;
    if let Some(path) = &a.report {
        io::write_text(path, &training_report(&corpus, &config, &a.model, &trained).to_json())?;
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let units = io::parse_units_file(&a.units)?;
    let alignments = io::parse_alignments_file(&a.alignments)?;
    let report = evaluate(&units, &alignments, a.frame_ms, a.tolerance_ms)?;
    let run = RunReport {
        metrics: Some(Metrics::from(&report)),
        evaluation: Some(EvalSettings {
            frame_ms: a.frame_ms,
            tolerance_ms: a.tolerance_ms,
        }),
        ..RunReport::default()
    };
    io::write_text(&a.report, &run.to_json())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let config = ModelConfig {
        num_units: a.k,
        vocab_size: a.v,
        alpha: Prior::Symmetric(a.alpha),
        beta: Prior::Symmetric(a.beta),
        self_transition: a.a,
        ..ModelConfig::default()
    };
    let (corpus, truth) = sample_corpus(&config, a.m, a.n, a.seed)?;
    io::write_text(&a.codes_out, &io::format_codes(&corpus))?;
    io::write_text(&a.alignments_out, &io::format_alignments(&truth.alignments(a.frame_ms)))
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let alignments = io::parse_alignments_file(&a.alignments)?;
    let (corpus, config, trained) = fit(&a.codes, &a.model)?;
    write_outputs(&trained, a.units_out.as_deref(), a.posteriors_out.as_deref())?;
    let report = evaluate(&trained.units, &alignments, a.frame_ms, a.tolerance_ms)?;
    let run = RunReport {
        metrics: Some(Metrics::from(&report)),
        evaluation: Some(EvalSettings {
            frame_ms: a.frame_ms,
            tolerance_ms: a.tolerance_ms,
        }),
        ..training_report(&corpus, &config, &a.model, &trained)
    };
    io::write_text(&a.report, &run.to_json())
}
