//! The `seqbench` command line.
//!
//! Subcommands: `gen`, `label`, `split`, `train`, `hpo`, `bench`, `report`.
//! All logging goes to stderr; data only ever goes to files. Exit codes:
//! 0 on success, 1 on runtime failure (the message names the offending
//! file), 2 on usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use seqbench_core::data::{
    generate_cohort, records_from_encounters, split_cohort, GeneratorSpec, PatientRecord,
    Vocabulary,
};
use seqbench_core::eval::{make_report, select_best, Task};
use seqbench_core::hpo::Trial;
use seqbench_core::models::{init_params, Architecture, ModelSpec};
use seqbench_core::optim::train_model;
use seqbench_core::Rng;

use crate::config::load_train_config;
use crate::error::Error;
use crate::io::{checkpoint, cohort, encounters, history, ledger};
use crate::logging::{LogFormat, Logger};
use crate::runner::{run_arch_study, StudyConfig, StudyData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogChoice {
    Text,
    Json,
}

/// Benchmark engine for clinical event prediction over visit sequences.
#[derive(Parser)]
#[command(name = "seqbench", version, about)]
struct Cli {
    /// RNG seed (default 0; `train` falls back to its config file's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Path of the command's primary output artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Log format on stderr.
    #[arg(long, global = true, value_enum, default_value_t = LogChoice::Text)]
    log: LogChoice,

    #[command(subcommand)]
    command: Command,
}

fn parse_task(s: &str) -> Result<Task, String> {
    Task::parse(s).map_err(|e| e.to_string())
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    Architecture::parse(s).map_err(|e| e.to_string())
}

/// Split ratios, already normalized to fractions.
#[derive(Debug, Clone, Copy)]
struct Ratios(f64, f64, f64);

fn parse_ratios(s: &str) -> Result<Ratios, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected train:valid:test, got {s:?}"));
    }
    let mut vals = [0.0f64; 3];
    for (v, part) in vals.iter_mut().zip(&parts) {
        *v = part
            .trim()
            .parse()
            .map_err(|_| format!("bad ratio component {part:?}"))?;
        if !v.is_finite() || *v <= 0.0 {
            return Err(format!("ratio components must be positive, got {part:?}"));
        }
    }
    let total = vals[0] + vals[1] + vals[2];
    Ok(Ratios(vals[0] / total, vals[1] / total, vals[2] / total))
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort with a planted order-sensitive signal.
    Gen {
        /// Prediction task the cohort stands in for.
        #[arg(long, value_parser = parse_task, default_value = "readm")]
        task: Task,
        #[arg(long, default_value_t = 1000)]
        patients: usize,
        /// Target label prevalence in (0, 1).
        #[arg(long, default_value_t = 0.3)]
        prevalence: f64,
        /// Number of distinct codes.
        #[arg(long, default_value_t = 100)]
        vocab: usize,
    },
    /// Label raw encounters with the 30/90-day readmission rule and emit a
    /// cohort of the patients that qualify.
    Label {
        /// Encounter file (JSON lines).
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Split a cohort into stratified train/valid/test files.
    Split {
        /// Cohort file.
        #[arg(long = "in")]
        input: PathBuf,
        /// train:valid:test proportions.
        #[arg(long, value_parser = parse_ratios, default_value = "7:1:2")]
        ratios: Ratios,
        /// Output prefix; writes PREFIX.{train,valid,test}.jsonl.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Train one model and write a checkpoint plus its history CSV.
    Train {
        #[arg(long, value_parser = parse_arch)]
        arch: Architecture,
        /// Flat key=value config file.
        #[arg(long)]
        config: PathBuf,
        /// Training cohort file.
        #[arg(long)]
        train: PathBuf,
        /// Validation cohort file.
        #[arg(long)]
        valid: PathBuf,
    },
    /// Tune one architecture with Bayesian optimization over a split cohort.
    Hpo {
        #[arg(long, value_parser = parse_arch)]
        arch: Architecture,
        /// Total trials across all optimizer families.
        #[arg(long)]
        budget: usize,
        /// Trials evaluated concurrently within a suggestion round.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Reads PREFIX.{train,valid,test}.jsonl.
        #[arg(long)]
        data_prefix: PathBuf,
        /// Report column the resulting ledger belongs to.
        #[arg(long, value_parser = parse_task, default_value = "readm")]
        task: Task,
        /// Per-trial epoch cap.
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch_size: usize,
        #[arg(long, default_value_t = 5)]
        patience: usize,
    },
    /// Tune several architectures and render the benchmark report.
    Bench {
        /// Comma-separated architecture names, or "all".
        #[arg(long, default_value = "all")]
        archs: String,
        /// Trials per architecture.
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Reads PREFIX.{train,valid,test}.jsonl.
        #[arg(long)]
        data_prefix: PathBuf,
        /// Report column the scores land in.
        #[arg(long, value_parser = parse_task, default_value = "readm")]
        task: Task,
        /// Per-trial epoch cap.
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch_size: usize,
        #[arg(long, default_value_t = 5)]
        patience: usize,
    },
    /// Re-render the benchmark report from existing trial ledgers.
    Report {
        /// Ledger files, one per (architecture, task) cell.
        #[arg(long, num_args = 1.., required = true)]
        ledgers: Vec<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<seqbench_core::Error> for CliError {
    fn from(e: seqbench_core::Error) -> Self {
        CliError::Runtime(Error::Core(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage { 2 } else { 0 };
        }
    };
    let logger = Logger::new(match cli.log {
        LogChoice::Text => LogFormat::Text,
        LogChoice::Json => LogFormat::Json,
    });
    match execute(cli, &logger) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            logger.error(&msg);
            2
        }
        Err(CliError::Runtime(e)) => {
            logger.error(&e.to_string());
            1
        }
    }
}

fn require_out<'a>(out: &'a Option<PathBuf>, command: &str) -> CliResult<&'a Path> {
    out.as_deref()
        .ok_or_else(|| CliError::Usage(format!("{command}: --out is required")))
}

fn execute(cli: Cli, logger: &Logger) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Gen { task, patients, prevalence, vocab } => {
            let out = require_out(&cli.out, "gen")?;
            // Mix the task into the seed so the hf and readm cohorts differ
            // even when generated with the same --seed.
            let mixed = Rng::new(seed).stream(task.as_str(), 0).next_u64();
            let spec = GeneratorSpec::defaults(patients, vocab, prevalence, mixed);
            let (records, vocabulary) = generate_cohort(&spec)?;
            cohort::save_cohort(out, &records, &vocabulary)?;
            let positives = records.iter().filter(|r| r.label == 1).count();
            logger.info(&format!(
                "generated {} patients ({positives} positive) over {} codes for task {} -> {}",
                records.len(),
                vocabulary.n_codes(),
                task.as_str(),
                out.display()
            ));
            Ok(())
        }
        Command::Label { input } => {
            let out = require_out(&cli.out, "label")?;
            let rows = encounters::load_encounters(&input)?;
            let records = records_from_encounters(&rows)?;
            let vocabulary = synthesize_vocab(&records);
            for record in &records {
                record.validate(vocabulary.n_ids()).map_err(|e| Error::format(&input, e))?;
            }
            cohort::save_cohort(out, &records, &vocabulary)?;
            let cases = records.iter().filter(|r| r.label == 1).count();
            logger.info(&format!(
                "labeled {} encounters: {} patients kept ({cases} cases) -> {}",
                rows.len(),
                records.len(),
                out.display()
            ));
            Ok(())
        }
        Command::Split { input, ratios, out_prefix } => {
            let (records, vocabulary) = cohort::load_cohort(&input)?;
            let Ratios(r_train, r_valid, r_test) = ratios;
            let split = split_cohort(&records, (r_train, r_valid, r_test), seed)?;
            if !split.stratified {
                logger.warn("a label class was too small to stratify; fell back to a plain shuffle");
            }
            let parts = [("train", &split.train), ("valid", &split.valid), ("test", &split.test)];
            for (name, records) in parts {
                let path = prefix_path(&out_prefix, name);
                cohort::save_cohort(&path, records, &vocabulary)?;
                logger.info(&format!("{name}: {} patients -> {}", records.len(), path.display()));
            }
            Ok(())
        }
        Command::Train { arch, config, train, valid } => {
            let out = require_out(&cli.out, "train")?;
            let settings = load_train_config(&config)?;
            let (train_records, vocabulary) = cohort::load_cohort(&train)?;
            let (valid_records, valid_vocab) = cohort::load_cohort(&valid)?;
            if valid_vocab.as_map() != vocabulary.as_map() {
                return Err(CliError::Runtime(Error::format(
                    &valid,
                    "vocabulary differs from the training file's",
                )));
            }
            let spec = ModelSpec::new(arch, settings.embed_dim, settings.hidden_size);
            let mut train_cfg = settings.train.clone();
            train_cfg.seed = cli.seed.unwrap_or(train_cfg.seed);
            if train_cfg.clip_norm.is_none() {
                train_cfg.clip_norm = crate::runner::default_clip(arch);
            }
            let params = init_params(&spec, vocabulary.n_ids(), train_cfg.seed)?;
            let outcome = train_model(
                &spec,
                params,
                &train_records,
                &valid_records,
                &settings.optimizer,
                &train_cfg,
            )?;
            checkpoint::save_checkpoint(out, &spec, vocabulary.n_ids(), &outcome.params)?;
            let history_path = out.with_extension("history.csv");
            history::save_history(&history_path, &outcome.history)?;
            logger.info(&format!(
                "{}: best epoch {} valid AUROC {:.4}; checkpoint -> {}, history -> {}",
                arch.name(),
                outcome.best_epoch,
                outcome.best_valid_auroc,
                out.display(),
                history_path.display()
            ));
            Ok(())
        }
        Command::Hpo { arch, budget, workers, data_prefix, task, epochs, batch_size, patience } => {
            let out = require_out(&cli.out, "hpo")?;
            let splits = load_splits(&data_prefix)?;
            let study_cfg = StudyConfig {
                budget,
                workers,
                seed,
                max_epochs: epochs,
                batch_size,
                patience,
            };
            let trials = run_one_study(arch, &splits, &study_cfg, logger)?;
            ledger::save_ledger(out, arch.name(), task, &trials)?;
            match select_best(&trials) {
                Ok(best) => logger.info(&format!(
                    "{}: best trial {} valid AUROC {:.4} test AUROC {:.4} -> {}",
                    arch.name(),
                    best.index,
                    best.valid_auroc,
                    best.test_auroc,
                    out.display()
                )),
                Err(_) => logger.warn(&format!(
                    "{}: every trial failed; ledger -> {}",
                    arch.name(),
                    out.display()
                )),
            }
            Ok(())
        }
        Command::Bench {
            archs,
            budget,
            workers,
            data_prefix,
            task,
            epochs,
            batch_size,
            patience,
        } => {
            let out = require_out(&cli.out, "bench")?;
            let arch_list = parse_arch_list(&archs)?;
            let splits = load_splits(&data_prefix)?;
            let study_cfg = StudyConfig {
                budget,
                workers,
                seed,
                max_epochs: epochs,
                batch_size,
                patience,
            };
            let mut cells = Vec::new();
            for arch in arch_list {
                let trials = run_one_study(arch, &splits, &study_cfg, logger)?;
                let path = ledger_sibling(out, arch.name());
                ledger::save_ledger(&path, arch.name(), task, &trials)?;
                match select_best(&trials) {
                    Ok(best) => {
                        logger.info(&format!(
                            "{}: best valid AUROC {:.4} test AUROC {:.4} -> {}",
                            arch.name(),
                            best.valid_auroc,
                            best.test_auroc,
                            path.display()
                        ));
                        cells.push((arch.name().to_string(), task, best.test_auroc));
                    }
                    Err(_) => logger.warn(&format!(
                        "{}: every trial failed; omitting its report row",
                        arch.name()
                    )),
                }
            }
            let report = make_report(&cells)?;
            std::fs::write(out, report.to_csv()).map_err(|e| Error::io(out, e))?;
            logger.info(&format!("report with {} rows -> {}", report.rows.len(), out.display()));
            Ok(())
        }
        Command::Report { ledgers } => {
            let out = require_out(&cli.out, "report")?;
            let mut cells = Vec::new();
            for path in &ledgers {
                let (arch, task, trials) = ledger::load_ledger(path)?;
                let best = select_best(&trials)
                    .map_err(|e| Error::format(path, e))?;
                cells.push((arch, task, best.test_auroc));
            }
            let report = make_report(&cells)?;
            std::fs::write(out, report.to_csv()).map_err(|e| Error::io(out, e))?;
            logger.info(&format!("report with {} rows -> {}", report.rows.len(), out.display()));
            Ok(())
        }
    }
}

/// Dense placeholder vocabulary covering ids 1..=max over the records.
fn synthesize_vocab(records: &[PatientRecord]) -> Vocabulary {
    let max_id = records
        .iter()
        .flat_map(|r| r.visits.iter())
        .flat_map(|v| v.codes.iter())
        .copied()
        .max()
        .unwrap_or(0);
    let mut vocabulary = Vocabulary::new();
    for i in 1..=max_id {
        vocabulary.intern(&format!("c{i:05}"));
    }
    vocabulary
}

fn prefix_path(prefix: &Path, part: &str) -> PathBuf {
    let mut name = prefix.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    name.push('.');
    name.push_str(part);
    name.push_str(".jsonl");
    prefix.with_file_name(name)
}

fn ledger_sibling(report: &Path, arch: &str) -> PathBuf {
    let stem =
        report.file_stem().map_or_else(|| String::from("bench"), |s| s.to_string_lossy().into_owned());
    report.with_file_name(format!("{stem}.{arch}.ledger.jsonl"))
}

fn parse_arch_list(archs: &str) -> CliResult<Vec<Architecture>> {
    if archs.trim() == "all" {
        return Ok(Architecture::all().to_vec());
    }
    let mut list = Vec::new();
    for name in archs.split(',') {
        let arch = Architecture::parse(name.trim())
            .map_err(|e| CliError::Usage(format!("bench: {e}")))?;
        if list.contains(&arch) {
            return Err(CliError::Usage(format!("bench: duplicate architecture {name:?}")));
        }
        list.push(arch);
    }
    Ok(list)
}

struct LoadedSplits {
    train: Vec<PatientRecord>,
    valid: Vec<PatientRecord>,
    test: Vec<PatientRecord>,
    n_ids: usize,
}

fn load_splits(prefix: &Path) -> CliResult<LoadedSplits> {
    let (train, vocab) = cohort::load_cohort(&prefix_path(prefix, "train"))?;
    let (valid, valid_vocab) = cohort::load_cohort(&prefix_path(prefix, "valid"))?;
    let (test, test_vocab) = cohort::load_cohort(&prefix_path(prefix, "test"))?;
    for (name, other) in [("valid", &valid_vocab), ("test", &test_vocab)] {
        if other.as_map() != vocab.as_map() {
            return Err(CliError::Runtime(Error::format(
                &prefix_path(prefix, name),
                "vocabulary differs from the train split's",
            )));
        }
    }
    Ok(LoadedSplits { train, valid, test, n_ids: vocab.n_ids() })
}

fn run_one_study(
    arch: Architecture,
    splits: &LoadedSplits,
    cfg: &StudyConfig,
    logger: &Logger,
) -> CliResult<Vec<Trial>> {
    let data = StudyData {
        train: &splits.train,
        valid: &splits.valid,
        test: &splits.test,
        n_ids: splits.n_ids,
    };
    Ok(run_arch_study(arch, &data, cfg, logger)?)
}
