//! `facteval` command-line interface.
//!
//! Subcommands: `decompose`, `evaluate`, `generate`, `bench`, `stats`,
//! `report`, `compare`. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 backend failure, 4 partial completion.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use facteval::bench::{
    compare_runs, compute_report, render_ablation_table, render_report, run_benchmark, BenchError,
    BenchRun, CostTotals, Format, Layout, Prediction, Report, ReportMeta, Variant,
};
use facteval::dataset::{
    compute_stats, dataset_digest, error_distribution, load_dataset, load_manifest, DatasetError,
    DatasetStats, DistributionRow, Granularity, LoadedDataset, Polarity, Sample, Schema,
};
use facteval::decompose::{
    conventional_decompose, load_default_fewshots, DecomposeError, Decomposer, Segment,
};
use facteval::judge::records::{load_records, RecordError};
use facteval::judge::JudgeError;
use facteval::llm::LlmError;
use facteval::prompts::PromptError;
use facteval::synthgen::{
    augment_positive, build_generation_plan, generate_negative, generated_record_json, AugmentMode,
    AugmentSpec, SynthError,
};
use facteval::typology::parse_error_type;

use config::{GlobalArgs, GlobalConfig};

#[derive(Parser)]
#[command(
    name = "facteval",
    version,
    about = "Factual consistency evaluation for RAG outputs"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dataset statistics and error-type distribution
    Stats(StatsArgs),
    /// Split answers into segments
    Decompose(DecomposeArgs),
    /// Evaluate a dataset, writing judgment records
    Evaluate(EvaluateArgs),
    /// Generate synthetic samples by error injection or augmentation
    Generate(GenerateArgs),
    /// Evaluate a dataset and produce report files
    Bench(BenchArgs),
    /// Recompute a report offline from judgment records
    Report(ReportArgs),
    /// Compare reports cell by cell
    Compare(CompareArgs),
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset file (line-delimited records)
    #[arg(
        long,
        required_unless_present = "manifest",
        conflicts_with = "manifest"
    )]
    dataset: Option<PathBuf>,
    /// Dataset schema: face4rag or generic
    #[arg(long, default_value = "generic")]
    schema: String,
    /// Manifest file listing several datasets
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Also print the per-category error distribution
    #[arg(long)]
    distribution: bool,
    /// Machine-readable JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Answer text to decompose
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    answer: Option<String>,
    /// File with one answer per line
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use the rule-based sentence splitter (no model calls)
    #[arg(long)]
    conventional: bool,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset file
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset schema: face4rag or generic
    #[arg(long, default_value = "generic")]
    schema: String,
    /// Pipeline variant: full, ad, no-cot, no-logic
    #[arg(long, default_value = "full")]
    variant: String,
    /// Judgment records file (read for resuming, rewritten on completion)
    #[arg(long)]
    records: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Corpus of consistent samples to perturb
    #[arg(long)]
    corpus: PathBuf,
    /// Corpus schema: face4rag or generic
    #[arg(long, default_value = "generic")]
    schema: String,
    /// Negative coverage as error_type=count pairs, e.g. Hallu=3,LOver=5
    #[arg(long, default_value = "")]
    coverage: String,
    /// Positive augmentation as mode=count pairs, e.g. paraphrase=2
    #[arg(long, default_value = "")]
    augment: String,
    /// Plan seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset file
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset schema: face4rag or generic
    #[arg(long, default_value = "generic")]
    schema: String,
    /// Pipeline variant: full, ad, no-cot, no-logic
    #[arg(long, default_value = "full")]
    variant: String,
    /// Output directory for report.json, report.txt, records.jsonl
    #[arg(long)]
    out: PathBuf,
    /// Judgment records file (default: <out>/records.jsonl)
    #[arg(long)]
    records: Option<PathBuf>,
    /// Rendered table layout: table2, table3, or ablation (default: auto)
    #[arg(long)]
    layout: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Judgment records file
    #[arg(long)]
    records: PathBuf,
    /// Dataset the records were produced from
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset schema: face4rag or generic
    #[arg(long, default_value = "generic")]
    schema: String,
    /// Variant label for the rebuilt report
    #[arg(long, default_value = "offline")]
    variant: String,
    /// Layout: table2, table3, or ablation (default: auto)
    #[arg(long)]
    layout: Option<String>,
    /// Output format: table or machine
    #[arg(long, default_value = "table")]
    format: String,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Report JSON files (at least two); the first is the baseline
    #[arg(long = "report", required = true, num_args = 1..)]
    reports: Vec<PathBuf>,
    /// Machine-readable JSON instead of a table
    #[arg(long)]
    json: bool,
}

/// Error with a process exit code.
#[derive(Debug)]
pub struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn backend(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn partial(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        CliError::backend(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::Backend(inner) => inner.into(),
            DecomposeError::Unparseable { .. } | DecomposeError::UnparseableAfterRetry { .. } => {
                CliError::backend(e.to_string())
            }
            other => CliError::data(other.to_string()),
        }
    }
}

impl From<JudgeError> for CliError {
    fn from(e: JudgeError) -> Self {
        match e {
            JudgeError::Backend(inner) => inner.into(),
            JudgeError::Decompose(inner) => inner.into(),
            JudgeError::UnparseableVerdict { .. } => CliError::backend(e.to_string()),
            JudgeError::Prompt(inner) => inner.into(),
            JudgeError::Partial { .. } => CliError::partial(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Backend(inner) => inner.into(),
            SynthError::Prompt(inner) => inner.into(),
            other => CliError::data(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Judge(inner) => inner.into(),
            BenchError::Records(inner) => inner.into(),
            BenchError::UnknownVariant(_) => CliError::usage(e.to_string()),
            BenchError::AllSamplesFailed { ref failures } => {
                for failure in failures {
                    eprintln!("failed {}: {}", failure.sample_id, failure.error);
                }
                CliError::backend(e.to_string())
            }
            other => CliError::data(other.to_string()),
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = GlobalConfig::resolve(&cli.global)?;
    eprintln!("facteval {}", config.describe());
    match cli.command {
        Command::Stats(args) => cmd_stats(args),
        Command::Decompose(args) => cmd_decompose(&config, args),
        Command::Evaluate(args) => cmd_evaluate(&config, args),
        Command::Generate(args) => cmd_generate(&config, args),
        Command::Bench(args) => cmd_bench(&config, args),
        Command::Report(args) => cmd_report(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn parse_schema(raw: &str) -> Result<Schema, CliError> {
    raw.parse::<Schema>()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn load_with_warnings(path: &Path, schema: Schema) -> Result<Vec<Sample>, CliError> {
    let LoadedDataset { samples, warnings } = load_dataset(path, schema)?;
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    Ok(samples)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(|e| {
                        CliError::data(format!("cannot create {}: {e}", parent.display()))
                    })?;
                }
            }
            std::fs::write(path, content)
                .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

// ---------------------------------------------------------------- stats

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    let schema = parse_schema(&args.schema)?;
    let mut datasets: Vec<(String, Vec<Sample>)> = Vec::new();
    if let Some(manifest_path) = &args.manifest {
        for entry in load_manifest(manifest_path)? {
            let samples = load_with_warnings(Path::new(&entry.path), entry.schema)?;
            datasets.push((entry.name, samples));
        }
    } else {
        let path = args.dataset.as_deref().expect("clap enforces dataset");
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string());
        datasets.push((name, load_with_warnings(path, schema)?));
    }

    let mut rows: Vec<(String, DatasetStats, Vec<DistributionRow>)> = Vec::new();
    for (name, samples) in &datasets {
        let stats = compute_stats(samples)?;
        let distribution = match error_distribution(samples) {
            Ok(rows) => rows,
            Err(DatasetError::NoInconsistentSamples) => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        rows.push((name.clone(), stats, distribution));
    }

    if args.json {
        #[derive(serde::Serialize)]
        struct Entry<'a> {
            name: &'a str,
            num_samples: usize,
            avg_length: f64,
            positive_rate: f64,
            distribution: &'a [DistributionRow],
        }
        let entries: Vec<Entry> = rows
            .iter()
            .map(|(name, stats, distribution)| Entry {
                name,
                num_samples: stats.num_samples,
                avg_length: stats.avg_length,
                positive_rate: stats.positive_rate,
                distribution,
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&entries).expect("stats serialize");
        out.push('\n');
        return write_output(None, &out);
    }

    let width = rows
        .iter()
        .map(|(name, ..)| name.chars().count())
        .max()
        .unwrap_or(8)
        .max(8);
    let mut out = String::new();
    let _ = write!(out, "{:<16}", "Statistic");
    for (name, ..) in &rows {
        let _ = write!(out, "{name:>width$}  ");
    }
    out.push('\n');
    let _ = write!(out, "{:<16}", "Num. Samples");
    for (_, stats, _) in &rows {
        let _ = write!(out, "{:>width$}  ", stats.num_samples);
    }
    out.push('\n');
    let _ = write!(out, "{:<16}", "Avg. Length");
    for (_, stats, _) in &rows {
        let _ = write!(out, "{:>width$.1}  ", stats.avg_length);
    }
    out.push('\n');
    let _ = write!(out, "{:<16}", "Positive Rate");
    for (_, stats, _) in &rows {
        let _ = write!(
            out,
            "{:>width$}  ",
            format!("{:.1}%", stats.positive_rate * 100.0)
        );
    }
    out.push('\n');

    if args.distribution {
        out.push('\n');
        let _ = writeln!(out, "Error distribution (share of inconsistent samples):");
        for (name, _, distribution) in &rows {
            if distribution.is_empty() {
                let _ = writeln!(out, "  {name}: no inconsistent samples");
                continue;
            }
            let _ = writeln!(out, "  {name}:");
            for row in distribution {
                let _ = writeln!(
                    out,
                    "    {:<14} {:>6.2}%  ({} samples)",
                    row.category.name(),
                    row.fraction * 100.0,
                    row.count
                );
            }
        }
    }
    write_output(None, &out)
}

// ------------------------------------------------------------ decompose

fn cmd_decompose(config: &GlobalConfig, args: DecomposeArgs) -> Result<(), CliError> {
    let answers: Vec<(String, String)> = if let Some(answer) = &args.answer {
        vec![("arg".to_string(), answer.clone())]
    } else {
        let path = args.input.as_deref().expect("clap enforces input");
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        text.lines()
            .enumerate()
            .filter(|(_, line)| !line.trim().is_empty())
            .map(|(i, line)| (format!("line-{}", i + 1), line.to_string()))
            .collect()
    };
    if answers.is_empty() {
        return Err(CliError::data("no answers to decompose"));
    }

    let mut out = String::new();
    if args.conventional {
        for (id, answer) in &answers {
            for segment in conventional_decompose(answer, id)? {
                push_segment_record(&mut out, &segment);
            }
        }
    } else {
        let client = config.client()?;
        let library = config.prompt_library();
        let fewshots = load_default_fewshots(&library)?;
        let decomposer = Decomposer::new(&library, &config.judge_model);
        for (id, answer) in &answers {
            let result = decomposer.decompose(&client, answer, id, &fewshots)?;
            for warning in &result.warnings {
                eprintln!("warning: {id}: {warning}");
            }
            for segment in &result.segments {
                push_segment_record(&mut out, segment);
            }
        }
    }
    write_output(args.out.as_deref(), &out)
}

fn push_segment_record(out: &mut String, segment: &Segment) {
    out.push_str(&serde_json::to_string(segment).expect("segment serializes"));
    out.push('\n');
}

// ------------------------------------------------------------- evaluate

fn cmd_evaluate(config: &GlobalConfig, args: EvaluateArgs) -> Result<(), CliError> {
    let schema = parse_schema(&args.schema)?;
    let samples = load_with_warnings(&args.dataset, schema)?;
    let variant: Variant = args.variant.parse()?;
    let eval_config = variant.config(&config.judge_model, config.concurrency);
    let client = config.client()?;
    let library = config.prompt_library();

    let outcome = run_benchmark(
        &samples,
        &BenchRun {
            client: &client,
            library: &library,
            config: &eval_config,
            variant,
            records_path: Some(&args.records),
        },
    )?;

    let mut out = String::new();
    for prediction in &outcome.predictions {
        out.push_str(&serde_json::to_string(prediction).expect("prediction serializes"));
        out.push('\n');
    }
    write_output(None, &out)?;
    finish_run(
        &outcome.failures,
        outcome.report.completed,
        outcome.report.total,
    )
}

fn finish_run(
    failures: &[facteval::bench::SampleFailure],
    completed: usize,
    total: usize,
) -> Result<(), CliError> {
    eprintln!("completed {completed}/{total} samples");
    if failures.is_empty() {
        return Ok(());
    }
    for failure in failures {
        eprintln!("failed {}: {}", failure.sample_id, failure.error);
    }
    Err(CliError::partial(format!(
        "{} of {} samples failed",
        failures.len(),
        total
    )))
}

// ------------------------------------------------------------- generate

enum GenTask {
    Negative(facteval::synthgen::PlanItem),
    Positive(Sample, AugmentSpec),
}

fn cmd_generate(config: &GlobalConfig, args: GenerateArgs) -> Result<(), CliError> {
    let schema = parse_schema(&args.schema)?;
    let corpus = load_with_warnings(&args.corpus, schema)?;
    let coverage = parse_coverage(&args.coverage)?;
    let augments = parse_augments(&args.augment)?;
    if coverage.is_empty() && augments.is_empty() {
        return Err(CliError::usage(
            "nothing to generate: pass --coverage and/or --augment",
        ));
    }

    let client = config.client()?;
    let library = config.prompt_library();
    let mut tasks: Vec<GenTask> = if coverage.is_empty() {
        Vec::new()
    } else {
        build_generation_plan(&corpus, &coverage, args.seed)?
            .into_iter()
            .map(GenTask::Negative)
            .collect()
    };

    // Positive tasks draw base samples from the consistent part of the
    // corpus in round-robin order.
    let eligible: Vec<&Sample> = corpus
        .iter()
        .filter(|s| s.label == Polarity::Consistent)
        .collect();
    if !augments.is_empty() && eligible.is_empty() {
        return Err(CliError::data(
            "corpus has no consistent samples to augment",
        ));
    }
    let mut cursor = 0usize;
    for (mode, count) in augments {
        for _ in 0..count {
            let base = eligible[cursor % eligible.len()].clone();
            cursor += 1;
            tasks.push(GenTask::Positive(
                base,
                AugmentSpec {
                    mode,
                    seed: args.seed,
                },
            ));
        }
    }

    let slots: Vec<Mutex<Option<Result<String, String>>>> =
        tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = config.concurrency.max(1).min(tasks.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= tasks.len() {
                    break;
                }
                let result = match &tasks[i] {
                    GenTask::Negative(item) => generate_negative(
                        &item.sample,
                        &item.spec,
                        &client,
                        &library,
                        &config.judge_model,
                    )
                    .map(|generated| {
                        generated_record_json(&generated.to_sample(&item.sample, i), &generated)
                    }),
                    GenTask::Positive(base, spec) => {
                        augment_positive(base, spec, &client, &library, &config.judge_model).map(
                            |generated| {
                                generated_record_json(&generated.to_sample(base, i), &generated)
                            },
                        )
                    }
                };
                *slots[i].lock().unwrap() = Some(result.map_err(|e| e.to_string()));
            });
        }
    });

    let mut out = String::new();
    let mut generated = 0usize;
    let mut failures = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.into_inner().unwrap().expect("slot filled") {
            Ok(line) => {
                out.push_str(&line);
                out.push('\n');
                generated += 1;
            }
            Err(error) => {
                let id = match &tasks[i] {
                    GenTask::Negative(item) => item.sample.id.clone(),
                    GenTask::Positive(base, _) => base.id.clone(),
                };
                failures.push((id, error));
            }
        }
    }
    if generated == 0 {
        return Err(CliError::data(format!(
            "all {} generations failed; first error: {}",
            failures.len(),
            failures.first().map(|(_, e)| e.as_str()).unwrap_or("none")
        )));
    }
    write_output(Some(&args.out), &out)?;
    eprintln!("generated {generated} samples into {}", args.out.display());
    if failures.is_empty() {
        Ok(())
    } else {
        for (id, error) in &failures {
            eprintln!("failed {id}: {error}");
        }
        Err(CliError::partial(format!(
            "{} of {} generations failed",
            failures.len(),
            tasks.len()
        )))
    }
}

fn parse_coverage(raw: &str) -> Result<BTreeMap<facteval::ErrorType, usize>, CliError> {
    let mut coverage = BTreeMap::new();
    for pair in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (code, count) = pair.split_once('=').ok_or_else(|| {
            CliError::usage(format!("bad coverage entry {pair:?}, expected type=count"))
        })?;
        let error_type = parse_error_type(code).map_err(|e| CliError::usage(e.to_string()))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad count in coverage entry {pair:?}")))?;
        *coverage.entry(error_type).or_insert(0) += count;
    }
    Ok(coverage)
}

fn parse_augments(raw: &str) -> Result<Vec<(AugmentMode, usize)>, CliError> {
    let mut augments = Vec::new();
    for pair in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (mode, count) = pair.split_once('=').ok_or_else(|| {
            CliError::usage(format!("bad augment entry {pair:?}, expected mode=count"))
        })?;
        let mode = match mode.trim().to_lowercase().as_str() {
            "synonym" | "synonym_replace" => AugmentMode::SynonymReplace,
            "paraphrase" => AugmentMode::Paraphrase,
            "summarize" => AugmentMode::Summarize,
            other => {
                return Err(CliError::usage(format!(
                    "unknown augment mode {other:?}, expected synonym, paraphrase, or summarize"
                )))
            }
        };
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad count in augment entry {pair:?}")))?;
        augments.push((mode, count));
    }
    Ok(augments)
}

// ----------------------------------------------------------------- bench

fn cmd_bench(config: &GlobalConfig, args: BenchArgs) -> Result<(), CliError> {
    let schema = parse_schema(&args.schema)?;
    let samples = load_with_warnings(&args.dataset, schema)?;
    let variant: Variant = args.variant.parse()?;
    let eval_config = variant.config(&config.judge_model, config.concurrency);
    let client = config.client()?;
    let library = config.prompt_library();

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", args.out.display())))?;
    let records_path = args
        .records
        .clone()
        .unwrap_or_else(|| args.out.join("records.jsonl"));

    let outcome = run_benchmark(
        &samples,
        &BenchRun {
            client: &client,
            library: &library,
            config: &eval_config,
            variant,
            records_path: Some(&records_path),
        },
    )?;

    let layout = pick_layout(args.layout.as_deref(), &outcome.report)?;
    let machine = render_report(&outcome.report, layout, Format::Machine)?;
    let table = render_report(&outcome.report, layout, Format::Table)?;
    write_output(Some(&args.out.join("report.json")), &machine)?;
    write_output(Some(&args.out.join("report.txt")), &table)?;
    write_output(None, &table)?;
    finish_run(
        &outcome.failures,
        outcome.report.completed,
        outcome.report.total,
    )
}

fn pick_layout(requested: Option<&str>, report: &Report) -> Result<Layout, CliError> {
    match requested {
        Some(raw) => Ok(raw.parse::<Layout>()?),
        None => Ok(if !report.per_error_type.is_empty() {
            Layout::Table2
        } else if !report.per_source.is_empty() {
            Layout::Table3
        } else {
            Layout::Ablation
        }),
    }
}

// ---------------------------------------------------------------- report

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let schema = parse_schema(&args.schema)?;
    let samples = load_with_warnings(&args.dataset, schema)?;
    let eligible: Vec<Sample> = samples
        .into_iter()
        .filter(|s| s.granularity == Granularity::Answer)
        .collect();
    let records = load_records(&args.records)?;
    if records.is_empty() {
        return Err(CliError::data(format!(
            "{} contains no judgment records",
            args.records.display()
        )));
    }

    let ids: std::collections::BTreeSet<&str> = eligible.iter().map(|s| s.id.as_str()).collect();
    let relevant: Vec<&facteval::judge::JudgmentRecord> = records
        .iter()
        .filter(|r| ids.contains(r.answer_id.as_str()))
        .collect();
    if relevant.is_empty() {
        return Err(CliError::data(
            "no judgment record matches a sample id in the dataset",
        ));
    }
    let config_digests: std::collections::BTreeSet<&str> =
        relevant.iter().map(|r| r.config_digest.as_str()).collect();
    if config_digests.len() > 1 {
        return Err(CliError::data(format!(
            "records mix {} configurations; use a records file produced by a single config",
            config_digests.len()
        )));
    }

    let by_id: BTreeMap<&str, &facteval::judge::JudgmentRecord> = relevant
        .iter()
        .map(|r| (r.answer_id.as_str(), *r))
        .collect();
    let verdict_base = args.records.display().to_string();
    let mut predictions = Vec::new();
    let mut cost = CostTotals::default();
    for sample in &eligible {
        if let Some(record) = by_id.get(sample.id.as_str()) {
            predictions.push(Prediction {
                sample_id: sample.id.clone(),
                predicted: record.predicted,
                verdict_ref: format!("{verdict_base}#{}", record.answer_id),
            });
            cost.calls += record.verdict.cost.calls;
            cost.tokens += record.verdict.cost.tokens;
        }
    }

    let first = relevant[0];
    let meta = ReportMeta {
        variant: args.variant.clone(),
        judge_model: String::new(),
        dataset_digest: dataset_digest(&eligible),
        config_digest: first.config_digest.clone(),
        prompt_digests: first.prompt_digests.clone(),
        total: eligible.len(),
        cost,
    };
    let report = compute_report(&eligible, &predictions, meta)?;
    let layout = pick_layout(args.layout.as_deref(), &report)?;
    let format: Format = args.format.parse()?;
    let rendered = render_report(&report, layout, format)?;
    write_output(args.out.as_deref(), &rendered)
}

// --------------------------------------------------------------- compare

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for path in &args.reports {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        let report: Report = serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("bad report {}: {e}", path.display())))?;
        reports.push(report);
    }
    let table = compare_runs(&reports)?;
    if args.json {
        let mut out = serde_json::to_string_pretty(&table).expect("delta table serializes");
        out.push('\n');
        write_output(None, &out)
    } else {
        let mut rendered = table.render();
        rendered.push('\n');
        rendered.push_str(&render_ablation_table(&reports)?);
        write_output(None, &rendered)
    }
}
