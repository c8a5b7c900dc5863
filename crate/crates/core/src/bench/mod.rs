//! Benchmark runner and accuracy metrics: evaluates a dataset under one
//! configuration, persists judgment records for resumable and offline
//! reporting, and computes the report cells (overall / positive /
//! negative / per error type / per source).

mod render;

pub use render::{
    compare_runs, machine_json, render_ablation_table, render_report, DeltaRow, DeltaTable, Format,
    Layout,
};

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{dataset_digest, Granularity, Polarity, Sample};
use crate::judge::records::{load_records, write_records, RecordAppender, RecordError};
use crate::judge::{
    predicted_polarity, sample_input_digest, DecompositionMode, EvalConfig, Evaluator, JudgeError,
    JudgmentRecord,
};
use crate::llm::Client;
use crate::prompts::PromptLibrary;
use crate::typology::ErrorType;

/// Pipeline variant under benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Logic-preserving decomposition, COT, both stages.
    Full,
    /// Conventional rule-based answer decomposition.
    Ad,
    /// Direct prompts without chain-of-thought steps.
    NoCot,
    /// Fact stage only.
    NoLogic,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::Ad, Variant::NoCot, Variant::NoLogic];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Ad => "ad",
            Variant::NoCot => "no-cot",
            Variant::NoLogic => "no-logic",
        }
    }

    /// The evaluator configuration this variant denotes.
    pub fn config(self, judge_model: &str, concurrency: usize) -> EvalConfig {
        let mut config = EvalConfig {
            judge_model: judge_model.to_string(),
            concurrency,
            ..EvalConfig::default()
        };
        match self {
            Variant::Full => {}
            Variant::Ad => config.decomposition = DecompositionMode::Conventional,
            Variant::NoCot => config.use_cot = false,
            Variant::NoLogic => config.use_logic_stage = false,
        }
        config
    }
}

impl std::str::FromStr for Variant {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "full" => Ok(Variant::Full),
            "ad" => Ok(Variant::Ad),
            "no-cot" | "nocot" => Ok(Variant::NoCot),
            "no-logic" | "nologic" => Ok(Variant::NoLogic),
            other => Err(BenchError::UnknownVariant(other.to_string())),
        }
    }
}

/// One answer-level prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: String,
    pub predicted: Polarity,
    /// Locator of the backing judgment record.
    pub verdict_ref: String,
}

/// One accuracy cell: counts plus the derived fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Cell {
    fn new(correct: usize, total: usize) -> Option<Cell> {
        (total > 0).then(|| Cell {
            correct,
            total,
            accuracy: correct as f64 / total as f64,
        })
    }
}

/// Backend usage totals over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTotals {
    pub calls: u64,
    pub tokens: u64,
}

/// Full accuracy report with provenance digests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub variant: String,
    pub judge_model: String,
    pub dataset_digest: String,
    pub config_digest: String,
    pub prompt_digests: BTreeMap<String, String>,
    /// Samples with a completed judgment; the report covers these.
    pub completed: usize,
    /// Answer-level samples in the dataset.
    pub total: usize,
    pub overall: Cell,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<Cell>,
    pub per_error_type: BTreeMap<ErrorType, Cell>,
    pub per_source: BTreeMap<String, Cell>,
    pub cost: CostTotals,
}

/// Report provenance and accounting supplied by the runner.
#[derive(Debug, Clone, Default)]
pub struct ReportMeta {
    pub variant: String,
    pub judge_model: String,
    pub dataset_digest: String,
    pub config_digest: String,
    pub prompt_digests: BTreeMap<String, String>,
    pub total: usize,
    pub cost: CostTotals,
}

/// A sample whose evaluation failed; reports cover the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample_id: String,
    pub error: String,
}

/// Everything a benchmark run produces.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub predictions: Vec<Prediction>,
    pub report: Report,
    pub failures: Vec<SampleFailure>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("dataset has no answer-level samples")]
    EmptyDataset,
    #[error("no predictions completed; every sample failed")]
    NothingCompleted,
    #[error("all {} samples failed; first error: {}", failures.len(), failures.first().map(|f| f.error.as_str()).unwrap_or("none"))]
    AllSamplesFailed { failures: Vec<SampleFailure> },
    #[error("unknown variant {0:?}, expected full, ad, no-cot, or no-logic")]
    UnknownVariant(String),
    #[error("report does not fit layout {layout:?}: {missing}")]
    LayoutMismatch { layout: Layout, missing: String },
    #[error("reports cover different datasets: {0} vs {1}")]
    DatasetMismatch(String, String),
    #[error("comparison needs at least two reports")]
    NeedTwoReports,
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error(transparent)]
    Records(#[from] RecordError),
}

/// A configured benchmark run.
pub struct BenchRun<'a> {
    pub client: &'a Client,
    pub library: &'a PromptLibrary,
    pub config: &'a EvalConfig,
    pub variant: Variant,
    /// Judgment records file; enables resuming and offline reporting.
    pub records_path: Option<&'a Path>,
}

/// Evaluate every answer-level sample and compute the report.
///
/// Samples already present in the records file under matching input and
/// config digests are not re-queried. Per-sample errors are collected
/// into the failure list; the report covers completed samples.
pub fn run_benchmark(samples: &[Sample], run: &BenchRun) -> Result<BenchOutcome, BenchError> {
    let eligible: Vec<&Sample> = samples
        .iter()
        .filter(|s| s.granularity == Granularity::Answer)
        .collect();
    if eligible.is_empty() {
        return Err(BenchError::EmptyDataset);
    }

    let evaluator = Evaluator::new(run.client, run.library, run.config)?;
    let config_digest = run.config.digest(run.library);
    let prompt_digests = evaluator.prompt_digests()?;
    let owned: Vec<Sample> = eligible.iter().map(|s| (*s).clone()).collect();
    let digest = dataset_digest(&owned);

    // Records from earlier runs: reusable when both digests match.
    let mut existing: Vec<JudgmentRecord> = Vec::new();
    let mut foreign: Vec<JudgmentRecord> = Vec::new();
    if let Some(path) = run.records_path {
        for record in load_records(path)? {
            if record.config_digest == config_digest {
                existing.push(record);
            } else {
                foreign.push(record);
            }
        }
    }
    let reusable: BTreeMap<&str, &JudgmentRecord> =
        existing.iter().map(|r| (r.answer_id.as_str(), r)).collect();

    let appender = match run.records_path {
        Some(path) => Some(Mutex::new(RecordAppender::open(path)?)),
        None => None,
    };

    type Slot = Option<Result<JudgmentRecord, String>>;
    let slots: Vec<Mutex<Slot>> = eligible.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = run.config.concurrency.max(1).min(eligible.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= eligible.len() {
                    break;
                }
                let sample = eligible[i];
                let input_digest = sample_input_digest(sample);
                if let Some(record) = reusable.get(sample.id.as_str()) {
                    if record.input_digest == input_digest {
                        *slots[i].lock().unwrap() = Some(Ok((*record).clone()));
                        continue;
                    }
                }
                let outcome = match evaluator.evaluate_answer(sample) {
                    Ok(evaluated) => {
                        let record = JudgmentRecord {
                            answer_id: sample.id.clone(),
                            input_digest,
                            config_digest: config_digest.clone(),
                            prompt_digests: prompt_digests.clone(),
                            predicted: predicted_polarity(&evaluated.verdict),
                            verdict: evaluated.verdict,
                            warnings: evaluated.warnings,
                            transcripts: evaluated.transcripts,
                        };
                        if let Some(appender) = &appender {
                            // Appended for crash safety; the file is
                            // rewritten in dataset order on completion.
                            let _ = appender.lock().unwrap().append(&record);
                        }
                        Ok(record)
                    }
                    Err(e) => Err(e.to_string()),
                };
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    drop(appender);

    let mut records_in_order: Vec<JudgmentRecord> = Vec::new();
    let mut failures = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.into_inner().unwrap().expect("every slot filled") {
            Ok(record) => records_in_order.push(record),
            Err(error) => failures.push(SampleFailure {
                sample_id: eligible[i].id.clone(),
                error,
            }),
        }
    }
    if records_in_order.is_empty() {
        return Err(BenchError::AllSamplesFailed { failures });
    }

    if let Some(path) = run.records_path {
        let mut all = records_in_order.clone();
        all.extend(foreign);
        write_records(path, &all)?;
    }

    let verdict_base = run
        .records_path
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "memory".to_string());
    let predictions: Vec<Prediction> = records_in_order
        .iter()
        .map(|r| Prediction {
            sample_id: r.answer_id.clone(),
            predicted: r.predicted,
            verdict_ref: format!("{verdict_base}#{}", r.answer_id),
        })
        .collect();

    let cost = records_in_order
        .iter()
        .fold(CostTotals::default(), |mut acc, r| {
            acc.calls += r.verdict.cost.calls;
            acc.tokens += r.verdict.cost.tokens;
            acc
        });

    let meta = ReportMeta {
        variant: run.variant.name().to_string(),
        judge_model: run.config.judge_model.clone(),
        dataset_digest: digest,
        config_digest,
        prompt_digests,
        total: eligible.len(),
        cost,
    };
    let report = compute_report(&owned, &predictions, meta)?;

    Ok(BenchOutcome {
        predictions,
        report,
        failures,
    })
}

/// Accuracy on negatives per error type, under the multi-label rule: a
/// sample counts toward every error type it carries. Types with no
/// samples get no cell.
pub fn accuracy_by_error_type(
    predictions: &[Prediction],
    samples: &[Sample],
) -> BTreeMap<ErrorType, Cell> {
    let by_id: BTreeMap<&str, Polarity> = predictions
        .iter()
        .map(|p| (p.sample_id.as_str(), p.predicted))
        .collect();
    let mut cells = BTreeMap::new();
    for error_type in ErrorType::ALL {
        let mut correct = 0usize;
        let mut total = 0usize;
        for sample in samples {
            if sample.label != Polarity::Inconsistent || !sample.error_types.contains(&error_type) {
                continue;
            }
            let Some(&predicted) = by_id.get(sample.id.as_str()) else {
                continue;
            };
            total += 1;
            if predicted == Polarity::Inconsistent {
                correct += 1;
            }
        }
        if let Some(cell) = Cell::new(correct, total) {
            cells.insert(error_type, cell);
        }
    }
    cells
}

/// Pure metric fold: build the report cells from gold samples and
/// predictions. Samples without a prediction count as not completed.
pub fn compute_report(
    samples: &[Sample],
    predictions: &[Prediction],
    meta: ReportMeta,
) -> Result<Report, BenchError> {
    let by_id: BTreeMap<&str, Polarity> = predictions
        .iter()
        .map(|p| (p.sample_id.as_str(), p.predicted))
        .collect();

    let mut overall = (0usize, 0usize);
    let mut positive = (0usize, 0usize);
    let mut negative = (0usize, 0usize);
    let mut per_source: BTreeMap<String, (usize, usize)> = BTreeMap::new();

    for sample in samples {
        let Some(&predicted) = by_id.get(sample.id.as_str()) else {
            continue;
        };
        let correct = predicted == sample.label;
        overall.1 += 1;
        overall.0 += correct as usize;
        let polarity_cell = match sample.label {
            Polarity::Consistent => &mut positive,
            Polarity::Inconsistent => &mut negative,
        };
        polarity_cell.1 += 1;
        polarity_cell.0 += correct as usize;
        let source = per_source.entry(sample.source.clone()).or_insert((0, 0));
        source.1 += 1;
        source.0 += correct as usize;
    }

    let overall = Cell::new(overall.0, overall.1).ok_or(BenchError::NothingCompleted)?;

    Ok(Report {
        variant: meta.variant,
        judge_model: meta.judge_model,
        dataset_digest: meta.dataset_digest,
        config_digest: meta.config_digest,
        prompt_digests: meta.prompt_digests,
        completed: overall.total,
        total: meta.total,
        overall,
        positive: Cell::new(positive.0, positive.1),
        negative: Cell::new(negative.0, negative.1),
        per_error_type: accuracy_by_error_type(predictions, samples),
        per_source: per_source
            .into_iter()
            .filter_map(|(source, (correct, total))| {
                Cell::new(correct, total).map(|cell| (source, cell))
            })
            .collect(),
        cost: meta.cost,
    })
}
