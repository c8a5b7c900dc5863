//! Two-stage factual consistency evaluation over decomposed segments.
//!
//! Each segment first passes through a fact stage (informational-point
//! extraction, context identification, per-point check). Only segments
//! that pass move on to the logic stage, which compares logical
//! structures. An answer is consistent if and only if every segment
//! passed both stages.

mod parse;
pub mod records;

pub use parse::{fenced_block, parse_verdict};
pub use records::JudgmentRecord;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Polarity, Sample};
use crate::decompose::{
    conventional_decompose, load_default_fewshots, CallRecord, DecomposeError, Decomposer,
    FewShotExample, Segment,
};
use crate::llm::{text_digest, ChatRequest, Client, LlmError};
use crate::prompts::{render, PromptError, PromptLibrary};

/// Evaluation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Fact,
    Logic,
}

/// Step-enumeration markers present in chain-of-thought prompts and, by
/// contract, absent from the direct (no-COT) variants.
pub const STEP_MARKERS: &[&str] = &["步骤1", "步骤2", "步骤3", "Step 1", "Step 2", "Step 3"];

/// One informational point checked in the fact stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub point_text: String,
    /// Located reference content; `None` marks an unverifiable point.
    pub evidence: Option<String>,
    pub point_consistent: bool,
}

/// Fact-stage verdict. When points are present, `consistent` is their
/// conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactVerdict {
    pub consistent: bool,
    pub points: Vec<PointCheck>,
    pub rationale: String,
}

/// Logic-stage verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicVerdict {
    pub consistent: bool,
    pub answer_structure: String,
    pub reference_structure: String,
    pub rationale: String,
}

/// Verdict of either stage, as returned by [`parse_verdict`].
#[derive(Debug, Clone, PartialEq)]
pub enum StageVerdict {
    Fact(FactVerdict),
    Logic(LogicVerdict),
}

/// Per-segment outcome. `passed` holds exactly when the fact stage passed
/// and the logic stage, if run, passed too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentVerdict {
    pub segment: Segment,
    pub fact: FactVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logic: Option<LogicVerdict>,
    pub passed: bool,
}

/// Backend usage accounting for one answer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCost {
    /// Backend calls performed, including retry attempts.
    pub calls: u64,
    /// Prompt plus completion tokens over all non-cached calls.
    pub tokens: u64,
}

impl EvalCost {
    fn add(&mut self, record: &CallRecord) {
        self.calls += u64::from(record.response.attempts);
        if !record.response.cache_hit {
            self.tokens += record.response.prompt_tokens + record.response.completion_tokens;
        }
    }
}

/// Aggregated judgment for one answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerVerdict {
    pub answer_id: String,
    pub consistent: bool,
    pub segment_verdicts: Vec<SegmentVerdict>,
    pub failing_indices: Vec<usize>,
    pub cost: EvalCost,
}

/// Which decomposition feeds the evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    LogicPreserving,
    Conventional,
}

/// Evaluator configuration. Defaults correspond to the full pipeline:
/// logic-preserving decomposition, chain-of-thought prompts, and the
/// logic stage enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub decomposition: DecompositionMode,
    pub use_cot: bool,
    pub use_logic_stage: bool,
    /// Run the logic stage even for segments that failed the fact stage;
    /// diagnostic runs only.
    pub force_both_stages: bool,
    pub judge_model: String,
    /// Worker bound for answer-level parallelism; not part of the config
    /// digest since it cannot affect results.
    pub concurrency: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            decomposition: DecompositionMode::LogicPreserving,
            use_cot: true,
            use_logic_stage: true,
            force_both_stages: false,
            judge_model: "gpt-4".to_string(),
            concurrency: 4,
        }
    }
}

impl EvalConfig {
    /// Digest over the semantic fields plus prompt locale. Two configs
    /// with equal digests produce interchangeable judgments.
    pub fn digest(&self, library: &PromptLibrary) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            decomposition: DecompositionMode,
            use_cot: bool,
            use_logic_stage: bool,
            force_both_stages: bool,
            judge_model: &'a str,
            locale: &'a str,
        }
        let canonical = Canonical {
            decomposition: self.decomposition,
            use_cot: self.use_cot,
            use_logic_stage: self.use_logic_stage,
            force_both_stages: self.force_both_stages,
            judge_model: &self.judge_model,
            locale: library.locale().code(),
        };
        text_digest(&serde_json::to_string(&canonical).expect("config serializes"))
    }

    /// Template names this configuration can touch, for provenance.
    pub fn template_names(&self) -> Vec<&'static str> {
        let mut names = vec![if self.use_cot {
            "fact_cot"
        } else {
            "fact_direct"
        }];
        if self.use_logic_stage {
            names.push(if self.use_cot {
                "logic_cot"
            } else {
                "logic_direct"
            });
        }
        if self.decomposition == DecompositionMode::LogicPreserving {
            names.push("decompose");
        }
        names
    }
}

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("unparseable {stage:?}-stage verdict after retry: {raw:?}")]
    UnparseableVerdict { stage: Stage, raw: String },
    #[error("answer {answer_id}: segment evaluation failed after {} completed segment(s): {source}", completed.len())]
    Partial {
        answer_id: String,
        completed: Vec<SegmentVerdict>,
        #[source]
        source: Box<JudgeError>,
    },
}

/// One backend exchange kept in the judgment record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_index: Option<usize>,
    pub prompt: String,
    pub response: String,
    pub cache_hit: bool,
    pub attempts: u32,
    pub latency_ms: u64,
}

/// Evaluation output for one answer: the verdict plus everything needed
/// to recompute reports offline.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedAnswer {
    pub verdict: AnswerVerdict,
    pub transcripts: Vec<TranscriptEntry>,
    pub warnings: Vec<String>,
}

/// Two-stage evaluator bound to a client, prompt library, and config.
pub struct Evaluator<'a> {
    client: &'a Client,
    library: &'a PromptLibrary,
    config: &'a EvalConfig,
    fewshots: Vec<FewShotExample>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        client: &'a Client,
        library: &'a PromptLibrary,
        config: &'a EvalConfig,
    ) -> Result<Self, JudgeError> {
        let fewshots = if config.decomposition == DecompositionMode::LogicPreserving {
            load_default_fewshots(library)?
        } else {
            Vec::new()
        };
        Ok(Evaluator {
            client,
            library,
            config,
            fewshots,
        })
    }

    pub fn config(&self) -> &EvalConfig {
        self.config
    }

    /// Digests of every prompt asset this run can touch.
    pub fn prompt_digests(&self) -> Result<BTreeMap<String, String>, JudgeError> {
        Ok(self.library.digests(&self.config.template_names())?)
    }

    fn stage_request(
        &self,
        stage: Stage,
        segment: &Segment,
        reference: &str,
    ) -> Result<ChatRequest, JudgeError> {
        let name = match (stage, self.config.use_cot) {
            (Stage::Fact, true) => "fact_cot",
            (Stage::Fact, false) => "fact_direct",
            (Stage::Logic, true) => "logic_cot",
            (Stage::Logic, false) => "logic_direct",
        };
        let template = self.library.template(name)?;
        let content = render(
            &template,
            &[("reference", reference), ("segment", segment.text.as_str())],
        );
        Ok(ChatRequest::user(&self.config.judge_model, content))
    }

    fn run_stage(
        &self,
        stage: Stage,
        segment: &Segment,
        reference: &str,
        calls: &mut Vec<CallRecord>,
    ) -> Result<StageVerdict, JudgeError> {
        let request = self.stage_request(stage, segment, reference)?;
        let response = self.client.complete(&request)?;
        calls.push(CallRecord {
            prompt: request.match_target(),
            response: response.clone(),
        });
        match parse_verdict(&response.content, stage) {
            Ok(verdict) => Ok(verdict),
            Err(_) => {
                // One reformat-and-retry with the strict output reminder.
                let reminder = self.library.template("verdict_retry")?;
                let mut retry = request.clone();
                retry.messages[0].content = format!("{}\n\n{reminder}", retry.messages[0].content);
                let retry_response = self.client.complete(&retry)?;
                calls.push(CallRecord {
                    prompt: retry.match_target(),
                    response: retry_response.clone(),
                });
                parse_verdict(&retry_response.content, stage)
            }
        }
    }

    /// Fact-stage judgment for one segment.
    pub fn evaluate_fact(
        &self,
        segment: &Segment,
        reference: &str,
        calls: &mut Vec<CallRecord>,
    ) -> Result<FactVerdict, JudgeError> {
        match self.run_stage(Stage::Fact, segment, reference, calls)? {
            StageVerdict::Fact(verdict) => Ok(verdict),
            StageVerdict::Logic(_) => unreachable!("fact stage parses fact verdicts"),
        }
    }

    /// Logic-stage judgment for one segment.
    pub fn evaluate_logic(
        &self,
        segment: &Segment,
        reference: &str,
        calls: &mut Vec<CallRecord>,
    ) -> Result<LogicVerdict, JudgeError> {
        match self.run_stage(Stage::Logic, segment, reference, calls)? {
            StageVerdict::Logic(verdict) => Ok(verdict),
            StageVerdict::Fact(_) => unreachable!("logic stage parses logic verdicts"),
        }
    }

    /// Evaluate a full answer: decompose, judge each segment (fact stage,
    /// then logic stage only when the fact stage passed), and aggregate
    /// with the all-segments-must-pass rule.
    pub fn evaluate_answer(&self, sample: &Sample) -> Result<EvaluatedAnswer, JudgeError> {
        let mut transcripts = Vec::new();
        let mut warnings = Vec::new();
        let mut cost = EvalCost::default();

        let segments = match self.config.decomposition {
            DecompositionMode::Conventional => conventional_decompose(&sample.answer, &sample.id)?,
            DecompositionMode::LogicPreserving => {
                let decomposer = Decomposer::new(self.library, &self.config.judge_model);
                let result = decomposer.decompose(
                    self.client,
                    &sample.answer,
                    &sample.id,
                    &self.fewshots,
                )?;
                for call in &result.calls {
                    cost.add(call);
                    transcripts.push(TranscriptEntry {
                        stage: "decompose".to_string(),
                        segment_index: None,
                        prompt: call.prompt.clone(),
                        response: call.response.content.clone(),
                        cache_hit: call.response.cache_hit,
                        attempts: call.response.attempts,
                        latency_ms: call.response.latency_ms,
                    });
                }
                warnings.extend(result.warnings);
                result.segments
            }
        };

        let mut segment_verdicts: Vec<SegmentVerdict> = Vec::with_capacity(segments.len());
        for segment in &segments {
            match self.evaluate_segment(segment, &sample.reference, &mut cost, &mut transcripts) {
                Ok(verdict) => segment_verdicts.push(verdict),
                Err(source) => {
                    return Err(JudgeError::Partial {
                        answer_id: sample.id.clone(),
                        completed: segment_verdicts,
                        source: Box::new(source),
                    })
                }
            }
        }

        let failing_indices: Vec<usize> = segment_verdicts
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.passed)
            .map(|(i, _)| i)
            .collect();
        let consistent = failing_indices.is_empty();

        Ok(EvaluatedAnswer {
            verdict: AnswerVerdict {
                answer_id: sample.id.clone(),
                consistent,
                segment_verdicts,
                failing_indices,
                cost,
            },
            transcripts,
            warnings,
        })
    }

    fn evaluate_segment(
        &self,
        segment: &Segment,
        reference: &str,
        cost: &mut EvalCost,
        transcripts: &mut Vec<TranscriptEntry>,
    ) -> Result<SegmentVerdict, JudgeError> {
        let mut calls = Vec::new();
        let fact = self.evaluate_fact(segment, reference, &mut calls);
        self.absorb_calls(Stage::Fact, segment.index, &calls, cost, transcripts);
        let fact = fact?;

        let run_logic =
            self.config.use_logic_stage && (fact.consistent || self.config.force_both_stages);
        let logic = if run_logic {
            let mut calls = Vec::new();
            let logic = self.evaluate_logic(segment, reference, &mut calls);
            self.absorb_calls(Stage::Logic, segment.index, &calls, cost, transcripts);
            Some(logic?)
        } else {
            None
        };

        let passed = fact.consistent && logic.as_ref().is_none_or(|l| l.consistent);
        Ok(SegmentVerdict {
            segment: segment.clone(),
            fact,
            logic,
            passed,
        })
    }

    fn absorb_calls(
        &self,
        stage: Stage,
        segment_index: usize,
        calls: &[CallRecord],
        cost: &mut EvalCost,
        transcripts: &mut Vec<TranscriptEntry>,
    ) {
        let stage_name = match stage {
            Stage::Fact => "fact",
            Stage::Logic => "logic",
        };
        for call in calls {
            cost.add(call);
            transcripts.push(TranscriptEntry {
                stage: stage_name.to_string(),
                segment_index: Some(segment_index),
                prompt: call.prompt.clone(),
                response: call.response.content.clone(),
                cache_hit: call.response.cache_hit,
                attempts: call.response.attempts,
                latency_ms: call.response.latency_ms,
            });
        }
    }
}

/// Predicted polarity from an answer verdict.
pub fn predicted_polarity(verdict: &AnswerVerdict) -> Polarity {
    if verdict.consistent {
        Polarity::Consistent
    } else {
        Polarity::Inconsistent
    }
}

/// Digest identifying a sample's evaluation inputs.
pub fn sample_input_digest(sample: &Sample) -> String {
    #[derive(Serialize)]
    struct Inputs<'a> {
        question: &'a str,
        reference: &'a str,
        answer: &'a str,
    }
    text_digest(
        &serde_json::to_string(&Inputs {
            question: &sample.question,
            reference: &sample.reference,
            answer: &sample.answer,
        })
        .expect("inputs serialize"),
    )
}
