//! Synthetic sample construction: per-error-type negative generation
//! (three hallucination difficulty tiers, word- and sentence-level
//! contradictions, and the full logical-fallacy set) plus positive
//! augmentation, each driven by its own prompt template. Generated
//! outputs carry the model's stated reasoning alongside the rewritten
//! answer.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dataset::{Granularity, Polarity, Sample};
use crate::judge::fenced_block;
use crate::llm::{ChatRequest, Client, LlmError};
use crate::prompts::{render, PromptError, PromptLibrary};
use crate::typology::ErrorType;

/// Contradiction granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KContGranularity {
    Word,
    Sentence,
}

/// Target of one negative generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub error_type: ErrorType,
    /// Required exactly when `error_type` is `Hallu`; 1 = off-topic,
    /// 2 = on-topic but ungrounded, 3 = grounded and ungrounded mixed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hallu_difficulty: Option<u8>,
    /// Required exactly when `error_type` is `KCont`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kcont_granularity: Option<KContGranularity>,
    pub seed: u64,
}

impl GenerationSpec {
    pub fn new(
        error_type: ErrorType,
        hallu_difficulty: Option<u8>,
        kcont_granularity: Option<KContGranularity>,
        seed: u64,
    ) -> Result<Self, SynthError> {
        if error_type == ErrorType::Other {
            return Err(SynthError::InvalidSpec(
                "Other is an annotation bucket, not a generation target".into(),
            ));
        }
        match (error_type, hallu_difficulty) {
            (ErrorType::Hallu, Some(1..=3)) => {}
            (ErrorType::Hallu, _) => {
                return Err(SynthError::InvalidSpec(
                    "Hallu requires hallu_difficulty in 1..=3".into(),
                ))
            }
            (_, None) => {}
            (_, Some(_)) => {
                return Err(SynthError::InvalidSpec(
                    "hallu_difficulty only applies to Hallu".into(),
                ))
            }
        }
        match (error_type, kcont_granularity) {
            (ErrorType::KCont, Some(_)) => {}
            (ErrorType::KCont, None) => {
                return Err(SynthError::InvalidSpec(
                    "KCont requires kcont_granularity".into(),
                ))
            }
            (_, None) => {}
            (_, Some(_)) => {
                return Err(SynthError::InvalidSpec(
                    "kcont_granularity only applies to KCont".into(),
                ))
            }
        }
        Ok(GenerationSpec {
            error_type,
            hallu_difficulty,
            kcont_granularity,
            seed,
        })
    }

    /// Prompt template implementing this spec.
    pub fn template_name(&self) -> &'static str {
        match (
            self.error_type,
            self.hallu_difficulty,
            self.kcont_granularity,
        ) {
            (ErrorType::Hallu, Some(1), _) => "gen_hallu_1",
            (ErrorType::Hallu, Some(2), _) => "gen_hallu_2",
            (ErrorType::Hallu, Some(3), _) => "gen_hallu_3",
            (ErrorType::KCont, _, Some(KContGranularity::Word)) => "gen_kcont_word",
            (ErrorType::KCont, _, Some(KContGranularity::Sentence)) => "gen_kcont_sentence",
            (ErrorType::KInve, ..) => "gen_kinve",
            (ErrorType::KConf, ..) => "gen_kconf",
            (ErrorType::KConc, ..) => "gen_kconc",
            (ErrorType::LOver, ..) => "gen_lover",
            (ErrorType::LCaus, ..) => "gen_lcaus",
            (ErrorType::LConf, ..) => "gen_lconf",
            (ErrorType::LIncl, ..) => "gen_lincl",
            (ErrorType::LOthe, ..) => "gen_lothe",
            _ => unreachable!("validated in GenerationSpec::new"),
        }
    }
}

/// Positive-augmentation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentMode {
    SynonymReplace,
    Paraphrase,
    Summarize,
}

impl AugmentMode {
    pub fn template_name(self) -> &'static str {
        match self {
            AugmentMode::SynonymReplace => "gen_pos_synonym",
            AugmentMode::Paraphrase => "gen_pos_paraphrase",
            AugmentMode::Summarize => "gen_pos_summarize",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub mode: AugmentMode,
    pub seed: u64,
}

/// Which generation produced a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum GenSpec {
    Negative(GenerationSpec),
    Positive(AugmentSpec),
}

/// A freshly generated sample with its reasoning trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSample {
    pub base_id: String,
    pub perturbed_answer: String,
    pub label: Polarity,
    pub error_types: BTreeSet<ErrorType>,
    /// The model's stated thinking process behind the rewrite.
    pub reasoning: String,
    pub spec: GenSpec,
}

impl GeneratedSample {
    /// Materialize as a dataset sample, inheriting question and reference
    /// from the base sample.
    pub fn to_sample(&self, base: &Sample, ordinal: usize) -> Sample {
        let tag = match &self.spec {
            GenSpec::Negative(spec) => spec.error_type.code().to_lowercase(),
            GenSpec::Positive(spec) => match spec.mode {
                AugmentMode::SynonymReplace => "synonym".to_string(),
                AugmentMode::Paraphrase => "paraphrase".to_string(),
                AugmentMode::Summarize => "summarize".to_string(),
            },
        };
        Sample {
            id: format!("{}-{tag}-{ordinal}", self.base_id),
            question: base.question.clone(),
            reference: base.reference.clone(),
            answer: self.perturbed_answer.clone(),
            label: self.label,
            error_types: self.error_types.clone(),
            source: "synthetic".to_string(),
            granularity: Granularity::Answer,
        }
    }
}

/// One planned generation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanItem {
    pub sample: Sample,
    pub spec: GenerationSpec,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
    #[error("sample {id} is not labeled consistent; only clean answers are perturbed")]
    BaseNotConsistent { id: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus has no consistent samples to perturb")]
    NoConsistentSamples,
    #[error("generated answer for {id} is character-identical to the original")]
    Degenerate { id: String },
    #[error("unusable generation output: {0}")]
    BadOutput(String),
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Assemble the negative-generation request for a spec.
pub fn build_negative_prompt(
    sample: &Sample,
    spec: &GenerationSpec,
    library: &PromptLibrary,
    model: &str,
) -> Result<ChatRequest, SynthError> {
    let template = library.template(spec.template_name())?;
    let content = render(
        &template,
        &[
            ("reference", sample.reference.as_str()),
            ("answer", sample.answer.as_str()),
        ],
    );
    Ok(ChatRequest::user(model, content))
}

/// Assemble the positive-augmentation request. The summarize mode works
/// from the reference alone; its template has no answer placeholder.
pub fn build_positive_prompt(
    sample: &Sample,
    spec: &AugmentSpec,
    library: &PromptLibrary,
    model: &str,
) -> Result<ChatRequest, SynthError> {
    let template = library.template(spec.mode.template_name())?;
    let content = render(
        &template,
        &[
            ("reference", sample.reference.as_str()),
            ("answer", sample.answer.as_str()),
        ],
    );
    Ok(ChatRequest::user(model, content))
}

/// Parse `{"reasoning": ..., "answer": ...}` from raw model output, either
/// as a fenced block or as the whole body.
pub fn parse_generation(raw: &str) -> Result<(String, String), SynthError> {
    let candidate = fenced_block(raw).unwrap_or_else(|| raw.trim().to_string());
    let value: Value = serde_json::from_str(&candidate)
        .map_err(|e| SynthError::BadOutput(format!("not a JSON object: {e}")))?;
    let answer = value
        .get("answer")
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| SynthError::BadOutput("missing or empty \"answer\"".into()))?;
    let reasoning = value
        .get("reasoning")
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| SynthError::BadOutput("missing or empty \"reasoning\"".into()))?;
    Ok((answer.to_string(), reasoning.to_string()))
}

/// Rewrite a clean answer to carry exactly one error type.
pub fn generate_negative(
    sample: &Sample,
    spec: &GenerationSpec,
    client: &Client,
    library: &PromptLibrary,
    model: &str,
) -> Result<GeneratedSample, SynthError> {
    if sample.label != Polarity::Consistent {
        return Err(SynthError::BaseNotConsistent {
            id: sample.id.clone(),
        });
    }
    let request = build_negative_prompt(sample, spec, library, model)?;
    let response = client.complete(&request)?;
    let (perturbed, reasoning) = parse_generation(&response.content)?;
    if perturbed == sample.answer {
        return Err(SynthError::Degenerate {
            id: sample.id.clone(),
        });
    }
    Ok(GeneratedSample {
        base_id: sample.id.clone(),
        perturbed_answer: perturbed,
        label: Polarity::Inconsistent,
        error_types: BTreeSet::from([spec.error_type]),
        reasoning,
        spec: GenSpec::Negative(spec.clone()),
    })
}

/// Produce an additional consistent sample by augmentation.
pub fn augment_positive(
    sample: &Sample,
    spec: &AugmentSpec,
    client: &Client,
    library: &PromptLibrary,
    model: &str,
) -> Result<GeneratedSample, SynthError> {
    if sample.label != Polarity::Consistent {
        return Err(SynthError::BaseNotConsistent {
            id: sample.id.clone(),
        });
    }
    let request = build_positive_prompt(sample, spec, library, model)?;
    let response = client.complete(&request)?;
    let (perturbed, reasoning) = parse_generation(&response.content)?;
    if perturbed == sample.answer {
        return Err(SynthError::Degenerate {
            id: sample.id.clone(),
        });
    }
    Ok(GeneratedSample {
        base_id: sample.id.clone(),
        perturbed_answer: perturbed,
        label: Polarity::Consistent,
        error_types: BTreeSet::new(),
        reasoning,
        spec: GenSpec::Positive(spec.clone()),
    })
}

/// Build a deterministic generation plan.
///
/// Error types are visited in canonical order. The Hallu quota is split
/// across the three difficulty tiers as evenly as possible, the KCont
/// quota across both granularities likewise. Base samples are drawn from
/// the consistent part of the corpus in seeded shuffled order, cycling
/// when a quota exceeds the corpus.
pub fn build_generation_plan(
    corpus: &[Sample],
    coverage: &BTreeMap<ErrorType, usize>,
    seed: u64,
) -> Result<Vec<PlanItem>, SynthError> {
    if corpus.is_empty() {
        return Err(SynthError::EmptyCorpus);
    }
    let eligible: Vec<&Sample> = corpus
        .iter()
        .filter(|s| s.label == Polarity::Consistent)
        .collect();
    if eligible.is_empty() {
        return Err(SynthError::NoConsistentSamples);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..eligible.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0usize;
    let mut next_sample = move || {
        let idx = order[cursor % order.len()];
        cursor += 1;
        idx
    };

    let mut plan = Vec::new();
    for error_type in ErrorType::ALL {
        let Some(&count) = coverage.get(&error_type) else {
            continue;
        };
        if count == 0 {
            continue;
        }
        for i in 0..count {
            let spec = match error_type {
                ErrorType::Hallu => {
                    GenerationSpec::new(error_type, Some((i % 3) as u8 + 1), None, seed)?
                }
                ErrorType::KCont => GenerationSpec::new(
                    error_type,
                    None,
                    Some(if i % 2 == 0 {
                        KContGranularity::Word
                    } else {
                        KContGranularity::Sentence
                    }),
                    seed,
                )?,
                other => GenerationSpec::new(other, None, None, seed)?,
            };
            plan.push(PlanItem {
                sample: eligible[next_sample()].clone(),
                spec,
            });
        }
    }
    Ok(plan)
}

/// Canonical output record for a generated sample: the dataset record
/// plus `reasoning` and `spec` provenance fields (ignored by the loader).
pub fn generated_record_json(sample: &Sample, generated: &GeneratedSample) -> String {
    let mut value = serde_json::to_value(sample).expect("sample serializes");
    let obj = value.as_object_mut().expect("sample is an object");
    obj.insert(
        "reasoning".to_string(),
        Value::String(generated.reasoning.clone()),
    );
    obj.insert(
        "spec".to_string(),
        serde_json::to_value(&generated.spec).expect("spec serializes"),
    );
    serde_json::to_string(&value).expect("record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedMock;
    use crate::prompts::Locale;

    fn base(id: &str, answer: &str) -> Sample {
        Sample {
            id: id.to_string(),
            question: "问题".into(),
            reference: "参考资料。".into(),
            answer: answer.to_string(),
            label: Polarity::Consistent,
            error_types: BTreeSet::new(),
            source: "corpus".into(),
            granularity: Granularity::Answer,
        }
    }

    fn zh() -> PromptLibrary {
        PromptLibrary::new(Locale::Zh)
    }

    fn json_reply(reasoning: &str, answer: &str) -> String {
        format!("```json\n{{\"reasoning\": \"{reasoning}\", \"answer\": \"{answer}\"}}\n```")
    }

    #[test]
    fn spec_validation_rules() {
        assert!(GenerationSpec::new(ErrorType::Hallu, Some(2), None, 0).is_ok());
        assert!(GenerationSpec::new(ErrorType::Hallu, None, None, 0).is_err());
        assert!(GenerationSpec::new(ErrorType::Hallu, Some(4), None, 0).is_err());
        assert!(
            GenerationSpec::new(ErrorType::KCont, None, Some(KContGranularity::Word), 0).is_ok()
        );
        assert!(GenerationSpec::new(ErrorType::KCont, None, None, 0).is_err());
        assert!(GenerationSpec::new(ErrorType::LOver, Some(1), None, 0).is_err());
        assert!(
            GenerationSpec::new(ErrorType::LOver, None, Some(KContGranularity::Word), 0).is_err()
        );
        assert!(GenerationSpec::new(ErrorType::Other, None, None, 0).is_err());
    }

    #[test]
    fn kcont_word_rewrite_on_energy_drink_sentence() {
        let library = zh();
        let original =
            "功能饮料中的维生素、矿物质等，对于运动后快速补充身体营养，消除疲劳具有一定作用。";
        let perturbed =
            "功能饮料中的维生素、矿物质等，对于运动后快速补充身体营养，增加疲劳具有一定作用。";
        let client = Client::mock(ScriptedMock::always(json_reply(
            "将“消除”替换为反义词“增加”。",
            perturbed,
        )));
        let spec =
            GenerationSpec::new(ErrorType::KCont, None, Some(KContGranularity::Word), 7).unwrap();
        let out = generate_negative(&base("s1", original), &spec, &client, &library, "m").unwrap();
        assert_eq!(out.perturbed_answer, perturbed);
        assert!(out.perturbed_answer.contains("增加"));
        assert_eq!(out.label, Polarity::Inconsistent);
        assert_eq!(out.error_types, BTreeSet::from([ErrorType::KCont]));
        assert!(!out.reasoning.is_empty());
    }

    #[test]
    fn lcaus_rewrite_reverses_causal_direction() {
        let library = zh();
        let original = "随着信息技术的快速发展，大数据在各行各业中的应用越来越广泛。";
        let perturbed = "大数据在各行各业中的应用越来越广泛，这导致了信息技术的快速发展。";
        let client = Client::mock(ScriptedMock::always(json_reply(
            "颠倒原因与结果的方向。",
            perturbed,
        )));
        let spec = GenerationSpec::new(ErrorType::LCaus, None, None, 7).unwrap();
        let out = generate_negative(&base("s2", original), &spec, &client, &library, "m").unwrap();
        assert!(out.perturbed_answer.contains("导致"));
        assert_eq!(out.error_types, BTreeSet::from([ErrorType::LCaus]));
    }

    #[test]
    fn identical_output_is_degenerate() {
        let library = zh();
        let original = "原样返回的回答。";
        let client = Client::mock(ScriptedMock::always(json_reply("未作修改", original)));
        let spec = GenerationSpec::new(ErrorType::KConc, None, None, 0).unwrap();
        let err =
            generate_negative(&base("s3", original), &spec, &client, &library, "m").unwrap_err();
        assert!(matches!(err, SynthError::Degenerate { .. }));
    }

    #[test]
    fn negatives_require_consistent_base() {
        let library = zh();
        let mut inconsistent = base("s4", "回答。");
        inconsistent.label = Polarity::Inconsistent;
        inconsistent.error_types = BTreeSet::from([ErrorType::Hallu]);
        let client = Client::mock(ScriptedMock::always(json_reply("x", "y")));
        let spec = GenerationSpec::new(ErrorType::LIncl, None, None, 0).unwrap();
        let err = generate_negative(&inconsistent, &spec, &client, &library, "m").unwrap_err();
        assert!(matches!(err, SynthError::BaseNotConsistent { .. }));
    }

    #[test]
    fn paraphrase_produces_consistent_sample() {
        let library = zh();
        let client = Client::mock(ScriptedMock::always(json_reply(
            "换一种说法。",
            "改写后的新表述。",
        )));
        let spec = AugmentSpec {
            mode: AugmentMode::Paraphrase,
            seed: 1,
        };
        let out = augment_positive(&base("s5", "原回答。"), &spec, &client, &library, "m").unwrap();
        assert_eq!(out.label, Polarity::Consistent);
        assert!(out.error_types.is_empty());
        assert_eq!(out.perturbed_answer, "改写后的新表述。");
    }

    #[test]
    fn identical_augmentation_output_is_degenerate() {
        let library = zh();
        let original = "原样返回的回答。";
        let client = Client::mock(ScriptedMock::always(json_reply("未改写", original)));
        let spec = AugmentSpec {
            mode: AugmentMode::SynonymReplace,
            seed: 0,
        };
        let err =
            augment_positive(&base("s7", original), &spec, &client, &library, "m").unwrap_err();
        assert!(matches!(err, SynthError::Degenerate { .. }));
    }

    #[test]
    fn summarize_prompt_uses_reference_not_answer() {
        let library = zh();
        let mut sample = base("s6", "独特的回答文字串");
        sample.reference = "独特的参考文字串。".into();
        let spec = AugmentSpec {
            mode: AugmentMode::Summarize,
            seed: 1,
        };
        let prompt = build_positive_prompt(&sample, &spec, &library, "m")
            .unwrap()
            .match_target();
        assert!(prompt.contains("独特的参考文字串"));
        assert!(!prompt.contains("独特的回答文字串"));
    }

    #[test]
    fn unparseable_generation_output_rejected() {
        assert!(matches!(
            parse_generation("no json at all"),
            Err(SynthError::BadOutput(_))
        ));
        assert!(matches!(
            parse_generation("```json\n{\"answer\": \"x\"}\n```"),
            Err(SynthError::BadOutput(_))
        ));
        assert!(matches!(
            parse_generation("```json\n{\"answer\": \"\", \"reasoning\": \"r\"}\n```"),
            Err(SynthError::BadOutput(_))
        ));
    }

    #[test]
    fn hallu_quota_splits_across_tiers() {
        let corpus: Vec<Sample> = (0..5).map(|i| base(&format!("c{i}"), "答案。")).collect();
        let plan =
            build_generation_plan(&corpus, &BTreeMap::from([(ErrorType::Hallu, 3)]), 42).unwrap();
        let tiers: Vec<u8> = plan
            .iter()
            .map(|p| p.spec.hallu_difficulty.unwrap())
            .collect();
        assert_eq!(tiers, vec![1, 2, 3]);
        let plan4 =
            build_generation_plan(&corpus, &BTreeMap::from([(ErrorType::Hallu, 4)]), 42).unwrap();
        let mut tier_counts = BTreeMap::new();
        for item in &plan4 {
            *tier_counts
                .entry(item.spec.hallu_difficulty.unwrap())
                .or_insert(0usize) += 1;
        }
        assert_eq!(tier_counts, BTreeMap::from([(1u8, 2usize), (2, 1), (3, 1)]));
    }

    #[test]
    fn kcont_quota_splits_across_granularities() {
        let corpus: Vec<Sample> = (0..3).map(|i| base(&format!("c{i}"), "答案。")).collect();
        let plan =
            build_generation_plan(&corpus, &BTreeMap::from([(ErrorType::KCont, 2)]), 1).unwrap();
        let granularities: Vec<KContGranularity> = plan
            .iter()
            .map(|p| p.spec.kcont_granularity.unwrap())
            .collect();
        assert_eq!(
            granularities,
            vec![KContGranularity::Word, KContGranularity::Sentence]
        );
    }

    #[test]
    fn plan_is_reproducible_and_pinned_for_fixed_seed() {
        let corpus: Vec<Sample> = (0..5).map(|i| base(&format!("c{i}"), "答案。")).collect();
        let coverage = BTreeMap::from([(ErrorType::LOver, 5usize)]);
        let a = build_generation_plan(&corpus, &coverage, 42).unwrap();
        let b = build_generation_plan(&corpus, &coverage, 42).unwrap();
        assert_eq!(a, b);
        let ids: Vec<&str> = a.iter().map(|p| p.sample.id.as_str()).collect();
        // Pinned from the first run with seed 42: a permutation of the
        // 5-sample corpus.
        assert_eq!(ids, vec!["c0", "c2", "c4", "c3", "c1"]);
        let different_seed = build_generation_plan(&corpus, &coverage, 43).unwrap();
        assert_ne!(
            a.iter().map(|p| &p.sample.id).collect::<Vec<_>>(),
            different_seed
                .iter()
                .map(|p| &p.sample.id)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn plan_rejects_empty_or_all_inconsistent_corpus() {
        assert!(matches!(
            build_generation_plan(&[], &BTreeMap::new(), 0),
            Err(SynthError::EmptyCorpus)
        ));
        let mut s = base("x", "回答。");
        s.label = Polarity::Inconsistent;
        s.error_types = BTreeSet::from([ErrorType::Hallu]);
        assert!(matches!(
            build_generation_plan(&[s], &BTreeMap::new(), 0),
            Err(SynthError::NoConsistentSamples)
        ));
    }

    #[test]
    fn generated_records_load_as_valid_dataset() {
        let library = zh();
        let client = Client::mock(ScriptedMock::always(json_reply(
            "插入任意逻辑连接错误。",
            "改写后的回答，因此逻辑不再成立。",
        )));
        let corpus: Vec<Sample> = (0..3)
            .map(|i| base(&format!("c{i}"), "干净回答。"))
            .collect();
        let plan =
            build_generation_plan(&corpus, &BTreeMap::from([(ErrorType::LOthe, 3)]), 9).unwrap();
        let mut lines = String::new();
        for (i, item) in plan.iter().enumerate() {
            let generated =
                generate_negative(&item.sample, &item.spec, &client, &library, "m").unwrap();
            let sample = generated.to_sample(&item.sample, i);
            lines.push_str(&generated_record_json(&sample, &generated));
            lines.push('\n');
        }
        let loaded = crate::dataset::parse_records(&lines, crate::dataset::Schema::Generic, "mem")
            .expect("generated dataset validates");
        assert_eq!(loaded.samples.len(), 3);
        assert!(loaded
            .samples
            .iter()
            .all(|s| s.error_types == BTreeSet::from([ErrorType::LOthe])));
        assert!(loaded.samples.iter().all(|s| s.source == "synthetic"));
    }
}
