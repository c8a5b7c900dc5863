//! Benchmark dataset loading, validation, and summary statistics.
//!
//! Datasets are line-delimited JSON (UTF-8, one object per line). Two
//! schemas are supported: `Generic` expects the canonical field names
//! (`id`/`question`/`reference`/`answer`/`label`/`error_types`/`source`/
//! `granularity`), while `Face4RAG` additionally accepts the field-name and
//! label-encoding variants observed in the released benchmark files.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::typology::{parse_error_type, Category, ErrorType};

/// Gold polarity of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Consistent,
    Inconsistent,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Consistent => f.write_str("consistent"),
            Polarity::Inconsistent => f.write_str("inconsistent"),
        }
    }
}

/// Whether a row is a whole answer or one decomposed segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Answer,
    Segment,
}

/// One benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub question: String,
    pub reference: String,
    pub answer: String,
    pub label: Polarity,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub error_types: BTreeSet<ErrorType>,
    pub source: String,
    pub granularity: Granularity,
}

/// Summary statistics over a loaded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub num_samples: usize,
    /// Mean answer length in Unicode scalar values.
    pub avg_length: f64,
    /// Fraction of samples labeled consistent, in [0, 1].
    pub positive_rate: f64,
}

/// Share of inconsistent samples whose error types touch one category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub category: Category,
    /// In [0, 1]. Rows need not sum to 1: samples may carry error types
    /// from several categories and then count toward each of them.
    pub fraction: f64,
    pub count: usize,
}

/// File schema of a dataset on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Face4RAG,
    Generic,
}

impl std::str::FromStr for Schema {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "face4rag" => Ok(Schema::Face4RAG),
            "generic" => Ok(Schema::Generic),
            other => Err(DatasetError::UnknownSchema(other.to_string())),
        }
    }
}

/// One entry of a dataset manifest file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: String,
    pub schema: Schema,
    pub granularity: Granularity,
}

/// Errors from loading or summarizing datasets.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file contains no records")]
    EmptyFile { path: String },
    #[error("{path}:{line}: {message}")]
    Line {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate id {id:?} (first seen at line {first_line})")]
    DuplicateId {
        path: String,
        line: usize,
        first_line: usize,
        id: String,
    },
    #[error("unknown schema {0:?}, expected face4rag or generic")]
    UnknownSchema(String),
    #[error("empty sample list")]
    EmptyInput,
    #[error("no inconsistent samples in input")]
    NoInconsistentSamples,
    #[error("invalid manifest: {0}")]
    Manifest(String),
}

/// A dataset together with non-fatal validation warnings.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub samples: Vec<Sample>,
    pub warnings: Vec<String>,
}

/// Load a line-delimited dataset file under the given schema.
///
/// Blank lines are skipped. Line numbers are 1-based in all diagnostics.
/// Ordering of samples follows file order.
pub fn load_dataset(path: &Path, schema: Schema) -> Result<LoadedDataset, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_records(&text, schema, &path.display().to_string())
}

/// Parse dataset records from an in-memory string. See [`load_dataset`].
pub fn parse_records(
    text: &str,
    schema: Schema,
    path: &str,
) -> Result<LoadedDataset, DatasetError> {
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    let mut seen_ids: std::collections::HashMap<String, usize> = std::collections::HashMap::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| DatasetError::Line {
            path: path.to_string(),
            line: line_no,
            message: format!("invalid JSON: {e}"),
        })?;
        let sample =
            sample_from_value(&value, schema, line_no).map_err(|message| DatasetError::Line {
                path: path.to_string(),
                line: line_no,
                message,
            })?;

        if let Some(&first_line) = seen_ids.get(&sample.id) {
            return Err(DatasetError::DuplicateId {
                path: path.to_string(),
                line: line_no,
                first_line,
                id: sample.id,
            });
        }
        seen_ids.insert(sample.id.clone(), line_no);

        if sample.label == Polarity::Inconsistent
            && sample.granularity == Granularity::Answer
            && sample.error_types.is_empty()
        {
            match schema {
                // Annotated benchmark files must carry error types on
                // inconsistent answer rows.
                Schema::Face4RAG => {
                    return Err(DatasetError::Line {
                        path: path.to_string(),
                        line: line_no,
                        message: "inconsistent answer-level sample without error_types".into(),
                    })
                }
                Schema::Generic => warnings.push(format!(
                    "{path}:{line_no}: inconsistent sample {:?} has no error_types",
                    sample.id
                )),
            }
        }

        samples.push(sample);
    }

    if samples.is_empty() {
        return Err(DatasetError::EmptyFile {
            path: path.to_string(),
        });
    }
    Ok(LoadedDataset { samples, warnings })
}

/// Field-name aliases accepted by the Face4RAG schema adapter. The released
/// files are not guaranteed to use the canonical names, so each logical
/// field maps from a list of candidates tried in order.
const QUESTION_KEYS: &[&str] = &["question", "query", "q", "prompt", "问题"];
const REFERENCE_KEYS: &[&str] = &[
    "reference",
    "ref",
    "context",
    "passage",
    "document",
    "参考资料",
    "参考",
];
const ANSWER_KEYS: &[&str] = &["answer", "response", "output", "回答", "答案"];
const LABEL_KEYS: &[&str] = &[
    "label",
    "consistent",
    "is_consistent",
    "consistency",
    "factual_consistency",
    "一致性",
];
const ERROR_TYPE_KEYS: &[&str] = &["error_types", "error_type", "errors", "错误类型"];
const SOURCE_KEYS: &[&str] = &["source", "model", "generator", "llm", "模型"];
const ID_KEYS: &[&str] = &["id", "sample_id", "qid", "uid"];
const GRANULARITY_KEYS: &[&str] = &["granularity", "level"];

fn lookup<'a>(value: &'a Value, keys: &[&str]) -> Option<&'a Value> {
    keys.iter()
        .find_map(|k| value.get(k))
        .filter(|v| !v.is_null())
}

fn sample_from_value(value: &Value, schema: Schema, line_no: usize) -> Result<Sample, String> {
    let obj = value
        .as_object()
        .ok_or_else(|| "record is not a JSON object".to_string())?;
    let _ = obj; // shape validated; field access goes through `lookup`

    let (question_keys, reference_keys, answer_keys): (&[&str], &[&str], &[&str]) = match schema {
        Schema::Face4RAG => (QUESTION_KEYS, REFERENCE_KEYS, ANSWER_KEYS),
        Schema::Generic => (&["question"], &["reference"], &["answer"]),
    };

    let question = required_text(value, question_keys, "question")?;
    let reference = required_text(value, reference_keys, "reference")?;
    let answer = required_text(value, answer_keys, "answer")?;

    let label_keys: &[&str] = match schema {
        Schema::Face4RAG => LABEL_KEYS,
        Schema::Generic => &["label"],
    };
    let label_value =
        lookup(value, label_keys).ok_or_else(|| "missing field \"label\"".to_string())?;
    let label = parse_label(label_value)?;

    let error_types = match lookup(
        value,
        match schema {
            Schema::Face4RAG => ERROR_TYPE_KEYS,
            Schema::Generic => &["error_types"],
        },
    ) {
        Some(v) => parse_error_types(v)?,
        None => BTreeSet::new(),
    };

    if label == Polarity::Consistent && !error_types.is_empty() {
        return Err("consistent sample must not carry error_types".to_string());
    }

    let id = match lookup(value, ID_KEYS) {
        Some(v) => json_to_text(v).ok_or_else(|| "field \"id\" is not a string".to_string())?,
        // Synthesized ids stay unique because line numbers are.
        None => format!("line-{line_no}"),
    };

    let source = match lookup(value, SOURCE_KEYS) {
        Some(v) => v
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| "field \"source\" is not a string".to_string())?,
        None => "synthetic".to_string(),
    };

    let granularity = match lookup(value, GRANULARITY_KEYS) {
        Some(v) => {
            let s = v
                .as_str()
                .ok_or_else(|| "field \"granularity\" is not a string".to_string())?;
            match s.to_lowercase().as_str() {
                "answer" => Granularity::Answer,
                "segment" => Granularity::Segment,
                other => return Err(format!("unknown granularity {other:?}")),
            }
        }
        None => Granularity::Answer,
    };

    Ok(Sample {
        id,
        question,
        reference,
        answer,
        label,
        error_types,
        source,
        granularity,
    })
}

fn required_text(value: &Value, keys: &[&str], name: &str) -> Result<String, String> {
    let v = lookup(value, keys).ok_or_else(|| format!("missing field {name:?}"))?;
    let s = v
        .as_str()
        .ok_or_else(|| format!("field {name:?} is not a string"))?;
    if s.trim().is_empty() {
        return Err(format!("field {name:?} is empty"));
    }
    Ok(s.to_string())
}

fn json_to_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_label(v: &Value) -> Result<Polarity, String> {
    match v {
        Value::Bool(true) => Ok(Polarity::Consistent),
        Value::Bool(false) => Ok(Polarity::Inconsistent),
        Value::Number(n) => match n.as_i64() {
            Some(1) => Ok(Polarity::Consistent),
            Some(0) => Ok(Polarity::Inconsistent),
            _ => Err(format!("unrecognized numeric label {n}")),
        },
        Value::String(s) => match s.trim().to_lowercase().as_str() {
            "consistent" | "positive" | "pos" | "true" | "yes" | "1" | "一致" | "正确" => {
                Ok(Polarity::Consistent)
            }
            "inconsistent" | "negative" | "neg" | "false" | "no" | "0" | "不一致" | "错误" => {
                Ok(Polarity::Inconsistent)
            }
            other => Err(format!("unrecognized label {other:?}")),
        },
        other => Err(format!("label has unsupported JSON type: {other}")),
    }
}

fn parse_error_types(v: &Value) -> Result<BTreeSet<ErrorType>, String> {
    let mut out = BTreeSet::new();
    match v {
        Value::Array(items) => {
            for item in items {
                let s = item
                    .as_str()
                    .ok_or_else(|| "error_types entries must be strings".to_string())?;
                out.insert(parse_error_type(s).map_err(|e| e.to_string())?);
            }
        }
        Value::String(s) if s.trim().is_empty() => {}
        Value::String(s) => {
            for part in s.split([',', ';', '、']) {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                out.insert(parse_error_type(part).map_err(|e| e.to_string())?);
            }
        }
        other => return Err(format!("error_types has unsupported JSON type: {other}")),
    }
    Ok(out)
}

/// Serialize samples back to the canonical line-delimited format.
pub fn write_records(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("sample serializes"));
        out.push('\n');
    }
    out
}

/// Compute summary statistics. Lengths count Unicode scalar values.
pub fn compute_stats(samples: &[Sample]) -> Result<DatasetStats, DatasetError> {
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let total_chars: usize = samples.iter().map(|s| s.answer.chars().count()).sum();
    let positives = samples
        .iter()
        .filter(|s| s.label == Polarity::Consistent)
        .count();
    Ok(DatasetStats {
        num_samples: samples.len(),
        avg_length: total_chars as f64 / samples.len() as f64,
        positive_rate: positives as f64 / samples.len() as f64,
    })
}

/// Per-category share of inconsistent samples, under the multi-label rule:
/// a sample counts toward every category its error types intersect. Only
/// categories with at least one occurrence get a row.
pub fn error_distribution(samples: &[Sample]) -> Result<Vec<DistributionRow>, DatasetError> {
    let inconsistent: Vec<&Sample> = samples
        .iter()
        .filter(|s| s.label == Polarity::Inconsistent)
        .collect();
    if inconsistent.is_empty() {
        return Err(DatasetError::NoInconsistentSamples);
    }
    let denom = inconsistent.len() as f64;
    let mut rows = Vec::new();
    for cat in Category::ALL {
        let count = inconsistent
            .iter()
            .filter(|s| s.error_types.iter().any(|t| t.category() == cat))
            .count();
        if count > 0 {
            rows.push(DistributionRow {
                category: cat,
                fraction: count as f64 / denom,
                count,
            });
        }
    }
    Ok(rows)
}

/// Partition samples by source, preserving first-appearance order of
/// sources and file order within each part.
pub fn per_source_partition(samples: &[Sample]) -> Vec<(String, Vec<Sample>)> {
    let mut parts: Vec<(String, Vec<Sample>)> = Vec::new();
    for s in samples {
        match parts.iter_mut().find(|(src, _)| *src == s.source) {
            Some((_, list)) => list.push(s.clone()),
            None => parts.push((s.source.clone(), vec![s.clone()])),
        }
    }
    parts
}

/// Load a manifest file: a JSON array of `{name, path, schema, granularity}`.
/// Relative paths are resolved against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| DatasetError::Manifest(e.to_string()))?;
    if entries.is_empty() {
        return Err(DatasetError::Manifest("manifest lists no datasets".into()));
    }
    if let Some(dir) = path.parent() {
        for entry in &mut entries {
            let p = Path::new(&entry.path);
            if p.is_relative() {
                entry.path = dir.join(p).display().to_string();
            }
        }
    }
    Ok(entries)
}

/// Stable digest of a sample list: SHA-256 over the canonical record form.
pub fn dataset_digest(samples: &[Sample]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(write_records(samples).as_bytes());
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, label: Polarity, answer: &str, types: &[ErrorType]) -> Sample {
        Sample {
            id: id.to_string(),
            question: "q".into(),
            reference: "r".into(),
            answer: answer.to_string(),
            label,
            error_types: types.iter().copied().collect(),
            source: "test".into(),
            granularity: Granularity::Answer,
        }
    }

    #[test]
    fn single_line_loads_with_matching_fields() {
        let line = r#"{"id":"a1","question":"为什么?","reference":"因为。","answer":"所以。","label":"consistent","source":"GPT-4"}"#;
        let loaded = parse_records(line, Schema::Generic, "mem").unwrap();
        assert_eq!(loaded.samples.len(), 1);
        let s = &loaded.samples[0];
        assert_eq!(s.id, "a1");
        assert_eq!(s.question, "为什么?");
        assert_eq!(s.label, Polarity::Consistent);
        assert_eq!(s.granularity, Granularity::Answer);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn missing_answer_field_reports_line_number() {
        let text = "{\"id\":\"a\",\"question\":\"q\",\"reference\":\"r\",\"answer\":\"x\",\"label\":1}\n{\"id\":\"b\",\"question\":\"q\",\"reference\":\"r\",\"label\":0,\"error_types\":[\"Hallu\"]}";
        let err = parse_records(text, Schema::Generic, "mem").unwrap_err();
        match err {
            DatasetError::Line { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("answer"), "{message}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "{\"id\":\"a\",\"question\":\"q\",\"reference\":\"r\",\"answer\":\"x\",\"label\":1}\n{\"id\":\"a\",\"question\":\"q\",\"reference\":\"r\",\"answer\":\"y\",\"label\":1}";
        let err = parse_records(text, Schema::Generic, "mem").unwrap_err();
        assert!(matches!(
            err,
            DatasetError::DuplicateId {
                line: 2,
                first_line: 1,
                ..
            }
        ));
    }

    #[test]
    fn empty_file_rejected() {
        let err = parse_records("\n\n", Schema::Generic, "mem").unwrap_err();
        assert!(matches!(err, DatasetError::EmptyFile { .. }));
    }

    #[test]
    fn face4rag_adapter_accepts_field_aliases_and_label_encodings() {
        let line = r#"{"query":"问","context":"参","response":"答","consistent":0,"error_type":"Hallu.,LCaus.","model":"Qwen"}"#;
        let loaded = parse_records(line, Schema::Face4RAG, "mem").unwrap();
        let s = &loaded.samples[0];
        assert_eq!(s.question, "问");
        assert_eq!(s.reference, "参");
        assert_eq!(s.answer, "答");
        assert_eq!(s.label, Polarity::Inconsistent);
        assert_eq!(
            s.error_types.iter().copied().collect::<Vec<_>>(),
            vec![ErrorType::Hallu, ErrorType::LCaus]
        );
        assert_eq!(s.source, "Qwen");
        assert_eq!(s.id, "line-1");
    }

    #[test]
    fn face4rag_requires_error_types_on_inconsistent_answers() {
        let line = r#"{"question":"q","reference":"r","answer":"a","label":"不一致"}"#;
        let err = parse_records(line, Schema::Face4RAG, "mem").unwrap_err();
        assert!(matches!(err, DatasetError::Line { .. }));
        // Same record under the generic schema only warns.
        let generic =
            r#"{"id":"g","question":"q","reference":"r","answer":"a","label":"inconsistent"}"#;
        let loaded = parse_records(generic, Schema::Generic, "mem").unwrap();
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn consistent_sample_with_error_types_rejected() {
        let line = r#"{"id":"a","question":"q","reference":"r","answer":"x","label":1,"error_types":["Hallu"]}"#;
        let err = parse_records(line, Schema::Generic, "mem").unwrap_err();
        assert!(err.to_string().contains("must not carry"));
    }

    #[test]
    fn stats_single_consistent_sample() {
        let samples = vec![sample("a", Polarity::Consistent, "0123456789", &[])];
        let stats = compute_stats(&samples).unwrap();
        assert_eq!(stats.num_samples, 1);
        assert_eq!(stats.avg_length, 10.0);
        assert_eq!(stats.positive_rate, 1.0);
    }

    #[test]
    fn stats_hand_built_four_samples() {
        // 2 positive, answers of 2/4/6/8 chars -> {4, 5.0, 0.5}.
        let samples = vec![
            sample("a", Polarity::Consistent, "一二", &[]),
            sample("b", Polarity::Consistent, "一二三四", &[]),
            sample(
                "c",
                Polarity::Inconsistent,
                "一二三四五六",
                &[ErrorType::Hallu],
            ),
            sample(
                "d",
                Polarity::Inconsistent,
                "一二三四五六七八",
                &[ErrorType::KCont],
            ),
        ];
        let stats = compute_stats(&samples).unwrap();
        assert_eq!(stats.num_samples, 4);
        assert_eq!(stats.avg_length, 5.0);
        assert_eq!(stats.positive_rate, 0.5);
    }

    #[test]
    fn stats_counts_scalar_values_not_bytes() {
        let samples = vec![sample("a", Polarity::Consistent, "汉字文本", &[])];
        assert_eq!(compute_stats(&samples).unwrap().avg_length, 4.0);
    }

    #[test]
    fn stats_empty_input_rejected() {
        assert!(matches!(compute_stats(&[]), Err(DatasetError::EmptyInput)));
    }

    #[test]
    fn stats_permutation_invariant() {
        let mut samples = vec![
            sample("a", Polarity::Consistent, "短", &[]),
            sample(
                "b",
                Polarity::Inconsistent,
                "长一些的回答",
                &[ErrorType::Hallu],
            ),
            sample("c", Polarity::Consistent, "中等长度", &[]),
        ];
        let forward = compute_stats(&samples).unwrap();
        samples.reverse();
        assert_eq!(forward, compute_stats(&samples).unwrap());
    }

    #[test]
    fn distribution_single_hallu_sample() {
        let samples = vec![sample(
            "a",
            Polarity::Inconsistent,
            "x",
            &[ErrorType::Hallu],
        )];
        let rows = error_distribution(&samples).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].category, Category::Hallucination);
        assert_eq!(rows[0].fraction, 1.0);
    }

    #[test]
    fn distribution_multi_label_counts_both_categories() {
        let samples = vec![
            sample("a", Polarity::Inconsistent, "x", &[ErrorType::Hallu]),
            sample(
                "b",
                Polarity::Inconsistent,
                "y",
                &[ErrorType::Hallu, ErrorType::LCaus],
            ),
        ];
        let rows = error_distribution(&samples).unwrap();
        let get = |cat: Category| rows.iter().find(|r| r.category == cat).map(|r| r.fraction);
        assert_eq!(get(Category::Hallucination), Some(1.0));
        assert_eq!(get(Category::Logical), Some(0.5));
        assert_eq!(get(Category::Knowledge), None);
    }

    #[test]
    fn distribution_requires_inconsistent_samples() {
        let samples = vec![sample("a", Polarity::Consistent, "x", &[])];
        assert!(matches!(
            error_distribution(&samples),
            Err(DatasetError::NoInconsistentSamples)
        ));
    }

    #[test]
    fn partition_preserves_order_and_union() {
        let mut samples = Vec::new();
        for (i, src) in ["m1", "m2", "m1", "m3", "m2", "m1"].iter().enumerate() {
            let mut s = sample(&format!("s{i}"), Polarity::Consistent, "x", &[]);
            s.source = src.to_string();
            samples.push(s);
        }
        let parts = per_source_partition(&samples);
        assert_eq!(
            parts.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>(),
            vec!["m1", "m2", "m3"]
        );
        assert_eq!(parts[0].1.len(), 3);
        assert_eq!(parts[1].1.len(), 2);
        assert_eq!(parts[2].1.len(), 1);
        let total: usize = parts.iter().map(|(_, v)| v.len()).sum();
        assert_eq!(total, samples.len());
        // within-part order follows input order
        assert_eq!(parts[0].1[0].id, "s0");
        assert_eq!(parts[0].1[1].id, "s2");
        assert_eq!(parts[0].1[2].id, "s5");
    }

    #[test]
    fn single_source_partition_is_one_part() {
        let samples = vec![
            sample("a", Polarity::Consistent, "x", &[]),
            sample("b", Polarity::Consistent, "y", &[]),
        ];
        let parts = per_source_partition(&samples);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, "test");
        assert_eq!(parts[0].1.len(), 2);
    }

    #[test]
    fn manifest_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.jsonl");
        std::fs::write(
            &data,
            "{\"id\":\"a\",\"question\":\"q\",\"reference\":\"r\",\"answer\":\"x\",\"label\":1}\n",
        )
        .unwrap();
        let manifest = dir.path().join("manifest.json");
        std::fs::write(
            &manifest,
            r#"[{"name": "toy", "path": "d.jsonl", "schema": "generic", "granularity": "answer"}]"#,
        )
        .unwrap();
        let entries = load_manifest(&manifest).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].name, "toy");
        let loaded =
            load_dataset(std::path::Path::new(&entries[0].path), entries[0].schema).unwrap();
        assert_eq!(loaded.samples.len(), 1);
        assert!(matches!(
            load_manifest(&dir.path().join("missing.json")),
            Err(DatasetError::Io { .. })
        ));
    }

    #[test]
    fn positive_count_is_integer_property() {
        // positive_rate * num_samples recovers the positive count exactly
        // for several hand-built datasets.
        for positives in 0..=5usize {
            let mut samples = Vec::new();
            for i in 0..5usize {
                let label = if i < positives {
                    Polarity::Consistent
                } else {
                    Polarity::Inconsistent
                };
                let types: &[ErrorType] = if label == Polarity::Inconsistent {
                    &[ErrorType::Hallu]
                } else {
                    &[]
                };
                samples.push(sample(&format!("s{i}"), label, "abc", types));
            }
            let stats = compute_stats(&samples).unwrap();
            let recovered = stats.positive_rate * stats.num_samples as f64;
            assert!((recovered - positives as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_canonical_records() {
        let samples = vec![
            sample("a", Polarity::Consistent, "回答一", &[]),
            sample("b", Polarity::Inconsistent, "回答二", &[ErrorType::LOthe]),
        ];
        let text = write_records(&samples);
        let loaded = parse_records(&text, Schema::Generic, "mem").unwrap();
        assert_eq!(loaded.samples, samples);
    }
}
