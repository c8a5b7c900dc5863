//! Verdict parsing for the fact and logic stages.
//!
//! The prompt contract asks the model for an optional fenced JSON block
//! followed by a terminal `VERDICT: <token>` line. The parser accepts
//! either form; tokens are bilingual (CONSISTENT/INCONSISTENT, 一致/不一致).
//! Free-text analysis preceding the machine-readable part is retained
//! verbatim as the rationale.

use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

use super::{FactVerdict, JudgeError, LogicVerdict, PointCheck, Stage, StageVerdict};

/// Content of the last fenced code block, language tag stripped.
pub fn fenced_block(raw: &str) -> Option<String> {
    fenced_block_with_span(raw).map(|(content, _)| content)
}

/// Fenced-block content plus the byte offset of its opening fence.
pub(crate) fn fenced_block_with_span(raw: &str) -> Option<(String, usize)> {
    let mut fences = Vec::new();
    let mut from = 0;
    while let Some(idx) = raw[from..].find("```") {
        fences.push(from + idx);
        from += idx + 3;
    }
    if fences.len() < 2 {
        return None;
    }
    let open = fences[fences.len() - 2];
    let close = fences[fences.len() - 1];
    let mut inner = &raw[open + 3..close];
    if let Some(nl) = inner.find('\n') {
        let tag = inner[..nl].trim();
        if !tag.is_empty() && tag.chars().all(|c| c.is_ascii_alphanumeric()) {
            inner = &inner[nl + 1..];
        }
    }
    Some((inner.trim().to_string(), open))
}

fn verdict_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?im)^[\s*#>\-]*(?:最终)?\s*verdict\s*[:：]\s*(.+)$").expect("valid regex")
    })
}

/// Map a token tail to a polarity flag. `INCONSISTENT` is checked before
/// `CONSISTENT` (and `不一致` before `一致`) since the former contain the
/// latter as substrings.
fn token_polarity(text: &str) -> Option<bool> {
    let lower = text.to_lowercase();
    if lower.contains("inconsistent") || lower.contains("不一致") {
        Some(false)
    } else if lower.contains("consistent") || lower.contains("一致") {
        Some(true)
    } else {
        None
    }
}

/// Last `VERDICT:` line carrying a recognizable token, with its offset.
fn final_verdict(raw: &str) -> Option<(bool, usize)> {
    verdict_line_re()
        .captures_iter(raw)
        .filter_map(|caps| {
            let m = caps.get(0).expect("whole match");
            token_polarity(caps.get(1).expect("token tail").as_str())
                .map(|polarity| (polarity, m.start()))
        })
        .last()
}

fn rationale_before(raw: &str, cut: usize) -> String {
    raw[..cut].trim().to_string()
}

/// Parse raw model output into a stage verdict.
pub fn parse_verdict(raw: &str, stage: Stage) -> Result<StageVerdict, JudgeError> {
    match stage {
        Stage::Fact => parse_fact(raw).map(StageVerdict::Fact),
        Stage::Logic => parse_logic(raw).map(StageVerdict::Logic),
    }
}

fn unparseable(stage: Stage, raw: &str) -> JudgeError {
    JudgeError::UnparseableVerdict {
        stage,
        raw: raw.chars().take(160).collect(),
    }
}

pub(crate) fn parse_fact(raw: &str) -> Result<FactVerdict, JudgeError> {
    let block = fenced_block_with_span(raw)
        .and_then(|(text, span)| serde_json::from_str::<Value>(&text).ok().map(|v| (v, span)));
    let line = final_verdict(raw);

    let mut points = Vec::new();
    let mut block_verdict = None;
    let mut block_span = None;
    if let Some((value, span)) = &block {
        block_span = Some(*span);
        if let Some(raw_points) = value.get("points").and_then(Value::as_array) {
            for entry in raw_points {
                let Some(point_text) = entry
                    .get("point")
                    .or_else(|| entry.get("point_text"))
                    .and_then(Value::as_str)
                else {
                    continue;
                };
                let evidence = entry
                    .get("evidence")
                    .and_then(Value::as_str)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string);
                let claimed = entry
                    .get("consistent")
                    .and_then(Value::as_bool)
                    .unwrap_or(false);
                // A point with no located evidence is a hallucination
                // signal and cannot pass, whatever the model claimed.
                let point_consistent = claimed && evidence.is_some();
                points.push(PointCheck {
                    point_text: point_text.to_string(),
                    evidence,
                    point_consistent,
                });
            }
        }
        block_verdict = value
            .get("verdict")
            .and_then(Value::as_str)
            .and_then(token_polarity);
    }

    let consistent = if !points.is_empty() {
        points.iter().all(|p| p.point_consistent)
    } else {
        match line.map(|(polarity, _)| polarity).or(block_verdict) {
            Some(polarity) => polarity,
            None => return Err(unparseable(Stage::Fact, raw)),
        }
    };

    let cut = match (block_span, line) {
        (Some(span), Some((_, line_start))) => span.min(line_start),
        (Some(span), None) => span,
        (None, Some((_, line_start))) => line_start,
        (None, None) => raw.len(),
    };
    let rationale = rationale_before(raw, cut);

    Ok(FactVerdict {
        consistent,
        points,
        rationale,
    })
}

pub(crate) fn parse_logic(raw: &str) -> Result<LogicVerdict, JudgeError> {
    let block = fenced_block_with_span(raw)
        .and_then(|(text, span)| serde_json::from_str::<Value>(&text).ok().map(|v| (v, span)));
    let line = final_verdict(raw);

    let mut answer_structure = String::new();
    let mut reference_structure = String::new();
    let mut block_verdict = None;
    let mut block_span = None;
    if let Some((value, span)) = &block {
        block_span = Some(*span);
        if let Some(s) = value.get("answer_structure").and_then(Value::as_str) {
            answer_structure = s.to_string();
        }
        if let Some(s) = value.get("reference_structure").and_then(Value::as_str) {
            reference_structure = s.to_string();
        }
        block_verdict = value
            .get("verdict")
            .and_then(Value::as_str)
            .and_then(token_polarity);
    }

    let consistent = match line.map(|(polarity, _)| polarity).or(block_verdict) {
        Some(polarity) => polarity,
        None => return Err(unparseable(Stage::Logic, raw)),
    };

    let cut = match (block_span, line) {
        (Some(span), Some((_, line_start))) => span.min(line_start),
        (Some(span), None) => span,
        (None, Some((_, line_start))) => line_start,
        (None, None) => raw.len(),
    };
    let mut rationale = rationale_before(raw, cut);
    if !consistent && rationale.is_empty() {
        // Inconsistent verdicts must carry a rationale; fall back to the
        // verbatim output.
        rationale = raw.trim().to_string();
    }

    Ok(LogicVerdict {
        consistent,
        answer_structure,
        reference_structure,
        rationale,
    })
}
