//! Answer decomposition.
//!
//! The model-driven path splits an answer only where no strong semantic or
//! logical connection exists, substitutes pronouns with their referents,
//! and preserves sentence structure; the prompt carries three kinds of
//! few-shot instances. A rule-based sentence splitter is provided as the
//! conventional baseline for ablation runs.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ChatRequest, ChatResponse, Client, LlmError};
use crate::prompts::{render, Locale, PromptError, PromptLibrary};

/// One decomposed answer unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// 0-based position within the answer.
    pub index: usize,
    pub text: String,
    pub answer_id: String,
}

/// The three few-shot instance kinds used in the decomposition prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FewShotKind {
    LogicalConnection,
    PronounSubstitution,
    UniqueFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub kind: FewShotKind,
    pub input: String,
    pub expected_segments: Vec<String>,
}

/// One backend exchange kept for transcripts and cost accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub prompt: String,
    pub response: ChatResponse,
}

/// Output of [`Decomposer::decompose`].
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub segments: Vec<Segment>,
    /// Verbatim model output the segments were parsed from.
    pub raw: String,
    pub warnings: Vec<String>,
    pub calls: Vec<CallRecord>,
}

/// Segment list recovered from raw model output.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedList {
    pub items: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("answer is empty")]
    EmptyAnswer,
    #[error("no segments recovered from output: {raw:?}")]
    Unparseable { raw: String },
    #[error("no segments recovered after a strict-format retry: {raw:?}")]
    UnparseableAfterRetry { raw: String },
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("bad few-shot asset: {0}")]
    BadFewShot(String),
}

/// Model-driven decomposition bound to a prompt library and judge model.
pub struct Decomposer<'a> {
    library: &'a PromptLibrary,
    model: &'a str,
}

impl<'a> Decomposer<'a> {
    pub fn new(library: &'a PromptLibrary, model: &'a str) -> Self {
        Decomposer { library, model }
    }

    /// Assemble the decomposition request: principles, rendered few-shot
    /// examples, format demand, then the target answer. Temperature 0.
    pub fn build_prompt(
        &self,
        answer: &str,
        examples: &[FewShotExample],
    ) -> Result<ChatRequest, DecomposeError> {
        if answer.trim().is_empty() {
            return Err(DecomposeError::EmptyAnswer);
        }
        let template = self.library.template("decompose")?;
        let examples_block = render_examples(examples, self.library.locale());
        let content = render(
            &template,
            &[("examples", examples_block.as_str()), ("answer", answer)],
        );
        Ok(ChatRequest::user(self.model, content))
    }

    /// Decompose via the backend. On a parse failure the request is
    /// retried once with a strict-format reminder appended.
    pub fn decompose(
        &self,
        client: &Client,
        answer: &str,
        answer_id: &str,
        examples: &[FewShotExample],
    ) -> Result<DecompositionResult, DecomposeError> {
        let request = self.build_prompt(answer, examples)?;
        let mut calls = Vec::new();

        let response = client.complete(&request)?;
        calls.push(CallRecord {
            prompt: request.match_target(),
            response: response.clone(),
        });

        let (raw, parsed) = match parse_segments(&response.content) {
            Ok(parsed) => (response.content, parsed),
            Err(_) => {
                let reminder = self.library.template("decompose_retry")?;
                let mut retry = request.clone();
                retry.messages[0].content = format!("{}\n\n{reminder}", retry.messages[0].content);
                let retry_response = client.complete(&retry)?;
                calls.push(CallRecord {
                    prompt: retry.match_target(),
                    response: retry_response.clone(),
                });
                match parse_segments(&retry_response.content) {
                    Ok(parsed) => (retry_response.content, parsed),
                    Err(_) => {
                        return Err(DecomposeError::UnparseableAfterRetry {
                            raw: retry_response.content,
                        })
                    }
                }
            }
        };

        let mut warnings = parsed.warnings;
        let joined = parsed.items.join("");
        let overlap = trigram_containment(answer, &joined);
        if overlap < 0.5 {
            warnings.push(format!(
                "segments diverge from the answer (character 3-gram overlap {overlap:.2})"
            ));
        }

        let segments = parsed
            .items
            .into_iter()
            .enumerate()
            .map(|(index, text)| Segment {
                index,
                text,
                answer_id: answer_id.to_string(),
            })
            .collect();

        Ok(DecompositionResult {
            segments,
            raw,
            warnings,
            calls,
        })
    }
}

fn render_examples(examples: &[FewShotExample], locale: Locale) -> String {
    if examples.is_empty() {
        return String::new();
    }
    let (input_label, output_label) = match locale {
        Locale::Zh => ("示例输入：", "示例输出："),
        Locale::En => ("Example input:", "Example output:"),
    };
    let mut block = String::new();
    for example in examples {
        block.push('\n');
        block.push_str(input_label);
        block.push('\n');
        block.push_str(&example.input);
        block.push('\n');
        block.push_str(output_label);
        block.push('\n');
        for (i, seg) in example.expected_segments.iter().enumerate() {
            block.push_str(&format!("{}. {seg}\n", i + 1));
        }
    }
    block
}

/// Load the three bundled few-shot instances in declared-kind order.
pub fn load_default_fewshots(
    library: &PromptLibrary,
) -> Result<Vec<FewShotExample>, DecomposeError> {
    let names = [
        "fewshot_logical_connection.json",
        "fewshot_pronoun_substitution.json",
        "fewshot_unique_format.json",
    ];
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let text = library.asset(name)?;
        let example: FewShotExample = serde_json::from_str(&text)
            .map_err(|e| DecomposeError::BadFewShot(format!("{name}: {e}")))?;
        if example.expected_segments.is_empty() {
            return Err(DecomposeError::BadFewShot(format!(
                "{name}: expected_segments is empty"
            )));
        }
        out.push(example);
    }
    Ok(out)
}

fn numbered_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // "1. x", "2）x", "３．x", "4、x", "5) x"
        Regex::new(r"^\s*[0-9０-９]+\s*[\.．、)）]\s*(.*)$").expect("valid regex")
    })
}

/// Parse a segment list from raw model output.
///
/// Accepts numbered-list lines (half- or full-width numerals and
/// separators) or a top-level JSON array of strings, optionally inside a
/// fenced code block. Numbering is stripped; empty items are dropped with
/// a warning; order is preserved.
pub fn parse_segments(raw: &str) -> Result<ParsedList, DecomposeError> {
    let mut warnings = Vec::new();

    if let Some(items) = try_json_array(raw) {
        let items = drop_empty(items, &mut warnings);
        if items.is_empty() {
            return Err(DecomposeError::Unparseable { raw: truncate(raw) });
        }
        return Ok(ParsedList { items, warnings });
    }

    let mut items: Vec<String> = Vec::new();
    let mut counted_empty = 0usize;
    for line in raw.lines() {
        if let Some(caps) = numbered_line_re().captures(line) {
            let text = caps[1].trim().to_string();
            if text.is_empty() {
                counted_empty += 1;
            } else {
                items.push(text);
            }
        } else if !line.trim().is_empty() {
            // Continuation of the current item; prefix chatter is ignored.
            if let Some(last) = items.last_mut() {
                last.push('\n');
                last.push_str(line.trim());
            }
        }
    }
    if counted_empty > 0 {
        warnings.push(format!("dropped {counted_empty} empty list item(s)"));
    }
    if items.is_empty() {
        return Err(DecomposeError::Unparseable { raw: truncate(raw) });
    }
    Ok(ParsedList { items, warnings })
}

fn try_json_array(raw: &str) -> Option<Vec<String>> {
    let candidate = crate::judge::fenced_block(raw).unwrap_or_else(|| raw.trim().to_string());
    let trimmed = candidate.trim();
    if !trimmed.starts_with('[') {
        return None;
    }
    serde_json::from_str::<Vec<String>>(trimmed).ok()
}

fn drop_empty(items: Vec<String>, warnings: &mut Vec<String>) -> Vec<String> {
    let before = items.len();
    let kept: Vec<String> = items
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if kept.len() < before {
        warnings.push(format!(
            "dropped {} empty list item(s)",
            before - kept.len()
        ));
    }
    kept
}

fn truncate(raw: &str) -> String {
    raw.chars().take(120).collect()
}

/// Rule-based baseline: split on sentence-final punctuation
/// (。！？!?.;；) and newlines, each delimiter staying with its sentence.
/// No model call. The whole answer comes back as one segment when no
/// delimiter occurs.
pub fn conventional_decompose(
    answer: &str,
    answer_id: &str,
) -> Result<Vec<Segment>, DecomposeError> {
    if answer.trim().is_empty() {
        return Err(DecomposeError::EmptyAnswer);
    }
    const DELIMITERS: &[char] = &['。', '！', '？', '!', '?', '.', ';', '；'];
    let mut pieces: Vec<String> = Vec::new();
    let mut current = String::new();
    for c in answer.chars() {
        if c == '\n' {
            if !current.trim().is_empty() {
                pieces.push(current.clone());
            }
            current.clear();
        } else {
            current.push(c);
            if DELIMITERS.contains(&c) {
                pieces.push(current.clone());
                current.clear();
            }
        }
    }
    if !current.trim().is_empty() {
        pieces.push(current);
    }
    Ok(pieces
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(index, text)| Segment {
            index,
            text,
            answer_id: answer_id.to_string(),
        })
        .collect())
}

/// Fraction of `a`'s character 3-grams present in `b`. Falls back to a
/// containment check for very short inputs.
fn trigram_containment(a: &str, b: &str) -> f64 {
    let a_chars: Vec<char> = a.chars().collect();
    if a_chars.len() < 3 {
        return if b.contains(a) { 1.0 } else { 0.0 };
    }
    let b_chars: Vec<char> = b.chars().collect();
    let b_grams: std::collections::HashSet<&[char]> = b_chars.windows(3).collect();
    let total = a_chars.len() - 2;
    let hits = a_chars
        .windows(3)
        .filter(|gram| b_grams.contains(gram))
        .count();
    hits as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockRule, ScriptedMock};

    fn zh_library() -> PromptLibrary {
        PromptLibrary::new(Locale::Zh)
    }

    #[test]
    fn prompt_contains_answer_and_principles() {
        let library = zh_library();
        let decomposer = Decomposer::new(&library, "gpt-4");
        let req = decomposer.build_prompt("X", &[]).unwrap();
        let text = req.match_target();
        assert!(text.contains("X"));
        assert!(text.contains("语义联系或逻辑联系"));
        assert!(text.contains("代词"));
        assert!(text.contains("句子结构"));
        assert_eq!(req.temperature, 0.0);
    }

    #[test]
    fn prompt_is_deterministic() {
        let library = zh_library();
        let decomposer = Decomposer::new(&library, "gpt-4");
        let examples = load_default_fewshots(&library).unwrap();
        let a = decomposer.build_prompt("回答文本", &examples).unwrap();
        let b = decomposer.build_prompt("回答文本", &examples).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prompt_renders_all_three_example_kinds_in_order() {
        let library = zh_library();
        let decomposer = Decomposer::new(&library, "gpt-4");
        let examples = load_default_fewshots(&library).unwrap();
        assert_eq!(examples.len(), 3);
        assert_eq!(examples[0].kind, FewShotKind::LogicalConnection);
        assert_eq!(examples[1].kind, FewShotKind::PronounSubstitution);
        assert_eq!(examples[2].kind, FewShotKind::UniqueFormat);
        let text = decomposer
            .build_prompt("目标回答", &examples)
            .unwrap()
            .match_target();
        let positions: Vec<usize> = examples
            .iter()
            .map(|e| text.find(&e.input).expect("example input rendered"))
            .collect();
        assert!(positions[0] < positions[1] && positions[1] < positions[2]);
        // target answer comes after every example
        assert!(text.rfind("目标回答").unwrap() > positions[2]);
    }

    #[test]
    fn parse_plain_numbered_list() {
        let parsed = parse_segments("1. A\n2. B").unwrap();
        assert_eq!(parsed.items, vec!["A", "B"]);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn parse_rejects_text_without_list() {
        assert!(matches!(
            parse_segments("no list here"),
            Err(DecomposeError::Unparseable { .. })
        ));
    }

    #[test]
    fn parse_full_width_numbering_and_trailing_blank_item() {
        let parsed = parse_segments("1．甲\n\n2．乙\n3.  ").unwrap();
        assert_eq!(parsed.items, vec!["甲", "乙"]);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("1 empty"));
    }

    #[test]
    fn parse_paren_and_full_width_digit_variants() {
        let parsed = parse_segments("１．一\n2）二\n3、三\n4) 四").unwrap();
        assert_eq!(parsed.items, vec!["一", "二", "三", "四"]);
    }

    #[test]
    fn parse_json_array_form() {
        let parsed = parse_segments(r#"["甲","乙"]"#).unwrap();
        assert_eq!(parsed.items, vec!["甲", "乙"]);
        let fenced = parse_segments("```json\n[\"a\", \"b\", \"\"]\n```").unwrap();
        assert_eq!(fenced.items, vec!["a", "b"]);
        assert_eq!(fenced.warnings.len(), 1);
    }

    #[test]
    fn parse_is_idempotent_on_clean_lists() {
        let first = parse_segments("1. 片段甲\n2. 片段乙\n3. 片段丙").unwrap();
        let rendered: String = first
            .items
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {s}\n", i + 1))
            .collect();
        let second = parse_segments(&rendered).unwrap();
        assert_eq!(first.items, second.items);
    }

    #[test]
    fn decompose_single_sentence_stays_whole() {
        let library = zh_library();
        let client = Client::mock(ScriptedMock::always("1. 原句"));
        let decomposer = Decomposer::new(&library, "m");
        let result = decomposer.decompose(&client, "原句", "a1", &[]).unwrap();
        assert_eq!(result.segments.len(), 1);
        assert_eq!(result.segments[0].text, "原句");
        assert_eq!(result.segments[0].index, 0);
        assert_eq!(result.segments[0].answer_id, "a1");
        assert_eq!(result.raw, "1. 原句");
    }

    #[test]
    fn decompose_two_segments_in_order() {
        let library = zh_library();
        let client = Client::mock(ScriptedMock::always("1. 第一段。\n2. 第二段。"));
        let decomposer = Decomposer::new(&library, "m");
        let result = decomposer
            .decompose(&client, "第一段。第二段。", "a2", &[])
            .unwrap();
        assert_eq!(
            result
                .segments
                .iter()
                .map(|s| s.text.as_str())
                .collect::<Vec<_>>(),
            vec!["第一段。", "第二段。"]
        );
        assert_eq!(result.calls.len(), 1);
    }

    #[test]
    fn decompose_retries_once_with_reminder() {
        let library = zh_library();
        // First call yields junk (matched by the bare prompt); the retry
        // carries the reminder text, matched by a more specific rule.
        let mock = ScriptedMock::new(vec![
            MockRule::substring("无法被解析", "1. 修复后的片段"),
            MockRule::prefix("", "抱歉，我不明白。"),
        ]);
        let client = Client::mock(mock);
        let decomposer = Decomposer::new(&library, "m");
        let result = decomposer
            .decompose(&client, "某个回答", "a3", &[])
            .unwrap();
        assert_eq!(result.segments[0].text, "修复后的片段");
        assert_eq!(result.calls.len(), 2);
    }

    #[test]
    fn decompose_fails_after_retry_exhausted() {
        let library = zh_library();
        let client = Client::mock(ScriptedMock::always("仍然没有列表"));
        let decomposer = Decomposer::new(&library, "m");
        let err = decomposer
            .decompose(&client, "回答", "a4", &[])
            .unwrap_err();
        assert!(matches!(err, DecomposeError::UnparseableAfterRetry { .. }));
    }

    #[test]
    fn decompose_warns_on_low_overlap() {
        let library = zh_library();
        let client = Client::mock(ScriptedMock::always("1. 完全不同的文字内容啊"));
        let decomposer = Decomposer::new(&library, "m");
        let result = decomposer
            .decompose(&client, "这是一段很长的原始回答文本内容", "a5", &[])
            .unwrap();
        assert!(result.warnings.iter().any(|w| w.contains("3-gram")));
    }

    #[test]
    fn conventional_splits_on_sentence_punctuation() {
        let segments = conventional_decompose("甲。乙！", "a").unwrap();
        assert_eq!(
            segments.iter().map(|s| s.text.as_str()).collect::<Vec<_>>(),
            vec!["甲。", "乙！"]
        );
        assert_eq!(segments[0].index, 0);
        assert_eq!(segments[1].index, 1);
    }

    #[test]
    fn conventional_keeps_undelimited_answer_whole() {
        let segments = conventional_decompose("甲", "a").unwrap();
        assert_eq!(segments.len(), 1);
        assert_eq!(segments[0].text, "甲");
    }

    #[test]
    fn conventional_rejects_empty_answer() {
        assert!(matches!(
            conventional_decompose("  ", "a"),
            Err(DecomposeError::EmptyAnswer)
        ));
    }

    #[test]
    fn conventional_concatenation_reproduces_input_modulo_whitespace() {
        let cases = [
            "甲。乙！丙？",
            "one. two; three",
            "带换行\n的回答。结尾",
            "句子一。  句子二！",
        ];
        for answer in cases {
            let segments = conventional_decompose(answer, "a").unwrap();
            let rebuilt: String = segments.iter().map(|s| s.text.as_str()).collect();
            let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            assert_eq!(squash(&rebuilt), squash(answer), "case {answer:?}");
        }
    }

    #[test]
    fn mock_decomposition_is_deterministic() {
        let library = zh_library();
        let decomposer = Decomposer::new(&library, "m");
        let run = || {
            let client = Client::mock(ScriptedMock::always("1. 片段一。\n2. 片段二。"));
            let r = decomposer
                .decompose(&client, "片段一。片段二。", "a6", &[])
                .unwrap();
            (r.segments, r.raw, r.warnings)
        };
        assert_eq!(run(), run());
    }
}
