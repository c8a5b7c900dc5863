//! Factual consistency evaluation for retrieval-augmented generation.
//!
//! The pipeline decomposes an answer into segments only where no strong
//! semantic or logical connection exists, judges each segment in two
//! chain-of-thought stages (fact consistency, then logic consistency),
//! and marks the answer consistent if and only if every segment passed.
//! Around the evaluator sit dataset loading with schema adapters, a
//! synthetic error-injection generator, a cached chat-completion client
//! with a scripted mock for offline runs, and a benchmark runner that
//! renders per-error-type, per-source, and ablation accuracy tables.

pub mod bench;
pub mod dataset;
pub mod decompose;
pub mod judge;
pub mod llm;
pub mod prompts;
pub mod synthgen;
pub mod typology;

pub use typology::{Category, ErrorType};
