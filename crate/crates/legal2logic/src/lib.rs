//! Diversity-aware few-shot retrieval and strict evaluation for translating
//! natural-language legal case narratives into PROLEG fact formulas.
//!
//! The pipeline, end to end:
//!
//! 1. [`dataset`] loads a JSONL corpus of annotated legal cases and produces
//!    template-disjoint train/test splits.
//! 2. [`selection`] retrieves few-shot demonstrations from the training side
//!    with a greedy similarity/diversity trade-off, over both raw case texts
//!    and entity-agnostic template texts.
//! 3. [`prompting`] assembles the in-context prompt and parses model
//!    completions back into fact sets.
//! 4. [`llm`] drives a chat-completion backend (remote or deterministic mock).
//! 5. [`metrics`] scores predictions against gold with exact-match and
//!    soft-match accuracy.
//! 6. [`runner`] orchestrates the whole grid (seeds x split ratios x lambda x
//!    shot mixes) and writes reproducible artifacts.
//!
//! The [`proleg`] and [`templates`] modules hold the underlying domain types:
//! fact formulas with canonical serialization, and placeholder templates with
//! entity maps.

pub mod dataset;
pub mod embeddings;
pub mod llm;
pub mod metrics;
pub mod proleg;
pub mod prompting;
pub mod runner;
pub mod selection;
pub mod templates;
