//! In-context prompt assembly and completion extraction.
//!
//! Prompts are flat text built from three block markers:
//!
//! ```text
//! ### Input: <case or template text>
//! ### Logical Formulas Template:
//! <one skeleton per line>
//! ### Output:
//! <one fact formula per line>
//! ```
//!
//! One block triple per demonstration, then a final `### Input:` block for
//! the query with its output left for the model. Injected text lines that
//! would collide with a marker are escaped by prefixing a space.

use thiserror::Error;

use crate::proleg::{parse_fact_set, serialize_fact_set, struct_of_set, FactSet};
use crate::selection::SelectedSet;
use crate::templates::LegalCase;

/// The instruction line that opens every prompt.
pub const DEFAULT_SYSTEM_HEADER: &str = "### You are an expert in the Semantic parsing task, which maps from legal cases to logical formulas (Note: following the exact function name defined in the fewshot samples).";

pub const INPUT_MARKER: &str = "### Input:";
pub const SKELETON_MARKER: &str = "### Logical Formulas Template:";
pub const OUTPUT_MARKER: &str = "### Output:";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("cannot build a prompt from an empty selection")]
    EmptySelection,
    #[error("unknown demonstration id `{0}` in layout order")]
    UnknownDemoId(String),
}

/// Prompt shape knobs.
#[derive(Debug, Clone)]
pub struct PromptLayout {
    /// Instruction line at the top of the prompt.
    pub system_header: String,
    /// Render the skeleton block for each demonstration.
    pub include_skeleton_block: bool,
    /// Explicit demonstration order by id; `None` keeps selection order.
    pub demo_order: Option<Vec<String>>,
}

impl Default for PromptLayout {
    fn default() -> Self {
        PromptLayout {
            system_header: DEFAULT_SYSTEM_HEADER.to_string(),
            include_skeleton_block: true,
            demo_order: None,
        }
    }
}

/// Prefix a space on any injected-text line that would read as a block
/// marker, so markers can only come from the prompt builder itself.
pub fn escape_marker_lines(text: &str) -> String {
    let escaped: Vec<String> = text
        .lines()
        .map(|line| {
            if line.starts_with("###") {
                format!(" {line}")
            } else {
                line.to_string()
            }
        })
        .collect();
    escaped.join("\n")
}

/// Assemble the few-shot prompt for `query` from the selected demonstrations.
pub fn build_prompt(
    query: &LegalCase,
    selection: &SelectedSet,
    layout: &PromptLayout,
) -> Result<String, PromptError> {
    if selection.is_empty() {
        return Err(PromptError::EmptySelection);
    }
    let demos: Vec<&crate::selection::Demonstration> = match &layout.demo_order {
        None => selection.items.iter().collect(),
        Some(order) => order
            .iter()
            .map(|id| {
                selection
                    .items
                    .iter()
                    .find(|d| &d.id == id)
                    .ok_or_else(|| PromptError::UnknownDemoId(id.clone()))
            })
            .collect::<Result<_, _>>()?,
    };

    let mut prompt = String::new();
    prompt.push_str(&layout.system_header);
    prompt.push_str("\n\n");
    for demo in demos {
        prompt.push_str(INPUT_MARKER);
        prompt.push(' ');
        prompt.push_str(&escape_marker_lines(&demo.text));
        prompt.push('\n');
        if layout.include_skeleton_block {
            prompt.push_str(SKELETON_MARKER);
            prompt.push('\n');
            for skeleton in struct_of_set(&demo.facts) {
                prompt.push_str(&skeleton.render());
                prompt.push('\n');
            }
        }
        prompt.push_str(OUTPUT_MARKER);
        prompt.push('\n');
        prompt.push_str(&serialize_fact_set(&demo.facts));
        prompt.push_str("\n\n");
    }
    prompt.push_str(INPUT_MARKER);
    prompt.push(' ');
    prompt.push_str(&escape_marker_lines(&query.text));
    prompt.push('\n');
    Ok(prompt)
}

/// Why a completion failed to produce facts. Failures are values, never
/// aborts: evaluation counts them as incorrect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: String,
}

/// A model completion with its parse result.
#[derive(Debug, Clone)]
pub struct Completion {
    pub raw: String,
    pub parsed: Result<FactSet, ParseFailure>,
}

impl Completion {
    pub fn from_raw(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let parsed = extract_output(&raw);
        Completion { raw, parsed }
    }
}

/// Pull the fact block out of a raw completion and parse it.
///
/// Strips markdown fences, skips a leading skeleton block, strips a leading
/// `### Output:` echo, and cuts at the next `###` marker.
pub fn extract_output(raw: &str) -> Result<FactSet, ParseFailure> {
    let defenced: Vec<&str> = raw
        .lines()
        .filter(|line| !line.trim_start().starts_with("```"))
        .collect();

    // Locate the output region.
    let mut start = 0usize;
    if let Some(pos) = defenced
        .iter()
        .position(|line| line.trim_start().starts_with(OUTPUT_MARKER))
    {
        start = pos;
    } else if let Some(pos) = defenced
        .iter()
        .position(|line| line.trim_start().starts_with(SKELETON_MARKER))
    {
        // Skeleton block with no explicit output marker: skip through it.
        let after = defenced[pos + 1..]
            .iter()
            .position(|line| line.trim_start().starts_with("###"))
            .map(|off| pos + 1 + off);
        start = after.unwrap_or(defenced.len());
    }

    let mut lines = Vec::new();
    for (i, line) in defenced[start.min(defenced.len())..].iter().enumerate() {
        let trimmed = line.trim_start();
        if i == 0 && trimmed.starts_with(OUTPUT_MARKER) {
            let rest = trimmed[OUTPUT_MARKER.len()..].trim();
            if !rest.is_empty() {
                lines.push(rest.to_string());
            }
            continue;
        }
        if trimmed.starts_with("###") {
            break;
        }
        lines.push(line.to_string());
    }

    let body = lines.join("\n");
    if body.trim().is_empty() {
        return Err(ParseFailure {
            reason: "empty completion".into(),
        });
    }
    parse_fact_set(&body).map_err(|e| ParseFailure {
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{DeterministicLocalBackend, Embedder};
    use crate::proleg::parse_fact_set;
    use crate::selection::{diverse_sim, DemoKind, Demonstration, Pool, SelectionConfig};

    fn selection_of(demos: Vec<(&str, &str, &str)>) -> SelectedSet {
        // (id, text, facts) — run a real selection so embeddings are filled.
        let items: Vec<Demonstration> = demos
            .iter()
            .map(|(id, text, facts)| {
                Demonstration::new(
                    *id,
                    DemoKind::Case,
                    *text,
                    parse_fact_set(facts).unwrap(),
                )
            })
            .collect();
        let k = items.len();
        let pool = Pool::new(DemoKind::Case, items).unwrap();
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        diverse_sim("query text", &pool, &SelectionConfig::new(k, 1.0), &embedder).unwrap()
    }

    #[test]
    fn one_demo_prompt_structure() {
        let sel = selection_of(vec![("a", "Emma lent a van.", "lender(\"Emma\").")]);
        let query = LegalCase::new("Lucas lent a bike.");
        let prompt = build_prompt(&query, &sel, &PromptLayout::default()).unwrap();

        assert_eq!(prompt.matches(INPUT_MARKER).count(), 2);
        assert_eq!(prompt.matches(SKELETON_MARKER).count(), 1);
        assert_eq!(prompt.matches(OUTPUT_MARKER).count(), 1);
        assert!(prompt.starts_with(DEFAULT_SYSTEM_HEADER));
        assert!(prompt.ends_with("### Input: Lucas lent a bike.\n"));
        assert!(prompt.contains("lender(<1>)."));
    }

    #[test]
    fn skeleton_block_can_be_disabled() {
        let sel = selection_of(vec![("a", "Emma lent a van.", "lender(\"Emma\").")]);
        let query = LegalCase::new("q");
        let layout = PromptLayout {
            include_skeleton_block: false,
            ..PromptLayout::default()
        };
        let prompt = build_prompt(&query, &sel, &layout).unwrap();
        assert!(!prompt.contains(SKELETON_MARKER));
    }

    #[test]
    fn empty_selection_is_rejected() {
        let sel = SelectedSet {
            items: vec![],
            scores: vec![],
            query_embedding: crate::embeddings::EmbeddingVector::new(vec![1.0]),
        };
        assert_eq!(
            build_prompt(&LegalCase::new("q"), &sel, &PromptLayout::default()),
            Err(PromptError::EmptySelection)
        );
    }

    #[test]
    fn output_section_is_canonical_serialization() {
        let facts = "lender('Emma').\nowned_by( \"a van\" ,\"Emma\").";
        let sel = selection_of(vec![("a", "Emma lent a van.", facts)]);
        let prompt =
            build_prompt(&LegalCase::new("q"), &sel, &PromptLayout::default()).unwrap();

        let marker = format!("{OUTPUT_MARKER}\n");
        let start = prompt.find(&marker).unwrap() + marker.len();
        let end = prompt[start..].find("\n\n").unwrap() + start;
        let section = &prompt[start..end];
        assert_eq!(
            section,
            serialize_fact_set(&parse_fact_set(facts).unwrap())
        );
        assert_eq!(section, "lender(\"Emma\").\nowned_by(\"a van\",\"Emma\").");
    }

    #[test]
    fn demonstration_output_round_trips_through_prompt() {
        let facts = "borrower(\"The hospital\").\nlender(\"the health organization\").";
        let sel = selection_of(vec![("a", "text", facts)]);
        let prompt =
            build_prompt(&LegalCase::new("q"), &sel, &PromptLayout::default()).unwrap();
        let marker = format!("{OUTPUT_MARKER}\n");
        let start = prompt.find(&marker).unwrap() + marker.len();
        let end = prompt[start..].find("\n\n").unwrap() + start;
        let reparsed = parse_fact_set(&prompt[start..end]).unwrap();
        assert_eq!(reparsed, parse_fact_set(facts).unwrap());
    }

    #[test]
    fn marker_lines_in_case_text_are_escaped() {
        let sel = selection_of(vec![(
            "a",
            "first line\n### Output: fake marker\nlast line",
            "p(\"x\").",
        )]);
        let prompt =
            build_prompt(&LegalCase::new("q\n### Input: also fake"), &sel, &PromptLayout::default())
                .unwrap();
        let marker_lines = prompt
            .lines()
            .filter(|l| l.starts_with("###"))
            .count();
        // header + 2 inputs + 1 skeleton + 1 output; the injected fakes are
        // space-prefixed and no longer start a line with ###.
        assert_eq!(marker_lines, 5);
        assert!(prompt.contains(" ### Output: fake marker"));
        assert!(prompt.contains(" ### Input: also fake"));
    }

    #[test]
    fn prompt_is_deterministic() {
        let sel = selection_of(vec![
            ("a", "Emma lent a van.", "lender(\"Emma\")."),
            ("b", "Mason broke a vase.", "borrower(\"Mason\")."),
        ]);
        let query = LegalCase::new("q");
        let p1 = build_prompt(&query, &sel, &PromptLayout::default()).unwrap();
        let p2 = build_prompt(&query, &sel, &PromptLayout::default()).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn demo_order_override() {
        let sel = selection_of(vec![
            ("a", "Emma lent a van.", "lender(\"Emma\")."),
            ("b", "Mason broke a vase.", "borrower(\"Mason\")."),
        ]);
        let layout = PromptLayout {
            demo_order: Some(vec!["b".into(), "a".into()]),
            ..PromptLayout::default()
        };
        let prompt = build_prompt(&LegalCase::new("q"), &sel, &layout).unwrap();
        let a_pos = prompt.find("Emma lent").unwrap();
        let b_pos = prompt.find("Mason broke").unwrap();
        assert!(b_pos < a_pos);

        let layout = PromptLayout {
            demo_order: Some(vec!["zzz".into()]),
            ..PromptLayout::default()
        };
        assert_eq!(
            build_prompt(&LegalCase::new("q"), &sel, &layout),
            Err(PromptError::UnknownDemoId("zzz".into()))
        );
    }

    #[test]
    fn extract_gold_verbatim() {
        let gold = "lender(\"Emma\").\nborrower(\"Mason\").";
        let fs = extract_output(gold).unwrap();
        assert_eq!(fs, parse_fact_set(gold).unwrap());
    }

    #[test]
    fn extract_strips_fences_and_marker() {
        let raw = "```prolog\n### Output:\nlender(\"Emma\").\n```";
        let fs = extract_output(raw).unwrap();
        assert_eq!(fs.facts.len(), 1);

        let raw = "### Output: lender(\"Emma\").";
        let fs = extract_output(raw).unwrap();
        assert_eq!(fs.facts.len(), 1);
    }

    #[test]
    fn extract_skips_leading_skeleton_block() {
        let raw = "### Logical Formulas Template:\nlender(<1>).\n### Output:\nlender(\"Emma\").";
        let fs = extract_output(raw).unwrap();
        assert_eq!(fs.facts.len(), 1);
        assert_eq!(fs.facts[0].predicate, "lender");
    }

    #[test]
    fn extract_cuts_at_next_marker() {
        let raw = "### Output:\nlender(\"Emma\").\n### Input: next question";
        let fs = extract_output(raw).unwrap();
        assert_eq!(fs.facts.len(), 1);
    }

    #[test]
    fn extract_empty_is_failure() {
        let err = extract_output("").unwrap_err();
        assert_eq!(err.reason, "empty completion");
        assert!(extract_output("### Output:\n").is_err());
    }

    #[test]
    fn extract_bad_facts_is_failure_value() {
        let err = extract_output("this is not a fact").unwrap_err();
        assert!(err.reason.contains("syntax error"));
        let completion = Completion::from_raw("also not facts");
        assert!(completion.parsed.is_err());
    }
}
