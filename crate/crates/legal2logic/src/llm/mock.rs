//! Deterministic mock backends.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{sha256_hex, GenerationConfig, LlmBackend, LlmError};
use crate::prompting::{escape_marker_lines, INPUT_MARKER};

/// Echoes the gold output registered for the query case text found in the
/// prompt's final `### Input:` block.
#[derive(Debug, Default)]
pub struct MockEchoBackend {
    by_input: HashMap<String, String>,
}

impl MockEchoBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register the gold output for a case text. The key is stored exactly as
    /// the prompt builder will render it (marker lines escaped).
    pub fn register(&mut self, case_text: &str, gold_output: impl Into<String>) {
        self.by_input
            .insert(escape_marker_lines(case_text), gold_output.into());
    }

    pub fn len(&self) -> usize {
        self.by_input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_input.is_empty()
    }
}

/// Content of the last `### Input:` block of a prompt.
fn last_input_block(prompt: &str) -> Option<String> {
    let lines: Vec<&str> = prompt.lines().collect();
    let start = lines
        .iter()
        .rposition(|line| line.starts_with(INPUT_MARKER))?;
    let mut content = vec![lines[start][INPUT_MARKER.len()..].trim_start().to_string()];
    for line in &lines[start + 1..] {
        if line.starts_with("###") {
            break;
        }
        content.push(line.to_string());
    }
    while content.last().is_some_and(|l| l.trim().is_empty()) {
        content.pop();
    }
    Some(content.join("\n"))
}

impl LlmBackend for MockEchoBackend {
    fn kind_name(&self) -> &'static str {
        "mock-echo"
    }

    fn generate(&self, prompt: &str, _cfg: &GenerationConfig) -> Result<String, LlmError> {
        if prompt.is_empty() {
            return Err(LlmError::EmptyPrompt);
        }
        let input = last_input_block(prompt)
            .ok_or_else(|| LlmError::BackendUnavailable("prompt has no input block".into()))?;
        self.by_input
            .get(&input)
            .cloned()
            .ok_or_else(|| LlmError::FixtureMiss(sha256_hex(&input)))
    }
}

#[derive(Serialize, Deserialize)]
struct FixtureRecord {
    prompt_sha256: String,
    completion: String,
}

/// Replays recorded completions keyed by SHA-256 of the whole prompt.
/// Optionally records new entries through to a JSONL file.
#[derive(Debug, Default)]
pub struct FixtureBackend {
    entries: Mutex<HashMap<String, String>>,
}

impl FixtureBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| LlmError::FixtureIo(format!("{}: {e}", path.as_ref().display())))?;
        let mut entries = HashMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| LlmError::FixtureIo(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: FixtureRecord = serde_json::from_str(&line)
                .map_err(|e| LlmError::FixtureIo(format!("line {}: {e}", idx + 1)))?;
            entries.insert(record.prompt_sha256, record.completion);
        }
        Ok(FixtureBackend {
            entries: Mutex::new(entries),
        })
    }

    pub fn insert(&self, prompt: &str, completion: impl Into<String>) {
        self.entries
            .lock()
            .unwrap()
            .insert(sha256_hex(prompt), completion.into());
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LlmError> {
        let mut file = std::fs::File::create(path.as_ref())
            .map_err(|e| LlmError::FixtureIo(format!("{}: {e}", path.as_ref().display())))?;
        let entries = self.entries.lock().unwrap();
        let mut keys: Vec<&String> = entries.keys().collect();
        keys.sort();
        for key in keys {
            let record = FixtureRecord {
                prompt_sha256: key.clone(),
                completion: entries[key].clone(),
            };
            let line = serde_json::to_string(&record).expect("fixture record serializes");
            writeln!(file, "{line}").map_err(|e| LlmError::FixtureIo(e.to_string()))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LlmBackend for FixtureBackend {
    fn kind_name(&self) -> &'static str {
        "mock-fixture"
    }

    fn generate(&self, prompt: &str, _cfg: &GenerationConfig) -> Result<String, LlmError> {
        if prompt.is_empty() {
            return Err(LlmError::EmptyPrompt);
        }
        let hash = sha256_hex(prompt);
        self.entries
            .lock()
            .unwrap()
            .get(&hash)
            .cloned()
            .ok_or(LlmError::FixtureMiss(hash))
    }
}
