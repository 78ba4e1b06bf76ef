//! Corpus loading, validation, statistics, and template-disjoint splits.
//!
//! Corpora are JSONL, one record per line, schema version `v: 1`:
//!
//! ```json
//! {"v":1,"id":"loan-001","legal_issue":"...","case_text":"...",
//!  "entities":{"Lender":"Emma","Object":"a laptop"},
//!  "template_text":"{Lender} lent {Object} ...",
//!  "facts":"lender(\"Emma\").\n...","rules":"...","contract_type":"Loan"}
//! ```
//!
//! Validation rejects malformed facts/templates, unbound placeholders,
//! entity values missing from the case text, and duplicate ids. Records
//! whose template does not re-instantiate to the exact case text (wording
//! drift is common in annotated corpora) produce warnings, not errors.

mod split;
mod synth;

pub use split::{make_split, Split, SplitMix64};
pub use synth::{synthetic_corpus, SynthConfig};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proleg::{parse_fact_set, struct_of_set, FactSet, ProlegError, RuleText};
use crate::templates::{EntityMap, LegalCase, Template, TemplateError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("record `{id}`: duplicate id")]
    DuplicateId { id: String },
    #[error("record `{id}`: facts do not parse: {source}")]
    BadFacts { id: String, source: ProlegError },
    #[error("record `{id}`: template does not parse: {source}")]
    BadTemplate { id: String, source: TemplateError },
    #[error("record `{id}`: template placeholder `{placeholder}` has no entity binding")]
    UnboundPlaceholder { id: String, placeholder: String },
    #[error("record `{id}`: entity `{entity_type}` value does not occur in case_text")]
    EntityAbsent { id: String, entity_type: String },
    #[error("record `{id}`: {source}")]
    BadEntities { id: String, source: TemplateError },
    #[error("split is degenerate: {0}")]
    DegenerateSplit(String),
    #[error("seen_ratio must be in (0, 1), got {0}")]
    BadRatio(f64),
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractType {
    Purchase,
    Lease,
    Loan,
    Copyright,
}

impl fmt::Display for ContractType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ContractType::Purchase => "Purchase",
            ContractType::Lease => "Lease",
            ContractType::Loan => "Loan",
            ContractType::Copyright => "Copyright",
        };
        f.write_str(s)
    }
}

/// JSONL wire form of one record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecord {
    pub v: u32,
    pub id: String,
    pub legal_issue: String,
    pub case_text: String,
    pub entities: BTreeMap<String, String>,
    pub template_text: String,
    pub facts: String,
    #[serde(default)]
    pub rules: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract_type: Option<ContractType>,
}

/// A validated corpus record.
#[derive(Debug, Clone)]
pub struct Record {
    pub id: String,
    pub legal_issue: String,
    pub case_text: String,
    pub entities: EntityMap,
    pub template_text: String,
    pub template: Template,
    pub facts: FactSet,
    pub rules: RuleText,
    pub contract_type: Option<ContractType>,
}

impl Record {
    /// Content hash of the template text; the unit of split disjointness.
    pub fn template_id(&self) -> String {
        template_id_of(&self.template_text)
    }

    pub fn legal_case(&self) -> LegalCase {
        LegalCase::with_entities(self.case_text.clone(), self.entities.clone())
    }

    pub fn to_raw(&self) -> RawRecord {
        RawRecord {
            v: 1,
            id: self.id.clone(),
            legal_issue: self.legal_issue.clone(),
            case_text: self.case_text.clone(),
            entities: self
                .entities
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            template_text: self.template_text.clone(),
            facts: crate::proleg::serialize_fact_set(&self.facts),
            rules: self.rules.raw.clone(),
            contract_type: self.contract_type,
        }
    }
}

pub fn template_id_of(template_text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(template_text.as_bytes()))
}

/// Non-fatal validation findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    /// Re-instantiating the template with the entity map does not reproduce
    /// the case text byte-for-byte (wording drift).
    TemplateRoundTrip { id: String, detail: String },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::TemplateRoundTrip { id, detail } => {
                write!(f, "record `{id}`: template round trip drifts: {detail}")
            }
        }
    }
}

/// Validate one raw record into a [`Record`], collecting warnings.
pub fn validate_record(
    raw: &RawRecord,
    warnings: &mut Vec<ValidationWarning>,
) -> Result<Record, DatasetError> {
    let id = raw.id.clone();
    let entities = EntityMap::from_pairs(raw.entities.iter().map(|(k, v)| (k.clone(), v.clone())))
        .map_err(|source| DatasetError::BadEntities {
            id: id.clone(),
            source,
        })?;
    let facts = parse_fact_set(&raw.facts).map_err(|source| DatasetError::BadFacts {
        id: id.clone(),
        source,
    })?;
    let template =
        Template::parse(&raw.template_text).map_err(|source| DatasetError::BadTemplate {
            id: id.clone(),
            source,
        })?;

    for placeholder in template.entity_types() {
        if entities.get(placeholder).is_none() {
            return Err(DatasetError::UnboundPlaceholder {
                id,
                placeholder: placeholder.to_string(),
            });
        }
    }
    for (entity_type, value) in entities.iter() {
        // Exact match preferred; ASCII-case-insensitive drift is tolerated.
        let found = raw.case_text.contains(value)
            || find_ci(&raw.case_text, value);
        if !found {
            return Err(DatasetError::EntityAbsent {
                id,
                entity_type: entity_type.to_string(),
            });
        }
    }

    match template.instantiate(&entities) {
        Ok(case) if case.text == raw.case_text => {}
        Ok(case) => warnings.push(ValidationWarning::TemplateRoundTrip {
            id: id.clone(),
            detail: first_divergence(&case.text, &raw.case_text),
        }),
        Err(e) => warnings.push(ValidationWarning::TemplateRoundTrip {
            id: id.clone(),
            detail: e.to_string(),
        }),
    }

    Ok(Record {
        id: raw.id.clone(),
        legal_issue: raw.legal_issue.clone(),
        case_text: raw.case_text.clone(),
        entities,
        template_text: raw.template_text.clone(),
        template,
        facts,
        rules: RuleText::parse(raw.rules.clone()),
        contract_type: raw.contract_type,
    })
}

fn find_ci(haystack: &str, needle: &str) -> bool {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.is_empty() || n.len() > h.len() {
        return false;
    }
    (0..=h.len() - n.len()).any(|i| {
        haystack.is_char_boundary(i)
            && haystack.is_char_boundary(i + n.len())
            && h[i..i + n.len()].eq_ignore_ascii_case(n)
    })
}

fn first_divergence(a: &str, b: &str) -> String {
    let pos = a
        .bytes()
        .zip(b.bytes())
        .position(|(x, y)| x != y)
        .unwrap_or_else(|| a.len().min(b.len()));
    let start = pos.saturating_sub(12);
    let a_end = (pos + 24).min(a.len());
    let b_end = (pos + 24).min(b.len());
    let a_snip: String = a
        .char_indices()
        .filter(|(i, _)| (start..a_end).contains(i))
        .map(|(_, c)| c)
        .collect();
    let b_snip: String = b
        .char_indices()
        .filter(|(i, _)| (start..b_end).contains(i))
        .map(|(_, c)| c)
        .collect();
    format!("instantiated `...{a_snip}...` vs case `...{b_snip}...`")
}

/// Load and validate a JSONL corpus. The first hard error aborts; warnings
/// are collected. Use [`validate_corpus`] to collect every error instead.
pub fn load_corpus(
    path: impl AsRef<Path>,
) -> Result<(Vec<Record>, Vec<ValidationWarning>), DatasetError> {
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen_ids = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| DatasetError::Schema {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if raw.v != 1 {
            return Err(DatasetError::Schema {
                line: idx + 1,
                message: format!("unsupported schema version {}", raw.v),
            });
        }
        if !seen_ids.insert(raw.id.clone()) {
            return Err(DatasetError::DuplicateId { id: raw.id });
        }
        records.push(validate_record(&raw, &mut warnings)?);
    }
    Ok((records, warnings))
}

/// Write a corpus as JSONL.
pub fn save_corpus(records: &[Record], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    use std::io::Write;
    if let Some(parent) = path.as_ref().parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    for record in records {
        let line = serde_json::to_string(&record.to_raw()).expect("record serializes");
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// Full validation report: every error, not just the first.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub records: Vec<Record>,
    pub errors: Vec<String>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Validate a corpus file, collecting all errors and warnings.
pub fn validate_corpus(path: impl AsRef<Path>) -> Result<ValidationReport, DatasetError> {
    let file = std::fs::File::open(path)?;
    let mut report = ValidationReport::default();
    let mut seen_ids = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(e) => {
                report.errors.push(format!("line {}: {e}", idx + 1));
                continue;
            }
        };
        if raw.v != 1 {
            report
                .errors
                .push(format!("line {}: unsupported schema version {}", idx + 1, raw.v));
            continue;
        }
        if !seen_ids.insert(raw.id.clone()) {
            report
                .errors
                .push(format!("record `{}`: duplicate id", raw.id));
            continue;
        }
        match validate_record(&raw, &mut report.warnings) {
            Ok(record) => report.records.push(record),
            Err(e) => report.errors.push(e.to_string()),
        }
    }
    Ok(report)
}

/// Corpus-level statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub n_samples: usize,
    pub n_templates: usize,
    /// Distinct whitespace tokens across template texts.
    pub template_vocab: usize,
    pub n_entity_types: usize,
    pub n_legal_issues: usize,
    /// Distinct fact skeletons.
    pub n_unique_facts: usize,
}

pub fn corpus_stats(records: &[Record]) -> CorpusStats {
    let mut templates = BTreeSet::new();
    let mut vocab = BTreeSet::new();
    let mut entity_types = BTreeSet::new();
    let mut issues = BTreeSet::new();
    let mut skeletons = BTreeSet::new();
    for record in records {
        templates.insert(record.template_id());
        for token in record.template_text.split_whitespace() {
            vocab.insert(token.to_string());
        }
        for (entity_type, _) in record.entities.iter() {
            entity_types.insert(entity_type.to_string());
        }
        issues.insert(record.legal_issue.clone());
        for skeleton in struct_of_set(&record.facts) {
            skeletons.insert(skeleton);
        }
    }
    CorpusStats {
        n_samples: records.len(),
        n_templates: templates.len(),
        template_vocab: vocab.len(),
        n_entity_types: entity_types.len(),
        n_legal_issues: issues.len(),
        n_unique_facts: skeletons.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_style_record() -> RawRecord {
        RawRecord {
            v: 1,
            id: "loan-001".into(),
            legal_issue: "Damage to a lent asset".into(),
            case_text: "Emma lent a laptop to Mason under lease78. Mason damaged a laptop."
                .into(),
            entities: BTreeMap::from([
                ("Lender".to_string(), "Emma".to_string()),
                ("Borrower".to_string(), "Mason".to_string()),
                ("Object".to_string(), "a laptop".to_string()),
                ("Agreement".to_string(), "lease78".to_string()),
            ]),
            template_text:
                "{Lender} lent {Object} to {Borrower} under {Agreement}. {Borrower} damaged {Object}."
                    .into(),
            facts: "lender(\"Emma\").\nborrower(\"Mason\").\nowned_by(\"a laptop\",\"Emma\").".into(),
            rules: "right_to_repair(_Lender, _Object) <= damage_fact(_Borrower, _Object).".into(),
            contract_type: Some(ContractType::Loan),
        }
    }

    #[test]
    fn valid_record_round_trips_jsonl() {
        let raw = table_style_record();
        let mut warnings = Vec::new();
        let record = validate_record(&raw, &mut warnings).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(record.facts.facts.len(), 3);
        assert_eq!(record.rules.head_predicates, vec!["right_to_repair"]);

        let line = serde_json::to_string(&record.to_raw()).unwrap();
        let back: RawRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.id, raw.id);
        assert_eq!(back.case_text, raw.case_text);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        let (records, warnings) = load_corpus(&path).unwrap();
        assert!(records.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn absent_entity_value_is_an_error_naming_the_type() {
        let mut raw = table_style_record();
        raw.entities
            .insert("Ghost".to_string(), "spectral value".to_string());
        let mut warnings = Vec::new();
        let err = validate_record(&raw, &mut warnings).unwrap_err();
        match err {
            DatasetError::EntityAbsent { entity_type, .. } => assert_eq!(entity_type, "Ghost"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wording_drift_is_a_warning_not_error() {
        let mut raw = table_style_record();
        // Same meaning, one word differs from the template instantiation.
        raw.case_text = raw.case_text.replace("damaged", "has damaged");
        let mut warnings = Vec::new();
        let record = validate_record(&raw, &mut warnings).unwrap();
        assert_eq!(record.id, "loan-001");
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            &warnings[0],
            ValidationWarning::TemplateRoundTrip { id, .. } if id == "loan-001"
        ));
    }

    #[test]
    fn unbound_placeholder_is_an_error() {
        let mut raw = table_style_record();
        raw.template_text.push_str(" {Missing}");
        let mut warnings = Vec::new();
        assert!(matches!(
            validate_record(&raw, &mut warnings),
            Err(DatasetError::UnboundPlaceholder { placeholder, .. }) if placeholder == "Missing"
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.jsonl");
        let line = serde_json::to_string(&table_style_record()).unwrap();
        std::fs::write(&path, format!("{line}\n{line}\n")).unwrap();
        assert!(matches!(
            load_corpus(&path),
            Err(DatasetError::DuplicateId { .. })
        ));
        let report = validate_corpus(&path).unwrap();
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.records.len(), 1);
    }

    #[test]
    fn schema_error_carries_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = serde_json::to_string(&table_style_record()).unwrap();
        std::fs::write(&path, format!("{good}\nnot json\n")).unwrap();
        match load_corpus(&path) {
            Err(DatasetError::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stats_count_basics() {
        let raw = table_style_record();
        let mut warnings = Vec::new();
        let one = validate_record(&raw, &mut warnings).unwrap();
        let stats = corpus_stats(&[one.clone()]);
        assert_eq!(stats.n_samples, 1);
        assert_eq!(stats.n_templates, 1);
        assert_eq!(stats.n_entity_types, 4);
        assert_eq!(stats.n_legal_issues, 1);
        assert_eq!(stats.n_unique_facts, 3);

        // A duplicate of the record: two samples, one template.
        let mut dup_raw = table_style_record();
        dup_raw.id = "loan-002".into();
        let two = validate_record(&dup_raw, &mut warnings).unwrap();
        let stats = corpus_stats(&[one, two]);
        assert_eq!(stats.n_samples, 2);
        assert_eq!(stats.n_templates, 1);
    }
}
