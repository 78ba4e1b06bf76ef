//! Entity-agnostic case templates and entity maps.
//!
//! A template is case text with entity mentions replaced by typed
//! placeholders: `{Object} was given to {Borrower}`. Instantiating a template
//! with an entity map produces a concrete legal case; abstracting a case with
//! its entity map recovers the template.
//!
//! Surface syntax: `{EntityType}` marks a placeholder; literal braces are
//! escaped as `{{` and `}}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("no binding for entity type `{0}`")]
    MissingBinding(String),
    #[error("binding value for `{0}` does not occur in the case text")]
    EntityNotFound(String),
    #[error("invalid entity type `{0}`")]
    InvalidEntityType(String),
    #[error("empty binding value for entity type `{0}`")]
    EmptyBinding(String),
}

/// One piece of a template: literal text or a typed placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Placeholder(String),
}

/// An entity-agnostic abstraction of a legal case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    segments: Vec<Segment>,
}

/// Typed entity bindings: entity type -> concrete surface string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityMap {
    bindings: BTreeMap<String, String>,
}

/// A natural-language legal case, optionally with its entity annotations
/// (absent at pure inference time).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalCase {
    pub text: String,
    pub entities: Option<EntityMap>,
}

impl LegalCase {
    pub fn new(text: impl Into<String>) -> Self {
        LegalCase {
            text: text.into(),
            entities: None,
        }
    }

    pub fn with_entities(text: impl Into<String>, entities: EntityMap) -> Self {
        LegalCase {
            text: text.into(),
            entities: Some(entities),
        }
    }
}

fn valid_entity_type(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl EntityMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from (entity_type, value) pairs. Later duplicates of a key are
    /// rejected implicitly by the map; values must be non-empty.
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, TemplateError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = EntityMap::new();
        for (k, v) in pairs {
            map.insert(k, v)?;
        }
        Ok(map)
    }

    pub fn insert(
        &mut self,
        entity_type: impl Into<String>,
        value: impl Into<String>,
    ) -> Result<(), TemplateError> {
        let entity_type = entity_type.into();
        let value = value.into();
        if !valid_entity_type(&entity_type) {
            return Err(TemplateError::InvalidEntityType(entity_type));
        }
        if value.is_empty() {
            return Err(TemplateError::EmptyBinding(entity_type));
        }
        self.bindings.insert(entity_type, value);
        Ok(())
    }

    pub fn get(&self, entity_type: &str) -> Option<&str> {
        self.bindings.get(entity_type).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl Template {
    /// Build from segments, merging adjacent literals and dropping empty ones.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, TemplateError> {
        let mut merged: Vec<Segment> = Vec::new();
        for seg in segments {
            match seg {
                Segment::Literal(s) if s.is_empty() => {}
                Segment::Literal(s) => {
                    if let Some(Segment::Literal(prev)) = merged.last_mut() {
                        prev.push_str(&s);
                    } else {
                        merged.push(Segment::Literal(s));
                    }
                }
                Segment::Placeholder(name) => {
                    if !valid_entity_type(&name) {
                        return Err(TemplateError::InvalidEntityType(name));
                    }
                    merged.push(Segment::Placeholder(name));
                }
            }
        }
        Ok(Template { segments: merged })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// The set of entity types appearing as placeholders.
    pub fn entity_types(&self) -> BTreeSet<&str> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Placeholder(name) => Some(name.as_str()),
                Segment::Literal(_) => None,
            })
            .collect()
    }

    /// Render the surface form: placeholders as `{EntityType}`, literal
    /// braces escaped as `{{` / `}}`. `parse` and `render` are exact
    /// inverses on valid template strings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => {
                    out.push_str(&s.replace('{', "{{").replace('}', "}}"));
                }
                Segment::Placeholder(name) => {
                    out.push('{');
                    out.push_str(name);
                    out.push('}');
                }
            }
        }
        out
    }

    /// Parse template surface syntax.
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let bytes = text.as_bytes();
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'{' if bytes.get(i + 1) == Some(&b'{') => {
                    literal.push('{');
                    i += 2;
                }
                b'}' if bytes.get(i + 1) == Some(&b'}') => {
                    literal.push('}');
                    i += 2;
                }
                b'{' => {
                    let close = text[i..].find('}').map(|off| i + off).ok_or_else(|| {
                        TemplateError::Syntax {
                            offset: i,
                            message: "unclosed placeholder".into(),
                        }
                    })?;
                    let name = &text[i + 1..close];
                    if !valid_entity_type(name) {
                        return Err(TemplateError::Syntax {
                            offset: i + 1,
                            message: format!("invalid entity type `{name}`"),
                        });
                    }
                    if !literal.is_empty() {
                        segments.push(Segment::Literal(std::mem::take(&mut literal)));
                    }
                    segments.push(Segment::Placeholder(name.to_string()));
                    i = close + 1;
                }
                b'}' => {
                    return Err(TemplateError::Syntax {
                        offset: i,
                        message: "unmatched `}` (escape literal braces as `}}`)".into(),
                    });
                }
                _ => {
                    let start = i;
                    i += 1;
                    while i < bytes.len() && !text.is_char_boundary(i) {
                        i += 1;
                    }
                    literal.push_str(&text[start..i]);
                }
            }
        }
        if !literal.is_empty() {
            segments.push(Segment::Literal(literal));
        }
        Ok(Template { segments })
    }

    /// Fill placeholders with binding values. The result carries the map.
    pub fn instantiate(&self, entities: &EntityMap) -> Result<LegalCase, TemplateError> {
        let mut text = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => text.push_str(s),
                Segment::Placeholder(name) => {
                    let value = entities
                        .get(name)
                        .ok_or_else(|| TemplateError::MissingBinding(name.clone()))?;
                    text.push_str(value);
                }
            }
        }
        Ok(LegalCase::with_entities(text, entities.clone()))
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Replace every occurrence of each binding value in the case text with its
/// typed placeholder.
///
/// Longer values are substituted first; among equal lengths, substitution
/// order is lexicographic by entity type. Already-inserted placeholders are
/// never rewritten. Matching is exact first; a binding with no exact
/// occurrence falls back to ASCII-case-insensitive matching (annotated
/// corpora routinely drift in sentence-initial capitalization, e.g. a case
/// opening with "Medical supplies" against the binding "medical supplies").
pub fn abstract_case(case: &LegalCase) -> Result<Template, TemplateError> {
    let entities = match &case.entities {
        Some(e) => e,
        None => return Template::from_segments(vec![Segment::Literal(case.text.clone())]),
    };

    let mut bindings: Vec<(&str, &str)> = entities.iter().collect();
    bindings.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));

    let mut segments = vec![Segment::Literal(case.text.clone())];
    for (entity_type, value) in bindings {
        let mut replaced_any = substitute(&mut segments, entity_type, value, false);
        if !replaced_any {
            replaced_any = substitute(&mut segments, entity_type, value, true);
        }
        if !replaced_any {
            return Err(TemplateError::EntityNotFound(entity_type.to_string()));
        }
    }
    Template::from_segments(segments)
}

/// Split literal segments on occurrences of `value`, inserting placeholders.
/// Returns whether anything matched.
fn substitute(segments: &mut Vec<Segment>, entity_type: &str, value: &str, ci: bool) -> bool {
    let mut out = Vec::with_capacity(segments.len());
    let mut matched = false;
    for seg in segments.drain(..) {
        match seg {
            Segment::Placeholder(_) => out.push(seg),
            Segment::Literal(text) => {
                let mut rest = text.as_str();
                loop {
                    match find_occurrence(rest, value, ci) {
                        Some(pos) => {
                            matched = true;
                            if pos > 0 {
                                out.push(Segment::Literal(rest[..pos].to_string()));
                            }
                            out.push(Segment::Placeholder(entity_type.to_string()));
                            rest = &rest[pos + value.len()..];
                        }
                        None => {
                            if !rest.is_empty() {
                                out.push(Segment::Literal(rest.to_string()));
                            }
                            break;
                        }
                    }
                }
            }
        }
    }
    *segments = out;
    matched
}

fn find_occurrence(haystack: &str, needle: &str, ci: bool) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    if !ci {
        return haystack.find(needle);
    }
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    (0..=h.len() - n.len()).find(|&i| {
        haystack.is_char_boundary(i)
            && haystack.is_char_boundary(i + n.len())
            && h[i..i + n.len()].eq_ignore_ascii_case(n)
    })
}
