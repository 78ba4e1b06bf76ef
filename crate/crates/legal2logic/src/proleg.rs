//! PROLEG fact formulas: parsing, canonical serialization, and structural
//! skeletons.
//!
//! A fact is one ground clause such as `lender("Emma").` — a lowercase
//! predicate applied to quoted entity strings and/or unquoted symbol
//! constants. The canonical surface form uses double quotes, no space after
//! commas, and a terminating period, so that `serialize(parse(s))` is a fixed
//! point under repeated parse/serialize passes.
//!
//! Fact-set text may also carry residual rule lines (anything containing
//! `:-` or `<=`, e.g. `demob :- block(...).`). These are not parsed as facts;
//! they are kept as canonicalized raw strings so they survive round trips and
//! participate in matching.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProlegError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("syntax error on line {line}: {message}")]
    SyntaxAtLine { line: usize, message: String },
}

impl ProlegError {
    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ProlegError::Syntax {
            offset,
            message: message.into(),
        }
    }

    /// Re-tag a fact-level error with the line it occurred on.
    fn at_line(self, line: usize) -> Self {
        match self {
            ProlegError::Syntax { message, offset } => ProlegError::SyntaxAtLine {
                line,
                message: format!("{message} (byte {offset} in line)"),
            },
            other => other,
        }
    }
}

/// One argument of a fact: a quoted entity string or an unquoted symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    /// Quoted string constant, e.g. `"The hospital"`. Interior characters are
    /// preserved exactly.
    Entity(String),
    /// Unquoted identifier constant, e.g. `lease78`.
    Symbol(String),
}

impl Arg {
    /// The surface string an argument contributes as an entity mention.
    pub fn surface(&self) -> &str {
        match self {
            Arg::Entity(s) | Arg::Symbol(s) => s,
        }
    }
}

/// A single PROLEG fact: predicate plus ordered arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<Arg>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: Vec<Arg>) -> Self {
        Fact {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_fact(self))
    }
}

/// A fact with entity information removed: predicate and arity only.
///
/// Two facts that differ only in their arguments share a skeleton. Rendered
/// with positional placeholders: `owned_by(<1>,<2>).`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactSkeleton {
    pub predicate: String,
    pub arity: usize,
}

impl FactSkeleton {
    /// Positional placeholders `<1>..<arity>`.
    pub fn placeholder_args(&self) -> Vec<String> {
        (1..=self.arity).map(|i| format!("<{i}>")).collect()
    }

    pub fn render(&self) -> String {
        if self.arity == 0 {
            format!("{}.", self.predicate)
        } else {
            format!("{}({}).", self.predicate, self.placeholder_args().join(","))
        }
    }
}

impl fmt::Display for FactSkeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// An ordered collection of facts plus any residual rule lines.
///
/// Source order is preserved; duplicates are kept and counted in the multiset
/// view.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet {
    pub facts: Vec<Fact>,
    /// Lines containing `:-` or `<=`, kept as canonicalized raw strings.
    pub rule_lines: Vec<String>,
}

impl FactSet {
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rule_lines.is_empty()
    }

    pub fn len(&self) -> usize {
        self.facts.len() + self.rule_lines.len()
    }

    /// Canonical line strings: facts in source order, then rule lines.
    pub fn canonical_lines(&self) -> Vec<String> {
        self.facts
            .iter()
            .map(serialize_fact)
            .chain(self.rule_lines.iter().cloned())
            .collect()
    }

    /// Multiset view over canonical lines (facts and rule lines alike),
    /// mapping each canonical string to its multiplicity.
    pub fn set_view(&self) -> BTreeMap<String, usize> {
        let mut view = BTreeMap::new();
        for line in self.canonical_lines() {
            *view.entry(line).or_insert(0) += 1;
        }
        view
    }
}

impl fmt::Display for FactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_fact_set(self))
    }
}

/// Annotated rule text, kept verbatim. Rules are never executed; the head
/// predicates are extracted best-effort for reporting only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleText {
    pub raw: String,
    pub head_predicates: Vec<String>,
}

impl RuleText {
    /// Wrap raw rule text, extracting clause-head predicates where the text
    /// looks like `head(...) <= body` or `head :- body`. Never fails: rules
    /// that do not parse simply contribute no heads.
    pub fn parse(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let mut heads = Vec::new();
        for clause in split_clauses(&raw) {
            if let Some(head) = clause_head(&clause) {
                if !heads.contains(&head) {
                    heads.push(head);
                }
            }
        }
        RuleText {
            raw,
            head_predicates: heads,
        }
    }
}

/// Split rule text into clauses on periods outside quotes.
fn split_clauses(raw: &str) -> Vec<String> {
    let mut clauses = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    for ch in raw.chars() {
        match quote {
            Some(q) => {
                current.push(ch);
                if ch == q {
                    quote = None;
                }
            }
            None => match ch {
                '"' | '\'' => {
                    quote = Some(ch);
                    current.push(ch);
                }
                '.' => {
                    if !current.trim().is_empty() {
                        clauses.push(current.trim().to_string());
                    }
                    current.clear();
                }
                _ => current.push(ch),
            },
        }
    }
    if !current.trim().is_empty() {
        clauses.push(current.trim().to_string());
    }
    clauses
}

fn clause_head(clause: &str) -> Option<String> {
    let op = clause.find("<=").or_else(|| clause.find(":-"))?;
    let head_part = clause[..op].trim();
    let name_end = head_part.find('(').unwrap_or(head_part.len());
    let name = head_part[..name_end].trim();
    let mut chars = name.chars();
    let first = chars.next()?;
    if first.is_ascii_lowercase() && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Some(name.to_string())
    } else {
        None
    }
}

// --- parsing ---------------------------------------------------------------

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn identifier(&mut self) -> Result<String, ProlegError> {
        let start = self.pos;
        match self.peek() {
            Some(b) if b.is_ascii_lowercase() => {
                self.pos += 1;
            }
            _ => return Err(ProlegError::syntax(start, "expected predicate")),
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn quoted(&mut self, quote: u8) -> Result<String, ProlegError> {
        let open = self.pos;
        self.pos += 1; // opening quote
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(ProlegError::syntax(open, "unterminated quoted string")),
                Some(b'\\') if self.peek() == Some(quote) => {
                    value.push(quote as char);
                    self.pos += 1;
                }
                Some(b) if b == quote => return Ok(value),
                Some(_) => {
                    // Push the full UTF-8 character that starts at pos-1.
                    let start = self.pos - 1;
                    while self.pos < self.bytes.len() && !self.text.is_char_boundary(self.pos) {
                        self.pos += 1;
                    }
                    value.push_str(&self.text[start..self.pos]);
                }
            }
        }
    }

    fn symbol(&mut self) -> Result<String, ProlegError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ProlegError::syntax(start, "expected argument"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn arg(&mut self) -> Result<Arg, ProlegError> {
        self.skip_ws();
        match self.peek() {
            Some(q @ (b'"' | b'\'')) => self.quoted(q).map(Arg::Entity),
            _ => self.symbol().map(Arg::Symbol),
        }
    }
}

/// Parse one fact clause, e.g. `borrower("The hospital").`
///
/// Surrounding whitespace is ignored and the terminating period is optional.
/// Single-quoted strings are accepted and canonicalized to double quotes.
pub fn parse_fact(text: &str) -> Result<Fact, ProlegError> {
    let mut s = Scanner::new(text);
    s.skip_ws();
    let predicate = s.identifier()?;
    let mut args = Vec::new();
    s.skip_ws();
    if s.peek() == Some(b'(') {
        let open = s.pos;
        s.pos += 1;
        s.skip_ws();
        if s.peek() == Some(b')') {
            s.pos += 1;
        } else {
            loop {
                args.push(s.arg()?);
                s.skip_ws();
                match s.bump() {
                    Some(b',') => continue,
                    Some(b')') => break,
                    Some(_) => {
                        return Err(ProlegError::syntax(s.pos - 1, "expected `,` or `)`"));
                    }
                    None => return Err(ProlegError::syntax(open, "unbalanced parenthesis")),
                }
            }
        }
    }
    s.skip_ws();
    if s.peek() == Some(b'.') {
        s.pos += 1;
        s.skip_ws();
    }
    if !s.at_end() {
        return Err(ProlegError::syntax(s.pos, "trailing garbage after fact"));
    }
    Ok(Fact { predicate, args })
}

/// Canonical serialization: `pred("a","b").` — double quotes, no space after
/// commas, terminating period. Zero-arity facts render without parens.
pub fn serialize_fact(f: &Fact) -> String {
    if f.args.is_empty() {
        return format!("{}.", f.predicate);
    }
    let args = f
        .args
        .iter()
        .map(|a| match a {
            Arg::Entity(s) => format!("\"{}\"", s.replace('"', "\\\"")),
            Arg::Symbol(s) => s.clone(),
        })
        .collect::<Vec<_>>()
        .join(",");
    format!("{}({}).", f.predicate, args)
}

/// Parse newline-separated fact clauses. Blank lines and `%` comment lines
/// are skipped; lines containing `:-` or `<=` are routed to
/// [`FactSet::rule_lines`] as canonicalized raw strings.
pub fn parse_fact_set(text: &str) -> Result<FactSet, ProlegError> {
    let mut set = FactSet::default();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if is_rule_line(trimmed) {
            set.rule_lines.push(canonicalize_rule_line(trimmed));
            continue;
        }
        let fact = parse_fact(trimmed).map_err(|e| e.at_line(idx + 1))?;
        set.facts.push(fact);
    }
    Ok(set)
}

/// Canonical fact-set serialization: one canonical line per fact in source
/// order, then rule lines, joined with `\n`.
pub fn serialize_fact_set(fs: &FactSet) -> String {
    fs.canonical_lines().join("\n")
}

fn is_rule_line(line: &str) -> bool {
    let mut quote: Option<char> = None;
    let chars: Vec<char> = line.chars().collect();
    for i in 0..chars.len() {
        let ch = chars[i];
        match quote {
            Some(q) => {
                if ch == q {
                    quote = None;
                }
            }
            None => match ch {
                '"' | '\'' => quote = Some(ch),
                ':' if chars.get(i + 1) == Some(&'-') => return true,
                '<' if chars.get(i + 1) == Some(&'=') => return true,
                _ => {}
            },
        }
    }
    false
}

/// Normalize a rule line to one fixed spelling so equal rules compare equal:
/// single-quoted strings become double-quoted, whitespace outside quotes is
/// collapsed, `:-`/`<=` keep one space on each side, no space around commas
/// or inside parens, and a terminating period is ensured.
pub fn canonicalize_rule_line(line: &str) -> String {
    #[derive(PartialEq)]
    enum Tok {
        Word(String),
        Quoted(String),
        Punct(char),
        Op(&'static str),
    }

    let chars: Vec<char> = line.trim().chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '"' | '\'' => {
                let quote = ch;
                let mut value = String::new();
                i += 1;
                while i < chars.len() {
                    if chars[i] == '\\' && chars.get(i + 1) == Some(&quote) {
                        value.push(quote);
                        i += 2;
                    } else if chars[i] == quote {
                        i += 1;
                        break;
                    } else {
                        value.push(chars[i]);
                        i += 1;
                    }
                }
                toks.push(Tok::Quoted(value));
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                toks.push(Tok::Op(":-"));
                i += 2;
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                toks.push(Tok::Op("<="));
                i += 2;
            }
            '(' | ')' | ',' | '.' => {
                toks.push(Tok::Punct(ch));
                i += 1;
            }
            _ => {
                let mut word = String::new();
                while i < chars.len() {
                    let c = chars[i];
                    if c.is_whitespace()
                        || matches!(c, '"' | '\'' | '(' | ')' | ',' | '.')
                        || (c == ':' && chars.get(i + 1) == Some(&'-'))
                        || (c == '<' && chars.get(i + 1) == Some(&'='))
                    {
                        break;
                    }
                    word.push(c);
                    i += 1;
                }
                toks.push(Tok::Word(word));
            }
        }
    }

    // Drop trailing periods; one is re-added at the end.
    while matches!(toks.last(), Some(Tok::Punct('.'))) {
        toks.pop();
    }

    let mut out = String::new();
    for (idx, tok) in toks.iter().enumerate() {
        let sep = if idx == 0 {
            ""
        } else {
            match (&toks[idx - 1], tok) {
                (_, Tok::Op(_)) | (Tok::Op(_), _) => " ",
                (_, Tok::Punct(_)) => "",
                (Tok::Punct('('), _) | (Tok::Punct(','), _) => "",
                (Tok::Punct(_), _) => " ",
                _ => " ",
            }
        };
        out.push_str(sep);
        match tok {
            Tok::Word(w) => out.push_str(w),
            Tok::Quoted(v) => {
                out.push('"');
                out.push_str(&v.replace('"', "\\\""));
                out.push('"');
            }
            Tok::Punct(p) => out.push(*p),
            Tok::Op(op) => out.push_str(op),
        }
    }
    out.push('.');
    out
}

/// Structural form of a fact: entity information removed.
pub fn struct_of(f: &Fact) -> FactSkeleton {
    FactSkeleton {
        predicate: f.predicate.clone(),
        arity: f.args.len(),
    }
}

/// Skeletons of every fact, in source order. Rule lines contribute no
/// skeletons; they are compared whole as entity-free structural tokens.
pub fn struct_of_set(fs: &FactSet) -> Vec<FactSkeleton> {
    fs.facts.iter().map(struct_of).collect()
}
