//! Identifier templates.
//!
//! A template is rendered from a mutant's diff in four steps: comments are
//! stripped from the old and new sides, blank lines are dropped, each hunk is
//! trimmed to the configured context size, and every remaining line is
//! tokenized and re-rendered at one of three abstraction levels:
//!
//! - `original`: tokens verbatim.
//! - `typed`: identifiers become `IDENTIFIER`, literals their type name
//!   (`INT`, `FLOAT`, `STRING`, `CHAR`). Keywords, operators, punctuation and
//!   boolean literals are kept.
//! - `indexed`: like `typed`, but each distinct text gets a per-type index by
//!   first appearance across the window, prefixed with the language:
//!   `GO_IDENTIFIER_0`, `PYTHON_INT_1`.
//!
//! Tokens listed in the [`Vocabulary`] are kept verbatim at every level.
//!
//! Spacing is canonical and independent of the source formatting: a single
//! space separates tokens except around member access (`a.b`, `a::b`),
//! after opening brackets, unary operators and `@`, before closing brackets
//! and separators, and between a callee and its argument list (`f(x)`,
//! while `if (x)` keeps its space).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::diff_model::{extract_window, parse_unified_diff, DiffHunk, MutantRecord};
use crate::error::{Diagnostic, Error, Result};
use crate::lang_profile::{strip_comments, tokenize_spanned, Language, LanguageProfile, ProfileSet, Token, TokenKind};

/// Rendered when nothing but comments or blank lines changed.
pub const EMPTY_TEMPLATE: &str = "-<EMPTY>";
/// Separates hunks in multi-hunk templates.
pub const HUNK_SEPARATOR: &str = "@@";

pub const GRID_CONTEXT_SIZES: [usize; 2] = [0, 1];
pub const GRID_VOCABULARY_SIZES: [usize; 4] = [0, 1000, 5000, 10000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Abstraction {
    OriginalCode,
    Typed,
    IndexedTyped,
}

impl Abstraction {
    pub const ALL: [Abstraction; 3] = [Abstraction::OriginalCode, Abstraction::Typed, Abstraction::IndexedTyped];

    pub fn as_str(self) -> &'static str {
        match self {
            Abstraction::OriginalCode => "original",
            Abstraction::Typed => "typed",
            Abstraction::IndexedTyped => "indexed",
        }
    }
}

impl fmt::Display for Abstraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Abstraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Abstraction::OriginalCode),
            "typed" => Ok(Abstraction::Typed),
            "indexed" => Ok(Abstraction::IndexedTyped),
            _ => Err(Error::input(format!("unknown template type `{s}` (expected original, typed or indexed)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateConfig {
    pub abstraction: Abstraction,
    pub vocabulary_size: usize,
    pub context_size: usize,
}

impl TemplateConfig {
    pub fn new(abstraction: Abstraction, context_size: usize, vocabulary_size: usize) -> Self {
        TemplateConfig {
            abstraction,
            vocabulary_size,
            context_size,
        }
    }

    /// Warnings for values outside the explored grid. Such values still work.
    pub fn grid_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !GRID_CONTEXT_SIZES.contains(&self.context_size) {
            out.push(format!("context size {} is outside the tuned grid {:?}", self.context_size, GRID_CONTEXT_SIZES));
        }
        if !GRID_VOCABULARY_SIZES.contains(&self.vocabulary_size) {
            out.push(format!(
                "vocabulary size {} is outside the tuned grid {:?}",
                self.vocabulary_size, GRID_VOCABULARY_SIZES
            ));
        }
        out
    }
}

impl Default for TemplateConfig {
    /// Indexed typed, no context, empty vocabulary.
    fn default() -> Self {
        TemplateConfig::new(Abstraction::IndexedTyped, 0, 0)
    }
}

/// Identifier and literal texts that are never abstracted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    set: HashSet<String>,
    size: usize,
}

impl Vocabulary {
    pub fn empty() -> Self {
        Vocabulary::default()
    }

    /// Fails when more tokens than `size` are given or a token repeats.
    pub fn new(tokens: Vec<String>, size: usize) -> Result<Self> {
        if tokens.len() > size {
            return Err(Error::input(format!("{} vocabulary tokens exceed size {size}", tokens.len())));
        }
        let set: HashSet<String> = tokens.iter().cloned().collect();
        if set.len() != tokens.len() {
            return Err(Error::input("vocabulary tokens must be distinct"));
        }
        Ok(Vocabulary { tokens, set, size })
    }

    pub fn contains(&self, text: &str) -> bool {
        self.set.contains(text)
    }

    /// Kept tokens, most frequent first.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateKey {
    pub language: Language,
    pub text: String,
}

impl TemplateKey {
    pub fn new(language: Language, text: impl Into<String>) -> Self {
        TemplateKey {
            language,
            text: text.into(),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        !self.text.is_empty()
            && self
                .text
                .split('\n')
                .all(|l| l.starts_with('-') || l.starts_with('+') || l.starts_with(' ') || l.starts_with(HUNK_SEPARATOR))
    }
}

impl fmt::Display for TemplateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.language, self.text)
    }
}

/// A diff after comment stripping and tokenization; reusable across
/// template configurations.
#[derive(Debug, Clone)]
pub struct PreparedDiff {
    pub language: Language,
    /// Hunks whose lines are non-empty token sequences.
    pub hunks: Vec<DiffHunk<Vec<Token>>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl PreparedDiff {
    pub fn new(diff: &str, profile: &LanguageProfile) -> Result<Self> {
        let raw = parse_unified_diff(diff)?;
        let mut diagnostics = Vec::new();
        let mut hunks = Vec::with_capacity(raw.len());

        for hunk in raw {
            let nb = hunk.context_before.len();
            let nr = hunk.removed.len();
            let na = hunk.added.len();
            let old_side: Vec<&String> = hunk.context_before.iter().chain(&hunk.removed).chain(&hunk.context_after).collect();
            let new_side: Vec<&String> = hunk.context_before.iter().chain(&hunk.added).chain(&hunk.context_after).collect();
            let old = strip_comments(&old_side, profile);
            let new = strip_comments(&new_side, profile);
            diagnostics.extend(old.diagnostics);
            diagnostics.extend(new.diagnostics);

            let mut lex = |lines: &[String]| -> Vec<Vec<Token>> {
                lines
                    .iter()
                    .map(|l| {
                        let lexed = tokenize_spanned(l, profile);
                        diagnostics.extend(lexed.diagnostics);
                        lexed.tokens.into_iter().map(|t| t.token).collect::<Vec<_>>()
                    })
                    .filter(|toks| !toks.is_empty())
                    .collect()
            };
            let prepared = DiffHunk {
                context_before: lex(&old.lines[..nb]),
                removed: lex(&old.lines[nb..nb + nr]),
                added: lex(&new.lines[nb..nb + na]),
                context_after: lex(&new.lines[nb + na..]),
            };
            if prepared.has_changes() {
                hunks.push(prepared);
            }
        }

        Ok(PreparedDiff {
            language: profile.language,
            hunks,
            diagnostics,
        })
    }

    pub fn from_record(record: &MutantRecord, profiles: &ProfileSet) -> Result<Self> {
        Self::new(&record.diff, profiles.get(record.language))
    }

    /// Identifier and literal texts of every distinct diff line.
    pub fn abstractable_texts(&self) -> impl Iterator<Item = &str> {
        let mut previous_after: Option<&Vec<Vec<Token>>> = None;
        let mut lines: Vec<&Vec<Token>> = Vec::new();
        for hunk in &self.hunks {
            if previous_after != Some(&hunk.context_before) {
                lines.extend(&hunk.context_before);
            }
            lines.extend(&hunk.removed);
            lines.extend(&hunk.added);
            lines.extend(&hunk.context_after);
            previous_after = Some(&hunk.context_after);
        }
        lines
            .into_iter()
            .flatten()
            .filter(|t| t.kind.is_abstractable())
            .map(|t| t.text.as_str())
    }

    pub fn render(&self, config: &TemplateConfig, vocab: &Vocabulary) -> TemplateKey {
        let window = extract_window(&self.hunks, config.context_size);
        if window.hunks.is_empty() {
            return TemplateKey::new(self.language, EMPTY_TEMPLATE);
        }
        let mut renderer = Renderer::new(self.language, config.abstraction, vocab);
        let mut out = String::new();
        for (i, hunk) in window.hunks.iter().enumerate() {
            if i > 0 {
                out.push('\n');
                out.push_str(HUNK_SEPARATOR);
            }
            let lines = hunk
                .context_before
                .iter()
                .map(|l| (' ', l))
                .chain(hunk.removed.iter().map(|l| ('-', l)))
                .chain(hunk.added.iter().map(|l| ('+', l)))
                .chain(hunk.context_after.iter().map(|l| (' ', l)));
            for (prefix, tokens) in lines {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push(prefix);
                renderer.render_line(tokens, &mut out);
            }
        }
        TemplateKey::new(self.language, out)
    }
}

struct Renderer<'v> {
    language: Language,
    abstraction: Abstraction,
    vocab: &'v Vocabulary,
    indices: HashMap<(&'static str, String), usize>,
    next_index: HashMap<&'static str, usize>,
}

fn type_name(kind: TokenKind) -> Option<&'static str> {
    match kind {
        TokenKind::Identifier => Some("IDENTIFIER"),
        TokenKind::IntLit => Some("INT"),
        TokenKind::FloatLit => Some("FLOAT"),
        TokenKind::StringLit => Some("STRING"),
        TokenKind::CharLit => Some("CHAR"),
        _ => None,
    }
}

impl<'v> Renderer<'v> {
    fn new(language: Language, abstraction: Abstraction, vocab: &'v Vocabulary) -> Self {
        Renderer {
            language,
            abstraction,
            vocab,
            indices: HashMap::new(),
            next_index: HashMap::new(),
        }
    }

    fn render_line(&mut self, tokens: &[Token], out: &mut String) {
        for (i, token) in tokens.iter().enumerate() {
            if i > 0 && needs_space(i.checked_sub(2).map(|j| &tokens[j]), &tokens[i - 1], token) {
                out.push(' ');
            }
            self.render_token(token, out);
        }
    }

    fn render_token(&mut self, token: &Token, out: &mut String) {
        let name = match type_name(token.kind) {
            Some(name) if self.abstraction != Abstraction::OriginalCode && !self.vocab.contains(&token.text) => name,
            _ => {
                out.push_str(&token.text);
                return;
            }
        };
        if self.abstraction == Abstraction::Typed {
            out.push_str(name);
            return;
        }
        let next = self.next_index.entry(name).or_insert(0);
        let index = *self.indices.entry((name, token.text.clone())).or_insert_with(|| {
            *next += 1;
            *next - 1
        });
        out.push_str(self.language.as_str());
        out.push('_');
        out.push_str(name);
        out.push('_');
        out.push_str(&index.to_string());
    }
}

fn is_punct(t: &Token, texts: &[&str]) -> bool {
    t.kind == TokenKind::Punct && texts.contains(&t.text.as_str())
}

fn is_op(t: &Token, texts: &[&str]) -> bool {
    t.kind == TokenKind::Operator && texts.contains(&t.text.as_str())
}

/// Whether `prev` is a prefix (unary) operator given the token before it.
fn is_prefix_operator(before: Option<&Token>, prev: &Token) -> bool {
    if is_op(prev, &["!", "~"]) {
        return true;
    }
    if !is_op(prev, &["-", "+", "*", "&", "++", "--"]) {
        return false;
    }
    match before {
        None => true,
        Some(b) => {
            b.kind == TokenKind::Operator
                || b.kind == TokenKind::Keyword
                || is_punct(b, &["(", "[", "{", ",", ";", ":", "@"])
        }
    }
}

fn is_operand_end(t: &Token) -> bool {
    matches!(
        t.kind,
        TokenKind::Identifier | TokenKind::StringLit | TokenKind::IntLit | TokenKind::FloatLit | TokenKind::CharLit
    ) || is_punct(t, &[")", "]"])
}

fn needs_space(before: Option<&Token>, prev: &Token, next: &Token) -> bool {
    if is_punct(next, &[")", "]", ",", ";", ".", ":"]) || is_op(next, &["::", "?."]) {
        return false;
    }
    if is_punct(prev, &["(", "[", ".", "@"]) || is_op(prev, &["::", "?."]) {
        return false;
    }
    if is_prefix_operator(before, prev) {
        return false;
    }
    if is_op(next, &["++", "--"]) && is_operand_end(prev) {
        return false;
    }
    if is_punct(next, &["(", "["]) && is_operand_end(prev) {
        return false;
    }
    true
}

/// Renders `record`'s template.
pub fn build_template(
    record: &MutantRecord,
    config: &TemplateConfig,
    vocab: &Vocabulary,
    profiles: &ProfileSet,
) -> Result<TemplateKey> {
    Ok(PreparedDiff::from_record(record, profiles)?.render(config, vocab))
}

/// Frequency of every identifier and literal text.
pub fn token_frequencies<'a>(prepared: impl IntoIterator<Item = &'a PreparedDiff>) -> HashMap<String, u64> {
    let mut freq: HashMap<String, u64> = HashMap::new();
    for diff in prepared {
        for text in diff.abstractable_texts() {
            match freq.get_mut(text) {
                Some(n) => *n += 1,
                None => {
                    freq.insert(text.to_owned(), 1);
                }
            }
        }
    }
    freq
}

/// The `size` most frequent texts; ties go to the lexicographically smaller text.
pub fn vocabulary_from_frequencies(freq: &HashMap<String, u64>, size: usize) -> Vocabulary {
    let mut ranked: Vec<(&String, &u64)> = freq.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let tokens = ranked.into_iter().take(size).map(|(t, _)| t.clone()).collect();
    Vocabulary::new(tokens, size).expect("top-k of distinct keys")
}

/// Vocabulary over every parseable record; unparseable diffs are skipped.
pub fn build_vocabulary(records: &[MutantRecord], size: usize, profiles: &ProfileSet) -> Vocabulary {
    if size == 0 {
        return Vocabulary::new(Vec::new(), 0).expect("empty");
    }
    let prepared: Vec<PreparedDiff> = records
        .iter()
        .filter_map(|r| PreparedDiff::from_record(r, profiles).ok())
        .collect();
    vocabulary_from_frequencies(&token_frequencies(&prepared), size)
}
