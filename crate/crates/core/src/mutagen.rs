//! A small line-based mutant generator.
//!
//! Each changed line gets at most one mutant. Operators are tried in a seeded
//! random order and the first one with a candidate on the line wins:
//!
//! - `AOR` swaps a binary arithmetic operator (`+ - * / %`).
//! - `LCR` swaps `&&`/`||` or `and`/`or`.
//! - `ROR` swaps a relational operator, or replaces a condition with a constant.
//! - `UOI` negates a boolean literal or a condition.
//! - `SBR` deletes a self-contained statement line.
//!
//! Lines are tokenized after comment stripping; lines whose code is broken up
//! by an inline block comment are left alone.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diff_model::MutantRecord;
use crate::error::{Error, Result};
use crate::lang_profile::{strip_comments, tokenize_spanned, LanguageProfile, SpannedToken, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationOperator {
    Aor,
    Lcr,
    Ror,
    Uoi,
    Sbr,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 5] = [
        MutationOperator::Aor,
        MutationOperator::Lcr,
        MutationOperator::Ror,
        MutationOperator::Uoi,
        MutationOperator::Sbr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationOperator::Aor => "AOR",
            MutationOperator::Lcr => "LCR",
            MutationOperator::Ror => "ROR",
            MutationOperator::Uoi => "UOI",
            MutationOperator::Sbr => "SBR",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MutationOperator::ALL
            .into_iter()
            .find(|op| op.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::input(format!("unknown mutation operator `{s}`")))
    }
}

/// One candidate rewrite of a line; `None` deletes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineMutation {
    pub operator: MutationOperator,
    pub replacement: Option<String>,
}

const ARITHMETIC: [&str; 5] = ["+", "-", "*", "/", "%"];
const RELATIONAL: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];
const CONDITION_KEYWORDS: [&str; 3] = ["if", "elif", "while"];

fn splice(line: &str, start: usize, end: usize, with: &str) -> String {
    format!("{}{}{}", &line[..start], with, &line[end..])
}

fn is_operand_end(t: &SpannedToken) -> bool {
    matches!(
        t.token.kind,
        TokenKind::Identifier
            | TokenKind::IntLit
            | TokenKind::FloatLit
            | TokenKind::StringLit
            | TokenKind::CharLit
            | TokenKind::BoolLit
    ) || (t.token.kind == TokenKind::Punct && matches!(t.token.text.as_str(), ")" | "]"))
}

/// Byte range of the condition following `if`/`elif`/`while`: the contents of
/// a parenthesized head, or everything up to a trailing `{` or `:`.
fn condition_span(line: &str, tokens: &[SpannedToken]) -> Option<(usize, usize)> {
    let head = tokens
        .iter()
        .position(|t| t.token.kind == TokenKind::Keyword && CONDITION_KEYWORDS.contains(&t.token.text.as_str()))?;
    let rest = &tokens[head + 1..];
    let first = rest.first()?;
    if first.token.is(TokenKind::Punct, "(") {
        let mut depth = 0usize;
        for (i, t) in rest.iter().enumerate() {
            match t.token.text.as_str() {
                "(" if t.token.kind == TokenKind::Punct => depth += 1,
                ")" if t.token.kind == TokenKind::Punct => {
                    depth -= 1;
                    if depth == 0 {
                        return (i > 1).then(|| (rest[1].start, rest[i - 1].end()));
                    }
                }
                _ => {}
            }
        }
        return None;
    }
    let close = rest
        .iter()
        .position(|t| t.token.kind == TokenKind::Punct && matches!(t.token.text.as_str(), "{" | ":"))?;
    (close > 0).then(|| (first.start, rest[close - 1].end())).filter(|&(s, e)| s < e && e <= line.len())
}

fn negate(profile: &LanguageProfile, inner: &str) -> String {
    if profile.is_keyword("not") {
        format!("not ({inner})")
    } else {
        format!("!({inner})")
    }
}

/// Brackets balance and the line is not a block opener or closer.
fn is_removable_statement(tokens: &[SpannedToken]) -> bool {
    let mut depth: i64 = 0;
    for t in tokens {
        if t.token.kind != TokenKind::Punct {
            continue;
        }
        match t.token.text.as_str() {
            "{" | "(" | "[" => depth += 1,
            "}" | ")" | "]" => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    let Some(last) = tokens.last() else {
        return false;
    };
    depth == 0
        && !last.token.is(TokenKind::Punct, ":")
        && !(tokens.len() == 1 && last.token.kind == TokenKind::Punct)
        && !tokens[0].token.is(TokenKind::Keyword, "else")
}

/// All candidates `op` can produce on `line`.
pub fn mutations_for_line(line: &str, op: MutationOperator, profile: &LanguageProfile) -> Vec<LineMutation> {
    let stripped = strip_comments(&[line], profile).lines.remove(0);
    if !line.starts_with(&stripped) {
        return Vec::new();
    }
    let tokens = tokenize_spanned(&stripped, profile).tokens;
    if tokens.is_empty() {
        return Vec::new();
    }
    let mutation = |replacement: Option<String>| LineMutation { operator: op, replacement };
    let mut out = Vec::new();
    match op {
        MutationOperator::Aor => {
            for (i, t) in tokens.iter().enumerate() {
                if t.token.kind == TokenKind::Operator
                    && ARITHMETIC.contains(&t.token.text.as_str())
                    && i > 0
                    && is_operand_end(&tokens[i - 1])
                {
                    for other in ARITHMETIC.iter().filter(|o| **o != t.token.text) {
                        out.push(mutation(Some(splice(line, t.start, t.end(), other))));
                    }
                }
            }
        }
        MutationOperator::Lcr => {
            for t in &tokens {
                let swap = match (t.token.kind, t.token.text.as_str()) {
                    (TokenKind::Operator, "&&") => "||",
                    (TokenKind::Operator, "||") => "&&",
                    (TokenKind::Keyword, "and") => "or",
                    (TokenKind::Keyword, "or") => "and",
                    _ => continue,
                };
                out.push(mutation(Some(splice(line, t.start, t.end(), swap))));
            }
        }
        MutationOperator::Ror => {
            let mut has_relational = false;
            for t in &tokens {
                if t.token.kind == TokenKind::Operator && RELATIONAL.contains(&t.token.text.as_str()) {
                    has_relational = true;
                    for other in RELATIONAL.iter().filter(|o| **o != t.token.text) {
                        out.push(mutation(Some(splice(line, t.start, t.end(), other))));
                    }
                }
            }
            if has_relational {
                if let Some((s, e)) = condition_span(line, &tokens) {
                    for value in [true, false] {
                        out.push(mutation(Some(splice(line, s, e, profile.bool_constant(value)))));
                    }
                }
            }
        }
        MutationOperator::Uoi => {
            for t in tokens.iter().filter(|t| t.token.kind == TokenKind::BoolLit) {
                out.push(mutation(Some(splice(line, t.start, t.end(), &negate(profile, &t.token.text)))));
            }
            if let Some((s, e)) = condition_span(line, &tokens) {
                out.push(mutation(Some(splice(line, s, e, &negate(profile, &line[s..e])))));
            }
        }
        MutationOperator::Sbr => {
            if is_removable_statement(&tokens) {
                out.push(mutation(None));
            }
        }
    }
    out
}

/// Tries operators in a random order and picks one candidate of the first
/// operator that has any.
pub fn mutate_line<R: Rng + ?Sized>(line: &str, profile: &LanguageProfile, rng: &mut R) -> Option<LineMutation> {
    let mut order = MutationOperator::ALL;
    order.shuffle(rng);
    order.into_iter().find_map(|op| {
        let candidates = mutations_for_line(line, op, profile);
        candidates.choose(rng).cloned()
    })
}

/// Unified diff of a single-line change with one line of context each side.
pub fn mutation_diff(source: &[String], index: usize, replacement: Option<&str>) -> String {
    let mut lines = Vec::with_capacity(4);
    if index > 0 {
        lines.push(format!(" {}", source[index - 1]));
    }
    lines.push(format!("-{}", source[index]));
    if let Some(new) = replacement {
        lines.push(format!("+{new}"));
    }
    if index + 1 < source.len() {
        lines.push(format!(" {}", source[index + 1]));
    }
    lines.join("\n")
}

/// Generates at most one mutant per changed line (1-based line numbers).
pub fn generate_mutants<R: Rng + ?Sized>(
    source: &[String],
    changed_lines: &BTreeSet<usize>,
    profile: &LanguageProfile,
    filename: &str,
    changelist_id: &str,
    rng: &mut R,
) -> Result<Vec<MutantRecord>> {
    if let Some(&bad) = changed_lines.iter().find(|&&n| n == 0 || n > source.len()) {
        return Err(Error::input(format!("changed line {bad} is outside 1..={}", source.len())));
    }
    let mut out = Vec::new();
    for &line_no in changed_lines {
        let index = line_no - 1;
        let Some(m) = mutate_line(&source[index], profile, rng) else {
            continue;
        };
        out.push(MutantRecord {
            mutant_id: format!("{filename}:{line_no}:{}", m.operator),
            changelist_id: changelist_id.to_owned(),
            filename: filename.to_owned(),
            language: profile.language,
            diff: mutation_diff(source, index, m.replacement.as_deref()),
            pos_feedback: vec![false],
            neg_feedback: vec![false],
            killed: vec![false],
            operator: Some(m.operator),
            timestamp: None,
        });
    }
    Ok(out)
}

/// Parses `1,3,7-9` into a line set.
pub fn parse_changed_lines(spec: &str) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::input(format!("invalid line number `{s}` in `{spec}`")))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(Error::input(format!("empty line range `{part}`")));
                }
                out.extend(a..=b);
            }
            None => {
                out.insert(num(part)?);
            }
        }
    }
    Ok(out)
}
