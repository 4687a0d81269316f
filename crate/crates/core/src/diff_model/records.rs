//! The line-delimited mutant record format.
//!
//! One record per line. Fields are `key=value` pairs separated by tabs.
//! Values escape backslash, newline, carriage return and tab as `\\`, `\n`,
//! `\r` and `\t`. Snapshot lists are strings of `0`/`1` characters.
//!
//! Required keys: `mutant_id changelist_id filename language diff pos_feed
//! neg_feed killed`. Optional keys: `operator` (AOR, LCR, ROR, UOI, SBR) and
//! `timestamp` (ISO 8601, only the `YYYY-MM` prefix is interpreted). Unknown
//! keys are ignored. Blank lines and lines starting with `#` are not records.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use super::parse_unified_diff;
use crate::error::{Diagnostic, Error, Result};
use crate::lang_profile::Language;
use crate::mutagen::MutationOperator;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutantRecord {
    pub mutant_id: String,
    pub changelist_id: String,
    pub filename: String,
    pub language: Language,
    pub diff: String,
    /// One entry per snapshot.
    pub pos_feedback: Vec<bool>,
    pub neg_feedback: Vec<bool>,
    pub killed: Vec<bool>,
    pub operator: Option<MutationOperator>,
    pub timestamp: Option<String>,
}

impl MutantRecord {
    /// Checks the record invariants: equal non-empty snapshot lists and at
    /// least one changed line in a parseable diff.
    pub fn validate(&self) -> Result<()> {
        if self.mutant_id.is_empty() {
            return Err(Error::input("empty mutant_id"));
        }
        if self.pos_feedback.is_empty() {
            return Err(Error::input("empty snapshot lists"));
        }
        if self.pos_feedback.len() != self.neg_feedback.len() || self.pos_feedback.len() != self.killed.len() {
            return Err(Error::input(format!(
                "snapshot length mismatch (pos_feed {}, neg_feed {}, killed {})",
                self.pos_feedback.len(),
                self.neg_feedback.len(),
                self.killed.len()
            )));
        }
        let hunks = parse_unified_diff(&self.diff)
            .map_err(|e| Error::input(format!("diff: {e}")))?;
        if hunks.is_empty() {
            return Err(Error::input("empty diff (no changed lines)"));
        }
        if let Some(ts) = &self.timestamp {
            if month_of(ts).is_none() {
                return Err(Error::input(format!("timestamp `{ts}` does not start with YYYY-MM")));
            }
        }
        Ok(())
    }

    /// `YYYY-MM` of the timestamp, when present.
    pub fn month(&self) -> Option<&str> {
        self.timestamp.as_deref().and_then(month_of)
    }

    /// Parses one record line (without validating invariants).
    pub fn parse_line(line: &str) -> Result<MutantRecord> {
        let mut fields: HashMap<&str, String> = HashMap::new();
        for part in line.split('\t') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("field `{}` is not key=value", truncate(part))))?;
            if fields.insert(key, unescape_field(value)?).is_some() {
                return Err(Error::input(format!("duplicate field `{key}`")));
            }
        }
        let mut take = |key: &str| fields.remove(key).ok_or_else(|| Error::input(format!("missing field `{key}`")));

        let mutant_id = take("mutant_id")?;
        let changelist_id = take("changelist_id")?;
        let filename = take("filename")?;
        let language: Language = take("language")?.parse()?;
        let diff = take("diff")?;
        let pos_feedback = parse_bool_list(&take("pos_feed")?).map_err(|e| field_error("pos_feed", e))?;
        let neg_feedback = parse_bool_list(&take("neg_feed")?).map_err(|e| field_error("neg_feed", e))?;
        let killed = parse_bool_list(&take("killed")?).map_err(|e| field_error("killed", e))?;
        let operator = fields.remove("operator").map(|s| s.parse()).transpose()?;
        let timestamp = fields.remove("timestamp");

        Ok(MutantRecord {
            mutant_id,
            changelist_id,
            filename,
            language,
            diff,
            pos_feedback,
            neg_feedback,
            killed,
            operator,
            timestamp,
        })
    }
}

fn field_error(field: &str, e: Error) -> Error {
    Error::input(format!("field `{field}`: {e}"))
}

fn truncate(s: &str) -> String {
    s.chars().take(40).collect()
}

fn month_of(ts: &str) -> Option<&str> {
    let month = ts.get(..7)?;
    let b = month.as_bytes();
    let ok = b[..4].iter().all(u8::is_ascii_digit)
        && b[4] == b'-'
        && b[5..].iter().all(u8::is_ascii_digit)
        && matches!(&month[5..], "01" | "02" | "03" | "04" | "05" | "06" | "07" | "08" | "09" | "10" | "11" | "12");
    ok.then_some(month)
}

/// Serializes a record as one line (no trailing newline).
pub fn write_mutant_record(record: &MutantRecord) -> String {
    let mut fields = vec![
        ("mutant_id", escape_field(&record.mutant_id)),
        ("changelist_id", escape_field(&record.changelist_id)),
        ("filename", escape_field(&record.filename)),
        ("language", record.language.as_str().to_owned()),
    ];
    if let Some(op) = record.operator {
        fields.push(("operator", op.as_str().to_owned()));
    }
    if let Some(ts) = &record.timestamp {
        fields.push(("timestamp", escape_field(ts)));
    }
    fields.push(("pos_feed", render_bool_list(&record.pos_feedback)));
    fields.push(("neg_feed", render_bool_list(&record.neg_feedback)));
    fields.push(("killed", render_bool_list(&record.killed)));
    fields.push(("diff", escape_field(&record.diff)));
    fields
        .into_iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join("\t")
}

pub fn parse_bool_list(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::input(format!("`{other}` is not 0 or 1"))),
        })
        .collect()
}

pub fn render_bool_list(list: &[bool]) -> String {
    list.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some(other) => return Err(Error::input(format!("unknown escape `\\{other}`"))),
            None => return Err(Error::input("dangling backslash")),
        }
    }
    Ok(out)
}

/// Accepted records plus one diagnostic per rejected record.
#[derive(Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<MutantRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Number of non-blank, non-comment lines read.
    pub input_records: usize,
}

impl LoadOutcome {
    pub fn rejected(&self) -> usize {
        self.diagnostics.len()
    }
}

/// Reads records from a line-delimited stream. Invalid records are skipped
/// with a diagnostic naming the line; only I/O failures abort the stream.
pub fn load_mutant_records<R: BufRead>(reader: R) -> Result<LoadOutcome> {
    let mut outcome = LoadOutcome::default();
    let mut seen_ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        outcome.input_records += 1;
        let parsed = MutantRecord::parse_line(trimmed).and_then(|r| {
            r.validate()?;
            if !seen_ids.insert(r.mutant_id.clone()) {
                return Err(Error::input(format!("duplicate mutant_id `{}`", r.mutant_id)));
            }
            Ok(r)
        });
        match parsed {
            Ok(record) => outcome.records.push(record),
            Err(Error::Input(msg)) => outcome.diagnostics.push(Diagnostic::new(lineno, msg)),
            Err(other) => outcome.diagnostics.push(Diagnostic::new(lineno, other.to_string())),
        }
    }
    Ok(outcome)
}
