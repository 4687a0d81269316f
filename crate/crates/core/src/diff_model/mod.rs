//! Line-level unified diffs and mutant records.

mod records;

use crate::error::{Error, Result};

pub use records::{
    escape_field, load_mutant_records, parse_bool_list, render_bool_list, unescape_field, write_mutant_record,
    LoadOutcome, MutantRecord,
};

/// A run of changed lines with its surrounding context.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffHunk<L = String> {
    pub context_before: Vec<L>,
    pub removed: Vec<L>,
    pub added: Vec<L>,
    pub context_after: Vec<L>,
}

impl<L> DiffHunk<L> {
    pub fn has_changes(&self) -> bool {
        !self.removed.is_empty() || !self.added.is_empty()
    }

    /// Keeps at most `context_size` context lines on each side, nearest first.
    pub fn trimmed(&self, context_size: usize) -> DiffHunk<L>
    where
        L: Clone,
    {
        let before_start = self.context_before.len().saturating_sub(context_size);
        let after_end = self.context_after.len().min(context_size);
        DiffHunk {
            context_before: self.context_before[before_start..].to_vec(),
            removed: self.removed.clone(),
            added: self.added.clone(),
            context_after: self.context_after[..after_end].to_vec(),
        }
    }

    pub fn map<M>(self, mut f: impl FnMut(L) -> M) -> DiffHunk<M> {
        DiffHunk {
            context_before: self.context_before.into_iter().map(&mut f).collect(),
            removed: self.removed.into_iter().map(&mut f).collect(),
            added: self.added.into_iter().map(&mut f).collect(),
            context_after: self.context_after.into_iter().map(&mut f).collect(),
        }
    }
}

/// Hunks trimmed to a context size.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChangedWindow<L = String> {
    pub hunks: Vec<DiffHunk<L>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineKind {
    Context,
    Removed,
    Added,
}

/// Splits a unified diff into hunks.
///
/// Hunks are delimited by runs of context between change runs; a context run
/// between two change runs is shared, serving as `context_after` of one hunk
/// and `context_before` of the next. `@@` lines end the current section and
/// never share context across them. `---`/`+++` file headers before the first
/// body line and `\ No newline` markers are skipped. A line without a prefix is
/// read as an empty context line (some tools strip the lone space).
pub fn parse_unified_diff(diff_text: &str) -> Result<Vec<DiffHunk>> {
    let mut sections: Vec<Vec<(LineKind, &str)>> = vec![Vec::new()];
    let mut seen_body = false;
    let mut lines: Vec<&str> = diff_text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }

    for (idx, raw) in lines.iter().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with("@@") {
            sections.push(Vec::new());
            seen_body = true;
            continue;
        }
        if !seen_body && (line.starts_with("--- ") || line.starts_with("+++ ")) {
            continue;
        }
        if line.starts_with('\\') {
            continue;
        }
        let (kind, text) = match line.chars().next() {
            None => (LineKind::Context, ""),
            Some(' ') => (LineKind::Context, &line[1..]),
            Some('-') => (LineKind::Removed, &line[1..]),
            Some('+') => (LineKind::Added, &line[1..]),
            Some(other) => {
                return Err(Error::parse(idx + 1, format!("unknown diff line prefix `{other}`")));
            }
        };
        seen_body = true;
        sections.last_mut().expect("at least one section").push((kind, text));
    }

    let mut hunks = Vec::new();
    for section in sections {
        hunks.extend(section_hunks(&section));
    }
    Ok(hunks)
}

fn section_hunks(lines: &[(LineKind, &str)]) -> Vec<DiffHunk> {
    let mut hunks: Vec<DiffHunk> = Vec::new();
    let mut context: Vec<String> = Vec::new();
    let mut current: Option<DiffHunk> = None;

    for &(kind, text) in lines {
        match kind {
            LineKind::Context => context.push(text.to_owned()),
            LineKind::Removed | LineKind::Added => {
                if !context.is_empty() || current.is_none() {
                    if let Some(mut done) = current.take() {
                        done.context_after = context.clone();
                        hunks.push(done);
                    }
                    current = Some(DiffHunk {
                        context_before: std::mem::take(&mut context),
                        ..DiffHunk::default()
                    });
                }
                let hunk = current.as_mut().expect("hunk started above");
                match kind {
                    LineKind::Removed => hunk.removed.push(text.to_owned()),
                    _ => hunk.added.push(text.to_owned()),
                }
            }
        }
    }
    if let Some(mut done) = current {
        done.context_after = context;
        hunks.push(done);
    }
    hunks
}

/// Re-renders hunks as a unified diff body. Context shared between
/// consecutive hunks is written once.
pub fn render_unified_diff(hunks: &[DiffHunk]) -> String {
    let mut out = Vec::new();
    let mut previous_after: Option<&Vec<String>> = None;
    for hunk in hunks {
        if previous_after != Some(&hunk.context_before) {
            if previous_after.is_some() {
                out.push("@@".to_owned());
            }
            out.extend(hunk.context_before.iter().map(|l| format!(" {l}")));
        }
        out.extend(hunk.removed.iter().map(|l| format!("-{l}")));
        out.extend(hunk.added.iter().map(|l| format!("+{l}")));
        out.extend(hunk.context_after.iter().map(|l| format!(" {l}")));
        previous_after = Some(&hunk.context_after);
    }
    out.join("\n")
}

/// Trims every hunk to `context_size` context lines on each side.
pub fn extract_window<L: Clone>(hunks: &[DiffHunk<L>], context_size: usize) -> ChangedWindow<L> {
    ChangedWindow {
        hunks: hunks.iter().map(|h| h.trimmed(context_size)).collect(),
    }
}
