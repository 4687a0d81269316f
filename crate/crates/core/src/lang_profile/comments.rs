use super::LanguageProfile;
use crate::error::Diagnostic;

/// Output of [`strip_comments`]: one entry per input line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrippedLines {
    pub lines: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Blanks out comment spans.
///
/// String and character literals are copied through untouched, so comment
/// markers inside them survive. Block comments may span lines. Lines that
/// lost a comment have trailing whitespace trimmed; other lines are returned
/// as given. Literals never continue past the end of a line.
pub fn strip_comments<S: AsRef<str>>(lines: &[S], profile: &LanguageProfile) -> StrippedLines {
    let mut out = Vec::with_capacity(lines.len());
    let mut diagnostics = Vec::new();
    // (close marker, line where the comment opened)
    let mut open_block: Option<(&str, usize)> = None;

    for (idx, line) in lines.iter().enumerate() {
        let line = line.as_ref();
        let mut kept = String::with_capacity(line.len());
        let mut had_comment = false;
        let mut i = 0;

        while i < line.len() {
            let rest = &line[i..];
            if let Some((close, _)) = open_block {
                had_comment = true;
                match rest.find(close) {
                    Some(pos) => {
                        i += pos + close.len();
                        open_block = None;
                        continue;
                    }
                    None => break,
                }
            }

            if let Some(delim) = literal_delimiter(rest, profile) {
                let end = literal_end(line, i, delim);
                kept.push_str(&line[i..end]);
                i = end;
                continue;
            }
            if profile.line_comment_markers.iter().any(|m| rest.starts_with(m.as_str())) {
                had_comment = true;
                break;
            }
            if let Some((open, close)) = profile
                .block_comment_delimiters
                .iter()
                .find(|(open, _)| rest.starts_with(open.as_str()))
            {
                had_comment = true;
                open_block = Some((close.as_str(), idx + 1));
                i += open.len();
                continue;
            }

            let ch = rest.chars().next().expect("non-empty remainder");
            kept.push(ch);
            i += ch.len_utf8();
        }

        if had_comment {
            kept.truncate(kept.trim_end().len());
        }
        out.push(kept);
    }

    if let Some((_, opened)) = open_block {
        diagnostics.push(Diagnostic::new(
            opened,
            "unterminated block comment; treated the remainder of the input as comment",
        ));
    }

    StrippedLines {
        lines: out,
        diagnostics,
    }
}

/// The string or char delimiter opening at the start of `rest`, if any.
pub(super) fn literal_delimiter<'p>(rest: &str, profile: &'p LanguageProfile) -> Option<&'p str> {
    profile
        .string_delimiters
        .iter()
        .chain(profile.char_delimiters.iter())
        .find(|d| rest.starts_with(d.as_str()))
        .map(String::as_str)
}

/// Byte offset just past the literal opened by `delim` at `start`, or the end
/// of the line when the literal is unterminated. Backslash escapes apply to
/// every delimiter except the backtick (Go raw strings).
pub(super) fn literal_end(line: &str, start: usize, delim: &str) -> usize {
    let escapes = delim != "`";
    let mut i = start + delim.len();
    while i < line.len() {
        let rest = &line[i..];
        if escapes && rest.starts_with('\\') {
            i += 1;
            if let Some(ch) = line[i..].chars().next() {
                i += ch.len_utf8();
            }
            continue;
        }
        if rest.starts_with(delim) {
            return i + delim.len();
        }
        i += rest.chars().next().map_or(1, char::len_utf8);
    }
    line.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang_profile::Language;
    use proptest::prelude::*;

    fn strip(lang: Language, lines: &[&str]) -> Vec<String> {
        strip_comments(lines, LanguageProfile::builtin(lang)).lines
    }

    #[test]
    fn python_line_comment() {
        assert_eq!(strip(Language::Python, &["x = 1  # set x"]), vec!["x = 1"]);
    }

    #[test]
    fn go_line_comment() {
        assert_eq!(strip(Language::Go, &["if a { // note"]), vec!["if a {"]);
    }

    #[test]
    fn cpp_inline_block_comment_keeps_both_spaces() {
        assert_eq!(strip(Language::Cpp, &["a /* b */ c"]), vec!["a  c"]);
    }

    #[test]
    fn block_comment_across_lines() {
        let got = strip(Language::Java, &["int a; /* start", "still comment", "end */ b();", "c();"]);
        assert_eq!(got, vec!["int a;", "", " b();", "c();"]);
    }

    #[test]
    fn markers_inside_strings_are_kept() {
        assert_eq!(
            strip(Language::Python, &["s = '# not a comment'  # real"]),
            vec!["s = '# not a comment'"]
        );
        assert_eq!(
            strip(Language::Go, &[r#"u := "http://x/*y*/" // c"#]),
            vec![r#"u := "http://x/*y*/""#]
        );
        assert_eq!(strip(Language::Cpp, &[r#"s = "a\"//b";"#]), vec![r#"s = "a\"//b";"#]);
    }

    #[test]
    fn unterminated_block_comment_is_a_warning() {
        let stripped = strip_comments(&["x = 1; /* open", "y = 2;"], LanguageProfile::builtin(Language::Cpp));
        assert_eq!(stripped.lines, vec!["x = 1;", ""]);
        assert_eq!(stripped.diagnostics.len(), 1);
        assert_eq!(stripped.diagnostics[0].line, 1);
    }

    #[test]
    fn output_has_same_length() {
        let input = ["a", "", "// only", "b"];
        assert_eq!(strip(Language::TypeScript, &input).len(), input.len());
    }

    proptest! {
        #[test]
        fn string_contents_survive(
            prefix in "[a-z ]{0,8}",
            body in "[a-z #/*]{0,12}",
            suffix in "[a-z ]{0,8}",
        ) {
            for (lang, quote) in [(Language::Python, '"'), (Language::Java, '"'), (Language::Go, '"')] {
                let literal = format!("{quote}{body}{quote}");
                let line = format!("{prefix}{literal}{suffix}");
                let out = strip(lang, &[line.as_str()]);
                prop_assert!(out[0].contains(&literal), "{:?} lost {:?}", out[0], literal);
            }
        }
    }
}
