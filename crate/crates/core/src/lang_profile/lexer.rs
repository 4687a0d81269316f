use std::fmt;

use super::comments::{literal_delimiter, literal_end};
use super::LanguageProfile;
use crate::error::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLit,
    FloatLit,
    StringLit,
    BoolLit,
    CharLit,
    Operator,
    Punct,
}

impl TokenKind {
    /// Identifiers and the literal kinds that abstraction replaces.
    pub fn is_abstractable(self) -> bool {
        matches!(
            self,
            TokenKind::Identifier
                | TokenKind::IntLit
                | TokenKind::FloatLit
                | TokenKind::StringLit
                | TokenKind::CharLit
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
}

impl Token {
    pub fn new(kind: TokenKind, text: impl Into<String>) -> Self {
        Token {
            kind,
            text: text.into(),
        }
    }

    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.kind, self.text)
    }
}

/// A token together with its byte offset in the source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedToken {
    pub token: Token,
    pub start: usize,
}

impl SpannedToken {
    pub fn end(&self) -> usize {
        self.start + self.token.text.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<SpannedToken>,
    pub diagnostics: Vec<Diagnostic>,
}

const PUNCTUATION: &[char] = &['(', ')', '[', ']', '{', '}', ',', ';', '.', ':', '@', '#'];

/// Tokenizes one comment-free line.
pub fn tokenize(line: &str, profile: &LanguageProfile) -> Vec<Token> {
    tokenize_spanned(line, profile)
        .tokens
        .into_iter()
        .map(|t| t.token)
        .collect()
}

/// Like [`tokenize`] but keeps byte offsets and diagnostics. Diagnostic line
/// numbers are 1 since the input is a single line; callers re-base them.
pub fn tokenize_spanned(line: &str, profile: &LanguageProfile) -> Lexed {
    let mut lexed = Lexed::default();
    let bytes = line.as_bytes();
    let mut i = 0;

    while i < line.len() {
        let rest = &line[i..];
        let ch = rest.chars().next().expect("non-empty remainder");
        if ch.is_whitespace() {
            i += ch.len_utf8();
            continue;
        }
        let start = i;

        let (kind, end) = if let Some(delim) = literal_delimiter(rest, profile) {
            let end = literal_end(line, i, delim);
            let terminated = end - i >= 2 * delim.len() && line[..end].ends_with(delim);
            if !terminated {
                lexed
                    .diagnostics
                    .push(Diagnostic::new(1, format!("unterminated literal starting at byte {i}")));
            }
            let kind = if profile.char_delimiters.iter().any(|d| d == delim) {
                TokenKind::CharLit
            } else {
                TokenKind::StringLit
            };
            (kind, end)
        } else if ch.is_ascii_digit()
            || (ch == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            scan_number(line, i)
        } else if is_word_start(ch) {
            let end = scan_while(line, i, is_word_char);
            let word = &line[i..end];
            let kind = if profile.is_bool_literal(word) {
                TokenKind::BoolLit
            } else if profile.is_keyword(word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            (kind, end)
        } else if let Some(op) = profile.operators.iter().find(|op| rest.starts_with(op.as_str())) {
            (TokenKind::Operator, i + op.len())
        } else {
            // Anything else, including stray symbols, is single-character punctuation.
            debug_assert!(PUNCTUATION.contains(&ch) || !ch.is_alphanumeric());
            (TokenKind::Punct, i + ch.len_utf8())
        };

        lexed.tokens.push(SpannedToken {
            token: Token::new(kind, &line[start..end]),
            start,
        });
        i = end;
    }
    lexed
}

fn is_word_start(ch: char) -> bool {
    ch.is_alphabetic() || ch == '_' || ch == '$'
}

fn is_word_char(ch: char) -> bool {
    ch.is_alphanumeric() || ch == '_' || ch == '$'
}

fn scan_while(line: &str, start: usize, pred: impl Fn(char) -> bool) -> usize {
    line[start..]
        .char_indices()
        .find(|&(_, c)| !pred(c))
        .map_or(line.len(), |(off, _)| start + off)
}

fn scan_number(line: &str, start: usize) -> (TokenKind, usize) {
    let bytes = line.as_bytes();
    let at = |i: usize| bytes.get(i).copied();

    if at(start) == Some(b'0') && matches!(at(start + 1), Some(b'x' | b'X' | b'b' | b'B' | b'o' | b'O')) {
        let end = scan_while(line, start + 2, |c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        return (TokenKind::IntLit, end);
    }

    let digits = |i: usize| scan_while(line, i, |c| c.is_ascii_digit() || c == '_' || c == '\'');
    let mut float = false;
    let mut i = digits(start);
    if at(i) == Some(b'.') {
        let next = at(i + 1);
        let member_access = next.is_some_and(|b| (b as char).is_alphabetic() || b == b'_' || b == b'.');
        if !member_access {
            float = true;
            i = digits(i + 1);
        }
    }
    if matches!(at(i), Some(b'e' | b'E')) {
        let sign = usize::from(matches!(at(i + 1), Some(b'+' | b'-')));
        if at(i + 1 + sign).is_some_and(|b| b.is_ascii_digit()) {
            float = true;
            i = digits(i + 1 + sign);
        }
    }
    let suffix_start = i;
    let end = scan_while(line, i, |c| c.is_ascii_alphanumeric() || c == '_');
    if line[suffix_start..end]
        .chars()
        .next()
        .is_some_and(|c| matches!(c, 'f' | 'F' | 'd' | 'D'))
    {
        float = true;
    }
    let kind = if float { TokenKind::FloatLit } else { TokenKind::IntLit };
    (kind, end)
}
