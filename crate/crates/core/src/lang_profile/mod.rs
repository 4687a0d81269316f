//! Per-language lexical knowledge.
//!
//! A [`LanguageProfile`] is loaded from a small versioned text file (one per
//! language). The five built-in profiles are compiled into the crate from
//! `profiles/*.profile`; [`ProfileSet::load_dir`] reads replacements or
//! additional copies from disk so lexical rules can change without a rebuild.
//!
//! The file format is line oriented. `#` starts a comment line, every other
//! non-blank line is `key = value` where the value is a whitespace-separated
//! list. Repeated keys append.
//!
//! ```text
//! version = 1
//! language = GO
//! keywords = break case chan ...
//! bool_literals = true false
//! line_comment = //
//! block_comment = /* */
//! string_delimiters = " `
//! char_delimiters = '
//! operators = := <- == != ...
//! ```

mod comments;
mod lexer;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub use comments::{strip_comments, StrippedLines};
pub use lexer::{tokenize, tokenize_spanned, Lexed, SpannedToken, Token, TokenKind};

/// Version of the profile file format understood by this build.
pub const PROFILE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Python,
    Java,
    Cpp,
    Go,
    TypeScript,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::Python,
        Language::Java,
        Language::Cpp,
        Language::Go,
        Language::TypeScript,
    ];

    /// Upper-case identifier, also used as the placeholder prefix in indexed
    /// templates (`GO_IDENTIFIER_0`).
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "PYTHON",
            Language::Java => "JAVA",
            Language::Cpp => "CPP",
            Language::Go => "GO",
            Language::TypeScript => "TYPESCRIPT",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            "cpp" | "c++" | "cc" => Ok(Language::Cpp),
            "go" | "golang" => Ok(Language::Go),
            "typescript" | "ts" => Ok(Language::TypeScript),
            _ => Err(Error::input(format!("unknown language `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub language: Language,
    pub keywords: HashSet<String>,
    pub bool_literals: Vec<String>,
    pub line_comment_markers: Vec<String>,
    pub block_comment_delimiters: Vec<(String, String)>,
    /// Longest first, so `"""` wins over `"`.
    pub string_delimiters: Vec<String>,
    pub char_delimiters: Vec<String>,
    /// Longest first, for maximal munch.
    pub operators: Vec<String>,
}

impl LanguageProfile {
    /// Parses the text profile format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut language = None;
        let mut keywords = HashSet::new();
        let mut bool_literals = Vec::new();
        let mut line_comment_markers = Vec::new();
        let mut block_comment_delimiters = Vec::new();
        let mut string_delimiters = Vec::new();
        let mut char_delimiters = Vec::new();
        let mut operators = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "expected `key = value`"))?;
            let values: Vec<String> = value.split_whitespace().map(str::to_owned).collect();
            match key.trim() {
                "version" => {
                    let v: u32 = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(lineno, "version must be an integer"))?;
                    version = Some(v);
                }
                "language" => language = Some(value.trim().parse::<Language>()?),
                "keywords" => keywords.extend(values),
                "bool_literals" => bool_literals.extend(values),
                "line_comment" => line_comment_markers.extend(values),
                "block_comment" => {
                    if values.len() != 2 {
                        return Err(Error::parse(lineno, "block_comment needs an open and a close marker"));
                    }
                    block_comment_delimiters.push((values[0].clone(), values[1].clone()));
                }
                "string_delimiters" => string_delimiters.extend(values),
                "char_delimiters" => char_delimiters.extend(values),
                "operators" => operators.extend(values),
                other => return Err(Error::parse(lineno, format!("unknown key `{other}`"))),
            }
        }

        match version {
            Some(PROFILE_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::input(format!(
                    "profile format version {v} is not supported (expected {PROFILE_FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::input("profile is missing `version`")),
        }
        let language = language.ok_or_else(|| Error::input("profile is missing `language`"))?;

        let by_len_desc = |a: &String, b: &String| b.len().cmp(&a.len()).then_with(|| a.cmp(b));
        string_delimiters.sort_by(by_len_desc);
        char_delimiters.sort_by(by_len_desc);
        operators.sort_by(by_len_desc);
        operators.dedup();

        let profile = LanguageProfile {
            language,
            keywords,
            bool_literals,
            line_comment_markers,
            block_comment_delimiters,
            string_delimiters,
            char_delimiters,
            operators,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.keywords.is_empty() {
            return Err(Error::input("keyword set is empty"));
        }
        if self.keywords.iter().any(|k| k.is_empty() || k.chars().any(char::is_whitespace)) {
            return Err(Error::input("keywords must be non-empty and contain no whitespace"));
        }
        let markers = self
            .line_comment_markers
            .iter()
            .chain(self.block_comment_delimiters.iter().flat_map(|(o, c)| [o, c]));
        if markers.clone().any(|m| m.is_empty()) {
            return Err(Error::input("comment markers must be non-empty"));
        }
        Ok(())
    }

    /// The built-in profile for `language`.
    pub fn builtin(language: Language) -> &'static LanguageProfile {
        builtin_profiles().get(language)
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.keywords.contains(word)
    }

    pub fn is_bool_literal(&self, word: &str) -> bool {
        self.bool_literals.iter().any(|b| b == word)
    }

    /// Spelling of the boolean constant `value` in this language.
    pub fn bool_constant(&self, value: bool) -> &str {
        let wanted = if value { "true" } else { "false" };
        self.bool_literals
            .iter()
            .find(|b| b.eq_ignore_ascii_case(wanted))
            .map(String::as_str)
            .unwrap_or(wanted)
    }
}

/// One profile per language.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    profiles: HashMap<Language, LanguageProfile>,
}

const BUILTIN_SOURCES: [&str; 5] = [
    include_str!("../../profiles/python.profile"),
    include_str!("../../profiles/java.profile"),
    include_str!("../../profiles/cpp.profile"),
    include_str!("../../profiles/go.profile"),
    include_str!("../../profiles/typescript.profile"),
];

fn builtin_profiles() -> &'static ProfileSet {
    static BUILTIN: OnceLock<ProfileSet> = OnceLock::new();
    BUILTIN.get_or_init(|| {
        let profiles = BUILTIN_SOURCES
            .iter()
            .map(|src| LanguageProfile::parse(src).expect("built-in profile must parse"))
            .map(|p| (p.language, p))
            .collect();
        ProfileSet { profiles }
    })
}

impl ProfileSet {
    pub fn builtin() -> ProfileSet {
        builtin_profiles().clone()
    }

    /// Built-in profiles, overridden by every `*.profile` file in `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<ProfileSet> {
        let mut set = ProfileSet::builtin();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "profile"))
            .collect();
        paths.sort();
        for path in paths {
            let profile = LanguageProfile::load(&path)?;
            set.profiles.insert(profile.language, profile);
        }
        Ok(set)
    }

    pub fn get(&self, language: Language) -> &LanguageProfile {
        // Every constructor populates all five languages.
        &self.profiles[&language]
    }
}

impl Default for ProfileSet {
    fn default() -> Self {
        ProfileSet::builtin()
    }
}
