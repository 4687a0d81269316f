//! The persisted template database.
//!
//! File layout, one record per line, fields separated by tabs:
//!
//! ```text
//! MURS-STORE  version=1
//! config      template=indexed  context=0  vocab=0
//! global      m=..  avg_us=..  std_us=..  template_count=..  degenerate=..
//! built_at    <unix seconds>
//! entries     <n>
//! vocabulary  <k>
//! <k escaped vocabulary tokens>
//! <n lines: LANG  pu pnu mf nf ak nk ek mk g k  escaped template text>
//! end
//! ```
//!
//! Entries are sorted by language then text, so equal stores serialize to
//! equal bytes. On load the global statistics are recomputed from the entries
//! and must match the header bit for bit.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diff_model::{escape_field, unescape_field};
use crate::error::{Error, Result};
use crate::feedback::TemplateStats;
use crate::lang_profile::Language;
use crate::scoring::{compute_global_stats, GlobalStats, TemplateLookup};
use crate::templating::{Abstraction, TemplateConfig, TemplateKey, Vocabulary};

pub const STORE_MAGIC: &str = "MURS-STORE";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateStore {
    entries: HashMap<TemplateKey, TemplateStats>,
    global: GlobalStats,
    vocabulary: Vocabulary,
    built_at: u64,
    config: TemplateConfig,
}

impl TemplateStore {
    pub fn new(
        config: TemplateConfig,
        vocabulary: Vocabulary,
        entries: HashMap<TemplateKey, TemplateStats>,
        built_at: u64,
    ) -> Self {
        let global = compute_global_stats(entries.values());
        TemplateStore {
            entries,
            global,
            vocabulary,
            built_at,
            config,
        }
    }

    pub fn empty(config: TemplateConfig, vocabulary: Vocabulary) -> Self {
        Self::new(config, vocabulary, HashMap::new(), 0)
    }

    pub fn lookup(&self, key: &TemplateKey) -> Option<&TemplateStats> {
        self.entries.get(key)
    }

    pub fn global(&self) -> &GlobalStats {
        &self.global
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn config(&self) -> &TemplateConfig {
        &self.config
    }

    pub fn built_at(&self) -> u64 {
        self.built_at
    }

    pub fn entries(&self) -> &HashMap<TemplateKey, TemplateStats> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in file order.
    pub fn sorted_entries(&self) -> Vec<(&TemplateKey, &TemplateStats)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        let g = &self.global;
        writeln!(out, "{STORE_MAGIC}\tversion={STORE_VERSION}")?;
        writeln!(
            out,
            "config\ttemplate={}\tcontext={}\tvocab={}",
            self.config.abstraction, self.config.context_size, self.config.vocabulary_size
        )?;
        writeln!(
            out,
            "global\tm={}\tavg_us={}\tstd_us={}\ttemplate_count={}\tdegenerate={}",
            g.m, g.avg_us, g.std_us, g.template_count, g.degenerate
        )?;
        writeln!(out, "built_at\t{}", self.built_at)?;
        writeln!(out, "entries\t{}", self.entries.len())?;
        writeln!(out, "vocabulary\t{}", self.vocabulary.len())?;
        for token in self.vocabulary.tokens() {
            writeln!(out, "{}", escape_field(token))?;
        }
        for (key, s) in self.sorted_entries() {
            writeln!(
                out,
                "{}\t{} {} {} {} {} {} {} {} {} {}\t{}",
                key.language,
                s.pu,
                s.pnu,
                s.mf,
                s.nf,
                s.ak,
                s.nk,
                s.ek,
                s.mk,
                s.g,
                s.k,
                escape_field(&key.text)
            )?;
        }
        writeln!(out, "end")?;
        out.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("store text is UTF-8")
    }

    /// Writes to a temporary sibling and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp-store");
        self.write_to(fs::File::create(&tmp)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TemplateStore> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<TemplateStore> {
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .filter(|(_, l)| !l.is_empty())
                .ok_or_else(|| Error::Store(format!("truncated store: missing {what}")))
        };

        let (n, header) = next("header")?;
        let version = header
            .strip_prefix(STORE_MAGIC)
            .and_then(|r| r.strip_prefix("\tversion="))
            .ok_or_else(|| store_err(n, "not a template store"))?;
        if version != STORE_VERSION.to_string() {
            return Err(store_err(n, format!("unsupported store version {version} (expected {STORE_VERSION})")));
        }

        let (n, line) = next("config")?;
        let fields = tagged_fields(n, line, "config", &["template", "context", "vocab"])?;
        let config = TemplateConfig::new(
            fields[0].parse::<Abstraction>().map_err(|e| store_err(n, e.to_string()))?,
            parse_num(n, fields[1])?,
            parse_num(n, fields[2])?,
        );

        let (n, line) = next("global statistics")?;
        let fields = tagged_fields(n, line, "global", &["m", "avg_us", "std_us", "template_count", "degenerate"])?;
        let stored_global = GlobalStats {
            m: parse_num(n, fields[0])?,
            avg_us: parse_num(n, fields[1])?,
            std_us: parse_num(n, fields[2])?,
            template_count: parse_num(n, fields[3])?,
            degenerate: parse_num(n, fields[4])?,
        };

        let (n, line) = next("built_at")?;
        let built_at = parse_num(n, tagged_fields(n, line, "built_at", &[""])?[0])?;
        let (n, line) = next("entry count")?;
        let entry_count: usize = parse_num(n, tagged_fields(n, line, "entries", &[""])?[0])?;
        let (n, line) = next("vocabulary count")?;
        let vocab_count: usize = parse_num(n, tagged_fields(n, line, "vocabulary", &[""])?[0])?;

        let mut tokens = Vec::with_capacity(vocab_count);
        for _ in 0..vocab_count {
            let (n, line) = next("vocabulary token")?;
            tokens.push(unescape_field(line).map_err(|e| store_err(n, e.to_string()))?);
        }
        let vocabulary = Vocabulary::new(tokens, config.vocabulary_size).map_err(|e| Error::Store(e.to_string()))?;

        let mut entries = HashMap::with_capacity(entry_count);
        for _ in 0..entry_count {
            let (n, line) = next("entry")?;
            let (key, stats) = parse_entry(n, line)?;
            if entries.insert(key, stats).is_some() {
                return Err(store_err(n, "duplicate template entry"));
            }
        }

        let (n, line) = next("end marker")?;
        if line != "end" {
            return Err(store_err(n, "expected end marker"));
        }
        if lines.any(|(_, l)| !l.is_empty()) {
            return Err(store_err(n + 1, "data after end marker"));
        }

        let store = TemplateStore::new(config, vocabulary, entries, built_at);
        if !store.global.bit_eq(&stored_global) {
            return Err(Error::Store(format!(
                "global statistics drift: header {:?}, recomputed {:?}",
                stored_global, store.global
            )));
        }
        Ok(store)
    }
}

impl TemplateLookup for TemplateStore {
    fn lookup(&self, key: &TemplateKey) -> Option<&TemplateStats> {
        self.entries.get(key)
    }
}

fn store_err(line: usize, message: impl Into<String>) -> Error {
    Error::Store(format!("line {line}: {}", message.into()))
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| store_err(line, format!("invalid value `{s}`")))
}

/// Splits `tag\tk1=v1\tk2=v2`; an empty key name means a bare value.
fn tagged_fields<'a>(line_no: usize, line: &'a str, tag: &str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let mut parts = line.split('\t');
    if parts.next() != Some(tag) {
        return Err(store_err(line_no, format!("expected `{tag}` record")));
    }
    let values: Vec<&str> = parts.collect();
    if values.len() != keys.len() {
        return Err(store_err(line_no, format!("`{tag}` record has {} fields, expected {}", values.len(), keys.len())));
    }
    keys.iter()
        .zip(values)
        .map(|(key, value)| {
            if key.is_empty() {
                return Ok(value);
            }
            value
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| store_err(line_no, format!("expected `{key}=` in `{tag}` record")))
        })
        .collect()
}

fn parse_entry(n: usize, line: &str) -> Result<(TemplateKey, TemplateStats)> {
    let mut parts = line.splitn(3, '\t');
    let (Some(lang), Some(counters), Some(text)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(store_err(n, "malformed entry"));
    };
    let language: Language = lang.parse().map_err(|e: Error| store_err(n, e.to_string()))?;
    let c: Vec<u64> = counters.split(' ').map(|v| parse_num(n, v)).collect::<Result<_>>()?;
    let [pu, pnu, mf, nf, ak, nk, ek, mk, g, k] = c[..] else {
        return Err(store_err(n, format!("expected 10 counters, found {}", c.len())));
    };
    let stats = TemplateStats {
        pu,
        pnu,
        mf,
        nf,
        ak,
        nk,
        ek,
        mk,
        g,
        k,
    };
    stats.check().map_err(|e| store_err(n, e.to_string()))?;
    let text = unescape_field(text).map_err(|e| store_err(n, e.to_string()))?;
    Ok((TemplateKey::new(language, text), stats))
}

/// Entry-wise sum of two stores built under the same configuration and vocabulary.
pub fn merge_stores(a: &TemplateStore, b: &TemplateStore) -> Result<TemplateStore> {
    if a.config != b.config {
        return Err(Error::Incompatible(format!("template configs differ: {:?} vs {:?}", a.config, b.config)));
    }
    if a.vocabulary != b.vocabulary {
        return Err(Error::Incompatible("vocabularies differ".into()));
    }
    let mut entries = a.entries.clone();
    for (key, stats) in &b.entries {
        let slot = entries.entry(key.clone()).or_insert_with(TemplateStats::zero);
        *slot = *slot + *stats;
    }
    Ok(TemplateStore::new(a.config, a.vocabulary.clone(), entries, a.built_at.max(b.built_at)))
}
