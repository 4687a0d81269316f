//! Mutant ranking and suppression driven by historical developer feedback.
//!
//! Mutant diffs are abstracted into *identifier templates* (literals typed,
//! identifiers replaced by placeholders, optional indexing, context lines and
//! a vocabulary of kept tokens). Feedback and kill outcomes of past mutants
//! are aggregated per template; the aggregates then rank new mutants and
//! decide which ones to withhold from code review.
//!
//! The crate is organised bottom-up:
//!
//! - [`lang_profile`]: per-language lexical rules, comment stripping, tokenizer.
//! - [`diff_model`]: unified-diff hunks and the line-delimited record format.
//! - [`templating`]: vocabularies and template rendering.
//! - [`feedback`]: label derivation and per-template counters.
//! - [`scoring`]: usefulness, Bayes usefulness, kill scores, ranking.
//! - [`suppression`]: the three suppression policies.
//! - [`template_store`]: the persisted template database.
//! - [`pipeline`]: store building, surfacing, replay, tuning, statistics.
//! - [`mutagen`]: a small line-level mutant generator.
//! - [`synthetic`]: seeded synthetic corpora for tests and benchmarks.

pub mod diff_model;
pub mod error;
pub mod feedback;
pub mod lang_profile;
pub mod mutagen;
pub mod pipeline;
pub mod scoring;
pub mod suppression;
pub mod synthetic;
pub mod template_store;
pub mod templating;

pub use error::{Diagnostic, Error, Result};
