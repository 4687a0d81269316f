//! End-to-end orchestration.
//!
//! [`build_store`] turns labeled records into a [`TemplateStore`];
//! [`rank_records`] scores and decides new mutants against a store;
//! [`surface`] applies the per-file and per-changelist caps. Replay, tuning,
//! evaluation statistics and reports live in the submodules.

mod ranked;
mod replay;
mod reports;
mod stats;

use std::collections::HashMap;

use crate::diff_model::MutantRecord;
use crate::error::{Diagnostic, Error, Result};
use crate::feedback::{aggregate, derive_killed_status, derive_perceived_feedback, KilledStatus, PerceivedFeedback};
use crate::lang_profile::ProfileSet;
use crate::scoring::{rank, RankingConfig};
use crate::suppression::{decide, DrawSource, FeedbackCounts, SuppressionPolicy};
use crate::template_store::TemplateStore;
use crate::templating::{token_frequencies, vocabulary_from_frequencies, PreparedDiff, TemplateConfig, TemplateKey, Vocabulary};

pub use ranked::{read_ranked_records, write_ranked_record, RankedRecord};
pub use replay::{
    expected_suppression_counts, full_grid, negative_feedback_ratio, replay_nfr, tune, EvalSet, NfrMode, NfrParts,
    ReplayMode, ReplayOutcome, RunConfig, TuningReport, TuningRow,
};
pub use reports::{negative_templates, top_controversial, ControversialTemplate, MonthlyCounts, NegativeTemplate};
pub use stats::{chi_square_2x2, kendall_tau_b, ChiSquare, Correction};

/// A record after diff preparation and label derivation.
#[derive(Debug, Clone)]
pub struct PreparedRecord {
    pub index: usize,
    pub diff: PreparedDiff,
    pub feedback: PerceivedFeedback,
    pub killed: KilledStatus,
}

/// Prepared records plus the identifier/literal frequencies for vocabularies.
#[derive(Debug, Clone, Default)]
pub struct PreparedCorpus {
    pub records: Vec<PreparedRecord>,
    pub frequencies: HashMap<String, u64>,
    pub diagnostics: Vec<Diagnostic>,
}

impl PreparedCorpus {
    /// Records that fail to parse or label are skipped with a diagnostic
    /// naming the mutant.
    pub fn new(records: &[MutantRecord], profiles: &ProfileSet) -> Self {
        let mut corpus = PreparedCorpus::default();
        for (index, r) in records.iter().enumerate() {
            let prepared = PreparedDiff::from_record(r, profiles).and_then(|diff| {
                Ok(PreparedRecord {
                    index,
                    diff,
                    feedback: derive_perceived_feedback(&r.pos_feedback, &r.neg_feedback)?,
                    killed: derive_killed_status(&r.killed)?,
                })
            });
            match prepared {
                Ok(p) => {
                    corpus
                        .diagnostics
                        .extend(p.diff.diagnostics.iter().map(|d| Diagnostic::new(d.line, format!("{}: {}", r.mutant_id, d.message))));
                    corpus.records.push(p);
                }
                Err(e) => corpus.diagnostics.push(Diagnostic::new(index + 1, format!("{}: skipped: {e}", r.mutant_id))),
            }
        }
        corpus.frequencies = token_frequencies(corpus.records.iter().map(|r| &r.diff));
        corpus
    }

    pub fn vocabulary(&self, size: usize) -> Vocabulary {
        vocabulary_from_frequencies(&self.frequencies, size)
    }

    /// Aggregates a store under `config`.
    pub fn build_store(&self, config: TemplateConfig, built_at: u64) -> TemplateStore {
        let vocabulary = self.vocabulary(config.vocabulary_size);
        let entries = aggregate(
            self.records
                .iter()
                .map(|r| (r.diff.render(&config, &vocabulary), r.feedback, r.killed)),
        );
        TemplateStore::new(config, vocabulary, entries, built_at)
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub store: TemplateStore,
    pub diagnostics: Vec<Diagnostic>,
    pub skipped: usize,
}

/// Templates every record, derives labels and aggregates counters.
pub fn build_store(
    records: &[MutantRecord],
    config: TemplateConfig,
    profiles: &ProfileSet,
    built_at: u64,
) -> BuildOutcome {
    let corpus = PreparedCorpus::new(records, profiles);
    BuildOutcome {
        store: corpus.build_store(config, built_at),
        skipped: records.len() - corpus.records.len(),
        diagnostics: corpus.diagnostics,
    }
}

/// Templates of `records` under the store's configuration and vocabulary.
/// Unparseable diffs yield `Err` entries.
pub fn templates_for(records: &[MutantRecord], store: &TemplateStore, profiles: &ProfileSet) -> Vec<Result<TemplateKey>> {
    records
        .iter()
        .map(|r| Ok(PreparedDiff::from_record(r, profiles)?.render(store.config(), store.vocabulary())))
        .collect()
}

/// Ranks `records` against `store` and attaches suppression decisions.
/// Records whose diff cannot be parsed are skipped with a diagnostic.
pub fn rank_records(
    records: &[MutantRecord],
    store: &TemplateStore,
    ranking: &RankingConfig,
    policy: SuppressionPolicy,
    seed: u64,
    profiles: &ProfileSet,
) -> (Vec<RankedRecord>, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let mut by_id: HashMap<&str, &MutantRecord> = HashMap::new();
    let mut candidates = Vec::with_capacity(records.len());
    for (i, (record, key)) in records.iter().zip(templates_for(records, store, profiles)).enumerate() {
        match key {
            Ok(key) => {
                by_id.insert(&record.mutant_id, record);
                candidates.push((record.mutant_id.clone(), key));
            }
            Err(e) => diagnostics.push(Diagnostic::new(i + 1, format!("{}: skipped: {e}", record.mutant_id))),
        }
    }
    let draws = DrawSource::new(seed);
    let global = store.global();
    let ranked = rank(candidates, store, global, ranking)
        .into_iter()
        .map(|m| {
            let record = by_id[m.mutant_id.as_str()];
            let counts = m.stats.as_ref().map(FeedbackCounts::from);
            let decision = decide(counts, global, policy, || draws.draw(&m.mutant_id));
            RankedRecord {
                mutant_id: m.mutant_id.clone(),
                changelist_id: record.changelist_id.clone(),
                filename: record.filename.clone(),
                rank: m.rank,
                feedback_score: m.feedback_score,
                kill_score: m.scores.kill_score_text(ranking),
                suppressed: decision.suppressed,
                reason: decision.reason,
                z: decision.z,
                p: decision.p,
                suppress_probability: decision.suppress_probability,
            }
        })
        .collect();
    (ranked, diagnostics)
}

/// Per-file and per-changelist limits on surfaced mutants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfacingCaps {
    per_file: usize,
    per_changelist: usize,
}

impl SurfacingCaps {
    pub fn new(per_file: usize, per_changelist: usize) -> Result<Self> {
        if per_file == 0 || per_file > per_changelist {
            return Err(Error::input(format!(
                "caps need 1 <= per-file <= per-changelist (got {per_file} and {per_changelist})"
            )));
        }
        Ok(SurfacingCaps {
            per_file,
            per_changelist,
        })
    }

    pub fn per_file(&self) -> usize {
        self.per_file
    }

    pub fn per_changelist(&self) -> usize {
        self.per_changelist
    }
}

impl Default for SurfacingCaps {
    fn default() -> Self {
        SurfacingCaps {
            per_file: 3,
            per_changelist: 10,
        }
    }
}

/// Walks `ranked` in rank order, skipping suppressed mutants and admitting
/// the rest while their file and changelist are under the caps.
pub fn surface(ranked: &[RankedRecord], caps: SurfacingCaps) -> Vec<RankedRecord> {
    let mut ordered: Vec<&RankedRecord> = ranked.iter().collect();
    ordered.sort_by_key(|r| r.rank);
    let mut per_changelist: HashMap<&str, usize> = HashMap::new();
    let mut per_file: HashMap<(&str, &str), usize> = HashMap::new();
    let mut out = Vec::new();
    for r in ordered {
        if r.suppressed {
            continue;
        }
        let cl = per_changelist.entry(&r.changelist_id).or_insert(0);
        if *cl >= caps.per_changelist {
            continue;
        }
        let file = per_file.entry((&r.changelist_id, &r.filename)).or_insert(0);
        if *file >= caps.per_file {
            continue;
        }
        *cl += 1;
        *file += 1;
        out.push(r.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang_profile::Language;
    use crate::suppression::DecisionReason;
    use proptest::prelude::*;

    pub(crate) fn record(id: &str, lang: Language, diff: &str, pos: bool, neg: bool, killed: &[bool]) -> MutantRecord {
        MutantRecord {
            mutant_id: id.into(),
            changelist_id: "cl".into(),
            filename: "f".into(),
            language: lang,
            diff: diff.into(),
            pos_feedback: vec![pos; killed.len()],
            neg_feedback: vec![neg; killed.len()],
            killed: killed.to_vec(),
            operator: None,
            timestamp: None,
        }
    }

    fn ranked(id: &str, cl: &str, file: &str, rank: usize, suppressed: bool) -> RankedRecord {
        RankedRecord {
            mutant_id: id.into(),
            changelist_id: cl.into(),
            filename: file.into(),
            rank,
            feedback_score: 0.5,
            kill_score: "0.5".into(),
            suppressed,
            reason: if suppressed {
                DecisionReason::BelowThreshold
            } else {
                DecisionReason::PolicyNone
            },
            z: None,
            p: None,
            suppress_probability: None,
        }
    }

    #[test]
    fn build_store_groups_by_template() {
        let records = vec![
            record("a", Language::Go, "-\tif err != nil { return err }", true, false, &[true]),
            record("b", Language::Go, "-if e != nil { return e }", false, true, &[false]),
            record("c", Language::Go, "-x := 1", false, false, &[false, true]),
            record("bad", Language::Go, "*oops", false, false, &[false]),
        ];
        let out = build_store(&records, TemplateConfig::default(), &ProfileSet::builtin(), 0);
        assert_eq!(out.skipped, 1);
        assert_eq!(out.store.len(), 2);
        let key = TemplateKey::new(Language::Go, "-if GO_IDENTIFIER_0 != GO_IDENTIFIER_1 { return GO_IDENTIFIER_0 }");
        let s = out.store.lookup(&key).unwrap();
        assert_eq!((s.pu, s.pnu, s.ak, s.nk, s.g, s.k), (1, 1, 1, 1, 2, 1));
        assert!(out.diagnostics.iter().any(|d| d.message.contains("bad")));
    }

    #[test]
    fn caps_bind_per_file() {
        let r: Vec<RankedRecord> = (1..=5).map(|i| ranked(&format!("m{i}"), "cl", "a", i, false)).collect();
        let out = surface(&r, SurfacingCaps::default());
        assert_eq!(out.iter().map(|r| r.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn caps_bind_per_changelist() {
        let r: Vec<RankedRecord> = (0..12).map(|i| ranked(&format!("m{i}"), "cl", &format!("f{}", i % 4), i + 1, false)).collect();
        assert_eq!(surface(&r, SurfacingCaps::default()).len(), 10);
    }

    #[test]
    fn suppressed_mutants_are_skipped() {
        let r = vec![ranked("top", "cl", "a", 1, true), ranked("next", "cl", "a", 2, false)];
        let out = surface(&r, SurfacingCaps::new(1, 1).unwrap());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].mutant_id, "next");
    }

    #[test]
    fn cap_validation() {
        assert!(SurfacingCaps::new(0, 1).is_err());
        assert!(SurfacingCaps::new(4, 3).is_err());
        assert!(SurfacingCaps::new(3, 3).is_ok());
    }

    proptest! {
        #[test]
        fn surface_respects_caps(
            items in prop::collection::vec((0usize..4, 0usize..3, any::<bool>()), 0..80),
            per_file in 1usize..5,
            extra in 0usize..8,
        ) {
            let caps = SurfacingCaps::new(per_file, per_file + extra).unwrap();
            let r: Vec<RankedRecord> = items.iter().enumerate()
                .map(|(i, (cl, f, s))| ranked(&format!("m{i}"), &format!("cl{cl}"), &format!("f{f}"), i + 1, *s))
                .collect();
            let out = surface(&r, caps);
            let mut cl_counts: HashMap<&str, usize> = HashMap::new();
            let mut file_counts: HashMap<(&str, &str), usize> = HashMap::new();
            for m in &out {
                prop_assert!(!m.suppressed);
                *cl_counts.entry(&m.changelist_id).or_default() += 1;
                *file_counts.entry((&m.changelist_id, &m.filename)).or_default() += 1;
            }
            prop_assert!(cl_counts.values().all(|&c| c <= caps.per_changelist()));
            prop_assert!(file_counts.values().all(|&c| c <= caps.per_file()));
            prop_assert!(out.windows(2).all(|w| w[0].rank < w[1].rank));
        }
    }
}
