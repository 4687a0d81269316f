//! Negative feedback ratio, historical replay and hyperparameter tuning.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::PreparedCorpus;
use crate::diff_model::MutantRecord;
use crate::error::{Error, Result};
use crate::feedback::PerceivedFeedback;
use crate::lang_profile::ProfileSet;
use crate::scoring::{FeedbackScore, KillScore, RankingConfig};
use crate::suppression::{assess, DrawSource, FeedbackCounts, SuppressionPolicy};
use crate::template_store::TemplateStore;
use crate::templating::{Abstraction, TemplateConfig, TemplateKey, GRID_CONTEXT_SIZES, GRID_VOCABULARY_SIZES};

/// Denominator of the negative feedback ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NfrMode {
    /// Every retained mutant counts, with or without feedback. Used for tuning.
    AllSurfaced,
    /// Only retained mutants with feedback count. Used for reporting.
    FeedbackBearing,
}

impl NfrMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NfrMode::AllSurfaced => "all-surfaced",
            NfrMode::FeedbackBearing => "feedback-bearing",
        }
    }
}

/// Weighted label tallies. Weights are 1 for sampled replays and keep
/// probabilities for expected replays.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NfrParts {
    /// `PNU + MF`.
    pub negative: f64,
    /// `PU + PNU + MF`.
    pub with_feedback: f64,
    pub retained: f64,
}

impl NfrParts {
    pub fn add(&mut self, label: PerceivedFeedback, weight: f64) {
        self.retained += weight;
        if label.has_feedback() {
            self.with_feedback += weight;
        }
        if label.is_negative() {
            self.negative += weight;
        }
    }

    pub fn denominator(&self, mode: NfrMode) -> f64 {
        match mode {
            NfrMode::AllSurfaced => self.retained,
            NfrMode::FeedbackBearing => self.with_feedback,
        }
    }

    /// Undefined when no retained mutant has feedback.
    pub fn ratio(&self, mode: NfrMode) -> Option<f64> {
        (self.with_feedback > 0.0).then(|| self.negative / self.denominator(mode))
    }
}

pub fn negative_feedback_ratio(labels: &[PerceivedFeedback], mode: NfrMode) -> Option<f64> {
    let mut parts = NfrParts::default();
    for &l in labels {
        parts.add(l, 1.0);
    }
    parts.ratio(mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReplayMode {
    /// Each mutant is retained with weight `1 - suppress_probability`.
    Expected,
    /// Each mutant is decided by a seeded draw.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayOutcome {
    pub retained: NfrParts,
    pub baseline: NfrParts,
    pub mode: NfrMode,
}

impl ReplayOutcome {
    pub fn nfr(&self) -> Option<f64> {
        self.retained.ratio(self.mode)
    }

    pub fn baseline_nfr(&self) -> Option<f64> {
        self.baseline.ratio(self.mode)
    }
}

/// Evaluation records prepared once for replay under many configurations.
#[derive(Debug, Clone)]
pub struct EvalSet {
    corpus: PreparedCorpus,
    ids: Vec<String>,
}

impl EvalSet {
    pub fn new(records: &[MutantRecord], profiles: &ProfileSet) -> Self {
        let corpus = PreparedCorpus::new(records, profiles);
        let ids = corpus.records.iter().map(|r| records[r.index].mutant_id.clone()).collect();
        EvalSet { corpus, ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn labels(&self) -> Vec<PerceivedFeedback> {
        self.corpus.records.iter().map(|r| r.feedback).collect()
    }

    fn keys(&self, store: &TemplateStore) -> Vec<TemplateKey> {
        self.corpus
            .records
            .iter()
            .map(|r| r.diff.render(store.config(), store.vocabulary()))
            .collect()
    }
}

fn keep_weights(
    keys: &[TemplateKey],
    ids: &[String],
    store: &TemplateStore,
    policy: SuppressionPolicy,
    mode: ReplayMode,
    seed: u64,
) -> Vec<f64> {
    let draws = DrawSource::new(seed);
    keys.iter()
        .zip(ids)
        .map(|(key, id)| {
            let counts = store.lookup(key).map(FeedbackCounts::from);
            let q = assess(counts, store.global(), policy).suppress_probability();
            match mode {
                ReplayMode::Expected => 1.0 - q,
                ReplayMode::Sampled => {
                    if q > 0.0 && draws.draw(id) < q {
                        0.0
                    } else {
                        1.0
                    }
                }
            }
        })
        .collect()
}

fn tally(labels: impl Iterator<Item = PerceivedFeedback>, weights: &[f64], nfr: NfrMode) -> ReplayOutcome {
    let mut retained = NfrParts::default();
    let mut baseline = NfrParts::default();
    for (label, &w) in labels.zip(weights) {
        baseline.add(label, 1.0);
        if w > 0.0 {
            retained.add(label, w);
        }
    }
    ReplayOutcome {
        retained,
        baseline,
        mode: nfr,
    }
}

/// Replays `eval` against `store` under `policy`; surfacing caps are not applied.
pub fn replay_nfr(
    eval: &EvalSet,
    store: &TemplateStore,
    policy: SuppressionPolicy,
    seed: u64,
    mode: ReplayMode,
    nfr: NfrMode,
) -> ReplayOutcome {
    let keys = eval.keys(store);
    let weights = keep_weights(&keys, &eval.ids, store, policy, mode, seed);
    tally(eval.corpus.records.iter().map(|r| r.feedback), &weights, nfr)
}

/// Sum of suppression probabilities per label.
pub fn expected_suppression_counts(
    eval: &EvalSet,
    store: &TemplateStore,
    policy: SuppressionPolicy,
) -> BTreeMap<PerceivedFeedback, f64> {
    let keys = eval.keys(store);
    let mut out: BTreeMap<PerceivedFeedback, f64> = PerceivedFeedback::ALL.iter().map(|&l| (l, 0.0)).collect();
    for (r, key) in eval.corpus.records.iter().zip(&keys) {
        let counts = store.lookup(key).map(FeedbackCounts::from);
        *out.get_mut(&r.feedback).expect("all labels present") += assess(counts, store.global(), policy).suppress_probability();
    }
    out
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunConfig {
    pub template: TemplateConfig,
    pub ranking: RankingConfig,
    pub suppression: SuppressionPolicy,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "template={}\tvocab={}\tcontext={}\tranking={}\tsuppression={}",
            self.template.abstraction,
            self.template.vocabulary_size,
            self.template.context_size,
            self.ranking,
            self.suppression
        )
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    /// Parses whitespace-separated `key=value` pairs; all five keys are required.
    fn from_str(s: &str) -> Result<Self> {
        let mut values: HashMap<&str, &str> = HashMap::new();
        for part in s.split_whitespace() {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("expected key=value, got `{part}`")))?;
            values.insert(k, v);
        }
        let get = |k: &str| values.get(k).copied().ok_or_else(|| Error::input(format!("grid row missing `{k}`")));
        let num = |k: &str| -> Result<usize> {
            let v = get(k)?;
            v.parse().map_err(|_| Error::input(format!("invalid `{k}` value `{v}`")))
        };
        Ok(RunConfig {
            template: TemplateConfig::new(get("template")?.parse()?, num("context")?, num("vocab")?),
            ranking: get("ranking")?.parse()?,
            suppression: get("suppression")?.parse()?,
        })
    }
}

/// The full grid in enumeration order: template type, vocabulary size,
/// context size, ranking, suppression.
pub fn full_grid() -> Vec<RunConfig> {
    let mut out = Vec::with_capacity(288);
    for abstraction in Abstraction::ALL {
        for vocab in GRID_VOCABULARY_SIZES {
            for context in GRID_CONTEXT_SIZES {
                for feedback_score in [FeedbackScore::Usefulness, FeedbackScore::BayesUsefulness] {
                    for kill_score in [KillScore::KillRatio, KillScore::KillCounter] {
                        for suppression in SuppressionPolicy::ALL {
                            out.push(RunConfig {
                                template: TemplateConfig::new(abstraction, context, vocab),
                                ranking: RankingConfig::new(feedback_score, kill_score),
                                suppression,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningRow {
    pub config: RunConfig,
    pub outcome: ReplayOutcome,
}

impl TuningRow {
    pub fn nfr(&self) -> Option<f64> {
        self.outcome.nfr()
    }

    pub fn retained_with_feedback(&self) -> f64 {
        self.outcome.retained.with_feedback
    }
}

impl fmt::Display for TuningRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nfr = self.nfr().map_or_else(|| "undefined".to_owned(), |r| r.to_string());
        let o = &self.outcome.retained;
        write!(
            f,
            "{}\tnfr={}\tnegative={}\tretained={}\tretained_with_feedback={}",
            self.config, nfr, o.negative, o.retained, o.with_feedback
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningReport {
    pub rows: Vec<TuningRow>,
    pub best: RunConfig,
    pub seed: u64,
    pub train_size: usize,
    pub eval_size: usize,
    pub baseline: NfrParts,
}

impl TuningReport {
    pub fn best_row(&self) -> &TuningRow {
        self.rows.iter().find(|r| r.config == self.best).expect("best is a row")
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# tuning seed={} train={} eval={} suppression=expected nfr={} baseline_nfr={}\n",
            self.seed,
            self.train_size,
            self.eval_size,
            NfrMode::AllSurfaced.as_str(),
            self.baseline
                .ratio(NfrMode::AllSurfaced)
                .map_or_else(|| "undefined".to_owned(), |r| r.to_string())
        );
        out.push_str("# best: lowest nfr, then most retained_with_feedback, then grid order\n");
        for row in &self.rows {
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out.push_str(&format!("best\t{}\n", self.best));
        out
    }
}

/// Lower ratio first, undefined last, then more retained feedback, then config order.
fn row_order(a: &TuningRow, b: &TuningRow) -> std::cmp::Ordering {
    let key = |r: &TuningRow| r.nfr().map_or((1, 0.0), |x| (0, x));
    let (ka, kb) = (key(a), key(b));
    ka.0.cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(b.retained_with_feedback().total_cmp(&a.retained_with_feedback()))
        .then(a.config.cmp(&b.config))
}

/// Replays every grid point with expected suppression and picks the best.
pub fn tune(
    train: &[MutantRecord],
    eval: &[MutantRecord],
    grid: &[RunConfig],
    seed: u64,
    profiles: &ProfileSet,
) -> Result<TuningReport> {
    if grid.is_empty() {
        return Err(Error::input("empty tuning grid"));
    }
    let train_ids: HashSet<&str> = train.iter().map(|r| r.mutant_id.as_str()).collect();
    if let Some(shared) = eval.iter().find(|r| train_ids.contains(r.mutant_id.as_str())) {
        return Err(Error::input(format!("mutant `{}` is in both train and eval", shared.mutant_id)));
    }
    let train_corpus = PreparedCorpus::new(train, profiles);
    let eval_set = EvalSet::new(eval, profiles);
    let labels = eval_set.labels();

    let mut stores: HashMap<TemplateConfig, (TemplateStore, Vec<TemplateKey>)> = HashMap::new();
    let mut rows = Vec::with_capacity(grid.len());
    for config in grid {
        let (store, keys) = stores.entry(config.template).or_insert_with(|| {
            let store = train_corpus.build_store(config.template, 0);
            let keys = eval_set.keys(&store);
            (store, keys)
        });
        let weights = keep_weights(keys, &eval_set.ids, store, config.suppression, ReplayMode::Expected, seed);
        rows.push(TuningRow {
            config: *config,
            outcome: tally(labels.iter().copied(), &weights, NfrMode::AllSurfaced),
        });
    }
    let best = rows.iter().min_by(|a, b| row_order(a, b)).expect("non-empty grid").config;
    let baseline = rows[0].outcome.baseline;
    Ok(TuningReport {
        rows,
        best,
        seed,
        train_size: train_corpus.records.len(),
        eval_size: eval_set.len(),
        baseline,
    })
}
