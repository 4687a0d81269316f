//! Retrospective reports over a store or a timestamped corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::PreparedCorpus;
use crate::diff_model::MutantRecord;
use crate::feedback::{PerceivedFeedback, TemplateStats};
use crate::lang_profile::ProfileSet;
use crate::scoring::controversy;
use crate::template_store::TemplateStore;
use crate::templating::{TemplateConfig, TemplateKey};

#[derive(Debug, Clone, PartialEq)]
pub struct ControversialTemplate {
    pub key: TemplateKey,
    pub stats: TemplateStats,
    pub controversy: f64,
}

/// The `k` templates with the highest controversy; ties by key.
pub fn top_controversial(store: &TemplateStore, k: usize) -> Vec<ControversialTemplate> {
    let mut all: Vec<ControversialTemplate> = store
        .entries()
        .iter()
        .map(|(key, stats)| ControversialTemplate {
            key: key.clone(),
            stats: *stats,
            controversy: controversy(stats),
        })
        .collect();
    all.sort_by(|a, b| b.controversy.total_cmp(&a.controversy).then_with(|| a.key.cmp(&b.key)));
    all.truncate(k);
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MonthlyCounts {
    pub mutants: u64,
    pub pu: u64,
    pub pnu: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeTemplate {
    pub key: TemplateKey,
    /// `YYYY-MM` to counts, for months in which the template appeared.
    pub months: BTreeMap<String, MonthlyCounts>,
    /// Mutants per month, averaged over every month in the corpus.
    pub average_monthly: f64,
}

/// Templates whose usefulness is below `threshold` in every month they
/// received feedback, and which averaged at least `min_monthly` mutants per
/// month. Records without a timestamp are ignored.
pub fn negative_templates(
    records: &[MutantRecord],
    config: TemplateConfig,
    profiles: &ProfileSet,
    min_monthly: f64,
    threshold: f64,
) -> Vec<NegativeTemplate> {
    let dated: Vec<MutantRecord> = records.iter().filter(|r| r.month().is_some()).cloned().collect();
    let corpus = PreparedCorpus::new(&dated, profiles);
    let vocabulary = corpus.vocabulary(config.vocabulary_size);

    let mut per_template: HashMap<TemplateKey, BTreeMap<String, MonthlyCounts>> = HashMap::new();
    let mut all_months: BTreeSet<String> = BTreeSet::new();
    for r in &corpus.records {
        let month = dated[r.index].month().expect("filtered on month").to_owned();
        all_months.insert(month.clone());
        let key = r.diff.render(&config, &vocabulary);
        let slot = per_template.entry(key).or_default().entry(month).or_default();
        slot.mutants += 1;
        match r.feedback {
            PerceivedFeedback::PerceivedUseful => slot.pu += 1,
            PerceivedFeedback::PerceivedNotUseful => slot.pnu += 1,
            _ => {}
        }
    }
    if all_months.is_empty() {
        return Vec::new();
    }

    let mut out: Vec<NegativeTemplate> = per_template
        .into_iter()
        .filter_map(|(key, months)| {
            let total: u64 = months.values().map(|m| m.mutants).sum();
            let average_monthly = total as f64 / all_months.len() as f64;
            let with_feedback: Vec<&MonthlyCounts> = months.values().filter(|m| m.pu + m.pnu > 0).collect();
            let negative = !with_feedback.is_empty()
                && with_feedback.iter().all(|m| (m.pu as f64) / ((m.pu + m.pnu) as f64) < threshold);
            (negative && average_monthly >= min_monthly).then_some(NegativeTemplate {
                key,
                months,
                average_monthly,
            })
        })
        .collect();
    out.sort_by(|a, b| b.average_monthly.total_cmp(&a.average_monthly).then_with(|| a.key.cmp(&b.key)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::{aggregate, KilledStatus};
    use crate::lang_profile::Language;
    use crate::pipeline::tests::record;
    use crate::templating::Vocabulary;

    #[test]
    fn controversy_ranking() {
        let key = |t: &str| TemplateKey::new(Language::Go, t);
        let mut labeled = Vec::new();
        for _ in 0..10 {
            labeled.push((key("-split"), PerceivedFeedback::PerceivedUseful, KilledStatus::NeverKilled));
            labeled.push((key("-split"), PerceivedFeedback::PerceivedNotUseful, KilledStatus::NeverKilled));
            labeled.push((key("-liked"), PerceivedFeedback::PerceivedUseful, KilledStatus::NeverKilled));
        }
        labeled.push((key("-small"), PerceivedFeedback::PerceivedUseful, KilledStatus::NeverKilled));
        labeled.push((key("-small"), PerceivedFeedback::PerceivedNotUseful, KilledStatus::NeverKilled));
        let store = TemplateStore::new(TemplateConfig::default(), Vocabulary::empty(), aggregate(labeled), 0);
        let top = top_controversial(&store, 2);
        assert_eq!(top.len(), 2);
        assert_eq!(top[0].key.text, "-split");
        assert_eq!(top[0].controversy, 5.0);
        assert_eq!(top[1].key.text, "-small");
    }

    #[test]
    fn negative_template_filter() {
        let mut records = Vec::new();
        let mut push = |id: String, diff: &str, pos: bool, neg: bool, month: &str| {
            let mut r = record(&id, Language::Python, diff, pos, neg, &[false]);
            r.timestamp = Some(format!("{month}-01"));
            records.push(r);
        };
        for (m, month) in ["2022-05", "2022-06"].iter().enumerate() {
            for i in 0..3 {
                push(format!("bad{m}{i}"), "-log(x)", i == 0, i > 0, month);
                push(format!("good{m}{i}"), "-x = y + 1", true, false, month);
            }
            push(format!("mixed{m}"), "-return a", m == 0, m == 1, month);
        }
        let out = negative_templates(&records, TemplateConfig::default(), &ProfileSet::builtin(), 2.0, 0.5);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].key.text, "-PYTHON_IDENTIFIER_0(PYTHON_IDENTIFIER_1)");
        assert_eq!(out[0].average_monthly, 3.0);
        assert_eq!(out[0].months["2022-06"], MonthlyCounts { mutants: 3, pu: 1, pnu: 2 });
        assert!(negative_templates(&records, TemplateConfig::default(), &ProfileSet::builtin(), 4.0, 0.5).is_empty());
    }
}
