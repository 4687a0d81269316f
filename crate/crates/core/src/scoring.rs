//! Feedback scores, kill scores, ranking and controversy.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::feedback::TemplateStats;
use crate::templating::TemplateKey;

/// Corpus-level statistics over templates that received feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalStats {
    /// Mean of `pu + pnu`.
    pub m: f64,
    /// Mean usefulness score.
    pub avg_us: f64,
    /// Population standard deviation of usefulness scores.
    pub std_us: f64,
    /// Number of templates with `pu + pnu > 0`.
    pub template_count: u64,
    /// Set when no template has feedback; the other fields hold a neutral prior.
    pub degenerate: bool,
}

impl GlobalStats {
    pub fn neutral() -> Self {
        GlobalStats {
            m: 0.0,
            avg_us: 0.5,
            std_us: 0.0,
            template_count: 0,
            degenerate: true,
        }
    }

    /// Bitwise comparison, used to validate stored values.
    pub fn bit_eq(&self, other: &GlobalStats) -> bool {
        self.m.to_bits() == other.m.to_bits()
            && self.avg_us.to_bits() == other.avg_us.to_bits()
            && self.std_us.to_bits() == other.std_us.to_bits()
            && self.template_count == other.template_count
            && self.degenerate == other.degenerate
    }
}

/// Computes [`GlobalStats`]. The result depends only on the multiset of
/// `(pu, pnu)` pairs, not on iteration order.
pub fn compute_global_stats<'a>(stats: impl IntoIterator<Item = &'a TemplateStats>) -> GlobalStats {
    let mut pairs: Vec<(u64, u64)> = stats
        .into_iter()
        .filter(|s| s.pu + s.pnu > 0)
        .map(|s| (s.pu, s.pnu))
        .collect();
    if pairs.is_empty() {
        return GlobalStats::neutral();
    }
    pairs.sort_unstable();
    let n = pairs.len() as f64;
    let volume: u128 = pairs.iter().map(|&(pu, pnu)| (pu + pnu) as u128).sum();
    let scores: Vec<f64> = pairs.iter().map(|&(pu, pnu)| pu as f64 / (pu + pnu) as f64).collect();
    let avg_us = scores.iter().sum::<f64>() / n;
    let variance = scores.iter().map(|u| (u - avg_us) * (u - avg_us)).sum::<f64>() / n;
    GlobalStats {
        m: volume as f64 / n,
        avg_us,
        std_us: variance.sqrt(),
        template_count: pairs.len() as u64,
        degenerate: false,
    }
}

/// `pu / (pu + pnu)`, undefined without feedback.
pub fn usefulness_score(stats: &TemplateStats) -> Option<f64> {
    let n = stats.pu + stats.pnu;
    (n > 0).then(|| stats.pu as f64 / n as f64)
}

/// Shrinkage weight `(pu + pnu) / (pu + pnu + m)`.
pub fn bayes_weight(stats: &TemplateStats, global: &GlobalStats) -> f64 {
    let n = (stats.pu + stats.pnu) as f64;
    if n == 0.0 {
        0.0
    } else {
        n / (n + global.m)
    }
}

pub fn bayes_usefulness_score(stats: &TemplateStats, global: &GlobalStats) -> f64 {
    match usefulness_score(stats) {
        None => global.avg_us,
        Some(us) => {
            let w = bayes_weight(stats, global);
            w * us + (1.0 - w) * global.avg_us
        }
    }
}

pub fn kill_ratio_score(stats: &TemplateStats) -> Result<f64> {
    if stats.g == 0 {
        return Err(Error::input("kill ratio of a template with no instances"));
    }
    Ok(stats.k as f64 / stats.g as f64)
}

/// `(ak, ek, mk, nk) / g`.
pub type KillTuple = [f64; 4];

pub fn kill_counter_score(stats: &TemplateStats) -> Result<KillTuple> {
    if stats.g == 0 {
        return Err(Error::input("kill counter of a template with no instances"));
    }
    let g = stats.g as f64;
    Ok([stats.ak as f64 / g, stats.ek as f64 / g, stats.mk as f64 / g, stats.nk as f64 / g])
}

/// `us * (1 - us) * (pu + pnu)`; zero without feedback.
pub fn controversy(stats: &TemplateStats) -> f64 {
    match usefulness_score(stats) {
        None => 0.0,
        Some(us) => us * (1.0 - us) * (stats.pu + stats.pnu) as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeedbackScore {
    Usefulness,
    BayesUsefulness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KillScore {
    KillRatio,
    KillCounter,
}

/// Which end of the kill-counter order ranks first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum KillCounterPolarity {
    #[default]
    MoreAlwaysKilledFirst,
    FewerAlwaysKilledFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankingConfig {
    pub feedback_score: FeedbackScore,
    pub kill_score: KillScore,
    pub kill_counter_polarity: KillCounterPolarity,
}

impl RankingConfig {
    pub fn new(feedback_score: FeedbackScore, kill_score: KillScore) -> Self {
        RankingConfig {
            feedback_score,
            kill_score,
            kill_counter_polarity: KillCounterPolarity::default(),
        }
    }

    /// The four feedback/kill combinations.
    pub fn all() -> [RankingConfig; 4] {
        use FeedbackScore::*;
        use KillScore::*;
        [
            RankingConfig::new(Usefulness, KillRatio),
            RankingConfig::new(Usefulness, KillCounter),
            RankingConfig::new(BayesUsefulness, KillRatio),
            RankingConfig::new(BayesUsefulness, KillCounter),
        ]
    }
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig::new(FeedbackScore::BayesUsefulness, KillScore::KillCounter)
    }
}

impl fmt::Display for RankingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let feedback = match self.feedback_score {
            FeedbackScore::Usefulness => "usefulness",
            FeedbackScore::BayesUsefulness => "bayes",
        };
        let kill = match self.kill_score {
            KillScore::KillRatio => "kill-ratio",
            KillScore::KillCounter => "kill-counter",
        };
        write!(f, "{feedback}x{kill}")
    }
}

impl FromStr for RankingConfig {
    type Err = Error;

    /// Accepts `bayesxkill-counter`, `bayes-x-kill-counter` and `bayes:kill-counter`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("unknown ranking `{s}` (expected {{usefulness|bayes}}x{{kill-ratio|kill-counter}})"));
        let (feedback, rest) = if let Some(rest) = s.strip_prefix("usefulness") {
            (FeedbackScore::Usefulness, rest)
        } else if let Some(rest) = s.strip_prefix("bayes") {
            (FeedbackScore::BayesUsefulness, rest)
        } else {
            return Err(bad());
        };
        let kill = ["-x-", "x", ":", "+"]
            .iter()
            .find_map(|sep| rest.strip_prefix(sep))
            .ok_or_else(bad)?;
        let kill = match kill {
            "kill-ratio" => KillScore::KillRatio,
            "kill-counter" => KillScore::KillCounter,
            _ => return Err(bad()),
        };
        Ok(RankingConfig::new(feedback, kill))
    }
}

/// Every score of one template, or the neutral defaults for an unseen one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown {
    pub us: Option<f64>,
    pub w: f64,
    pub bayes_us: f64,
    pub kill_ratio: f64,
    pub kill_tuple: KillTuple,
    pub controversy: f64,
    pub seen: bool,
}

impl ScoreBreakdown {
    pub fn compute(stats: Option<&TemplateStats>, global: &GlobalStats) -> Self {
        match stats {
            Some(s) if s.g > 0 => ScoreBreakdown {
                us: usefulness_score(s),
                w: bayes_weight(s, global),
                bayes_us: bayes_usefulness_score(s, global),
                kill_ratio: kill_ratio_score(s).expect("g > 0"),
                kill_tuple: kill_counter_score(s).expect("g > 0"),
                controversy: controversy(s),
                seen: true,
            },
            _ => ScoreBreakdown {
                us: None,
                w: 0.0,
                bayes_us: global.avg_us,
                kill_ratio: 0.5,
                kill_tuple: [0.0; 4],
                controversy: 0.0,
                seen: false,
            },
        }
    }

    /// Undefined usefulness falls back to `avg_us` under either score.
    pub fn feedback_score(&self, config: &RankingConfig) -> f64 {
        match config.feedback_score {
            FeedbackScore::Usefulness => self.us.unwrap_or(self.bayes_us),
            FeedbackScore::BayesUsefulness => self.bayes_us,
        }
    }

    /// The kill score as printed in ranked output.
    pub fn kill_score_text(&self, config: &RankingConfig) -> String {
        match config.kill_score {
            KillScore::KillRatio => format!("{}", self.kill_ratio),
            KillScore::KillCounter => {
                let [a, e, m, n] = self.kill_tuple;
                format!("({a},{e},{m},{n})")
            }
        }
    }

    /// Ordering under which the better kill score is `Greater`.
    pub fn cmp_kill(&self, other: &ScoreBreakdown, config: &RankingConfig) -> Ordering {
        match config.kill_score {
            KillScore::KillRatio => self.kill_ratio.total_cmp(&other.kill_ratio),
            KillScore::KillCounter => {
                let ord = self
                    .kill_tuple
                    .iter()
                    .zip(&other.kill_tuple)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal);
                match config.kill_counter_polarity {
                    KillCounterPolarity::MoreAlwaysKilledFirst => ord,
                    KillCounterPolarity::FewerAlwaysKilledFirst => ord.reverse(),
                }
            }
        }
    }
}

/// Read access to aggregated template statistics.
pub trait TemplateLookup {
    fn lookup(&self, key: &TemplateKey) -> Option<&TemplateStats>;
}

impl TemplateLookup for HashMap<TemplateKey, TemplateStats> {
    fn lookup(&self, key: &TemplateKey) -> Option<&TemplateStats> {
        self.get(key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedMutant {
    /// 1-based position.
    pub rank: usize,
    pub mutant_id: String,
    pub key: TemplateKey,
    pub stats: Option<TemplateStats>,
    pub scores: ScoreBreakdown,
    pub feedback_score: f64,
}

/// Sorts candidates by feedback score, then kill score (both descending),
/// then template text and mutant id.
pub fn rank<L: TemplateLookup + ?Sized>(
    candidates: Vec<(String, TemplateKey)>,
    store: &L,
    global: &GlobalStats,
    config: &RankingConfig,
) -> Vec<RankedMutant> {
    let mut scored: Vec<RankedMutant> = candidates
        .into_iter()
        .map(|(mutant_id, key)| {
            let stats = store.lookup(&key).copied();
            let scores = ScoreBreakdown::compute(stats.as_ref(), global);
            RankedMutant {
                rank: 0,
                feedback_score: scores.feedback_score(config),
                mutant_id,
                key,
                stats,
                scores,
            }
        })
        .collect();
    scored.sort_by(|a, b| {
        b.feedback_score
            .total_cmp(&a.feedback_score)
            .then_with(|| b.scores.cmp_kill(&a.scores, config))
            .then_with(|| a.key.text.cmp(&b.key.text))
            .then_with(|| a.key.language.cmp(&b.key.language))
            .then_with(|| a.mutant_id.cmp(&b.mutant_id))
    });
    for (i, m) in scored.iter_mut().enumerate() {
        m.rank = i + 1;
    }
    scored
}
