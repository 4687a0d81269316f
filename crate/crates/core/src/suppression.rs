//! Suppression policies.
//!
//! Unseen templates and templates without useful/not-useful feedback are never
//! suppressed. Policies only ever see [`FeedbackCounts`], so mixed feedback,
//! missing feedback and kill outcomes cannot influence a decision.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feedback::TemplateStats;
use crate::scoring::GlobalStats;

/// Φ(z) for the standard normal distribution.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuppressionPolicy {
    None,
    AverageThreshold,
    Probabilistic,
}

impl SuppressionPolicy {
    pub const ALL: [SuppressionPolicy; 3] = [
        SuppressionPolicy::None,
        SuppressionPolicy::AverageThreshold,
        SuppressionPolicy::Probabilistic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuppressionPolicy::None => "none",
            SuppressionPolicy::AverageThreshold => "average",
            SuppressionPolicy::Probabilistic => "probabilistic",
        }
    }
}

impl fmt::Display for SuppressionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuppressionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuppressionPolicy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown suppression policy `{s}` (expected none, average or probabilistic)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionReason {
    PolicyNone,
    UnseenTemplate,
    NoFeedback,
    AboveAverage,
    BelowThreshold,
    ProbabilisticDrawKeep,
    ProbabilisticDrawSuppress,
}

impl DecisionReason {
    pub const ALL: [DecisionReason; 7] = [
        DecisionReason::PolicyNone,
        DecisionReason::UnseenTemplate,
        DecisionReason::NoFeedback,
        DecisionReason::AboveAverage,
        DecisionReason::BelowThreshold,
        DecisionReason::ProbabilisticDrawKeep,
        DecisionReason::ProbabilisticDrawSuppress,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DecisionReason::PolicyNone => "POLICY_NONE",
            DecisionReason::UnseenTemplate => "UNSEEN_TEMPLATE",
            DecisionReason::NoFeedback => "NO_FEEDBACK",
            DecisionReason::AboveAverage => "ABOVE_AVERAGE",
            DecisionReason::BelowThreshold => "BELOW_THRESHOLD",
            DecisionReason::ProbabilisticDrawKeep => "PROBABILISTIC_DRAW_KEEP",
            DecisionReason::ProbabilisticDrawSuppress => "PROBABILISTIC_DRAW_SUPPRESS",
        }
    }

    pub fn suppresses(self) -> bool {
        matches!(self, DecisionReason::BelowThreshold | DecisionReason::ProbabilisticDrawSuppress)
    }
}

impl fmt::Display for DecisionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecisionReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecisionReason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown decision reason `{s}`")))
    }
}

/// The only template counters a policy may read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackCounts {
    pub pu: u64,
    pub pnu: u64,
}

impl FeedbackCounts {
    pub fn usefulness(&self) -> Option<f64> {
        let n = self.pu + self.pnu;
        (n > 0).then(|| self.pu as f64 / n as f64)
    }
}

impl From<&TemplateStats> for FeedbackCounts {
    fn from(s: &TemplateStats) -> Self {
        FeedbackCounts { pu: s.pu, pnu: s.pnu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionDecision {
    pub suppressed: bool,
    pub reason: DecisionReason,
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub suppress_probability: Option<f64>,
    pub draw: Option<f64>,
}

impl SuppressionDecision {
    fn keep(reason: DecisionReason) -> Self {
        SuppressionDecision {
            suppressed: false,
            reason,
            z: None,
            p: None,
            suppress_probability: None,
            draw: None,
        }
    }
}

/// The deterministic part of a decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Assessment {
    Keep(DecisionReason),
    Suppress,
    /// Suppress with probability `q = 1 - p`.
    Draw { z: f64, p: f64, q: f64 },
}

impl Assessment {
    /// Probability that the decision suppresses.
    pub fn suppress_probability(&self) -> f64 {
        match *self {
            Assessment::Keep(_) => 0.0,
            Assessment::Suppress => 1.0,
            Assessment::Draw { q, .. } => q,
        }
    }
}

pub fn assess(counts: Option<FeedbackCounts>, global: &GlobalStats, policy: SuppressionPolicy) -> Assessment {
    let Some(counts) = counts else {
        return Assessment::Keep(DecisionReason::UnseenTemplate);
    };
    let Some(us) = counts.usefulness() else {
        return Assessment::Keep(DecisionReason::NoFeedback);
    };
    match policy {
        SuppressionPolicy::None => Assessment::Keep(DecisionReason::PolicyNone),
        _ if us >= global.avg_us => Assessment::Keep(DecisionReason::AboveAverage),
        SuppressionPolicy::AverageThreshold => Assessment::Suppress,
        SuppressionPolicy::Probabilistic => {
            let z = if global.std_us > 0.0 {
                (us - global.avg_us) / global.std_us
            } else {
                f64::NEG_INFINITY
            };
            let p = standard_normal_cdf(z);
            Assessment::Draw { z, p, q: 1.0 - p }
        }
    }
}

/// Decides one mutant; `draw` is called at most once and must return a value in `[0, 1)`.
pub fn decide(
    counts: Option<FeedbackCounts>,
    global: &GlobalStats,
    policy: SuppressionPolicy,
    draw: impl FnOnce() -> f64,
) -> SuppressionDecision {
    match assess(counts, global, policy) {
        Assessment::Keep(reason) => SuppressionDecision::keep(reason),
        Assessment::Suppress => SuppressionDecision {
            suppressed: true,
            reason: DecisionReason::BelowThreshold,
            z: None,
            p: None,
            suppress_probability: Some(1.0),
            draw: None,
        },
        Assessment::Draw { z, p, q } => {
            let value = draw();
            let suppressed = value < q;
            SuppressionDecision {
                suppressed,
                reason: if suppressed {
                    DecisionReason::ProbabilisticDrawSuppress
                } else {
                    DecisionReason::ProbabilisticDrawKeep
                },
                z: Some(z),
                p: Some(p),
                suppress_probability: Some(q),
                draw: Some(value),
            }
        }
    }
}

/// Per-mutant uniform draws keyed by `(seed, mutant_id)`, independent of
/// the order in which mutants are decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawSource {
    seed: u64,
}

impl DrawSource {
    pub fn new(seed: u64) -> Self {
        DrawSource { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw(&self, mutant_id: &str) -> f64 {
        ChaCha8Rng::seed_from_u64(fnv1a(self.seed, mutant_id.as_bytes())).gen::<f64>()
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    seed.to_le_bytes()
        .iter()
        .chain(bytes)
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}
