//! Label derivation and per-template counters.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::ops::Add;

use crate::error::{Error, Result};

/// How developers perceived a mutant across its snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerceivedFeedback {
    PerceivedUseful,
    PerceivedNotUseful,
    MixedFeedback,
    NoFeedback,
}

impl PerceivedFeedback {
    pub const ALL: [PerceivedFeedback; 4] = [
        PerceivedFeedback::PerceivedUseful,
        PerceivedFeedback::PerceivedNotUseful,
        PerceivedFeedback::MixedFeedback,
        PerceivedFeedback::NoFeedback,
    ];

    pub fn has_feedback(self) -> bool {
        self != PerceivedFeedback::NoFeedback
    }

    /// Carries at least one thumbs-down.
    pub fn is_negative(self) -> bool {
        matches!(self, PerceivedFeedback::PerceivedNotUseful | PerceivedFeedback::MixedFeedback)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PerceivedFeedback::PerceivedUseful => "PU",
            PerceivedFeedback::PerceivedNotUseful => "PNU",
            PerceivedFeedback::MixedFeedback => "MF",
            PerceivedFeedback::NoFeedback => "NF",
        }
    }
}

impl fmt::Display for PerceivedFeedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether tests killed a mutant across its snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KilledStatus {
    AlwaysKilled,
    NeverKilled,
    EventuallyKilled,
    MixedKilled,
}

impl KilledStatus {
    pub const ALL: [KilledStatus; 4] = [
        KilledStatus::AlwaysKilled,
        KilledStatus::NeverKilled,
        KilledStatus::EventuallyKilled,
        KilledStatus::MixedKilled,
    ];

    /// Killed in at least one snapshot.
    pub fn was_killed(self) -> bool {
        self != KilledStatus::NeverKilled
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KilledStatus::AlwaysKilled => "AK",
            KilledStatus::NeverKilled => "NK",
            KilledStatus::EventuallyKilled => "EK",
            KilledStatus::MixedKilled => "MK",
        }
    }
}

impl fmt::Display for KilledStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn derive_perceived_feedback(pos: &[bool], neg: &[bool]) -> Result<PerceivedFeedback> {
    if pos.is_empty() || pos.len() != neg.len() {
        return Err(Error::input(format!(
            "feedback lists must have equal non-zero length (got {} and {})",
            pos.len(),
            neg.len()
        )));
    }
    let any_pos = pos.iter().any(|&b| b);
    let any_neg = neg.iter().any(|&b| b);
    Ok(match (any_pos, any_neg) {
        (true, false) => PerceivedFeedback::PerceivedUseful,
        (false, true) => PerceivedFeedback::PerceivedNotUseful,
        (true, true) => PerceivedFeedback::MixedFeedback,
        (false, false) => PerceivedFeedback::NoFeedback,
    })
}

/// `EventuallyKilled` means one or more `false` followed by one or more `true`.
pub fn derive_killed_status(killed: &[bool]) -> Result<KilledStatus> {
    if killed.is_empty() {
        return Err(Error::input("killed list is empty"));
    }
    if killed.iter().all(|&b| b) {
        return Ok(KilledStatus::AlwaysKilled);
    }
    if killed.iter().all(|&b| !b) {
        return Ok(KilledStatus::NeverKilled);
    }
    let first_kill = killed.iter().position(|&b| b).expect("not all false");
    if killed[first_kill..].iter().all(|&b| b) {
        Ok(KilledStatus::EventuallyKilled)
    } else {
        Ok(KilledStatus::MixedKilled)
    }
}

/// Label counters for one template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct TemplateStats {
    pub pu: u64,
    pub pnu: u64,
    pub mf: u64,
    pub nf: u64,
    pub ak: u64,
    pub nk: u64,
    pub ek: u64,
    pub mk: u64,
    /// Generated mutants.
    pub g: u64,
    /// Mutants killed in at least one snapshot.
    pub k: u64,
}

impl TemplateStats {
    pub fn zero() -> Self {
        TemplateStats::default()
    }

    pub fn single(feedback: PerceivedFeedback, killed: KilledStatus) -> Self {
        let mut s = TemplateStats::zero();
        s.record(feedback, killed);
        s
    }

    pub fn record(&mut self, feedback: PerceivedFeedback, killed: KilledStatus) {
        match feedback {
            PerceivedFeedback::PerceivedUseful => self.pu += 1,
            PerceivedFeedback::PerceivedNotUseful => self.pnu += 1,
            PerceivedFeedback::MixedFeedback => self.mf += 1,
            PerceivedFeedback::NoFeedback => self.nf += 1,
        }
        match killed {
            KilledStatus::AlwaysKilled => self.ak += 1,
            KilledStatus::NeverKilled => self.nk += 1,
            KilledStatus::EventuallyKilled => self.ek += 1,
            KilledStatus::MixedKilled => self.mk += 1,
        }
        self.g += 1;
        if killed.was_killed() {
            self.k += 1;
        }
    }

    /// Mutants with a usable usefulness signal.
    pub fn feedback_volume(&self) -> u64 {
        self.pu + self.pnu
    }

    pub fn count_of(&self, feedback: PerceivedFeedback) -> u64 {
        match feedback {
            PerceivedFeedback::PerceivedUseful => self.pu,
            PerceivedFeedback::PerceivedNotUseful => self.pnu,
            PerceivedFeedback::MixedFeedback => self.mf,
            PerceivedFeedback::NoFeedback => self.nf,
        }
    }

    /// Counter invariants: both label families sum to `g`, and `k <= g`.
    pub fn check(&self) -> Result<()> {
        let feedback_total = self.pu + self.pnu + self.mf + self.nf;
        let kill_total = self.ak + self.nk + self.ek + self.mk;
        if feedback_total != self.g || kill_total != self.g {
            return Err(Error::input(format!(
                "counter sums disagree: feedback {feedback_total}, killed {kill_total}, g {}",
                self.g
            )));
        }
        if self.k > self.g {
            return Err(Error::input(format!("k {} exceeds g {}", self.k, self.g)));
        }
        Ok(())
    }
}

impl Add for TemplateStats {
    type Output = TemplateStats;

    fn add(self, o: TemplateStats) -> TemplateStats {
        TemplateStats {
            pu: self.pu + o.pu,
            pnu: self.pnu + o.pnu,
            mf: self.mf + o.mf,
            nf: self.nf + o.nf,
            ak: self.ak + o.ak,
            nk: self.nk + o.nk,
            ek: self.ek + o.ek,
            mk: self.mk + o.mk,
            g: self.g + o.g,
            k: self.k + o.k,
        }
    }
}

/// Component-wise sum.
pub fn merge_stats(a: TemplateStats, b: TemplateStats) -> TemplateStats {
    a + b
}

/// Counts label occurrences per key.
pub fn aggregate<K, I>(labeled: I) -> HashMap<K, TemplateStats>
where
    K: Eq + Hash,
    I: IntoIterator<Item = (K, PerceivedFeedback, KilledStatus)>,
{
    let mut out: HashMap<K, TemplateStats> = HashMap::new();
    for (key, feedback, killed) in labeled {
        out.entry(key).or_default().record(feedback, killed);
    }
    out
}

/// Merges `other` into `into` entry-wise.
pub fn merge_maps<K: Eq + Hash>(into: &mut HashMap<K, TemplateStats>, other: HashMap<K, TemplateStats>) {
    for (key, stats) in other {
        let slot = into.entry(key).or_default();
        *slot = *slot + stats;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use KilledStatus::*;
    use PerceivedFeedback::*;

    const T: bool = true;
    const F: bool = false;

    #[test]
    fn perceived_feedback_examples() {
        assert_eq!(derive_perceived_feedback(&[T, F], &[F, F]).unwrap(), PerceivedUseful);
        assert_eq!(derive_perceived_feedback(&[T], &[T]).unwrap(), MixedFeedback);
        assert_eq!(derive_perceived_feedback(&[F], &[F]).unwrap(), NoFeedback);
        assert_eq!(derive_perceived_feedback(&[F, F], &[F, T]).unwrap(), PerceivedNotUseful);
        assert!(derive_perceived_feedback(&[T], &[T, F]).is_err());
        assert!(derive_perceived_feedback(&[], &[]).is_err());
    }

    #[test]
    fn killed_status_examples() {
        assert_eq!(derive_killed_status(&[T, T, T]).unwrap(), AlwaysKilled);
        assert_eq!(derive_killed_status(&[F, F, T]).unwrap(), EventuallyKilled);
        assert_eq!(derive_killed_status(&[T, F, T]).unwrap(), MixedKilled);
        assert_eq!(derive_killed_status(&[F, T, F]).unwrap(), MixedKilled);
        assert_eq!(derive_killed_status(&[T]).unwrap(), AlwaysKilled);
        assert_eq!(derive_killed_status(&[F]).unwrap(), NeverKilled);
        assert!(derive_killed_status(&[]).is_err());
    }

    #[test]
    fn aggregate_counts_per_key() {
        let out = aggregate(vec![
            ("t", PerceivedUseful, NeverKilled),
            ("t", PerceivedUseful, AlwaysKilled),
            ("t", PerceivedNotUseful, EventuallyKilled),
        ]);
        let s = out["t"];
        assert_eq!((s.pu, s.pnu, s.g, s.k), (2, 1, 3, 2));
        assert_eq!((s.ak, s.nk, s.ek, s.mk), (1, 1, 1, 0));
        s.check().unwrap();
        assert!(aggregate(Vec::<(&str, _, _)>::new()).is_empty());
    }

    #[test]
    fn merge_identity() {
        let x = TemplateStats::single(MixedFeedback, MixedKilled);
        assert_eq!(merge_stats(x, TemplateStats::zero()), x);
    }

    #[test]
    fn check_rejects_broken_counters() {
        let mut s = TemplateStats::single(PerceivedUseful, AlwaysKilled);
        s.pu += 1;
        assert!(s.check().is_err());
        let mut s = TemplateStats::single(PerceivedUseful, AlwaysKilled);
        s.k = 2;
        assert!(s.check().is_err());
    }

    fn label() -> impl Strategy<Value = (u8, PerceivedFeedback, KilledStatus)> {
        (0u8..6, prop::sample::select(PerceivedFeedback::ALL.to_vec()), prop::sample::select(KilledStatus::ALL.to_vec()))
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(a in label(), b in label(), c in label()) {
            let (a, b, c) = (TemplateStats::single(a.1, a.2), TemplateStats::single(b.1, b.2), TemplateStats::single(c.1, c.2));
            prop_assert_eq!(merge_stats(a, b), merge_stats(b, a));
            prop_assert_eq!(merge_stats(merge_stats(a, b), c), merge_stats(a, merge_stats(b, c)));
        }

        #[test]
        fn aggregation_is_order_and_partition_independent(
            labels in prop::collection::vec(label(), 0..60),
            split in 0usize..60,
            seed in any::<u64>(),
        ) {
            let whole = aggregate(labels.clone());
            let mut shuffled = labels.clone();
            // Deterministic permutation from the seed.
            shuffled.sort_by_key(|l| (seed ^ (l.0 as u64)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            prop_assert_eq!(&aggregate(shuffled), &whole);

            let split = split.min(labels.len());
            let mut left = aggregate(labels[..split].to_vec());
            merge_maps(&mut left, aggregate(labels[split..].to_vec()));
            prop_assert_eq!(&left, &whole);

            let total: u64 = whole.values().map(|s| s.g).sum();
            prop_assert_eq!(total as usize, labels.len());
            for s in whole.values() {
                prop_assert!(s.check().is_ok());
            }
        }
    }
}
