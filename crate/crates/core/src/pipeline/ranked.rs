//! Ranked-output records: one mutant per line, tab-separated `key=value`
//! fields in a fixed order. Absent values are written as `none`.

use std::io::BufRead;

use crate::diff_model::{escape_field, unescape_field};
use crate::error::{Error, Result};
use crate::suppression::DecisionReason;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRecord {
    pub mutant_id: String,
    pub changelist_id: String,
    pub filename: String,
    pub rank: usize,
    pub feedback_score: f64,
    /// A ratio, or an `(ak,ek,mk,nk)` tuple, depending on the ranking.
    pub kill_score: String,
    pub suppressed: bool,
    pub reason: DecisionReason,
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub suppress_probability: Option<f64>,
}

const KEYS: [&str; 11] = [
    "mutant_id",
    "changelist_id",
    "filename",
    "rank",
    "feedback_score",
    "kill_score",
    "suppressed",
    "reason",
    "z",
    "p",
    "suppress_probability",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_owned(), |x| x.to_string())
}

pub fn write_ranked_record(r: &RankedRecord) -> String {
    let values = [
        escape_field(&r.mutant_id),
        escape_field(&r.changelist_id),
        escape_field(&r.filename),
        r.rank.to_string(),
        r.feedback_score.to_string(),
        escape_field(&r.kill_score),
        r.suppressed.to_string(),
        r.reason.to_string(),
        opt(r.z),
        opt(r.p),
        opt(r.suppress_probability),
    ];
    KEYS.iter()
        .zip(values)
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join("\t")
}

impl RankedRecord {
    pub fn parse_line(line: &str) -> Result<RankedRecord> {
        let mut fields: [Option<String>; 11] = Default::default();
        for part in line.split('\t') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("field without `=`: `{part}`")))?;
            if let Some(i) = KEYS.iter().position(|key| *key == k) {
                fields[i] = Some(unescape_field(v)?);
            }
        }
        let mut take = |i: usize| fields[i].take().ok_or_else(|| Error::input(format!("missing field `{}`", KEYS[i])));
        let num = |s: String, key: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::input(format!("invalid `{key}` value `{s}`")))
        };
        let opt_num = |s: String, key: &str| -> Result<Option<f64>> {
            if s == "none" {
                Ok(None)
            } else {
                num(s, key).map(Some)
            }
        };
        let mutant_id = take(0)?;
        let changelist_id = take(1)?;
        let filename = take(2)?;
        let rank_text = take(3)?;
        let rank = rank_text
            .parse()
            .map_err(|_| Error::input(format!("invalid rank `{rank_text}`")))?;
        let feedback_score = num(take(4)?, "feedback_score")?;
        let kill_score = take(5)?;
        let suppressed = match take(6)?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(Error::input(format!("invalid `suppressed` value `{other}`"))),
        };
        let reason: DecisionReason = take(7)?.parse()?;
        if reason.suppresses() != suppressed {
            return Err(Error::input(format!("reason {reason} disagrees with suppressed={suppressed}")));
        }
        Ok(RankedRecord {
            mutant_id,
            changelist_id,
            filename,
            rank,
            feedback_score,
            kill_score,
            suppressed,
            reason,
            z: opt_num(take(8)?, "z")?,
            p: opt_num(take(9)?, "p")?,
            suppress_probability: opt_num(take(10)?, "suppress_probability")?,
        })
    }
}

/// Reads ranked records; errors carry 1-based line numbers.
pub fn read_ranked_records<R: BufRead>(reader: R) -> Result<Vec<RankedRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(RankedRecord::parse_line(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}
