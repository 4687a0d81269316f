//! Evaluation statistics: Kendall's tau-b and the 2x2 chi-square test.

use crate::error::{Error, Result};

/// Kendall's tau-b between two paired samples, in O(n log n).
///
/// Returns `Ok(None)` when either sample is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::input(format!("samples differ in length ({} and {})", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::input("tau-b needs at least two observations"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::input("tau-b input contains NaN"));
    }
    let n = x.len() as u64;
    let n0 = n * (n - 1) / 2;

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tied_pairs = |run: u64| run * (run - 1) / 2;
    let mut n1 = 0u64; // ties in x
    let mut n3 = 0u64; // ties in both
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        n1 += tied_pairs((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut l = k;
            while l < j && pairs[l].1 == pairs[k].1 {
                l += 1;
            }
            n3 += tied_pairs((l - k) as u64);
            k = l;
        }
        i = j;
    }

    // Discordant pairs are the inversions of y once sorted by (x, y).
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut n2 = 0u64; // ties in y
    let mut i = 0;
    while i < ys.len() {
        let mut j = i;
        while j < ys.len() && ys[j] == ys[i] {
            j += 1;
        }
        n2 += tied_pairs((j - i) as u64);
        i = j;
    }

    let nd = swaps;
    let nc = n0 + n3 - n1 - n2 - nd;
    let denom = ((n0 - n1) as f64) * ((n0 - n2) as f64);
    if denom == 0.0 {
        return Ok(None);
    }
    Ok(Some((nc as f64 - nd as f64) / denom.sqrt()))
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    #[default]
    None,
    Yates,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson's chi-square test of independence on a 2x2 table (one degree of freedom).
pub fn chi_square_2x2(table: [[u64; 2]; 2], correction: Correction) -> Result<ChiSquare> {
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    if rows.contains(&0) || cols.contains(&0) {
        return Err(Error::input("chi-square table has a zero marginal"));
    }
    let total = (rows[0] + rows[1]) as f64;
    let mut statistic = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (c, &observed) in row.iter().enumerate() {
            let expected = rows[r] as f64 * cols[c] as f64 / total;
            let mut diff = (observed as f64 - expected).abs();
            if correction == Correction::Yates {
                diff = (diff - 0.5).max(0.0);
            }
            statistic += diff * diff / expected;
        }
    }
    // Survival function of chi-square(1): P(X > s) = erfc(sqrt(s / 2)).
    let p_value = libm::erfc((statistic / 2.0).sqrt());
    Ok(ChiSquare { statistic, p_value })
}
