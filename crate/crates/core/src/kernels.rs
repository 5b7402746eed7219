// SPDX-License-Identifier: Apache-2.0

//! Exact edit-distance and pattern-matching kernels.
//!
//! [`banded_edit_distance`] is Ukkonen's diagonal band: only cells within `k`
//! of the main diagonal are evaluated and values are capped at `k + 1`.
//! [`kbounded_scan`] is the Sellers column DP with Ukkonen's "last active
//! cell" cutoff, so each column touches only the rows whose value is at
//! most `k` plus one.

/// Outcome of a threshold-limited distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdResult {
    /// The exact distance, or `None` if it exceeds `threshold`.
    pub value: Option<usize>,
    pub threshold: usize,
}

impl ThresholdResult {
    #[inline]
    pub fn is_within(&self) -> bool {
        self.value.is_some()
    }

    #[inline]
    pub fn exceeds(&self) -> bool {
        self.value.is_none()
    }
}

/// Plain Levenshtein distance with a rolling row.
pub fn full_edit_distance(a: &[u8], b: &[u8]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb))
                .min(row[j + 1] + 1)
                .min(row[j] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// Edit distance of `a` and `b` if it is at most `k`, in
/// `O((|a| + 1) * (k + 1) + |b|)` time.
pub fn banded_edit_distance(a: &[u8], b: &[u8], k: usize) -> ThresholdResult {
    let exceeds = ThresholdResult {
        value: None,
        threshold: k,
    };
    let (la, lb) = (a.len(), b.len());
    if la.abs_diff(lb) > k {
        return exceeds;
    }
    let cap = k + 1;
    let mut prev = vec![cap; lb + 1];
    let mut cur = vec![cap; lb + 1];
    for (j, cell) in prev.iter_mut().enumerate().take(k.min(lb) + 1) {
        *cell = j;
    }
    for i in 1..=la {
        let lo = i.saturating_sub(k);
        let hi = (i + k).min(lb);
        let start = if lo == 0 {
            cur[0] = i.min(cap);
            1
        } else {
            cur[lo - 1] = cap;
            lo
        };
        let ca = a[i - 1];
        let mut row_min = if lo == 0 { cur[0] } else { cap };
        for j in start..=hi {
            let v = (prev[j - 1] + usize::from(ca != b[j - 1]))
                .min(prev[j] + 1)
                .min(cur[j - 1] + 1)
                .min(cap);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < lb {
            cur[hi + 1] = cap;
        }
        if row_min > k {
            return exceeds;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let v = prev[lb];
    ThresholdResult {
        value: (v <= k).then_some(v),
        threshold: k,
    }
}

/// Exact `k_t` for every 1-indexed end position `t` of `text`.
pub fn sellers_scan(text: &[u8], pattern: &[u8]) -> Vec<usize> {
    let m = pattern.len();
    let mut col: Vec<usize> = (0..=m).collect();
    let mut out = Vec::with_capacity(text.len());
    for &c in text {
        let mut diag = col[0];
        for i in 1..=m {
            let next = (diag + usize::from(pattern[i - 1] != c))
                .min(col[i] + 1)
                .min(col[i - 1] + 1);
            diag = col[i];
            col[i] = next;
        }
        out.push(col[m]);
    }
    out
}

/// For every end position of `s`, the best-match cost of `r` if it is at
/// most `k`.
pub fn kbounded_scan(s: &[u8], r: &[u8], k: usize) -> Vec<Option<usize>> {
    let m = r.len();
    let cap = k + 1;
    let mut col: Vec<usize> = (0..=m).map(|i| i.min(cap)).collect();
    // largest row whose value is <= k
    let mut last = k.min(m);
    let mut out = Vec::with_capacity(s.len());
    for &c in s {
        let top = (last + 1).min(m);
        let mut diag = col[0];
        for i in 1..=top {
            let next = (diag + usize::from(r[i - 1] != c))
                .min(col[i] + 1)
                .min(col[i - 1] + 1)
                .min(cap);
            diag = col[i];
            col[i] = next;
        }
        // rows above `top` keep their capped value; their true value is > k
        last = top;
        while col[last] > k {
            last -= 1;
        }
        out.push((last == m).then_some(col[m]));
    }
    out
}

/// Per-position flags: is there a substring ending here within `k` of the
/// query string?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndPositionSet {
    flags: Vec<bool>,
    pub k: usize,
}

impl EndPositionSet {
    /// Flag at 1-indexed position `t`.
    pub fn get(&self, t: usize) -> bool {
        t >= 1 && self.flags.get(t - 1).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// 1-indexed positions whose flag is set.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i + 1))
    }
}

pub fn kbounded_end_positions(s: &[u8], r: &[u8], k: usize) -> EndPositionSet {
    EndPositionSet {
        flags: kbounded_scan(s, r, k).iter().map(Option::is_some).collect(),
        k,
    }
}

/// Exact `k_t` wherever it is at most `cutoff`, `None` elsewhere.
///
/// Runs the bounded scan at `k = 0`, at each power of two below `cutoff`, and
/// at `cutoff` itself; each position takes its value from the first rung
/// that reports it.
pub fn threshold_table(text: &[u8], pattern: &[u8], cutoff: usize) -> Vec<Option<usize>> {
    let mut table = vec![None; text.len()];
    let mut missing = text.len();
    for k in threshold_ladder(cutoff) {
        if missing == 0 {
            break;
        }
        for (slot, v) in table.iter_mut().zip(kbounded_scan(text, pattern, k)) {
            if slot.is_none() && v.is_some() {
                *slot = v;
                missing -= 1;
            }
        }
    }
    table
}

pub(crate) fn threshold_ladder(cutoff: usize) -> Vec<usize> {
    let mut ladder = vec![0];
    let mut k = 1;
    while k < cutoff {
        ladder.push(k);
        k *= 2;
    }
    if cutoff > 0 {
        ladder.push(cutoff);
    }
    ladder
}
