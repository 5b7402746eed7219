// SPDX-License-Identifier: Apache-2.0

//! Grid-graph model of edit distance and pattern matching.
//!
//! The text runs along the horizontal axis (`t` in `0..=n`) and the pattern
//! along the vertical axis (`y` in `0..=w`). A vertex `(t, y)` sits between
//! symbols, so an interval of vertices `lo..=hi` names the substring at
//! 1-indexed positions `lo+1..=hi`. That interval is a [`Span`].
//!
//! The oracles in this module use full quadratic tables. They exist to check
//! the production kernels and the covering output, not to be fast.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Interval of grid coordinates `lo..=hi` denoting symbols `lo+1..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::ReversedSpan { lo, hi });
        }
        Ok(Span { lo, hi })
    }

    /// Span of the `len` symbols starting at 1-indexed position `start`.
    pub fn from_start(start: usize, len: usize) -> Self {
        debug_assert!(start >= 1);
        Span {
            lo: start - 1,
            hi: start - 1 + len,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.hi - self.lo
    }

    /// Zero-based slice range of the denoted substring.
    #[inline]
    pub fn range(&self) -> std::ops::Range<usize> {
        self.lo..self.hi
    }

    pub fn shift(&self, by: usize) -> Self {
        Span {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    pub fn check(&self, len: usize) -> Result<()> {
        if self.lo > self.hi {
            return Err(Error::ReversedSpan {
                lo: self.lo,
                hi: self.hi,
            });
        }
        if self.hi > len {
            return Err(Error::SpanOutOfBounds {
                lo: self.lo,
                hi: self.hi,
                len,
            });
        }
        Ok(())
    }

    pub fn slice<'a>(&self, s: &'a [u8]) -> Result<&'a [u8]> {
        self.check(s.len())?;
        Ok(&s[self.range()])
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCoord {
    pub t: usize,
    pub y: usize,
}

impl GridCoord {
    pub fn new(t: usize, y: usize) -> Self {
        GridCoord { t, y }
    }
}

/// A text span, a pattern span, and an upper bound on the edit distance
/// between the two substrings they denote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CertifiedBox {
    pub text: Span,
    pub pattern: Span,
    pub bound: u64,
}

impl CertifiedBox {
    pub fn new(text: Span, pattern: Span, bound: u64) -> Self {
        CertifiedBox {
            text,
            pattern,
            bound,
        }
    }
}

/// A path of unit H/V/D steps, nondecreasing in both coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonePath {
    coords: Vec<GridCoord>,
}

impl MonotonePath {
    pub fn new(coords: Vec<GridCoord>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        for (k, pair) in coords.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let dt = b.t.checked_sub(a.t);
            let dy = b.y.checked_sub(a.y);
            match (dt, dy) {
                (Some(0), Some(1)) | (Some(1), Some(0)) | (Some(1), Some(1)) => {}
                _ => {
                    return Err(Error::InvalidPath(format!(
                        "step {k}: ({},{}) -> ({},{}) is not a unit H/V/D step",
                        a.t, a.y, b.t, b.y
                    )))
                }
            }
        }
        Ok(MonotonePath { coords })
    }

    /// The straight diagonal from `(t0, y0)` of the given length.
    pub fn diagonal(t0: usize, y0: usize, len: usize) -> Self {
        MonotonePath {
            coords: (0..=len).map(|k| GridCoord::new(t0 + k, y0 + k)).collect(),
        }
    }

    pub fn coords(&self) -> &[GridCoord] {
        &self.coords
    }

    pub fn first(&self) -> GridCoord {
        self.coords[0]
    }

    pub fn last(&self) -> GridCoord {
        self.coords[self.coords.len() - 1]
    }

    pub fn horizontal_projection(&self) -> Span {
        Span {
            lo: self.first().t,
            hi: self.last().t,
        }
    }

    /// Endpoints of the minimal subpath whose horizontal projection is `span`.
    pub fn subpath_endpoints(&self, span: Span) -> Option<(GridCoord, GridCoord)> {
        let proj = self.horizontal_projection();
        if span.lo < proj.lo || span.hi > proj.hi || span.lo > span.hi {
            return None;
        }
        let start = self.coords.iter().rev().find(|c| c.t == span.lo)?;
        let end = self.coords.iter().find(|c| c.t == span.hi)?;
        Some((*start, *end))
    }

    /// Cost of the path in the edit distance graph of `text` and `pattern`.
    pub fn cost(&self, text: &[u8], pattern: &[u8]) -> Result<u64> {
        let last = self.last();
        if last.t > text.len() || last.y > pattern.len() {
            return Err(Error::InvalidPath(format!(
                "path reaches ({},{}) outside the {}x{} grid",
                last.t,
                last.y,
                text.len(),
                pattern.len()
            )));
        }
        let mut cost = 0;
        for pair in self.coords.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.t > a.t && b.y > a.y {
                cost += u64::from(text[b.t - 1] != pattern[b.y - 1]);
            } else {
                cost += 1;
            }
        }
        Ok(cost)
    }
}

/// Full DP table of edit distances between all prefixes of `a` and `b`,
/// with row 0 optionally free (the pattern matching graph).
fn dp_table(a: &[u8], b: &[u8], free_start: bool) -> Vec<Vec<usize>> {
    // table[i][j]: cost to reach vertex (i, j), a along i, b along j
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        table[i][0] = if free_start { 0 } else { i };
        for j in 1..=b.len() {
            let diag = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let horiz = table[i - 1][j] + 1;
            let vert = table[i][j - 1] + 1;
            table[i][j] = diag.min(horiz).min(vert);
        }
    }
    table
}

/// Exact `k_t`: smallest edit distance between the pattern and a substring
/// of the text ending at 1-indexed position `t`.
pub fn pm_cost_oracle(text: &[u8], pattern: &[u8], t: usize) -> Result<usize> {
    if t == 0 || t > text.len() {
        return Err(Error::PositionOutOfRange {
            pos: t,
            len: text.len(),
        });
    }
    let table = dp_table(&text[..t], pattern, true);
    Ok(table[t][pattern.len()])
}

/// Exact edit distance between the substrings named by two spans.
pub fn edit_cost_oracle(text: &[u8], pattern: &[u8], i_span: Span, j_span: Span) -> Result<usize> {
    let a = i_span.slice(text)?;
    let b = j_span.slice(pattern)?;
    let table = dp_table(a, b, false);
    Ok(table[a.len()][b.len()])
}

pub fn verify_box(text: &[u8], pattern: &[u8], cbox: &CertifiedBox) -> Result<bool> {
    let cost = edit_cost_oracle(text, pattern, cbox.text, cbox.pattern)?;
    Ok(cost as u64 <= cbox.bound)
}

/// The first condition a box sequence fails when checked against a path.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproxViolation {
    NoBoxes,
    OutOfRange(Error),
    /// Text spans do not tile the path's horizontal projection; `index` is
    /// the first offending box.
    Decomposition { index: usize },
    /// Box `index` does not cover the path closely enough.
    Coverage { index: usize },
    /// The bounds sum to more than `k * cost + zeta`.
    Cost { total: u64, budget: f64 },
}

impl fmt::Display for ApproxViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxViolation::NoBoxes => write!(f, "empty box sequence"),
            ApproxViolation::OutOfRange(e) => write!(f, "{e}"),
            ApproxViolation::Decomposition { index } => {
                write!(f, "box {index} breaks the decomposition of the projection")
            }
            ApproxViolation::Coverage { index } => write!(f, "box {index} does not cover the path"),
            ApproxViolation::Cost { total, budget } => {
                write!(f, "bound sum {total} exceeds budget {budget}")
            }
        }
    }
}

/// Checks whether `boxes` (k, zeta)-approximates `path` in the edit distance
/// graph of `text` and `pattern`.
///
/// A box whose bound is at least its text width covers any path, since the
/// allowed vertical slack then spans the whole box.
pub fn verify_approximation(
    text: &[u8],
    pattern: &[u8],
    boxes: &[CertifiedBox],
    path: &MonotonePath,
    k: f64,
    zeta: f64,
) -> std::result::Result<(), ApproxViolation> {
    if boxes.is_empty() {
        return Err(ApproxViolation::NoBoxes);
    }
    for b in boxes {
        b.text.check(text.len()).map_err(ApproxViolation::OutOfRange)?;
        b.pattern
            .check(pattern.len())
            .map_err(ApproxViolation::OutOfRange)?;
    }
    let cost = path.cost(text, pattern).map_err(ApproxViolation::OutOfRange)?;

    let proj = path.horizontal_projection();
    if boxes[0].text.lo != proj.lo {
        return Err(ApproxViolation::Decomposition { index: 0 });
    }
    for (index, pair) in boxes.windows(2).enumerate() {
        if pair[1].text.lo != pair[0].text.hi {
            return Err(ApproxViolation::Decomposition { index: index + 1 });
        }
    }
    if boxes[boxes.len() - 1].text.hi != proj.hi {
        return Err(ApproxViolation::Decomposition {
            index: boxes.len() - 1,
        });
    }

    for (index, b) in boxes.iter().enumerate() {
        if b.bound >= b.text.width() as u64 {
            continue;
        }
        let Some((start, end)) = path.subpath_endpoints(b.text) else {
            return Err(ApproxViolation::Coverage { index });
        };
        let slack = b.bound as usize;
        if start.y.abs_diff(b.pattern.lo) > slack || end.y.abs_diff(b.pattern.hi) > slack {
            return Err(ApproxViolation::Coverage { index });
        }
    }

    let total: u64 = boxes.iter().map(|b| b.bound).sum();
    let budget = k * cost as f64 + zeta;
    if total as f64 > budget {
        return Err(ApproxViolation::Cost { total, budget });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_pm(text: &[u8], pattern: &[u8], t: usize) -> usize {
        (0..=t)
            .map(|i| {
                let s = &text[i..t];
                let table = dp_table(s, pattern, false);
                table[s.len()][pattern.len()]
            })
            .min()
            .unwrap()
    }

    #[test]
    fn pm_cost_examples() {
        assert_eq!(pm_cost_oracle(b"ab", b"ab", 2).unwrap(), 0);
        assert_eq!(pm_cost_oracle(b"abcdef", b"cd", 3).unwrap(), 1);
        assert_eq!(brute_pm(b"abcdef", b"cd", 3), 1);
        assert_eq!(pm_cost_oracle(b"bbb", b"a", 2).unwrap(), 1);
    }

    #[test]
    fn pm_cost_range_errors() {
        assert!(matches!(
            pm_cost_oracle(b"abc", b"a", 0),
            Err(Error::PositionOutOfRange { pos: 0, len: 3 })
        ));
        assert!(pm_cost_oracle(b"abc", b"a", 4).is_err());
    }

    #[test]
    fn edit_cost_examples() {
        let full = |s: &[u8]| Span::new(0, s.len()).unwrap();
        assert_eq!(edit_cost_oracle(b"abc", b"abc", full(b"abc"), full(b"abc")).unwrap(), 0);
        assert_eq!(edit_cost_oracle(b"abcd", b"axcd", full(b"abcd"), full(b"axcd")).unwrap(), 1);
        let p = b"xyzw";
        assert_eq!(edit_cost_oracle(b"ab", p, Span::new(1, 1).unwrap(), full(p)).unwrap(), 4);
        assert!(edit_cost_oracle(b"ab", p, Span::new(0, 3).unwrap(), full(p)).is_err());
    }

    #[test]
    fn verify_box_examples() {
        let text = b"abcabc";
        let pattern = b"zabcz";
        let b = CertifiedBox::new(Span::new(0, 3).unwrap(), Span::new(1, 4).unwrap(), 0);
        assert!(verify_box(text, pattern, &b).unwrap());
        let wide = CertifiedBox::new(Span::new(0, 6).unwrap(), Span::new(0, 5).unwrap(), 6);
        assert!(verify_box(text, pattern, &wide).unwrap());
        let cost = edit_cost_oracle(text, pattern, wide.text, wide.pattern).unwrap();
        assert!(cost > 0);
        let tight = CertifiedBox::new(wide.text, wide.pattern, cost as u64 - 1);
        assert!(!verify_box(text, pattern, &tight).unwrap());
    }

    #[test]
    fn path_validation() {
        assert!(MonotonePath::new(vec![]).is_err());
        let bad = vec![GridCoord::new(0, 0), GridCoord::new(2, 0)];
        assert!(MonotonePath::new(bad).is_err());
        let back = vec![GridCoord::new(1, 1), GridCoord::new(0, 1)];
        assert!(MonotonePath::new(back).is_err());
        let ok = vec![
            GridCoord::new(0, 0),
            GridCoord::new(1, 0),
            GridCoord::new(1, 1),
            GridCoord::new(2, 2),
        ];
        let p = MonotonePath::new(ok).unwrap();
        // H + V + D("b" vs "b")
        assert_eq!(p.cost(b"ab", b"ab").unwrap(), 2);
    }

    #[test]
    fn approximation_single_box_exact_diagonal() {
        let text = b"abcd";
        let path = MonotonePath::diagonal(0, 0, 4);
        let b = CertifiedBox::new(Span::new(0, 4).unwrap(), Span::new(0, 4).unwrap(), 0);
        assert!(verify_approximation(text, text, &[b], &path, 1.0, 0.0).is_ok());
    }

    #[test]
    fn approximation_gap_fails_decomposition() {
        let text = b"abcd";
        let path = MonotonePath::diagonal(0, 0, 4);
        let b1 = CertifiedBox::new(Span::new(0, 1).unwrap(), Span::new(0, 1).unwrap(), 0);
        let b2 = CertifiedBox::new(Span::new(2, 4).unwrap(), Span::new(2, 4).unwrap(), 0);
        assert_eq!(
            verify_approximation(text, text, &[b1, b2], &path, 1.0, 0.0),
            Err(ApproxViolation::Decomposition { index: 1 })
        );
    }

    #[test]
    fn approximation_two_boxes_cost_budget() {
        // diagonal path of cost 2: b/x and d/y mismatch
        let text = b"abcd";
        let pattern = b"axcy";
        let path = MonotonePath::diagonal(0, 0, 4);
        assert_eq!(path.cost(text, pattern).unwrap(), 2);
        let b1 = CertifiedBox::new(Span::new(0, 2).unwrap(), Span::new(0, 2).unwrap(), 1);
        let b2 = CertifiedBox::new(Span::new(2, 4).unwrap(), Span::new(2, 4).unwrap(), 2);
        assert!(verify_box(text, pattern, &b1).unwrap());
        assert!(verify_box(text, pattern, &b2).unwrap());
        assert!(matches!(
            verify_approximation(text, pattern, &[b1, b2], &path, 1.0, 0.0),
            Err(ApproxViolation::Cost { total: 3, .. })
        ));
        assert!(verify_approximation(text, pattern, &[b1, b2], &path, 1.0, 1.0).is_ok());
    }

    #[test]
    fn approximation_coverage_failure() {
        let text = b"aaaaaaaa";
        let path = MonotonePath::diagonal(0, 0, 8);
        // box shifted 3 rows up with bound 1: path enters 3 below min J
        let b = CertifiedBox::new(Span::new(0, 8).unwrap(), Span::new(3, 11).unwrap(), 1);
        let pattern = vec![b'a'; 11];
        assert_eq!(
            verify_approximation(text, &pattern, &[b], &path, 100.0, 100.0),
            Err(ApproxViolation::Coverage { index: 0 })
        );
        // bound >= width covers trivially
        let wide = CertifiedBox::new(b.text, b.pattern, 8);
        assert!(verify_approximation(text, &pattern, &[wide], &path, 100.0, 100.0).is_ok());
    }

    fn small_string(max: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), Just(b'c')], 0..max)
    }

    proptest! {
        #[test]
        fn pm_cost_bounds_and_lipschitz(text in small_string(14), pattern in small_string(8)) {
            prop_assume!(!text.is_empty());
            let w = pattern.len();
            let mut prev = None;
            for t in 1..=text.len() {
                let k = pm_cost_oracle(&text, &pattern, t).unwrap();
                prop_assert!(k <= w);
                prop_assert!(k + t >= w);
                prop_assert_eq!(k, brute_pm(&text, &pattern, t));
                if let Some(p) = prev {
                    prop_assert!(k.abs_diff(p) <= 1);
                }
                prev = Some(k);
            }
        }

        #[test]
        fn edit_cost_symmetric_and_triangle(a in small_string(10), b in small_string(10), c in small_string(10)) {
            let sp = |s: &[u8]| Span::new(0, s.len()).unwrap();
            let ab = edit_cost_oracle(&a, &b, sp(&a), sp(&b)).unwrap();
            let ba = edit_cost_oracle(&b, &a, sp(&b), sp(&a)).unwrap();
            let bc = edit_cost_oracle(&b, &c, sp(&b), sp(&c)).unwrap();
            let ac = edit_cost_oracle(&a, &c, sp(&a), sp(&c)).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc);
        }

        #[test]
        fn verify_box_monotone_in_bound(text in small_string(10), pattern in small_string(10), bound in 0u64..12) {
            let b = CertifiedBox::new(
                Span::new(0, text.len()).unwrap(),
                Span::new(0, pattern.len()).unwrap(),
                bound,
            );
            let looser = CertifiedBox { bound: bound + 1, ..b };
            if verify_box(&text, &pattern, &b).unwrap() {
                prop_assert!(verify_box(&text, &pattern, &looser).unwrap());
            }
            let max_len = text.len().max(pattern.len()) as u64;
            let always = CertifiedBox { bound: max_len, ..b };
            prop_assert!(verify_box(&text, &pattern, &always).unwrap());
        }
    }
}
