// SPDX-License-Identifier: Apache-2.0

//! Covering parameters and their normalization.
//!
//! All block lengths are powers of two and `theta` is stored through its
//! reciprocal, so every per-level threshold `m * eps_j * w1` is a dyadic
//! rational and is computed exactly with shifts.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_C0: f64 = 2.0;
pub const DEFAULT_C1: f64 = 1.0;

/// Smallest pattern length accepted by the offline matcher.
pub const MIN_OFFLINE_PATTERN: usize = 16;

/// How extension boxes are shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExtensionBoxMode {
    /// `(I' x J', c + a + b)` with `J'` the extension span itself.
    #[default]
    AsWritten,
    /// `J'` grown by `a` rows below and `b` rows above (clamped to the
    /// pattern), bound `c + a + b`. These boxes are not square and never
    /// become shortcut edges.
    Enlarged,
}

impl FromStr for ExtensionBoxMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(ExtensionBoxMode::AsWritten),
            "enlarged" => Ok(ExtensionBoxMode::Enlarged),
            other => Err(Error::InvalidParams(format!(
                "unknown extension box mode {other:?} (expected as-written or enlarged)"
            ))),
        }
    }
}

impl fmt::Display for ExtensionBoxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtensionBoxMode::AsWritten => "as-written",
            ExtensionBoxMode::Enlarged => "enlarged",
        })
    }
}

/// Optional pins for any normalized field; `None` keeps the formula value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub w1: Option<usize>,
    pub w2: Option<usize>,
    pub d: Option<f64>,
    /// Reciprocal of theta; must be a power of two.
    pub theta_inv: Option<usize>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub seed: Option<u64>,
    /// Text length used for the `log n` factors of the online matcher.
    pub n: Option<usize>,
    pub extension_box_mode: Option<ExtensionBoxMode>,
}

/// One rung `eps_j = 2^-j` of the distance ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsLevel {
    pub j: u32,
    w1: usize,
}

impl EpsLevel {
    pub fn new(j: u32, w1: usize) -> Self {
        EpsLevel { j, w1 }
    }

    pub fn eps(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    /// `floor(mult * eps_j * w1)`.
    #[inline]
    pub fn scaled(&self, mult: usize) -> usize {
        (mult * self.w1) >> self.j
    }

    /// Start granularity of `(eps_j / 8)`-aligned pattern substrings.
    #[inline]
    pub fn aligned_step(&self) -> usize {
        (self.w1 >> (self.j + 3)).max(1)
    }

    pub fn w1(&self) -> usize {
        self.w1
    }

    /// `floor(mult * eps_j * len)` for another block length.
    #[inline]
    pub fn scaled_len(&self, mult: usize, len: usize) -> usize {
        (mult * len) >> self.j
    }

    /// `eps_j * w1` as a real number.
    pub fn eps_w1(&self) -> f64 {
        self.w1 as f64 * self.eps()
    }
}

/// A run segment: a window of the text whose length is a multiple of the
/// part length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    /// Zero-based offset into the text.
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub w1: usize,
    pub w2: usize,
    pub d: f64,
    pub theta_inv: usize,
    pub c0: f64,
    pub c1: f64,
    pub seed: u64,
    /// Text length (drives the `log n` sampling factors).
    pub n: usize,
    /// Pattern length actually matched: the input length rounded down to a
    /// multiple of `w2`. This is also the text part length.
    pub w: usize,
    /// Input pattern length before truncation.
    pub pattern_len: usize,
    /// `floor(pattern_len^(3/4))`: exact-phase cutoff and the lower limit of
    /// the extension-box slack terms.
    pub cutoff: usize,
    pub extension_box_mode: ExtensionBoxMode,
}

impl CoverParams {
    /// `ceil(log2(1/theta))`.
    pub fn top_level(&self) -> u32 {
        self.theta_inv.trailing_zeros()
    }

    /// Levels in processing order: coarsest `eps` last.
    pub fn levels(&self) -> impl Iterator<Item = EpsLevel> + '_ {
        (0..=self.top_level()).rev().map(|j| EpsLevel::new(j, self.w1))
    }

    pub fn level(&self, j: u32) -> EpsLevel {
        EpsLevel::new(j, self.w1)
    }

    pub fn log_n(&self) -> f64 {
        (self.n.max(2) as f64).log2()
    }

    pub fn log_w(&self) -> f64 {
        (self.w.max(2) as f64).log2()
    }

    pub fn theta(&self) -> f64 {
        1.0 / self.theta_inv as f64
    }

    /// Symbols dropped from the end of the pattern.
    pub fn truncation(&self) -> usize {
        self.pattern_len - self.w
    }

    /// Powers of two `a <= b` in `[cutoff, w]`.
    pub fn slack_pairs(&self) -> Vec<(u64, u64)> {
        let lo = self.cutoff.max(1).next_power_of_two();
        let mut powers = Vec::new();
        let mut p = lo;
        while p <= self.w {
            powers.push(p as u64);
            p *= 2;
        }
        let mut pairs = Vec::new();
        for (i, &a) in powers.iter().enumerate() {
            for &b in &powers[i..] {
                pairs.push((a, b));
            }
        }
        pairs
    }

    /// Prefix and (if needed) suffix windows whose lengths are multiples of
    /// the part length `w`. Requires `n >= w`.
    pub fn segments(&self, n: usize) -> Vec<Segment> {
        let len = n / self.w * self.w;
        if len == n {
            vec![Segment { start: 0, len }]
        } else {
            vec![
                Segment { start: 0, len },
                Segment {
                    start: n - len,
                    len,
                },
            ]
        }
    }

    /// Structural checks shared by the offline and online matchers.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !self.w1.is_power_of_two() || !self.w2.is_power_of_two() {
            return bad(format!("w1={} and w2={} must be powers of two", self.w1, self.w2));
        }
        if !self.theta_inv.is_power_of_two() {
            return bad(format!("1/theta={} must be a power of two", self.theta_inv));
        }
        if self.w1 > self.w2 {
            return bad(format!("w1={} exceeds w2={}", self.w1, self.w2));
        }
        if self.w2 > self.pattern_len {
            return bad(format!(
                "w2={} exceeds the pattern length {}",
                self.w2, self.pattern_len
            ));
        }
        if self.w == 0 || !self.w.is_multiple_of(self.w2) {
            return bad(format!("truncated pattern length {} is not a multiple of w2", self.w));
        }
        if !(self.d > 0.0 && self.c0 > 0.0 && self.c1 > 0.0) {
            return bad("d, c0 and c1 must be positive".into());
        }
        Ok(())
    }

    /// Preconditions of the online complexity analysis: `theta*w1 >= 1`,
    /// `w1 <= theta*w2`, and at least two levels.
    pub fn validate_online(&self) -> Result<()> {
        self.validate()?;
        if self.theta_inv < 2 {
            return Err(Error::InvalidParams("online matcher needs 1/theta >= 2".into()));
        }
        if self.w1 < self.theta_inv {
            return Err(Error::InvalidParams(format!(
                "theta*w1 = {}/{} < 1",
                self.w1, self.theta_inv
            )));
        }
        if self.w1 * self.theta_inv > self.w2 {
            return Err(Error::InvalidParams(format!(
                "w1={} exceeds theta*w2 = {}/{}",
                self.w1, self.w2, self.theta_inv
            )));
        }
        Ok(())
    }
}

/// Largest power of two not exceeding `w^(num/den)`.
fn pow2_floor_root(w: usize, num: u32, den: u32) -> usize {
    let e = (num as f64 * (w as f64).log2() / den as f64 + 1e-9).floor();
    1usize << (e.max(0.0) as u32)
}

/// Smallest power of two not below `w^(num/den)`.
fn pow2_ceil_root(w: usize, num: u32, den: u32) -> usize {
    let e = (num as f64 * (w as f64).log2() / den as f64 - 1e-9).ceil();
    1usize << (e.max(0.0) as u32)
}

/// `floor(w^(3/4))`, exact.
pub fn three_quarter_floor(w: usize) -> usize {
    let cube = (w as u128).pow(3);
    let mut c = (w as f64).powf(0.75).floor() as u128;
    while (c + 1).pow(4) <= cube {
        c += 1;
    }
    while c > 0 && c.pow(4) > cube {
        c -= 1;
    }
    c as usize
}

fn finish(
    mut p: CoverParams,
    overrides: &Overrides,
) -> CoverParams {
    if let Some(v) = overrides.w1 {
        p.w1 = v;
    }
    if let Some(v) = overrides.w2 {
        p.w2 = v;
    }
    if let Some(v) = overrides.d {
        p.d = v;
    }
    if let Some(v) = overrides.theta_inv {
        p.theta_inv = v;
    }
    if let Some(v) = overrides.c0 {
        p.c0 = v;
    }
    if let Some(v) = overrides.c1 {
        p.c1 = v;
    }
    if let Some(v) = overrides.seed {
        p.seed = v;
    }
    if let Some(v) = overrides.n {
        p.n = v;
    }
    if let Some(v) = overrides.extension_box_mode {
        p.extension_box_mode = v;
    }
    if let Some(q) = p.pattern_len.checked_div(p.w2) {
        p.w = q * p.w2;
    }
    p
}

/// Offline parameters: `w1 = w^(1/4)`, `w2 = w^(1/2)`, `d = w^(1/4)`,
/// `theta = w^(-1/4)`, with block lengths rounded down and `1/theta` rounded
/// up to powers of two.
pub fn normalize_params(w: usize, n: usize, overrides: &Overrides) -> Result<CoverParams> {
    if w < MIN_OFFLINE_PATTERN {
        return Err(Error::PatternTooShort { len: w });
    }
    if n < w {
        return Err(Error::InvalidParams(format!(
            "text length {n} is shorter than the pattern length {w}"
        )));
    }
    let base = CoverParams {
        w1: pow2_floor_root(w, 1, 4),
        w2: pow2_floor_root(w, 1, 2),
        d: (w as f64).powf(0.25),
        theta_inv: pow2_ceil_root(w, 1, 4),
        c0: DEFAULT_C0,
        c1: DEFAULT_C1,
        seed: 0,
        n,
        w,
        pattern_len: w,
        cutoff: three_quarter_floor(w),
        extension_box_mode: ExtensionBoxMode::AsWritten,
    };
    let p = finish(base, overrides);
    p.validate()?;
    Ok(p)
}

/// Online parameters: `w1 = w^(11/18)`, `w2 = w^(20/27)`, `d = w^(7/54)`,
/// `theta = w^(-1/9)`, rounded as in [`normalize_params`].
pub fn online_params(w: usize, overrides: &Overrides) -> Result<CoverParams> {
    if w < 2 {
        return Err(Error::PatternTooShort { len: w });
    }
    let base = CoverParams {
        w1: pow2_floor_root(w, 11, 18),
        w2: pow2_floor_root(w, 20, 27),
        d: (w as f64).powf(7.0 / 54.0),
        theta_inv: pow2_ceil_root(w, 1, 9),
        c0: DEFAULT_C0,
        c1: DEFAULT_C1,
        seed: 0,
        n: w,
        w,
        pattern_len: w,
        cutoff: three_quarter_floor(w),
        extension_box_mode: ExtensionBoxMode::AsWritten,
    };
    let pinned = overrides.w1.is_some()
        || overrides.w2.is_some()
        || overrides.theta_inv.is_some()
        || overrides.d.is_some();
    let p = finish(base, overrides);
    match p.validate_online() {
        Ok(()) => Ok(p),
        Err(e) if pinned => Err(e),
        Err(_) => Err(Error::PatternTooShort { len: w }),
    }
}
