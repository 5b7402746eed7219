// SPDX-License-Identifier: Apache-2.0

//! Randomized covering: certified boxes for one `w`-length part of the text.
//!
//! The part is cut into `w1`-blocks and `w2`-superblocks. The dense phase
//! probes each block against a sample of aligned pattern windows; a dense
//! block certifies every block close to it against every aligned window
//! close to it. The extension phase samples the remaining sparse blocks,
//! finds their few matching windows, and extends each match diagonally to a
//! whole superblock.
//!
//! Every emitted box is sound by construction: distances are either computed
//! exactly by a banded kernel or bounded through the triangle inequality.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CertifiedBox, Span};
use crate::kernels::{banded_edit_distance, kbounded_end_positions};
use crate::params::{CoverParams, EpsLevel, ExtensionBoxMode};
use crate::rng::{self, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Dense,
    Extension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaggedBox {
    pub cbox: CertifiedBox,
    pub provenance: Provenance,
    pub level: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoxBatch {
    pub boxes: Vec<TaggedBox>,
}

impl BoxBatch {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TaggedBox> {
        self.boxes.iter()
    }

    pub fn count(&self, provenance: Provenance, level: u32) -> usize {
        self.boxes
            .iter()
            .filter(|b| b.provenance == provenance && b.level == level)
            .count()
    }
}

/// Per-level dense block membership for one part, indexed by 1-based block
/// number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseSet {
    members: Vec<Vec<bool>>,
    /// Every density probe, in order.
    pub probes: Vec<ProbeRecord>,
}

/// One density probe and the blocks it marked dense (empty if sparse).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRecord {
    pub block: usize,
    pub level: u32,
    pub marked: Vec<usize>,
}

impl DenseSet {
    pub fn new(levels: usize, blocks: usize) -> Self {
        DenseSet {
            members: vec![vec![false; blocks]; levels],
            probes: Vec::new(),
        }
    }

    pub fn contains(&self, level: u32, block: usize) -> bool {
        self.members[level as usize][block - 1]
    }

    pub fn insert(&mut self, level: u32, block: usize) {
        self.members[level as usize][block - 1] = true;
    }

    pub fn members(&self, level: u32) -> impl Iterator<Item = usize> + '_ {
        self.members[level as usize]
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    Sparse,
    Dense,
}

/// 1-indexed starts of `(eps/8)`-aligned windows of length `w1`.
pub fn aligned_starts(level: EpsLevel, pattern_len: usize) -> Vec<usize> {
    let w1 = level.w1();
    if w1 > pattern_len {
        return Vec::new();
    }
    (1..=pattern_len - w1 + 1)
        .step_by(level.aligned_step())
        .collect()
}

/// Samples aligned windows and reports whether enough of them lie within
/// `eps * w1` of `block`.
///
/// When the requested sample is at least the whole population, every window
/// is tested once and the success threshold is scaled by
/// `population / requested` (never below one success).
pub fn dense_probe<R: Rng>(
    block: &[u8],
    pattern: &[u8],
    level: EpsLevel,
    params: &CoverParams,
    rng: &mut R,
) -> ProbeOutcome {
    let starts = aligned_starts(level, pattern.len());
    if starts.is_empty() {
        return ProbeOutcome::Sparse;
    }
    let w1 = level.w1();
    let k = level.scaled(1);
    let log_n = params.log_n();
    let requested =
        (8.0 * params.c0 * params.w as f64 / (level.eps_w1() * params.d) * log_n).ceil();
    let threshold = 0.5 * params.c0 * log_n;
    let hit = |s: usize| banded_edit_distance(&pattern[s - 1..s - 1 + w1], block, k).is_within();

    let mut successes = 0usize;
    if requested >= starts.len() as f64 {
        let required = (threshold * starts.len() as f64 / requested).ceil().max(1.0) as usize;
        for &s in &starts {
            if hit(s) {
                successes += 1;
                if successes >= required {
                    return ProbeOutcome::Dense;
                }
            }
        }
    } else {
        let required = threshold.ceil().max(1.0) as usize;
        for _ in 0..requested as usize {
            let s = starts[rng.gen_range(0..starts.len())];
            if hit(s) {
                successes += 1;
                if successes >= required {
                    return ProbeOutcome::Dense;
                }
            }
        }
    }
    ProbeOutcome::Sparse
}

/// Spans of the candidate blocks within `threshold` of `block`.
pub fn find_close_blocks(block: &[u8], candidates: &[(Span, &[u8])], threshold: usize) -> Vec<Span> {
    candidates
        .iter()
        .filter(|(_, c)| banded_edit_distance(c, block, threshold).is_within())
        .map(|(span, _)| *span)
        .collect()
}

/// Pattern spans of aligned windows reported close to `block`.
///
/// Includes every aligned window within `3 eps w1` of the block; anything
/// included is within `6 eps w1`, since a best match within `k` ending at a
/// position implies the fixed-length window ending there is within `2k`.
pub fn find_aligned_matches(pattern: &[u8], block: &[u8], level: EpsLevel) -> Vec<Span> {
    let w1 = block.len();
    let flags = kbounded_end_positions(pattern, block, level.scaled(3));
    aligned_starts(level, pattern.len())
        .into_iter()
        .filter(|&s| flags.get(s + w1 - 1))
        .map(|s| Span::from_start(s, w1))
        .collect()
}

/// Width-`u_len` pattern span placing the window that starts at `v_start`
/// at the same offset it has inside `u` (1-indexed `offset_in_u`), clamped
/// to the pattern.
pub fn diagonal_extension(
    pattern_len: usize,
    u_len: usize,
    offset_in_u: usize,
    v_start: usize,
) -> Result<Span> {
    if u_len > pattern_len {
        return Err(Error::ExtensionTooLong {
            len: u_len,
            pattern_len,
        });
    }
    let max_start = (pattern_len - u_len + 1) as isize;
    let s = (v_start as isize - offset_in_u as isize + 1).clamp(1, max_start);
    Ok(Span::from_start(s as usize, u_len))
}

/// An aligned match of a sparse block, extended to its whole superblock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtensionMatch {
    pub pattern: Span,
    pub cost: usize,
}

/// Extension for one sampled block: every aligned window within
/// `eps * w1` of the block is extended to the superblock's width and kept if
/// the extension is within `3 eps w2` of the superblock.
pub fn extend_block(
    superblock: &[u8],
    offset_in_superblock: usize,
    pattern: &[u8],
    level: EpsLevel,
) -> Result<Vec<ExtensionMatch>> {
    let w1 = level.w1();
    let w2 = superblock.len();
    let block = &superblock[offset_in_superblock - 1..offset_in_superblock - 1 + w1];
    let near = level.scaled(1);
    let far = level.scaled_len(3, w2);
    let mut out = Vec::new();
    for s in aligned_starts(level, pattern.len()) {
        if banded_edit_distance(&pattern[s - 1..s - 1 + w1], block, near).exceeds() {
            continue;
        }
        let span = diagonal_extension(pattern.len(), w2, offset_in_superblock, s)?;
        if let Some(cost) = banded_edit_distance(&pattern[span.range()], superblock, far).value {
            out.push(ExtensionMatch { pattern: span, cost });
        }
    }
    Ok(out)
}

/// Extension boxes for one match, keeping the smallest bound per span pair.
pub(crate) fn collect_extension_boxes(
    text_span: Span,
    m: ExtensionMatch,
    level: u32,
    params: &CoverParams,
    round_to_pow2: bool,
    best: &mut BTreeMap<(Span, Span), (u64, u32)>,
) {
    for (a, b) in params.slack_pairs() {
        let mut bound = m.cost as u64 + a + b;
        if round_to_pow2 {
            bound = bound.next_power_of_two();
        }
        let pattern_span = match params.extension_box_mode {
            ExtensionBoxMode::AsWritten => m.pattern,
            ExtensionBoxMode::Enlarged => Span {
                lo: m.pattern.lo.saturating_sub(a as usize),
                hi: (m.pattern.hi + b as usize).min(params.w),
            },
        };
        best.entry((text_span, pattern_span))
            .and_modify(|e| {
                if bound < e.0 {
                    *e = (bound, level);
                }
            })
            .or_insert((bound, level));
    }
}

pub(crate) fn drain_extension_boxes(
    best: BTreeMap<(Span, Span), (u64, u32)>,
    sink: &mut impl FnMut(TaggedBox),
) {
    for ((text, pattern), (bound, level)) in best {
        sink(TaggedBox {
            cbox: CertifiedBox::new(text, pattern, bound),
            provenance: Provenance::Extension,
            level,
        });
    }
}

/// Draws up to `count` indices of `pool` with replacement; returns the
/// distinct picks. If `count` covers the pool, takes all of it.
pub(crate) fn sample_distinct<R: Rng>(pool: &[usize], count: usize, rng: &mut R) -> Vec<usize> {
    if count >= pool.len() {
        return pool.to_vec();
    }
    let picked: BTreeSet<usize> = (0..count).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
    picked.into_iter().collect()
}

pub(crate) fn extension_sample_count(params: &CoverParams) -> usize {
    let log_n = params.log_n();
    (params.c1 * log_n * log_n * params.log_w()).ceil().max(1.0) as usize
}

/// Dense phase over one part starting at zero-based text offset `offset`.
/// Boxes go to `sink` in emission order.
pub fn dense_phase_with(
    part: &[u8],
    offset: usize,
    pattern: &[u8],
    params: &CoverParams,
    sink: &mut impl FnMut(TaggedBox),
) -> DenseSet {
    let w1 = params.w1;
    let n1 = part.len() / w1;
    let blocks: Vec<&[u8]> = part.chunks_exact(w1).collect();
    let block_span = |i: usize| Span::from_start(offset + (i - 1) * w1 + 1, w1);
    let mut dense = DenseSet::new(params.top_level() as usize + 1, n1);

    for i in 1..=n1 {
        for level in params.levels() {
            let j = level.j;
            if dense.contains(j, i) {
                continue;
            }
            let probe_index = dense.probes.len();
            dense.probes.push(ProbeRecord {
                block: i,
                level: j,
                marked: Vec::new(),
            });
            let mut rng = rng::stream(params.seed, offset as u64, Phase::Dense, i as u64, j as u64);
            if dense_probe(blocks[i - 1], pattern, level, params, &mut rng) == ProbeOutcome::Sparse {
                continue;
            }
            let candidates: Vec<(Span, &[u8])> = (1..=n1)
                .filter(|&c| !dense.contains(j, c))
                .map(|c| (block_span(c), blocks[c - 1]))
                .collect();
            let close = find_close_blocks(blocks[i - 1], &candidates, level.scaled(2));
            let matches = find_aligned_matches(pattern, blocks[i - 1], level);
            let bound = level.scaled(8) as u64;
            for &x in &close {
                for &y in &matches {
                    sink(TaggedBox {
                        cbox: CertifiedBox::new(x, y, bound),
                        provenance: Provenance::Dense,
                        level: j,
                    });
                }
                let b = (x.lo - offset) / w1 + 1;
                dense.insert(j, b);
                dense.probes[probe_index].marked.push(b);
            }
        }
    }
    dense
}

pub fn dense_phase(part: &[u8], offset: usize, pattern: &[u8], params: &CoverParams) -> (BoxBatch, DenseSet) {
    let mut batch = BoxBatch::default();
    let dense = dense_phase_with(part, offset, pattern, params, &mut |b| batch.boxes.push(b));
    (batch, dense)
}

/// Extension sampling over one part, skipping blocks in `dense`.
pub fn extension_phase_with(
    part: &[u8],
    offset: usize,
    pattern: &[u8],
    params: &CoverParams,
    dense: &DenseSet,
    sink: &mut impl FnMut(TaggedBox),
) -> Result<()> {
    let (w1, w2) = (params.w1, params.w2);
    let per_super = w2 / w1;
    let count = extension_sample_count(params);
    let mut best = BTreeMap::new();
    for (i0, superblock) in part.chunks_exact(w2).enumerate() {
        let i = i0 + 1;
        let text_span = Span::from_start(offset + i0 * w2 + 1, w2);
        for level in params.levels() {
            let j = level.j;
            let first = i0 * per_super + 1;
            let pool: Vec<usize> = (first..first + per_super)
                .filter(|&b| !dense.contains(j, b))
                .collect();
            if pool.is_empty() {
                continue;
            }
            let mut rng = rng::stream(params.seed, offset as u64, Phase::Extension, i as u64, j as u64);
            for b in sample_distinct(&pool, count, &mut rng) {
                let offset_in_super = (b - first) * w1 + 1;
                for m in extend_block(superblock, offset_in_super, pattern, level)? {
                    collect_extension_boxes(text_span, m, j, params, false, &mut best);
                }
            }
        }
    }
    drain_extension_boxes(best, sink);
    Ok(())
}

pub fn extension_phase(
    part: &[u8],
    offset: usize,
    pattern: &[u8],
    params: &CoverParams,
    dense: &DenseSet,
) -> Result<BoxBatch> {
    let mut batch = BoxBatch::default();
    extension_phase_with(part, offset, pattern, params, dense, &mut |b| batch.boxes.push(b))?;
    Ok(batch)
}

/// Both phases over the part `text[offset..offset + w]`, with text spans in
/// whole-text coordinates. `pattern` must already be truncated to `params.w`.
pub fn cover_part_with(
    text: &[u8],
    offset: usize,
    pattern: &[u8],
    params: &CoverParams,
    sink: &mut impl FnMut(TaggedBox),
) -> Result<()> {
    let part = text
        .get(offset..offset + params.w)
        .ok_or(Error::SpanOutOfBounds {
            lo: offset,
            hi: offset + params.w,
            len: text.len(),
        })?;
    let dense = dense_phase_with(part, offset, pattern, params, sink);
    extension_phase_with(part, offset, pattern, params, &dense, sink)
}

pub fn cover_part(text: &[u8], offset: usize, pattern: &[u8], params: &CoverParams) -> Result<BoxBatch> {
    let mut batch = BoxBatch::default();
    cover_part_with(text, offset, pattern, params, &mut |b| batch.boxes.push(b))?;
    Ok(batch)
}
