// SPDX-License-Identifier: Apache-2.0

//! Online matcher: the text arrives one symbol at a time.
//!
//! Symbols are buffered into batches of `w2`. Between batch boundaries the
//! previous estimate is repeated. At a boundary the batch is covered twice:
//! the first pass only contributes extension boxes (bounds rounded up to
//! powers of two), the second pass persists the dense structures and emits
//! dense boxes block by block while the sweep advances through the batch.
//!
//! Past text is gone, so dense blocks are remembered by content together
//! with their matching pattern windows. That memory is dropped at every part
//! boundary (every `w` symbols).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::covering::{
    collect_extension_boxes, dense_probe, drain_extension_boxes, extend_block, extension_sample_count,
    find_aligned_matches, sample_distinct, ProbeOutcome, Provenance, TaggedBox,
};
use crate::error::{Error, Result};
use crate::grid::{CertifiedBox, Span};
use crate::kernels::banded_edit_distance;
use crate::offline::{Mode, TracedBox};
use crate::params::{online_params, CoverParams, Overrides};
use crate::rng::{self, Phase};
use crate::shortcut::{box_to_shortcut, ShortcutEdge, Sweeper};

/// A stored dense block and the aligned pattern windows close to it.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Member {
    content: Vec<u8>,
    windows: Vec<Span>,
}

/// Live and peak memory counters. Units are stored symbols, spans, edges and
/// tree nodes; `total` is their plain sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub batch_symbols: usize,
    /// Members of each `D'_j`, indexed by level.
    pub members: Vec<usize>,
    pub member_symbols: usize,
    pub window_spans: usize,
    pub pending_edges: usize,
    pub tree_nodes: usize,
    pub total: usize,
    pub peak_total: usize,
    pub peak_tree_nodes: usize,
    /// Largest member count seen per level.
    pub peak_members: Vec<usize>,
    pub tree_node_cap: f64,
    /// `4w / (eps_j w1 d)` per level.
    pub member_caps: Vec<f64>,
    /// Number of checks at which some counter exceeded its cap.
    pub cap_breaches: usize,
}

impl SpaceReport {
    pub fn within_caps(&self) -> bool {
        self.cap_breaches == 0
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("batch_symbols".to_string(), self.batch_symbols.to_string()),
            ("member_symbols".to_string(), self.member_symbols.to_string()),
            ("window_spans".to_string(), self.window_spans.to_string()),
            ("pending_edges".to_string(), self.pending_edges.to_string()),
            ("tree_nodes".to_string(), self.tree_nodes.to_string()),
            ("peak_tree_nodes".to_string(), self.peak_tree_nodes.to_string()),
            ("tree_node_cap".to_string(), format!("{:.1}", self.tree_node_cap)),
            ("total".to_string(), self.total.to_string()),
            ("peak_total".to_string(), self.peak_total.to_string()),
            ("cap_breaches".to_string(), self.cap_breaches.to_string()),
        ];
        for (j, (&m, &cap)) in self.peak_members.iter().zip(&self.member_caps).enumerate() {
            out.push((format!("peak_members_{j}"), m.to_string()));
            out.push((format!("member_cap_{j}"), format!("{cap:.1}")));
        }
        out
    }
}

/// Per-run counters beyond memory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineStats {
    pub batches: usize,
    pub boxes_dense: usize,
    pub boxes_extension: usize,
    pub edges: usize,
    pub boxes_loose: usize,
    pub boxes_nonsquare: usize,
}

#[derive(Debug, Clone)]
pub struct OnlineState {
    pattern: Vec<u8>,
    params: CoverParams,
    batch: Vec<u8>,
    /// `D'_j`, indexed by level.
    dprime: Vec<Vec<Member>>,
    sweeper: Sweeper,
    /// Extension edges of the current batch, sorted by origin.
    pending: Vec<ShortcutEdge>,
    last: u64,
    t: usize,
    stats: OnlineStats,
    peak_total: usize,
    peak_tree_nodes: usize,
    peak_members: Vec<usize>,
    cap_breaches: usize,
    trace: Option<Vec<TracedBox>>,
}

impl OnlineState {
    /// Fresh state with online default parameters, pinned by `overrides`.
    pub fn new(pattern: &[u8], overrides: &Overrides) -> Result<Self> {
        let params = online_params(pattern.len(), overrides)?;
        Self::with_params(pattern, params)
    }

    pub fn with_params(pattern: &[u8], params: CoverParams) -> Result<Self> {
        params.validate_online()?;
        if pattern.len() != params.pattern_len {
            return Err(Error::InvalidParams(format!(
                "pattern length {} differs from the normalized length {}",
                pattern.len(),
                params.pattern_len
            )));
        }
        let levels = params.top_level() as usize + 1;
        Ok(OnlineState {
            pattern: pattern.to_vec(),
            batch: Vec::with_capacity(params.w2),
            dprime: vec![Vec::new(); levels],
            sweeper: Sweeper::new(params.w),
            pending: Vec::new(),
            last: params.pattern_len as u64,
            t: 0,
            stats: OnlineStats::default(),
            peak_total: 0,
            peak_tree_nodes: 0,
            peak_members: vec![0; levels],
            cap_breaches: 0,
            trace: None,
            params,
        })
    }

    /// Keep every emitted box (both passes) for inspection.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TracedBox> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn params(&self) -> &CoverParams {
        &self.params
    }

    pub fn position(&self) -> usize {
        self.t
    }

    pub fn stats(&self) -> OnlineStats {
        self.stats
    }

    /// Consumes one symbol and returns the estimate for the new position.
    pub fn push(&mut self, symbol: u8) -> (u64, Mode) {
        self.t += 1;
        self.batch.push(symbol);
        if !self.t.is_multiple_of(self.params.w2) {
            return (self.last, Mode::Carried);
        }
        self.process_batch();
        (self.last, Mode::Approx)
    }

    fn process_batch(&mut self) {
        let (w1, w2) = (self.params.w1, self.params.w2);
        debug_assert_eq!(self.batch.len(), w2);
        let start = self.t - w2;
        if start.is_multiple_of(self.params.w) {
            for d in &mut self.dprime {
                d.clear();
            }
        }
        let batch = std::mem::take(&mut self.batch);

        // pass one: only the extension boxes leave this scope
        let mut scratch = self.dprime.clone();
        let sparse = self.dense_pass(&batch, start, &mut scratch, 1, &mut |_, _| {});
        let mut boxes = Vec::new();
        self.extension_pass(&batch, start, &sparse, &mut boxes);
        let mut pending = Vec::new();
        for tb in boxes {
            self.stats.boxes_extension += 1;
            self.record(start, tb, &mut pending);
        }
        pending.sort_unstable();
        pending.dedup();
        self.pending = pending;
        self.check_caps();

        // pass two: dense boxes per block, sweep interleaved
        let mut dprime = std::mem::take(&mut self.dprime);
        let mut per_block: Vec<Vec<TaggedBox>> = vec![Vec::new(); w2 / w1];
        self.dense_pass(&batch, start, &mut dprime, 2, &mut |i, tb| {
            per_block[i - 1].push(tb)
        });
        self.dprime = dprime;
        let mut cursor = 0;
        for (i0, block_boxes) in per_block.into_iter().enumerate() {
            let mut edges = Vec::new();
            for tb in block_boxes {
                self.stats.boxes_dense += 1;
                self.record(start, tb, &mut edges);
            }
            edges.sort_unstable();
            let mut e = 0;
            for time in start + i0 * w1..start + (i0 + 1) * w1 {
                while cursor < self.pending.len() && self.pending[cursor].origin.t == time {
                    let edge = self.pending[cursor];
                    self.sweeper.relax(&edge);
                    cursor += 1;
                }
                while e < edges.len() && edges[e].origin.t == time {
                    self.sweeper.relax(&edges[e]);
                    e += 1;
                }
                self.sweeper.step();
            }
            self.check_caps();
        }
        debug_assert_eq!(cursor, self.pending.len());
        self.pending.clear();
        debug_assert_eq!(self.sweeper.time(), self.t);
        self.batch = batch;
        self.batch.clear();
        let r = self.params.truncation() as u64;
        self.last = self
            .sweeper
            .query(self.params.w)
            .saturating_add(r)
            .min(self.params.pattern_len as u64);
        self.stats.batches += 1;
        self.check_caps();
    }

    fn record(&mut self, start: usize, tb: TaggedBox, edges: &mut Vec<ShortcutEdge>) {
        if let Some(trace) = &mut self.trace {
            trace.push(TracedBox { part: start, tagged: tb });
        }
        match box_to_shortcut(&tb.cbox) {
            Ok(Some(e)) => {
                self.stats.edges += 1;
                edges.push(e);
            }
            Ok(None) => self.stats.boxes_loose += 1,
            Err(_) => self.stats.boxes_nonsquare += 1,
        }
    }

    /// Dense processing of every block of the batch against `dprime`.
    /// Returns the sparse block indices per level (1-based within the batch).
    fn dense_pass(
        &self,
        batch: &[u8],
        start: usize,
        dprime: &mut [Vec<Member>],
        pass: u64,
        emit: &mut impl FnMut(usize, TaggedBox),
    ) -> Vec<Vec<usize>> {
        let params = &self.params;
        let pattern = &self.pattern[..params.w];
        let w1 = params.w1;
        let mut sparse = vec![Vec::new(); dprime.len()];
        for (i0, block) in batch.chunks_exact(w1).enumerate() {
            let i = i0 + 1;
            let global = start / w1 + i;
            let span = Span::from_start(start + i0 * w1 + 1, w1);
            for level in params.levels() {
                let j = level.j;
                let bound = level.scaled(8) as u64;
                let members = &mut dprime[j as usize];
                let near = level.scaled(2);
                let close = members
                    .iter()
                    .position(|m| banded_edit_distance(&m.content, block, near).is_within());
                let windows = match close {
                    Some(idx) => members[idx].windows.clone(),
                    None => {
                        let mut rng = rng::stream(params.seed, pass, Phase::OnlineDense, global as u64, j as u64);
                        if dense_probe(block, pattern, level, params, &mut rng) == ProbeOutcome::Sparse {
                            sparse[j as usize].push(i);
                            continue;
                        }
                        let windows = find_aligned_matches(pattern, block, level);
                        members.push(Member {
                            content: block.to_vec(),
                            windows: windows.clone(),
                        });
                        windows
                    }
                };
                for y in windows {
                    emit(
                        i,
                        TaggedBox {
                            cbox: CertifiedBox::new(span, y, bound),
                            provenance: Provenance::Dense,
                            level: j,
                        },
                    );
                }
            }
        }
        sparse
    }

    fn extension_pass(
        &self,
        batch: &[u8],
        start: usize,
        sparse: &[Vec<usize>],
        out: &mut Vec<TaggedBox>,
    ) {
        let params = &self.params;
        let pattern = &self.pattern[..params.w];
        let w1 = params.w1;
        let count = extension_sample_count(params);
        let span = Span::from_start(start + 1, params.w2);
        let batch_index = (start / params.w2) as u64;
        let mut best = BTreeMap::new();
        for level in params.levels() {
            let pool = &sparse[level.j as usize];
            if pool.is_empty() {
                continue;
            }
            let mut rng = rng::stream(params.seed, 1, Phase::OnlineExtension, batch_index, level.j as u64);
            for b in sample_distinct(pool, count, &mut rng) {
                // the batch is a whole superblock and always fits the pattern
                let matches = extend_block(batch, (b - 1) * w1 + 1, pattern, level).unwrap_or_default();
                for m in matches {
                    collect_extension_boxes(span, m, level.j, params, true, &mut best);
                }
            }
        }
        drain_extension_boxes(best, &mut |tb| out.push(tb));
    }

    /// True if every pair of stored members at each level is farther apart
    /// than `2 eps_j w1`.
    pub fn members_separated(&self) -> bool {
        self.params.levels().all(|level| {
            let members = &self.dprime[level.j as usize];
            let near = level.scaled(2);
            members.iter().enumerate().all(|(a, ma)| {
                members[a + 1..]
                    .iter()
                    .all(|mb| banded_edit_distance(&ma.content, &mb.content, near).exceeds())
            })
        })
    }

    fn tree_node_cap(&self) -> f64 {
        let p = &self.params;
        let w = p.w as f64;
        let log_inv_theta = (p.theta_inv as f64).log2();
        let q = 8.0 * w * p.theta_inv as f64 / p.w1 as f64 * log_inv_theta;
        q * w.log2()
    }

    fn member_caps(&self) -> Vec<f64> {
        let p = &self.params;
        (0..self.dprime.len())
            .map(|j| 4.0 * p.w as f64 * (1u64 << j) as f64 / (p.w1 as f64 * p.d))
            .collect()
    }

    fn check_caps(&mut self) {
        let report = self.space_report();
        self.peak_total = self.peak_total.max(report.total);
        self.peak_tree_nodes = self.peak_tree_nodes.max(report.tree_nodes);
        for (peak, &m) in self.peak_members.iter_mut().zip(&report.members) {
            *peak = (*peak).max(m);
        }
        let over_tree = report.tree_nodes as f64 > report.tree_node_cap;
        let over_members = report.members.iter().zip(&report.member_caps).any(|(&m, &c)| m as f64 > c);
        if over_tree || over_members {
            self.cap_breaches += 1;
        }
    }

    pub fn space_report(&self) -> SpaceReport {
        let members: Vec<usize> = self.dprime.iter().map(Vec::len).collect();
        let member_symbols = self.dprime.iter().flatten().map(|m| m.content.len()).sum();
        let window_spans = self.dprime.iter().flatten().map(|m| m.windows.len()).sum();
        let pending_edges = self.pending.len() + self.sweeper.pending_updates();
        let tree_nodes = self.sweeper.tree().node_count();
        let total = self.batch.len() + member_symbols + window_spans + pending_edges + tree_nodes;
        SpaceReport {
            batch_symbols: self.batch.len(),
            members,
            member_symbols,
            window_spans,
            pending_edges,
            tree_nodes,
            total,
            peak_total: self.peak_total.max(total),
            peak_tree_nodes: self.peak_tree_nodes.max(tree_nodes),
            peak_members: self.peak_members.clone(),
            tree_node_cap: self.tree_node_cap(),
            member_caps: self.member_caps(),
            cap_breaches: self.cap_breaches,
        }
    }
}
