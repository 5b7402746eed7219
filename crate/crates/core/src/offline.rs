// SPDX-License-Identifier: Apache-2.0

//! Offline matcher: exact values below the cutoff, shortcut sweep above it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{cover_part_with, Provenance, TaggedBox};
use crate::error::{Error, Result};
use crate::kernels::threshold_table;
use crate::params::CoverParams;
use crate::shortcut::{box_to_shortcut, ShortcutEdge, Sweeper};

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
    Carried,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
            Mode::Carried => "carried",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "approx" => Ok(Mode::Approx),
            "carried" => Ok(Mode::Carried),
            other => Err(Error::InvalidParams(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OfflineOptions {
    /// Cover parts on the rayon pool. Output does not depend on this.
    pub parallel: bool,
    /// Read the sweep only at multiples of `w2` and carry in between.
    pub coarse_grid: bool,
    /// Keep every emitted box in [`MatchOutput::trace`].
    pub trace_boxes: bool,
}

/// Counters for one offline run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchStats {
    pub parts: usize,
    pub boxes_dense: usize,
    pub boxes_extension: usize,
    pub edges: usize,
    /// Boxes whose bound is too large for a shortcut.
    pub boxes_loose: usize,
    /// Boxes with differing text and pattern widths.
    pub boxes_nonsquare: usize,
    pub tree_nodes: usize,
    pub exact_positions: usize,
    pub cutoff: usize,
    pub truncation: usize,
}

impl MatchStats {
    pub fn entries(&self) -> [(&'static str, usize); 10] {
        [
            ("parts", self.parts),
            ("boxes_dense", self.boxes_dense),
            ("boxes_extension", self.boxes_extension),
            ("edges", self.edges),
            ("boxes_loose", self.boxes_loose),
            ("boxes_nonsquare", self.boxes_nonsquare),
            ("tree_nodes", self.tree_nodes),
            ("exact_positions", self.exact_positions),
            ("cutoff", self.cutoff),
            ("truncation", self.truncation),
        ]
    }

    fn absorb(&mut self, other: &MatchStats) {
        self.parts += other.parts;
        self.boxes_dense += other.boxes_dense;
        self.boxes_extension += other.boxes_extension;
        self.edges += other.edges;
        self.boxes_loose += other.boxes_loose;
        self.boxes_nonsquare += other.boxes_nonsquare;
    }
}

/// A box together with the zero-based offset of the part that emitted it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracedBox {
    pub part: usize,
    #[serde(flatten)]
    pub tagged: TaggedBox,
}

/// Entry `t - 1` holds the estimate and mode for end position `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutput {
    pub values: Vec<u64>,
    pub modes: Vec<Mode>,
    pub stats: MatchStats,
    pub trace: Vec<TracedBox>,
}

impl MatchOutput {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(t, value, mode)` with `t` 1-indexed.
    pub fn rows(&self) -> impl Iterator<Item = (usize, u64, Mode)> + '_ {
        self.values
            .iter()
            .zip(&self.modes)
            .enumerate()
            .map(|(i, (&v, &m))| (i + 1, v, m))
    }
}

struct PartResult {
    edges: Vec<ShortcutEdge>,
    stats: MatchStats,
    trace: Vec<TracedBox>,
}

fn cover_one(text: &[u8], offset: usize, pattern: &[u8], params: &CoverParams, trace: bool) -> Result<PartResult> {
    let mut res = PartResult {
        edges: Vec::new(),
        stats: MatchStats {
            parts: 1,
            ..MatchStats::default()
        },
        trace: Vec::new(),
    };
    let mut failure = None;
    cover_part_with(text, offset, pattern, params, &mut |tb: TaggedBox| {
        match tb.provenance {
            Provenance::Dense => res.stats.boxes_dense += 1,
            Provenance::Extension => res.stats.boxes_extension += 1,
        }
        if trace {
            res.trace.push(TracedBox { part: offset, tagged: tb });
        }
        match box_to_shortcut(&tb.cbox) {
            Ok(Some(e)) => res.edges.push(e),
            Ok(None) => res.stats.boxes_loose += 1,
            Err(Error::WidthMismatch { .. }) => res.stats.boxes_nonsquare += 1,
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(res),
    }
}

/// Approximates `k_t` for every end position `t = 1..=n`.
///
/// `params` must come from [`normalize_params`](crate::params::normalize_params)
/// for this text and pattern. Positions with `k_t <= params.cutoff` are exact;
/// every other value is an upper bound on `k_t`.
pub fn approx_match(text: &[u8], pattern: &[u8], params: &CoverParams, opts: &OfflineOptions) -> Result<MatchOutput> {
    params.validate()?;
    if pattern.len() != params.pattern_len {
        return Err(Error::InvalidParams(format!(
            "pattern length {} differs from the normalized length {}",
            pattern.len(),
            params.pattern_len
        )));
    }
    let n = text.len();
    if n < params.w {
        return Err(Error::InvalidParams(format!(
            "text length {n} is shorter than the part length {}",
            params.w
        )));
    }
    let exact = threshold_table(text, pattern, params.cutoff);
    let truncated = &pattern[..params.w];

    let mut offsets: Vec<usize> = params
        .segments(n)
        .iter()
        .flat_map(|seg| (0..seg.len / params.w).map(move |m| seg.start + m * params.w))
        .collect();
    offsets.sort_unstable();
    offsets.dedup();

    let results: Vec<PartResult> = if opts.parallel {
        offsets
            .par_iter()
            .map(|&o| cover_one(text, o, truncated, params, opts.trace_boxes))
            .collect::<Result<_>>()?
    } else {
        offsets
            .iter()
            .map(|&o| cover_one(text, o, truncated, params, opts.trace_boxes))
            .collect::<Result<_>>()?
    };

    let mut stats = MatchStats {
        cutoff: params.cutoff,
        truncation: params.truncation(),
        ..MatchStats::default()
    };
    let mut edges = Vec::new();
    let mut trace = Vec::new();
    for r in results {
        stats.absorb(&r.stats);
        edges.extend(r.edges);
        trace.extend(r.trace);
    }
    edges.sort_unstable();
    edges.dedup();
    stats.edges = edges.len();

    // sweep over the truncated pattern; `r` restores the dropped suffix
    let w = params.w;
    let r = params.truncation() as u64;
    let cap = params.pattern_len as u64;
    let mut sweeper = Sweeper::new(w);
    let mut next = 0;
    let mut values = Vec::with_capacity(n);
    let mut modes = Vec::with_capacity(n);
    let mut grid_value = cap;
    let mut grid_t = 0;
    for t in 0..=n {
        if t > 0 {
            let (v, m) = if !opts.coarse_grid || t % params.w2 == 0 {
                let v = sweeper.query(w).saturating_add(r).min(cap);
                if opts.coarse_grid {
                    grid_value = v;
                    grid_t = t;
                }
                (v, Mode::Approx)
            } else {
                (grid_value.saturating_add((t - grid_t) as u64).min(cap), Mode::Carried)
            };
            match exact[t - 1] {
                Some(k) => {
                    stats.exact_positions += 1;
                    values.push(k as u64);
                    modes.push(Mode::Exact);
                }
                None => {
                    values.push(v);
                    modes.push(m);
                }
            }
        }
        while next < edges.len() && edges[next].origin.t == t {
            sweeper.relax(&edges[next]);
            next += 1;
        }
        if t < n {
            sweeper.step();
        }
    }
    stats.tree_nodes = sweeper.tree().node_count();
    Ok(MatchOutput {
        values,
        modes,
        stats,
        trace,
    })
}
