// SPDX-License-Identifier: Apache-2.0

//! Min-cost paths in the grid with shortcut edges.
//!
//! The reduced graph keeps the H and V steps of the pattern matching graph
//! (bottom row free), drops every diagonal, and adds one shortcut per
//! sufficiently tight square certified box. A single left-to-right sweep over
//! the shortcuts, ordered by origin, yields the cost of reaching `(t, w)` for
//! every `t`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CertifiedBox, GridCoord};

pub const INF: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ShortcutEdge {
    pub origin: GridCoord,
    pub dest: GridCoord,
    pub cost: u64,
}

impl ShortcutEdge {
    pub fn new(origin: GridCoord, dest: GridCoord, cost: u64) -> Self {
        ShortcutEdge { origin, dest, cost }
    }

    fn check(&self, n: usize, w: usize) -> Result<()> {
        let (o, d) = (self.origin, self.dest);
        if d.t > n || d.y > w || o.t > d.t || o.y > d.y {
            return Err(Error::EdgeOutOfRange {
                t0: o.t,
                y0: o.y,
                t1: d.t,
                y1: d.y,
                n,
                w,
            });
        }
        Ok(())
    }
}

/// The shortcut `(min I, min J + l) -> (max I, max J - l)` of cost `3l`, if
/// `l < (|I| - 1) / 2`.
pub fn box_to_shortcut(cbox: &CertifiedBox) -> Result<Option<ShortcutEdge>> {
    let width = cbox.text.width();
    if width != cbox.pattern.width() {
        return Err(Error::WidthMismatch {
            text: width,
            pattern: cbox.pattern.width(),
        });
    }
    let l = cbox.bound;
    if 2 * l >= width as u64 {
        return Ok(None);
    }
    let l = l as usize;
    Ok(Some(ShortcutEdge {
        origin: GridCoord::new(cbox.text.lo, cbox.pattern.lo + l),
        dest: GridCoord::new(cbox.text.hi, cbox.pattern.hi - l),
        cost: 3 * l as u64,
    }))
}

#[derive(Debug, Clone, Copy)]
struct Node {
    cost: u64,
    time: usize,
    left: u32,
    right: u32,
}

const ABSENT: u32 = 0;

impl Node {
    fn fresh() -> Self {
        Node {
            cost: INF,
            time: 0,
            left: ABSENT,
            right: ABSENT,
        }
    }

    #[inline]
    fn answer(&self, t: usize) -> u64 {
        debug_assert!(t >= self.time);
        self.cost.saturating_add((t - self.time) as u64)
    }
}

/// Binary tree over heights `0..=w`. Node `v` stores `(c_v, t_v)`: the best
/// cost of reaching `(t_v, max I_v)` through a shortcut landing in `I_v`.
/// Nodes are allocated on first update; absent nodes answer infinity.
#[derive(Debug, Clone)]
pub struct SweepTree {
    w: usize,
    // index 0 is the root once allocated; children never use index 0
    nodes: Vec<Node>,
}

impl SweepTree {
    pub fn new(w: usize) -> Self {
        SweepTree { w, nodes: Vec::new() }
    }

    pub fn height(&self) -> usize {
        self.w
    }

    /// Number of materialized nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Upper bound on root-to-leaf depth.
    pub fn max_depth(&self) -> usize {
        1 + (usize::BITS - self.w.leading_zeros()) as usize
    }

    /// Min cost from `(0, 0)` to `(t, j)` over the shortcut-free path and
    /// paths whose last shortcut has been applied.
    pub fn query(&self, t: usize, j: usize) -> u64 {
        debug_assert!(j <= self.w);
        let mut best = j as u64;
        if self.nodes.is_empty() {
            return best;
        }
        let (mut lo, mut hi) = (0, self.w);
        let mut idx = 0u32;
        loop {
            let node = &self.nodes[idx as usize];
            if lo == hi {
                best = best.min(node.answer(t));
                return best;
            }
            let mid = lo + (hi - lo) / 2;
            if j <= mid {
                idx = node.left;
                hi = mid;
            } else {
                if node.left != ABSENT {
                    let a = self.nodes[node.left as usize].answer(t);
                    best = best.min(a.saturating_add((j - mid) as u64));
                }
                idx = node.right;
                lo = mid + 1;
            }
            if idx == ABSENT {
                return best;
            }
        }
    }

    /// Records a landing at `(t_new, j)` with cost `cost` on every node whose
    /// interval contains `j`.
    pub fn update(&mut self, t_new: usize, cost: u64, j: usize) {
        debug_assert!(j <= self.w);
        if self.nodes.is_empty() {
            self.nodes.push(Node::fresh());
        }
        let (mut lo, mut hi) = (0, self.w);
        let mut idx = 0usize;
        loop {
            let node = &mut self.nodes[idx];
            debug_assert!(t_new >= node.time);
            let carried = node.answer(t_new);
            let landed = cost.saturating_add((hi - j) as u64);
            node.cost = carried.min(landed);
            node.time = t_new;
            if lo == hi {
                return;
            }
            let mid = lo + (hi - lo) / 2;
            let go_left = j <= mid;
            let child = if go_left { node.left } else { node.right };
            let child = if child == ABSENT {
                let fresh = self.nodes.len() as u32;
                self.nodes.push(Node::fresh());
                let node = &mut self.nodes[idx];
                if go_left {
                    node.left = fresh;
                } else {
                    node.right = fresh;
                }
                fresh
            } else {
                child
            };
            if go_left {
                hi = mid;
            } else {
                lo = mid + 1;
            }
            idx = child as usize;
        }
    }
}

/// Incremental sweep state: the tree, pending landings per arrival time, and
/// the current time.
#[derive(Debug, Clone)]
pub struct Sweeper {
    tree: SweepTree,
    pending: BTreeMap<usize, Vec<(u64, usize)>>,
    pending_len: usize,
    time: usize,
}

impl Sweeper {
    pub fn new(w: usize) -> Self {
        Sweeper {
            tree: SweepTree::new(w),
            pending: BTreeMap::new(),
            pending_len: 0,
            time: 0,
        }
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn tree(&self) -> &SweepTree {
        &self.tree
    }

    pub fn pending_updates(&self) -> usize {
        self.pending_len
    }

    /// Cost of reaching `(time, y)`.
    pub fn query(&self, y: usize) -> u64 {
        self.tree.query(self.time, y)
    }

    /// Relaxes an edge leaving at the current time. Edges with no horizontal
    /// extent are ignored.
    pub fn relax(&mut self, edge: &ShortcutEdge) {
        debug_assert_eq!(edge.origin.t, self.time);
        if edge.dest.t <= edge.origin.t {
            return;
        }
        let c = self.query(edge.origin.y).saturating_add(edge.cost);
        self.pending.entry(edge.dest.t).or_default().push((c, edge.dest.y));
        self.pending_len += 1;
    }

    /// Applies the landings due at `time + 1` and advances the clock.
    pub fn step(&mut self) {
        let next = self.time + 1;
        if let Some(updates) = self.pending.remove(&next) {
            self.pending_len -= updates.len();
            for (c, y) in updates {
                self.tree.update(next, c, y);
            }
        }
        self.time = next;
    }
}

/// Cost of reaching `(t, w)` for `t = 0..=n` in the reduced graph.
pub fn sweep_min_cost(edges: &[ShortcutEdge], n: usize, w: usize) -> Result<Vec<u64>> {
    for e in edges {
        e.check(n, w)?;
    }
    let mut sorted: Vec<&ShortcutEdge> = edges.iter().collect();
    sorted.sort_by_key(|e| e.origin.t);
    let mut sweeper = Sweeper::new(w);
    let mut out = Vec::with_capacity(n + 1);
    let mut next = 0;
    for t in 0..=n {
        out.push(sweeper.query(w));
        while next < sorted.len() && sorted[next].origin.t == t {
            sweeper.relax(sorted[next]);
            next += 1;
        }
        if t < n {
            sweeper.step();
        }
    }
    Ok(out)
}

/// Explicit relaxation over every vertex of the reduced graph. Test oracle.
pub fn reference_min_cost(edges: &[ShortcutEdge], n: usize, w: usize) -> Result<Vec<u64>> {
    for e in edges {
        e.check(n, w)?;
    }
    let mut dist = vec![vec![INF; w + 1]; n + 1];
    dist[0][0] = 0;
    for t in 0..=n {
        for y in 0..=w {
            let mut d = dist[t][y];
            if t > 0 {
                let h = if y == 0 { 0 } else { 1 };
                d = d.min(dist[t - 1][y].saturating_add(h));
            }
            if y > 0 {
                d = d.min(dist[t][y - 1].saturating_add(1));
            }
            dist[t][y] = d;
            for e in edges.iter().filter(|e| e.origin.t == t && e.origin.y == y) {
                if e.dest.t > t {
                    let cand = d.saturating_add(e.cost);
                    let slot = &mut dist[e.dest.t][e.dest.y];
                    *slot = (*slot).min(cand);
                }
            }
        }
    }
    Ok((0..=n).map(|t| dist[t][w]).collect())
}
