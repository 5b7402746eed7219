// SPDX-License-Identifier: Apache-2.0

//! Approximate pattern matching under edit distance.
//!
//! For a text `T` of length `n` and a pattern `P` of length `w`, the target
//! quantity at each end position `t` is the least edit distance between `P`
//! and some substring of `T` ending at `t`. The crate computes these values
//! exactly up to a cutoff and approximately above it, both offline (whole
//! text available) and online (one symbol at a time).

pub mod covering;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod offline;
pub mod online;
pub mod params;
pub mod rng;
pub mod shortcut;

pub use error::{Error, Result};
pub use grid::{CertifiedBox, GridCoord, MonotonePath, Span};
pub use offline::{approx_match, MatchOutput, Mode, OfflineOptions};
pub use online::{OnlineState, SpaceReport};
pub use params::{CoverParams, ExtensionBoxMode, Overrides};
pub use shortcut::{box_to_shortcut, sweep_min_cost, ShortcutEdge};
