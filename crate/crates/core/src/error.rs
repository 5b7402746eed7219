// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("position {pos} out of range 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },

    #[error("span {lo}..{hi} out of bounds for a string of length {len}")]
    SpanOutOfBounds { lo: usize, hi: usize, len: usize },

    #[error("span endpoints reversed: {lo} > {hi}")]
    ReversedSpan { lo: usize, hi: usize },

    #[error("box spans differ in width (text {text}, pattern {pattern})")]
    WidthMismatch { text: usize, pattern: usize },

    #[error("extension of length {len} does not fit in a pattern of length {pattern_len}")]
    ExtensionTooLong { len: usize, pattern_len: usize },

    #[error("shortcut edge ({t0},{y0}) -> ({t1},{y1}) out of range for a {n}x{w} grid")]
    EdgeOutOfRange {
        t0: usize,
        y0: usize,
        t1: usize,
        y1: usize,
        n: usize,
        w: usize,
    },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "pattern length {len} is too short for nondegenerate parameters; \
         use the exact matcher (oracle mode) instead"
    )]
    PatternTooShort { len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
