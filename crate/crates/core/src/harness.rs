// SPDX-License-Identifier: Apache-2.0

//! Corpus generation, per-position TSV, evaluation against an oracle run,
//! and timing cells. Shared by the command-line tool and the test suites.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::sellers_scan;
use crate::offline::{approx_match, Mode, OfflineOptions};
use crate::online::OnlineState;
use crate::params::{normalize_params, Overrides};
use crate::rng::{self, Phase};

/// One `(t, value, mode)` line.
pub type Row = (usize, u64, Mode);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n: usize,
    pub w: usize,
    pub sigma: usize,
    /// 1-indexed start positions of planted copies.
    pub plants: Vec<usize>,
    /// Random single-symbol edits applied to each planted copy.
    pub edits: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub text: Vec<u8>,
    pub pattern: Vec<u8>,
    /// 1-indexed end position of each plant, in `plants` order.
    pub plant_ends: Vec<usize>,
}

fn symbol(sigma: usize, x: usize) -> u8 {
    if sigma <= 26 {
        b'a' + x as u8
    } else {
        x as u8
    }
}

fn random_symbol(rng: &mut impl Rng, sigma: usize) -> u8 {
    symbol(sigma, rng.gen_range(0..sigma))
}

/// Applies `edits` random substitutions, insertions and deletions.
fn mutate(rng: &mut impl Rng, s: &mut Vec<u8>, edits: usize, sigma: usize) {
    for _ in 0..edits {
        let op = if s.is_empty() { 1 } else { rng.gen_range(0..3) };
        match op {
            0 => {
                let i = rng.gen_range(0..s.len());
                if sigma > 1 {
                    let old = s[i];
                    while s[i] == old {
                        s[i] = random_symbol(rng, sigma);
                    }
                }
            }
            1 => {
                let i = rng.gen_range(0..=s.len());
                s.insert(i, random_symbol(rng, sigma));
            }
            _ => {
                let i = rng.gen_range(0..s.len());
                s.remove(i);
            }
        }
    }
}

/// Random text and pattern over `sigma` symbols, with mutated copies of the
/// pattern written over the text at each plant position.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    if spec.sigma == 0 || spec.sigma > 256 {
        return Err(Error::InvalidParams(format!("alphabet size {} not in 1..=256", spec.sigma)));
    }
    for &p in &spec.plants {
        if p == 0 || p - 1 + spec.w + spec.edits > spec.n {
            return Err(Error::InvalidParams(format!(
                "plant at {p} with {} edits does not fit in a text of length {}",
                spec.edits, spec.n
            )));
        }
    }
    let mut rng = rng::stream(spec.seed, 0, Phase::Corpus, spec.n as u64, spec.w as u64);
    let pattern: Vec<u8> = (0..spec.w).map(|_| random_symbol(&mut rng, spec.sigma)).collect();
    let mut text: Vec<u8> = (0..spec.n).map(|_| random_symbol(&mut rng, spec.sigma)).collect();
    let mut plant_ends = Vec::with_capacity(spec.plants.len());
    for &p in &spec.plants {
        let mut copy = pattern.clone();
        mutate(&mut rng, &mut copy, spec.edits, spec.sigma);
        text[p - 1..p - 1 + copy.len()].copy_from_slice(&copy);
        plant_ends.push(p - 1 + copy.len());
    }
    Ok(Corpus {
        text,
        pattern,
        plant_ends,
    })
}

/// Exact `k_t` rows.
pub fn oracle_rows(text: &[u8], pattern: &[u8]) -> Vec<Row> {
    sellers_scan(text, pattern)
        .into_iter()
        .enumerate()
        .map(|(i, k)| (i + 1, k as u64, Mode::Exact))
        .collect()
}

pub fn format_tsv(rows: &[Row]) -> String {
    let mut out = String::with_capacity(rows.len() * 12);
    for &(t, v, m) in rows {
        let _ = writeln!(out, "{t}\t{v}\t{m}");
    }
    out
}

pub fn parse_tsv(input: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::Malformed {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut cols = line.split('\t');
        let (Some(t), Some(v), Some(m), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected three tab-separated columns"));
        };
        let t = t.parse().map_err(|_| bad("position is not an integer"))?;
        let v = v.parse().map_err(|_| bad("value is not an integer"))?;
        let m = m.parse().map_err(|_| bad("unknown mode"))?;
        rows.push((t, v, m));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub positions: usize,
    pub violations: usize,
    pub first_violation: Option<usize>,
    /// Positions with `k_t >= theta_w` and `k_t > 0`.
    pub ratio_positions: usize,
    pub ratio_max: f64,
    pub ratio_p99: f64,
    pub ratio_median: f64,
    pub gap_max: u64,
    pub gap_mean: f64,
}

impl EvalReport {
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("positions", self.positions.to_string()),
            ("violations", self.violations.to_string()),
            (
                "first_violation",
                self.first_violation.map_or_else(|| "none".to_string(), |t| t.to_string()),
            ),
            ("ratio_positions", self.ratio_positions.to_string()),
            ("ratio_max", format!("{:.4}", self.ratio_max)),
            ("ratio_p99", format!("{:.4}", self.ratio_p99)),
            ("ratio_median", format!("{:.4}", self.ratio_median)),
            ("gap_max", self.gap_max.to_string()),
            ("gap_mean", format!("{:.4}", self.gap_mean)),
        ]
    }
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Compares an estimate run against oracle rows over the same positions.
pub fn evaluate(approx: &[Row], oracle: &[Row], theta_w: f64) -> Result<EvalReport> {
    if approx.len() != oracle.len() {
        return Err(Error::InvalidParams(format!(
            "row counts differ: {} vs {}",
            approx.len(),
            oracle.len()
        )));
    }
    let mut violations = 0;
    let mut first_violation = None;
    let mut ratios = Vec::new();
    let mut gap_max = 0;
    let mut gap_sum = 0u64;
    for (i, (&(ta, v, _), &(to, k, _))) in approx.iter().zip(oracle).enumerate() {
        if ta != to {
            return Err(Error::Malformed {
                line: i + 1,
                reason: format!("position {ta} does not line up with oracle position {to}"),
            });
        }
        if v < k {
            violations += 1;
            first_violation.get_or_insert(ta);
            continue;
        }
        gap_max = gap_max.max(v - k);
        gap_sum += v - k;
        if k > 0 && k as f64 >= theta_w {
            ratios.push(v as f64 / k as f64);
        }
    }
    ratios.sort_by(f64::total_cmp);
    let sound = approx.len() - violations;
    Ok(EvalReport {
        positions: approx.len(),
        violations,
        first_violation,
        ratio_positions: ratios.len(),
        ratio_max: ratios.last().copied().unwrap_or(0.0),
        ratio_p99: quantile(&ratios, 0.99),
        ratio_median: quantile(&ratios, 0.5),
        gap_max,
        gap_mean: if sound == 0 { 0.0 } else { gap_sum as f64 / sound as f64 },
    })
}

/// Timing for one `(n, w)` grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub w: usize,
    pub reps: usize,
    /// Median offline wall time.
    pub offline_secs: f64,
    /// Median online wall time divided by `n`.
    pub online_us_per_symbol: Option<f64>,
    pub boxes: usize,
    pub edges: usize,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Runs offline (and online when its default parameters are valid for `w`)
/// `reps` times on a planted corpus.
pub fn bench_cell(n: usize, w: usize, reps: usize, seed: u64) -> Result<BenchRow> {
    let reps = reps.max(1);
    let spec = CorpusSpec {
        n,
        w,
        sigma: 4,
        plants: if n >= 2 * w { vec![n / 2] } else { Vec::new() },
        edits: 0,
        seed,
    };
    let corpus = gen_corpus(&spec)?;
    let o = Overrides {
        seed: Some(seed),
        ..Default::default()
    };
    let params = normalize_params(w, n, &o)?;
    let mut offline = Vec::with_capacity(reps);
    let mut boxes = 0;
    let mut edges = 0;
    for _ in 0..reps {
        let start = Instant::now();
        let out = approx_match(&corpus.text, &corpus.pattern, &params, &OfflineOptions::default())?;
        offline.push(start.elapsed().as_secs_f64());
        boxes = out.stats.boxes_dense + out.stats.boxes_extension;
        edges = out.stats.edges;
    }
    let o = Overrides {
        seed: Some(seed),
        n: Some(n),
        ..Default::default()
    };
    let online_us_per_symbol = match OnlineState::new(&corpus.pattern, &o) {
        Ok(fresh) => {
            let mut times = Vec::with_capacity(reps);
            for _ in 0..reps {
                let mut st = fresh.clone();
                let start = Instant::now();
                for &c in &corpus.text {
                    st.push(c);
                }
                times.push(start.elapsed().as_secs_f64() * 1e6 / n as f64);
            }
            Some(median(times))
        }
        Err(_) => None,
    };
    Ok(BenchRow {
        n,
        w,
        reps,
        offline_secs: median(offline),
        online_us_per_symbol,
        boxes,
        edges,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
