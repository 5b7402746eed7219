// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use apmatch::harness::{self, CorpusSpec, Row};
use apmatch::offline::{approx_match, Mode, OfflineOptions};
use apmatch::online::OnlineState;
use apmatch::params::{normalize_params, ExtensionBoxMode, Overrides};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "apmatch", version, about = "Approximate pattern matching under edit distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random text and pattern, optionally with planted copies.
    Gen(GenArgs),
    /// Estimate k_t for every end position and print `t<TAB>value<TAB>mode`.
    Run(RunArgs),
    /// Compare an estimate TSV against an oracle TSV.
    Eval(EvalArgs),
    /// Time offline and online runs over a grid of (n, w).
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    w: usize,
    /// Alphabet size (letters up to 26, raw bytes above).
    #[arg(long, default_value_t = 4)]
    sigma: usize,
    /// 1-indexed start of a planted copy; repeatable.
    #[arg(long = "plant")]
    plants: Vec<usize>,
    /// Random single-symbol edits per planted copy.
    #[arg(long, default_value_t = 0)]
    edits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    text: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Oracle,
    Offline,
    Online,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    mode: RunMode,
    /// Text file, or `-` for standard input.
    #[arg(long, default_value = "-")]
    text: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    /// Output file (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
    /// Offline: read the sweep only at multiples of w2.
    #[arg(long, alias = "paper-grid")]
    coarse_grid: bool,
    /// Online: print only batch-boundary positions.
    #[arg(long)]
    boundaries_only: bool,
    /// Write every emitted certified box to this file as JSON lines.
    #[arg(long, value_name = "PATH")]
    trace_boxes: Option<PathBuf>,
    /// Offline: cover parts in parallel.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args, Default)]
struct Tuning {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    w1: Option<usize>,
    #[arg(long)]
    w2: Option<usize>,
    #[arg(long)]
    d: Option<f64>,
    /// Theta as a fraction (`0.25` or `1/4`); its reciprocal must be a power of two.
    #[arg(long, value_parser = parse_theta)]
    theta: Option<usize>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    /// `as-written` or `enlarged`.
    #[arg(long)]
    extension_box_mode: Option<ExtensionBoxMode>,
}

impl Tuning {
    fn overrides(&self) -> Overrides {
        Overrides {
            w1: self.w1,
            w2: self.w2,
            d: self.d,
            theta_inv: self.theta,
            c0: self.c0,
            c1: self.c1,
            seed: self.seed,
            n: None,
            extension_box_mode: self.extension_box_mode,
        }
    }
}

/// Returns `1/theta`.
fn parse_theta(s: &str) -> std::result::Result<usize, String> {
    let theta = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(format!("theta must lie in (0, 1], got {theta}"));
    }
    let inv = (1.0 / theta).round() as usize;
    if !inv.is_power_of_two() || ((1.0 / theta) - inv as f64).abs() > 1e-9 {
        return Err(format!("1/theta must be a power of two, got {}", 1.0 / theta));
    }
    Ok(inv)
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    approx: PathBuf,
    #[arg(long)]
    oracle: PathBuf,
    /// Ratio statistics use positions with k_t at least this.
    #[arg(long, default_value_t = 0.0)]
    theta_w: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Text lengths; comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [4096usize, 8192])]
    n: Vec<usize>,
    /// Pattern lengths; comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 256, 1024])]
    w: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading standard input")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn stat<V: std::fmt::Display>(key: &str, value: V) {
    eprintln!("{key}={value}");
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let spec = CorpusSpec {
        n: a.n,
        w: a.w,
        sigma: a.sigma,
        plants: a.plants.clone(),
        edits: a.edits,
        seed: a.seed,
    };
    let corpus = harness::gen_corpus(&spec)?;
    fs::write(&a.text, &corpus.text).with_context(|| format!("writing {}", a.text.display()))?;
    fs::write(&a.pattern, &corpus.pattern).with_context(|| format!("writing {}", a.pattern.display()))?;
    for (p, e) in spec.plants.iter().zip(&corpus.plant_ends) {
        stat("plant", format_args!("{p}..{e}"));
    }
    Ok(())
}

fn write_row(out: &mut dyn Write, (t, v, m): Row) -> io::Result<()> {
    writeln!(out, "{t}\t{v}\t{m}")
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let pattern = fs::read(&a.pattern).with_context(|| format!("reading {}", a.pattern.display()))?;
    let mut out = output(a.out.as_deref())?;
    let start = Instant::now();
    match a.mode {
        RunMode::Oracle => {
            let text = read_input(&a.text)?;
            for row in harness::oracle_rows(&text, &pattern) {
                write_row(&mut out, row)?;
            }
        }
        RunMode::Offline => {
            let text = read_input(&a.text)?;
            let params = normalize_params(pattern.len(), text.len(), &a.tuning.overrides())?;
            let opts = OfflineOptions {
                parallel: a.parallel,
                coarse_grid: a.coarse_grid,
                trace_boxes: a.trace_boxes.is_some(),
            };
            let res = approx_match(&text, &pattern, &params, &opts)?;
            for row in res.rows() {
                write_row(&mut out, row)?;
            }
            if let Some(path) = &a.trace_boxes {
                let mut trace = output(Some(path))?;
                for tb in &res.trace {
                    writeln!(trace, "{}", serde_json::to_string(tb)?)?;
                }
                trace.flush()?;
            }
            stat("w1", params.w1);
            stat("w2", params.w2);
            stat("d", params.d);
            stat("theta_inv", params.theta_inv);
            for (k, v) in res.stats.entries() {
                stat(k, v);
            }
        }
        RunMode::Online => {
            let mut st = OnlineState::new(&pattern, &a.tuning.overrides())?;
            if a.trace_boxes.is_some() {
                st.enable_trace();
            }
            let mut trace = a.trace_boxes.as_deref().map(|p| output(Some(p))).transpose()?;
            let reader: Box<dyn Read> = if a.text == Path::new("-") {
                Box::new(io::stdin().lock())
            } else {
                Box::new(fs::File::open(&a.text).with_context(|| format!("opening {}", a.text.display()))?)
            };
            let mut reader = BufReader::new(reader);
            loop {
                let chunk = reader.fill_buf()?;
                if chunk.is_empty() {
                    break;
                }
                let len = chunk.len();
                for &c in chunk {
                    let (v, m) = st.push(c);
                    if !a.boundaries_only || m == Mode::Approx {
                        write_row(&mut out, (st.position(), v, m))?;
                    }
                }
                reader.consume(len);
                if let Some(tr) = trace.as_mut() {
                    for tb in st.take_trace() {
                        writeln!(tr, "{}", serde_json::to_string(&tb)?)?;
                    }
                }
            }
            if let Some(tr) = trace.as_mut() {
                tr.flush()?;
            }
            let p = st.params();
            stat("w1", p.w1);
            stat("w2", p.w2);
            stat("d", p.d);
            stat("theta_inv", p.theta_inv);
            let s = st.stats();
            stat("batches", s.batches);
            stat("boxes_dense", s.boxes_dense);
            stat("boxes_extension", s.boxes_extension);
            stat("edges", s.edges);
            for (k, v) in st.space_report().entries() {
                stat(&k, v);
            }
        }
    }
    out.flush()?;
    stat("elapsed_secs", format_args!("{:.6}", start.elapsed().as_secs_f64()));
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    harness::parse_tsv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let approx = read_rows(&a.approx)?;
    let oracle = read_rows(&a.oracle)?;
    let report = harness::evaluate(&approx, &oracle, a.theta_w)?;
    let mut out = io::stdout().lock();
    for (k, v) in report.entries() {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "n\tw\treps\toffline_secs\tonline_us_per_symbol\tboxes\tedges")?;
    let mut by_w = Vec::new();
    for &n in &a.n {
        for &w in &a.w {
            if w > n {
                continue;
            }
            let row = harness::bench_cell(n, w, a.reps, a.seed)?;
            let online = row
                .online_us_per_symbol
                .map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{}\t{}\t{}",
                row.n, row.w, row.reps, row.offline_secs, online, row.boxes, row.edges
            )?;
            if n == a.n[0] {
                by_w.push((w as f64, row.offline_secs));
            }
        }
    }
    if let Some(e) = harness::fit_exponent(&by_w) {
        stat("offline_w_exponent", format_args!("{e:.3}"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_parsing() {
        assert_eq!(parse_theta("0.25"), Ok(4));
        assert_eq!(parse_theta("1/8"), Ok(8));
        assert_eq!(parse_theta("1"), Ok(1));
        assert!(parse_theta("0.3").is_err());
        assert!(parse_theta("2").is_err());
        assert!(parse_theta("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
