//! Runtime experiment: plain WFC on the whole grid against N-WFC, over
//! canonical sub-complete tilesets of growing edge-set size.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Duration;

use nwfc_core::nwfc::{self, SubgridPlan};
use nwfc_core::rng::splitmix64;
use nwfc_core::solver::{self, Rules, SolveJob};
use nwfc_core::tileset::canonical_sub_complete;
use nwfc_core::{BoundarySpec, GenerateError, SolveOutcome, WeightField};
use serde::{Deserialize, Serialize};

use crate::clock::Deadline;

/// The grid ladder `(M, N)`. The 33 x 73 entry stands in for a point whose
/// published size does not fit a 5-cell sub-grid.
pub const DEFAULT_GRIDS: [(usize, usize); 7] = [(5, 9), (9, 17), (17, 33), (25, 49), (33, 73), (41, 81), (49, 97)];

pub const ROWS_HEADER: [&str; 8] = ["algorithm", "k", "M", "N", "repeat", "elapsed_ns", "backtracks", "outcome"];
pub const SUMMARY_HEADER: [&str; 7] = ["algorithm", "k", "M", "N", "mean_s", "var_s2", "timeout_frac"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Wfc,
    Nwfc,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Wfc => "wfc",
            Algorithm::Nwfc => "nwfc",
        })
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wfc" => Ok(Algorithm::Wfc),
            "nwfc" => Ok(Algorithm::Nwfc),
            other => Err(BenchError::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Timeout,
    /// The solver proved there is no tiling. Never expected here.
    Unsat,
    /// Step budget spent before the deadline, or any other failure.
    Failed,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Solved => "solved",
            Outcome::Timeout => "timeout",
            Outcome::Unsat => "unsat",
            Outcome::Failed => "failed",
        })
    }
}

impl FromStr for Outcome {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solved" => Ok(Outcome::Solved),
            "timeout" => Ok(Outcome::Timeout),
            "unsat" => Ok(Outcome::Unsat),
            "failed" => Ok(Outcome::Failed),
            other => Err(BenchError::Parse(format!("unknown outcome {other:?}"))),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no rows to summarize")]
    Empty,
    #[error("k={k}: {points} solved grid sizes, need at least 3 for a fit")]
    InsufficientPoints { k: usize, points: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub edge_sizes: Vec<usize>,
    #[serde(rename = "C")]
    pub chunk: usize,
    pub grid_sizes: Vec<(usize, usize)>,
    pub repeats: usize,
    pub algorithms: Vec<Algorithm>,
    /// Per-run wall-clock limit in seconds.
    pub timeout_s: f64,
    pub seed: u64,
    /// Number of worker threads. 1 runs everything in sequence.
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            edge_sizes: (2..=7).collect(),
            chunk: 5,
            grid_sizes: DEFAULT_GRIDS.to_vec(),
            repeats: 100,
            algorithms: vec![Algorithm::Wfc, Algorithm::Nwfc],
            timeout_s: 60.0,
            seed: 0,
            workers: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.edge_sizes.is_empty() || self.grid_sizes.is_empty() || self.algorithms.is_empty() {
            return bad("edge_sizes, grid_sizes and algorithms must be non-empty".into());
        }
        if let Some(k) = self.edge_sizes.iter().find(|&&k| !(1..=255).contains(&k)) {
            return bad(format!("edge set size {k} out of range 1..=255"));
        }
        for &(m, n) in &self.grid_sizes {
            if let Err(e) = nwfc::plan(m, n, self.chunk) {
                return bad(format!("grid {m}x{n}: {e}"));
            }
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return bad(format!("timeout must be positive, got {}", self.timeout_s));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    pub fn row_count(&self) -> usize {
        self.algorithms.len() * self.edge_sizes.len() * self.grid_sizes.len() * self.repeats
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub repeat: usize,
    pub elapsed_ns: u64,
    pub backtracks: u64,
    pub outcome: Outcome,
}

/// Seed for the tileset of one `(k, grid)` cell. Both algorithms share it.
pub fn tileset_seed(seed: u64, k: usize, m: usize, n: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed ^ k as u64) ^ m as u64) ^ n as u64)
}

/// Seed for one repeat of one `(k, grid)` cell. Both algorithms share it.
pub fn run_seed(seed: u64, k: usize, m: usize, n: usize, repeat: usize) -> u64 {
    splitmix64(tileset_seed(seed, k, m, n) ^ splitmix64(repeat as u64))
}

/// One measured run. Only the solve call is timed.
pub fn run_one(cfg: &BenchConfig, algorithm: Algorithm, k: usize, (m, n): (usize, usize), repeat: usize) -> BenchRow {
    let ts = canonical_sub_complete(k, 0, tileset_seed(cfg.seed, k, m, n)).expect("validated edge size");
    let rules = Rules::new(&ts);
    let seed = run_seed(cfg.seed, k, m, n, repeat);
    let weights = WeightField::neutral();
    let row = |elapsed_ns: u64, backtracks: u64, outcome: Outcome| BenchRow {
        algorithm,
        k,
        m,
        n,
        repeat,
        elapsed_ns: elapsed_ns.max(1),
        backtracks,
        outcome,
    };
    match algorithm {
        Algorithm::Wfc => {
            let boundary = BoundarySpec::none();
            let job = SolveJob {
                width: n,
                height: m,
                boundary: &boundary,
                weights: &weights,
                origin: (0, 0),
                seed,
                budget: u64::MAX,
            };
            let clock = Deadline::new(Some(cfg.timeout()));
            let out = solver::solve_with(&rules, &job, &clock).expect("grid is non-empty");
            let elapsed = out.stats().elapsed_ns;
            let backtracks = out.stats().backtracks;
            match out {
                SolveOutcome::Solved(..) => row(elapsed, backtracks, Outcome::Solved),
                SolveOutcome::Unsat(_) => row(elapsed, backtracks, Outcome::Unsat),
                SolveOutcome::BudgetExceeded(_) => row(elapsed, backtracks, Outcome::Timeout),
            }
        }
        Algorithm::Nwfc => {
            let plan = SubgridPlan::new(m, n, cfg.chunk).expect("validated grid");
            let clock = Deadline::new(Some(cfg.timeout()));
            let result = nwfc::generate_with(&plan, &rules, &weights, seed, solver::DEFAULT_BUDGET, &clock);
            let elapsed = clock.elapsed().as_nanos() as u64;
            match result {
                Ok((_, _, stats)) => {
                    assert_eq!(stats.exterior_retries, 0, "committed sub-grids are never revisited");
                    row(stats.elapsed_ns, stats.interior_backtracks, Outcome::Solved)
                }
                Err(GenerateError::BudgetExceeded { .. }) if clock.expired() => row(elapsed, 0, Outcome::Timeout),
                Err(GenerateError::SubgridUnsat { .. }) => row(elapsed, 0, Outcome::Unsat),
                Err(_) => row(elapsed, 0, Outcome::Failed),
            }
        }
    }
}

/// Every `(k, grid)` cell in configuration order.
fn cells(cfg: &BenchConfig) -> Vec<(usize, (usize, usize))> {
    cfg.edge_sizes.iter().flat_map(|&k| cfg.grid_sizes.iter().map(move |&g| (k, g))).collect()
}

fn run_cell(cfg: &BenchConfig, k: usize, grid: (usize, usize), sink: &mut dyn FnMut(BenchRow)) {
    for &algorithm in &cfg.algorithms {
        for repeat in 0..cfg.repeats {
            sink(run_one(cfg, algorithm, k, grid, repeat));
        }
    }
}

/// Runs the experiment, handing each row to `sink` as soon as it exists.
///
/// With `workers > 1` the `(k, grid)` cells are spread over threads and
/// rows arrive per finished cell; the row set is the same as a sequential
/// run, only timings are noisier.
pub fn run_experiment(cfg: &BenchConfig, mut sink: impl FnMut(BenchRow)) -> Result<(), BenchError> {
    cfg.validate()?;
    let cells = cells(cfg);
    if cfg.workers == 1 {
        for (k, grid) in cells {
            log::info!("bench k={k} grid={}x{}", grid.0, grid.1);
            run_cell(cfg, k, grid, &mut sink);
        }
        return Ok(());
    }
    log::warn!("running with {} workers; contention may inflate timing variance", cfg.workers);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let (tx, rx) = std::sync::mpsc::channel::<Vec<BenchRow>>();
    std::thread::scope(|scope| {
        for _ in 0..cfg.workers.min(cells.len()) {
            let tx = tx.clone();
            let (next, cells) = (&next, &cells);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(&(k, grid)) = cells.get(i) else { break };
                let mut rows = Vec::new();
                run_cell(cfg, k, grid, &mut |r| rows.push(r));
                if tx.send(rows).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for rows in rx {
            rows.into_iter().for_each(&mut sink);
        }
    });
    Ok(())
}

pub fn run_experiment_collect(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::with_capacity(cfg.row_count());
    run_experiment(cfg, |r| rows.push(r))?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub runs: usize,
    /// Mean seconds over solved runs; `None` when no run solved.
    pub mean_s: Option<f64>,
    /// Population variance in seconds squared over solved runs.
    pub var_s2: Option<f64>,
    pub timeout_frac: f64,
}

/// `(algorithm, k, M, N)`.
type GroupKey = (Algorithm, usize, usize, usize);

/// Groups rows by `(algorithm, k, M, N)` in order of first appearance.
pub fn summarize(rows: &[BenchRow]) -> Result<Vec<SummaryRow>, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    let mut groups: Vec<(GroupKey, Vec<&BenchRow>)> = Vec::new();
    for r in rows {
        let key = (r.algorithm, r.k, r.m, r.n);
        let i = *index.entry(key).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((algorithm, k, m, n), members)| {
            let solved: Vec<f64> =
                members.iter().filter(|r| r.outcome == Outcome::Solved).map(|r| r.elapsed_ns as f64 * 1e-9).collect();
            let (mean_s, var_s2) = if solved.is_empty() {
                (None, None)
            } else {
                let mean = solved.iter().sum::<f64>() / solved.len() as f64;
                let var = solved.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / solved.len() as f64;
                (Some(mean), Some(var))
            };
            let timeouts = members.iter().filter(|r| r.outcome == Outcome::Timeout).count();
            SummaryRow {
                algorithm,
                k,
                m,
                n,
                runs: members.len(),
                mean_s,
                var_s2,
                timeout_frac: timeouts as f64 / members.len() as f64,
            }
        })
        .collect())
}

/// Least-squares slope of `ln y` against `ln x`. Needs two distinct `x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub algorithm: Algorithm,
    pub k: usize,
    pub slope: f64,
    pub points: usize,
}

/// Log-log slope of mean time against cell count `M * N`, one fit per `k`.
pub fn fit_scaling(summary: &[SummaryRow], algorithm: Algorithm) -> Result<Vec<ScalingFit>, BenchError> {
    let mut ks: Vec<usize> = summary.iter().filter(|s| s.algorithm == algorithm).map(|s| s.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut fits = Vec::with_capacity(ks.len());
    for k in ks {
        let points: Vec<(f64, f64)> = summary
            .iter()
            .filter(|s| s.algorithm == algorithm && s.k == k)
            .filter_map(|s| s.mean_s.map(|t| ((s.m * s.n) as f64, t)))
            .collect();
        let distinct = {
            let mut xs: Vec<u64> = points.iter().map(|p| p.0 as u64).collect();
            xs.sort_unstable();
            xs.dedup();
            xs.len()
        };
        if distinct < 3 {
            return Err(BenchError::InsufficientPoints { k, points: distinct });
        }
        let slope = log_log_slope(&points).expect("three distinct positive points");
        fits.push(ScalingFit { algorithm, k, slope, points: points.len() });
    }
    Ok(fits)
}

pub fn write_rows<W: Write>(out: W, rows: &[BenchRow]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(ROWS_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.repeat.to_string(),
            r.elapsed_ns.to_string(),
            r.backtracks.to_string(),
            r.outcome.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != ROWS_HEADER {
        return Err(BenchError::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in rd.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let num = |i: usize| field(i).parse::<u64>().map_err(|e| BenchError::Parse(format!("{}: {e}", ROWS_HEADER[i])));
        rows.push(BenchRow {
            algorithm: field(0).parse()?,
            k: num(1)? as usize,
            m: num(2)? as usize,
            n: num(3)? as usize,
            repeat: num(4)? as usize,
            elapsed_ns: num(5)?,
            backtracks: num(6)?,
            outcome: field(7).parse()?,
        });
    }
    Ok(rows)
}

pub fn write_summary<W: Write>(out: W, summary: &[SummaryRow]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
    for s in summary {
        w.write_record([
            s.algorithm.to_string(),
            s.k.to_string(),
            s.m.to_string(),
            s.n.to_string(),
            opt(s.mean_s),
            opt(s.var_s2),
            format!("{}", s.timeout_frac),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
