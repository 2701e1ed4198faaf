//! Command-line entry point.
//!
//! Data goes to standard output or files. Diagnostics go to standard error,
//! filtered by `NWFC_LOG` (`error`, `info` or `debug`). Every failure prints
//! one line starting with `error:<code>:` and maps to an exit code:
//! 1 for usage and I/O, 2 for a negative validation, 3 for a failed
//! generation.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nwfc_core::nwfc::{self, SubgridPlan};
use nwfc_core::solver::{Rules, DEFAULT_BUDGET};
use nwfc_core::{GenerateError, Tileset, WeightField};

use crate::bench::{self, Algorithm, BenchConfig};
use crate::clock::Deadline;
use crate::doc::{self, to_compact, to_pretty, CoverageDoc, StatsDoc, TilingDoc};
use crate::{persist, render, server};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;

/// Name accepted by `--tileset` for the bundled Carcassonne set.
pub const BUILTIN_CARCASSONNE: &str = "builtin:carcassonne";

#[derive(Debug, Parser)]
#[command(name = "nwfc", version, about = "Nested wave function collapse tile map generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a tileset file for completeness and sub-completeness.
    Validate {
        /// Tileset JSON file (or builtin:carcassonne).
        file: String,
    },
    /// Generate a map with nested WFC.
    Gen(GenArgs),
    /// Run the WFC vs N-WFC runtime experiment.
    Bench(BenchArgs),
    /// Serve the HTTP API and the designer page.
    Serve(ServeArgs),
    /// Inspect a saved world.
    World {
        #[command(subcommand)]
        command: WorldCommand,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    tileset: String,
    /// Columns.
    #[arg(long)]
    width: usize,
    /// Rows.
    #[arg(long)]
    height: usize,
    /// Sub-grid side C.
    #[arg(long, default_value_t = 5)]
    chunk: usize,
    #[arg(long)]
    seed: u64,
    /// Brush JSON file.
    #[arg(long)]
    brush: Option<PathBuf>,
    /// Tiling JSON output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// PPM image output.
    #[arg(long)]
    ppm: Option<PathBuf>,
    /// Stats JSON output. Printed to standard output when --out is given.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Pixels per tile side in the PPM image.
    #[arg(long, default_value_t = render::DEFAULT_SCALE)]
    scale: usize,
    /// Step budget per sub-grid (collapses plus backtracks).
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Benchmark configuration JSON; defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-run rows CSV.
    #[arg(long)]
    out: PathBuf,
    /// Summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    tileset: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long)]
    world_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    chunk: usize,
}

#[derive(Debug, Subcommand)]
enum WorldCommand {
    /// Print the manifest of a saved world.
    Info {
        #[arg(long)]
        world_dir: PathBuf,
    },
}

/// A failure with its exit code and machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub exit: i32,
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    fn new(exit: i32, code: &'static str, message: impl ToString) -> Self {
        Self { exit, code, message: message.to_string() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_USAGE, "io", format!("{}: {e}", path.display()))
    }
}

fn init_logging() {
    let filter = std::env::var("NWFC_LOG").unwrap_or_else(|_| "error".into());
    let _ = env_logger::Builder::new().parse_filters(&filter).target(env_logger::Target::Stderr).try_init();
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "error:usage: {first}");
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Validate { file } => validate(&file, out),
        Command::Gen(args) => gen(args, out),
        Command::Bench(args) => run_bench(args, out),
        Command::Serve(args) => serve(args),
        Command::World { command: WorldCommand::Info { world_dir } } => world_info(&world_dir, out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error:{}: {}", e.code, e.message);
            e.exit
        }
    }
}

pub fn load_tileset(spec: &str) -> Result<Tileset, CliError> {
    if spec == BUILTIN_CARCASSONNE {
        return Ok(crate::assets::carcassonne());
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    doc::parse_tileset(&text).map_err(|e| CliError::new(EXIT_USAGE, "tileset", format!("{spec}: {e}")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    persist::write_atomic(path, bytes).map_err(|e| CliError::new(EXIT_USAGE, "io", e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::new(EXIT_USAGE, "io", format!("standard output: {e}")))
}

fn validate(file: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let ts = load_tileset(file)?;
    let report = ts.check_coverage();
    emit(out, &to_pretty(&CoverageDoc::new(&ts, &report)))?;
    if report.sub_complete {
        Ok(EXIT_OK)
    } else {
        Err(CliError::new(EXIT_INVALID, "not_sub_complete", format!("{file}: tileset is not sub-complete")))
    }
}

fn gen(args: GenArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let ts = load_tileset(&args.tileset)?;
    let plan =
        SubgridPlan::new(args.height, args.width, args.chunk).map_err(|e| CliError::new(EXIT_USAGE, "plan", e))?;
    let weights = match &args.brush {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            doc::parse_brush(&text)
                .map_err(|e| CliError::new(EXIT_USAGE, "brush", format!("{}: {e}", path.display())))?
        }
        None => WeightField::neutral(),
    };
    let rules = Rules::new(&ts);
    let clock = Deadline::unlimited();
    let (tiling, _, stats) =
        nwfc::generate_with(&plan, &rules, &weights, args.seed, args.budget, &clock).map_err(|e| {
            let code = match e {
                GenerateError::SubgridUnsat { .. } => "subgrid_unsat",
                GenerateError::BudgetExceeded { .. } => "budget_exceeded",
                _ => "generation",
            };
            CliError::new(EXIT_GENERATION, code, e)
        })?;
    log::info!(
        "generated {}x{} ({} sub-grids, {} backtracks) in {:?}",
        tiling.height,
        tiling.width,
        stats.subgrids,
        stats.interior_backtracks,
        clock.elapsed()
    );
    let tiling_json = to_compact(&TilingDoc::from(&tiling));
    let stats_json = to_compact(&StatsDoc::from(&stats));
    match &args.out {
        Some(path) => write_file(path, format!("{tiling_json}\n").as_bytes())?,
        None => emit(out, &tiling_json)?,
    }
    match (&args.stats, &args.out) {
        (Some(path), _) => write_file(path, format!("{stats_json}\n").as_bytes())?,
        (None, Some(_)) => emit(out, &stats_json)?,
        (None, None) => {}
    }
    if let Some(path) = &args.ppm {
        if args.scale == 0 {
            return Err(CliError::new(EXIT_USAGE, "usage", "--scale must be positive"));
        }
        let mut image = Vec::new();
        render::write_ppm(&tiling, &ts, args.scale, &mut image).map_err(|e| CliError::io(path, e))?;
        write_file(path, &image)?;
    }
    Ok(EXIT_OK)
}

fn run_bench(args: BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str::<BenchConfig>(&text)
                .map_err(|e| CliError::new(EXIT_USAGE, "config", format!("{}: {e}", path.display())))?
        }
        None => BenchConfig::default(),
    };
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate().map_err(|e| CliError::new(EXIT_USAGE, "config", e))?;
    let file = fs::File::create(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let rows = bench::run_experiment_collect(&cfg).map_err(|e| CliError::new(EXIT_USAGE, "config", e))?;
    bench::write_rows(BufWriter::new(file), &rows).map_err(|e| CliError::io(&args.out, e))?;
    let summary = bench::summarize(&rows).map_err(|e| CliError::new(EXIT_USAGE, "bench", e))?;
    if let Some(path) = &args.summary {
        let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        bench::write_summary(BufWriter::new(file), &summary).map_err(|e| CliError::io(path, e))?;
    }
    for algorithm in [Algorithm::Wfc, Algorithm::Nwfc] {
        if !cfg.algorithms.contains(&algorithm) {
            continue;
        }
        match bench::fit_scaling(&summary, algorithm) {
            Ok(fits) => {
                for fit in fits {
                    emit(out, &to_compact(&fit))?;
                }
            }
            Err(e) => log::warn!("no scaling fit for {algorithm}: {e}"),
        }
    }
    Ok(EXIT_OK)
}

fn serve(args: ServeArgs) -> Result<i32, CliError> {
    let ts = load_tileset(&args.tileset)?;
    if args.chunk < 2 {
        return Err(CliError::new(EXIT_USAGE, "usage", "--chunk must be at least 2"));
    }
    let session = server::Session::new(ts, args.seed, args.chunk, args.world_dir.clone())
        .map_err(|e| CliError::new(EXIT_USAGE, "world", e))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::new(EXIT_USAGE, "io", e))?;
    let addr = SocketAddr::new(args.host, args.port);
    runtime.block_on(server::serve(addr, Arc::new(session))).map_err(|e| CliError::new(EXIT_USAGE, "serve", e))?;
    Ok(EXIT_OK)
}

fn world_info(dir: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let manifest = persist::read_manifest(dir).map_err(|e| CliError::new(EXIT_USAGE, "world", e))?;
    emit(out, &to_pretty(&manifest))?;
    Ok(EXIT_OK)
}
