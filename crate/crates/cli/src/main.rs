use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod beta;
mod io;
mod sudoku;
mod tiling;

/// Exact periodic tilings, functional equations and the 2-adic Sudoku.
///
/// Exit status: 0 verified or solved, 1 refuted or failed, 2 usage or structural error.
/// FORGE_THREADS bounds the worker pool.
#[derive(Debug, Parser)]
#[command(name = "forge", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub caps: Caps,
    /// Output format. `ascii` and `pgm` apply to `sudoku render`, `sudoku stats` and `corpus run`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Caps {
    /// Largest quotient G/Λ the tiling solver will build.
    #[arg(long, global = true, default_value_t = forge_core::tiling::DEFAULT_CELL_CAP,
          value_parser = positive_usize)]
    pub cap_quotient: usize,
    /// Node budget of the existential search.
    #[arg(long, global = true, default_value_t = forge_core::functional::DEFAULT_NODE_CAP,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_search: u64,
    /// Overrides the excluded-pair cap of every Ω constraint in a property.
    #[arg(long, global = true, value_parser = positive_usize)]
    pub cap_omega: Option<usize>,
    /// Largest tile emitted when compiling to a tiling system.
    #[arg(long, global = true, default_value_t = forge_core::functional::DEFAULT_TILE_CAP,
          value_parser = positive_usize)]
    pub cap_tiles: usize,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Ascii,
    Pgm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks that the translates of TILE by SET partition the group.
    VerifyTiling { set: PathBuf, tile: PathBuf },
    /// Lists the periodic solutions of a tiling system, one JSON line each.
    Solve(tiling::SolveArgs),
    /// Builds (or checks) a rigid partition of Z/N into M parts.
    RigidPartition(tiling::RigidArgs),
    /// Stacks a tiling system into a single tile over G × Z/N.
    Stack { system: PathBuf, partition: PathBuf },
    /// Compiles a property into a functional system, or with --tiling into a tiling system.
    Compile {
        property: PathBuf,
        #[arg(long)]
        tiling: bool,
    },
    /// Checks a function against a functional system, a compiled property or a property.
    CheckFn { function: PathBuf, system: PathBuf },
    #[command(subcommand)]
    Sudoku(sudoku::SudokuCommand),
    /// Encodes a Sudoku window as a β-tuple.
    Encode {
        window: PathBuf,
        #[arg(long)]
        max_slope: Option<i64>,
    },
    /// Decodes a β-tuple back into a window and its column permutations.
    Decode { beta: PathBuf },
    /// Checks the four axioms of a β-tuple.
    Axioms { beta: PathBuf },
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Runs the acceptance checks and reports on each.
    Run {
        /// Comma-separated check ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

/// What a command printed and whether it verified.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    pub fn new(text: String, ok: bool) -> Self {
        Outcome { text, ok }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::VerifyTiling { set, tile } => tiling::verify(set, tile),
        Command::Solve(a) => tiling::solve(cfg, a),
        Command::RigidPartition(a) => tiling::rigid_partition(cfg, a),
        Command::Stack { system, partition } => tiling::stack(system, partition),
        Command::Compile { property, tiling: t } => tiling::compile(cfg, property, *t),
        Command::CheckFn { function, system } => tiling::check_fn(cfg, function, system),
        Command::Sudoku(c) => sudoku::run(cfg, c),
        Command::Encode { window, max_slope } => beta::encode(window, *max_slope),
        Command::Decode { beta: b } => beta::decode(b),
        Command::Axioms { beta: b } => beta::axioms(b),
        Command::Corpus(CorpusCommand::Run { only }) => corpus(cfg, only),
    }
}

fn corpus(cfg: &RunConfig, only: &[u32]) -> Result<Outcome> {
    if let Some(id) = only.iter().find(|id| !forge_corpus::CHECKS.iter().any(|c| c.id == **id)) {
        bail!("no check with id {id}");
    }
    let outcomes = forge_corpus::run_checks(only);
    let ok = outcomes.iter().all(|o| o.passed);
    let text = match cfg.format {
        None | Some(Format::Json) => {
            let known_red: Vec<_> = forge_corpus::KNOWN_RED
                .iter()
                .map(|(id, marker)| serde_json::json!({"id": id, "marker": marker}))
                .collect();
            io::pretty(&serde_json::json!({
                "passed": ok,
                "known_red": known_red,
                "outcomes": outcomes,
            }))
        }
        Some(Format::Ascii) => outcomes.iter().map(|o| o.line() + "\n").collect(),
        Some(Format::Pgm) => bail!("corpus reports have no image form"),
    };
    Ok(Outcome::new(text, ok))
}

pub fn json_only(cfg: &RunConfig) -> Result<()> {
    match cfg.format {
        None | Some(Format::Json) => Ok(()),
        Some(f) => bail!("this command only emits json, not {f:?}"),
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("FORGE_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let result = init_threads().and_then(|()| run(&cfg)).and_then(|o| {
        match &cfg.out {
            Some(p) => fs::write(p, &o.text).with_context(|| format!("{}: cannot write", p.display()))?,
            None => print!("{}", o.text),
        }
        Ok(o.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
