use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use forge_core::sudoku::*;
use serde_json::json;

use crate::io;
use crate::{json_only, Format, Outcome, RunConfig};

#[derive(Debug, Subcommand)]
pub enum SudokuCommand {
    /// Checks the Sudoku axiom on every fitting line and looks for good columns.
    Verify {
        window: PathBuf,
        #[arg(long)]
        max_slope: Option<i64>,
    },
    /// Statistics of a sequence, given directly or as a line of a window.
    Stats(StatsArgs),
    /// One Tetris move: keep the rows with m divisible by q, rescaled.
    Tetris { window: PathBuf },
    /// Fits a pseudo-affine function and shears the window into normal form.
    Normalize { window: PathBuf },
    /// Tests a claimed vertical period by repeated Tetris moves. Exits 1 when refuted.
    Descend {
        window: PathBuf,
        #[arg(long)]
        period: u64,
    },
    /// Draws a window, shading the bad cosets.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Window holding the line.
    #[arg(required_unless_present = "values", conflicts_with = "values")]
    pub window: Option<PathBuf>,
    /// Intercept and slope of the line n ↦ (n, j n + i).
    #[arg(long, num_args = 2, value_names = ["I", "J"], allow_negative_numbers = true,
          requires = "window")]
    pub line: Option<Vec<i64>>,
    /// Comma-separated values g(1), g(2), ...
    #[arg(long, value_delimiter = ',', requires = "s0")]
    pub values: Option<Vec<u64>>,
    #[arg(long)]
    pub s0: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Window to draw; without it the standard solution f_q(m) is drawn.
    #[arg(long, conflicts_with_all = ["s0", "rows", "from"])]
    pub window: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub s0: u32,
    #[arg(long, default_value_t = 16)]
    pub rows: i64,
    /// First row m.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub from: i64,
    /// Pixels per cell in PGM output.
    #[arg(long, default_value_t = 8)]
    pub px: usize,
}

fn window(p: &Path) -> Result<SudokuWindow> {
    io::read(p, &io::WINDOW)
}

pub fn run(cfg: &RunConfig, c: &SudokuCommand) -> Result<Outcome> {
    if !matches!(c, SudokuCommand::Render(_) | SudokuCommand::Stats(_)) {
        json_only(cfg)?;
    }
    match c {
        SudokuCommand::Verify { window: p, max_slope } => {
            let w = window(p)?;
            let report = is_sudoku_solution(&w, *max_slope)?;
            let good = has_good_columns(&w)?;
            let ok = report.passed;
            let out = json!({"solution": report, "good_columns": good});
            Ok(Outcome::new(io::pretty(&out), ok))
        }
        SudokuCommand::Stats(a) => stats(cfg, a),
        SudokuCommand::Tetris { window: p } => Ok(Outcome::new(io::pretty(&window(p)?.tetris()?), true)),
        SudokuCommand::Normalize { window: p } => {
            let w = window(p)?;
            let psi = find_pseudo_affine(&w)?;
            let nf = to_normal_form(&w, &psi)?;
            Ok(Outcome::new(io::pretty(&json!({"psi": psi, "normal_form": nf})), true))
        }
        SudokuCommand::Descend { window: p, period } => {
            let r = descent_check(&window(p)?, *period)?;
            let ok = r.verdict != Verdict::Refuted;
            Ok(Outcome::new(io::pretty(&r), ok))
        }
        SudokuCommand::Render(a) => render(cfg, a),
    }
}

fn stats(cfg: &RunConfig, a: &StatsArgs) -> Result<Outcome> {
    let (s0, g) = match (&a.window, &a.values) {
        (Some(p), _) => {
            let w = window(p)?;
            let [i, j] = a.line.as_deref().context("give --line I J with a window")? else {
                unreachable!("clap takes two values")
            };
            let g: Vec<u64> = (1..=w.columns())
                .map(|n| {
                    let m = j * n as i64 + i;
                    w.contains(n, m).then(|| w.get(n, m))
                })
                .collect::<Option<_>>()
                .with_context(|| format!("line ({i}, {j}) leaves the window"))?;
            (w.s0(), g)
        }
        (None, Some(v)) => (a.s0.expect("clap requires s0"), v.clone()),
        (None, None) => unreachable!("clap requires one source"),
    };
    let q = 1u64 << s0;
    if let Some(v) = g.iter().find(|&&v| v >= q) {
        bail!("value {v} is not a digit mod {q}");
    }
    let s = analyze_sequence(s0, &g);
    let text = match cfg.format {
        None | Some(Format::Json) => io::pretty(&json!({"s0": s0, "sequence": g, "stats": s})),
        Some(Format::Ascii) => render_sequence(s0, &g),
        Some(Format::Pgm) => bail!("sequence statistics have no image form"),
    };
    Ok(Outcome::new(text, s.is_some()))
}

fn render(cfg: &RunConfig, a: &RenderArgs) -> Result<Outcome> {
    let w = match &a.window {
        Some(p) => window(p)?,
        None => {
            if a.rows <= 0 {
                bail!("--rows must be positive");
            }
            SudokuWindow::standard(a.s0, a.from, a.from + a.rows - 1)?
        }
    };
    let levels = shade_levels(&w);
    let text = match cfg.format {
        None | Some(Format::Ascii) => render_ascii(&w, &levels),
        Some(Format::Pgm) => render_pgm(&w, &levels, a.px),
        Some(Format::Json) => io::pretty(&json!({"window": w, "levels": levels})),
    };
    Ok(Outcome::new(text, true))
}
