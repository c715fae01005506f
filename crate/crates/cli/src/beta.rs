use std::path::Path;

use anyhow::{Context, Result};
use forge_core::encoding::*;
use forge_core::sudoku::{has_good_columns, SudokuWindow};
use serde_json::json;

use crate::io;
use crate::Outcome;

pub fn encode(window: &Path, max_slope: Option<i64>) -> Result<Outcome> {
    let w: SudokuWindow = io::read(window, &io::WINDOW)?;
    let sigma = has_good_columns(&w)?.context("window has no good columns to encode")?;
    let t = encode_solution(&w, &sigma, max_slope)?;
    Ok(Outcome::new(io::pretty(&t), true))
}

/// A tuple that fails the axioms decodes to nothing; the report says why.
pub fn decode(beta: &Path) -> Result<Outcome> {
    let t: BetaTuple = io::read(beta, &io::BETA)?;
    let report = check_axioms(&t);
    if !report.all_passed() {
        return Ok(Outcome::new(io::pretty(&report), false));
    }
    let (w, sigma) = decode_beta(&t)?;
    Ok(Outcome::new(io::pretty(&json!({"window": w, "sigma": sigma})), true))
}

pub fn axioms(beta: &Path) -> Result<Outcome> {
    let t: BetaTuple = io::read(beta, &io::BETA)?;
    let report = check_axioms(&t);
    let ok = report.all_passed();
    Ok(Outcome::new(io::pretty(&report), ok))
}
