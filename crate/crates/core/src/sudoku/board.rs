use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::digits::{analyze_sequence, LineStats};
use super::SudokuWindow;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFailure {
    pub i: i64,
    pub j: i64,
    pub values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub passed: bool,
    pub max_slope: i64,
    pub lines_checked: usize,
    /// Smallest failing `(j, i)`.
    pub failure: Option<LineFailure>,
}

/// Intercepts `i` for which `ℓ_{i,j} = {(n, jn + i)}` lies inside the window.
pub fn line_range(w: &SudokuWindow, j: i64) -> Option<(i64, i64)> {
    let big_n = w.columns() as i64;
    let lo = w.m_lo() - j.min(j * big_n);
    let hi = w.m_hi() - j.max(j * big_n);
    (lo <= hi).then_some((lo, hi))
}

fn line_values(w: &SudokuWindow, i: i64, j: i64) -> Vec<u64> {
    (1..=w.columns()).map(|n| w.get(n, j * n as i64 + i)).collect()
}

/// Checks every line of slope `|j| ≤ max_slope` that fits in the window. The default slope
/// bound is the largest for which a line fits.
pub fn is_sudoku_solution(w: &SudokuWindow, max_slope: Option<i64>) -> Result<SolutionReport> {
    let fit = (w.height() as i64 - 1) / (w.columns() as i64 - 1).max(1);
    let j_max = match max_slope {
        Some(j) if j < 0 => return Err(Error::Invalid("slope bound must be non-negative".into())),
        Some(j) if j > fit => {
            return Err(Error::WindowTooSmall(format!(
                "no line of slope {j} fits in a window of height {}",
                w.height()
            )))
        }
        Some(j) => j,
        None => fit,
    };
    let lines: Vec<(i64, i64)> = (-j_max..=j_max)
        .flat_map(|j| {
            let (lo, hi) = line_range(w, j).expect("slope within bound");
            (lo..=hi).map(move |i| (j, i))
        })
        .collect();
    let s0 = w.s0();
    let failure = lines
        .par_iter()
        .filter(|&&(j, i)| analyze_sequence(s0, &line_values(w, i, j)).is_none())
        .min()
        .map(|&(j, i)| LineFailure {
            i,
            j,
            values: line_values(w, i, j),
        });
    Ok(SolutionReport {
        passed: failure.is_none(),
        max_slope: j_max,
        lines_checked: lines.len(),
        failure,
    })
}

/// Permutations `σ_n` of `Z/q` with `F(n, m) = σ_n(m mod q)` wherever `σ_n(m mod q) ≠ 0`.
/// When several zero classes are consistent the smallest is taken.
pub fn has_good_columns(w: &SudokuWindow) -> Result<Option<Vec<Vec<u64>>>> {
    let q = w.q() as usize;
    if w.height() < 2 * q {
        return Err(Error::WindowTooSmall(format!(
            "good columns need height at least 2q = {}",
            2 * q
        )));
    }
    let mut perms = Vec::with_capacity(w.columns());
    for n in 1..=w.columns() {
        // Value of each residue class if it is constant there.
        let mut class: Vec<Option<u64>> = vec![None; q];
        let mut uniform = vec![true; q];
        for m in w.m_lo()..=w.m_hi() {
            let r = m.rem_euclid(q as i64) as usize;
            let v = w.get(n, m);
            match class[r] {
                None => class[r] = Some(v),
                Some(u) if u != v => uniform[r] = false,
                _ => {}
            }
        }
        let found = (0..q).find_map(|r0| {
            let mut seen = vec![false; q];
            let mut sigma = vec![0u64; q];
            for r in (0..q).filter(|&r| r != r0) {
                if !uniform[r] {
                    return None;
                }
                let v = class[r].expect("height ≥ q") as usize;
                if seen[v] {
                    return None;
                }
                seen[v] = true;
                sigma[r] = v as u64;
            }
            Some(sigma)
        });
        match found {
            Some(sigma) => perms.push(sigma),
            None => return Ok(None),
        }
    }
    Ok(Some(perms))
}

/// Fraction of window cells carrying the digit `gamma`.
pub fn digit_density(w: &SudokuWindow, gamma: u64) -> Ratio<u64> {
    let total = (w.columns() * w.height()) as u64;
    let count = (w.m_lo()..=w.m_hi())
        .map(|m| w.row(m).iter().filter(|&&v| v == gamma).count() as u64)
        .sum::<u64>();
    Ratio::new(count, total)
}

/// Statistics of every fitting line of slope `j`, keyed by intercept.
pub fn line_orders(w: &SudokuWindow, j: i64) -> Vec<(i64, Option<LineStats>)> {
    let Some((lo, hi)) = line_range(w, j) else {
        return Vec::new();
    };
    let s0 = w.s0();
    (lo..=hi)
        .into_par_iter()
        .map(|i| (i, analyze_sequence(s0, &line_values(w, i, j))))
        .collect()
}

/// For each order `o ≥ 0`, the fraction of slope-`j` lines of order `o`.
pub fn high_order_fractions(w: &SudokuWindow, j: i64) -> Vec<(u32, Ratio<u64>)> {
    let lines = line_orders(w, j);
    let total = lines.len().max(1) as u64;
    (0..w.s0())
        .map(|o| {
            let c = lines
                .iter()
                .filter(|(_, st)| st.is_some_and(|s| s.order == Some(o)))
                .count() as u64;
            (o, Ratio::new(c, total))
        })
        .collect()
}
