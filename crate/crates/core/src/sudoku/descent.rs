use serde::{Deserialize, Serialize};

use super::pseudo::{find_pseudo_affine, to_normal_form, PseudoAffine, Shear};
use super::SudokuWindow;
use crate::error::{Error, Result};

/// Smallest output height for which the post-Tetris window is refitted and renormalized.
const RENORMALIZE_MIN_HEIGHT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Refuted,
    WindowExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    /// A normal-form solution can only have periods divisible by `q`.
    NotDivisible { period: u64 },
    /// `F(n, m) ≠ F(n, m + period)` inside the window.
    ValueContradiction { n: usize, m: i64, period: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentStep {
    pub period_before: u64,
    pub period_after: u64,
    pub height_after: usize,
    pub renormalized: bool,
    pub psi: Option<PseudoAffine>,
    pub shear: Option<Shear>,
    pub d: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentReport {
    pub verdict: Verdict,
    pub reason: Option<Reason>,
    /// Index of the step at which the verdict was reached (0 = before any Tetris move).
    pub at_step: usize,
    pub final_period: u64,
    pub steps: Vec<DescentStep>,
}

/// The `D` for which the window is in normal form, if any.
pub fn normal_form_d(w: &SudokuWindow) -> Option<u64> {
    if w.s0() < 2 {
        return None;
    }
    let q = w.q() as i64;
    (0..4).find(|&d| {
        let target = PseudoAffine::new(w.s0(), 0, 1, 0, d).expect("q ≥ 4");
        (w.m_lo()..=w.m_hi())
            .filter(|m| m.rem_euclid(q) != 0)
            .all(|m| (1..=w.columns()).all(|n| w.get(n, m) == target.eval(n as i64, m)))
    })
}

fn period_violation(w: &SudokuWindow, period: u64) -> Option<(usize, i64)> {
    let p = period as i64;
    (w.m_lo()..=w.m_hi() - p).find_map(|m| {
        (1..=w.columns()).find_map(|n| (w.get(n, m) != w.get(n, m + p)).then_some((n, m)))
    })
}

/// Tests a claimed vertical period `M` against a normal-form window by repeated Tetris moves.
/// A finite period never survives: the result is a refutation or an exhausted window.
pub fn descent_check(w: &SudokuWindow, claimed_period: u64) -> Result<DescentReport> {
    if claimed_period == 0 {
        return Err(Error::Invalid("period must be positive".into()));
    }
    if normal_form_d(w).is_none() {
        return Err(Error::Precondition("window is not in normal form".into()));
    }
    let q = w.q();
    let mut cur = w.clone();
    let mut period = claimed_period;
    let mut steps = Vec::new();
    let finish = |verdict, reason, steps: Vec<DescentStep>, period| DescentReport {
        verdict,
        reason,
        at_step: steps.len(),
        final_period: period,
        steps,
    };
    loop {
        if period == 1 || cur.height() < q as usize {
            if cur.height() as u64 > period {
                if let Some((n, m)) = period_violation(&cur, period) {
                    let reason = Reason::ValueContradiction { n, m, period };
                    return Ok(finish(Verdict::Refuted, Some(reason), steps, period));
                }
            }
            if !period.is_multiple_of(q) {
                let reason = Reason::NotDivisible { period };
                return Ok(finish(Verdict::Refuted, Some(reason), steps, period));
            }
            return Ok(finish(Verdict::WindowExhausted, None, steps, period));
        }
        if !period.is_multiple_of(q) {
            let reason = Reason::NotDivisible { period };
            return Ok(finish(Verdict::Refuted, Some(reason), steps, period));
        }
        let next = cur.tetris()?;
        let mut step = DescentStep {
            period_before: period,
            period_after: period / q,
            height_after: next.height(),
            renormalized: false,
            psi: None,
            shear: None,
            d: None,
        };
        cur = if next.height() >= RENORMALIZE_MIN_HEIGHT && next.columns() >= 8 {
            let psi = find_pseudo_affine(&next)?;
            if psi.b % 2 == 0 {
                return Err(Error::Precondition(format!(
                    "post-Tetris vertical coefficient B = {} is even",
                    psi.b
                )));
            }
            let nf = to_normal_form(&next, &psi)?;
            step.renormalized = true;
            step.psi = Some(psi);
            step.shear = Some(nf.shear);
            step.d = Some(nf.d);
            nf.window
        } else {
            next
        };
        period /= q;
        steps.push(step);
    }
}
