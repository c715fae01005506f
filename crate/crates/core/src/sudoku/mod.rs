//! The 2-adic Sudoku board: windows of `{1..N} × Z`, line verification, good columns,
//! pseudo-affine structure, normal form and the Tetris descent.

mod board;
mod descent;
mod digits;
mod pseudo;
mod render;

pub use board::{
    digit_density, has_good_columns, high_order_fractions, is_sudoku_solution, line_orders,
    line_range, LineFailure, SolutionReport,
};
pub use descent::{descent_check, normal_form_d, DescentReport, DescentStep, Reason, Verdict};
pub use digits::{analyze_sequence, check_rigid_out, f_q, odd_inverse, Coset, LineStats, Witness};
pub use pseudo::{
    find_pseudo_affine, first_disagreement, fit_pseudo_affine, to_normal_form, zero_set_coeffs,
    NormalForm, PseudoAffine, Shear,
};
pub use render::{render_ascii, render_pgm, render_sequence, shade_levels};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MAX_S0: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardParams {
    pub s0: u32,
    /// Number of columns; `q²` unless chosen larger.
    pub n: usize,
}

impl BoardParams {
    pub fn new(s0: u32) -> Result<Self> {
        if s0 == 0 || s0 > MAX_S0 {
            return invalid(format!("s0 must be in 1..={MAX_S0}"));
        }
        let q = 1usize << s0;
        Ok(BoardParams { s0, n: q * q })
    }

    pub fn with_columns(s0: u32, n: usize) -> Result<Self> {
        let mut p = Self::new(s0)?;
        if n == 0 {
            return invalid("a board needs at least one column");
        }
        p.n = n;
        Ok(p)
    }

    pub fn q(&self) -> u64 {
        1 << self.s0
    }
}

/// `F(n, m)` for `n ∈ {1..N}` and `m ∈ [m_lo, m_hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WindowData", into = "WindowData")]
pub struct SudokuWindow {
    params: BoardParams,
    m_lo: i64,
    m_hi: i64,
    cells: Vec<u64>,
}

/// Interchange form: `rows[k]` holds `F(1..=N, m_lo + k)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowData {
    pub s0: u32,
    pub m_lo: i64,
    pub m_hi: i64,
    pub rows: Vec<Vec<u64>>,
}

impl TryFrom<WindowData> for SudokuWindow {
    type Error = Error;

    fn try_from(d: WindowData) -> Result<Self> {
        if d.m_hi < d.m_lo {
            return invalid("m_hi < m_lo");
        }
        if d.rows.len() as i64 != d.m_hi - d.m_lo + 1 {
            return invalid(format!(
                "expected {} rows for m in [{}, {}], found {}",
                d.m_hi - d.m_lo + 1,
                d.m_lo,
                d.m_hi,
                d.rows.len()
            ));
        }
        let n = d.rows[0].len();
        if let Some(k) = d.rows.iter().position(|r| r.len() != n) {
            return invalid(format!("row m = {} has the wrong length", d.m_lo + k as i64));
        }
        let params = BoardParams::with_columns(d.s0, n)?;
        let cells: Vec<u64> = d.rows.into_iter().flatten().collect();
        let w = SudokuWindow {
            params,
            m_lo: d.m_lo,
            m_hi: d.m_hi,
            cells,
        };
        w.check_digits()?;
        Ok(w)
    }
}

impl From<SudokuWindow> for WindowData {
    fn from(w: SudokuWindow) -> Self {
        let n = w.params.n;
        WindowData {
            s0: w.params.s0,
            m_lo: w.m_lo,
            m_hi: w.m_hi,
            rows: w.cells.chunks(n).map(|r| r.to_vec()).collect(),
        }
    }
}

impl SudokuWindow {
    pub fn from_fn(
        params: BoardParams,
        m_lo: i64,
        m_hi: i64,
        f: impl Fn(usize, i64) -> u64,
    ) -> Result<Self> {
        if m_hi < m_lo {
            return Err(Error::WindowTooSmall(format!("empty m-range [{m_lo}, {m_hi}]")));
        }
        let q = params.q();
        let mut cells = Vec::with_capacity(params.n * (m_hi - m_lo + 1) as usize);
        for m in m_lo..=m_hi {
            for n in 1..=params.n {
                cells.push(f(n, m) % q);
            }
        }
        let w = SudokuWindow {
            params,
            m_lo,
            m_hi,
            cells,
        };
        w.check_digits()?;
        Ok(w)
    }

    /// `F(n, m) = f_q(m)`.
    pub fn standard(s0: u32, m_lo: i64, m_hi: i64) -> Result<Self> {
        Self::from_fn(BoardParams::new(s0)?, m_lo, m_hi, |_, m| f_q(s0, m as i128))
    }

    pub fn constant(s0: u32, c: u64, m_lo: i64, m_hi: i64) -> Result<Self> {
        Self::from_fn(BoardParams::new(s0)?, m_lo, m_hi, |_, _| c)
    }

    fn check_digits(&self) -> Result<()> {
        let q = self.params.q();
        if let Some(k) = self.cells.iter().position(|&v| v == 0 || v >= q) {
            let (n, m) = self.coords(k);
            return invalid(format!(
                "F({n}, {m}) = {} is not a non-zero digit mod {q}",
                self.cells[k]
            ));
        }
        Ok(())
    }

    fn coords(&self, k: usize) -> (usize, i64) {
        (k % self.params.n + 1, self.m_lo + (k / self.params.n) as i64)
    }

    pub fn params(&self) -> BoardParams {
        self.params
    }

    pub fn s0(&self) -> u32 {
        self.params.s0
    }

    pub fn q(&self) -> u64 {
        self.params.q()
    }

    pub fn columns(&self) -> usize {
        self.params.n
    }

    pub fn m_lo(&self) -> i64 {
        self.m_lo
    }

    pub fn m_hi(&self) -> i64 {
        self.m_hi
    }

    pub fn height(&self) -> usize {
        (self.m_hi - self.m_lo + 1) as usize
    }

    pub fn contains(&self, n: usize, m: i64) -> bool {
        (1..=self.params.n).contains(&n) && (self.m_lo..=self.m_hi).contains(&m)
    }

    /// `F(n, m)`; panics outside the window.
    pub fn get(&self, n: usize, m: i64) -> u64 {
        assert!(self.contains(n, m), "({n}, {m}) lies outside the window");
        self.cells[(m - self.m_lo) as usize * self.params.n + n - 1]
    }

    pub fn row(&self, m: i64) -> &[u64] {
        let k = (m - self.m_lo) as usize * self.params.n;
        &self.cells[k..k + self.params.n]
    }

    /// Overwrites one cell; the new value must be a non-zero digit.
    pub fn set(&mut self, n: usize, m: i64, v: u64) -> Result<()> {
        if !self.contains(n, m) {
            return invalid(format!("({n}, {m}) lies outside the window"));
        }
        if v == 0 || v >= self.q() {
            return invalid(format!("{v} is not a non-zero digit"));
        }
        let k = (m - self.m_lo) as usize * self.params.n + n - 1;
        self.cells[k] = v;
        Ok(())
    }

    /// `F'(n, m) = b · F(n, m + a n + c)` with `b` odd, on the largest window where it is defined.
    pub fn shear(&self, a: i64, b: u64, c: i64) -> Result<SudokuWindow> {
        if b.is_multiple_of(2) {
            return Err(Error::Precondition(format!("shear multiplier {b} is even")));
        }
        let big_n = self.params.n as i64;
        let lo = self.m_lo - c - a.min(a * big_n);
        let hi = self.m_hi - c - a.max(a * big_n);
        if hi < lo {
            return Err(Error::WindowTooSmall(format!(
                "shear ({a}, {b}, {c}) leaves no complete row"
            )));
        }
        let q = self.q();
        SudokuWindow::from_fn(self.params, lo, hi, |n, m| {
            b % q * self.get(n, m + a * n as i64 + c) % q
        })
    }

    /// `F_*(n, m) = F(n, q m)`.
    pub fn tetris(&self) -> Result<SudokuWindow> {
        let q = self.q() as i64;
        if (self.height() as i64) < q {
            return Err(Error::WindowTooSmall(format!(
                "height {} is below q = {q}",
                self.height()
            )));
        }
        let lo = self.m_lo.div_euclid(q) + i64::from(self.m_lo.rem_euclid(q) != 0);
        let hi = self.m_hi.div_euclid(q);
        SudokuWindow::from_fn(self.params, lo, hi, |n, m| self.get(n, q * m))
    }

    /// `(n, m) ↦ F(N + 1 - n, m)`.
    pub fn reflect(&self) -> SudokuWindow {
        let big_n = self.params.n;
        SudokuWindow::from_fn(self.params, self.m_lo, self.m_hi, |n, m| {
            self.get(big_n + 1 - n, m)
        })
        .expect("reflection keeps digits")
    }

    /// `F ↦ c F` for odd `c`.
    pub fn scale(&self, c: u64) -> Result<SudokuWindow> {
        self.shear(0, c, 0)
    }

    /// Restriction to `[lo, hi]`.
    pub fn crop(&self, lo: i64, hi: i64) -> Result<SudokuWindow> {
        if lo < self.m_lo || hi > self.m_hi || hi < lo {
            return Err(Error::WindowTooSmall(format!(
                "[{lo}, {hi}] is not inside [{}, {}]",
                self.m_lo, self.m_hi
            )));
        }
        SudokuWindow::from_fn(self.params, lo, hi, |n, m| self.get(n, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let w = SudokuWindow::standard(2, -3, 5).unwrap();
        let d: WindowData = w.clone().into();
        let back = SudokuWindow::try_from(d).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn tetris_range() {
        let w = SudokuWindow::standard(2, -5, 9).unwrap();
        let t = w.tetris().unwrap();
        assert_eq!((t.m_lo(), t.m_hi()), (-1, 2));
        assert_eq!(t.get(3, 2), f_q(2, 8));
    }

    #[test]
    fn shear_inverse() {
        let w = SudokuWindow::standard(2, -100, 100).unwrap();
        let s = w.shear(1, 3, 2).unwrap();
        // inverse of F' = 3F(n, m+n+2) is F = 3F'(n, m-n-2)
        let back = s.shear(-1, 3, -2).unwrap();
        for m in back.m_lo()..=back.m_hi() {
            assert_eq!(back.row(m), w.row(m));
        }
    }
}
