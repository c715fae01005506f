use std::fmt::Write;

use super::descent::normal_form_d;
use super::digits::analyze_sequence;
use super::pseudo::find_pseudo_affine;
use super::SudokuWindow;

const BRACKETS: [(char, char); 5] = [(' ', ' '), ('[', ']'), ('{', '}'), ('<', '>'), ('(', ')')];
const GRAYS: [u8; 5] = [255, 180, 120, 70, 30];

/// Shading level of each cell, row-major from `m_lo` upwards. A normal-form window is shaded by
/// the `q`-adic valuation of `m` (capped at 3, with `m = 0` as level 4); any other window marks
/// the zero set of its fitted pseudo-affine function.
pub fn shade_levels(w: &SudokuWindow) -> Vec<u8> {
    let q = w.q() as i64;
    let rows = w.m_lo()..=w.m_hi();
    if normal_form_d(w).is_some() {
        return rows
            .flat_map(|m| {
                let level = if m == 0 {
                    4
                } else {
                    let mut v = 0u8;
                    let mut x = m;
                    while x % q == 0 && v < 3 {
                        x /= q;
                        v += 1;
                    }
                    v
                };
                std::iter::repeat_n(level, w.columns())
            })
            .collect();
    }
    match find_pseudo_affine(w) {
        Ok(p) => rows
            .flat_map(|m| (1..=w.columns()).map(move |n| u8::from(p.eval(n as i64, m) == 0)))
            .collect(),
        Err(_) => vec![0; w.columns() * w.height()],
    }
}

/// Digits in a grid, one text row per `m`; shaded cells are bracketed.
pub fn render_ascii(w: &SudokuWindow, levels: &[u8]) -> String {
    let mut out = String::new();
    let width = w.m_lo().to_string().len().max(w.m_hi().to_string().len());
    let _ = write!(out, "{:>width$} |", "m\\n");
    for n in 1..=w.columns() {
        let _ = write!(out, "{n:>3}");
    }
    out.push('\n');
    for (k, m) in (w.m_lo()..=w.m_hi()).enumerate() {
        let _ = write!(out, "{m:>width$} |");
        for n in 1..=w.columns() {
            let (l, r) = BRACKETS[levels[k * w.columns() + n - 1].min(4) as usize];
            let _ = write!(out, "{l}{}{r}", w.get(n, m));
        }
        out.push('\n');
    }
    out
}

/// Plain PGM (P2), `px` pixels per cell, darker for deeper shading.
pub fn render_pgm(w: &SudokuWindow, levels: &[u8], px: usize) -> String {
    let px = px.max(1);
    let (cols, rows) = (w.columns() * px, w.height() * px);
    let mut out = format!("P2\n{cols} {rows}\n255\n");
    for y in 0..rows {
        let k = y / px;
        let line: Vec<String> = (0..cols)
            .map(|x| GRAYS[levels[k * w.columns() + x / px].min(4) as usize].to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// One row of boxes for `g(1..=N)` with the bad coset bracketed, followed by its statistics.
pub fn render_sequence(s0: u32, g: &[u64]) -> String {
    let stats = analyze_sequence(s0, g);
    let mut out = String::new();
    for (k, &v) in g.iter().enumerate() {
        let bad = stats
            .and_then(|s| s.bad_coset)
            .is_some_and(|c| c.contains(k as i64 + 1));
        let (l, r) = BRACKETS[usize::from(bad)];
        let _ = write!(out, "{l}{v}{r}");
    }
    out.push('\n');
    match stats {
        Some(s) => {
            let order = s.order.map_or("-inf".to_string(), |o| o.to_string());
            let coset = s
                .bad_coset
                .map_or("empty".to_string(), |c| format!("{} mod {}", c.residue, c.modulus));
            let _ = writeln!(
                out,
                "step {} | order {order} | bad coset {coset} | affine {}n + {}",
                s.step, s.step, s.intercept
            );
        }
        None => out.push_str("not in S[N]\n"),
    }
    out
}
