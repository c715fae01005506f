use serde::{Deserialize, Serialize};

use super::digits::odd_inverse;
use super::SudokuWindow;
use crate::error::{Error, Result};

/// `Ψ(n, m) = A n + B m + C + D (q/4) m (m - n)` mod `q`. `D` only matters mod 4 and is kept
/// reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PseudoAffine {
    pub s0: u32,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl PseudoAffine {
    pub fn new(s0: u32, a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if s0 < 2 {
            return Err(Error::Invalid("pseudo-affine functions need q ≥ 4".into()));
        }
        let q = 1u64 << s0;
        Ok(PseudoAffine {
            s0,
            a: a % q,
            b: b % q,
            c: c % q,
            d: d % 4,
        })
    }

    pub fn q(&self) -> u64 {
        1 << self.s0
    }

    pub fn eval(&self, n: i64, m: i64) -> u64 {
        let q = self.q() as i128;
        let (n, m) = (n as i128, m as i128);
        let quad = (self.d as i128 * (q / 4)).rem_euclid(q) * (m * (m - n)).rem_euclid(q);
        (self.a as i128 * n + self.b as i128 * m + self.c as i128 + quad).rem_euclid(q) as u64
    }

    /// Cells per `q × q` period block where `Ψ` vanishes.
    pub fn zero_count(&self) -> usize {
        let q = self.q() as i64;
        (0..q)
            .flat_map(|n| (0..q).map(move |m| (n, m)))
            .filter(|&(n, m)| self.eval(n, m) == 0)
            .count()
    }

    pub fn same_function(&self, other: &PseudoAffine) -> bool {
        self.s0 == other.s0 && (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)
    }
}

/// Fits `Ψ` to `values[dm][dn] = F(n0 + dn, m0 + dm)` on an 8×8 square whose horizontal lines,
/// diagonals and anti-diagonals are affine.
pub fn fit_pseudo_affine(
    s0: u32,
    values: &[[u64; 8]; 8],
    origin: (i64, i64),
) -> Result<PseudoAffine> {
    let q = 1u64 << s0;
    if s0 < 2 {
        return Err(Error::Invalid("pseudo-affine functions need q ≥ 4".into()));
    }
    let f = |n: i64, m: i64| values[m as usize][n as usize] % q;
    for j in -1i64..=1 {
        for i in -7i64..=14 {
            let seg: Vec<u64> = (0..8)
                .filter(|&n| (0..8).contains(&(j * n + i)))
                .map(|n| f(n, j * n + i))
                .collect();
            if seg.len() < 3 {
                continue;
            }
            let step = (seg[1] + q - seg[0]) % q;
            if seg.windows(2).any(|p| (p[1] + q - p[0]) % q != step) {
                let (n0, m0) = origin;
                return Err(Error::Precondition(format!(
                    "values on the line m = {j}n + {} are not affine",
                    i + m0 - j * n0
                )));
            }
        }
    }
    let sub = |x: u64, y: u64| (x + q - y % q) % q;
    let c = f(0, 0);
    let a = sub(f(1, 0), c);
    let b = sub(sub(f(1, 1), a), c);
    let local = PseudoAffine::new(s0, a, b, c, 0)?;
    let r01 = sub(f(0, 1), local.eval(0, 1));
    if r01 % (q / 4) != 0 {
        return Err(Error::Precondition(
            "square is not pseudo-affine (row 1 residual is not a multiple of q/4)".into(),
        ));
    }
    let local = PseudoAffine::new(s0, a, b, c, r01 / (q / 4))?;
    let global = translate(&local, origin);
    for dm in 0..8 {
        for dn in 0..8 {
            if global.eval(origin.0 + dn, origin.1 + dm) != f(dn, dm) {
                return Err(Error::Precondition(format!(
                    "square is not pseudo-affine at ({}, {})",
                    origin.0 + dn,
                    origin.1 + dm
                )));
            }
        }
    }
    Ok(global)
}

/// Coefficients of `(n, m) ↦ Ψ(n - n0, m - m0)`.
fn translate(p: &PseudoAffine, (n0, m0): (i64, i64)) -> PseudoAffine {
    let q = p.q() as i128;
    let r = |x: i128| x.rem_euclid(q) as u64;
    let dq = p.d as i128 * (q / 4);
    let (a, b, c) = (p.a as i128, p.b as i128, p.c as i128);
    let (n0, m0) = (n0 as i128, m0 as i128);
    PseudoAffine {
        s0: p.s0,
        a: r(a + dq * m0),
        b: r(b - dq * (2 * m0 - n0)),
        c: r(c - a * n0 - b * m0 + dq * m0 * (m0 - n0)),
        d: p.d,
    }
}

/// `(A', C')` with `Ψ(n, m) = 0 ⟺ m ≡ A' n + C' (mod q)`, for odd `B`.
pub fn zero_set_coeffs(p: &PseudoAffine) -> Result<(u64, u64)> {
    if p.b.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "vertical coefficient B = {} is even",
            p.b
        )));
    }
    let q = p.q() as i128;
    let inv = odd_inverse(p.b, p.q()) as i128;
    let a = (p.a as i128 * inv).rem_euclid(q);
    let c = (p.c as i128 * inv).rem_euclid(q);
    let d = (p.d as i128 * inv).rem_euclid(q);
    let quarter = q / 4;
    let binom = (a + 1) * a / 2;
    let a1 = -a - (2 * a + 1) * d * c * quarter - d * (q / 2) * binom;
    let c1 = -c - d * c * c * quarter;
    Ok((a1.rem_euclid(q) as u64, c1.rem_euclid(q) as u64))
}

/// First cell where `Ψ ≠ 0` but `F ≠ Ψ`.
pub fn first_disagreement(w: &SudokuWindow, p: &PseudoAffine) -> Option<(usize, i64)> {
    (w.m_lo()..=w.m_hi()).find_map(|m| {
        (1..=w.columns()).find_map(|n| {
            let v = p.eval(n as i64, m);
            (v != 0 && v != w.get(n, m)).then_some((n, m))
        })
    })
}

const CLEAN_SCAN_ROWS: i64 = 64;

/// A pseudo-affine `Ψ`, non-vanishing somewhere, agreeing with the window wherever `Ψ ≠ 0`.
/// Clean 8×8 squares are tried first; otherwise all coefficient choices are tested and the one
/// with the fewest zeros wins.
pub fn find_pseudo_affine(w: &SudokuWindow) -> Result<PseudoAffine> {
    let s0 = w.s0();
    if s0 < 2 {
        return Err(Error::Invalid("pseudo-affine functions need q ≥ 4".into()));
    }
    if w.columns() < 8 || w.height() < 8 {
        return Err(Error::WindowTooSmall(
            "pseudo-affine fitting needs an 8×8 square".into(),
        ));
    }
    let last_m0 = (w.m_hi() - 7).min(w.m_lo() + CLEAN_SCAN_ROWS);
    for m0 in w.m_lo()..=last_m0 {
        for n0 in 1..=w.columns() as i64 - 7 {
            let mut sq = [[0u64; 8]; 8];
            for (dm, row) in sq.iter_mut().enumerate() {
                for (dn, v) in row.iter_mut().enumerate() {
                    *v = w.get(n0 as usize + dn, m0 + dm as i64);
                }
            }
            let Ok(p) = fit_pseudo_affine(s0, &sq, (n0, m0)) else {
                continue;
            };
            if first_disagreement(w, &p).is_none() {
                return Ok(p);
            }
        }
    }
    let q = w.q();
    let band = w.crop(w.m_lo(), w.m_lo() + 7)?;
    let mut best: Option<(usize, PseudoAffine)> = None;
    let mut tie = false;
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..4 {
                    let p = PseudoAffine { s0, a, b, c, d };
                    if first_disagreement(&band, &p).is_some() {
                        continue;
                    }
                    let z = p.zero_count();
                    if z == (q * q) as usize || first_disagreement(w, &p).is_some() {
                        continue;
                    }
                    match best {
                        Some((bz, _)) if bz < z => {}
                        Some((bz, _)) if bz == z => tie = true,
                        _ => {
                            best = Some((z, p));
                            tie = false;
                        }
                    }
                }
            }
        }
    }
    match best {
        Some((_, p)) if !tie => Ok(p),
        Some(_) => Err(Error::Precondition(
            "several pseudo-affine functions fit equally well".into(),
        )),
        None => Err(Error::Precondition(
            "no pseudo-affine function agrees with the window".into(),
        )),
    }
}

/// `F'(n, m) = b · F(n, m + a n + c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shear {
    pub a: i64,
    pub b: u64,
    pub c: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub shear: Shear,
    pub d: u64,
    pub window: SudokuWindow,
}

/// Shears the window so that `F'(n, m) = m + D (q/4) m (m - n)` for `m ∉ qZ`.
pub fn to_normal_form(w: &SudokuWindow, p: &PseudoAffine) -> Result<NormalForm> {
    if p.s0 != w.s0() {
        return Err(Error::Invalid("Ψ and the window use different q".into()));
    }
    let (a1, c1) = zero_set_coeffs(p)?;
    if let Some((n, m)) = first_disagreement(w, p) {
        return Err(Error::Precondition(format!(
            "F({n}, {m}) = {} but Ψ = {}",
            w.get(n, m),
            p.eval(n as i64, m)
        )));
    }
    let (a1, c1) = (a1 as i64, c1 as i64);
    let mut sq = [[0u64; 8]; 8];
    for (m, row) in sq.iter_mut().enumerate() {
        for (n, v) in row.iter_mut().enumerate() {
            let (n, m) = (n as i64, m as i64);
            *v = p.eval(n, m + a1 * n + c1);
        }
    }
    let pp = fit_pseudo_affine(p.s0, &sq, (0, 0))?;
    debug_assert!(pp.a == 0 && pp.c == 0 && pp.b % 2 == 1);
    let q = p.q();
    let binv = odd_inverse(pp.b, q);
    let d = pp.d * binv % 4;
    let window = w.shear(a1, binv, c1)?;
    let target = PseudoAffine::new(p.s0, 0, 1, 0, d)?;
    for m in window.m_lo()..=window.m_hi() {
        if m.rem_euclid(q as i64) == 0 {
            continue;
        }
        for n in 1..=window.columns() {
            if window.get(n, m) != target.eval(n as i64, m) {
                return Err(Error::Precondition(format!(
                    "sheared window misses the normal form at ({n}, {m})"
                )));
            }
        }
    }
    Ok(NormalForm {
        shear: Shear { a: a1, b: binv, c: c1 },
        d,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(p: &PseudoAffine, origin: (i64, i64)) -> [[u64; 8]; 8] {
        let mut sq = [[0u64; 8]; 8];
        for (dm, row) in sq.iter_mut().enumerate() {
            for (dn, v) in row.iter_mut().enumerate() {
                *v = p.eval(origin.0 + dn as i64, origin.1 + dm as i64);
            }
        }
        sq
    }

    #[test]
    fn round_trip_with_offset() {
        let p = PseudoAffine::new(3, 5, 3, 6, 3).unwrap();
        for origin in [(0, 0), (3, -11), (-7, 20)] {
            let got = fit_pseudo_affine(3, &square(&p, origin), origin).unwrap();
            assert_eq!(got, p);
        }
    }

    #[test]
    fn q8_shear_function() {
        let p = PseudoAffine::new(3, 0, 1, 0, 1).unwrap();
        assert_eq!(fit_pseudo_affine(3, &square(&p, (0, 0)), (0, 0)).unwrap(), p);
        assert_eq!(zero_set_coeffs(&p).unwrap(), (0, 0));
    }

    #[test]
    fn non_affine_line_is_named() {
        let p = PseudoAffine::new(3, 1, 2, 3, 0).unwrap();
        let mut sq = square(&p, (0, 0));
        sq[4][4] = (sq[4][4] + 1) % 8;
        let e = fit_pseudo_affine(3, &sq, (0, 0)).unwrap_err();
        assert!(e.to_string().contains("not affine"));
    }
}
