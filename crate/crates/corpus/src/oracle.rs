//! Reference implementations used to cross-check the library. They work from the
//! definitions directly and share no code with `forge_core`.

use std::collections::{HashMap, HashSet};

/// Last non-zero base-`q` digit of `n`, as a residue mod `q`; 1 at `n = 0`.
pub fn last_digit(q: u64, n: i64) -> u64 {
    if n == 0 {
        return 1;
    }
    let mut x = n.unsigned_abs();
    while x.is_multiple_of(q) {
        x /= q;
    }
    let d = x % q;
    if n < 0 {
        q - d
    } else {
        d
    }
}

pub type Triple = (i64, i64, u64);

/// Every sequence `n ↦ c·f_q(a n + b)` on `1..=len` for `a ∈ a_range`, `b ∈ b_range`, odd `c`,
/// with all the triples that produce it.
pub fn sequence_corpus(
    q: u64,
    len: i64,
    a_range: std::ops::Range<i64>,
    b_range: std::ops::Range<i64>,
) -> HashMap<Vec<u64>, Vec<Triple>> {
    let mut out: HashMap<Vec<u64>, Vec<Triple>> = HashMap::new();
    for a in a_range {
        for b in b_range.clone() {
            let base: Vec<u64> = (1..=len).map(|n| last_digit(q, a * n + b)).collect();
            for c in (1..q).step_by(2) {
                let g = base.iter().map(|v| v * c % q).collect();
                out.entry(g).or_default().push((a, b, c));
            }
        }
    }
    out
}

/// Order of the line `n ↦ f_q(j n + i)` on `1..=len`: strip common factors of `q`, then count
/// the zeros of `j n + i` mod `q`. `None` is order `-∞`.
pub fn standard_line_order(q: u64, len: i64, j: i64, i: i64) -> Option<u32> {
    if j == 0 {
        return None;
    }
    let (mut a, mut b) = (j, i);
    let qi = q as i64;
    while a % qi == 0 && b % qi == 0 {
        a /= qi;
        b /= qi;
    }
    let zeros = (1..=len).filter(|&n| (a * n + b).rem_euclid(qi) == 0).count() as u64;
    if zeros == 0 {
        return None;
    }
    // zeros = 2^ord · len / q
    let scaled = zeros * q / len as u64;
    Some(scaled.trailing_zeros())
}

/// `E_i ∩ (E_j + h) ≠ ∅` for all `i, j` and `h ≠ 0`, by set intersection.
pub fn is_rigid(n: u64, parts: &[Vec<u64>]) -> bool {
    let sets: Vec<HashSet<u64>> = parts.iter().map(|p| p.iter().copied().collect()).collect();
    (1..n).all(|h| {
        sets.iter().all(|ei| {
            sets.iter()
                .all(|ej| ej.iter().any(|&y| ei.contains(&((y + h) % n))))
        })
    })
}

/// Whether `{a + f}` covers every element of the product `Z/m_1 × … × Z/m_k` exactly once.
pub fn tiles_exactly(moduli: &[u64], a: &[Vec<u64>], f: &[Vec<u64>]) -> bool {
    let size: u64 = moduli.iter().product();
    let index = |x: &[u64]| x.iter().zip(moduli).fold(0u64, |acc, (v, m)| acc * m + v % m);
    let mut count = vec![0u32; size as usize];
    for x in a {
        for y in f {
            let s: Vec<u64> = x.iter().zip(y).map(|(u, v)| u + v).collect();
            count[index(&s) as usize] += 1;
        }
    }
    count.iter().all(|&c| c == 1)
}

/// Boolean compatibility claim without normalization: every five pairs of opposite parity
/// and every `z` over `Z/2^m`.
pub fn force_compat_counterexamples(m: u32) -> u64 {
    use rayon::prelude::*;
    let n = 1u64 << m;
    let pairs: Vec<(u64, u64)> = (0..n)
        .step_by(2)
        .flat_map(|e| (1..n).step_by(2).map(move |o| (e, o)))
        .collect();
    let translates = |p: (u64, u64), r: (u64, u64)| {
        (0..n).any(|t| {
            let (x, y) = ((p.0 + t) % n, (p.1 + t) % n);
            (x == r.0 && y == r.1) || (x == r.1 && y == r.0)
        })
    };
    pairs
        .par_iter()
        .map(|&ab| {
            let mut bad = 0u64;
            for &cd in &pairs {
                for &fg in &pairs {
                    for &h1 in &pairs {
                        for &h2 in &pairs {
                            for z in 0..n {
                                let lhs = ab.0 + ab.1 + h1.0 + h1.1 + h2.0 + h2.1;
                                let rhs = 2 * (cd.0 + cd.1) + fg.0 + fg.1 + 2 * z;
                                if lhs % n != rhs % n {
                                    continue;
                                }
                                let hyp = [ab.0, ab.1].iter().all(|&al| {
                                    [h1.0, h1.1].iter().all(|&t1| {
                                        [h2.0, h2.1].iter().all(|&t2| {
                                            [cd.0, cd.1].iter().any(|&be| {
                                                [fg.0, fg.1].iter().any(|&ga| {
                                                    (al + t1 + t2) % n == (2 * be + ga + z) % n
                                                })
                                            })
                                        })
                                    })
                                });
                                if hyp && !(translates(ab, h1) && translates(ab, h2)) {
                                    bad += 1;
                                }
                            }
                        }
                    }
                }
            }
            bad
        })
        .sum()
}

/// Membership of a point in the box tile `R_d` built from `ε` and `x`, for points off
/// every box face (all coordinates in floating point is enough there).
pub fn in_rigid_box_tile(p: &[f64], eps: f64, x: &[f64]) -> bool {
    let d = p.len();
    let in_unit = p.iter().all(|&v| v > 0.0 && v < 1.0);
    let in_notch = |k: usize, shift: f64| {
        (0..d).all(|j| {
            let v = if j == k { p[j] - shift } else { p[j] };
            let lo = if j == k { 0.0 } else { x[j] };
            v > lo && v < lo + eps
        })
    };
    let removed = (0..d).any(|k| in_notch(k, 0.0));
    let added = (0..d).any(|k| in_notch(k, 1.0));
    (in_unit && !removed) || added
}
