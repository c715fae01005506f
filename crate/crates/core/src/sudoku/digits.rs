//! `f_q`, membership in `S[N]`, and the statistics of a member.

use serde::{Deserialize, Serialize};

/// Last non-zero base-`q` digit of `n` (as a residue mod `q = 2^s0`), with `f_q(0) = 1`.
pub fn f_q(s0: u32, n: i128) -> u64 {
    if n == 0 {
        return 1;
    }
    let q = 1i128 << s0;
    let mut n = n;
    while n % q == 0 {
        n /= q;
    }
    n.rem_euclid(q) as u64
}

/// Inverse of an odd residue modulo `q`.
pub fn odd_inverse(x: u64, q: u64) -> u64 {
    debug_assert!(x % 2 == 1);
    // Newton iteration: each step doubles the number of correct low bits.
    let mut y: u64 = x;
    for _ in 0..6 {
        y = y.wrapping_mul(2u64.wrapping_sub(x.wrapping_mul(y)));
    }
    y & (q - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coset {
    pub residue: u64,
    pub modulus: u64,
}

impl Coset {
    pub fn contains(&self, n: i64) -> bool {
        n.rem_euclid(self.modulus as i64) as u64 == self.residue
    }
}

/// `g(n) = c · f_q(a n + b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl Witness {
    pub fn eval(&self, s0: u32, n: i64) -> u64 {
        let q = 1i128 << s0;
        (self.c * f_q(s0, self.a * n as i128 + self.b) as i128).rem_euclid(q) as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineStats {
    /// `None` stands for order `-∞`.
    pub order: Option<u32>,
    pub step: u64,
    pub bad_coset: Option<Coset>,
    pub intercept: u64,
    pub witness: Witness,
}

impl LineStats {
    /// The associated affine function `n ↦ step·n + intercept`.
    pub fn affine(&self, q: u64, n: i64) -> u64 {
        (self.step as i128 * n as i128 + self.intercept as i128).rem_euclid(q as i128) as u64
    }

    /// Statistics read off any witness valid on `{1, …, len}`, normalized as in the
    /// existence argument: make `a n + b` non-vanishing, absorb `c`, strip common factors of `q`.
    pub fn from_witness(s0: u32, len: usize, w: Witness) -> LineStats {
        let q = 1i128 << s0;
        let (mut a, mut b) = (w.a, w.b);
        if (1..=len as i128).any(|n| a * n + b == 0) {
            let bound = (1..=len as i128).map(|n| (a * n + b).abs()).max().unwrap_or(0);
            let mut shift = q;
            while shift <= bound {
                shift *= q;
            }
            b += shift;
        }
        if a == 0 && b == 0 {
            b = 1;
        }
        a *= w.c;
        b *= w.c;
        while a % q == 0 && b % q == 0 {
            a /= q;
            b /= q;
        }
        let step = a.rem_euclid(q) as u64;
        let intercept = b.rem_euclid(q) as u64;
        let (order, bad_coset) = bad_coset_of(s0, step, intercept);
        LineStats {
            order,
            step,
            bad_coset,
            intercept,
            witness: w,
        }
    }
}

/// Zero set of `n ↦ s n + c` mod `q`, with its order.
fn bad_coset_of(s0: u32, s: u64, c: u64) -> (Option<u32>, Option<Coset>) {
    let q = 1u64 << s0;
    if s == 0 {
        return (None, None);
    }
    let v = s.trailing_zeros();
    if !c.is_multiple_of(1 << v) {
        return (None, None);
    }
    let d = q >> v;
    let r = (0..d).find(|&n| (s * n + c).is_multiple_of(q)).expect("a zero exists");
    (Some(v), Some(Coset { residue: r, modulus: d }))
}

/// Decides `g ∈ S[N]` for `g` indexed by `n = 1..=g.len()`, returning statistics and a witness.
pub fn analyze_sequence(s0: u32, g: &[u64]) -> Option<LineStats> {
    let q = 1u64 << s0;
    if g.iter().any(|&v| v == 0 || v >= q) {
        return None;
    }
    let first = g.first().copied().unwrap_or(1);
    if g.iter().all(|&v| v == first) {
        return Some(LineStats {
            order: None,
            step: 0,
            bad_coset: None,
            intercept: first,
            witness: Witness { a: 0, b: first as i128, c: 1 },
        });
    }
    for s in 1..q {
        for c in 0..q {
            let fits = g.iter().enumerate().all(|(k, &v)| {
                let x = (s * (k as u64 + 1) + c) % q;
                x == 0 || x == v
            });
            if !fits {
                continue;
            }
            if let Some(witness) = realize(s0, s, c, g) {
                let (order, bad_coset) = bad_coset_of(s0, s, c);
                let stats = LineStats {
                    order,
                    step: s,
                    bad_coset,
                    intercept: c,
                    witness,
                };
                debug_assert!(g
                    .iter()
                    .enumerate()
                    .all(|(k, &v)| witness.eval(s0, k as i64 + 1) == v));
                return Some(stats);
            }
        }
    }
    None
}

/// Integers `a ≡ s`, `b ≡ c` (mod q) with `f_q(a n + b) = g(n)`, if the bad coset can be filled.
fn realize(s0: u32, s: u64, c: u64, g: &[u64]) -> Option<Witness> {
    let q = 1u64 << s0;
    let v = s.trailing_zeros();
    if !c.is_multiple_of(1 << v) {
        return Some(Witness { a: s as i128, b: c as i128, c: 1 });
    }
    let d = (q >> v) as usize;
    let n0 = (1..=d).find(|&n| (s * n as u64 + c).is_multiple_of(q)).expect("a zero exists");
    let h: Vec<u64> = g.iter().skip(n0 - 1).step_by(d).copied().collect();
    let low = s >> v;
    let span = 1u64 << (s0 - v);
    for k in 0..(1u64 << v) {
        let sigma = low + k * span;
        if let Some(b1) = descend(q, sigma, &h) {
            let a = ((1i128) << v) * sigma as i128;
            let b = q as i128 * b1 - a * n0 as i128;
            return Some(Witness { a, b, c: 1 });
        }
    }
    None
}

/// Intercept `B` with `f_q(σ t + B) = h(t)` for `t = 0..h.len()`.
fn descend(q: u64, sigma: u64, h: &[u64]) -> Option<i128> {
    if h.len() <= 1 {
        return Some(h.first().map_or(1, |&v| v as i128));
    }
    let inv = odd_inverse(sigma, q);
    for beta in 0..q {
        let fits = h.iter().enumerate().all(|(t, &v)| {
            let x = (sigma * t as u64 + beta) % q;
            x == 0 || x == v
        });
        if !fits {
            continue;
        }
        let t0 = ((q - beta) % q * inv % q) as usize;
        if t0 >= h.len() {
            return Some(beta as i128);
        }
        let sub: Vec<u64> = h[t0..].iter().step_by(q as usize).copied().collect();
        if let Some(next) = descend(q, sigma, &sub) {
            return Some(q as i128 * next - sigma as i128 * t0 as i128);
        }
    }
    None
}

/// One instance of rigidity outside a bad coset: if `g` agrees with `α` off the zeros of `α`
/// on `{n0, …, n0+7}`, it agrees off those zeros on all of `{1, …, len}`.
pub fn check_rigid_out(s0: u32, len: usize, w: Witness, alpha: (u64, u64), n0: usize) -> bool {
    let q = 1u64 << s0;
    let agrees = |n: usize| {
        let a = (alpha.0 * n as u64 + alpha.1) % q;
        a == 0 || w.eval(s0, n as i64) == a
    };
    if !(n0..n0 + 8).all(agrees) {
        return true;
    }
    (1..=len).all(agrees)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(f_q(2, 7), 3);
        assert_eq!(f_q(2, 8), 2);
        assert_eq!(f_q(2, 0), 1);
        assert_eq!(f_q(2, -1), 3);
        assert_eq!(f_q(2, -4), 3);
    }

    #[test]
    fn inverse() {
        for q in [4u64, 8, 16, 1 << 20] {
            for x in (1..q.min(200)).step_by(2) {
                assert_eq!(x * odd_inverse(x, q) % q, 1);
            }
        }
    }

    #[test]
    fn broken_sequence_rejected() {
        let mut g = vec![1u64; 16];
        g[1] = 3;
        assert!(analyze_sequence(2, &g).is_none());
    }

    #[test]
    fn witness_reproduces() {
        let g: Vec<u64> = (1..=16).map(|n| f_q(2, 12 - n)).collect();
        let st = analyze_sequence(2, &g).unwrap();
        for (k, &v) in g.iter().enumerate() {
            assert_eq!(st.witness.eval(2, k as i64 + 1), v);
        }
    }
}
