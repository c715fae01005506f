//! Checks on `f_q`, the sequence class `S[N]` and Sudoku windows.

use forge_core::sudoku::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::oracle::{last_digit, sequence_corpus, standard_line_order};
use crate::{ensure, lib, CheckResult};

const F4_TABLE: [u64; 16] = [1, 2, 3, 1, 1, 2, 3, 2, 1, 2, 3, 3, 1, 2, 3, 1];

pub fn fq_table() -> CheckResult {
    let got: Vec<u64> = (1..=16).map(|n| f_q(2, n)).collect();
    ensure(got == F4_TABLE, || format!("f_4(1..16) = {got:?}"))?;
    ensure(f_q(2, 0) == 1, || "f_4(0) != 1".into())?;
    let mut checked = 0u64;
    for s0 in 2..=4u32 {
        let q = 1i128 << s0;
        for n in -10_000i128..=10_000 {
            let v = f_q(s0, n);
            ensure(v == last_digit(q as u64, n as i64), || {
                format!("f_{q}({n}) = {v} disagrees with the base-q expansion")
            })?;
            ensure(f_q(s0, q * n) == v, || format!("f_{q}(q·{n}) != f_{q}({n})"))?;
            if n % q != 0 {
                ensure(v as i128 == n.rem_euclid(q), || format!("f_{q}({n}) != {n} mod q"))?;
            }
            if n != 0 {
                for a in (1..=31i128).step_by(2) {
                    let lhs = f_q(s0, a * n) as i128;
                    ensure(lhs == (a * v as i128).rem_euclid(q), || {
                        format!("f_{q}({a}·{n}) != {a}·f_{q}({n})")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("table matches; {checked} multiplicativity instances"))
}

/// `(g, step, order, bad coset as (residue, modulus))`, for four worked sequences.
type Worked = (Vec<u64>, u64, Option<u32>, Option<(u64, u64)>);

fn worked_cases() -> Vec<Worked> {
    let seq = |f: &dyn Fn(i64) -> i64| (1..=16).map(|n| last_digit(4, f(n))).collect::<Vec<_>>();
    vec![
        (seq(&|n| 12 - n), 3, Some(0), Some((0, 4))),
        (seq(&|n| 2 * (n - 8)), 2, Some(1), Some((0, 2))),
        (seq(&|n| 2 * n + 1), 2, None, None),
        (vec![2; 16], 0, None, None),
    ]
}

pub fn worked_examples() -> CheckResult {
    for (k, (g, step, order, coset)) in worked_cases().into_iter().enumerate() {
        let s = analyze_sequence(2, &g).ok_or(format!("example {} sequence rejected", k + 1))?;
        let got = (s.step, s.order, s.bad_coset.map(|c| (c.residue, c.modulus)));
        ensure(got == (step, order, coset), || {
            format!("example {}: got {got:?}, expected {:?}", k + 1, (step, order, coset))
        })?;
        // the affine function vanishes exactly on the bad coset and agrees with g elsewhere
        for n in 1..=16i64 {
            let alpha = s.affine(4, n);
            let bad = coset.is_some_and(|(r, m)| n.rem_euclid(m as i64) as u64 == r);
            ensure((alpha == 0) == bad, || format!("example {}: zero set at n = {n}", k + 1))?;
            ensure(bad || alpha == g[n as usize - 1], || {
                format!("example {}: α({n}) = {alpha} but g = {}", k + 1, g[n as usize - 1])
            })?;
        }
    }
    Ok("four worked sequences reproduced".into())
}

pub fn well_defined() -> CheckResult {
    let corpus = sequence_corpus(4, 16, 0..256, 0..256);
    let members: Vec<_> = corpus.iter().collect();
    let witnesses: usize = members.iter().map(|(_, w)| w.len()).sum();
    members.par_iter().try_for_each(|(g, triples)| {
        let s = analyze_sequence(2, g).ok_or_else(|| format!("{g:?} rejected"))?;
        let key = |t: &LineStats| (t.order, t.step, t.bad_coset, t.intercept);
        for &(a, b, c) in triples.iter() {
            let w = Witness { a: a as i128, b: b as i128, c: c as i128 };
            let t = LineStats::from_witness(2, 16, w);
            ensure(key(&t) == key(&s), || {
                format!("{g:?}: witness ({a},{b},{c}) gives {:?}, analysis {:?}", key(&t), key(&s))
            })?;
        }
        let bad = (1..=16i64)
            .filter(|&n| s.bad_coset.is_some_and(|c| c.contains(n)))
            .count() as u64;
        let expected = s.order.map_or(0, |o| (1u64 << o) * 16 / 4);
        ensure(bad == expected, || {
            format!("{g:?}: bad coset meets 1..16 in {bad} points, expected {expected}")
        })
    })?;
    Ok(format!("{} members, {witnesses} witnesses", members.len()))
}

pub fn rigidity_sweep() -> CheckResult {
    let corpus = sequence_corpus(4, 16, 0..256, 0..256);
    let members: Vec<&Vec<u64>> = corpus.keys().collect();
    let results: Vec<Result<(u64, u64), String>> = members
        .par_iter()
        .map(|g| {
            let s = analyze_sequence(2, g).ok_or_else(|| format!("{g:?} rejected"))?;
            let (mut instances, mut hypotheses) = (0u64, 0u64);
            for slope in 0..4u64 {
                for icpt in 0..4u64 {
                    let agrees = |n: u64| {
                        let a = (slope * n + icpt) % 4;
                        a == 0 || g[n as usize - 1] == a
                    };
                    for n0 in 1..=9u64 {
                        let hyp = (n0..n0 + 8).all(agrees);
                        let concl = (1..=16).all(agrees);
                        ensure(!hyp || concl, || {
                            format!("{g:?}, α = {slope}n + {icpt}, interval from {n0}")
                        })?;
                        let lib_says = check_rigid_out(2, 16, s.witness, (slope, icpt), n0 as usize);
                        ensure(lib_says == (!hyp || concl), || {
                            format!("library disagrees on {g:?}, α = {slope}n + {icpt}, n0 = {n0}")
                        })?;
                        instances += 1;
                        hypotheses += u64::from(hyp);
                    }
                }
            }
            Ok((instances, hypotheses))
        })
        .collect();
    let (mut instances, mut hypotheses) = (0, 0);
    for r in results {
        let (i, h) = r?;
        instances += i;
        hypotheses += h;
    }
    Ok(format!(
        "{} members, {instances} instances, {hypotheses} with the hypothesis, 0 counterexamples",
        members.len()
    ))
}

/// The fitting lines `(i, j)` of a window `[lo, hi]` with `N` columns, by direct scan.
fn fitting_lines(lo: i64, hi: i64, n: i64, j: i64) -> Vec<i64> {
    (lo - n * j.abs() - 1..=hi + n * j.abs() + 1)
        .filter(|&i| (1..=n).all(|k| (lo..=hi).contains(&(j * k + i))))
        .collect()
}

pub fn verification() -> CheckResult {
    let (lo, hi) = (-300, 300);
    let w = lib(SudokuWindow::standard(2, lo, hi))?;
    let r = lib(is_sudoku_solution(&w, Some(16)))?;
    ensure(r.passed, || format!("standard solution rejected at {:?}", r.failure))?;

    let corpus = sequence_corpus(4, 16, 0..17, -320..321);
    let mut lines = 0usize;
    for j in -16..=16i64 {
        for i in fitting_lines(lo, hi, 16, j) {
            let g: Vec<u64> = (1..=16).map(|n| w.get(n, j * n as i64 + i)).collect();
            ensure(corpus.contains_key(&g), || format!("line ({i}, {j}) is not in S[16]"))?;
            lines += 1;
        }
    }
    ensure(r.lines_checked == lines, || {
        format!("library checked {} lines, direct scan finds {lines}", r.lines_checked)
    })?;

    let perms = lib(has_good_columns(&w))?.ok_or("standard solution lacks good columns")?;
    ensure(perms.iter().all(|p| p == &[0, 1, 2, 3]), || "non-identity permutation".into())?;
    for m in lo..=hi {
        if m % 4 != 0 {
            ensure(w.row(m).iter().all(|&v| v == m.rem_euclid(4) as u64), || {
                format!("row {m} does not follow the identity permutation")
            })?;
        }
    }

    let c = lib(SudokuWindow::constant(2, 2, lo, hi))?;
    ensure(lib(is_sudoku_solution(&c, Some(16)))?.passed, || "constant solution rejected".into())?;
    ensure(corpus.contains_key(&vec![2u64; 16]), || "constant line missing from S[16]".into())?;
    ensure(lib(has_good_columns(&c))?.is_none(), || "constant solution has good columns".into())?;
    Ok(format!("{lines} lines in S[16]; constant solution verified without good columns"))
}

pub fn equidistribution() -> CheckResult {
    let mut notes = vec![];
    for s0 in [2u32, 3] {
        let q = 1u64 << s0;
        let (lo, hi) = (-300i64, 300);
        let w = lib(SudokuWindow::standard(s0, lo, hi))?;
        for gamma in 1..q {
            let d = digit_density(&w, gamma);
            let got = *d.numer() as f64 / *d.denom() as f64;
            let direct = (lo..=hi).filter(|&m| last_digit(q, m) == gamma).count() as f64
                / (hi - lo + 1) as f64;
            ensure((got - direct).abs() < 1e-12, || {
                format!("q = {q}: density of {gamma} is {got}, direct count {direct}")
            })?;
            let target = 1.0 / (q - 1) as f64;
            ensure((got - target).abs() <= 0.05 * target, || {
                format!("q = {q}: density of {gamma} is {got}, not within 5% of {target}")
            })?;
            ensure(got <= 2.0 / q as f64, || format!("q = {q}: density of {gamma} above 2/q"))?;
        }
        let n = w.columns() as i64;
        for j in -1..=1i64 {
            let lines = fitting_lines(lo, hi, n, j);
            for (o, frac) in high_order_fractions(&w, j) {
                let direct = lines
                    .iter()
                    .filter(|&&i| standard_line_order(q, n, j, i) == Some(o))
                    .count() as u64;
                ensure(*frac.numer() * lines.len() as u64 == direct * *frac.denom(), || {
                    format!("q = {q}, j = {j}, order {o}: fraction {frac} vs {direct}/{}", lines.len())
                })?;
                let bound = 2f64.powi(1 - o as i32);
                ensure((*frac.numer() as f64) <= bound * *frac.denom() as f64, || {
                    format!("q = {q}, j = {j}: order {o} fraction {frac} above {bound}")
                })?;
            }
        }
        notes.push(format!("q = {q}"));
    }
    Ok(format!("densities and order fractions within bounds for {}", notes.join(", ")))
}

fn psi(q: i128, (a, b, c, d): (u64, u64, u64, u64), n: i64, m: i64) -> u64 {
    let (n, m) = (n as i128, m as i128);
    let v = a as i128 * n + b as i128 * m + c as i128 + d as i128 * (q / 4) * m * (m - n);
    v.rem_euclid(q) as u64
}

pub fn concatenation() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for k in 0..1000 {
        let s0 = if k % 2 == 0 { 3 } else { 4 };
        let q = 1u64 << s0;
        let coeffs = (rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..4));
        let origin = (rng.gen_range(-1000..1000), rng.gen_range(-1000..1000));
        let mut sq = [[0u64; 8]; 8];
        for (dm, row) in sq.iter_mut().enumerate() {
            for (dn, v) in row.iter_mut().enumerate() {
                *v = psi(q as i128, coeffs, origin.0 + dn as i64, origin.1 + dm as i64);
            }
        }
        let p = lib(fit_pseudo_affine(s0, &sq, origin))?;
        ensure((p.a, p.b, p.c, p.d) == coeffs, || {
            format!("q = {q}: fitted {:?} from {coeffs:?}", (p.a, p.b, p.c, p.d))
        })?;
    }
    for k in 0..1000 {
        let s0 = if k % 2 == 0 { 3 } else { 4 };
        let q = 1u64 << s0;
        let coeffs = (rng.gen_range(0..q), 2 * rng.gen_range(0..q / 2) + 1, rng.gen_range(0..q), rng.gen_range(0..4));
        let p = lib(PseudoAffine::new(s0, coeffs.0, coeffs.1, coeffs.2, coeffs.3))?;
        let (a1, c1) = lib(zero_set_coeffs(&p))?;
        for n in 0..q as i64 {
            for m in 0..q as i64 {
                let zero = psi(q as i128, coeffs, n, m) == 0;
                let on_line = (m - a1 as i64 * n - c1 as i64).rem_euclid(q as i64) == 0;
                ensure(zero == on_line, || format!("q = {q}, {coeffs:?}: zero set differs at ({n}, {m})"))?;
            }
        }
    }
    Ok("1000 round trips and 1000 zero-set scans".into())
}

pub fn descent() -> CheckResult {
    let (lo, hi) = (-512i64, 511);
    let w = lib(SudokuWindow::standard(2, lo, hi))?;
    ensure(w.height() == 1024, || "window height is not 4^5".into())?;
    let p = lib(find_pseudo_affine(&w))?;
    let nf = lib(to_normal_form(&w, &p))?;
    ensure(nf.d == 0, || format!("D = {}", nf.d))?;
    ensure((nf.shear.a, nf.shear.b, nf.shear.c) == (0, 1, 0), || {
        format!("normal form shear {:?}", nf.shear)
    })?;
    ensure(nf.window == w, || "normal form changed the window".into())?;
    let t = lib(w.tetris())?;
    ensure(t == lib(w.crop(lo / 4, hi / 4))?, || "tetris is not a fixed point".into())?;
    for m in lo / 4..=hi / 4 {
        ensure(t.row(m).iter().all(|&v| v == last_digit(4, 4 * m)), || {
            format!("tetris row {m}")
        })?;
    }

    let mut notes = vec![];
    for period in [6u64, 64, 256] {
        let r = lib(descent_check(&w, period))?;
        ensure(r.verdict == Verdict::Refuted, || format!("M = {period}: {:?}", r.verdict))?;
        // the claimed period really fails on the window
        let witness = (lo..=hi - period as i64)
            .find(|&m| last_digit(4, m) != last_digit(4, m + period as i64));
        ensure(witness.is_some(), || format!("M = {period} is a true period of the window"))?;
        match r.reason {
            Some(Reason::ValueContradiction { n, m, period: p }) => {
                // the k-th window is F(n, 4^k m)
                let scale = 4i64.pow(r.steps.len() as u32);
                ensure(p == r.final_period && (1..=16).contains(&n), || {
                    format!("M = {period}: malformed contradiction {:?}", r.reason)
                })?;
                ensure(
                    last_digit(4, scale * m) != last_digit(4, scale * (m + p as i64)),
                    || format!("M = {period}: reported contradiction at ({n}, {m}) is not one"),
                )?;
            }
            Some(Reason::NotDivisible { period: p }) => {
                ensure(p % 4 != 0, || format!("M = {period}: {p} is divisible by q"))?;
            }
            None => return Err(format!("M = {period}: refuted without a reason")),
        }
        notes.push(format!("M = {period}: {:?} after {} steps", r.reason, r.steps.len()));
    }
    Ok(format!("normal form D = 0, tetris fixed; {}", notes.join("; ")))
}
