use std::collections::HashSet;

use forge_core::sudoku::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Last non-zero base-q digit by string conversion, independent of the library.
fn last_digit(q: u64, n: i64) -> u64 {
    if n == 0 {
        return 1;
    }
    let mut digits = Vec::new();
    let mut x = n.unsigned_abs();
    while x > 0 {
        digits.push(x % q);
        x /= q;
    }
    let d = *digits.iter().find(|&&d| d != 0).unwrap();
    if n < 0 {
        (q - d) % q
    } else {
        d
    }
}

fn seq(q: u64, len: i64, f: impl Fn(i64) -> i64) -> Vec<u64> {
    (1..=len).map(|n| last_digit(q, f(n))).collect()
}

#[test]
fn f4_table() {
    let got: Vec<u64> = (1..=16).map(|n| f_q(2, n)).collect();
    assert_eq!(got, vec![1, 2, 3, 1, 1, 2, 3, 2, 1, 2, 3, 3, 1, 2, 3, 1]);
    assert_eq!(f_q(2, 0), 1);
    for n in -2000i64..2000 {
        assert_eq!(f_q(3, n as i128), last_digit(8, n));
    }
}

#[test]
fn worked_sequence_statistics() {
    let g = seq(4, 16, |n| 12 - n);
    let s = analyze_sequence(2, &g).unwrap();
    assert_eq!((s.step, s.order), (3, Some(0)));
    assert_eq!(s.bad_coset, Some(Coset { residue: 0, modulus: 4 }));
    assert!((1..=16).all(|n| s.affine(4, n) == (12 - n).rem_euclid(4) as u64));

    let g = seq(4, 16, |n| 2 * (n - 8));
    let s = analyze_sequence(2, &g).unwrap();
    assert_eq!((s.step, s.order), (2, Some(1)));
    assert_eq!(s.bad_coset, Some(Coset { residue: 0, modulus: 2 }));
    assert_eq!(s.intercept, 0);

    let g = seq(4, 16, |n| 2 * n + 1);
    let s = analyze_sequence(2, &g).unwrap();
    assert_eq!((s.step, s.order, s.bad_coset), (2, None, None));

    let s = analyze_sequence(2, &[2; 16]).unwrap();
    assert_eq!((s.step, s.order, s.bad_coset, s.intercept), (0, None, None, 2));
}

/// All sequences `c·f_q(an+b)` with `a, b < bound`, by direct evaluation.
fn corpus(q: u64, len: i64, bound: i64) -> HashSet<Vec<u64>> {
    let mut out = HashSet::new();
    for a in 0..bound {
        for b in 0..bound {
            let base = seq(q, len, |n| a * n + b);
            for c in (1..q).step_by(2) {
                out.insert(base.iter().map(|v| v * c % q).collect());
            }
        }
    }
    out
}

#[test]
fn membership_matches_enumeration() {
    let q = 4;
    let members = corpus(q, 16, 256);
    for g in &members {
        let s = analyze_sequence(2, g).expect("member accepted");
        for (k, &v) in g.iter().enumerate() {
            assert_eq!(s.witness.eval(2, k as i64 + 1), v);
        }
    }
    // Every single-cell mutation: acceptance must come with a valid witness, and anything in
    // the enumerated corpus must be accepted.
    for g in members.iter().take(300) {
        for k in 0..16 {
            for v in 1..q {
                let mut h = g.clone();
                h[k] = v;
                match analyze_sequence(2, &h) {
                    Some(s) => {
                        for (k, &v) in h.iter().enumerate() {
                            assert_eq!(s.witness.eval(2, k as i64 + 1), v);
                        }
                    }
                    None => assert!(!members.contains(&h)),
                }
            }
        }
    }
    assert!(analyze_sequence(2, &[1, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]).is_none());
}

#[test]
fn rigid_out_examples() {
    let w = Witness { a: 1, b: 0, c: 1 };
    assert!(check_rigid_out(2, 16, w, (1, 0), 1));
    let w = Witness { a: 0, b: 2, c: 1 };
    // hypothesis holds on {1..8}: α(n) = 2n vanishes on even n and is 2 on odd n
    assert!((1..=8).all(|n| (2 * n) % 4 == 0 || w.eval(2, n) == 2));
    assert!(check_rigid_out(2, 16, w, (2, 0), 1));
}

#[test]
fn standard_and_constant_solutions() {
    let w = SudokuWindow::standard(2, -300, 300).unwrap();
    let r = is_sudoku_solution(&w, Some(16)).unwrap();
    assert!(r.passed);
    let perms = has_good_columns(&w).unwrap().unwrap();
    assert!(perms.iter().all(|p| p == &vec![0, 1, 2, 3]));

    let c = SudokuWindow::constant(2, 2, -40, 40).unwrap();
    assert!(is_sudoku_solution(&c, None).unwrap().passed);
    assert!(has_good_columns(&c).unwrap().is_none());
}

#[test]
fn mutation_breaks_the_row() {
    let mut w = SudokuWindow::standard(2, -300, 300).unwrap();
    w.set(5, 7, 1).unwrap();
    let r = is_sudoku_solution(&w, Some(16)).unwrap();
    let f = r.failure.unwrap();
    // the reported line passes through the mutated cell
    assert_eq!(f.j * 5 + f.i, 7);
    let row = is_sudoku_solution(&w.crop(7, 7).unwrap(), Some(0)).unwrap();
    assert!(!row.passed);
}

#[test]
fn short_window_errors() {
    let w = SudokuWindow::standard(2, 0, 10).unwrap();
    assert!(is_sudoku_solution(&w, Some(1)).is_err());
    assert!(has_good_columns(&w.crop(0, 6).unwrap()).is_err());
}

/// `c·f_q(a m + b n + e)` with `a, c` odd: a Sudoku solution with good columns.
fn affine_window(s0: u32, a: i64, b: i64, c: u64, e: i64, lo: i64, hi: i64) -> SudokuWindow {
    let q = 1u64 << s0;
    let p = BoardParams::new(s0).unwrap();
    SudokuWindow::from_fn(p, lo, hi, |n, m| c * last_digit(q, a * m + b * n as i64 + e) % q)
        .unwrap()
}

#[test]
fn column_permutations_recovered() {
    let w = affine_window(2, 3, 1, 3, 2, -80, 80);
    let perms = has_good_columns(&w).unwrap().unwrap();
    for (k, p) in perms.iter().enumerate() {
        let n = k as i64 + 1;
        for r in 0..4i64 {
            let expect = (3 * (3 * r + n + 2)).rem_euclid(4) as u64;
            assert_eq!(p[r as usize], expect);
        }
    }
}

#[test]
fn invariances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        let a = 2 * rng.gen_range(0..4) + 1;
        let c = 2 * rng.gen_range(0..2) + 1;
        let w = affine_window(2, a, rng.gen_range(-3..4), c, rng.gen_range(0..50), -150, 150);
        assert!(is_sudoku_solution(&w, Some(4)).unwrap().passed);
        assert!(is_sudoku_solution(&w.reflect(), Some(4)).unwrap().passed);
        assert!(is_sudoku_solution(&w.scale(3).unwrap(), Some(4)).unwrap().passed);
        let s = w.shear(rng.gen_range(-2..3), 1, rng.gen_range(-5..5)).unwrap();
        assert!(is_sudoku_solution(&s, Some(2)).unwrap().passed);
        assert!(has_good_columns(&s).unwrap().is_some());
    }
}

#[test]
fn densities() {
    let w = SudokuWindow::standard(2, -64, 64).unwrap();
    for gamma in 1..4 {
        let d = digit_density(&w, gamma);
        let direct = (-64i64..=64).filter(|&m| last_digit(4, m) == gamma).count() as f64 / 129.0;
        let got = *d.numer() as f64 / *d.denom() as f64;
        assert!((got - direct).abs() < 1e-12);
        assert!((got - 1.0 / 3.0).abs() < 2.0 / 129.0);
    }
    let c = SudokuWindow::constant(2, 2, 0, 9).unwrap();
    assert_eq!(*digit_density(&c, 2).numer(), 1);
    assert_eq!(*digit_density(&c, 1).numer(), 0);
}

#[test]
fn pseudo_affine_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s0 in [3u32, 4] {
        let q = 1u64 << s0;
        for _ in 0..100 {
            let p = PseudoAffine::new(
                s0,
                rng.gen_range(0..q),
                rng.gen_range(0..q),
                rng.gen_range(0..q),
                rng.gen_range(0..q),
            )
            .unwrap();
            let origin = (rng.gen_range(-50..50), rng.gen_range(-50..50));
            let mut sq = [[0u64; 8]; 8];
            for (dm, row) in sq.iter_mut().enumerate() {
                for (dn, v) in row.iter_mut().enumerate() {
                    *v = p.eval(origin.0 + dn as i64, origin.1 + dm as i64);
                }
            }
            assert_eq!(fit_pseudo_affine(s0, &sq, origin).unwrap(), p);
            // affine along lines
            for j in -(q as i64)..=q as i64 {
                let vals: Vec<u64> = (0..6).map(|n| p.eval(n, j * n + 3)).collect();
                let d = (vals[1] + q - vals[0]) % q;
                assert!(vals.windows(2).all(|w| (w[1] + q - w[0]) % q == d));
            }
        }
    }
    let p = PseudoAffine::new(3, 1, 2, 3, 0).unwrap();
    let mut sq = [[0u64; 8]; 8];
    for (m, row) in sq.iter_mut().enumerate() {
        for (n, v) in row.iter_mut().enumerate() {
            *v = (n as u64 + 2 * m as u64 + 3) % 8;
        }
    }
    assert_eq!(fit_pseudo_affine(3, &sq, (0, 0)).unwrap(), p);
}

#[test]
fn zero_set_formula_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let q = 8u64;
        let p = PseudoAffine::new(
            3,
            rng.gen_range(0..q),
            2 * rng.gen_range(0..4) + 1,
            rng.gen_range(0..q),
            rng.gen_range(0..4),
        )
        .unwrap();
        let (a1, c1) = zero_set_coeffs(&p).unwrap();
        for n in 0..8i64 {
            for m in 0..8i64 {
                let zero = p.eval(n, m) == 0;
                let line = (m - a1 as i64 * n - c1 as i64).rem_euclid(8) == 0;
                assert_eq!(zero, line, "{p:?} at ({n},{m})");
            }
        }
    }
    assert_eq!(zero_set_coeffs(&PseudoAffine::new(2, 0, 1, 0, 0).unwrap()).unwrap(), (0, 0));
    assert!(zero_set_coeffs(&PseudoAffine::new(2, 0, 2, 0, 0).unwrap()).is_err());
}

#[test]
fn shear_examples() {
    let w = SudokuWindow::standard(2, -200, 200).unwrap();
    assert_eq!(w.shear(0, 1, 0).unwrap(), w);
    let s = w.shear(1, 1, 0).unwrap();
    for m in s.m_lo()..=s.m_hi() {
        for n in 1..=16 {
            assert_eq!(s.get(n, m), last_digit(4, m + n as i64));
        }
    }
    assert!(is_sudoku_solution(&s, Some(8)).unwrap().passed);
    assert!(w.shear(1, 2, 0).is_err());
}

#[test]
fn normal_forms() {
    let w = SudokuWindow::standard(2, -100, 100).unwrap();
    let psi = find_pseudo_affine(&w).unwrap();
    assert!(psi.same_function(&PseudoAffine::new(2, 0, 1, 0, 0).unwrap()));
    let nf = to_normal_form(&w, &psi).unwrap();
    assert_eq!(nf.d, 0);
    assert_eq!((nf.shear.a, nf.shear.b, nf.shear.c), (0, 1, 0));

    let pre = w.shear(1, 3, 2).unwrap();
    let psi = find_pseudo_affine(&pre).unwrap();
    let nf = to_normal_form(&pre, &psi).unwrap();
    assert_eq!(normal_form_d(&nf.window), Some(nf.d));

    // q = 8 window agreeing with m + (q/4) m (m - n) off its zero set Z × 8Z
    let p = PseudoAffine::new(3, 0, 1, 0, 1).unwrap();
    let params = BoardParams::new(3).unwrap();
    let f = SudokuWindow::from_fn(params, -40, 40, |n, m| {
        let v = p.eval(n as i64, m);
        if v == 0 {
            last_digit(8, m)
        } else {
            v
        }
    })
    .unwrap();
    let nf = to_normal_form(&f, &p).unwrap();
    assert_eq!(nf.d, 1);
    assert_eq!(normal_form_d(&nf.window), Some(1));
}

#[test]
fn tetris_examples() {
    let w = SudokuWindow::standard(2, -256, 256).unwrap();
    assert_eq!(w.tetris().unwrap(), w.crop(-64, 64).unwrap());
    let c = SudokuWindow::constant(2, 3, -16, 16).unwrap();
    assert_eq!(c.tetris().unwrap(), SudokuWindow::constant(2, 3, -4, 4).unwrap());
    assert!(w.crop(0, 2).unwrap().tetris().is_err());

    // normal form off qZ, period 16 imposed on the rows m ∈ 4Z
    let params = BoardParams::new(2).unwrap();
    let per = SudokuWindow::from_fn(params, 0, 127, |_, m| {
        if m % 4 != 0 {
            (m % 4) as u64
        } else {
            last_digit(4, m.rem_euclid(16) + 16)
        }
    })
    .unwrap();
    let t = per.tetris().unwrap();
    for m in t.m_lo()..=t.m_hi() - 4 {
        assert_eq!(t.row(m), t.row(m + 4));
    }
}

#[test]
fn descent_examples() {
    let w = SudokuWindow::standard(2, 1, 256).unwrap();
    let r = descent_check(&w, 6).unwrap();
    assert_eq!(r.verdict, Verdict::Refuted);
    assert_eq!(r.reason, Some(Reason::NotDivisible { period: 6 }));
    assert_eq!(r.at_step, 0);

    let r = descent_check(&w, 64).unwrap();
    assert_eq!(r.verdict, Verdict::Refuted);
    assert_eq!(r.steps.len(), 3);
    assert_eq!(r.final_period, 1);
    assert!(matches!(r.reason, Some(Reason::ValueContradiction { period: 1, .. })));

    let c = SudokuWindow::constant(2, 2, 0, 63).unwrap();
    assert!(descent_check(&c, 4).is_err());
}

#[test]
fn renders() {
    let w = SudokuWindow::standard(2, 1, 16).unwrap();
    let levels = shade_levels(&w);
    let text = render_ascii(&w, &levels);
    let row4 = text.lines().nth(4).unwrap();
    assert!(row4.contains("[1]"));
    let row16 = text.lines().nth(16).unwrap();
    assert!(row16.contains("{1}"));
    let pgm = render_pgm(&w, &levels, 2);
    assert!(pgm.starts_with("P2\n32 32\n255\n"));
    let s = render_sequence(2, &seq(4, 16, |n| 12 - n));
    assert!(s.contains("order 0"));
}
