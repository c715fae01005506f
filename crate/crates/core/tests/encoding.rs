use forge_core::encoding::*;
use forge_core::functional::{check_weak_property, FunctionTable, SearchOptions};
use forge_core::group::PeriodLattice;
use forge_core::sudoku::*;

fn standard() -> (SudokuWindow, Vec<Vec<u64>>) {
    let w = SudokuWindow::standard(2, 0, 63).unwrap();
    let sigma = has_good_columns(&w).unwrap().unwrap();
    (w, sigma)
}

#[test]
fn standard_round_trip() {
    let (w, sigma) = standard();
    let t = encode_solution(&w, &sigma, None).unwrap();
    let r = check_axioms(&t);
    assert!(r.all_passed(), "{:?}", r.failures);
    let (back, s) = decode_beta(&t).unwrap();
    assert_eq!(back, w);
    assert_eq!(s, sigma);
    // every β_{1,·,n}(i,j) reads F on its line
    for (&(i, j), _) in t.points().iter().take(200) {
        for n in 1..=16 {
            assert_eq!(t.digit(i, j, 1, n).unwrap(), w.get(n, j * n as i64 + i));
        }
    }
}

#[test]
fn json_round_trip() {
    let (w, sigma) = standard();
    let t = encode_solution(&w, &sigma, Some(1)).unwrap();
    let text = serde_json::to_string(&t).unwrap();
    let back: BetaTuple = serde_json::from_str(&text).unwrap();
    assert_eq!(back, t);
}

#[test]
fn every_single_bit_mutation_is_caught() {
    let (w, sigma) = standard();
    let t = encode_solution(&w, &sigma, Some(2)).unwrap();
    let mut flips = 0;
    for &(i, j) in t.points().keys() {
        for a in 0..2 {
            for b in 0..2 {
                for n in 1..=16 {
                    let mut m = t.clone();
                    m.flip(i, j, a, b, n).unwrap();
                    let near = check_axioms_near(&m, i, j);
                    assert!(!near.all_passed(), "flip at ({i},{j}) a={a} b={b} n={n}");
                    flips += 1;
                }
            }
        }
    }
    assert!(flips > 1000);
    // the local check agrees with the global one on a sample
    let mut m = t.clone();
    m.flip(10, 0, 1, 0, 3).unwrap();
    assert!(!check_axioms(&m).all_passed());
}

#[test]
fn broken_permutation_fails_iv() {
    let (w, sigma) = standard();
    let t = encode_solution(&w, &sigma, Some(1)).unwrap();
    // σ_1 becomes (0, 1, 1, 3), which is not a permutation
    let mut bad = t.clone();
    for &(i, j) in t.points().keys() {
        let m = j + i;
        if m.rem_euclid(4) == 2 {
            // set β_{0,·,1} to the digit 1
            if bad.bit(i, j, 0, 0, 1) == Some(0) {
                bad.flip(i, j, 0, 0, 1).unwrap();
            }
            if bad.bit(i, j, 0, 1, 1) == Some(1) {
                bad.flip(i, j, 0, 1, 1).unwrap();
            }
        }
    }
    let r = check_axioms(&bad);
    assert!(!r.passed[3]);
    assert!(r.failures.iter().any(|f| f.axiom == "IV"));
}

#[test]
fn zero_tuple_fails_i() {
    let (w, sigma) = standard();
    let mut t = encode_solution(&w, &sigma, Some(0)).unwrap();
    let keys: Vec<(i64, i64)> = t.points().keys().copied().collect();
    for (i, j) in keys {
        for a in 0..2 {
            for b in 0..2 {
                for n in 1..=16 {
                    if t.bit(i, j, a, b, n) == Some(1) {
                        t.flip(i, j, a, b, n).unwrap();
                    }
                }
            }
        }
    }
    assert!(!check_axioms(&t).passed[0]);
    match decode_beta(&t) {
        Err(forge_core::Error::Axiom { axiom, .. }) => assert_eq!(axiom, "I"),
        other => panic!("expected axiom I failure, got {other:?}"),
    }
}

#[test]
fn randomized_windows_round_trip() {
    for (k, (a, b, c, e)) in [(1, 0, 1, 5), (3, 1, 1, 0), (1, -2, 3, 7), (3, 3, 3, 11)]
        .into_iter()
        .enumerate()
    {
        let p = BoardParams::new(2).unwrap();
        let mut w = SudokuWindow::from_fn(p, -20, 43, |n, m| {
            c * f_q(2, (a * m + b * n as i64 + e) as i128) % 4
        })
        .unwrap();
        if k % 2 == 1 {
            w = w.reflect();
        }
        let sigma = has_good_columns(&w).unwrap().unwrap();
        let t = encode_solution(&w, &sigma, None).unwrap();
        assert!(check_axioms(&t).all_passed());
        let (back, s) = decode_beta(&t).unwrap();
        assert_eq!(back, w);
        assert_eq!(s, sigma);
        let again = encode_solution(&back, &s, None).unwrap();
        assert_eq!(again, t);
    }
}

#[test]
fn encode_requires_good_columns() {
    let c = SudokuWindow::constant(2, 2, 0, 40).unwrap();
    let sigma = vec![vec![0, 1, 2, 3]; 16];
    assert!(encode_solution(&c, &sigma, None).is_err());
}

#[test]
fn omega_membership() {
    let p = BoardParams::new(2).unwrap();
    let mut bits = vec![0u8; 64];
    assert!(!omega_contains(p, &bits));
    // F digits all 1, σ digits all 0
    for n in 1..=16 {
        bits[bit_index(p, 1, 0, n)] = 1;
    }
    assert!(omega_contains(p, &bits));
    // σ digit 2 at n = 3 disagrees with F
    bits[bit_index(p, 0, 1, 3)] = 1;
    assert!(!omega_contains(p, &bits));
    let flipped: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
    bits[bit_index(p, 0, 1, 3)] = 0;
    let flipped_ok: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
    assert!(omega_tilde_contains(p, 1, &flipped_ok));
    assert!(!omega_tilde_contains(p, 1, &flipped));
    // Ω̃ is closed under reflecting every coordinate
    assert_eq!(omega_tilde_contains(p, 0, &bits), omega_tilde_contains(p, 1, &flipped_ok));
}

#[test]
fn symbolic_shape() {
    let s = assemble_property_s(BoardParams::new(2).unwrap(), false).unwrap();
    assert_eq!(s.shape.components, 65);
    assert_eq!(s.shape.group, "Z^2 x (Z/2Z)^3");
    assert_eq!(s.shape.m, 8);
    assert!(s.compiled.is_none());
    assert!(assemble_property_s(BoardParams::new(2).unwrap(), true).is_err());
}

#[test]
fn toy_property_matches_predicate() {
    let p = BoardParams::with_columns(1, 1).unwrap();
    let s = assemble_property_s(p, true).unwrap();
    assert_eq!(s.shape.components, 3);
    let compiled = s.compiled.clone().unwrap();
    let wrapper = compiled.into_wrapper();
    let g = forge_core::group::GroupSpec::new(2, vec![2, 2, 2]).unwrap();
    let lat = PeriodLattice::diagonal(&g, &[2, 2]).unwrap();
    let modulus = 1u64 << s.shape.m;
    // α_* = ε and α = R_ε(β) for β from the one-column encoding: β_0 alternates in i,
    // β_1 ≡ 1 (the only digit of Z/2).
    let build = |beta0: &dyn Fn(i64, i64) -> u64, beta1: &dyn Fn(i64, i64) -> u64| {
        FunctionTable::from_fn(&g, &lat, |x| {
            let c = &x.0;
            let eps = c[2] as u64;
            let r = |b: u64| if eps == 0 { b } else { 1 - b };
            vec![eps, r(beta0(c[0], c[1])), r(beta1(c[0], c[1]))]
                .into_iter()
                .map(|v| v % modulus)
                .collect()
        })
        .unwrap()
    };
    let opts = SearchOptions::default();
    let good = build(&|i, j| ((i + j).rem_euclid(2)) as u64, &|_, _| 1);
    assert!(check_weak_property(&good, &wrapper, &opts).unwrap());
    // β_1 = 0 is the zero digit: Ω fails
    let bad = build(&|i, j| ((i + j).rem_euclid(2)) as u64, &|_, _| 0);
    assert!(!check_weak_property(&bad, &wrapper, &opts).unwrap());
    // β_0 constant is not a periodized permutation along (1, 0)
    let bad = build(&|_, _| 1, &|_, _| 1);
    assert!(!check_weak_property(&bad, &wrapper, &opts).unwrap());
    assert!(matches!(
        compile_s_to_tiling(&s, 1 << 16),
        Err(forge_core::Error::CapExceeded { .. })
    ));
}
