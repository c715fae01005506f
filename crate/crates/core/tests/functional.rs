use forge_core::functional::*;
use forge_core::group::{GroupElement, GroupSpec, PeriodLattice};
use forge_core::tiling::SolveOptions;

fn cube() -> GroupSpec {
    GroupSpec::finite(vec![2, 2, 2])
}

fn trivial() -> PeriodLattice {
    PeriodLattice::trivial()
}

fn all_functions(g: &GroupSpec, moduli: &[u64]) -> Vec<FunctionTable> {
    let lat = trivial();
    let cells = forge_core::group::Quotient::new(g, &lat).unwrap().index();
    let mut per_cell = vec![];
    for_each_point(moduli, |y| per_cell.push(y.to_vec()));
    let k = per_cell.len();
    let total = k.pow(cells as u32);
    (0..total)
        .map(|mut n| {
            let values = (0..cells)
                .map(|_| {
                    let v = per_cell[n % k].clone();
                    n /= k;
                    v
                })
                .collect();
            FunctionTable { group: g.clone(), lattice: lat.clone(), values }
        })
        .collect()
}

/// (e,{a,b})-boolean by definition: two values of opposite parity, alternating under e.
fn is_boolean(f: &FunctionTable, e: &[i64], m: u64) -> bool {
    let q = f.quotient().unwrap();
    let a = f.values[0][0];
    let b = f.at(&q, &q.rep(0).0.iter().zip(e).map(|(x, y)| x + y).collect::<Vec<_>>())[0];
    if (a + b).is_multiple_of(2) {
        return false;
    }
    (0..q.index()).all(|c| {
        let x = q.rep(c).0;
        let xe: Vec<i64> = x.iter().zip(e).map(|(p, r)| p + r).collect();
        let v = f.values[c][0];
        (v == a || v == b) && f.at(&q, &xe)[0] == (a + b + m - v) % m
    })
}

#[test]
fn boolean_compiles_to_exactly_the_boolean_functions() {
    let g = cube();
    let e = vec![1, 0, 0];
    let sys = compile_property(&PropertySpec::Boolean { domain: g.clone(), e: e.clone(), m: 2 }).unwrap();
    let sys = sys.system();
    for f in all_functions(&g, &[4]) {
        assert_eq!(check_system(&f, sys).unwrap(), is_boolean(&f, &e, 4));
    }
}

fn p_omega() -> ExistentialWrapper {
    compile_property(&PropertySpec::SymmetricBooleanConstraint {
        domain: cube(),
        e: vec![1, 0, 0],
        e_prime: vec![0, 1, 0],
        e_dprime: vec![0, 0, 1],
        m: 4,
        w: 3,
        omega: Omega::NotAllEqual,
        cap: 16,
    })
    .unwrap()
    .into_wrapper()
}

fn tuple(bits: impl Fn(&GroupElement) -> [u64; 3], a: [u64; 3], b: u64) -> FunctionTable {
    FunctionTable::from_fn(&cube(), &trivial(), |x| {
        let t = bits(x);
        (0..3).map(|i| (a[i] + b * t[i]) % 16).collect()
    })
    .unwrap()
}

#[test]
fn p_omega_accepts_and_rejects() {
    let wr = p_omega();
    let opts = SearchOptions::default();
    // Normalized booleans depend only on the e-coordinate.
    let good = tuple(|x| { let r = x.0[0] as u64; [r, 1 - r, r] }, [3, 8, 0], 5);
    assert!(check_weak_property(&good, &wr, &opts).unwrap());
    let bad = tuple(|x| { let r = x.0[0] as u64; [r, r, r] }, [3, 8, 0], 5);
    assert!(!check_weak_property(&bad, &wr, &opts).unwrap());
}

#[test]
fn clock_via_tiling_on_z8() {
    let g = GroupSpec::cyclic(8);
    let c = compile_property(&PropertySpec::Clock { domain: g, n: 4, step: None }).unwrap();
    let sols = solve_via_tiling(c.system(), &trivial(), &SolveOptions::default()).unwrap();
    assert_eq!(sols.len(), 4);
}
