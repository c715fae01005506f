//! Checks on rigid partitions, stacking, the property compiler and the box tile.

use std::collections::{BTreeSet, HashSet};

use forge_core::functional::*;
use forge_core::group::{GroupElement, GroupSpec, PeriodLattice, Quotient};
use forge_core::rigid::*;
use forge_core::tiling::{solve_tilings, verify_tiling, SolveOptions, Tile, TilingSystem};
use num_rational::BigRational;
use num_traits::One;

use crate::oracle::{force_compat_counterexamples, in_rigid_box_tile, is_rigid, tiles_exactly};
use crate::{ensure, lib, CheckResult};

pub fn rigid_partitions() -> CheckResult {
    let mut notes = vec![];
    for m in 1..=4usize {
        let p = lib(build_rigid_partition(m, 0))?;
        ensure(p.n <= 1 << 12, || format!("M = {m}: N = {} exceeds 2^12", p.n))?;
        ensure(lib(verify_rigid_partition(&p))?, || format!("M = {m}: library rejects its own partition"))?;
        let parts: Vec<Vec<u64>> = p.parts.iter().map(|s| s.iter().copied().collect()).collect();
        let mut all: Vec<u64> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        ensure(all == (0..p.n).collect::<Vec<_>>() && parts.len() == m, || {
            format!("M = {m}: not a partition of Z/{}Z into {m} parts", p.n)
        })?;
        ensure(is_rigid(p.n, &parts), || format!("M = {m}: partition of Z/{}Z is not rigid", p.n))?;
        notes.push(format!("M={m}: N={}", p.n));
    }
    ensure(lib(exhaustive_rigid_partitions(2, 4))?.is_empty(), || {
        "library finds an M = 2 rigid partition of Z/4Z".into()
    })?;
    for mask in 1..15u64 {
        let e1: Vec<u64> = (0..4).filter(|x| mask >> x & 1 == 1).collect();
        let e2: Vec<u64> = (0..4).filter(|x| mask >> x & 1 == 0).collect();
        ensure(!is_rigid(4, &[e1.clone(), e2.clone()]), || {
            format!("{e1:?}, {e2:?} is a rigid partition of Z/4Z")
        })?;
    }
    Ok(format!("{}; no M = 2 partition of Z/4Z", notes.join(", ")))
}

fn subsets_tiling(moduli: &[u64], tiles: &[Vec<Vec<u64>>], size: usize) -> BTreeSet<Vec<Vec<u64>>> {
    let mut points: Vec<Vec<u64>> = vec![vec![]];
    for &m in moduli {
        points = points
            .into_iter()
            .flat_map(|p| (0..m).map(move |v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    let mut out = BTreeSet::new();
    let mut chosen = vec![];
    fn rec(
        points: &[Vec<u64>],
        start: usize,
        size: usize,
        chosen: &mut Vec<Vec<u64>>,
        moduli: &[u64],
        tiles: &[Vec<Vec<u64>>],
        out: &mut BTreeSet<Vec<Vec<u64>>>,
    ) {
        if chosen.len() == size {
            if tiles.iter().all(|f| tiles_exactly(moduli, chosen, f)) {
                out.insert(chosen.clone());
            }
            return;
        }
        for k in start..points.len() {
            chosen.push(points[k].clone());
            rec(points, k + 1, size, chosen, moduli, tiles, out);
            chosen.pop();
        }
    }
    rec(&points, 0, size, &mut chosen, moduli, tiles, &mut out);
    out
}

fn members(a: &forge_core::tiling::PeriodicSet) -> Vec<Vec<u64>> {
    a.members
        .iter()
        .map(|m| m.0.iter().map(|&v| v as u64).collect())
        .collect()
}

pub fn stacking() -> CheckResult {
    let z4 = GroupSpec::cyclic(4);
    let f1 = vec![vec![0u64], vec![1]];
    let f2 = vec![vec![0u64], vec![3]];
    let as_tile = |f: &[Vec<u64>]| Tile::new(z4.clone(), f.iter().map(|v| vec![v[0] as i64]));
    let system = lib(TilingSystem::new(z4.clone(), vec![lib(as_tile(&f1))?, lib(as_tile(&f2))?]))?;
    let opts = SolveOptions::default();
    let direct: BTreeSet<Vec<Vec<u64>>> = lib(solve_tilings(&system, &PeriodLattice::trivial(), &opts))?
        .iter()
        .map(members)
        .collect();
    let brute = subsets_tiling(&[4], &[f1.clone(), f2.clone()], 2);
    let expected: BTreeSet<Vec<Vec<u64>>> =
        [vec![vec![0], vec![2]], vec![vec![1], vec![3]]].into_iter().collect();
    ensure(direct == expected && brute == expected, || {
        format!("two-tile solutions: solver {direct:?}, brute force {brute:?}")
    })?;

    let p = lib(build_rigid_partition(2, 0))?;
    let n = p.n;
    let stacked = lib(stack_system(&system, &p))?;
    let mut own: BTreeSet<Vec<i64>> = BTreeSet::new();
    for (f, part) in [&f1, &f2].iter().zip(&p.parts) {
        for x in f.iter() {
            for &e in part {
                own.insert(vec![x[0] as i64, e as i64]);
            }
        }
    }
    let got: BTreeSet<Vec<i64>> = stacked.elements.iter().map(|e| e.0.clone()).collect();
    ensure(got == own, || "stacked tile differs from ⊎ F_m × E_m".into())?;
    ensure(own.len() == 2 * n as usize, || format!("|F̃| = {}, expected {}", own.len(), 2 * n))?;

    let big = z4.product(&GroupSpec::cyclic(n));
    let single = lib(TilingSystem::new(big.clone(), vec![stacked.clone()]))?;
    let solved: BTreeSet<Vec<Vec<u64>>> = lib(solve_tilings(&single, &PeriodLattice::trivial(), &opts))?
        .iter()
        .map(members)
        .collect();
    let tile: Vec<Vec<u64>> = own.iter().map(|v| v.iter().map(|&c| c as u64).collect()).collect();
    let brute = subsets_tiling(&[4, n], &[tile], 2);
    ensure(solved == brute, || {
        format!("stacked solutions: solver {} vs brute force {}", solved.len(), brute.len())
    })?;
    let mut projections: BTreeSet<Vec<Vec<u64>>> = BTreeSet::new();
    for a in &solved {
        let proj: BTreeSet<Vec<u64>> = a.iter().map(|x| vec![x[0]]).collect();
        ensure(proj.len() == a.len(), || format!("{a:?} does not project injectively"))?;
        let proj: Vec<Vec<u64>> = proj.into_iter().collect();
        ensure(expected.contains(&proj), || format!("{a:?} projects to {proj:?}"))?;
        projections.insert(proj);
    }
    ensure(projections == expected, || format!("projections {projections:?}"))?;
    Ok(format!(
        "N = {n}, |F̃| = {}, {} stacked solutions project onto {{0,2}}, {{1,3}}",
        own.len(),
        solved.len()
    ))
}

/// All functions on `points` with values in `moduli`, as per-point value vectors.
fn all_functions(points: usize, moduli: &[u64]) -> Vec<Vec<Vec<u64>>> {
    let mut values: Vec<Vec<u64>> = vec![vec![]];
    for &m in moduli {
        values = values
            .into_iter()
            .flat_map(|p| (0..m).map(move |v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    let mut out: Vec<Vec<Vec<u64>>> = vec![vec![]];
    for _ in 0..points {
        out = out
            .into_iter()
            .flat_map(|f| values.iter().map(move |v| [f.clone(), vec![v.clone()]].concat()))
            .collect();
    }
    out
}

struct Case {
    name: &'static str,
    property: PropertySpec,
    lattice: PeriodLattice,
    /// Representatives of the domain modulo the lattice, in the oracle's own order.
    points: Vec<Vec<i64>>,
    /// Index of the representative of any domain element.
    reduce: fn(&[i64]) -> usize,
    moduli: Vec<u64>,
    /// The property, read from the definition: `f(x)` is the value tuple at `x`.
    holds: fn(Values) -> bool,
}

type Values<'a> = &'a dyn Fn(&[i64]) -> Vec<u64>;

fn z8(x: &[i64]) -> usize {
    x[0].rem_euclid(8) as usize
}

fn z4(x: &[i64]) -> usize {
    x[0].rem_euclid(4) as usize
}

fn z2(x: &[i64]) -> usize {
    x[0].rem_euclid(2) as usize
}

fn cube(x: &[i64]) -> usize {
    (x[0].rem_euclid(2) * 4 + x[1].rem_euclid(2) * 2 + x[2].rem_euclid(2)) as usize
}

/// `(Z/2)^3` modulo the third generator.
fn square(x: &[i64]) -> usize {
    (x[0].rem_euclid(2) * 2 + x[1].rem_euclid(2)) as usize
}

/// `(e, {a, b})`-boolean on `(Z/2)^3` with `e` the first generator.
fn boolean(f: &dyn Fn(&[i64]) -> Vec<u64>, modulus: u64) -> bool {
    let a = f(&[0, 0, 0])[0];
    let b = f(&[1, 0, 0])[0];
    if (a + b).is_multiple_of(2) {
        return false;
    }
    (0..8).all(|k| {
        let x = [k >> 2 & 1, k >> 1 & 1, k & 1];
        let v = f(&x)[0];
        let shifted = f(&[x[0] + 1, x[1], x[2]])[0];
        (v == a || v == b) && shifted == (a + b + modulus - v) % modulus
    })
}

fn cases() -> Vec<Case> {
    let cyclic_points = |n: i64| (0..n).map(|x| vec![x]).collect::<Vec<_>>();
    let cube_points: Vec<Vec<i64>> = (0..8).map(|k| vec![k >> 2 & 1, k >> 1 & 1, k & 1]).collect();
    let g3 = GroupSpec::finite(vec![2, 2, 2]);
    vec![
        Case {
            name: "Clock(4) on Z/8",
            property: PropertySpec::Clock { domain: GroupSpec::cyclic(8), n: 4, step: None },
            lattice: PeriodLattice::trivial(),
            points: cyclic_points(8),
            reduce: z8,
            moduli: vec![4],
            holds: |f| (0..8).all(|x| f(&[x + 1])[0] == (f(&[x])[0] + 1) % 4),
        },
        Case {
            name: "PeriodizedPermutation(4) on Z/8",
            property: PropertySpec::PeriodizedPermutation { domain: GroupSpec::cyclic(8), n: 4, step: None },
            lattice: PeriodLattice::trivial(),
            points: cyclic_points(8),
            reduce: z8,
            moduli: vec![4],
            holds: |f| {
                (0..8).all(|x| (0..4).map(|k| f(&[x + k])[0]).collect::<HashSet<_>>().len() == 4)
            },
        },
        Case {
            name: "LinearConstraint(1,-1; 2) on Z/2",
            property: PropertySpec::LinearConstraint {
                domain: GroupSpec::cyclic(2),
                coefficients: vec![1, -1],
                modulus: 2,
            },
            lattice: PeriodLattice::trivial(),
            points: cyclic_points(2),
            reduce: z2,
            moduli: vec![2, 2],
            holds: |f| {
                let d = |x: i64| (f(&[x])[0] + 2 - f(&[x])[1]) % 2;
                d(0) == d(1)
            },
        },
        Case {
            name: "LinearConstraint(1,2; 4) on Z/4",
            property: PropertySpec::LinearConstraint {
                domain: GroupSpec::cyclic(4),
                coefficients: vec![1, 2],
                modulus: 4,
            },
            lattice: PeriodLattice::trivial(),
            points: cyclic_points(4),
            reduce: z4,
            moduli: vec![4, 4],
            holds: |f| {
                let s = |x: i64| (f(&[x])[0] + 2 * f(&[x])[1]) % 4;
                (1..4).all(|x| s(x) == s(0))
            },
        },
        Case {
            name: "Boolean(e, M=2) on (Z/2)^3",
            property: PropertySpec::Boolean { domain: g3.clone(), e: vec![1, 0, 0], m: 2 },
            lattice: PeriodLattice::trivial(),
            points: cube_points,
            reduce: cube,
            moduli: vec![4],
            holds: |f| boolean(f, 4),
        },
        Case {
            name: "P_Ω (W=1, Ω full, M=3) on (Z/2)^3, e''-periodic",
            property: PropertySpec::SymmetricBooleanConstraint {
                domain: g3,
                e: vec![1, 0, 0],
                e_prime: vec![0, 1, 0],
                e_dprime: vec![0, 0, 1],
                m: 3,
                w: 1,
                omega: Omega::Full,
                cap: 16,
            },
            lattice: PeriodLattice::new(vec![GroupElement(vec![0, 0, 1])]),
            points: (0..4).map(|k| vec![k >> 1 & 1, k & 1, 0]).collect(),
            reduce: square,
            moduli: vec![8],
            holds: |f| {
                boolean(f, 8)
                    && (0..8).all(|k| {
                        let x = [k >> 2 & 1, k >> 1 & 1, k & 1];
                        f(&x) == f(&[x[0], x[1] + 1, x[2]])
                    })
            },
        },
    ]
}

fn run_case(c: &Case) -> Result<String, String> {
    let compiled = lib(compile_property(&c.property))?;
    let visible = compiled.visible();
    let sys = compiled.system();
    ensure(sys.codomain.moduli[..visible] == c.moduli[..], || {
        format!("{}: visible codomain {:?}", c.name, &sys.codomain.moduli[..visible])
    })?;
    let candidates = all_functions(c.points.len(), &c.moduli);
    ensure(candidates.len() <= 1 << 16, || format!("{}: {} functions", c.name, candidates.len()))?;
    let brute: BTreeSet<Vec<Vec<u64>>> = candidates
        .into_iter()
        .filter(|f| (c.holds)(&|x: &[i64]| f[(c.reduce)(x)].clone()))
        .collect();

    let opts = SolveOptions::default();
    let q = lib(Quotient::new(&c.property_domain(), &c.lattice))?;
    let solved: BTreeSet<Vec<Vec<u64>>> = lib(solve_via_tiling(sys, &c.lattice, &opts))?
        .iter()
        .map(|t| {
            c.points
                .iter()
                .map(|x| t.at(&q, x)[..visible].to_vec())
                .collect()
        })
        .collect();
    ensure(solved == brute, || {
        format!("{}: tiling gives {} solutions, enumeration {}", c.name, solved.len(), brute.len())
    })?;

    // each enumerated solution's graph tiles with every tile of the compiled system
    if visible == sys.codomain.len() {
        let tiling = lib(functional_to_tiling(sys, DEFAULT_TILE_CAP))?;
        for f in &brute {
            let table = lib(FunctionTable::from_fn(&c.property_domain(), &c.lattice, |x| {
                f[(c.reduce)(&x.0)].clone()
            }))?;
            let graph = lib(function_to_graph(&table, &sys.codomain))?;
            for k in 0..tiling.tiles.len() {
                let r = lib(verify_tiling(&graph, &tiling.tile(k)))?;
                ensure(r.exact_tiling, || format!("{}: graph fails tile {k}", c.name))?;
            }
        }
    }
    Ok(format!("{}: {} solutions", c.name, brute.len()))
}

impl Case {
    fn property_domain(&self) -> GroupSpec {
        match &self.property {
            PropertySpec::Clock { domain, .. }
            | PropertySpec::PeriodizedPermutation { domain, .. }
            | PropertySpec::LinearConstraint { domain, .. }
            | PropertySpec::Boolean { domain, .. }
            | PropertySpec::SymmetricBooleanConstraint { domain, .. } => domain.clone(),
            _ => unreachable!("corpus cases use a fixed set of properties"),
        }
    }
}

pub fn compiler() -> CheckResult {
    let mut notes = vec![];
    for c in cases() {
        notes.push(run_case(&c)?);
    }
    Ok(notes.join("; "))
}

pub fn force_compat() -> CheckResult {
    for m in [2u32, 3] {
        ensure(lib(verify_force_compat(m))?, || format!("library finds a counterexample at M = {m}"))?;
        let bad = force_compat_counterexamples(m);
        ensure(bad == 0, || format!("M = {m}: {bad} counterexamples by direct enumeration"))?;
    }
    Ok("M = 2, 3: no counterexamples (library and unnormalized enumeration)".into())
}

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Number of `t ∈ period·Z^d` with `p - t` in the set, for `membership` over `[-3, 8)^d` shifts.
fn cover_count(p: &[f64], period: i64, member: &dyn Fn(&[f64]) -> bool) -> usize {
    let d = p.len();
    let shifts: Vec<i64> = (-3..8).map(|k| k * period).collect();
    let mut count = 0;
    let mut idx = vec![0usize; d];
    loop {
        let q: Vec<f64> = p.iter().zip(&idx).map(|(v, &k)| v - shifts[k] as f64).collect();
        count += usize::from(member(&q));
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < shifts.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            return count;
        }
    }
}

pub fn continuous_lift() -> CheckResult {
    let (eps, x) = (r(1, 10), vec![r(1, 2), r(1, 2)]);
    let boxes = lib(build_rigid_tile_boxes(2, &eps, &x))?;
    ensure(boxes.measure() == BigRational::one(), || {
        format!("measure of R_2 is {}", format_rational(&boxes.measure()))
    })?;
    ensure(lib(verify_box_lattice_tiling(&boxes, &[(0, 4), (0, 4)]))?, || {
        "R_2 fails to tile [0,4]^2 under Z^2".into()
    })?;
    // every box face lies on the grid (1/10)Z, so cell centres decide coverage
    let member2 = |p: &[f64]| in_rigid_box_tile(p, 0.1, &[0.5, 0.5]);
    let centre = |k: i64| (k as f64 + 0.5) / 10.0;
    let mut inside = 0;
    for u in 0..20 {
        for v in 0..20 {
            inside += usize::from(member2(&[centre(u), centre(v)]));
        }
    }
    ensure(inside == 100, || format!("R_2 contains {inside} of the 1/100 cells, expected 100"))?;
    for u in 0..40 {
        for v in 0..40 {
            let c = cover_count(&[centre(u), centre(v)], 1, &member2);
            ensure(c == 1, || format!("cell centre ({}, {}) covered {c} times", centre(u), centre(v)))?;
        }
    }

    let r1 = lib(build_rigid_tile_boxes(1, &eps, &[r(1, 2)]))?;
    let f = lib(Tile::new(GroupSpec::free(1), vec![vec![0], vec![1]]))?;
    let sigma = lib(lift_discrete_tile(&f, &r1))?;
    ensure(sigma.measure() == r(2, 1), || "the lift does not have measure 2".into())?;
    ensure(lib(verify_box_periodic_tiling(&sigma, &[2], &[(0, 4)]))?, || {
        "the lift fails to tile [0,4] under 2Z".into()
    })?;
    let member1 = |p: &[f64]| [0.0, 1.0].iter().any(|s| in_rigid_box_tile(&[p[0] - s], 0.1, &[0.5]));
    for u in 0..40 {
        let c = cover_count(&[centre(u)], 2, &member1);
        ensure(c == 1, || format!("point {} covered {c} times by the lift", centre(u)))?;
    }
    Ok("R_2 has measure 1 and tiles [0,4]^2; {0,1} ⊕ R_1 tiles [0,4] under 2Z".into())
}
