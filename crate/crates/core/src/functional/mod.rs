//! Functional equations `⊎_j (α(x + h_j) + E_j) = H` over a finite quotient of `G`,
//! a library of properties compiled to them, and the reduction to tiling equations.

mod property;
mod search;
mod sets;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{GroupElement, GroupSpec, PeriodLattice, Quotient};
use crate::tiling::{solve_tilings_with, PeriodicSet, SolveOptions, Tile, TilingSystem};

pub use property::{
    compile_property, verify_force_compat, Compiled, ExistentialWrapper, Omega, PropertySpec,
};
pub use search::{check_weak_property, find_extension, SearchOptions, DEFAULT_NODE_CAP};
pub use sets::{add_mod, for_each_point, group_size, sub_mod, Congruence, ValueSet};

use sets::{pair_rule, PairRule};

/// `∏ Z/m_w`, one named factor per tuple index `w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codomain {
    pub moduli: Vec<u64>,
    pub names: Vec<String>,
}

impl Codomain {
    pub fn new(moduli: Vec<u64>) -> Self {
        let names = (1..=moduli.len()).map(|i| format!("a{i}")).collect();
        Codomain { moduli, names }
    }

    pub fn named(names: Vec<String>, moduli: Vec<u64>) -> Self {
        Codomain { moduli, names }
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn size(&self) -> BigUint {
        group_size(&self.moduli)
    }

    pub fn push(&mut self, name: impl Into<String>, modulus: u64) -> usize {
        self.names.push(name.into());
        self.moduli.push(modulus);
        self.moduli.len() - 1
    }

    pub fn group(&self) -> GroupSpec {
        GroupSpec::finite(self.moduli.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub shift: Vec<i64>,
    pub set: ValueSet,
}

/// One equation. It reads only the codomain factors listed in `support`; the sets
/// `E_j` live in the product of those factors and are implicitly lifted to all of `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalEquation {
    pub support: Vec<usize>,
    pub terms: Vec<Term>,
}

impl FunctionalEquation {
    pub fn new(support: Vec<usize>, terms: Vec<(Vec<i64>, ValueSet)>) -> Self {
        FunctionalEquation {
            support,
            terms: terms
                .into_iter()
                .map(|(shift, set)| Term { shift, set })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalSystem {
    pub domain: GroupSpec,
    pub codomain: Codomain,
    pub equations: Vec<FunctionalEquation>,
}

impl FunctionalSystem {
    pub fn new(domain: GroupSpec, codomain: Codomain) -> Self {
        FunctionalSystem {
            domain,
            codomain,
            equations: vec![],
        }
    }

    pub fn push(&mut self, eq: FunctionalEquation) {
        self.equations.push(eq);
    }

    pub fn local_moduli(&self, eq: &FunctionalEquation) -> Vec<u64> {
        eq.support.iter().map(|&w| self.codomain.moduli[w]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.codomain.names.len() != self.codomain.moduli.len() {
            return invalid("codomain names and moduli differ in length");
        }
        if self.codomain.moduli.contains(&0) {
            return invalid("codomain factors must be finite");
        }
        for (i, eq) in self.equations.iter().enumerate() {
            let distinct: BTreeSet<_> = eq.support.iter().collect();
            if distinct.len() != eq.support.len()
                || eq.support.iter().any(|&w| w >= self.codomain.len())
            {
                return invalid(format!("equation {i} has a bad support {:?}", eq.support));
            }
            let moduli = self.local_moduli(eq);
            for t in &eq.terms {
                if t.shift.len() != self.domain.dim() {
                    return Err(Error::GroupMismatch(format!(
                        "shift {:?} in equation {i} is not in {}",
                        t.shift, self.domain
                    )));
                }
                t.set.validate(&moduli)?;
                if t.set.size(&moduli)? == BigUint::from(0u8) {
                    return invalid(format!("equation {i} has an empty set"));
                }
            }
        }
        Ok(())
    }

    /// Conjunction: both systems over the same `(G, H)`.
    pub fn and(mut self, other: FunctionalSystem) -> Result<FunctionalSystem> {
        if self.domain != other.domain || self.codomain.moduli != other.codomain.moduli {
            return Err(Error::GroupMismatch("conjunction of systems over different groups".into()));
        }
        self.equations.extend(other.equations);
        Ok(self)
    }

    /// Lift: factor `w` of `self` becomes factor `placement[w]` of `target`.
    pub fn lift(&self, target: &Codomain, placement: &[usize]) -> Result<FunctionalSystem> {
        if placement.len() != self.codomain.len() {
            return invalid("placement must map every factor");
        }
        for (w, &p) in placement.iter().enumerate() {
            if p >= target.len() || target.moduli[p] != self.codomain.moduli[w] {
                return Err(Error::GroupMismatch(format!("factor {w} cannot be placed at {p}")));
            }
        }
        let equations = self
            .equations
            .iter()
            .map(|eq| FunctionalEquation {
                support: eq.support.iter().map(|&w| placement[w]).collect(),
                terms: eq.terms.clone(),
            })
            .collect();
        Ok(FunctionalSystem {
            domain: self.domain.clone(),
            codomain: target.clone(),
            equations,
        })
    }

    /// Pullback along `G' → G`, given by the images of the standard generators of `G'`.
    pub fn pullback(&self, domain: &GroupSpec, embedding: &[Vec<i64>]) -> Result<FunctionalSystem> {
        if embedding.len() != self.domain.dim() {
            return invalid("embedding needs one image per coordinate of the subgroup");
        }
        for (i, img) in embedding.iter().enumerate() {
            domain.element(img)?;
            if let Some(n) = self.domain.modulus(i) {
                if n > 0 && domain.scale(n as i64, &domain.element(img)?)? != domain.zero() {
                    return invalid(format!("image of generator {} has order not dividing {n}", i + 1));
                }
            }
        }
        let map = |h: &[i64]| -> Result<Vec<i64>> {
            let mut acc = domain.zero();
            for (c, img) in h.iter().zip(embedding) {
                acc = domain.add(&acc, &domain.scale(*c, &domain.element(img)?)?)?;
            }
            Ok(acc.0)
        };
        let mut equations = vec![];
        for eq in &self.equations {
            let terms = eq
                .terms
                .iter()
                .map(|t| {
                    Ok(Term {
                        shift: map(&t.shift)?,
                        set: t.set.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            equations.push(FunctionalEquation {
                support: eq.support.clone(),
                terms,
            });
        }
        Ok(FunctionalSystem {
            domain: domain.clone(),
            codomain: self.codomain.clone(),
            equations,
        })
    }
}

/// A function `G/Λ → ∏ Z/m_w`, stored by quotient cell (lexicographic representative order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionTable {
    pub group: GroupSpec,
    pub lattice: PeriodLattice,
    pub values: Vec<Vec<u64>>,
}

impl FunctionTable {
    pub fn from_fn(
        group: &GroupSpec,
        lattice: &PeriodLattice,
        f: impl Fn(&GroupElement) -> Vec<u64>,
    ) -> Result<Self> {
        let q = Quotient::new(group, lattice)?;
        Ok(FunctionTable {
            group: group.clone(),
            lattice: lattice.clone(),
            values: (0..q.index()).map(|c| f(&q.rep(c))).collect(),
        })
    }

    pub fn quotient(&self) -> Result<Quotient> {
        let q = Quotient::new(&self.group, &self.lattice)?;
        if q.index() != self.values.len() {
            return invalid(format!(
                "function has {} values but the quotient has {} cells",
                self.values.len(),
                q.index()
            ));
        }
        Ok(q)
    }

    /// Value at an arbitrary group element.
    pub fn at(&self, q: &Quotient, x: &[i64]) -> &[u64] {
        &self.values[q.cell_of(x)]
    }

    pub fn check_codomain(&self, moduli: &[u64]) -> Result<()> {
        for v in &self.values {
            if v.len() != moduli.len() || v.iter().zip(moduli).any(|(a, m)| a >= m) {
                return invalid(format!("value {v:?} is not in ∏ Z/{moduli:?}"));
            }
        }
        Ok(())
    }
}

/// An equation with its set sizes, pair rules and shift tables resolved for one quotient.
pub(crate) struct PreparedEquation {
    pub support: Vec<usize>,
    pub moduli: Vec<u64>,
    pub shifts: Vec<Vec<usize>>,
    /// `Σ |E_j| = |H_S|`; an unbalanced equation has no solutions.
    pub balanced: bool,
    pub rules: Vec<(usize, usize, PairRule)>,
}

impl PreparedEquation {
    pub fn new(sys: &FunctionalSystem, eq: &FunctionalEquation, q: &Quotient) -> Result<Self> {
        let moduli = sys.local_moduli(eq);
        let mut total = BigUint::from(0u8);
        for t in &eq.terms {
            total += t.set.size(&moduli)?;
        }
        let balanced = total == group_size(&moduli);
        let mut rules = vec![];
        if balanced {
            for j in 0..eq.terms.len() {
                for k in j + 1..eq.terms.len() {
                    let r = pair_rule(&eq.terms[j].set, &eq.terms[k].set, &moduli)?;
                    if !matches!(r, PairRule::Never) {
                        rules.push((j, k, r));
                    }
                }
            }
        }
        Ok(PreparedEquation {
            support: eq.support.clone(),
            moduli,
            shifts: eq.terms.iter().map(|t| q.shift_table(&t.shift)).collect(),
            balanced,
            rules,
        })
    }

    /// Checks the equation at cell `x`; `value(cell, w)` reads factor `w`.
    pub fn holds_at(
        &self,
        eq: &FunctionalEquation,
        x: usize,
        value: impl Fn(usize, usize) -> u64,
    ) -> Result<bool> {
        if !self.balanced {
            return Ok(false);
        }
        let vals: Vec<Vec<u64>> = self
            .shifts
            .iter()
            .map(|tab| self.support.iter().map(|&w| value(tab[x], w)).collect())
            .collect();
        for (j, k, rule) in &self.rules {
            let d = sub_mod(&vals[j.to_owned()], &vals[k.to_owned()], &self.moduli);
            let hit = match rule {
                PairRule::Always => true,
                PairRule::Never => false,
                PairRule::IffIn(s) => s.contains(&self.moduli, &d),
                PairRule::IffNotIn(s) => !s.contains(&self.moduli, &d),
                PairRule::Differences(t) => t.contains(&d),
                PairRule::Scan => eq.terms[*j]
                    .set
                    .intersects_shifted(&eq.terms[*k].set, &d, &self.moduli)?,
            };
            if hit {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Whether `α` satisfies `eq` at every point of its quotient.
pub fn check_equation(
    alpha: &FunctionTable,
    sys: &FunctionalSystem,
    eq: &FunctionalEquation,
) -> Result<bool> {
    let q = alpha.quotient()?;
    alpha.check_codomain(&sys.codomain.moduli)?;
    check_domain(&q, sys)?;
    let p = PreparedEquation::new(sys, eq, &q)?;
    for x in 0..q.index() {
        if !p.holds_at(eq, x, |c, w| alpha.values[c][w])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First `(equation, cell)` where `α` fails, if any.
pub fn first_violation(alpha: &FunctionTable, sys: &FunctionalSystem) -> Result<Option<(usize, GroupElement)>> {
    sys.validate()?;
    let q = alpha.quotient()?;
    alpha.check_codomain(&sys.codomain.moduli)?;
    check_domain(&q, sys)?;
    for (i, eq) in sys.equations.iter().enumerate() {
        let p = PreparedEquation::new(sys, eq, &q)?;
        for x in 0..q.index() {
            if !p.holds_at(eq, x, |c, w| alpha.values[c][w])? {
                return Ok(Some((i, q.rep(x))));
            }
        }
    }
    Ok(None)
}

pub fn check_system(alpha: &FunctionTable, sys: &FunctionalSystem) -> Result<bool> {
    Ok(first_violation(alpha, sys)?.is_none())
}

fn check_domain(q: &Quotient, sys: &FunctionalSystem) -> Result<()> {
    if q.group() != &sys.domain {
        return Err(Error::GroupMismatch(format!(
            "function on {} but system over {}",
            q.group(),
            sys.domain
        )));
    }
    Ok(())
}

/// Default bound on the number of tile elements `functional_to_tiling` will write out.
pub const DEFAULT_TILE_CAP: usize = 1 << 20;

/// The tiling system over `G × H`: the vertical line `{0} × H` plus, per equation,
/// `⊎_j {-h_j} × E_j` with each `E_j` lifted from its support to all of `H`.
pub fn functional_to_tiling(sys: &FunctionalSystem, cap: usize) -> Result<TilingSystem> {
    sys.validate()?;
    let hg = sys.codomain.group();
    let hsize = sys
        .codomain
        .size()
        .to_usize()
        .filter(|&s| s <= cap)
        .ok_or_else(|| Error::CapExceeded {
            what: "codomain size".into(),
            required: sys.codomain.size().to_u128().unwrap_or(u128::MAX),
            cap: cap as u128,
        })?;
    let g = &sys.domain;
    let big = g.product(&hg);
    let mut all_h = Vec::with_capacity(hsize);
    for_each_point(&sys.codomain.moduli, |y| all_h.push(y.to_vec()));
    let as_i64 = |y: &[u64]| -> Vec<i64> { y.iter().map(|&v| v as i64).collect() };

    let mut tiles = vec![Tile::new(
        big.clone(),
        all_h.iter().map(|y| g.pair(&hg, &g.zero().0, &as_i64(y))),
    )?];
    let mut budget = cap.saturating_sub(hsize);
    for (i, eq) in sys.equations.iter().enumerate() {
        let moduli = sys.local_moduli(eq);
        let mut elements = BTreeSet::new();
        let mut expected = 0usize;
        for t in &eq.terms {
            let neg = g.neg(&g.element(&t.shift)?)?;
            for y in &all_h {
                let local: Vec<u64> = eq.support.iter().map(|&w| y[w]).collect();
                if t.set.contains(&moduli, &local) {
                    if budget == 0 {
                        return Err(Error::CapExceeded {
                            what: "tile elements".into(),
                            required: cap as u128 + 1,
                            cap: cap as u128,
                        });
                    }
                    budget -= 1;
                    expected += 1;
                    elements.insert(GroupElement(g.pair(&hg, &neg.0, &as_i64(y))));
                }
            }
        }
        if elements.len() != expected {
            return Err(Error::Overlap(format!(
                "the pieces {{-h_j}} × E_j of equation {i} overlap"
            )));
        }
        tiles.push(Tile {
            group: big.clone(),
            elements,
        });
    }
    TilingSystem::new(big, tiles)
}

/// The graph `{(x, α(x))}` as a periodic subset of `G × H`.
pub fn function_to_graph(alpha: &FunctionTable, codomain: &Codomain) -> Result<PeriodicSet> {
    let q = alpha.quotient()?;
    alpha.check_codomain(&codomain.moduli)?;
    let hg = codomain.group();
    let big = alpha.group.product(&hg);
    let lattice = alpha.lattice.extend_by(&alpha.group, &hg);
    let members = (0..q.index()).map(|c| {
        let v: Vec<i64> = alpha.values[c].iter().map(|&v| v as i64).collect();
        alpha.group.pair(&hg, &q.rep(c).0, &v)
    });
    PeriodicSet::new(big, lattice, members)
}

/// Inverse of [`function_to_graph`]; errors unless `a` meets every vertical line once.
pub fn graph_to_function(
    a: &PeriodicSet,
    domain: &GroupSpec,
    lattice: &PeriodLattice,
    codomain: &Codomain,
) -> Result<FunctionTable> {
    let q = Quotient::new(domain, lattice)?;
    let hg = codomain.group();
    let mut values: Vec<Option<Vec<u64>>> = vec![None; q.index()];
    for m in &a.members {
        let (x, y) = domain.split(&hg, &m.0);
        let c = q.cell_of(&x);
        if values[c].is_some() {
            return invalid("set meets a vertical line twice");
        }
        values[c] = Some(y.iter().map(|&v| v as u64).collect());
    }
    let values = values
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Invalid("set misses a vertical line".into()))?;
    Ok(FunctionTable {
        group: domain.clone(),
        lattice: lattice.clone(),
        values,
    })
}

/// All Λ-periodic solutions of `sys`, found by solving its tiling system.
pub fn solve_via_tiling(
    sys: &FunctionalSystem,
    lattice: &PeriodLattice,
    opts: &SolveOptions,
) -> Result<Vec<FunctionTable>> {
    let tiling = functional_to_tiling(sys, DEFAULT_TILE_CAP)?;
    let hg = sys.codomain.group();
    let big_lattice = lattice.extend_by(&sys.domain, &hg);
    let mut out = vec![];
    let mut err = None;
    solve_tilings_with(&tiling, &big_lattice, opts, |a| {
        match graph_to_function(&a, &sys.domain, lattice, &sys.codomain) {
            Ok(f) => out.push(f),
            Err(e) => {
                err = Some(e);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    out.sort_by(|a, b| a.values.cmp(&b.values));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clock_system(n: u64, g: GroupSpec) -> FunctionalSystem {
        let mut s = FunctionalSystem::new(g, Codomain::new(vec![n]));
        s.push(FunctionalEquation::new(
            vec![0],
            vec![
                (vec![0], ValueSet::singleton(vec![1])),
                (vec![1], ValueSet::zero(1).complement()),
            ],
        ));
        s
    }

    #[test]
    fn clock_equation_checks() {
        let g = GroupSpec::cyclic(4);
        let sys = clock_system(4, g.clone());
        let lat = PeriodLattice::trivial();
        let id = FunctionTable::from_fn(&g, &lat, |x| vec![x.0[0] as u64]).unwrap();
        assert!(check_equation(&id, &sys, &sys.equations[0]).unwrap());
        let konst = FunctionTable::from_fn(&g, &lat, |_| vec![2]).unwrap();
        assert!(!check_equation(&konst, &sys, &sys.equations[0]).unwrap());
    }

    #[test]
    fn clock_solutions_via_tiling() {
        let g = GroupSpec::cyclic(4);
        let sys = clock_system(4, g.clone());
        let t = functional_to_tiling(&sys, DEFAULT_TILE_CAP).unwrap();
        assert_eq!(t.tiles.len(), 2);
        let sols = solve_via_tiling(&sys, &PeriodLattice::trivial(), &SolveOptions::default()).unwrap();
        assert_eq!(sols.len(), 4);
        for s in &sols {
            let a = s.values[0][0];
            for (x, v) in s.values.iter().enumerate() {
                assert_eq!(v[0], (a + x as u64) % 4);
            }
        }
    }

    #[test]
    fn empty_system_solutions_are_all_graphs() {
        let g = GroupSpec::cyclic(3);
        let sys = FunctionalSystem::new(g, Codomain::new(vec![2]));
        let sols = solve_via_tiling(&sys, &PeriodLattice::trivial(), &SolveOptions::default()).unwrap();
        assert_eq!(sols.len(), 8);
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let g = GroupSpec::cyclic(4);
        let mut sys = FunctionalSystem::new(g, Codomain::new(vec![2]));
        sys.push(FunctionalEquation::new(
            vec![0],
            vec![
                (vec![1], ValueSet::zero(1)),
                (vec![5], ValueSet::zero(1)),
            ],
        ));
        assert!(matches!(functional_to_tiling(&sys, 1 << 10), Err(Error::Overlap(_))));
    }
}
