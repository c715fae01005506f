//! Existential search: does a tuple extend to a solution of the inner system?
//!
//! Variables are (auxiliary factor, quotient cell) with bitset domains. The search
//! runs forward checking with first-fail variable order and solves independent
//! groups of variables separately. Each auxiliary factor's value at cell 0 is pinned
//! to 0: the equations are invariant under adding a constant to any one factor, so
//! this loses no solutions.

use std::collections::VecDeque;

use super::property::ExistentialWrapper;
use super::{FunctionTable, PreparedEquation};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_NODE_CAP: u64 = 50_000_000;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub node_cap: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

/// True iff `alpha` (the visible factors) extends to a solution of `wrapper.inner`.
pub fn check_weak_property(
    alpha: &FunctionTable,
    wrapper: &ExistentialWrapper,
    opts: &SearchOptions,
) -> Result<bool> {
    Ok(find_extension(alpha, wrapper, opts)?.is_some())
}

/// A full tuple extending `alpha`, if one exists.
pub fn find_extension(
    alpha: &FunctionTable,
    wrapper: &ExistentialWrapper,
    opts: &SearchOptions,
) -> Result<Option<FunctionTable>> {
    let sys = &wrapper.inner;
    sys.validate()?;
    let visible = wrapper.visible;
    if visible > sys.codomain.len() {
        return invalid("wrapper exposes more factors than it has");
    }
    let q = alpha.quotient()?;
    if q.group() != &sys.domain {
        return Err(Error::GroupMismatch(format!(
            "function on {} but system over {}",
            q.group(),
            sys.domain
        )));
    }
    alpha.check_codomain(&sys.codomain.moduli[..visible])?;
    let aux_moduli = &sys.codomain.moduli[visible..];
    if aux_moduli.iter().any(|&m| m > 64) {
        return invalid("auxiliary factors larger than Z/64 are not supported by the search");
    }
    let cells = q.index();
    let n_aux = aux_moduli.len();
    let n_vars = n_aux * cells;
    let var = |w: usize, c: usize| (w - visible) * cells + c;

    let prepared: Vec<PreparedEquation> = sys
        .equations
        .iter()
        .map(|eq| PreparedEquation::new(sys, eq, &q))
        .collect::<Result<_>>()?;
    if cells > 0 && prepared.iter().any(|p| !p.balanced) {
        return Ok(None);
    }

    // One constraint per (equation, cell); its scope is the auxiliary variables it reads.
    let mut constraints = Vec::new();
    let mut watch: Vec<Vec<usize>> = vec![vec![]; n_vars];
    for (ei, p) in prepared.iter().enumerate() {
        for x in 0..cells {
            let mut scope = vec![];
            for tab in &p.shifts {
                for &w in &p.support {
                    if w >= visible {
                        scope.push(var(w, tab[x]));
                    }
                }
            }
            scope.sort_unstable();
            scope.dedup();
            let id = constraints.len();
            for &v in &scope {
                watch[v].push(id);
            }
            constraints.push(Constraint { eq: ei, cell: x, scope });
        }
    }

    let mut st = State {
        alpha,
        visible,
        cells,
        sys_eqs: &sys.equations,
        prepared: &prepared,
        constraints: &constraints,
        watch: &watch,
        domain: (0..n_vars)
            .map(|v| full_mask(aux_moduli[v / cells.max(1)]))
            .collect(),
        value: vec![None; n_vars],
        trail: vec![],
        nodes: 0,
        cap: opts.node_cap,
    };

    for (ci, c) in constraints.iter().enumerate() {
        if c.scope.is_empty() && !st.holds(ci)? {
            return Ok(None);
        }
    }
    for (ci, c) in constraints.iter().enumerate() {
        if c.scope.len() == 1 && !st.filter(ci, c.scope[0])? {
            return Ok(None);
        }
    }
    if cells > 0 {
        for a in 0..n_aux {
            let v = a * cells;
            if st.domain[v] & 1 == 0 || !st.assign(v, 0)? {
                return Ok(None);
            }
        }
    }
    let free: Vec<usize> = (0..n_vars).filter(|&v| st.value[v].is_none()).collect();
    if !st.solve(free)? {
        return Ok(None);
    }
    let values = (0..cells)
        .map(|c| {
            let mut v = alpha.values[c].clone();
            v.extend((0..n_aux).map(|a| st.value[a * cells + c].unwrap_or(0)));
            v
        })
        .collect();
    Ok(Some(FunctionTable {
        group: alpha.group.clone(),
        lattice: alpha.lattice.clone(),
        values,
    }))
}

fn full_mask(m: u64) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

struct Constraint {
    eq: usize,
    cell: usize,
    scope: Vec<usize>,
}

enum Undo {
    Domain(usize, u64),
    Value(usize),
}

struct State<'a> {
    alpha: &'a FunctionTable,
    visible: usize,
    cells: usize,
    sys_eqs: &'a [super::FunctionalEquation],
    prepared: &'a [PreparedEquation],
    constraints: &'a [Constraint],
    watch: &'a [Vec<usize>],
    domain: Vec<u64>,
    value: Vec<Option<u64>>,
    trail: Vec<Undo>,
    nodes: u64,
    cap: u64,
}

impl State<'_> {
    fn read(&self, cell: usize, w: usize, probe: Option<(usize, u64)>) -> u64 {
        if w < self.visible {
            return self.alpha.values[cell][w];
        }
        let v = (w - self.visible) * self.cells + cell;
        match probe {
            Some((pv, val)) if pv == v => val,
            _ => self.value[v].unwrap_or(0),
        }
    }

    fn eval(&self, ci: usize, probe: Option<(usize, u64)>) -> Result<bool> {
        let c = &self.constraints[ci];
        self.prepared[c.eq].holds_at(&self.sys_eqs[c.eq], c.cell, |cell, w| {
            self.read(cell, w, probe)
        })
    }

    fn holds(&self, ci: usize) -> Result<bool> {
        self.eval(ci, None)
    }

    /// Restricts `v` to values satisfying constraint `ci`, all of whose other variables
    /// are assigned. False on wipe-out.
    fn filter(&mut self, ci: usize, v: usize) -> Result<bool> {
        let dom = self.domain[v];
        let mut keep = 0u64;
        let mut bits = dom;
        while bits != 0 {
            let val = bits.trailing_zeros() as u64;
            bits &= bits - 1;
            if self.eval(ci, Some((v, val)))? {
                keep |= 1 << val;
            }
        }
        if keep != dom {
            self.trail.push(Undo::Domain(v, dom));
            self.domain[v] = keep;
        }
        Ok(keep != 0)
    }

    fn assign(&mut self, v: usize, val: u64) -> Result<bool> {
        self.trail.push(Undo::Value(v));
        self.value[v] = Some(val);
        let dom = self.domain[v];
        self.trail.push(Undo::Domain(v, dom));
        self.domain[v] = 1 << val;
        for &ci in &self.watch[v] {
            let mut open = None;
            let mut n_open = 0;
            for &u in &self.constraints[ci].scope {
                if self.value[u].is_none() {
                    n_open += 1;
                    open = Some(u);
                }
            }
            match (n_open, open) {
                (0, _) => {
                    if !self.holds(ci)? {
                        return Ok(false);
                    }
                }
                (1, Some(u))
                    if !self.filter(ci, u)? => {
                        return Ok(false);
                    }
                _ => {}
            }
        }
        Ok(true)
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Domain(v, d) => self.domain[v] = d,
                Undo::Value(v) => self.value[v] = None,
            }
        }
    }

    fn solve(&mut self, vars: Vec<usize>) -> Result<bool> {
        let open: Vec<usize> = vars.into_iter().filter(|&v| self.value[v].is_none()).collect();
        if open.is_empty() {
            return Ok(true);
        }
        let groups = self.split(&open);
        if groups.len() > 1 {
            for g in groups {
                if !self.solve_group(g)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        self.solve_group(open)
    }

    fn solve_group(&mut self, vars: Vec<usize>) -> Result<bool> {
        let &v = vars
            .iter()
            .min_by_key(|&&v| (self.domain[v].count_ones(), v))
            .expect("non-empty group");
        let mut bits = self.domain[v];
        while bits != 0 {
            let val = bits.trailing_zeros() as u64;
            bits &= bits - 1;
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::CapExceeded {
                    what: "existential search nodes".into(),
                    required: self.nodes as u128,
                    cap: self.cap as u128,
                });
            }
            let mark = self.trail.len();
            if self.assign(v, val)? {
                let rest: Vec<usize> = vars.iter().copied().filter(|&u| u != v).collect();
                if self.solve(rest)? {
                    return Ok(true);
                }
            }
            self.undo_to(mark);
        }
        Ok(false)
    }

    /// Connected components of `open` under constraints that still have open variables.
    fn split(&self, open: &[usize]) -> Vec<Vec<usize>> {
        let mut label = std::collections::HashMap::with_capacity(open.len());
        for &v in open {
            label.insert(v, usize::MAX);
        }
        let mut groups = vec![];
        for &start in open {
            if label[&start] != usize::MAX {
                continue;
            }
            let id = groups.len();
            let mut group = vec![];
            let mut queue = VecDeque::from([start]);
            label.insert(start, id);
            while let Some(v) = queue.pop_front() {
                group.push(v);
                for &ci in &self.watch[v] {
                    for &u in &self.constraints[ci].scope {
                        if let Some(l) = label.get_mut(&u) {
                            if *l == usize::MAX {
                                *l = id;
                                queue.push_back(u);
                            }
                        }
                    }
                }
            }
            groups.push(group);
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::group::{GroupSpec, PeriodLattice};

    fn cube() -> GroupSpec {
        GroupSpec::finite(vec![2, 2, 2])
    }

    fn boolean_fn(g: &GroupSpec, a: u64, b: u64) -> impl Fn(&crate::group::GroupElement) -> u64 + '_ {
        let _ = g;
        move |x| if x.0[0] == 0 { a } else { b }
    }

    fn compat(w: usize, m: u32) -> ExistentialWrapper {
        compile_property(&PropertySpec::CompatibleBoolean {
            domain: cube(),
            e: vec![1, 0, 0],
            e_prime: vec![0, 1, 0],
            e_dprime: vec![0, 0, 1],
            m,
            w,
        })
        .unwrap()
        .into_wrapper()
    }

    #[test]
    fn compatible_pair_extends_and_incompatible_does_not() {
        let g = cube();
        let lat = PeriodLattice::trivial();
        let wr = compat(2, 3);
        let f1 = boolean_fn(&g, 0, 1);
        let f2 = boolean_fn(&g, 4, 5);
        let good = FunctionTable::from_fn(&g, &lat, |x| vec![f1(x), f2(x)]).unwrap();
        let ext = find_extension(&good, &wr, &SearchOptions::default()).unwrap().unwrap();
        assert!(check_system(&ext, &wr.inner).unwrap());
        let f3 = boolean_fn(&g, 0, 3);
        let bad = FunctionTable::from_fn(&g, &lat, |x| vec![f1(x), f3(x)]).unwrap();
        assert!(!check_weak_property(&bad, &wr, &SearchOptions::default()).unwrap());
    }

    #[test]
    fn complete_property_accepts_anything() {
        let g = cube();
        let wr = ExistentialWrapper {
            inner: FunctionalSystem::new(g.clone(), Codomain::new(vec![4, 4])),
            visible: 1,
        };
        let f = FunctionTable::from_fn(&g, &PeriodLattice::trivial(), |x| vec![x.0[1] as u64 * 3]).unwrap();
        assert!(check_weak_property(&f, &wr, &SearchOptions::default()).unwrap());
    }
}
