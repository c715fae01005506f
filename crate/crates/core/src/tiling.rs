//! Tiling equations `A ⊕ F = G` over finite quotients: verification and exhaustive
//! exact-cover solving.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{GroupElement, GroupSpec, PeriodLattice, Quotient};

pub const DEFAULT_CELL_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub group: GroupSpec,
    pub elements: BTreeSet<GroupElement>,
}

impl Tile {
    pub fn new(group: GroupSpec, elements: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in elements {
            set.insert(group.element(&e)?);
        }
        if set.is_empty() {
            return invalid("tile must be non-empty");
        }
        Ok(Tile {
            group,
            elements: set,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn translate(&self, h: &GroupElement) -> Result<Tile> {
        let mut set = BTreeSet::new();
        for e in &self.elements {
            set.insert(self.group.add(e, h)?);
        }
        Ok(Tile {
            group: self.group.clone(),
            elements: set,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSystem {
    pub group: GroupSpec,
    pub tiles: Vec<BTreeSet<GroupElement>>,
}

impl TilingSystem {
    pub fn new(group: GroupSpec, tiles: Vec<Tile>) -> Result<Self> {
        let mut out = Vec::with_capacity(tiles.len());
        for t in tiles {
            if t.group != group {
                return Err(Error::GroupMismatch(format!(
                    "tile over {} in a system over {}",
                    t.group, group
                )));
            }
            out.push(t.elements);
        }
        Ok(TilingSystem { group, tiles: out })
    }

    pub fn tile(&self, m: usize) -> Tile {
        Tile {
            group: self.group.clone(),
            elements: self.tiles[m].clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.group.validate()?;
        for (m, t) in self.tiles.iter().enumerate() {
            if t.is_empty() {
                return invalid(format!("tile {m} is empty"));
            }
            if let Some(e) = t.iter().find(|e| !self.group.contains(e)) {
                return Err(Error::GroupMismatch(format!(
                    "tile {m} element {e} is not in {}",
                    self.group
                )));
            }
        }
        Ok(())
    }
}

/// A Λ-periodic subset of G: the union of the cosets of the listed representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicSet {
    pub group: GroupSpec,
    pub lattice: PeriodLattice,
    pub members: BTreeSet<GroupElement>,
}

impl PeriodicSet {
    /// Members are stored as canonical coset representatives.
    pub fn new(
        group: GroupSpec,
        lattice: PeriodLattice,
        members: impl IntoIterator<Item = Vec<i64>>,
    ) -> Result<Self> {
        let q = Quotient::new(&group, &lattice)?;
        let mut set = BTreeSet::new();
        for m in members {
            group.element(&m)?;
            set.insert(GroupElement(q.reduce(&m)));
        }
        Ok(PeriodicSet {
            group,
            lattice,
            members: set,
        })
    }

    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        let q = Quotient::new(&self.group, &self.lattice)?;
        Ok(self.members.contains(&GroupElement(q.reduce(x))))
    }

    pub fn translate(&self, h: &GroupElement) -> Result<PeriodicSet> {
        let pts: Vec<Vec<i64>> = self
            .members
            .iter()
            .map(|m| m.0.iter().zip(&h.0).map(|(a, b)| a + b).collect())
            .collect();
        PeriodicSet::new(self.group.clone(), self.lattice.clone(), pts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingReport {
    pub exact_tiling: bool,
    /// Number of cells of G/Λ covered 0, 1 and ≥2 times.
    pub multiplicity_histogram: [usize; 3],
    pub cells: usize,
    pub set_size: usize,
    pub tile_size: usize,
    /// Whether |A|·|F| = |G/Λ|, a necessary condition for an exact tiling.
    pub counting_identity: bool,
    pub first_uncovered: Option<GroupElement>,
    pub first_overlap: Option<GroupElement>,
}

/// Checks whether the translates `a + F`, `a ∈ A`, partition G.
///
/// Counting with multiplicity on G/Λ is exact: if two elements of F collide mod Λ,
/// two distinct translates in A overlap in G, and the collision shows up as a
/// multiplicity ≥ 2 in the quotient. So no refinement of Λ is needed.
pub fn verify_tiling(a: &PeriodicSet, f: &Tile) -> Result<TilingReport> {
    if f.is_empty() {
        return invalid("tile must be non-empty");
    }
    if a.group != f.group {
        return Err(Error::GroupMismatch(format!(
            "set over {} and tile over {}",
            a.group, f.group
        )));
    }
    let q = Quotient::new(&a.group, &a.lattice)?;
    let mut count = vec![0u32; q.index()];
    let mut buf = vec![0i64; a.group.dim()];
    for m in &a.members {
        for e in &f.elements {
            for ((b, x), y) in buf.iter_mut().zip(&m.0).zip(&e.0) {
                *b = x + y;
            }
            count[q.cell_of(&buf)] += 1;
        }
    }
    let mut hist = [0usize; 3];
    let mut first_uncovered = None;
    let mut first_overlap = None;
    for (c, &k) in count.iter().enumerate() {
        let slot = (k as usize).min(2);
        hist[slot] += 1;
        if k == 0 && first_uncovered.is_none() {
            first_uncovered = Some(q.rep(c));
        }
        if k >= 2 && first_overlap.is_none() {
            first_overlap = Some(q.rep(c));
        }
    }
    Ok(TilingReport {
        exact_tiling: hist[1] == q.index(),
        multiplicity_histogram: hist,
        cells: q.index(),
        set_size: a.members.len(),
        tile_size: f.len(),
        counting_identity: a.members.len() * f.len() == q.index(),
        first_uncovered,
        first_overlap,
    })
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub cell_cap: usize,
    /// Stop after this many solutions.
    pub limit: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cell_cap: DEFAULT_CELL_CAP,
            limit: None,
        }
    }
}

/// All Λ-periodic `A` with `A ⊕ F_m = G` for every tile, sorted by member list.
pub fn solve_tilings(
    system: &TilingSystem,
    lattice: &PeriodLattice,
    opts: &SolveOptions,
) -> Result<Vec<PeriodicSet>> {
    let mut out = Vec::new();
    solve_tilings_with(system, lattice, opts, |s| {
        out.push(s);
        ControlFlow::Continue(())
    })?;
    out.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(out)
}

/// Streams solutions in search order. Items are the pairs (tile m, cell); option `a`
/// covers `(m, a + f)` for every `f ∈ F_m`. Options that would cover an item twice
/// (tile elements colliding mod Λ) are dropped.
pub fn solve_tilings_with(
    system: &TilingSystem,
    lattice: &PeriodLattice,
    opts: &SolveOptions,
    mut visit: impl FnMut(PeriodicSet) -> ControlFlow<()>,
) -> Result<usize> {
    system.validate()?;
    if system.tiles.is_empty() {
        return invalid("system needs at least one tile");
    }
    let q = Quotient::new(&system.group, lattice)?;
    let cells = q.index();
    if cells > opts.cell_cap {
        return Err(Error::CapExceeded {
            what: "quotient size".into(),
            required: cells as u128,
            cap: opts.cell_cap as u128,
        });
    }
    let mut options: Vec<Vec<usize>> = Vec::with_capacity(cells);
    let mut option_cell = Vec::with_capacity(cells);
    let mut buf = vec![0i64; system.group.dim()];
    for a in 0..cells {
        let rep = q.rep(a);
        let mut items = Vec::new();
        for (m, tile) in system.tiles.iter().enumerate() {
            for e in tile {
                for ((b, x), y) in buf.iter_mut().zip(&rep.0).zip(&e.0) {
                    *b = x + y;
                }
                items.push(m * cells + q.cell_of(&buf));
            }
        }
        let n = items.len();
        items.sort_unstable();
        items.dedup();
        if items.len() == n {
            options.push(items);
            option_cell.push(a);
        }
    }
    let mut dlx = Dlx::new(system.tiles.len() * cells, &options);
    let mut found = 0usize;
    dlx.search(|rows| {
        let members = rows.iter().map(|&r| q.rep(option_cell[r]));
        let set = PeriodicSet {
            group: system.group.clone(),
            lattice: lattice.clone(),
            members: members.collect(),
        };
        found += 1;
        if visit(set).is_break() || opts.limit.is_some_and(|l| found >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(found)
}

/// Dancing-links exact cover (Knuth's Algorithm X), iterative.
struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    col: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
}

impl Dlx {
    fn new(n_items: usize, options: &[Vec<usize>]) -> Self {
        let total = 1 + n_items + options.iter().map(Vec::len).sum::<usize>();
        let mut d = Dlx {
            left: Vec::with_capacity(total),
            right: Vec::with_capacity(total),
            up: Vec::with_capacity(total),
            down: Vec::with_capacity(total),
            col: Vec::with_capacity(total),
            row: Vec::with_capacity(total),
            size: vec![0; n_items + 1],
        };
        for i in 0..=n_items {
            d.left.push(if i == 0 { n_items } else { i - 1 });
            d.right.push(if i == n_items { 0 } else { i + 1 });
            d.up.push(i);
            d.down.push(i);
            d.col.push(i);
            d.row.push(usize::MAX);
        }
        for (r, opt) in options.iter().enumerate() {
            let first = d.col.len();
            for (k, &item) in opt.iter().enumerate() {
                let c = item + 1;
                let node = d.col.len();
                let last = d.up[c];
                d.up.push(last);
                d.down.push(c);
                d.down[last] = node;
                d.up[c] = node;
                d.col.push(c);
                d.row.push(r);
                d.size[c] += 1;
                d.left.push(if k == 0 { node } else { node - 1 });
                d.right.push(first);
                if k > 0 {
                    d.right[node - 1] = node;
                }
                d.left[first] = node;
            }
        }
        d
    }

    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, dn) = (self.up[j], self.down[j]);
                self.down[u] = dn;
                self.up[dn] = u;
                self.size[self.col[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                let (u, dn) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[dn] = j;
                self.size[self.col[j]] += 1;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    /// First-fail column choice; ties go to the smallest item index.
    fn choose(&self) -> usize {
        let mut best = self.right[0];
        let mut c = best;
        while c != 0 {
            if self.size[c] < self.size[best] {
                best = c;
            }
            c = self.right[c];
        }
        best
    }

    fn search(&mut self, mut visit: impl FnMut(&[usize]) -> ControlFlow<()>) {
        let mut x: Vec<usize> = Vec::new();
        let mut rows: Vec<usize> = Vec::new();
        // Each loop iteration either descends (choosing a column) or advances the
        // current level to its next candidate row.
        'descend: loop {
            if self.right[0] == 0 {
                rows.clear();
                rows.extend(x.iter().map(|&n| self.row[n]));
                if visit(&rows).is_break() {
                    // Leave the structure consistent before returning.
                    self.unwind(&mut x);
                    return;
                }
            } else {
                let c = self.choose();
                self.cover(c);
                x.push(self.down[c]);
                if self.try_current(&mut x) {
                    continue 'descend;
                }
            }
            // Backtrack.
            loop {
                let Some(&node) = x.last() else {
                    return;
                };
                self.undo_row(node);
                let next = self.down[node];
                *x.last_mut().unwrap() = next;
                if self.try_current(&mut x) {
                    continue 'descend;
                }
            }
        }
    }

    /// Selects the row at the top of `x` if it is not the column header; otherwise
    /// uncovers the column and pops the level. Returns true when a row was selected.
    fn try_current(&mut self, x: &mut Vec<usize>) -> bool {
        let node = *x.last().unwrap();
        if node == self.col[node] && self.row[node] == usize::MAX {
            self.uncover(node);
            x.pop();
            return false;
        }
        let mut j = self.right[node];
        while j != node {
            self.cover(self.col[j]);
            j = self.right[j];
        }
        true
    }

    fn undo_row(&mut self, node: usize) {
        let mut j = self.left[node];
        while j != node {
            self.uncover(self.col[j]);
            j = self.left[j];
        }
    }

    fn unwind(&mut self, x: &mut Vec<usize>) {
        while let Some(node) = x.pop() {
            self.undo_row(node);
            self.uncover(self.col[node]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> GroupSpec {
        GroupSpec::cyclic(n)
    }

    #[test]
    fn interval_tiles_integers() {
        let g = GroupSpec::free(1);
        let a = PeriodicSet::new(g.clone(), PeriodLattice::scaled_free(&g, 2), [vec![0]]).unwrap();
        let f = Tile::new(g.clone(), [vec![0], vec![1]]).unwrap();
        let r = verify_tiling(&a, &f).unwrap();
        assert!(r.exact_tiling && r.counting_identity);
        let f2 = Tile::new(g, [vec![0], vec![2]]).unwrap();
        let r = verify_tiling(&a, &f2).unwrap();
        assert!(!r.exact_tiling);
        assert_eq!(r.multiplicity_histogram, [1, 0, 1]);
        assert_eq!(r.first_uncovered, Some(GroupElement(vec![1])));
        assert_eq!(r.first_overlap, Some(GroupElement(vec![0])));
    }

    #[test]
    fn finite_group_tiling() {
        let a = PeriodicSet::new(z(4), PeriodLattice::trivial(), [vec![0], vec![2]]).unwrap();
        let f = Tile::new(z(4), [vec![0], vec![3]]).unwrap();
        assert!(verify_tiling(&a, &f).unwrap().exact_tiling);
    }

    fn members(s: &PeriodicSet) -> Vec<i64> {
        s.members.iter().map(|m| m.0[0]).collect()
    }

    #[test]
    fn solver_examples() {
        let opts = SolveOptions::default();
        let sys = TilingSystem::new(
            z(4),
            vec![
                Tile::new(z(4), [vec![0], vec![1]]).unwrap(),
                Tile::new(z(4), [vec![0], vec![3]]).unwrap(),
            ],
        )
        .unwrap();
        let sols = solve_tilings(&sys, &PeriodLattice::trivial(), &opts).unwrap();
        let got: Vec<Vec<i64>> = sols.iter().map(members).collect();
        assert_eq!(got, vec![vec![0, 2], vec![1, 3]]);

        let sys = TilingSystem::new(z(2), vec![Tile::new(z(2), [vec![0]]).unwrap()]).unwrap();
        let sols = solve_tilings(&sys, &PeriodLattice::trivial(), &opts).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(members(&sols[0]), vec![0, 1]);

        let sys = TilingSystem::new(
            z(4),
            vec![
                Tile::new(z(4), [vec![0], vec![1]]).unwrap(),
                Tile::new(z(4), [vec![0], vec![2]]).unwrap(),
            ],
        )
        .unwrap();
        assert!(solve_tilings(&sys, &PeriodLattice::trivial(), &opts)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn solver_cap_reports_size() {
        let g = GroupSpec::free(1);
        let sys = TilingSystem::new(g.clone(), vec![Tile::new(g.clone(), [vec![0]]).unwrap()]).unwrap();
        let opts = SolveOptions {
            cell_cap: 8,
            limit: None,
        };
        let err = solve_tilings(&sys, &PeriodLattice::scaled_free(&g, 16), &opts).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { required: 16, cap: 8, .. }));
    }

    #[test]
    fn limit_stops_early() {
        let g = z(6);
        let sys = TilingSystem::new(g.clone(), vec![Tile::new(g, [vec![0], vec![1]]).unwrap()]).unwrap();
        let opts = SolveOptions {
            cell_cap: 64,
            limit: Some(1),
        };
        assert_eq!(solve_tilings(&sys, &PeriodLattice::trivial(), &opts).unwrap().len(), 1);
    }
}
