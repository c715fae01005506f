//! Finitely generated abelian groups `Z^r × Z/n_1 × … × Z/n_k`, their finite
//! quotients, and window-scale period detection.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub free_rank: usize,
    #[serde(rename = "torsion")]
    pub torsion_orders: Vec<u64>,
}

/// Coordinates of a group element; torsion coordinates are kept in `[0, n_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl GroupSpec {
    pub fn new(free_rank: usize, torsion_orders: Vec<u64>) -> Result<Self> {
        let g = GroupSpec {
            free_rank,
            torsion_orders,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn free(rank: usize) -> Self {
        GroupSpec {
            free_rank: rank,
            torsion_orders: vec![],
        }
    }

    pub fn cyclic(n: u64) -> Self {
        GroupSpec {
            free_rank: 0,
            torsion_orders: vec![n],
        }
    }

    pub fn finite(orders: Vec<u64>) -> Self {
        GroupSpec {
            free_rank: 0,
            torsion_orders: orders,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.torsion_orders.contains(&0) {
            return invalid("torsion orders must be >= 1");
        }
        if self.torsion_orders.iter().any(|&n| n > i64::MAX as u64) {
            return invalid("torsion order too large");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.free_rank + self.torsion_orders.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Group order, if finite and representable.
    pub fn order(&self) -> Option<u64> {
        if !self.is_finite() {
            return None;
        }
        self.torsion_orders
            .iter()
            .try_fold(1u64, |acc, &n| acc.checked_mul(n))
    }

    /// Modulus of coordinate `i`, or `None` for a free coordinate.
    pub fn modulus(&self, i: usize) -> Option<u64> {
        if i < self.free_rank {
            None
        } else {
            Some(self.torsion_orders[i - self.free_rank])
        }
    }

    /// Builds an element, reducing torsion coordinates.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.dim() {
            return Err(Error::GroupMismatch(format!(
                "element has {} coordinates, group has dimension {}",
                coords.len(),
                self.dim()
            )));
        }
        let mut v = coords.to_vec();
        self.reduce_in_place(&mut v);
        Ok(GroupElement(v))
    }

    pub(crate) fn reduce_in_place(&self, v: &mut [i64]) {
        for (i, &n) in self.torsion_orders.iter().enumerate() {
            let c = &mut v[self.free_rank + i];
            *c = c.rem_euclid(n as i64);
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.dim()])
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.0.len() == self.dim()
            && self
                .torsion_orders
                .iter()
                .enumerate()
                .all(|(i, &n)| (0..n as i64).contains(&x.0[self.free_rank + i]))
    }

    fn check(&self, x: &GroupElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!(
                "{x} is not an element of {self}"
            )))
        }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        let v: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        self.element(&v)
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        let v: Vec<i64> = a.0.iter().map(|x| -x).collect();
        self.element(&v)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// Integer multiple `k·a`.
    pub fn scale(&self, k: i64, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        let v: Vec<i64> = a.0.iter().map(|x| x * k).collect();
        self.element(&v)
    }

    /// Standard generators: the unit vectors (torsion units omitted when n_i = 1).
    pub fn generators(&self) -> Vec<GroupElement> {
        (0..self.dim())
            .filter(|&i| self.modulus(i) != Some(1))
            .map(|i| {
                let mut v = vec![0; self.dim()];
                v[i] = 1;
                GroupElement(v)
            })
            .collect()
    }

    /// `self × other`, with coordinates laid out as free parts first, then torsion.
    pub fn product(&self, other: &GroupSpec) -> GroupSpec {
        GroupSpec {
            free_rank: self.free_rank + other.free_rank,
            torsion_orders: self
                .torsion_orders
                .iter()
                .chain(&other.torsion_orders)
                .copied()
                .collect(),
        }
    }

    /// Lays out the coordinates of `(a, b) ∈ self × other` as in [`GroupSpec::product`].
    pub fn pair(&self, other: &GroupSpec, a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut v = Vec::with_capacity(a.len() + b.len());
        v.extend_from_slice(&a[..self.free_rank]);
        v.extend_from_slice(&b[..other.free_rank]);
        v.extend_from_slice(&a[self.free_rank..]);
        v.extend_from_slice(&b[other.free_rank..]);
        v
    }

    /// Inverse of [`GroupSpec::pair`].
    pub fn split(&self, other: &GroupSpec, v: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let r1 = self.free_rank;
        let r2 = other.free_rank;
        let k1 = self.torsion_orders.len();
        let mut a = v[..r1].to_vec();
        a.extend_from_slice(&v[r1 + r2..r1 + r2 + k1]);
        let mut b = v[r1..r1 + r2].to_vec();
        b.extend_from_slice(&v[r1 + r2 + k1..]);
        (a, b)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![];
        if self.free_rank == 1 {
            parts.push("Z".to_string());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        for n in &self.torsion_orders {
            parts.push(format!("Z/{n}"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" x "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub generators: Vec<GroupElement>,
}

impl PeriodLattice {
    pub fn new(generators: Vec<GroupElement>) -> Self {
        PeriodLattice { generators }
    }

    /// `k·Z^r` on the free part; torsion is quotiented away entirely by the group itself.
    pub fn scaled_free(g: &GroupSpec, k: i64) -> Self {
        let gens = (0..g.free_rank)
            .map(|i| {
                let mut v = vec![0; g.dim()];
                v[i] = k;
                GroupElement(v)
            })
            .collect();
        PeriodLattice { generators: gens }
    }

    /// Diagonal lattice `⊕ k_i Z e_i` over the free coordinates.
    pub fn diagonal(g: &GroupSpec, ks: &[i64]) -> Result<Self> {
        if ks.len() != g.free_rank {
            return invalid("one period per free coordinate expected");
        }
        let gens = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let mut v = vec![0; g.dim()];
                v[i] = k;
                GroupElement(v)
            })
            .collect();
        Ok(PeriodLattice { generators: gens })
    }

    /// The trivial lattice (only useful for finite groups).
    pub fn trivial() -> Self {
        PeriodLattice { generators: vec![] }
    }

    /// Pads each generator of a lattice in `g` with zeros to live in `g × h`.
    pub fn extend_by(&self, g: &GroupSpec, h: &GroupSpec) -> Self {
        let zeros = vec![0; h.dim()];
        PeriodLattice {
            generators: self
                .generators
                .iter()
                .map(|x| GroupElement(g.pair(h, &x.0, &zeros)))
                .collect(),
        }
    }
}

/// The finite quotient `G/Λ`, with canonical coset representatives.
///
/// Internally the lattice `Λ + ⊕ n_i e_{r+i}` is brought to Hermite normal form;
/// a representative has coordinate `i` in `[0, d_i)` where `d_i` are the pivots.
#[derive(Clone, Debug)]
pub struct Quotient {
    group: GroupSpec,
    rows: Vec<Vec<i64>>,
    diag: Vec<u64>,
    size: usize,
}

impl Quotient {
    pub fn new(group: &GroupSpec, lattice: &PeriodLattice) -> Result<Self> {
        group.validate()?;
        let dim = group.dim();
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for gen in &lattice.generators {
            if gen.0.len() != dim {
                return Err(Error::GroupMismatch(format!(
                    "lattice generator {gen} does not live in {group}"
                )));
            }
            rows.push(gen.0.iter().map(|&c| BigInt::from(c)).collect());
        }
        for (i, &n) in group.torsion_orders.iter().enumerate() {
            let mut r = vec![BigInt::zero(); dim];
            r[group.free_rank + i] = BigInt::from(n);
            rows.push(r);
        }
        let hnf = hermite_normal_form(rows, dim)?;
        let mut diag = Vec::with_capacity(dim);
        let mut small_rows = Vec::with_capacity(dim);
        let mut size: usize = 1;
        for (i, row) in hnf.iter().enumerate() {
            let d = row[i]
                .to_u64()
                .ok_or_else(|| Error::Overflow("quotient pivot exceeds u64".into()))?;
            size = size
                .checked_mul(d as usize)
                .ok_or_else(|| Error::Overflow("quotient index exceeds usize".into()))?;
            diag.push(d);
            let r: Option<Vec<i64>> = row.iter().map(|c| c.to_i64()).collect();
            small_rows.push(r.ok_or_else(|| Error::Overflow("normal form entry".into()))?);
        }
        Ok(Quotient {
            group: group.clone(),
            rows: small_rows,
            diag,
            size,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// `[G : Λ]`.
    pub fn index(&self) -> usize {
        self.size
    }

    pub fn pivots(&self) -> &[u64] {
        &self.diag
    }

    /// Canonical representative coordinates of `x + Λ`.
    pub fn reduce(&self, x: &[i64]) -> Vec<i64> {
        let mut v: Vec<i128> = x.iter().map(|&c| c as i128).collect();
        for i in 0..v.len() {
            let d = self.diag[i] as i128;
            let t = v[i].div_euclid(d);
            if t != 0 {
                for (vj, &rj) in v.iter_mut().zip(&self.rows[i]).skip(i) {
                    *vj -= t * rj as i128;
                }
            }
        }
        v.into_iter().map(|c| c as i64).collect()
    }

    /// Index of the coset of `x` in `0..index()`, in lexicographic order of representatives.
    pub fn cell_of(&self, x: &[i64]) -> usize {
        let r = self.reduce(x);
        let mut idx = 0usize;
        for (c, &d) in r.iter().zip(&self.diag) {
            idx = idx * d as usize + *c as usize;
        }
        idx
    }

    pub fn rep(&self, mut cell: usize) -> GroupElement {
        let mut v = vec![0i64; self.diag.len()];
        for i in (0..self.diag.len()).rev() {
            let d = self.diag[i] as usize;
            v[i] = (cell % d) as i64;
            cell /= d;
        }
        GroupElement(v)
    }

    pub fn representatives(&self) -> Vec<GroupElement> {
        (0..self.size).map(|c| self.rep(c)).collect()
    }

    /// `table[c]` = cell of `rep(c) + h`.
    pub fn shift_table(&self, h: &[i64]) -> Vec<usize> {
        (0..self.size)
            .map(|c| {
                let r = self.rep(c);
                let v: Vec<i64> = r.0.iter().zip(h).map(|(a, b)| a + b).collect();
                self.cell_of(&v)
            })
            .collect()
    }

    /// Whether `x ∈ Λ` (including the torsion relations of the group).
    pub fn in_lattice(&self, x: &[i64]) -> bool {
        self.reduce(x).iter().all(|&c| c == 0)
    }
}

/// Coset representatives of `G/Λ` in lexicographic order.
pub fn enumerate_quotient(g: &GroupSpec, lattice: &PeriodLattice) -> Result<Vec<GroupElement>> {
    Ok(Quotient::new(g, lattice)?.representatives())
}

/// Row-style Hermite normal form of a full-rank integer lattice; returns `dim` rows,
/// upper triangular with positive pivots and off-diagonal entries reduced modulo the pivot below.
fn hermite_normal_form(mut rows: Vec<Vec<BigInt>>, dim: usize) -> Result<Vec<Vec<BigInt>>> {
    let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(dim);
    for col in 0..dim {
        // Euclid on column `col` across the remaining rows.
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let p = nz[0];
            let pivot = rows[p][col].clone();
            for &i in &nz[1..] {
                let q = rows[i][col].div_floor(&pivot);
                let prow = rows[p].clone();
                for (x, y) in rows[i].iter_mut().zip(prow.iter()) {
                    *x -= &q * y;
                }
            }
        }
        let pos = (0..rows.len()).find(|&i| !rows[i][col].is_zero());
        let Some(p) = pos else {
            return Err(Error::IndexNotFinite);
        };
        let mut prow = rows.swap_remove(p);
        if prow[col].is_negative() {
            for x in prow.iter_mut() {
                *x = -x.clone();
            }
        }
        out.push(prow);
    }
    // Reduce entries right of each pivot using the rows below.
    for i in (0..dim).rev() {
        for j in i + 1..dim {
            let d = out[j][j].clone();
            let q = out[i][j].div_floor(&d);
            if !q.is_zero() {
                let rj = out[j].clone();
                for (x, y) in out[i].iter_mut().zip(rj.iter()) {
                    *x -= &q * y;
                }
            }
        }
    }
    debug_assert!(out.iter().enumerate().all(|(i, r)| r[i] >= BigInt::one()));
    Ok(out)
}

/// Per-coordinate closed bounds `[lo_i, hi_i]` over the free coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub bounds: Vec<(i64, i64)>,
}

impl Window {
    pub fn new(bounds: Vec<(i64, i64)>) -> Result<Self> {
        if bounds.iter().any(|&(lo, hi)| lo > hi) {
            return invalid("window bounds must satisfy lo <= hi");
        }
        Ok(Window { bounds })
    }

    pub fn extent(&self, i: usize) -> usize {
        let (lo, hi) = self.bounds[i];
        (hi - lo + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.bounds.len()).map(|i| self.extent(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index (last coordinate fastest), or `None` outside the window.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (i, (&c, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if c < lo || c > hi {
                return None;
            }
            idx = idx * self.extent(i) + (c - lo) as usize;
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let mut v = vec![0; self.bounds.len()];
        for i in (0..self.bounds.len()).rev() {
            let e = self.extent(i);
            v[i] = self.bounds[i].0 + (idx % e) as i64;
            idx /= e;
        }
        v
    }
}

/// Values of a function on every point of a window (row-major).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowFunction<T> {
    pub window: Window,
    pub values: Vec<T>,
}

impl<T: PartialEq> WindowFunction<T> {
    pub fn new(window: Window, values: Vec<T>) -> Result<Self> {
        if values.len() != window.len() {
            return invalid("value count does not match window size");
        }
        Ok(WindowFunction { window, values })
    }

    pub fn from_fn(window: Window, f: impl Fn(&[i64]) -> T) -> Self {
        let values = (0..window.len()).map(|i| f(&window.point(i))).collect();
        WindowFunction { window, values }
    }

    /// Whether `f(x+v) = f(x)` wherever both sides lie in the window.
    pub fn is_window_periodic(&self, v: &[i64]) -> bool {
        let mut y = vec![0; v.len()];
        for idx in 0..self.values.len() {
            let x = self.window.point(idx);
            for ((yi, xi), vi) in y.iter_mut().zip(&x).zip(v) {
                *yi = xi + vi;
            }
            if let Some(j) = self.window.index_of(&y) {
                if self.values[j] != self.values[idx] {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of a window-scale period scan. Only claims "no period up to `bound`"
/// about the window, never about the infinite group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub bound: i64,
    pub periods: Vec<GroupElement>,
}

impl PeriodReport {
    pub fn contains(&self, v: &[i64]) -> bool {
        self.periods.iter().any(|p| p.0 == v)
    }
}

/// All nonzero `v` with `max_i |v_i| ≤ bound` under which `f` is window-periodic.
///
/// Requires every window extent to be at least `2·bound`, so each shift keeps
/// at least half the window in the overlap.
pub fn detect_periods<T: PartialEq + Sync>(
    f: &WindowFunction<T>,
    bound: i64,
) -> Result<PeriodReport> {
    if bound < 1 {
        return invalid("period bound must be >= 1");
    }
    let r = f.window.bounds.len();
    for i in 0..r {
        if (f.window.extent(i) as i64) < 2 * bound {
            return Err(Error::WindowTooSmall(format!(
                "coordinate {i} has extent {} < 2*{bound}",
                f.window.extent(i)
            )));
        }
    }
    let side = (2 * bound + 1) as usize;
    let total = side.pow(r as u32);
    use rayon::prelude::*;
    let mut periods: Vec<GroupElement> = (0..total)
        .into_par_iter()
        .filter_map(|mut k| {
            let mut v = vec![0i64; r];
            for i in (0..r).rev() {
                v[i] = (k % side) as i64 - bound;
                k /= side;
            }
            if v.iter().all(|&c| c == 0) {
                return None;
            }
            f.is_window_periodic(&v).then_some(GroupElement(v))
        })
        .collect();
    periods.sort();
    Ok(PeriodReport { bound, periods })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_reduces_torsion() {
        let g = GroupSpec::new(1, vec![4]).unwrap();
        let a = g.element(&[3, 2]).unwrap();
        let b = g.element(&[1, 3]).unwrap();
        assert_eq!(g.add(&a, &b).unwrap().0, vec![4, 1]);
        let z2 = GroupSpec::finite(vec![2, 2, 2]);
        let s = z2
            .add(&z2.element(&[1, 0, 1]).unwrap(), &z2.element(&[1, 1, 1]).unwrap())
            .unwrap();
        assert_eq!(s.0, vec![0, 1, 0]);
    }

    #[test]
    fn add_rejects_foreign_elements() {
        let g = GroupSpec::cyclic(4);
        let bad = GroupElement(vec![1, 2]);
        assert!(matches!(
            g.add(&g.zero(), &bad),
            Err(Error::GroupMismatch(_))
        ));
        assert!(g.add(&GroupElement(vec![5]), &g.zero()).is_err());
    }

    #[test]
    fn quotient_examples() {
        let z2 = GroupSpec::free(2);
        let l = PeriodLattice::diagonal(&z2, &[2, 2]).unwrap();
        let reps = enumerate_quotient(&z2, &l).unwrap();
        let coords: Vec<Vec<i64>> = reps.into_iter().map(|r| r.0).collect();
        assert_eq!(coords, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let z4 = GroupSpec::cyclic(4);
        let whole = PeriodLattice::new(vec![GroupElement(vec![1])]);
        assert_eq!(enumerate_quotient(&z4, &whole).unwrap().len(), 1);

        let l = PeriodLattice::new(vec![GroupElement(vec![1, 2]), GroupElement(vec![0, 5])]);
        assert_eq!(enumerate_quotient(&z2, &l).unwrap().len(), 5);
    }

    #[test]
    fn infinite_index_is_an_error() {
        let z2 = GroupSpec::free(2);
        let l = PeriodLattice::new(vec![GroupElement(vec![1, 1])]);
        assert_eq!(Quotient::new(&z2, &l).unwrap_err(), Error::IndexNotFinite);
    }

    #[test]
    fn every_element_reduces_to_one_representative() {
        let g = GroupSpec::new(2, vec![6]).unwrap();
        let l = PeriodLattice::new(vec![
            GroupElement(vec![3, 1, 2]),
            GroupElement(vec![0, 4, 1]),
            GroupElement(vec![1, 1, 0]),
        ]);
        let q = Quotient::new(&g, &l).unwrap();
        let reps = q.representatives();
        for (i, r) in reps.iter().enumerate() {
            assert_eq!(q.cell_of(&r.0), i);
        }
        for a in -5..5 {
            for b in -5..5 {
                for c in 0..6 {
                    let x = [a, b, c];
                    let r = q.reduce(&x);
                    let diff: Vec<i64> = x.iter().zip(&r).map(|(u, v)| u - v).collect();
                    assert!(q.in_lattice(&diff));
                    assert!(reps.iter().any(|rep| rep.0 == r));
                }
            }
        }
    }

    #[test]
    fn periods_of_synthetic_function() {
        let w = Window::new(vec![(0, 63), (0, 63)]).unwrap();
        let f = WindowFunction::from_fn(w, |x| x[1].rem_euclid(4));
        let rep = detect_periods(&f, 8).unwrap();
        assert!(rep.contains(&[1, 0]));
        assert!(rep.contains(&[0, 4]));
        assert!(!rep.contains(&[0, 2]));
        for p in &rep.periods {
            let neg: Vec<i64> = p.0.iter().map(|c| -c).collect();
            assert!(rep.contains(&neg));
        }
    }

    #[test]
    fn period_scan_rejects_small_window() {
        let w = Window::new(vec![(0, 9)]).unwrap();
        let f = WindowFunction::from_fn(w, |_| 0u8);
        assert!(matches!(detect_periods(&f, 6), Err(Error::WindowTooSmall(_))));
        assert_eq!(detect_periods(&f, 5).unwrap().periods.len(), 10);
    }
}
