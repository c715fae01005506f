//! Subsets `E ⊆ ∏ Z/m_k` used as the right-hand sides of functional equations.
//!
//! Sets are symbolic where that matters: a subgroup or its complement in a product of
//! several `Z/2^M` factors is never materialized.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{GroupElement, GroupSpec, PeriodLattice, Quotient};

/// Sets this large are enumerated point by point when no symbolic rule applies.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// One row of a kernel description: `Σ c_k y_k ≡ 0 (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Congruence {
    pub coeffs: Vec<i64>,
    pub modulus: u64,
}

impl Congruence {
    fn holds(&self, y: &[u64]) -> bool {
        let m = self.modulus as i128;
        let s: i128 = self
            .coeffs
            .iter()
            .zip(y)
            .map(|(&c, &v)| (c as i128 * v as i128).rem_euclid(m))
            .sum();
        s.rem_euclid(m) == 0
    }

    fn normalized(&self) -> Congruence {
        let m = self.modulus as i64;
        Congruence {
            coeffs: self.coeffs.iter().map(|c| c.rem_euclid(m)).collect(),
            modulus: self.modulus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueSet {
    Explicit { points: BTreeSet<Vec<u64>> },
    /// The subgroup generated by the listed elements.
    Span { generators: Vec<Vec<u64>> },
    /// The subgroup cut out by congruences.
    Kernel { rows: Vec<Congruence> },
    Complement { of: Box<ValueSet> },
}

impl ValueSet {
    pub fn points(points: impl IntoIterator<Item = Vec<u64>>) -> Self {
        ValueSet::Explicit {
            points: points.into_iter().collect(),
        }
    }

    pub fn singleton(v: Vec<u64>) -> Self {
        Self::points([v])
    }

    pub fn zero(components: usize) -> Self {
        Self::singleton(vec![0; components])
    }

    pub fn span(generators: Vec<Vec<u64>>) -> Self {
        ValueSet::Span { generators }
    }

    pub fn kernel(rows: Vec<Congruence>) -> Self {
        ValueSet::Kernel { rows }
    }

    pub fn complement(self) -> Self {
        match self {
            ValueSet::Complement { of } => *of,
            s => ValueSet::Complement { of: Box::new(s) },
        }
    }

    pub fn is_subgroup(&self) -> bool {
        matches!(self, ValueSet::Span { .. } | ValueSet::Kernel { .. })
    }

    pub fn validate(&self, moduli: &[u64]) -> Result<()> {
        match self {
            ValueSet::Explicit { points } => {
                for p in points {
                    if p.len() != moduli.len() || p.iter().zip(moduli).any(|(v, m)| v >= m) {
                        return invalid(format!("point {p:?} is not in ∏ Z/{moduli:?}"));
                    }
                }
            }
            ValueSet::Span { generators } => {
                for g in generators {
                    if g.len() != moduli.len() {
                        return invalid(format!("generator {g:?} has the wrong length"));
                    }
                }
            }
            ValueSet::Kernel { rows } => {
                for r in rows {
                    if r.coeffs.len() != moduli.len() || r.modulus == 0 {
                        return invalid("congruence row has the wrong shape");
                    }
                    // c_k y_k mod n must not depend on the representative of y_k.
                    for (&c, &m) in r.coeffs.iter().zip(moduli) {
                        if (c as i128 * m as i128).rem_euclid(r.modulus as i128) != 0 {
                            return invalid(format!(
                                "congruence {:?} mod {} is not well defined on Z/{m}",
                                r.coeffs, r.modulus
                            ));
                        }
                    }
                }
            }
            ValueSet::Complement { of } => of.validate(moduli)?,
        }
        Ok(())
    }

    pub fn contains(&self, moduli: &[u64], y: &[u64]) -> bool {
        match self {
            ValueSet::Explicit { points } => points.contains(y),
            ValueSet::Span { generators } => span_quotient(moduli, generators)
                .map(|q| q.in_lattice(&to_i64(y)))
                .unwrap_or(false),
            ValueSet::Kernel { rows } => rows.iter().all(|r| r.holds(y)),
            ValueSet::Complement { of } => !of.contains(moduli, y),
        }
    }

    pub fn size(&self, moduli: &[u64]) -> Result<BigUint> {
        let total = group_size(moduli);
        Ok(match self {
            ValueSet::Explicit { points } => BigUint::from(points.len()),
            ValueSet::Span { generators } => {
                let q = span_quotient(moduli, generators)?;
                total / BigUint::from(q.index())
            }
            ValueSet::Kernel { rows } => {
                // |ker| = |H| / |image|, image = span of the columns in ∏ Z/n_r.
                if rows.is_empty() {
                    return Ok(total);
                }
                let target: Vec<u64> = rows.iter().map(|r| r.modulus).collect();
                let cols: Vec<GroupElement> = (0..moduli.len())
                    .map(|k| {
                        GroupElement(
                            rows.iter()
                                .map(|r| r.coeffs[k].rem_euclid(r.modulus as i64))
                                .collect(),
                        )
                    })
                    .collect();
                let q = Quotient::new(&GroupSpec::finite(target.clone()), &PeriodLattice::new(cols))?;
                let image = group_size(&target) / BigUint::from(q.index());
                total / image
            }
            ValueSet::Complement { of } => total - of.size(moduli)?,
        })
    }

    /// Every point, if there are at most `cap`.
    pub fn enumerate(&self, moduli: &[u64], cap: u128) -> Result<Vec<Vec<u64>>> {
        if let ValueSet::Explicit { points } = self {
            return Ok(points.iter().cloned().collect());
        }
        let total = group_size(moduli);
        let t = total.to_u128().unwrap_or(u128::MAX);
        if t > cap {
            return Err(Error::CapExceeded {
                what: "value set enumeration".into(),
                required: t,
                cap,
            });
        }
        let mut out = vec![];
        for_each_point(moduli, |y| {
            if self.contains(moduli, y) {
                out.push(y.to_vec());
            }
        });
        Ok(out)
    }

    /// Whether `E + d` meets `other`, i.e. some `e ∈ self` has `e + d ∈ other`.
    pub fn intersects_shifted(&self, other: &ValueSet, d: &[u64], moduli: &[u64]) -> Result<bool> {
        match pair_rule(self, other, moduli)? {
            PairRule::Always => Ok(true),
            PairRule::Never => Ok(false),
            PairRule::IffIn(s) => Ok(s.contains(moduli, d)),
            PairRule::IffNotIn(s) => Ok(!s.contains(moduli, d)),
            PairRule::Differences(set) => Ok(set.contains(d)),
            PairRule::Scan => scan_intersects(self, other, d, moduli),
        }
    }
}

/// How to decide `(E + d) ∩ E' ≠ ∅` as a function of `d`.
#[derive(Clone, Debug)]
pub(crate) enum PairRule {
    Always,
    Never,
    IffIn(ValueSet),
    IffNotIn(ValueSet),
    /// `d ∈ E' - E`, tabulated.
    Differences(HashSet<Vec<u64>>),
    Scan,
}

const DIFFERENCE_TABLE_CAP: usize = 1 << 16;

pub(crate) fn pair_rule(a: &ValueSet, b: &ValueSet, moduli: &[u64]) -> Result<PairRule> {
    use ValueSet::*;
    if a.is_subgroup() && same_subgroup(a, b) {
        return Ok(PairRule::IffIn(a.clone()));
    }
    match (a, b) {
        (s, Complement { of }) | (Complement { of }, s) if s.is_subgroup() && same_subgroup(s, of) => {
            return Ok(PairRule::IffNotIn(s.clone()));
        }
        (Complement { of: s }, Complement { of: t }) if s.is_subgroup() && same_subgroup(s, t) => {
            let index = group_size(moduli) / s.size(moduli)?;
            return Ok(if index.is_one() {
                PairRule::Never
            } else if index == BigUint::from(2u8) {
                PairRule::IffIn((**s).clone())
            } else {
                PairRule::Always
            });
        }
        _ => {}
    }
    let (sa, sb) = (a.size(moduli)?, b.size(moduli)?);
    if sa.is_zero() || sb.is_zero() {
        return Ok(PairRule::Never);
    }
    let small = BigUint::from(DIFFERENCE_TABLE_CAP);
    if &sa * &sb <= small {
        let pa = a.enumerate(moduli, DIFFERENCE_TABLE_CAP as u128)?;
        let pb = b.enumerate(moduli, DIFFERENCE_TABLE_CAP as u128)?;
        let mut diffs = HashSet::with_capacity(pa.len() * pb.len());
        for x in &pa {
            for y in &pb {
                diffs.insert(sub_mod(y, x, moduli));
            }
        }
        return Ok(PairRule::Differences(diffs));
    }
    Ok(PairRule::Scan)
}

fn same_subgroup(a: &ValueSet, b: &ValueSet) -> bool {
    match (a, b) {
        (ValueSet::Kernel { rows: r }, ValueSet::Kernel { rows: s }) => {
            let mut r: Vec<Congruence> = r.iter().map(Congruence::normalized).collect();
            let mut s: Vec<Congruence> = s.iter().map(Congruence::normalized).collect();
            r.sort_by(|x, y| (x.modulus, &x.coeffs).cmp(&(y.modulus, &y.coeffs)));
            s.sort_by(|x, y| (x.modulus, &x.coeffs).cmp(&(y.modulus, &y.coeffs)));
            r == s
        }
        (ValueSet::Span { generators: g }, ValueSet::Span { generators: h }) => g == h,
        _ => false,
    }
}

fn scan_intersects(a: &ValueSet, b: &ValueSet, d: &[u64], moduli: &[u64]) -> Result<bool> {
    if let ValueSet::Explicit { points } = a {
        return Ok(points.iter().any(|e| b.contains(moduli, &add_mod(e, d, moduli))));
    }
    if let ValueSet::Explicit { points } = b {
        return Ok(points.iter().any(|e| a.contains(moduli, &sub_mod(e, d, moduli))));
    }
    let pa = a.enumerate(moduli, ENUMERATION_CAP)?;
    Ok(pa.iter().any(|e| b.contains(moduli, &add_mod(e, d, moduli))))
}

fn span_quotient(moduli: &[u64], generators: &[Vec<u64>]) -> Result<Quotient> {
    let gens = generators.iter().map(|g| GroupElement(to_i64(g))).collect();
    Quotient::new(&GroupSpec::finite(moduli.to_vec()), &PeriodLattice::new(gens))
}

fn to_i64(v: &[u64]) -> Vec<i64> {
    v.iter().map(|&x| x as i64).collect()
}

pub fn group_size(moduli: &[u64]) -> BigUint {
    moduli.iter().fold(BigUint::one(), |acc, &m| acc * m)
}

pub fn add_mod(a: &[u64], b: &[u64], moduli: &[u64]) -> Vec<u64> {
    a.iter()
        .zip(b)
        .zip(moduli)
        .map(|((x, y), m)| ((*x as u128 + *y as u128) % *m as u128) as u64)
        .collect()
}

pub fn sub_mod(a: &[u64], b: &[u64], moduli: &[u64]) -> Vec<u64> {
    a.iter()
        .zip(b)
        .zip(moduli)
        .map(|((x, y), m)| ((*x as u128 + *m as u128 - *y as u128 % *m as u128) % *m as u128) as u64)
        .collect()
}

/// Visits every point of `∏ Z/m_k` in lexicographic order.
pub fn for_each_point(moduli: &[u64], mut f: impl FnMut(&[u64])) {
    if moduli.contains(&0) {
        return;
    }
    let mut y = vec![0u64; moduli.len()];
    loop {
        f(&y);
        let mut k = moduli.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            y[k] += 1;
            if y[k] < moduli[k] {
                break;
            }
            y[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens(m: u64) -> ValueSet {
        ValueSet::span(vec![vec![2 % m]])
    }

    #[test]
    fn subgroup_sizes() {
        let m = [8u64];
        assert_eq!(evens(8).size(&m).unwrap(), BigUint::from(4u8));
        assert_eq!(evens(8).complement().size(&m).unwrap(), BigUint::from(4u8));
        let k = ValueSet::kernel(vec![Congruence { coeffs: vec![1, 1, 1, -2, -1], modulus: 16 }]);
        let m5 = [16u64; 5];
        k.validate(&m5).unwrap();
        assert_eq!(k.size(&m5).unwrap(), BigUint::from(1u64 << 16));
        let d = ValueSet::kernel(vec![Congruence { coeffs: vec![2, 0], modulus: 4 }]);
        assert_eq!(d.size(&[4, 4]).unwrap(), BigUint::from(8u8));
        assert_eq!(ValueSet::span(vec![]).size(&[4, 2]).unwrap(), BigUint::one());
    }

    #[test]
    fn ill_defined_congruence_rejected() {
        let k = ValueSet::kernel(vec![Congruence { coeffs: vec![1], modulus: 4 }]);
        assert!(k.validate(&[2]).is_err());
    }

    #[test]
    fn shifted_intersection_matches_scan() {
        let m = [8u64];
        let sets = [
            evens(8),
            evens(8).complement(),
            ValueSet::points([vec![1], vec![2]]),
            ValueSet::zero(1).complement(),
            ValueSet::span(vec![vec![4]]).complement(),
        ];
        for a in &sets {
            for b in &sets {
                for d in 0..8 {
                    let want = (0..8).any(|e| a.contains(&m, &[e]) && b.contains(&m, &[(e + d) % 8]));
                    assert_eq!(a.intersects_shifted(b, &[d], &m).unwrap(), want, "{a:?} {b:?} {d}");
                }
            }
        }
    }
}
