//! Rigid partitions of `Z/NZ`, stacking a tiling system into one tile, and the
//! rigid box tile `R_d` with its discrete-to-continuous lift.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::tiling::{Tile, TilingSystem};

pub const MAX_PARTITION_N: u64 = 1 << 24;
const ATTEMPTS_PER_N: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidPartition {
    pub n: u64,
    pub parts: Vec<BTreeSet<u64>>,
}

impl RigidPartition {
    /// Part index of every residue; errors if the parts do not partition `Z/NZ`.
    pub fn labels(&self) -> Result<Vec<usize>> {
        if self.n == 0 {
            return invalid("N must be positive");
        }
        let mut label = vec![usize::MAX; self.n as usize];
        for (i, part) in self.parts.iter().enumerate() {
            if part.is_empty() {
                return invalid(format!("part {} is empty", i + 1));
            }
            for &x in part {
                if x >= self.n {
                    return invalid(format!("{x} is not a residue mod {}", self.n));
                }
                if label[x as usize] != usize::MAX {
                    return invalid(format!("{x} lies in two parts"));
                }
                label[x as usize] = i;
            }
        }
        if let Some(x) = label.iter().position(|&l| l == usize::MAX) {
            return invalid(format!("{x} lies in no part"));
        }
        Ok(label)
    }

    fn from_labels(n: u64, m: usize, label: &[usize]) -> Self {
        let mut parts = vec![BTreeSet::new(); m];
        for (x, &l) in label.iter().enumerate() {
            parts[l].insert(x as u64);
        }
        RigidPartition { n, parts }
    }
}

/// True iff `E_i ∩ (E_j + h) ≠ ∅` for all `i, j` and every `h ≠ 0`.
pub fn verify_rigid_partition(p: &RigidPartition) -> Result<bool> {
    let label = p.labels()?;
    Ok(labels_are_rigid(&label, p.parts.len()))
}

fn labels_are_rigid(label: &[usize], m: usize) -> bool {
    let n = label.len();
    let mut seen = vec![false; m * m];
    for h in 1..n {
        seen.iter_mut().for_each(|s| *s = false);
        let mut hit = 0;
        for x in 0..n {
            // x ∈ E_i and x - h ∈ E_j witnesses E_i ∩ (E_j + h).
            let k = label[x] * m + label[(x + n - h) % n];
            if !seen[k] {
                seen[k] = true;
                hit += 1;
                if hit == m * m {
                    break;
                }
            }
        }
        if hit < m * m {
            return false;
        }
    }
    true
}

/// Random level-set construction: N starts at 8 (2 when M = 1) and doubles until a
/// draw verifies. Draws come from a ChaCha8 stream seeded with `seed`, so the result
/// is a function of `(M, seed)`.
pub fn build_rigid_partition(m: usize, seed: u64) -> Result<RigidPartition> {
    if m == 0 {
        return invalid("M must be >= 1");
    }
    if m == 1 {
        return Ok(RigidPartition::from_labels(2, 1, &[0, 0]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n: u64 = 8;
    while n <= MAX_PARTITION_N {
        if n as usize >= m {
            for _ in 0..ATTEMPTS_PER_N {
                let label: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
                let mut used = vec![false; m];
                label.iter().for_each(|&l| used[l] = true);
                if used.iter().all(|&u| u) && labels_are_rigid(&label, m) {
                    return Ok(RigidPartition::from_labels(n, m, &label));
                }
            }
        }
        n *= 2;
    }
    Err(Error::CapExceeded {
        what: "rigid partition modulus".into(),
        required: (MAX_PARTITION_N as u128) * 2,
        cap: MAX_PARTITION_N as u128,
    })
}

/// Every rigid partition of `Z/NZ` into `M` labelled parts, by exhausting all labellings.
pub fn exhaustive_rigid_partitions(m: usize, n: u64) -> Result<Vec<RigidPartition>> {
    if m == 0 || n == 0 {
        return invalid("M and N must be positive");
    }
    let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > 1 << 24 {
        return Err(Error::CapExceeded {
            what: "labellings".into(),
            required: total,
            cap: 1 << 24,
        });
    }
    let mut out = vec![];
    let mut label = vec![0usize; n as usize];
    for mut k in 0..total {
        for l in label.iter_mut() {
            *l = (k % m as u128) as usize;
            k /= m as u128;
        }
        let mut used = vec![false; m];
        label.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) && labels_are_rigid(&label, m) {
            out.push(RigidPartition::from_labels(n, m, &label));
        }
    }
    Ok(out)
}

/// `F̃ = ⊎_m F_m × E_m` inside `G × Z/NZ`.
pub fn stack_system(system: &TilingSystem, p: &RigidPartition) -> Result<Tile> {
    p.labels()?;
    if system.tiles.len() != p.parts.len() {
        return invalid(format!(
            "system has {} tiles but the partition has {} parts",
            system.tiles.len(),
            p.parts.len()
        ));
    }
    let zn = GroupSpec::cyclic(p.n);
    let group = system.group.product(&zn);
    let mut elements = BTreeSet::new();
    for (tile, part) in system.tiles.iter().zip(&p.parts) {
        for f in tile {
            for &e in part {
                elements.insert(GroupElement(system.group.pair(&zn, &f.0, &[e as i64])));
            }
        }
    }
    Ok(Tile { group, elements })
}

/// Projects a set in `G × Z/NZ` to its `G` coordinates.
pub fn project_stacked(
    g: &GroupSpec,
    n: u64,
    points: impl IntoIterator<Item = GroupElement>,
) -> BTreeSet<GroupElement> {
    let zn = GroupSpec::cyclic(n);
    points
        .into_iter()
        .map(|x| GroupElement(g.split(&zn, &x.0).0))
        .collect()
}

// ---------------------------------------------------------------------------
// Boxes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoxOp {
    #[default]
    Add,
    Remove,
}

/// Half-open-agnostic axis-aligned box `∏ [lo_i, hi_i]` with rational corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatBox {
    #[serde(with = "rat_vec")]
    pub lo: Vec<BigRational>,
    #[serde(with = "rat_vec")]
    pub hi: Vec<BigRational>,
    #[serde(default, skip_serializing_if = "is_add")]
    pub op: BoxOp,
}

fn is_add(op: &BoxOp) -> bool {
    *op == BoxOp::Add
}

impl RatBox {
    pub fn new(lo: Vec<BigRational>, hi: Vec<BigRational>, op: BoxOp) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return invalid("box corners must have equal, positive dimension");
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return invalid("box must have lo < hi in every coordinate");
        }
        Ok(RatBox { lo, hi, op })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> BigRational {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(BigRational::one(), |acc, (a, b)| acc * (b - a))
    }

    pub fn translate(&self, v: &[BigRational]) -> RatBox {
        RatBox {
            lo: self.lo.iter().zip(v).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(v).map(|(a, b)| a + b).collect(),
            op: self.op,
        }
    }

    fn sign(&self) -> i64 {
        match self.op {
            BoxOp::Add => 1,
            BoxOp::Remove => -1,
        }
    }
}

/// A set described as a signed sum of box indicators: `1_S = Σ ±1_{box}`.
/// Valid sets have this sum in `{0,1}` almost everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxSet {
    pub boxes: Vec<RatBox>,
}

impl BoxSet {
    pub fn new(boxes: Vec<RatBox>) -> Result<Self> {
        let s = BoxSet { boxes };
        s.check_dims()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.boxes.first().map_or(0, RatBox::dim)
    }

    fn check_dims(&self) -> Result<()> {
        let d = self.dim();
        if self.boxes.iter().any(|b| b.dim() != d) {
            return invalid("boxes of mixed dimension");
        }
        for b in &self.boxes {
            if b.lo.iter().zip(&b.hi).any(|(a, c)| a >= c) {
                return invalid("box must have lo < hi in every coordinate");
            }
        }
        Ok(())
    }

    /// Signed measure `Σ ±vol`.
    pub fn measure(&self) -> BigRational {
        self.boxes
            .iter()
            .map(|b| b.volume() * BigRational::from_integer(b.sign().into()))
            .sum()
    }

    /// Errors unless the signed indicator is `{0,1}`-valued almost everywhere.
    pub fn validate(&self) -> Result<()> {
        self.check_dims()?;
        let d = self.dim();
        if d == 0 {
            return Ok(());
        }
        let grids: Vec<Vec<BigRational>> = (0..d)
            .map(|k| {
                let mut v: Vec<BigRational> = self
                    .boxes
                    .iter()
                    .flat_map(|b| [b.lo[k].clone(), b.hi[k].clone()])
                    .collect();
                v.sort();
                v.dedup();
                v
            })
            .collect();
        let mids: Vec<Vec<BigRational>> = grids.iter().map(|g| midpoints(g)).collect();
        // inside[k][cell][box]
        let inside: Vec<Vec<Vec<bool>>> = (0..d)
            .map(|k| {
                mids[k]
                    .iter()
                    .map(|m| {
                        self.boxes
                            .iter()
                            .map(|b| &b.lo[k] < m && m < &b.hi[k])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut bad = None;
        for_each_cell(&mids, |idx| {
            let mut v = 0i64;
            for (bi, b) in self.boxes.iter().enumerate() {
                if (0..d).all(|k| inside[k][idx[k]][bi]) {
                    v += b.sign();
                }
            }
            if v != 0 && v != 1 && bad.is_none() {
                bad = Some((idx.to_vec(), v));
            }
        });
        match bad {
            None => Ok(()),
            Some((idx, v)) => {
                let p: Vec<String> = (0..d).map(|k| mids[k][idx[k]].to_string()).collect();
                Err(Error::Overlap(format!(
                    "signed box sum is {v} near ({})",
                    p.join(", ")
                )))
            }
        }
    }
}

fn midpoints(grid: &[BigRational]) -> Vec<BigRational> {
    let two = BigRational::from_integer(BigInt::from(2));
    grid.windows(2).map(|w| (&w[0] + &w[1]) / &two).collect()
}

fn for_each_cell(mids: &[Vec<BigRational>], mut f: impl FnMut(&[usize])) {
    let d = mids.len();
    if mids.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; d];
    loop {
        f(&idx);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < mids[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// `R_d = (Q_d \ ⊎ C_k) ⊎ ⊎ (C_k + e_k)` where
/// `C_k = ∏_{j<k}[x_j, x_j+ε] × [0, ε] × ∏_{j>k}[x_j, x_j+ε]`.
pub fn build_rigid_tile_boxes(d: usize, eps: &BigRational, x: &[BigRational]) -> Result<BoxSet> {
    if d == 0 {
        return Err(Error::Precondition("d >= 1 required".into()));
    }
    if x.len() != d {
        return Err(Error::Precondition(format!(
            "x must have {d} coordinates, got {}",
            x.len()
        )));
    }
    if !eps.is_positive() {
        return Err(Error::Precondition("0 < ε violated".into()));
    }
    if *eps >= rat(1, 5) {
        return Err(Error::Precondition("ε < 1/5 violated".into()));
    }
    let two_eps = eps * BigRational::from_integer(2.into());
    let upper = BigRational::one() - eps * BigRational::from_integer(3.into());
    for (j, xj) in x.iter().enumerate() {
        if *xj <= two_eps {
            return Err(Error::Precondition(format!(
                "2ε < x_{} violated",
                j + 1
            )));
        }
        if *xj >= upper {
            return Err(Error::Precondition(format!(
                "x_{} < 1 - 3ε violated",
                j + 1
            )));
        }
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut boxes = vec![RatBox::new(vec![zero.clone(); d], vec![one.clone(); d], BoxOp::Add)?];
    let mut bumps = vec![];
    for k in 0..d {
        let lo: Vec<BigRational> = (0..d)
            .map(|j| if j == k { zero.clone() } else { x[j].clone() })
            .collect();
        let hi: Vec<BigRational> = lo.iter().map(|v| v + eps).collect();
        let c = RatBox::new(lo, hi, BoxOp::Remove)?;
        let mut e = vec![zero.clone(); d];
        e[k] = one.clone();
        let mut moved = c.translate(&e);
        moved.op = BoxOp::Add;
        boxes.push(c);
        bumps.push(moved);
    }
    boxes.extend(bumps);
    BoxSet::new(boxes)
}

/// Whether the Z^d-translates of `b` partition `region` up to measure zero.
pub fn verify_box_lattice_tiling(b: &BoxSet, region: &[(i64, i64)]) -> Result<bool> {
    let periods = vec![1; b.dim()];
    verify_box_periodic_tiling(b, &periods, region)
}

/// Same as [`verify_box_lattice_tiling`] for the lattice `⊕ p_k Z e_k`.
///
/// Exact slab sweep: every box face, translated by the lattice, is a breakpoint on its
/// axis; on each elementary cell the coverage is constant and is evaluated at the
/// cell midpoint by counting lattice translates per axis.
pub fn verify_box_periodic_tiling(
    b: &BoxSet,
    periods: &[i64],
    region: &[(i64, i64)],
) -> Result<bool> {
    b.validate()?;
    let d = b.dim();
    if region.len() != d || periods.len() != d {
        return invalid("region and periods must match the box dimension");
    }
    if region.iter().any(|&(lo, hi)| lo >= hi) || periods.iter().any(|&p| p <= 0) {
        return invalid("region must be non-degenerate and periods positive");
    }
    let mut mids = Vec::with_capacity(d);
    // counts[k][cell][box] = #{t ∈ Z : lo < mid - t p < hi}
    let mut counts: Vec<Vec<Vec<i64>>> = Vec::with_capacity(d);
    for k in 0..d {
        let p = BigRational::from_integer(periods[k].into());
        let (rlo, rhi) = (
            BigRational::from_integer(region[k].0.into()),
            BigRational::from_integer(region[k].1.into()),
        );
        let mut pts = vec![rlo.clone(), rhi.clone()];
        for bx in &b.boxes {
            for v in [&bx.lo[k], &bx.hi[k]] {
                // smallest translate ≥ rlo
                let t = ((&rlo - v) / &p).ceil();
                let mut y = v + &t * &p;
                while y <= rhi {
                    pts.push(y.clone());
                    y += &p;
                }
            }
        }
        pts.sort();
        pts.dedup();
        let m = midpoints(&pts);
        let c: Vec<Vec<i64>> = m
            .iter()
            .map(|mid| {
                b.boxes
                    .iter()
                    .map(|bx| {
                        let hi_t = ((mid - &bx.lo[k]) / &p).floor();
                        let lo_t = ((mid - &bx.hi[k]) / &p).floor();
                        (hi_t - lo_t).to_integer().to_i64().unwrap_or(i64::MAX)
                    })
                    .collect()
            })
            .collect();
        mids.push(m);
        counts.push(c);
    }
    let mut ok = true;
    for_each_cell(&mids, |idx| {
        if !ok {
            return;
        }
        let mut total = 0i64;
        for (bi, bx) in b.boxes.iter().enumerate() {
            let mut prod = 1i64;
            for k in 0..d {
                prod *= counts[k][idx[k]][bi];
                if prod == 0 {
                    break;
                }
            }
            total += bx.sign() * prod;
        }
        if total != 1 {
            ok = false;
        }
    });
    Ok(ok)
}

/// `Σ = F ⊕ B`: the union of `B + f` over `f ∈ F ⊂ Z^d`.
pub fn lift_discrete_tile(f: &Tile, b: &BoxSet) -> Result<BoxSet> {
    if !f.group.torsion_orders.is_empty() || f.group.free_rank != b.dim() {
        return Err(Error::GroupMismatch(format!(
            "tile over {} cannot be lifted into R^{}",
            f.group,
            b.dim()
        )));
    }
    let mut boxes = Vec::with_capacity(f.len() * b.boxes.len());
    for e in &f.elements {
        let v: Vec<BigRational> = e.0.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        boxes.extend(b.boxes.iter().map(|bx| bx.translate(&v)));
    }
    let s = BoxSet::new(boxes)?;
    s.validate()
        .map_err(|e| Error::Overlap(format!("translates of the box set overlap: {e}")))?;
    Ok(s)
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let r = BigRational::from_str(t).map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
    if r.denom().is_zero() {
        return invalid("zero denominator");
    }
    Ok(r)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_partitions() {
        let p = build_rigid_partition(1, 0).unwrap();
        assert_eq!(p.n, 2);
        assert!(verify_rigid_partition(&p).unwrap());
        let bad = RigidPartition {
            n: 4,
            parts: vec![[0, 1].into(), [2, 3].into()],
        };
        assert!(!verify_rigid_partition(&bad).unwrap());
        let p3 = build_rigid_partition(3, 0).unwrap();
        assert!(verify_rigid_partition(&p3).unwrap());
        assert!(p3.n <= 1 << 12 && p3.n.is_power_of_two());
        assert_eq!(build_rigid_partition(3, 0).unwrap(), p3);
    }

    #[test]
    fn no_two_part_rigid_partition_of_z4() {
        assert!(exhaustive_rigid_partitions(2, 4).unwrap().is_empty());
        assert!(!exhaustive_rigid_partitions(2, 8).unwrap().is_empty()
            || !exhaustive_rigid_partitions(2, 16).map(|v| v.is_empty()).unwrap_or(true));
    }

    #[test]
    fn not_a_partition_is_structural_error() {
        let p = RigidPartition {
            n: 4,
            parts: vec![[0, 1].into(), [1, 2, 3].into()],
        };
        assert!(verify_rigid_partition(&p).is_err());
    }

    #[test]
    fn one_dimensional_rigid_tile() {
        let r = build_rigid_tile_boxes(1, &rat(1, 8), &[rat(1, 2)]).unwrap();
        assert_eq!(r.measure(), BigRational::one());
        assert_eq!(r.boxes[1].lo, vec![rat(0, 1)]);
        assert_eq!(r.boxes[1].hi, vec![rat(1, 8)]);
        assert_eq!(r.boxes[2].lo, vec![rat(1, 1)]);
        assert_eq!(r.boxes[2].hi, vec![rat(9, 8)]);
        assert!(verify_box_lattice_tiling(&r, &[(0, 5)]).unwrap());
    }

    #[test]
    fn parameter_errors_name_the_inequality() {
        let e = build_rigid_tile_boxes(2, &rat(1, 4), &[rat(1, 2), rat(1, 2)]).unwrap_err();
        assert!(e.to_string().contains("ε < 1/5 violated"));
        let e = build_rigid_tile_boxes(2, &rat(1, 8), &[rat(1, 8), rat(1, 2)]).unwrap_err();
        assert!(e.to_string().contains("2ε < x_1"));
        let e = build_rigid_tile_boxes(2, &rat(1, 8), &[rat(1, 2), rat(7, 8)]).unwrap_err();
        assert!(e.to_string().contains("x_2 < 1 - 3ε"));
    }

    #[test]
    fn bump_without_removal_fails() {
        let mut r = build_rigid_tile_boxes(2, &rat(1, 8), &[rat(3, 8), rat(3, 8)]).unwrap();
        assert!(verify_box_lattice_tiling(&r, &[(0, 4), (0, 4)]).unwrap());
        r.boxes.remove(1);
        assert!(r.measure() > BigRational::one());
        assert!(!verify_box_lattice_tiling(&r, &[(0, 4), (0, 4)]).unwrap());
    }

    #[test]
    fn box_json_uses_rational_strings() {
        let r = build_rigid_tile_boxes(1, &rat(1, 8), &[rat(1, 2)]).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"1/8\""));
        let back: BoxSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let plain: BoxSet = serde_json::from_str(r#"[{"lo":["0","0"],"hi":["1","1"]}]"#).unwrap();
        assert!(verify_box_lattice_tiling(&plain, &[(0, 3), (0, 3)]).unwrap());
    }
}
