//! Binary encoding of Sudoku solutions with good columns as boolean functions on `Z²`, indexed
//! by lines: the point `(i, j)` stands for `ℓ_{i,j} = {(n, jn + i)}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functional::{compile_property, functional_to_tiling, Compiled, Omega, PropertySpec};
use crate::group::GroupSpec;
use crate::sudoku::{analyze_sequence, has_good_columns, line_range, BoardParams, SudokuWindow};
use crate::tiling::TilingSystem;

/// `B(ε_0, …, ε_{s-1}) = Σ ε_b 2^b`.
pub fn binary_encode(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (b, &e)| acc | (u64::from(e & 1) << b))
}

pub fn binary_decode(v: u64, s0: u32) -> Vec<u8> {
    (0..s0).map(|b| ((v >> b) & 1) as u8).collect()
}

/// Position of `β_{a,b,n}` inside a point's bit vector.
pub fn bit_index(params: BoardParams, a: usize, b: usize, n: usize) -> usize {
    (a * params.n + (n - 1)) * params.s0 as usize + b
}

/// `β_{a,b,n}(i, j)` for every `(i, j)` whose line fits the source window, `|j| ≤ max_slope`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BetaData", into = "BetaData")]
pub struct BetaTuple {
    params: BoardParams,
    m_lo: i64,
    m_hi: i64,
    max_slope: i64,
    points: BTreeMap<(i64, i64), Vec<u8>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaPoint {
    pub i: i64,
    pub j: i64,
    /// Bits `β_{a,b,n}` packed little-endian into bytes, hex encoded.
    pub bits: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaData {
    pub s0: u32,
    pub n: usize,
    pub m_lo: i64,
    pub m_hi: i64,
    pub max_slope: i64,
    pub points: Vec<BetaPoint>,
}

fn pack(bits: &[u8]) -> String {
    bits.chunks(8)
        .map(|c| format!("{:02x}", binary_encode(c)))
        .collect()
}

fn unpack(hex: &str, len: usize) -> Result<Vec<u8>> {
    if hex.len() != len.div_ceil(8) * 2 {
        return invalid(format!("expected {} hex digits", len.div_ceil(8) * 2));
    }
    let mut bits = Vec::with_capacity(len);
    for k in (0..hex.len()).step_by(2) {
        let byte = u8::from_str_radix(&hex[k..k + 2], 16)
            .map_err(|_| Error::Invalid(format!("bad hex byte {:?}", &hex[k..k + 2])))?;
        bits.extend((0..8).map(|b| (byte >> b) & 1));
    }
    bits.truncate(len);
    Ok(bits)
}

impl TryFrom<BetaData> for BetaTuple {
    type Error = Error;

    fn try_from(d: BetaData) -> Result<Self> {
        let params = BoardParams::with_columns(d.s0, d.n)?;
        let width = 2 * d.s0 as usize * d.n;
        let mut points = BTreeMap::new();
        for p in d.points {
            points.insert((p.i, p.j), unpack(&p.bits, width)?);
        }
        let t = BetaTuple {
            params,
            m_lo: d.m_lo,
            m_hi: d.m_hi,
            max_slope: d.max_slope,
            points,
        };
        let expected = t.domain();
        if expected.len() != t.points.len() || expected.iter().any(|k| !t.points.contains_key(k)) {
            return invalid("points do not match the domain of the window and slope bound");
        }
        Ok(t)
    }
}

impl From<BetaTuple> for BetaData {
    fn from(t: BetaTuple) -> Self {
        BetaData {
            s0: t.params.s0,
            n: t.params.n,
            m_lo: t.m_lo,
            m_hi: t.m_hi,
            max_slope: t.max_slope,
            points: t
                .points
                .iter()
                .map(|(&(i, j), bits)| BetaPoint { i, j, bits: pack(bits) })
                .collect(),
        }
    }
}

fn domain_of(params: BoardParams, m_lo: i64, m_hi: i64, max_slope: i64) -> Vec<(i64, i64)> {
    let big_n = params.n as i64;
    let mut out = Vec::new();
    for j in -max_slope..=max_slope {
        let lo = m_lo - j.min(j * big_n);
        let hi = m_hi - j.max(j * big_n);
        out.extend((lo..=hi).map(|i| (i, j)));
    }
    out
}

impl BetaTuple {
    pub fn params(&self) -> BoardParams {
        self.params
    }

    pub fn max_slope(&self) -> i64 {
        self.max_slope
    }

    pub fn domain(&self) -> Vec<(i64, i64)> {
        domain_of(self.params, self.m_lo, self.m_hi, self.max_slope)
    }

    pub fn points(&self) -> &BTreeMap<(i64, i64), Vec<u8>> {
        &self.points
    }

    pub fn bit(&self, i: i64, j: i64, a: usize, b: usize, n: usize) -> Option<u8> {
        self.points
            .get(&(i, j))
            .map(|v| v[bit_index(self.params, a, b, n)])
    }

    pub fn flip(&mut self, i: i64, j: i64, a: usize, b: usize, n: usize) -> Result<()> {
        let k = bit_index(self.params, a, b, n);
        match self.points.get_mut(&(i, j)) {
            Some(v) => {
                v[k] ^= 1;
                Ok(())
            }
            None => invalid(format!("({i}, {j}) is outside the domain")),
        }
    }

    /// `B(β_{a,·,n}(i, j))`.
    pub fn digit(&self, i: i64, j: i64, a: usize, n: usize) -> Option<u64> {
        let s = self.params.s0 as usize;
        let k = bit_index(self.params, a, 0, n);
        self.points.get(&(i, j)).map(|v| binary_encode(&v[k..k + s]))
    }
}

/// Encodes `F` and its column permutations. The slope bound defaults to the largest for which
/// a line fits.
pub fn encode_solution(
    w: &SudokuWindow,
    sigma: &[Vec<u64>],
    max_slope: Option<i64>,
) -> Result<BetaTuple> {
    let params = w.params();
    let q = w.q();
    if sigma.len() != params.n || sigma.iter().any(|p| p.len() != q as usize) {
        return Err(Error::Precondition(
            "need one permutation of Z/q per column".into(),
        ));
    }
    match has_good_columns(w)? {
        None => return Err(Error::Precondition("window lacks good columns".into())),
        Some(_) => {
            for n in 1..=params.n {
                for m in w.m_lo()..=w.m_hi() {
                    let s = sigma[n - 1][m.rem_euclid(q as i64) as usize];
                    if s != 0 && s != w.get(n, m) {
                        return Err(Error::Precondition(format!(
                            "σ_{n} disagrees with F({n}, {m})"
                        )));
                    }
                }
            }
        }
    }
    let fit = (w.height() as i64 - 1) / (params.n as i64 - 1).max(1);
    let max_slope = max_slope.unwrap_or(fit);
    if max_slope < 0 || line_range(w, max_slope).is_none() {
        return Err(Error::WindowTooSmall(format!(
            "no line of slope {max_slope} fits"
        )));
    }
    let s = params.s0 as usize;
    let points = domain_of(params, w.m_lo(), w.m_hi(), max_slope)
        .into_par_iter()
        .map(|(i, j)| {
            let mut bits = vec![0u8; 2 * s * params.n];
            for n in 1..=params.n {
                let m = j * n as i64 + i;
                let perm = sigma[n - 1][m.rem_euclid(q as i64) as usize];
                for (a, v) in [(0, perm), (1, w.get(n, m))] {
                    let k = bit_index(params, a, 0, n);
                    bits[k..k + s].copy_from_slice(&binary_decode(v, params.s0));
                }
            }
            ((i, j), bits)
        })
        .collect();
    Ok(BetaTuple {
        params,
        m_lo: w.m_lo(),
        m_hi: w.m_hi(),
        max_slope,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomFailure {
    pub axiom: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub passed: [bool; 4],
    /// First witness per failing axiom.
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.passed.iter().all(|&p| p)
    }
}

const AXIOMS: [&str; 4] = ["I", "II", "III", "IV"];

/// The check of one axiom at one point (or one run of points starting there).
fn axiom_witness(t: &BetaTuple, axiom: usize, (i, j): (i64, i64)) -> Option<String> {
    let p = t.params;
    let q = p.q();
    match axiom {
        0 => {
            let g: Vec<u64> = (1..=p.n).map(|n| t.digit(i, j, 1, n).unwrap()).collect();
            analyze_sequence(p.s0, &g)
                .is_none()
                .then(|| format!("line ({i}, {j}) reads {g:?}, not in S[N]"))
        }
        1 => (1..=p.n).find_map(|n| {
            let s = t.digit(i, j, 0, n).unwrap();
            let f = t.digit(i, j, 1, n).unwrap();
            (s != 0 && s != f).then(|| format!("at ({i}, {j}), n = {n}: σ digit {s} but F digit {f}"))
        }),
        2 => (1..=p.n).find_map(|n| {
            let (i2, j2) = (i - n as i64, j + 1);
            let here = t.points.get(&(i, j)).unwrap();
            let there = t.points.get(&(i2, j2))?;
            (0..2).find_map(|a| {
                let k = bit_index(p, a, 0, n);
                let s = p.s0 as usize;
                (here[k..k + s] != there[k..k + s]).then(|| {
                    format!("β_{{{a},·,{n}}} differs between ({i}, {j}) and ({i2}, {j2})")
                })
            })
        }),
        _ => {
            let run: Option<Vec<u64>> =
                (0..q as i64).map(|d| t.digit(i + d, j, 0, 1)).collect::<Option<_>>();
            run.as_ref()?;
            (1..=p.n).find_map(|n| {
                let mut seen = vec![false; q as usize];
                for d in 0..q as i64 {
                    let v = t.digit(i + d, j, 0, n).unwrap() as usize;
                    if seen[v] {
                        return Some(format!(
                            "column {n}: digit {v} repeats among i = {i}..{} at j = {j}",
                            i + q as i64 - 1
                        ));
                    }
                    seen[v] = true;
                }
                None
            })
        }
    }
}

/// Properties I–IV on the whole domain: line membership in `S[N]`, good-column consistency,
/// `⟨(-n, 1)⟩`-periodicity, and the periodized permutation property along `(1, 0)`.
pub fn check_axioms(t: &BetaTuple) -> AxiomReport {
    let domain = t.domain();
    let mut passed = [true; 4];
    let mut failures = Vec::new();
    for (axiom, ok) in passed.iter_mut().enumerate() {
        let found = domain
            .par_iter()
            .filter_map(|&pt| axiom_witness(t, axiom, pt).map(|d| (pt.1, pt.0, d)))
            .min();
        if let Some((_, _, detail)) = found {
            *ok = false;
            failures.push(AxiomFailure {
                axiom: AXIOMS[axiom].into(),
                detail,
            });
        }
    }
    AxiomReport { passed, failures }
}

/// Axiom checks that involve the point `(i, j)`; enough to detect a change made only there.
pub fn check_axioms_near(t: &BetaTuple, i: i64, j: i64) -> AxiomReport {
    let p = t.params;
    let q = p.q() as i64;
    let mut passed = [true; 4];
    let mut failures = Vec::new();
    let mut record = |axiom: usize, w: Option<String>| {
        if let (true, Some(detail)) = (passed[axiom], w) {
            passed[axiom] = false;
            failures.push(AxiomFailure {
                axiom: AXIOMS[axiom].into(),
                detail,
            });
        }
    };
    if !t.points.contains_key(&(i, j)) {
        return AxiomReport { passed, failures };
    }
    record(0, axiom_witness(t, 0, (i, j)));
    record(1, axiom_witness(t, 1, (i, j)));
    record(2, axiom_witness(t, 2, (i, j)));
    for n in 1..=p.n as i64 {
        if t.points.contains_key(&(i + n, j - 1)) {
            record(2, axiom_witness(t, 2, (i + n, j - 1)));
        }
    }
    for d in 0..q {
        record(3, axiom_witness(t, 3, (i - d, j)));
    }
    AxiomReport { passed, failures }
}

/// Recovers `F` (from the horizontal lines) and the permutations `σ_n`.
pub fn decode_beta(t: &BetaTuple) -> Result<(SudokuWindow, Vec<Vec<u64>>)> {
    let report = check_axioms(t);
    if let Some(f) = report.failures.first() {
        let axiom = AXIOMS.iter().find(|&&a| a == f.axiom).copied().unwrap_or("?");
        return Err(Error::Axiom {
            axiom,
            detail: f.detail.clone(),
        });
    }
    let q = t.params.q() as i64;
    let w = SudokuWindow::from_fn(t.params, t.m_lo, t.m_hi, |n, m| {
        t.digit(m, 0, 1, n).expect("horizontal line present")
    })?;
    if w.height() < q as usize {
        return Err(Error::WindowTooSmall("need q horizontal lines to read σ".into()));
    }
    let sigma = (1..=t.params.n)
        .map(|n| {
            let mut s = vec![0u64; q as usize];
            for m in t.m_lo..t.m_lo + q {
                s[m.rem_euclid(q) as usize] = t.digit(m, 0, 0, n).unwrap();
            }
            s
        })
        .collect();
    Ok((w, sigma))
}

/// Membership in `Ω ⊂ {0,1}^{2 s0 N}`, bits laid out as in [`bit_index`].
pub fn omega_contains(params: BoardParams, omega: &[u8]) -> bool {
    let s = params.s0 as usize;
    let digit = |a: usize, n: usize| {
        let k = bit_index(params, a, 0, n);
        binary_encode(&omega[k..k + s])
    };
    let line: Vec<u64> = (1..=params.n).map(|n| digit(1, n)).collect();
    if analyze_sequence(params.s0, &line).is_none() {
        return false;
    }
    (1..=params.n).all(|n| {
        let s = digit(0, n);
        s == 0 || s == digit(1, n)
    })
}

/// Membership in the symmetrized `Ω̃`: apply `R_{ω*}` to every bit, then test `Ω`.
pub fn omega_tilde_contains(params: BoardParams, star: u8, omega: &[u8]) -> bool {
    if star == 0 {
        return omega_contains(params, omega);
    }
    let flipped: Vec<u8> = omega.iter().map(|b| 1 - b).collect();
    omega_contains(params, &flipped)
}

/// Shape of the encoded property on `G = Z² × (Z/2Z)³`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyShape {
    pub group: String,
    pub components: usize,
    /// Bits `M` of the codomain `Z/2^M`, the least with `2^M > 2W + 4`.
    pub m: u32,
    pub codomain: String,
    /// Axiom (b): one periodicity constraint per `β_{a,b,n}`.
    pub periodicity_constraints: usize,
    /// Axiom (c): one boolean periodized permutation per column, of `s0` functions each.
    pub permutation_constraints: usize,
}

#[derive(Clone, Debug)]
pub struct AssembledS {
    pub shape: PropertyShape,
    pub property: Option<PropertySpec>,
    pub compiled: Option<Compiled>,
}

pub const TOY_MAX_COMPONENTS: usize = 8;

/// The property `S`: symmetric constraint `P_Ω̃`, periodicity of each `α_{a,b,n}` along
/// `((-n, 1), 0)`, and per-column periodized permutations along `((1, 0), 0)`. Only toy
/// parameters are compiled; otherwise the shape is reported.
pub fn assemble_property_s(params: BoardParams, toy: bool) -> Result<AssembledS> {
    let w = 1 + 2 * params.s0 as usize * params.n;
    let mut m = 1u32;
    while (1u128 << m) <= 2 * w as u128 + 4 {
        m += 1;
    }
    let shape = PropertyShape {
        group: "Z^2 x (Z/2Z)^3".into(),
        components: w,
        m,
        codomain: format!("(Z/2^{m}Z)^{w}"),
        periodicity_constraints: w - 1,
        permutation_constraints: params.n,
    };
    if !toy {
        return Ok(AssembledS {
            shape,
            property: None,
            compiled: None,
        });
    }
    if w > TOY_MAX_COMPONENTS {
        return Err(Error::CapExceeded {
            what: "toy components".into(),
            required: w as u128,
            cap: TOY_MAX_COMPONENTS as u128,
        });
    }
    let g = GroupSpec::new(2, vec![2, 2, 2])?;
    let e = vec![0, 0, 1, 0, 0];
    let e1 = vec![0, 0, 0, 1, 0];
    let e2 = vec![0, 0, 0, 0, 1];
    let modulus = 1u64 << m;
    let codomain = vec![modulus; w];
    let mut excluded = Vec::new();
    for code in 0..1u64 << w {
        let y: Vec<u8> = (0..w).map(|k| ((code >> k) & 1) as u8).collect();
        if !omega_tilde_contains(params, y[0], &y[1..]) {
            excluded.push(y);
        }
    }
    let mut parts = vec![PropertySpec::SymmetricBooleanConstraint {
        domain: g.clone(),
        e: e.clone(),
        e_prime: e1.clone(),
        e_dprime: e2.clone(),
        m,
        w,
        omega: Omega::Exclude { patterns: excluded },
        cap: 1 << w,
    }];
    for a in 0..2 {
        for b in 0..params.s0 as usize {
            for n in 1..=params.n {
                parts.push(PropertySpec::Lift {
                    inner: Box::new(PropertySpec::Periodic {
                        domain: g.clone(),
                        codomain: vec![modulus],
                        periods: vec![vec![-(n as i64), 1, 0, 0, 0]],
                    }),
                    codomain: codomain.clone(),
                    placement: vec![1 + bit_index(params, a, b, n)],
                });
            }
        }
    }
    for n in 1..=params.n {
        parts.push(PropertySpec::Lift {
            inner: Box::new(PropertySpec::BooleanPeriodizedPermutation {
                domain: g.clone(),
                e: e.clone(),
                e_prime: e1.clone(),
                e_dprime: e2.clone(),
                m,
                w: params.s0 as usize,
                v: vec![1, 0, 0, 0, 0],
            }),
            codomain: codomain.clone(),
            placement: (0..params.s0 as usize)
                .map(|b| 1 + bit_index(params, 0, b, n))
                .collect(),
        });
    }
    let property = PropertySpec::Conjunction { parts };
    let compiled = compile_property(&property)?;
    Ok(AssembledS {
        shape,
        property: Some(property),
        compiled: Some(compiled),
    })
}

/// Writes the compiled toy system out as tiles, subject to `cap` on the codomain size.
pub fn compile_s_to_tiling(s: &AssembledS, cap: usize) -> Result<TilingSystem> {
    let compiled = s
        .compiled
        .as_ref()
        .ok_or_else(|| Error::Precondition("only toy assemblies are compiled".into()))?;
    functional_to_tiling(compiled.system(), cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        assert_eq!(binary_encode(&[1, 0]), 1);
        assert_eq!(binary_encode(&[1, 1]), 3);
        for s0 in 1..=4 {
            for v in 0..1u64 << s0 {
                assert_eq!(binary_encode(&binary_decode(v, s0)), v);
            }
        }
    }

    #[test]
    fn hex_packing() {
        let bits = vec![1, 0, 1, 1, 0, 0, 0, 0, 1, 1];
        assert_eq!(unpack(&pack(&bits), bits.len()).unwrap(), bits);
    }
}
