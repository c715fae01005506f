//! Library properties and their compilation to functional systems.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Codomain, Congruence, FunctionalEquation, FunctionalSystem, ValueSet};
use crate::error::{invalid, Error, Result};
use crate::group::GroupSpec;

fn default_omega_cap() -> usize {
    4096
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PropertySpec {
    /// `α(x + step) = α(x) + 1` in `Z/n`.
    Clock {
        domain: GroupSpec,
        n: u64,
        #[serde(default)]
        step: Option<Vec<i64>>,
    },
    /// `α(x), …, α(x + (n-1) step)` are distinct in `Z/n`.
    PeriodizedPermutation {
        domain: GroupSpec,
        n: u64,
        #[serde(default)]
        step: Option<Vec<i64>>,
    },
    /// `α` takes values in a single coset of the subgroup `H'`.
    ConstantModSubgroup {
        domain: GroupSpec,
        codomain: Vec<u64>,
        subgroup: ValueSet,
    },
    /// Invariance under the listed periods.
    Periodic {
        domain: GroupSpec,
        codomain: Vec<u64>,
        periods: Vec<Vec<i64>>,
    },
    /// `Σ c_w α_w(x)` is constant in `Z/modulus`.
    LinearConstraint {
        domain: GroupSpec,
        coefficients: Vec<i64>,
        modulus: u64,
    },
    /// `(e, {a, b})`-boolean into `Z/2^m`.
    Boolean { domain: GroupSpec, e: Vec<i64>, m: u32 },
    CompatibleBoolean {
        domain: GroupSpec,
        e: Vec<i64>,
        e_prime: Vec<i64>,
        e_dprime: Vec<i64>,
        m: u32,
        w: usize,
    },
    SymmetricBooleanConstraint {
        domain: GroupSpec,
        e: Vec<i64>,
        e_prime: Vec<i64>,
        e_dprime: Vec<i64>,
        m: u32,
        w: usize,
        omega: Omega,
        /// Refuse to emit more than this many excluded pairs.
        #[serde(default = "default_omega_cap")]
        cap: usize,
    },
    BooleanPeriodizedPermutation {
        domain: GroupSpec,
        e: Vec<i64>,
        e_prime: Vec<i64>,
        e_dprime: Vec<i64>,
        m: u32,
        w: usize,
        v: Vec<i64>,
    },
    /// Factor `w` of `inner` is factor `placement[w]` of `codomain`.
    Lift {
        inner: Box<PropertySpec>,
        codomain: Vec<u64>,
        placement: Vec<usize>,
    },
    /// `inner` lives on a subgroup; `embedding[i]` is the image of its i-th generator.
    Pullback {
        inner: Box<PropertySpec>,
        domain: GroupSpec,
        embedding: Vec<Vec<i64>>,
    },
    Conjunction { parts: Vec<PropertySpec> },
}

/// A symmetric subset of `{0,1}^W`, described by a membership rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Omega {
    Full,
    /// Everything except the two constant tuples.
    NotAllEqual,
    /// Everything except the listed tuples (the list must be closed under reflection).
    Exclude { patterns: Vec<Vec<u8>> },
    /// Tuples whose number of ones is allowed.
    Weights { allowed: Vec<usize> },
}

impl Omega {
    pub fn contains(&self, y: &[u8]) -> bool {
        match self {
            Omega::Full => true,
            Omega::NotAllEqual => !(y.iter().all(|&b| b == 0) || y.iter().all(|&b| b == 1)),
            Omega::Exclude { patterns } => !patterns.iter().any(|p| p == y),
            Omega::Weights { allowed } => {
                let ones = y.iter().filter(|&&b| b == 1).count();
                allowed.contains(&ones)
            }
        }
    }

    /// The excluded reflection pairs `{ε, 1-ε}`, each listed once with `ε_1 = 0`.
    pub fn excluded_pairs(&self, w: usize, cap: usize) -> Result<Vec<Vec<u8>>> {
        let reflect = |p: &[u8]| -> Vec<u8> { p.iter().map(|b| 1 - b).collect() };
        let canonical = |p: Vec<u8>| if p[0] == 0 { p } else { reflect(&p) };
        let out: BTreeSet<Vec<u8>> = match self {
            Omega::Full => BTreeSet::new(),
            Omega::NotAllEqual => [vec![0; w]].into(),
            Omega::Exclude { patterns } => {
                let set: BTreeSet<&Vec<u8>> = patterns.iter().collect();
                for p in patterns {
                    if p.len() != w || p.iter().any(|&b| b > 1) {
                        return invalid(format!("pattern {p:?} is not in {{0,1}}^{w}"));
                    }
                    if !set.contains(&reflect(p)) {
                        return Err(Error::Precondition(format!(
                            "Ω is not symmetric: {p:?} excluded but its reflection is not"
                        )));
                    }
                }
                patterns.iter().cloned().map(canonical).collect()
            }
            Omega::Weights { allowed } => {
                for &k in allowed {
                    if k > w || !allowed.contains(&(w - k)) {
                        return Err(Error::Precondition(format!(
                            "Ω is not symmetric: weight {k} allowed but {} is not",
                            w.saturating_sub(k)
                        )));
                    }
                }
                if w > 25 {
                    return Err(Error::CapExceeded {
                        what: "Ω scan".into(),
                        required: 1u128 << (w - 1).min(120),
                        cap: 1 << 24,
                    });
                }
                let mut s = BTreeSet::new();
                for bits in 0u64..(1u64 << (w - 1)) {
                    let p: Vec<u8> = (0..w)
                        .map(|i| if i == 0 { 0 } else { ((bits >> (i - 1)) & 1) as u8 })
                        .collect();
                    if !self.contains(&p) {
                        s.insert(p);
                        if s.len() > cap {
                            break;
                        }
                    }
                }
                s
            }
        };
        if w == 0 {
            return Ok(vec![]);
        }
        if out.len() > cap {
            return Err(Error::CapExceeded {
                what: "excluded Ω pairs".into(),
                required: out.len() as u128,
                cap: cap as u128,
            });
        }
        Ok(out.into_iter().collect())
    }
}

/// An expressible system whose last factors are existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistentialWrapper {
    pub inner: FunctionalSystem,
    /// Factors `0..visible` are the property's own functions; the rest are auxiliary.
    pub visible: usize,
}

impl ExistentialWrapper {
    pub fn quantified(&self) -> &[String] {
        &self.inner.codomain.names[self.visible..]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Compiled {
    Expressible(FunctionalSystem),
    Weak(ExistentialWrapper),
}

impl Compiled {
    pub fn system(&self) -> &FunctionalSystem {
        match self {
            Compiled::Expressible(s) => s,
            Compiled::Weak(w) => &w.inner,
        }
    }

    pub fn visible(&self) -> usize {
        match self {
            Compiled::Expressible(s) => s.codomain.len(),
            Compiled::Weak(w) => w.visible,
        }
    }

    pub fn into_wrapper(self) -> ExistentialWrapper {
        match self {
            Compiled::Expressible(s) => ExistentialWrapper {
                visible: s.codomain.len(),
                inner: s,
            },
            Compiled::Weak(w) => w,
        }
    }

    fn from_parts(sys: FunctionalSystem, visible: usize) -> Self {
        if visible == sys.codomain.len() {
            Compiled::Expressible(sys)
        } else {
            Compiled::Weak(ExistentialWrapper { inner: sys, visible })
        }
    }
}

pub fn compile_property(p: &PropertySpec) -> Result<Compiled> {
    let (sys, visible) = build(p)?;
    sys.validate()?;
    Ok(Compiled::from_parts(sys, visible))
}

fn build(p: &PropertySpec) -> Result<(FunctionalSystem, usize)> {
    use PropertySpec::*;
    match p {
        Clock { domain, n, step } => {
            check_modulus(*n)?;
            let step = step_or_default(domain, step)?;
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![*n]));
            s.push(FunctionalEquation::new(
                vec![0],
                vec![
                    (zero(domain), ValueSet::singleton(vec![1 % n])),
                    (step, ValueSet::zero(1).complement()),
                ],
            ));
            Ok((s, 1))
        }
        PeriodizedPermutation { domain, n, step } => {
            check_modulus(*n)?;
            let step = step_or_default(domain, step)?;
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![*n]));
            let terms = (0..*n as i64)
                .map(|j| (step.iter().map(|c| c * j).collect(), ValueSet::zero(1)))
                .collect();
            s.push(FunctionalEquation::new(vec![0], terms));
            Ok((s, 1))
        }
        ConstantModSubgroup {
            domain,
            codomain,
            subgroup,
        } => {
            if !subgroup.is_subgroup() {
                return invalid("subgroup must be given by generators or congruences");
            }
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(codomain.clone()));
            add_const_mod(&mut s, (0..codomain.len()).collect(), subgroup.clone());
            Ok((s, codomain.len()))
        }
        Periodic {
            domain,
            codomain,
            periods,
        } => {
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(codomain.clone()));
            for p in periods {
                domain.element(p)?;
                add_periodic_along(&mut s, (0..codomain.len()).collect(), p);
            }
            Ok((s, codomain.len()))
        }
        LinearConstraint {
            domain,
            coefficients,
            modulus,
        } => {
            check_modulus(*modulus)?;
            let w = coefficients.len();
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![*modulus; w]));
            let row = Congruence {
                coeffs: coefficients.clone(),
                modulus: *modulus,
            };
            add_const_mod(&mut s, (0..w).collect(), ValueSet::kernel(vec![row]));
            Ok((s, w))
        }
        Boolean { domain, e, m } => {
            let modulus = two_power(*m, 1)?;
            check_order_two(domain, e, "e")?;
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![modulus]));
            add_boolean(&mut s, 0, e, modulus);
            Ok((s, 1))
        }
        CompatibleBoolean {
            domain,
            e,
            e_prime,
            e_dprime,
            m,
            w,
        } => {
            let modulus = two_power(*m, 2)?;
            check_triple(domain, e, e_prime, e_dprime)?;
            if *w == 0 {
                return invalid("W must be >= 1");
            }
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![modulus; *w]));
            let alphas: Vec<usize> = (0..*w).collect();
            add_compatible_boolean(&mut s, &alphas, [e, e_prime, e_dprime], modulus, "cb");
            Ok((s, *w))
        }
        SymmetricBooleanConstraint {
            domain,
            e,
            e_prime,
            e_dprime,
            m,
            w,
            omega,
            cap,
        } => {
            let modulus = two_power(*m, 2)?;
            check_triple(domain, e, e_prime, e_dprime)?;
            if *w == 0 {
                return invalid("W must be >= 1");
            }
            if (modulus as u128) <= 2 * *w as u128 + 4 {
                return Err(Error::Precondition(format!(
                    "2^M > 2W+4 violated (M = {m}, W = {w})"
                )));
            }
            let excluded = omega.excluded_pairs(*w, *cap)?;
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![modulus; *w]));
            let mut family: Vec<usize> = (0..*w).collect();
            if excluded.is_empty() {
                add_compatible_boolean(&mut s, &family, [e, e_prime, e_dprime], modulus, "cb");
                return Ok((s, *w));
            }
            // Pad to an odd W' >= 3 with free dummy booleans; Ω' = Ω × {0,1}^pad.
            let pad = match *w {
                1 => 2,
                w if w % 2 == 0 => 1,
                _ => 0,
            };
            for i in 0..pad {
                family.push(s.codomain.push(format!("pad{}", i + 1), modulus));
            }
            let wp = w + pad;
            let alphas = family.clone();
            for (k, eps) in excluded.iter().enumerate() {
                for eta in 0..(1usize << pad) {
                    let mut full = eps.clone();
                    full.extend((0..pad).map(|i| ((eta >> i) & 1) as u8));
                    let tag: String = full.iter().map(|b| char::from(b'0' + b)).collect();
                    let betas: Vec<usize> = (1..=wp - 2)
                        .map(|i| s.codomain.push(format!("omega{}.{tag}.beta{i}", k + 1), modulus))
                        .collect();
                    let mut support = alphas.clone();
                    support.extend(&betas);
                    let mut coeffs: Vec<i64> = full.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect();
                    coeffs.extend(std::iter::repeat_n(-1, betas.len()));
                    add_const_mod(
                        &mut s,
                        support,
                        ValueSet::kernel(vec![Congruence {
                            coeffs,
                            modulus,
                        }]),
                    );
                    family.extend(betas);
                }
            }
            add_compatible_boolean(&mut s, &family, [e, e_prime, e_dprime], modulus, "cb");
            Ok((s, *w))
        }
        BooleanPeriodizedPermutation {
            domain,
            e,
            e_prime,
            e_dprime,
            m,
            w,
            v,
        } => {
            let modulus = two_power(*m, 2)?;
            check_triple(domain, e, e_prime, e_dprime)?;
            if *w == 0 || *w > 16 {
                return invalid("W must be in 1..=16");
            }
            domain.element(v)?;
            let mut s = FunctionalSystem::new(domain.clone(), Codomain::new(vec![modulus; *w]));
            let alphas: Vec<usize> = (0..*w).collect();
            add_compatible_boolean(&mut s, &alphas, [e, e_prime, e_dprime], modulus, "cb");
            let evens = ValueSet::span(
                (0..*w)
                    .map(|k| (0..*w).map(|i| if i == k { 2 } else { 0 }).collect())
                    .collect(),
            );
            let terms = (0..1i64 << w)
                .map(|j| (v.iter().map(|c| c * j).collect(), evens.clone()))
                .collect();
            s.push(FunctionalEquation::new(alphas, terms));
            Ok((s, *w))
        }
        Lift {
            inner,
            codomain,
            placement,
        } => {
            let (sys, visible) = build(inner)?;
            if placement.len() != visible {
                return invalid("placement must list a target factor for each inner factor");
            }
            let distinct: BTreeSet<_> = placement.iter().collect();
            if distinct.len() != placement.len() {
                return invalid("placement must be injective");
            }
            let mut target = Codomain::new(codomain.clone());
            let mut full = placement.clone();
            for w in visible..sys.codomain.len() {
                full.push(target.push(sys.codomain.names[w].clone(), sys.codomain.moduli[w]));
            }
            Ok((sys.lift(&target, &full)?, codomain.len()))
        }
        Pullback {
            inner,
            domain,
            embedding,
        } => {
            let (sys, visible) = build(inner)?;
            Ok((sys.pullback(domain, embedding)?, visible))
        }
        Conjunction { parts } => {
            let mut built = parts.iter().map(build).collect::<Result<Vec<_>>>()?;
            if built.is_empty() {
                return invalid("conjunction needs at least one part");
            }
            let (first, visible) = (&built[0].0, built[0].1);
            let domain = first.domain.clone();
            let base: Vec<u64> = first.codomain.moduli[..visible].to_vec();
            let mut target = Codomain::named(
                first.codomain.names[..visible].to_vec(),
                base.clone(),
            );
            let mut placements = vec![];
            for (i, (sys, vis)) in built.iter().enumerate() {
                if sys.domain != domain || *vis != visible || sys.codomain.moduli[..visible] != base[..] {
                    return Err(Error::GroupMismatch(format!(
                        "conjunction part {} has a different (G, H)",
                        i + 1
                    )));
                }
                let mut pl: Vec<usize> = (0..visible).collect();
                for w in visible..sys.codomain.len() {
                    pl.push(target.push(
                        format!("p{}.{}", i + 1, sys.codomain.names[w]),
                        sys.codomain.moduli[w],
                    ));
                }
                placements.push(pl);
            }
            let mut out = FunctionalSystem::new(domain, target.clone());
            for ((sys, _), pl) in built.drain(..).zip(placements) {
                out = out.and(sys.lift(&target, &pl)?)?;
            }
            Ok((out, visible))
        }
    }
}

fn zero(g: &GroupSpec) -> Vec<i64> {
    vec![0; g.dim()]
}

fn check_modulus(n: u64) -> Result<()> {
    if n == 0 {
        return invalid("modulus must be positive");
    }
    Ok(())
}

fn two_power(m: u32, min: u32) -> Result<u64> {
    if m < min {
        return Err(Error::Precondition(format!("M >= {min} violated (M = {m})")));
    }
    if m > 16 {
        return invalid("M above 16 is not supported");
    }
    Ok(1u64 << m)
}

fn step_or_default(g: &GroupSpec, step: &Option<Vec<i64>>) -> Result<Vec<i64>> {
    match step {
        Some(s) => Ok(g.element(s)?.0),
        None => g
            .generators()
            .into_iter()
            .next()
            .map(|e| e.0)
            .ok_or_else(|| Error::Invalid("trivial domain has no step".into())),
    }
}

fn check_order_two(g: &GroupSpec, e: &[i64], name: &str) -> Result<()> {
    let x = g.element(e)?;
    if x == g.zero() || g.scale(2, &x)? != g.zero() {
        return Err(Error::Precondition(format!("{name} must have order 2")));
    }
    Ok(())
}

fn check_triple(g: &GroupSpec, e: &[i64], e1: &[i64], e2: &[i64]) -> Result<()> {
    check_order_two(g, e, "e")?;
    check_order_two(g, e1, "e'")?;
    check_order_two(g, e2, "e''")?;
    let mut seen = BTreeSet::new();
    for r in 0..2 {
        for s in 0..2 {
            for t in 0..2 {
                let v: Vec<i64> = (0..g.dim()).map(|i| r * e[i] + s * e1[i] + t * e2[i]).collect();
                seen.insert(g.element(&v)?);
            }
        }
    }
    if seen.len() != 8 {
        return Err(Error::Precondition(
            "e, e', e'' must generate a copy of (Z/2Z)^3".into(),
        ));
    }
    Ok(())
}

fn generators(g: &GroupSpec) -> Vec<Vec<i64>> {
    g.generators().into_iter().map(|e| e.0).collect()
}

/// `(α(x) + S) ⊎ (α(x + e_i) + (H \ S)) = H` for each generator `e_i`.
fn add_const_mod(s: &mut FunctionalSystem, support: Vec<usize>, sub: ValueSet) {
    let z = zero(&s.domain);
    for gen in generators(&s.domain) {
        s.push(FunctionalEquation::new(
            support.clone(),
            vec![(z.clone(), sub.clone()), (gen, sub.clone().complement())],
        ));
    }
}

/// `α(x + p) = α(x)` on the given factors.
fn add_periodic_along(s: &mut FunctionalSystem, support: Vec<usize>, p: &[i64]) {
    let k = support.len();
    s.push(FunctionalEquation::new(
        support,
        vec![
            (zero(&s.domain), ValueSet::zero(k)),
            (p.to_vec(), ValueSet::zero(k).complement()),
        ],
    ));
}

fn add_boolean(s: &mut FunctionalSystem, w: usize, e: &[i64], modulus: u64) {
    let z = zero(&s.domain);
    let evens = ValueSet::span(vec![vec![2 % modulus]]);
    s.push(FunctionalEquation::new(
        vec![w],
        vec![(z.clone(), evens.clone()), (e.to_vec(), evens)],
    ));
    let nonzero_evens: Vec<Vec<u64>> = (1..modulus / 2).map(|k| vec![2 * k]).collect();
    for gen in generators(&s.domain) {
        let e_gen: Vec<i64> = e.iter().zip(&gen).map(|(a, b)| a + b).collect();
        let mut terms = vec![
            (gen, ValueSet::zero(1)),
            (e_gen, ValueSet::zero(1)),
        ];
        if !nonzero_evens.is_empty() {
            terms.push((z.clone(), ValueSet::points(nonzero_evens.clone())));
            terms.push((e.to_vec(), ValueSet::points(nonzero_evens.clone())));
        }
        s.push(FunctionalEquation::new(vec![w], terms));
    }
}

fn add_periodic_boolean(s: &mut FunctionalSystem, w: usize, e: &[i64], periods: [&[i64]; 2], modulus: u64) {
    for p in periods {
        add_periodic_along(s, vec![w], p);
    }
    add_boolean(s, w, e, modulus);
}

/// Compatible boolean block on `alphas`, with shared `τ', τ''` and per-function `β_i, γ_i`.
/// For a single function no auxiliaries are needed.
fn add_compatible_boolean(
    s: &mut FunctionalSystem,
    alphas: &[usize],
    [e, e1, e2]: [&Vec<i64>; 3],
    modulus: u64,
    prefix: &str,
) {
    let sum = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    for &a in alphas {
        add_periodic_boolean(s, a, e, [e1, e2], modulus);
    }
    if alphas.len() < 2 {
        return;
    }
    let tau1 = s.codomain.push(format!("{prefix}.tau1"), modulus);
    let tau2 = s.codomain.push(format!("{prefix}.tau2"), modulus);
    add_periodic_boolean(s, tau1, e, [&sum(e, e1), e2], modulus);
    add_periodic_boolean(s, tau2, e, [e1, &sum(e, e2)], modulus);
    for (i, &a) in alphas.iter().enumerate() {
        let beta = s.codomain.push(format!("{prefix}.beta{}", i + 1), modulus);
        let gamma = s.codomain.push(format!("{prefix}.gamma{}", i + 1), modulus);
        add_boolean(s, beta, e, modulus);
        add_boolean(s, gamma, e, modulus);
        // α + τ' + τ'' - 2β - γ is constant.
        add_const_mod(
            s,
            vec![a, tau1, tau2, beta, gamma],
            ValueSet::kernel(vec![Congruence {
                coeffs: vec![1, 1, 1, -2, -1],
                modulus,
            }]),
        );
    }
}

/// Exhausts the boolean-compatibility claim over `Z/2^M`: whenever the pair sums
/// balance and every `(α, τ, τ')` is hit by some `2β + γ + z`, the pairs
/// `{a,b}, {h',k'}, {h'',k''}` are translates of each other.
///
/// Hypotheses and conclusion are unchanged by translating each pair (adjusting `z`),
/// so every pair is normalized to contain 0 and only the odd partners and `z` vary.
pub fn verify_force_compat(m: u32) -> Result<bool> {
    if m < 2 {
        return Err(Error::Precondition(format!("M >= 2 violated (M = {m})")));
    }
    if m > 8 {
        return invalid("M above 8 is not supported");
    }
    let n = 1u64 << m;
    let odds: Vec<u64> = (0..n).filter(|x| x % 2 == 1).collect();
    use rayon::prelude::*;
    let bad = odds.par_iter().any(|&b| {
        for &d in &odds {
            for &g in &odds {
                for &k1 in &odds {
                    for &k2 in &odds {
                        for z in 0..n {
                            if force_compat_counterexample(n, b, d, g, k1, k2, z) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    });
    Ok(!bad)
}

fn force_compat_counterexample(n: u64, b: u64, d: u64, g: u64, k1: u64, k2: u64, z: u64) -> bool {
    // (a+b) + (h'+k') + (h''+k'') = 2(c+d) + (f+g) + 2z with a = h' = h'' = c = f = 0.
    if (b + k1 + k2) % n != (2 * d + g + 2 * z) % n {
        return false;
    }
    for alpha in [0, b] {
        for t1 in [0, k1] {
            for t2 in [0, k2] {
                let lhs = (alpha + t1 + t2) % n;
                let ok = [0, d]
                    .iter()
                    .any(|&beta| [0, g].iter().any(|&gam| (2 * beta + gam + z) % n == lhs));
                if !ok {
                    return false;
                }
            }
        }
    }
    let translate = |x: u64, y: u64| x == y || (x + y).is_multiple_of(n);
    !(translate(b, k1) && translate(b, k2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_compiles_to_one_equation() {
        let p = PropertySpec::Clock {
            domain: GroupSpec::free(1),
            n: 4,
            step: None,
        };
        let c = compile_property(&p).unwrap();
        let Compiled::Expressible(s) = c else { panic!() };
        assert_eq!(s.equations.len(), 1);
        let t = &s.equations[0].terms;
        assert_eq!(t[0].shift, vec![0]);
        assert_eq!(t[0].set, ValueSet::singleton(vec![1]));
        assert_eq!(t[1].shift, vec![1]);
        assert_eq!(t[1].set.enumerate(&[4], 16).unwrap(), vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn periodic_along_generator() {
        let p = PropertySpec::Periodic {
            domain: GroupSpec::free(2),
            codomain: vec![2],
            periods: vec![vec![0, 2]],
        };
        let s = compile_property(&p).unwrap();
        let eqs = &s.system().equations;
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].terms[1].shift, vec![0, 2]);
        assert_eq!(eqs[0].terms[0].set, ValueSet::zero(1));
    }

    #[test]
    fn symmetric_constraint_shape() {
        let g = GroupSpec::finite(vec![2, 2, 2]);
        let p = PropertySpec::SymmetricBooleanConstraint {
            domain: g,
            e: vec![1, 0, 0],
            e_prime: vec![0, 1, 0],
            e_dprime: vec![0, 0, 1],
            m: 4,
            w: 3,
            omega: Omega::Exclude {
                patterns: vec![vec![0, 0, 0], vec![1, 1, 1]],
            },
            cap: 16,
        };
        let Compiled::Weak(wr) = compile_property(&p).unwrap() else { panic!() };
        assert_eq!(wr.visible, 3);
        let betas = wr.quantified().iter().filter(|n| n.starts_with("omega")).count();
        assert_eq!(betas, 1);
        let linear = wr
            .inner
            .equations
            .iter()
            .find(|e| e.support.len() == 4)
            .expect("linear relation");
        assert_eq!(
            linear.terms[0].set,
            ValueSet::kernel(vec![Congruence { coeffs: vec![1, 1, 1, -1], modulus: 16 }])
        );
    }

    #[test]
    fn preconditions_quote_the_constraint() {
        let g = GroupSpec::finite(vec![2, 2, 2]);
        let p = PropertySpec::SymmetricBooleanConstraint {
            domain: g.clone(),
            e: vec![1, 0, 0],
            e_prime: vec![0, 1, 0],
            e_dprime: vec![0, 0, 1],
            m: 3,
            w: 3,
            omega: Omega::NotAllEqual,
            cap: 16,
        };
        let e = compile_property(&p).unwrap_err();
        assert!(e.to_string().contains("2^M > 2W+4"));
        let p = PropertySpec::CompatibleBoolean {
            domain: g,
            e: vec![1, 0, 0],
            e_prime: vec![1, 0, 0],
            e_dprime: vec![0, 0, 1],
            m: 3,
            w: 2,
        };
        assert!(compile_property(&p).is_err());
    }

    #[test]
    fn asymmetric_omega_rejected() {
        let o = Omega::Exclude { patterns: vec![vec![0, 0, 1]] };
        assert!(o.excluded_pairs(3, 10).is_err());
        assert_eq!(Omega::NotAllEqual.excluded_pairs(3, 10).unwrap(), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn force_compat_small() {
        assert!(verify_force_compat(2).unwrap());
        assert!(verify_force_compat(3).unwrap());
        assert!(verify_force_compat(1).is_err());
    }
}
