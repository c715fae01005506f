//! Tiling, rigid-partition and functional-equation commands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use forge_core::functional::*;
use forge_core::group::{GroupSpec, PeriodLattice};
use forge_core::rigid::*;
use forge_core::tiling::*;
use serde_json::json;

use crate::io::{self, Schema};
use crate::{json_only, Outcome, RunConfig};

pub fn verify(set: &Path, tile: &Path) -> Result<Outcome> {
    let a: PeriodicSet = io::read(set, &io::PERIODIC_SET)?;
    let f: Tile = io::read(tile, &io::TILE)?;
    let r = verify_tiling(&a, &f)?;
    Ok(Outcome::new(io::pretty(&r), r.exact_tiling))
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// A TilingSystem, or a FunctionalSystem with --functional.
    pub system: PathBuf,
    /// Period lattice K·Z^r on the free coordinates.
    #[arg(long, conflicts_with = "lattice")]
    pub quotient: Option<i64>,
    /// Period lattice given as a PeriodLattice file.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    /// Solve a functional system and emit function tables.
    #[arg(long)]
    pub functional: bool,
    /// Stop after this many solutions.
    #[arg(long)]
    pub limit: Option<usize>,
}

fn lattice_for(g: &GroupSpec, a: &SolveArgs) -> Result<PeriodLattice> {
    match (a.quotient, &a.lattice) {
        (Some(k), _) if k <= 0 => bail!("--quotient must be positive"),
        (Some(k), _) => Ok(PeriodLattice::scaled_free(g, k)),
        (None, Some(p)) => io::read(p, &io::LATTICE),
        (None, None) if g.is_finite() => Ok(PeriodLattice::trivial()),
        (None, None) => bail!("{g} is infinite: give --quotient K or --lattice FILE"),
    }
}

/// Solutions go out as JSON lines, sorted, so the output is the same on every run.
pub fn solve(cfg: &RunConfig, a: &SolveArgs) -> Result<Outcome> {
    json_only(cfg)?;
    let opts = SolveOptions { cell_cap: cfg.caps.cap_quotient, limit: a.limit };
    let lines: Vec<String> = if a.functional {
        let sys: FunctionalSystem = io::read(&a.system, &io::FUNCTIONAL_SYSTEM)?;
        let lat = lattice_for(&sys.domain, a)?;
        solve_via_tiling(&sys, &lat, &opts)?.iter().map(io::line).collect()
    } else {
        let sys: TilingSystem = io::read(&a.system, &io::TILING_SYSTEM)?;
        let lat = lattice_for(&sys.group, a)?;
        solve_tilings(&sys, &lat, &opts)?.iter().map(io::line).collect()
    };
    eprintln!("{} solution(s)", lines.len());
    let ok = !lines.is_empty();
    Ok(Outcome::new(lines.concat(), ok))
}

#[derive(Debug, Args)]
pub struct RigidArgs {
    /// Number of parts.
    pub m: usize,
    /// List every rigid partition of Z/N into M parts, one JSON line each.
    #[arg(long, conflicts_with = "check")]
    pub exhaustive: Option<u64>,
    /// Check the partition in this file instead of building one.
    #[arg(long)]
    pub check: Option<PathBuf>,
}

pub fn rigid_partition(cfg: &RunConfig, a: &RigidArgs) -> Result<Outcome> {
    json_only(cfg)?;
    if let Some(path) = &a.check {
        let p: RigidPartition = io::read(path, &io::PARTITION)?;
        let rigid = p.parts.len() == a.m && verify_rigid_partition(&p)?;
        let out = json!({"rigid": rigid, "n": p.n, "parts": p.parts.len()});
        return Ok(Outcome::new(io::pretty(&out), rigid));
    }
    if let Some(n) = a.exhaustive {
        let all = exhaustive_rigid_partitions(a.m, n)?;
        eprintln!("{} rigid partition(s) of Z/{n} into {} parts", all.len(), a.m);
        let ok = !all.is_empty();
        return Ok(Outcome::new(all.iter().map(io::line).collect(), ok));
    }
    let p = build_rigid_partition(a.m, cfg.seed)?;
    let ok = verify_rigid_partition(&p)?;
    Ok(Outcome::new(io::pretty(&p), ok))
}

/// The stacked tile is written as a one-tile system, ready for `solve`.
pub fn stack(system: &Path, partition: &Path) -> Result<Outcome> {
    let sys: TilingSystem = io::read(system, &io::TILING_SYSTEM)?;
    let p: RigidPartition = io::read(partition, &io::PARTITION)?;
    let tile = stack_system(&sys, &p)?;
    let out = TilingSystem::new(tile.group.clone(), vec![tile])?;
    Ok(Outcome::new(io::pretty(&out), true))
}

fn cap_omega(p: &mut PropertySpec, cap: usize) {
    match p {
        PropertySpec::SymmetricBooleanConstraint { cap: c, .. } => *c = cap,
        PropertySpec::Lift { inner, .. } | PropertySpec::Pullback { inner, .. } => cap_omega(inner, cap),
        PropertySpec::Conjunction { parts } => parts.iter_mut().for_each(|q| cap_omega(q, cap)),
        _ => {}
    }
}

fn read_property(cfg: &RunConfig, path: &Path, text: &str) -> Result<Compiled> {
    let mut p: PropertySpec = io::parse(path, text, &io::PROPERTY)?;
    if let Some(cap) = cfg.caps.cap_omega {
        cap_omega(&mut p, cap);
    }
    Ok(compile_property(&p)?)
}

pub fn compile(cfg: &RunConfig, property: &Path, tiling: bool) -> Result<Outcome> {
    json_only(cfg)?;
    let c = read_property(cfg, property, &io::read_text(property)?)?;
    let text = if tiling {
        io::pretty(&functional_to_tiling(c.system(), cfg.caps.cap_tiles)?)
    } else {
        io::pretty(&c)
    };
    Ok(Outcome::new(text, true))
}

const SYSTEM_LIKE: Schema = Schema {
    name: "FunctionalSystem, Compiled or PropertySpec",
    fragment: "a functional system, or an object tagged by \"kind\"",
};

/// Accepts a functional system, a compiled property or a property spec, told apart by the
/// `kind` tag.
fn read_system(cfg: &RunConfig, path: &Path) -> Result<ExistentialWrapper> {
    let text = io::read_text(path)?;
    let v: serde_json::Value = io::parse(path, &text, &SYSTEM_LIKE)?;
    match v.get("kind").and_then(|k| k.as_str()) {
        None => {
            let sys: FunctionalSystem = io::parse(path, &text, &io::FUNCTIONAL_SYSTEM)?;
            sys.validate()?;
            Ok(Compiled::Expressible(sys).into_wrapper())
        }
        Some("Expressible" | "Weak") => {
            let c: Compiled = io::parse(path, &text, &io::COMPILED)?;
            c.system().validate()?;
            Ok(c.into_wrapper())
        }
        Some(_) => Ok(read_property(cfg, path, &text)?.into_wrapper()),
    }
}

pub fn check_fn(cfg: &RunConfig, function: &Path, system: &Path) -> Result<Outcome> {
    json_only(cfg)?;
    let alpha: FunctionTable = io::read(function, &io::FUNCTION)?;
    let w = read_system(cfg, system)?;
    let out = if w.visible == w.inner.codomain.len() {
        let violation = first_violation(&alpha, &w.inner)?;
        json!({
            "holds": violation.is_none(),
            "violation": violation.map(|(eq, at)| json!({"equation": eq, "at": at})),
        })
    } else {
        let opts = SearchOptions { node_cap: cfg.caps.cap_search };
        let ext = find_extension(&alpha, &w, &opts)?;
        json!({"holds": ext.is_some(), "extension": ext})
    };
    let ok = out["holds"] == true;
    Ok(Outcome::new(io::pretty(&out), ok))
}
