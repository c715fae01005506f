//! JSON input and output. Every reader names the schema it expects, so a parse error points
//! at the file, the JSON path and the shape that was wanted there.

use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub struct Schema {
    pub name: &'static str,
    pub fragment: &'static str,
}

const GROUP: &str = r#"{"free_rank": r, "torsion": [n1, ...]}"#;

pub const TILE: Schema = Schema {
    name: "Tile",
    fragment: r#"{"group": GroupSpec, "elements": [[x1, ...], ...]}"#,
};
pub const TILING_SYSTEM: Schema = Schema {
    name: "TilingSystem",
    fragment: r#"{"group": GroupSpec, "tiles": [[[x1, ...], ...], ...]}"#,
};
pub const PERIODIC_SET: Schema = Schema {
    name: "PeriodicSet",
    fragment: r#"{"group": GroupSpec, "lattice": {"generators": [[...], ...]}, "members": [[...], ...]}"#,
};
pub const LATTICE: Schema = Schema {
    name: "PeriodLattice",
    fragment: r#"{"generators": [[x1, ...], ...]}"#,
};
pub const FUNCTIONAL_SYSTEM: Schema = Schema {
    name: "FunctionalSystem",
    fragment: r#"{"domain": GroupSpec, "codomain": {"names": [...], "moduli": [...]}, "equations": [{"support": [...], "terms": [{"shift": [...], "set": ValueSet}]}]}"#,
};
pub const PROPERTY: Schema = Schema {
    name: "PropertySpec",
    fragment: r#"{"kind": "Clock" | "Boolean" | "Conjunction" | ..., "domain": GroupSpec, ...}"#,
};
pub const COMPILED: Schema = Schema {
    name: "Compiled",
    fragment: r#"{"kind": "Expressible", ...FunctionalSystem} or {"kind": "Weak", "inner": FunctionalSystem, "visible": k}"#,
};
pub const FUNCTION: Schema = Schema {
    name: "FunctionTable",
    fragment: r#"{"group": GroupSpec, "lattice": PeriodLattice, "values": [[v1, ...], ...]}"#,
};
pub const PARTITION: Schema = Schema {
    name: "RigidPartition",
    fragment: r#"{"n": N, "parts": [[r1, ...], ...]}"#,
};
pub const WINDOW: Schema = Schema {
    name: "SudokuWindow",
    fragment: r#"{"s0": s0, "m_lo": lo, "m_hi": hi, "rows": [[F(1, m), ..., F(N, m)], ...]}"#,
};
pub const BETA: Schema = Schema {
    name: "BetaTuple",
    fragment: r#"{"s0": s0, "n": N, "m_lo": lo, "m_hi": hi, "max_slope": J, "points": [{"i": i, "j": j, "bits": "hex"}, ...]}"#,
};

/// Reads a file (or stdin for `-`).
pub fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

pub fn parse<T: DeserializeOwned>(path: &Path, text: &str, schema: &Schema) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let fragment = schema.fragment.replace("GroupSpec", GROUP);
        anyhow!(
            "{}: at `{}`: {}\n  expected {}: {}",
            path.display(),
            e.path(),
            e.inner(),
            schema.name,
            fragment
        )
    })
}

pub fn read<T: DeserializeOwned>(path: &Path, schema: &Schema) -> Result<T> {
    parse(path, &read_text(path)?, schema)
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}
