//! The acceptance corpus: fourteen end-to-end checks of `forge_core`, each cross-checked
//! against the reference implementations in [`oracle`].

use std::time::Instant;

use serde::{Deserialize, Serialize};

mod digits;
mod encoding;
pub mod oracle;
mod structures;

/// Outcome of one check: `Ok` carries a summary, `Err` the first discrepancy.
pub type CheckResult = Result<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({} ms): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_ms,
            self.detail
        )
    }
}

/// Criteria that cannot hold as stated, with the marker their failure detail carries.
pub const KNOWN_RED: [(u32, &str); 1] = [(13, encoding::EDGE_EFFECT)];

pub struct Check {
    pub id: u32,
    pub name: &'static str,
    run: fn() -> CheckResult,
}

pub const CHECKS: [Check; 14] = [
    Check { id: 1, name: "f_q table and identities", run: digits::fq_table },
    Check { id: 2, name: "worked sequence statistics", run: digits::worked_examples },
    Check { id: 3, name: "statistics well-defined", run: digits::well_defined },
    Check { id: 4, name: "rigidity outside the bad coset", run: digits::rigidity_sweep },
    Check { id: 5, name: "sudoku verification", run: digits::verification },
    Check { id: 6, name: "equidistribution", run: digits::equidistribution },
    Check { id: 7, name: "concatenation", run: digits::concatenation },
    Check { id: 8, name: "descent pipeline", run: digits::descent },
    Check { id: 9, name: "rigid partitions", run: structures::rigid_partitions },
    Check { id: 10, name: "stacking equivalence", run: structures::stacking },
    Check { id: 11, name: "compiler equivalence", run: structures::compiler },
    Check { id: 12, name: "boolean compatibility", run: structures::force_compat },
    Check { id: 13, name: "encoding round trip", run: encoding::round_trip },
    Check { id: 14, name: "continuous lift", run: structures::continuous_lift },
];

impl Check {
    pub fn run(&self) -> CheckOutcome {
        let start = Instant::now();
        let result = std::panic::catch_unwind(self.run)
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_text(&p))));
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        CheckOutcome {
            id: self.id,
            name: self.name.to_string(),
            passed,
            detail,
            elapsed_ms: start.elapsed().as_millis(),
        }
    }
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown".into())
}

/// Runs the selected checks (all when `only` is empty) in order.
pub fn run_checks(only: &[u32]) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.id))
        .map(Check::run)
        .collect()
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub(crate) fn lib<T>(r: forge_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}
