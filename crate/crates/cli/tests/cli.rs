use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge")).args(args).output().expect("forge runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, v: &impl std::fmt::Display) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn z4_system() -> Value {
    json!({"group": {"free_rank": 0, "torsion": [4]}, "tiles": [[[0], [1]], [[0], [3]]]})
}

/// Last non-zero base-4 digit, 1 at zero.
fn f4(m: i64) -> u64 {
    if m == 0 {
        return 1;
    }
    let mut x = m.unsigned_abs();
    while x.is_multiple_of(4) {
        x /= 4;
    }
    if m < 0 {
        4 - x % 4
    } else {
        x % 4
    }
}

#[test]
fn solve_z4_example_emits_two_tilings() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", &z4_system());
    let o = forge(&["solve", s(&sys), "--quotient", "4"]);
    assert_eq!(code(&o), 0);
    let sols: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(sols.len(), 2);
    let members: Vec<&Value> = sols.iter().map(|v| &v["members"]).collect();
    assert_eq!(members, [&json!([[0], [2]]), &json!([[1], [3]])]);
    // each solution line is itself a valid PeriodicSet that tiles by both tiles
    for (k, sol) in sols.iter().enumerate() {
        let set = write(&dir, &format!("set{k}.json"), sol);
        for tile in [json!([[0], [1]]), json!([[0], [3]])] {
            let t = write(&dir, "tile.json", &json!({"group": z4_system()["group"], "elements": tile}));
            let o = forge(&["verify-tiling", s(&set), s(&t)]);
            assert_eq!(code(&o), 0, "{}", stdout(&o));
        }
    }
}

#[test]
fn verify_tiling_reports_overlap_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let g = json!({"free_rank": 0, "torsion": [4]});
    let set = write(&dir, "a.json", &json!({"group": g, "lattice": {"generators": []}, "members": [[0], [1]]}));
    let tile = write(&dir, "f.json", &json!({"group": g, "elements": [[0], [1]]}));
    let o = forge(&["verify-tiling", s(&set), s(&tile)]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["exact_tiling"], false);
    assert_eq!(r["multiplicity_histogram"], json!([1, 2, 1]));
}

#[test]
fn render_matches_base_four_digits() {
    let o = forge(&["sudoku", "render", "--s0", "2", "--rows", "16"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    for (m, row) in rows.iter().enumerate() {
        let (label, cells) = row.split_once('|').unwrap();
        assert_eq!(label.trim().parse::<i64>().unwrap(), m as i64);
        let digits: Vec<u64> = cells
            .split(|c: char| !c.is_ascii_digit())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(digits, vec![f4(m as i64); 16], "row {m}");
        // cells on rows m ∈ 4Z are shaded
        let shaded = cells.contains('[') || cells.contains('(');
        assert_eq!(shaded, m % 4 == 0, "row {m}");
    }
}

#[test]
fn render_pgm_header_and_size() {
    let o = forge(&["sudoku", "render", "--rows", "4", "--px", "2", "--format", "pgm"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("32 8"));
    assert_eq!(lines.next(), Some("255"));
    assert_eq!(lines.count(), 8);
}

/// Standard window as JSON, produced by the CLI itself.
fn standard_window(dir: &TempDir, from: i64, rows: i64) -> PathBuf {
    let o = forge(&["sudoku", "render", "--from", &from.to_string(), "--rows", &rows.to_string(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    write(dir, "window.json", &v["window"])
}

#[test]
fn sudoku_json_round_trips() {
    let dir = TempDir::new().unwrap();
    let w = standard_window(&dir, -32, 64);
    let wv: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!(wv["rows"][32], json!(vec![1; 16]));
    assert_eq!(wv["rows"][33], json!(vec![1; 16]));

    let o = forge(&["sudoku", "verify", s(&w)]);
    assert_eq!(code(&o), 0);

    let o = forge(&["sudoku", "tetris", s(&w)]);
    assert_eq!(code(&o), 0);
    let t = write(&dir, "tetris.json", &stdout(&o));
    let tv: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((tv["m_lo"].as_i64(), tv["m_hi"].as_i64()), (Some(-8), Some(7)));
    for (k, row) in tv["rows"].as_array().unwrap().iter().enumerate() {
        assert_eq!(row, &json!(vec![f4(4 * (k as i64 - 8)); 16]));
    }
    assert_eq!(code(&forge(&["sudoku", "verify", s(&t)])), 0);

    let o = forge(&["encode", s(&w), "--max-slope", "1"]);
    assert_eq!(code(&o), 0);
    let beta = write(&dir, "beta.json", &stdout(&o));
    assert_eq!(code(&forge(&["axioms", s(&beta)])), 0);
    let o = forge(&["decode", s(&beta)]);
    assert_eq!(code(&o), 0);
    let back: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(back["window"], wv);
}

#[test]
fn normalize_and_descend() {
    let dir = TempDir::new().unwrap();
    let w = standard_window(&dir, -32, 64);
    let o = forge(&["sudoku", "normalize", s(&w)]);
    assert_eq!(code(&o), 0);
    let nf: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(nf["normal_form"]["d"], 0);
    assert_eq!(nf["normal_form"]["shear"], json!({"a": 0, "b": 1, "c": 0}));

    let o = forge(&["sudoku", "descend", s(&w), "--period", "64"]);
    assert_eq!(code(&o), 1, "a refuted period exits 1");
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["verdict"], "REFUTED");
}

#[test]
fn stats_of_a_sequence_and_a_line() {
    let o = forge(&["sudoku", "stats", "--s0", "2", "--values", "1,2,3,1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["stats"]["order"], 0);
    assert_eq!(v["stats"]["step"], 1);

    let dir = TempDir::new().unwrap();
    let w = standard_window(&dir, 0, 64);
    // n ↦ F(n, 2n + 1) = f_4(2n + 1)
    let o = forge(&["sudoku", "stats", s(&w), "--line", "1", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let expect: Vec<u64> = (1..=16).map(|n| f4(2 * n + 1)).collect();
    assert_eq!(v["sequence"], json!(expect));
}

#[test]
fn rigid_partition_stack_and_solve() {
    let dir = TempDir::new().unwrap();
    let o = forge(&["rigid-partition", "2", "--seed", "0"]);
    assert_eq!(code(&o), 0);
    let p = write(&dir, "p.json", &stdout(&o));
    let pv: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(pv["n"], 8);
    assert_eq!(code(&forge(&["rigid-partition", "2", "--check", s(&p)])), 0);

    let split = write(&dir, "split.json", &json!({"n": 4, "parts": [[0, 1], [2, 3]]}));
    assert_eq!(code(&forge(&["rigid-partition", "2", "--check", s(&split)])), 1);
    assert_eq!(code(&forge(&["rigid-partition", "2", "--exhaustive", "4"])), 1);

    let sys = write(&dir, "sys.json", &z4_system());
    let o = forge(&["stack", s(&sys), s(&p)]);
    assert_eq!(code(&o), 0);
    let stacked = write(&dir, "stacked.json", &stdout(&o));
    let sv: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(sv["group"]["torsion"], json!([4, 8]));
    assert_eq!(sv["tiles"][0].as_array().unwrap().len(), 16);
    let o = forge(&["solve", s(&stacked)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 16);
}

#[test]
fn compile_and_check_functions() {
    let dir = TempDir::new().unwrap();
    let z8 = json!({"free_rank": 0, "torsion": [8]});
    let clock = write(&dir, "clock.json", &json!({"kind": "Clock", "domain": z8, "n": 4}));
    let table = |f: fn(u64) -> u64| {
        json!({"group": z8, "lattice": {"generators": []}, "values": (0..8).map(|x| vec![f(x)]).collect::<Vec<_>>()})
    };
    let good = write(&dir, "good.json", &table(|x| (x + 3) % 4));
    let bad = write(&dir, "bad.json", &table(|_| 0));

    assert_eq!(code(&forge(&["check-fn", s(&good), s(&clock)])), 0);
    let o = forge(&["check-fn", s(&bad), s(&clock)]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["violation"].is_object());

    // the compiled system re-parses and gives the same verdicts
    let o = forge(&["compile", s(&clock)]);
    assert_eq!(code(&o), 0);
    let compiled = write(&dir, "compiled.json", &stdout(&o));
    assert_eq!(code(&forge(&["check-fn", s(&good), s(&compiled)])), 0);
    assert_eq!(code(&forge(&["check-fn", s(&bad), s(&compiled)])), 1);

    // its tiling form has the four clock solutions
    let o = forge(&["compile", s(&clock), "--tiling"]);
    assert_eq!(code(&o), 0);
    let tiling = write(&dir, "tiling.json", &stdout(&o));
    let o = forge(&["solve", s(&tiling)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn structural_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &json!({"group": {"free_rank": 0, "torsion": ["x"]}, "tiles": []}));
    let o = forge(&["solve", s(&bad)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json"), "{err}");
    assert!(err.contains("group.torsion[0]"), "{err}");
    assert!(err.contains("expected TilingSystem"), "{err}");

    assert_eq!(code(&forge(&["solve"])), 2);
    assert_eq!(code(&forge(&["no-such-command"])), 2);
    assert_eq!(code(&forge(&["solve", "/nonexistent.json"])), 2);
    assert_eq!(code(&forge(&["sudoku", "render", "--cap-quotient", "0"])), 2);

    let inf = write(&dir, "inf.json", &json!({"group": {"free_rank": 1, "torsion": []}, "tiles": [[[0]]]}));
    assert_eq!(code(&forge(&["solve", s(&inf)])), 2, "infinite group needs a lattice");

    let o = Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(["sudoku", "render", "--rows", "2"])
        .env("FORGE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn corpus_report_is_machine_readable() {
    let o = forge(&["corpus", "run", "--only", "1,9"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let ids: Vec<u64> = v["outcomes"].as_array().unwrap().iter().map(|o| o["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 9]);
    assert_eq!(v["known_red"][0]["id"], 13);

    let o = forge(&["corpus", "run", "--only", "9", "--format", "ascii"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("[PASS]  9 rigid partitions"));

    assert_eq!(code(&forge(&["corpus", "run", "--only", "99"])), 2);
}
