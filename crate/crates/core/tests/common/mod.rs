#![allow(dead_code)]

pub mod sample;
pub mod oracle;

use std::path::{Path, PathBuf};
use std::process::Command;

use markowitz::io::load_market;
use markowitz::{Market, MarketSpec};

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub fn fixture(name: &str) -> PathBuf {
    tests_dir().join("fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    tests_dir().join("golden").join(name)
}

pub fn fixture_market(name: &str) -> Market {
    Market::new(load_fixture(name)).unwrap()
}

pub fn load_fixture(name: &str) -> MarketSpec {
    load_market(&fixture(name)).unwrap()
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&std::ffi::OsStr]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_markowitz"))
        .args(args)
        .output()
        .expect("spawn markowitz");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn expect_eq(what: &str, got: &str, want: &str) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what} differs\n--- got\n{got}\n--- want\n{want}"))
    }
}

/// One CLI invocation compared against stored stdout and, optionally, output
/// files written under a scratch directory.
pub struct GoldenCase {
    pub name: String,
    pub args: Vec<String>,
    pub code: i32,
    pub stdout: String,
    /// (file written by the command relative to scratch, golden file)
    pub files: Vec<(&'static str, &'static str)>,
}

const SCRATCH: &str = "{scratch}";

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

pub fn golden_cases() -> Vec<GoldenCase> {
    let s = |x: &str| x.to_string();
    let mut cases = Vec::new();
    for f in ["a_ii", "a_i", "zero_cost"] {
        cases.push(GoldenCase {
            name: format!("classify {f}"),
            args: vec![s("classify"), fx(&format!("{f}.json"))],
            code: 0,
            stdout: format!("classify_{f}.txt"),
            files: vec![],
        });
    }
    cases.push(GoldenCase {
        name: s("isomorphic a_ii pushforward"),
        args: vec![s("isomorphic"), fx("a_ii.json"), fx("a_ii_pushed.json")],
        code: 0,
        stdout: s("isomorphic_a_ii_pushed.txt"),
        files: vec![],
    });
    for (f, cost, payoff) in [("a_ii", "1", "3"), ("a_i", "1", "3.05"), ("zero_cost", "0", "5")] {
        cases.push(GoldenCase {
            name: format!("optimize {f}"),
            args: vec![
                s("optimize"),
                fx(&format!("{f}.json")),
                s("--cost"),
                s(cost),
                s("--payoff"),
                s(payoff),
            ],
            code: 0,
            stdout: format!("optimize_{f}.txt"),
            files: vec![],
        });
    }
    cases.push(GoldenCase {
        name: s("frontier a_ii"),
        args: vec![
            s("frontier"),
            fx("a_ii.json"),
            s("--ymin"),
            s("-4"),
            s("--ymax"),
            s("4"),
            s("--count"),
            s("5"),
            s("--out"),
            format!("{SCRATCH}/f.csv"),
        ],
        code: 0,
        stdout: s("frontier_a_ii.txt"),
        files: vec![("f.csv", "frontier_a_ii.csv"), ("f.meta.json", "frontier_a_ii.meta.json")],
    });
    cases.push(GoldenCase {
        name: s("frontier a_i"),
        args: vec![
            s("frontier"),
            fx("a_i.json"),
            s("--ymin"),
            s("-1"),
            s("--ymax"),
            s("1"),
            s("--count"),
            s("4"),
            s("--out"),
            format!("{SCRATCH}/f.csv"),
        ],
        code: 0,
        stdout: s("frontier_a_i.txt"),
        files: vec![("f.csv", "frontier_a_i.csv"), ("f.meta.json", "frontier_a_i.meta.json")],
    });
    cases.push(GoldenCase {
        name: s("estimate"),
        args: vec![
            s("estimate"),
            s("--returns"),
            fx("returns.csv"),
            s("--prices"),
            fx("prices.csv"),
            s("--out"),
            format!("{SCRATCH}/m.json"),
        ],
        code: 0,
        stdout: s("estimate.txt"),
        files: vec![("m.json", "estimate.json")],
    });
    cases
}

pub fn check_golden(case: &GoldenCase) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scratch = dir.path().to_string_lossy().into_owned();
    let args: Vec<std::ffi::OsString> =
        case.args.iter().map(|a| a.replace(SCRATCH, &scratch).into()).collect();
    let refs: Vec<&std::ffi::OsStr> = args.iter().map(|a| a.as_os_str()).collect();
    let run = run_cli(&refs);
    if run.code != case.code {
        return Err(format!("exit {} (want {}): {}", run.code, case.code, run.stderr));
    }
    expect_eq("stdout", &run.stdout, &read(&golden(&case.stdout)))?;
    for (written, want) in &case.files {
        expect_eq(written, &read(&dir.path().join(written)), &read(&golden(want)))?;
    }
    Ok(())
}

/// Whether the frontier CSV holds the row `(i − 1, m)` with both numbers
/// reproduced exactly.
pub fn frontier_has_vertex(csv: &str, m: f64, i: f64) -> bool {
    csv.lines().skip(1).any(|line| {
        let mut it = line.split(',').map(|x| x.parse::<f64>());
        matches!((it.next(), it.next()), (Some(Ok(y)), Some(Ok(x))) if y == i - 1.0 && x == m)
    })
}
