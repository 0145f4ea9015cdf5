use std::path::Path;
use std::process::Command;

use critvar::harness::run::*;
use critvar::harness::{parse_scenario, run, Analysis, RunOptions};
use critvar::minimizer::Verdict;

const SCHEMA_DOC: &str = include_str!("../../../docs/schema.md");

fn scenario_text(dim: usize, cells: usize, analyses: &str, lambdas: &str, exponents: (f64, f64)) -> String {
    format!(
        r#"schema = 1
seed = 3
analyses = [{analyses}]
[domain]
dim = {dim}
cells = {cells}
[weights.a]
gamma0 = 1.0
coefficient = 1.0
exponent = {:?}
[weights.b]
gamma0 = 1.0
coefficient = 1.0
exponent = {:?}
[sweep]
lambdas = [{lambdas}]
"#,
        exponents.0, exponents.1
    )
}

/// Header line documented under "### `name.csv`".
fn documented_header(name: &str) -> String {
    let marker = format!("### `{name}.csv`");
    let at = SCHEMA_DOC.find(&marker).unwrap_or_else(|| panic!("{name} is undocumented"));
    let rest = &SCHEMA_DOC[at..];
    let open = rest.find("```\n").unwrap() + 4;
    rest[open..].lines().next().unwrap().to_string()
}

#[test]
fn headers_match_the_schema_document() {
    for (name, header) in [
        ("constants", CONSTANTS_HEADER),
        ("eigenvalues", EIGENVALUES_HEADER),
        ("eigenfunctions", EIGENFUNCTIONS_HEADER),
        ("minimize", MINIMIZE_HEADER),
        ("asymptotics_curve", CURVE_HEADER),
        ("asymptotics_fit", FIT_HEADER),
        ("omega", OMEGA_HEADER),
        ("omega_family", OMEGA_FAMILY_HEADER),
        ("pohozaev", POHOZAEV_HEADER),
    ] {
        assert_eq!(documented_header(name), header.join(","), "{name}");
    }
}

#[test]
fn documented_scenario_parses() {
    let start = SCHEMA_DOC.find("```toml\n").unwrap() + 8;
    let end = start + SCHEMA_DOC[start..].find("```").unwrap();
    let s = parse_scenario(&SCHEMA_DOC[start..end]).unwrap();
    assert_eq!(s.analyses, Analysis::ALL.to_vec());
    assert_eq!(s.sweep.values().unwrap(), vec![4.0, 8.0]);
}

#[test]
fn constants_only_scenario_runs_no_flow() {
    let s = parse_scenario(&scenario_text(6, 400, "\"constants\"", "10.0", (2.0, 2.0))).unwrap();
    let report = run(&s, &RunOptions::default()).unwrap();
    assert!(report.rows.is_empty() && report.eig.is_none() && report.omega.is_none());
    let tables = report.tables();
    assert_eq!(tables.len(), 1);
    assert_eq!(tables[0].name, "constants");
    let m = report.constants.iter().find(|r| r.name == "m_n").unwrap();
    assert_eq!(m.value, 6.0 * 4.0 * 8.0 / 40.0);
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn same_scenario_and_seed_give_identical_csv() {
    let text = scenario_text(5, 400, "\"minimize\", \"pohozaev\", \"omega\"", "9.0, 12.0", (2.0, 2.0))
        + "[flow]\ninit = \"random\"\n";
    let s = parse_scenario(&text).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut hashes = Vec::new();
    for (dir, jobs) in dirs.iter().zip([1, 3]) {
        let report = run(&s, &RunOptions { jobs: Some(jobs), plots: true }).unwrap();
        report.write(dir.path(), true).unwrap();
        hashes.push(report.provenance.config_hash.clone());
    }
    let (first, second) = (csv_bodies(dirs[0].path()), csv_bodies(dirs[1].path()));
    assert!(first.len() >= 6);
    assert_eq!(first, second);
    assert_eq!(hashes[0], hashes[1]);
    assert_eq!(hashes[0].len(), 64);
}

#[test]
fn verdict_switches_at_the_quadratic_threshold() {
    // N(N-2)(N+2)/(8(N-1)) (A₂ + B₂) with N = 5, A₂ = B₂ = 1
    let gamma5 = 5.0 * 3.0 * 7.0 / 32.0 * 2.0;
    let s = parse_scenario(&scenario_text(5, 1000, "\"minimize\"", "6.0, 6.5, 6.6, 7.0, 9.0", (2.0, 2.0))).unwrap();
    let report = run(&s, &RunOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 5);
    for row in &report.rows {
        let v = row.verdict;
        assert_eq!(v.thresholds_used.lower, Some(gamma5));
        assert_eq!(v.verdict == Verdict::AchievedByTheorem, row.lambda > gamma5, "lambda {}", row.lambda);
    }
    assert!(report.invariant_failures.is_empty(), "{:?}", report.invariant_failures);
    // pohozaev was not requested
    assert!(report.pohozaev.is_empty());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_critvar"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["constants", "--dim", "5", "--out"])
        .arg(dir.path().join("c"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("m_n") && text.contains("3.2812500000000000e0"));
    let csv = std::fs::read_to_string(dir.path().join("c/constants.csv")).unwrap();
    assert!(csv.starts_with("name,value,reference,rel_residual\n"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, scenario_text(5, 400, "\"constants\"", "1.0", (2.0, 2.0)).replace("cells", "celss")).unwrap();
    let out = cli().args(["all", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("celss"));

    let out = cli().args(["eig", "--weight", "gamma0 = 1.0", "--dim", "5", "--cells", "400", "--out"]).arg(dir.path().join("e")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("lambda1(a) = 20.1"));
}

/// The (k, l) = (2, 4) lower bound is violated by the concentrating pairs,
/// so the omega sandwich fails and the run reports it with exit status 1.
#[test]
fn cli_flags_an_invariant_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k2l4.toml");
    std::fs::write(&cfg, scenario_text(5, 1000, "\"omega\"", "1.0", (2.0, 4.0))).unwrap();
    let out = cli().args(["omega", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("omega estimate"));
}
