use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_staticgate")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .map(|l| l.trim_start_matches("# "))
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("missing `{key}` in\n{text}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_reports_counts_and_warnings() {
    let text = stdout(&run(&["validate", "--network", p(&fixture("six_node.json"))]));
    assert!(text.starts_with("Q=6 W=4 T=2\n"), "{text}");
    assert!(text.contains("triode solutions: 1\n"));
    assert!(text.contains("XOR solutions: 2\n"));
    assert_eq!(text.matches("warning:").count(), 2);

    let text = stdout(&run(&["validate", "--network", p(&fixture("single_triode.txt"))]));
    assert!(text.contains("Q=3 W=0 T=1") && text.contains("triode solutions: 3"));
}

#[test]
fn exit_codes() {
    let bad = run(&["validate", "--network", p(&fixture("bad.txt"))]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 3"));

    let overlap = run(&["validate", "--network", p(&fixture("overlapping_triodes.txt"))]);
    assert_eq!(overlap.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&overlap.stderr).contains("node 3"));

    let missing = run(&["validate", "--network", "/nonexistent/net.json"]);
    assert_eq!(missing.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.txt");
    let mut text = String::from("nodes 18\n");
    for t in 0..6 {
        text.push_str(&format!("triode {} {} {}\n", 3 * t + 1, 3 * t + 2, 3 * t + 3));
    }
    std::fs::write(&big, text).unwrap();
    assert_eq!(run(&["spectrum", "--network", p(&big)]).status.code(), Some(4));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nnetwork = \"x.json\"\n").unwrap();
    assert_eq!(run(&["relax", "--config", p(&cfg)]).status.code(), Some(3));

    assert_ne!(run(&["identity-check", "--seed", "1"]).status.code(), Some(0));
}

#[test]
fn spectrum_matches_solution_oracle() {
    for rep in ["spin1", "pair", "spin1+idlers"] {
        let text = stdout(&run(&["spectrum", "--network", p(&fixture("six_node.json")), "--rep", rep]));
        assert_eq!(value(&text, "oracle"), "match", "{rep}");
        let idlers: u32 = value(&text, "idlers").parse().unwrap();
        let degeneracy: usize = value(&text, "triplet_ground_degeneracy").parse().unwrap();
        assert_eq!(degeneracy, 1 << idlers, "{rep}");
    }
    let text = stdout(&run(&["spectrum", "--network", p(&fixture("unsatisfiable.txt")), "--g-prime", "0.5"]));
    assert_eq!(value(&text, "solutions"), "0");
    assert_eq!(value(&text, "oracle"), "match");
    let e: f64 = value(&text, "triplet_ground_energy").parse().unwrap();
    assert!(e > 0.0);
}

#[test]
fn spectrum_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/spectrum.tsv");
    let note = stdout(&run(&["spectrum", "--network", p(&fixture("six_node.json")), "--out", p(&out)]));
    let table = std::fs::read_to_string(&out).unwrap();
    assert!(table.contains("# columns: energy[g] degeneracy[1]"));
    assert!(table.contains("energy\tdegeneracy\n"));
    assert_eq!(value(&note, "oracle"), "match");
}

#[test]
fn wire_spectrum_kernel() {
    let text = stdout(&run(&["wire-spectrum", "--g", "2.0"]));
    assert_eq!(value(&text, "kernel_dimension"), "5");
    let min: f64 = value(&text, "frustrated_min").parse().unwrap();
    assert!((min - 2.0).abs() < 1e-9);
    assert_eq!(text.matches("kernel_pattern").count(), 5);
}

#[test]
fn relax_finds_the_solution() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&run(&["relax", "--config", p(&config("relax.toml")), "--out", p(dir.path())]));
    assert_eq!(value(&text, "most_likely"), "110101");
    let freq: f64 = value(&text, "solution_frequency").parse().unwrap();
    assert!(freq >= 0.9);
    let table = std::fs::read_to_string(dir.path().join("relax.tsv")).unwrap();
    let header = table.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t\ttheta\tenergy\tp0\tpF\tpV\ttriplet_weight");
    // slice 0.5 over 20 time units plus the initial sample
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1 + 41);
    assert_eq!(std::fs::read_to_string(dir.path().join("relax_summary.tsv")).unwrap(), text);
}

#[test]
fn seed_override_changes_measurements_only() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("relax.toml");
    stdout(&run(&["relax", "--config", p(&cfg), "--out", p(a.path())]));
    let other = stdout(&run(&["relax", "--config", p(&cfg), "--out", p(b.path()), "--seed", "12"]));
    assert_eq!(value(&other, "seed"), "12");
    // dissipative dynamics carry no randomness
    let strip = |d: &Path| {
        let t = std::fs::read_to_string(d.join("relax.tsv")).unwrap();
        t.lines().filter(|l| !l.starts_with("# relax")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn equal_fields_make_projection_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&run(&["compare", "--config", p(&config("compare_equal.toml")), "--out", p(dir.path())]));
    let d: f64 = value(&text, "final_trace_distance").parse().unwrap();
    assert!(d < 1e-10, "{d}");
    let table = std::fs::read_to_string(dir.path().join("compare.tsv")).unwrap();
    let rows: Vec<Vec<f64>> = table
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(|c| c.parse().unwrap()).collect())
        .collect();
    for r in rows {
        // annihilated weight and comparison pV stay zero
        assert!(r[13].abs() < 1e-12 && r[11].abs() < 1e-12);
        assert!((r[1] - r[9]).abs() < 1e-10);
    }
}

#[test]
fn compare_reports_takeoff() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&run(&["compare", "--config", p(&config("compare.toml")), "--out", p(dir.path())]));
    for key in ["k", "t_h", "growth_rate", "renormalization_rate", "direct_rate", "predicted_p0"] {
        value(&text, key).parse::<f64>().unwrap();
    }
    let p0: f64 = value(&text, "final_p0").parse().unwrap();
    assert!(p0 > 0.9);
}

#[test]
fn identity_check_ladders() {
    let text = stdout(&run(&["identity-check", "--network", p(&fixture("six_node.json")), "--seed", "3"]));
    let first: f64 = value(&text, "first_order_independent_max_residual").parse().unwrap();
    assert!(first < 1e-12);
    let order: f64 = value(&text, "exponential_order").parse().unwrap();
    assert!((order - 2.0).abs() <= 0.1);
    let equal: f64 = value(&text, "exponential_equal_max_residual").parse().unwrap();
    assert!(equal < 1e-12);

    let from_config = stdout(&run(&["identity-check", "--config", p(&config("compare.toml"))]));
    assert!(from_config.contains("generator_residual"));
}
