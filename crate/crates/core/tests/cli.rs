//! Black-box tests of the `mgl` binary: exit codes, byte determinism,
//! output formats, file plumbing, and config precedence, all through real
//! process invocations.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use multigraph_limits::cli::report::parse_csv;
use multigraph_limits::graph::AdjacencyMatrix;

fn run_with<F: FnOnce(&mut Command)>(args: &[&str], tweak: F) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mgl"));
    cmd.args(args);
    // A worker-count inherited from the harness environment must not leak
    // into determinism checks; each test sets it explicitly when relevant.
    cmd.env_remove("MGL_WORKERS");
    tweak(&mut cmd);
    cmd.output().expect("binary executes")
}

fn run(args: &[&str]) -> Output {
    run_with(args, |_| {})
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exits normally")
}

/// Per-test scratch directory under the system temp root.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mgl-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

#[test]
fn gen_is_byte_deterministic_and_parses() {
    let a = run(&["gen", "--n", "3", "--m", "2", "--kappa", "1", "--seed", "1"]);
    let b = run(&["gen", "--n", "3", "--m", "2", "--kappa", "1", "--seed", "1"]);
    assert_eq!(code(&a), 0, "stderr: {}", stderr_of(&a));
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");

    let graph = AdjacencyMatrix::from_edge_list(&stdout_of(&a)).expect("valid edge list");
    assert_eq!(graph.n(), 3);
    let (m, _) = graph.edge_counts();
    assert_eq!(m, 2);

    // Different seeds give different graphs once the space is large enough
    // for collisions to be negligible.
    let c = run(&["gen", "--n", "30", "--m", "60", "--seed", "1"]);
    let d = run(&["gen", "--n", "30", "--m", "60", "--seed", "2"]);
    assert_eq!(code(&c), 0);
    assert_eq!(code(&d), 0);
    assert_ne!(c.stdout, d.stdout, "different seeds should not collide at this size");
}

#[test]
fn gen_accepts_density_and_writes_files() {
    let dir = scratch("gen-out");
    let out_path = dir.join("host.txt");
    let out = run(&[
        "gen",
        "--n",
        "10",
        "--rho",
        "2.0",
        "--seed",
        "5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(out.stdout.is_empty(), "the graph goes to the file, not stdout");
    let text = fs::read_to_string(&out_path).expect("output file written");
    let graph = AdjacencyMatrix::from_edge_list(&text).expect("valid edge list");
    assert_eq!(graph.n(), 10);
    // ⌊ρ n² / 2⌋ edges.
    assert_eq!(graph.edge_counts().0, 100);
}

#[test]
fn gen_rejects_bad_sizes() {
    // Both or neither of --m/--rho: clap group violation.
    assert_eq!(code(&run(&["gen", "--n", "5"])), 2);
    assert_eq!(code(&run(&["gen", "--n", "5", "--m", "3", "--rho", "1.0"])), 2);
    // Degenerate parameter values.
    assert_eq!(code(&run(&["gen", "--n", "0", "--m", "2"])), 2);
    assert_eq!(code(&run(&["gen", "--n", "5", "--m", "0"])), 2);
    assert_eq!(code(&run(&["gen", "--n", "5", "--rho", "0.001"])), 2);
    assert_eq!(code(&run(&["gen", "--n", "5", "--m", "2", "--kappa", "-1"])), 2);
}

#[test]
fn help_and_usage_errors_follow_the_exit_contract() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout_of(&help).contains("gen"));

    let nothing = run(&[]);
    assert_eq!(code(&nothing), 2, "missing subcommand is a usage error");

    let unknown = run(&["frobnicate"]);
    assert_eq!(code(&unknown), 2);
}

#[test]
fn exact_tables_are_valid_normalized_json() {
    for args in [
        vec!["exact", "--what", "pag", "--n", "2", "--m", "1"],
        vec!["exact", "--what", "degrees", "--n", "2", "--m", "2"],
        vec!["exact", "--what", "ball-replacement", "--n", "2", "--m", "1"],
        vec!["exact", "--what", "edge-reconnect", "--n", "2", "--m", "1"],
        vec!["exact", "--what", "edge-reconnect", "--n", "2", "--m", "1", "--convention", "after"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?} stderr: {}", stderr_of(&out));
        let value: serde_json::Value =
            serde_json::from_str(&stdout_of(&out)).expect("stdout is JSON");
        let map = value.as_object().expect("a probability table object");
        assert!(!map.is_empty());
        let total: f64 = map.values().map(|v| v.as_f64().expect("numeric mass")).sum();
        assert!(
            (total - 1.0).abs() < 1e-12,
            "{args:?}: masses sum to {total}, not 1"
        );
    }

    // The attachment law on two vertices with one edge has three states.
    let out = run(&["exact", "--what", "pag", "--n", "2", "--m", "1"]);
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(value.as_object().unwrap().len(), 3);

    // Oversized state spaces are refused rather than attempted.
    assert_eq!(code(&run(&["exact", "--what", "pag", "--n", "30", "--m", "40"])), 2);
}

#[test]
fn density_estimates_both_routes() {
    let dir = scratch("density");
    let pattern_path = dir.join("edge.txt");
    fs::write(&pattern_path, "2 1\n1 2 1\n").unwrap();
    let kernel_path = dir.join("kernel.json");
    fs::write(&kernel_path, r#"{"type":"poisson_gamma","kappa":1.5,"rho":2.0}"#).unwrap();
    let host_path = dir.join("host.txt");
    let gen = run(&[
        "gen", "--n", "20", "--m", "40", "--seed", "5", "--out",
        host_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0);

    let kernel_route = run(&[
        "density",
        "--pattern",
        pattern_path.to_str().unwrap(),
        "--kernel",
        kernel_path.to_str().unwrap(),
        "--samples",
        "2000",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&kernel_route), 0, "stderr: {}", stderr_of(&kernel_route));
    let report: serde_json::Value =
        serde_json::from_str(&stdout_of(&kernel_route)).expect("JSON estimate");
    let mean = report["mean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&mean), "density {mean} outside [0, 1]");
    assert!(report["stderr"].as_f64().unwrap() >= 0.0);
    assert_eq!(report["samples"].as_u64().unwrap(), 2000);
    assert_eq!(report["pattern"].as_str().unwrap(), "2 1\n1 2 1\n");

    // Determinism across invocations.
    let again = run(&[
        "density",
        "--pattern",
        pattern_path.to_str().unwrap(),
        "--kernel",
        kernel_path.to_str().unwrap(),
        "--samples",
        "2000",
        "--seed",
        "3",
    ]);
    assert_eq!(kernel_route.stdout, again.stdout);

    let graph_route = run(&[
        "density",
        "--pattern",
        pattern_path.to_str().unwrap(),
        "--graph",
        host_path.to_str().unwrap(),
        "--samples",
        "2000",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&graph_route), 0, "stderr: {}", stderr_of(&graph_route));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&graph_route)).unwrap();
    let mean = report["mean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&mean));

    // Exactly one of --graph/--kernel; missing files are usage errors.
    let both = run(&[
        "density",
        "--pattern",
        pattern_path.to_str().unwrap(),
        "--graph",
        host_path.to_str().unwrap(),
        "--kernel",
        kernel_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&both), 2);
    let missing = run(&[
        "density",
        "--pattern",
        dir.join("no-such-file.txt").to_str().unwrap(),
        "--kernel",
        kernel_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn experiment_exit_codes_distinguish_failure_kinds() {
    // A passing experiment exits 0 and reports on stderr.
    let pass = run(&["experiment", "exact-small"]);
    assert_eq!(code(&pass), 0, "stderr: {}", stderr_of(&pass));
    assert!(stderr_of(&pass).contains("pass"));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&pass)).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));

    // Unknown experiments and invalid configs are usage errors.
    assert_eq!(code(&run(&["experiment", "no-such-experiment"])), 2);
    assert_eq!(code(&run(&["experiment", "spag-check", "--kappa", "2"])), 2);
    assert_eq!(code(&run(&["experiment", "exact-small", "--m", "3", "--rho", "1"])), 2);

    // A genuine assertion failure exits 1 but still writes the report:
    // at n = 20 the degree law is far from its limit, so the KS gate fails.
    let fail = run(&["experiment", "degree-gamma", "--n", "20", "--replicas", "2"]);
    assert_eq!(code(&fail), 1, "stderr: {}", stderr_of(&fail));
    assert!(stderr_of(&fail).contains("FAIL"));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&fail)).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(false));
    assert!(!report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn experiment_csv_reports_round_trip() {
    let out = run(&["experiment", "exact-small", "--format", "csv"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.starts_with('#'), "CSV starts with comment headers");
    let rows = parse_csv(&text).expect("own CSV output parses");
    assert!(!rows.is_empty());
    assert!(rows.iter().any(|r| r.statistic == "pag_vs_closed_form_max_abs_diff"));

    // JSON and CSV runs agree on the row values.
    let json_out = run(&["experiment", "exact-small"]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&json_out)).unwrap();
    let json_rows = report["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for (jr, cr) in json_rows.iter().zip(&rows) {
        assert_eq!(jr["statistic"].as_str().unwrap(), cr.statistic);
        // serde_json's default float parse may land 1 ulp off the written
        // value, so agreement is asserted relatively rather than bitwise.
        let (a, b) = (jr["value"].as_f64().unwrap(), cr.value);
        assert!(
            (a - b).abs() <= 1e-9 * (1.0f64).max(a.abs()).max(b.abs()),
            "row {} differs between JSON ({a}) and CSV ({b})",
            cr.statistic
        );
    }
}

#[test]
fn experiment_config_file_yields_to_flags() {
    let dir = scratch("config");
    let cfg_path = dir.join("exact.cfg");
    fs::write(&cfg_path, "# comment line\nkappa = 2.0\nseed = 11\n").unwrap();
    let out = run(&[
        "experiment",
        "exact-small",
        "--config",
        cfg_path.to_str().unwrap(),
        "--m",
        "1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let provenance = report["provenance"].as_array().unwrap();
    let source_of = |key: &str| -> (String, String) {
        let entry = provenance
            .iter()
            .find(|e| e["key"] == key)
            .unwrap_or_else(|| panic!("provenance lists {key}"));
        (
            entry["value"].as_str().unwrap().to_string(),
            entry["source"].as_str().unwrap().to_string(),
        )
    };
    assert_eq!(source_of("kappa"), ("2".to_string(), "file".to_string()));
    assert_eq!(source_of("seed"), ("11".to_string(), "file".to_string()));
    assert_eq!(source_of("m"), ("1".to_string(), "flag".to_string()));
    assert_eq!(source_of("n").1, "default");

    // Unknown keys in config files are rejected, not ignored.
    let bad_path = dir.join("bad.cfg");
    fs::write(&bad_path, "strength = 2.0\n").unwrap();
    let bad = run(&[
        "experiment",
        "exact-small",
        "--config",
        bad_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn experiment_reports_do_not_depend_on_worker_count() {
    let args = ["experiment", "ui-diagnostic", "--n", "40", "--replicas", "2"];
    let one = run_with(&args, |c| {
        c.env("MGL_WORKERS", "1");
    });
    let four = run_with(&args, |c| {
        c.env("MGL_WORKERS", "4");
    });
    assert_eq!(code(&one), 0, "stderr: {}", stderr_of(&one));
    assert_eq!(code(&four), 0, "stderr: {}", stderr_of(&four));
    assert_eq!(
        one.stdout, four.stdout,
        "reports must be byte-identical for any worker count"
    );

    // Nonsense worker counts are usage errors.
    let bad = run_with(&args, |c| {
        c.env("MGL_WORKERS", "zero");
    });
    assert_eq!(code(&bad), 2);
}

#[test]
fn experiment_out_flag_writes_the_report_file() {
    let dir = scratch("report-out");
    let path = dir.join("report.json");
    let out = run(&[
        "experiment",
        "exact-small",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(out.stdout.is_empty(), "report goes to the file, not stdout");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).expect("report file")).unwrap();
    assert_eq!(report["experiment"], "exact-small");
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}
