//! End-to-end tests of the `latshell` binary: every subcommand, every exit
//! code, and the file formats the commands exchange.

use std::path::Path;
use std::process::{Command, Output};

fn latshell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latshell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn search_into(dir: &Path, args: &[&str]) -> Output {
    let dir = dir.to_str().unwrap();
    let mut full = vec!["search"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out-dir", dir]);
    latshell(&full)
}

#[test]
fn shell_lists_vectors_and_representatives() {
    let out = latshell(&["shell", "6", "1"]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out).lines().count(), 12);

    let out = latshell(&["shell", "6", "4"]);
    assert_eq!(stdout_of(&out).lines().count(), 252);

    let out = latshell(&["shell", "10", "9", "--reps-only"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.contains(&"3 0 0 0 0 0 0 0 0 0"));
    assert!(lines.contains(&"1 1 1 1 1 1 1 1 1 0"));
}

#[test]
fn search_writes_witness_record_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = search_into(dir.path(), &["6", "4", "2", "--group", "eblock"]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("bound 60 (optimal)"));

    let witness = dir.path().join("n6_k4_t2_eblock.code");
    assert!(witness.exists());
    let verify = latshell(&["verify", witness.to_str().unwrap()]);
    assert_eq!(code_of(&verify), 0);
    assert!(stdout_of(&verify).starts_with("ok: 60 vectors"));

    let records = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    let record: serde_json::Value = serde_json::from_str(records.trim()).unwrap();
    assert_eq!(record["bound"], 60);
    assert_eq!(record["witness"], "n6_k4_t2_eblock.code");

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("n6_k4_t2_eblock.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["outcome"]["bound"], 60);
    assert_eq!(manifest["outcome"]["proven_optimal"], true);
    assert_eq!(manifest["outcome"]["exit_code"], 0);
    assert_eq!(manifest["shell"]["vectors"], 252);
    assert_eq!(manifest["group"]["order"], "1536");
}

#[test]
fn budget_limited_search_exits_two_but_stays_valid() {
    let dir = tempfile::tempdir().unwrap();
    let out = search_into(
        dir.path(),
        &["6", "4", "2", "--group", "trivial", "--node-limit", "50"],
    );
    assert_eq!(code_of(&out), 2);
    assert!(stdout_of(&out).contains("budget-limited"));

    let witness = dir.path().join("n6_k4_t2_trivial.code");
    let verify = latshell(&["verify", witness.to_str().unwrap()]);
    assert_eq!(code_of(&verify), 0, "budget-limited bound must still verify");
}

#[test]
fn resource_caps_skip_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = search_into(
        dir.path(),
        &["6", "4", "2", "--group", "trivial", "--max-vertices", "3"],
    );
    assert_eq!(code_of(&out), 3);
    assert!(stdout_of(&out).contains("skipped"));

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("n6_k4_t2_trivial.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["outcome"]["exit_code"], 3);
    assert!(manifest["outcome"]["skip_reason"].as_str().unwrap().contains("cap"));
    assert!(!dir.path().join("n6_k4_t2_trivial.code").exists());
}

#[test]
fn verify_pinpoints_a_tampered_witness() {
    let dir = tempfile::tempdir().unwrap();
    search_into(dir.path(), &["6", "4", "2", "--group", "eblock"]);
    let witness = dir.path().join("n6_k4_t2_eblock.code");
    let good = std::fs::read_to_string(&witness).unwrap();

    // Breaking one coordinate breaks that vector's norm.
    let bad = good.replacen("1 1 1 1 0 0", "2 1 1 1 0 0", 1);
    assert_ne!(good, bad, "tamper target must exist");
    let tampered = dir.path().join("tampered.code");
    std::fs::write(&tampered, &bad).unwrap();
    let out = latshell(&["verify", tampered.to_str().unwrap()]);
    assert_eq!(code_of(&out), 1);
    assert!(stdout_of(&out).contains("failed"));

    // Appending a vector that is too close breaks the inner-product bound.
    let mut close = good.clone();
    close.push_str("1 1 1 0 1 0\n");
    std::fs::write(&tampered, &close).unwrap();
    let out = latshell(&["verify", tampered.to_str().unwrap()]);
    assert_eq!(code_of(&out), 1);
    assert!(stdout_of(&out).contains("offending pair"));
}

#[test]
fn embed_scales_a_witness_between_shells() {
    let dir = tempfile::tempdir().unwrap();
    search_into(dir.path(), &["6", "4", "2", "--group", "eblock"]);
    let witness = dir.path().join("n6_k4_t2_eblock.code");
    let scaled = dir.path().join("scaled.code");

    let out = latshell(&[
        "embed",
        witness.to_str().unwrap(),
        "--c",
        "2",
        "-o",
        scaled.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = std::fs::read_to_string(&scaled).unwrap();
    assert!(text.contains("n=6 k=8 t=4"));
    let verify = latshell(&["verify", scaled.to_str().unwrap()]);
    assert_eq!(code_of(&verify), 0);

    // No shipped matrix has squared row norm 3.
    let out = latshell(&[
        "embed",
        witness.to_str().unwrap(),
        "--c",
        "3",
        "-o",
        scaled.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 1);
    assert!(stderr_of(&out).contains("error"));
}

#[test]
fn union_enforces_the_cosine_bound_exactly() {
    let dir = tempfile::tempdir().unwrap();
    search_into(dir.path(), &["6", "4", "2", "--group", "eblock"]);
    let witness = dir.path().join("n6_k4_t2_eblock.code");
    let sphere = dir.path().join("sphere.sph");

    // The code realizes cosine 2/4 = 1/2, so 1/2 passes and 49/100 fails.
    let out = latshell(&[
        "union",
        witness.to_str().unwrap(),
        "--tmax",
        "1/2",
        "-o",
        sphere.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("max cosine 1/2"));
    assert!(std::fs::read_to_string(&sphere).unwrap().contains("n=6 tmax=1/2"));

    let out = latshell(&["union", witness.to_str().unwrap(), "--tmax", "49/100"]);
    assert_eq!(code_of(&out), 1);
    assert!(stderr_of(&out).contains("exceed"));
}

#[test]
fn catalog_merges_and_validates_records() {
    let dir = tempfile::tempdir().unwrap();
    search_into(dir.path(), &["6", "4", "2", "--group", "eblock"]);
    search_into(dir.path(), &["6", "4", "1", "--group", "s2:negacyclic"]);
    let records = dir.path().join("records.jsonl");

    let out = latshell(&["catalog", records.to_str().unwrap(), "--validate"]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let table = stdout_of(&out);
    assert!(table.contains("n=6"));
    assert!(table.contains("18"));
    assert!(table.contains("60"));

    // Corrupting a witness must turn validation red.
    let witness = dir.path().join("n6_k4_t1_s2-negacyclic.code");
    let text = std::fs::read_to_string(&witness).unwrap();
    let first_vector = text.lines().find(|l| !l.starts_with('#') && !l.starts_with("n=")).unwrap();
    std::fs::write(&witness, text.replacen(&format!("{first_vector}\n"), "", 1)).unwrap();
    let out = latshell(&["catalog", records.to_str().unwrap(), "--validate"]);
    assert_eq!(code_of(&out), 1);
    assert!(stderr_of(&out).contains("invalid record"));
}

#[test]
fn graph_export_is_dimacs_like() {
    let out = latshell(&["graph", "6", "4", "2", "--group", "eblock"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("p edge 2 1"));
    assert!(text.lines().any(|l| l.starts_with("n 1 ")));
    assert!(text.lines().any(|l| l.starts_with("e 1 2")));
}

#[test]
fn repeated_searches_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    search_into(a.path(), &["6", "4", "1", "--group", "s2:negacyclic"]);
    search_into(b.path(), &["6", "4", "1", "--group", "s2:negacyclic"]);
    let name = "n6_k4_t1_s2-negacyclic.code";
    let wa = std::fs::read(a.path().join(name)).unwrap();
    let wb = std::fs::read(b.path().join(name)).unwrap();
    assert_eq!(wa, wb);
    let ra = std::fs::read(a.path().join("records.jsonl")).unwrap();
    let rb = std::fs::read(b.path().join("records.jsonl")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn config_file_sets_defaults_and_rejects_typos() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("latshell.conf");

    std::fs::write(&cfg, "node_limit=50\nseed=9\n").unwrap();
    let out = latshell(&[
        "--config",
        cfg.to_str().unwrap(),
        "search",
        "6",
        "4",
        "2",
        "--group",
        "trivial",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 2, "node limit from config must bite");
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("n6_k4_t2_trivial.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["budget"]["node_limit"], 50);
    assert_eq!(manifest["budget"]["seed"], 9);

    std::fs::write(&cfg, "node_limut=50\n").unwrap();
    let out = latshell(&["--config", cfg.to_str().unwrap(), "shell", "6", "1"]);
    assert_eq!(code_of(&out), 1);
    assert!(stderr_of(&out).contains("unknown config key"));
}

#[test]
fn graph_cache_round_trips_through_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_latshell"))
            .args(["search", "6", "4", "2", "--group", "eblock"])
            .args(["--out-dir", out.to_str().unwrap()])
            .env("LATSHELL_CACHE_DIR", cache.to_str().unwrap())
            .output()
            .expect("binary runs")
    };
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert_eq!(run(&first).status.code(), Some(0));
    assert!(cache.read_dir().unwrap().next().is_some(), "cache file written");
    assert_eq!(run(&second).status.code(), Some(0));

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(second.join("n6_k4_t2_eblock.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["graph"]["from_cache"], true);
    let wa = std::fs::read(first.join("n6_k4_t2_eblock.code")).unwrap();
    let wb = std::fs::read(second.join("n6_k4_t2_eblock.code")).unwrap();
    assert_eq!(wa, wb, "cached graph must not change the outcome");
}

#[test]
fn sweep_collects_records_and_renders_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = latshell(&[
        "sweep",
        "6",
        "1",
        "--groups",
        "negacyclic,s2:negacyclic,p2",
        "--kmin",
        "4",
        "--kmax",
        "6",
        "--budget-secs",
        "30",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let row = text.lines().find(|l| l.trim_start().starts_with("1 ")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells, ["1", "18", "18", "12"]);

    let records = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 9, "one record per (k, group) run");
}

#[test]
fn json_mode_emits_machine_readable_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = latshell(&[
        "--json",
        "search",
        "6",
        "4",
        "2",
        "--group",
        "eblock",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0);
    let value: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(value["bound"], 60);
    assert_eq!(value["proven_optimal"], true);

    let witness = dir.path().join("n6_k4_t2_eblock.code");
    let out = latshell(&["--json", "verify", witness.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    let report: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(report["size"], 60);
    assert_eq!(report["max_inner"], 2);
}

#[test]
fn file_driven_groups_feed_searches() {
    let dir = tempfile::tempdir().unwrap();
    // A handwritten single-generator group: rotate the six coordinates and
    // flip the sign that wraps around.
    let path = dir.path().join("group.txt");
    std::fs::write(&path, "n=6\nimg: 2 3 4 5 6 1 ; sgn: 1 1 1 1 1 -1\n").unwrap();
    let spec = format!("file:{}", path.display());
    let out = search_into(dir.path(), &["6", "6", "1", "--group", &spec]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("bound 12 (optimal)"));

    let manifest_name = dir
        .path()
        .read_dir()
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().ends_with(".manifest.json"))
        .expect("manifest written");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(manifest_name.path()).unwrap()).unwrap();
    let hashes = manifest["input_hashes"].as_object().unwrap();
    assert_eq!(hashes.len(), 1, "the group file must be hashed into the manifest");
}
