use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn strucnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strucnet"))
        .args(args)
        .env_remove("STRUCNET_SEED")
        .output()
        .expect("binary runs")
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn edges(topology_json: &str) -> Vec<(String, String)> {
    let v: Value = serde_json::from_str(topology_json).unwrap();
    let mut e: Vec<(String, String)> = v["flow_edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_str().unwrap().into(), p[1].as_str().unwrap().into()))
        .collect();
    e.sort();
    e
}

fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut e: Vec<(String, String)> = list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    e.sort();
    e
}

#[test]
fn analyze_reports_the_reference_network() {
    let o = strucnet(&["analyze", &f("reference_system.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    for line in [
        "S-rank(A) = 6",
        "S-rank([A;C]) = 7",
        "{4,5,6} Parent",
        "cycle (4,5,6) ParentCycle",
        "cycle (1,2) ChildCycle",
        "cycle (7) ChildCycle",
        "path 3->a",
        "a: Alpha (crucial)",
        "b: Beta (crucial)",
        "c: Gamma",
        "crucial = {a,b}",
        "observable = true",
        "1-based",
    ] {
        assert!(text.contains(line), "missing {line:?} in\n{text}");
    }
}

#[test]
fn analyze_writes_json() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = strucnet(&["analyze", &f("reference_system.json"), "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["srank_stack"], 7);
    assert_eq!(v["crucial"], serde_json::json!(["a", "b"]));
}

#[test]
fn analyze_exits_2_when_unobservable() {
    let o = strucnet(&["analyze", &f("reference_system_without_a.json")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("observable = false"));
    let o = strucnet(&["analyze", &f("empty_a_system.json")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("{1} Parent"));
}

#[test]
fn parse_and_usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "A": [[0, 5]], "agents": []}"#).unwrap();
    let o = strucnet(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("A[0]"), "{}", stderr(&o));
    assert_eq!(code(&strucnet(&["analyze", "/no/such/file.json"])), 1);
    assert_eq!(code(&strucnet(&["frobnicate"])), 1);
    assert_eq!(code(&strucnet(&["design", &f("reference_system.json"), "--mode", "bogus"])), 1);
}

#[test]
fn design_main_reproduces_the_combined_topology() {
    let o = strucnet(&["design", &f("reference_system.json"), "--mode", "main"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(edges(&stdout(&o)), pairs(&[("a", "b"), ("a", "c"), ("c", "a")]));
    assert!(stderr(&o).contains("locally minimal"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mode"], "combined");
}

#[test]
fn design_output_reproduces_the_output_fusion_topology() {
    let o = strucnet(&["design", &f("reference_system.json"), "--mode", "output"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        edges(&stdout(&o)),
        pairs(&[("a", "b"), ("b", "a"), ("a", "c"), ("b", "c")])
    );
}

#[test]
fn design_full_srank_is_impossible_on_the_reference_network() {
    let o = strucnet(&["design", &f("reference_system.json"), "--mode", "full-srank"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("S-rank 6 < 7"), "{}", stderr(&o));
}

#[test]
fn design_output_file_verifies_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("topo.json");
    let o = strucnet(&[
        "design",
        &f("reference_system.json"),
        "--mode",
        "main",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let written = std::fs::read_to_string(&out).unwrap();
    let parsed = strucnet::io::TopologyFile::parse(&written).unwrap();
    assert_eq!(parsed.to_json() + "\n", written);
    let o = strucnet(&["verify", &f("reference_system.json"), out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn verify_exit_codes() {
    let sys = f("reference_system.json");
    for (topo, want) in [
        ("w2_combined.json", 0),
        ("w1_output_fusion.json", 0),
        ("identity.json", 2),
        ("complete_state_fusion.json", 2),
    ] {
        let o = strucnet(&["verify", &sys, &f(topo)]);
        assert_eq!(code(&o), want, "{topo}: {}", stdout(&o));
    }
    let o = strucnet(&["verify", &sys, &f("identity.json")]);
    let text = stdout(&o);
    assert!(text.contains("agent a: states reaching no output {4,5,6,7}"), "{text}");
    assert!(text.contains("agent c: states reaching no output"), "{text}");
    assert!(text.contains("agents {b}: S-rank deficiency 1"), "{text}");
}

#[test]
fn verify_rejects_unknown_agents() {
    let dir = TempDir::new().unwrap();
    let topo = dir.path().join("t.json");
    std::fs::write(&topo, r#"{"agents":["a","b","z"],"flow_edges":[],"mode":"combined"}"#).unwrap();
    let o = strucnet(&["verify", &f("reference_system.json"), topo.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn gain_stabilizes_the_reference_network() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gain.json");
    let o = strucnet(&[
        "gain",
        &f("reference_system.json"),
        &f("w2_combined.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rho: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("rho = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rho < 1.0);
    let written = std::fs::read_to_string(&out).unwrap();
    let parsed = strucnet::io::GainFile::parse(&written).unwrap();
    assert_eq!(parsed.to_json() + "\n", written);
    assert_eq!(parsed.gain.blocks.len(), 3);
}

#[test]
fn gain_seed_comes_from_the_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_strucnet"))
            .args(["gain", &f("reference_system.json"), &f("w2_combined.json")])
            .env("STRUCNET_SEED", seed)
            .output()
            .unwrap()
    };
    let a = run("3");
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&run("3")));
}

#[test]
fn gain_on_stable_plant_is_zero() {
    let o = strucnet(&["gain", &f("stable_system.json"), &f("w2_combined.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = strucnet::io::GainFile::parse(&stdout(&o)).unwrap();
    assert_eq!(g.method, "zero");
    assert!(g.gain.blocks.iter().all(|b| b.iter().all(|&x| x == 0.0)));
    // W ⊗ A with row-stochastic W has the spectral radius of A.
    assert!((g.rho - 0.5).abs() < 1e-6, "{}", g.rho);
}

#[test]
fn gain_on_unobservable_topology_exits_4() {
    let o = strucnet(&["gain", &f("reference_system.json"), &f("identity.json")]);
    assert_eq!(code(&o), 4);
}

#[test]
fn gain_needs_a_numeric_block() {
    let dir = TempDir::new().unwrap();
    let sys = dir.path().join("s.json");
    std::fs::write(&sys, r#"{"n":1,"A":[[0,0]],"agents":[{"id":"a","C":[[0,0]]}]}"#).unwrap();
    let topo = dir.path().join("t.json");
    std::fs::write(&topo, r#"{"agents":["a"],"flow_edges":[],"mode":"combined"}"#).unwrap();
    let o = strucnet(&["gain", sys.to_str().unwrap(), topo.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

fn zero_gain_file(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("zero.json");
    let block = vec![vec![0.0; 7]; 7];
    let v = serde_json::json!({
        "agents": ["a", "b", "c"],
        "n": 7,
        "blocks": [block.clone(), block.clone(), block],
        "rho": 0.0,
        "method": "zero",
        "iterations": 0
    });
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn parse_csv(text: &str) -> Vec<(usize, String, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,agent_id,sq_error_sum"));
    lines
        .map(|l| {
            let parts: Vec<&str> = l.split(',').collect();
            assert_eq!(parts.len(), 3, "{l}");
            (parts[0].parse().unwrap(), parts[1].to_string(), parts[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn simulate_with_synthesized_gain_stays_bounded() {
    let dir = TempDir::new().unwrap();
    let gain = dir.path().join("gain.json");
    let sys = f("reference_system.json");
    let topo = f("w2_combined.json");
    assert_eq!(code(&strucnet(&["gain", &sys, &topo, "--out", gain.to_str().unwrap()])), 0);
    let o = strucnet(&["simulate", &sys, &topo, gain.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 101 * 3);
    assert!(rows.iter().all(|r| r.2.is_finite() && r.2 < 1e3));
    assert!(!stderr(&o).contains("DIVERGING"));
}

#[test]
fn simulate_zero_noise_exact_start_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("trace.csv");
    let o = strucnet(&[
        "simulate",
        &f("zero_noise_system.json"),
        &f("w1_output_fusion.json"),
        zero_gain_file(&dir).to_str().unwrap(),
        "--init",
        "truth",
        "--steps",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_csv(&std::fs::read_to_string(out).unwrap());
    assert_eq!(rows.len(), 21 * 3);
    assert!(rows.iter().all(|r| r.2 == 0.0));
}

#[test]
fn simulate_zero_gain_diverges() {
    let dir = TempDir::new().unwrap();
    let o = strucnet(&[
        "simulate",
        &f("reference_system.json"),
        &f("w2_combined.json"),
        zero_gain_file(&dir).to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("DIVERGING"), "{}", stderr(&o));
}

#[test]
fn simulate_rejects_mismatched_gain() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.json");
    let v = serde_json::json!({
        "agents": ["a"], "n": 7, "blocks": [vec![vec![0.0; 7]; 7]],
        "rho": 0.0, "method": "zero", "iterations": 0
    });
    std::fs::write(&path, v.to_string()).unwrap();
    let o = strucnet(&[
        "simulate",
        &f("reference_system.json"),
        &f("w2_combined.json"),
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}
