use std::process::{Command, Output};

fn qrpsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrpsm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spec_examples() {
    assert_eq!(stdout(&qrpsm(&["peralta", "--n", "6"])), "6 181\n");
    let o = qrpsm(&["verify", "--protocol", r#"{"p":5,"a":[2,1,1]}"#, "--f", "AND:2", "--mode", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "PASS\n");
}

#[test]
fn exit_codes() {
    assert_eq!(qrpsm(&["peralta"]).status.code(), Some(2));
    assert_eq!(qrpsm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qrpsm(&["verify", "--protocol", "{bad", "--f", "AND:2"]).status.code(), Some(2));
    let o = qrpsm(&["verify", "--protocol", r#"{"p":5,"a":[2,1,2]}"#, "--f", "AND:2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL x=["));
    let o = qrpsm(&["verify", "--protocol", r#"{"p":5,"a":[2,1,1]}"#, "--f", "AND:2", "--mode", "exhaustive", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(qrpsm(&["peralta", "--n", "8", "--max-p", "1000"]).status.code(), Some(3));
    assert_eq!(qrpsm(&["paley", "--p", "31", "--n", "4"]).status.code(), Some(1));
    assert_eq!(qrpsm(&["peralta", "--n", "4", "--p", "37"]).status.code(), Some(0));
}

#[test]
fn run_is_reproducible() {
    let args = ["run", "--protocol", r#"{"p":11,"a":[6,1,1,1]}"#, "--x", "1,0,1", "--seed", "42"];
    let a = qrpsm(&args);
    let b = qrpsm(&args);
    assert_eq!(a.stdout, b.stdout);
    let line = stdout(&a);
    assert!(line.starts_with("seed=42 x=[1,0,1] r=["), "{line}");
    assert!(line.trim_end().ends_with("out=-1"), "{line}");
    let unseeded = stdout(&qrpsm(&["run", "--protocol", "fkn", "--x", "2,1"]));
    assert!(unseeded.starts_with("seed=") && unseeded.trim_end().ends_with("out=1"));
}

#[test]
fn tables_independent_of_workers() {
    let a = qrpsm(&["tables", "--workers", "1"]);
    let b = qrpsm(&["tables", "--workers", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    let text = stdout(&a);
    assert!(text.contains("# peralta-primes\n1 3 ok\n"));
    assert!(text.lines().last().unwrap().starts_with("# mismatches "));
}

#[test]
fn json_format_is_strict() {
    let cases: [&[&str]; 8] = [
        &["peralta", "--n", "3"],
        &["qrseq", "--p", "7"],
        &["lqr-prime", "--n", "2"],
        &["synth", "--f", "AND:3", "--embed", "sym"],
        &["verify", "--protocol", "fkn", "--f", "COMP"],
        &["paley", "--p", "17", "--n", "2", "--full"],
        &["paley-m", "--n", "2"],
        &["dre-check", "--poly", "x1*x2", "--p", "3"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.extend(["--format", "json"]);
        let out = stdout(&qrpsm(&full));
        for line in out.lines() {
            serde_json::from_str::<serde_json::Value>(line).unwrap_or_else(|e| panic!("{args:?}: {line:?}: {e}"));
        }
    }
}

#[test]
fn verify_reads_descriptor_files() {
    let dir = std::env::temp_dir().join(format!("qrpsm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("protocols.jsonl");
    std::fs::write(&path, "{\"p\":5,\"a\":[2,1,1]}\n\n{\"p\":5,\"a\":[1,1,1]}\n").unwrap();
    let o = qrpsm(&["verify", "--protocol", path.to_str().unwrap(), "--f", "AND:2"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "PASS");
    assert!(lines[1].starts_with("FAIL"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cache_directory_from_environment() {
    let dir = std::env::temp_dir().join(format!("qrpsm-cache-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for _ in 0..2 {
        let o = Command::new(env!("CARGO_BIN_EXE_qrpsm")).args(["peralta", "--n", "5"]).env("QRPSM_CACHE_DIR", &dir).output().unwrap();
        assert_eq!(stdout(&o), "5 67\n");
    }
    let cached = std::fs::read_to_string(dir.join("peralta-cache")).unwrap();
    assert!(cached.lines().any(|l| l == "5 67"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn paley_edge_list() {
    let graph = stdout(&qrpsm(&["paley", "--p", "5", "--n", "1", "--edges"]));
    assert_eq!(graph, "0 1\n0 4\n1 2\n2 3\n3 4\n");
    let tour = stdout(&qrpsm(&["paley", "--p", "3", "--n", "1", "--edges"]));
    assert_eq!(tour, "0>2\n1>0\n2>1\n");
}

#[test]
fn help_documents_formats() {
    let help = stdout(&qrpsm(&["--help"]));
    assert!(help.contains("Exit status"));
    for sub in ["peralta", "verify", "run", "paley-m", "tables"] {
        let h = stdout(&qrpsm(&[sub, "--help"]));
        assert!(h.contains("--format"), "{sub}");
    }
    assert!(stdout(&qrpsm(&["verify", "--help"])).contains("PASS"));
}

#[test]
fn compile_dump_lists_components() {
    let out = stdout(&qrpsm(&["compile-dre", "--f", "AND:2", "--poly", "x1*x2", "--dump", "--no-verify"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["p"], 7);
    assert_eq!(v["encoders"].as_array().unwrap().len() as u64, v["dre_len"].as_u64().unwrap());
}
