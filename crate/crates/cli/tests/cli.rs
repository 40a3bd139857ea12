use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn adgene(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adgene"))
        .args(args)
        .current_dir(dir)
        .env_remove("ADGPT_KB")
        .env_remove("ADGPT_ROUTER")
        .output()
        .unwrap()
}

fn ok(out: Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn manifest() -> String {
    fixtures().join("ad144/manifest.toml").display().to_string()
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();

    let v = ok(adgene(d, &["ingest", "--manifest", &manifest()]));
    assert_eq!(v["seed_genes"], 144);
    assert_eq!(v["qtl_files"].as_array().unwrap().len(), 26);

    let v = ok(adgene(d, &["build-kb", "--manifest", &manifest(), "--out", "kb.snap"]));
    assert!(d.join("kb.snap").is_file());
    let kb_hash = v["kb_hash"].as_str().unwrap().to_string();

    for n in 1..=4 {
        let out = format!("t{n}.jsonl");
        let v = ok(adgene(d, &["gen-corpus", "--task", &n.to_string(), "--out", &out]));
        let lines = std::fs::read_to_string(d.join(&out)).unwrap().lines().count();
        assert_eq!(v["count"], lines);
        if n == 1 {
            assert_eq!(lines, 2160);
        }
        let v = ok(adgene(
            d,
            &[
                "split",
                "--input",
                &out,
                "--seed",
                "11",
                "--train-out",
                &format!("t{n}.train.jsonl"),
                "--test-out",
                &format!("t{n}.test.jsonl"),
            ],
        ));
        if n == 1 {
            assert_eq!((v["train"].as_u64(), v["test"].as_u64()), (Some(1944), Some(216)));
        }
    }

    let mut args = vec!["train-router", "--out", "router.json", "--train"];
    let trains: Vec<String> = (1..=4).map(|n| format!("t{n}.train.jsonl")).collect();
    args.extend(trains.iter().map(String::as_str));
    let v = ok(adgene(d, &args));
    assert_eq!(v["router_hash"].as_str().unwrap().len(), 64);

    let v = ok(adgene(d, &["query", "--text", "What is the start position of GENEA?"]));
    assert_eq!(v["task"], "Task1");
    assert_eq!(v["text"], "The start position of GENEA is 1000.");
    assert_eq!(v["sources"].as_array().unwrap().len(), 1);

    let again = adgene(d, &["query", "--text", "What is the start position of GENEA?"]);
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&again.stdout).unwrap(), v);

    std::fs::write(
        d.join("a.csv"),
        "query,expert,precision,relevance\nq1,e1,2,3\nq2,e1,3,3\nq3,e1,2,2\n",
    )
    .unwrap();
    std::fs::write(
        d.join("b.csv"),
        "query,expert,precision,relevance\nq1,e1,4,4\nq2,e1,4,5\nq3,e1,3,4\n",
    )
    .unwrap();
    let mut args = vec![
        "evaluate",
        "--out",
        "report.json",
        "--ratings-a",
        "a.csv",
        "--ratings-b",
        "b.csv",
        "--test",
    ];
    let tests: Vec<String> = (1..=4).map(|n| format!("t{n}.test.jsonl")).collect();
    args.extend(tests.iter().map(String::as_str));
    let v = ok(adgene(d, &args));
    assert_eq!(v["tasks"].as_array().unwrap().len(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["kb_hash"], kb_hash);
    assert_eq!(report["statistics"]["precision"]["df"], 2);
    assert_eq!(report["lora"]["delta_vs_reported"], 33_772_160);
    for t in report["tasks"].as_array().unwrap() {
        assert_eq!(t["exact_match_accuracy"], 1.0, "{t}");
    }
}

#[test]
fn env_supplies_kb_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_adgene"))
        .args(["gen-corpus", "--task", "3", "--out", "t3.jsonl"])
        .current_dir(tmp.path())
        .env("ADGPT_KB", tmp.path().join("elsewhere.snap"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("elsewhere.snap"));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["query"][..],
        &["gen-corpus", "--task", "5", "--out", "x"],
        &["build-kb", "--manifest", "m.toml", "--out", "kb.snap", "--bogus"],
        &[],
    ] {
        let out = adgene(tmp.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn domain_errors_exit_1_with_code() {
    let tmp = tempfile::tempdir().unwrap();
    for (args, code) in [
        (&["query", "--text", "hi"][..], "kb_invalid"),
        (
            &["build-kb", "--manifest", "missing.toml", "--out", "kb.snap"],
            "ingest_failed",
        ),
        (&["serve", "--config", "missing.toml"], "config_missing"),
    ] {
        let out = adgene(tmp.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.starts_with(&format!("error: {code}: ")), "{stderr}");
        assert_eq!(stderr.lines().count(), 1);
    }
}
