use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn treedist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treedist")).args(args).output().unwrap()
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

struct Quartets {
    _dir: TempDir,
    a: String,
    b: String,
}

fn quartets() -> Quartets {
    let dir = TempDir::new().unwrap();
    let a = file(dir.path(), "a.nwk", "(a,b,(c,d));\n");
    let b = file(dir.path(), "b.nwk", "(a,c,(b,d));\n");
    Quartets {
        a: a.display().to_string(),
        b: b.display().to_string(),
        _dir: dir,
    }
}

#[test]
fn nonshared_report() {
    let q = quartets();
    let v = json_of(&treedist(&["--json", "nonshared", &q.a, &q.b, "--list"]));
    assert_eq!((v["b"].as_u64(), v["b_prime"].as_u64()), (Some(1), Some(1)));
    assert_eq!(v["method"], "partition-labeling");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["nonshared_splits"][0], serde_json::json!([["c", "d"]]));
    assert!(v.get("elapsed_seconds").is_none() || v["elapsed_seconds"].is_null());

    let same = json_of(&treedist(&["--json", "nonshared", &q.a, &q.a]));
    assert_eq!((same["b"].as_u64(), same["b_prime"].as_u64()), (Some(0), Some(0)));
    let brute = json_of(&treedist(&["--json", "nonshared", &q.a, &q.b, "--bruteforce"]));
    assert_eq!(brute["b"], v["b"]);
}

#[test]
fn approx_certificate_and_script() {
    let q = quartets();
    let script = q.a.replace("a.nwk", "s.txt");
    let v = json_of(&treedist(&["--json", "stt-approx", &q.a, &q.b, "--emit-script", &script]));
    let ap = &v["approx"];
    assert_eq!(ap["lower_bound"].as_u64(), Some(1));
    assert!(ap["cost"].as_u64().unwrap() <= 2);
    let applied = json_of(&treedist(&["--json", "apply", &q.a, &script]));
    let back = file(Path::new(&script).parent().unwrap(), "end.nwk", applied["newick"].as_str().unwrap());
    let check = json_of(&treedist(&["--json", "nonshared", back.to_str().unwrap(), &q.b]));
    assert_eq!(check["b"].as_u64(), Some(0));
    assert_eq!(applied["cost"], ap["cost"].to_string());
}

#[test]
fn exact_distance_and_budget() {
    let q = quartets();
    let v = json_of(&treedist(&["--json", "stt-exact", &q.a, &q.b]));
    assert_eq!(v["distance"].as_u64(), Some(2));
    let v = json_of(&treedist(&["--json", "stt-exact", &q.a, &q.b, "--budget", "1"]));
    assert_eq!(v["exceeded"], true);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let gen = |seed: &str| treedist(&["--seed", seed, "gen", "random", "--n", "60", "--d", "5"]).stdout;
    assert_eq!(gen("4"), gen("4"));
    let a = file(dir.path(), "a.nwk", &String::from_utf8(gen("4")).unwrap());
    let b = file(dir.path(), "b.nwk", &String::from_utf8(gen("5")).unwrap());
    let run = || treedist(&["--json", "stt-approx", a.to_str().unwrap(), b.to_str().unwrap()]).stdout;
    assert_eq!(run(), run());
}

#[test]
fn degree3_representation_costs_nothing() {
    let dir = TempDir::new().unwrap();
    let x = file(dir.path(), "x.nwk", "(a:1,b:1,c:1,d:1,(e:1,f:1):1/2);\n");
    let v = json_of(&treedist(&["--json", "--weighted", "deg3-rep", x.to_str().unwrap()]));
    assert_eq!(v["cost"], "0");
    assert_eq!(v["added_nodes"].as_u64(), Some(2));
}

#[test]
fn gadget_script_meets_threshold() {
    let dir = TempDir::new().unwrap();
    let inst = file(dir.path(), "i.txt", "1 2\n1 2 3\n1 2 3\n");
    let v = json_of(&treedist(&["--json", "gadget", "script", inst.to_str().unwrap()]));
    assert_eq!(v["cost"], "32");
    assert_eq!(v["expected"].as_u64(), Some(32));
    assert_eq!(v["threshold"].as_u64(), Some(36));
}

#[test]
fn exit_codes() {
    let q = quartets();
    assert_eq!(treedist(&["nonshared", &q.a]).status.code(), Some(2));
    assert_eq!(treedist(&["gen", "random", "--n", "2"]).status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let bad = file(dir.path(), "bad.nwk", "(a,b,(c,d);\n");
    let out = treedist(&["--json", "nonshared", &q.a, bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "syntax");

    let other = file(dir.path(), "o.nwk", "(a,b,(c,e));\n");
    let out = treedist(&["--json", "nonshared", &q.a, other.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let missing = dir.path().join("missing.nwk");
    assert_eq!(treedist(&["nonshared", &q.a, missing.to_str().unwrap()]).status.code(), Some(1));
}
