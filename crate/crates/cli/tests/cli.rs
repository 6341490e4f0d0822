use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_properad-htt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("properad-htt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

const TWELVE_FLAGS: &str = r#"{"flags":["a","b","c","d","e","f","g","h","i","j","k","l"],
 "involution":[["b","e"],["c","f"],["d","i"],["g","h"],["k","l"]],
 "vertices":[["a","b","c","d"],["e","f","g"],["h","i","j","k","l"]]}"#;

#[test]
fn contracting_an_edge_merges_blocks() {
    let g = scratch("twelve.json", TWELVE_FLAGS);
    let o = run(&["graphs", "contract", "--graph", g.to_str().unwrap(), "--edge", "g,h", "--format", "json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    let blocks: Vec<Vec<String>> = serde_json::from_value(v["vertices"].clone()).unwrap();
    assert!(blocks.contains(&["e", "f", "i", "j", "k", "l"].map(String::from).to_vec()));
}

#[test]
fn invalid_graph_exits_nonzero() {
    let g = scratch("bad.json", r#"{"flags":["a","b"],"involution":[["a","b"]],"vertices":[["a","b"],["b"]]}"#);
    let o = run(&["graphs", "validate", "--graph", g.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn catalog_bounds_are_guarded() {
    let o = run(&["catalog", "dump", "--max-vertices", "6"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["catalog", "dump", "--max-vertices", "3", "--outputs", "1", "--inputs", "2", "--format", "json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert!(v["graphs"].as_array().unwrap().iter().any(|g| g["trees"] == 2 && g["sh_trees"] == 3));
}

#[test]
fn reports_are_deterministic() {
    let args = ["suite", "tree-laws", "--max-vertices", "3", "--format", "json"];
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    let a = strip(json_of(&run(&args)));
    let b = strip(json_of(&run(&args)));
    assert_eq!(a, b);
    assert_eq!(a["totals"]["failed"], 0);
}

#[test]
fn transfer_run_output_reloads_as_witness() {
    let ctx = scratch("massey.json", r#"{"source":{"kind":"massey-dga"}}"#);
    let out = ctx.with_file_name("result.json");
    let o = run(&[
        "transfer", "run", "--context", ctx.to_str().unwrap(), "--max-vertices", "3", "--out", out.to_str().unwrap(), "--format", "json",
    ]);
    assert!(o.status.success());
    let result: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let op = result["operations"].as_array().unwrap().last().unwrap();
    let w = scratch("witness.json", &op["input"].to_string());
    for what in ["codifferential", "morphism"] {
        let o = run(&["transfer", "verify", "--what", what, "--context", ctx.to_str().unwrap(), "--witness", w.to_str().unwrap()]);
        assert!(o.status.success(), "{what}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let o = run(&["transfer", "verify", "--what", "merkulov", "--context", ctx.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn thread_count_comes_from_the_environment() {
    let o = bin().env("PROPERAD_HTT_THREADS", "2").args(["suite", "coassoc-example"]).output().unwrap();
    assert!(o.status.success());
    let o = bin().env("PROPERAD_HTT_THREADS", "many").args(["suite", "coassoc-example"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
