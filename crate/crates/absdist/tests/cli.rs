mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn absdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_absdist")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = absdist(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    absdist(args).status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn analyze_to(dir: &Path, name: &str, program: &Path, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["analyze", path(program), "-o", path(&out)];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn report(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn analyze_compare_and_intersect() {
    let dir = tempfile::tempdir().unwrap();
    let qs = data("quicksort.pl");
    let plain = analyze_to(dir.path(), "a.json", &qs, &[]);
    let noimp = analyze_to(dir.path(), "b.json", &data("quicksort_noimport.pl"), &[]);

    let stdout = ok(&["analyze", path(&qs)]);
    assert_eq!(report(&stdout), report(&std::fs::read_to_string(&plain).unwrap()));

    let same = report(&ok(&["compare", path(&plain), path(&plain)]));
    assert_eq!(same["value"], 0.0);

    let top = report(&ok(&["compare", path(&plain), path(&noimp), "--metric", "top"]));
    assert_eq!(top["metric"], "top");
    let flat = report(&ok(&["compare", path(&plain), path(&noimp), "--metric", "flat"]));
    assert_eq!(flat["metric"], "flat");
    assert!(flat["per_point"].as_object().unwrap().len() >= 5);
    let tree = report(&ok(&["compare", path(&plain), path(&noimp), "--mu", "0.2"]));
    assert_eq!(tree["metric"], "tree");
    assert_eq!(tree["mu"], 0.2);
    assert_eq!(tree["pairs_solved"], 8);
    let direct = report(&ok(&["compare", path(&plain), path(&noimp), "--solver", "direct"]));
    let (t, d) = (tree["value"].as_f64().unwrap(), direct["value"].as_f64().unwrap());
    assert!((t - d).abs() < 1e-6 && t > 0.0);

    let meet = dir.path().join("meet.json");
    ok(&["intersect", path(&plain), path(&noimp), "-o", path(&meet)]);
    let back = report(&ok(&["compare", path(&meet), path(&plain)]));
    assert_eq!(back["value"], 0.0);
}

#[test]
fn sharing_analyses_compare_on_a_common_base() {
    let dir = tempfile::tempdir().unwrap();
    let prog = data("corpus/alias.pl");
    let gr = analyze_to(dir.path(), "gr.json", &prog, &["--domain", "gr"]);
    let sh = analyze_to(dir.path(), "sh.json", &prog, &["--domain", "share"]);
    let wide = analyze_to(dir.path(), "wide.json", &prog, &["--domain", "share", "--widen-share", "2"]);
    assert_eq!(code(&["compare", path(&gr), path(&sh)]), 4);
    let d = report(&ok(&["compare", path(&sh), path(&wide), "--metric", "flat", "--base", "gr"]));
    assert!(d["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn flat_weights_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = analyze_to(dir.path(), "a.json", &data("quicksort.pl"), &[]);
    let b = analyze_to(dir.path(), "b.json", &data("quicksort_noimport.pl"), &[]);
    let good = dir.path().join("good.csv");
    std::fs::write(&good, "pp,weight\nquicksort/2/0,1/2\nqsort/3/2/1,1/2\n").unwrap();
    let d = report(&ok(&["compare", path(&a), path(&b), "--metric", "flat", "--weights", path(&good)]));
    assert!(d["value"].as_f64().unwrap() > 0.0);
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "pp,weight\nquicksort/2/0,0.3\n").unwrap();
    assert_eq!(code(&["compare", path(&a), path(&b), "--metric", "flat", "--weights", path(&bad)]), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.pl");
    std::fs::write(&broken, "p :- q, .\n").unwrap();
    let out = absdist(&["analyze", path(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.pl"));
    let no_entry = dir.path().join("noentry.pl");
    std::fs::write(&no_entry, "p.\n").unwrap();
    assert_eq!(code(&["analyze", path(&no_entry)]), 2);
    assert_eq!(code(&["analyze", "/nonexistent.pl"]), 1);

    let a = analyze_to(dir.path(), "a.json", &data("quicksort.pl"), &[]);
    let other = analyze_to(dir.path(), "o.json", &data("corpus/append.pl"), &[]);
    assert_eq!(code(&["compare", path(&a), path(&other)]), 4);
    assert_eq!(code(&["compare", path(&a), path(&a), "--mu", "1.5"]), 1);
}

#[test]
fn bench_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    std::fs::copy(data("corpus/append.pl"), corpus.join("append.pl")).unwrap();
    let cfg = dir.path().join("bench.toml");
    std::fs::write(
        &cfg,
        "corpus = \"corpus\"\ngnuplot = \"plot.gp\"\n[[domains]]\nname = \"gr\"\n[[domains]]\nname = \"share\"\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    ok(&["bench", path(&cfg), "-o", path(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert!(text.lines().skip(1).all(|l| l.starts_with("append,") && l.ends_with(",ok")));
    assert!(std::fs::read_to_string(dir.path().join("plot.gp")).unwrap().contains("out.csv"));

    std::fs::write(&cfg, "corpus = \"corpus\"\nmu = 2\n[[domains]]\nname = \"gr\"\n").unwrap();
    assert_eq!(code(&["bench", path(&cfg)]), 1);
}
