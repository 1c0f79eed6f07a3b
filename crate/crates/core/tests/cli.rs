use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use primegrid::gaps::{Histogram, HistogramDoc};
use primegrid::manifest::RunManifest;
use primegrid::seqgen::InputDistribution;
use serde_json::Value;

fn primegrid(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primegrid"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = primegrid(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    primegrid(dir, args).status.code().unwrap()
}

const FIRST_ROWS: &str = "k,p,L,D1,D2,DD1,DD2
1,2,1,1,1,1,3
2,3,2,2,0,4,-2
3,5,6,2,2,2,7
4,7,8,4,-2,9,-5
5,11,17,2,2,4,6
6,13,21,4,-2,10,-6
7,17,31,2,2,4,2
8,19,35,4,2,6,10
9,23,41,6,-4,16,-14
10,29,57,2,4,2,14
";

#[test]
fn trail_then_gaps_gives_the_first_rows() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["trail", "--from", "2", "--to", "100", "--checkpoint-dir", "run"]);
    ok(d.path(), &["gaps", "--stops", "run/stops.bin", "--table", "t.csv"]);
    let table = fs::read_to_string(d.path().join("t.csv")).unwrap();
    assert!(table.starts_with(FIRST_ROWS), "{table}");
    let m = RunManifest::read(&d.path().join("t.csv.manifest.json")).unwrap();
    assert_eq!(m.command, "gaps");
    m.verify().unwrap();
    RunManifest::read(&d.path().join("run/run.manifest.json")).unwrap().verify().unwrap();
}

#[test]
fn histogram_column_for_1e4() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["trail", "--to", "1e4", "--checkpoint-dir", "run", "--segment-size", "1000"]);
    ok(
        d.path(),
        &["gaps", "--stops", "run/stops.bin", "--order", "1", "--hist", "h.csv", "--range", "1:80", "--json", "h.json"],
    );
    let csv = fs::read_to_string(d.path().join("h.csv")).unwrap();
    let hist = Histogram::from_csv(&csv).unwrap();
    for line in include_str!("data/dd1_histogram_columns.csv").lines().skip(1) {
        let f: Vec<u64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(hist.count(f[0] as i64), f[3], "value {}", f[0]);
    }
    // re-emitting parsed outputs reproduces them byte for byte
    assert_eq!(hist.to_csv(), csv);
    let json = fs::read_to_string(d.path().join("h.json")).unwrap();
    let doc: HistogramDoc = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", json);
    assert_eq!(doc.n_max, 1229);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kind"], "TrailD1");
    assert!(v["generated_at"].is_string());
}

#[test]
fn n_max_restricts_to_primes_below() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["trail", "--to", "1000", "--checkpoint-dir", "run"]);
    ok(d.path(), &["gaps", "--stops", "run/stops.bin", "--n-max", "100", "--hist", "h.csv"]);
    let hist = Histogram::from_csv(&fs::read_to_string(d.path().join("h.csv")).unwrap()).unwrap();
    assert_eq!(hist.total(), 24);
    assert_eq!(hist.count(2), 3);
    assert_eq!(hist.count(4), 4);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let args = ["--to", "200000", "--segment-size", "7000", "--batch", "2"];
    ok(p, &[&["trail", "--checkpoint-dir", "whole"][..], &args].concat());
    ok(p, &[&["trail", "--checkpoint-dir", "cut", "--stop-after", "5"][..], &args].concat());
    // a crash after appending part of a segment leaves stray bytes behind
    let mut stray = fs::read(p.join("cut/stops.bin")).unwrap();
    stray.extend_from_slice(&[7; 12]);
    fs::write(p.join("cut/stops.bin"), stray).unwrap();
    let next: Value = serde_json::from_str(&fs::read_to_string(p.join("cut/manifest.json")).unwrap()).unwrap();
    assert_eq!(next["next_n"], 35_002);
    assert_eq!(code(p, &["trail", "--resume", "cut", "--from", "2"]), 2);
    ok(p, &["trail", "--resume", "cut", "--from", "35002", "--stop-after", "3"]);
    ok(p, &["trail", "--resume", "cut"]);
    for f in ["stops.bin", "primes.bin", "manifest.json"] {
        assert_eq!(fs::read(p.join("whole").join(f)).unwrap(), fs::read(p.join("cut").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn resume_can_extend_the_range() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["trail", "--to", "5000", "--checkpoint-dir", "a"]);
    ok(p, &["trail", "--resume", "a", "--to", "20000"]);
    ok(p, &["trail", "--to", "20000", "--checkpoint-dir", "b"]);
    for f in ["stops.bin", "primes.bin"] {
        assert_eq!(fs::read(p.join("a").join(f)).unwrap(), fs::read(p.join("b").join(f)).unwrap());
    }
    // stops files of consecutive ranges concatenate
    let first = {
        ok(p, &["trail", "--to", "5000", "--checkpoint-dir", "c"]);
        fs::read(p.join("c/stops.bin")).unwrap()
    };
    let all = fs::read(p.join("a/stops.bin")).unwrap();
    assert_eq!(&all[..first.len()], &first[..]);
}

#[test]
fn ratio_and_pnt() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["trail", "--to", "1e5", "--checkpoint-dir", "run"]);
    let csv = ok(p, &["ratio", "--stops", "run/stops.bin", "--stride", "1000"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,ratio"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split(',').nth(1).unwrap().starts_with("2.2")));
    let v: Value = serde_json::from_str(&ok(p, &["pnt", "--stops", "run/stops.bin", "--k", "1000"])).unwrap();
    assert_eq!(v["k"], 1000);
    assert!(v["ratio_log"].as_f64().unwrap() > 0.4);
    assert_eq!(code(p, &["pnt", "--stops", "run/stops.bin", "--k", "1e9"]), 2);
}

#[test]
fn constants_json() {
    let d = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(d.path(), &["constants", "--manifest", "m.json"])).unwrap();
    assert!((v["c"].as_f64().unwrap() - 1.7052).abs() < 1e-4);
    assert!((v["iid_expected_hop"].as_f64().unwrap() - 2.22101).abs() < 1e-5);
    assert_eq!(v["star_is_tail_assumption"], true);
    assert!(d.path().join("m.json").exists());
}

#[test]
fn find_word_json() {
    let d = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(
        d.path(),
        &["find-word", "--word", "1,2,2,1", "--primes", "3,2,5,7", "--kmax", "1e6"],
    ))
    .unwrap();
    assert_eq!(v["found"], true);
    assert_eq!(v["M"], "2100");
    let loc: u64 = v["location"].as_str().unwrap().parse().unwrap();
    let x: u64 = v["x"].as_str().unwrap().parse().unwrap();
    assert_eq!(loc, x + v["k"].as_u64().unwrap() * 2_100);
    assert_eq!(code(d.path(), &["find-word", "--word", "1,2", "--primes", "4,3"]), 2);
}

#[test]
fn markov_example_json() {
    let d = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(d.path(), &["markov-example", "--which", "double"])).unwrap();
    assert!((v["p1"].as_f64().unwrap() - 0.7045175).abs() < 1e-6);
    assert!((v["p2"].as_f64().unwrap() - 0.179836).abs() < 1e-6);
    assert!((v["expected_hop"].as_f64().unwrap() - 2.270017).abs() < 1e-4);
    assert_eq!(code(d.path(), &["markov-example", "--which", "triple"]), 2);
}

#[test]
fn simulate_json() {
    let d = tempfile::tempdir().unwrap();
    let args = ["simulate", "--model", "2", "--dist", "table3-p2", "--length", "1e5", "--runs", "3", "--seed", "4", "--check-forbidden"];
    let a = ok(d.path(), &args);
    assert_eq!(a, ok(d.path(), &args));
    let v: Value = serde_json::from_str(&a).unwrap();
    let runs = v["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert_eq!(runs[2]["seed"], 6);
    assert!(runs.iter().all(|r| r["violations"] == 0));
    assert_eq!(code(d.path(), &["simulate", "--model", "1", "--dist", "table3-p1", "--length", "100"]), 2);
    assert_eq!(code(d.path(), &["simulate", "--model", "1", "--dist", "missing.csv", "--length", "100", "--seed", "1"]), 3);
}

#[test]
fn optimize_writes_a_loadable_distribution() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let v: Value = serde_json::from_str(&ok(
        p,
        &["optimize", "--model", "none", "--pop", "8", "--gens", "3", "--eval-length", "2000", "--seed", "1", "--out", "dist.csv"],
    ))
    .unwrap();
    assert_eq!(v["history"].as_array().unwrap().len(), 4);
    let csv = fs::read_to_string(p.join("dist.csv")).unwrap();
    assert_eq!(InputDistribution::from_csv(&csv).unwrap().to_csv(), csv);
    ok(p, &["simulate", "--model", "1", "--dist", "dist.csv", "--length", "1000", "--seed", "0"]);
    RunManifest::read(&p.join("dist.csv.manifest.json")).unwrap().verify().unwrap();
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(p, &[]), 2);
    assert_eq!(code(p, &["--help"]), 0);
    assert_eq!(code(p, &["trail", "--to", "1.5"]), 2);
    assert_eq!(code(p, &["trail", "--to", "100"]), 2);
    assert_eq!(code(p, &["trail", "--from", "3", "--to", "100", "--checkpoint-dir", "x"]), 2);
    assert_eq!(code(p, &["gaps", "--stops", "nothing.bin"]), 3);
    fs::write(p.join("bad.bin"), [1u8, 2, 3]).unwrap();
    assert_eq!(code(p, &["gaps", "--stops", "bad.bin"]), 3);
    assert_eq!(code(p, &["--threads", "0", "constants"]), 2);
}
