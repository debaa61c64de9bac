use std::path::Path;
use std::process::{Command, Output};

use smoothrange::geometry::io::read_points;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smoothrange"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn error_of(o: &Output) -> serde_json::Value {
    assert!(!o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    v["error"].clone()
}

#[test]
fn gen_writes_readable_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let o = bin()
        .args(["gen", "--n", "50", "--dim", "3", "--seeds", "4", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success());
    let p = read_points(&path, Some(3)).unwrap();
    assert_eq!(p.len(), 50);
    assert!(p.coords().iter().all(|&x| (0.0..=1.0).contains(&x)));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# config_hash: "));
}

#[test]
fn sample_mode_writes_the_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--n", "512", "--sample-size", "32", "--net-directions", "16"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config_hash: "));
    assert!(lines[1].starts_with("# version: smoothrange "));
    assert_eq!(lines[2], "n,w,profile,seed,size,error,disc,runtime_ms");
    assert!(lines[3].starts_with("512,1.0000000000000001e-1,triangle,0,32,"));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("sample.json")).unwrap()).unwrap();
    assert_eq!(json["net_resolution"]["directions"], 16);
    assert_eq!(json["config"]["sample_size"], 32);
}

#[test]
fn file_input_and_external_net() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    let q = dir.path().join("q.csv");
    for (path, n, seed) in [(&p, "400", "1"), (&q, "40", "2")] {
        let o = bin().args(["gen", "--n", n, "--seeds", seed, "--output"]).arg(path).output().unwrap();
        assert!(o.status.success());
    }
    let out = dir.path().join("net");
    let o = bin()
        .args(["verify-net", "--generator", "file", "--eps", "0.3", "--tau", "0.1", "--net-directions", "12"])
        .arg("--input")
        .arg(&p)
        .arg("--net-points")
        .arg(&q)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("net.csv")).unwrap();
    let row = csv.lines().nth(3).unwrap();
    assert!(row.starts_with("400,") && row.split(',').nth(4) == Some("40"), "{row}");
}

#[test]
fn validation_failures_are_json() {
    let dir = tempfile::tempdir().unwrap();
    let e = error_of(&run(&["sample", "--n", "0"], dir.path()));
    assert_eq!(e["kind"], "invalid_parameter");
    let e = error_of(&run(&["verify-net", "--eps", "0.1", "--tau", "0.2"], dir.path()));
    assert_eq!(e["kind"], "invalid_parameter");
    let e = error_of(&bin().args(["cluster", "--generator", "file", "--input", "/nonexistent/p.csv"]).output().unwrap());
    assert_eq!(e["kind"], "io");
    let e = error_of(&bin().args(["sample", "--w", "abc"]).output().unwrap());
    assert_eq!(e["kind"], "usage");
    let e = error_of(&bin().output().unwrap());
    assert_eq!(e["kind"], "invalid_parameter");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"n\": 5}").unwrap();
    let e = error_of(&bin().arg("--config").arg(&cfg).output().unwrap());
    assert_eq!(e["kind"], "parse");
}

#[test]
fn thread_override_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lemma-check", "--n", "200", "--seeds", "3,5", "--slabs", "4", "--net-directions", "12"];
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let o = bin()
            .env("SMOOTHRANGE_THREADS", threads)
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success());
        outputs.push(std::fs::read(dir.path().join("lemma-check.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let o = bin().env("SMOOTHRANGE_THREADS", "many").args(args).output().unwrap();
    assert_eq!(error_of(&o)["kind"], "invalid_parameter");
}

#[test]
fn flags_override_a_loaded_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    assert!(run(&["cluster", "--n", "64", "--seeds", "1"], &a).status.success());
    let b = dir.path().join("b");
    let o = bin()
        .arg("--config")
        .arg(a.join("config.json"))
        .args(["cluster", "--k-max", "2", "--out"])
        .arg(&b)
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = std::fs::read_to_string(b.join("cluster.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3 + 2);
    let cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(b.join("config.json")).unwrap()).unwrap();
    assert_eq!((cfg["n"].as_u64(), cfg["k_max"].as_u64()), (Some(64), Some(2)));
}
