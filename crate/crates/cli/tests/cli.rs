use std::path::PathBuf;
use std::process::{Command, Output};

fn gmrf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmrf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn petersen() -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", "petersen.el"].iter().collect();
    format!("file:{}", p.display())
}

#[test]
fn solve_four_cycle() {
    let o = gmrf(&["solve", "--graph", "cycle:4", "--x", "0.6123724"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["tau"].as_f64().unwrap() - 0.1875).abs() < 1e-6);
    for method in ["recoupling", "chordal"] {
        let o = gmrf(&["solve", "--graph", "path:4", "--x", "0.5", "--method", method]);
        assert_eq!(o.status.code(), Some(0), "{method}");
    }
}

#[test]
fn verify_petersen() {
    let o = gmrf(&["verify", "--graph", &petersen(), "--x", "0.3", "--vertex-transitive"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("0 failed\n"));
    let o = gmrf(&["verify", "--graph", &petersen(), "--x", "0.3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 15);
}

#[test]
fn series_of_a_path() {
    let o = gmrf(&["series", "--graph", "path:3", "--order", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["coefficients"], serde_json::json!([1, 0, -2, 0, 1, 0, 0]));
}

#[test]
fn trees_and_traces() {
    let o = gmrf(&["trees", "--graph", &petersen()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], "2000");
    let o = gmrf(&["zeta", "--graph", &petersen(), "--traces", "6"]);
    // twelve 5-cycles and ten 6-cycles, each traversed from every start in both directions
    assert_eq!(stdout(&o), "k,trace\n1,0\n2,0\n3,0\n4,0\n5,120\n6,120\n");
}

#[test]
fn exit_codes() {
    assert_eq!(gmrf(&["solve", "--graph", "hypercube:3", "--x", "0.5"]).status.code(), Some(2));
    assert_eq!(gmrf(&["solve", "--graph", "cycle:4", "--x", "1.5"]).status.code(), Some(2));
    assert_eq!(gmrf(&["series", "--graph", "cycle:4", "--order", "100"]).status.code(), Some(2));
    assert_eq!(gmrf(&["solve", "--graph", "file:/nonexistent.el", "--x", "0.5"]).status.code(), Some(2));
    assert_eq!(gmrf(&["bogus"]).status.code(), Some(2));
    // a triangle with all correlations -0.6 has no positive definite completion
    let o = gmrf(&["solve", "--graph", "complete:3", "--x", "-0.6"]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["error"].is_string() && v["message"].is_string());
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["ldp", "--graph", "path:2", "--lo", "0.4", "--hi", "0.6", "--n", "10,20", "--samples", "200000", "--seed", "3"],
        &["sweep", "--graph", "regular:12,3,seed=7", "--from", "0.1", "--to", "0.8", "--steps", "8"],
        &["scan", "--family", "er:7,0.5", "--x", "0.4", "--count", "20", "--seed", "5"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "4"] {
            let path = dir.path().join(format!("{i}-{}.out", outputs.len()));
            let mut full = args.to_vec();
            full.extend(["--jobs", jobs, "--out", path.to_str().unwrap()]);
            let o = gmrf(&full);
            assert_eq!(o.status.code(), Some(0), "{args:?}");
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}

#[test]
fn csv_layout() {
    let o = gmrf(&["sweep", "--graph", "cycle:5", "--steps", "3"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.split('\n').collect();
    assert_eq!(lines[0], "x,ln_tau,sum_y,sidorenko_margin,min_y,max_y_excess");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.000000000000e0,"));
    assert!(!text.contains('\r'));
}
