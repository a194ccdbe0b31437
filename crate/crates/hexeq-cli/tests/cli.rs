use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hexeq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexeq"))
        .args(args)
        .current_dir(dir)
        .env("HEXEQ_OUT_DIR", dir.join("out"))
        .output()
        .expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Reports minus the run-dependent timing.
fn stable(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

fn golden(name: &str, got: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("HEXEQ_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(got).unwrap() + "\n").unwrap();
    }
    let want = read_json(&path);
    assert_eq!(&want, got, "golden {name} differs; rerun with HEXEQ_UPDATE_GOLDEN=1 after review");
}

#[test]
fn cah_passes_and_writes_report() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["check", "cah", "--family", "A2", "--flags", "1,0", "--trials", "20", "--seed", "42"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&d.path().join("out/cah-A2_1_0.json"));
    assert_eq!(r["summary"]["failed"], 0);
    assert_eq!(r["summary"]["total"], r["entries"].as_array().unwrap().len());
    assert!(r["entries"].as_array().unwrap().iter().all(|e| e["status"] == "exact-zero"));
}

#[test]
fn same_seed_same_report() {
    let d = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        ["check", "symmetry", "--family", "C2", "--flags", "1,1,0", "--cbar-family", "C2", "--cbar-flags", "1,0,1", "--trials", "5", "--seed", "9", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([out.to_string()])
            .collect::<Vec<_>>()
    };
    for out in ["a.json", "b.json"] {
        let a = args(out);
        let o = hexeq(&a.iter().map(String::as_str).collect::<Vec<_>>(), d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    assert_eq!(stable(read_json(&d.path().join("a.json"))), stable(read_json(&d.path().join("b.json"))));
}

#[test]
fn polytope_golden() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["check", "polytope", "--shape", "cahp1", "--combo", "C1_0", "--trials", "2", "--seed", "1", "--out", "r.json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    golden("polytope_cahp1_c1_0.json", &stable(read_json(&d.path().join("r.json"))));
}

#[test]
fn correspondence_golden() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["check", "correspondence", "--family", "A2", "--flags", "0,0", "--trials", "2", "--seed", "1", "--out", "r.json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let r = stable(read_json(&d.path().join("r.json")));
    assert_eq!(r["notes"][0], "fitted constant -1/1");
    golden("correspondence_a2_0_0.json", &r);
}

#[test]
fn cato_example() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["check", "polytope", "--shape", "cato", "--combo", "C1_0", "--trials", "25", "--seed", "7"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("out/polytope-cato-C1_0.json").exists());
}

#[test]
fn verification_failure_exits_1() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["check", "polytope", "--shape", "cahp1", "--combo", "C2_1_1_0", "--exchange-q", "--trials", "2", "--out", "r.json"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let r = read_json(&d.path().join("r.json"));
    assert!(r["summary"]["failed"].as_u64().unwrap() > 0);
    let o = hexeq(&["check", "cah", "--family", "C1", "--flags", "1", "--cbar-family", "C1", "--cbar-flags", "1", "--unchecked", "--trials", "2"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["check", "cah", "--family", "A9"][..],
        &["check", "cah", "--family", "C1", "--flags", "1", "--cbar-family", "C1", "--cbar-flags", "1"],
        &["check", "polytope", "--shape", "cube", "--combo", "C1_0"],
        &["check", "polytope", "--shape", "aprism", "--combo", "C1_0"],
        &["check", "polytope", "--shape", "cahp1", "--combo", "nope"],
        &["evolve", "--family", "A2", "--flags", "1,0", "--ivp", "staircase", "--rows", "4", "--cols", "6"],
        &["check", "legs"],
    ] {
        let o = hexeq(args, d.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn evolve_writes_lattice_and_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["evolve", "--family", "A2", "--flags", "1,0", "--ivp", "corner", "--rows", "4", "--cols", "4", "--seed", "3", "--out", "lat.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let lat = read_json(&d.path().join("lat.json"));
    assert_eq!(lat["rows"], 4);
    for f in lat["faces"].as_array().unwrap() {
        assert!(f["residual_zero"].as_array().unwrap().iter().all(|b| b == true));
    }
    let csv = std::fs::read_to_string(d.path().join("lat.csv")).unwrap();
    assert!(csv.starts_with("row,col,value\n"));
    assert_eq!(csv.lines().count() - 1, lat["vertices"].as_array().unwrap().len());
    assert_eq!(read_json(&d.path().join("lat.report.json"))["summary"]["failed"], 0);
}

#[test]
fn list_runs() {
    let d = tempfile::tempdir().unwrap();
    let o = hexeq(&["list"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    for w in ["C3(1/2;1/2;0)", "ca66d", "staircase", "A2_1_1"] {
        assert!(s.contains(w), "{w}");
    }
}
