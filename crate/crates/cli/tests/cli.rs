use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn perfcone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfcone"))
        .args(args)
        .env_remove("PERFCONE_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn check_d4() {
    let out = perfcone(&["check", &data("d4.txt"), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["dim"], "10");
    assert_eq!(v["rays"], "12");
    assert_eq!(v["simplicial"], false);
    assert_eq!(v["basic"], false);
}

#[test]
fn check_e7_dual_and_toy() {
    let v = json(&perfcone(&[
        "check",
        &data("e7dual.txt"),
        "--format",
        "json",
    ]));
    assert_eq!(
        (v["dim"].as_str(), v["rays"].as_str(), v["index"].as_str()),
        (Some("28"), Some("28"), Some("384"))
    );
    assert_eq!(
        (v["simplicial"].as_bool(), v["basic"].as_bool()),
        (Some(true), Some(false))
    );

    let v = json(&perfcone(&["check", &data("toy.txt"), "--format", "json"]));
    assert_eq!(v["dim"], "2");
    assert_eq!(v["index"], "2");
    assert_eq!(v["simplicial"], true);
    assert_eq!(v["basic"], false);
}

#[test]
fn check_table_lists_flags() {
    let out = perfcone(&["check", &data("a3.txt")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("dim         6"), "{text}");
    assert!(text.contains("basic       true"), "{text}");
}

#[test]
fn check_detects_matrix_files() {
    let out = perfcone(&["check", &data("second_voronoi.txt"), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["kind"], "matrices");
    let cones = v["cones"].as_array().unwrap();
    assert_eq!(cones.len(), 2);
    for c in cones {
        assert_eq!(c["dim"], "3");
        assert_eq!(c["generators"], "4");
        assert_eq!(c["simplicial"], false);
    }
    let forced = perfcone(&["check", &data("second_voronoi.txt"), "--kind", "vectors"]);
    assert_eq!(code(&forced), 2);
}

#[test]
fn malformed_input_exits_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.txt", "2 2\n1 0\n0 x\n");
    let out = perfcone(&["check", &bad]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let asym = write_temp(&dir, "asym.txt", "2 2\n1 2\n3 1\n\n1 0\n0 1\n");
    let out = perfcone(&["check", &asym]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("(1, 2)"), "{}", stderr(&out));

    let out = perfcone(&["check", "/no/such/file"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&perfcone(&["frobnicate"])), 2);
    assert_eq!(code(&perfcone(&["classify"])), 2);
    assert_eq!(
        code(&perfcone(&["classify", "--g", "2", "--dims", "3..1"])),
        2
    );
}

#[test]
fn realize_verdicts() {
    let out = perfcone(&["realize", &data("toy.txt")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("not realizable"));

    let out = perfcone(&["realize", &data("d4.txt"), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["realizable"], true);
    assert_eq!(v["witness"][1][1], "2");
    assert_eq!(v["witness"][1][3], "-1");

    let dir = tempfile::tempdir().unwrap();
    let units = write_temp(&dir, "units.txt", "2 2\n1 0\n0 1\n");
    assert_eq!(code(&perfcone(&["realize", &units])), 0);
}

#[test]
fn classify_g2_one_orbit_per_dimension() {
    let out = perfcone(&["classify", "--g", "2", "--dims", "1..3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for d in ["1", "2", "3"] {
        assert_eq!(v["dims"][d]["count"], "1", "dimension {d}");
    }
}

#[test]
fn classify_g4_top_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = perfcone(&[
        "classify",
        "--g",
        "4",
        "--dims",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let orbits = v["dims"]["10"]["orbits"].as_array().unwrap();
    assert_eq!(orbits.len(), 2);
    assert_eq!(
        orbits.iter().filter(|o| o["simplicial"] == false).count(),
        1
    );
}

#[test]
fn classify_g4_small_dims_all_basic() {
    let v = json(&perfcone(&["classify", "--g", "4", "--dims", "1..9"]));
    for (_, d) in v["dims"].as_object().unwrap() {
        for o in d["orbits"].as_array().unwrap() {
            assert_eq!(o["basic"], true);
        }
    }
}

#[test]
fn classify_user_domains() {
    let v = json(&perfcone(&[
        "classify",
        "--g",
        "4",
        "--dims",
        "10",
        "--domains",
        &data("d4.txt"),
    ]));
    assert_eq!(v["dims"]["10"]["count"], "1");
    assert_eq!(code(&perfcone(&["classify", "--g", "5"])), 2);
    assert_eq!(
        code(&perfcone(&["classify", "--g", "3", "--domains", "D4"])),
        2
    );
    assert_eq!(
        code(&perfcone(&["classify", "--g", "3", "--domains", "nope"])),
        2
    );
}

#[test]
fn classify_ignores_thread_count() {
    let a = perfcone(&["--threads", "1", "classify", "--g", "3"]);
    let b = perfcone(&["--threads", "3", "classify", "--g", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_perfcone"))
        .args(["classify", "--g", "3"])
        .env("PERFCONE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn equiv_shear_and_inequivalent() {
    let dir = tempfile::tempdir().unwrap();
    // A2 pairs under (x, y) -> (x + y, y)
    let sheared = write_temp(&dir, "shear.txt", "2 3\n1 0\n1 1\n2 1\n");
    let out = perfcone(&["equiv", &data("a2.txt"), &sheared]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("equivalent"));

    let units = write_temp(&dir, "units.txt", "2 2\n1 0\n0 1\n");
    let out = perfcone(&["equiv", &data("a2.txt"), &units, "--format", "json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["equivalent"], false);
}

#[test]
fn aut_d4_order() {
    let v = json(&perfcone(&["aut", &data("d4.txt"), "--format", "json"]));
    assert_eq!(v["order"], "1152");
    let out = perfcone(&["aut", &data("a2.txt")]);
    assert!(stdout(&out).starts_with("order 12"));
}

#[test]
fn verify_passes_and_reports_json() {
    let out = perfcone(&["verify", "--json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 10);
    assert!(criteria.iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_catches_corrupted_d4() {
    let dir = tempfile::tempdir().unwrap();
    // the A4 Gram matrix in place of D4
    let gram = write_temp(
        &dir,
        "gram.txt",
        "4 1\n2 1 1 1\n1 2 1 1\n1 1 2 1\n1 1 1 2\n",
    );
    let out = perfcone(&["verify", "--d4-gram", &gram]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("1. D4 cone"), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("[FAIL]  1. D4 cone"));
}
