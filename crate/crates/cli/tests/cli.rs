use std::path::PathBuf;
use std::process::{Command, Output};

fn mgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgs")).args(args).output().expect("mgs runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mgs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn chi_of_trivial_twist() {
    let o = mgs(&["chi", "--model", "p1p2", "--sheaf", "O", "--L", "O(1,1)", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "40");
    let o = mgs(&["chi", "--model", "p1p1", "--L", "O(1,0)"]);
    assert_eq!(stdout(&o).trim(), "k + 1");
}

#[test]
fn validate_model_file() {
    let o = mgs(&["validate", &data("p1p2.model")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "model valid");
}

#[test]
fn data_model_matches_builtin() {
    let text = std::fs::read_to_string(data("p1p2.model")).unwrap();
    assert_eq!(multigieseker::io::parse_model(&text).unwrap(), multigieseker::chow::p1p2());
}

#[test]
fn broken_model_is_a_check_failure() {
    let path = scratch("bad.model");
    std::fs::write(
        &path,
        r#"{"name": "bad", "basis": [["1"], ["h"], ["pt"]],
            "products": [{"left": "h", "right": "h", "result": {"pt": "1"}}],
            "todd": {"1": "1"}, "point_integral": "2"}"#,
    )
    .unwrap();
    let o = mgs(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("expected 1"));
}

#[test]
fn malformed_input_exits_2_with_position() {
    let path = scratch("broken.prob");
    std::fs::write(&path, "{\n  \"model\": \"p1p2\",\n  \"sheaves\": 3\n}").unwrap();
    let o = mgs(&["walls", "--problem", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = mgs(&["chi", "--model", "nope", "--L", "O(1,1)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn worked_walls_and_chambers() {
    let o = mgs(&["chambers", "--problem", &data("worked.prob")]);
    let out = stdout(&o);
    assert!(out.contains("wall t=1/2 [F[1] F[2]] properly_semistable"));
    assert!(out.contains("chamber (0, 1/2) at t=1/4: stable"));
    assert!(out.contains("chamber (1/2, 1) at t=3/4: unstable"));
    let o = mgs(&["segment", "eta", "--problem", &data("worked.prob")]);
    assert!(stdout(&o).contains("a = 2, exponents [[3, 1], [1, 3]]"));
    let o = mgs(&["segment", "zeta", "--problem", &data("worked.prob")]);
    let out = stdout(&o);
    assert!(out.contains("lambda = 6, b = 1, lambda_min = 5"));
    assert!(out.contains("F: <<0 || 0 || 1/3*r - 1/6>>"));
}

#[test]
fn verify_exit_codes() {
    let worked = data("worked.prob");
    let o = mgs(&["verify", "uniform", "--problem", &worked]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("k^2-coefficient"));
    let o = mgs(&["verify", "uniform", "--mode", "strict", "--level", "zeta", "--problem", &worked]);
    assert_eq!(o.status.code(), Some(0));
    let o = mgs(&["verify", "open", "--level", "eta", "--problem", &worked]);
    assert_eq!(o.status.code(), Some(0));
    let o = mgs(&["verify", "equiv", "--problem", &worked, "--at", "1/4", "--with", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = mgs(&["verify", "equiv", "--problem", &worked, "--at", "1/4", "--with", "3/4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn schedules() {
    let o = mgs(&["schedule", "--level", "zeta", "--problem", &data("worked.prob")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("anchors: [1/4, 1/2, 3/4]"));
    assert!(stdout(&o).contains("intermediates: [3/8, 5/8]"));
    let o = mgs(&["schedule", "--level", "surface", "--problem", &data("surface.prob")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("anchors: [1/4, 1/2, 3/4]"));
}

#[test]
fn plan_and_replan_round_trip() {
    let out = scratch("plan.json");
    let o = mgs(&["plan", "--problem", &data("worked.prob"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("plan complete"));
    let o = mgs(&["replan", out.to_str().unwrap(), "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ledger identical"));
    assert!(stdout(&o).contains("document identical"));

    let doc = std::fs::read_to_string(&out).unwrap();
    let tampered = scratch("tampered.json");
    std::fs::write(&tampered, doc.replacen("\"a\": 2", "\"a\": 4", 1)).unwrap();
    let o = mgs(&["replan", tampered.to_str().unwrap(), "--verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("ledger differs"));
}

#[test]
fn plan_is_deterministic() {
    let (a, b) = (scratch("p1.json"), scratch("p2.json"));
    mgs(&["plan", "--problem", &data("worked.prob"), "--out", a.to_str().unwrap()]);
    mgs(&["plan", "--problem", &data("worked.prob"), "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn surface_plan() {
    let o = mgs(&["surface-plan", "--problem", &data("surface.prob")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("[PASS] surface: uniform difference"));
    assert!(out.contains("root schedule: [1/4, 1/2, 3/4], 1 flips"));
}

#[test]
fn plot_files_are_exact() {
    let (csv, svg) = (scratch("seg.csv"), scratch("seg.svg"));
    let o = mgs(&[
        "plot",
        "--problem",
        &data("worked.prob"),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "--steps",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,F[1],F[2],F[3],verdict,wall");
    assert_eq!(rows[1], "0,-1/3,-1/6,0,stable,0");
    assert_eq!(rows[2], "1/3,-1/9,-1/18,0,stable,0");
    assert_eq!(rows[3], "0.5,0,0,0,properly_semistable,1");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}
