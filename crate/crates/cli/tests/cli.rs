use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name);
    p.to_string_lossy().into_owned()
}

fn knitc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knitc"))
        .args(args)
        .output()
        .expect("knitc runs")
}

fn glove(cmd: &str, extra: &[&str]) -> Output {
    let mut v = vec![cmd.to_string(), fixture("glove.skel")];
    for p in ["glove_cuff.pat", "glove_lace.pat", "glove_cable.pat"] {
        v.push("-p".into());
        v.push(fixture(p));
    }
    v.extend(extra.iter().map(|s| s.to_string()));
    let args: Vec<&str> = v.iter().map(String::as_str).collect();
    knitc(&args)
}

#[test]
fn compile_writes_code_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = glove("compile", &["-o", &out]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let code = std::fs::read_to_string(dir.path().join("glove.k")).unwrap();
    assert!(code.starts_with(";!knitout-2\n"));
    knitskel::machine::replay_validate(&code, 4).unwrap();
    let diags: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap(),
    )
    .unwrap();
    assert!(diags.is_array());
}

#[test]
fn identical_runs_write_identical_files() {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_string_lossy().into_owned();
        assert_eq!(glove("compile", &["-o", &out]).status.code(), Some(0));
        assert_eq!(glove("render", &["-o", &out]).status.code(), Some(0));
        let mut names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        names.sort();
        let files: Vec<(String, Vec<u8>)> = names
            .iter()
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(p).unwrap(),
                )
            })
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 6);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn stats_reports_glove_counts() {
    let o = glove("stats", &["--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["nodes"], 10);
    assert_eq!(v["patterns"], 3);
    assert_eq!(v["stitches"], 5030);
    let stages: Vec<&String> = v["timings_ms"].as_object().unwrap().keys().collect();
    assert!(stages.iter().any(|s| *s == "Create") && stages.iter().any(|s| *s == "Generate"));
}

#[test]
fn strict_turns_warnings_into_failure() {
    let broken = fixture("diag/broken.skel");
    let o = knitc(&["check", &broken]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("WidthMismatch"));
    assert_eq!(
        knitc(&["check", &broken, "--strict"]).status.code(),
        Some(1)
    );
}

#[test]
fn errors_and_usage_have_their_own_codes() {
    assert_eq!(knitc(&["compile"]).status.code(), Some(3));
    assert_eq!(knitc(&["frobnicate", "x"]).status.code(), Some(3));
    assert_eq!(
        knitc(&["check", &fixture("flat.skel"), "-D", "Width"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        knitc(&["check", &fixture("nope.skel")]).status.code(),
        Some(3)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.skel");
    std::fs::write(&bad, r#"{"version":1,"start":"s.bottom","nodes":[]}"#).unwrap();
    let o = knitc(&["check", &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overrides_change_the_garment() {
    let tube = fixture("tube.skel");
    let o = knitc(&["stats", &tube, "--json", "-D", "Width=20"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let wide = v["stitches"].as_u64().unwrap();
    let o = knitc(&["stats", &tube, "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(wide > v["stitches"].as_u64().unwrap());
}

#[test]
fn simulate_writes_preview_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = knitc(&[
        "simulate",
        &fixture("flat.skel"),
        "--iterations",
        "50",
        "-o",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("flat.csv")).unwrap();
    assert!(csv.starts_with("stitch_id,x,y\n"));
    assert_eq!(csv.lines().count(), 1 + 320);
}

#[test]
fn render_options_pick_one_picture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = knitc(&[
        "render",
        &fixture("tube.skel"),
        "--face",
        "back",
        "--compact",
        "-o",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("tube.svg")).unwrap();
    assert!(svg.contains("compact view"));
    assert!(svg.contains(">back</text>") && !svg.contains(">front</text>"));
}
