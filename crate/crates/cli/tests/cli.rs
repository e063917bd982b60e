use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn evac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evac"))
        .args(args)
        .output()
        .expect("spawn evac")
}

const SMALL: &str = "evac-scenario 1
name = small
width_m = 4.8
height_m = 4.8
population = 20
seed = 3
replications = 4

[exit]
id = 1
side = north
offset = 4
width = 2

[exit]
id = 2
side = south
offset = 4
width = 2

[group]
count = 10
behavior = NE

[group]
count = 10
behavior = BPE
";

fn write_small(dir: &Path) -> String {
    let path = dir.join("small.evac");
    fs::write(&path, SMALL).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_good_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_small(dir.path());
    let out = evac(&["validate", &path]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: small"));
}

#[test]
fn validate_rejects_bad_dimensions_with_exit_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.evac");
    fs::write(&path, SMALL.replace("width_m = 4.8", "width_m = 4.9")).unwrap();
    let out = evac(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not divisible by cell size"));
}

#[test]
fn validate_reports_syntax_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.evac");
    fs::write(
        &path,
        SMALL.replacen("behavior = NE", "behavior = NEAREST", 1),
    )
    .unwrap();
    let out = evac(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 23"));
}

#[test]
fn missing_file_is_a_validation_failure() {
    let out = evac(&["validate", "/nonexistent/scenario.evac"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_small(dir.path());
    let target = dir.path().join("missing").join("out.csv");
    let out = evac(&[
        "replicate",
        &path,
        "-n",
        "2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replicate_csv_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_small(dir.path());
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for target in [&a, &b] {
        let out = evac(&[
            "replicate",
            &path,
            "-n",
            "6",
            "--master-seed",
            "11",
            "--out",
            target.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("case,replications,tet_lower,tet_mean,tet_upper,tet_sd"));
    assert!(text.lines().nth(1).unwrap().starts_with("small,6,"));
}

#[test]
fn replicate_table_has_mixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_small(dir.path());
    let out = evac(&["replicate", &path, "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# E1"));
    assert!(text.contains("NE"));
    assert!(text.contains("BPE"));
}

#[test]
fn run_writes_identical_frames() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_small(dir.path());
    let f1 = dir.path().join("f1");
    let f2 = dir.path().join("f2");
    for f in [&f1, &f2] {
        let out = evac(&[
            "run",
            &path,
            "--seed",
            "5",
            "--frames",
            f.to_str().unwrap(),
            "--frame-every",
            "2",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let first = fs::read(f1.join("frame_00000.txt")).unwrap();
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 12);
    let mut names: Vec<_> = fs::read_dir(&f1)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 1);
    for n in names {
        assert_eq!(
            fs::read(f1.join(&n)).unwrap(),
            fs::read(f2.join(&n)).unwrap()
        );
    }
}

#[test]
fn run_writes_graymap_frames() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_small(dir.path());
    let f = dir.path().join("f");
    let out = evac(&[
        "run",
        &path,
        "--frames",
        f.to_str().unwrap(),
        "--frame-format",
        "pgm",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = fs::read(f.join("frame_00000.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n12 12\n255\n"));
}

#[test]
fn preset_output_validates() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["caseA", "caseG"] {
        let out = evac(&["preset", name]);
        assert_eq!(out.status.code(), Some(0));
        let path = dir.path().join(format!("{name}.evac"));
        fs::write(&path, &out.stdout).unwrap();
        let v = evac(&["validate", path.to_str().unwrap()]);
        assert_eq!(
            v.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&v.stderr)
        );
    }
}

#[test]
fn unknown_preset_fails() {
    let out = evac(&["preset", "caseZ"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn documented_example_validates() {
    let doc = include_str!("../../../docs/scenario-format.md");
    let example = doc
        .split("## Example")
        .nth(1)
        .and_then(|s| s.split("```").nth(1))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example.evac");
    fs::write(&path, example).unwrap();
    let out = evac(&["run", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed 42"));
}
