use std::path::Path;
use std::process::{Command, Output};

use topoflip::io::{FrameSequence, HomotopyGrid, LiftDocument};
use topoflip::lifting::classify;
use topoflip::tricks::{catalog, catalog_flips};
use topoflip::Flip;

fn topoflip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoflip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn classify_matches_library_for_catalog() {
    for (name, expr) in catalog() {
        let expected = classify(&Flip::from_expr(expr.clone()).unwrap()).unwrap();
        for arg in [name.to_string(), expr.to_string()] {
            let out = topoflip(&["classify", &arg]);
            assert_eq!(code(&out), 0, "{arg}");
            assert_eq!(stdout(&out).trim(), expected.to_string(), "{arg}");
        }
    }
}

#[test]
fn classify_output_format() {
    let out = topoflip(&["classify", "S * K"]);
    assert_eq!(stdout(&out).trim(), "3 (540-class)");
    let out = topoflip(&["classify", "S^2 * K"]);
    assert_eq!(stdout(&out).trim(), "0 (ollie-class)");
}

#[test]
fn tricks_list_has_every_entry() {
    let out = topoflip(&["tricks", "list"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 14);
    assert!(text.contains("hardflip") && text.contains("1 (180-class)"));
}

#[test]
fn eval_prints_matrix() {
    let out = topoflip(&["eval", "S", "--t", "1"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<_> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("-1.0"));
}

#[test]
fn exit_codes() {
    // syntax error: usage, grammar printed
    let out = topoflip(&["classify", "K@1.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("RATIONAL"));
    // unknown subcommand
    assert_eq!(code(&topoflip(&["juggle"])), 2);
    // domain errors
    assert_eq!(code(&topoflip(&["eval", "S", "--t", "1.5"])), 1);
    assert_eq!(code(&topoflip(&["classify", "S # K"])), 1);
    assert_eq!(code(&topoflip(&["stabilize", "--a", "1"])), 1);
    // bad grid
    assert_eq!(code(&topoflip(&["homotopy", "kick-s2", "--grid", "1x5"])), 2);
    assert_eq!(code(&topoflip(&["homotopy", "nope"])), 2);
}

fn write_and_verify(dir: &Path, file: &str, args: &[&str]) -> HomotopyGrid {
    let path = dir.join(file);
    let path = path.to_str().unwrap();
    let mut full = args.to_vec();
    full.extend(["--out", path]);
    assert_eq!(code(&topoflip(&full)), 0);
    let out = topoflip(&["verify", path]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).trim_end().ends_with("PASS"));
    HomotopyGrid::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn homotopy_files_verify() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["contract-k2", "kick-heel", "kick-s2", "varial-s3", "spread-s2-s"] {
        let grid = write_and_verify(dir.path(), &format!("{name}.json"), &["homotopy", name, "--grid", "31x41"]);
        assert_eq!(grid.s_grid.len(), 31);
        assert_eq!(grid.t_grid.len(), 41);
        assert_eq!(grid.quat.len(), 31 * 41);
    }
    let grid = write_and_verify(dir.path(), "st.json", &["stabilize", "--a", "0.4", "--omega", "3", "--grid", "41x41"]);
    assert!(grid.params.is_some());
}

#[test]
fn tampered_file_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&topoflip(&["homotopy", "kick-s2", "--grid", "11x11", "--out", p])), 0);
    let mut grid = HomotopyGrid::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    grid.quat[60] = [0.0, 1.0, 0.0, 0.0];
    std::fs::write(&path, grid.to_json().unwrap()).unwrap();
    let out = topoflip(&["verify", p]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
    // missing file is a usage error
    assert_eq!(code(&topoflip(&["verify", "/nonexistent/h.json"])), 2);
}

#[test]
fn frame_and_lift_exports_round_trip() {
    for f in catalog_flips() {
        let out = topoflip(&["frames", f.name(), "--n", "25"]);
        assert_eq!(code(&out), 0);
        let seq = FrameSequence::from_json(&stdout(&out)).unwrap();
        assert_eq!(seq.class, classify(&f).unwrap().residue());
        for (t, r) in seq.rotations().unwrap() {
            assert!(r.max_abs_diff(&f.at(t)) <= 1e-12);
        }
    }
    let out = topoflip(&["frames", "K", "--n", "5", "--format", "csv"]);
    let rows = FrameSequence::samples_from_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 5);

    let out = topoflip(&["lift", "varial-kickflip", "--n", "64"]);
    let doc = LiftDocument::from_json(&stdout(&out)).unwrap();
    assert_eq!(doc.class, 3);
    assert_eq!(doc.samples.len(), doc.points.len());
}

#[test]
fn projection_export() {
    let out = topoflip(&["project", "S", "--n", "9"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 9);
    // the lift of U ends at i, which has no image on the sphere
    let out = topoflip(&["project", "U", "--n", "9"]);
    assert_eq!(code(&out), 1);
}
