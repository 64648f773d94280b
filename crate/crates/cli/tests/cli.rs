use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use irisgauge_cli::run;

fn irisgauge(args: &[&str]) -> i32 {
    run(std::iter::once("irisgauge").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Relative path -> bytes for every file under `root`.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn synth_small(out: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--subjects", "1", "--seed", "7", "--frames", "8", "--out", s(out)];
    args.extend_from_slice(extra);
    assert_eq!(irisgauge(&args), 0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(irisgauge(&[]), 2);
    assert_eq!(irisgauge(&["frobnicate"]), 2);
    assert_eq!(irisgauge(&["fit", "--masks", "x", "--out", "y", "--bogus"]), 2);
    assert_eq!(irisgauge(&["rasterize", "--annotations", "a.json", "--size", "12", "--out", "o"]), 2);
    assert_eq!(irisgauge(&["boxstats", "--sessions", "x", "--session", "9"]), 2);
    assert_eq!(irisgauge(&["--help"]), 0);
}

#[test]
fn synth_is_deterministic() {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    synth_small(&a, &["--cohort", "alcohol"]);
    synth_small(&b, &["--cohort", "alcohol"]);
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta.len(), 8 + 2);
    assert!(ta.contains_key(Path::new("alc_001_s0_right/0007.pgm")));
    assert_eq!(ta, tb);
    // a populated output directory is never overwritten
    assert_eq!(irisgauge(&["synth", "--frames", "2", "--out", s(&a)]), 1);
    assert_eq!(tree(&a), ta);
}

#[test]
fn fit_generated_session_writes_one_row_per_frame() {
    let root = tempfile::tempdir().unwrap();
    let masks = root.path().join("masks");
    assert_eq!(
        irisgauge(&["synth", "--subjects", "1", "--cohort", "no_alcohol", "--seed", "3", "--out", s(&masks)]),
        0
    );
    let session = masks.join("ctl_001_s0_right");
    let out = root.path().join("m.csv");
    assert_eq!(irisgauge(&["fit", "--masks", s(&session), "--out", s(&out)]), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("subject_id,session,eye,cohort,frame_idx,t,"));

    // identical inputs give byte-identical outputs
    let again = root.path().join("m2.csv");
    assert_eq!(irisgauge(&["fit", "--masks", s(&masks), "--out", s(&again)]), 0);
    assert_eq!(fs::read(&again).unwrap(), text.as_bytes());
}

#[test]
fn fit_eval_grandmean_boxstats_chain() {
    let root = tempfile::tempdir().unwrap();
    let masks = root.path().join("masks");
    synth_small(&masks, &["--sessions", "0,2"]);
    let fits = root.path().join("fits.csv");
    let recon = root.path().join("recon");
    assert_eq!(irisgauge(&["fit", "--masks", s(&masks), "--out", s(&fits), "--recon", s(&recon)]), 0);
    assert_eq!(fs::read_to_string(&fits).unwrap().lines().count(), 1 + 4 * 8);

    let report = root.path().join("report.csv");
    assert_eq!(
        irisgauge(&[
            "eval", "--pred", s(&recon), "--gt", s(&masks), "--fits", s(&fits), "--truth", s(&masks),
            "--out", s(&report),
        ]),
        0
    );
    let rows: BTreeMap<String, Vec<String>> = fs::read_to_string(&report)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<String> = l.split(',').map(String::from).collect();
            (cols[0].clone(), cols)
        })
        .collect();
    assert_eq!(rows.len(), 10);
    let mean = |k: &str| rows[k][1].parse::<f64>().unwrap();
    assert!(mean("pupil_iou") > 0.85, "{rows:?}");
    assert!(mean("pupil_rx_l1") < 1.1, "{rows:?}");
    assert_eq!(rows["pupil_center_l2"][3], "32");

    // 8-frame sessions cannot be resampled onto the 5 s grid
    let curves = root.path().join("curves.csv");
    assert_eq!(irisgauge(&["grandmean", "--sessions", s(&fits), "--out", s(&curves)]), 1);
    assert!(!curves.exists());

    let stats = root.path().join("box.csv");
    assert_eq!(irisgauge(&["boxstats", "--sessions", s(&fits), "--out", s(&stats)]), 0);
    let text = fs::read_to_string(&stats).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("2,"));
}

#[test]
fn grandmean_over_full_sessions() {
    let root = tempfile::tempdir().unwrap();
    let masks = root.path().join("masks");
    assert_eq!(irisgauge(&["synth", "--subjects", "1", "--seed", "1", "--out", s(&masks)]), 0);
    let curves = root.path().join("curves.csv");
    assert_eq!(
        irisgauge(&["grandmean", "--sessions", s(&masks), "--out", s(&curves), "--quantity", "ratio"]),
        0
    );
    let text = fs::read_to_string(&curves).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert_eq!(text.lines().next().unwrap(), "t,alcohol,no_alcohol,n_alcohol,n_no_alcohol");
    assert!(text.lines().last().unwrap().starts_with("4.9500,"));
}

#[test]
fn eval_identity_scores_one() {
    let root = tempfile::tempdir().unwrap();
    let masks = root.path().join("masks");
    synth_small(&masks, &["--cohort", "alcohol"]);
    let report = root.path().join("r.csv");
    assert_eq!(irisgauge(&["eval", "--pred", s(&masks), "--gt", s(&masks), "--out", s(&report)]), 0);
    let text = fs::read_to_string(&report).unwrap();
    let overall = text.lines().find(|l| l.starts_with("overall_iou")).unwrap();
    let mean: f64 = overall.split(',').nth(1).unwrap().parse().unwrap();
    assert!((mean - 1.0).abs() < 1e-6);
    assert_eq!(irisgauge(&["eval", "--out", s(&report)]), 2);
}

#[test]
fn config_file_and_flag_overrides() {
    let root = tempfile::tempdir().unwrap();
    let masks = root.path().join("masks");
    synth_small(&masks, &["--cohort", "alcohol"]);
    let cfg = root.path().join("loc.cfg");
    fs::write(&cfg, "method=Hough\nhough_center_stride=2\n").unwrap();
    let out = root.path().join("m.csv");
    assert_eq!(irisgauge(&["fit", "--masks", s(&masks), "--config", s(&cfg), "--out", s(&out)]), 0);
    assert!(fs::read_to_string(&out).unwrap().lines().skip(1).all(|l| l.ends_with(",Hough")));
    assert_eq!(
        irisgauge(&["fit", "--masks", s(&masks), "--config", s(&cfg), "--method", "lms", "--out", s(&out)]),
        0
    );
    assert!(fs::read_to_string(&out).unwrap().lines().skip(1).all(|l| l.ends_with(",LMS")));

    fs::write(&cfg, "method=Hough\nshape=round\n").unwrap();
    let bad_out = root.path().join("bad.csv");
    assert_eq!(irisgauge(&["fit", "--masks", s(&masks), "--config", s(&cfg), "--out", s(&bad_out)]), 1);
    assert!(!bad_out.exists());
}

#[test]
fn rasterize_annotations() {
    let root = tempfile::tempdir().unwrap();
    let json = root.path().join("via.json");
    fs::write(
        &json,
        r#"{"a": {"filename": "eye_01.png", "regions": [
            {"shape_attributes": {"name": "polygon", "all_points_x": [10, 20, 20, 10], "all_points_y": [10, 10, 20, 20]},
             "region_attributes": {"class": "pupil", "eye": "left"}}]},
           "b": {"filename": "eye_02.png", "regions": []}}"#,
    )
    .unwrap();
    let out = root.path().join("masks");
    assert_eq!(irisgauge(&["rasterize", "--annotations", s(&json), "--size", "32x32", "--out", s(&out)]), 0);
    let files = tree(&out);
    assert_eq!(files.len(), 2);
    let mask = irisgauge_core::decode_mask(&files[Path::new("eye_01.pgm")]).unwrap();
    assert_eq!(mask.class_plane(irisgauge_core::Label::Pupil).popcount(), 121);

    let right = root.path().join("right");
    assert_eq!(
        irisgauge(&["rasterize", "--annotations", s(&json), "--size", "32x32", "--out", s(&right), "--eye", "right"]),
        0
    );
    let mask = irisgauge_core::decode_mask(&tree(&right)[Path::new("eye_01.pgm")]).unwrap();
    assert_eq!(mask.class_plane(irisgauge_core::Label::Pupil).popcount(), 0);
}

#[test]
fn data_errors_name_the_file_and_leave_no_output() {
    let root = tempfile::tempdir().unwrap();
    let masks = root.path().join("masks");
    synth_small(&masks, &["--cohort", "alcohol"]);
    let bad = masks.join("alc_001_s0_right").join("0003.pgm");
    fs::write(&bad, b"P5\n2 2\n255\n\x00\x07\x00\x00").unwrap();
    let out = root.path().join("m.csv");

    let res = Command::new(env!("CARGO_BIN_EXE_irisgauge"))
        .args(["fit", "--masks", s(&masks), "--out", s(&out)])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("0003.pgm") && stderr.contains("invalid label"), "{stderr}");
    assert!(!out.exists());

    let res = Command::new(env!("CARGO_BIN_EXE_irisgauge"))
        .args(["fit", "--masks", "/nonexistent/masks", "--out", s(&out)])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("/nonexistent/masks"));

    let res = Command::new(env!("CARGO_BIN_EXE_irisgauge"))
        .args(["fit", "--nope"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    // nothing but the inputs and no temporary leftovers
    let names: Vec<_> = fs::read_dir(root.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("masks")]);
}
