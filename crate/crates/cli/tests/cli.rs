use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use zzt_core::pipeline::SubsetDiagram;
use zzt_core::{
    read_layerstack, EffectiveImage, PersistenceDiagram, PruneReport, RealGrid, ScanRow,
};

fn zzt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zzt"))
        .args(args)
        .current_dir(dir)
        .env_remove("ZZT_CACHE_DIR")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = zzt(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn circle(dir: &Path, name: &str, layers: usize) {
    let spec = format!(r#"{{"kind":"persistent_circle","n_points":12,"n_layers":{layers}}}"#);
    fs::write(dir.join("spec.json"), spec).unwrap();
    ok(dir, &["synth", "spec.json", "--out", name]);
}

#[test]
fn synth_then_validate() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 4);
    let stack = read_layerstack(t.path().join("c")).unwrap();
    assert_eq!(
        (stack.n_layers(), stack.n_points(), stack.dim()),
        (4, 12, 2)
    );
    assert_eq!(
        fs::metadata(t.path().join("c/layer_000.f32"))
            .unwrap()
            .len(),
        12 * 2 * 4
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&ok(t.path(), &["validate", "c"])).unwrap();
    assert_eq!(summary["n_layers"], 4);
}

#[test]
fn validate_truncated_layer() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 3);
    let f = t.path().join("c/layer_001.f32");
    let bytes = fs::read(&f).unwrap();
    fs::write(&f, &bytes[..bytes.len() - 4]).unwrap();
    let out = zzt(t.path(), &["validate", "c"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size mismatch"));
}

#[test]
fn usage_errors_exit_two() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(zzt(t.path(), &[]).status.code(), Some(2));
    assert_eq!(zzt(t.path(), &["compute"]).status.code(), Some(2));
    assert_eq!(zzt(t.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        zzt(t.path(), &["windows", "--layers", "3", "--window", "5"])
            .status
            .code(),
        Some(2)
    );
    circle(t.path(), "c", 3);
    fs::write(t.path().join("bad.json"), r#"{"k_nn": 2, "colour": "red"}"#).unwrap();
    let out = zzt(
        t.path(),
        &["compute", "c", "--config", "bad.json", "--out", "o"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let out = zzt(t.path(), &["compute", "c", "--m", "1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(zzt(t.path(), &["--help"]).status.success());
}

#[test]
fn compute_outputs_round_trip() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 3);
    ok(
        t.path(),
        &[
            "compute", "c", "--k", "2", "--m", "3", "--dims", "0,1", "--out", "out",
        ],
    );
    let subsets: Vec<SubsetDiagram> =
        serde_json::from_str(&fs::read_to_string(t.path().join("out/diagrams.json")).unwrap())
            .unwrap();
    let d = PersistenceDiagram::from_export(&subsets[0].diagram).unwrap();
    assert_eq!(d.intervals(1).len(), 1);
    assert_eq!((d.intervals(1)[0].birth, d.intervals(1)[0].death), (0, 4));
    let images: Vec<EffectiveImage> =
        serde_json::from_str(&fs::read_to_string(t.path().join("out/images.json")).unwrap())
            .unwrap();
    assert_eq!(images.iter().map(|i| i.p).collect::<Vec<_>>(), vec![0, 1]);
    assert_eq!(images[1].get(0, 2), 1);

    let grid: RealGrid = serde_json::from_slice(&ok(
        t.path(),
        &["diff", "out/images.json", "out/images.json"],
    ))
    .unwrap();
    assert!(grid.values.iter().all(|&v| v == 0.0));
}

#[test]
fn config_file_and_flag_override() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 3);
    fs::write(
        t.path().join("cfg.json"),
        r#"{"k_nn": 1, "m": 3, "alphas": [0.0]}"#,
    )
    .unwrap();
    ok(
        t.path(),
        &["descriptors", "c", "--config", "cfg.json", "--out", "d1"],
    );
    let csv = fs::read_to_string(t.path().join("d1/betti_p1.csv")).unwrap();
    assert_eq!(
        csv,
        "layer,value,subset_mean,subset_std\n0,0,,\n1,0,,\n2,0,,\n"
    );
    ok(
        t.path(),
        &[
            "descriptors",
            "c",
            "--config",
            "cfg.json",
            "--k",
            "2",
            "--out",
            "d2",
        ],
    );
    let csv = fs::read_to_string(t.path().join("d2/betti_p1.csv")).unwrap();
    assert_eq!(
        csv,
        "layer,value,subset_mean,subset_std\n0,1,,\n1,1,,\n2,1,,\n"
    );
    assert!(t.path().join("d2/births_p1_alpha0.csv").exists());
    let all: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("d2/descriptors.json")).unwrap())
            .unwrap();
    assert_eq!(all["descriptors"].as_array().unwrap().len(), 1);
}

#[test]
fn prune_constant_zbar_lists_all_layers() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 5);
    let report: PruneReport = serde_json::from_slice(&ok(
        t.path(),
        &["prune", "c", "--k", "2", "--m", "3", "--threshold", "0.9"],
    ))
    .unwrap();
    assert_eq!(report.layers, vec![0, 1, 2, 3, 4]);
    assert_eq!((report.threshold, report.alpha), (0.9, -1.0));
    ok(
        t.path(),
        &[
            "prune", "c", "--k", "2", "--m", "3", "--alpha", "-1", "--out", "p.json",
        ],
    );
    let saved: PruneReport =
        serde_json::from_str(&fs::read_to_string(t.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
    // No loops at all: zbar is identically zero and there is nothing to rank.
    assert_eq!(
        zzt(t.path(), &["prune", "c", "--k", "1", "--m", "3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn scan_k_table() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 3);
    let rows: Vec<ScanRow> = serde_json::from_slice(&ok(
        t.path(),
        &["scan-k", "c", "--k-min", "1", "--k-max", "3", "--m", "3"],
    ))
    .unwrap();
    assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert_eq!(rows[1].counts[1], 1);
    let empty: Vec<ScanRow> = serde_json::from_slice(&ok(
        t.path(),
        &["scan-k", "c", "--k-min", "3", "--k-max", "2"],
    ))
    .unwrap();
    assert!(empty.is_empty());
}

#[test]
fn oracle_check_passes() {
    let t = tempfile::tempdir().unwrap();
    fs::write(
        t.path().join("walk.json"),
        r#"{"kind":"random_walk","n_points":30,"n_layers":4,"dim":3,"noise_scale":0.3}"#,
    )
    .unwrap();
    ok(
        t.path(),
        &["synth", "walk.json", "--seed", "9", "--out", "w"],
    );
    let report: serde_json::Value = serde_json::from_slice(&ok(
        t.path(),
        &[
            "oracle-check",
            "w",
            "--k",
            "3",
            "--m",
            "3",
            "--subset-size",
            "15",
            "--dims",
            "0,1,2",
        ],
    ))
    .unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn seed_flag_controls_synth() {
    let t = tempfile::tempdir().unwrap();
    fs::write(
        t.path().join("s.json"),
        r#"{"kind":"random_walk","n_points":10,"n_layers":2,"seed":1}"#,
    )
    .unwrap();
    ok(t.path(), &["synth", "s.json", "--out", "a"]);
    ok(t.path(), &["synth", "s.json", "--seed", "1", "--out", "b"]);
    ok(t.path(), &["synth", "s.json", "--seed", "2", "--out", "c"]);
    let layer = |d: &str| fs::read(t.path().join(d).join("layer_000.f32")).unwrap();
    assert_eq!(layer("a"), layer("b"));
    assert_ne!(layer("a"), layer("c"));
}

#[test]
fn cache_dir_from_environment() {
    let t = tempfile::tempdir().unwrap();
    circle(t.path(), "c", 3);
    let cache = t.path().join("cache");
    let out = Command::new(env!("CARGO_BIN_EXE_zzt"))
        .args([
            "compute",
            "c",
            "--k",
            "2",
            "--m",
            "3",
            "--out",
            "o",
            "--threads",
            "2",
        ])
        .current_dir(t.path())
        .env("ZZT_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
}
