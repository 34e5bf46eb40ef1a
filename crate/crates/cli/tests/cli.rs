use std::fs;
use std::process::Command;

use deepinit::data::load_mnist;
use deepinit::experiment::CSV_HEADER;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deepinit"))
}

#[test]
fn run_with_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "algorithms = wf,rk\nrates = 1\nimages = 3\nseed = 5\nrk-k-max = 2000\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let dumps = dir.path().join("dumps");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--images", "2", "--rates", "0.5,2", "--out-csv"])
        .arg(&csv)
        .arg("--dump-dir")
        .arg(&dumps)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    assert!(!text.contains('\r'));
    let sidecar = fs::read_to_string(dir.path().join("out.csv.config")).unwrap();
    assert!(sidecar.contains("images = 2"));
    assert!(sidecar.contains("seed = 5"));
    assert!(sidecar.contains("rk-k-max = 2000"));
    assert!(sidecar.contains("wf-k-max = 50"));
    let pgm = fs::read_dir(&dumps).unwrap().count();
    assert_eq!(pgm, 2 + 2 * 2 * 2);
}

#[test]
fn generative_algorithm_without_weights_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--algorithm", "deepinit", "--out-csv"])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--weights"));
}

#[test]
fn rank_subcommand() {
    let out = bin()
        .args(["rank", "--side", "14", "--distances", "0.001,0.02"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "distance_m,rank,pixels\n0.001,196,196\n0.02,83,196\n");
}

#[test]
fn synthesized_phantoms_load_as_idx() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phantoms.idx");
    let status = bin()
        .args(["synth-phantoms", "--count", "12", "--seed", "3", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let ds = load_mnist(&path, None).unwrap();
    assert_eq!((ds.len(), ds.width, ds.height), (12, 28, 28));
}

#[test]
fn sweep_and_compare_init() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.csv");
    let status = bin()
        .args([
            "sweep", "--set", "phantom-side=10", "--algorithm", "twf", "--rates", "2", "--images",
            "1", "--standoffs", "0.00125,0.08", "--out-csv",
        ])
        .arg(&sweep)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&sweep).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().contains(",0.00125,"));

    let cmp = dir.path().join("cmp.csv");
    let status = bin()
        .args([
            "compare-init", "--weights", "synthetic", "--rates", "1", "--images", "2", "--k-max",
            "500", "--i-max", "20", "--out-csv",
        ])
        .arg(&cmp)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&cmp).unwrap();
    let algs: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(algs, ["spectral+rk", "drgd+rk", "spectral+rk", "drgd+rk"]);
}
