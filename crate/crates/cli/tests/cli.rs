use std::path::Path;
use std::process::{Command, Output};

fn gsc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn diagonal_cross_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cross.toml"), "dimension = 2\nlength_scale = 3\ncells = [[0,0],[1,1],[2,2],[0,2],[2,0]]\n").unwrap();
    let out = gsc(dir.path(), &["--spec", "cross.toml", "validate"]);
    assert_eq!(out.status.code(), Some(2));
    let json = std::fs::read_to_string(dir.path().join("out/validation.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["failures"], serde_json::json!(["GSC3", "GSC4"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("GSC3") && text.contains("GSC4"));
}

#[test]
fn menger_resistance_ratio_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsc(dir.path(), &["--preset", "menger-sponge", "resistance", "--n-max", "3"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/resistance.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let rho: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((0.45..=0.75).contains(&rho), "{rho}");
    assert!(dir.path().join("out/manifest.json").exists());
}

#[test]
fn wall_runs_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[carpet]\npreset = \"sierpinski_carpet\"\n[solver]\npad = 1\n[mcmc]\nchains = 2\nn_burnin = 20\nn_steps = 50\nseed = 5\n",
    )
    .unwrap();
    for o in ["a", "b"] {
        let out = gsc(dir.path(), &["--config", "run.toml", "--deterministic", "--out", o, "wall", "--level", "1"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["wall_stats.json", "wall_trace.csv", "manifest.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        if f == "manifest.json" {
            // only the output directory differs
            let a = String::from_utf8(a).unwrap().replace("a/", "X/").replace("\"a\"", "\"X\"");
            let b = String::from_utf8(b).unwrap().replace("b/", "X/").replace("\"b\"", "\"X\"");
            assert_eq!(a, b);
        } else {
            assert_eq!(a, b, "{f}");
        }
    }
}

#[test]
fn bad_config_lists_every_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[carpet]\ndimension = 2\nlength_scale = 3\ncells = [[0,0],[0,3],[0,0]]\n[solver]\npad = 0\n",
    )
    .unwrap();
    let out = gsc(dir.path(), &["--config", "bad.toml", "validate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("carpet.cells[1][1]") && err.contains("duplicate") && err.contains("solver.pad"), "{err}");
}

#[test]
fn resource_cap_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gsc"))
        .current_dir(dir.path())
        .env("GSC_MAX_VERTICES", "100")
        .args(["--preset", "menger-sponge", "build", "--level", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn build_and_sample_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsc(dir.path(), &["--preset", "sierpinski-carpet", "build", "--level", "1", "--kind", "inner"]);
    assert!(out.status.success());
    let edges = std::fs::read_to_string(dir.path().join("out/edges.txt")).unwrap();
    assert_eq!(edges.lines().count(), 8);
    let out = gsc(dir.path(), &["--preset", "sierpinski-carpet", "--seed", "3", "sample", "--level", "1", "--count", "4"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 3 + 16);
}
