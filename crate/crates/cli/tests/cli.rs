use std::path::Path;
use std::process::{Command, Output};

fn vogp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vogp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        format!(
            "problem = \"GP\"\nseeds = [0, 1]\nbeta_scale_divisor = 1.0\ndataset_size = 30\nlengthscales = [0.3, 0.3]\noutdir = \"out\"\n{extra}"
        ),
    )
    .unwrap();
    path
}

#[test]
fn cones_list_prints_every_builtin() {
    let out = vogp(&["cones", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["acute", "right", "obtuse"] {
        assert!(text.contains(&format!("{name}:")), "{text}");
    }
    // The right cone in two dimensions is the orthant.
    assert!(text.contains("d_C = 1.414214"), "{text}");
    assert!(text.contains("M = 3"));
}

#[test]
fn run_then_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = vogp(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(agg["n_seeds"], 2);

    let outdir = dir.path().join("out");
    for f in ["seed_0.jsonl", "seed_1.jsonl", "summary.json", "curves.csv"] {
        assert!(outdir.join(f).exists(), "{f}");
    }
    let again = vogp(&["metrics", "--records", outdir.to_str().unwrap()]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    let recomputed: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(recomputed["sample_complexity"], agg["sample_complexity"]);

    let one = vogp(&["metrics", "--records", outdir.join("seed_1.jsonl").to_str().unwrap()]);
    assert!(one.status.success());
    let single: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(single["n_seeds"], 1);
}

#[test]
fn seed_offset_and_outdir_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let outdir = dir.path().join("shifted");
    let out = vogp(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed-offset",
        "5",
        "--outdir",
        outdir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(outdir.join("seed_5.jsonl").exists());
    assert!(outdir.join("seed_6.jsonl").exists());
}

#[test]
fn invalid_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "no_such_key = 3\n");
    let out = vogp(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let missing = vogp(&["metrics", "--records", dir.path().join("nothing").to_str().unwrap()]);
    assert!(!missing.status.success());

    let bad_cone = write_config(dir.path(), "cone = \"theta:200\"\n");
    assert!(!vogp(&["run", "--config", bad_cone.to_str().unwrap()]).status.success());
}
