use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn imblab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imblab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("IMBLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MINIMAL: &str = r#"
schema_version = 1
name = "minimal"

[dataset]
kind = "simple_imbalanced"
weights = [0.75, 0.25]

[model]
bias = false

[[optimizer]]
family = "sign"
alpha = 0.05

[train]
steps = 10
checkpoints = { kind = "every", every = 2 }
"#;

fn csvs(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for entry in walk(dir) {
        if entry.ends_with(".csv") {
            out.push(entry);
        }
    }
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(String::from).collect());
    }
    rows
}

#[test]
fn minimal_run_writes_three_csvs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("min.toml"), MINIMAL).unwrap();
    let o = imblab(&["run", "min.toml", "--out", "res"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let res = tmp.path().join("res");
    assert_eq!(
        csvs(&res),
        [
            "sign/blockstats.csv",
            "sign/correlation.csv",
            "sign/mean_p.csv",
            "sign/trajectory.csv"
        ]
    );
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(res.join("MANIFEST.json")).unwrap()).unwrap();
    let files = manifest["files"].as_object().unwrap();
    let mut on_disk = walk(&res);
    on_disk.retain(|f| f != "MANIFEST.json");
    on_disk.sort();
    assert_eq!(files.keys().cloned().collect::<Vec<_>>(), on_disk);

    let traj = read_csv(&res.join("sign/trajectory.csv"));
    assert_eq!(traj[0], ["step", "loss", "group_0", "group_1", "alpha", "diverged"]);
    assert_eq!(traj.len(), 1 + 6);
    assert_eq!(traj[1][1].parse::<f64>().unwrap(), std::f64::consts::LN_2);
    // sign descent moves each coordinate by alpha: loss ln(1 + e^{-2·alpha·t})
    let last: f64 = traj[6][1].parse().unwrap();
    assert!((last - (-1.0f64).exp().ln_1p()).abs() < 1e-12, "{last}");
    let stats = read_csv(&res.join("sign/blockstats.csv"));
    assert_eq!(stats[0], ["step", "class", "freq", "grad_norm", "hess_trace", "mean_p"]);
    assert_eq!(stats.len(), 1 + 6 * 2);
    let corr = read_csv(&res.join("sign/correlation.csv"));
    assert_eq!(corr[0], ["step", "pearson_log", "n_classes_used", "subset_rule"]);
}

#[test]
fn rerun_reproduces_hashes_and_resolved_config_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("min.toml"), MINIMAL).unwrap();
    assert!(imblab(&["run", "min.toml", "--out", "a"], tmp.path()).status.success());
    assert!(imblab(&["run", "min.toml", "--out", "b"], tmp.path()).status.success());
    let o = imblab(&["run", "a/config.resolved.json", "--out", "c"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(tmp.path().join("a/MANIFEST.json")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b/MANIFEST.json")).unwrap());
    assert_eq!(a, fs::read(tmp.path().join("c/MANIFEST.json")).unwrap());
}

#[test]
fn bad_field_exits_2_naming_it() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), MINIMAL.replace("steps = 10", "stepz = 10")).unwrap();
    let o = imblab(&["run", "bad.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("train.stepz"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());

    fs::write(
        tmp.path().join("neg.toml"),
        MINIMAL.replace("alpha = 0.05", "alpha = -1.0"),
    )
    .unwrap();
    let o = imblab(&["run", "neg.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("optimizer[0].alpha"), "{}", stderr(&o));

    let o = imblab(&["run", "missing.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = imblab(&["replicate", "fig99"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = imblab(&["frobnicate"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("min.toml"), MINIMAL).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_imblab"))
        .args(["run", "min.toml"])
        .current_dir(tmp.path())
        .env("IMBLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("IMBLAB_THREADS"));
}

#[test]
fn divergence_is_a_result() {
    let tmp = tempfile::tempdir().unwrap();
    // basis-vector inputs never overshoot, so use overlapping random inputs
    let cfg = MINIMAL
        .replace(
            "kind = \"simple_imbalanced\"\nweights = [0.75, 0.25]",
            "kind = \"heavy_tailed\"\nm = 3\nseed = 0\ndistribution = { kind = \"uniform01\" }",
        )
        .replace("bias = false", "bias = true")
        .replace(
            "family = \"sign\"\nalpha = 0.05",
            "family = \"gd\"\nalpha = 1e307\nbeta = 0.9",
        )
        .replace("steps = 10", "steps = 40");
    fs::write(tmp.path().join("div.toml"), cfg).unwrap();
    let o = imblab(&["run", "div.toml", "--out", "d"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let traj = read_csv(&tmp.path().join("d/gd/trajectory.csv"));
    assert!(traj[1..].iter().all(|r| r.last().unwrap() == "true"));
    assert_eq!(traj.last().unwrap()[1], "inf");
}

const GRID: &str = r#"
schema_version = 1
name = "grid"

[dataset]
kind = "heavy_tailed"
m = 3
seed = 1
distribution = { kind = "uniform01" }

[[optimizer]]
family = "gd"

[[optimizer]]
family = "adam"
batch = { kind = "minibatch", size = 5 }

[grid]
exponents = [-3, -2, -1, 0]
seeds = [0, 1]

[train]
steps = 30
checkpoints = { kind = "log", per_decade = 3 }
seed = 1

[analysis]
groups = 3
heatmap = { classes = 3, dims = 2, seed = 4 }
"#;

#[test]
fn grid_output_does_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("grid.toml"), GRID).unwrap();
    let mut manifests = Vec::new();
    for (threads, out) in [("1", "one"), ("3", "three")] {
        let o = Command::new(env!("CARGO_BIN_EXE_imblab"))
            .args(["run", "grid.toml", "--out", out])
            .current_dir(tmp.path())
            .env("IMBLAB_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        manifests.push(fs::read(tmp.path().join(out).join("MANIFEST.json")).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
    let grid = read_csv(&tmp.path().join("one/gd/grid.csv"));
    assert_eq!(grid[0], ["alpha", "seed", "final_loss", "unstable"]);
    // 4 coarse step sizes plus up to 2 refinements, 2 seeds each
    assert!(grid.len() > 8 && (grid.len() - 1) % 2 == 0);
    let heat = read_csv(&tmp.path().join("one/adam/heatmap.csv"));
    assert_eq!(heat.len() - 1, 36);
}

#[test]
fn theory_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], out: &str| {
        let mut args = vec!["theory", "--c", "100", "--pi", "0.001", "--out", out];
        args.extend_from_slice(extra);
        let o = imblab(&args, tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        read_csv(&tmp.path().join(out))
    };
    let rows = run(&["--t-max", "1e5", "--rows", "41"], "t.csv");
    assert_eq!(
        rows[0],
        ["c", "pi", "t", "a", "b", "loss_gflow", "loss_sign", "a_rk4", "abs_err"]
    );
    assert_eq!(rows.len(), 42);
    for col in [5, 6] {
        let v: Vec<f64> = rows[1..].iter().map(|r| r[col].parse().unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "column {col} not monotone");
    }
    let single = run(&["--t-max", "0"], "zero.csv");
    assert_eq!(single.len(), 2);
    assert_eq!(single[1][8], "0");

    let err = |dt: &str, out: &str| -> f64 {
        let rows = run(&["--t-max", "2e4", "--dt", dt, "--rows", "5"], out);
        rows[1..]
            .iter()
            .map(|r| r[8].parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    let ratio = err("2", "coarse.csv") / err("1", "fine.csv");
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");

    let o = imblab(
        &["theory", "--c", "1", "--pi", "0.5", "--t-max", "1", "--out", "x.csv"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = imblab(
        &[
            "theory", "--c", "10", "--pi", "0.5", "--t-max", "1", "--dt", "0", "--out", "x.csv",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replicate_quadratic_and_theory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = imblab(&["replicate", "quadratic", "--out", "q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&tmp.path().join("q/quadratic.csv"));
    assert_eq!(rows[0], ["step", "class", "pi", "gd_closed", "gd_sim", "sign_sim"]);
    for r in &rows[1..] {
        let (a, b): (f64, f64) = (r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300), "{r:?}");
    }
    let o = imblab(&["replicate", "theory", "--out", "t"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("t/theory.csv").exists());
}

#[test]
fn dataset_gen_writes_loadable_directory() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("spec.toml"),
        "kind = \"heavy_tailed\"\nm = 4\nseed = 2\ndistribution = { kind = \"gaussian\", mean = 0.0 }\n",
    )
    .unwrap();
    let o = imblab(&["dataset", "gen", "spec.toml", "--out", "ds"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let ds = imblab::io::read_dataset(&tmp.path().join("ds")).unwrap();
    assert_eq!((ds.num_samples(), ds.num_classes(), ds.input_dim()), (64, 15, 80));
    assert_eq!(fs::metadata(tmp.path().join("ds/labels.u32")).unwrap().len(), 64 * 4);

    // the saved directory feeds a run
    let cfg = MINIMAL.replace(
        "kind = \"simple_imbalanced\"\nweights = [0.75, 0.25]",
        "kind = \"files\"\npath = \"ds\"",
    );
    fs::write(tmp.path().join("files.toml"), cfg).unwrap();
    let o = imblab(&["run", "files.toml", "--out", "f"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("f/dataset/inputs.f64").exists());

    fs::write(
        tmp.path().join("bad.toml"),
        "kind = \"heavy_tailed\"\nm = 1\nseed = 0\ndistribution = { kind = \"uniform01\" }\n",
    )
    .unwrap();
    let o = imblab(&["dataset", "gen", "bad.toml", "--out", "nope"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}
