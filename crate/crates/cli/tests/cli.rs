//! End-to-end tests of the `rescomp` binary: exit codes, file formats, and
//! the round trips between generate, train, and predict.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rescomp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should launch")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("file should exist")
}

/// Parses a CSV produced by the binary into (names, column-major values).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let names: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (names, rows)
}

struct Dir {
    _guard: tempfile::TempDir,
    path: PathBuf,
}

fn dir() -> Dir {
    let guard = tempfile::tempdir().unwrap();
    let path = guard.path().to_path_buf();
    Dir { _guard: guard, path }
}

#[test]
fn generate_is_deterministic_and_row_counted() {
    let d = dir();
    let a = d.path.join("a.csv");
    let b = d.path.join("b.csv");
    for out in [&a, &b] {
        run_ok(&[
            "generate",
            "--system",
            "mackey-glass",
            "--tau",
            "17",
            "--length",
            "500",
            "--discard",
            "100",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let text = read(&a);
    assert_eq!(text, read(&b), "same flags must give identical bytes");
    let (names, rows) = parse_csv(&text);
    assert_eq!(names, ["x"]);
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|r| r[0].is_finite()));
}

#[test]
fn generate_single_sample_lorenz() {
    let d = dir();
    let out = d.path.join("one.csv");
    run_ok(&[
        "generate",
        "--system",
        "lorenz",
        "--length",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (names, rows) = parse_csv(&read(&out));
    assert_eq!(names, ["x", "y", "z"]);
    assert_eq!(rows.len(), 1);
}

#[test]
fn exit_codes_separate_usage_from_runtime_failures() {
    let d = dir();
    // unknown subcommand and bad enum value are usage errors
    assert_eq!(exit_code(&run(&["frobnicate"])), 1);
    assert_eq!(
        exit_code(&run(&[
            "generate",
            "--system",
            "brusselator",
            "--length",
            "5",
            "--out",
            d.path.join("x.csv").to_str().unwrap(),
        ])),
        1
    );
    // flags that do not fit the chosen mode are usage errors
    let model = d.path.join("none.rcm");
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--mode",
        "generative",
        "--out",
        d.path.join("y.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--steps"));
    // a missing model file is a runtime failure
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--mode",
        "generative",
        "--steps",
        "3",
        "--out",
        d.path.join("y.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    // so is a config that fails validation
    let cfg = d.path.join("bad.cfg");
    std::fs::write(&cfg, "[model]\nreservoir_sz = 10\n").unwrap();
    let out = run(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--sizes",
        "10",
        "--out",
        d.path.join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reservoir_sz"));
}

#[test]
fn mackey_glass_flags_do_not_apply_to_lorenz() {
    let d = dir();
    let out = run(&[
        "generate",
        "--system",
        "lorenz",
        "--tau",
        "17",
        "--length",
        "5",
        "--out",
        d.path.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));
}

fn write_series(d: &Dir, name: &str, length: usize) -> PathBuf {
    let path = d.path.join(name);
    run_ok(&[
        "generate",
        "--system",
        "mackey-glass",
        "--length",
        &length.to_string(),
        "--discard",
        "200",
        "--out",
        path.to_str().unwrap(),
    ]);
    path
}

#[test]
fn trained_model_round_trips_and_stores_the_config_digest() {
    let d = dir();
    let series = write_series(&d, "series.csv", 80);
    let cfg_text = "[model]\nreservoir_size = 15\nseed = 4\n[train]\nlambda = 1e-6\ntrain_len = 60\n";
    let cfg = d.path.join("run.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let model = d.path.join("model.rcm");
    run_ok(&[
        "train",
        "--data",
        series.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);

    let text = read(&model);
    assert!(text.starts_with("RCMODEL 1\n"));

    // save -> load -> save is byte-identical
    let loaded = rescomp_cli::container::load(&text).unwrap();
    assert_eq!(rescomp_cli::container::save(&loaded).unwrap(), text);

    // the stored weights are exactly the ones the seed dictates
    let parsed = rescomp_cli::config::RunConfig::parse(cfg_text).unwrap();
    let rebuilt = rescomp_cli::build::build_model(&parsed, 1, 15, 4).unwrap();
    let stored = loaded.model.layers()[0].input_matrix().values().to_vec();
    let expected = rebuilt.layers()[0].input_matrix().values().to_vec();
    assert_eq!(
        stored.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        expected.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );

    // the digest field equals a direct hash of the canonical config text
    let mut hasher = Sha256::new();
    hasher.update(parsed.canonical_text().as_bytes());
    let expected_digest: String = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    assert!(
        text.contains(&format!("config_digest {expected_digest}")),
        "model file should store the recomputable digest"
    );
}

#[test]
fn interpolating_model_reproduces_its_training_targets() {
    let d = dir();
    let series = write_series(&d, "series.csv", 30);
    let cfg = d.path.join("run.cfg");
    std::fs::write(
        &cfg,
        "[model]\nreservoir_size = 12\nseed = 3\n[train]\nlambda = 0\ntrain_len = 12\n",
    )
    .unwrap();
    let model = d.path.join("model.rcm");
    run_ok(&[
        "train",
        "--data",
        series.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);

    // feed the exact training inputs back through predictive mode
    let full = read(&series);
    let mut lines = full.lines();
    let header = lines.next().unwrap();
    let data_rows: Vec<&str> = lines.collect();
    let inputs = d.path.join("inputs.csv");
    let input_text: String = std::iter::once(header)
        .chain(data_rows[..12].iter().copied())
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&inputs, input_text).unwrap();

    let predictions = d.path.join("pred.csv");
    run_ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--mode",
        "predictive",
        "--data",
        inputs.to_str().unwrap(),
        "--out",
        predictions.to_str().unwrap(),
    ]);

    let (_, predicted) = parse_csv(&read(&predictions));
    assert_eq!(predicted.len(), 12);
    for (t, row) in predicted.iter().enumerate() {
        let target: f64 = data_rows[t + 1].parse().unwrap();
        assert!(
            (row[0] - target).abs() < 1e-6,
            "step {t}: predicted {} against target {target}",
            row[0]
        );
    }
}

#[test]
fn one_generative_step_continues_the_open_loop_run() {
    let d = dir();
    let series = write_series(&d, "series.csv", 100);
    let cfg = d.path.join("run.cfg");
    std::fs::write(
        &cfg,
        "[model]\nreservoir_size = 20\nseed = 6\n[train]\nlambda = 1e-8\ntrain_len = 80\n",
    )
    .unwrap();
    let model = d.path.join("model.rcm");
    run_ok(&[
        "train",
        "--data",
        series.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);

    // open loop over the training inputs
    let full = read(&series);
    let mut lines = full.lines();
    let header = lines.next().unwrap();
    let data_rows: Vec<&str> = lines.collect();
    let inputs = d.path.join("inputs.csv");
    let input_text: String = std::iter::once(header)
        .chain(data_rows[..80].iter().copied())
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&inputs, input_text).unwrap();
    let open = d.path.join("open.csv");
    run_ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--mode",
        "predictive",
        "--data",
        inputs.to_str().unwrap(),
        "--out",
        open.to_str().unwrap(),
    ]);

    // one closed-loop step from the saved training state
    let closed = d.path.join("closed.csv");
    run_ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--mode",
        "generative",
        "--steps",
        "1",
        "--out",
        closed.to_str().unwrap(),
    ]);

    let (_, open_rows) = parse_csv(&read(&open));
    let (_, closed_rows) = parse_csv(&read(&closed));
    assert_eq!(closed_rows.len(), 1);
    // the saved state is the end of the training run, so the single closed
    // step coincides with the last open-loop emission, bit for bit
    assert_eq!(
        closed_rows[0][0].to_bits(),
        open_rows.last().unwrap()[0].to_bits()
    );
}

#[test]
fn generative_run_on_a_trained_lorenz_model_stays_bounded() {
    let d = dir();
    let series = d.path.join("lorenz.csv");
    run_ok(&[
        "generate",
        "--system",
        "lorenz",
        "--length",
        "400",
        "--out",
        series.to_str().unwrap(),
    ]);
    let cfg = d.path.join("run.cfg");
    std::fs::write(
        &cfg,
        "[model]\nreservoir_size = 80\nseed = 11\nspectral_radius = 0.9\n\
         [train]\nlambda = 1e-6\ntrain_len = 350\n[data]\nsystem = lorenz\n",
    )
    .unwrap();
    let model = d.path.join("model.rcm");
    run_ok(&[
        "train",
        "--data",
        series.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    let out = d.path.join("free.csv");
    run_ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--mode",
        "generative",
        "--steps",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (names, rows) = parse_csv(&read(&out));
    assert_eq!(names.len(), 3);
    assert_eq!(rows.len(), 200);
    assert!(rows
        .iter()
        .all(|r| r.iter().all(|v| v.is_finite() && v.abs() < 1e4)));
}

#[test]
fn bench_report_is_reproducible_and_well_formed() {
    let d = dir();
    let cfg = d.path.join("bench.cfg");
    std::fs::write(
        &cfg,
        "[train]\ntrain_len = 80\n[predict]\npredict_len = 60\n[data]\ndiscard = 20\n",
    )
    .unwrap();
    let a = d.path.join("a.csv");
    let b = d.path.join("b.csv");
    for out in [&a, &b] {
        let output = run_ok(&[
            "bench",
            "--config",
            cfg.to_str().unwrap(),
            "--sizes",
            "15,25",
            "--seeds",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("config digest"), "summary on stdout");
        assert!(
            stdout.contains("data: mackey-glass"),
            "summary states the generator settings"
        );
    }
    let text_a = read(&a);
    let text_b = read(&b);
    let lines_a: Vec<&str> = text_a.lines().collect();
    let lines_b: Vec<&str> = text_b.lines().collect();
    assert_eq!(
        lines_a[0],
        "size,seed,train_time_s,predict_time_s,total_time_s,mse,nrmse"
    );
    assert_eq!(lines_a.len(), 4); // header + baseline + two sizes
    for (la, lb) in lines_a.iter().zip(&lines_b).skip(1) {
        let fa: Vec<&str> = la.split(',').collect();
        let fb: Vec<&str> = lb.split(',').collect();
        // identity columns and error metrics are run-independent
        assert_eq!((fa[0], fa[1]), (fb[0], fb[1]));
        assert_eq!((fa[5], fa[6]), (fb[5], fb[6]));
        let train: f64 = fa[2].parse().unwrap();
        let predict: f64 = fa[3].parse().unwrap();
        let total: f64 = fa[4].parse().unwrap();
        assert_eq!(total, train + predict);
    }
}
