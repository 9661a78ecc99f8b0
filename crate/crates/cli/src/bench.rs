//! Next-step prediction benchmark: for each (reservoir size, seed) pair,
//! build the configured model, fit the readout on the training window, run
//! open-loop prediction over the test window, and record wall-clock times
//! and error metrics. A closed-form persistence baseline row (repeat the
//! last value) anchors the error scale.

use std::io::Write;
use std::time::Instant;

use rescomp::datasets::{next_step_pairs, NextStepSplit, SeriesData, Standardizer};
use rescomp::linalg::DenseMatrix;
use rescomp::predict::predict_predictive;
use rescomp::train::train_readout;
use rescomp::{Error, Result};

use crate::build::build_model;
use crate::config::{RunConfig, System};
use crate::data::generate_series;

pub const CSV_HEADER: &str = "size,seed,train_time_s,predict_time_s,total_time_s,mse,nrmse";

/// The persistence baseline is tagged with size 0: it has no reservoir.
pub const BASELINE_SIZE: usize = 0;

/// Sizes swept when the command line names none. This is a choice of the
/// harness, not part of any configuration, and the summary says so.
pub const DEFAULT_SWEEP: [usize; 4] = [100, 300, 500, 1000];

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub size: usize,
    pub seed: u64,
    pub train_time_s: f64,
    pub predict_time_s: f64,
    pub total_time_s: f64,
    pub mse: f64,
    pub nrmse: f64,
}

#[derive(Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub config_digest: String,
    pub notes: Vec<String>,
}

pub fn mean_squared_error(predictions: &DenseMatrix, targets: &DenseMatrix) -> Result<f64> {
    if predictions.rows() != targets.rows() || predictions.cols() != targets.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} predictions against {}x{} targets",
            predictions.rows(),
            predictions.cols(),
            targets.rows(),
            targets.cols()
        )));
    }
    let count = (predictions.rows() * predictions.cols()) as f64;
    Ok(predictions
        .values()
        .iter()
        .zip(targets.values())
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / count)
}

/// Population standard deviation over every entry of the target window.
pub fn target_std(targets: &DenseMatrix) -> f64 {
    let count = (targets.rows() * targets.cols()) as f64;
    let mean = targets.values().iter().sum::<f64>() / count;
    let var = targets
        .values()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / count;
    var.sqrt()
}

/// Root-mean-square error divided by the standard deviation of the targets.
pub fn normalized_rmse(mse: f64, targets: &DenseMatrix) -> f64 {
    mse.sqrt() / target_std(targets)
}

/// Builds the benchmark series and split from the configured system. The
/// series is exactly long enough for the train and test windows. With
/// standardization on, the scale is fitted on the training inputs only and
/// applied to all four windows.
pub fn bench_split(cfg: &RunConfig) -> Result<NextStepSplit> {
    let length = cfg.train.train_len + cfg.predict.predict_len + 1;
    let series = generate_series(cfg, length)?;
    let mut split = next_step_pairs(&series, cfg.train.train_len, cfg.predict.predict_len)?;
    if cfg.data.standardize {
        let scaler = Standardizer::fit(&split.train_inputs);
        split.train_inputs = scaler.transform(&split.train_inputs)?;
        split.train_targets = scaler.transform(&split.train_targets)?;
        split.test_inputs = scaler.transform(&split.test_inputs)?;
        split.test_targets = scaler.transform(&split.test_targets)?;
    }
    Ok(split)
}

/// Repeat-the-input predictor v(t+1) = u(t), evaluated in closed form.
pub fn persistence_row(split: &NextStepSplit) -> Result<BenchRow> {
    let mse = mean_squared_error(&split.test_inputs, &split.test_targets)?;
    Ok(BenchRow {
        size: BASELINE_SIZE,
        seed: 0,
        train_time_s: 0.0,
        predict_time_s: 0.0,
        total_time_s: 0.0,
        mse,
        nrmse: normalized_rmse(mse, &split.test_targets),
    })
}

/// One benchmark point: build, fit, predict, time. Training covers state
/// collection plus the readout solve; prediction covers the open-loop run.
/// Matrix generation is excluded from both timers.
pub fn bench_point(cfg: &RunConfig, split: &NextStepSplit, size: usize, seed: u64) -> Result<BenchRow> {
    let input_dim = split.train_inputs.rows();
    let model = build_model(cfg, input_dim, size, seed)?;
    let train_inputs = SeriesData::new(split.train_inputs.clone(), cfg.data.dt, "train")?;
    let washout = cfg.model.washout;
    let targets = split
        .train_targets
        .column_block(washout, split.train_targets.cols() - washout);

    let train_started = Instant::now();
    let states = model.collect_states(&train_inputs, washout, None)?;
    let readout = train_readout(&states, &targets, cfg.train.lambda)?;
    let train_time_s = train_started.elapsed().as_secs_f64();

    let test_inputs = SeriesData::new(split.test_inputs.clone(), cfg.data.dt, "test")?;
    let x_start = states.final_raw_state();

    let predict_started = Instant::now();
    let run = predict_predictive(&model, &readout, &x_start, &test_inputs)?;
    let predict_time_s = predict_started.elapsed().as_secs_f64();

    let mse = mean_squared_error(&run.outputs, &split.test_targets)?;
    Ok(BenchRow {
        size,
        seed,
        train_time_s,
        predict_time_s,
        total_time_s: train_time_s + predict_time_s,
        mse,
        nrmse: normalized_rmse(mse, &split.test_targets),
    })
}

/// Full sweep: rows ordered by size then seed, baseline (size 0) first. A
/// failing point becomes a row with NaN errors plus a note; the sweep goes on.
pub fn run_bench(cfg: &RunConfig, sizes: &[usize], seeds: &[u64]) -> Result<BenchReport> {
    if sizes.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "benchmark needs at least one size and one seed".into(),
        ));
    }
    let split = bench_split(cfg)?;
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();

    let mut rows = vec![persistence_row(&split)?];
    let mut notes = Vec::new();
    for &size in &sizes {
        for &seed in &seeds {
            match bench_point(cfg, &split, size, seed) {
                Ok(row) => rows.push(row),
                Err(err) => {
                    notes.push(format!("size {size} seed {seed} failed: {err}"));
                    rows.push(BenchRow {
                        size,
                        seed,
                        train_time_s: f64::NAN,
                        predict_time_s: f64::NAN,
                        total_time_s: f64::NAN,
                        mse: f64::NAN,
                        nrmse: f64::NAN,
                    });
                }
            }
        }
    }
    Ok(BenchReport {
        rows,
        config_digest: cfg.digest(),
        notes,
    })
}

/// CSV with the exact frozen column set; floats print in shortest
/// round-trip form so the arithmetic relations survive re-parsing.
pub fn write_report_csv<W: Write>(report: &BenchReport, out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.size, r.seed, r.train_time_s, r.predict_time_s, r.total_time_s, r.mse, r.nrmse
        )?;
    }
    Ok(())
}

/// The data-generation settings behind a report. Always spelled out
/// because most of them fall back to defaults the CSV does not record.
pub fn data_settings_line(cfg: &RunConfig) -> String {
    let d = &cfg.data;
    let mut line = match d.system {
        System::MackeyGlass => format!(
            "data: mackey-glass tau={} beta={} gamma={} n={} x0={} dt={} discard={}",
            d.tau, d.beta, d.gamma, d.n, d.x0, d.dt, d.discard
        ),
        System::Lorenz => format!(
            "data: lorenz sigma={} rho={} beta={} u0={},{},{} dt={} discard={}",
            d.sigma, d.rho, d.beta, d.u0[0], d.u0[1], d.u0[2], d.dt, d.discard
        ),
    };
    line.push_str(&format!(" standardize={}", d.standardize));
    line
}

/// Short human-readable account for the terminal.
pub fn summarize(report: &BenchReport, cfg: &RunConfig, default_sweep: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("config digest: {}\n", report.config_digest));
    out.push_str(&data_settings_line(cfg));
    out.push('\n');
    if default_sweep {
        out.push_str("sizes: harness default sweep, not taken from the configuration\n");
    }
    for r in &report.rows {
        if r.size == BASELINE_SIZE {
            out.push_str(&format!(
                "persistence baseline: mse {:.3e}, nrmse {:.3e}\n",
                r.mse, r.nrmse
            ));
        } else {
            out.push_str(&format!(
                "size {:>5} seed {:>3}: train {:.3}s + predict {:.3}s = {:.3}s, mse {:.3e}, nrmse {:.3e}\n",
                r.size, r.seed, r.train_time_s, r.predict_time_s, r.total_time_s, r.mse, r.nrmse
            ));
        }
    }
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}
