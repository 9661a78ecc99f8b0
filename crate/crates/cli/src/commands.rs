//! Implementations of the CLI subcommands, kept binary-free so integration
//! tests can drive them directly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rescomp::datasets::{
    default_names, lorenz, mackey_glass, read_csv, write_csv, LorenzParams, MackeyGlassParams,
    MgHistory, SeriesData,
};
use rescomp::predict::{predict_generative, predict_predictive};
use rescomp::train::train_readout;
use rescomp::Error;

use crate::bench::{run_bench, summarize, write_report_csv, DEFAULT_SWEEP};
use crate::build::build_model;
use crate::config::RunConfig;
use crate::container::{load_from_path, save_to_path, ModelMeta, SavedModel};
use crate::{usage, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    MackeyGlass,
    Lorenz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Generative,
    Predictive,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Dynamical system to integrate
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// Number of samples to keep
    #[arg(long)]
    pub length: usize,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Integration step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Leading samples dropped before recording
    #[arg(long)]
    pub discard: Option<usize>,
    /// Feedback delay (mackey-glass)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Feedback gain (mackey-glass) or third flow parameter (lorenz)
    #[arg(long)]
    pub beta: Option<f64>,
    /// Decay rate (mackey-glass)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Feedback nonlinearity power (mackey-glass)
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Initial value and constant history (mackey-glass)
    #[arg(long)]
    pub x0: Option<f64>,
    /// First flow parameter (lorenz)
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Second flow parameter (lorenz)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Starting point as x,y,z (lorenz)
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub u0: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Run configuration; the benchmark recipe when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reservoir sizes to sweep; this harness's default when omitted
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Seeds per size; the config seed when omitted
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Report CSV path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training series CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Run configuration; defaults when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model file to write
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,
    /// Closed-loop (generative) or open-loop (predictive) inference
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Closed-loop steps (generative only)
    #[arg(long)]
    pub steps: Option<usize>,
    /// Input series CSV (predictive only)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn load_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::from_path(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn reject_flags(set: &[(&str, bool)], context: &str) -> CliResult<()> {
    for (name, present) in set {
        if *present {
            return Err(usage(format!("--{name} does not apply to {context}")));
        }
    }
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let series = match args.system {
        SystemArg::MackeyGlass => {
            reject_flags(
                &[
                    ("sigma", args.sigma.is_some()),
                    ("rho", args.rho.is_some()),
                    ("u0", args.u0.is_some()),
                ],
                "--system mackey-glass",
            )?;
            let defaults = MackeyGlassParams::default();
            mackey_glass(
                args.length,
                &MackeyGlassParams {
                    tau: args.tau.unwrap_or(defaults.tau),
                    dt: args.dt.unwrap_or(defaults.dt),
                    beta: args.beta.unwrap_or(defaults.beta),
                    gamma: args.gamma.unwrap_or(defaults.gamma),
                    n: args.exponent.unwrap_or(defaults.n),
                    x0: args.x0.unwrap_or(defaults.x0),
                    discard: args.discard.unwrap_or(defaults.discard),
                    history: MgHistory::Constant,
                },
            )?
        }
        SystemArg::Lorenz => {
            reject_flags(
                &[
                    ("tau", args.tau.is_some()),
                    ("gamma", args.gamma.is_some()),
                    ("exponent", args.exponent.is_some()),
                    ("x0", args.x0.is_some()),
                ],
                "--system lorenz",
            )?;
            let defaults = LorenzParams::default();
            let u0 = match &args.u0 {
                Some(v) => [v[0], v[1], v[2]],
                None => defaults.u0,
            };
            lorenz(
                args.length,
                &LorenzParams {
                    dt: args.dt.unwrap_or(defaults.dt),
                    sigma: args.sigma.unwrap_or(defaults.sigma),
                    rho: args.rho.unwrap_or(defaults.rho),
                    beta: args.beta.unwrap_or(defaults.beta),
                    u0,
                    discard: args.discard.unwrap_or(defaults.discard),
                },
            )?
        }
    };
    write_series_csv(&series.values, &args.out)?;
    Ok(())
}

fn write_series_csv(values: &rescomp::linalg::DenseMatrix, path: &Path) -> CliResult<()> {
    let names = default_names(values.rows());
    let file = File::create(path).map_err(Error::from)?;
    let mut out = BufWriter::new(file);
    write_csv(&names, values, &mut out)?;
    out.flush().map_err(Error::from)?;
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let seeds = match &args.seeds {
        Some(s) => s.clone(),
        None => vec![cfg.model.seed],
    };
    let (sizes, default_sweep) = match &args.sizes {
        Some(s) => (s.clone(), false),
        None => (DEFAULT_SWEEP.to_vec(), true),
    };
    let report = run_bench(&cfg, &sizes, &seeds)?;
    let file = File::create(&args.out).map_err(Error::from)?;
    let mut out = BufWriter::new(file);
    write_report_csv(&report, &mut out)?;
    out.flush().map_err(Error::from)?;
    print!("{}", summarize(&report, &cfg, default_sweep));
    Ok(())
}

pub fn read_series_csv(path: &Path, dt: f64) -> CliResult<SeriesData> {
    let file = File::open(path).map_err(Error::from)?;
    let (names, values) = read_csv(BufReader::new(file))?;
    Ok(SeriesData::new(values, dt, names.join("-"))?)
}

pub fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    if cfg.data.standardize {
        return Err(CliError::Failure(Error::InvalidArgument(
            "standardized training is not supported here: the scale would have to travel \
             with the model file; train on raw data instead"
                .into(),
        )));
    }
    let series = read_series_csv(&args.data, cfg.data.dt)?;
    let train_len = cfg.train.train_len;
    if series.len() < train_len + 1 {
        return Err(CliError::Failure(Error::InvalidArgument(format!(
            "train_len {} needs at least {} samples, the series has {}",
            train_len,
            train_len + 1,
            series.len()
        ))));
    }
    let washout = cfg.model.washout;
    let inputs = SeriesData::new(
        series.values.column_block(0, train_len),
        series.dt,
        series.name.clone(),
    )?;
    let targets = series.values.column_block(washout + 1, train_len - washout);

    let seed = args.seed.unwrap_or(cfg.model.seed);
    let model = build_model(&cfg, series.dims(), cfg.model.reservoir_size, seed)?;
    let states = model.collect_states(&inputs, washout, None)?;
    let readout = train_readout(&states, &targets, cfg.train.lambda)?;
    let final_state = states.final_raw_state();
    let last_input = inputs.values.column(train_len - 1);

    let saved = SavedModel {
        model,
        readout,
        meta: ModelMeta {
            washout,
            seed,
            config_digest: cfg.digest(),
            final_state,
            last_input,
        },
    };
    save_to_path(&saved, &args.out)?;
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    // vet the flag combination before touching any file
    match args.mode {
        ModeArg::Generative => {
            if args.data.is_some() {
                return Err(usage(
                    "--data does not apply to --mode generative; use --steps".into(),
                ));
            }
            if args.steps.is_none() {
                return Err(usage("--mode generative requires --steps".into()));
            }
        }
        ModeArg::Predictive => {
            if args.steps.is_some() {
                return Err(usage(
                    "--steps does not apply to --mode predictive; use --data".into(),
                ));
            }
            if args.data.is_none() {
                return Err(usage("--mode predictive requires --data".into()));
            }
        }
    }
    let saved = load_from_path(&args.model)?;
    let run = match args.mode {
        ModeArg::Generative => {
            let steps = args.steps.expect("checked above");
            predict_generative(
                &saved.model,
                &saved.readout,
                &saved.meta.final_state,
                &saved.meta.last_input,
                steps,
            )?
        }
        ModeArg::Predictive => {
            let data = args.data.as_ref().expect("checked above");
            let inputs = read_series_csv(data, 1.0)?;
            let x0 = vec![0.0; saved.model.state_size()];
            predict_predictive(&saved.model, &saved.readout, &x0, &inputs)?
        }
    };
    write_series_csv(&run.outputs, &args.out)?;
    Ok(())
}
