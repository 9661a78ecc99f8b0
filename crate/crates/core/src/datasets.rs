//! Deterministic generators for benchmark time series, train/test windowing,
//! per-dimension standardization, and CSV round-tripping.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Rng};

/// A multivariate time series: one row per dimension, one column per step.
#[derive(Debug, Clone)]
pub struct SeriesData {
    pub values: DenseMatrix,
    pub dt: f64,
    pub name: String,
}

impl SeriesData {
    pub fn new(values: DenseMatrix, dt: f64, name: impl Into<String>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        Ok(Self {
            values,
            dt,
            name: name.into(),
        })
    }

    pub fn dims(&self) -> usize {
        self.values.rows()
    }

    pub fn len(&self) -> usize {
        self.values.cols()
    }

    pub fn is_empty(&self) -> bool {
        false // the matrix type guarantees at least one column
    }
}

/// How the delay buffer is filled for times at or before zero.
#[derive(Debug, Clone)]
pub enum MgHistory {
    /// Every past value equals the initial value.
    Constant,
    /// Past values drawn uniformly from [lo, hi), seeded.
    Uniform { lo: f64, hi: f64, seed: u64 },
}

/// Parameters of the delayed feedback system
/// dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t).
#[derive(Debug, Clone)]
pub struct MackeyGlassParams {
    pub tau: f64,
    pub dt: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: f64,
    pub x0: f64,
    pub discard: usize,
    pub history: MgHistory,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        Self {
            tau: 17.0,
            dt: 0.1,
            beta: 0.2,
            gamma: 0.1,
            n: 10.0,
            x0: 1.2,
            discard: 1000,
            history: MgHistory::Constant,
        }
    }
}

/// The value of x* solving beta x/(1+x^n) = gamma x, the system's nontrivial
/// equilibrium; defined for beta > gamma.
pub fn mackey_glass_fixed_point(beta: f64, gamma: f64, n: f64) -> f64 {
    (beta / gamma - 1.0).powf(1.0 / n)
}

/// Integrates the delayed feedback system with fixed-step fourth-order
/// Runge-Kutta. The delay buffer is read on the step grid; half-step stage
/// times fall between grid points and are linearly interpolated, which keeps
/// the scheme's observed order at two. The first `discard` steps are dropped.
pub fn mackey_glass(length: usize, params: &MackeyGlassParams) -> Result<SeriesData> {
    let MackeyGlassParams {
        tau,
        dt,
        beta,
        gamma,
        n,
        x0,
        discard,
        ref history,
    } = *params;
    if length == 0 {
        return Err(Error::InvalidArgument("series length must be positive".into()));
    }
    for (name, v) in [
        ("tau", tau),
        ("dt", dt),
        ("beta", beta),
        ("gamma", gamma),
        ("n", n),
        ("x0", x0),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }

    let depth = ((tau / dt).round() as usize).max(1);
    let mut buffer: Vec<f64> = match history {
        MgHistory::Constant => vec![x0; depth],
        MgHistory::Uniform { lo, hi, seed } => {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "history range [{lo}, {hi}) is not a valid interval"
                )));
            }
            let mut rng = Rng::new(*seed);
            (0..depth).map(|_| rng.uniform(*lo, *hi)).collect()
        }
    };
    // buffer[i] holds x(t - (depth - i) dt); the current value sits outside
    let mut x = x0;
    let mut head = 0usize; // index of the oldest entry, x(t - tau)

    let deriv = |x: f64, delayed: f64| beta * delayed / (1.0 + delayed.powf(n)) - gamma * x;

    let total = discard + length;
    let mut out = Vec::with_capacity(length);
    for step in 0..total {
        let oldest = buffer[head]; // x(t - tau)
        let next_oldest = if depth == 1 {
            x
        } else {
            buffer[(head + 1) % depth]
        }; // x(t - tau + dt)
        let mid = 0.5 * (oldest + next_oldest);

        let k1 = deriv(x, oldest);
        let k2 = deriv(x + 0.5 * dt * k1, mid);
        let k3 = deriv(x + 0.5 * dt * k2, mid);
        let k4 = deriv(x + dt * k3, next_oldest);
        let x_next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        buffer[head] = x;
        head = (head + 1) % depth;
        x = x_next;
        if step >= discard {
            out.push(x);
        }
    }
    SeriesData::new(DenseMatrix::new(1, length, out)?, dt, "mackey_glass")
}

/// Parameters of the Lorenz system
/// dx/dt = sigma (y - x), dy/dt = x (rho - z) - y, dz/dt = x y - beta z.
#[derive(Debug, Clone)]
pub struct LorenzParams {
    pub dt: f64,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub u0: [f64; 3],
    pub discard: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            dt: 0.02,
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            u0: [1.0, 0.0, 0.0],
            discard: 500,
        }
    }
}

/// Integrates the Lorenz system with fixed-step fourth-order Runge-Kutta;
/// the first `discard` steps are dropped. Output has three rows.
pub fn lorenz(length: usize, params: &LorenzParams) -> Result<SeriesData> {
    let LorenzParams {
        dt,
        sigma,
        rho,
        beta,
        u0,
        discard,
    } = *params;
    if length == 0 {
        return Err(Error::InvalidArgument("series length must be positive".into()));
    }
    for (name, v) in [("dt", dt), ("sigma", sigma), ("rho", rho), ("beta", beta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial state must be finite".into()));
    }

    let f = |u: [f64; 3]| {
        [
            sigma * (u[1] - u[0]),
            u[0] * (rho - u[2]) - u[1],
            u[0] * u[1] - beta * u[2],
        ]
    };
    let add = |u: [f64; 3], k: [f64; 3], h: f64| {
        [u[0] + h * k[0], u[1] + h * k[1], u[2] + h * k[2]]
    };

    let total = discard + length;
    let mut u = u0;
    let mut out = vec![0.0; 3 * length];
    for step in 0..total {
        let k1 = f(u);
        let k2 = f(add(u, k1, 0.5 * dt));
        let k3 = f(add(u, k2, 0.5 * dt));
        let k4 = f(add(u, k3, dt));
        for i in 0..3 {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step >= discard {
            let col = step - discard;
            for i in 0..3 {
                out[i * length + col] = u[i];
            }
        }
    }
    SeriesData::new(DenseMatrix::new(3, length, out)?, dt, "lorenz")
}

/// One-step-ahead training and test windows cut from a single series.
#[derive(Debug, Clone)]
pub struct NextStepSplit {
    pub train_inputs: DenseMatrix,
    pub train_targets: DenseMatrix,
    pub test_inputs: DenseMatrix,
    pub test_targets: DenseMatrix,
}

/// Splits a series for next-step prediction: targets are the inputs shifted
/// forward one step, and the test window starts right after the training
/// inputs end.
pub fn next_step_pairs(
    series: &SeriesData,
    train_len: usize,
    predict_len: usize,
) -> Result<NextStepSplit> {
    if train_len == 0 || predict_len == 0 {
        return Err(Error::InvalidArgument(
            "train and prediction lengths must be positive".into(),
        ));
    }
    let needed = train_len + predict_len + 1;
    if needed > series.len() {
        return Err(Error::InvalidArgument(format!(
            "series has {} steps, need {needed} for this split",
            series.len()
        )));
    }
    let v = &series.values;
    Ok(NextStepSplit {
        train_inputs: v.column_block(0, train_len),
        train_targets: v.column_block(1, train_len),
        test_inputs: v.column_block(train_len, predict_len),
        test_targets: v.column_block(train_len + 1, predict_len),
    })
}

/// Per-dimension affine map to zero mean and unit variance, fitted on one
/// matrix (each row is a dimension) and applicable to any other with the
/// same row count. Constant rows keep their scale at one so the map stays
/// invertible.
#[derive(Debug, Clone)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(m: &DenseMatrix) -> Self {
        let t = m.cols() as f64;
        let mut mean = Vec::with_capacity(m.rows());
        let mut scale = Vec::with_capacity(m.rows());
        for r in 0..m.rows() {
            let row = m.row(r);
            let mu = row.iter().sum::<f64>() / t;
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / t;
            mean.push(mu);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Self { mean, scale }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn transform(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.map(m, |v, mu, s| (v - mu) / s)
    }

    pub fn inverse(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.map(m, |v, mu, s| v * s + mu)
    }

    fn map(&self, m: &DenseMatrix, f: impl Fn(f64, f64, f64) -> f64) -> Result<DenseMatrix> {
        if m.rows() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "standardizer was fitted on {} dimensions, got {}",
                self.mean.len(),
                m.rows()
            )));
        }
        let mut values = Vec::with_capacity(m.rows() * m.cols());
        for r in 0..m.rows() {
            let (mu, s) = (self.mean[r], self.scale[r]);
            values.extend(m.row(r).iter().map(|v| f(*v, mu, s)));
        }
        DenseMatrix::new(m.rows(), m.cols(), values)
    }
}

/// Default header names: x for one dimension, x/y/z for three, x1..xD else.
pub fn default_names(dims: usize) -> Vec<String> {
    match dims {
        1 => vec!["x".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        d => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

/// Writes a header row of names and one row per timestep. Values print in
/// shortest round-trip decimal form, so reading the file back reproduces the
/// exact same bits.
pub fn write_csv<W: Write>(names: &[String], values: &DenseMatrix, out: &mut W) -> Result<()> {
    if names.len() != values.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} dimensions",
            names.len(),
            values.rows()
        )));
    }
    writeln!(out, "{}", names.join(","))?;
    for col in 0..values.cols() {
        for row in 0..values.rows() {
            if row > 0 {
                write!(out, ",")?;
            }
            write!(out, "{}", values[(row, col)])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a file in the format produced by [`write_csv`]: returns the header
/// names and a matrix with one row per name, one column per data line.
pub fn read_csv<R: BufRead>(input: R) -> Result<(Vec<String>, DenseMatrix)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Malformed("empty file".into()))??;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.is_empty() || names.iter().any(|n| n.is_empty()) {
        return Err(Error::Malformed("header row has empty names".into()));
    }
    let dims = names.len();
    let mut columns: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dims {
            return Err(Error::Malformed(format!(
                "line {}: expected {dims} fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        for f in fields {
            let v: f64 = f.trim().parse().map_err(|_| {
                Error::Malformed(format!("line {}: not a number: {f:?}", lineno + 2))
            })?;
            columns.push(v);
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::Malformed("no data rows".into()));
    }
    // stored row-per-timestep; transpose into row-per-dimension
    let mut values = vec![0.0; dims * count];
    for (t, chunk) in columns.chunks(dims).enumerate() {
        for (d, v) in chunk.iter().enumerate() {
            values[d * count + t] = *v;
        }
    }
    Ok((names, DenseMatrix::new(dims, count, values)?))
}
