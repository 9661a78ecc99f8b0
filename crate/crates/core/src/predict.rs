use crate::datasets::SeriesData;
use crate::error::{Error, Result};
use crate::esn::EsnModel;
use crate::linalg::DenseMatrix;
use crate::train::ReadoutLayer;

/// Closed-loop state magnitude beyond which a run aborts instead of
/// producing junk: chaotic feedback divergence fails loudly.
const STATE_GUARD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    /// Closed loop: each output is fed back as the next input.
    Generative { steps: usize },
    /// Open loop: states driven by provided inputs.
    Predictive,
}

/// Result of an inference run: one output column per step and the state the
/// run ended in.
#[derive(Debug, Clone)]
pub struct PredictionRun {
    pub mode: PredictionMode,
    pub outputs: DenseMatrix,
    pub final_state: Vec<f64>,
}

/// Runs the model closed-loop for `steps` outputs: emit a prediction from
/// the current (state, input) pair, then advance the state with that
/// prediction as the next input. Requires the readout to produce vectors of
/// the model's input dimension.
pub fn predict_generative(
    model: &EsnModel,
    readout: &ReadoutLayer,
    x_start: &[f64],
    u_start: &[f64],
    steps: usize,
) -> Result<PredictionRun> {
    check_feature_dims(model, readout, x_start)?;
    check_closed_loop(model, readout)?;
    check_input_len(model, u_start.len())?;
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "a generative run needs at least one step".into(),
        ));
    }
    let mut x = x_start.to_vec();
    let mut u = u_start.to_vec();
    let mut outputs = DenseMatrix::zeros(readout.target_dim, steps);
    for t in 0..steps {
        let v = emit(model, readout, &x, &u, t)?;
        outputs.set_column(t, &v);
        x = model.advance_at(&x, &v, t)?;
        guard_state(&x, t)?;
        u = v;
    }
    Ok(PredictionRun {
        mode: PredictionMode::Generative { steps },
        outputs,
        final_state: x,
    })
}

/// Runs the model open-loop over the provided inputs: advance the state
/// with each true input, then emit the prediction paired with it. Output
/// columns align one-to-one with input columns.
pub fn predict_predictive(
    model: &EsnModel,
    readout: &ReadoutLayer,
    x_start: &[f64],
    inputs: &SeriesData,
) -> Result<PredictionRun> {
    check_feature_dims(model, readout, x_start)?;
    check_input_len(model, inputs.dims())?;
    let mut x = x_start.to_vec();
    let steps = inputs.len();
    let mut outputs = DenseMatrix::zeros(readout.target_dim, steps);
    for t in 0..steps {
        let u = inputs.values.column(t);
        x = model.advance_at(&x, &u, t)?;
        let v = emit(model, readout, &x, &u, t)?;
        outputs.set_column(t, &v);
    }
    Ok(PredictionRun {
        mode: PredictionMode::Predictive,
        outputs,
        final_state: x,
    })
}

/// Diagnostic twin of [`predict_generative`] with the feedback replaced by
/// true values: the run primes on (x_start, u_start), discards the emission
/// made before any true input arrives, and thereafter emits once per
/// provided input. Outputs therefore align column for column with
/// [`predict_predictive`] on the same inputs, which is exactly the
/// consistency this hook exists to check.
#[doc(hidden)]
pub fn predict_teacher_forced(
    model: &EsnModel,
    readout: &ReadoutLayer,
    x_start: &[f64],
    u_start: &[f64],
    inputs: &SeriesData,
) -> Result<PredictionRun> {
    check_feature_dims(model, readout, x_start)?;
    check_closed_loop(model, readout)?;
    check_input_len(model, u_start.len())?;
    check_input_len(model, inputs.dims())?;
    let mut x = x_start.to_vec();
    let _discarded = emit(model, readout, &x, u_start, 0)?;
    let steps = inputs.len();
    let mut outputs = DenseMatrix::zeros(readout.target_dim, steps);
    for t in 0..steps {
        let u = inputs.values.column(t);
        x = model.advance_at(&x, &u, t)?;
        guard_state(&x, t)?;
        let v = emit(model, readout, &x, &u, t)?;
        outputs.set_column(t, &v);
    }
    Ok(PredictionRun {
        mode: PredictionMode::Predictive,
        outputs,
        final_state: x,
    })
}

/// One readout evaluation: modified feature of the (state, input) pair,
/// mapped through W, checked finite.
fn emit(
    model: &EsnModel,
    readout: &ReadoutLayer,
    x: &[f64],
    u: &[f64],
    t: usize,
) -> Result<Vec<f64>> {
    let exposed = model.exposed_state_at(x, u, t)?;
    let z = model.modifier().apply(&exposed, u)?;
    let v = readout.evaluate(&z);
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NumericOverflow { step: t });
    }
    Ok(v)
}

fn guard_state(x: &[f64], t: usize) -> Result<()> {
    if x.iter().any(|v| v.abs() > STATE_GUARD) {
        return Err(Error::NumericOverflow { step: t });
    }
    Ok(())
}

fn check_feature_dims(model: &EsnModel, readout: &ReadoutLayer, x_start: &[f64]) -> Result<()> {
    let expected = model.output_dimension(model.modifier());
    if readout.feature_dim != expected {
        return Err(Error::DimensionMismatch(format!(
            "readout consumes {} features but the model produces {}",
            readout.feature_dim, expected
        )));
    }
    if x_start.len() != model.state_size() {
        return Err(Error::DimensionMismatch(format!(
            "starting state has length {} but the model carries {} units",
            x_start.len(),
            model.state_size()
        )));
    }
    Ok(())
}

fn check_closed_loop(model: &EsnModel, readout: &ReadoutLayer) -> Result<()> {
    if readout.target_dim != model.input_dimension() {
        return Err(Error::ClosedLoopDimension {
            outputs: readout.target_dim,
            inputs: model.input_dimension(),
        });
    }
    Ok(())
}

fn check_input_len(model: &EsnModel, got: usize) -> Result<()> {
    if got != model.input_dimension() {
        return Err(Error::DimensionMismatch(format!(
            "input has dimension {} but the model expects {}",
            got,
            model.input_dimension()
        )));
    }
    Ok(())
}
