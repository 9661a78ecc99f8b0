//! Reservoir computing for time series: fixed random recurrent layers,
//! closed-form readout training, and open- or closed-loop inference.
//!
//! A model is assembled from a fixed input projection and a fixed recurrent
//! matrix (see [`layers`]), driven over a series to collect states
//! ([`esn`]), and finished by fitting a linear readout in one regularized
//! solve ([`train`]). Prediction either consumes fresh inputs or feeds its
//! own outputs back ([`predict`]). Dataset generators and windowing live in
//! [`datasets`]; the matrix and RNG plumbing in [`linalg`].
//!
//! ```
//! use rescomp::datasets::{mackey_glass, next_step_pairs, MackeyGlassParams, SeriesData};
//! use rescomp::esn::{Activation, EsnModel};
//! use rescomp::layers::{dense_uniform_input, rand_sparse_reservoir};
//! use rescomp::linalg::Rng;
//! use rescomp::predict::predict_generative;
//! use rescomp::states::StateModifier;
//! use rescomp::train::train_readout;
//!
//! fn main() -> rescomp::Result<()> {
//!     // 6000 samples of the delayed-feedback series, transient discarded
//!     let series = mackey_glass(6000, &MackeyGlassParams::default())?;
//!     let split = next_step_pairs(&series, 4999, 1000)?;
//!
//!     // fixed random layers: 300 tanh units at spectral radius 1.25
//!     let mut rng = Rng::new(7);
//!     let input = dense_uniform_input(300, 1, 1.0, &mut rng)?;
//!     let reservoir = rand_sparse_reservoir(300, 1.0, 1.25, &mut rng)?;
//!     let model = EsnModel::standard(
//!         input,
//!         reservoir,
//!         1.0,
//!         Activation::Tanh,
//!         StateModifier::plain(),
//!     )?;
//!
//!     // drive the reservoir over the training window, fit the readout
//!     let drive = SeriesData::new(split.train_inputs.clone(), series.dt, "train")?;
//!     let states = model.collect_states(&drive, 0, None)?;
//!     let readout = train_readout(&states, &split.train_targets, 1e-8)?;
//!
//!     // forecast 500 steps closed loop from the end of training
//!     let x = states.final_raw_state();
//!     let u = split.train_inputs.column(split.train_inputs.cols() - 1);
//!     let run = predict_generative(&model, &readout, &x, &u, 500)?;
//!     assert_eq!(run.outputs.cols(), 500);
//!     Ok(())
//! }
//! ```

pub mod datasets;
pub mod error;
pub mod esn;
pub mod layers;
pub mod linalg;
pub mod predict;
pub mod states;
pub mod train;

pub use error::{Error, Result};
