//! Turns a validated configuration into concrete weight matrices and an
//! assembled model. All randomness flows through one generator seeded from
//! the run seed, drawn in a fixed order (per layer: input first, then
//! reservoir), so a seed pins every weight.

use rescomp::esn::EsnModel;
use rescomp::layers::{
    delay_line_backward_reservoir, delay_line_reservoir, dense_uniform_input, minimal_input,
    pseudo_svd_reservoir, rand_sparse_reservoir, simple_cycle_reservoir, weighted_input,
    SignSource,
};
use rescomp::linalg::{DenseMatrix, Matrix, Rng};
use rescomp::states::StateModifier;
use rescomp::Result;

use crate::config::{InputKind, ReservoirKind, RunConfig};

pub fn build_input(
    cfg: &RunConfig,
    res_size: usize,
    in_size: usize,
    rng: &mut Rng,
) -> Result<DenseMatrix> {
    match cfg.model.input {
        InputKind::Dense => dense_uniform_input(res_size, in_size, cfg.model.input_scaling, rng),
        InputKind::Weighted => weighted_input(res_size, in_size, cfg.model.input_scaling, rng),
        InputKind::Minimal => minimal_input(
            res_size,
            in_size,
            cfg.model.input_scaling,
            SignSource::Random(rng),
        ),
    }
}

pub fn build_reservoir(cfg: &RunConfig, size: usize, rng: &mut Rng) -> Result<Matrix> {
    let m = &cfg.model;
    match m.reservoir {
        ReservoirKind::Dense => rand_sparse_reservoir(size, 1.0, m.spectral_radius, rng),
        ReservoirKind::Sparse => rand_sparse_reservoir(size, m.density, m.spectral_radius, rng),
        ReservoirKind::Cycle => simple_cycle_reservoir(size, m.weight),
        ReservoirKind::DelayLine => delay_line_reservoir(size, m.weight),
        ReservoirKind::DelayFeedback => {
            delay_line_backward_reservoir(size, m.weight, m.feedback)
        }
        ReservoirKind::PseudoSvd => pseudo_svd_reservoir(size, m.max_value, m.sparsity, rng),
    }
}

/// Assembles the configured model for `input_dim`-dimensional series. The
/// `size` argument lets benchmark sweeps override `reservoir_size` without
/// editing the config.
pub fn build_model(cfg: &RunConfig, input_dim: usize, size: usize, seed: u64) -> Result<EsnModel> {
    let mut rng = Rng::new(seed);
    let modifier = StateModifier::new(cfg.model.modifier, cfg.model.nonlinear, cfg.model.constant)?;
    let mut stack = Vec::with_capacity(cfg.model.layers);
    for layer in 0..cfg.model.layers {
        let drive_dim = if layer == 0 { input_dim } else { size };
        let input = build_input(cfg, size, drive_dim, &mut rng)?;
        let reservoir = build_reservoir(cfg, size, &mut rng)?;
        stack.push((input, reservoir));
    }
    EsnModel::deep(stack, cfg.model.leak_rate, cfg.model.activation, modifier)
}
