//! Series construction from the [data] section of a run configuration.

use rescomp::datasets::{
    lorenz, mackey_glass, LorenzParams, MackeyGlassParams, MgHistory, SeriesData,
};
use rescomp::Result;

use crate::config::{RunConfig, System};

pub fn generate_series(cfg: &RunConfig, length: usize) -> Result<SeriesData> {
    let d = &cfg.data;
    match d.system {
        System::MackeyGlass => mackey_glass(
            length,
            &MackeyGlassParams {
                tau: d.tau,
                dt: d.dt,
                beta: d.beta,
                gamma: d.gamma,
                n: d.n,
                x0: d.x0,
                discard: d.discard,
                history: MgHistory::Constant,
            },
        ),
        System::Lorenz => lorenz(
            length,
            &LorenzParams {
                dt: d.dt,
                sigma: d.sigma,
                rho: d.rho,
                beta: d.beta,
                u0: d.u0,
                discard: d.discard,
            },
        ),
    }
}
