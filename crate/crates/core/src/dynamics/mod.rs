//! Time evolution: stochastic-field unitary trajectories, a dissipative
//! cooling engine, and node measurement.

pub mod dissipative;
pub mod measure;
pub mod schedule;
pub mod state;
pub mod unitary;

use serde::{Deserialize, Serialize};

pub use dissipative::{evolve_dissipative, glauber_rate, DaviesModel};
pub use measure::{measure_nodes, node_distribution, NodeDistribution};
pub use schedule::{RelaxationSchedule, TemperatureSchedule};
pub use state::{Payload, SystemState};
pub use unitary::{
    evolve_trajectories, evolve_unitary, step_halving_ratio, BathDriven, FieldSource, HamiltonianProvider,
    StaticHamiltonian, StepMethod, TrajectoryModel,
};

/// Which spins the bath addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Both protons of a triode see the same field.
    Symmetric,
    /// Each proton sees its own field.
    Asymmetric,
}

/// How independent trajectories are scheduled. Results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled.
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel
        } else {
            Self::Sequential
        }
    }
}

/// `(0..n).map(f)` with results in index order regardless of scheduling.
pub fn ordered_map<R, F>(n: usize, parallelism: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match parallelism {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
