//! Seed splitting.
//!
//! Every random draw comes from a ChaCha8 generator keyed by the experiment
//! seed and a stream number. Trajectory `m` uses stream `TRAJECTORY_BASE + m`;
//! measurement sampling uses `MEASUREMENT` and random initial states
//! `INITIAL_STATE`. Results therefore do not depend
//! on how trajectories are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TRAJECTORY_BASE: u64 = 1 << 32;
pub const MEASUREMENT: u64 = 1;
pub const NETWORK_SWEEP: u64 = 2;
pub const INITIAL_STATE: u64 = 3;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn trajectory_stream(m: usize) -> u64 {
    TRAJECTORY_BASE + m as u64
}
