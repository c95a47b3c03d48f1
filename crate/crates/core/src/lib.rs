//! Simulator for ground-state computation on triode-wire Boolean networks.
//!
//! Triodes are realized as spin-1 identities (static gates) and only wires
//! carry energy. The crate builds the spin operators and Hamiltonians,
//! relaxes networks with stochastic-field or dissipative dynamics, and runs
//! the sliced projection comparison between the triode network and its
//! XOR-relaxed counterpart.

// `!(x > 0.0)` rejects NaN on purpose; axis loops read better indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod network;
pub mod operator;
pub mod projection;
pub mod seeding;
pub mod space;
pub mod spin;

pub use error::{Error, Result};
pub use network::{Assignment, BooleanNetwork, CheckReport};
pub use operator::{HermitianOperator, C64};
pub use space::{Factor, FactorKind, Representation, SpaceLabel};
