//! Active assortment optimization under Plackett-Luce choice models.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that is pure
//! computation:
//!
//! - [`model`]: the ground-truth Plackett-Luce instance, choice probabilities,
//!   winner / top-k feedback sampling and the expected weighted revenue.
//! - [`estimate`]: rank-breaking pairwise win counts and the UCB estimators
//!   built on them (no-choice pivot and adaptive pivot).
//! - [`assort`]: static assortment optimizers (top-m, parametric revenue
//!   search, and an exhaustive oracle).
//! - [`policy`]: the online algorithms behind one [`policy::Policy`] trait.
//! - [`sim`]: episode execution, regret accounting and seed aggregation.
//!
//! Item indices are `1..=K`; index `0` is the no-choice item throughout.
//!
//! Randomness always comes from an explicit [`SimRng`] handle (ChaCha8 with a
//! 64-bit seed), so an episode replays bit-exactly from its seed.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assort;
pub mod error;
pub mod estimate;
pub mod model;
pub mod policy;
pub mod sim;

pub use assort::{brute_force_assortment, max_weighted_assortment, top_m_select, ParametricSolver};
pub use error::{Error, Result};
pub use estimate::{UcbParams, WinMatrix};
pub use model::{Assortment, Feedback, FeedbackKind, PlInstance, NO_CHOICE};
pub use policy::{build_policy, Objective, Policy, PolicyKind, PolicySpec};
pub use sim::{
    aggregate, compute_sstar, run_episode, BatchResult, CheckpointSchedule, RegretTrace,
};

/// PRNG used for every random draw in the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Stream ids used to split one episode seed into independent generators.
pub mod streams {
    /// Feedback draws from the environment.
    pub const ENVIRONMENT: u64 = 0;
    /// Internal randomness of randomized policies.
    pub const POLICY: u64 = 1;
    /// Relabelling of items when an instance is shuffled per episode.
    pub const INSTANCE: u64 = 2;
}

/// Builds the generator for `stream` of episode `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SimRng {
    use rand::SeedableRng;
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
