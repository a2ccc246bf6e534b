//! Heat-bath single-spin-flip Markov chains for volumes beyond enumeration.
//!
//! Each update picks a site uniformly and resamples its spin from the conditional
//! law, so every step is reversible with respect to the finite-volume Gibbs measure.
//! Cached local fields are updated in `O(n)` (or `O(cutoff)`) per accepted flip and
//! periodically recomputed from scratch.

mod chain;
pub mod stats;

pub use chain::{
    empirical_tail, new_chain, new_chain_with, susceptibility_mc, ChainOptions, ChainState,
    InitialState, TailEstimate, MAX_CHAIN_SITES,
};
pub use stats::{batch_means, EstimateWithError};
