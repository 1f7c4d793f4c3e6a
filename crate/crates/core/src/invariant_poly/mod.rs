//! Exact symmetric functions and the GL-invariant multi-trace maps they induce.

mod invariant;
mod partition;
mod symfun;

pub use invariant::{eval_T_sigma, eval_invariant, invariant_from_symfun, symmetrize, InvariantMap, FULL_AVERAGE_MAX_ARITY};
pub use partition::{cycle_type, Partition, Permutation};
pub use symfun::{
    chern_character_component, newton_convert, todd_component, Basis, Degree, SymFun, ToddSeries, DEFAULT_TODD_DEPTH,
};
