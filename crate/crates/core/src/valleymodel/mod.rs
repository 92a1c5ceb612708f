//! Reduced valley model: lateral envelope on the rough interface, a
//! two-band tight-binding chain for the vertical valley coupling, and
//! lateral phase averaging of that coupling over the envelope.
//!
//! Phase convention: the valley oscillation of the density difference
//! between the two lowest states is `cos(2k₀z + φ_v)`, z being the depth
//! into silicon. A column whose interface sits at depth `z_s` contributes
//! the 1D coupling rotated by `e^{−2ik₀z_s}`.

mod chain;
mod envelope;
mod observables;
mod phase;

pub use chain::{
    build_chain, build_chain_with, chain_states, chain_valley_splitting, ChainModel, ChainParams,
    ChainValley,
};
pub use envelope::{solve_envelope, Envelope2D, EnvelopeOptions};
pub use observables::{dot_valley_observables, ValleyResult};
pub use phase::{extract_valley_phase, ValleyPhase, ZGrid};

/// Splittings below this are reported as degenerate, meV.
pub const DEGENERACY_FLOOR: f64 = 1e-6;
