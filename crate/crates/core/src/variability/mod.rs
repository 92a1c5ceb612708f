//! Dot-grid pipeline, distributions and voltage-offset deviation.
//!
//! The VOD of a parameter x over a set of dots is the spread of the gate
//! offsets that bring every dot to the ensemble mean,
//! `std((x − ⟨x⟩)/(dx/dV))`. Tunabilities follow the chain rule through the
//! vertical field and the lateral dot position.

mod gradients;
mod grid;
mod report;
mod vod;

pub use gradients::{finite_diff_gradients, FiniteDiffDeltas, Observation, ParamGradients};
pub use grid::{run_grid, DotGridSpec, DotObservables, GateOffset, GridOptions};
pub use report::{
    build_report, write_dots_csv, write_report, ExchangeInput, ParameterSummary, PhaseQuartiles,
    ReferenceVod, VariabilityReport, VodTable, REPORT_SCHEMA,
};
pub use vod::{exchange_vod, tunability_chain, vod, Tunability, TunabilityInput};
