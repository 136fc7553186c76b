//! Spherically symmetric forward solver on Minkowski and Schwarzschild, with
//! an independent exact Minkowski solution and extraction along curves of
//! fixed lapse approaching null infinity.

mod checkpoint;
mod evolve;
mod oracle;
mod radial;
mod slices;
mod source;

pub use checkpoint::{read_checkpoint, run_id, write_checkpoint, CheckpointHeader, FrameHeader};
pub use evolve::{solve_forward, Frame, GridSpec, ProbePoint, SolutionGrid};
pub use oracle::{exact_minkowski_oracle, minkowski_psi};
pub use radial::{reduce_radial, RadialModel, INNER_RADIUS_OVER_M};
pub use slices::{
    extract_from_frames, extract_null_slices, plan_null_slices, slices_to_csv, NullChart, NullSlice, RhoSchedule,
    SlicePlan,
};
pub use source::{bump, SourceSpec, GAUSSIAN_CUT};
