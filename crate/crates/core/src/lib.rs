//! Numerical toolkit for radiation fields near null infinity.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: dual metrics in normal form near the corner of null and
//!   spacelike infinity, with exact Minkowski and Kerr charts.
//! * [`hamflow`]: the rescaled Hamilton vector field of the metric symbol,
//!   bicharacteristic tracing and the linearization at the radial set.
//! * [`indexsets`]: exponent sets of polyhomogeneous expansions.
//! * [`coords`]: logarithmic coordinate change and the front-face blow-up.
//! * [`solver`]: a spherically symmetric wave solver on Minkowski and
//!   Schwarzschild, with null-slice extraction.
//! * [`asympt`]: Mellin transforms, pole location and expansion fitting.
//! * [`run`]: configuration, orchestration and persistence used by the CLI.

pub mod asympt;
pub mod coords;
pub mod error;
pub mod geometry;
pub mod hamflow;
pub mod indexsets;
pub mod jet;
pub mod numerics;
pub mod run;
pub mod solver;

pub use error::{Error, Result};
