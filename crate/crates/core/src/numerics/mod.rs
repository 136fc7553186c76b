//! Small numerical building blocks shared by the physics modules.

pub mod halton;
pub mod interp;
pub mod lstsq;
pub mod ode;
pub mod quad;
