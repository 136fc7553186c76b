//! Mellin transforms and pole location, front-face expansion fits, the
//! long-range log-coefficient check and tail-decay fits.

mod fit;
mod logstruct;
mod mellin;
mod poles;
mod tail;

pub use fit::{
    central_diff4, fit_front_face, verify_log_coefficient, ExpansionFit, FitOptions, LogCoefficientReport, LogConstants,
};
pub use logstruct::{detect_log_structure, predicted_entries, smooth_synthetic, LogStructureFit, LogStructureReport};
pub use mellin::{mellin, mellin_at, sigma_line, MellinCutoff, MellinSlice};
pub use poles::{aaa, locate_poles, Aaa, Pole, PoleOptions, PoleReport};
pub use tail::{fit_tail_decay, TailFit, TailOptions};
