//! Experiment configs, seeded training runs, evaluation sweeps and
//! cross-seed comparison.

mod compare;
mod config;
mod run;

pub use compare::*;
pub use config::*;
pub use run::*;
