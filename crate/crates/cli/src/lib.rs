//! Experiment harness for KWC-type 1D segmentation: signal generators, named experiment
//! protocols, CSV/JSON persistence and SVG plots on top of [`kwcseg_core`].

pub mod error;
pub mod experiment;
pub mod io;
pub mod plot;
pub mod run;
pub mod signal;

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentName, ExperimentSpec, RunRecord};
pub use signal::{generate_signal, SignalSpec};
