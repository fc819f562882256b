//! Experiment runner for multi-fidelity surrogate studies: m-sweeps over
//! the benchmark families, k-fold studies on external tables, and the CSV
//! and TOML files behind the `cosvr` command.

pub mod cv;
pub mod error;
pub mod io;
pub mod result;
pub mod spec;
pub mod sweep;

pub use cv::{assign_folds, run_cv, CvOptions};
pub use error::{ExpError, Result};
pub use io::{load_dataset, write_result, ExternalDataset, SampleTable};
pub use result::ExperimentResult;
pub use spec::{ExperimentSpec, ModelKind};
pub use sweep::run_sweep;
