//! Multi-fidelity support vector regression.
//!
//! The crate fuses a large set of cheap low-fidelity (LF) samples with a few
//! expensive high-fidelity (HF) samples through a least-squares SVR whose
//! kernel has four Gaussian blocks (LF-LF, LF-HF, HF-LF, HF-HF). Kernel
//! hyperparameters are tuned with a grey wolf optimizer.
//!
//! Modules:
//! * [`kernels`]: anisotropic Gaussian kernel and the block multi-fidelity kernel matrix
//! * [`lssvr`]: single-fidelity least-squares SVR (the baseline)
//! * [`cosvr`]: the multi-fidelity model, its training cost and hyperparameter search
//! * [`gwo`]: grey wolf optimizer over a box
//! * [`doe`]: Latin hypercube designs and domain scaling
//! * [`benchmarks`]: Currin / Park analytic HF-LF pairs with a correlation knob `m`
//! * [`metrics`]: R², squared Pearson correlation, repeat summaries, Welch t
//!
//! ```
//! use cosvr_core::benchmarks;
//! use cosvr_core::cosvr::{fit_cosvr, CoSvrSearch, MultiFidelityData};
//! use cosvr_core::doe::make_mf_doe;
//! use cosvr_core::gwo::GwoOptions;
//! use cosvr_core::lssvr::SampleSet;
//!
//! let currin = benchmarks::family("currin").unwrap();
//! let domain = currin.domain();
//! let (x_h, x_l) = make_mf_doe(&domain, 4, 20, 7);
//! let y_h = currin.eval_hf_rows(&x_h).unwrap();
//! let y_l = currin.eval_lf_rows(&x_l, 0.0).unwrap();
//! let data = MultiFidelityData::new(
//!     SampleSet::new(x_l, y_l, domain.clone()).unwrap(),
//!     SampleSet::new(x_h, y_h, domain).unwrap(),
//! )
//! .unwrap();
//! let search = CoSvrSearch::new(2);
//! let fit = fit_cosvr(&data, &search, &GwoOptions { population: 8, iterations: 10, seed: 1 }).unwrap();
//! let y = fit.model.predict(&[0.3, 0.6]).unwrap();
//! assert!(y.is_finite());
//! ```

pub mod benchmarks;
pub mod cosvr;
pub mod doe;
mod error;
pub mod gwo;
pub mod kernels;
mod linalg;
pub mod lssvr;
pub mod metrics;
pub mod seed;
mod transform;

pub use error::{Error, Result};

/// Objective value assigned to hyperparameters whose training fails.
pub const PENALTY: f64 = f64::MAX;
