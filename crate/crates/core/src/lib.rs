//! Explicit two-hidden-layer threshold networks for piecewise-constant
//! approximation on Voronoi cells.
//!
//! Given `n` training samples in `R^d`, [`build_network`] writes down every
//! weight and threshold in closed form; no optimisation is involved. The
//! resulting network evaluates to the training value of the nearest sample,
//! which [`oracle`] checks by brute force. [`analysis`] measures validation
//! errors, the gradient-based error bounds, and log-log convergence rates.
//!
//! ```
//! use voronoi_fnn::{build_network, BuildOptions, SampleSet};
//!
//! let samples = SampleSet::new(1, vec![0.0, 1.0], vec![10.0, 20.0]).unwrap();
//! let net = build_network(&samples, &BuildOptions::default()).unwrap();
//! assert_eq!(net.eval(&[0.3]).unwrap(), 10.0);
//! assert_eq!(net.first_layer_len(), 2);
//! ```

pub mod analysis;
pub mod domain;
mod error;
pub mod io;
pub mod network;
pub mod oracle;
mod samples;
pub mod testfns;

pub use analysis::{
    corollary_bound, fit_rate, run_convergence, run_target_convergence, theorem_bound, validate,
    ConvergenceConfig, ConvergenceSeries, Sampling, ValidationReport,
};
pub use domain::BoxDomain;
pub use error::{Error, ModelError, Result};
pub use network::{
    build_network, step, ActivationTrace, BuildOptions, NetworkParams, TieMode, WeightStorage,
};
pub use oracle::{check_equivalence, nearest, EquivalenceReport, NearestResult};
pub use samples::SampleSet;
pub use testfns::Target;
