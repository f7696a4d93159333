//! Feature attribution for random-forest regressors.
//!
//! The crate trains CART random forests that keep per-node cover and mean
//! statistics, explains individual predictions with decision-path
//! attribution (TreeInterpreter style) and path-dependent Tree SHAP, and
//! evaluates explanations with rank-biased overlap, attribution variance and
//! interventional accuracy measures. A small timing harness compares the
//! cost of both methods as trees get deeper.
//!
//! ```
//! use treexplain::attribution::{shap_attribute, ti_attribute};
//! use treexplain::dataset::{synthesize, SynthConfig};
//! use treexplain::forest::{fit_forest, ForestParams};
//!
//! let data = synthesize(&SynthConfig::new(400, 2, 3, vec![1.0, 0.7, 0.4], 0.05, 7)).unwrap();
//! let params = ForestParams { n_estimators: 10, max_depth: 6, ..ForestParams::default() };
//! let forest = fit_forest(&data, &params).unwrap();
//!
//! let x = data.row(0);
//! let prediction = forest.predict(x).unwrap();
//! for attribution in [ti_attribute(&forest, x).unwrap(), shap_attribute(&forest, x).unwrap()] {
//!     assert!((attribution.total() - prediction).abs() < 1e-9);
//! }
//! ```

pub mod attribution;
pub mod bench;
pub mod cli;
pub mod dataset;
mod error;
pub mod evaluation;
pub mod forest;

pub use error::{Error, Result};

/// Seed used when neither a flag nor `TREEXPLAIN_SEED` provides one.
pub const DEFAULT_SEED: u64 = 42;
