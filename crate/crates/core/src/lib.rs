//! Universal Kriging surrogates with automatic trend selection, tuned by a
//! genetic algorithm plus BFGS, and an expected-improvement optimization loop.

pub mod ego;
pub mod error;
pub mod harness;
pub mod hyperopt;
pub mod kriging;
pub mod par;
pub mod poly;
pub mod seed;
pub mod trend;

pub use error::{Error, Result};
