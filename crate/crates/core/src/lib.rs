pub mod analytic;
pub mod distributed;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod estimator;
pub mod games;
pub mod policy;
pub mod prng;
pub mod trainer;
pub mod utility;

pub use error::{Error, Result};
