//! Brute-force reference computations for testing.
//!
//! Nothing here shares code with `trelkit-core`: inputs are plain strings,
//! integers and floats, and every function takes the most direct (usually
//! quadratic or exponential) route to its answer.

pub mod agreement;
pub mod measures;
pub mod pooling;
pub mod ranking;
pub mod stats;
