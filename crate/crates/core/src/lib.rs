pub mod bench_io;
pub mod config;
pub mod error;
pub mod landscape;
pub mod latency;
pub mod noise;
pub mod qec;
pub mod reset;
pub mod rng;
pub mod stats;
pub mod sweep;
pub mod su2;

pub use error::{Error, Result};
