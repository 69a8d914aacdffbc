//! File formats, image metrics, factor directories and the benchmark harness
//! behind the `stpt` command.

pub mod bench;
pub mod factors;
pub mod metrics;
pub mod pgm;
pub mod tensorfile;
