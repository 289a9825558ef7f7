//! Random streams, accumulators, intervals, KS distances and checkpoints.

mod accum;
mod binomial;
pub mod checkpoint;
mod interval;
mod ks;
mod rng;

pub use accum::{Accumulator, ExactSum, Reservoir};
pub use checkpoint::{Checkpoint, ResumableRun, RunStatus, CHECKPOINT_VERSION};
pub use interval::{normal_quantile, wilson_interval};
pub use ks::{ks_distance, ks_distance_with_left};
pub use rng::{philox4x32, Stream, StreamKey};
