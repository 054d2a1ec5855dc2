//! Seeded photocurrent synthesis, channel propagation and detection.

mod phase_space;
mod propagate;
mod synth;
mod targets;
mod trace;

pub use phase_space::{sample_amplifier, PhotonMoments};
pub use propagate::{add_white_floor, apply_detection, apply_transfer, propagate_channel};
pub use synth::{shot_reference, synth_twin_traces};
pub use targets::{build_targets, FrequencyGrid, SpectralTargets};
pub use trace::{SeedTag, Trace, TRACE_FORMAT_VERSION, TRACE_HEADER_LEN, TRACE_MAGIC};
