//! Low-power wake-up receiver simulation stack.
//!
//! The chain under study: a base station embeds per-device wake indicators
//! into one OFDM symbol as a superposition of cyclically shifted Zadoff-Chu
//! sequences; a duty-cycled receiver wakes every w-cycle, synchronizes off
//! the cyclic prefix, matched-filters the suspect symbol into a power delay
//! profile, and runs a CFAR energy test per shift window. On top of the
//! PHY sit an ETSI-style packet traffic model, a closed-form semi-Markov
//! power/latency model of the resulting state machine, discrete-event
//! simulators for that state machine and a DRX baseline, and an experiment
//! harness with reproducible seeding.

pub mod experiments;
pub mod ofdm_link;
pub mod output;
pub mod seed;
pub mod semi_markov;
pub mod sysim;
pub mod traffic;
pub mod wrx;
pub mod zc_signal;

pub use ofdm_link::{FadingChannel, ImpairmentSpec, OfdmParams};
pub use semi_markov::{PowerProfile, SemiMarkovSolution, WakeupSystemParams};
pub use sysim::{DrxConfig, SimConfig, SimStats};
pub use traffic::{ArrivalTimeline, TrafficParams};
pub use wrx::{DetectionResult, DetectorConfig};
pub use zc_signal::{PdwchGroupConfig, WakeIndicators, ZcSequence};

pub type Complex = num_complex::Complex64;
