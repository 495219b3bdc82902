//! Photon-number models of non-postselected entanglement swapping with
//! linear-optical and sum-frequency-generation Bell state measurements.
//!
//! [`photon_stats`] holds the source and loss statistics everything else is
//! built on. [`lo_bsm`] and [`nlo_bsm`] give the closed-form fidelities of the
//! two measurement schemes, [`sfg_device`] the SFG probability of cavities and
//! waveguides, and [`rates`] the swapping rates. [`oracle`] and [`fock_sim`]
//! check the closed forms by brute force.

// `!(x >= 0.0)` is how parameter checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fock_sim;
pub mod lo_bsm;
pub mod nlo_bsm;
pub mod numfmt;
pub mod oracle;
pub mod photon_stats;
pub mod presets;
pub mod rates;
pub mod sfg_device;
pub mod sweep;

pub use config::Config;
pub use error::{Error, Result};
pub use nlo_bsm::ValidityWarning;
pub use oracle::{OracleConfig, OracleEstimate, OracleMode};
pub use photon_stats::{ChannelParams, SourceParams, SwapScenario};
pub use presets::{find_preset, list_presets, Preset};
pub use sfg_device::{CavityParams, WaveguideParams};
pub use sweep::{SweepSpec, SweepTable};
