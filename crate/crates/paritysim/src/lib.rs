//! Simulation and analysis toolkit for a continuous two-qubit parity
//! measurement in a closed-loop cavity network.
//!
//! A coherent probe enters a loop containing two atom-cavity systems; the
//! conditional phase shifts picked up at each cavity interfere over repeated
//! round trips, and homodyne detection of the output distinguishes the odd
//! from the even two-qubit parity subspace. The crate computes the
//! conditional steady-state field amplitudes, the decoherence budget per
//! unit of measurement information, the loop reflectivity that minimizes it,
//! transient field dynamics, stochastic homodyne records, and a truncated
//! Fock-space master-equation cross-check of the underlying light-atom
//! model.

pub mod decoherence;
pub mod error;
pub mod homodyne;
pub mod lindblad;
pub mod optimizer;
pub mod params;
pub mod steady_state;
pub mod transient;

pub use error::{Error, Result};
pub use params::{
    check_weak_driving, derived_params, Backend, CavityDetuning, CavityQubitParams, LoopParams,
    SystemConfig, ValidityReport,
};
pub use steady_state::{
    conditional_cavity_photon_number, solve_loop, ConditionalAmplitudes, NetworkModel,
};
