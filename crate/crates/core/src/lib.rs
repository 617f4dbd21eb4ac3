//! Simulation and analysis of a triatomic giant molecule coupled to a
//! bidirectional waveguide at two points.
//!
//! The molecule lives in the single-excitation sector and is described by a
//! 3×3 complex-symmetric, non-Hermitian effective Hamiltonian. On top of
//! that model the crate provides:
//!
//! * [`spectral`]: the biorthogonal spectral decomposition, mode
//!   classification and exceptional-point diagnostics;
//! * [`dynamics`]: modal and Runge–Kutta time evolution and the emitted
//!   left/right photon amplitudes;
//! * [`chirality`]: integrated current operators, chirality and the
//!   generalized-eigenvalue search for maximally chiral states;
//! * [`control`]: the decoherence-free logical qubit, its Hamiltonians, gate
//!   synthesis and rotating-wave checks;
//! * [`readout`]: state-preparation gates and the two chiral readout
//!   protocols with their error figures;
//! * [`optimize`]: parameter searches for perfect chirality and minimal
//!   readout error.
//!
//! Units: ħ = 1 and the waveguide decay rate γ₀ sets the frequency scale;
//! times are in units of 1/γ₀.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chirality;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod readout;
pub mod simplex;
pub mod spectral;

pub use chirality::{
    build_current_operators, chirality, chirality_map, integrated_currents, max_chirality,
    ChiralityExtrema, ChiralityMap, CurrentOperators,
};
pub use control::{
    effective_drive_hamiltonian, evolve_logical, logical_hamiltonian, rwa_check,
    synthesize_rotation, GateReport, LogicalHamiltonian,
};
pub use dynamics::{emission_amplitudes, evolve_modal, evolve_ode, flux_balance, Trajectory};
pub use error::{Error, Result};
pub use linalg::{Mat2, Mat3, Vec3, C64};
pub use model::{
    embed_logical, project_logical, DriveSpec, LogicalState, MolecularAmplitude, SystemParams,
};
pub use optimize::{
    derive_u_plus_angles, find_perfect_chirality, optimize_protocol2, SearchResult, UPlusAngles,
};
pub use readout::{
    local_phase_gate, logical_rotation, prepare_chiral_state, protocol1_report,
    protocol2_report, robustness_map, ProtocolReport,
};
pub use spectral::{
    analytic_spectrum, build_hamiltonian, classify_modes, exceptional_distance,
    numeric_spectrum, EffectiveHamiltonian, ModeInfo, Spectrum,
};
