//! Pseudo-spectral simulation and verification toolkit for 2D Navier-Stokes
//! near Couette flow in a periodic channel with vorticity Dirichlet
//! conditions.
//!
//! The crate provides:
//!
//! * sine-Galerkin transforms, differentiation, and the `Delta_k` inverse on
//!   the channel ([`grid`], [`poisson`], [`green`]);
//! * the heat-evolved background shear ([`shear`]);
//! * dense singular-integral and commutator operators per wavenumber with
//!   their norm/symmetry audits ([`sio`]);
//! * integrating-factor RK4 evolution of the linearized per-mode system and
//!   the full nonlinear perturbation system ([`dynamics`]);
//! * the hypocoercive energy/dissipation functionals, their aggregates, and
//!   the decay-budget verifiers ([`energy`]).

pub mod checkpoint;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod field;
pub mod green;
pub mod grid;
pub mod initial;
pub mod poisson;
pub mod shear;
pub mod sio;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use dynamics::{LinearModeState, LinearSolver, NonlinearSolver, NonlinearState};
pub use energy::{
    aggregate, dissipation_k, energy_k, fit_decay_rate, verify_linear_budget,
    verify_nonlinear_bootstrap, BootstrapReport, DissipationParts, EnergyLedger, EnergySnapshot,
    LinearBudgetReport, LinearSeries, ModeEnergy,
};
pub use error::CoreError;
pub use field::{SpectralField, YRepr};
pub use grid::{ChannelGrid, SineBasis};
pub use initial::{anisotropic_norm, PerturbationPreset};
pub use poisson::{biot_savart, poisson_solve};
pub use shear::{load_shear_values, reconstruct_shear, sobolev_norm_h4, ShearPreset, ShearProfile};
pub use sio::{
    assemble_commutator, assemble_sio, operator_audit, operator_norm, CommutatorOperator,
    OperatorAuditRow, SioOperator,
};
