//! Exact sum-of-squares certification for the quartic forms G_F attached to
//! OT-FKM isoparametric polynomials.
//!
//! The crate is organised bottom-up:
//! - [`exactmat`]: dense rational matrices, rank, LDLᵀ with PSD witnesses
//! - [`clifford`]: Clifford systems P_0..P_m and their E matrices
//! - [`forms`]: sparse polynomials, F, G_F, Gram expansions, Cartan–Münzner checks
//! - [`sdpcert`]: the block SDP, explicit feasible B, SOS certificates and ranks
//! - [`deduction`]: scripted forced-entry derivations and contradiction witnesses
//! - [`probe`]: a floating-point Dykstra feasibility probe
//! - [`cli`]: the `fkm` command line

pub mod cli;
pub mod clifford;
pub mod deduction;
pub mod exactmat;
pub mod forms;
pub mod probe;
pub mod sdpcert;
