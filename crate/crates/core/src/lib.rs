//! Purcell relaxation and drive-induced excitation of a two-level system
//! coupled to a driven, lossy resonator.
//!
//! Rates are available three ways: closed-form dressed-state expressions,
//! their perturbative series, and a full master-equation simulation with a
//! slope-based rate fit.

pub mod dressed;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod linalg;
pub mod ode;
pub mod rates;
pub mod single_excitation;

pub use error::{PurcellError, Result};
pub use hilbert::{Qubit, SpaceDescriptor, SystemParams};
