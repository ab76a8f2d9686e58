//! Master-equation simulation of the driven, lossy qubit–resonator system
//! and extraction of relaxation and excitation rates from it.
//!
//! The protocol starts from a coherent superposition of dressed states on
//! one ladder, integrates the Lindblad equation, tracks the excited-ladder
//! population `ρ̄_ee(t)`, and fits the slope of its logarithm once the
//! resonator transient (`~5/κ`) has died out.

mod density;
mod evolve;
mod fit;
mod protocol;

pub use density::{
    initial_amplitude, initial_state, initial_state_with_amplitude, ladder_populations, DensityMatrix,
    InitialShift, INITIAL_TAIL_TOLERANCE,
};
pub use evolve::{evolve, EvolveOptions, Trajectory};
pub use fit::{extract_rate, measure_photon_number, FitModel, FitPolicy, RateFit, RateMode};
pub use protocol::{
    simulate_rate, simulation_extent, ConvergenceCheck, DriveSpec, SimulationConfig, SimulationExtent, SimulationResult,
};
