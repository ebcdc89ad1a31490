//! Simulation and numerics for the upper-tail large deviations of the
//! one-dimensional frog model: exact frog-model simulation, Brownian
//! corridor-survival solvers, the step-profile energy functional, the
//! covering/clustering algorithms, and the variational rate-constant
//! estimator.

pub mod covering;
pub mod energy;
pub mod error;
pub mod hitting;
pub mod optim;
pub mod profile;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use profile::{PassageProfile, PerturbSign, StepProfile};
pub use sim::{
    estimate_mu, estimate_tail_global, estimate_tail_local, restricted_run, simulate_run,
    MuEstimate, SimulationRun, StepSource, TailEstimate,
};
