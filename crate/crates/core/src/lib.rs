//! Numerical laboratory for Hartree ground states in a symmetric double well.
//!
//! The crate discretizes the problem on a uniform one-dimensional grid, finds
//! the nonlinear ground state by a damped self-consistent iteration, resolves
//! the low spectrum of the frozen mean-field Hamiltonian by parity, and
//! measures tunneling quantities along sweeps of the well separation.

pub mod agmon;
pub mod config;
pub mod error;
pub mod harness;
pub mod hartree;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod quasimodes;
pub mod spectrum;

pub use agmon::{agmon_a, AgmonGeometry, EnvelopeReport};
pub use config::{parse_config, parse_config_over, RunConfig};
pub use error::{Error, Result};
pub use harness::{run_all, run_sweep, SlopeFit, SweepRecord, SweepTable};
pub use hartree::{HartreeSolution, Mass, ScfOptions};
pub use model::{Grid, GridField, GridOptions, InteractionSpec, PotentialSpec, Problem, Well};
pub use operators::{Boundary, DiscreteHamiltonian, Parity, Side};
pub use spectrum::{EigenMethod, EigenOptions, EigenPair, SpectralSummary, SummaryMethod};
