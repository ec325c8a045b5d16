//! Simulator for optical-pumping enantio-conversion in a four-level
//! chiral-molecule model with tunneling between the chiral ground states.
//!
//! The crate builds the model Hamiltonians (lab frame, interaction picture,
//! second-order effective, and reduced three-level forms), the Lindblad
//! collapse-operator set for decay and pure dephasing, and solves the master
//! equation by adaptive integration of the vectorized state or by extracting
//! the Liouvillian kernel directly. Named figure presets assemble the
//! resulting populations and enantiomeric excess into plot-ready CSV
//! datasets.
//!
//! Units: angular frequencies in rad/us, time in us. A value quoted as an
//! ordinary frequency `f` in MHz enters as `2*pi*f` rad/us.

pub mod dissipation;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod quantum;

pub use error::{Error, Result};

pub use quantum::{
    build_liouvillian, commutator, devectorize, dissipator, min_eigenvalue, vectorize,
    DensityMatrix, Liouvillian, Operator,
};

pub use model::{
    derive, frohlich_generator, hamiltonian_effective, hamiltonian_interaction, hamiltonian_lab,
    hamiltonian_reduced, matching_params, DerivedParams, ModelParams, State,
};

pub use dissipation::{collapse_operators, DecayRates};

pub use dynamics::{
    evolve, evolve_lab, evolve_to_steady, evolve_to_steady_with_cap, steady_state, Observables,
    SolverConfig, Trajectory,
};

pub use experiments::{
    enantiomeric_excess, make_initial, run_figure, sweep, Curve, Dataset, FigureId, FigureRun,
    InitialStateSpec, SweepParameter, SweepSpec,
};
