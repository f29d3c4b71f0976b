//! Exact pseudospin dynamics of the frozen gas.

pub mod basis;
pub mod correlation;
pub mod disorder;
pub mod hamiltonian;
pub mod propagate;

pub use basis::{Basis, BasisMode, BasisSpec};
pub use correlation::{estimate_blockade_radius, pair_correlation, BinnedCorrelation};
pub use disorder::{
    disorder_average, propagate_configuration, BasisChoice, DisorderResult, DisorderRun,
    EnsembleGeometry, RealizationReport,
};
pub use hamiltonian::{build_hamiltonian, HamiltonianOperator};
pub use propagate::{
    propagate, propagate_with, ExcitationTrajectory, ManyBodyState, Method, Propagation,
    PropagationOptions, SpectralPropagator,
};
