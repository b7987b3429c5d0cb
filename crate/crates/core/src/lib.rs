//! Discrete-velocity approximations of the space-homogeneous Boltzmann
//! collision operator, including a direction-decomposed evaluation that runs
//! in `O(N̄^d N^d log N)` through FFT convolutions.

pub mod collision;
pub mod error;
pub mod farey;
pub mod integrator;
pub mod kernel;
pub mod lattice;
pub mod validation;

pub use collision::{
    build_operator, dvm_classical, dvm_fast, dvm_pseudospectral, dvm_truncated, ClassicalDvm, CollisionOperator,
    CollisionOutput, Diagnostics, FastDvm, OperatorKind, PseudoSpectralDvm, TruncatedDvm,
};
pub use error::{DvmError, Result};
pub use farey::{enumerate_directions, Direction, DirectionSet};
pub use integrator::{rk2_step, run, TimeLoopConfig, TrajectoryRecord};
pub use kernel::{AlphaTables, KernelModeTable, KernelModel};
pub use lattice::{make_grid, moments, DistributionField, GridSpec, MomentReport, SpectralField};
pub use validation::{bkw, rel_l1_error, sample_bkw, ErrorReport};
