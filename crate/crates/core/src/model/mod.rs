//! Couplings, configurations, interactions and coupling matrices.

pub mod boundary;
pub mod config;
pub mod coupling;
pub mod hamiltonian;
pub mod local;
pub mod mask;
pub mod matrix;
pub mod summability;

pub use boundary::BoundaryCondition;
pub use config::{SpinConfig, Window, DEFAULT_ENUMERATION_LIMIT, MAX_PACKED_SITES};
pub use coupling::{CouplingFamily, CouplingKind, TailRule};
pub use hamiltonian::{hamiltonian, potential_phi, Energy, EnergyKernel};
pub use local::LocalFunction;
pub use mask::{
    cross_pair_at, cross_pair_index, enumerate_cross_pairs, k_n, CrossPair, InteractionMask,
    MaskMode,
};
pub use matrix::{check_bd_conditions, coupling_matrix, rescale_bd, BdReport, DenseMatrix};
pub use summability::{
    suac_norm, summability_report, SeriesValue, SquaredTailSeries, SummabilityReport,
};
