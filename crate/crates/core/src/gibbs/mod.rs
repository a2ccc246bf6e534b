//! Exact finite-volume Gibbs measures by exhaustive enumeration.

pub mod density;
pub mod functional;
pub mod griffiths;
pub mod measure;

pub use density::{
    half_line_density, half_line_sensitivity, intermediate_density, DensityTable, HalfLineDensity,
    IntermediateDensity,
};
pub use functional::{
    dirichlet, dirichlet_form, entropy_functional, entropy_of_square, lsi_constant_search,
    lsi_ratio, poincare_direction, pushforward_flip_density, FlipDensity, LsiSearch,
};
pub use griffiths::{
    all_correlations, griffiths_suite, GriffithsKind, GriffithsReport, GriffithsViolation,
};
pub use measure::{boltzmann, boltzmann_matrix, boltzmann_with_limit, position_mask, ExactMeasure};

/// `sup_j sum_i <sigma_i sigma_j>` of an exact measure.
pub fn susceptibility_fv(m: &ExactMeasure) -> f64 {
    m.susceptibility()
}
