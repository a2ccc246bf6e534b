//! Explicit log-Sobolev and Gaussian-concentration constants, and the suites that
//! check them on exact finite-volume measures.

pub mod constants;
pub mod diagnostics;
pub mod herbst;
pub mod verify;

pub use constants::{
    constants, gcb_constant, gcb_tail_bound, herbst_constant, lsi_bound, lsi_bound_rescaled,
    ChiSource, ConstantBundle,
};
pub use diagnostics::{
    continuity_modulus, moment_series, uniform_integrability_diag, KPolicy, ModulusRow, UiRow,
};
pub use herbst::{herbst_scan, herbst_scan_table, HerbstRow, HerbstScan, HERBST_STEP};
pub use verify::{
    gcb_check_ratio, log_mgf_centered, lsi_check_ratio, mcb_bound, table_total_oscillation,
    verify_gcb, verify_lsi, verify_mcb, verify_mcb_family, verify_mcb_table, ConcentrationReport,
    FamilySpec, Margin, ReportKind, RATIO_SLACK,
};
