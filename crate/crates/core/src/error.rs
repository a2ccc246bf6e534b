use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("couplings with alpha = {alpha} are not summable (need alpha > 1)")]
    NotSummable { alpha: f64 },

    #[error("volume of {sites} sites exceeds the enumeration limit of {limit}; use the sampler for larger volumes")]
    VolumeTooLarge { sites: usize, limit: usize },

    #[error("site {site} lies outside the declared window [{lo}, {hi}]")]
    SiteOutsideWindow { site: i64, lo: i64, hi: i64 },

    #[error(
        "configuration window [{got_lo}, {got_hi}] does not match volume [{want_lo}, {want_hi}]"
    )]
    WindowMismatch {
        got_lo: i64,
        got_hi: i64,
        want_lo: i64,
        want_hi: i64,
    },

    #[error("depth {depth} exceeds the available window length {available}")]
    DepthTooLarge { depth: usize, available: usize },

    #[error("intermediate index k = {k} exceeds k_N = {k_max} for N = {n}")]
    IntermediateIndexTooLarge { k: usize, k_max: usize, n: usize },

    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("kappa = {kappa} is below the maximal absolute row sum {row_sum}")]
    KappaTooSmall { kappa: f64, row_sum: f64 },

    #[error("power iteration did not converge within {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("every trial function had a vanishing Dirichlet form")]
    DegenerateFamily,

    #[error("couplings are negative at distance {distance}: the model must be ferromagnetic")]
    NotFerromagnetic { distance: usize },

    #[error(
        "condition (iii) fails: sum_i (sum_{{k>=i}} J(k))^2 diverges (partial sums exceed {threshold} by i = {witness_index:e}); the continuity modulus is undefined"
    )]
    ConditionIiiDivergent { threshold: f64, witness_index: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
