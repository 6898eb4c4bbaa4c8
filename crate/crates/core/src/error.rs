use thiserror::Error;

use crate::settings::SettingId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),

    #[error("variable mismatch on `{variable}`: {reason}")]
    VariableMismatch { variable: String, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative probability {value} at flat index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("mass sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("sequence length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("symbol index {index} is outside the alphabet of `{variable}` (size {size})")]
    SymbolOutOfAlphabet {
        variable: String,
        index: usize,
        size: usize,
    },

    #[error("value out of range: {0}")]
    Domain(String),

    #[error("inadmissible distribution: `{condition}` violated (residual {residual:.3e})")]
    Inadmissible { condition: String, residual: f64 },

    #[error("setting has no auxiliary variable: {0}")]
    NoAuxiliary(SettingId),

    #[error("setting requires an auxiliary variable: {0}")]
    NeedsAuxiliary(SettingId),

    #[error("no candidate reached the feasibility tolerance (best residual {best_residual:.3e})")]
    Infeasible { best_residual: f64 },

    #[error("oracle too large: {detail}")]
    SizeGuard { detail: String },

    #[error("repair did not converge after {sweeps} sweeps (residual {residual:.3e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("rate window empty: r_min = {r_min:.6} > r_max = {r_max:.6}")]
    RateWindowEmpty { r_min: f64, r_max: f64 },

    #[error("codebook with 2^{bits:.2} messages exceeds the limit of {limit}")]
    CodebookTooLarge { bits: f64, limit: usize },

    #[error("at least one trial is required")]
    ZeroTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
