//! The six coding settings, their admissible sets, and the information
//! constraints evaluated on a fixed distribution.

mod evaluate;
mod problem;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use evaluate::{
    check_admissible, check_admissible_within, constraint_sc_feedback, constraint_sd_feedback, evaluate_objective,
    feedback_gap_sc, rate_window, RateWindow, Verdict, ADMISSIBILITY_TOL,
};
pub use problem::CoordinationProblem;
pub use validate::{validate_decomposition, Check, ValidationReport};

pub(crate) use evaluate::{evaluate_objective_unchecked, objective_entropy_terms};
pub(crate) use validate::mi_check;

/// Canonical variable names.
pub mod var {
    pub const U: &str = "U";
    pub const X: &str = "X";
    pub const Y: &str = "Y";
    pub const V: &str = "V";
    pub const W: &str = "W";
    pub const W1: &str = "W1";
    pub const W2: &str = "W2";
    pub const W3: &str = "W3";

    /// Order of every base joint produced by this crate.
    pub const BASE: [&str; 4] = [U, X, Y, V];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SettingId {
    /// Strictly causal encoder with channel feedback.
    ScEncFb,
    /// Causal encoder with channel feedback.
    CausalEncFb,
    /// Strictly causal encoder, no feedback.
    ScEncNofb,
    /// Strictly causal decoder, no source feedback.
    ScDecNofb,
    /// Strictly causal decoder with source feedback.
    ScDecFb,
    /// Causal decoder with source feedback.
    CausalDecFb,
}

impl SettingId {
    pub const ALL: [SettingId; 6] = [
        SettingId::ScEncFb,
        SettingId::CausalEncFb,
        SettingId::ScEncNofb,
        SettingId::ScDecNofb,
        SettingId::ScDecFb,
        SettingId::CausalDecFb,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SettingId::ScEncFb => "SC_ENC_FB",
            SettingId::CausalEncFb => "CAUSAL_ENC_FB",
            SettingId::ScEncNofb => "SC_ENC_NOFB",
            SettingId::ScDecNofb => "SC_DEC_NOFB",
            SettingId::ScDecFb => "SC_DEC_FB",
            SettingId::CausalDecFb => "CAUSAL_DEC_FB",
        }
    }

    /// Name of the auxiliary variable the setting maximizes over, if any.
    pub fn auxiliary(self) -> Option<&'static str> {
        match self {
            SettingId::ScEncFb | SettingId::ScDecFb => None,
            SettingId::CausalEncFb => Some(var::W),
            SettingId::ScEncNofb => Some(var::W2),
            SettingId::ScDecNofb => Some(var::W1),
            SettingId::CausalDecFb => Some(var::W3),
        }
    }

    /// Encoder independent of the current source symbol.
    pub fn strictly_causal_encoder(self) -> bool {
        matches!(self, SettingId::ScEncFb | SettingId::ScEncNofb)
    }

    /// Decoder-side settings whose target has `V - (U,X) - Y`.
    pub fn decoder_side_target(self) -> bool {
        matches!(self, SettingId::ScDecNofb | SettingId::ScDecFb)
    }
}

impl fmt::Display for SettingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SettingId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SettingId::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown setting `{s}`"))
    }
}
