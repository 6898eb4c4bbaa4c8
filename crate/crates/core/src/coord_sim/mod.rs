//! Monte-Carlo run of the block-Markov coordination scheme over a memoryless
//! channel with feedback.
//!
//! Message indices are 1-based throughout; index 1 is the one shared by
//! encoder and decoder before transmission starts.

mod codebook;
mod report;
mod session;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use codebook::{build_codebooks, Codebooks};
pub use report::{wilson_interval, FailureCounts, SimReport};
pub use session::{
    decoder_step, encoder_step, estimate_error_probability, run_session, simulate_channel, trace_csv,
    DecodeOutcome, SessionTrace, TypicalityTests,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Codewords over the auxiliary alphabet; inputs drawn from `Q(x|u,w)`.
    GenericW,
    /// The auxiliary variable is a copy of the channel input and the
    /// codewords are sent as they are.
    WEqualsX,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::GenericW => "generic-w",
            Scheme::WEqualsX => "w-equals-x",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    /// Block length.
    pub n: usize,
    pub blocks: usize,
    /// Rate margin in bits.
    pub delta: f64,
    /// Rate in bits per symbol; `None` takes the middle of the rate window.
    pub rate_override: Option<f64>,
    /// Typicality tolerance; `None` uses half of `coord_tol`.
    pub typ_tol: Option<f64>,
    /// Total variation threshold for a coordination error.
    pub coord_tol: f64,
    pub seed: u64,
    pub trials: usize,
    pub scheme: Scheme,
    /// Largest codebook generated. A default rate above it is lowered to
    /// `log2(max_messages) / n`.
    pub max_messages: usize,
    /// Reuse one codebook for all trials.
    pub fixed_codebook: bool,
}

pub const DEFAULT_SEED: u64 = 20_170_101;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            blocks: 10,
            delta: 0.01,
            rate_override: None,
            typ_tol: None,
            coord_tol: 0.2,
            seed: DEFAULT_SEED,
            trials: 20,
            scheme: Scheme::WEqualsX,
            max_messages: 4096,
            fixed_codebook: false,
        }
    }
}

impl SimConfig {
    pub fn typ_tol(&self) -> f64 {
        self.typ_tol.unwrap_or(self.coord_tol * 0.5)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.n == 0 {
            return bad("block length must be at least 1".into());
        }
        if self.blocks < 2 {
            return bad(format!("at least 2 blocks are required, got {}", self.blocks));
        }
        if !(self.delta > 0.0) {
            return bad(format!("rate margin must be positive, got {}", self.delta));
        }
        if !(self.coord_tol > 0.0) {
            return bad(format!("coordination tolerance must be positive, got {}", self.coord_tol));
        }
        if !(self.typ_tol() > 0.0) {
            return bad(format!("typicality tolerance must be positive, got {}", self.typ_tol()));
        }
        if let Some(r) = self.rate_override {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("rate must be a nonnegative number, got {r}"));
            }
        }
        if self.max_messages == 0 {
            return bad("codebook limit must be at least 1".into());
        }
        if self.trials == 0 {
            return Err(Error::ZeroTrials);
        }
        Ok(())
    }
}
