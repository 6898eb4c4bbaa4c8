use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coord_sim::{Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::prob::{JointDist, Kernel};
use crate::settings::var::{W, X};
use crate::settings::{rate_window, RateWindow};

const W_STREAM: u64 = 0;

/// One sampler per kernel row.
#[derive(Debug, Clone)]
pub(crate) struct RowSampler(Vec<WeightedIndex<f64>>);

impl RowSampler {
    pub(crate) fn new(kernel: &Kernel<f64>) -> Result<Self> {
        (0..kernel.row_count())
            .map(|r| {
                WeightedIndex::new(kernel.row(r).iter().copied())
                    .map_err(|e| Error::Domain(format!("cannot sample kernel row {r}: {e}")))
            })
            .collect::<Result<_>>()
            .map(Self)
    }

    pub(crate) fn draw(&self, row: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0[row].sample(rng)
    }
}

/// Rate and codebook size for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub(crate) struct RatePlan {
    pub rate: f64,
    pub message_count: usize,
    pub rate_capped: bool,
    pub window: RateWindow,
}

pub(crate) fn plan_rate(e: &JointDist<f64>, cfg: &SimConfig) -> Result<RatePlan> {
    let window = rate_window(e, cfg.delta)?;
    if !(window.width() > 0.0) {
        return Err(Error::RateWindowEmpty {
            r_min: window.r_min,
            r_max: window.r_max,
        });
    }
    let limit_bits = (cfg.max_messages as f64).log2();
    let n = cfg.n as f64;
    let (rate, rate_capped) = match cfg.rate_override {
        Some(r) if r * n > limit_bits + 1e-12 => {
            return Err(Error::CodebookTooLarge {
                bits: r * n,
                limit: cfg.max_messages,
            })
        }
        Some(r) => (r, false),
        None if window.midpoint() * n > limit_bits => (limit_bits / n, true),
        None => (window.midpoint(), false),
    };
    let message_count = (2f64.powf(rate * n).ceil() as usize).clamp(1, cfg.max_messages);
    Ok(RatePlan {
        rate,
        message_count,
        rate_capped,
        window,
    })
}

/// Checks that `W` is a relabeling-free copy of `X` wherever it has mass.
pub(crate) fn check_copy(e: &JointDist<f64>) -> Result<()> {
    let not_copy = || Error::Domain(format!("scheme {} needs W to be a copy of X", Scheme::WEqualsX.label()));
    let x_given_w = e.conditional(&[X], &[W])?;
    if x_given_w.row_len() != x_given_w.row_count() {
        return Err(not_copy());
    }
    for w in 0..x_given_w.row_count() {
        if !x_given_w.is_degenerate(w) && x_given_w.row(w)[w] < 1.0 - 1e-9 {
            return Err(not_copy());
        }
    }
    Ok(())
}

/// Random codebook of the block-Markov scheme. `W` words are stored; the
/// `|M|^2` words `V(m, m')` are regenerated on demand from their own
/// stream, so each one is the same every time it is requested.
#[derive(Debug, Clone)]
pub struct Codebooks {
    pub message_count: usize,
    pub rate: f64,
    pub rate_capped: bool,
    pub window: RateWindow,
    pub n: usize,
    pub generation_seed: u64,
    w_words: Vec<Vec<usize>>,
    v_given_w: RowSampler,
}

impl Codebooks {
    pub(crate) fn generate(e: &JointDist<f64>, plan: RatePlan, n: usize, seed: u64) -> Result<Self> {
        let w_marginal = e.conditional(&[W], &[])?;
        let w_sampler = RowSampler::new(&w_marginal)?;
        let v_given_w = RowSampler::new(&e.conditional(&[crate::settings::var::V], &[W])?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(W_STREAM);
        let w_words = (0..plan.message_count)
            .map(|_| (0..n).map(|_| w_sampler.draw(0, &mut rng)).collect())
            .collect();
        Ok(Self {
            message_count: plan.message_count,
            rate: plan.rate,
            rate_capped: plan.rate_capped,
            window: plan.window,
            n,
            generation_seed: seed,
            w_words,
            v_given_w,
        })
    }

    fn check_index(&self, m: usize) {
        assert!(
            (1..=self.message_count).contains(&m),
            "message index {m} outside 1..={}",
            self.message_count
        );
    }

    /// `W^n(m)`.
    pub fn w_word(&self, m: usize) -> &[usize] {
        self.check_index(m);
        &self.w_words[m - 1]
    }

    /// `V^n(m, m_next)`, drawn letterwise from `Q(v|w)` against `W^n(m)`.
    pub fn v_word(&self, m: usize, m_next: usize) -> Vec<usize> {
        self.check_index(m);
        self.check_index(m_next);
        let mut rng = ChaCha8Rng::seed_from_u64(self.generation_seed);
        rng.set_stream(1 + ((m - 1) * self.message_count + (m_next - 1)) as u64);
        self.w_words[m - 1].iter().map(|&w| self.v_given_w.draw(w, &mut rng)).collect()
    }
}

/// Codebooks for `e` generated from `cfg.seed`. Fails with
/// [`Error::RateWindowEmpty`] when the objective of `e` is at most
/// `2 * cfg.delta`.
pub fn build_codebooks(e: &JointDist<f64>, cfg: &SimConfig) -> Result<Codebooks> {
    cfg.check()?;
    if cfg.scheme == Scheme::WEqualsX {
        check_copy(e)?;
    }
    let plan = plan_rate(e, cfg)?;
    Codebooks::generate(e, plan, cfg.n, cfg.seed)
}
