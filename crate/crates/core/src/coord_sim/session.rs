use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coord_sim::codebook::{check_copy, plan_rate, Codebooks, RatePlan, RowSampler};
use crate::coord_sim::report::{median, wilson_interval, FailureCounts, SimReport};
use crate::coord_sim::{Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::prob::{total_variation, Alphabet, EmpiricalCounts, JointDist, Kernel, TypicalSet};
use crate::settings::var::{U, V, W, X, Y};
use crate::settings::{check_admissible, CoordinationProblem, SettingId};

const SESSION_STREAM: u64 = 0;
const SESSION_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// The three typicality tests of the scheme, against marginals of the
/// extended distribution.
#[derive(Debug, Clone)]
pub struct TypicalityTests {
    /// `(U, Y, W, V)`, checked by the encoder on the previous block.
    pub encoder: TypicalSet<f64>,
    /// `(Y, W)`, checked by the decoder on the current block.
    pub current: TypicalSet<f64>,
    /// `(Y, W, V)`, checked by the decoder on the previous block.
    pub previous: TypicalSet<f64>,
}

impl TypicalityTests {
    pub fn new(e: &JointDist<f64>, tol: f64) -> Result<Self> {
        Ok(Self {
            encoder: TypicalSet::new(&e.marginalize(&[U, Y, W, V])?, tol)?,
            current: TypicalSet::new(&e.marginalize(&[Y, W])?, tol)?,
            previous: TypicalSet::new(&e.marginalize(&[Y, W, V])?, tol)?,
        })
    }
}

/// Smallest `m` with `(u_prev, y_prev, W(m_prev), V(m_prev, m))` typical, or
/// `(1, false)` when there is none.
pub fn encoder_step(
    books: &Codebooks,
    tests: &TypicalityTests,
    m_prev: usize,
    u_prev: &[usize],
    y_prev: &[usize],
) -> Result<(usize, bool)> {
    let w = books.w_word(m_prev);
    for m in 1..=books.message_count {
        let v = books.v_word(m_prev, m);
        if tests.encoder.contains(&[u_prev, y_prev, w, &v])? {
            return Ok((m, true));
        }
    }
    Ok((1, false))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub m_hat: usize,
    /// Decoder output over the previous block, `V(m_prev, m_hat)`.
    pub v_prev: Vec<usize>,
    pub found: bool,
    /// More than one index passed both tests.
    pub ambiguous: bool,
}

/// Smallest `m` with `(y_curr, W(m))` typical and
/// `(y_prev, W(m_prev), V(m_prev, m))` typical; falls back to 1.
pub fn decoder_step(
    books: &Codebooks,
    tests: &TypicalityTests,
    m_prev: usize,
    y_prev: &[usize],
    y_curr: &[usize],
) -> Result<DecodeOutcome> {
    let w_prev = books.w_word(m_prev);
    let mut first: Option<(usize, Vec<usize>)> = None;
    for m in 1..=books.message_count {
        if !tests.current.contains(&[y_curr, books.w_word(m)])? {
            continue;
        }
        let v = books.v_word(m_prev, m);
        if !tests.previous.contains(&[y_prev, w_prev, &v])? {
            continue;
        }
        if first.is_some() {
            let (m_hat, v_prev) = first.unwrap();
            return Ok(DecodeOutcome {
                m_hat,
                v_prev,
                found: true,
                ambiguous: true,
            });
        }
        first = Some((m, v));
    }
    Ok(match first {
        Some((m_hat, v_prev)) => DecodeOutcome {
            m_hat,
            v_prev,
            found: true,
            ambiguous: false,
        },
        None => DecodeOutcome {
            m_hat: 1,
            v_prev: books.v_word(m_prev, 1),
            found: false,
            ambiguous: false,
        },
    })
}

/// Passes `x_block` through the memoryless `channel`, one draw per letter.
pub fn simulate_channel(x_block: &[usize], channel: &Kernel<f64>, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let rows = channel.row_count();
    if let Some(&bad) = x_block.iter().find(|&&x| x >= rows) {
        return Err(Error::SymbolOutOfAlphabet {
            variable: channel.from_vars().first().map_or(X, |a| a.name()).to_string(),
            index: bad,
            size: rows,
        });
    }
    let sampler = RowSampler::new(channel)?;
    Ok(x_block.iter().map(|&x| sampler.draw(x, rng)).collect())
}

/// Symbols of one session, block by block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTrace {
    /// `U, X, Y, V`.
    pub variables: Vec<Alphabet>,
    pub u_blocks: Vec<Vec<usize>>,
    pub x_blocks: Vec<Vec<usize>>,
    pub y_blocks: Vec<Vec<usize>>,
    pub v_blocks: Vec<Vec<usize>>,
    /// Encoder indices `m_1 .. m_B`.
    pub chosen_indices: Vec<usize>,
    /// Decoder estimates of the same indices.
    pub decoded_indices: Vec<usize>,
    pub encoder_failures: Vec<bool>,
    pub decoder_failures: Vec<bool>,
    pub decode_ambiguities: Vec<bool>,
}

impl SessionTrace {
    fn failures(&self) -> FailureCounts {
        let count = |v: &[bool]| v.iter().filter(|&&f| f).count() as u64;
        FailureCounts {
            encoder: count(&self.encoder_failures),
            decoder: count(&self.decoder_failures),
            decode_ambiguities: count(&self.decode_ambiguities),
        }
    }

    fn tally(&self, blocks: std::ops::Range<usize>) -> Result<Option<EmpiricalCounts>> {
        let mut acc: Option<EmpiricalCounts> = None;
        for b in blocks {
            let seqs: [&[usize]; 4] = [&self.u_blocks[b], &self.x_blocks[b], &self.y_blocks[b], &self.v_blocks[b]];
            let c = EmpiricalCounts::tally(&self.variables, &seqs)?;
            match &mut acc {
                Some(a) => a.merge(&c)?,
                None => acc = Some(c),
            }
        }
        Ok(acc)
    }
}

/// One row per position: block and position (both 1-based), the four
/// symbols, and the block's indices and failure flags.
pub fn trace_csv(trace: &SessionTrace) -> String {
    let mut s = String::from("block,position,u,x,y,v,m,m_hat,encoder_failure,decoder_failure\n");
    let sym = |k: usize, i: usize| trace.variables[k].symbols()[i].as_str();
    for b in 0..trace.u_blocks.len() {
        for i in 0..trace.u_blocks[b].len() {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                b + 1,
                i + 1,
                sym(0, trace.u_blocks[b][i]),
                sym(1, trace.x_blocks[b][i]),
                sym(2, trace.y_blocks[b][i]),
                sym(3, trace.v_blocks[b][i]),
                trace.chosen_indices[b],
                trace.decoded_indices[b],
                trace.encoder_failures[b],
                trace.decoder_failures[b],
            )
            .unwrap();
        }
    }
    s
}

/// Everything about a problem and extended distribution that does not
/// change between trials.
struct Model {
    target: JointDist<f64>,
    source: RowSampler,
    channel: Kernel<f64>,
    x_given_uw: RowSampler,
    w_size: usize,
    e: JointDist<f64>,
    tests: TypicalityTests,
    plan: RatePlan,
}

impl Model {
    fn new(problem: &CoordinationProblem<f64>, e: &JointDist<f64>, cfg: &SimConfig) -> Result<Self> {
        cfg.check()?;
        let target = problem.target()?;
        check_admissible(SettingId::CausalEncFb, e, &target).into_result()?;
        if cfg.scheme == Scheme::WEqualsX {
            check_copy(e)?;
        }
        let plan = plan_rate(e, cfg)?;
        Ok(Self {
            source: RowSampler::new(&problem.source)?,
            channel: problem.channel.clone(),
            x_given_uw: RowSampler::new(&e.conditional(&[X], &[U, W])?)?,
            w_size: e.alphabet(W)?.len(),
            tests: TypicalityTests::new(e, cfg.typ_tol())?,
            e: e.clone(),
            target,
            plan,
        })
    }

    fn session(&self, cfg: &SimConfig, books: &Codebooks, seed: u64) -> Result<SessionTrace> {
        let (n, blocks) = (cfg.n, cfg.blocks);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SESSION_SALT);
        rng.set_stream(SESSION_STREAM);
        let mut t = SessionTrace {
            variables: self.target.variables().to_vec(),
            u_blocks: Vec::with_capacity(blocks),
            x_blocks: Vec::with_capacity(blocks),
            y_blocks: Vec::with_capacity(blocks),
            v_blocks: vec![Vec::new(); blocks],
            chosen_indices: vec![1; blocks],
            decoded_indices: vec![1; blocks],
            encoder_failures: vec![false; blocks],
            decoder_failures: vec![false; blocks],
            decode_ambiguities: vec![false; blocks],
        };

        // the encoder sees the previous block's source and channel outputs only
        for b in 0..blocks {
            if b > 0 {
                let (m, found) = encoder_step(books, &self.tests, t.chosen_indices[b - 1], &t.u_blocks[b - 1], &t.y_blocks[b - 1])?;
                t.chosen_indices[b] = m;
                t.encoder_failures[b] = !found;
            }
            let u: Vec<usize> = (0..n).map(|_| self.source.draw(0, &mut rng)).collect();
            let w = books.w_word(t.chosen_indices[b]);
            let x: Vec<usize> = match cfg.scheme {
                Scheme::WEqualsX => w.to_vec(),
                Scheme::GenericW => (0..n).map(|i| self.x_given_uw.draw(u[i] * self.w_size + w[i], &mut rng)).collect(),
            };
            let y = simulate_channel(&x, &self.channel, &mut rng)?;
            t.u_blocks.push(u);
            t.x_blocks.push(x);
            t.y_blocks.push(y);
        }

        for b in 1..blocks {
            let out = decoder_step(books, &self.tests, t.decoded_indices[b - 1], &t.y_blocks[b - 1], &t.y_blocks[b])?;
            t.decoded_indices[b] = out.m_hat;
            t.decoder_failures[b] = !out.found;
            t.decode_ambiguities[b] = out.ambiguous;
            t.v_blocks[b - 1] = out.v_prev;
        }
        t.v_blocks[blocks - 1] = books.v_word(t.decoded_indices[blocks - 1], 1);
        Ok(t)
    }

    fn trial(&self, cfg: &SimConfig, t: usize, shared: Option<&Codebooks>) -> Result<(SessionTrace, Trial)> {
        let seed = cfg.seed.wrapping_add(t as u64);
        let fresh;
        let books = match shared {
            Some(b) => b,
            None => {
                fresh = Codebooks::generate(&self.e, self.plan, cfg.n, seed)?;
                &fresh
            }
        };
        let trace = self.session(cfg, books, seed)?;
        let all = trace.tally(0..cfg.blocks)?.expect("at least two blocks");
        let core = trace.tally(1..cfg.blocks - 1)?;
        let tv_all = total_variation(&all.to_dist(), &self.target)?;
        let tv_core = core.as_ref().map(|c| total_variation(&c.to_dist(), &self.target)).transpose()?;
        let trial = Trial {
            failures: trace.failures(),
            all,
            core,
            tv_all,
            tv_core,
        };
        Ok((trace, trial))
    }

    fn report(&self, cfg: &SimConfig, trials: Vec<Trial>) -> Result<SimReport> {
        let mut failure_counts = FailureCounts::default();
        let mut all: Option<EmpiricalCounts> = None;
        let mut core: Option<EmpiricalCounts> = None;
        for t in &trials {
            failure_counts.add(&t.failures);
            merge(&mut all, &t.all)?;
            if let Some(c) = &t.core {
                merge(&mut core, c)?;
            }
        }
        let tv_all: Vec<f64> = trials.iter().map(|t| t.tv_all).collect();
        let tv_core: Vec<f64> = trials.iter().filter_map(|t| t.tv_core).collect();
        let errors = tv_all.iter().filter(|&&tv| tv >= cfg.coord_tol).count();
        Ok(SimReport {
            trials: trials.len(),
            n: cfg.n,
            blocks: cfg.blocks,
            rate: self.plan.rate,
            message_count: self.plan.message_count,
            rate_capped: self.plan.rate_capped,
            rate_window: self.plan.window,
            typ_tol: cfg.typ_tol(),
            coord_tol: cfg.coord_tol,
            seed: cfg.seed,
            empirical_all: all.expect("at least one trial").to_dist(),
            empirical_core: core.map(|c| c.to_dist()),
            median_tv_all: median(&tv_all).expect("at least one trial"),
            median_tv_core: median(&tv_core),
            p_error_estimate: errors as f64 / trials.len() as f64,
            p_error_interval: wilson_interval(errors, trials.len()),
            tv_all,
            tv_core,
            failure_counts,
        })
    }
}

struct Trial {
    failures: FailureCounts,
    all: EmpiricalCounts,
    core: Option<EmpiricalCounts>,
    tv_all: f64,
    tv_core: Option<f64>,
}

fn merge(acc: &mut Option<EmpiricalCounts>, c: &EmpiricalCounts) -> Result<()> {
    match acc {
        Some(a) => a.merge(c),
        None => {
            *acc = Some(c.clone());
            Ok(())
        }
    }
}

/// One session with codebooks and randomness drawn from `cfg.seed`.
pub fn run_session(
    problem: &CoordinationProblem<f64>,
    e: &JointDist<f64>,
    cfg: &SimConfig,
) -> Result<(SessionTrace, SimReport)> {
    let model = Model::new(problem, e, cfg)?;
    let (trace, trial) = model.trial(cfg, 0, None)?;
    Ok((trace, model.report(cfg, vec![trial])?))
}

/// `cfg.trials` independent sessions with seeds `cfg.seed + t` and, unless
/// `cfg.fixed_codebook` is set, a fresh codebook per session.
pub fn estimate_error_probability(
    problem: &CoordinationProblem<f64>,
    e: &JointDist<f64>,
    cfg: &SimConfig,
) -> Result<SimReport> {
    let model = Model::new(problem, e, cfg)?;
    let shared = if cfg.fixed_codebook {
        Some(Codebooks::generate(e, model.plan, cfg.n, cfg.seed)?)
    } else {
        None
    };
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| model.trial(cfg, t, shared.as_ref()).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    model.report(cfg, trials)
}
