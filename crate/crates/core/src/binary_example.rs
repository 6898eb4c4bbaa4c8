//! Binary uniform source over a binary symmetric channel with an eight-symbol
//! decoder output.
//!
//! The target puts mass `1 - alpha` on the output symbol `v = 1 + 4u + 2x + y`
//! matched to the triple and `alpha / 7` on each of the other seven. The
//! channel input is uniform and independent of the source.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::prob::{binary_entropy, Alphabet, Kernel};
use crate::real::Real;
use crate::settings::var::{U, V, X, Y};
use crate::settings::{CoordinationProblem, SettingId};

/// Largest coordination parameter: every kernel row is uniform.
pub const ALPHA_MAX: f64 = 7.0 / 8.0;
/// Tolerance of the root searches.
pub const ROOT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleParams<T = f64> {
    pub alpha: T,
    /// Crossover probability of the channel.
    pub noise: T,
}

impl<T: Real> ExampleParams<T> {
    pub fn new(alpha: T, noise: T) -> Result<Self> {
        let p = Self { alpha, noise };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_noise(self.noise)
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha >= T::zero() && alpha <= T::of(ALPHA_MAX)) {
        return Err(Error::Domain(format!("alpha must lie in [0, 7/8], got {alpha}")));
    }
    Ok(())
}

fn check_noise<T: Real>(noise: T) -> Result<()> {
    if !(noise >= T::zero() && noise <= T::of(0.5)) {
        return Err(Error::Domain(format!("channel noise must lie in [0, 0.5], got {noise}")));
    }
    Ok(())
}

/// Output symbol (0-based position) matched to `(u, x, y)`.
pub fn matched_symbol(u: usize, x: usize, y: usize) -> usize {
    4 * u + 2 * x + y
}

fn bits(name: &str) -> Alphabet {
    Alphabet::new(name, ["0", "1"]).unwrap()
}

pub fn output_alphabet() -> Alphabet {
    Alphabet::new(V, (1..=8).map(|v| v.to_string())).unwrap()
}

/// Source, channel, input policy and target kernel of the example, under
/// the strictly causal encoder with feedback.
pub fn make_target<T: Real>(params: ExampleParams<T>) -> Result<CoordinationProblem<T>> {
    params.check()?;
    let half = T::of(0.5);
    let source = Kernel::marginal(bits(U), vec![half, half])?;
    let input = Kernel::marginal(bits(X), vec![half, half])?;
    let eps = params.noise;
    let channel = Kernel::from_fn(vec![bits(X)], vec![bits(Y)], |c, o| {
        if c[0] == o[0] {
            T::one() - eps
        } else {
            eps
        }
    })?;
    let a = params.alpha;
    let kernel = Kernel::from_fn(vec![bits(U), bits(X), bits(Y)], vec![output_alphabet()], |c, o| {
        if o[0] == matched_symbol(c[0], c[1], c[2]) {
            T::one() - a
        } else {
            a / T::of(7.0)
        }
    })?;
    CoordinationProblem::new(SettingId::ScEncFb, source, channel, input, Some(kernel))
}

/// `H_b(a) - H_b(e) - H_b(6a/7) + a (log2 7 - (6/7) log2 3)`.
pub fn constraint_closed_form<T: Real>(params: ExampleParams<T>) -> Result<T> {
    params.check()?;
    let a = params.alpha;
    let seven = T::of(7.0);
    let six_sevenths = T::of(6.0) / seven;
    Ok(binary_entropy(a)? - binary_entropy(params.noise)? - binary_entropy(six_sevenths * a)?
        + a * (seven.log2() - six_sevenths * T::of(3.0).log2()))
}

/// `H_b(a) - H_b(e)`: the same target under lossy source-channel coding.
pub fn lossy_constraint<T: Real>(params: ExampleParams<T>) -> Result<T> {
    params.check()?;
    Ok(binary_entropy(params.alpha)? - binary_entropy(params.noise)?)
}

/// Bisection on a bracket with `f(lo) < 0 <= f(hi)`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    while hi - lo > ROOT_TOL * 0.5 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const SCAN: usize = 1000;
/// Values this close to zero count as the boundary, not as positive.
const ZERO_BAND: f64 = 1e-12;

/// Smallest root of the closed-form constraint in `alpha`, or `7/8` when it
/// never turns positive.
pub fn alpha_star(noise: f64) -> Result<f64> {
    check_noise(noise)?;
    let f = |a: f64| constraint_closed_form(ExampleParams { alpha: a, noise }).unwrap();
    if f(0.0) >= 0.0 {
        return Ok(0.0);
    }
    let mut prev = 0.0;
    for i in 1..=SCAN {
        let a = ALPHA_MAX * i as f64 / SCAN as f64;
        if f(a) > ZERO_BAND {
            return Ok(bisect(prev, a, f));
        }
        prev = a;
    }
    Ok(ALPHA_MAX)
}

/// Smallest root of the lossy constraint in `alpha` on `[0, 1/2]`.
pub fn lossy_alpha_star(noise: f64) -> Result<f64> {
    check_noise(noise)?;
    let f = |a: f64| lossy_constraint(ExampleParams { alpha: a, noise }).unwrap();
    if f(0.0) >= 0.0 {
        return Ok(0.0);
    }
    Ok(bisect(0.0, 0.5, f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub alpha: f64,
    pub coord_constraint: f64,
    pub lossy_constraint: f64,
}

/// Both constraints on `grid` equally spaced values of `alpha` from 0 to 7/8.
pub fn emit_curves(noise: f64, grid: usize) -> Result<Vec<CurveRow>> {
    check_noise(noise)?;
    if grid < 2 {
        return Err(Error::Domain(format!("grid must have at least 2 points, got {grid}")));
    }
    (0..grid)
        .map(|i| {
            let alpha = if i + 1 == grid {
                ALPHA_MAX
            } else {
                ALPHA_MAX * i as f64 / (grid - 1) as f64
            };
            let p = ExampleParams { alpha, noise };
            Ok(CurveRow {
                alpha,
                coord_constraint: constraint_closed_form(p)?,
                lossy_constraint: lossy_constraint(p)?,
            })
        })
        .collect()
}

/// `alpha_star` on `grid` equally spaced noise levels from 0 to 1/2.
pub fn alpha_star_sweep(grid: usize) -> Result<Vec<(f64, f64)>> {
    if grid < 2 {
        return Err(Error::Domain(format!("grid must have at least 2 points, got {grid}")));
    }
    (0..grid)
        .map(|i| {
            let eps = if i + 1 == grid { 0.5 } else { 0.5 * i as f64 / (grid - 1) as f64 };
            Ok((eps, alpha_star(eps)?))
        })
        .collect()
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("alpha,coord_constraint,lossy_constraint\n");
    for r in rows {
        writeln!(s, "{},{},{}", r.alpha, r.coord_constraint, r.lossy_constraint).unwrap();
    }
    s
}

pub fn sweep_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("epsilon,alpha_star\n");
    for (e, a) in rows {
        writeln!(s, "{e},{a}").unwrap();
    }
    s
}
