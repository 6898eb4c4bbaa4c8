use crate::error::{Error, Result};
use crate::prob::alphabet::Alphabet;
use crate::prob::index::{advance, flat, strides};
use crate::real::Real;

/// Conditional probability table `P(to | from)`.
///
/// Rows are indexed by the row-major flat index of the conditioning tuple and
/// columns by the flat index of the `to` tuple. A kernel with no conditioning
/// variables has exactly one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T = f64> {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    probs: Vec<T>,
    degenerate: Vec<bool>,
}

fn check_names(from: &[Alphabet], to: &[Alphabet]) -> Result<()> {
    if to.is_empty() {
        return Err(Error::ShapeMismatch("kernel has no output variable".into()));
    }
    let all: Vec<&str> = from.iter().chain(to).map(Alphabet::name).collect();
    for (i, n) in all.iter().enumerate() {
        if all[..i].contains(n) {
            return Err(Error::DuplicateVariable((*n).to_string()));
        }
    }
    Ok(())
}

impl<T: Real> Kernel<T> {
    pub fn new(from: Vec<Alphabet>, to: Vec<Alphabet>, probs: Vec<T>) -> Result<Self> {
        check_names(&from, &to)?;
        let rows: usize = from.iter().map(Alphabet::len).product();
        let cols: usize = to.iter().map(Alphabet::len).product();
        if probs.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "kernel expects {rows}x{cols} entries, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= T::zero()) || !p.is_finite() {
                return Err(Error::NegativeMass {
                    index: i,
                    value: p.to_f64_lossy(),
                });
            }
        }
        for r in 0..rows {
            let sum: T = probs[r * cols..(r + 1) * cols].iter().copied().sum();
            if (sum - T::one()).abs() > T::norm_tol() {
                return Err(Error::NotNormalized {
                    sum: sum.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            from,
            to,
            probs,
            degenerate: vec![false; rows],
        })
    }

    /// Unconditional distribution over `to`.
    pub fn marginal(to: Alphabet, probs: Vec<T>) -> Result<Self> {
        Self::new(Vec::new(), vec![to], probs)
    }

    pub fn from_rows(from: Vec<Alphabet>, to: Vec<Alphabet>, rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(from, to, rows.into_iter().flatten().collect())
    }

    /// Builds the table from `f(conditioning tuple, output tuple)`.
    pub fn from_fn(
        from: Vec<Alphabet>,
        to: Vec<Alphabet>,
        mut f: impl FnMut(&[usize], &[usize]) -> T,
    ) -> Result<Self> {
        let fd: Vec<usize> = from.iter().map(Alphabet::len).collect();
        let td: Vec<usize> = to.iter().map(Alphabet::len).collect();
        let rows: usize = fd.iter().product();
        let cols: usize = td.iter().product();
        let mut probs = Vec::with_capacity(rows * cols);
        let mut ci = vec![0; fd.len()];
        for _ in 0..rows {
            let mut oi = vec![0; td.len()];
            for _ in 0..cols {
                probs.push(f(&ci, &oi));
                advance(&mut oi, &td);
            }
            advance(&mut ci, &fd);
        }
        Self::new(from, to, probs)
    }

    /// Deterministic kernel putting all mass on `f(conditioning tuple)`.
    pub fn deterministic(
        from: Vec<Alphabet>,
        to: Alphabet,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        Self::from_fn(from, vec![to], |c, o| {
            if o[0] == f(c) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub(crate) fn from_parts(
        from: Vec<Alphabet>,
        to: Vec<Alphabet>,
        probs: Vec<T>,
        degenerate: Vec<bool>,
    ) -> Self {
        Self {
            from,
            to,
            probs,
            degenerate,
        }
    }

    pub fn from_vars(&self) -> &[Alphabet] {
        &self.from
    }

    pub fn to_vars(&self) -> &[Alphabet] {
        &self.to
    }

    pub fn row_count(&self) -> usize {
        self.degenerate.len()
    }

    pub fn row_len(&self) -> usize {
        self.to.iter().map(Alphabet::len).product()
    }

    pub fn row(&self, r: usize) -> &[T] {
        let c = self.row_len();
        &self.probs[r * c..(r + 1) * c]
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// `P(out | cond)` by symbol positions.
    pub fn prob(&self, cond: &[usize], out: &[usize]) -> T {
        let fd: Vec<usize> = self.from.iter().map(Alphabet::len).collect();
        let td: Vec<usize> = self.to.iter().map(Alphabet::len).collect();
        let r = flat(cond, &strides(&fd));
        let c = flat(out, &strides(&td));
        self.probs[r * self.row_len() + c]
    }

    /// True when the row's conditioning event had zero mass in the joint it
    /// was extracted from; such rows hold the uniform vector.
    pub fn is_degenerate(&self, r: usize) -> bool {
        self.degenerate[r]
    }

    pub fn degenerate_rows(&self) -> &[bool] {
        &self.degenerate
    }

    /// Largest total-variation distance between corresponding rows, skipping
    /// rows flagged degenerate in either kernel.
    pub fn max_row_distance(&self, other: &Kernel<T>) -> Result<T> {
        if self.from != other.from || self.to != other.to {
            return Err(Error::ShapeMismatch(
                "kernels are over different variables".into(),
            ));
        }
        let mut worst = T::zero();
        for r in 0..self.row_count() {
            if self.degenerate[r] || other.degenerate[r] {
                continue;
            }
            let d: T = self
                .row(r)
                .iter()
                .zip(other.row(r))
                .map(|(a, b)| (*a - *b).abs())
                .sum::<T>()
                * T::of(0.5);
            worst = worst.max(d);
        }
        Ok(worst)
    }
}
