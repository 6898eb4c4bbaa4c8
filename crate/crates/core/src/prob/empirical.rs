use crate::error::{Error, Result};
use crate::prob::alphabet::Alphabet;
use crate::prob::index::strides;
use crate::prob::joint::JointDist;
use crate::prob::measures::total_variation;
use crate::real::Real;

/// Joint occurrence counts of symbol tuples along equal-length sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    vars: Vec<Alphabet>,
    counts: Vec<u64>,
    len: usize,
}

fn check_sequences(vars: &[Alphabet], sequences: &[&[usize]]) -> Result<usize> {
    if sequences.len() != vars.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} sequences for {} variables",
            sequences.len(),
            vars.len()
        )));
    }
    let n = sequences.first().map_or(0, |s| s.len());
    if n == 0 {
        return Err(Error::LengthMismatch {
            expected: 1,
            found: 0,
        });
    }
    for (a, s) in vars.iter().zip(sequences) {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: s.len(),
            });
        }
        if let Some(&bad) = s.iter().find(|&&x| x >= a.len()) {
            return Err(Error::SymbolOutOfAlphabet {
                variable: a.name().to_string(),
                index: bad,
                size: a.len(),
            });
        }
    }
    Ok(n)
}

impl EmpiricalCounts {
    /// `sequences[k]` holds symbol positions for `vars[k]`.
    pub fn tally(vars: &[Alphabet], sequences: &[&[usize]]) -> Result<Self> {
        let n = check_sequences(vars, sequences)?;
        let dims: Vec<usize> = vars.iter().map(Alphabet::len).collect();
        let s = strides(&dims);
        let mut counts = vec![0u64; dims.iter().product()];
        for i in 0..n {
            let cell: usize = sequences.iter().zip(&s).map(|(seq, st)| seq[i] * st).sum();
            counts[cell] += 1;
        }
        Ok(Self {
            vars: vars.to_vec(),
            counts,
            len: n,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Adds another tally over the same variables.
    pub fn merge(&mut self, other: &EmpiricalCounts) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::ShapeMismatch("merging tallies over different variables".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.len += other.len;
        Ok(())
    }

    pub fn to_dist<T: Real>(&self) -> JointDist<T> {
        let n = T::of_usize(self.len);
        JointDist::from_parts(
            self.vars.clone(),
            self.counts.iter().map(|&c| T::of(c as f64) / n).collect(),
        )
    }
}

/// Normalized joint type `N(tuple | sequences) / n`.
pub fn empirical_distribution<T: Real>(
    vars: &[Alphabet],
    sequences: &[&[usize]],
) -> Result<JointDist<T>> {
    Ok(EmpiricalCounts::tally(vars, sequences)?.to_dist())
}

/// Strong typicality: the joint type lies strictly within `tol` of `target`
/// in total variation. Sequences follow the target's variable order.
pub fn is_typical<T: Real>(sequences: &[&[usize]], target: &JointDist<T>, tol: T) -> Result<bool> {
    if !(tol > T::zero()) {
        return Err(Error::Domain(format!("typicality tolerance must be positive, got {tol}")));
    }
    let emp = empirical_distribution(target.variables(), sequences)?;
    Ok(total_variation(&emp, target)? < tol)
}

/// Reusable typicality test against a fixed target, for inner loops that test
/// many candidate sequences.
#[derive(Debug, Clone)]
pub struct TypicalSet<T = f64> {
    vars: Vec<Alphabet>,
    strides: Vec<usize>,
    target: Vec<T>,
    tol: T,
}

impl<T: Real> TypicalSet<T> {
    pub fn new(target: &JointDist<T>, tol: T) -> Result<Self> {
        if !(tol > T::zero()) {
            return Err(Error::Domain(format!("typicality tolerance must be positive, got {tol}")));
        }
        Ok(Self {
            vars: target.variables().to_vec(),
            strides: strides(&target.dims()),
            target: target.mass().to_vec(),
            tol,
        })
    }

    pub fn tolerance(&self) -> T {
        self.tol
    }

    /// Total variation between the joint type of `sequences` and the target.
    pub fn distance(&self, sequences: &[&[usize]]) -> Result<T> {
        let n = check_sequences(&self.vars, sequences)?;
        let mut counts = vec![0u32; self.target.len()];
        for i in 0..n {
            let cell: usize = sequences
                .iter()
                .zip(&self.strides)
                .map(|(seq, st)| seq[i] * st)
                .sum();
            counts[cell] += 1;
        }
        let inv = T::one() / T::of_usize(n);
        let l1: T = counts
            .iter()
            .zip(&self.target)
            .map(|(&c, &t)| (T::of(c as f64) * inv - t).abs())
            .sum();
        Ok(l1 * T::of(0.5))
    }

    pub fn contains(&self, sequences: &[&[usize]]) -> Result<bool> {
        Ok(self.distance(sequences)? < self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bit(n: &str) -> Alphabet {
        Alphabet::indexed(n, 2).unwrap()
    }

    #[test]
    fn single_sequence_type() {
        let d: JointDist = empirical_distribution(&[bit("U")], &[&[0, 1, 0, 1]]).unwrap();
        assert_eq!(d.mass(), &[0.5, 0.5]);
        let c: JointDist = empirical_distribution(&[bit("U"), bit("X")], &[&[1, 1, 1], &[0, 0, 0]]).unwrap();
        assert_eq!(c.mass(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn sequence_errors() {
        let r: Result<JointDist> = empirical_distribution(&[bit("U"), bit("X")], &[&[0, 1], &[0]]);
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
        let r: Result<JointDist> = empirical_distribution(&[bit("U")], &[&[0, 2]]);
        assert!(matches!(r, Err(Error::SymbolOutOfAlphabet { index: 2, .. })));
        let r: Result<JointDist> = empirical_distribution(&[bit("U")], &[&[]]);
        assert!(r.is_err());
    }

    #[test]
    fn typicality_examples() {
        let target = JointDist::<f64>::uniform(vec![bit("U"), bit("X")]).unwrap();
        let exact: [&[usize]; 2] = [&[0, 0, 1, 1], &[0, 1, 0, 1]];
        assert!(is_typical(&exact, &target, 1e-9).unwrap());
        let point: [&[usize]; 2] = [&[0, 0, 0, 0], &[0, 0, 0, 0]];
        assert!(!is_typical(&point, &target, 0.01).unwrap());
        assert!(is_typical(&exact, &target, 0.0).is_err());

        let set = TypicalSet::new(&target, 0.01).unwrap();
        assert_abs_diff_eq!(set.distance(&point).unwrap(), 0.75, epsilon = 1e-15);
        assert!(set.contains(&exact).unwrap());
    }

    #[test]
    fn counts_merge() {
        let mut a = EmpiricalCounts::tally(&[bit("U")], &[&[0, 0]]).unwrap();
        let b = EmpiricalCounts::tally(&[bit("U")], &[&[1, 1]]).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.counts(), &[2, 2]);
        assert_eq!(a.len(), 4);
    }
}
