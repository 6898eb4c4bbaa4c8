use crate::error::{Error, Result};
use crate::prob::alphabet::Alphabet;
use crate::prob::index::advance;
use crate::prob::joint::JointDist;
use crate::real::Real;

/// `H_b(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!(
            "binary entropy needs p in [0, 1], got {p}"
        )));
    }
    Ok(p.plog2p() + (T::one() - p).plog2p())
}

/// Half the L1 distance. Both tensors must share variables and alphabets in
/// the same order.
pub fn total_variation<T: Real>(p: &JointDist<T>, q: &JointDist<T>) -> Result<T> {
    if p.variables() != q.variables() {
        return Err(Error::ShapeMismatch(format!(
            "total variation between {:?} and {:?}",
            p.names(),
            q.names()
        )));
    }
    Ok(l1(p.mass(), q.mass()) * T::of(0.5))
}

pub(crate) fn l1<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).sum()
}

/// Real-valued function on a product alphabet, e.g. a cost `c(x)` or a
/// distortion `d(u, v)` lifted to `(u, x, y, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveFn<T = f64> {
    vars: Vec<Alphabet>,
    table: Vec<T>,
}

impl<T: Real> ObjectiveFn<T> {
    pub fn new(vars: Vec<Alphabet>, table: Vec<T>) -> Result<Self> {
        let cells: usize = vars.iter().map(Alphabet::len).product();
        if table.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "objective needs {cells} entries, got {}",
                table.len()
            )));
        }
        Ok(Self { vars, table })
    }

    pub fn from_fn(vars: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let dims: Vec<usize> = vars.iter().map(Alphabet::len).collect();
        let cells: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut table = Vec::with_capacity(cells);
        for _ in 0..cells {
            table.push(f(&idx));
            advance(&mut idx, &dims);
        }
        Self::new(vars, table)
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }
}

/// `E[phi]` under `joint`.
pub fn expected_objective<T: Real>(joint: &JointDist<T>, phi: &ObjectiveFn<T>) -> Result<T> {
    if joint.variables() != phi.variables() {
        return Err(Error::ShapeMismatch(
            "objective is defined on a different product alphabet".into(),
        ));
    }
    Ok(joint
        .mass()
        .iter()
        .zip(phi.table())
        .map(|(m, f)| *m * *f)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{joint_from_factors, Kernel};
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5_f64).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0_f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0_f64).unwrap(), 0.0);
        // direct evaluation of -p log p - q log q at p = 0.11
        let direct = -(0.11_f64 * 0.11_f64.log2() + 0.89 * 0.89_f64.log2());
        let h = binary_entropy(0.11_f64).unwrap();
        assert_abs_diff_eq!(h, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(h, 0.499_915_958_164_528_2, epsilon = 1e-12);
        assert!(binary_entropy(1.2_f64).is_err());
        assert!(binary_entropy(-0.1_f64).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn tv_examples() {
        let a = vec![Alphabet::indexed("A", 2).unwrap()];
        let p = JointDist::new(a.clone(), vec![0.5, 0.5]).unwrap();
        let q = JointDist::new(a.clone(), vec![0.6, 0.4]).unwrap();
        assert_abs_diff_eq!(total_variation(&p, &q).unwrap(), 0.1, epsilon = 1e-15);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        let x = JointDist::<f64>::point_mass(a.clone(), &[0]).unwrap();
        let y = JointDist::<f64>::point_mass(a, &[1]).unwrap();
        assert_eq!(total_variation(&x, &y).unwrap(), 1.0);
        let other = JointDist::<f64>::uniform(vec![Alphabet::indexed("B", 2).unwrap()]).unwrap();
        assert!(total_variation(&p, &other).is_err());
    }

    #[test]
    fn expected_objective_examples() {
        let bit = |n: &str| Alphabet::indexed(n, 2).unwrap();
        let u = Kernel::marginal(bit("U"), vec![0.5, 0.5]).unwrap();
        let v = Kernel::deterministic(vec![bit("U")], bit("V"), |c| c[0]).unwrap();
        let j = joint_from_factors(&[u, v]).unwrap();
        let one = ObjectiveFn::from_fn(j.variables().to_vec(), |_| 1.0).unwrap();
        assert_abs_diff_eq!(expected_objective(&j, &one).unwrap(), 1.0, epsilon = 1e-15);
        let hamming = ObjectiveFn::from_fn(j.variables().to_vec(), |i| (i[0] != i[1]) as u8 as f64).unwrap();
        assert_eq!(expected_objective(&j, &hamming).unwrap(), 0.0);

        let x = JointDist::<f64>::uniform(vec![bit("X")]).unwrap();
        let cost = ObjectiveFn::from_fn(vec![bit("X")], |i| i[0] as f64).unwrap();
        assert_eq!(expected_objective(&x, &cost).unwrap(), 0.5);
        assert!(expected_objective(&j, &cost).is_err());
    }
}
