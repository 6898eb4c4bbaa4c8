use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::prob::alphabet::Alphabet;
use crate::prob::index::{advance, projection, strides};
use crate::prob::kernel::Kernel;
use crate::real::Real;

/// Dense joint probability tensor over an ordered list of named alphabets.
///
/// Storage is row-major with the last variable varying fastest. Entropies and
/// mutual informations are in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist<T = f64> {
    vars: Vec<Alphabet>,
    mass: Vec<T>,
}

fn check_distinct(vars: &[Alphabet]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].iter().any(|w| w.name() == v.name()) {
            return Err(Error::DuplicateVariable(v.name().to_string()));
        }
    }
    Ok(())
}

/// Written as the variable list plus the flat mass in `f64`.
impl<T: Real> Serialize for JointDist<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mass: Vec<f64> = self.mass.iter().map(|p| p.to_f64_lossy()).collect();
        let mut st = serializer.serialize_struct("JointDist", 2)?;
        st.serialize_field("variables", &self.vars)?;
        st.serialize_field("mass", &mass)?;
        st.end()
    }
}

impl<T: Real> JointDist<T> {
    pub fn new(vars: Vec<Alphabet>, mass: Vec<T>) -> Result<Self> {
        check_distinct(&vars)?;
        let cells: usize = vars.iter().map(Alphabet::len).product();
        if mass.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "{} variables need {cells} cells, got {}",
                vars.len(),
                mass.len()
            )));
        }
        for (i, &m) in mass.iter().enumerate() {
            if !(m >= T::zero()) || !m.is_finite() {
                return Err(Error::NegativeMass {
                    index: i,
                    value: m.to_f64_lossy(),
                });
            }
        }
        let sum: T = mass.iter().copied().sum();
        if (sum - T::one()).abs() > T::norm_tol() {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(Self { vars, mass })
    }

    /// Builds from nonnegative weights, normalizing them to total mass one.
    pub fn from_weights(vars: Vec<Alphabet>, mut weights: Vec<T>) -> Result<Self> {
        let sum: T = weights.iter().copied().sum();
        if !(sum > T::zero()) {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::new(vars, weights)
    }

    pub fn from_fn(vars: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let dims: Vec<usize> = vars.iter().map(Alphabet::len).collect();
        let cells: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut mass = Vec::with_capacity(cells);
        for _ in 0..cells {
            mass.push(f(&idx));
            advance(&mut idx, &dims);
        }
        Self::new(vars, mass)
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Result<Self> {
        let cells: usize = vars.iter().map(Alphabet::len).product();
        Self::new(vars, vec![T::one() / T::of_usize(cells); cells])
    }

    pub fn point_mass(vars: Vec<Alphabet>, at: &[usize]) -> Result<Self> {
        let at = at.to_vec();
        Self::from_fn(vars, |i| if i == at.as_slice() { T::one() } else { T::zero() })
    }

    pub(crate) fn from_parts(vars: Vec<Alphabet>, mass: Vec<T>) -> Self {
        Self { vars, mass }
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(Alphabet::name).collect()
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vars.iter().map(Alphabet::len).collect()
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.vars[self.position(name)?])
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name() == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub(crate) fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self.position(n)?;
            if out.contains(&p) {
                return Err(Error::DuplicateVariable((*n).to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn prob(&self, idx: &[usize]) -> T {
        let s = strides(&self.dims());
        self.mass[idx.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Raw marginal masses over the variables at `positions`, in that order.
    pub(crate) fn marginal_mass(&self, positions: &[usize]) -> Vec<T> {
        let dims = self.dims();
        let size: usize = positions.iter().map(|&p| dims[p]).product();
        let mut out = vec![T::zero(); size];
        for (cell, &target) in projection(&dims, positions).iter().enumerate() {
            out[target] += self.mass[cell];
        }
        out
    }

    /// Marginal onto `keep`, with variables in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<Self> {
        let pos = self.positions(keep)?;
        let vars = pos.iter().map(|&p| self.vars[p].clone()).collect();
        Ok(Self::from_parts(vars, self.marginal_mass(&pos)))
    }

    /// Kernel of the remaining variables (in this tensor's order) given
    /// `given`. Rows whose conditioning tuple has zero mass are uniform and
    /// flagged degenerate.
    pub fn condition(&self, given: &[&str]) -> Result<Kernel<T>> {
        let gpos = self.positions(given)?;
        if gpos.len() == self.vars.len() {
            return Err(Error::ShapeMismatch(
                "conditioning on every variable leaves nothing to predict".into(),
            ));
        }
        let rest: Vec<usize> = (0..self.vars.len()).filter(|p| !gpos.contains(p)).collect();
        let order: Vec<usize> = gpos.iter().chain(&rest).copied().collect();
        let joint = self.marginal_mass(&order);
        let cols: usize = rest.iter().map(|&p| self.vars[p].len()).product();
        let rows = joint.len() / cols;
        let mut probs = joint;
        let mut degenerate = vec![false; rows];
        for r in 0..rows {
            let row = &mut probs[r * cols..(r + 1) * cols];
            let sum: T = row.iter().copied().sum();
            if sum > T::zero() {
                row.iter_mut().for_each(|p| *p /= sum);
            } else {
                row.iter_mut().for_each(|p| *p = T::one() / T::of_usize(cols));
                degenerate[r] = true;
            }
        }
        Ok(Kernel::from_parts(
            gpos.iter().map(|&p| self.vars[p].clone()).collect(),
            rest.iter().map(|&p| self.vars[p].clone()).collect(),
            probs,
            degenerate,
        ))
    }

    /// `P(to | given)` as a kernel; shorthand for marginalize + condition.
    pub fn conditional(&self, to: &[&str], given: &[&str]) -> Result<Kernel<T>> {
        let names: Vec<&str> = given.iter().chain(to).copied().collect();
        self.marginalize(&names)?.condition(given)
    }

    fn entropy_at(&self, positions: &[usize]) -> T {
        if positions.is_empty() {
            return T::zero();
        }
        self.marginal_mass(positions).into_iter().map(T::plog2p).sum()
    }

    fn disjoint_positions(&self, groups: &[&[&str]]) -> Result<Vec<Vec<usize>>> {
        let mut seen: Vec<usize> = Vec::new();
        let mut out = Vec::with_capacity(groups.len());
        for g in groups {
            let p = self.positions(g)?;
            if let Some(dup) = p.iter().find(|x| seen.contains(x)) {
                return Err(Error::DuplicateVariable(self.vars[*dup].name().to_string()));
            }
            seen.extend(&p);
            out.push(p);
        }
        Ok(out)
    }

    /// Joint entropy `H(of)` in bits, or conditional `H(of | given)`.
    pub fn entropy(&self, of: &[&str], given: &[&str]) -> Result<T> {
        let g = self.disjoint_positions(&[of, given])?;
        let all: Vec<usize> = g[0].iter().chain(&g[1]).copied().collect();
        Ok(self.entropy_at(&all) - self.entropy_at(&g[1]))
    }

    /// `I(a; b | given)` in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<T> {
        let g = self.disjoint_positions(&[a, b, given])?;
        if g[0].is_empty() || g[1].is_empty() {
            return Ok(T::zero());
        }
        let join = |xs: &[&Vec<usize>]| -> Vec<usize> { xs.iter().flat_map(|v| v.iter().copied()).collect() };
        let ag = join(&[&g[0], &g[2]]);
        let bg = join(&[&g[1], &g[2]]);
        let abg = join(&[&g[0], &g[1], &g[2]]);
        Ok(self.entropy_at(&ag) + self.entropy_at(&bg)
            - self.entropy_at(&abg)
            - self.entropy_at(&g[2]))
    }

    /// Appends a variable that is a deterministic function of each cell.
    pub fn with_function(&self, alphabet: Alphabet, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        if self.vars.iter().any(|v| v.name() == alphabet.name()) {
            return Err(Error::DuplicateVariable(alphabet.name().to_string()));
        }
        let dims = self.dims();
        let k = alphabet.len();
        let mut mass = vec![T::zero(); self.mass.len() * k];
        let mut idx = vec![0; dims.len()];
        for (cell, &m) in self.mass.iter().enumerate() {
            let w = f(&idx);
            if w >= k {
                return Err(Error::SymbolOutOfAlphabet {
                    variable: alphabet.name().to_string(),
                    index: w,
                    size: k,
                });
            }
            mass[cell * k + w] = m;
            advance(&mut idx, &dims);
        }
        let mut vars = self.vars.clone();
        vars.push(alphabet);
        Ok(Self::from_parts(vars, mass))
    }

    /// Appends `name` as an exact copy of `source`, embedded into an alphabet
    /// of `cardinality` symbols (extra symbols carry no mass).
    pub fn with_copy(&self, source: &str, name: &str, cardinality: usize) -> Result<Self> {
        let p = self.position(source)?;
        let src = &self.vars[p];
        if cardinality < src.len() {
            return Err(Error::ShapeMismatch(format!(
                "cannot embed `{source}` ({} symbols) into {cardinality}",
                src.len()
            )));
        }
        let mut symbols = src.symbols().to_vec();
        for i in src.len()..cardinality {
            symbols.push(format!("~{i}"));
        }
        self.with_function(Alphabet::new(name, symbols)?, |idx| idx[p])
    }

    /// Appends a constant variable over `cardinality` symbols (mass on symbol 0).
    pub fn with_constant(&self, name: &str, cardinality: usize) -> Result<Self> {
        self.with_function(Alphabet::indexed(name, cardinality)?, |_| 0)
    }

    /// Relabels `var` so that old symbol position `i` moves to `perm[i]`.
    pub fn permute_symbols(&self, var: &str, perm: &[usize]) -> Result<Self> {
        let p = self.position(var)?;
        let k = self.vars[p].len();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..k).collect::<Vec<_>>() {
            return Err(Error::Domain(format!("not a permutation of {k} symbols")));
        }
        let dims = self.dims();
        let s = strides(&dims);
        let mut mass = vec![T::zero(); self.mass.len()];
        let mut idx = vec![0; dims.len()];
        for &m in &self.mass {
            let mut moved = idx.clone();
            moved[p] = perm[idx[p]];
            mass[moved.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()] = m;
            advance(&mut idx, &dims);
        }
        let old = &self.vars[p];
        let mut symbols = vec![String::new(); k];
        for (i, sym) in old.symbols().iter().enumerate() {
            symbols[perm[i]] = sym.clone();
        }
        let mut vars = self.vars.clone();
        vars[p] = Alphabet::new(old.name(), symbols)?;
        Ok(Self::from_parts(vars, mass))
    }

    pub fn cast<S: Real>(&self) -> JointDist<S> {
        JointDist::from_parts(
            self.vars.clone(),
            self.mass.iter().map(|m| S::of(m.to_f64_lossy())).collect(),
        )
    }
}

/// Product distribution of a chain of kernels.
///
/// Each factor may only condition on variables produced by earlier factors;
/// the result's variables are the factors' outputs in order.
pub fn joint_from_factors<T: Real>(factors: &[Kernel<T>]) -> Result<JointDist<T>> {
    let mut vars: Vec<Alphabet> = Vec::new();
    // (conditioning positions, output positions) per factor
    let mut layout: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(factors.len());
    for k in factors {
        let mut cond = Vec::new();
        for a in k.from_vars() {
            match vars.iter().position(|v| v.name() == a.name()) {
                Some(p) if &vars[p] == a => cond.push(p),
                Some(_) => {
                    return Err(Error::VariableMismatch {
                        variable: a.name().to_string(),
                        reason: "conditioning alphabet differs from the one introduced".into(),
                    })
                }
                None => {
                    return Err(Error::VariableMismatch {
                        variable: a.name().to_string(),
                        reason: "conditioned on before being introduced".into(),
                    })
                }
            }
        }
        let mut out = Vec::new();
        for a in k.to_vars() {
            if vars.iter().any(|v| v.name() == a.name()) {
                return Err(Error::DuplicateVariable(a.name().to_string()));
            }
            out.push(vars.len());
            vars.push(a.clone());
        }
        layout.push((cond, out));
    }
    let dims: Vec<usize> = vars.iter().map(Alphabet::len).collect();
    let cells: usize = dims.iter().product();
    let row_maps: Vec<(Vec<usize>, Vec<usize>)> = layout
        .iter()
        .map(|(c, o)| (projection(&dims, c), projection(&dims, o)))
        .collect();
    let mut mass = vec![T::one(); cells];
    for (k, (rows, cols)) in factors.iter().zip(&row_maps) {
        let width = k.row_len();
        let probs = k.probs();
        for cell in 0..cells {
            mass[cell] *= probs[rows[cell] * width + cols[cell]];
        }
    }
    JointDist::new(vars, mass)
}
