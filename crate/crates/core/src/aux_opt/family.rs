//! Factorized parameterization of each admissible set.
//!
//! An extended distribution is the product of a chain of kernels. Source and
//! channel factors (and, for some settings, a factor copied from the target)
//! are pinned; the rest are free. Every cell of the extended tensor knows
//! which entry of each factor it multiplies, so the product, its marginals
//! and the kernel gradients are plain index walks.

use crate::error::{Error, Result};
use crate::prob::{projection, Alphabet, JointDist};
use crate::settings::var::{BASE, U, V, W, W1, W2, W3, X, Y};
use crate::settings::{objective_entropy_terms, SettingId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Pinned,
    Free,
}

struct Layout {
    from: &'static [&'static str],
    to: &'static [&'static str],
    role: Role,
}

const fn free(from: &'static [&'static str], to: &'static [&'static str]) -> Layout {
    Layout { from, to, role: Role::Free }
}

const fn pinned(from: &'static [&'static str], to: &'static [&'static str]) -> Layout {
    Layout { from, to, role: Role::Pinned }
}

fn layout(setting: SettingId) -> Result<&'static [Layout]> {
    const CAUSAL_ENC: &[Layout] = &[
        pinned(&[], &[U]),
        free(&[], &[W]),
        free(&[U, W], &[X]),
        pinned(&[X], &[Y]),
        free(&[U, Y, W], &[V]),
    ];
    const SC_ENC_NOFB: &[Layout] = &[
        pinned(&[], &[U]),
        pinned(&[], &[X]),
        free(&[U, X], &[W2]),
        pinned(&[X], &[Y]),
        free(&[Y, X, W2], &[V]),
    ];
    const SC_DEC_NOFB: &[Layout] = &[
        pinned(&[], &[U]),
        pinned(&[U], &[X, V]),
        free(&[U, X, V], &[W1]),
        pinned(&[X], &[Y]),
    ];
    const CAUSAL_DEC: &[Layout] = &[
        pinned(&[], &[U]),
        free(&[U], &[X, W3]),
        pinned(&[X], &[Y]),
        free(&[Y, W3], &[V]),
    ];
    match setting {
        SettingId::CausalEncFb => Ok(CAUSAL_ENC),
        SettingId::ScEncNofb => Ok(SC_ENC_NOFB),
        SettingId::ScDecNofb => Ok(SC_DEC_NOFB),
        SettingId::CausalDecFb => Ok(CAUSAL_DEC),
        SettingId::ScEncFb | SettingId::ScDecFb => Err(Error::NoAuxiliary(setting)),
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub free: bool,
    pub rows: usize,
    pub cols: usize,
    pub probs: Vec<f64>,
    /// Cell of the extended tensor to `row * cols + col`.
    pub index: Vec<usize>,
}

impl Factor {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.probs[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.probs[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Family {
    pub setting: SettingId,
    pub vars: Vec<Alphabet>,
    pub factors: Vec<Factor>,
    /// Target in `U, X, Y, V` order.
    pub target: Vec<f64>,
    base_index: Vec<usize>,
    terms: Vec<Term>,
}

#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    size: usize,
    index: Vec<usize>,
}

pub(crate) fn aux_alphabet(setting: SettingId, cardinality: usize) -> Result<Alphabet> {
    let name = setting.auxiliary().ok_or(Error::NoAuxiliary(setting))?;
    Alphabet::indexed(name, cardinality)
}

impl Family {
    /// Family for `setting` around a base target; free factors start uniform.
    pub fn new(setting: SettingId, target: &JointDist<f64>, aux: Alphabet) -> Result<Self> {
        let target = target.marginalize(&BASE)?;
        let mut pool: Vec<Alphabet> = target.variables().to_vec();
        pool.push(aux);
        let lay = layout(setting)?;

        let mut vars: Vec<Alphabet> = Vec::new();
        for l in lay {
            for name in l.to {
                vars.push(pool.iter().find(|a| a.name() == *name).unwrap().clone());
            }
        }
        let dims: Vec<usize> = vars.iter().map(Alphabet::len).collect();
        let pos = |name: &str| vars.iter().position(|a| a.name() == name).unwrap();

        let mut factors = Vec::with_capacity(lay.len());
        for l in lay {
            let from: Vec<usize> = l.from.iter().map(|n| pos(n)).collect();
            let to: Vec<usize> = l.to.iter().map(|n| pos(n)).collect();
            let rows: usize = from.iter().map(|&p| dims[p]).product();
            let cols: usize = to.iter().map(|&p| dims[p]).product();
            let keep: Vec<usize> = from.iter().chain(&to).copied().collect();
            let index = projection(&dims, &keep);
            let probs = match l.role {
                Role::Free => vec![1.0 / cols as f64; rows * cols],
                Role::Pinned => target.conditional(l.to, l.from)?.probs().to_vec(),
            };
            factors.push(Factor {
                free: l.role == Role::Free,
                rows,
                cols,
                probs,
                index,
            });
        }

        let base_pos: Vec<usize> = BASE.iter().map(|n| pos(n)).collect();
        let base_index = projection(&dims, &base_pos);
        let terms = objective_entropy_terms(setting)?
            .iter()
            .map(|(coef, names)| {
                let p: Vec<usize> = names.iter().map(|n| pos(n)).collect();
                Term {
                    coef: *coef,
                    size: p.iter().map(|&i| dims[i]).product(),
                    index: projection(&dims, &p),
                }
            })
            .collect();

        Ok(Self {
            setting,
            vars,
            factors,
            target: target.mass().to_vec(),
            base_index,
            terms,
        })
    }

    pub fn cells(&self) -> usize {
        self.base_index.len()
    }

    pub fn free_factors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.factors.len()).filter(|&f| self.factors[f].free)
    }

    pub fn aux_name(&self) -> &'static str {
        self.setting.auxiliary().unwrap()
    }

    pub fn mass(&self) -> Vec<f64> {
        let mut out = vec![1.0; self.cells()];
        for f in &self.factors {
            for (m, &i) in out.iter_mut().zip(&f.index) {
                *m *= f.probs[i];
            }
        }
        out
    }

    pub fn base_marginal(&self, mass: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.target.len()];
        for (&m, &b) in mass.iter().zip(&self.base_index) {
            out[b] += m;
        }
        out
    }

    /// Total-variation distance of the base marginal from the target.
    pub fn residual(&self, mass: &[f64]) -> f64 {
        let marg = self.base_marginal(mass);
        0.5 * marg.iter().zip(&self.target).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn objective(&self, mass: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut m = vec![0.0; t.size];
                for (&x, &i) in mass.iter().zip(&t.index) {
                    m[i] += x;
                }
                t.coef * m.iter().map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 }).sum::<f64>()
            })
            .sum()
    }

    /// Objective minus `lambda` times the squared distance of the base
    /// marginal from the target.
    pub fn penalized(&self, mass: &[f64], lambda: f64) -> f64 {
        let marg = self.base_marginal(mass);
        let pen: f64 = marg.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).sum();
        self.objective(mass) - lambda * pen
    }

    /// Gradient of [`Family::penalized`] with respect to each cell.
    pub fn cell_gradient(&self, mass: &[f64], lambda: f64) -> Vec<f64> {
        const FLOOR: f64 = 1e-12;
        let inv_ln2 = std::f64::consts::LOG2_E;
        let mut g = vec![0.0; mass.len()];
        for t in &self.terms {
            let mut m = vec![0.0; t.size];
            for (&x, &i) in mass.iter().zip(&t.index) {
                m[i] += x;
            }
            let d: Vec<f64> = m.iter().map(|&p| -t.coef * (p.max(FLOOR).log2() + inv_ln2)).collect();
            for (gc, &i) in g.iter_mut().zip(&t.index) {
                *gc += d[i];
            }
        }
        if lambda > 0.0 {
            let marg = self.base_marginal(mass);
            for (gc, &b) in g.iter_mut().zip(&self.base_index) {
                *gc -= 2.0 * lambda * (marg[b] - self.target[b]);
            }
        }
        g
    }

    /// Chain rule from a cell gradient to the entries of factor `f`.
    pub fn factor_gradient(&self, cell_grad: &[f64], f: usize) -> Vec<f64> {
        let mut others = vec![1.0; self.cells()];
        for (k, fac) in self.factors.iter().enumerate() {
            if k == f {
                continue;
            }
            for (o, &i) in others.iter_mut().zip(&fac.index) {
                *o *= fac.probs[i];
            }
        }
        let fac = &self.factors[f];
        let mut out = vec![0.0; fac.probs.len()];
        for ((&g, &o), &i) in cell_grad.iter().zip(&others).zip(&fac.index) {
            out[i] += g * o;
        }
        out
    }

    /// Re-estimates every free factor from `mass` (an extended tensor in this
    /// family's variable order). Rows without mass become uniform.
    pub fn fit_free(&mut self, mass: &[f64]) {
        for fac in self.factors.iter_mut().filter(|f| f.free) {
            let mut acc = vec![0.0; fac.probs.len()];
            for (&m, &i) in mass.iter().zip(&fac.index) {
                acc[i] += m;
            }
            for r in 0..fac.rows {
                let row = &acc[r * fac.cols..(r + 1) * fac.cols];
                let s: f64 = row.iter().sum();
                let dst = fac.row_mut(r);
                if s > 0.0 {
                    dst.iter_mut().zip(row).for_each(|(d, &a)| *d = a / s);
                } else {
                    dst.iter_mut().for_each(|d| *d = 1.0 / row.len() as f64);
                }
            }
        }
    }

    /// Loads the free factors from an extended distribution over the same
    /// variables (any order).
    pub fn fit_joint(&mut self, e: &JointDist<f64>) -> Result<()> {
        let names: Vec<&str> = self.vars.iter().map(Alphabet::name).collect();
        let ordered = e.marginalize(&names)?;
        if ordered.dims() != self.vars.iter().map(Alphabet::len).collect::<Vec<_>>() {
            return Err(Error::VariableMismatch {
                variable: self.aux_name().to_string(),
                reason: "extended distribution alphabets differ from the family".into(),
            });
        }
        self.fit_free(ordered.mass());
        Ok(())
    }

    /// Alternates matching the base marginal to the target with refitting
    /// the free factors, until the residual drops to `tol`.
    ///
    /// Returns the final residual or [`Error::NonConvergence`].
    pub fn repair(&mut self, tol: f64, max_sweeps: usize) -> Result<f64> {
        let mut mass = self.mass();
        let mut res = self.residual(&mass);
        let mut sweeps = 0;
        while res > tol {
            if sweeps == max_sweeps {
                return Err(Error::NonConvergence { sweeps, residual: res });
            }
            let marg = self.base_marginal(&mass);
            let aux_per_base = self.cells() / self.target.len();
            let mut lifted = vec![0.0; mass.len()];
            for (c, (&m, &b)) in mass.iter().zip(&self.base_index).enumerate() {
                lifted[c] = if marg[b] > 0.0 {
                    self.target[b] * m / marg[b]
                } else {
                    self.target[b] / aux_per_base as f64
                };
            }
            self.fit_free(&lifted);
            mass = self.mass();
            res = self.residual(&mass);
            sweeps += 1;
        }
        Ok(res)
    }

    /// Extended tensor over `U, X, Y, V` followed by the auxiliary variable.
    pub fn joint(&self) -> JointDist<f64> {
        let raw = JointDist::from_parts(self.vars.clone(), self.mass());
        let mut order: Vec<&str> = BASE.to_vec();
        order.push(self.aux_name());
        raw.marginalize(&order).unwrap()
    }
}
