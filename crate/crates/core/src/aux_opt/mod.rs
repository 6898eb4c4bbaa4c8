//! Maximization of the auxiliary-variable objectives over their admissible
//! sets, plus an exhaustive grid oracle for small instances.

mod ascent;
mod family;
mod oracle;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::JointDist;
use crate::settings::{CoordinationProblem, SettingId};

pub use ascent::maximize;
pub use oracle::{brute_force_oracle, ORACLE_MAX_PARAMS, ORACLE_MAX_POINTS};

pub(crate) use family::{aux_alphabet, Family};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Size of the auxiliary alphabet; `None` uses `|U||X||Y||V| + 2`.
    pub aux_cardinality: Option<usize>,
    pub restarts: usize,
    /// Ascent sweeps over all free kernels, split across penalty stages.
    pub max_iterations: usize,
    /// Initial weight of the squared marginal mismatch; multiplied by ten at
    /// each stage.
    pub penalty_weight: f64,
    pub feasibility_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            aux_cardinality: None,
            restarts: 8,
            max_iterations: 1200,
            penalty_weight: 10.0,
            feasibility_tol: 1e-6,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn cardinality_for(&self, problem: &CoordinationProblem) -> usize {
        self.aux_cardinality.unwrap_or_else(|| default_cardinality(problem))
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.aux_cardinality == Some(0) {
            return Err(Error::Domain("auxiliary cardinality must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Domain("at least one restart is required".into()));
        }
        if !(self.feasibility_tol > 0.0) {
            return Err(Error::Domain("feasibility tolerance must be positive".into()));
        }
        if !(self.penalty_weight > 0.0) {
            return Err(Error::Domain("penalty weight must be positive".into()));
        }
        Ok(())
    }
}

/// `|U||X||Y||V| + 2`.
pub fn default_cardinality(problem: &CoordinationProblem) -> usize {
    let sizes = problem.source.row_len()
        * problem.channel.row_count()
        * problem.channel.row_len()
        * problem
            .target_kernel
            .as_ref()
            .map(|k| k.row_len())
            .unwrap_or_else(|| problem.input_policy.row_len() / problem.channel.row_count());
    sizes + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Multistart,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSolution {
    pub setting: SettingId,
    /// Over `U, X, Y, V` and the setting's auxiliary variable, in that order.
    pub extended: JointDist<f64>,
    pub value: f64,
    pub feasibility_residual: f64,
    pub method: Method,
    pub evaluations: u64,
    pub aux_cardinality: usize,
    /// Grid denominator for oracle solutions.
    pub grid: Option<usize>,
}

impl AuxSolution {
    pub(crate) fn from_family(
        fam: &Family,
        target: &JointDist<f64>,
        method: Method,
        evaluations: u64,
        grid: Option<usize>,
        tol: f64,
    ) -> Result<Self> {
        let extended = fam.joint();
        let value = crate::settings::evaluate_objective_unchecked(fam.setting, &extended)?;
        let report = crate::settings::check_admissible_within(fam.setting, &extended, target, tol);
        Ok(Self {
            setting: fam.setting,
            aux_cardinality: extended.variables()[4].len(),
            feasibility_residual: report.max_residual(),
            extended,
            value,
            method,
            evaluations,
            grid,
        })
    }
}

/// Refits the setting's factor kernels to `e` and alternately re-matches the
/// base marginal to `target`, returning a member of the factorized family.
/// The result keeps `e`'s variable order.
pub fn repair_to_admissible(setting: SettingId, e: &JointDist<f64>, target: &JointDist<f64>) -> Result<JointDist<f64>> {
    repair_within(setting, e, target, 1e-10, REPAIR_SWEEPS)
}

pub(crate) const REPAIR_SWEEPS: usize = 20_000;

pub(crate) fn repair_within(
    setting: SettingId,
    e: &JointDist<f64>,
    target: &JointDist<f64>,
    tol: f64,
    sweeps: usize,
) -> Result<JointDist<f64>> {
    let aux_name = setting.auxiliary().ok_or(Error::NoAuxiliary(setting))?;
    let aux = e.alphabet(aux_name)?.clone();
    let mut fam = Family::new(setting, target, aux)?;
    fam.fit_joint(e)?;
    fam.repair(tol, sweeps)?;
    let names = e.names();
    fam.joint().marginalize(&names)
}
