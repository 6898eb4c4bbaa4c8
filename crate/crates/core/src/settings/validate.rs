use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{total_variation, JointDist};
use crate::real::Real;
use crate::settings::var::{U, V, X, Y};
use crate::settings::{CoordinationProblem, SettingId};

/// One measured condition: a mutual-information residual in bits or a
/// total-variation residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub(crate) fn push(&mut self, label: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check {
            label: label.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub(crate) fn new() -> Self {
        Self {
            passed: true,
            checks: Vec::new(),
        }
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn residual(&self, label: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.label == label).map(|c| c.residual)
    }

    /// First violation as an [`Error::Inadmissible`].
    pub fn into_result(self) -> Result<()> {
        match self.violations().next() {
            None => Ok(()),
            Some(c) => Err(Error::Inadmissible {
                condition: c.label.clone(),
                residual: c.residual,
            }),
        }
    }
}

/// Conditional independence `I(a; b | given) = 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MiCondition {
    pub label: &'static str,
    pub a: &'static [&'static str],
    pub b: &'static [&'static str],
    pub given: &'static [&'static str],
}

pub(crate) fn mi_check<T: Real>(
    report: &mut ValidationReport,
    joint: &JointDist<T>,
    cond: &MiCondition,
    tol: f64,
) -> Result<()> {
    let mi = joint.mutual_information(cond.a, cond.b, cond.given)?;
    report.push(cond.label, mi.to_f64_lossy().max(0.0), tol);
    Ok(())
}

pub(crate) const U_INDEP_X: MiCondition = MiCondition {
    label: "U independent of X",
    a: &[U],
    b: &[X],
    given: &[],
};

pub(crate) const CHANNEL_MARKOV: MiCondition = MiCondition {
    label: "Y - X - U Markov chain",
    a: &[Y],
    b: &[U],
    given: &[X],
};

pub(crate) const DECODER_TARGET_MARKOV: MiCondition = MiCondition {
    label: "V - (U,X) - Y Markov chain",
    a: &[V],
    b: &[Y],
    given: &[U, X],
};

/// Conditions on a base joint `(U,X,Y,V)` that follow from the setting's
/// factorization alone.
pub(crate) fn structural_conditions(setting: SettingId) -> Vec<MiCondition> {
    let mut c = vec![CHANNEL_MARKOV];
    if setting.strictly_causal_encoder() {
        c.push(U_INDEP_X);
    }
    if setting.decoder_side_target() {
        c.push(DECODER_TARGET_MARKOV);
    }
    c
}

pub(crate) fn validate_structure<T: Real>(
    setting: SettingId,
    joint: &JointDist<T>,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::new();
    let tol = T::info_tol().to_f64_lossy();
    for cond in structural_conditions(setting) {
        mi_check(&mut report, joint, &cond, tol)?;
    }
    Ok(report)
}

/// Checks that `joint` decomposes the way every achievable distribution of
/// `setting` must: source marginal, channel rows, and the setting's
/// independence and Markov conditions.
///
/// Never fails on a well-formed joint over `U, X, Y, V`; a malformed joint
/// is reported as a failed `well-formed` check.
pub fn validate_decomposition<T: Real>(
    setting: SettingId,
    problem: &CoordinationProblem<T>,
    joint: &JointDist<T>,
) -> ValidationReport {
    match try_validate(setting, problem, joint) {
        Ok(r) => r,
        Err(e) => {
            let mut r = ValidationReport::new();
            r.push(format!("well-formed ({e})"), f64::INFINITY, 0.0);
            r
        }
    }
}

fn try_validate<T: Real>(
    setting: SettingId,
    problem: &CoordinationProblem<T>,
    joint: &JointDist<T>,
) -> Result<ValidationReport> {
    let norm = T::norm_tol().to_f64_lossy().max(1e-9);
    let mut report = ValidationReport::new();

    let source = JointDist::new(problem.source.to_vars().to_vec(), problem.source.probs().to_vec())?;
    let tv = total_variation(&joint.marginalize(&[U])?, &source)?;
    report.push("source marginal", tv.to_f64_lossy(), norm);

    let induced = joint.conditional(&[Y], &[X])?;
    let gap = induced.max_row_distance(&problem.channel)?;
    report.push("channel consistency", gap.to_f64_lossy(), norm);

    let structure = validate_structure(setting, joint)?;
    report.checks.extend(structure.checks);
    report.passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}
