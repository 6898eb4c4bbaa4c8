use serde::Serialize;

use crate::aux_opt::AuxSolution;
use crate::error::{Error, Result};
use crate::prob::{total_variation, JointDist};
use crate::real::Real;
use crate::settings::validate::{validate_structure, MiCondition, ValidationReport};
use crate::settings::var::{BASE, U, V, W, W1, W2, W3, X, Y};
use crate::settings::{mi_check, SettingId};

/// Sign of an information constraint. The characterizations only decide
/// strict inequalities, so a value at zero stays undetermined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Achievable,
    NotAchievable,
    Undetermined,
}

impl Verdict {
    pub const BOUNDARY: f64 = 1e-12;

    pub fn of(value: f64) -> Self {
        if value > Self::BOUNDARY {
            Verdict::Achievable
        } else if value < -Self::BOUNDARY {
            Verdict::NotAchievable
        } else {
            Verdict::Undetermined
        }
    }
}

/// `I(X;Y) - I(U;V|X,Y)` for a strictly causal encoder with feedback.
pub fn constraint_sc_feedback<T: Real>(joint: &JointDist<T>) -> Result<T> {
    validate_structure(SettingId::ScEncFb, joint)?.into_result()?;
    Ok(joint.mutual_information(&[X], &[Y], &[])? - joint.mutual_information(&[U], &[V], &[X, Y])?)
}

/// `I(X;Y|U,V) - I(U;V)` for a strictly causal decoder with source feedback.
pub fn constraint_sd_feedback<T: Real>(joint: &JointDist<T>) -> Result<T> {
    validate_structure(SettingId::ScDecFb, joint)?.into_result()?;
    Ok(joint.mutual_information(&[X], &[Y], &[U, V])? - joint.mutual_information(&[U], &[V], &[])?)
}

/// Independence and Markov conditions that define the setting's admissible
/// set of extended distributions.
pub(crate) fn admissibility_conditions(setting: SettingId) -> Result<&'static [MiCondition]> {
    const CAUSAL_ENC: &[MiCondition] = &[
        MiCondition { label: "U independent of W", a: &[U], b: &[W], given: &[] },
        MiCondition { label: "Y - X - (U,W) Markov chain", a: &[Y], b: &[U, W], given: &[X] },
        MiCondition { label: "V - (U,Y,W) - X Markov chain", a: &[V], b: &[X], given: &[U, Y, W] },
    ];
    const SC_ENC_NOFB: &[MiCondition] = &[
        MiCondition { label: "U independent of X", a: &[U], b: &[X], given: &[] },
        MiCondition { label: "Y - X - (U,W2) Markov chain", a: &[Y], b: &[U, W2], given: &[X] },
        MiCondition { label: "V - (Y,X,W2) - U Markov chain", a: &[V], b: &[U], given: &[Y, X, W2] },
    ];
    const SC_DEC_NOFB: &[MiCondition] = &[MiCondition {
        label: "Y - X - (U,V,W1) Markov chain",
        a: &[Y],
        b: &[U, V, W1],
        given: &[X],
    }];
    const CAUSAL_DEC: &[MiCondition] = &[
        MiCondition { label: "Y - X - (U,W3) Markov chain", a: &[Y], b: &[U, W3], given: &[X] },
        MiCondition { label: "V - (Y,W3) - (U,X) Markov chain", a: &[V], b: &[U, X], given: &[Y, W3] },
    ];
    match setting {
        SettingId::CausalEncFb => Ok(CAUSAL_ENC),
        SettingId::ScEncNofb => Ok(SC_ENC_NOFB),
        SettingId::ScDecNofb => Ok(SC_DEC_NOFB),
        SettingId::CausalDecFb => Ok(CAUSAL_DEC),
        SettingId::ScEncFb | SettingId::ScDecFb => Err(Error::NoAuxiliary(setting)),
    }
}

/// The inner objective as a signed combination of joint entropies.
pub(crate) fn objective_entropy_terms(
    setting: SettingId,
) -> Result<&'static [(f64, &'static [&'static str])]> {
    match setting {
        // I(W;Y) - I(U;V|W,Y)
        SettingId::CausalEncFb => Ok(&[
            (1.0, &[W]),
            (1.0, &[Y]),
            (-1.0, &[U, W, Y]),
            (-1.0, &[V, W, Y]),
            (1.0, &[U, V, W, Y]),
        ]),
        // I(X;Y) - I(U;W2|X)
        SettingId::ScEncNofb => Ok(&[
            (2.0, &[X]),
            (1.0, &[Y]),
            (-1.0, &[X, Y]),
            (-1.0, &[U, X]),
            (-1.0, &[W2, X]),
            (1.0, &[U, W2, X]),
        ]),
        // I(W1;Y|V) - I(U;V,W1)
        SettingId::ScDecNofb => Ok(&[
            (1.0, &[Y, V]),
            (-1.0, &[W1, Y, V]),
            (-1.0, &[V]),
            (-1.0, &[U]),
            (1.0, &[U, V, W1]),
        ]),
        // I(X;Y|U,W3) - I(U;W3)
        SettingId::CausalDecFb => Ok(&[
            (1.0, &[X, U, W3]),
            (1.0, &[Y, U, W3]),
            (-1.0, &[X, Y, U, W3]),
            (-1.0, &[U]),
            (-1.0, &[W3]),
        ]),
        SettingId::ScEncFb | SettingId::ScDecFb => Err(Error::NoAuxiliary(setting)),
    }
}

pub(crate) fn evaluate_objective_unchecked<T: Real>(setting: SettingId, e: &JointDist<T>) -> Result<T> {
    match setting {
        SettingId::CausalEncFb => {
            Ok(e.mutual_information(&[W], &[Y], &[])? - e.mutual_information(&[U], &[V], &[W, Y])?)
        }
        SettingId::ScEncNofb => {
            Ok(e.mutual_information(&[X], &[Y], &[])? - e.mutual_information(&[U], &[W2], &[X])?)
        }
        SettingId::ScDecNofb => {
            Ok(e.mutual_information(&[W1], &[Y], &[V])? - e.mutual_information(&[U], &[V, W1], &[])?)
        }
        SettingId::CausalDecFb => {
            Ok(e.mutual_information(&[X], &[Y], &[U, W3])? - e.mutual_information(&[U], &[W3], &[])?)
        }
        SettingId::ScEncFb | SettingId::ScDecFb => Err(Error::NoAuxiliary(setting)),
    }
}

/// The setting's inner objective at a fixed extended distribution:
/// `I(W;Y) - I(U;V|W,Y)`, `I(X;Y) - I(U;W2|X)`, `I(W1;Y|V) - I(U;V,W1)` or
/// `I(X;Y|U,W3) - I(U;W3)`.
///
/// The distribution must satisfy the setting's independence and Markov
/// conditions; the first violated one is named in the error.
pub fn evaluate_objective<T: Real>(setting: SettingId, e: &JointDist<T>) -> Result<T> {
    let tol = T::info_tol().to_f64_lossy();
    let mut report = ValidationReport::new();
    for cond in admissibility_conditions(setting)? {
        mi_check(&mut report, e, cond, tol)?;
    }
    report.into_result()?;
    evaluate_objective_unchecked(setting, e)
}

/// Tolerance of [`check_admissible`] for exactly constructed inputs.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// Admissibility of an extended distribution for `setting` against a base
/// target: marginal consistency in total variation plus each independence or
/// Markov condition as a mutual-information residual.
pub fn check_admissible<T: Real>(setting: SettingId, e: &JointDist<T>, target: &JointDist<T>) -> ValidationReport {
    check_admissible_within(setting, e, target, ADMISSIBILITY_TOL)
}

/// [`check_admissible`] with a caller-supplied tolerance, for optimizer
/// iterates.
pub fn check_admissible_within<T: Real>(
    setting: SettingId,
    e: &JointDist<T>,
    target: &JointDist<T>,
    tol: f64,
) -> ValidationReport {
    let attempt = || -> Result<ValidationReport> {
        let mut report = ValidationReport::new();
        let base = e.marginalize(&BASE)?;
        let target = target.marginalize(&BASE)?;
        report.push("marginal consistency", total_variation(&base, &target)?.to_f64_lossy(), tol);
        for cond in admissibility_conditions(setting)? {
            mi_check(&mut report, e, cond, tol)?;
        }
        Ok(report)
    };
    attempt().unwrap_or_else(|err| {
        let mut r = ValidationReport::new();
        r.push(format!("well-formed ({err})"), f64::INFINITY, 0.0);
        r
    })
}

/// `constraint_sc_feedback(target) - best_nofb.value`: how much feedback
/// enlarges the strictly causal constraint.
pub fn feedback_gap_sc(target: &JointDist<f64>, best_nofb: &AuxSolution) -> Result<f64> {
    if best_nofb.setting != SettingId::ScEncNofb {
        return Err(Error::Domain(format!(
            "feedback gap needs a {} solution, got {}",
            SettingId::ScEncNofb,
            best_nofb.setting
        )));
    }
    Ok(constraint_sc_feedback(target)? - best_nofb.value)
}

/// Interval of admissible rates for the block-Markov scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateWindow<T = f64> {
    pub r_min: T,
    pub r_max: T,
    pub feasible: bool,
}

impl<T: Real> RateWindow<T> {
    pub fn width(&self) -> T {
        self.r_max - self.r_min
    }

    pub fn midpoint(&self) -> T {
        (self.r_min + self.r_max) * T::of(0.5)
    }
}

/// Covering bound `R >= I(U,Y;V|W) + delta` and packing bound
/// `R <= I(W,V;Y) - delta` for an extended distribution with auxiliary `W`.
pub fn rate_window<T: Real>(e: &JointDist<T>, delta: T) -> Result<RateWindow<T>> {
    if !(delta > T::zero()) {
        return Err(Error::Domain(format!("rate margin must be positive, got {delta}")));
    }
    let tol = T::info_tol().to_f64_lossy();
    let mut report = ValidationReport::new();
    for cond in admissibility_conditions(SettingId::CausalEncFb)? {
        mi_check(&mut report, e, cond, tol)?;
    }
    report.into_result()?;
    let r_min = e.mutual_information(&[U, Y], &[V], &[W])? + delta;
    let r_max = e.mutual_information(&[W, V], &[Y], &[])? - delta;
    Ok(RateWindow {
        r_min,
        r_max,
        feasible: r_min <= r_max,
    })
}
