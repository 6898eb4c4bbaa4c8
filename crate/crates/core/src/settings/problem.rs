use crate::error::{Error, Result};
use crate::prob::{joint_from_factors, Alphabet, JointDist, Kernel};
use crate::real::Real;
use crate::settings::{var, SettingId};

/// Source, channel and target factors for one coding setting.
///
/// The target joint is `source ⊗ input_policy ⊗ channel ⊗ target_kernel`,
/// where the input policy is `Q(x)`, `Q(x|u)` or `Q(x,v|u)` (the last one
/// already fixes `V`, so no target kernel is given).
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationProblem<T = f64> {
    pub setting: SettingId,
    pub source: Kernel<T>,
    pub channel: Kernel<T>,
    pub input_policy: Kernel<T>,
    pub target_kernel: Option<Kernel<T>>,
}

fn names(vars: &[Alphabet]) -> Vec<&str> {
    vars.iter().map(Alphabet::name).collect()
}

impl<T: Real> CoordinationProblem<T> {
    pub fn new(
        setting: SettingId,
        source: Kernel<T>,
        channel: Kernel<T>,
        input_policy: Kernel<T>,
        target_kernel: Option<Kernel<T>>,
    ) -> Result<Self> {
        let mismatch = |what: &str| Error::VariableMismatch {
            variable: what.to_string(),
            reason: "unexpected factor shape".into(),
        };
        if !source.from_vars().is_empty() || names(source.to_vars()) != [var::U] {
            return Err(mismatch("source"));
        }
        if names(channel.from_vars()) != [var::X] || names(channel.to_vars()) != [var::Y] {
            return Err(mismatch("channel"));
        }
        let from = names(input_policy.from_vars());
        let to = names(input_policy.to_vars());
        let joint_policy = to == [var::X, var::V];
        if !(from.is_empty() || from == [var::U]) || !(to == [var::X] || joint_policy) {
            return Err(mismatch("input_policy"));
        }
        match (&target_kernel, joint_policy) {
            (Some(_), true) | (None, false) => return Err(mismatch("target_kernel")),
            (Some(k), false) if names(k.to_vars()) != [var::V] => {
                return Err(mismatch("target_kernel"))
            }
            _ => {}
        }
        let problem = Self {
            setting,
            source,
            channel,
            input_policy,
            target_kernel,
        };
        problem.target()?;
        Ok(problem)
    }

    pub fn with_setting(&self, setting: SettingId) -> Self {
        Self {
            setting,
            ..self.clone()
        }
    }

    /// The target joint over `(U, X, Y, V)` in that order.
    pub fn target(&self) -> Result<JointDist<T>> {
        let mut factors = vec![self.source.clone(), self.input_policy.clone(), self.channel.clone()];
        if let Some(k) = &self.target_kernel {
            factors.push(k.clone());
        }
        joint_from_factors(&factors)?.marginalize(&var::BASE)
    }
}
