//! JSON problem files.
//!
//! ```json
//! {
//!   "setting": "SC_ENC_FB",
//!   "alphabets": { "U": ["0", "1"], "X": ["0", "1"], "Y": ["0", "1"], "V": ["a", "b"] },
//!   "source": [0.5, 0.5],
//!   "channel": [[0.9, 0.1], [0.1, 0.9]],
//!   "input_policy": { "shape": "x", "table": [0.5, 0.5] },
//!   "target_kernel": [[[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]]
//! }
//! ```
//!
//! `target_kernel[u][x][y]` is the row `Q(.|u,x,y)` over `V`. The policy
//! shapes are `x` (a distribution over `X`), `x_given_u` (`[u][x]`) and
//! `xv_given_u` (`[u][x][v]`, for decoder-side targets, which then carry no
//! `target_kernel`).

use std::collections::BTreeMap;

use coordination::prob::{Alphabet, Kernel};
use coordination::settings::var::{U, V, X, Y};
use coordination::settings::{CoordinationProblem, SettingId};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Rows must sum to one within this.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub setting: SettingId,
    pub alphabets: BTreeMap<String, Vec<String>>,
    pub source: Vec<f64>,
    pub channel: Vec<Vec<f64>>,
    pub input_policy: InputPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_kernel: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", content = "table", rename_all = "snake_case")]
pub enum InputPolicy {
    X(Vec<f64>),
    XGivenU(Vec<Vec<f64>>),
    XvGivenU(Vec<Vec<Vec<f64>>>),
}

fn malformed(path: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Malformed {
        path: path.into(),
        reason: reason.into(),
    }
}

fn check_row(path: &str, row: &[f64], len: usize) -> Result<(), CliError> {
    if row.len() != len {
        return Err(malformed(path, format!("expected {len} entries, found {}", row.len())));
    }
    if let Some(i) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(malformed(format!("{path}[{i}]"), format!("{} is not a probability", row[i])));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(malformed(path, format!("row sums to {sum}, expected 1")));
    }
    Ok(())
}

fn check_len<T>(path: &str, items: &[T], len: usize) -> Result<(), CliError> {
    if items.len() != len {
        return Err(malformed(path, format!("expected {len} entries, found {}", items.len())));
    }
    Ok(())
}

impl ProblemFile {
    /// Parses a document, reporting the line, column and field path of
    /// syntax and type errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            malformed(
                if path == "." { "(document)".to_string() } else { path },
                format!("{inner}"),
            )
        })
    }

    fn alphabet(&self, name: &str) -> Result<Alphabet, CliError> {
        let symbols = self
            .alphabets
            .get(name)
            .ok_or_else(|| malformed("alphabets", format!("missing alphabet `{name}`")))?;
        Alphabet::new(name, symbols.iter().cloned()).map_err(|e| malformed(format!("alphabets.{name}"), e.to_string()))
    }

    /// Checks shapes and row sums, then builds the problem. `setting`
    /// overrides the file's setting.
    pub fn to_problem(&self, setting: Option<SettingId>) -> Result<CoordinationProblem, CliError> {
        if let Some(extra) = self.alphabets.keys().find(|k| ![U, X, Y, V].contains(&k.as_str())) {
            return Err(malformed("alphabets", format!("unknown alphabet `{extra}`")));
        }
        let (u, x, y, v) = (self.alphabet(U)?, self.alphabet(X)?, self.alphabet(Y)?, self.alphabet(V)?);
        let (nu, nx, ny, nv) = (u.len(), x.len(), y.len(), v.len());

        check_row("source", &self.source, nu)?;
        check_len("channel", &self.channel, nx)?;
        for (i, row) in self.channel.iter().enumerate() {
            check_row(&format!("channel[{i}]"), row, ny)?;
        }

        let (policy, joint_policy) = match &self.input_policy {
            InputPolicy::X(row) => {
                check_row("input_policy.table", row, nx)?;
                (Kernel::new(vec![], vec![x.clone()], row.clone()), false)
            }
            InputPolicy::XGivenU(rows) => {
                check_len("input_policy.table", rows, nu)?;
                for (i, row) in rows.iter().enumerate() {
                    check_row(&format!("input_policy.table[{i}]"), row, nx)?;
                }
                (Kernel::from_rows(vec![u.clone()], vec![x.clone()], rows.clone()), false)
            }
            InputPolicy::XvGivenU(rows) => {
                check_len("input_policy.table", rows, nu)?;
                let mut flat = Vec::with_capacity(nu);
                for (i, block) in rows.iter().enumerate() {
                    let path = format!("input_policy.table[{i}]");
                    check_len(&path, block, nx)?;
                    for (j, row) in block.iter().enumerate() {
                        check_len(&format!("{path}[{j}]"), row, nv)?;
                    }
                    let joined: Vec<f64> = block.concat();
                    check_row(&path, &joined, nx * nv)?;
                    flat.push(joined);
                }
                (Kernel::from_rows(vec![u.clone()], vec![x.clone(), v.clone()], flat), true)
            }
        };
        let policy = policy.map_err(|e| malformed("input_policy", e.to_string()))?;

        let target_kernel = match (&self.target_kernel, joint_policy) {
            (Some(_), true) => {
                return Err(malformed("target_kernel", "not allowed with input_policy shape `xv_given_u`"));
            }
            (None, false) => return Err(malformed("target_kernel", "missing field")),
            (None, true) => None,
            (Some(t), false) => {
                check_len("target_kernel", t, nu)?;
                let mut rows = Vec::with_capacity(nu * nx * ny);
                for (i, by_x) in t.iter().enumerate() {
                    check_len(&format!("target_kernel[{i}]"), by_x, nx)?;
                    for (j, by_y) in by_x.iter().enumerate() {
                        check_len(&format!("target_kernel[{i}][{j}]"), by_y, ny)?;
                        for (k, row) in by_y.iter().enumerate() {
                            check_row(&format!("target_kernel[{i}][{j}][{k}]"), row, nv)?;
                            rows.push(row.clone());
                        }
                    }
                }
                Some(
                    Kernel::from_rows(vec![u.clone(), x.clone(), y.clone()], vec![v.clone()], rows)
                        .map_err(|e| malformed("target_kernel", e.to_string()))?,
                )
            }
        };

        let source = Kernel::new(vec![], vec![u], self.source.clone()).map_err(|e| malformed("source", e.to_string()))?;
        let channel = Kernel::from_rows(vec![x], vec![y], self.channel.clone()).map_err(|e| malformed("channel", e.to_string()))?;
        CoordinationProblem::new(setting.unwrap_or(self.setting), source, channel, policy, target_kernel)
            .map_err(|e| malformed("(document)", e.to_string()))
    }

    /// The file describing `problem`.
    pub fn from_problem(problem: &CoordinationProblem) -> Self {
        let symbols = |a: &Alphabet| a.symbols().to_vec();
        let u = &problem.source.to_vars()[0];
        let x = &problem.channel.from_vars()[0];
        let y = &problem.channel.to_vars()[0];
        let policy = &problem.input_policy;
        let rows = |k: &Kernel| (0..k.row_count()).map(|r| k.row(r).to_vec()).collect::<Vec<_>>();

        let mut alphabets = BTreeMap::new();
        alphabets.insert(U.to_string(), symbols(u));
        alphabets.insert(X.to_string(), symbols(x));
        alphabets.insert(Y.to_string(), symbols(y));

        let (input_policy, target_kernel) = match &problem.target_kernel {
            None => {
                let v = &policy.to_vars()[1];
                alphabets.insert(V.to_string(), symbols(v));
                let nested = rows(policy).into_iter().map(|r| r.chunks(v.len()).map(<[f64]>::to_vec).collect()).collect();
                (InputPolicy::XvGivenU(nested), None)
            }
            Some(k) => {
                alphabets.insert(V.to_string(), symbols(&k.to_vars()[0]));
                let policy = if policy.from_vars().is_empty() {
                    InputPolicy::X(policy.row(0).to_vec())
                } else {
                    InputPolicy::XGivenU(rows(policy))
                };
                let flat = rows(k);
                let (nx, ny) = (x.len(), y.len());
                let nested = flat
                    .chunks(nx * ny)
                    .map(|by_u| by_u.chunks(ny).map(<[Vec<f64>]>::to_vec).collect())
                    .collect();
                (policy, Some(nested))
            }
        };
        Self {
            setting: problem.setting,
            alphabets,
            source: problem.source.row(0).to_vec(),
            channel: rows(&problem.channel),
            input_policy,
            target_kernel,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coordination::binary_example::{make_target, ExampleParams};

    fn example() -> ProblemFile {
        ProblemFile::from_problem(&make_target(ExampleParams::new(0.4, 0.1).unwrap()).unwrap())
    }

    #[test]
    fn round_trip() {
        let file = example();
        let text = serde_json::to_string_pretty(&file).unwrap();
        let back = ProblemFile::parse(&text).unwrap();
        assert_eq!(back, file);
        let p = back.to_problem(None).unwrap();
        assert_eq!(ProblemFile::from_problem(&p), file);
    }

    #[test]
    fn paths_in_errors() {
        let mut file = example();
        file.channel[1] = vec![0.5, 0.6];
        let err = file.to_problem(None).unwrap_err();
        assert!(matches!(&err, CliError::Malformed { path, .. } if path == "channel[1]"), "{err}");

        let mut file = example();
        file.target_kernel.as_mut().unwrap()[1][0][1].pop();
        let err = file.to_problem(None).unwrap_err();
        assert!(matches!(&err, CliError::Malformed { path, .. } if path == "target_kernel[1][0][1]"), "{err}");

        let err = ProblemFile::parse(r#"{"setting": "SC_ENC_FB", "source": "x"}"#).unwrap_err();
        assert!(matches!(&err, CliError::Malformed { path, .. } if path == "source"), "{err}");
        let err = ProblemFile::parse("{\n  \"setting\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn decoder_side_files() {
        let mut file = example();
        file.target_kernel = None;
        assert!(file.to_problem(None).is_err());
        file.input_policy = InputPolicy::XvGivenU(vec![vec![vec![0.0625; 8]; 2]; 2]);
        file.setting = SettingId::ScDecFb;
        let p = file.to_problem(None).unwrap();
        assert!(p.target_kernel.is_none());
        assert_eq!(ProblemFile::from_problem(&p), file);
    }
}
