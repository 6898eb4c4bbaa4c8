use serde::Serialize;

use crate::prob::JointDist;
use crate::settings::RateWindow;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FailureCounts {
    /// Blocks where no index made the encoder's tuple typical.
    pub encoder: u64,
    /// Blocks where no index passed both decoder tests.
    pub decoder: u64,
    /// Blocks where more than one index passed both decoder tests.
    pub decode_ambiguities: u64,
}

impl FailureCounts {
    pub(crate) fn add(&mut self, other: &FailureCounts) {
        self.encoder += other.encoder;
        self.decoder += other.decoder;
        self.decode_ambiguities += other.decode_ambiguities;
    }
}

/// Outcome of one or more sessions. Distances are per trial; the empirical
/// distributions pool all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: usize,
    pub n: usize,
    pub blocks: usize,
    pub rate: f64,
    pub message_count: usize,
    pub rate_capped: bool,
    pub rate_window: RateWindow,
    pub typ_tol: f64,
    pub coord_tol: f64,
    pub seed: u64,
    /// Over `(U, X, Y, V)` and all `n * blocks` positions.
    pub empirical_all: JointDist<f64>,
    /// Same, without the first and last blocks; absent with two blocks.
    pub empirical_core: Option<JointDist<f64>>,
    pub tv_all: Vec<f64>,
    pub tv_core: Vec<f64>,
    pub median_tv_all: f64,
    pub median_tv_core: Option<f64>,
    /// Fraction of trials with `tv_all >= coord_tol`.
    pub p_error_estimate: f64,
    /// 95% Wilson score interval.
    pub p_error_interval: [f64; 2],
    pub failure_counts: FailureCounts,
}

pub(crate) fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { 0.5 * (v[h - 1] + v[h]) })
}

const Z95: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: 0.0552 .. 0.1744
        let [lo, hi] = wilson_interval(10, 100);
        assert!((lo - 0.055_229).abs() < 1e-5 && (hi - 0.174_366).abs() < 1e-5, "{lo} {hi}");
        let [lo, hi] = wilson_interval(0, 20);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.161_125).abs() < 1e-5, "{hi}");
        assert_eq!(wilson_interval(5, 5)[1], 1.0);
    }
}
