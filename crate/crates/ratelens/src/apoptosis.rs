//! Binary apoptosis benchmark: an exponential molecule-count source, a
//! survival/death threshold, and the two theoretical distortion functions
//! used to validate the inverse recovery.
//!
//! The source rate `gamma` is expressed per `unit_scale` molecules, so the
//! effective per-molecule rate is `gamma / unit_scale`. With the defaults
//! (gamma 0.5 per 100 molecules, threshold 600) the tail mass above the
//! threshold is about e^-3 = 0.0498, which puts the zero-rate endpoint of
//! the Hamming-like curve near 0.048.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probcore::{Alphabet, DistortionMatrix, Pmf};

#[derive(Debug, Error)]
pub enum ApoptosisError {
    #[error("invalid model parameter: {0}")]
    InvalidParam(String),
}

/// Parameters of the binary apoptosis decision model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ApoptosisModel {
    /// Source rate parameter, per `unit_scale` molecules.
    pub gamma: f64,
    /// Molecules per source-distribution unit.
    pub unit_scale: f64,
    /// Top of the molecule-count grid (exclusive); grid is 0..x_max step 1.
    pub x_max: usize,
    /// Decision threshold in molecules; x >= x_th is the apoptosis side.
    pub x_th: usize,
    /// Normalization constant of the rectified squared costs.
    pub squared_denominator: f64,
}

impl Default for ApoptosisModel {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            unit_scale: 100.0,
            x_max: 2000,
            x_th: 600,
            squared_denominator: 20_000.0,
        }
    }
}

impl ApoptosisModel {
    pub fn validate(&self) -> Result<(), ApoptosisError> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(ApoptosisError::InvalidParam("gamma must be > 0".into()));
        }
        if !self.unit_scale.is_finite() || self.unit_scale <= 0.0 {
            return Err(ApoptosisError::InvalidParam(
                "unit_scale must be > 0".into(),
            ));
        }
        if self.x_th == 0 || self.x_th >= self.x_max {
            return Err(ApoptosisError::InvalidParam(
                "x_th must satisfy 0 < x_th < x_max".into(),
            ));
        }
        if !self.squared_denominator.is_finite() || self.squared_denominator <= 0.0 {
            return Err(ApoptosisError::InvalidParam(
                "squared_denominator must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Molecule-count alphabet {0, 1, ..., x_max - 1}.
    pub fn x_alphabet(&self) -> Alphabet {
        Alphabet::indexed(self.x_max)
    }

    /// Binary decision alphabet: 0 = survival, 1 = apoptosis.
    pub fn y_alphabet(&self) -> Alphabet {
        Alphabet::indexed(2)
    }
}

/// Exponential source over the molecule grid: p(x) proportional to
/// exp(-gamma x / unit_scale), renormalized over 0..x_max.
pub fn exp_source(m: &ApoptosisModel) -> Result<Pmf, ApoptosisError> {
    m.validate()?;
    let rate = m.gamma / m.unit_scale;
    let weights: Vec<f64> = (0..m.x_max).map(|x| (-rate * x as f64).exp()).collect();
    Ok(Pmf::from_weights(m.x_alphabet(), &weights).expect("positive weights"))
}

/// Hamming-like costs: 1 for deciding on the wrong side of the threshold,
/// 0 otherwise. The threshold itself belongs to the apoptosis side.
pub fn hamming_like(m: &ApoptosisModel) -> Result<DistortionMatrix, ApoptosisError> {
    m.validate()?;
    let mut values = Vec::with_capacity(2 * m.x_max);
    for x in 0..m.x_max {
        if x < m.x_th {
            values.extend([0.0, 1.0]);
        } else {
            values.extend([1.0, 0.0]);
        }
    }
    Ok(DistortionMatrix::new(m.x_alphabet(), m.y_alphabet(), values).expect("valid costs"))
}

/// Rectified squared costs: 0 for the correct side of the threshold,
/// (x - x_th)^2 / squared_denominator otherwise.
pub fn rectified_squared(m: &ApoptosisModel) -> Result<DistortionMatrix, ApoptosisError> {
    m.validate()?;
    let mut values = Vec::with_capacity(2 * m.x_max);
    for x in 0..m.x_max {
        let miss = {
            let diff = x as f64 - m.x_th as f64;
            diff * diff / m.squared_denominator
        };
        if x < m.x_th {
            values.extend([0.0, miss]);
        } else {
            values.extend([miss, 0.0]);
        }
    }
    Ok(DistortionMatrix::new(m.x_alphabet(), m.y_alphabet(), values).expect("valid costs"))
}

/// Tail mass P(X >= x_th) of the discretized source.
pub fn above_threshold_mass(m: &ApoptosisModel) -> Result<f64, ApoptosisError> {
    let p = exp_source(m)?;
    Ok(p.probs()[m.x_th..].iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blahut::{baa_solve, max_useful_distortion, BaaConfig};
    use approx::assert_abs_diff_eq;

    #[test]
    fn source_is_decreasing_with_max_at_zero() {
        let p = exp_source(&ApoptosisModel::default()).unwrap();
        let probs = p.probs();
        assert!(probs.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(
            probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            probs[0]
        );
    }

    #[test]
    fn tail_mass_matches_geometric_sum() {
        let m = ApoptosisModel::default();
        let tail = above_threshold_mass(&m).unwrap();
        // independent oracle: geometric series with r = exp(-gamma/unit_scale)
        let r = (-m.gamma / m.unit_scale).exp();
        let expect =
            (r.powi(m.x_th as i32) - r.powi(m.x_max as i32)) / (1.0 - r.powi(m.x_max as i32));
        assert_abs_diff_eq!(tail, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(tail, 0.0496, epsilon = 5e-4);
    }

    #[test]
    fn huge_gamma_concentrates_at_zero() {
        let m = ApoptosisModel {
            gamma: 1e6,
            ..Default::default()
        };
        let p = exp_source(&m).unwrap();
        assert_abs_diff_eq!(p.probs()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hamming_like_boundary_convention() {
        let m = ApoptosisModel::default();
        let d = hamming_like(&m).unwrap();
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(m.x_th, 1), 0.0);
        assert_eq!(d.get(m.x_th - 1, 1), 1.0);
        assert!(d.values().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn rectified_squared_arithmetic() {
        let m = ApoptosisModel::default();
        let d = rectified_squared(&m).unwrap();
        assert_eq!(d.get(m.x_th, 1), 0.0);
        assert_abs_diff_eq!(d.get(m.x_th + 200, 0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.get(m.x_th - 100, 1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn both_distortions_have_zero_row_min() {
        let m = ApoptosisModel::default();
        for d in [hamming_like(&m).unwrap(), rectified_squared(&m).unwrap()] {
            for x in 0..m.x_max {
                assert_eq!(d.row(x).iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            }
        }
    }

    #[test]
    fn zero_rate_endpoint_identity_for_hamming_like() {
        let m = ApoptosisModel::default();
        let p = exp_source(&m).unwrap();
        let d = hamming_like(&m).unwrap();
        let (_, d_max) = max_useful_distortion(&p, &d);
        let tail = above_threshold_mass(&m).unwrap();
        assert_abs_diff_eq!(d_max, tail.min(1.0 - tail), epsilon = 1e-12);
    }

    #[test]
    fn large_lambda_approaches_threshold_rule() {
        let m = ApoptosisModel {
            x_max: 400,
            x_th: 120,
            ..Default::default()
        };
        let p = exp_source(&m).unwrap();
        // margin where lambda * d is large enough to force determinism;
        // rectified squared costs vanish continuously at the threshold, so
        // rows right at the boundary stay probabilistic for any finite lambda
        let cases = [
            (hamming_like(&m).unwrap(), 0usize),
            (rectified_squared(&m).unwrap(), 15),
        ];
        for (d, margin) in cases {
            let res = baa_solve(
                &p,
                &d,
                &BaaConfig {
                    lambda: 1e3,
                    tol: 1e-10,
                    max_iter: 200_000,
                },
            )
            .unwrap();
            for x in 0..m.x_max {
                if x.abs_diff(m.x_th) < margin {
                    continue;
                }
                let correct = usize::from(x >= m.x_th);
                assert!(
                    res.strategy.get(x, correct) >= 0.999,
                    "x={x} got {}",
                    res.strategy.get(x, correct)
                );
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let m = ApoptosisModel {
            x_th: 0,
            ..Default::default()
        };
        assert!(m.validate().is_err());
        let m = ApoptosisModel {
            gamma: -1.0,
            ..Default::default()
        };
        assert!(exp_source(&m).is_err());
    }
}
