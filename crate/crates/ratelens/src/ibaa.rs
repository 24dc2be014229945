//! Inverse Blahut-Arimoto: recover the distortion function implied by an
//! observed decision strategy.
//!
//! Given a strategy P(y|x) and the output marginal P_Y, the pre-offset
//! costs are d~(x,y) = -ln(P(y|x) / P_Y(y)) (natural log, lambda fixed to
//! 1). Subtracting each row's minimum yields a valid nonnegative distortion
//! with per-row minimum exactly 0. The recovered matrix is unique only up
//! to a positive scale: a strategy generated by BAA with costs d and
//! multiplier lambda0 recovers lambda0 * d (after row-min removal).

use thiserror::Error;

use crate::blahut::{baa_solve, BaaConfig, BlahutError};
use crate::probcore::{
    conditional_y_given_x, laplace_smooth, marginal_y, CountMatrix, DistortionMatrix, Pmf,
    ProbError, Strategy,
};

#[derive(Debug, Error)]
pub enum IbaaError {
    #[error("zero probability at (x={x}, y={y}); smooth the observations first")]
    ZeroProbability { x: usize, y: usize },
    #[error("strategy and output distribution have mismatched output alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Blahut(#[from] BlahutError),
}

/// Recovered distortion, with lambda pinned to 1 during recovery.
#[derive(Debug, Clone)]
pub struct IbaaResult {
    pub distortion: DistortionMatrix,
    /// Pre-offset values d~(x,y); may be negative.
    pub tilde_distortion: Vec<f64>,
    /// Always 1; the scale is not identifiable from the strategy alone.
    pub lambda_assumed: f64,
    /// Observations per input row, when recovery started from counts.
    /// Lets consumers judge the sampling reliability of each row.
    pub row_counts: Option<Vec<u64>>,
}

/// Round-trip verification report: generate a strategy with BAA, recover
/// its distortion, compare against `lambda0 * d_true`.
///
/// The comparison covers only outputs the optimal strategy keeps in use:
/// an output whose marginal collapses to zero is never observed, so its
/// column of costs is unrecoverable in principle.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RoundtripReport {
    pub lambda0: f64,
    pub max_abs_error: f64,
    /// Least-squares scale of the recovered matrix against the row-min
    /// zeroed truth; 0 when the truth is identically zero.
    pub recovered_scale: f64,
    /// Outputs with nonzero marginal, out of the full output alphabet.
    pub used_outputs: usize,
    pub baa_iterations: usize,
    pub baa_converged: bool,
}

/// Pre-offset costs d~(x,y) = -ln(P(y|x) / P_Y(y)).
///
/// Requires strictly positive strategy entries and output marginals; a
/// zero entry would demand infinite cost, which is not a valid distortion.
pub fn tilde_distortion(strategy: &Strategy, p_y: &Pmf) -> Result<Vec<f64>, IbaaError> {
    if strategy.y_alphabet() != p_y.alphabet() {
        return Err(IbaaError::AlphabetMismatch);
    }
    let ny = p_y.len();
    for (y, &q) in p_y.probs().iter().enumerate() {
        if q <= 0.0 {
            return Err(IbaaError::ZeroProbability { x: 0, y });
        }
    }
    let mut tilde = Vec::with_capacity(strategy.rows().len());
    for (idx, &s) in strategy.rows().iter().enumerate() {
        if s <= 0.0 {
            return Err(IbaaError::ZeroProbability {
                x: idx / ny,
                y: idx % ny,
            });
        }
        tilde.push(-(s / p_y.probs()[idx % ny]).ln());
    }
    Ok(tilde)
}

/// Recover a valid distortion: d(x,y) = d~(x,y) - min_y d~(x,y).
pub fn estimate_distortion(strategy: &Strategy, p_y: &Pmf) -> Result<IbaaResult, IbaaError> {
    let tilde = tilde_distortion(strategy, p_y)?;
    let ny = p_y.len();
    let mut values = tilde.clone();
    for row in values.chunks_mut(ny) {
        let m = row.iter().cloned().fold(f64::INFINITY, f64::min);
        for v in row.iter_mut() {
            *v -= m;
        }
        // the min entry is x - x = 0 bitwise; guard the rest against
        // rounding pushing them below zero
        for v in row.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    let distortion = DistortionMatrix::new(
        strategy.x_alphabet().clone(),
        strategy.y_alphabet().clone(),
        values,
    )?;
    Ok(IbaaResult {
        distortion,
        tilde_distortion: tilde,
        lambda_assumed: 1.0,
        row_counts: None,
    })
}

/// The full 4-step recovery pipeline from raw observation counts:
/// smooth, marginalize/condition, take logs, remove row offsets.
///
/// Smoothing guarantees strictly positive probabilities, so this cannot
/// produce non-finite costs even for all-zero counts.
pub fn ibaa_from_counts(c: &CountMatrix) -> Result<IbaaResult, IbaaError> {
    let joint = laplace_smooth(c);
    let p_y = marginal_y(&joint);
    let strategy = conditional_y_given_x(&joint)?;
    let mut result = estimate_distortion(&strategy, &p_y)?;
    result.row_counts = Some(c.row_totals());
    Ok(result)
}

/// Generate a BAA-optimal strategy for `d_true` at `lambda0`, recover its
/// distortion, and compare against `lambda0 * d_true` (row-min zeroed).
pub fn roundtrip_validate(
    p_x: &Pmf,
    d_true: &DistortionMatrix,
    lambda0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RoundtripReport, IbaaError> {
    assert!(lambda0 >= 0.0);
    let baa = baa_solve(
        p_x,
        d_true,
        &BaaConfig {
            lambda: lambda0,
            tol,
            max_iter,
        },
    )?;
    // restrict everything to the outputs the optimal strategy uses. The
    // solve drives suboptimal outputs toward zero marginal, down to
    // subnormal or exactly zero values whose strategy entries retain too
    // few mantissa bits for the log recovery. 1e-280 keeps all downstream
    // products in normal f64 range; an output that is actually part of
    // the optimum never decays anywhere near it.
    const NEGLIGIBLE_MARGINAL: f64 = 1e-280;
    let used: Vec<usize> = baa
        .output_dist
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q >= NEGLIGIBLE_MARGINAL)
        .map(|(y, _)| y)
        .collect();
    let ny = baa.output_dist.len();
    let y_labels: Vec<String> = used
        .iter()
        .map(|&y| baa.output_dist.alphabet().labels()[y].clone())
        .collect();
    let y_sub = crate::probcore::Alphabet::new(y_labels)?;
    let take = |rows: &[f64]| -> Vec<f64> {
        rows.chunks(ny)
            .flat_map(|row| used.iter().map(|&y| row[y]))
            .collect()
    };
    let strategy = Strategy::new(
        baa.strategy.x_alphabet().clone(),
        y_sub.clone(),
        take(baa.strategy.rows()),
    )?;
    let p_y = Pmf::new(
        y_sub.clone(),
        used.iter().map(|&y| baa.output_dist.probs()[y]).collect(),
    )?;
    let truth = DistortionMatrix::new(d_true.x_alphabet().clone(), y_sub, take(d_true.values()))?
        .row_min_zeroed()
        .scaled(lambda0);

    let est = estimate_distortion(&strategy, &p_y)?;
    let mut max_abs_error = 0.0f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&e, &t) in est.distortion.values().iter().zip(truth.values()) {
        max_abs_error = max_abs_error.max((e - t).abs());
        let t0 = t / lambda0.max(f64::MIN_POSITIVE);
        num += e * t0;
        den += t0 * t0;
    }
    let recovered_scale = if den > 0.0 { num / den } else { 0.0 };
    Ok(RoundtripReport {
        lambda0,
        max_abs_error,
        recovered_scale,
        used_outputs: used.len(),
        baa_iterations: baa.iterations,
        baa_converged: baa.converged,
    })
}
