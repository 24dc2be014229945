//! Blahut-Arimoto fixed-point solver for optimal decision strategies and
//! the rate-distortion curve R(D).
//!
//! For a Lagrange multiplier `lambda`, the solver alternates the strategy
//! update P(y|x) = P_Y(y) exp(-lambda d(x,y)) / Z(x) with the marginal
//! update P_Y(y) = sum_x P_X(x) P(y|x), starting from a uniform P_Y, until
//! the max-abs change of P_Y drops below `tol`.

use rayon::prelude::*;
use thiserror::Error;

use crate::probcore::{
    expected_distortion, mutual_information, DistortionMatrix, JointDist, Pmf, ProbError, Strategy,
};

#[derive(Debug, Error)]
pub enum BlahutError {
    #[error("source alphabet does not match distortion matrix")]
    SourceMismatch,
    #[error("solver did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NotConverged { max_iter: usize, residual: f64 },
    #[error("target distortion {target} outside feasible range [{d_min}, {d_max}]")]
    TargetOutOfRange { target: f64, d_min: f64, d_max: f64 },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Solver knobs. `lambda = 0` is allowed and is the exact rate-0 limit.
#[derive(Debug, Clone, Copy)]
pub struct BaaConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl BaaConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }
}

impl Default for BaaConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Converged strategy plus the rate/distortion of its induced joint.
#[derive(Debug, Clone)]
pub struct BaaResult {
    pub strategy: Strategy,
    pub output_dist: Pmf,
    pub rate_bits: f64,
    pub expected_distortion: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One traced point of the rate-distortion curve.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RdPoint {
    pub lambda: f64,
    pub rate_bits: f64,
    pub distortion: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Points of R(D), sorted by lambda ascending.
#[derive(Debug, Clone)]
pub struct RdCurve {
    pub points: Vec<RdPoint>,
}

impl RdCurve {
    pub fn any_unconverged(&self) -> bool {
        self.points.iter().any(|p| !p.converged)
    }
}

/// The default 60-point geometric lambda grid between 1e-2 and 1e2.
pub fn default_lambda_grid() -> Vec<f64> {
    geometric_grid(1e-2, 1e2, 60)
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

/// Per-row exponential weights exp(-lambda (d(x,y) - min_y' d(x,y'))).
///
/// The row-min shift avoids underflow; by the offset invariance of the
/// strategy update it leaves the fixed point unchanged.
fn exp_weights(d: &DistortionMatrix, lambda: f64) -> Vec<f64> {
    let ny = d.y_alphabet().len();
    let mut w = Vec::with_capacity(d.values().len());
    for row in d.values().chunks(ny) {
        let m = row.iter().cloned().fold(f64::INFINITY, f64::min);
        w.extend(row.iter().map(|&v| (-lambda * (v - m)).exp()));
    }
    w
}

fn strategy_rows(weights: &[f64], p_y: &[f64], ny: usize, out: &mut [f64]) {
    for (wrow, srow) in weights.chunks(ny).zip(out.chunks_mut(ny)) {
        let mut z = 0.0;
        for (s, (&w, &q)) in srow.iter_mut().zip(wrow.iter().zip(p_y)) {
            *s = q * w;
            z += *s;
        }
        for s in srow.iter_mut() {
            *s /= z;
        }
    }
}

/// Run the fixed-point iteration for one lambda.
///
/// The returned strategy is recomputed from the final output distribution,
/// so the pair (strategy, output_dist) satisfies the strategy update
/// equation exactly. Non-convergence is reported in the result rather than
/// as an error; rate and distortion are still those of the induced joint.
pub fn baa_solve(
    p_x: &Pmf,
    d: &DistortionMatrix,
    cfg: &BaaConfig,
) -> Result<BaaResult, BlahutError> {
    if p_x.alphabet() != d.x_alphabet() {
        return Err(BlahutError::SourceMismatch);
    }
    assert!(cfg.lambda >= 0.0, "lambda must be nonnegative");
    assert!(cfg.tol > 0.0 && cfg.max_iter >= 1);

    let nx = d.x_alphabet().len();
    let ny = d.y_alphabet().len();
    let weights = exp_weights(d, cfg.lambda);

    let mut p_y = vec![1.0 / ny as f64; ny];
    let mut rows = vec![0.0; nx * ny];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        iterations += 1;
        strategy_rows(&weights, &p_y, ny, &mut rows);
        let mut next = vec![0.0; ny];
        for (x, srow) in rows.chunks(ny).enumerate() {
            let px = p_x.probs()[x];
            for (n, &s) in next.iter_mut().zip(srow) {
                *n += px * s;
            }
        }
        let residual = p_y
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        p_y = next;
        if residual < cfg.tol {
            converged = true;
            break;
        }
    }

    // final strategy consistent with the final marginal
    strategy_rows(&weights, &p_y, ny, &mut rows);

    let strategy = Strategy::new(d.x_alphabet().clone(), d.y_alphabet().clone(), rows)?;
    let output_dist = Pmf::new(d.y_alphabet().clone(), p_y)?;
    let joint = JointDist::from_source_and_strategy(p_x, &strategy)?;
    Ok(BaaResult {
        rate_bits: mutual_information(&joint),
        expected_distortion: expected_distortion(&joint, d)?,
        strategy,
        output_dist,
        iterations,
        converged,
    })
}

/// Distortion of the best constant output: D_max = min_y E_{P_X}[d(X, y)].
pub fn max_useful_distortion(p_x: &Pmf, d: &DistortionMatrix) -> (usize, f64) {
    let ny = d.y_alphabet().len();
    let mut best = (0, f64::INFINITY);
    for y in 0..ny {
        let e: f64 = p_x
            .probs()
            .iter()
            .enumerate()
            .map(|(x, &px)| px * d.get(x, y))
            .sum();
        if e < best.1 {
            best = (y, e);
        }
    }
    best
}

/// The floor of achievable distortion: D_min = E[min_y d(x, y)].
pub fn min_achievable_distortion(p_x: &Pmf, d: &DistortionMatrix) -> f64 {
    p_x.probs()
        .iter()
        .enumerate()
        .map(|(x, &px)| px * d.row(x).iter().cloned().fold(f64::INFINITY, f64::min))
        .sum()
}

/// The rate-0 curve endpoint: constant output on the best y.
fn zero_rate_endpoint(p_x: &Pmf, d: &DistortionMatrix) -> Result<BaaResult, BlahutError> {
    let (y_best, d_max) = max_useful_distortion(p_x, d);
    let nx = d.x_alphabet().len();
    let ny = d.y_alphabet().len();
    let mut rows = vec![0.0; nx * ny];
    for row in rows.chunks_mut(ny) {
        row[y_best] = 1.0;
    }
    let mut marg = vec![0.0; ny];
    marg[y_best] = 1.0;
    Ok(BaaResult {
        strategy: Strategy::new(d.x_alphabet().clone(), d.y_alphabet().clone(), rows)?,
        output_dist: Pmf::new(d.y_alphabet().clone(), marg)?,
        rate_bits: 0.0,
        expected_distortion: d_max,
        iterations: 0,
        converged: true,
    })
}

/// Trace R(D) over a grid of lambda values (one solve per grid point).
///
/// `lambda = 0` grid points are the exact zero-rate endpoint, i.e. the best
/// constant output, which is the limit of the optimal strategies as
/// lambda -> 0+. Points run in parallel; order follows the grid.
pub fn rd_curve(
    p_x: &Pmf,
    d: &DistortionMatrix,
    lambda_grid: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<RdCurve, BlahutError> {
    assert!(!lambda_grid.is_empty(), "lambda grid must be nonempty");
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let points = grid
        .par_iter()
        .map(|&lambda| {
            let res = if lambda == 0.0 {
                zero_rate_endpoint(p_x, d)?
            } else {
                baa_solve(
                    p_x,
                    d,
                    &BaaConfig {
                        lambda,
                        tol,
                        max_iter,
                    },
                )?
            };
            Ok(RdPoint {
                lambda,
                rate_bits: res.rate_bits,
                distortion: res.expected_distortion,
                iterations: res.iterations,
                converged: res.converged,
            })
        })
        .collect::<Result<Vec<_>, BlahutError>>()?;
    Ok(RdCurve { points })
}

/// Find the curve point with a prescribed expected distortion by bisecting
/// on lambda (distortion is non-increasing in lambda).
pub fn solve_for_distortion(
    p_x: &Pmf,
    d: &DistortionMatrix,
    target_d: f64,
    tol_d: f64,
    cfg: &BaaConfig,
) -> Result<BaaResult, BlahutError> {
    let (_, d_max) = max_useful_distortion(p_x, d);
    let d_min = min_achievable_distortion(p_x, d);
    if target_d < d_min - tol_d || target_d > d_max + tol_d {
        return Err(BlahutError::TargetOutOfRange {
            target: target_d,
            d_min,
            d_max,
        });
    }
    if target_d >= d_max {
        return zero_rate_endpoint(p_x, d);
    }

    // bracket: grow hi until distortion(hi) <= target
    let mut lo = 0.0;
    let mut hi = 1.0;
    let solve = |lambda: f64| baa_solve(p_x, d, &BaaConfig { lambda, ..*cfg });
    let mut hi_res = solve(hi)?;
    let mut grow = 0;
    while hi_res.expected_distortion > target_d {
        lo = hi;
        hi *= 4.0;
        hi_res = solve(hi)?;
        grow += 1;
        if grow > 60 {
            return Err(BlahutError::TargetOutOfRange {
                target: target_d,
                d_min,
                d_max,
            });
        }
    }
    if (hi_res.expected_distortion - target_d).abs() <= tol_d {
        return Ok(hi_res);
    }

    let mut best = hi_res;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let res = solve(mid)?;
        if (res.expected_distortion - target_d).abs() < (best.expected_distortion - target_d).abs()
        {
            best = res.clone();
        }
        if (res.expected_distortion - target_d).abs() <= tol_d {
            return Ok(res);
        }
        if res.expected_distortion > target_d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
