//! Post-processing of recovered chemotaxis distortion matrices: cyclic
//! alignment of rows, mean profiles, and the Hill-coefficient sweep.
//!
//! Alignment re-indexes each row of a square sector matrix by the shift
//! (theta_m - theta_s + pi) mod 2 pi, so the source direction lands at
//! shift pi for every row and rows become directly comparable.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ibaa::{ibaa_from_counts, IbaaError, IbaaResult};
use crate::legi::{simulate, LegiError, LegiParams, SimConfig, SimOutput};
use crate::probcore::{conditional_y_given_x, marginal_y, DistortionMatrix};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("matrix is {rows}x{cols}; cyclic alignment needs a square sector matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("hill list must be nonempty with every entry >= 1")]
    BadHillList,
    #[error(transparent)]
    Legi(#[from] LegiError),
    #[error(transparent)]
    Ibaa(#[from] IbaaError),
}

/// Rows of a sector matrix re-indexed to a common shift coordinate.
#[derive(Debug, Clone)]
pub struct AlignedProfile {
    /// Shift value of each aligned column, 2 pi j / N.
    pub shifts: Vec<f64>,
    /// One aligned row per source sector.
    pub per_row: Vec<Vec<f64>>,
    /// Column means over all rows.
    pub mean: Vec<f64>,
}

/// Peak height and half-height width of one swept profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub hill: u32,
    pub peak: f64,
    pub half_height_width: f64,
}

/// One entry of a Hill sweep: the recovered profile plus its summary.
#[derive(Debug, Clone)]
pub struct HillSweepEntry {
    pub hill: u32,
    pub profile: AlignedProfile,
    pub summary: ProfileSummary,
    pub recovery: IbaaResult,
}

/// Re-index row s so column j holds d(theta_s, theta_m) with
/// j = (m - s + N/2) mod N; the source column lands at shift pi.
///
/// For odd N the source maps to floor(N/2), half a sector below pi.
pub fn cyclic_align(d: &DistortionMatrix) -> Result<AlignedProfile, AnalysisError> {
    let n = d.x_alphabet().len();
    let cols = d.y_alphabet().len();
    if n != cols {
        return Err(AnalysisError::NotSquare { rows: n, cols });
    }
    let half = n / 2;
    let per_row: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut aligned = vec![0.0; n];
            for m in 0..n {
                aligned[(m + n - s + half) % n] = d.get(s, m);
            }
            aligned
        })
        .collect();
    let mean = (0..n)
        .map(|j| per_row.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let shifts = (0..n)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect();
    Ok(AlignedProfile {
        shifts,
        per_row,
        mean,
    })
}

/// Invert [`cyclic_align`], recovering the original matrix values.
pub fn unalign(profile: &AlignedProfile) -> Vec<Vec<f64>> {
    let n = profile.per_row.len();
    let half = n / 2;
    (0..n)
        .map(|s| {
            (0..n)
                .map(|m| profile.per_row[s][(m + n - s + half) % n])
                .collect()
        })
        .collect()
}

/// Column means of an aligned profile.
pub fn mean_profile(profile: &AlignedProfile) -> Vec<f64> {
    profile.mean.clone()
}

/// Peak height and circular half-height width of a profile treated as a
/// periodic function of the shift coordinate.
///
/// The width is that of the low-distortion valley around the profile
/// minimum, measured where the profile crosses halfway between minimum and
/// peak; a sharper profile gives a narrower valley. Crossings are located
/// by linear interpolation between sector samples.
pub fn profile_summary(hill: u32, mean: &[f64]) -> ProfileSummary {
    let n = mean.len();
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let peak = mean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (floor_idx, &floor) = mean
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonempty profile");
    let half_level = floor + 0.5 * (peak - floor);

    let walk = |dir: i64| -> f64 {
        let mut prev = floor;
        for k in 1..n as i64 {
            let idx = ((floor_idx as i64 + dir * k).rem_euclid(n as i64)) as usize;
            let v = mean[idx];
            if v > half_level {
                let frac = (half_level - prev) / (v - prev);
                return (k - 1) as f64 * step + frac * step;
            }
            prev = v;
        }
        // never rose above half: the valley spans the whole circle
        std::f64::consts::PI
    };
    let width = (walk(1) + walk(-1)).min(2.0 * std::f64::consts::PI);
    ProfileSummary {
        hill,
        peak,
        half_height_width: width,
    }
}

/// For each Hill coefficient: simulate, recover the distortion, align it,
/// and summarize the mean profile. Entries run in parallel; the seed is
/// offset by the position in the hill list so runs stay independent.
pub fn hill_sweep(
    params_base: &LegiParams,
    hills: &[u32],
    sim: &SimConfig,
) -> Result<Vec<HillSweepEntry>, AnalysisError> {
    if hills.is_empty() || hills.iter().any(|&h| h < 1) {
        return Err(AnalysisError::BadHillList);
    }
    hills
        .par_iter()
        .enumerate()
        .map(|(i, &hill)| {
            let params = LegiParams {
                hill,
                ..*params_base
            };
            let cfg = SimConfig {
                seed: sim.seed.wrapping_add(i as u64),
                ..sim.clone()
            };
            let recovery = match simulate(&params, &cfg)? {
                SimOutput::Counts(c) => ibaa_from_counts(&c)?,
                SimOutput::Weights(w) => {
                    let joint = w.smoothed_joint();
                    let p_y = marginal_y(&joint);
                    let strategy = conditional_y_given_x(&joint).map_err(IbaaError::from)?;
                    crate::ibaa::estimate_distortion(&strategy, &p_y)?
                }
            };
            let profile = cyclic_align(&recovery.distortion)?;
            let summary = profile_summary(hill, &profile.mean);
            Ok(HillSweepEntry {
                hill,
                profile,
                summary,
                recovery,
            })
        })
        .collect()
}
