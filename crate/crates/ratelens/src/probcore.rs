//! Finite-alphabet probability types and discrete information measures.
//!
//! Everything here works in bits (log base 2). Terms with zero probability
//! are dropped, i.e. `0 * log 0 = 0` by continuity.

use std::sync::Arc;

use thiserror::Error;

/// Drift up to this is silently renormalized at construction.
const RENORM_DRIFT: f64 = 1e-9;
/// Normalization enforced to this tolerance after renormalization.
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("alphabet labels must be unique and non-empty (got {0} labels)")]
    BadAlphabet(usize),
    #[error("length {got} does not match alphabet size {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("total mass {total} deviates from 1 by more than {max_drift}")]
    NotNormalized { total: f64, max_drift: f64 },
    #[error("row {row} of the matrix sums to {sum}, expected 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("row {row} has zero mass; apply smoothing before conditioning")]
    ZeroRowMass { row: usize },
    #[error("shape {got:?} does not match expected {expected:?}")]
    ShapeMismatch {
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("alphabet '{0}' carries no numeric values; squared/absolute distortion needs a numeric embedding")]
    NonNumericAlphabet(String),
}

/// An ordered, labeled finite alphabet.
///
/// Labels are kept so CSV round trips preserve them; cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Arc<Vec<String>>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, ProbError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = std::collections::HashSet::new();
        if labels.is_empty() || !labels.iter().all(|l| seen.insert(l.as_str())) {
            return Err(ProbError::BadAlphabet(labels.len()));
        }
        Ok(Self {
            labels: Arc::new(labels),
        })
    }

    /// Alphabet `0, 1, ..., n-1` with decimal labels.
    pub fn indexed(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string())).expect("indexed labels are unique")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Labels parsed as numbers, when every label parses.
    pub fn numeric_values(&self) -> Option<Vec<f64>> {
        self.labels.iter().map(|l| l.parse().ok()).collect()
    }
}

fn check_entries(v: &[f64]) -> Result<(), ProbError> {
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(ProbError::NonFinite { index: i });
        }
        if x < 0.0 {
            return Err(ProbError::NegativeEntry { index: i, value: x });
        }
    }
    Ok(())
}

/// Renormalize `v` in place if its total drifted from 1 by at most
/// [`RENORM_DRIFT`]; reject larger drift.
fn normalize(v: &mut [f64]) -> Result<(), ProbError> {
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > RENORM_DRIFT {
        return Err(ProbError::NotNormalized {
            total,
            max_drift: RENORM_DRIFT,
        });
    }
    if (total - 1.0).abs() > NORM_TOL {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
    Ok(())
}

/// A probability mass function over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Alphabet, mut probs: Vec<f64>) -> Result<Self, ProbError> {
        if probs.len() != alphabet.len() {
            return Err(ProbError::LengthMismatch {
                got: probs.len(),
                expected: alphabet.len(),
            });
        }
        check_entries(&probs)?;
        normalize(&mut probs)?;
        Ok(Self { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Self {
            probs: vec![1.0 / n as f64; n],
            alphabet,
        }
    }

    /// Normalize arbitrary nonnegative weights into a Pmf.
    pub fn from_weights(alphabet: Alphabet, weights: &[f64]) -> Result<Self, ProbError> {
        if weights.len() != alphabet.len() {
            return Err(ProbError::LengthMismatch {
                got: weights.len(),
                expected: alphabet.len(),
            });
        }
        check_entries(weights)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ProbError::ZeroRowMass { row: 0 });
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
            alphabet,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Raw event counts over an input x output grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    counts: Vec<u64>,
}

impl CountMatrix {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        counts: Vec<u64>,
    ) -> Result<Self, ProbError> {
        let expected = x_alphabet.len() * y_alphabet.len();
        if counts.len() != expected {
            return Err(ProbError::LengthMismatch {
                got: counts.len(),
                expected,
            });
        }
        Ok(Self {
            x_alphabet,
            y_alphabet,
            counts,
        })
    }

    pub fn zeros(x_alphabet: Alphabet, y_alphabet: Alphabet) -> Self {
        let n = x_alphabet.len() * y_alphabet.len();
        Self {
            x_alphabet,
            y_alphabet,
            counts: vec![0; n],
        }
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.y_alphabet.len() + y]
    }

    pub fn add(&mut self, x: usize, y: usize, n: u64) {
        self.counts[x * self.y_alphabet.len() + y] += n;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    /// Total observations per input row.
    pub fn row_totals(&self) -> Vec<u64> {
        let ny = self.y_alphabet.len();
        self.counts.chunks(ny).map(|r| r.iter().sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A joint distribution P(x, y) over two finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        mut probs: Vec<f64>,
    ) -> Result<Self, ProbError> {
        let expected = x_alphabet.len() * y_alphabet.len();
        if probs.len() != expected {
            return Err(ProbError::LengthMismatch {
                got: probs.len(),
                expected,
            });
        }
        check_entries(&probs)?;
        normalize(&mut probs)?;
        Ok(Self {
            x_alphabet,
            y_alphabet,
            probs,
        })
    }

    /// Joint induced by a source and a conditional strategy.
    pub fn from_source_and_strategy(p_x: &Pmf, strategy: &Strategy) -> Result<Self, ProbError> {
        if p_x.alphabet() != strategy.x_alphabet() {
            return Err(ProbError::LengthMismatch {
                got: p_x.len(),
                expected: strategy.x_alphabet().len(),
            });
        }
        let ny = strategy.y_alphabet().len();
        let mut probs = Vec::with_capacity(p_x.len() * ny);
        for (x, &px) in p_x.probs().iter().enumerate() {
            for y in 0..ny {
                probs.push(px * strategy.get(x, y));
            }
        }
        Self::new(
            strategy.x_alphabet().clone(),
            strategy.y_alphabet().clone(),
            probs,
        )
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.y_alphabet.len() + y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn marginal_x(&self) -> Pmf {
        let ny = self.y_alphabet.len();
        let probs: Vec<f64> = self.probs.chunks(ny).map(|r| r.iter().sum()).collect();
        Pmf {
            alphabet: self.x_alphabet.clone(),
            probs,
        }
    }
}

/// A row-stochastic conditional P(y | x): the decision strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    rows: Vec<f64>,
}

impl Strategy {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        mut rows: Vec<f64>,
    ) -> Result<Self, ProbError> {
        let expected = x_alphabet.len() * y_alphabet.len();
        if rows.len() != expected {
            return Err(ProbError::LengthMismatch {
                got: rows.len(),
                expected,
            });
        }
        check_entries(&rows)?;
        for (i, row) in rows.chunks_mut(y_alphabet.len()).enumerate() {
            normalize(row).map_err(|_| ProbError::RowNotNormalized {
                row: i,
                sum: row.iter().sum(),
            })?;
        }
        Ok(Self {
            x_alphabet,
            y_alphabet,
            rows,
        })
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x * self.y_alphabet.len() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let ny = self.y_alphabet.len();
        &self.rows[x * ny..(x + 1) * ny]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }
}

/// A nonnegative finite cost matrix d(x, y).
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    values: Vec<f64>,
}

impl DistortionMatrix {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        values: Vec<f64>,
    ) -> Result<Self, ProbError> {
        let expected = x_alphabet.len() * y_alphabet.len();
        if values.len() != expected {
            return Err(ProbError::LengthMismatch {
                got: values.len(),
                expected,
            });
        }
        check_entries(&values)?;
        Ok(Self {
            x_alphabet,
            y_alphabet,
            values,
        })
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.y_alphabet.len() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let ny = self.y_alphabet.len();
        &self.values[x * ny..(x + 1) * ny]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entrywise scaling by a positive factor.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            x_alphabet: self.x_alphabet.clone(),
            y_alphabet: self.y_alphabet.clone(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    /// The same costs with each row's minimum subtracted from that row.
    pub fn row_min_zeroed(&self) -> Self {
        let ny = self.y_alphabet.len();
        let mut values = self.values.clone();
        for row in values.chunks_mut(ny) {
            let m = row.iter().cloned().fold(f64::INFINITY, f64::min);
            for v in row.iter_mut() {
                *v -= m;
            }
        }
        Self {
            x_alphabet: self.x_alphabet.clone(),
            y_alphabet: self.y_alphabet.clone(),
            values,
        }
    }
}

/// The kind of textbook distortion to build with [`standard_distortion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionKind {
    Hamming,
    Squared,
    Absolute,
}

/// Shannon entropy of `p` in bits.
pub fn entropy(p: &Pmf) -> f64 {
    p.probs()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Mutual information I(X; Y) of a joint distribution, in bits.
pub fn mutual_information(j: &JointDist) -> f64 {
    let ny = j.y_alphabet().len();
    let px = j.marginal_x();
    let py = marginal_y(j);
    let mut bits = 0.0;
    for (x, row) in j.probs().chunks(ny).enumerate() {
        let pxv = px.probs()[x];
        for (y, &pxy) in row.iter().enumerate() {
            if pxy > 0.0 {
                // px * py can underflow to 0 when pxy is subnormal; the
                // true term is then below 1e-300 bits and safe to drop
                let term = pxy * (pxy / (pxv * py.probs()[y])).log2();
                if term.is_finite() {
                    bits += term;
                }
            }
        }
    }
    // rounding can push a zero slightly negative
    bits.max(0.0)
}

/// Add-one smoothing: (L(x,y) + 1) / sum(L + 1). Every entry strictly positive.
pub fn laplace_smooth(c: &CountMatrix) -> JointDist {
    let cells = c.counts().len() as f64;
    let total = c.total() as f64 + cells;
    let probs = c
        .counts()
        .iter()
        .map(|&n| (n as f64 + 1.0) / total)
        .collect();
    JointDist {
        x_alphabet: c.x_alphabet().clone(),
        y_alphabet: c.y_alphabet().clone(),
        probs,
    }
}

/// Output marginal P_Y(y) = sum_x P(x, y).
pub fn marginal_y(j: &JointDist) -> Pmf {
    let ny = j.y_alphabet().len();
    let mut probs = vec![0.0; ny];
    for row in j.probs().chunks(ny) {
        for (y, &p) in row.iter().enumerate() {
            probs[y] += p;
        }
    }
    Pmf {
        alphabet: j.y_alphabet().clone(),
        probs,
    }
}

/// Conditional P(y | x) = P(x, y) / sum_y' P(x, y').
///
/// Errors with [`ProbError::ZeroRowMass`] if any input row has zero mass;
/// callers holding raw counts should smooth first.
pub fn conditional_y_given_x(j: &JointDist) -> Result<Strategy, ProbError> {
    let ny = j.y_alphabet().len();
    let mut rows = Vec::with_capacity(j.probs().len());
    for (x, row) in j.probs().chunks(ny).enumerate() {
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(ProbError::ZeroRowMass { row: x });
        }
        rows.extend(row.iter().map(|p| p / mass));
    }
    Ok(Strategy {
        x_alphabet: j.x_alphabet().clone(),
        y_alphabet: j.y_alphabet().clone(),
        rows,
    })
}

/// Expected distortion E[d(X, Y)] = sum p(x,y) d(x,y).
pub fn expected_distortion(j: &JointDist, d: &DistortionMatrix) -> Result<f64, ProbError> {
    let got = (j.x_alphabet().len(), j.y_alphabet().len());
    let expected = (d.x_alphabet().len(), d.y_alphabet().len());
    if got != expected {
        return Err(ProbError::ShapeMismatch { got, expected });
    }
    Ok(j.probs().iter().zip(d.values()).map(|(p, v)| p * v).sum())
}

/// Build one of the textbook distortions from Table-style catalogs.
///
/// Squared and absolute need numeric labels on both alphabets; pass
/// `numeric_embedding` to override label parsing, or `None` to parse labels.
pub fn standard_distortion(
    kind: DistortionKind,
    x_alphabet: &Alphabet,
    y_alphabet: &Alphabet,
    numeric_embedding: Option<(&[f64], &[f64])>,
) -> Result<DistortionMatrix, ProbError> {
    let values = match kind {
        DistortionKind::Hamming => {
            let mut values = Vec::with_capacity(x_alphabet.len() * y_alphabet.len());
            for lx in x_alphabet.labels() {
                for ly in y_alphabet.labels() {
                    values.push(if lx == ly { 0.0 } else { 1.0 });
                }
            }
            values
        }
        DistortionKind::Squared | DistortionKind::Absolute => {
            let (xs, ys) = match numeric_embedding {
                Some((xs, ys)) => (xs.to_vec(), ys.to_vec()),
                None => {
                    let xs = x_alphabet
                        .numeric_values()
                        .ok_or_else(|| ProbError::NonNumericAlphabet("x".into()))?;
                    let ys = y_alphabet
                        .numeric_values()
                        .ok_or_else(|| ProbError::NonNumericAlphabet("y".into()))?;
                    (xs, ys)
                }
            };
            if xs.len() != x_alphabet.len() || ys.len() != y_alphabet.len() {
                return Err(ProbError::LengthMismatch {
                    got: xs.len(),
                    expected: x_alphabet.len(),
                });
            }
            let mut values = Vec::with_capacity(xs.len() * ys.len());
            for &vx in &xs {
                for &vy in &ys {
                    let diff = vx - vy;
                    values.push(match kind {
                        DistortionKind::Squared => diff * diff,
                        _ => diff.abs(),
                    });
                }
            }
            values
        }
    };
    DistortionMatrix::new(x_alphabet.clone(), y_alphabet.clone(), values)
}
