//! File formats shared project-wide.
//!
//! Matrix CSV: first row carries the y labels (after an empty corner
//! cell), the first column carries the x labels, and cell (i, j) holds the
//! value. UTF-8, '.' decimal separator, no thousands separators. Curve and
//! profile CSVs are plain column files with a header row.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::analysis::AlignedProfile;
use crate::blahut::RdCurve;
use crate::probcore::{Alphabet, CountMatrix, DistortionMatrix, Pmf, ProbError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("empty matrix: {0}")]
    EmptyMatrix(String),
    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("cell ({x_label}, {y_label}) holds '{cell}': {reason}")]
    BadCell {
        x_label: String,
        y_label: String,
        cell: String,
        reason: String,
    },
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn write_matrix<W: Write, V: Display>(
    mut w: W,
    x_labels: &[String],
    y_labels: &[String],
    values: impl Iterator<Item = V>,
) -> Result<(), FormatError> {
    for y in y_labels {
        write!(w, ",{y}")?;
    }
    writeln!(w)?;
    let mut values = values;
    for x in x_labels {
        write!(w, "{x}")?;
        for _ in y_labels {
            let v = values.next().expect("value count matches shape");
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_count_matrix(path: &Path, c: &CountMatrix) -> Result<(), FormatError> {
    let w = BufWriter::new(File::create(path)?);
    write_matrix(
        w,
        c.x_alphabet().labels(),
        c.y_alphabet().labels(),
        c.counts().iter(),
    )
}

pub fn write_value_matrix(
    path: &Path,
    x_alphabet: &Alphabet,
    y_alphabet: &Alphabet,
    values: &[f64],
) -> Result<(), FormatError> {
    let w = BufWriter::new(File::create(path)?);
    write_matrix(w, x_alphabet.labels(), y_alphabet.labels(), values.iter())
}

pub fn write_distortion_matrix(path: &Path, d: &DistortionMatrix) -> Result<(), FormatError> {
    write_value_matrix(path, d.x_alphabet(), d.y_alphabet(), d.values())
}

/// Parsed generic matrix: labels plus raw string cells.
struct RawMatrix {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    cells: Vec<String>,
}

fn read_matrix(path: &Path) -> Result<RawMatrix, FormatError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader
        .lines()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| FormatError::EmptyMatrix(path.display().to_string()))?;
    let y_labels: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    if y_labels.is_empty() {
        return Err(FormatError::EmptyMatrix(path.display().to_string()));
    }
    let mut x_labels = Vec::new();
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut parts = line.split(',').map(|s| s.trim().to_string());
        x_labels.push(parts.next().expect("split yields at least one part"));
        let row: Vec<String> = parts.collect();
        if row.len() != y_labels.len() {
            return Err(FormatError::RaggedRow {
                row: i + 1,
                got: row.len(),
                expected: y_labels.len(),
            });
        }
        cells.extend(row);
    }
    if x_labels.is_empty() {
        return Err(FormatError::EmptyMatrix(path.display().to_string()));
    }
    Ok(RawMatrix {
        x_labels,
        y_labels,
        cells,
    })
}

pub fn read_count_matrix(path: &Path) -> Result<CountMatrix, FormatError> {
    let raw = read_matrix(path)?;
    let ny = raw.y_labels.len();
    let counts = raw
        .cells
        .iter()
        .enumerate()
        .map(|(idx, cell)| {
            cell.parse::<u64>().map_err(|_| FormatError::BadCell {
                x_label: raw.x_labels[idx / ny].clone(),
                y_label: raw.y_labels[idx % ny].clone(),
                cell: cell.clone(),
                reason: "expected a nonnegative integer count".into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CountMatrix::new(
        Alphabet::new(raw.x_labels)?,
        Alphabet::new(raw.y_labels)?,
        counts,
    )?)
}

fn parse_f64_cells(raw: &RawMatrix) -> Result<Vec<f64>, FormatError> {
    let ny = raw.y_labels.len();
    raw.cells
        .iter()
        .enumerate()
        .map(|(idx, cell)| {
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| FormatError::BadCell {
                    x_label: raw.x_labels[idx / ny].clone(),
                    y_label: raw.y_labels[idx % ny].clone(),
                    cell: cell.clone(),
                    reason: "expected a finite number".into(),
                })
        })
        .collect()
}

pub fn read_distortion_matrix(path: &Path) -> Result<DistortionMatrix, FormatError> {
    let raw = read_matrix(path)?;
    let values = parse_f64_cells(&raw)?;
    Ok(DistortionMatrix::new(
        Alphabet::new(raw.x_labels)?,
        Alphabet::new(raw.y_labels)?,
        values,
    )?)
}

/// Source pmf as a one-column matrix CSV: header `,p`, rows `label,prob`.
pub fn read_source_pmf(path: &Path) -> Result<Pmf, FormatError> {
    let raw = read_matrix(path)?;
    let values = parse_f64_cells(&raw)?;
    if raw.y_labels.len() != 1 {
        return Err(FormatError::RaggedRow {
            row: 0,
            got: raw.y_labels.len(),
            expected: 1,
        });
    }
    Ok(Pmf::new(Alphabet::new(raw.x_labels)?, values)?)
}

pub fn write_source_pmf(path: &Path, p: &Pmf) -> Result<(), FormatError> {
    let w = BufWriter::new(File::create(path)?);
    write_matrix(
        w,
        p.alphabet().labels(),
        &["p".to_string()],
        p.probs().iter(),
    )
}

/// Curve CSV with columns lambda, rate_bits, distortion, iterations, converged.
pub fn write_rd_curve(path: &Path, curve: &RdCurve) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "lambda,rate_bits,distortion,iterations,converged")?;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.lambda, p.rate_bits, p.distortion, p.iterations, p.converged
        )?;
    }
    Ok(())
}

/// Profile CSV: shift_radians, mean_distortion, plus one column per source
/// row when `include_rows` is set.
pub fn write_profile(
    path: &Path,
    profile: &AlignedProfile,
    row_labels: &[String],
    include_rows: bool,
) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "shift_radians,mean_distortion")?;
    if include_rows {
        for label in row_labels {
            write!(w, ",row_{label}")?;
        }
    }
    writeln!(w)?;
    for j in 0..profile.shifts.len() {
        write!(w, "{:.6},{}", profile.shifts[j], profile.mean[j])?;
        if include_rows {
            for row in &profile.per_row {
                write!(w, ",{}", row[j])?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Write a JSON sidecar next to `main_path` (same name + ".json").
pub fn write_sidecar<T: serde::Serialize>(
    main_path: &Path,
    sidecar: &T,
) -> Result<std::path::PathBuf, FormatError> {
    let mut side = main_path.as_os_str().to_owned();
    side.push(".json");
    let side = std::path::PathBuf::from(side);
    let w = BufWriter::new(File::create(&side)?);
    serde_json::to_writer_pretty(w, sidecar)?;
    Ok(side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn count_matrix_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let c = CountMatrix::new(
            Alphabet::new(["a", "b"]).unwrap(),
            Alphabet::new(["u", "v", "w"]).unwrap(),
            vec![1, 0, 7, 3, 2, 9],
        )
        .unwrap();
        write_count_matrix(&path, &c).unwrap();
        let back = read_count_matrix(&path).unwrap();
        assert_eq!(back.counts(), c.counts());
        assert_eq!(back.x_alphabet().labels(), c.x_alphabet().labels());
        assert_eq!(back.y_alphabet().labels(), c.y_alphabet().labels());
    }

    #[test]
    fn bad_cell_is_named() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, ",u,v\na,1,2\nb,-3,4\n").unwrap();
        let err = read_count_matrix(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(b, u)") && msg.contains("-3"), "{msg}");
    }

    #[test]
    fn empty_file_is_diagnosed() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            read_count_matrix(&path),
            Err(FormatError::EmptyMatrix(_))
        ));
    }

    #[test]
    fn distortion_matrix_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = DistortionMatrix::new(
            Alphabet::new(["0", "1"]).unwrap(),
            Alphabet::new(["0", "1"]).unwrap(),
            vec![0.0, 1.5, 2.25, 0.0],
        )
        .unwrap();
        write_distortion_matrix(&path, &d).unwrap();
        let back = read_distortion_matrix(&path).unwrap();
        assert_eq!(back.values(), d.values());
    }

    #[test]
    fn source_pmf_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = Pmf::new(Alphabet::indexed(3), vec![0.5, 0.25, 0.25]).unwrap();
        write_source_pmf(&path, &p).unwrap();
        let back = read_source_pmf(&path).unwrap();
        assert_eq!(back.probs(), p.probs());
    }
}
