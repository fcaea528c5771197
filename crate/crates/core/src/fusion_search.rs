//! Feature normalization, per-channel distances, fusion and ranking.
//!
//! Texture columns are z-scored against corpus statistics and compared with
//! Euclidean distance over the reduct-retained columns. Color histograms are
//! compared with the symmetric divergence
//! `Σ H log(2H/(H+H')) + H' log(2H'/(H+H'))`. Each channel's distances to all
//! candidates are then mapped through `½(1 + (D − μ_D)/(3σ_D))`, clamped to
//! `[0, 1]`, and the two channels are blended with a weighted sum.

use serde::{Deserialize, Serialize};

use crate::color_histogram::ColorHistogram;
use crate::error::{Error, Result};
use crate::index_store::{ImageFeatures, RetrievalIndex};

/// Row-per-image feature table with optional class labels and source paths.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    labels: Option<Vec<String>>,
    paths: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidParams(
                "feature matrix needs at least one row".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "feature matrix entries must be finite".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            data,
            labels: None,
            paths: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                actual: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                actual: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_paths(mut self, paths: Vec<String>) -> Result<Self> {
        if paths.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                actual: paths.len(),
            });
        }
        self.paths = Some(paths);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn paths(&self) -> Option<&[String]> {
        self.paths.as_deref()
    }

    /// Copy restricted to the given columns, keeping labels and paths.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.cols) {
            return Err(Error::UnknownAttribute {
                attribute: bad,
                count: self.cols,
            });
        }
        let data = (0..self.rows)
            .flat_map(|i| columns.iter().map(move |&j| self.get(i, j)))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: columns.len(),
            data,
            labels: self.labels.clone(),
            paths: self.paths.clone(),
        })
    }
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ColumnStats {
    pub fn fit(matrix: &FeatureMatrix) -> Self {
        let n = matrix.rows() as f64;
        let (means, stds) = (0..matrix.cols())
            .map(|j| {
                let col = matrix.column(j);
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                (mean, var.sqrt())
            })
            .unzip();
        Self { means, stds }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

#[inline]
fn zscore(v: f64, mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        (v - mean) / std
    } else {
        0.0
    }
}

/// Z-scores every column; constant columns become all-zero.
pub fn internal_normalize(matrix: &FeatureMatrix) -> (FeatureMatrix, ColumnStats) {
    let stats = ColumnStats::fit(matrix);
    let cols = matrix.cols();
    let data = matrix
        .data()
        .iter()
        .enumerate()
        .map(|(k, &v)| zscore(v, stats.means[k % cols], stats.stds[k % cols]))
        .collect();
    let normalized = FeatureMatrix {
        data,
        ..matrix.clone()
    };
    (normalized, stats)
}

/// Query-time counterpart of [`internal_normalize`].
pub fn apply_column_stats(vector: &[f64], stats: &ColumnStats) -> Result<Vec<f64>> {
    if vector.len() != stats.len() {
        return Err(Error::LengthMismatch {
            expected: stats.len(),
            actual: vector.len(),
        });
    }
    Ok(vector
        .iter()
        .zip(stats.means.iter().zip(&stats.stds))
        .map(|(&v, (&m, &s))| zscore(v, m, s))
        .collect())
}

/// Histogram divergence over raw bins, natural log, `0·log(·) = 0`.
pub fn jsd_bins(h: &[f64], h2: &[f64]) -> Result<f64> {
    if h.len() != h2.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: h2.len(),
        });
    }
    let term = |p: f64, sum: f64| {
        if p > 0.0 {
            p * (2.0 * p / sum).ln()
        } else {
            0.0
        }
    };
    let d: f64 = h
        .iter()
        .zip(h2)
        .map(|(&p, &q)| {
            let sum = p + q;
            if sum > 0.0 {
                term(p, sum) + term(q, sum)
            } else {
                0.0
            }
        })
        .sum();
    Ok(d.max(0.0))
}

pub fn jsd_distance(h: &ColorHistogram, h2: &ColorHistogram) -> Result<f64> {
    jsd_bins(h.bins(), h2.bins())
}

/// Euclidean distance over the `retained` columns only.
pub fn texture_distance(a: &[f64], b: &[f64], retained: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if let Some(&bad) = retained.iter().find(|&&j| j >= a.len()) {
        return Err(Error::UnknownAttribute {
            attribute: bad,
            count: a.len(),
        });
    }
    Ok(retained
        .iter()
        .map(|&j| (a[j] - b[j]) * (a[j] - b[j]))
        .sum::<f64>()
        .sqrt())
}

/// Mean, population std and mapped values of one channel's distances.
fn external_stats(raw: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let std = (raw.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n).sqrt();
    let mapped = if std > 0.0 {
        raw.iter()
            .map(|d| (0.5 * (1.0 + (d - mean) / (3.0 * std))).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.5; raw.len()]
    };
    (mean, std, mapped)
}

/// Maps raw distances into `[0, 1]` with the 3-sigma affine transform.
pub fn external_normalize(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.len() < 2 {
        return Err(Error::TooFewCandidates(raw.len()));
    }
    Ok(external_stats(raw).2)
}

/// Texture/color blend weights. Non-negative, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    texture: f64,
    color: f64,
}

impl Weights {
    pub fn new(texture: f64, color: f64) -> Result<Self> {
        let ok = texture.is_finite()
            && color.is_finite()
            && texture >= 0.0
            && color >= 0.0
            && (texture + color - 1.0).abs() <= 1e-9;
        if ok {
            Ok(Self { texture, color })
        } else {
            Err(Error::InvalidWeights { texture, color })
        }
    }

    pub fn texture(&self) -> f64 {
        self.texture
    }

    pub fn color(&self) -> f64 {
        self.color
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            texture: 0.5,
            color: 0.5,
        }
    }
}

impl std::str::FromStr for Weights {
    type Err = Error;

    /// Parses `"t,c"`, e.g. `"0.5,0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("weights must look like `t,c`, got {s:?}"));
        let (t, c) = s.split_once(',').ok_or_else(bad)?;
        let t = t.trim().parse().map_err(|_| bad())?;
        let c = c.trim().parse().map_err(|_| bad())?;
        Weights::new(t, c)
    }
}

pub fn fuse(texture_star: f64, color_star: f64, weights: &Weights) -> Result<f64> {
    for v in [texture_star, color_star] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParams(format!(
                "normalized distance {v} outside [0, 1]"
            )));
        }
    }
    Ok(weights.texture * texture_star + weights.color * color_star)
}

/// Distances from one query to every indexed image.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub texture_raw: Vec<f64>,
    pub color_raw: Vec<f64>,
    /// `(μ_D, σ_D)` of the raw texture distances.
    pub texture_moments: (f64, f64),
    pub color_moments: (f64, f64),
    pub texture_norm: Vec<f64>,
    pub color_norm: Vec<f64>,
    pub fused: Vec<f64>,
}

impl DistanceProfile {
    /// Computes raw, normalized and fused distances for every candidate.
    ///
    /// With no retained texture columns the texture channel carries no
    /// information and the fused distance is the color distance alone. A
    /// single-candidate index has no spread, so both channels map to 0.5.
    pub fn compute(
        query: &ImageFeatures,
        index: &RetrievalIndex,
        weights: &Weights,
    ) -> Result<Self> {
        let n = index.len();
        if n == 0 {
            return Err(Error::EmptyIndex);
        }
        let q_texture = apply_column_stats(query.texture.as_slice(), index.stats())?;
        let q_color = query.color.bins();
        if q_color.len() != index.histogram_bins() {
            return Err(Error::LengthMismatch {
                expected: index.histogram_bins(),
                actual: q_color.len(),
            });
        }
        let retained = index.retained();
        let mut texture_raw = Vec::with_capacity(n);
        let mut color_raw = Vec::with_capacity(n);
        for row in 0..n {
            let t = apply_column_stats(index.texture_row(row), index.stats())?;
            texture_raw.push(texture_distance(&q_texture, &t, retained)?);
            color_raw.push(jsd_bins(q_color, index.color_row(row))?);
        }
        let (tm, ts, texture_norm) = external_stats(&texture_raw);
        let (cm, cs, color_norm) = external_stats(&color_raw);
        let (texture_norm, color_norm) = if n == 1 {
            (vec![0.5], vec![0.5])
        } else {
            (texture_norm, color_norm)
        };
        let effective = if retained.is_empty() {
            Weights::new(0.0, 1.0)?
        } else {
            *weights
        };
        let fused = texture_norm
            .iter()
            .zip(&color_norm)
            .map(|(&t, &c)| fuse(t, c, &effective))
            .collect::<Result<_>>()?;
        Ok(Self {
            texture_raw,
            color_raw,
            texture_moments: (tm, ts),
            color_moments: (cm, cs),
            texture_norm,
            color_norm,
            fused,
        })
    }

    /// Candidate rows by ascending fused distance, ties by row order.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.fused.len()).collect();
        order.sort_by(|&a, &b| self.fused[a].total_cmp(&self.fused[b]).then(a.cmp(&b)));
        order
    }
}

/// One ranked result.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    pub row: usize,
    pub path: String,
    pub label: String,
    pub texture_raw: f64,
    pub color_raw: f64,
    pub texture_norm: f64,
    pub color_norm: f64,
    pub fused: f64,
}

/// The `k` closest indexed images to `query` (fewer if the index is smaller).
pub fn rank(
    query: &ImageFeatures,
    index: &RetrievalIndex,
    k: usize,
    weights: &Weights,
) -> Result<Vec<SearchHit>> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be >= 1".into()));
    }
    let profile = DistanceProfile::compute(query, index, weights)?;
    Ok(profile
        .order()
        .into_iter()
        .take(k)
        .map(|row| SearchHit {
            row,
            path: index.path(row).to_string(),
            label: index.label(row).to_string(),
            texture_raw: profile.texture_raw[row],
            color_raw: profile.color_raw[row],
            texture_norm: profile.texture_norm[row],
            color_norm: profile.color_norm[row],
            fused: profile.fused[row],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn internal_normalize_small_column() {
        let m =
            FeatureMatrix::from_rows(&[vec![1.0, 4.0], vec![2.0, 4.0], vec![3.0, 4.0]]).unwrap();
        let (n, stats) = internal_normalize(&m);
        assert_eq!(stats.means, vec![2.0, 4.0]);
        assert!((stats.stds[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (i, e) in expected.iter().enumerate() {
            assert!((n.get(i, 0) - e).abs() < 1e-12);
            assert_eq!(n.get(i, 1), 0.0);
        }
    }

    #[test]
    fn apply_stats_examples() {
        let stats = ColumnStats {
            means: vec![1.0, -2.0, 0.5],
            stds: vec![0.5, 2.0, 0.0],
        };
        assert_eq!(
            apply_column_stats(&stats.means.clone(), &stats).unwrap(),
            vec![0.0; 3]
        );
        let v = [1.0 + 2.0 * 0.5, -2.0 + 2.0 * 2.0, 9.0];
        assert_eq!(apply_column_stats(&v, &stats).unwrap(), vec![2.0, 2.0, 0.0]);
        assert!(matches!(
            apply_column_stats(&[1.0], &stats),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 1
            })
        ));
    }

    #[test]
    fn stats_reproduce_normalized_rows() {
        let m =
            FeatureMatrix::from_rows(&[vec![0.3, 9.0], vec![1.7, -1.0], vec![0.2, 4.0]]).unwrap();
        let (n, stats) = internal_normalize(&m);
        for i in 0..3 {
            assert_eq!(apply_column_stats(m.row(i), &stats).unwrap(), n.row(i));
        }
    }

    #[test]
    fn jsd_examples() {
        assert_eq!(jsd_bins(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let d = jsd_bins(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 2.0 * LN_2).abs() < 1e-12);
        assert!(jsd_bins(&[1.0], &[0.5, 0.5]).is_err());
        assert_eq!(jsd_bins(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn texture_distance_examples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(texture_distance(&a, &a, &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(
            texture_distance(&a, &[1.0, 5.0, 3.0], &[0, 1, 2]).unwrap(),
            3.0
        );
        assert_eq!(texture_distance(&a, &[9.0, 9.0, 9.0], &[]).unwrap(), 0.0);
        assert!(texture_distance(&a, &[1.0], &[0]).is_err());
        assert!(texture_distance(&a, &a, &[3]).is_err());
    }

    #[test]
    fn external_normalize_examples() {
        let out = external_normalize(&[0.0, 10.0]).unwrap();
        assert!((out[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((out[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(external_normalize(&[4.0, 4.0, 4.0]).unwrap(), vec![0.5; 3]);
        assert!(matches!(
            external_normalize(&[1.0]),
            Err(Error::TooFewCandidates(1))
        ));
        // 16 values at the mean and one at each of μ ± 3σ give μ = 5, σ = 1.
        let mut raw = vec![5.0; 16];
        raw.extend([2.0, 8.0]);
        let out = external_normalize(&raw).unwrap();
        assert_eq!(out[0], 0.5);
        assert_eq!(out[16], 0.0);
        assert_eq!(out[17], 1.0);
        // outliers saturate
        let out =
            external_normalize(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 100.0]).unwrap();
        assert_eq!(out[9], 1.0);
    }

    #[test]
    fn fuse_examples() {
        let w = Weights::default();
        assert_eq!(fuse(0.2, 0.8, &w).unwrap(), 0.5);
        assert_eq!(
            fuse(0.37, 0.9, &Weights::new(1.0, 0.0).unwrap()).unwrap(),
            0.37
        );
        assert_eq!(fuse(0.0, 0.0, &w).unwrap(), 0.0);
        assert!(fuse(1.2, 0.0, &w).is_err());
    }

    #[test]
    fn weights_validation_and_parsing() {
        assert!(Weights::new(0.7, 0.4).is_err());
        assert!(Weights::new(-0.1, 1.1).is_err());
        assert!(Weights::new(f64::NAN, 1.0).is_err());
        let w: Weights = "1,0".parse().unwrap();
        assert_eq!((w.texture(), w.color()), (1.0, 0.0));
        assert!("0.5".parse::<Weights>().is_err());
        assert!("a,b".parse::<Weights>().is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(FeatureMatrix::new(0, 2, vec![]).is_err());
        assert!(FeatureMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(FeatureMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(FeatureMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        let m = FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(m.clone().with_labels(vec![]).is_err());
        let s = m.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.row(0), &[3.0, 1.0]);
        assert!(m.select_columns(&[3]).is_err());
    }
}
