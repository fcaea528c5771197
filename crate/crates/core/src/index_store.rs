//! Building and persisting the retrieval index.
//!
//! # File format
//!
//! ```text
//! "MFIR1\n"                      6-byte magic
//! u32 little-endian              header length in bytes
//! UTF-8 JSON header              version, params, layout, labels, paths, stats, reduct
//! f64 little-endian × rows·cols  raw feature matrix, row-major
//! ```
//!
//! Each row holds the `2·M·N` raw texture statistics followed by the color
//! histogram bins. Texture columns are stored unnormalized; the column
//! statistics travel in the header and are applied at query time.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::color_histogram::{extract_with_scheme, ColorHistogram, HistogramScheme};
use crate::error::{Error, Result};
use crate::fusion_search::{ColumnStats, FeatureMatrix};
use crate::gabor_texture::{
    build_filter_bank, extract_texture_vector, GaborBankParams, GaborKernel, TextureVector,
};
use crate::image_pipeline::{load_rgb, RgbImage, ANALYSIS_SIDE};
use crate::rough_reduct::{discretize, greedy_reduct, ReductResult};

pub const MAGIC: &[u8; 6] = b"MFIR1\n";
pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_DISCRETIZATION_BINS: usize = 4;

/// Texture and color features of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFeatures {
    pub texture: TextureVector,
    pub color: ColorHistogram,
}

/// Feature extraction with a prebuilt filter bank.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    params: GaborBankParams,
    scheme: HistogramScheme,
    bank: Vec<GaborKernel>,
}

impl FeatureExtractor {
    pub fn new(params: GaborBankParams, scheme: HistogramScheme) -> Result<Self> {
        Ok(Self {
            bank: build_filter_bank(&params)?,
            params,
            scheme,
        })
    }

    pub fn params(&self) -> &GaborBankParams {
        &self.params
    }

    pub fn scheme(&self) -> HistogramScheme {
        self.scheme
    }

    /// Texture from the 128×128 luminance image, color from native resolution.
    pub fn extract(&self, image: &RgbImage) -> Result<ImageFeatures> {
        let gray = image
            .to_gray()
            .resize_bilinear(ANALYSIS_SIDE, ANALYSIS_SIDE);
        Ok(ImageFeatures {
            texture: extract_texture_vector(&gray, &self.bank)?,
            color: extract_with_scheme(image, self.scheme)?,
        })
    }

    pub fn extract_path(&self, path: impl AsRef<Path>) -> Result<ImageFeatures> {
        self.extract(&load_rgb(path)?)
    }
}

/// One image entering an index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub features: ImageFeatures,
    pub label: String,
    pub path: String,
}

/// Column statistics and reduct fitted on a set of entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub stats: ColumnStats,
    pub reduct: ReductResult,
    pub bins: usize,
}

impl FittedModel {
    pub fn fit(entries: &[IndexEntry], bins: usize) -> Result<Self> {
        let texture = texture_matrix(entries)?;
        let stats = ColumnStats::fit(&texture);
        let reduct = greedy_reduct(&discretize(&texture, bins)?);
        Ok(Self {
            stats,
            reduct,
            bins,
        })
    }
}

fn texture_matrix(entries: &[IndexEntry]) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = entries
        .iter()
        .map(|e| e.features.texture.as_slice().to_vec())
        .collect();
    FeatureMatrix::from_rows(&rows)?.with_labels(entries.iter().map(|e| e.label.clone()).collect())
}

/// Searchable corpus: raw features, normalization stats and the retained
/// texture columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex {
    params: GaborBankParams,
    scheme: HistogramScheme,
    matrix: FeatureMatrix,
    stats: ColumnStats,
    retained: Vec<usize>,
    bins: usize,
    gamma_full: f64,
    gamma_reduct: f64,
}

impl RetrievalIndex {
    /// Indexes `entries` with stats and reduct fitted on the same entries.
    pub fn fit(
        params: GaborBankParams,
        scheme: HistogramScheme,
        entries: &[IndexEntry],
        bins: usize,
    ) -> Result<Self> {
        let model = FittedModel::fit(entries, bins)?;
        Self::assemble(params, scheme, entries, &model)
    }

    /// Indexes `entries` with a model fitted elsewhere.
    pub fn assemble(
        params: GaborBankParams,
        scheme: HistogramScheme,
        entries: &[IndexEntry],
        model: &FittedModel,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let rows: Vec<Vec<f64>> = entries
            .iter()
            .map(|e| [e.features.texture.as_slice(), e.features.color.bins()].concat())
            .collect();
        let matrix = FeatureMatrix::from_rows(&rows)?
            .with_labels(entries.iter().map(|e| e.label.clone()).collect())?
            .with_paths(entries.iter().map(|e| e.path.clone()).collect())?;
        let index = Self {
            params,
            scheme,
            matrix,
            stats: model.stats.clone(),
            retained: model.reduct.retained.clone(),
            bins: model.bins,
            gamma_full: model.reduct.gamma_full,
            gamma_reduct: model.reduct.gamma_reduct,
        };
        index.validate()?;
        Ok(index)
    }

    /// Checks every structural invariant; used on construction and load.
    pub fn validate(&self) -> Result<()> {
        let corrupt = |m: String| Err(Error::CorruptIndex(m));
        self.params
            .validate()
            .map_err(|e| Error::CorruptIndex(e.to_string()))?;
        let t = self.texture_len();
        let b = self.histogram_bins();
        if self.matrix.cols() != t + b {
            return corrupt(format!(
                "{} columns, expected {}",
                self.matrix.cols(),
                t + b
            ));
        }
        if self.stats.means.len() != t || self.stats.stds.len() != t {
            return corrupt("column stats length does not match texture columns".into());
        }
        if self.stats.means.iter().any(|m| !m.is_finite())
            || self.stats.stds.iter().any(|s| !s.is_finite() || *s < 0.0)
        {
            return corrupt("column stats must be finite with non-negative stds".into());
        }
        if self.retained.windows(2).any(|w| w[0] >= w[1]) || self.retained.iter().any(|&j| j >= t) {
            return corrupt("retained columns must be ascending texture column ids".into());
        }
        if self.matrix.labels().is_none() || self.matrix.paths().is_none() {
            return corrupt("labels and paths are required".into());
        }
        if self.bins < 2 {
            return corrupt(format!("discretization bins {} < 2", self.bins));
        }
        for g in [self.gamma_full, self.gamma_reduct] {
            if !(0.0..=1.0).contains(&g) {
                return corrupt(format!("dependency {g} outside [0, 1]"));
            }
        }
        if self.gamma_full != self.gamma_reduct {
            return corrupt("reduct dependency differs from full dependency".into());
        }
        for row in 0..self.len() {
            ColorHistogram::from_bins(self.scheme, self.color_row(row).to_vec())
                .map_err(|e| Error::CorruptIndex(format!("row {row}: {e}")))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn params(&self) -> &GaborBankParams {
        &self.params
    }

    pub fn scheme(&self) -> HistogramScheme {
        self.scheme
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn stats(&self) -> &ColumnStats {
        &self.stats
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn discretization_bins(&self) -> usize {
        self.bins
    }

    pub fn gamma_full(&self) -> f64 {
        self.gamma_full
    }

    pub fn gamma_reduct(&self) -> f64 {
        self.gamma_reduct
    }

    pub fn texture_len(&self) -> usize {
        self.params.texture_len()
    }

    pub fn histogram_bins(&self) -> usize {
        self.scheme.bin_count()
    }

    pub fn texture_row(&self, row: usize) -> &[f64] {
        &self.matrix.row(row)[..self.texture_len()]
    }

    pub fn color_row(&self, row: usize) -> &[f64] {
        &self.matrix.row(row)[self.texture_len()..]
    }

    pub fn label(&self, row: usize) -> &str {
        &self.matrix.labels().expect("validated")[row]
    }

    pub fn path(&self, row: usize) -> &str {
        &self.matrix.paths().expect("validated")[row]
    }

    /// Raw texture columns with labels, as fed to the reduct.
    pub fn texture_matrix(&self) -> Result<FeatureMatrix> {
        self.matrix
            .select_columns(&(0..self.texture_len()).collect::<Vec<_>>())
    }

    /// Recomputes the reduct over this index's own rows and replaces the
    /// retained set.
    pub fn recompute_reduct(&mut self, bins: usize) -> Result<ReductResult> {
        let reduct = greedy_reduct(&discretize(&self.texture_matrix()?, bins)?);
        self.retained = reduct.retained.clone();
        self.bins = bins;
        self.gamma_full = reduct.gamma_full;
        self.gamma_reduct = reduct.gamma_reduct;
        Ok(reduct)
    }

    /// Replaces the texture statistics; for tests and custom pipelines.
    pub fn with_model(mut self, model: &FittedModel) -> Result<Self> {
        self.stats = model.stats.clone();
        self.retained = model.reduct.retained.clone();
        self.bins = model.bins;
        self.gamma_full = model.reduct.gamma_full;
        self.gamma_reduct = model.reduct.gamma_reduct;
        self.validate()?;
        Ok(self)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            version: FORMAT_VERSION,
            params: self.params,
            histogram_scheme: self.scheme,
            histogram_bins: self.histogram_bins(),
            texture_columns: self.texture_len(),
            rows: self.len(),
            columns: self.matrix.cols(),
            labels: self.matrix.labels().expect("validated").to_vec(),
            paths: self.matrix.paths().expect("validated").to_vec(),
            stats: self.stats.clone(),
            retained: self.retained.clone(),
            discretization_bins: self.bins,
            gamma_full: self.gamma_full,
            gamma_reduct: self.gamma_reduct,
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::CorruptIndex(e.to_string()))?;
        let header_len = u32::try_from(json.len())
            .map_err(|_| Error::CorruptIndex("header exceeds 4 GiB".into()))?;
        let mut out = Vec::with_capacity(10 + json.len() + self.matrix.data().len() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(&json);
        for v in self.matrix.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptIndex(m.to_string());
        let rest = bytes
            .strip_prefix(MAGIC)
            .ok_or_else(|| corrupt("bad magic"))?;
        let (len, rest) = rest
            .split_first_chunk::<4>()
            .ok_or_else(|| corrupt("truncated header length"))?;
        let len = u32::from_le_bytes(*len) as usize;
        if rest.len() < len {
            return Err(corrupt("truncated header"));
        }
        let (json, payload) = rest.split_at(len);
        let value: serde_json::Value =
            serde_json::from_slice(json).map_err(|e| Error::CorruptIndex(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| corrupt("header has no version"))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::UnsupportedVersion(
                version.min(u64::from(u32::MAX)) as u32
            ));
        }
        let header: Header =
            serde_json::from_value(value).map_err(|e| Error::CorruptIndex(e.to_string()))?;
        if header.histogram_bins != header.histogram_scheme.bin_count()
            || header.texture_columns != header.params.texture_len()
            || header.columns != header.texture_columns + header.histogram_bins
        {
            return Err(corrupt("column layout is inconsistent"));
        }
        let expected = header
            .rows
            .checked_mul(header.columns)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| corrupt("matrix size overflows"))?;
        if payload.len() != expected {
            return Err(Error::CorruptIndex(format!(
                "payload has {} bytes, expected {expected}",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let matrix = FeatureMatrix::new(header.rows, header.columns, data)
            .and_then(|m| m.with_labels(header.labels))
            .and_then(|m| m.with_paths(header.paths))
            .map_err(|e| Error::CorruptIndex(e.to_string()))?;
        let index = Self {
            params: header.params,
            scheme: header.histogram_scheme,
            matrix,
            stats: header.stats,
            retained: header.retained,
            bins: header.discretization_bins,
            gamma_full: header.gamma_full,
            gamma_reduct: header.gamma_reduct,
        };
        index.validate()?;
        Ok(index)
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    params: GaborBankParams,
    histogram_scheme: HistogramScheme,
    histogram_bins: usize,
    texture_columns: usize,
    rows: usize,
    columns: usize,
    labels: Vec<String>,
    paths: Vec<String>,
    stats: ColumnStats,
    retained: Vec<usize>,
    discretization_bins: usize,
    gamma_full: f64,
    gamma_reduct: f64,
}

/// Writes the index and waits for the data to reach the disk.
pub fn save_index(index: &RetrievalIndex, path: impl AsRef<Path>) -> Result<()> {
    let bytes = index.to_bytes()?;
    let mut file = File::create(path)?;
    file.write_all(&bytes)?;
    file.sync_all()?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<RetrievalIndex> {
    RetrievalIndex::from_bytes(&std::fs::read(path)?)
}

/// An image file found under a corpus root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFile {
    pub path: PathBuf,
    /// Path relative to the root, `/`-separated.
    pub relative: String,
    /// Name of the immediate parent directory.
    pub label: String,
}

/// Lists regular files under `root` in sorted order, skipping hidden entries.
pub fn scan_corpus(root: impl AsRef<Path>) -> Result<Vec<CorpusFile>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", root.display()),
        )));
    }
    let mut files = Vec::new();
    let walker = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry.map_err(|e| Error::Io(e.into()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.into_path();
        let rel = path
            .strip_prefix(root)
            .expect("walkdir yields children of root");
        let relative = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let parent = path.parent().expect("file has a parent");
        let label = parent
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        files.push(CorpusFile {
            path,
            relative,
            label,
        });
    }
    Ok(files)
}

/// Extracts features for every decodable file, in order. Returns the entries
/// and the number of files that failed to decode.
pub fn extract_corpus(
    files: &[CorpusFile],
    extractor: &FeatureExtractor,
) -> (Vec<IndexEntry>, usize) {
    let results: Vec<Option<IndexEntry>> = files
        .par_iter()
        .map(|f| match extractor.extract_path(&f.path) {
            Ok(features) => Some(IndexEntry {
                features,
                label: f.label.clone(),
                path: f.relative.clone(),
            }),
            Err(e) => {
                log::warn!("skipping {}: {e}", f.path.display());
                None
            }
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    (results.into_iter().flatten().collect(), skipped)
}

/// Indexes every image under `image_root`, labeled by parent directory name.
pub fn build_index(
    image_root: impl AsRef<Path>,
    params: GaborBankParams,
    bins: usize,
) -> Result<RetrievalIndex> {
    Ok(build_index_with_report(image_root, params, bins)?.0)
}

/// Like [`build_index`], also returning the count of skipped files.
pub fn build_index_with_report(
    image_root: impl AsRef<Path>,
    params: GaborBankParams,
    bins: usize,
) -> Result<(RetrievalIndex, usize)> {
    let root = image_root.as_ref();
    let extractor = FeatureExtractor::new(params, HistogramScheme::default())?;
    let files = scan_corpus(root)?;
    let (entries, skipped) = extract_corpus(&files, &extractor);
    if entries.is_empty() {
        return Err(Error::NoImagesFound(root.to_path_buf()));
    }
    let index = RetrievalIndex::fit(params, extractor.scheme(), &entries, bins)?;
    Ok((index, skipped))
}
