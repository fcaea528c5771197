//! Synthetic corpora, retrieval metrics and training/database-size sweeps.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use image::{ImageBuffer, Rgb};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::color_histogram::HistogramScheme;
use crate::error::{Error, Result};
use crate::fusion_search::{rank, SearchHit, Weights};
use crate::gabor_texture::GaborBankParams;
use crate::image_pipeline::ANALYSIS_SIDE;
use crate::index_store::{
    extract_corpus, scan_corpus, FeatureExtractor, FittedModel, IndexEntry, RetrievalIndex,
    DEFAULT_DISCRETIZATION_BINS,
};

/// Pixel noise added to every channel of a synthetic image.
pub const SYNTH_NOISE_SIGMA: f64 = 0.05;

/// Grating frequency band spanned by the synthetic classes, cycles/pixel.
const SYNTH_FREQ_RANGE: (f64, f64) = (0.06, 0.35);
const SYNTH_SATURATION: f64 = 0.7;
const SYNTH_CONTRAST: f64 = 0.35;

/// Class-specific grating orientation (radians), frequency and hue (degrees).
pub fn synthetic_class_style(class: usize, classes: usize) -> (f64, f64, f64) {
    let t = class as f64 / (classes - 1) as f64;
    let (lo, hi) = SYNTH_FREQ_RANGE;
    let freq = lo * (hi / lo).powf(t);
    let angle = class as f64 * PI / classes as f64;
    let hue = 360.0 * class as f64 / classes as f64;
    (angle, freq, hue)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let c = v * s;
    let hp = (h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

/// Writes `classes × per_class` 128×128 PNGs into `out/class_XX/img_YYY.png`.
///
/// Each class is a colored sinusoidal grating with its own orientation,
/// frequency and hue; each image draws a random phase and Gaussian pixel
/// noise. Output is byte-identical for a fixed seed.
pub fn generate_synthetic_corpus(
    classes: usize,
    per_class: usize,
    seed: u64,
    out: impl AsRef<Path>,
) -> Result<()> {
    if classes < 2 || per_class < 2 {
        return Err(Error::InvalidParams(format!(
            "need classes >= 2 and per_class >= 2, got {classes} and {per_class}"
        )));
    }
    let out = out.as_ref();
    let noise = Normal::new(0.0, SYNTH_NOISE_SIGMA).expect("positive sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = ANALYSIS_SIDE as u32;
    for class in 0..classes {
        let dir = out.join(format!("class_{class:02}"));
        std::fs::create_dir_all(&dir)?;
        let (angle, freq, hue) = synthetic_class_style(class, classes);
        let (sin, cos) = angle.sin_cos();
        for i in 0..per_class {
            let phase = rng.random_range(0.0..2.0 * PI);
            let mut img = ImageBuffer::new(side, side);
            for (x, y, px) in img.enumerate_pixels_mut() {
                let u = x as f64 * cos + y as f64 * sin;
                let v = 0.5 + SYNTH_CONTRAST * (2.0 * PI * freq * u + phase).cos();
                let rgb = hsv_to_rgb(hue, SYNTH_SATURATION, v);
                *px = Rgb(rgb.map(|c| {
                    let c = (c + noise.sample(&mut rng)).clamp(0.0, 1.0);
                    (c * 255.0).round() as u8
                }));
            }
            img.save(dir.join(format!("img_{i:03}.png")))
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
    }
    Ok(())
}

/// Fraction of the top `k` hits (after dropping the query itself) labeled
/// `query_label`. Zero when nothing is left.
pub fn precision_at_k(
    results: &[SearchHit],
    query_label: &str,
    query_path: Option<&str>,
    k: usize,
) -> f64 {
    let top: Vec<&SearchHit> = results
        .iter()
        .filter(|h| Some(h.path.as_str()) != query_path)
        .take(k)
        .collect();
    if top.is_empty() {
        return 0.0;
    }
    top.iter().filter(|h| h.label == query_label).count() as f64 / top.len() as f64
}

/// True when `query_label` strictly outnumbers every other label among the
/// top `k` non-self hits; ties count as a miss.
pub fn majority_correct(
    results: &[SearchHit],
    query_label: &str,
    query_path: Option<&str>,
    k: usize,
) -> bool {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for h in results
        .iter()
        .filter(|h| Some(h.path.as_str()) != query_path)
        .take(k)
    {
        *counts.entry(h.label.as_str()).or_default() += 1;
    }
    let own = counts.get(query_label).copied().unwrap_or(0);
    own > 0
        && counts
            .iter()
            .all(|(label, &c)| *label == query_label || c < own)
}

/// Accuracy and mean precision over a query set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryEvaluation {
    pub overall_accuracy: f64,
    pub mean_precision: f64,
}

/// Runs every entry as a query against `index`, excluding self-matches by path.
pub fn evaluate_queries(
    index: &RetrievalIndex,
    queries: &[IndexEntry],
    k: usize,
    weights: &Weights,
) -> Result<QueryEvaluation> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if queries.is_empty() {
        return Err(Error::InvalidParams("no queries".into()));
    }
    let scores = queries
        .par_iter()
        .map(|q| {
            let hits = rank(&q.features, index, k + 1, weights)?;
            let path = Some(q.path.as_str());
            Ok((
                majority_correct(&hits, &q.label, path, k),
                precision_at_k(&hits, &q.label, path, k),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = scores.len() as f64;
    Ok(QueryEvaluation {
        overall_accuracy: scores.iter().filter(|s| s.0).count() as f64 / n,
        mean_precision: scores.iter().map(|s| s.1).sum::<f64>() / n,
    })
}

/// Fraction of queries whose top-`k` majority class is their own class.
pub fn overall_accuracy(
    index: &RetrievalIndex,
    queries: &[IndexEntry],
    k: usize,
    weights: &Weights,
) -> Result<f64> {
    Ok(evaluate_queries(index, queries, k, weights)?.overall_accuracy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Training images per class.
    pub training_sizes: Vec<usize>,
    /// Total database images (spread evenly over classes).
    pub database_sizes: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub weights: Weights,
    pub params: GaborBankParams,
    pub bins: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            training_sizes: vec![3, 6, 12],
            database_sizes: vec![60, 90],
            k: 10,
            seed: 42,
            weights: Weights::default(),
            params: GaborBankParams::default(),
            bins: DEFAULT_DISCRETIZATION_BINS,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.training_sizes.is_empty() || self.database_sizes.is_empty() {
            return Err(Error::InvalidParams(
                "experiment needs training and database sizes".into(),
            ));
        }
        if self
            .training_sizes
            .iter()
            .chain(&self.database_sizes)
            .any(|&c| c == 0)
            || self.k == 0
        {
            return Err(Error::InvalidParams("sizes and k must be >= 1".into()));
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub training_size: usize,
    pub db_size: usize,
    pub overall_accuracy: f64,
    pub mean_precision_at_k: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyReport {
    pub rows: Vec<ReportRow>,
}

impl AccuracyReport {
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("training_size\tdb_size\toverall_accuracy\tmean_precision_at_k\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.6}",
                r.training_size, r.db_size, r.overall_accuracy, r.mean_precision_at_k
            );
        }
        out
    }

    /// Rows for one database size, ordered by training size.
    pub fn series(&self, db_size: usize) -> Vec<&ReportRow> {
        let mut rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.db_size == db_size).collect();
        rows.sort_by_key(|r| r.training_size);
        rows
    }
}

/// Extracts the corpus under `corpus` and runs the sweep.
pub fn run_experiment(spec: &ExperimentSpec, corpus: impl AsRef<Path>) -> Result<AccuracyReport> {
    spec.validate()?;
    let extractor = FeatureExtractor::new(spec.params, HistogramScheme::default())?;
    let files = scan_corpus(corpus.as_ref())?;
    let (entries, _) = extract_corpus(&files, &extractor);
    run_experiment_on_entries(spec, &entries)
}

/// Sweep over pre-extracted entries. For each (training size `t`, database
/// size `s`) cell: `t` images per class fit the column stats and reduct; a
/// disjoint, class-balanced sample of `s` images forms the database, each of
/// which is queried with itself excluded.
pub fn run_experiment_on_entries(
    spec: &ExperimentSpec,
    entries: &[IndexEntry],
) -> Result<AccuracyReport> {
    spec.validate()?;
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        by_class.entry(e.label.as_str()).or_default().push(i);
    }
    if by_class.is_empty() {
        return Err(Error::InsufficientCorpus("corpus has no images".into()));
    }
    let classes = by_class.len();

    let cells: Vec<(usize, usize)> = spec
        .database_sizes
        .iter()
        .flat_map(|&s| spec.training_sizes.iter().map(move |&t| (t, s)))
        .collect();
    for &(t, s) in &cells {
        for (c, (label, members)) in by_class.iter().enumerate() {
            let need = t + quota(s, classes, c);
            if members.len() < need {
                return Err(Error::InsufficientCorpus(format!(
                    "class {label} has {} images, cell (t={t}, s={s}) needs {need}",
                    members.len()
                )));
            }
        }
    }

    let rows = cells
        .par_iter()
        .map(|&(t, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                spec.seed ^ ((t as u64) << 32) ^ (s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let mut training = Vec::new();
            let mut database = Vec::new();
            for (c, members) in by_class.values().enumerate() {
                let mut shuffled = members.clone();
                shuffled.shuffle(&mut rng);
                let q = quota(s, classes, c);
                training.extend(shuffled[..t].iter().map(|&i| entries[i].clone()));
                database.extend(shuffled[t..t + q].iter().map(|&i| entries[i].clone()));
            }
            let model = FittedModel::fit(&training, spec.bins)?;
            let index = RetrievalIndex::assemble(
                spec.params,
                HistogramScheme::default(),
                &database,
                &model,
            )?;
            let eval = evaluate_queries(&index, &database, spec.k, &spec.weights)?;
            Ok(ReportRow {
                training_size: t,
                db_size: s,
                overall_accuracy: eval.overall_accuracy,
                mean_precision_at_k: eval.mean_precision,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyReport { rows })
}

/// Database images drawn from class `c` when `s` are spread over `classes`.
fn quota(s: usize, classes: usize, c: usize) -> usize {
    s / classes + usize::from(c < s % classes)
}
