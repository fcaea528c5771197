//! Shared fixtures and independent reference implementations for the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use mfir::index_store::IndexEntry;
use mfir::{
    ColorHistogram, GaborBankParams, GrayImage, HistogramScheme, ImageFeatures, InformationSystem,
    RetrievalIndex, TextureVector, Weights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grating(side: usize, freq: f64, angle: f64) -> GrayImage {
    let (sin, cos) = angle.sin_cos();
    GrayImage::from_fn(side, side, |x, y| {
        0.5 + 0.5 * (2.0 * PI * freq * (x as f64 * cos + y as f64 * sin)).cos()
    })
}

/// Random decision table with `|U| <= 30`, `|A| <= 8`, values in `0..3` and
/// two or three decision classes.
pub fn random_system(rng: &mut impl Rng) -> InformationSystem {
    let objects = rng.random_range(1..=30);
    let attributes = rng.random_range(1..=8);
    let classes = rng.random_range(2..=3);
    let columns: Vec<Vec<u32>> = (0..attributes)
        .map(|_| (0..objects).map(|_| rng.random_range(0..3)).collect())
        .collect();
    let decision = (0..objects).map(|_| rng.random_range(0..classes)).collect();
    InformationSystem::from_columns(&columns, decision).unwrap()
}

/// Dependency degree by pairwise comparison: an object is certain when every
/// object agreeing with it on `attrs` also shares its decision.
pub fn oracle_dependency(sys: &InformationSystem, attrs: &[usize]) -> f64 {
    let n = sys.object_count();
    if n == 0 {
        return 0.0;
    }
    let d = sys.decision();
    let certain = (0..n)
        .filter(|&x| {
            (0..n).all(|y| {
                let same = attrs.iter().all(|&a| sys.value(x, a) == sys.value(y, a));
                !same || d[x] == d[y]
            })
        })
        .count();
    certain as f64 / n as f64
}

/// Smallest attribute subset (by size, then lexicographic) reaching the full
/// dependency, enumerated by bitmask.
pub fn oracle_minimum_reduct(sys: &InformationSystem) -> Vec<usize> {
    let m = sys.attribute_count();
    let full = oracle_dependency(sys, &(0..m).collect::<Vec<_>>());
    let mut best: Option<Vec<usize>> = None;
    for mask in 0u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|a| mask & (1 << a) != 0).collect();
        if oracle_dependency(sys, &subset) == full
            && best.as_ref().is_none_or(|b| subset.len() < b.len())
        {
            best = Some(subset);
        }
    }
    best.unwrap()
}

pub fn random_histogram(rng: &mut impl Rng, bins: usize, sparsity: f64) -> Vec<f64> {
    let mut h: Vec<f64> = (0..bins)
        .map(|_| {
            if rng.random_bool(sparsity) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if h.iter().all(|&v| v == 0.0) {
        h[rng.random_range(0..bins)] = 1.0;
    }
    let total: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= total);
    h
}

pub fn random_features(rng: &mut impl Rng, params: &GaborBankParams) -> ImageFeatures {
    let scheme = HistogramScheme::default();
    let texture = (0..params.texture_len())
        .map(|_| rng.random_range(0.0..2.0))
        .collect();
    let color = random_histogram(rng, scheme.bin_count(), 0.6);
    ImageFeatures {
        texture: TextureVector(texture),
        color: ColorHistogram::from_bins(scheme, color).unwrap(),
    }
}

pub fn random_entries(rng: &mut impl Rng, rows: usize, classes: usize) -> Vec<IndexEntry> {
    let params = GaborBankParams::default();
    (0..rows)
        .map(|i| IndexEntry {
            features: random_features(rng, &params),
            label: format!("class_{:02}", i % classes),
            path: format!("class_{:02}/img_{i:03}.png", i % classes),
        })
        .collect()
}

pub fn random_index(rng: &mut impl Rng, rows: usize, classes: usize) -> RetrievalIndex {
    let entries = random_entries(rng, rows, classes);
    let bins = rng.random_range(2..=5);
    RetrievalIndex::fit(
        GaborBankParams::default(),
        HistogramScheme::default(),
        &entries,
        bins,
    )
    .unwrap()
}

/// Per-candidate distances computed from first principles.
#[derive(Debug, Clone)]
pub struct OracleRanking {
    pub texture_raw: Vec<f64>,
    pub color_raw: Vec<f64>,
    pub texture_norm: Vec<f64>,
    pub color_norm: Vec<f64>,
    pub fused: Vec<f64>,
    pub order: Vec<usize>,
}

/// Brute-force ranking: z-scores from the raw index rows, Euclidean texture
/// distance over the retained columns, Jeffrey-form JSD on the histograms,
/// 3-sigma mapping and weighted fusion. Sums run back to front so that the
/// arithmetic order differs from the library.
pub fn oracle_rank(
    query: &ImageFeatures,
    index: &RetrievalIndex,
    weights: &Weights,
) -> OracleRanking {
    let n = index.len();
    let t_len = index.texture_len();
    let column = |j: usize| (0..n).rev().map(move |r| index.texture_row(r)[j]);
    let mut mu = vec![0.0; t_len];
    let mut sd = vec![0.0; t_len];
    for j in 0..t_len {
        mu[j] = column(j).sum::<f64>() / n as f64;
        sd[j] = (column(j).map(|v| (v - mu[j]).powi(2)).sum::<f64>() / n as f64).sqrt();
    }
    let z = |v: f64, j: usize| {
        if sd[j] == 0.0 {
            0.0
        } else {
            (v - mu[j]) / sd[j]
        }
    };

    let q = query.texture.as_slice();
    let texture_raw: Vec<f64> = (0..n)
        .map(|r| {
            let row = index.texture_row(r);
            index
                .retained()
                .iter()
                .rev()
                .map(|&j| (z(q[j], j) - z(row[j], j)).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let qc = query.color.bins();
    let color_raw: Vec<f64> = (0..n)
        .map(|r| {
            let h2 = index.color_row(r);
            let term = |a: f64, b: f64| {
                if a == 0.0 {
                    0.0
                } else {
                    a * (2.0 * a / (a + b)).ln()
                }
            };
            (0..qc.len())
                .rev()
                .map(|m| term(qc[m], h2[m]) + term(h2[m], qc[m]))
                .sum::<f64>()
                .max(0.0)
        })
        .collect();

    let map = |raw: &[f64]| -> Vec<f64> {
        let mean = raw.iter().rev().sum::<f64>() / n as f64;
        let sd = (raw.iter().rev().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        raw.iter()
            .map(|d| {
                if n < 2 || sd == 0.0 {
                    0.5
                } else {
                    (0.5 + (d - mean) / (6.0 * sd)).clamp(0.0, 1.0)
                }
            })
            .collect()
    };
    let texture_norm = map(&texture_raw);
    let color_norm = map(&color_raw);
    let (wt, wc) = if index.retained().is_empty() {
        (0.0, 1.0)
    } else {
        (weights.texture(), weights.color())
    };
    let fused: Vec<f64> = (0..n)
        .map(|r| wt * texture_norm[r] + wc * color_norm[r])
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fused[a].partial_cmp(&fused[b]).unwrap().then(a.cmp(&b)));
    OracleRanking {
        texture_raw,
        color_raw,
        texture_norm,
        color_norm,
        fused,
        order,
    }
}

/// Writes a tiny two-class corpus of solid and striped PNGs.
pub fn write_tiny_corpus(root: &Path) {
    use image::{ImageBuffer, Rgb};
    for (class, base) in [("reds", [200u8, 30, 30]), ("blues", [30u8, 40, 210])] {
        let dir = root.join(class);
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..3u32 {
            let img = ImageBuffer::from_fn(40, 32, |x, y| {
                let stripe = if class == "reds" {
                    x / (2 + i)
                } else {
                    y / (3 + i)
                };
                let k = if stripe % 2 == 0 { 1.0 } else { 0.6 };
                Rgb(base.map(|c| (c as f64 * k) as u8))
            });
            img.save(dir.join(format!("img_{i}.png"))).unwrap();
        }
    }
}
