//! Quantized HSV color histograms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_pipeline::RgbImage;

const HUE_BINS: usize = 8;
const SAT_BINS: usize = 3;
const VAL_BINS: usize = 3;

/// Binning scheme of a [`ColorHistogram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum HistogramScheme {
    /// 8 hue × 3 saturation × 3 value bins; index = h·9 + s·3 + v.
    #[default]
    #[serde(rename = "hsv-8x3x3")]
    Hsv8x3x3,
}

impl HistogramScheme {
    pub fn bin_count(self) -> usize {
        match self {
            HistogramScheme::Hsv8x3x3 => HUE_BINS * SAT_BINS * VAL_BINS,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            HistogramScheme::Hsv8x3x3 => "hsv-8x3x3",
        }
    }

    /// Bin index for one RGB pixel.
    pub fn bin_of(self, rgb: [f64; 3]) -> usize {
        match self {
            HistogramScheme::Hsv8x3x3 => {
                let (h, s, v) = rgb_to_hsv(rgb);
                let hb = ((h / (360.0 / HUE_BINS as f64)) as usize).min(HUE_BINS - 1);
                let sb = ((s * SAT_BINS as f64) as usize).min(SAT_BINS - 1);
                let vb = ((v * VAL_BINS as f64) as usize).min(VAL_BINS - 1);
                hb * SAT_BINS * VAL_BINS + sb * VAL_BINS + vb
            }
        }
    }
}

impl fmt::Display for HistogramScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for HistogramScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hsv-8x3x3" => Ok(HistogramScheme::Hsv8x3x3),
            other => Err(Error::InvalidParams(format!(
                "unknown histogram scheme {other:?}"
            ))),
        }
    }
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv([r, g, b]: [f64; 3]) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta <= 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (h.rem_euclid(360.0), s, max)
}

/// Normalized color histogram: non-negative bins summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram {
    scheme: HistogramScheme,
    bins: Vec<f64>,
}

impl ColorHistogram {
    /// Wraps precomputed bins, checking length, sign and normalization.
    pub fn from_bins(scheme: HistogramScheme, bins: Vec<f64>) -> Result<Self> {
        if bins.len() != scheme.bin_count() {
            return Err(Error::LengthMismatch {
                expected: scheme.bin_count(),
                actual: bins.len(),
            });
        }
        if bins.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidParams(
                "histogram bins must be finite and >= 0".into(),
            ));
        }
        let sum: f64 = bins.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!(
                "histogram sums to {sum}, not 1"
            )));
        }
        Ok(Self { scheme, bins })
    }

    pub fn scheme(&self) -> HistogramScheme {
        self.scheme
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<f64> {
        self.bins
    }
}

pub fn extract_color_histogram(image: &RgbImage) -> Result<ColorHistogram> {
    extract_with_scheme(image, HistogramScheme::default())
}

pub fn extract_with_scheme(image: &RgbImage, scheme: HistogramScheme) -> Result<ColorHistogram> {
    let pixels = image.pixels();
    if pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut counts = vec![0usize; scheme.bin_count()];
    for &p in pixels {
        counts[scheme.bin_of(p)] += 1;
    }
    let n = pixels.len() as f64;
    Ok(ColorHistogram {
        scheme,
        bins: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}
