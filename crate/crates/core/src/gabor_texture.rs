//! Gabor filter bank and texture statistics.
//!
//! The bank follows the usual dyadic construction: `scales` center
//! frequencies spaced geometrically between `u_low` and `u_high`,
//! `orientations` angles evenly covering `[0, π)`, and Gaussian envelopes
//! sized so that the half-peak contours of neighboring filters touch in the
//! frequency plane. Every kernel is normalized to unit peak frequency gain and
//! then has its complex tap mean removed, so flat image regions produce no
//! response.
//!
//! Responses are summarized per filter by the mean and population standard
//! deviation of the response magnitude over all pixels.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_pipeline::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborBankParams {
    pub scales: usize,
    pub orientations: usize,
    /// Lowest center frequency, cycles/pixel.
    pub u_low: f64,
    /// Highest center frequency, cycles/pixel.
    pub u_high: f64,
    pub kernel_radius: usize,
}

impl Default for GaborBankParams {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 6,
            u_low: 0.05,
            u_high: 0.4,
            kernel_radius: 15,
        }
    }
}

impl GaborBankParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.scales < 2 {
            return bad(format!("scales must be >= 2, got {}", self.scales));
        }
        if self.orientations < 1 {
            return bad("orientations must be >= 1".into());
        }
        if !(self.u_low > 0.0 && self.u_low < self.u_high && self.u_high < 0.5) {
            return bad(format!(
                "need 0 < u_low < u_high < 0.5, got u_low={} u_high={}",
                self.u_low, self.u_high
            ));
        }
        if self.kernel_radius < 1 {
            return bad("kernel_radius must be >= 1".into());
        }
        Ok(())
    }

    /// Number of filters in the bank.
    pub fn filter_count(&self) -> usize {
        self.scales * self.orientations
    }

    /// Length of the texture vector: a mean and a std per filter.
    pub fn texture_len(&self) -> usize {
        2 * self.filter_count()
    }

    /// Ratio between consecutive center frequencies.
    pub fn scale_ratio(&self) -> f64 {
        (self.u_high / self.u_low).powf(1.0 / (self.scales - 1) as f64)
    }

    pub fn center_frequency(&self, scale: usize) -> f64 {
        self.u_low * self.scale_ratio().powi(scale as i32)
    }

    pub fn orientation_angle(&self, orientation: usize) -> f64 {
        orientation as f64 * PI / self.orientations as f64
    }
}

/// One complex filter of the bank, taps on a `(2r+1)²` grid.
///
/// Tap `(tx, ty)` holds the filter value at offset `(tx - r, ty - r)`, with
/// `x` running along image columns and `y` down image rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    pub scale: usize,
    pub orientation: usize,
    pub center_frequency: f64,
    pub angle: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    radius: usize,
    taps: Vec<Complex64>,
}

impl GaborKernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    /// Tap at spatial offset `(dx, dy)` from the kernel center.
    pub fn tap(&self, dx: isize, dy: isize) -> Complex64 {
        let r = self.radius as isize;
        assert!(
            dx.abs() <= r && dy.abs() <= r,
            "offset outside kernel support"
        );
        self.taps[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }

    pub fn tap_sum(&self) -> Complex64 {
        self.taps.iter().sum()
    }
}

/// Builds the `scales × orientations` bank, scale-major (orientation fastest).
pub fn build_filter_bank(params: &GaborBankParams) -> Result<Vec<GaborKernel>> {
    params.validate()?;
    let a = params.scale_ratio();
    let two_ln2 = 2.0 * LN_2;
    let u_high = params.u_high;

    // Frequency-domain envelope widths of the highest-frequency filter.
    let sigma_u = (a - 1.0) * u_high / ((a + 1.0) * two_ln2.sqrt());
    let sigma_v = (PI / (2.0 * params.orientations as f64)).tan()
        * (u_high - two_ln2 * sigma_u * sigma_u / u_high)
        / (two_ln2 - two_ln2 * two_ln2 * sigma_u * sigma_u / (u_high * u_high)).sqrt();
    let base_sx = 1.0 / (2.0 * PI * sigma_u);
    let base_sy = 1.0 / (2.0 * PI * sigma_v);

    let r = params.kernel_radius as isize;
    let side = params.kernel_radius * 2 + 1;
    let mut bank = Vec::with_capacity(params.filter_count());
    for scale in 0..params.scales {
        // Dilation of the mother filter down from u_high to this scale.
        let dilation = a.powi((params.scales - 1 - scale) as i32);
        let sigma_x = base_sx * dilation;
        let sigma_y = base_sy * dilation;
        let freq = params.center_frequency(scale);
        let norm = 1.0 / (2.0 * PI * sigma_x * sigma_y);
        for orientation in 0..params.orientations {
            let angle = params.orientation_angle(orientation);
            let (sin, cos) = angle.sin_cos();
            let mut taps = Vec::with_capacity(side * side);
            for dy in -r..=r {
                for dx in -r..=r {
                    let (x, y) = (dx as f64, dy as f64);
                    let xr = x * cos + y * sin;
                    let yr = -x * sin + y * cos;
                    let envelope = norm
                        * (-0.5 * (xr * xr / (sigma_x * sigma_x) + yr * yr / (sigma_y * sigma_y)))
                            .exp();
                    taps.push(Complex64::from_polar(envelope, 2.0 * PI * freq * xr));
                }
            }
            let mean = taps.iter().sum::<Complex64>() / (taps.len() as f64);
            taps.iter_mut().for_each(|t| *t -= mean);
            bank.push(GaborKernel {
                scale,
                orientation,
                center_frequency: freq,
                angle,
                sigma_x,
                sigma_y,
                radius: params.kernel_radius,
                taps,
            });
        }
    }
    Ok(bank)
}

/// Complex filter response, same dimensions as the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Complex64>,
}

impl ResponseMap {
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.values[y * self.width + x]
    }
}

/// Symmetric reflection of `i` into `0..n` (edge sample repeated).
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Direct spatial convolution with the conjugated kernel:
/// `out(p) = Σ_d I(p - d) · conj(g(d))`, reflect-padded at the borders.
pub fn convolve_response(image: &GrayImage, kernel: &GaborKernel) -> ResponseMap {
    let (w, h) = (image.width(), image.height());
    let r = kernel.radius() as isize;
    let conj: Vec<Complex64> = kernel.taps().iter().map(|t| t.conj()).collect();
    let side = kernel.side();
    let src = image.values();
    let mut values = vec![Complex64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for (ty, row) in conj.chunks_exact(side).enumerate() {
                let sy = reflect(y as isize - (ty as isize - r), h);
                let line = &src[sy * w..(sy + 1) * w];
                for (tx, tap) in row.iter().enumerate() {
                    let sx = reflect(x as isize - (tx as isize - r), w);
                    acc += tap * line[sx];
                }
            }
            values[y * w + x] = acc;
        }
    }
    ResponseMap {
        width: w,
        height: h,
        values,
    }
}

/// Mean and population standard deviation of `|response|`.
pub fn texture_stats(response: &ResponseMap) -> (f64, f64) {
    magnitude_stats(response.values.iter().map(|z| z.norm()))
}

fn magnitude_stats(mags: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (sum, n) = mags.clone().fold((0.0, 0usize), |(s, n), m| (s + m, n + 1));
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = sum / n as f64;
    let var = mags.map(|m| (m - mean) * (m - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

/// Gabor texture descriptor: `[μ_00, σ_00, μ_01, σ_01, …]`, orientation fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureVector(pub Vec<f64>);

impl TextureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mean magnitude of filter `(scale, orientation)`.
    pub fn mean(&self, scale: usize, orientation: usize, orientations: usize) -> f64 {
        self.0[2 * (scale * orientations + orientation)]
    }

    pub fn std(&self, scale: usize, orientation: usize, orientations: usize) -> f64 {
        self.0[2 * (scale * orientations + orientation) + 1]
    }
}

/// In-place 2-D FFT over a row-major `w × h` buffer.
struct Fft2d {
    rows: Arc<dyn Fft<f64>>,
    cols: Arc<dyn Fft<f64>>,
    w: usize,
    h: usize,
}

impl Fft2d {
    fn new(planner: &mut FftPlanner<f64>, w: usize, h: usize, inverse: bool) -> Self {
        let (rows, cols) = if inverse {
            (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
        } else {
            (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
        };
        Self { rows, cols, w, h }
    }

    fn process(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.rows.process(data);
        scratch.resize(data.len(), Complex64::default());
        transpose(data, scratch, self.w, self.h);
        self.cols.process(scratch);
        transpose(scratch, data, self.h, self.w);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], w: usize, h: usize) {
    for y in 0..h {
        for x in 0..w {
            dst[x * h + y] = src[y * w + x];
        }
    }
}

/// Responses of every kernel, computed by FFT over the reflect-padded image.
///
/// Agrees with [`convolve_response`] to rounding error; used on the hot path.
pub fn filter_responses(image: &GrayImage, bank: &[GaborKernel]) -> Vec<ResponseMap> {
    let Some(pad) = bank.iter().map(GaborKernel::radius).max() else {
        return Vec::new();
    };
    let (w, h) = (image.width(), image.height());
    let (pw, ph) = (w + 2 * pad, h + 2 * pad);
    let mut planner = FftPlanner::new();
    let forward = Fft2d::new(&mut planner, pw, ph, false);
    let inverse = Fft2d::new(&mut planner, pw, ph, true);
    let mut scratch = Vec::new();

    let src = image.values();
    let mut padded: Vec<Complex64> = (0..ph)
        .flat_map(|py| {
            let sy = reflect(py as isize - pad as isize, h);
            (0..pw).map(move |px| {
                let sx = reflect(px as isize - pad as isize, w);
                Complex64::new(src[sy * w + sx], 0.0)
            })
        })
        .collect();
    forward.process(&mut padded, &mut scratch);

    let scale = 1.0 / (pw * ph) as f64;
    bank.iter()
        .map(|kernel| {
            let r = kernel.radius() as isize;
            let mut spectrum = vec![Complex64::default(); pw * ph];
            for dy in -r..=r {
                for dx in -r..=r {
                    let ix = dx.rem_euclid(pw as isize) as usize;
                    let iy = dy.rem_euclid(ph as isize) as usize;
                    spectrum[iy * pw + ix] = kernel.tap(dx, dy).conj();
                }
            }
            forward.process(&mut spectrum, &mut scratch);
            spectrum.iter_mut().zip(&padded).for_each(|(k, p)| *k *= p);
            inverse.process(&mut spectrum, &mut scratch);
            let values = (0..h)
                .flat_map(|y| {
                    let row = &spectrum[(y + pad) * pw + pad..(y + pad) * pw + pad + w];
                    row.iter().map(|z| z * scale)
                })
                .collect();
            ResponseMap {
                width: w,
                height: h,
                values,
            }
        })
        .collect()
}

/// Runs the whole bank over `image` and concatenates per-filter (mean, std).
pub fn extract_texture_vector(image: &GrayImage, bank: &[GaborKernel]) -> Result<TextureVector> {
    if bank.is_empty() {
        return Err(Error::InvalidParams("filter bank is empty".into()));
    }
    let mut out = Vec::with_capacity(2 * bank.len());
    for response in filter_responses(image, bank) {
        let (mean, std) = texture_stats(&response);
        out.push(mean);
        out.push(std);
    }
    Ok(TextureVector(out))
}
