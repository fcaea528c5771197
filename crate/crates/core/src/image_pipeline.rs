//! Image decoding and the working representations used by feature extraction.

use std::path::Path;

use image::{DynamicImage, ImageError, ImageReader};

use crate::error::{Error, Result};

/// Side length of the square grayscale image fed to the Gabor bank.
pub const ANALYSIS_SIDE: usize = 128;

/// ITU-R BT.601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Row-major luminance image with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParams(format!(
                "gray sample {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Builds an image from a function of `(x, y)`, clamping every sample into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Bilinear resampling with pixel-center alignment and edge clamping.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Self {
        assert!(
            width > 0 && height > 0,
            "target dimensions must be positive"
        );
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = fy - y0 as f64;
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = fx - x0 as f64;
                let top = self.get(x0, y0) * (1.0 - tx) + self.get(x1, y0) * tx;
                let bottom = self.get(x0, y1) * (1.0 - tx) + self.get(x1, y1) * tx;
                values.push((top * (1.0 - ty) + bottom * ty).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }
}

/// Row-major RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    values: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, values: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if values.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParams("rgb channel outside [0, 1]".into()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn to_gray(&self) -> GrayImage {
        let values = self.values.iter().map(|p| luma(*p)).collect();
        GrayImage {
            width: self.width,
            height: self.height,
            values,
        }
    }

    fn from_dynamic(img: &DynamicImage) -> Result<Self> {
        // 16-bit keeps 8-bit sources exact: v * 257 / 65535 == v / 255.
        let rgb = img.to_rgb16();
        let (w, h) = rgb.dimensions();
        let values = rgb
            .pixels()
            .map(|p| p.0.map(|c| c as f64 / 65535.0))
            .collect();
        Self::new(w as usize, h as usize, values)
    }
}

/// BT.601 luma, written relative to green so that gray pixels map exactly to
/// their own value (the three weights do not sum to 1.0 in binary).
#[inline]
fn luma([r, g, b]: [f64; 3]) -> f64 {
    (g + LUMA[0] * (r - g) + LUMA[2] * (b - g)).clamp(0.0, 1.0)
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let unreadable = |reason: String| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(path.to_path_buf()));
    }
    reader.decode().map_err(|e| match e {
        ImageError::Unsupported(_) => Error::UnsupportedFormat(path.to_path_buf()),
        other => unreadable(other.to_string()),
    })
}

/// Decodes an image at native resolution.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    RgbImage::from_dynamic(&decode(path.as_ref())?)
}

/// Decodes an image, converts it to BT.601 luminance and resamples it to `side × side`.
pub fn load_grayscale(path: impl AsRef<Path>, side: usize) -> Result<GrayImage> {
    if side == 0 {
        return Err(Error::InvalidParams("side must be positive".into()));
    }
    Ok(load_rgb(path)?.to_gray().resize_bilinear(side, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Rgb};

    fn write_png(dir: &Path, name: &str, w: u32, h: u32, px: [u8; 3]) -> std::path::PathBuf {
        let path = dir.join(name);
        ImageBuffer::from_pixel(w, h, Rgb(px)).save(&path).unwrap();
        path
    }

    #[test]
    fn black_and_white_saturate() {
        let dir = tempfile::tempdir().unwrap();
        let black = load_grayscale(write_png(dir.path(), "b.png", 4, 4, [0, 0, 0]), 4).unwrap();
        assert!(black.values().iter().all(|&v| v == 0.0));
        let white = load_grayscale(write_png(dir.path(), "w.png", 4, 4, [255; 3]), 4).unwrap();
        assert!(white.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn pure_red_luminance() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_png(dir.path(), "r.png", 2, 2, [255, 0, 0]);
        let gray = load_grayscale(&path, 2).unwrap();
        assert_eq!(gray.width(), 2);
        assert!(gray.values().iter().all(|v| (v - 0.299).abs() < 1e-3));
        let rgb = load_rgb(&path).unwrap();
        assert!(rgb.pixels().iter().all(|p| *p == [1.0, 0.0, 0.0]));
    }

    #[test]
    fn mid_gray_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let rgb = load_rgb(write_png(dir.path(), "g.png", 3, 2, [128; 3])).unwrap();
        for p in rgb.pixels() {
            for c in p {
                assert!((c - 128.0 / 255.0).abs() < 1e-6);
            }
        }
        // R = G = B = v must map to v.
        let gray = rgb.to_gray();
        assert!(gray
            .values()
            .iter()
            .all(|v| (v - 128.0 / 255.0).abs() < 1e-6));
    }

    #[test]
    fn resize_is_deterministic_and_upsamples() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_png(dir.path(), "c.png", 5, 3, [10, 200, 90]);
        let a = load_grayscale(&path, 16).unwrap();
        let b = load_grayscale(&path, 16).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(a.values().len(), 256);
    }

    #[test]
    fn bilinear_interpolates_between_columns() {
        let img = GrayImage::new(2, 1, vec![0.0, 1.0]).unwrap();
        let up = img.resize_bilinear(4, 1);
        // centers map to -0.25, 0.25, 0.75, 1.25 in source coordinates.
        let expected = [0.0, 0.25, 0.75, 1.0];
        for (v, e) in up.values().iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_and_garbage_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_rgb(dir.path().join("nope.png")),
            Err(Error::UnreadableFile { .. })
        ));
        let junk = dir.path().join("junk.bin");
        std::fs::write(&junk, b"definitely not an image").unwrap();
        assert!(matches!(load_rgb(&junk), Err(Error::UnsupportedFormat(_))));
        let broken = dir.path().join("broken.png");
        let mut bytes = std::fs::read(write_png(dir.path(), "ok.png", 8, 8, [1, 2, 3])).unwrap();
        bytes.truncate(40);
        std::fs::write(&broken, bytes).unwrap();
        assert!(load_rgb(&broken).is_err());
    }

    #[test]
    fn lossless_reencode_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let buf = ImageBuffer::from_fn(7, 5, |x, y| Rgb([(x * 30) as u8, (y * 40) as u8, 77]));
        let p1 = dir.path().join("a.png");
        buf.save(&p1).unwrap();
        let first = load_rgb(&p1).unwrap();
        let p2 = dir.path().join("b.png");
        image::open(&p1).unwrap().save(&p2).unwrap();
        assert_eq!(first, load_rgb(&p2).unwrap());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            GrayImage::new(0, 1, vec![]),
            Err(Error::EmptyImage)
        ));
        assert!(GrayImage::new(2, 1, vec![0.5]).is_err());
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(RgbImage::new(1, 1, vec![[0.0, -0.1, 0.0]]).is_err());
    }
}
