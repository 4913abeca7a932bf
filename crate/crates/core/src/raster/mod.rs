//! Raster images: grayscale ingestion, binarization and thinning.

mod pgm;
mod thin;

pub use pgm::{encode_pgm, load_pgm, PgmError, PgmFormat};
pub use thin::{thin, thin_with_stats, ThinStats};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("expected {expected} pixels for the given dimensions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("pixel {index} has intensity outside [0, 1]")]
    OutOfRange { index: usize },
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::ZeroDimension { width, height });
    }
    let expected = width * height;
    if len != expected {
        return Err(RasterError::LengthMismatch {
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// Grayscale image with row-major intensities normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self, RasterError> {
        check_dims(width, height, pixels.len())?;
        if let Some(index) = pixels
            .iter()
            .position(|&p| !(p >= T::zero() && p <= T::one()))
        {
            return Err(RasterError::OutOfRange { index });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, RasterError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.pixels[y * self.width + x]
    }

    /// Quantizes intensities back to integer samples in `0..=maxval`.
    pub fn to_samples(&self, maxval: u16) -> Vec<u16> {
        let scale = T::from_usize_lossy(maxval as usize);
        self.pixels
            .iter()
            .map(|&p| (p * scale).round().to_u16().unwrap_or(maxval))
            .collect()
    }
}

/// Binary image; `true` marks a foreground (ink) pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BitImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, RasterError> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, RasterError> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    /// Parses rows of `#` (foreground) and `.` (background), ignoring blank lines.
    pub fn from_ascii(art: &str) -> Result<Self, RasterError> {
        let rows: Vec<&str> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let width = rows.first().map_or(0, |r| r.len());
        let bits: Vec<bool> = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| b == b'#'))
            .collect();
        Self::new(width, rows.len(), bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Like [`get`](Self::get) but treats everything outside the image as background.
    #[inline]
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Copy with background margins of the given widths added on each side.
    pub fn padded(&self, left: usize, top: usize, right: usize, bottom: usize) -> BitImage {
        let w = self.width + left + right;
        let h = self.height + top + bottom;
        BitImage::from_fn(w, h, |x, y| {
            x >= left
                && y >= top
                && x - left < self.width
                && y - top < self.height
                && self.get(x - left, y - top)
        })
        .expect("padding keeps dimensions positive")
    }
}

impl fmt::Display for BitImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.bits.chunks(self.width) {
            for &b in row {
                f.write_str(if b { "#" } else { "." })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Which side of the threshold counts as ink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Dark strokes on a light background: foreground iff intensity < threshold.
    DarkInk,
    /// Light strokes on a dark background: foreground iff intensity > threshold.
    LightInk,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::DarkInk => "dark",
            Polarity::LightInk => "light",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dark" => Ok(Polarity::DarkInk),
            "light" => Ok(Polarity::LightInk),
            other => Err(format!(
                "unknown polarity `{other}` (expected dark or light)"
            )),
        }
    }
}

pub fn binarize<T: Scalar>(img: &GrayImage<T>, threshold: T, polarity: Polarity) -> BitImage {
    let bits = img
        .pixels
        .iter()
        .map(|&p| match polarity {
            Polarity::DarkInk => p < threshold,
            Polarity::LightInk => p > threshold,
        })
        .collect();
    BitImage {
        width: img.width,
        height: img.height,
        bits,
    }
}

impl<T: Scalar> From<&BitImage> for GrayImage<T> {
    /// Foreground maps to 1, background to 0.
    fn from(img: &BitImage) -> Self {
        GrayImage {
            width: img.width,
            height: img.height,
            pixels: img
                .bits
                .iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            GrayImage::<f64>::new(0, 3, vec![]),
            Err(RasterError::ZeroDimension { .. })
        ));
        assert!(matches!(
            BitImage::new(2, 2, vec![true; 3]),
            Err(RasterError::LengthMismatch {
                expected: 4,
                actual: 3
            })
        ));
        assert!(matches!(
            GrayImage::new(1, 2, vec![0.5, 1.5]),
            Err(RasterError::OutOfRange { index: 1 })
        ));
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn binarize_light_ink() {
        let img = GrayImage::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let bits = binarize(&img, 0.5, Polarity::LightInk);
        assert_eq!(bits.bits(), &[false, true, true, false]);
        let dark = binarize(&img, 0.5, Polarity::DarkInk);
        assert_eq!(dark.bits(), &[true, false, false, true]);
    }

    #[test]
    fn binarize_all_zero_light_is_background() {
        let img = GrayImage::new(5, 3, vec![0.0f32; 15]).unwrap();
        for t in [0.01, 0.5, 0.99] {
            assert_eq!(binarize(&img, t, Polarity::LightInk).foreground_count(), 0);
        }
    }

    #[test]
    fn binarize_matches_per_pixel_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let img = GrayImage::from_fn(8, 8, |_, _| rng.gen::<f64>()).unwrap();
            for polarity in [Polarity::DarkInk, Polarity::LightInk] {
                let bits = binarize(&img, 0.5, polarity);
                let mut expected = 0;
                for y in 0..8 {
                    for x in 0..8 {
                        let v = img.get(x, y);
                        let fg = if polarity == Polarity::DarkInk {
                            v < 0.5
                        } else {
                            v > 0.5
                        };
                        assert_eq!(bits.get(x, y), fg);
                        expected += fg as usize;
                    }
                }
                assert_eq!(bits.foreground_count(), expected);
            }
        }
    }

    #[test]
    fn ascii_round_trip() {
        let art = "..#\n###\n";
        let img = BitImage::from_ascii(art).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.to_string(), art);
        let p = img.padded(1, 2, 0, 1);
        assert_eq!((p.width(), p.height()), (4, 5));
        assert!(p.get(3, 2) && !p.get(0, 3));
        assert_eq!(p.foreground_count(), 4);
    }

    proptest! {
        #[test]
        fn binarize_of_binary_image_reproduces_it(
            bits in proptest::collection::vec(any::<bool>(), 1..64),
            threshold in 0.001f64..0.999,
        ) {
            let n = bits.len();
            let img = BitImage::new(n, 1, bits).unwrap();
            let gray: GrayImage<f64> = (&img).into();
            prop_assert_eq!(binarize(&gray, threshold, Polarity::LightInk), img);
        }
    }
}
