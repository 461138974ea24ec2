//! Pixel grids, checkerboard parity, boundary census and PSNR.

use std::fmt;

use crate::error::{Error, Result};

/// Read access to a row-major grid of integer samples.
///
/// Implemented by both the 8-bit [`GrayImage`] and the signed [`WideImage`]
/// so the predictor can run on either.
pub trait PixelGrid {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn value(&self, row: usize, col: usize) -> i32;
}

/// An 8-bit grayscale image, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParam(format!("image dimensions must be positive, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!("{} pixels for a {width}x{height} image", pixels.len())));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Total pixel count, `|O|`.
    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn same_dims<G: PixelGrid>(&self, other: &G) -> bool {
        self.width == other.width() && self.height == other.height()
    }

    /// Rejects images the checkerboard predictor cannot serve.
    pub fn ensure_min_size(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::ImageTooSmall { width: self.width, height: self.height });
        }
        Ok(())
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage").field("width", &self.width).field("height", &self.height).finish_non_exhaustive()
    }
}

impl PixelGrid for GrayImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    #[inline]
    fn value(&self, row: usize, col: usize) -> i32 {
        i32::from(self.get(row, col))
    }
}

/// Intermediate image whose samples may leave `[0, 255]` by up to `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideImage {
    width: usize,
    height: usize,
    pixels: Vec<i32>,
}

impl WideImage {
    pub fn from_gray(img: &GrayImage) -> Self {
        WideImage { width: img.width, height: img.height, pixels: img.pixels.iter().map(|&p| i32::from(p)).collect() }
    }

    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<i32>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        WideImage { width, height, pixels }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[i32] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [i32] {
        &mut self.pixels
    }

    /// True when every sample lies in `[-t, 255 + t]`.
    pub fn within_extended_range(&self, t: u8) -> bool {
        let t = i32::from(t);
        self.pixels.iter().all(|&v| (-t..=255 + t).contains(&v))
    }

    /// Narrows back to 8 bits, failing if any sample is out of `[0, 255]`.
    pub fn to_gray(&self) -> Result<GrayImage> {
        let mut out = Vec::with_capacity(self.pixels.len());
        for (idx, &v) in self.pixels.iter().enumerate() {
            let byte = u8::try_from(v).map_err(|_| {
                Error::corrupt(format!(
                    "reconstructed pixel ({}, {}) = {v} is outside [0, 255]",
                    idx / self.width,
                    idx % self.width
                ))
            })?;
            out.push(byte);
        }
        GrayImage::new(self.width, self.height, out)
    }
}

impl PixelGrid for WideImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    #[inline]
    fn value(&self, row: usize, col: usize) -> i32 {
        self.get(row, col)
    }
}

/// Checkerboard class of a pixel position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even = 0,
    Odd = 1,
}

impl Parity {
    #[inline]
    pub fn of(row: usize, col: usize) -> Parity {
        if (row + col).is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn other(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// First column of class `self` in `row`.
    #[inline]
    pub(crate) fn first_col(self, row: usize) -> usize {
        (row + self as usize) % 2
    }
}

/// `(row + col) mod 2`.
pub fn parity_of(row: usize, col: usize) -> Parity {
    Parity::of(row, col)
}

fn check_t(t: u8) -> Result<()> {
    if !(1..=127).contains(&t) {
        return Err(Error::InvalidParam(format!("T must be in 1..=127, got {t}")));
    }
    Ok(())
}

/// True if `v` falls in `[0, T) ∪ (255 - T, 255]`.
#[inline]
pub fn is_boundary(v: u8, t: u8) -> bool {
    v < t || v > 255 - t
}

/// Number of pixels that would under- or overflow under a `±T` change.
pub fn count_boundary_pixels(img: &GrayImage, t: u8) -> Result<usize> {
    check_t(t)?;
    Ok(img.pixels.iter().filter(|&&v| is_boundary(v, t)).count())
}

/// Peak signal-to-noise ratio between two 8-bit images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    Finite(f64),
    /// Identical images.
    Infinite,
}

impl Psnr {
    /// Finite value, or `f64::INFINITY` for identical images.
    pub fn as_f64(self) -> f64 {
        match self {
            Psnr::Finite(db) => db,
            Psnr::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(db) => write!(f, "{db:.6}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

/// `10 log10(255^2 / MSE)`.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<Psnr> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!("psnr of {}x{} vs {}x{}", a.width, a.height, b.width, b.height)));
    }
    let sse: u64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(Psnr::Infinite);
    }
    let mse = sse as f64 / a.len() as f64;
    Ok(Psnr::Finite(10.0 * (255.0f64 * 255.0 / mse).log10()))
}
