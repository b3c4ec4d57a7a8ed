//! Calibrated greyscale rasters and the image-processing chain: bilateral
//! denoising, luminance binarization, time-frequency accumulation,
//! majority downsampling, and red-overlay composition.
//!
//! Pixel values are 8-bit and linearly calibrated: value 255 corresponds
//! to `luminance_cap` cd/m². Aggregation keeps integer accumulators
//! (each flagged pixel contributes 255) and divides only at threshold
//! time, so mask order and parallel grouping cannot change results.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// 8-bit greyscale raster calibrated to a luminance cap in cd/m².
///
/// Row-major, row 0 at the top. `luminance_cap` is the luminance
/// represented by pixel value 255; pixel value v maps to
/// `v / 255 * luminance_cap` cd/m².
#[derive(Debug, Clone, PartialEq)]
pub struct LuminanceImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
    pub luminance_cap: f64,
}

impl LuminanceImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, luminance_cap: f64) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension);
        }
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(RasterError::PixelCount {
                expected: (width as usize) * (height as usize),
                got: pixels.len(),
            });
        }
        if !(luminance_cap > 0.0) {
            return Err(RasterError::InvalidCap(luminance_cap));
        }
        Ok(Self { width, height, pixels, luminance_cap })
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, value: u8, luminance_cap: f64) -> Result<Self, RasterError> {
        let n = (width as usize) * (height as usize);
        Self::new(width, height, vec![value; n], luminance_cap)
    }

    #[inline]
    pub fn pixel(&self, row: u32, col: u32) -> u8 {
        self.pixels[(row as usize) * (self.width as usize) + col as usize]
    }

    /// Calibrated luminance of a pixel value, in cd/m².
    #[inline]
    pub fn luminance(&self, value: u8) -> f64 {
        value as f64 / 255.0 * self.luminance_cap
    }
}

/// Per-pixel flag raster; `true` marks at-or-above-threshold pixels
/// (rendered as 255 when written out).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: u32,
    pub height: u32,
    pub flags: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, flags: Vec<bool>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension);
        }
        if flags.len() != (width as usize) * (height as usize) {
            return Err(RasterError::PixelCount {
                expected: (width as usize) * (height as usize),
                got: flags.len(),
            });
        }
        Ok(Self { width, height, flags })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Result<Self, RasterError> {
        let n = (width as usize) * (height as usize);
        Self::new(width, height, vec![value; n])
    }

    #[inline]
    pub fn flag(&self, row: u32, col: u32) -> bool {
        self.flags[(row as usize) * (self.width as usize) + col as usize]
    }

    pub fn count_flagged(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// 0/255 raster rendering of the mask.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.flags.iter().map(|&f| if f { 255 } else { 0 }).collect()
    }
}

/// Per-pixel occurrence accumulator over a stack of binary masks.
///
/// `sums[i]` is 255 times the number of masks flagging pixel i, so the
/// per-pixel mean `sums[i] / count` stays within 0–255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyMap {
    pub width: u32,
    pub height: u32,
    pub sums: Vec<u32>,
    pub count: u32,
}

impl FrequencyMap {
    /// Mean accumulated value of a pixel, in 0–255.
    #[inline]
    pub fn mean(&self, idx: usize) -> f64 {
        self.sums[idx] as f64 / self.count as f64
    }
}

/// Bilateral filter parameters: square neighborhood diameter in pixels
/// and the two Gaussian sigmas (grey levels, pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub diameter: u32,
    pub sigma_color: f64,
    pub sigma_space: f64,
}

impl FilterParams {
    pub fn new(diameter: u32, sigma_color: f64, sigma_space: f64) -> Result<Self, RasterError> {
        let p = Self { diameter, sigma_color, sigma_space };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if self.diameter == 0 || self.diameter % 2 == 0 {
            return Err(RasterError::InvalidFilterDiameter(self.diameter));
        }
        if !(self.sigma_color > 0.0) || !(self.sigma_space > 0.0) {
            return Err(RasterError::InvalidFilterSigma);
        }
        Ok(())
    }
}

impl Default for FilterParams {
    /// Neighborhood diameter 15, sigma_color 75, sigma_space 75.
    fn default() -> Self {
        Self { diameter: 15, sigma_color: 75.0, sigma_space: 75.0 }
    }
}

/// Interleaved 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbRaster {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RasterError {
    ZeroDimension,
    PixelCount { expected: usize, got: usize },
    InvalidCap(f64),
    InvalidThreshold { threshold: f64, cap: f64 },
    InvalidFilterDiameter(u32),
    InvalidFilterSigma,
    EmptyStack,
    DimensionMismatch { expected: (u32, u32), got: (u32, u32) },
    NotDivisible { width: u32, height: u32, factor: u32 },
}

impl fmt::Display for RasterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroDimension => write!(f, "image dimensions must be positive"),
            Self::PixelCount { expected, got } => {
                write!(f, "pixel buffer length {got} does not match dimensions (expected {expected})")
            }
            Self::InvalidCap(cap) => write!(f, "luminance cap must be positive, got {cap}"),
            Self::InvalidThreshold { threshold, cap } => {
                write!(f, "threshold {threshold} outside valid range (0, {cap}]")
            }
            Self::InvalidFilterDiameter(d) => {
                write!(f, "filter diameter must be odd and >= 1, got {d}")
            }
            Self::InvalidFilterSigma => write!(f, "filter sigmas must be positive"),
            Self::EmptyStack => write!(f, "at least one mask is required"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}x{}, got {}x{}", expected.0, expected.1, got.0, got.1)
            }
            Self::NotDivisible { width, height, factor } => {
                write!(f, "dimensions {width}x{height} not divisible by factor {factor}")
            }
        }
    }
}

impl core::error::Error for RasterError {}

/// Mirror an index into `[0, n)` without repeating the edge sample
/// (reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...).
#[inline]
pub(crate) fn reflect101(idx: i64, n: i64) -> usize {
    if n == 1 {
        return 0;
    }
    // the reflected sequence has period 2n-2
    let period = 2 * n - 2;
    let i = idx.rem_euclid(period);
    (if i >= n { period - i } else { i }) as usize
}

/// Edge-preserving bilateral smoothing over a square neighborhood.
///
/// Each output pixel is the normalized sum of neighborhood samples
/// weighted by `exp(-d²/2σ_space²) · exp(-Δv²/2σ_color²)` where d is the
/// spatial offset and Δv the grey-level difference to the center pixel.
/// Borders mirror without repeating the edge pixel; the result is
/// rounded to the nearest integer and keeps the calibration cap.
pub fn bilateral_filter(img: &LuminanceImage, params: &FilterParams) -> LuminanceImage {
    debug_assert!(params.validate().is_ok());
    let radius = (params.diameter / 2) as i64;
    let window = (2 * radius + 1) as usize;

    let mut spatial = vec![0.0f64; window * window];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let d2 = (dx * dx + dy * dy) as f64;
            spatial[((dy + radius) as usize) * window + (dx + radius) as usize] =
                math::exp(-d2 / (2.0 * params.sigma_space * params.sigma_space));
        }
    }
    // grey-difference weights depend only on |Δv|
    let mut color = [0.0f64; 256];
    for (d, w) in color.iter_mut().enumerate() {
        let dd = (d * d) as f64;
        *w = math::exp(-dd / (2.0 * params.sigma_color * params.sigma_color));
    }

    let (w, h) = (img.width as i64, img.height as i64);
    let stride = img.width as usize;
    let mut out = vec![0u8; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            let center = img.pixels[(y as usize) * stride + x as usize];
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for dy in -radius..=radius {
                let sy = reflect101(y + dy, h);
                let row_w = &spatial[((dy + radius) as usize) * window..];
                for dx in -radius..=radius {
                    let sx = reflect101(x + dx, w);
                    let sample = img.pixels[sy * stride + sx];
                    let wt = row_w[(dx + radius) as usize] * color[center.abs_diff(sample) as usize];
                    num += wt * sample as f64;
                    den += wt;
                }
            }
            // weighted mean of 0-255 samples, so the cast cannot clip
            out[(y as usize) * stride + x as usize] = math::round(num / den) as u8;
        }
    }
    LuminanceImage {
        width: img.width,
        height: img.height,
        pixels: out,
        luminance_cap: img.luminance_cap,
    }
}

/// Flag pixels whose calibrated luminance reaches `threshold` cd/m².
///
/// The cut value `threshold / cap * 255` is compared in double precision
/// and never rounded; a pixel is flagged iff `pixel >= cut`.
pub fn binarize(img: &LuminanceImage, threshold: f64) -> Result<BinaryMask, RasterError> {
    if !(threshold > 0.0) || threshold > img.luminance_cap {
        return Err(RasterError::InvalidThreshold { threshold, cap: img.luminance_cap });
    }
    let cut = threshold / img.luminance_cap * 255.0;
    let flags = img.pixels.iter().map(|&p| p as f64 >= cut).collect();
    Ok(BinaryMask { width: img.width, height: img.height, flags })
}

/// Superimpose binary masks into integer per-pixel sums (255 per flag).
pub fn accumulate_frequency(masks: &[BinaryMask]) -> Result<FrequencyMap, RasterError> {
    let first = masks.first().ok_or(RasterError::EmptyStack)?;
    let (w, h) = (first.width, first.height);
    let mut sums = vec![0u32; first.flags.len()];
    for mask in masks {
        if mask.width != w || mask.height != h {
            return Err(RasterError::DimensionMismatch {
                expected: (w, h),
                got: (mask.width, mask.height),
            });
        }
        for (sum, &flag) in sums.iter_mut().zip(&mask.flags) {
            if flag {
                *sum += 255;
            }
        }
    }
    Ok(FrequencyMap { width: w, height: h, sums, count: masks.len() as u32 })
}

/// Flag pixels whose mean accumulated value reaches `255 * percentile`.
///
/// The comparison is inclusive, so a pixel flagged in exactly the
/// percentile fraction of masks is kept.
pub fn threshold_frequency(freq: &FrequencyMap, percentile: f64) -> BinaryMask {
    assert!(
        (0.0..=1.0).contains(&percentile),
        "percentile must be in [0, 1], got {percentile}"
    );
    let cut = 255.0 * percentile;
    let count = freq.count as f64;
    let flags = freq.sums.iter().map(|&s| s as f64 / count >= cut).collect();
    BinaryMask { width: freq.width, height: freq.height, flags }
}

/// Reduce resolution by mapping each `factor`×`factor` block to the
/// majority flag; exact ties flag the output pixel.
pub fn downsample_majority(mask: &BinaryMask, factor: u32) -> Result<BinaryMask, RasterError> {
    if factor == 0 || mask.width % factor != 0 || mask.height % factor != 0 {
        return Err(RasterError::NotDivisible {
            width: mask.width,
            height: mask.height,
            factor,
        });
    }
    let (ow, oh) = (mask.width / factor, mask.height / factor);
    let block = factor * factor;
    let mut flags = Vec::with_capacity((ow as usize) * (oh as usize));
    for by in 0..oh {
        for bx in 0..ow {
            let mut set = 0u32;
            for dy in 0..factor {
                for dx in 0..factor {
                    if mask.flag(by * factor + dy, bx * factor + dx) {
                        set += 1;
                    }
                }
            }
            flags.push(2 * set >= block);
        }
    }
    Ok(BinaryMask { width: ow, height: oh, flags })
}

/// Render flagged pixels pure red over the greyscale input.
pub fn compose_overlay(img: &LuminanceImage, mask: &BinaryMask) -> Result<RgbRaster, RasterError> {
    if img.width != mask.width || img.height != mask.height {
        return Err(RasterError::DimensionMismatch {
            expected: (img.width, img.height),
            got: (mask.width, mask.height),
        });
    }
    let mut data = Vec::with_capacity(img.pixels.len() * 3);
    for (&v, &flag) in img.pixels.iter().zip(&mask.flags) {
        if flag {
            data.extend_from_slice(&[255, 0, 0]);
        } else {
            data.extend_from_slice(&[v, v, v]);
        }
    }
    Ok(RgbRaster { width: img.width, height: img.height, data })
}
