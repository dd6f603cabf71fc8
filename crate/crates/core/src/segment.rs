//! Classic (non-neural) vessel segmentation: Gaussian smoothing, local-mean
//! adaptive thresholding and removal of small connected components.

use serde::{Deserialize, Serialize};

use crate::components::{label, Connectivity};
use crate::error::{Error, Result};
use crate::raster::{reflect_index, BinaryMask, GrayImage};

/// Differences below this are treated as ties by the threshold comparison, so
/// summation rounding in the local mean cannot mark flat regions.
const THRESHOLD_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterParams {
    /// Gaussian standard deviation in pixels.
    pub gaussian_sigma: f64,
    /// Side of the square adaptive-threshold window, µm.
    pub window_um: f64,
    /// Added to the local mean before the comparison.
    pub threshold_offset: f64,
    /// Components with a smaller physical area are discarded, µm².
    pub min_component_area_um2: f64,
}

impl Default for SegmenterParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.0,
            window_um: 100.0,
            threshold_offset: 0.0,
            // 500 µm³ volume floor over a 1 µm slice
            min_component_area_um2: 500.0,
        }
    }
}

impl SegmenterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma.is_finite() && self.gaussian_sigma >= 0.0) {
            return Err(Error::param("gaussian_sigma", "must be >= 0"));
        }
        if !(self.window_um.is_finite() && self.window_um > 0.0) {
            return Err(Error::param("window_um", "must be > 0"));
        }
        if !(-1.0..=1.0).contains(&self.threshold_offset) {
            return Err(Error::param("threshold_offset", "must lie in [-1, 1]"));
        }
        if !(self.min_component_area_um2.is_finite() && self.min_component_area_um2 >= 0.0) {
            return Err(Error::param("min_component_area_um2", "must be >= 0"));
        }
        Ok(())
    }
}

/// Unit-sum Gaussian taps truncated at 4 sigma. `sigma == 0` gives `[1.0]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

fn convolve_rows(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in kernel.iter().enumerate() {
                acc += t * row[reflect_index(x as isize + k as isize - r, w)];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn convolve_cols(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (k, &t) in kernel.iter().enumerate() {
            let sy = reflect_index(y as isize + k as isize - r, h);
            let src_row = &src[sy * w..(sy + 1) * w];
            for (o, &s) in out[y * w..(y + 1) * w].iter_mut().zip(src_row) {
                *o += t * s;
            }
        }
    }
    out
}

/// Separable Gaussian smoothing of a raw row-major buffer with reflect borders.
pub(crate) fn gaussian_blur(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let kernel = gaussian_kernel(sigma);
    let tmp = convolve_rows(src, w, h, &kernel);
    convolve_cols(&tmp, w, h, &kernel)
}

pub fn gaussian_filter(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", "must be >= 0"));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = img.dims();
    let data = gaussian_blur(img.data(), w, h, sigma)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    Ok(GrayImage::from_raw(w, h, data, img.spacing()))
}

/// Sliding sums of `k` (odd) samples along a line, reflect-padded.
fn box_sums_1d(line: &[f64], k: usize, out: &mut [f64]) {
    let n = line.len();
    let r = (k / 2) as isize;
    let mut prefix = Vec::with_capacity(n + k);
    prefix.push(0.0);
    let mut acc = 0.0;
    for i in -r..n as isize + r {
        acc += line[reflect_index(i, n)];
        prefix.push(acc);
    }
    for (x, o) in out.iter_mut().enumerate() {
        *o = prefix[x + k] - prefix[x];
    }
}

/// Local mean over a centered `k x k` window (k odd), reflect-padded.
pub(crate) fn box_mean(src: &[f64], w: usize, h: usize, k: usize) -> Vec<f64> {
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        box_sums_1d(&src[y * w..(y + 1) * w], k, &mut rows[y * w..(y + 1) * w]);
    }
    let mut out = vec![0.0; w * h];
    let mut col = vec![0.0; h];
    let mut sums = vec![0.0; h];
    let area = (k * k) as f64;
    for x in 0..w {
        for y in 0..h {
            col[y] = rows[y * w + x];
        }
        box_sums_1d(&col, k, &mut sums);
        for y in 0..h {
            out[y * w + x] = sums[y] / area;
        }
    }
    out
}

/// Window side in pixels for a physical size: rounded, then forced odd.
pub fn window_pixels(window_um: f64, spacing_x: f64) -> usize {
    let k = (window_um / spacing_x).round().max(0.0) as usize;
    if k % 2 == 0 {
        k + 1
    } else {
        k
    }
}

/// Marks pixels brighter than their local mean plus `offset`.
pub fn adaptive_threshold(img: &GrayImage, window_um: f64, offset: f64) -> Result<BinaryMask> {
    let raw = (window_um / img.spacing().x).round().max(0.0) as usize;
    if raw < 3 {
        return Err(Error::WindowTooSmall { pixels: raw });
    }
    let k = window_pixels(window_um, img.spacing().x);
    let (w, h) = img.dims();
    let mean = box_mean(img.data(), w, h, k);
    let bits = img
        .data()
        .iter()
        .zip(&mean)
        .map(|(&v, &m)| v - m - offset > THRESHOLD_EPS)
        .collect();
    Ok(BinaryMask::from_raw(w, h, bits, img.spacing()))
}

/// Drops 8-connected components whose physical area is below `min_area_um2`.
pub fn remove_small_components(mask: &BinaryMask, min_area_um2: f64) -> BinaryMask {
    if min_area_um2 <= 0.0 {
        return mask.clone();
    }
    let lab = label(mask, true, Connectivity::Eight);
    let pixel_area = mask.spacing().pixel_area();
    let keep: Vec<bool> = std::iter::once(false)
        .chain(lab.sizes.iter().map(|&n| n as f64 * pixel_area >= min_area_um2))
        .collect();
    let bits = lab.labels.iter().map(|&l| keep[l as usize]).collect();
    BinaryMask::from_raw(mask.width(), mask.height(), bits, mask.spacing())
}

pub fn segment(img: &GrayImage, params: &SegmenterParams) -> Result<BinaryMask> {
    params.validate()?;
    let smoothed = gaussian_filter(img, params.gaussian_sigma)?;
    let raw = adaptive_threshold(&smoothed, params.window_um, params.threshold_offset)?;
    Ok(remove_small_components(&raw, params.min_component_area_um2))
}
