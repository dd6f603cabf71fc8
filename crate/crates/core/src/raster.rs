//! Raster types shared by every stage.
//!
//! Pixel `(x, y)` has its center at the integer coordinates `(x, y)`; data is
//! stored row-major. Every raster carries its physical pixel spacing because
//! the pipeline's parameters are physical (µm).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel size used when no sidecar metadata is present, in µm/pixel.
pub const DEFAULT_SPACING_UM: f64 = 0.908;

/// A pixel coordinate `(x, y)`.
pub type Pixel = (usize, usize);

/// Physical pixel size in µm along x and y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub x: f64,
    pub y: f64,
}

impl Spacing {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let s = Self { x, y };
        s.validate()?;
        Ok(s)
    }

    pub fn isotropic(s: f64) -> Self {
        Self { x: s, y: s }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.x > 0.0 && self.y > 0.0) {
            return Err(Error::param(
                "spacing",
                format!("must be positive, got ({}, {})", self.x, self.y),
            ));
        }
        Ok(())
    }

    /// Area of one pixel in µm².
    pub fn pixel_area(&self) -> f64 {
        self.x * self.y
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Self::isotropic(DEFAULT_SPACING_UM)
    }
}

/// Scalar intensity raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
    spacing: Spacing,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>, spacing: Spacing) -> Result<Self> {
        spacing.validate()?;
        if data.len() != width * height {
            return Err(Error::param(
                "data",
                format!("length {} != {width}x{height}", data.len()),
            ));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::param("data", format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
            spacing,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64, spacing: Spacing) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], spacing)
    }

    /// Builds an image from a per-pixel function. Values are clamped to `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        spacing: Spacing,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, data, spacing)
    }

    /// Construction path for already-validated buffers produced inside the crate.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>, spacing: Spacing) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
            spacing,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn with_spacing(mut self, spacing: Spacing) -> Result<Self> {
        spacing.validate()?;
        self.spacing = spacing;
        Ok(self)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Copies the rectangle `[x0, x0+w) x [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> GrayImage {
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        GrayImage::from_raw(w, h, data, self.spacing)
    }

    /// Pixels strictly brighter than `level`.
    pub fn threshold(&self, level: f64) -> BinaryMask {
        BinaryMask::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&v| v > level).collect(),
            self.spacing,
        )
    }
}

/// Boolean raster marking vessel pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
    spacing: Spacing,
}

// Spacing is validated finite, so Eq on the f64 fields is sound here.
impl Eq for Spacing {}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>, spacing: Spacing) -> Result<Self> {
        spacing.validate()?;
        if bits.len() != width * height {
            return Err(Error::param(
                "bits",
                format!("length {} != {width}x{height}", bits.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            bits,
            spacing,
        })
    }

    pub fn empty(width: usize, height: usize, spacing: Spacing) -> Self {
        Self::from_raw(width, height, vec![false; width * height], spacing)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        spacing: Spacing,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::from_raw(width, height, bits, spacing)
    }

    /// Parses rows of `#`/`.` characters; handy for fixtures.
    pub fn from_ascii(rows: &[&str], spacing: Spacing) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        Self::from_fn(width, height, spacing, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    pub(crate) fn from_raw(width: usize, height: usize, bits: Vec<bool>, spacing: Spacing) -> Self {
        debug_assert_eq!(bits.len(), width * height);
        Self {
            width,
            height,
            bits,
            spacing,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    pub fn with_spacing(mut self, spacing: Spacing) -> Result<Self> {
        spacing.validate()?;
        self.spacing = spacing;
        Ok(self)
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> BinaryMask {
        let mut bits = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            bits.extend_from_slice(&self.bits[y * self.width + x0..y * self.width + x0 + w]);
        }
        BinaryMask::from_raw(w, h, bits, self.spacing)
    }

    /// Rotates by 90° counter-clockwise in image coordinates:
    /// `(x, y) -> (y, width - 1 - x)`.
    pub fn rotate90(&self) -> BinaryMask {
        let (w, h) = self.dims();
        let swapped = Spacing {
            x: self.spacing.y,
            y: self.spacing.x,
        };
        let mut out = BinaryMask::empty(h, w, swapped);
        for (x, y) in self.pixels() {
            out.set(y, w - 1 - x, true);
        }
        out
    }

    /// Erosion by the 3x3 square; pixels outside the raster count as set.
    pub fn erode(&self) -> BinaryMask {
        let (w, h) = self.dims();
        BinaryMask::from_fn(w, h, self.spacing, |x, y| {
            (-1..=1).all(|dy| {
                (-1..=1).all(|dx| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    let outside = nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h;
                    outside || self.get(nx as usize, ny as usize)
                })
            })
        })
    }

    /// Dilation by the 3x3 square.
    pub fn dilate(&self) -> BinaryMask {
        let (w, h) = self.dims();
        BinaryMask::from_fn(w, h, self.spacing, |x, y| {
            (-1..=1).any(|dy| (-1..=1).any(|dx| self.get_signed(x as isize + dx, y as isize + dy)))
        })
    }
}

/// Depth-ordered slices of identical geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStack {
    slices: Vec<GrayImage>,
    z_spacing: f64,
}

impl ImageStack {
    pub fn new(slices: Vec<GrayImage>, z_spacing: f64) -> Result<Self> {
        let first = slices.first().ok_or(Error::EmptyStack)?;
        if !(z_spacing.is_finite() && z_spacing > 0.0) {
            return Err(Error::param("z_spacing", format!("must be positive, got {z_spacing}")));
        }
        for s in &slices[1..] {
            if s.dims() != first.dims() {
                return Err(Error::DimensionMismatch {
                    left: first.dims(),
                    right: s.dims(),
                });
            }
            if s.spacing() != first.spacing() {
                return Err(Error::param("spacing", "slices disagree on pixel spacing"));
            }
        }
        Ok(Self { slices, z_spacing })
    }

    pub fn depth(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[GrayImage] {
        &self.slices
    }

    pub fn z_spacing(&self) -> f64 {
        self.z_spacing
    }
}

/// Per-pixel maximum over the stack depth.
pub fn max_intensity_projection(stack: &ImageStack) -> Result<GrayImage> {
    let first = stack.slices.first().ok_or(Error::EmptyStack)?;
    let mut data = first.data().to_vec();
    for slice in &stack.slices[1..] {
        for (acc, &v) in data.iter_mut().zip(slice.data()) {
            *acc = acc.max(v);
        }
    }
    Ok(GrayImage::from_raw(first.width(), first.height(), data, first.spacing()))
}

/// Maps an out-of-range index into `[0, n)` by half-sample symmetric
/// reflection (`d c b a | a b c d | d c b a`).
pub fn reflect_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}
