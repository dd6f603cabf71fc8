//! Elastic deformation augmentation.
//!
//! A displacement field is two independent uniform `[-1, 1]` rasters, each
//! smoothed by a unit-sum Gaussian and scaled by `alpha`, so `alpha` bounds
//! the displacement in pixels. Images are warped backward with bilinear
//! sampling, masks with nearest-neighbour sampling; borders reflect.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{reflect_index, BinaryMask, GrayImage};
use crate::rng::{stream, Rng};
use crate::segment::gaussian_blur;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticParams {
    pub alpha: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self { alpha: 64.0, sigma: 4.0, seed: 0 }
    }
}

impl ElasticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::param("alpha", "must be finite and >= 0"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::param("sigma", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Per-pixel backward displacement in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    width: usize,
    height: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
    alpha: f64,
    sigma: f64,
}

impl DisplacementField {
    pub fn new(width: usize, height: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if dx.len() != width * height || dy.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (dx.len().min(dy.len()), 1),
            });
        }
        let alpha = dx.iter().chain(&dy).fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { width, height, dx, dy, alpha, sigma: 0.0 })
    }

    pub fn constant(width: usize, height: usize, dx: f64, dy: f64) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            dx: vec![dx; n],
            dy: vec![dy; n],
            alpha: dx.abs().max(dy.abs()),
            sigma: 0.0,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Largest absolute displacement component.
    pub fn max_abs(&self) -> f64 {
        self.dx.iter().chain(&self.dy).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn check(&self, dims: (usize, usize)) -> Result<()> {
        if dims != (self.width, self.height) {
            return Err(Error::DimensionMismatch { left: (self.width, self.height), right: dims });
        }
        Ok(())
    }
}

fn uniform_raster(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.inner().random_range(-1.0..=1.0)).collect()
}

/// Draws a smoothed random field. `dx` and `dy` come from separate
/// substreams of `rng`.
pub fn make_field(width: usize, height: usize, params: &ElasticParams, rng: &Rng) -> Result<DisplacementField> {
    params.validate()?;
    let n = width * height;
    let smooth = |tag| {
        let raw = uniform_raster(n, &mut rng.substream(tag));
        gaussian_blur(&raw, width, height, params.sigma)
            .into_iter()
            .map(|v| (v * params.alpha).clamp(-params.alpha, params.alpha))
            .collect::<Vec<_>>()
    };
    let (dx, dy) = rayon::join(|| smooth(stream::FIELD_DX), || smooth(stream::FIELD_DY));
    Ok(DisplacementField { width, height, dx, dy, alpha: params.alpha, sigma: params.sigma })
}

/// Backward bilinear warp: `out(x, y) = img(x + dx, y + dy)`.
pub fn warp_image(img: &GrayImage, field: &DisplacementField) -> Result<GrayImage> {
    field.check(img.dims())?;
    let (w, h) = img.dims();
    let src = img.data();
    let at = |x: isize, y: isize| src[reflect_index(y, h) * w + reflect_index(x, w)];
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let i = y * w + x;
            let sx = x as f64 + field.dx[i];
            let sy = y as f64 + field.dy[i];
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (x0, y0) = (x0 as isize, y0 as isize);
            *o = if fx == 0.0 && fy == 0.0 {
                at(x0, y0)
            } else {
                let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
                let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
                top * (1.0 - fy) + bottom * fy
            };
        }
    });
    Ok(GrayImage::from_raw(w, h, out, img.spacing()))
}

/// Backward nearest-neighbour warp; keeps masks binary.
pub fn warp_mask(mask: &BinaryMask, field: &DisplacementField) -> Result<BinaryMask> {
    field.check(mask.dims())?;
    let (w, h) = mask.dims();
    let src = mask.bits();
    let mut out = vec![false; w * h];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let i = y * w + x;
            let sx = (x as f64 + field.dx[i]).round() as isize;
            let sy = (y as f64 + field.dy[i]).round() as isize;
            *o = src[reflect_index(sy, h) * w + reflect_index(sx, w)];
        }
    });
    Ok(BinaryMask::from_raw(w, h, out, mask.spacing()))
}

/// Warps an image and its label with one shared field.
pub fn augment_pair(
    img: &GrayImage,
    mask: &BinaryMask,
    params: &ElasticParams,
    rng: &Rng,
) -> Result<(GrayImage, BinaryMask)> {
    if img.dims() != mask.dims() {
        return Err(Error::DimensionMismatch { left: img.dims(), right: mask.dims() });
    }
    let (w, h) = img.dims();
    let field = make_field(w, h, params, rng)?;
    Ok((warp_image(img, &field)?, warp_mask(mask, &field)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Spacing;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, Spacing::default(), |x, y| ((x * 7 + y * 13) % 31) as f64 / 31.0).unwrap()
    }

    #[test]
    fn zero_alpha_is_bit_exact_identity() {
        let img = ramp(40, 30);
        let mask = img.threshold(0.5);
        let p = ElasticParams { alpha: 0.0, sigma: 4.0, seed: 3 };
        let (wi, wm) = augment_pair(&img, &mask, &p, &Rng::new(3)).unwrap();
        assert_eq!(wi, img);
        assert_eq!(wm, mask);
    }

    #[test]
    fn zero_sigma_is_scaled_raw_draw() {
        let p = ElasticParams { alpha: 2.5, sigma: 0.0, seed: 1 };
        let rng = Rng::new(11);
        let f = make_field(9, 7, &p, &rng).unwrap();
        let raw = uniform_raster(63, &mut rng.substream(stream::FIELD_DX));
        for (a, b) in f.dx().iter().zip(&raw) {
            assert_eq!(*a, b * 2.5);
        }
    }

    #[test]
    fn streams_are_independent() {
        let p = ElasticParams { alpha: 1.0, sigma: 0.0, seed: 0 };
        let f = make_field(16, 16, &p, &Rng::new(5)).unwrap();
        assert_ne!(f.dx(), f.dy());
    }

    #[test]
    fn unit_shift_moves_interior() {
        let img = ramp(20, 15);
        let mask = img.threshold(0.4);
        let f = DisplacementField::constant(20, 15, 1.0, 0.0);
        let wi = warp_image(&img, &f).unwrap();
        let wm = warp_mask(&mask, &f).unwrap();
        for y in 0..15 {
            for x in 0..19 {
                assert_eq!(wi.get(x, y), img.get(x + 1, y));
                assert_eq!(wm.get(x, y), mask.get(x + 1, y));
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let f = DisplacementField::constant(4, 4, 0.0, 0.0);
        assert!(warp_image(&ramp(5, 4), &f).is_err());
        assert!(warp_mask(&BinaryMask::empty(4, 5, Spacing::default()), &f).is_err());
    }

    #[test]
    fn field_is_seed_deterministic() {
        let p = ElasticParams::default();
        let a = make_field(32, 24, &p, &Rng::new(7)).unwrap();
        let b = make_field(32, 24, &p, &Rng::new(7)).unwrap();
        let c = make_field(32, 24, &p, &Rng::new(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn displacement_is_bounded_by_alpha(seed in any::<u64>(), alpha in 0.0f64..100.0, sigma in 0.0f64..6.0) {
            let p = ElasticParams { alpha, sigma, seed };
            let f = make_field(24, 20, &p, &Rng::new(seed)).unwrap();
            prop_assert!(f.max_abs() <= alpha);
        }

        #[test]
        fn warp_stays_in_source_range(seed in any::<u64>(), alpha in 0.0f64..20.0) {
            let img = ramp(24, 20);
            let (lo, hi) = img.min_max();
            let p = ElasticParams { alpha, sigma: 2.0, seed };
            let f = make_field(24, 20, &p, &Rng::new(seed)).unwrap();
            let out = warp_image(&img, &f).unwrap();
            for &v in out.data() {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }

        #[test]
        fn shared_field_matches_separate_warps(seed in any::<u64>()) {
            let img = ramp(24, 20);
            let mask = img.threshold(0.5);
            let p = ElasticParams { alpha: 8.0, sigma: 3.0, seed };
            let rng = Rng::new(seed);
            let f = make_field(24, 20, &p, &rng).unwrap();
            let (wi, wm) = augment_pair(&img, &mask, &p, &rng).unwrap();
            prop_assert_eq!(wi, warp_image(&img, &f).unwrap());
            prop_assert_eq!(wm, warp_mask(&mask, &f).unwrap());
        }
    }
}
