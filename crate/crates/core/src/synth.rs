//! Synthetic vessel phantoms with known centerlines.
//!
//! A phantom is a tube of constant radius around an analytic curve. The curve
//! is kept as a dense polyline resampled at uniform arc length, which also
//! feeds [`oracle_tortuosity`], a brute-force tortuosity reference that shares
//! no code with the skeleton-based pipeline.

use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, BitDepth};
use crate::raster::{BinaryMask, GrayImage, Spacing};
use crate::rng::{stream, Rng};
use crate::tortuosity::TortuosityParams;

/// Arc-length spacing of the stored centerline, px.
pub const CENTERLINE_STEP_PX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Straight,
    Arc,
    Sinusoid,
    RandomWalk,
}

impl std::str::FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "straight" => Ok(CurveKind::Straight),
            "arc" => Ok(CurveKind::Arc),
            "sinusoid" => Ok(CurveKind::Sinusoid),
            "random-walk" => Ok(CurveKind::RandomWalk),
            other => Err(format!("unknown curve kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VesselSpec {
    pub kind: CurveKind,
    /// Curve length along its parameter axis (sinusoid, straight), arc length
    /// (arc), or number of unit steps (random walk), px.
    pub length_px: f64,
    pub amplitude_px: f64,
    pub wavelength_px: f64,
    pub arc_radius_px: f64,
    pub heading_rad: f64,
    /// Random-walk heading increment bound per unit step.
    pub turn_max_rad: f64,
    pub tube_radius_px: f64,
    pub intensity: f64,
    pub background: f64,
    pub noise_std: f64,
    pub spacing_um: f64,
}

impl Default for VesselSpec {
    fn default() -> Self {
        Self {
            kind: CurveKind::Straight,
            length_px: 200.0,
            amplitude_px: 0.0,
            wavelength_px: 50.0,
            arc_radius_px: 50.0,
            heading_rad: 0.0,
            turn_max_rad: 0.2,
            tube_radius_px: 4.0,
            intensity: 0.8,
            background: 0.1,
            noise_std: 0.0,
            spacing_um: 1.0,
        }
    }
}

impl VesselSpec {
    pub fn straight(length_px: f64) -> Self {
        Self {
            length_px,
            ..Self::default()
        }
    }

    pub fn sinusoid(length_px: f64, amplitude_px: f64, wavelength_px: f64) -> Self {
        Self {
            kind: CurveKind::Sinusoid,
            length_px,
            amplitude_px,
            wavelength_px,
            ..Self::default()
        }
    }

    pub fn arc(radius_px: f64, length_px: f64) -> Self {
        Self {
            kind: CurveKind::Arc,
            arc_radius_px: radius_px,
            length_px,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tube_radius_px >= 1.0) {
            return Err(Error::param("tube_radius_px", "must be >= 1"));
        }
        if !(0.0 <= self.background && self.background < self.intensity && self.intensity <= 1.0) {
            return Err(Error::param("intensity", "need 0 <= background < intensity <= 1"));
        }
        if !(self.length_px.is_finite() && self.length_px > 0.0) {
            return Err(Error::param("length_px", "must be > 0"));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::param("noise_std", "must be >= 0"));
        }
        if !(self.spacing_um > 0.0) {
            return Err(Error::param("spacing_um", "must be > 0"));
        }
        match self.kind {
            CurveKind::Sinusoid if !(self.wavelength_px > 0.0) => {
                Err(Error::param("wavelength_px", "must be > 0"))
            }
            CurveKind::Arc if !(self.arc_radius_px > 0.0) => {
                Err(Error::param("arc_radius_px", "must be > 0"))
            }
            CurveKind::Arc if self.length_px > std::f64::consts::TAU * self.arc_radius_px => Err(
                Error::param("length_px", "arc longer than its full circle"),
            ),
            _ => Ok(()),
        }
    }
}

/// Dense analytic centerline in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pub points: Vec<[f64; 2]>,
    pub spacing: Spacing,
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: GrayImage,
    pub mask: BinaryMask,
    pub centerline: Centerline,
}

impl Phantom {
    /// Writes `images/<id>.png` (16-bit) and `labels/<id>.png` under `dir`.
    pub fn save(&self, dir: &Path, id: &str) -> Result<(PathBuf, PathBuf)> {
        let image = dir.join("images").join(format!("{id}.png"));
        let label = dir.join("labels").join(format!("{id}.png"));
        for d in [image.parent(), label.parent()].into_iter().flatten() {
            std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        io::save_image(&self.image, &image, BitDepth::Sixteen)?;
        io::save_mask(&self.mask, &label)?;
        Ok((image, label))
    }
}

fn local_curve(spec: &VesselSpec, rng: &Rng) -> Vec<[f64; 2]> {
    let l = spec.length_px;
    match spec.kind {
        CurveKind::Straight | CurveKind::Sinusoid => {
            // a straight spec is the zero-amplitude sinusoid, sample for sample
            let amplitude = match spec.kind {
                CurveKind::Sinusoid => spec.amplitude_px,
                _ => 0.0,
            };
            let n = (l / 0.01).ceil() as usize;
            let k = std::f64::consts::TAU / spec.wavelength_px.max(f64::MIN_POSITIVE);
            (0..=n)
                .map(|i| {
                    let t = l * i as f64 / n as f64;
                    [t, amplitude * (k * t).sin()]
                })
                .collect()
        }
        CurveKind::Arc => {
            let r = spec.arc_radius_px;
            let n = (l / 0.01).ceil() as usize;
            (0..=n)
                .map(|i| {
                    let phi = l * i as f64 / n as f64 / r;
                    [r * phi.sin(), r * (1.0 - phi.cos())]
                })
                .collect()
        }
        CurveKind::RandomWalk => {
            let mut walk = rng.substream(stream::WALK);
            let steps = l.round().max(1.0) as usize;
            let mut heading = 0.0f64;
            let mut p = [0.0, 0.0];
            let mut out = vec![p];
            for _ in 0..steps {
                if spec.turn_max_rad > 0.0 {
                    heading += walk.inner().random_range(-spec.turn_max_rad..=spec.turn_max_rad);
                }
                p = [p[0] + heading.cos(), p[1] + heading.sin()];
                out.push(p);
            }
            out
        }
    }
}

/// Resamples a polyline at uniform arc-length steps (the last step may be shorter).
fn resample(points: &[[f64; 2]], step: f64) -> Vec<[f64; 2]> {
    let mut out = vec![points[0]];
    let mut carried = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let seg = (b[0] - a[0]).hypot(b[1] - a[1]);
        if seg == 0.0 {
            continue;
        }
        let mut s = step - carried;
        while s <= seg {
            let t = s / seg;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            s += step;
        }
        carried = seg - (s - step);
    }
    let last = *points.last().expect("non-empty polyline");
    if out.last() != Some(&last) && carried > 1e-9 {
        out.push(last);
    }
    out
}

fn dist_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (vx, vy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * vx).hypot(p[1] - a[1] - t * vy)
}

/// Pixels within `radius` of the polyline.
pub fn rasterize_tube(points: &[[f64; 2]], radius: f64, width: usize, height: usize, spacing: Spacing) -> BinaryMask {
    let mut mask = BinaryMask::empty(width, height, spacing);
    let pairs: Vec<([f64; 2], [f64; 2])> = if points.len() == 1 {
        vec![(points[0], points[0])]
    } else {
        points.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in pairs {
        let x0 = (a[0].min(b[0]) - radius).floor().max(0.0) as usize;
        let x1 = ((a[0].max(b[0]) + radius).ceil().max(0.0) as usize).min(width.saturating_sub(1));
        let y0 = (a[1].min(b[1]) - radius).floor().max(0.0) as usize;
        let y1 = ((a[1].max(b[1]) + radius).ceil().max(0.0) as usize).min(height.saturating_sub(1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                if !mask.get(x, y) && dist_to_segment([x as f64, y as f64], a, b) <= radius {
                    mask.set(x, y, true);
                }
            }
        }
    }
    mask
}

/// Renders a phantom centered in a `width x height` canvas.
pub fn render(spec: &VesselSpec, width: usize, height: usize, rng: &Rng) -> Result<Phantom> {
    spec.validate()?;
    let spacing = Spacing::isotropic(spec.spacing_um);
    let (s, c) = spec.heading_rad.sin_cos();
    let rotated: Vec<[f64; 2]> = local_curve(spec, rng)
        .into_iter()
        .map(|[x, y]| [c * x - s * y, s * x + c * y])
        .collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &rotated {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    // whole-pixel shift keeps axis-aligned curves on pixel centers
    let shift = [
        (((width as f64 - 1.0) - (hi[0] + lo[0])) / 2.0).round(),
        (((height as f64 - 1.0) - (hi[1] + lo[1])) / 2.0).round(),
    ];
    let margin = spec.tube_radius_px + 1.0;
    let fits = lo[0] + shift[0] >= margin
        && lo[1] + shift[1] >= margin
        && hi[0] + shift[0] <= width as f64 - 1.0 - margin
        && hi[1] + shift[1] <= height as f64 - 1.0 - margin;
    if !fits {
        return Err(Error::CurveExceedsCanvas {
            width,
            height,
            margin,
        });
    }
    let placed: Vec<[f64; 2]> = rotated
        .iter()
        .map(|p| [p[0] + shift[0], p[1] + shift[1]])
        .collect();
    let points = resample(&placed, CENTERLINE_STEP_PX);
    let mask = rasterize_tube(&points, spec.tube_radius_px, width, height, spacing);

    let mut data: Vec<f64> = mask
        .bits()
        .iter()
        .map(|&b| if b { spec.intensity } else { spec.background })
        .collect();
    if spec.noise_std > 0.0 {
        let normal = Normal::new(0.0, spec.noise_std).map_err(|e| Error::param("noise_std", e.to_string()))?;
        let mut noise = rng.substream(stream::NOISE);
        for v in &mut data {
            *v = (*v + normal.sample(noise.inner())).clamp(0.0, 1.0);
        }
    }
    Ok(Phantom {
        image: GrayImage::new(width, height, data, spacing)?,
        mask,
        centerline: Centerline { points, spacing },
    })
}

/// Smaller eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
fn minor_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let half_trace = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    half_trace - radius
}

/// Brute-force tortuosity of an analytic centerline, µm.
///
/// For every sample, the samples within `radius_um` form the neighborhood; the
/// mean squared orthogonal residual of the best line equals the minor
/// eigenvalue of the neighborhood covariance. Returns the mean RMS residual.
pub fn oracle_tortuosity(centerline: &Centerline, params: &TortuosityParams) -> f64 {
    let sp = centerline.spacing;
    let pts: Vec<[f64; 2]> = centerline
        .points
        .iter()
        .map(|p| [p[0] * sp.x, p[1] * sp.y])
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let r2 = params.radius_um * params.radius_um;
    let mut total = 0.0;
    for center in &pts {
        let (mut n, mut sx, mut sy) = (0usize, 0.0, 0.0);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for q in &pts {
            let (dx, dy) = (q[0] - center[0], q[1] - center[1]);
            if dx * dx + dy * dy <= r2 {
                n += 1;
                sx += dx;
                sy += dy;
                sxx += dx * dx;
                sxy += dx * dy;
                syy += dy * dy;
            }
        }
        let nf = n as f64;
        let (mx, my) = (sx / nf, sy / nf);
        let cov_xx = sxx / nf - mx * mx;
        let cov_xy = sxy / nf - mx * my;
        let cov_yy = syy / nf - my * my;
        total += minor_eigenvalue(cov_xx, cov_xy, cov_yy).max(0.0).sqrt();
    }
    total / pts.len() as f64
}
