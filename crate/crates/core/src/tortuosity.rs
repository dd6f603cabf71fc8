//! Regression-residual tortuosity of centerline pixels.
//!
//! For a centerline pixel, the neighborhood is every pixel of the same
//! segment within `radius_um` of it. A line is fitted to the neighborhood and
//! the tortuosity is the root mean squared point-to-line residual in µm.
//! The image-level value is the mean over all segment pixels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Pixel, Spacing};
use crate::skeleton::{decompose, skeletonize_pruned, Segment, SkeletonGraph};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regression {
    /// Orthogonal (total least squares) fit, rotation invariant.
    #[default]
    Tls,
    /// Ordinary y-on-x fit with vertical residuals.
    Ols,
}

impl std::str::FromStr for Regression {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tls" => Ok(Regression::Tls),
            "ols" => Ok(Regression::Ols),
            other => Err(format!("unknown regression {other:?}, expected tls or ols")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TortuosityParams {
    pub radius_um: f64,
    pub min_neighbors: usize,
    /// Terminal skeleton branches shorter than this are removed first, µm.
    pub prune_spurs_um: f64,
    pub regression: Regression,
}

impl Default for TortuosityParams {
    fn default() -> Self {
        Self {
            radius_um: 10.0,
            min_neighbors: 3,
            prune_spurs_um: 0.0,
            regression: Regression::Tls,
        }
    }
}

impl TortuosityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_um.is_finite() && self.radius_um > 0.0) {
            return Err(Error::param("radius_um", "must be > 0"));
        }
        if self.min_neighbors < 2 {
            return Err(Error::param("min_neighbors", "must be >= 2"));
        }
        if !(self.prune_spurs_um.is_finite() && self.prune_spurs_um >= 0.0) {
            return Err(Error::param("prune_spurs_um", "must be >= 0"));
        }
        Ok(())
    }
}

/// RMS residual of a line fitted to `points` (offsets in µm).
pub fn line_fit_rms(points: &[[f64; 2]], regression: Regression) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = stats::sum(points.iter().map(|p| p[0])) / n;
    let my = stats::sum(points.iter().map(|p| p[1])) / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let mean_sq = match regression {
        Regression::Tls => {
            // the normal of the best line is the minor axis of the scatter
            let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
            let (nx, ny) = (-theta.sin(), theta.cos());
            points
                .iter()
                .map(|p| {
                    let d = (p[0] - mx) * nx + (p[1] - my) * ny;
                    d * d
                })
                .sum::<f64>()
                / n
        }
        Regression::Ols => {
            if sxx == 0.0 {
                return 0.0;
            }
            let slope = sxy / sxx;
            points
                .iter()
                .map(|p| {
                    let r = (p[1] - my) - slope * (p[0] - mx);
                    r * r
                })
                .sum::<f64>()
                / n
        }
    };
    mean_sq.max(0.0).sqrt()
}

/// Physical offsets of the neighborhood of `center` among `pixels`.
fn neighborhood(pixels: &[Pixel], center: Pixel, spacing: Spacing, radius_um: f64) -> Vec<[f64; 2]> {
    let r2 = radius_um * radius_um;
    pixels
        .iter()
        .filter_map(|&p| {
            let dx = (p.0 as f64 - center.0 as f64) * spacing.x;
            let dy = (p.1 as f64 - center.1 as f64) * spacing.y;
            (dx * dx + dy * dy <= r2).then_some([dx, dy])
        })
        .collect()
}

/// Tortuosity of the pixel at `center_index` of `segment`, µm.
pub fn point_tortuosity(
    segment: &Segment,
    center_index: usize,
    spacing: Spacing,
    params: &TortuosityParams,
) -> f64 {
    let pixels = segment.unique_pixels();
    let center = pixels[center_index.min(pixels.len() - 1)];
    let hood = neighborhood(pixels, center, spacing, params.radius_um);
    if hood.len() < params.min_neighbors || hood.len() < 2 {
        return 0.0;
    }
    line_fit_rms(&hood, params.regression)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TortuosityEntry {
    pub pixel: Pixel,
    pub tortuosity_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TortuosityMap {
    pub entries: Vec<TortuosityEntry>,
    pub mean: f64,
}

impl TortuosityMap {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
            mean: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One entry per segment pixel; branch points carry no value.
pub fn tortuosity_map(graph: &SkeletonGraph, params: &TortuosityParams) -> TortuosityMap {
    let per_segment: Vec<Vec<TortuosityEntry>> = graph
        .segments
        .par_iter()
        .map(|seg| {
            (0..seg.unique_pixels().len())
                .map(|i| TortuosityEntry {
                    pixel: seg.unique_pixels()[i],
                    tortuosity_um: point_tortuosity(seg, i, graph.spacing, params),
                })
                .collect()
        })
        .collect();
    let entries: Vec<TortuosityEntry> = per_segment.into_iter().flatten().collect();
    let values: Vec<f64> = entries.iter().map(|e| e.tortuosity_um).collect();
    TortuosityMap {
        mean: stats::mean(&values),
        entries,
    }
}

/// Full per-pixel map of a binary vessel mask.
pub fn image_tortuosity_map(mask: &BinaryMask, params: &TortuosityParams) -> Result<TortuosityMap> {
    params.validate()?;
    let skel = skeletonize_pruned(mask, params.prune_spurs_um);
    Ok(tortuosity_map(&decompose(&skel), params))
}

/// Mean centerline tortuosity of a binary vessel mask, µm.
pub fn image_tortuosity(mask: &BinaryMask, params: &TortuosityParams) -> Result<f64> {
    Ok(image_tortuosity_map(mask, params)?.mean)
}
