//! Overlap and bias metrics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;
use crate::stats;

/// Masks keyed by image id, in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelSet {
    pub ids: Vec<String>,
    pub labels: Vec<BinaryMask>,
}

impl LabelSet {
    pub fn new(ids: Vec<String>, labels: Vec<BinaryMask>) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::param("labels", format!("{} ids for {} masks", ids.len(), labels.len())));
        }
        Ok(Self { ids, labels })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Mean tortuosity in µm per image id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TortuositySet {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
}

impl TortuositySet {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::param("values", format!("{} ids for {} values", ids.len(), values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param("values", format!("{v} is not a finite non-negative tortuosity")));
        }
        Ok(Self { ids, values })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn counts(a: &BinaryMask, b: &BinaryMask) -> Result<(usize, usize)> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch { left: a.dims(), right: b.dims() });
    }
    let (mut inter, mut union) = (0, 0);
    for (&p, &q) in a.bits().iter().zip(b.bits()) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    Ok((inter, union))
}

/// Intersection over union; `1` when both masks are empty.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (inter, union) = counts(a, b)?;
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Dice coefficient; `1` when both masks are empty.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (inter, union) = counts(a, b)?;
    // |A| + |B| = |A ∪ B| + |A ∩ B|
    let total = union + inter;
    Ok(if total == 0 { 1.0 } else { 2.0 * inter as f64 / total as f64 })
}

fn check_ids(left: &[String], right: &[String]) -> Result<()> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::EmptySet);
    }
    if left.len() != right.len() {
        return Err(Error::IdMismatch {
            index: left.len().min(right.len()),
            left: left.get(right.len()).cloned().unwrap_or_default(),
            right: right.get(left.len()).cloned().unwrap_or_default(),
        });
    }
    if let Some((index, (l, r))) = left.iter().zip(right).enumerate().find(|(_, (l, r))| l != r) {
        return Err(Error::IdMismatch { index, left: l.clone(), right: r.clone() });
    }
    Ok(())
}

/// Mean per-image IoU of predictions against references.
pub fn relative_iou(pred: &LabelSet, reference: &LabelSet) -> Result<f64> {
    check_ids(&pred.ids, &reference.ids)?;
    let per_image = pred
        .labels
        .par_iter()
        .zip(&reference.labels)
        .map(|(p, r)| iou(p, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(stats::mean(&per_image))
}

/// Mean of per-image ratios `num / den`.
pub fn relative_tortuosity(num: &TortuositySet, den: &TortuositySet) -> Result<f64> {
    check_ids(&num.ids, &den.ids)?;
    let mut ratios = Vec::with_capacity(num.len());
    for ((id, n), d) in num.ids.iter().zip(&num.values).zip(&den.values) {
        if !(*d > 0.0) {
            return Err(Error::NonPositiveDenominator { id: id.clone(), value: *d });
        }
        ratios.push(n / d);
    }
    Ok(stats::mean(&ratios))
}

/// Repetitions for a fine-tuning run with `n` samples out of a training set
/// of size `l`: `max(5, ceil(l / 2n))`, and a single run when `n = 0`.
pub fn repetitions(l: usize, n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    l.div_ceil(2 * n).max(5)
}
