//! Corpus preparation: ranking by tortuosity, windowing and leakage-free splits.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, BitDepth};
use crate::raster::Spacing;
use crate::rng::{stream, Rng};
use crate::tortuosity::{image_tortuosity, TortuosityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    Tortuous,
    NonTortuous,
    FalseTortuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub image: PathBuf,
    pub label: PathBuf,
    pub source_id: String,
    pub window: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<Split>,
    pub class: Class,
    pub mean_tortuosity_um: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

/// An image with its ground-truth label, before ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledImage {
    pub id: String,
    pub image: PathBuf,
    pub label: PathBuf,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: Self = serde_json::from_str(&text)?;
        m.check_leakage()?;
        let base = path.parent().unwrap_or(Path::new(""));
        for e in &mut m.entries {
            e.image = base.join(&e.image);
            e.label = base.join(&e.label);
        }
        Ok(m)
    }

    /// Paths under the manifest's directory are stored relative to it, so a
    /// prepared dataset can be moved as a whole.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: &Path| p.strip_prefix(base).map(Path::to_path_buf).unwrap_or_else(|_| p.to_path_buf());
        let mut out = self.clone();
        for e in &mut out.entries {
            e.image = rel(&e.image);
            e.label = rel(&e.label);
        }
        let text = serde_json::to_string_pretty(&out)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn in_split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == Some(split))
    }

    pub fn in_class(&self, class: Class) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.class == class)
    }

    /// Keeps the entries of one class.
    pub fn filter_class(&self, class: Class) -> Self {
        Self { entries: self.in_class(class).cloned().collect() }
    }

    /// Fails if any source image contributes to more than one split, or if a
    /// window index is out of range.
    pub fn check_leakage(&self) -> Result<()> {
        let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
        for e in &self.entries {
            if e.window >= 16 {
                return Err(Error::param("window", format!("{}: window index {} outside 0..16", e.id, e.window)));
            }
            let Some(split) = e.split else { continue };
            if let Some(prev) = seen.insert(&e.source_id, split) {
                if prev != split {
                    return Err(Error::param(
                        "split",
                        format!("source image {} appears in {prev:?} and {split:?}", e.source_id),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Ranks labeled images by mean tortuosity of their labels and keeps the
/// `count` most tortuous and `count` least tortuous. Ties are broken by id.
pub fn rank_and_select(images: &[LabeledImage], count: usize, params: &TortuosityParams) -> Result<DatasetManifest> {
    params.validate()?;
    if count == 0 || images.len() < 2 * count {
        return Err(Error::InsufficientImages { needed: 2 * count.max(1), available: images.len() });
    }
    let scores = images
        .par_iter()
        .map(|li| {
            let mask = io::load_mask_with_spacing(&li.label, Spacing::default())?;
            image_tortuosity(&mask, params)
        })
        .collect::<Result<Vec<f64>>>()?;
    rank_scored(images, &scores, count)
}

pub(crate) fn rank_scored(images: &[LabeledImage], scores: &[f64], count: usize) -> Result<DatasetManifest> {
    if count == 0 || images.len() < 2 * count {
        return Err(Error::InsufficientImages { needed: 2 * count.max(1), available: images.len() });
    }
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then_with(|| images[a].id.cmp(&images[b].id)));
    let entry = |i: usize, class| ManifestEntry {
        id: images[i].id.clone(),
        image: images[i].image.clone(),
        label: images[i].label.clone(),
        source_id: images[i].id.clone(),
        window: 0,
        split: None,
        class,
        mean_tortuosity_um: scores[i],
    };
    let mut entries: Vec<ManifestEntry> = order[..count].iter().map(|&i| entry(i, Class::NonTortuous)).collect();
    entries.extend(order[order.len() - count..].iter().map(|&i| entry(i, Class::Tortuous)));
    Ok(DatasetManifest { entries })
}

/// Window rectangles `(x0, y0, w, h)` in row-major grid order. Pixels beyond
/// a whole number of cells are cropped from the right and bottom edges.
pub fn window_rects(width: usize, height: usize, grid: (usize, usize)) -> Result<Vec<(usize, usize, usize, usize)>> {
    let (gx, gy) = grid;
    if gx == 0 || gy == 0 || gx * gy > 16 {
        return Err(Error::param("grid", format!("{gx}x{gy} must have between 1 and 16 cells")));
    }
    let (cw, ch) = (width / gx, height / gy);
    if cw == 0 || ch == 0 {
        return Err(Error::param("grid", format!("{width}x{height} image is smaller than a {gx}x{gy} grid")));
    }
    Ok((0..gy).flat_map(|r| (0..gx).map(move |c| (c * cw, r * ch, cw, ch))).collect())
}

fn check_fractions(fractions: (f64, f64, f64)) -> Result<()> {
    let (a, b, c) = fractions;
    let sum = a + b + c;
    if [a, b, c].iter().any(|f| !(f.is_finite() && *f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadFractions { sum });
    }
    Ok(())
}

/// Assigns whole source images to splits. Each class is shuffled and cut
/// independently: `round(f_train N)` train, `round(f_val N)` validation, the
/// rest test.
pub fn assign_splits(
    sources: &[(String, Class)],
    fractions: (f64, f64, f64),
    rng: &Rng,
) -> Result<BTreeMap<String, Split>> {
    check_fractions(fractions)?;
    let mut by_class: BTreeMap<Class, BTreeSet<&str>> = BTreeMap::new();
    for (id, class) in sources {
        by_class.entry(*class).or_default().insert(id);
    }
    let mut out = BTreeMap::new();
    for (class, ids) in by_class {
        let mut ids: Vec<&str> = ids.into_iter().collect();
        ids.shuffle(rng.substream(stream::SPLIT ^ class as u64).inner());
        let n = ids.len();
        let n_train = ((fractions.0 * n as f64).round() as usize).min(n);
        let n_val = ((fractions.1 * n as f64).round() as usize).min(n - n_train);
        for (i, id) in ids.into_iter().enumerate() {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            out.insert(id.to_string(), split);
        }
    }
    Ok(out)
}

/// Cuts every image and label into grid windows written under `out_dir`
/// (`images/` and `labels/`), then assigns source images to splits.
pub fn windows_and_split(
    manifest: &DatasetManifest,
    grid: (usize, usize),
    fractions: (f64, f64, f64),
    rng: &Rng,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    check_fractions(fractions)?;
    let sources: Vec<(String, Class)> = manifest.entries.iter().map(|e| (e.source_id.clone(), e.class)).collect();
    let splits = assign_splits(&sources, fractions, rng)?;
    let img_dir = out_dir.join("images");
    let lbl_dir = out_dir.join("labels");
    for d in [&img_dir, &lbl_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let per_source = manifest
        .entries
        .par_iter()
        .map(|e| -> Result<Vec<ManifestEntry>> {
            let img = io::load_image_with_spacing(&e.image, Spacing::default())?;
            let lbl = io::load_mask_with_spacing(&e.label, Spacing::default())?;
            if img.dims() != lbl.dims() {
                return Err(Error::DimensionMismatch { left: img.dims(), right: lbl.dims() });
            }
            let (w, h) = img.dims();
            let mut out = Vec::new();
            for (k, (x0, y0, cw, ch)) in window_rects(w, h, grid)?.into_iter().enumerate() {
                let id = format!("{}_w{k:02}", e.id);
                let image = img_dir.join(format!("{id}.png"));
                let label = lbl_dir.join(format!("{id}.png"));
                io::save_image(&img.crop(x0, y0, cw, ch), &image, BitDepth::Sixteen)?;
                io::save_mask(&lbl.crop(x0, y0, cw, ch), &label)?;
                out.push(ManifestEntry {
                    id,
                    image,
                    label,
                    source_id: e.source_id.clone(),
                    window: k,
                    split: splits.get(&e.source_id).copied(),
                    class: e.class,
                    mean_tortuosity_um: e.mean_tortuosity_um,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = DatasetManifest { entries: per_source.into_iter().flatten().collect() };
    m.check_leakage()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{BinaryMask, GrayImage};
    use crate::rng::Rng;

    fn images(n: usize) -> Vec<LabeledImage> {
        (0..n)
            .map(|i| LabeledImage {
                id: format!("im{i}"),
                image: format!("im{i}.png").into(),
                label: format!("lb{i}.png").into(),
            })
            .collect()
    }

    #[test]
    fn ranking_picks_extremes() {
        let m = rank_scored(&images(4), &[2.0, 0.0, 3.0, 1.0], 1).unwrap();
        let t: Vec<_> = m.in_class(Class::Tortuous).map(|e| e.id.as_str()).collect();
        let nt: Vec<_> = m.in_class(Class::NonTortuous).map(|e| e.id.as_str()).collect();
        assert_eq!(t, ["im2"]);
        assert_eq!(nt, ["im1"]);
    }

    #[test]
    fn ties_resolve_by_id() {
        let m = rank_scored(&images(6), &[1.0; 6], 2).unwrap();
        let ids: Vec<_> = m.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["im0", "im1", "im4", "im5"]);
    }

    #[test]
    fn too_few_images() {
        assert!(matches!(
            rank_scored(&images(3), &[0.0; 3], 2),
            Err(Error::InsufficientImages { needed: 4, available: 3 })
        ));
    }

    #[test]
    fn full_frame_splits_into_344_by_276_windows() {
        let r = window_rects(1376, 1104, (4, 4)).unwrap();
        assert_eq!(r.len(), 16);
        assert!(r.iter().all(|&(_, _, w, h)| (w, h) == (344, 276)));
        assert_eq!(r[5], (344, 276, 344, 276));
    }

    #[test]
    fn remainder_is_cropped() {
        let r = window_rects(10, 9, (4, 4)).unwrap();
        assert!(r.iter().all(|&(x, y, w, h)| (w, h) == (2, 2) && x + w <= 8 && y + h <= 8));
    }

    #[test]
    fn exact_fraction_split_sizes() {
        let src: Vec<_> = (0..10).map(|i| (format!("s{i}"), Class::Tortuous)).collect();
        let s = assign_splits(&src, (0.8, 0.1, 0.1), &Rng::new(1)).unwrap();
        let count = |k| s.values().filter(|&&v| v == k).count();
        assert_eq!((count(Split::Train), count(Split::Val), count(Split::Test)), (8, 1, 1));
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let src = vec![("a".to_string(), Class::Tortuous)];
        assert!(matches!(assign_splits(&src, (0.8, 0.1, 0.2), &Rng::new(0)), Err(Error::BadFractions { .. })));
    }

    #[test]
    fn leakage_is_detected() {
        let e = |id: &str, split| ManifestEntry {
            id: id.into(),
            image: PathBuf::new(),
            label: PathBuf::new(),
            source_id: "src".into(),
            window: 0,
            split: Some(split),
            class: Class::Tortuous,
            mean_tortuosity_um: 0.0,
        };
        let ok = DatasetManifest { entries: vec![e("a", Split::Train), e("b", Split::Train)] };
        assert!(ok.check_leakage().is_ok());
        let bad = DatasetManifest { entries: vec![e("a", Split::Train), e("b", Split::Test)] };
        assert!(bad.check_leakage().is_err());
    }

    #[test]
    fn windows_share_their_source_split() {
        let dir = tempfile::tempdir().unwrap();
        let sp = Spacing::isotropic(1.0);
        let mut entries = vec![];
        for i in 0..5 {
            let image = dir.path().join(format!("i{i}.png"));
            let label = dir.path().join(format!("l{i}.png"));
            io::save_image(&GrayImage::from_fn(40, 24, sp, |x, y| ((x + y + i) % 5) as f64 / 4.0).unwrap(), &image, BitDepth::Eight)
                .unwrap();
            io::save_mask(&BinaryMask::from_fn(40, 24, sp, |x, _| x % 7 == i), &label).unwrap();
            entries.push(ManifestEntry {
                id: format!("img{i}"),
                image,
                label,
                source_id: format!("img{i}"),
                window: 0,
                split: None,
                class: Class::Tortuous,
                mean_tortuosity_um: i as f64,
            });
        }
        let out = dir.path().join("win");
        let m = windows_and_split(&DatasetManifest { entries }, (4, 4), (0.6, 0.2, 0.2), &Rng::new(9), &out).unwrap();
        assert_eq!(m.entries.len(), 80);
        m.check_leakage().unwrap();
        let w = io::load_image(&m.entries[0].image).unwrap();
        assert_eq!(w.dims(), (10, 6));
        assert_eq!(w.spacing(), sp);
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(DatasetManifest::load(&path).unwrap(), m);
    }
}
