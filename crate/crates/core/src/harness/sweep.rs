//! Fine-tuning sweep.
//!
//! A source model is trained once on the source train split. For every
//! sample count `n` it is fine-tuned `K = repetitions(l, n)` times, each time
//! from the saved source artifact on a fresh random sample of `n` target
//! train images, and evaluated on the target test split against reference
//! labels and their tortuosity.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backend::{Backend, BackendSpec, Command, Job, StubKind};
use super::dataset::{DatasetManifest, ManifestEntry, Split};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{iou, repetitions, TortuositySet};
use crate::raster::{BinaryMask, Spacing};
use crate::rng::{derive_seed, Rng};
use crate::stats;
use crate::tortuosity::{image_tortuosity, TortuosityParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub seed: u64,
    pub backend: BackendSpec,
    pub tortuosity: TortuosityParams,
    pub train_epochs: u32,
    pub finetune_epochs: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: (0..=40).collect(),
            seed: 0,
            backend: BackendSpec::Builtin { kind: StubKind::Classic },
            tortuosity: TortuosityParams::default(),
            train_epochs: 30,
            finetune_epochs: 15,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::param("n_values", "must list at least one sample count"));
        }
        if self.train_epochs == 0 || self.finetune_epochs == 0 {
            return Err(Error::param("epochs", "must be >= 1"));
        }
        self.tortuosity.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub repetition: usize,
    pub relative_iou: f64,
    pub relative_tortuosity: f64,
    /// Target train ids used for fine-tuning, in draw order.
    pub sampled_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub k: usize,
    pub mean_r: f64,
    pub std_r: f64,
    pub mean_iou: f64,
    pub std_iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Size of the target train split (`l`).
    pub train_size: usize,
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Per-`n` mean and sample standard deviation, ordered by `n`.
pub fn aggregate(rows: &[(usize, f64, f64)]) -> Vec<Aggregate> {
    let mut groups: std::collections::BTreeMap<usize, (Vec<f64>, Vec<f64>)> = Default::default();
    for &(n, r, i) in rows {
        let g = groups.entry(n).or_default();
        g.0.push(r);
        g.1.push(i);
    }
    groups
        .into_iter()
        .map(|(n, (r, i))| Aggregate {
            n,
            k: r.len(),
            mean_r: stats::mean(&r),
            std_r: stats::sample_std(&r),
            mean_iou: stats::mean(&i),
            std_iou: stats::sample_std(&i),
        })
        .collect()
}

/// Draws `n` distinct ids from `pool` for repetition `k`.
pub fn sample_ids(pool: &[&ManifestEntry], seed: u64, n: usize, k: usize) -> Vec<usize> {
    let mut rng = Rng::new(derive_seed(seed, &[n as u64, k as u64]));
    index::sample(rng.inner(), pool.len(), n).into_vec()
}

fn sorted_split(m: &DatasetManifest, split: Split) -> Vec<&ManifestEntry> {
    let mut v: Vec<&ManifestEntry> = m.in_split(split).collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

struct Reference {
    ids: Vec<String>,
    images: Vec<PathBuf>,
    labels: Vec<BinaryMask>,
    tortuosity: TortuositySet,
}

fn predicted_masks(masks: &[PathBuf], images: &[PathBuf], spacing: &[Spacing]) -> Result<Vec<BinaryMask>> {
    let by_stem: HashMap<_, _> = masks.iter().map(|m| (m.file_stem().map(|s| s.to_owned()), m)).collect();
    images
        .iter()
        .zip(spacing)
        .map(|(img, sp)| {
            let path = by_stem
                .get(&img.file_stem().map(|s| s.to_owned()))
                .ok_or_else(|| Error::Protocol(format!("no mask for {}", img.display())))?;
            io::load_mask(path)?.with_spacing(*sp)
        })
        .collect()
}

/// Runs the sweep. Backend jobs and their outputs live under `work_dir`.
pub fn run_sweep(
    config: &SweepConfig,
    source: &DatasetManifest,
    target: &DatasetManifest,
    work_dir: &Path,
) -> Result<SweepResult> {
    config.validate()?;
    source.check_leakage()?;
    target.check_leakage()?;
    let source_train = sorted_split(source, Split::Train);
    let target_train = sorted_split(target, Split::Train);
    let target_test = sorted_split(target, Split::Test);
    if source_train.is_empty() {
        return Err(Error::InsufficientImages { needed: 1, available: 0 });
    }
    if target_test.is_empty() {
        return Err(Error::InsufficientImages { needed: 1, available: 0 });
    }
    let l = target_train.len();
    if let Some(&n) = config.n_values.iter().find(|&&n| n > l) {
        return Err(Error::InsufficientImages { needed: n, available: l });
    }

    let references: HashMap<PathBuf, PathBuf> = source
        .entries
        .iter()
        .chain(&target.entries)
        .map(|e| (e.image.clone(), e.label.clone()))
        .collect();
    let backend = Backend::new(config.backend.clone(), references)?;

    let labels = target_test
        .par_iter()
        .map(|e| io::load_mask_with_spacing(&e.label, Spacing::default()))
        .collect::<Result<Vec<_>>>()?;
    let values = labels
        .par_iter()
        .map(|m| image_tortuosity(m, &config.tortuosity))
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = target_test.iter().map(|e| e.id.clone()).collect();
    let reference = Reference {
        images: target_test.iter().map(|e| e.image.clone()).collect(),
        tortuosity: TortuositySet::new(ids.clone(), values)?,
        ids,
        labels,
    };
    if let Some((id, v)) = reference.ids.iter().zip(&reference.tortuosity.values).find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveDenominator { id: id.clone(), value: *v });
    }

    let source_dir = work_dir.join("source");
    let trained = backend.run(
        &Job {
            command: Command::Train,
            model_in: None,
            model_out: Some(source_dir.join("model")),
            images: source_train.iter().map(|e| e.image.clone()).collect(),
            labels: Some(source_train.iter().map(|e| e.label.clone()).collect()),
            epochs: config.train_epochs,
            seed: config.seed,
            out_dir: source_dir.clone(),
        },
        &source_dir,
    )?;
    let source_model = trained.model.expect("validated train job has a model");

    let mut n_values = config.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();
    let jobs: Vec<(usize, usize)> =
        n_values.iter().flat_map(|&n| (0..repetitions(l, n)).map(move |k| (n, k))).collect();

    let mut rows = jobs
        .par_iter()
        .map(|&(n, k)| {
            run_repetition(config, &backend, &source_model, &target_train, &reference, work_dir, n, k)
                .map_err(|e| Error::SweepJob { n, repetition: k, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.n, r.repetition));
    let aggregates = aggregate(&rows.iter().map(|r| (r.n, r.relative_tortuosity, r.relative_iou)).collect::<Vec<_>>());
    Ok(SweepResult { train_size: l, rows, aggregates })
}

#[allow(clippy::too_many_arguments)]
fn run_repetition(
    config: &SweepConfig,
    backend: &Backend,
    source_model: &Path,
    target_train: &[&ManifestEntry],
    reference: &Reference,
    work_dir: &Path,
    n: usize,
    k: usize,
) -> Result<SweepRow> {
    let seed = derive_seed(config.seed, &[n as u64, k as u64]);
    let dir = work_dir.join(format!("n{n:03}_r{k:03}"));
    let picked: Vec<&ManifestEntry> =
        sample_ids(target_train, config.seed, n, k).into_iter().map(|i| target_train[i]).collect();
    let model = if n == 0 {
        source_model.to_path_buf()
    } else {
        let ft_dir = dir.join("finetune");
        backend
            .run(
                &Job {
                    command: Command::Finetune,
                    model_in: Some(source_model.to_path_buf()),
                    model_out: Some(ft_dir.join("model")),
                    images: picked.iter().map(|e| e.image.clone()).collect(),
                    labels: Some(picked.iter().map(|e| e.label.clone()).collect()),
                    epochs: config.finetune_epochs,
                    seed,
                    out_dir: ft_dir.clone(),
                },
                &ft_dir,
            )?
            .model
            .expect("validated finetune job has a model")
    };
    let pred_dir = dir.join("predict");
    let done = backend.run(
        &Job {
            command: Command::Predict,
            model_in: Some(model),
            model_out: None,
            images: reference.images.clone(),
            labels: None,
            epochs: 1,
            seed,
            out_dir: pred_dir.join("masks"),
        },
        &pred_dir,
    )?;
    let spacing: Vec<Spacing> = reference.labels.iter().map(|m| m.spacing()).collect();
    let predicted = predicted_masks(done.masks.as_deref().unwrap_or_default(), &reference.images, &spacing)?;
    let per_image = predicted
        .par_iter()
        .zip(&reference.labels)
        .map(|(p, r)| Ok((iou(p, r)?, image_tortuosity(p, &config.tortuosity)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let ious: Vec<f64> = per_image.iter().map(|p| p.0).collect();
    let num = TortuositySet::new(reference.ids.clone(), per_image.iter().map(|p| p.1).collect())?;
    Ok(SweepRow {
        n,
        repetition: k,
        relative_iou: stats::mean(&ious),
        relative_tortuosity: crate::metrics::relative_tortuosity(&num, &reference.tortuosity)?,
        sampled_ids: picked.iter().map(|e| e.id.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_uses_sample_std() {
        let a = aggregate(&[(1, 1.0, 0.5), (1, 3.0, 0.5), (0, 2.0, 1.0)]);
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].n, a[0].k, a[0].std_r), (0, 1, 0.0));
        assert_eq!((a[1].k, a[1].mean_r, a[1].std_r, a[1].std_iou), (2, 2.0, 2.0f64.sqrt(), 0.0));
    }

    #[test]
    fn sampling_is_distinct_and_seeded() {
        let e = ManifestEntry {
            id: String::new(),
            image: PathBuf::new(),
            label: PathBuf::new(),
            source_id: String::new(),
            window: 0,
            split: None,
            class: super::super::dataset::Class::Tortuous,
            mean_tortuosity_um: 0.0,
        };
        let pool: Vec<&ManifestEntry> = std::iter::repeat_n(&e, 30).collect();
        let a = sample_ids(&pool, 5, 10, 2);
        let mut s = a.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 10);
        assert_eq!(a, sample_ids(&pool, 5, 10, 2));
        assert_ne!(a, sample_ids(&pool, 5, 10, 3));
    }

    #[test]
    fn default_config() {
        let c = SweepConfig::default();
        assert_eq!(c.n_values.len(), 41);
        assert_eq!((c.train_epochs, c.finetune_epochs), (30, 15));
        let parsed: SweepConfig = serde_json::from_str(r#"{"n_values":[0,10],"seed":3}"#).unwrap();
        assert_eq!(parsed.n_values, [0, 10]);
        assert_eq!(parsed.train_epochs, 30);
    }
}
