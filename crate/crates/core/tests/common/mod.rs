//! Synthetic corpora shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::Path;

use rand::Rng as _;
use vesselmorph::harness::{Class, DatasetManifest, ManifestEntry, Split};
use vesselmorph::synth::{render, Phantom, VesselSpec};
use vesselmorph::{Rng, TortuosityParams};

pub const W: usize = 128;
pub const H: usize = 96;

/// Tortuosity settings used against phantoms at 1 µm/px: a 20 µm window
/// keeps the pixel-grid residual well below the curvature signal.
pub fn phantom_params() -> TortuosityParams {
    TortuosityParams { radius_um: 20.0, prune_spurs_um: 2.0, ..Default::default() }
}

pub fn straight(rng: &mut Rng) -> VesselSpec {
    VesselSpec { heading_rad: rng.inner().random_range(-0.3..0.3), ..VesselSpec::straight(90.0) }
}

pub fn wavy(rng: &mut Rng) -> VesselSpec {
    let a = rng.inner().random_range(4.0..8.0);
    let wl = rng.inner().random_range(35.0..55.0);
    VesselSpec { heading_rad: rng.inner().random_range(-0.2..0.2), ..VesselSpec::sinusoid(90.0, a, wl) }
}

pub fn phantom(spec: &VesselSpec, seed: u64) -> Phantom {
    render(spec, W, H, &Rng::new(seed)).expect("phantom fits the canvas")
}

fn entry(dir: &Path, id: String, class: Class, split: Split, spec: &VesselSpec, seed: u64) -> ManifestEntry {
    let (image, label) = phantom(spec, seed).save(dir, &id).unwrap();
    ManifestEntry { source_id: id.clone(), id, image, label, window: 0, split: Some(split), class, mean_tortuosity_um: 0.0 }
}

/// Source corpus of straight tubes, all in the train split.
pub fn source_manifest(dir: &Path, n_train: usize, seed: u64) -> DatasetManifest {
    let mut rng = Rng::new(seed);
    let entries = (0..n_train)
        .map(|i| {
            let spec = straight(&mut rng);
            entry(dir, format!("src{i:04}"), Class::NonTortuous, Split::Train, &spec, seed + i as u64)
        })
        .collect();
    DatasetManifest { entries }
}

/// Target corpus of sinusoidal tubes. At most `distinct_train` train images
/// are rendered; further train entries reuse those files under new ids.
pub fn target_manifest(dir: &Path, n_train: usize, n_test: usize, distinct_train: usize, seed: u64) -> DatasetManifest {
    let mut rng = Rng::new(seed ^ 0x7461);
    let mut entries: Vec<ManifestEntry> = (0..n_test)
        .map(|i| {
            let spec = wavy(&mut rng);
            entry(dir, format!("tst{i:04}"), Class::Tortuous, Split::Test, &spec, seed + 1000 + i as u64)
        })
        .collect();
    let rendered: Vec<ManifestEntry> = (0..n_train.min(distinct_train))
        .map(|i| {
            let spec = wavy(&mut rng);
            entry(dir, format!("trn{i:04}"), Class::Tortuous, Split::Train, &spec, seed + 5000 + i as u64)
        })
        .collect();
    for i in 0..n_train {
        let mut e = rendered[i % rendered.len()].clone();
        e.id = format!("trn{i:04}");
        e.source_id = e.id.clone();
        entries.push(e);
    }
    DatasetManifest { entries }
}
