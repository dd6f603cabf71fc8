mod common;

use common::*;
use vesselmorph::harness::{rank_and_select, Class, LabeledImage};
use vesselmorph::synth::{oracle_tortuosity, VesselSpec};
use vesselmorph::*;

fn coverage(pred: &BinaryMask, truth: &BinaryMask) -> (f64, f64) {
    let (mut hit, mut fp, mut bg) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.bits().iter().zip(truth.bits()) {
        hit += (p && t) as usize;
        fp += (p && !t) as usize;
        bg += (!t) as usize;
    }
    (hit as f64 / truth.count() as f64, fp as f64 / bg as f64)
}

#[test]
fn classic_segmenter_recovers_noisy_tube() {
    for (seed, noise) in [(1u64, 0.0), (2, 0.05), (3, 0.1)] {
        let spec = VesselSpec { noise_std: noise, ..VesselSpec::sinusoid(100.0, 5.0, 45.0) };
        let ph = phantom(&spec, seed);
        let mask = segment(&ph.image, &SegmenterParams::default()).unwrap();
        let (cov, fp) = coverage(&mask, &ph.mask);
        assert!(cov >= 0.9, "noise {noise}: coverage {cov}");
        assert!(fp <= 0.05, "noise {noise}: false positives {fp}");
    }
}

#[test]
fn tortuosity_grows_with_amplitude() {
    let p = phantom_params();
    let values: Vec<f64> = [0.0, 2.0, 4.0, 6.0, 8.0]
        .iter()
        .map(|&a| image_tortuosity(&phantom(&VesselSpec::sinusoid(90.0, a, 45.0), 0).mask, &p).unwrap())
        .collect();
    assert!(values[0] <= 1e-6, "{values:?}");
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
}

#[test]
fn pipeline_tracks_oracle_on_wavy_tube() {
    let p = phantom_params();
    let ph = phantom(&VesselSpec::sinusoid(100.0, 6.0, 50.0), 0);
    let got = image_tortuosity(&ph.mask, &p).unwrap();
    let want = oracle_tortuosity(&ph.centerline, &p);
    assert!((got - want).abs() / want < 0.15, "{got} vs {want}");
}

#[test]
fn ols_and_tls_agree_on_horizontal_tubes() {
    let ph = phantom(&VesselSpec::sinusoid(90.0, 2.0, 60.0), 0);
    let tls = image_tortuosity(&ph.mask, &phantom_params()).unwrap();
    let ols = image_tortuosity(&ph.mask, &TortuosityParams { regression: Regression::Ols, ..phantom_params() }).unwrap();
    assert!((tls - ols).abs() / tls < 0.1, "{tls} vs {ols}");
}

#[test]
fn ranking_separates_straight_from_wavy() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(5);
    let mut images = vec![];
    for i in 0..20 {
        for (kind, spec) in [("s", straight(&mut rng)), ("w", wavy(&mut rng))] {
            let id = format!("{kind}{i:02}");
            let (image, label) = phantom(&spec, i).save(dir.path(), &id).unwrap();
            images.push(LabeledImage { id, image, label });
        }
    }
    let m = rank_and_select(&images, 10, &phantom_params()).unwrap();
    assert!(m.in_class(Class::Tortuous).all(|e| e.id.starts_with('w')));
    assert!(m.in_class(Class::NonTortuous).all(|e| e.id.starts_with('s')));
    assert_eq!(m.entries.len(), 20);
}

#[test]
fn augmented_pairs_stay_consistent() {
    let ph = phantom(&VesselSpec::straight(90.0), 0);
    let params = ElasticParams { alpha: 64.0, sigma: 4.0, seed: 0 };
    let overlap = |img: &GrayImage, mask: &BinaryMask| metrics::iou(&img.threshold(0.45), mask).unwrap();
    let (wi, wm) = augment_pair(&ph.image, &ph.mask, &params, &Rng::new(1)).unwrap();
    let (_, other) = augment_pair(&ph.image, &ph.mask, &params, &Rng::new(2)).unwrap();
    assert!(overlap(&wi, &wm) > overlap(&wi, &other));
    assert!(overlap(&wi, &wm) > 0.8);
}
