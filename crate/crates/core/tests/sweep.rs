mod common;

use std::collections::HashMap;

use common::*;
use vesselmorph::harness::backend::{Backend, BackendSpec, Command, Job, StubKind};
use vesselmorph::harness::emit::{read_aggregates, read_rows};
use vesselmorph::harness::sweep::aggregate;
use vesselmorph::harness::{emit_results, run_sweep, Split, SweepConfig};
use vesselmorph::*;

fn config(kind: StubKind, n_values: Vec<usize>) -> SweepConfig {
    SweepConfig {
        n_values,
        seed: 11,
        backend: BackendSpec::Builtin { kind },
        tortuosity: phantom_params(),
        ..Default::default()
    }
}

#[test]
fn oracle_sweep_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let src = source_manifest(&dir.path().join("src"), 4, 1);
    let tgt = target_manifest(&dir.path().join("tgt"), 12, 3, 12, 2);
    let r = run_sweep(&config(StubKind::Oracle, vec![0, 1, 6, 12]), &src, &tgt, &dir.path().join("work")).unwrap();
    assert_eq!(r.train_size, 12);
    assert_eq!(r.rows.len(), 1 + 6 + 5 + 5);
    assert!(r.rows.iter().all(|row| row.relative_iou == 1.0 && row.relative_tortuosity == 1.0));
    assert!(r.rows.iter().all(|row| row.sampled_ids.len() == row.n));
}

#[test]
fn false_components_improve_with_samples() {
    let dir = tempfile::tempdir().unwrap();
    let src = source_manifest(&dir.path().join("src"), 2, 1);
    let tgt = target_manifest(&dir.path().join("tgt"), 40, 3, 4, 2);
    let r = run_sweep(&config(StubKind::FalseComponents, vec![0, 20, 40]), &src, &tgt, &dir.path().join("w")).unwrap();
    let iou: Vec<f64> = r.aggregates.iter().map(|a| a.mean_iou).collect();
    assert!(iou[0] < iou[1] && iou[1] < iou[2] && iou[2] == 1.0, "{iou:?}");
}

#[test]
fn outputs_recompute_from_rows() {
    let dir = tempfile::tempdir().unwrap();
    let src = source_manifest(&dir.path().join("src"), 2, 1);
    let tgt = target_manifest(&dir.path().join("tgt"), 10, 3, 10, 2);
    let cfg = config(StubKind::Shrink, vec![0, 2, 5]);
    let r = run_sweep(&cfg, &src, &tgt, &dir.path().join("w")).unwrap();
    let out = dir.path().join("out");
    emit_results(&r, &cfg, &out).unwrap();
    let rows = read_rows(&out.join("rows.csv")).unwrap();
    assert_eq!(rows.len(), 1 + 5 + 5);
    let again = aggregate(&rows.iter().map(|&(n, _, i, t)| (n, t, i)).collect::<Vec<_>>());
    for (a, b) in again.iter().zip(read_aggregates(&out.join("aggregates.csv")).unwrap()) {
        assert_eq!((a.n, a.k), (b.n, b.k));
        for (x, y) in [(a.mean_r, b.mean_r), (a.std_r, b.std_r), (a.mean_iou, b.mean_iou), (a.std_iou, b.std_iou)] {
            assert!((x - y).abs() <= 1e-9);
        }
    }
    assert!(out.join("plot.svg").is_file() && out.join("manifest.json").is_file());
}

#[test]
fn oversized_sample_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let src = source_manifest(&dir.path().join("src"), 2, 1);
    let tgt = target_manifest(&dir.path().join("tgt"), 3, 2, 3, 2);
    let work = dir.path().join("w");
    let err = run_sweep(&config(StubKind::Oracle, vec![4]), &src, &tgt, &work).unwrap_err();
    assert!(matches!(err, Error::InsufficientImages { needed: 4, available: 3 }));
    assert!(!work.exists());
}

#[test]
fn backend_failure_carries_sweep_context() {
    let dir = tempfile::tempdir().unwrap();
    let src = source_manifest(&dir.path().join("src"), 2, 1);
    let mut tgt = target_manifest(&dir.path().join("tgt"), 3, 2, 3, 2);
    // a test image the stub has no reference for cannot be predicted
    for e in tgt.entries.iter_mut().filter(|e| e.split == Some(Split::Test)) {
        e.label = dir.path().join("missing.png");
    }
    let err = run_sweep(&config(StubKind::Oracle, vec![1]), &src, &tgt, &dir.path().join("w")).unwrap_err();
    assert_eq!(err.code(), "unreadable");
}

#[test]
fn classic_backend_segments_phantoms() {
    let dir = tempfile::tempdir().unwrap();
    let tgt = target_manifest(dir.path(), 1, 2, 1, 3);
    let images: Vec<_> = tgt.entries.iter().map(|e| e.image.clone()).collect();
    let labels: Vec<_> = tgt.entries.iter().map(|e| e.label.clone()).collect();
    let b = Backend::new(BackendSpec::Builtin { kind: StubKind::Classic }, HashMap::new()).unwrap();
    let job = |command, model_in, tag: &str| Job {
        command,
        model_in,
        model_out: (command == Command::Train).then(|| dir.path().join("model.json")),
        images: images.clone(),
        labels: (command == Command::Train).then(|| labels.clone()),
        epochs: 1,
        seed: 0,
        out_dir: dir.path().join(tag),
    };
    let t = b.run(&job(Command::Train, None, "t"), &dir.path().join("jt")).unwrap();
    let done = b.run(&job(Command::Predict, t.model, "p"), &dir.path().join("jp")).unwrap();
    for (m, l) in done.masks.unwrap().iter().zip(&labels) {
        let (pred, truth) = (io::load_mask(m).unwrap(), io::load_mask(l).unwrap());
        let hit = pred.bits().iter().zip(truth.bits()).filter(|(p, t)| **p && **t).count();
        let fp = pred.bits().iter().zip(truth.bits()).filter(|(p, t)| **p && !**t).count();
        assert!(hit as f64 >= 0.9 * truth.count() as f64);
        assert!(fp as f64 <= 0.05 * (truth.bits().len() - truth.count()) as f64);
    }
}
