use std::path::Path;

use tmqi_core::eval::{evaluate_dataset, to_csv, to_markdown, EvalOptions};
use tmqi_core::io::{load_manifest_file, save_hdr, save_ldr};
use tmqi_core::synth::{synthetic_scene, tone_map, ToneCurve};
use tmqi_core::*;

const CURVES: [ToneCurve; 3] = [
    ToneCurve::Photographic { key: 0.18 },
    ToneCurve::Gamma {
        exposure: 0.002,
        gamma: 2.2,
    },
    ToneCurve::Log,
];

fn write_dataset(dir: &Path, sets: usize) -> std::path::PathBuf {
    let mut json = Vec::new();
    for s in 0..sets {
        let hdr = synthetic_scene(50 + s as u64, 48, 40).unwrap();
        let hdr_name = format!("scene{s}.hdr");
        save_hdr(&hdr, &dir.join(&hdr_name)).unwrap();
        let entries: Vec<String> = CURVES
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let name = format!("scene{s}_{i}.png");
                save_ldr(&tone_map(&hdr, c), &dir.join(&name)).unwrap();
                format!(r#"{{"path":"{name}","subjective_score":{}}}"#, 2 + 2 * i)
            })
            .collect();
        json.push(format!(
            r#"{{"set_id":{},"hdr_path":"{hdr_name}","ldr_entries":[{}]}}"#,
            s + 1,
            entries.join(",")
        ));
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, format!(r#"{{"sets":[{}]}}"#, json.join(","))).unwrap();
    path
}

#[test]
fn dataset_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = load_manifest_file(&write_dataset(dir.path(), 3)).unwrap();
    let params = TmqiParams::default();
    let a = evaluate_dataset(&manifest, &params, EvalOptions::default()).unwrap();
    let b = evaluate_dataset(&manifest, &params, EvalOptions::default()).unwrap();
    assert_eq!(to_csv(&a), to_csv(&b));
    assert_eq!(to_markdown(&a), to_markdown(&b));
    assert_eq!(
        a.sets.iter().map(|s| s.set_id).collect::<Vec<_>>(),
        vec![1, 2, 3]
    );
    for set in &a.sets {
        assert_eq!(set.images.len(), 3);
        for v in set.krcc.values() {
            assert!((-1.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn broken_set_is_reported_or_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_dataset(dir.path(), 2);
    std::fs::write(dir.path().join("scene1_2.png"), b"not an image").unwrap();
    let manifest = load_manifest_file(&path).unwrap();
    let params = TmqiParams::default();

    let err = evaluate_dataset(&manifest, &params, EvalOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InSet { set_id: 2, .. }), "{err}");
    assert!(err.to_string().contains("scene1_2.png"), "{err}");

    let report = evaluate_dataset(&manifest, &params, EvalOptions { skip_broken: true }).unwrap();
    assert_eq!(report.sets.len(), 1);
    assert_eq!(report.skipped.len(), 1);
    assert_eq!(report.skipped[0].set_id, 2);
}

#[test]
fn mismatched_sizes_surface_as_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_dataset(dir.path(), 1);
    let small = tone_map(&synthetic_scene(1, 40, 40).unwrap(), ToneCurve::Log);
    save_ldr(&small, &dir.path().join("scene0_1.png")).unwrap();
    let manifest = load_manifest_file(&path).unwrap();
    let err =
        evaluate_dataset(&manifest, &TmqiParams::default(), EvalOptions::default()).unwrap_err();
    assert!(err.is_dimension_mismatch(), "{err}");
}
