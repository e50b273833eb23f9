use std::f64::consts::FRAC_PI_2;

use tmqi_core::synth::{gray_hdr, gray_ldr, step_edge, vertical_line};
use tmqi_core::*;

#[test]
fn horizontal_lines_are_classified() {
    let p = PhaseParams::default();
    let bright = Plane::from_fn(40, 56, |_, y| if y == 30 { 180.0 } else { 40.0 }).unwrap();
    let map = lwmpa(&bright, &p).unwrap();
    for x in 0..40 {
        assert!((map.get(x, 30) - FRAC_PI_2).abs() < 0.2);
    }
    let dark = bright.map(|v| 220.0 - v);
    let map = lwmpa(&dark, &p).unwrap();
    for x in 0..40 {
        assert!((map.get(x, 30) + FRAC_PI_2).abs() < 0.2);
    }
}

#[test]
fn phase_values_stay_in_half_plane() {
    let p = PhaseParams::default();
    let plane = Plane::from_fn(50, 34, |x, y| {
        ((x * 7 + y * 13) % 23) as f64 * (1.0 + (x as f64 * 0.3).sin())
    })
    .unwrap();
    let map = lwmpa(&plane, &p).unwrap();
    assert!(map
        .values()
        .iter()
        .all(|v| (-FRAC_PI_2..=FRAC_PI_2).contains(v)));
}

#[test]
fn identical_structure_scores_full_similarity() {
    let p = PhaseParams::default();
    let line = vertical_line(48, 48, 17, 20.0, 200.0).unwrap();
    let score = phase_component(&gray_hdr(&line), &gray_ldr(&line), &p).unwrap();
    assert_eq!(score.l, 1.0);

    let edge = step_edge(48, 48, 10, 20.0, 200.0).unwrap();
    let inverted = edge.map(|v| 220.0 - v);
    let score = phase_component(&gray_hdr(&edge), &gray_ldr(&inverted), &p).unwrap();
    assert!(score.l < 1.0);
}

#[test]
fn too_small_plane_is_rejected() {
    let p = PhaseParams::default();
    assert!(matches!(
        lwmpa(&Plane::filled(4, 40, 1.0).unwrap(), &p),
        Err(Error::ImageTooSmall { .. })
    ));
}
