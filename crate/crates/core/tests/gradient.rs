use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmqi_core::synth::fixture_corpus;
use tmqi_core::*;

fn s_of(x: &Plane, y: &Plane, p: &FidelityParams) -> f64 {
    structural_fidelity(x, y, p).unwrap().s
}

#[test]
fn analytic_gradient_matches_directional_derivative() {
    let p = FidelityParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (hdr, ldr) in fixture_corpus(3, 24).unwrap() {
        let x = RangeAlignment::Linear.align(&luminance(&hdr));
        let y = luminance(&ldr);
        let g = fidelity_gradient(&x, &y, &p, GradientMethod::Analytic).unwrap();
        for _ in 0..4 {
            let dir: Vec<f64> = (0..y.data().len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let h = 1e-4;
            let shift = |s: f64| {
                y.with_data(y.data().iter().zip(&dir).map(|(v, d)| v + s * d).collect())
                    .unwrap()
            };
            let numeric = (s_of(&x, &shift(h), &p) - s_of(&x, &shift(-h), &p)) / (2.0 * h);
            let analytic: f64 = g.data().iter().zip(&dir).map(|(a, b)| a * b).sum();
            assert!(
                (numeric - analytic).abs() <= 1e-6 * numeric.abs().max(1e-6),
                "numeric {numeric:e} vs analytic {analytic:e}"
            );
        }
    }
}

#[test]
fn repeated_ascent_is_monotone() {
    let p = FidelityParams::default();
    let (hdr, ldr) = fixture_corpus(1, 32).unwrap().remove(0);
    let x = RangeAlignment::Linear.align(&luminance(&hdr));
    let mut y = luminance(&ldr);
    let mut last = s_of(&x, &y, &p);
    for _ in 0..5 {
        y = fidelity_ascent_step(&x, &y, 1e-3, &p, GradientMethod::FiniteDifference).unwrap();
        let s = s_of(&x, &y, &p);
        assert!(s >= last - 1e-12, "{last} -> {s}");
        last = s;
    }
}

#[test]
fn ascent_rejects_bad_lambda() {
    let x = Plane::filled(16, 16, 1.0).unwrap();
    let p = FidelityParams::default();
    for lambda in [-1e-3, f64::NAN, f64::INFINITY] {
        assert!(matches!(
            fidelity_ascent_step(&x, &x, lambda, &p, GradientMethod::Analytic),
            Err(Error::InvalidParams(_))
        ));
    }
    assert_eq!(
        fidelity_ascent_step(&x, &x, 0.0, &p, GradientMethod::Analytic).unwrap(),
        x
    );
}
