//! Monte-Carlo checks of the statistical behaviour of the pipeline.

use nalgebra::Vector6;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sensorgraph_core::resample::{jackknife, HandEye};
use sensorgraph_core::synth::{generate_motion_pairs, random_pose, run_trials, summarize, RigSpec, Summary};
use sensorgraph_core::SolverOptions;

fn study(sigma: f64) -> Summary {
    let spec = RigSpec::default().with_sigma(sigma, sigma);
    let results: Vec<_> = run_trials(&spec, &SolverOptions::default())
        .unwrap()
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(results.len(), 300);
    summarize(&results).unwrap()
}

#[test]
fn optimization_reduces_injected_noise() {
    let s = study(0.05);
    assert!(s.optimized_translation.mean < s.injected_translation.mean);
    assert!(s.optimized_rotation.mean < s.injected_rotation.mean);
    assert!(s.translation_improved > 0.9, "{}", s.translation_improved);
    assert!(s.rotation_improved > 0.9, "{}", s.rotation_improved);
}

#[test]
fn optimized_error_scales_quadratically_with_sigma() {
    let full = study(0.05);
    let half = study(0.025);
    for (a, b) in [
        (full.optimized_translation.mean, half.optimized_translation.mean),
        (full.optimized_rotation.mean, half.optimized_rotation.mean),
    ] {
        let ratio = a / b;
        assert!((ratio / 4.0 - 1.0).abs() < 0.3, "ratio {ratio}");
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn hand_eye_jackknife_variance_tracks_noise() {
    let mut lower = [0usize; 6];
    let mut full_runs = Vec::new();
    let mut half_runs = Vec::new();
    for seed in 0..50 {
        let mut variances = Vec::new();
        for sigma in [0.005, 0.0025] {
            // same motions and noise directions, scaled noise
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_pose(&mut rng);
            let pairs = generate_motion_pairs(&x, 20, &Vector6::repeat(sigma), &mut rng).unwrap();
            let v = jackknife(&HandEye, &pairs).unwrap();
            assert!(v.variance.iter().all(|c| *c > 0.0), "{:?}", v.variance);
            variances.push(v.variance);
        }
        for k in 0..6 {
            if variances[1][k] < variances[0][k] {
                lower[k] += 1;
            }
        }
        full_runs.push(variances[0]);
        half_runs.push(variances[1]);
    }
    for k in 0..6 {
        assert!(lower[k] >= 45, "component {k}: {} of 50", lower[k]);
        let m_full = median(full_runs.iter().map(|v| v[k]).collect());
        let m_half = median(half_runs.iter().map(|v| v[k]).collect());
        assert!(m_half < m_full);
    }
}
