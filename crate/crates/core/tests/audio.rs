mod oracles;

use phq_core::audio::deltas::delta;
use phq_core::audio::frames::hamming;
use phq_core::audio::functionals::{apply_functionals, FUNCTIONAL_NAMES};
use phq_core::audio::spectral::describe_spectrum;
use phq_core::audio::{session_acoustic_vector, AcousticGroup};
use phq_core::model::{AudioSignal, Session, Speaker, TurnRecord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn idx(name: &str) -> usize {
    FUNCTIONAL_NAMES.iter().position(|n| *n == name).unwrap()
}

fn voiced_session(seed: u64) -> Session<f64> {
    let sr = 16000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![0.0; sr as usize * 6];
    let mut turns = Vec::new();
    for k in 0..3 {
        let (a, b) = (k as f64 * 2.0, k as f64 * 2.0 + 1.0);
        turns.push(TurnRecord::new(a, a + 0.8, Speaker::Agent, "how are you").unwrap());
        turns.push(TurnRecord::new(b, b + 0.9, Speaker::Participant, "fine thanks").unwrap());
        let f0 = 110.0 + 30.0 * k as f64;
        for i in (b * sr as f64) as usize..((b + 0.9) * sr as f64) as usize {
            let t = i as f64 / sr as f64;
            let mut v = 0.0;
            for h in 1..6 {
                v += (2.0 * std::f64::consts::PI * f0 * h as f64 * t).sin() / h as f64;
            }
            samples[i] = 0.3 * v + 0.01 * rng.gen_range(-1.0..1.0);
        }
    }
    Session::new("s1", turns).unwrap().with_audio(AudioSignal::new(samples, sr))
}

#[test]
fn group_dimensions_and_names() {
    let s = voiced_session(4);
    for (g, dim) in [
        (AcousticGroup::Spectral, 864),
        (AcousticGroup::Prosody, 288),
        (AcousticGroup::VoiceQuality, 288),
        (AcousticGroup::Merged, 1440),
    ] {
        let v = session_acoustic_vector(&s, g).unwrap();
        assert_eq!(v.len(), dim, "{g:?}");
        assert_eq!(v.names.len(), dim);
        assert!(v.values.iter().all(|x| x.is_finite()), "{g:?}");
    }
    let m = session_acoustic_vector(&s, AcousticGroup::Merged).unwrap();
    assert_eq!(m.names[0], "p_f0_range");
    assert_eq!(m.names[288], "s_band_0_250_range");
    assert_eq!(m.names[1439], "vq_log_hnr_dd_min");
}

#[test]
fn spectrum_descriptors_match_direct_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = hamming::<f64>(200);
    let frame: Vec<f64> = (0..200)
        .map(|i| w[i] * ((i as f64 * 0.3).sin() + 0.5 * rng.gen_range(-1.0..1.0)))
        .collect();
    let mags = oracles::dft_magnitudes(&frame);
    let bin_hz = 8000.0 / 200.0;
    let got = describe_spectrum(&mags, bin_hz);
    let want = oracles::centroid_oracle(&mags, bin_hz);
    assert!((got.centroid - want).abs() < 1e-9);
    let power: Vec<f64> = mags.iter().map(|m| m * m).collect();
    let band: f64 = power.iter().enumerate().filter(|(k, _)| (*k as f64 * bin_hz) <= 250.0).map(|(_, p)| p).sum();
    assert!((got.bands[0] - band).abs() < 1e-9 * band.max(1.0));
}

#[test]
fn fitted_functionals_match_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for len in [3usize, 7, 50, 301] {
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = apply_functionals(&x).unwrap();
        let (lin, lin_err) = oracles::polyfit(&x, 1);
        let (quad, quad_err) = oracles::polyfit(&x, 2);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * (1.0 + b.abs());
        assert!(close(f[idx("lin_slope")], lin[0]));
        assert!(close(f[idx("lin_offset")], lin[1]));
        assert!(close(f[idx("lin_err")], lin_err));
        assert!(close(f[idx("quad_a")], quad[0]));
        assert!(close(f[idx("quad_b")], quad[1]));
        assert!(close(f[idx("quad_c")], quad[2]));
        assert!(close(f[idx("quad_err")], quad_err));
    }
}

proptest! {
    #[test]
    fn delta_matches_padded_oracle(x in prop::collection::vec(-100.0f64..100.0, 5..80)) {
        let got = delta(&x);
        let want = oracles::delta_oracle(&x);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn moments_and_extremes(x in prop::collection::vec(-50.0f64..50.0, 3..60)) {
        let f = apply_functionals(&x).unwrap();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((f[idx("mean")] - mean).abs() < 1e-9);
        prop_assert!((f[idx("variance")] - var).abs() < 1e-7 * (1.0 + var));
        prop_assert!((f[idx("stddev")] - var.sqrt()).abs() < 1e-7 * (1.0 + var));
        prop_assert_eq!(f[idx("max")], max);
        prop_assert_eq!(f[idx("min")], min);
        prop_assert_eq!(f[idx("range")], max - min);
        prop_assert!(f[idx("zcr")] >= 0.0 && f[idx("zcr")] <= 1.0);
    }
}
