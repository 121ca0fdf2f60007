mod oracles;

use phq_core::selection::{relief_weights, select_top, tune_relief, TuneSpec};
use phq_core::regress::{MeanModel, Regressor};
use phq_core::Result;

#[test]
fn weights_match_brute_force_relief() {
    for seed in 0..10 {
        let (x, c) = oracles::relief_dataset(seed, 30, 6, 2);
        for k in [1, 3, 5] {
            let got = relief_weights(&x, &c, k).unwrap().weights;
            let want = oracles::relief_oracle(&x, &c, k);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9, "seed {seed} k {k}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn informative_feature_ranks_first() {
    let wins = (0..100)
        .filter(|&seed| {
            let (x, c) = oracles::relief_dataset(seed, 100, 10, 7);
            let w = relief_weights(&x, &c, 10).unwrap().weights;
            select_top(&w, f64::NEG_INFINITY, 20)[0] == 7
        })
        .count();
    assert!(wins >= 95, "{wins}/100");
}

#[test]
fn separating_feature_beats_noise() {
    let (x, c) = oracles::relief_dataset(3, 40, 2, 0);
    let x: Vec<Vec<f64>> = x.iter().zip(&c).map(|(r, &k)| vec![if k { 1.0 } else { 0.0 }, r[1]]).collect();
    let w = relief_weights(&x, &c, 5).unwrap().weights;
    let o = oracles::relief_oracle(&x, &c, 5);
    assert!(w[0] > w[1] && o[0] > o[1]);
}

#[test]
fn affine_rescaling_and_duplication() {
    let (x, c) = oracles::relief_dataset(9, 40, 5, 1);
    let base = relief_weights(&x, &c, 5).unwrap().weights;
    let scaled: Vec<Vec<f64>> = x.iter().map(|r| {
        let mut r = r.clone();
        r[3] = r[3] * 1000.0 - 7.0;
        r
    }).collect();
    let w = relief_weights(&scaled, &c, 5).unwrap().weights;
    for (a, b) in base.iter().zip(&w) {
        assert!((a - b).abs() < 1e-9);
    }
    let doubled: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
    let dc: Vec<bool> = c.iter().chain(&c).copied().collect();
    let dw = relief_weights(&doubled, &dc, 5).unwrap().weights;
    let rank = |w: &[f64]| select_top(w, f64::NEG_INFINITY, 10);
    let ow = oracles::relief_oracle(&doubled, &dc, 5);
    assert_eq!(rank(&dw), rank(&ow));
    for (a, b) in dw.iter().zip(&ow) {
        assert!((a - b).abs() < 1e-9);
    }
}

fn mean_fit(x: &[Vec<f64>], y: &[f64], test: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = MeanModel::fit(x[0].len(), y)?;
    m.predict_many(test)
}

#[test]
fn grid_points_and_skips() {
    let (x, c) = oracles::relief_dataset(1, 60, 4, 0);
    let y: Vec<f64> = c.iter().map(|&k| if k { 15.0 } else { 3.0 }).collect();
    let full = tune_relief(&x, &y, &TuneSpec::default(), &mean_fit).unwrap();
    assert_eq!(full.points.len(), 12);

    let one = TuneSpec { thresholds: vec![0.0], ks: vec![5], ..TuneSpec::default() };
    let r = tune_relief(&x, &y, &one, &mean_fit).unwrap();
    assert_eq!((r.threshold, r.k), (0.0, 5));

    // 30 per class leaves 20 per class in a training part: k=20 needs 21
    let too_big = TuneSpec { ks: vec![15, 20], ..TuneSpec::default() };
    let r = tune_relief(&x, &y, &too_big, &mean_fit).unwrap();
    for p in &r.points {
        assert_eq!(p.skipped.is_some(), p.k == 20, "{p:?}");
    }
}

#[test]
fn only_nonempty_threshold_can_win() {
    // every weight ends up between 0.02 and 0.04, so a huge threshold selects nothing
    let (x, c) = oracles::relief_dataset(4, 60, 3, 0);
    let y: Vec<f64> = c.iter().map(|&k| if k { 20.0 } else { 2.0 }).collect();
    let spec = TuneSpec { thresholds: vec![0.9, 0.02], ks: vec![5], ..TuneSpec::default() };
    let r = tune_relief(&x, &y, &spec, &mean_fit).unwrap();
    assert_eq!(r.threshold, 0.02);
    assert!(r.points[0].skipped.is_some());
}
