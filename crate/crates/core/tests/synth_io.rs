mod common;

use coarsenrank::io::{
    format_number, parse_dic_curve, parse_preferences, parse_scores, parse_truth, write_dic_curve,
    write_preferences, write_scores, write_truth,
};
use coarsenrank::{
    fit, generate, kendall_tau, scores_to_ranking, CoarsenConfig, DicPoint, ItemIds, ItemScores,
    SynthSpec,
};
use proptest::prelude::*;

#[test]
fn generated_orderings_follow_plackett_luce() {
    let spec = SynthSpec {
        theta_truth: Some(ItemScores::new(vec![100.0, 10.0, 1.0]).unwrap()),
        ..SynthSpec::new(3, 4000, 3, 17)
    };
    let data = generate(&spec).unwrap();
    let hits = data
        .dataset
        .preferences()
        .iter()
        .filter(|p| p.items() == [0, 1, 2])
        .count();
    let freq = hits as f64 / 4000.0;
    let expected = (100.0 / 111.0) * (10.0 / 11.0);
    assert!((freq - expected).abs() <= 0.05, "{freq} vs {expected}");
}

#[test]
fn fully_replaced_data_carries_no_ranking_signal() {
    let mut taus = Vec::new();
    for seed in 0..10u64 {
        let data = generate(&SynthSpec {
            noise_fraction: 1.0,
            ..SynthSpec::new(20, 2000, 5, 300 + seed)
        })
        .unwrap();
        assert_eq!(data.replaced.len(), 2000);
        let res = fit(&data.dataset, &CoarsenConfig::with_alpha(f64::INFINITY)).unwrap();
        taus.push(kendall_tau(&scores_to_ranking(&res.theta), &data.ground_truth).unwrap());
    }
    let m = common::mean(&taus);
    assert!((m - 0.5).abs() <= 0.1, "mean tau {m} ({taus:?})");
}

#[test]
fn clean_data_recovers_the_truth() {
    let data = generate(&SynthSpec::new(20, 2000, 5, 41)).unwrap();
    let res = fit(&data.dataset, &CoarsenConfig::with_alpha(f64::INFINITY)).unwrap();
    let tau = kendall_tau(&scores_to_ranking(&res.theta), &data.ground_truth).unwrap();
    assert!(tau >= 0.9, "tau {tau}");
}

#[test]
fn generation_is_deterministic_and_noise_only_touches_replaced_lines() {
    let clean = generate(&SynthSpec::new(12, 500, 4, 5)).unwrap();
    let noisy_spec = SynthSpec {
        noise_fraction: 0.4,
        ..SynthSpec::new(12, 500, 4, 5)
    };
    let noisy = generate(&noisy_spec).unwrap();
    assert_eq!(noisy, generate(&noisy_spec).unwrap());
    assert_eq!(noisy.replaced.len(), 200);
    for (i, (a, b)) in clean
        .dataset
        .preferences()
        .iter()
        .zip(noisy.dataset.preferences())
        .enumerate()
    {
        if a != b {
            assert!(noisy.replaced.binary_search(&i).is_ok(), "line {i}");
        }
    }
}

#[test]
fn preference_and_truth_files_round_trip() {
    let data = generate(&SynthSpec::new(9, 60, 4, 2)).unwrap();
    let text = write_preferences(&data.dataset);
    let back = parse_preferences(&text).unwrap();
    assert_eq!(write_preferences(&back), text);
    let truth = write_truth(&data.ground_truth, data.dataset.items());
    assert_eq!(
        parse_truth(&truth, data.dataset.items()).unwrap(),
        data.ground_truth
    );
}

#[test]
fn numbers_use_a_fixed_decimal_point() {
    // Rust formatting ignores the C locale; pin the output anyway
    std::env::set_var("LC_ALL", "de_DE.UTF-8");
    assert_eq!(format_number(0.5), "0.500000000000");
    assert_eq!(format_number(1234.5), "1234.50000000");
    assert!(!format_number(1e-9).contains(','));
}

fn score_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1e-9f64..1e9, Just(0.0)], 2..15)
        .prop_filter("needs a positive score", |v| v.iter().any(|&x| x > 0.0))
}

proptest! {
    #[test]
    fn scores_round_trip(theta in score_vec()) {
        let theta = ItemScores::new(theta).unwrap();
        let ids = ItemIds::numbered(theta.len());
        let table = parse_scores(&write_scores(&theta, &ids)).unwrap();
        let parsed: Vec<&str> = table.ranking.as_slice().iter().map(|&i| table.items.id(i)).collect();
        let expected: Vec<&str> = scores_to_ranking(&theta).as_slice().iter().map(|&i| ids.id(i)).collect();
        prop_assert_eq!(parsed, expected);
        for (i, &orig) in theta.as_slice().iter().enumerate() {
            let j = table.items.index_of(ids.id(i)).unwrap();
            let got = table.scores[j];
            prop_assert!((got - orig).abs() <= 1e-11 * orig.abs(), "{} vs {}", got, orig);
        }
    }

    #[test]
    fn dic_curve_round_trips(
        rows in prop::collection::vec((1e-3f64..1e6, -1e6f64..0.0, 0.0f64..1e3), 1..8),
        with_inf in any::<bool>(),
    ) {
        let mut alphas: Vec<f64> = rows.iter().map(|r| r.0).collect();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        let mut points: Vec<DicPoint> = alphas
            .iter()
            .zip(&rows)
            .map(|(&alpha, &(_, f, g))| DicPoint { alpha, f, g, dic: g - f })
            .collect();
        if with_inf {
            points.push(DicPoint { alpha: f64::INFINITY, f: -1.0, g: 0.5, dic: 1.5 });
        }
        let back = parse_dic_curve(&write_dic_curve(&points)).unwrap();
        prop_assert_eq!(back.len(), points.len());
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-11 * a.abs().max(b.abs());
        for (p, q) in points.iter().zip(&back) {
            prop_assert!(close(p.alpha, q.alpha) && close(p.f, q.f) && close(p.g, q.g) && close(p.dic, q.dic));
        }
    }
}
