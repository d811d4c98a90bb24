mod common;

use coarsenrank::{
    dataset_log_likelihood, diagnose, dic, dic_from_samples, generate, gibbs_run, ConditionalMode,
    GammaPrior, GibbsConfig, ItemScores, PosteriorSamples, PreferenceDataset, SynthSpec,
};

use common::*;

fn log_likelihoods(ds: &PreferenceDataset, samples: &PosteriorSamples) -> Vec<f64> {
    samples
        .rows()
        .map(|r| dataset_log_likelihood(ds, &ItemScores::new(r.to_vec()).unwrap()).unwrap())
        .collect()
}

fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[test]
fn posterior_share_matches_quadrature() {
    let ds = PreferenceDataset::from_indices(2, vec![vec![0, 1]; 10]).unwrap();
    let exact = two_item_share_quadrature(10, 1.0, 2.0);
    assert!((exact - 11.0 / 12.0).abs() < 1e-5, "quadrature {exact}");
    for seed in [1, 2, 3] {
        let gc = GibbsConfig {
            samples: 2000,
            seed,
            ..Default::default()
        };
        let s = gibbs_run(&ds, f64::INFINITY, &GammaPrior::default(), &gc).unwrap();
        let shares: Vec<f64> = s.rows().map(|r| r[0] / (r[0] + r[1])).collect();
        let se = batch_means_se(&shares, 40);
        let m = mean(&shares);
        assert!(
            (m - exact).abs() <= 3.0 * se,
            "seed {seed}: {m} vs {exact} (se {se})"
        );
    }
}

#[test]
fn symmetric_data_gives_near_even_log_likelihood() {
    let prefs: Vec<Vec<usize>> = (0..10).flat_map(|_| [vec![0, 1], vec![1, 0]]).collect();
    let ds = PreferenceDataset::from_indices(2, prefs).unwrap();
    let prior = GammaPrior::default();
    let gc = GibbsConfig {
        seed: 4,
        ..Default::default()
    };
    let samples = gibbs_run(&ds, f64::INFINITY, &prior, &gc).unwrap();
    let point = dic_from_samples(&ds, f64::INFINITY, &samples).unwrap();
    let spread = sd(&log_likelihoods(&ds, &samples));
    let even = 20.0 * 0.5f64.ln();
    assert!(point.f <= even);
    assert!(
        (point.f - even).abs() <= 3.0 * spread,
        "f {} vs {even} (sd {spread})",
        point.f
    );
}

#[test]
fn dic_is_consistent_across_seeds() {
    let data = generate(&SynthSpec::new(6, 150, 3, 31)).unwrap();
    let ds = &data.dataset;
    let prior = GammaPrior::default();
    let run = |seed| {
        let gc = GibbsConfig {
            seed,
            ..Default::default()
        };
        let s = gibbs_run(ds, 100.0, &prior, &gc).unwrap();
        let p = dic_from_samples(ds, 100.0, &s).unwrap();
        // DIC = log P(E θ) − 2 f; the f term dominates the Monte Carlo error
        let se = 2.0 * sd(&log_likelihoods(ds, &s)) / (s.num_samples() as f64).sqrt();
        (p.dic, se)
    };
    let (a, sa) = run(100);
    let (b, sb) = run(200);
    let combined = (sa * sa + sb * sb).sqrt();
    assert!(
        (a - b).abs() <= 3.0 * combined,
        "{a} vs {b} (se {combined})"
    );
}

#[test]
fn swapping_items_mirrors_the_posterior() {
    let mut prefs = vec![vec![0, 1]; 7];
    prefs.extend(vec![vec![1, 0]; 3]);
    let ds = PreferenceDataset::from_indices(2, prefs.clone()).unwrap();
    let mirrored = PreferenceDataset::from_indices(
        2,
        prefs
            .iter()
            .map(|p| p.iter().map(|&i| 1 - i).collect())
            .collect(),
    )
    .unwrap();
    let gc = GibbsConfig {
        samples: 2000,
        seed: 8,
        ..Default::default()
    };
    let a = gibbs_run(&ds, 5.0, &GammaPrior::default(), &gc).unwrap();
    let b = gibbs_run(
        &mirrored,
        5.0,
        &GammaPrior::default(),
        &GibbsConfig { seed: 9, ..gc },
    )
    .unwrap();
    for (ia, ib) in [(0, 1), (1, 0)] {
        let xa: Vec<f64> = a.rows().map(|r| r[ia]).collect();
        let xb: Vec<f64> = b.rows().map(|r| r[ib]).collect();
        let se = (batch_means_se(&xa, 40).powi(2) + batch_means_se(&xb, 40).powi(2)).sqrt();
        assert!(
            (mean(&xa) - mean(&xb)).abs() <= 3.0 * se,
            "{} vs {} (se {se})",
            mean(&xa),
            mean(&xb)
        );
    }
}

#[test]
fn shifted_shape_draws_stay_positive() {
    let data = generate(&SynthSpec::new(8, 100, 3, 12)).unwrap();
    let gc = GibbsConfig {
        mode: ConditionalMode::Shifted,
        seed: 3,
        ..Default::default()
    };
    for alpha in [10.0, 1e3, f64::INFINITY] {
        let s = gibbs_run(&data.dataset, alpha, &GammaPrior::default(), &gc).unwrap();
        assert!(s.rows().flatten().all(|&v| v > 0.0 && v.is_finite()));
        let p = dic(&data.dataset, alpha, &GammaPrior::default(), &gc).unwrap();
        assert!(p.f.is_finite() && p.g.is_finite() && p.dic.is_finite());
    }
}

#[test]
fn shifted_shape_degenerate_shape_is_reported_not_propagated() {
    // with τ·W tiny the shifted shape collapses toward zero and draws underflow
    let data = generate(&SynthSpec::new(8, 100, 3, 12)).unwrap();
    let gc = GibbsConfig {
        mode: ConditionalMode::Shifted,
        seed: 3,
        ..Default::default()
    };
    match gibbs_run(&data.dataset, 0.1, &GammaPrior::default(), &gc) {
        Ok(s) => assert!(s.rows().flatten().all(|&v| v > 0.0 && v.is_finite())),
        Err(e) => assert!(
            matches!(e.root(), coarsenrank::Error::InvalidGamma { .. }),
            "{e}"
        ),
    }
}

#[test]
fn diagnose_prefers_finite_alpha_on_heavy_noise() {
    // grid {10, ∞} on 40%-reordered synthetic data, 20 seeded trials
    let grid = [10.0, f64::INFINITY];
    let mut finite = 0;
    for trial in 0..20u64 {
        let data = generate(&SynthSpec {
            noise_fraction: 0.4,
            ..SynthSpec::new(20, 2000, 5, 700 + trial)
        })
        .unwrap();
        let gc = GibbsConfig {
            seed: trial,
            ..Default::default()
        };
        let d = diagnose(&data.dataset, &grid, &GammaPrior::default(), &gc).unwrap();
        if d.selected_alpha.is_finite() {
            finite += 1;
        }
    }
    assert!(
        finite >= 16,
        "finite alpha selected in {finite}/20 trials (need >= 16)"
    );
}
