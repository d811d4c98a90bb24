//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver code paths it is used to check.

#![allow(dead_code)]

use coarsenrank::{GammaPrior, ItemScores, Preference, PreferenceDataset};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pref(items: &[usize]) -> Preference {
    Preference::new(items.to_vec()).unwrap()
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// PL probability by the textbook product, each denominator summed afresh.
pub fn oracle_probability(order: &[usize], theta: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..order.len() - 1 {
        let denom: f64 = order[i..].iter().map(|&j| theta[j]).sum();
        p *= theta[order[i]] / denom;
    }
    p
}

pub fn oracle_log_likelihood(ds: &PreferenceDataset, theta: &[f64]) -> f64 {
    ds.preferences()
        .iter()
        .map(|p| oracle_probability(p.items(), theta).ln())
        .sum()
}

/// Gamma log-prior (θ-free constants dropped) plus tempered log-likelihood.
pub fn oracle_log_posterior(
    ds: &PreferenceDataset,
    theta: &[f64],
    tau: f64,
    prior: &GammaPrior,
) -> f64 {
    let log_prior: f64 = theta
        .iter()
        .enumerate()
        .map(|(m, &t)| {
            let (shape, rate) = prior.params(m);
            (shape - 1.0) * t.ln() - rate * t
        })
        .sum();
    log_prior + tau * oracle_log_likelihood(ds, theta)
}

/// Brute-force maximiser of the log-posterior over `{θ > 0, Σθ = c}` for
/// three items, on a grid of step `0.005·c`. Returns `(θ, step)`.
pub fn simplex_grid_maximizer(
    ds: &PreferenceDataset,
    c: f64,
    tau: f64,
    prior: &GammaPrior,
) -> (Vec<f64>, f64) {
    assert_eq!(ds.num_items(), 3);
    let cells = 200;
    let step = c / cells as f64;
    let mut best = (f64::NEG_INFINITY, vec![]);
    for i in 1..cells {
        for j in 1..cells - i {
            let l = cells - i - j;
            let theta = vec![i as f64 * step, j as f64 * step, l as f64 * step];
            let v = oracle_log_posterior(ds, &theta, tau, prior);
            if v > best.0 {
                best = (v, theta);
            }
        }
    }
    (best.1, step)
}

/// Random preferences (uniform orders, not PL) over up to `max_items` items.
pub fn random_dataset(seed: u64, max_items: usize, max_prefs: usize) -> PreferenceDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(2..=max_items);
    let n = rng.random_range(1..=max_prefs);
    let prefs = (0..n)
        .map(|_| {
            let k = rng.random_range(2..=m);
            let mut items: Vec<usize> = (0..m).collect();
            items.shuffle(&mut rng);
            items.truncate(k);
            items
        })
        .collect();
    PreferenceDataset::from_indices(m, prefs).unwrap()
}

pub fn random_scores(rng: &mut impl Rng, m: usize) -> ItemScores {
    ItemScores::new((0..m).map(|_| rng.random_range(0.01..10.0)).collect()).unwrap()
}

/// Value of `key=` in line-oriented output.
pub fn kv<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key}= in output:\n{text}"))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Monte Carlo standard error of the mean of a correlated chain.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(size).map(mean).collect();
    let grand = mean(&means);
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (var / means.len() as f64).sqrt()
}

/// Posterior mean of θ0/(θ0+θ1) for two items where item 0 beat item 1
/// `wins` times, under independent Gamma(shape, rate) priors.
///
/// 2-D midpoint rule over the unnormalised density in coordinates
/// `total = θ0 + θ1`, `share = θ0 / total` (Jacobian `total`), where the
/// integrand is smooth.
pub fn two_item_share_quadrature(wins: i32, shape: f64, rate: f64) -> f64 {
    let upper = 40.0 / rate;
    let n = 2000;
    let hs = upper / n as f64;
    let hr = 1.0 / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let total = (i as f64 + 0.5) * hs;
        for j in 0..n {
            let share = (j as f64 + 0.5) * hr;
            let (a, b) = (total * share, total * (1.0 - share));
            let log_prior = (shape - 1.0) * (a.ln() + b.ln()) - rate * (a + b);
            let w = log_prior.exp() * share.powi(wins) * total;
            num += w * share;
            den += w;
        }
    }
    num / den
}
