//! Synthetic preference data drawn from a known Plackett-Luce model, plus
//! noise injection that replaces a fixed fraction of preferences by random
//! ones.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::ranking::{
    sample_preference, scores_to_ranking, ItemIds, ItemScores, Preference, PreferenceDataset,
    Ranking,
};

/// Stream offset separating noise draws from clean-data draws for one seed.
const NOISE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreferenceLength {
    Fixed(usize),
    /// Uniform on `lo..=hi`.
    Range(usize, usize),
}

impl PreferenceLength {
    fn bounds(self) -> (usize, usize) {
        match self {
            PreferenceLength::Fixed(k) => (k, k),
            PreferenceLength::Range(lo, hi) => (lo, hi),
        }
    }
}

/// What a replaced preference looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReplacementMode {
    /// Same items, uniformly random order.
    #[default]
    Reorder,
    /// A fresh uniformly random subset of the same length, in random order.
    FreshSubset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub items: usize,
    pub preferences: usize,
    pub length: PreferenceLength,
    /// Ground-truth scores; drawn from Gamma(2, 1) per item when absent.
    pub theta_truth: Option<ItemScores>,
    pub noise_fraction: f64,
    pub replacement: ReplacementMode,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(items: usize, preferences: usize, k: usize, seed: u64) -> Self {
        SynthSpec {
            items,
            preferences,
            length: PreferenceLength::Fixed(k),
            theta_truth: None,
            noise_fraction: 0.0,
            replacement: ReplacementMode::Reorder,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.length.bounds();
        if lo < 2 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "preference length range {lo}..={hi} is invalid (need 2 <= lo <= hi)"
            )));
        }
        if hi > self.items {
            return Err(Error::InvalidArgument(format!(
                "preference length {hi} exceeds item count {}",
                self.items
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_fraction) {
            return Err(Error::InvalidArgument(format!(
                "noise fraction must be in [0, 1], got {}",
                self.noise_fraction
            )));
        }
        if let Some(theta) = &self.theta_truth {
            if theta.len() != self.items {
                return Err(Error::InvalidArgument(format!(
                    "{} ground-truth scores for {} items",
                    theta.len(),
                    self.items
                )));
            }
            if theta.as_slice().iter().any(|&t| t <= 0.0) {
                return Err(Error::InvalidArgument(
                    "ground-truth scores must be strictly positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: PreferenceDataset,
    pub ground_truth: Ranking,
    pub theta_truth: ItemScores,
    /// Indices of the preferences that were replaced by noise.
    pub replaced: Vec<usize>,
}

/// Draws a dataset from the spec's ground truth, then corrupts
/// `round(noise_fraction · N)` preferences.
///
/// The clean preferences depend only on `seed`, so datasets generated with
/// the same seed and different noise levels differ exactly at the replaced
/// positions.
pub fn generate(spec: &SynthSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let theta_truth = match &spec.theta_truth {
        Some(t) => t.clone(),
        None => {
            let law = Gamma::<f64>::new(2.0, 1.0).expect("valid gamma parameters");
            let draws = (0..spec.items)
                .map(|_| law.sample(&mut rng).max(f64::MIN_POSITIVE))
                .collect();
            ItemScores::new(draws)?
        }
    };

    let (lo, hi) = spec.length.bounds();
    let mut prefs = Vec::with_capacity(spec.preferences);
    for _ in 0..spec.preferences {
        let k = rng.random_range(lo..=hi);
        let subset = index::sample(&mut rng, spec.items, k).into_vec();
        prefs.push(sample_preference(&theta_truth, &subset, k, &mut rng)?);
    }
    let clean = PreferenceDataset::new(ItemIds::numbered(spec.items), prefs)?;
    let (dataset, replaced) = inject_noise_tracked(
        &clean,
        spec.noise_fraction,
        spec.seed ^ NOISE_STREAM,
        spec.replacement,
    )?;

    Ok(SyntheticData {
        dataset,
        ground_truth: scores_to_ranking(&theta_truth),
        theta_truth,
        replaced,
    })
}

/// Replaces `round(fraction · N)` uniformly chosen preferences with random
/// orderings of the same items.
pub fn inject_noise(ds: &PreferenceDataset, fraction: f64, seed: u64) -> Result<PreferenceDataset> {
    inject_noise_tracked(ds, fraction, seed, ReplacementMode::Reorder).map(|(ds, _)| ds)
}

/// Like [`inject_noise`], also returning the replaced indices in ascending
/// order.
pub fn inject_noise_tracked(
    ds: &PreferenceDataset,
    fraction: f64,
    seed: u64,
    mode: ReplacementMode,
) -> Result<(PreferenceDataset, Vec<usize>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "noise fraction must be in [0, 1], got {fraction}"
        )));
    }
    let n = ds.len();
    let count = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut replaced = index::sample(&mut rng, n, count).into_vec();
    replaced.sort_unstable();

    let mut prefs = ds.preferences().to_vec();
    for &i in &replaced {
        let k = prefs[i].len();
        let mut items = match mode {
            ReplacementMode::Reorder => prefs[i].items().to_vec(),
            ReplacementMode::FreshSubset => index::sample(&mut rng, ds.num_items(), k).into_vec(),
        };
        items.shuffle(&mut rng);
        prefs[i] = Preference::new(items)?;
    }
    Ok((ds.with_preferences(prefs)?, replaced))
}
