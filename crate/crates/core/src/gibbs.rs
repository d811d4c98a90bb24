//! Gibbs sampling of the coarsened posterior and the DIC diagnostic for α.
//!
//! One sweep draws every auxiliary variable `ξ_n^i ~ Gamma(1, η_n^i)` and then
//! every score from its Gamma full conditional given the fresh `ξ` draws:
//!
//! ```text
//! θ_m ~ Gamma(shape_m, τ · Σ_{n,i} ψ_{n,i}^m ξ_n^i + β_m)
//! ```
//!
//! The conjugate shape is `α_m + τ · Σ φ_{n,i}^m`. [`ConditionalMode::Shifted`]
//! uses the M-step numerator `τ · Σ φ + α_m − 1` instead, floored at `1e-6`
//! so that items that are never chosen still get a valid distribution.
//!
//! DIC for a given α is `g − f`, where `f` is the posterior mean of the
//! dataset log-likelihood and `g = log P_{E[θ]}(data) − f`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::em::{check_alpha, choice_counts, compute_tau, exposure_sums, GammaPrior};
use crate::error::{Error, Result};
use crate::ranking::{dataset_log_likelihood, ItemScores, PreferenceDataset};

const SHIFTED_SHAPE_FLOOR: f64 = 1e-6;

/// How the shape of the score conditionals is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConditionalMode {
    /// `τ · Σφ + α_m − 1`, floored at `1e-6`.
    Shifted,
    /// `α_m + τ · Σφ`.
    #[default]
    Conjugate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GibbsConfig {
    /// Retained sweeps.
    pub samples: usize,
    /// Discarded sweeps before the first retained one.
    pub burn_in: usize,
    pub seed: u64,
    pub mode: ConditionalMode,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            samples: 50,
            burn_in: 50,
            seed: 0,
            mode: ConditionalMode::Conjugate,
        }
    }
}

/// Retained score draws, `S` rows of `M` positive values.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    draws: Vec<f64>,
    num_items: usize,
    seed: u64,
}

impl PosteriorSamples {
    pub fn num_samples(&self) -> usize {
        self.draws.len() / self.num_items
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.draws[s * self.num_items..(s + 1) * self.num_items]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.num_items)
    }

    /// Per-item sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.num_items];
        for row in self.rows() {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let s = self.num_samples() as f64;
        mean.iter_mut().for_each(|v| *v /= s);
        mean
    }
}

/// One draw of `ξ ~ Gamma(1, rate)`.
pub fn sample_auxiliary<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

/// Runs the sampler and returns the `gc.samples` post-burn-in draws.
pub fn gibbs_run(
    ds: &PreferenceDataset,
    alpha: f64,
    prior: &GammaPrior,
    gc: &GibbsConfig,
) -> Result<PosteriorSamples> {
    check_alpha(alpha)?;
    let m = ds.num_items();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 items, got {m}"
        )));
    }
    if ds.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot sample for an empty dataset".into(),
        ));
    }
    if gc.samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    prior.validate(m)?;

    let tau = compute_tau(ds.len(), alpha);
    let counts = choice_counts(ds);
    let mut rng = ChaCha8Rng::seed_from_u64(gc.seed);
    let mut theta = vec![1.0; m];
    let mut xi: Vec<Vec<f64>> = ds
        .preferences()
        .iter()
        .map(|p| vec![0.0; p.len() - 1])
        .collect();
    let mut exposure = vec![0.0; m];
    let mut draws = Vec::with_capacity(gc.samples * m);

    for sweep in 0..gc.burn_in + gc.samples {
        for (pref, xi_n) in ds.preferences().iter().zip(xi.iter_mut()) {
            let items = pref.items();
            let k = items.len();
            let mut suffix = theta[items[k - 1]];
            for i in (0..k - 1).rev() {
                suffix += theta[items[i]];
                xi_n[i] = sample_auxiliary(suffix, &mut rng);
            }
        }
        exposure_sums(ds, |n| &xi[n], &mut exposure);

        for (item, t) in theta.iter_mut().enumerate() {
            let (prior_shape, prior_rate) = prior.params(item);
            let shape = match gc.mode {
                ConditionalMode::Conjugate => prior_shape + tau * counts[item],
                ConditionalMode::Shifted => {
                    (tau * counts[item] + prior_shape - 1.0).max(SHIFTED_SHAPE_FLOOR)
                }
            };
            let rate = tau * exposure[item] + prior_rate;
            let invalid = || Error::InvalidGamma { sweep, shape, rate };
            if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
                return Err(invalid());
            }
            let dist = Gamma::new(shape, 1.0 / rate).map_err(|_| invalid())?;
            // tiny shapes can underflow to exactly zero
            *t = dist.sample(&mut rng).max(f64::MIN_POSITIVE);
        }

        if sweep >= gc.burn_in {
            draws.extend_from_slice(&theta);
        }
    }

    Ok(PosteriorSamples {
        draws,
        num_items: m,
        seed: gc.seed,
    })
}

/// A point on the DIC diagnostic curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DicPoint {
    pub alpha: f64,
    /// Posterior expected log-likelihood.
    pub f: f64,
    /// Effective complexity, `log P_{E[θ]} − f`.
    pub g: f64,
    /// `g − f`
    pub dic: f64,
}

/// DIC computed from an existing set of posterior draws.
pub fn dic_from_samples(
    ds: &PreferenceDataset,
    alpha: f64,
    samples: &PosteriorSamples,
) -> Result<DicPoint> {
    if samples.num_items() != ds.num_items() {
        return Err(Error::InvalidArgument(format!(
            "samples cover {} items, dataset has {}",
            samples.num_items(),
            ds.num_items()
        )));
    }
    let mut total = 0.0;
    for (s, row) in samples.rows().enumerate() {
        let theta = ItemScores::new(row.to_vec())
            .map_err(|_| Error::NonFiniteLogLikelihood { sample: s })?;
        let ll = dataset_log_likelihood(ds, &theta)
            .map_err(|_| Error::NonFiniteLogLikelihood { sample: s })?;
        if !ll.is_finite() {
            return Err(Error::NonFiniteLogLikelihood { sample: s });
        }
        total += ll;
    }
    let f = total / samples.num_samples() as f64;
    let mean = ItemScores::new(samples.mean())?;
    let at_mean = dataset_log_likelihood(ds, &mean)?;
    if !at_mean.is_finite() {
        return Err(Error::Internal(
            "log-likelihood at the posterior mean is not finite".into(),
        ));
    }
    let g = at_mean - f;
    Ok(DicPoint {
        alpha,
        f,
        g,
        dic: g - f,
    })
}

pub fn dic(
    ds: &PreferenceDataset,
    alpha: f64,
    prior: &GammaPrior,
    gc: &GibbsConfig,
) -> Result<DicPoint> {
    let samples = gibbs_run(ds, alpha, prior, gc)?;
    dic_from_samples(ds, alpha, &samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub curve: Vec<DicPoint>,
    /// Grid value with the lowest DIC; ties go to the smaller α.
    pub selected_alpha: f64,
}

/// Seed of the chain for grid point `index`.
pub fn grid_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// DIC over an ascending α grid, one independent chain per grid point.
///
/// Chains run on scoped threads; each has its own seed so the curve does
/// not depend on scheduling.
pub fn diagnose(
    ds: &PreferenceDataset,
    alpha_grid: &[f64],
    prior: &GammaPrior,
    gc: &GibbsConfig,
) -> Result<Diagnosis> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidArgument("alpha grid is empty".into()));
    }
    for &a in alpha_grid {
        check_alpha(a)?;
    }
    if alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "alpha grid must be strictly ascending".into(),
        ));
    }

    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut curve = Vec::with_capacity(alpha_grid.len());
    for (chunk_idx, chunk) in alpha_grid.chunks(workers).enumerate() {
        let results: Vec<Result<DicPoint>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(j, &alpha)| {
                    let index = chunk_idx * workers + j;
                    let chain = GibbsConfig {
                        seed: grid_seed(gc.seed, index),
                        ..gc.clone()
                    };
                    scope
                        .spawn(move || dic(ds, alpha, prior, &chain).map_err(|e| e.at_alpha(alpha)))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("DIC worker panicked"))
                .collect()
        });
        for r in results {
            curve.push(r?);
        }
    }

    let mut best = 0;
    for (i, p) in curve.iter().enumerate() {
        if p.dic < curve[best].dic {
            best = i;
        }
    }
    Ok(Diagnosis {
        selected_alpha: curve[best].alpha,
        curve,
    })
}
