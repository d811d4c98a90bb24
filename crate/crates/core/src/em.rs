//! Closed-form EM for the coarsened Plackett-Luce posterior.
//!
//! The coarsened posterior tempers the likelihood by `τ = α / (α + N)`:
//!
//! ```text
//! π(θ) · Π_n P_θ(ρ_n)^τ
//! ```
//!
//! Every normalisation term `η_n^i = θ_{ρ_n^i} + … + θ_{ρ_n^k}` gets an
//! exponential auxiliary variable `ξ_n^i` with `E[ξ_n^i] = 1/η_n^i`, which turns
//! the maximisation step into a ratio of counts under a Gamma(shape, rate)
//! prior per item. After every M-step the scores are rescaled to sum to a
//! calibration constant `C` (the C-step). With `α = ∞` the weight is 1 and
//! this is plain PL-EM.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::error::{Error, Result};
use crate::ranking::{dataset_log_likelihood, ItemScores, PreferenceDataset};

/// Likelihood weight `α / (α + N)`; exactly 1 for `α = ∞`.
pub fn compute_tau(n: usize, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        1.0
    } else {
        alpha / (alpha + n as f64)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive (or inf), got {alpha}"
        )));
    }
    Ok(())
}

/// Independent Gamma(shape, rate) priors on the item scores.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaPrior {
    Uniform { shape: f64, rate: f64 },
    PerItem(Vec<(f64, f64)>),
}

impl Default for GammaPrior {
    fn default() -> Self {
        GammaPrior::Uniform {
            shape: 1.0,
            rate: 2.0,
        }
    }
}

impl GammaPrior {
    /// `(shape, rate)` for item `m`.
    pub fn params(&self, m: usize) -> (f64, f64) {
        match self {
            GammaPrior::Uniform { shape, rate } => (*shape, *rate),
            GammaPrior::PerItem(p) => p[m],
        }
    }

    pub fn validate(&self, num_items: usize) -> Result<()> {
        let check = |m: usize, shape: f64, rate: f64| {
            if !(shape >= 1.0 && shape.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "prior shape must be >= 1, got {shape} for item {m}"
                )));
            }
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "prior rate must be > 0, got {rate} for item {m}"
                )));
            }
            Ok(())
        };
        match self {
            GammaPrior::Uniform { shape, rate } => check(0, *shape, *rate),
            GammaPrior::PerItem(p) => {
                if p.len() != num_items {
                    return Err(Error::InvalidArgument(format!(
                        "prior has {} entries for {num_items} items",
                        p.len()
                    )));
                }
                p.iter()
                    .enumerate()
                    .try_for_each(|(m, &(shape, rate))| check(m, shape, rate))
            }
        }
    }

    /// Σ_m (shape_m − 1)·log θ_m − rate_m·θ_m, dropping θ-free constants.
    pub fn log_density(&self, theta: &ItemScores) -> f64 {
        theta
            .as_slice()
            .iter()
            .enumerate()
            .map(|(m, &t)| {
                let (shape, rate) = self.params(m);
                let log_term = if shape == 1.0 {
                    0.0
                } else {
                    (shape - 1.0) * t.ln()
                };
                log_term - rate * t
            })
            .sum()
    }
}

/// Target sum of the scores after every C-step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    /// `C = N / 2`.
    Auto,
    Fixed(f64),
}

impl Calibration {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Calibration::Auto => n as f64 / 2.0,
            Calibration::Fixed(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarsenConfig {
    /// Robustness rate, in `(0, ∞]`.
    pub alpha: f64,
    pub prior: GammaPrior,
    pub iterations: usize,
    pub calibration: Calibration,
    /// Lower bound applied to every score after the M-step.
    pub score_floor: f64,
    /// Skip the C-step (scores then float freely under the prior).
    pub calibrate: bool,
    /// Stop once the largest relative change of a score drops below this.
    pub early_exit: Option<f64>,
}

impl Default for CoarsenConfig {
    fn default() -> Self {
        CoarsenConfig {
            alpha: f64::INFINITY,
            prior: GammaPrior::default(),
            iterations: 15,
            calibration: Calibration::Auto,
            score_floor: 1e-12,
            calibrate: true,
            early_exit: None,
        }
    }
}

impl CoarsenConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        CoarsenConfig {
            alpha,
            ..Default::default()
        }
    }

    pub fn validate(&self, ds: &PreferenceDataset) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        let c = self.calibration.resolve(ds.len());
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "calibration constant must be positive, got {c}"
            )));
        }
        if !(self.score_floor >= 0.0 && self.score_floor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "score floor must be >= 0, got {}",
                self.score_floor
            )));
        }
        self.prior.validate(ds.num_items())
    }
}

/// `E[ξ_n^i]` for every preference `n` and choice stage `i < k_n − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryExpectations {
    values: Vec<f64>,
    offsets: Vec<usize>,
}

impl AuxiliaryExpectations {
    pub(crate) fn for_dataset(ds: &PreferenceDataset) -> Self {
        let mut offsets = Vec::with_capacity(ds.len() + 1);
        let mut total = 0;
        offsets.push(0);
        for pref in ds.preferences() {
            total += pref.len() - 1;
            offsets.push(total);
        }
        AuxiliaryExpectations {
            values: vec![0.0; total],
            offsets,
        }
    }

    /// Expectations for preference `n`, one per choice stage.
    pub fn preference(&self, n: usize) -> &[f64] {
        &self.values[self.offsets[n]..self.offsets[n + 1]]
    }

    pub(crate) fn preference_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.preference(n)[i]
    }

    pub fn num_preferences(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Writes `1/η_n^i` for every stage into `aux`, reusing its allocation.
pub(crate) fn e_step_into(
    ds: &PreferenceDataset,
    theta: &ItemScores,
    aux: &mut AuxiliaryExpectations,
) -> Result<()> {
    let th = theta.as_slice();
    for (n, pref) in ds.preferences().iter().enumerate() {
        let items = pref.items();
        let k = items.len();
        let out = aux.preference_mut(n);
        let mut suffix = th[items[k - 1]];
        for i in (0..k - 1).rev() {
            suffix += th[items[i]];
            if !(suffix > 0.0) {
                return Err(Error::ZeroSuffix {
                    preference: n,
                    position: i,
                });
            }
            out[i] = 1.0 / suffix;
        }
    }
    Ok(())
}

/// Posterior expectations of the auxiliary variables given `theta`.
pub fn e_step(ds: &PreferenceDataset, theta: &ItemScores) -> Result<AuxiliaryExpectations> {
    if theta.len() != ds.num_items() {
        return Err(Error::InvalidArgument(format!(
            "{} scores for {} items",
            theta.len(),
            ds.num_items()
        )));
    }
    let mut aux = AuxiliaryExpectations::for_dataset(ds);
    e_step_into(ds, theta, &mut aux)?;
    Ok(aux)
}

/// Σ_{n,i} φ_{n,i}^m: how often item `m` is chosen at a non-final stage.
pub(crate) fn choice_counts(ds: &PreferenceDataset) -> Vec<f64> {
    let mut counts = vec![0.0; ds.num_items()];
    for pref in ds.preferences() {
        let items = pref.items();
        for &item in &items[..items.len() - 1] {
            counts[item] += 1.0;
        }
    }
    counts
}

/// Σ_{n,i} ψ_{n,i}^m · w_n^i: for each item, the sum of the per-stage weights
/// over every stage at which it was still available.
///
/// The item at position `j` was available at stages `0..=min(j, k−2)`, so a
/// running prefix sum of the weights gives each item's share in O(k).
pub(crate) fn exposure_sums<'a>(
    ds: &PreferenceDataset,
    weights: impl Fn(usize) -> &'a [f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (n, pref) in ds.preferences().iter().enumerate() {
        let items = pref.items();
        let w = weights(n);
        let mut prefix = 0.0;
        for (j, &item) in items.iter().enumerate() {
            if j < w.len() {
                prefix += w[j];
            }
            out[item] += prefix;
        }
    }
}

fn m_step_with_counts(
    ds: &PreferenceDataset,
    aux: &AuxiliaryExpectations,
    counts: &[f64],
    tau: f64,
    config: &CoarsenConfig,
    exposure: &mut [f64],
) -> Result<ItemScores> {
    exposure_sums(ds, |n| aux.preference(n), exposure);
    let theta = counts
        .iter()
        .zip(exposure.iter())
        .enumerate()
        .map(|(m, (&wins, &exp))| {
            let (shape, rate) = config.prior.params(m);
            let numerator = tau * wins + shape - 1.0;
            let denominator = tau * exp + rate;
            if !(denominator > 0.0) {
                return Err(Error::Internal(format!(
                    "M-step denominator {denominator} for item {m}"
                )));
            }
            Ok((numerator / denominator).max(config.score_floor))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ItemScores::from_raw(theta))
}

/// Closed-form maximiser of the expected complete-data log-posterior,
/// floored at `config.score_floor`.
pub fn m_step(
    ds: &PreferenceDataset,
    aux: &AuxiliaryExpectations,
    tau: f64,
    config: &CoarsenConfig,
) -> Result<ItemScores> {
    if aux.num_preferences() != ds.len()
        || ds
            .preferences()
            .iter()
            .enumerate()
            .any(|(n, p)| aux.preference(n).len() != p.len() - 1)
    {
        return Err(Error::InvalidArgument(
            "auxiliary expectations do not match the dataset".into(),
        ));
    }
    config.prior.validate(ds.num_items())?;
    let counts = choice_counts(ds);
    let mut exposure = vec![0.0; ds.num_items()];
    m_step_with_counts(ds, aux, &counts, tau, config, &mut exposure)
}

/// Rescales `theta` to sum to `c`.
pub fn c_step(theta: &ItemScores, c: f64) -> Result<ItemScores> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "calibration constant must be positive, got {c}"
        )));
    }
    // summed in sorted order so relabelling items cannot change the result
    let mut sorted = theta.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument(
            "cannot calibrate all-zero scores".into(),
        ));
    }
    Ok(ItemScores::from_raw(
        theta.as_slice().iter().map(|&t| c * t / total).collect(),
    ))
}

/// `log π(θ) + τ · Σ_n log P_θ(ρ_n)`, up to an additive constant.
pub fn coarsened_log_posterior(
    ds: &PreferenceDataset,
    theta: &ItemScores,
    tau: f64,
    prior: &GammaPrior,
) -> Result<f64> {
    Ok(prior.log_density(theta) + tau * dataset_log_likelihood(ds, theta)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: ItemScores,
    /// Objective after each M-step, before calibration.
    pub objective_trace: Vec<f64>,
    pub tau_n: f64,
    pub iterations_run: usize,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("at least one iteration")
    }
}

/// Runs the E/M/C loop for the coarsened posterior at `config.alpha`.
pub fn fit(ds: &PreferenceDataset, config: &CoarsenConfig) -> Result<FitResult> {
    config.validate(ds)?;
    let tau = compute_tau(ds.len(), config.alpha);
    fit_with_tau(ds, config, tau)
}

/// Standard PL-EM: the same loop with the likelihood weight fixed at 1,
/// whatever `config.alpha` says.
pub fn pl_em(ds: &PreferenceDataset, config: &CoarsenConfig) -> Result<FitResult> {
    config.validate(ds)?;
    fit_with_tau(ds, config, 1.0)
}

fn fit_with_tau(ds: &PreferenceDataset, config: &CoarsenConfig, tau: f64) -> Result<FitResult> {
    let m = ds.num_items();
    if ds.is_empty() {
        return Err(Error::InvalidArgument("cannot fit an empty dataset".into()));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 items, got {m}"
        )));
    }
    let c = config.calibration.resolve(ds.len());
    let counts = choice_counts(ds);
    let mut exposure = vec![0.0; m];
    let mut aux = AuxiliaryExpectations::for_dataset(ds);
    let mut theta = ItemScores::from_raw(vec![c / m as f64; m]);
    let mut trace = Vec::with_capacity(config.iterations);

    for t in 0..config.iterations {
        let mut step = || -> Result<(ItemScores, f64)> {
            e_step_into(ds, &theta, &mut aux)?;
            let updated = m_step_with_counts(ds, &aux, &counts, tau, config, &mut exposure)?;
            let objective = coarsened_log_posterior(ds, &updated, tau, &config.prior)?;
            Ok((updated, objective))
        };
        let (updated, objective) = step().map_err(|e| e.at_iteration(t + 1))?;
        trace.push(objective);
        let updated = if config.calibrate {
            c_step(&updated, c).map_err(|e| e.at_iteration(t + 1))?
        } else {
            updated
        };
        let converged = config
            .early_exit
            .is_some_and(|tol| max_relative_change(&theta, &updated) < tol);
        theta = updated;
        if converged {
            break;
        }
    }

    Ok(FitResult {
        theta,
        iterations_run: trace.len(),
        objective_trace: trace,
        tau_n: tau,
    })
}

fn max_relative_change(old: &ItemScores, new: &ItemScores) -> f64 {
    old.as_slice()
        .iter()
        .zip(new.as_slice())
        .map(|(&a, &b)| (b - a).abs() / a.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
