//! Robust rank aggregation with a coarsened Plackett-Luce posterior.
//!
//! Noisy or misspecified preference data is handled by tempering the
//! Plackett-Luce likelihood with a weight `τ = α / (α + N)` derived from an
//! exponential prior (rate `α`) on the divergence between the observed data
//! and data the model could have produced. `α = ∞` recovers the standard
//! posterior.
//!
//! * [`ranking`]: preference data, the PL model, Kendall's τ.
//! * [`em`]: closed-form EM (E-step, M-step, calibration) for the posterior mode.
//! * [`gibbs`]: Gibbs sampler and the DIC curve used to pick `α`.
//! * [`synth`]: synthetic data with order-randomising noise.
//! * [`io`]: text formats.
//! * [`cli`]: the `coarsenrank` command.

pub mod cli;
pub mod em;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod ranking;
pub mod synth;

pub use em::{
    c_step, compute_tau, e_step, fit, m_step, pl_em, AuxiliaryExpectations, Calibration,
    CoarsenConfig, FitResult, GammaPrior,
};
pub use error::{Error, Result};
pub use gibbs::{
    diagnose, dic, dic_from_samples, gibbs_run, ConditionalMode, Diagnosis, DicPoint, GibbsConfig,
    PosteriorSamples,
};
pub use io::ParseError;
pub use ranking::{
    dataset_log_likelihood, kendall_tau, pl_log_probability, sample_preference, scores_to_ranking,
    ItemIds, ItemScores, Preference, PreferenceDataset, Ranking,
};
pub use synth::{generate, inject_noise, SynthSpec, SyntheticData};
