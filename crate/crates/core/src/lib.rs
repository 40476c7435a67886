//! Bayesian estimation of multi-exponential decay parameters.
//!
//! Signals of the form `G(t) = sum_n A_n * e^(-E_n t)` — correlator output
//! from lattice Monte Carlo codes, relaxation and tracer-decay series, and
//! similar — hide infinitely many (amplitude, rate) pairs behind a handful of
//! noisy observations. Reparameterizing the rates by a latent common spacing
//! (`E_n = E1 + (n-1)c`) makes the system telescope: at a late enough time
//! only the leading mode survives, a bit earlier only two modes, and so on.
//! This crate fits the telescoped system with a three-phase particle MCMC:
//!
//! 1. a Metropolis-within-Gibbs chain for (A1, E1) against the latest
//!    observation,
//! 2. a chain for (A1, E1, A2, c) against the next observation, proposing
//!    (A1, E1) as resampled particles of the phase-1 cloud,
//! 3. many short repetitions of both phases, whose final states form the
//!    posterior sample.
//!
//! Spacing proposals below the starting floor c0 are discarded to keep the
//! chosen truncation times valid, and higher modes are recovered by
//! sequentially subtracting fitted modes from the data ([`peeling`]).
//!
//! Everything is seeded and bit-reproducible: the same seed, configuration
//! and data produce identical results, serially or in parallel.

pub mod dataio;
pub mod diagnostics;
pub mod error;
pub mod likelihood;
mod math;
pub mod model;
pub mod peeling;
pub mod priors;
pub mod rng;
pub mod sampler;

pub use dataio::{
    load_dataset, load_report, parse_dataset, parse_report, render_dataset, render_report,
    save_report, simulate_dataset, write_dataset, CorrelatorDataset, REPORT_FORMAT_VERSION,
};
pub use diagnostics::{
    sensitivity_sweep, summarize, write_histogram, ParamSummaries, PosteriorSummary, SweepCell,
    SweepTable,
};
pub use error::{Error, Result};
pub use likelihood::{
    factorization_constant, log_lik_conditional, log_lik_joint, log_lik_marginal, ObservationPair,
};
pub use model::{CorrelatorPoint, ExpSumParams, ScheduleRule, TelescopeSchedule};
pub use peeling::{
    peel_sequence, subtract_mode, PeelChain, PeelLevel, PeelOptions, PeelOutcome, PointEstimate,
};
pub use priors::{EnergyPrior, PriorSpec};
pub use sampler::{
    enforce_spacing_floor, mh_step, phase1, phase2, phase3, phase3_seeded, Coord, CoordKind,
    DiscardStats, FitReport, McmcConfig, ParticleCloud, Phase, Phase2Output, ProposalScales,
    SpacingDecision,
};
