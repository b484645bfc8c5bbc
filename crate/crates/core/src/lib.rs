//! Sequential collusion-resistant fingerprinting workbench.
//!
//! The library models the full pipeline of a bias-based fingerprinting
//! scheme: codes are generated from per-segment biases ([`encoder`]), a
//! pirate coalition mixes its rows through a memoryless channel
//! ([`channel`]), the distributor scores every user's symbol against the
//! pirate output ([`scoring`]), and cumulative scores drive a sequential
//! accusation engine with Wald or score-threshold boundaries
//! ([`accusation`]). Closed-form performance predictions live in
//! [`analysis`], and [`sim`] runs Monte Carlo experiments that tie the
//! pieces together.
//!
//! All randomness flows through [`seeding`]: a master seed plus a tag path
//! yields an independent ChaCha stream per purpose, so experiments are
//! reproducible bit for bit, including under parallel execution.

#![forbid(unsafe_code)]

pub mod accusation;
pub mod analysis;
pub mod channel;
pub mod encoder;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod scoring;
pub mod seeding;
pub mod sim;

pub use channel::{AttackKind, CollusionChannel, DelaySpec};
pub use encoder::BiasDistribution;
pub use error::{Error, Result};
pub use model::{BiasVector, CodeMatrix, CoalitionSpec, Score, UserStatus};
pub use sim::{AggregateStats, DecoderSpec, ExperimentConfig, PresetName, TrialResult};
