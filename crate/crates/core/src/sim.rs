//! Monte Carlo harness: repeated pirate-decoding trials under a fixed
//! experiment configuration, with deterministic per-trial seeding.
//!
//! A trial plays the full loop: draw a bias per segment, draw every live
//! user's symbol, form the pirate output from the contributing coalition,
//! score all still-undecided users, and feed the scores to the accusation
//! engine. Symbols are drawn lazily, one per user per segment, from the
//! same per-user streams that [`crate::encoder::generate_code`] reads, so
//! the lazily played code equals the up-front matrix bit for bit. A user's
//! stream is only dropped once nothing can ever read it again (decided,
//! and either innocent or permanently disconnected), which keeps the
//! draw-per-segment alignment intact for everyone else.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accusation::{
    tardos_boundary, truncation_only_boundary, wald_thresholds, AccusationEngine, DecisionEvent,
    DecisionKind, EngineConfig, SchemeKind, ThresholdVariant,
};
use crate::analysis::interleaving_drift_integrals;
use crate::channel::{pirate_output, AttackKind, CollusionChannel, DelaySpec};
use crate::encoder::{self, BiasDistribution};
use crate::error::{Error, Result};
use crate::model::{OvershootStats, Score, UserStatus};
use crate::scoring::ScoreFunction;
use crate::seeding::{self, tags};

/// Which score function the tracker runs, named independently of the attack
/// so matched and mismatched pairings are both expressible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderSpec {
    /// Bias-weighted match/mismatch score.
    Symmetric,
    /// Log-likelihood score tuned to the interleaving attack.
    InterleavingLl,
    /// Log-likelihood score tuned to the all-one attack.
    AllOne,
    /// Log-likelihood ratio built from an explicit channel model.
    GenericNp,
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Symmetric => "symmetric",
            DecoderSpec::InterleavingLl => "interleaving_ll",
            DecoderSpec::AllOne => "all_one",
            DecoderSpec::GenericNp => "generic_np",
        }
    }

    /// Instantiate the score function for a tracker that assumes coalition
    /// size `c0`. The generic decoder models `attack` at that size; the
    /// tracker keeps this instance even if the real coalition shrinks.
    pub fn build(&self, attack: AttackKind, c0: usize) -> Result<ScoreFunction> {
        let f = match self {
            DecoderSpec::Symmetric => ScoreFunction::Symmetric,
            DecoderSpec::InterleavingLl => ScoreFunction::InterleavingLl { c0 },
            DecoderSpec::AllOne => ScoreFunction::AllOne { c0 },
            DecoderSpec::GenericNp => ScoreFunction::GenericNp {
                channel: CollusionChannel::make_attack(attack, c0)?,
            },
        };
        f.validate()?;
        Ok(f)
    }
}

impl FromStr for DecoderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(DecoderSpec::Symmetric),
            "interleaving_ll" => Ok(DecoderSpec::InterleavingLl),
            "all_one" => Ok(DecoderSpec::AllOne),
            "generic_np" => Ok(DecoderSpec::GenericNp),
            other => Err(Error::InvalidConfig(format!("unknown decoder: {other}"))),
        }
    }
}

fn default_true() -> bool {
    true
}

/// Full description of one experiment: population, attack, decoder,
/// accusation scheme, bias distribution, and run bookkeeping.
///
/// `eps1`/`eps2` record the error targets the boundary was built for;
/// `scheme` carries the boundary itself. `delay_b` duplicates
/// `scheme.delay.b` at the top level for visibility and must agree with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Total users.
    pub n: usize,
    /// Real coalition size; colluders are users 1..=c.
    pub c: usize,
    /// Coalition size the decoder is built for.
    pub c0: usize,
    /// False-accusation target the boundary encodes.
    pub eps1: f64,
    /// Missed-detection target the boundary encodes (0 for one-sided).
    pub eps2: f64,
    /// When true, `eps1`/`eps2` are already per-user values rather than
    /// global budgets.
    #[serde(default)]
    pub epsilons_are_per_user: bool,
    pub attack: AttackKind,
    pub decoder: DecoderSpec,
    pub scheme: EngineConfig,
    pub bias: BiasDistribution,
    pub trials: u64,
    pub master_seed: u64,
    /// Hard cap on segments per trial; hitting it is reported, not hidden.
    pub max_segments: u64,
    /// Disconnection delay, mirrored from `scheme.delay.b`.
    pub delay_b: u64,
    /// When true an accused colluder stops contributing once the delay
    /// window closes and the trial ends as soon as every colluder is
    /// accused. When false the coalition never shrinks and every user's
    /// test runs to its own decision.
    #[serde(default = "default_true")]
    pub disconnect_on_accuse: bool,
    /// Optional first-active segment per colluder (1-based, length c).
    /// Colluders are scored from segment 1 regardless; activation only
    /// gates contribution to the pirate output.
    #[serde(default)]
    pub activation_schedule: Option<Vec<u64>>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::CoalitionSizeInvalid { c: self.c, c0: self.c0 });
        }
        if self.c > self.c0 || self.c0 > self.n {
            return Err(Error::InvalidConfig(format!(
                "need c <= c0 <= n, got c = {}, c0 = {}, n = {}",
                self.c, self.c0, self.n
            )));
        }
        if !(self.eps1 > 0.0 && self.eps1 < 1.0) {
            return Err(Error::EpsilonOutOfRange {
                name: "eps1",
                value: self.eps1,
                range: "(0, 1)",
            });
        }
        if !(0.0..1.0).contains(&self.eps2) {
            return Err(Error::EpsilonOutOfRange {
                name: "eps2",
                value: self.eps2,
                range: "[0, 1)",
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.max_segments == 0 {
            return Err(Error::InvalidConfig("max_segments must be at least 1".into()));
        }
        if self.delay_b != self.scheme.delay.b {
            return Err(Error::InvalidConfig(format!(
                "delay_b = {} disagrees with scheme.delay.b = {}",
                self.delay_b, self.scheme.delay.b
            )));
        }
        self.scheme.validate()?;
        self.bias.validate()?;
        self.decoder.build(self.attack, self.c0)?;
        if let Some(schedule) = &self.activation_schedule {
            if schedule.len() != self.c {
                return Err(Error::InvalidConfig(format!(
                    "activation schedule has {} entries for {} colluders",
                    schedule.len(),
                    self.c
                )));
            }
            if schedule.iter().copied().min() != Some(1) {
                return Err(Error::InvalidConfig(
                    "activation schedule must start at least one colluder at segment 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Segment at which the last colluder was accused, when all were.
    pub catch_all_time: Option<u64>,
    /// Accusation segment per colluder (index j holds user j + 1).
    pub per_colluder_catch_times: Vec<Option<u64>>,
    /// Innocent users accused.
    pub false_positive_count: usize,
    /// Colluders whose test finished without an accusation.
    pub false_negative_count: usize,
    /// Boundary-crossing overshoots observed in this trial.
    pub overshoots: OvershootStats,
    /// Segments actually played before the trial stopped.
    pub segments_generated: u64,
}

/// Optional per-trial instrumentation.
#[derive(Debug, Clone, Default)]
pub struct TrialOptions {
    /// Record the pirate output sequence.
    pub record_pirate_stream: bool,
    /// Swap one user's symbol stream for a fresh one mid-trial.
    pub reseed: Option<ReseedSpec>,
}

/// Replace `user`'s symbol stream at the start of `from_segment` with the
/// stream derived from the reseed tag and `salt`. The user keeps drawing
/// from the new stream for the rest of the trial even if they would
/// otherwise have been dropped, which is what makes the disconnection
/// independence check sharp: a disconnected colluder's fresh symbols must
/// leave the pirate stream untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReseedSpec {
    /// 1-based user index.
    pub user: usize,
    pub from_segment: u64,
    pub salt: u64,
}

/// Trial outcome plus the instrumentation requested via [`TrialOptions`].
#[derive(Debug, Clone)]
pub struct InstrumentedTrial {
    pub result: TrialResult,
    /// Every decision event in segment order.
    pub events: Vec<DecisionEvent>,
    /// Pirate output per played segment, when recorded.
    pub pirate_stream: Option<Vec<u8>>,
}

/// Aggregate statistics over a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub trials: u64,
    /// Mean/median/90th percentile of catch-all time over trials that
    /// caught every colluder; absent when no trial did.
    pub catch_all_mean: Option<f64>,
    pub catch_all_median: Option<f64>,
    pub catch_all_p90: Option<f64>,
    pub trials_without_catch_all: u64,
    /// Fraction of trials accusing at least one innocent user.
    pub fp_trial_rate: f64,
    /// Innocent accusations per innocent user per trial.
    pub per_user_fp_rate: f64,
    /// Fraction of trials with at least one missed colluder.
    pub fn_trial_rate: f64,
    /// Fraction of colluder tests that ended without an accusation.
    pub per_user_fn_rate: f64,
    /// Mean boundary-crossing overshoot across all trials.
    pub mean_overshoot: f64,
}

fn sorted_stats(values: &mut Vec<f64>) -> (f64, f64, f64) {
    values.sort_by(|a, b| a.partial_cmp(b).expect("catch times are finite"));
    let k = values.len();
    let mean = values.iter().sum::<f64>() / k as f64;
    let median = if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    };
    let p90_idx = ((k as f64 * 0.9).ceil() as usize).max(1) - 1;
    (mean, median, values[p90_idx])
}

/// Fold trial results into [`AggregateStats`]. Serial and deterministic in
/// the order of `results`, so parallel and serial experiment runs aggregate
/// identically.
pub fn aggregate_stats(config: &ExperimentConfig, results: &[TrialResult]) -> AggregateStats {
    let trials = results.len() as u64;
    let mut catch_times: Vec<f64> =
        results.iter().filter_map(|r| r.catch_all_time).map(|t| t as f64).collect();
    let (catch_all_mean, catch_all_median, catch_all_p90) = if catch_times.is_empty() {
        (None, None, None)
    } else {
        let (m, md, p) = sorted_stats(&mut catch_times);
        (Some(m), Some(md), Some(p))
    };
    let fp_trials = results.iter().filter(|r| r.false_positive_count > 0).count();
    let fn_trials = results.iter().filter(|r| r.false_negative_count > 0).count();
    let total_fp: usize = results.iter().map(|r| r.false_positive_count).sum();
    let total_fn: usize = results.iter().map(|r| r.false_negative_count).sum();
    let innocents = (config.n - config.c) as f64;
    let mut overshoots = OvershootStats::new();
    for r in results {
        overshoots.merge(&r.overshoots);
    }
    AggregateStats {
        trials,
        catch_all_mean,
        catch_all_median,
        catch_all_p90,
        trials_without_catch_all: trials - catch_times.len() as u64,
        fp_trial_rate: fp_trials as f64 / trials as f64,
        per_user_fp_rate: if innocents > 0.0 {
            total_fp as f64 / (trials as f64 * innocents)
        } else {
            0.0
        },
        fn_trial_rate: fn_trials as f64 / trials as f64,
        per_user_fn_rate: total_fn as f64 / (trials as f64 * config.c as f64),
        mean_overshoot: overshoots.mean(),
    }
}

struct TrialRun<'a> {
    config: &'a ExperimentConfig,
    engine: AccusationEngine,
    score_fn: ScoreFunction,
    bias_rng: ChaCha8Rng,
    channel_rng: ChaCha8Rng,
    user_rngs: Vec<Option<ChaCha8Rng>>,
    channels: HashMap<usize, CollusionChannel>,
    activation: Vec<u64>,
    trial_master: u64,
    force_tracked: Option<usize>,
}

impl<'a> TrialRun<'a> {
    fn new(config: &'a ExperimentConfig, trial_index: u64) -> Result<Self> {
        let trial_master = seeding::derive_sub_seed(config.master_seed, &[tags::TRIAL, trial_index]);
        let user_rngs = (1..=config.n)
            .map(|user| Some(encoder::user_symbol_stream(trial_master, user)))
            .collect();
        Ok(TrialRun {
            engine: AccusationEngine::new(config.scheme.clone(), config.n)?,
            score_fn: config.decoder.build(config.attack, config.c0)?,
            bias_rng: encoder::bias_stream(trial_master),
            channel_rng: seeding::stream(trial_master, &[tags::CHANNEL]),
            user_rngs,
            channels: HashMap::new(),
            activation: match &config.activation_schedule {
                Some(s) => s.clone(),
                None => vec![1; config.c],
            },
            trial_master,
            config,
            force_tracked: None,
        })
    }

    /// True while colluder `j` (0-based) feeds the pirate at segment `i`.
    fn contributing(&self, j: usize, i: u64) -> bool {
        if j >= self.config.c || self.activation[j] > i {
            return false;
        }
        if !self.config.disconnect_on_accuse {
            return true;
        }
        match self.engine.states()[j].disconnect_pending_until() {
            Some(until) => i <= until,
            None => !matches!(self.engine.states()[j].status(), UserStatus::Accused { .. }),
        }
    }

    /// Drop streams nobody can read after segment `i`. A colluder who was
    /// acquitted or cleared keeps contributing, so their stream stays live.
    fn drop_dead_streams(&mut self, i: u64) {
        for j in 0..self.config.n {
            if self.user_rngs[j].is_none() || self.force_tracked == Some(j) {
                continue;
            }
            let state = &self.engine.states()[j];
            if state.is_active() {
                continue;
            }
            let contributes_later = j < self.config.c
                && match state.status() {
                    UserStatus::Accused { .. } => {
                        !self.config.disconnect_on_accuse
                            || self.engine.states()[j]
                                .disconnect_pending_until()
                                .is_some_and(|until| i < until)
                    }
                    _ => true,
                };
            if !contributes_later {
                self.user_rngs[j] = None;
            }
        }
    }

}

fn run_trial_inner(
    config: &ExperimentConfig,
    trial_index: u64,
    options: &TrialOptions,
) -> Result<InstrumentedTrial> {
    config.validate()?;
    if let Some(reseed) = &options.reseed {
        if reseed.user == 0 || reseed.user > config.n {
            return Err(Error::InvalidConfig(format!(
                "reseed user {} is outside 1..={}",
                reseed.user, config.n
            )));
        }
    }
    let mut run = TrialRun::new(config, trial_index)?;
    let mut catch_times: Vec<Option<u64>> = vec![None; config.c];
    let mut false_positive_count = 0usize;
    let mut overshoots = OvershootStats::new();
    let mut all_events = Vec::new();
    let mut pirate_stream = options.record_pirate_stream.then(Vec::new);
    let mut segments_generated = 0;

    let mut bits = vec![0u8; config.n];
    let mut colluder_bits = Vec::with_capacity(config.c);
    let mut scores = vec![Score::Finite(0.0); config.n];

    for i in 1..=config.max_segments {
        segments_generated = i;
        if let Some(reseed) = &options.reseed {
            if reseed.from_segment == i {
                let stream =
                    seeding::stream(run.trial_master, &[tags::RESEED, reseed.user as u64, reseed.salt]);
                run.user_rngs[reseed.user - 1] = Some(stream);
                run.force_tracked = Some(reseed.user - 1);
            }
        }
        let p = encoder::draw(&config.bias, &mut run.bias_rng);
        for (j, rng) in run.user_rngs.iter_mut().enumerate() {
            if let Some(rng) = rng {
                bits[j] = u8::from(rand::Rng::random::<f64>(rng) < p);
            }
        }
        colluder_bits.clear();
        for j in 0..config.c {
            if run.contributing(j, i) {
                colluder_bits.push(bits[j]);
            }
        }
        let size = colluder_bits.len();
        if !run.channels.contains_key(&size) {
            run.channels.insert(size, CollusionChannel::make_attack(config.attack, size)?);
        }
        let y = pirate_output(&run.channels[&size], &colluder_bits, &mut run.channel_rng)?;
        if let Some(stream) = &mut pirate_stream {
            stream.push(y);
        }
        let g0 = run.score_fn.evaluate(0, y, p)?;
        let g1 = run.score_fn.evaluate(1, y, p)?;
        for j in 0..config.n {
            if run.engine.states()[j].is_active() {
                scores[j] = if bits[j] == 1 { g1 } else { g0 };
            } else {
                scores[j] = Score::Finite(0.0);
            }
        }
        let events = run.engine.step(&scores, i)?;
        for event in &events {
            match event.kind {
                DecisionKind::Accused | DecisionKind::Acquitted => {
                    overshoots.record(event.overshoot)?;
                }
                _ => {}
            }
            if event.kind.is_accusation() {
                if event.user <= config.c {
                    catch_times[event.user - 1] = Some(i);
                } else {
                    false_positive_count += 1;
                }
            }
        }
        all_events.extend(events);
        run.drop_dead_streams(i);
        if run.engine.is_finished() {
            break;
        }
        if config.disconnect_on_accuse && catch_times.iter().all(|t| t.is_some()) {
            break;
        }
    }

    let false_negative_count = (0..config.c)
        .filter(|&j| {
            matches!(
                run.engine.states()[j].status(),
                UserStatus::Acquitted { .. } | UserStatus::CertainlyInnocent { .. }
            )
        })
        .count();
    let catch_all_time = if catch_times.iter().all(|t| t.is_some()) {
        catch_times.iter().map(|t| t.expect("checked")).max()
    } else {
        None
    };
    Ok(InstrumentedTrial {
        result: TrialResult {
            catch_all_time,
            per_colluder_catch_times: catch_times,
            false_positive_count,
            false_negative_count,
            overshoots,
            segments_generated,
        },
        events: all_events,
        pirate_stream,
    })
}

/// Play trial `trial_index` of the experiment. Deterministic per
/// (master_seed, trial_index): trials can run in any order or in parallel
/// and reproduce exactly.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialResult> {
    Ok(run_trial_inner(config, trial_index, &TrialOptions::default())?.result)
}

/// [`run_trial`] with instrumentation; used by the export path and by the
/// disconnection independence check.
pub fn run_trial_instrumented(
    config: &ExperimentConfig,
    trial_index: u64,
    options: &TrialOptions,
) -> Result<InstrumentedTrial> {
    run_trial_inner(config, trial_index, options)
}

/// Run every trial and aggregate. `parallelism` 1 runs serially on the
/// calling thread; 0 uses the default thread pool; anything else builds a
/// pool of that size. Results are collected in trial order and folded
/// serially, so the aggregate is bit-identical across all three modes.
pub fn run_experiment(
    config: &ExperimentConfig,
    parallelism: usize,
) -> Result<(AggregateStats, Vec<TrialResult>)> {
    config.validate()?;
    let results: Vec<TrialResult> = if parallelism == 1 {
        (0..config.trials)
            .map(|t| run_trial(config, t))
            .collect::<Result<_>>()?
    } else {
        let body = || {
            (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, t))
                .collect::<Result<Vec<_>>>()
        };
        if parallelism == 0 {
            body()?
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(body)?
        }
    };
    Ok((aggregate_stats(config, &results), results))
}

pub const TRIALS_CSV_HEADER: &str =
    "trial,catch_all_time,false_positives,false_negatives,segments_generated,mean_overshoot";

/// Write per-trial rows. A trial that never caught the whole coalition
/// leaves the catch-all field empty.
pub fn write_trials_csv<W: Write>(out: &mut W, results: &[TrialResult]) -> Result<()> {
    writeln!(out, "{TRIALS_CSV_HEADER}")?;
    for (t, r) in results.iter().enumerate() {
        let catch = r.catch_all_time.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t,
            catch,
            r.false_positive_count,
            r.false_negative_count,
            r.segments_generated,
            r.overshoots.mean()
        )?;
    }
    Ok(())
}

/// Named experiment presets mirroring the workbench's standard runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    /// 10 interleaving pirates among 1000 users, one-sided sequential test
    /// with the interleaving log-likelihood decoder.
    WaldInterleavingToy,
    /// Same population under the sloped-boundary scheme with a hard
    /// truncation point.
    TardosInterleavingToy,
    /// All-one attack at a fixed design bias, one-sided sequential test.
    WaldGrouptestingToy,
    /// All-one attack scored only at the truncation point.
    TardosGrouptestingToy,
    /// Small two-sided run measuring realized error rates per user.
    SprtErrorSum,
}

pub const ALL_PRESETS: [PresetName; 5] = [
    PresetName::WaldInterleavingToy,
    PresetName::TardosInterleavingToy,
    PresetName::WaldGrouptestingToy,
    PresetName::TardosGrouptestingToy,
    PresetName::SprtErrorSum,
];

impl PresetName {
    pub fn name(&self) -> &'static str {
        match self {
            PresetName::WaldInterleavingToy => "wald_interleaving_toy",
            PresetName::TardosInterleavingToy => "tardos_interleaving_toy",
            PresetName::WaldGrouptestingToy => "wald_grouptesting_toy",
            PresetName::TardosGrouptestingToy => "tardos_grouptesting_toy",
            PresetName::SprtErrorSum => "sprt_error_sum",
        }
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_PRESETS
            .iter()
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Design bias for the all-one pairing: p = ln(2) / c0.
fn grouptesting_bias(c0: usize) -> f64 {
    std::f64::consts::LN_2 / c0 as f64
}

/// Build the named preset configuration.
pub fn preset(name: PresetName) -> Result<ExperimentConfig> {
    let config = match name {
        PresetName::WaldInterleavingToy => ExperimentConfig {
            n: 1000,
            c: 10,
            c0: 10,
            eps1: 1e-3,
            eps2: 0.0,
            epsilons_are_per_user: false,
            attack: AttackKind::Interleaving,
            decoder: DecoderSpec::InterleavingLl,
            scheme: EngineConfig {
                // per-user eps1 = 1e-3 / 1000
                boundary: wald_thresholds(1e-6, 0.0, ThresholdVariant::UpperOnly)?,
                delay: DelaySpec::immediate(),
                tainting: true,
                scheme: SchemeKind::WaldSprt,
            },
            bias: BiasDistribution::Arcsine,
            trials: 200,
            master_seed: 42,
            max_segments: 40_000,
            delay_b: 0,
            disconnect_on_accuse: true,
            activation_schedule: None,
        },
        PresetName::TardosInterleavingToy => {
            let slope = interleaving_drift_integrals(10)?.mu0;
            ExperimentConfig {
                n: 1000,
                c: 10,
                c0: 10,
                eps1: 1e-3,
                eps2: 0.0,
                epsilons_are_per_user: false,
                attack: AttackKind::Interleaving,
                decoder: DecoderSpec::InterleavingLl,
                scheme: EngineConfig {
                    boundary: tardos_boundary(17_953, 6.9078, slope)?,
                    delay: DelaySpec::immediate(),
                    tainting: true,
                    scheme: SchemeKind::SequentialTardos,
                },
                bias: BiasDistribution::Arcsine,
                trials: 100,
                master_seed: 42,
                max_segments: 17_953,
                delay_b: 0,
                disconnect_on_accuse: true,
                activation_schedule: None,
            }
        }
        PresetName::WaldGrouptestingToy => ExperimentConfig {
            n: 1000,
            c: 10,
            c0: 10,
            eps1: 1e-3,
            eps2: 0.0,
            epsilons_are_per_user: false,
            attack: AttackKind::AllOne,
            decoder: DecoderSpec::AllOne,
            scheme: EngineConfig {
                boundary: wald_thresholds(1e-6, 0.0, ThresholdVariant::UpperOnly)?,
                delay: DelaySpec::immediate(),
                tainting: true,
                scheme: SchemeKind::WaldSprt,
            },
            bias: BiasDistribution::Fixed { p: grouptesting_bias(10) },
            trials: 200,
            master_seed: 42,
            max_segments: 5000,
            delay_b: 0,
            disconnect_on_accuse: true,
            activation_schedule: None,
        },
        PresetName::TardosGrouptestingToy => ExperimentConfig {
            n: 1000,
            c: 10,
            c0: 10,
            eps1: 1e-3,
            eps2: 0.0,
            epsilons_are_per_user: false,
            attack: AttackKind::AllOne,
            decoder: DecoderSpec::AllOne,
            scheme: EngineConfig {
                boundary: truncation_only_boundary(459, 6.91)?,
                delay: DelaySpec::immediate(),
                tainting: false,
                scheme: SchemeKind::NonAdaptive,
            },
            bias: BiasDistribution::Fixed { p: grouptesting_bias(10) },
            trials: 200,
            master_seed: 42,
            max_segments: 459,
            delay_b: 0,
            disconnect_on_accuse: true,
            activation_schedule: None,
        },
        PresetName::SprtErrorSum => ExperimentConfig {
            n: 6,
            c: 5,
            c0: 5,
            eps1: 0.05,
            eps2: 0.05,
            epsilons_are_per_user: true,
            attack: AttackKind::Interleaving,
            decoder: DecoderSpec::InterleavingLl,
            scheme: EngineConfig {
                boundary: wald_thresholds(0.05, 0.05, ThresholdVariant::Aggressive)?,
                delay: DelaySpec::immediate(),
                tainting: false,
                scheme: SchemeKind::WaldSprt,
            },
            bias: BiasDistribution::Arcsine,
            trials: 10_000,
            master_seed: 42,
            max_segments: 100_000,
            delay_b: 0,
            disconnect_on_accuse: false,
            activation_schedule: None,
        },
    };
    config.validate()?;
    Ok(config)
}
