//! End-to-end behavior of the Monte Carlo harness: agreement with the
//! closed-form termination predictions, exactness of the disconnection
//! machinery, and reproducibility guarantees.

use tracelab_core::accusation::{
    wald_thresholds, AffineBoundary, Boundary, DecisionKind, EngineConfig, SchemeKind,
    ThresholdVariant,
};
use tracelab_core::analysis::interleaving_drift_integrals;
use tracelab_core::channel::{AttackKind, DelaySpec};
use tracelab_core::encoder::{generate_code, sample_bias_vector, BiasDistribution};
use tracelab_core::seeding::{derive_sub_seed, tags};
use tracelab_core::sim::{
    preset, run_experiment, run_trial_instrumented, DecoderSpec, ExperimentConfig, PresetName,
    ReseedSpec, TrialOptions,
};

/// Interleaving run with the coalition held intact (no disconnection), so
/// each colluder's cumulative score is a clean drifted walk.
fn intact_interleaving_config(trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: 11,
        c: 10,
        c0: 10,
        eps1: 1e-6,
        eps2: 0.0,
        epsilons_are_per_user: true,
        attack: AttackKind::Interleaving,
        decoder: DecoderSpec::InterleavingLl,
        scheme: EngineConfig {
            boundary: wald_thresholds(1e-6, 0.0, ThresholdVariant::UpperOnly).unwrap(),
            delay: DelaySpec::immediate(),
            tainting: false,
            scheme: SchemeKind::WaldSprt,
        },
        bias: BiasDistribution::Arcsine,
        trials,
        master_seed: 4242,
        max_segments: 12_000,
        delay_b: 0,
        disconnect_on_accuse: false,
        activation_schedule: None,
    }
}

#[test]
fn mean_crossing_time_matches_the_walk_prediction() {
    // With the coalition intact, one colluder's accusation time should sit
    // near eta1 / mu1 (overshoot adds a fraction of a percent).
    let config = intact_interleaving_config(500);
    let (_, results) = run_experiment(&config, 0).unwrap();
    let times: Vec<f64> = results
        .iter()
        .filter_map(|r| r.per_colluder_catch_times[0])
        .map(|t| t as f64)
        .collect();
    assert!(times.len() >= 495, "colluder 1 crossed in only {} of 500 trials", times.len());
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let drift = interleaving_drift_integrals(10).unwrap();
    let predicted = 1e6f64.ln() / drift.mu1;
    assert!(
        (mean - predicted).abs() <= 0.10 * predicted,
        "mean crossing {mean:.1} vs predicted {predicted:.1}"
    );
}

#[test]
fn grouptesting_run_beats_the_fixed_length_design() {
    // The all-one pairing at the design bias catches everyone far sooner
    // than the 459-segment fixed-length design it replaces.
    let config = preset(PresetName::WaldGrouptestingToy).unwrap();
    let (stats, results) = run_experiment(&config, 0).unwrap();
    assert_eq!(stats.trials_without_catch_all, 0, "every trial must catch all ten");
    assert!(results.iter().all(|r| r.false_negative_count == 0));
    let mean = stats.catch_all_mean.unwrap();
    assert!(mean < 459.0, "mean catch-all {mean:.1} not below 459");
    assert!((93.0..160.0).contains(&mean), "mean catch-all {mean:.1} outside expected band");
}

#[test]
fn realized_error_rates_respect_the_design_sum() {
    // Two-sided test at per-user eps1 = eps2 = 0.05: realized rates come
    // from the one innocent (false accusations) and one fixed colluder
    // (missed detections). 500 trials, so the band is the design sum plus
    // three binomial standard errors.
    let mut config = preset(PresetName::SprtErrorSum).unwrap();
    config.trials = 500;
    let (_, results) = run_experiment(&config, 0).unwrap();
    let trials = results.len() as f64;
    let e1 = results.iter().filter(|r| r.false_positive_count > 0).count() as f64 / trials;
    let e2 = results
        .iter()
        .filter(|r| r.per_colluder_catch_times[0].is_none())
        .count() as f64
        / trials;
    let band = 0.10 + 3.0 * (2.0 * 0.05 * 0.95 / trials).sqrt();
    assert!(e1 + e2 <= band, "e1 = {e1:.4}, e2 = {e2:.4}, band = {band:.4}");
    assert!(e1 > 0.0 || e2 > 0.0, "500 trials at 5% targets should show some errors");
}

#[test]
fn cap_hits_are_reported_not_hidden() {
    let mut config = preset(PresetName::WaldInterleavingToy).unwrap();
    config.trials = 5;
    config.max_segments = 100;
    let (stats, results) = run_experiment(&config, 1).unwrap();
    assert_eq!(stats.trials_without_catch_all, 5);
    assert_eq!(stats.catch_all_mean, None);
    for r in &results {
        assert_eq!(r.segments_generated, 100);
        assert_eq!(r.catch_all_time, None);
    }
}

#[test]
fn parallel_and_serial_runs_are_bit_identical() {
    let mut config = preset(PresetName::WaldGrouptestingToy).unwrap();
    config.trials = 50;
    let (stats1, results1) = run_experiment(&config, 1).unwrap();
    let (stats4, results4) = run_experiment(&config, 4).unwrap();
    let (stats0, results0) = run_experiment(&config, 0).unwrap();
    assert_eq!(results1, results4);
    assert_eq!(results1, results0);
    assert_eq!(stats1, stats4);
    assert_eq!(stats1, stats0);
}

/// Small run in which colluders get accused quickly, for the disconnection
/// checks. The threshold is low enough that all three colluders cross well
/// before the cap.
fn quick_accusation_config() -> ExperimentConfig {
    ExperimentConfig {
        n: 8,
        c: 3,
        c0: 3,
        eps1: 0.05,
        eps2: 0.0,
        epsilons_are_per_user: true,
        attack: AttackKind::Interleaving,
        decoder: DecoderSpec::InterleavingLl,
        scheme: EngineConfig {
            boundary: wald_thresholds(0.05, 0.0, ThresholdVariant::UpperOnly).unwrap(),
            delay: DelaySpec::immediate(),
            tainting: true,
            scheme: SchemeKind::WaldSprt,
        },
        bias: BiasDistribution::Arcsine,
        trials: 1,
        master_seed: 2026,
        max_segments: 4000,
        delay_b: 0,
        disconnect_on_accuse: true,
        activation_schedule: None,
    }
}

#[test]
fn reseeding_a_disconnected_colluder_leaves_the_run_unchanged() {
    // Find a trial whose first colluder accusation lands comfortably into
    // the run, then replay it with that colluder's symbol stream replaced
    // from the segment after the disconnect takes effect. The replacement
    // keeps drawing fresh symbols every segment; none of them may reach the
    // pirate output or anyone's decision.
    let config = quick_accusation_config();
    let record = TrialOptions { record_pirate_stream: true, reseed: None };
    let mut chosen = None;
    for t in 0..20 {
        let out = run_trial_instrumented(&config, t, &record).unwrap();
        let first = out
            .events
            .iter()
            .find(|e| e.kind.is_accusation() && e.user <= config.c)
            .map(|e| (e.user, e.segment));
        if let Some((user, segment)) = first {
            if segment >= 5 && segment + 10 < out.result.segments_generated {
                chosen = Some((t, user, segment, out));
                break;
            }
        }
    }
    let (t, user, segment, base) = chosen.expect("no trial with an early accusation");

    // disconnect takes effect at segment + delay + 1
    let replay = run_trial_instrumented(
        &config,
        t,
        &TrialOptions {
            record_pirate_stream: true,
            reseed: Some(ReseedSpec { user, from_segment: segment + 1, salt: 77 }),
        },
    )
    .unwrap();
    assert_eq!(base.pirate_stream, replay.pirate_stream);
    assert_eq!(base.events, replay.events);
    assert_eq!(base.result, replay.result);

    // control: the same replacement one segment before the accusation does
    // perturb the pirate stream
    let control = run_trial_instrumented(
        &config,
        t,
        &TrialOptions {
            record_pirate_stream: true,
            reseed: Some(ReseedSpec { user, from_segment: segment.saturating_sub(4).max(1), salt: 77 }),
        },
    )
    .unwrap();
    assert_ne!(base.pirate_stream, control.pirate_stream);
}

#[test]
fn pirate_output_tracks_the_shrinking_coalition_exactly() {
    // All-one attack with a one-segment disconnection delay: replay the
    // recorded pirate stream against the up-front code matrix, shrinking
    // the contributing set from the recorded accusation times. An accused
    // colluder still contributes at the accusation segment plus one.
    let config = ExperimentConfig {
        n: 8,
        c: 3,
        c0: 3,
        eps1: 0.05,
        eps2: 0.0,
        epsilons_are_per_user: true,
        attack: AttackKind::AllOne,
        decoder: DecoderSpec::AllOne,
        scheme: EngineConfig {
            boundary: Boundary {
                upper: Some(AffineBoundary::horizontal((30.0f64).ln())),
                lower: None,
                truncation: None,
            },
            delay: DelaySpec { b: 1 },
            tainting: true,
            scheme: SchemeKind::WaldSprt,
        },
        bias: BiasDistribution::Fixed { p: 0.20 },
        trials: 1,
        master_seed: 515,
        max_segments: 2000,
        delay_b: 1,
        disconnect_on_accuse: true,
        activation_schedule: None,
    };
    let out = run_trial_instrumented(
        &config,
        0,
        &TrialOptions { record_pirate_stream: true, reseed: None },
    )
    .unwrap();
    let stream = out.pirate_stream.unwrap();
    let played = out.result.segments_generated as usize;
    assert_eq!(stream.len(), played);
    assert!(
        out.result.catch_all_time.is_some(),
        "low threshold should catch all colluders within the cap"
    );

    let trial_master = derive_sub_seed(config.master_seed, &[tags::TRIAL, 0]);
    let bias = sample_bias_vector(&config.bias, played, trial_master).unwrap();
    let code = generate_code(&bias, config.n, trial_master).unwrap();
    let catch = &out.result.per_colluder_catch_times;
    for i in 1..=played {
        let any_one = (1..=config.c).any(|j| {
            let contributing = match catch[j - 1] {
                Some(at) => (i as u64) <= at + config.delay_b,
                None => true,
            };
            contributing && code.bit(j, i) == 1
        });
        assert_eq!(stream[i - 1], u8::from(any_one), "segment {i}");
    }

    // at least one segment after the first accusation must fall inside the
    // delay window, otherwise the check above never exercises it
    let first = catch.iter().flatten().min().unwrap();
    assert!(first + 1 <= out.result.catch_all_time.unwrap());
    for event in &out.events {
        assert!(matches!(event.kind, DecisionKind::Accused | DecisionKind::CertainlyInnocent));
    }
}
