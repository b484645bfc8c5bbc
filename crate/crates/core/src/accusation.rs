//! Stopping rules and the per-segment decision engine.
//!
//! Every scheme here is a comparison of cumulative per-user scores against
//! a boundary. A non-adaptive scheme decides only at the final segment; a
//! sequential score-threshold scheme adds a sloped upper line so coalition
//! members can be cut off early; the Wald SPRT compares against horizontal
//! log-likelihood thresholds, optionally truncated at a final segment. The
//! engine itself always compares raw cumulative sums to its boundary;
//! normalization, when wanted, is a scoring-side preprocessing step.
//!
//! The engine also owns the operational wrinkles of tracing a live
//! channel: accusation takes effect with a delay of B segments, and
//! segments inside that window can be declared tainted, contributing zero
//! to every remaining user's score.

use crate::channel::DelaySpec;
use crate::error::{Error, Result};
use crate::model::{Score, UserState};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// eta(i0) = intercept + slope * i0, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineBoundary {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineBoundary {
    pub fn horizontal(level: f64) -> Self {
        AffineBoundary { intercept: level, slope: 0.0 }
    }

    pub fn eval(&self, i0: u64) -> f64 {
        self.intercept + self.slope * i0 as f64
    }
}

/// Forced decision point: at segment `ell`, every undecided user is
/// accused iff their cumulative score is at least `eta_final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub ell: u64,
    pub eta_final: f64,
}

/// Decision boundary: optional upper and lower lines plus an optional
/// truncation point. Schemes constrain which parts must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub upper: Option<AffineBoundary>,
    pub lower: Option<AffineBoundary>,
    pub truncation: Option<TruncationSpec>,
}

impl Boundary {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = &self.truncation {
            if t.ell == 0 {
                return Err(Error::TruncationLengthZero);
            }
        }
        if let (Some(lower), Some(upper)) = (&self.lower, &self.upper) {
            if lower.eval(1) >= upper.eval(1) {
                return Err(Error::BoundaryOrder);
            }
            if let Some(t) = &self.truncation {
                if lower.eval(t.ell) >= upper.eval(t.ell) {
                    return Err(Error::BoundaryOrder);
                }
            } else if lower.slope > upper.slope {
                // unbounded horizon: diverging lines eventually cross
                return Err(Error::BoundaryOrder);
            }
        }
        Ok(())
    }
}

/// How to turn per-user error probabilities into SPRT thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// eta0 = ln(eps2/(1-eps1)), eta1 = ln((1-eps2)/eps1); the classic
    /// choice whose realized error probabilities may exceed neither bound
    /// jointly but whose sum stays controlled.
    Aggressive,
    /// eta0 = -ln(1/eps2), eta1 = ln(1/eps1); each bound holds on its own.
    Conservative,
    /// No lower threshold, eta1 = ln(1/eps1): never acquit early.
    UpperOnly,
}

impl std::str::FromStr for ThresholdVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aggressive" => Ok(ThresholdVariant::Aggressive),
            "conservative" => Ok(ThresholdVariant::Conservative),
            "upper_only" => Ok(ThresholdVariant::UpperOnly),
            other => Err(Error::InvalidConfig(format!("unknown threshold variant '{other}'"))),
        }
    }
}

fn check_eps1(eps1: f64) -> Result<()> {
    if !(eps1 > 0.0 && eps1 < 1.0) {
        return Err(Error::EpsilonOutOfRange { name: "eps1", value: eps1, range: "(0, 1)" });
    }
    Ok(())
}

/// Horizontal SPRT thresholds from per-user error probabilities.
pub fn wald_thresholds(eps1: f64, eps2: f64, variant: ThresholdVariant) -> Result<Boundary> {
    check_eps1(eps1)?;
    if !(0.0..1.0).contains(&eps2) {
        return Err(Error::EpsilonOutOfRange { name: "eps2", value: eps2, range: "[0, 1)" });
    }
    if eps2 == 0.0 && variant != ThresholdVariant::UpperOnly {
        return Err(Error::TwoSidedNeedsEps2);
    }
    let boundary = match variant {
        ThresholdVariant::Aggressive => {
            if eps1 + eps2 >= 1.0 {
                return Err(Error::ThresholdsDegenerate { sum: eps1 + eps2 });
            }
            Boundary {
                upper: Some(AffineBoundary::horizontal(((1.0 - eps2) / eps1).ln())),
                lower: Some(AffineBoundary::horizontal((eps2 / (1.0 - eps1)).ln())),
                truncation: None,
            }
        }
        ThresholdVariant::Conservative => Boundary {
            upper: Some(AffineBoundary::horizontal((1.0 / eps1).ln())),
            lower: Some(AffineBoundary::horizontal(-(1.0 / eps2).ln())),
            truncation: None,
        },
        ThresholdVariant::UpperOnly => Boundary {
            upper: Some(AffineBoundary::horizontal((1.0 / eps1).ln())),
            lower: None,
            truncation: None,
        },
    };
    boundary.validate()?;
    Ok(boundary)
}

/// Split global error budgets across users: an innocent-accusation budget
/// eps1 shared by n users and a missed-colluder budget eps2 shared by c.
pub fn per_user_epsilons(eps1: f64, eps2: f64, n: usize, c: usize) -> Result<(f64, f64)> {
    check_eps1(eps1)?;
    if !(0.0..1.0).contains(&eps2) {
        return Err(Error::EpsilonOutOfRange { name: "eps2", value: eps2, range: "[0, 1)" });
    }
    if n == 0 || c == 0 {
        return Err(Error::InvalidConfig("per-user split needs n >= 1 and c >= 1".into()));
    }
    Ok((eps1 / n as f64, eps2 / c as f64))
}

/// Sloped score-threshold boundary through (ell, eta_final): the upper
/// line eta1(i0) = eta_final + slope * (i0 - ell) runs parallel to the
/// innocent drift, plus the forced decision at ell. The slope must be
/// strictly negative; the degenerate vertical case is
/// [`truncation_only_boundary`].
pub fn tardos_boundary(ell: u64, eta_final: f64, slope: f64) -> Result<Boundary> {
    if ell == 0 {
        return Err(Error::TruncationLengthZero);
    }
    if !(slope < 0.0) || !slope.is_finite() {
        return Err(Error::SlopeNotNegative(slope));
    }
    Ok(Boundary {
        upper: Some(AffineBoundary { intercept: eta_final - slope * ell as f64, slope }),
        lower: None,
        truncation: Some(TruncationSpec { ell, eta_final }),
    })
}

/// Vertical boundary: no decision before the final segment. This is the
/// limit of [`tardos_boundary`] as the slope steepens without bound, and
/// the natural boundary for non-adaptive schemes.
pub fn truncation_only_boundary(ell: u64, eta_final: f64) -> Result<Boundary> {
    if ell == 0 {
        return Err(Error::TruncationLengthZero);
    }
    Ok(Boundary { upper: None, lower: None, truncation: Some(TruncationSpec { ell, eta_final }) })
}

/// Halve both error budgets. Running a sequential scheme with the halved
/// parameters of a non-adaptive design keeps the original (eps1, eps2)
/// guarantees; see [`sequential_error_bounds`] for the converse bound.
pub fn halve_epsilons(eps1: f64, eps2: f64) -> Result<(f64, f64)> {
    check_eps1(eps1)?;
    if !(eps2 > 0.0 && eps2 < 1.0) {
        return Err(Error::EpsilonOutOfRange { name: "eps2", value: eps2, range: "(0, 1)" });
    }
    Ok((eps1 / 2.0, eps2 / 2.0))
}

/// Error bounds inherited by the sequential scheme built from a
/// non-adaptive design with parameters (eps1, eps2): at most 2*eps1
/// innocent-accusation probability and at most 2*eps2 probability of not
/// catching all coalition members.
pub fn sequential_error_bounds(eps1: f64, eps2: f64) -> Result<(f64, f64)> {
    for (name, value) in [("eps1", eps1), ("eps2", eps2)] {
        if !(value > 0.0 && value < 0.5) {
            return Err(Error::EpsilonOutOfRange { name, value, range: "(0, 1/2)" });
        }
    }
    Ok((2.0 * eps1, 2.0 * eps2))
}

/// Scheme taxonomy, ordered by how much the distributor adapts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Decide once, at the truncation segment.
    NonAdaptive,
    /// Sloped upper boundary plus truncation; no early acquittal.
    SequentialTardos,
    /// Horizontal thresholds, open-ended horizon.
    WaldSprt,
    /// Horizontal thresholds with a forced decision at truncation.
    TruncatedSprt,
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non_adaptive" => Ok(SchemeKind::NonAdaptive),
            "sequential_tardos" => Ok(SchemeKind::SequentialTardos),
            "wald_sprt" => Ok(SchemeKind::WaldSprt),
            "truncated_sprt" => Ok(SchemeKind::TruncatedSprt),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Full engine configuration: boundary geometry, disconnection delay, and
/// whether delayed segments are tainted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub boundary: Boundary,
    pub delay: DelaySpec,
    pub tainting: bool,
    pub scheme: SchemeKind,
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.boundary.validate()?;
        let b = &self.boundary;
        match self.scheme {
            SchemeKind::NonAdaptive => {
                if b.truncation.is_none() {
                    return Err(Error::SchemeInvariant("non_adaptive needs a truncation point"));
                }
                if b.lower.is_some() {
                    return Err(Error::SchemeInvariant("non_adaptive takes no lower boundary"));
                }
                if b.upper.is_some() {
                    return Err(Error::SchemeInvariant(
                        "non_adaptive decides only at truncation; drop the upper boundary",
                    ));
                }
            }
            SchemeKind::SequentialTardos => {
                if b.upper.is_none() || b.truncation.is_none() {
                    return Err(Error::SchemeInvariant(
                        "sequential_tardos needs an upper boundary and a truncation point",
                    ));
                }
                if b.lower.is_some() {
                    return Err(Error::SchemeInvariant("sequential_tardos takes no lower boundary"));
                }
            }
            SchemeKind::WaldSprt => {
                if b.upper.is_none() {
                    return Err(Error::SchemeInvariant("wald_sprt needs an upper boundary"));
                }
                if b.truncation.is_some() {
                    return Err(Error::SchemeInvariant(
                        "wald_sprt is open-ended; use truncated_sprt for a forced decision",
                    ));
                }
            }
            SchemeKind::TruncatedSprt => {
                if b.upper.is_none() || b.truncation.is_none() {
                    return Err(Error::SchemeInvariant(
                        "truncated_sprt needs an upper boundary and a truncation point",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of a single user decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionKind {
    Accused,
    Acquitted,
    CertainlyInnocent,
    ForcedAtTruncation { accused: bool },
}

impl DecisionKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecisionKind::Accused => "accused",
            DecisionKind::Acquitted => "acquitted",
            DecisionKind::CertainlyInnocent => "certainly_innocent",
            DecisionKind::ForcedAtTruncation { .. } => "forced_at_truncation",
        }
    }

    /// Whether this decision convicts the user.
    pub fn is_accusation(&self) -> bool {
        matches!(
            self,
            DecisionKind::Accused | DecisionKind::ForcedAtTruncation { accused: true }
        )
    }
}

/// One terminal decision. `user` is 1-based; `overshoot` is the distance
/// past the boundary for crossings, |score - eta_final| for forced
/// decisions, and 0 for certainly-innocent signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionEvent {
    pub user: usize,
    pub segment: u64,
    pub kind: DecisionKind,
    pub overshoot: f64,
}

pub const EVENTS_CSV_HEADER: &str = "trial,user,segment,kind,overshoot";

/// Append decision events as CSV rows under [`EVENTS_CSV_HEADER`].
pub fn write_events_csv<W: Write>(out: &mut W, trial: u64, events: &[DecisionEvent]) -> Result<()> {
    for e in events {
        writeln!(out, "{},{},{},{},{}", trial, e.user, e.segment, e.kind.name(), e.overshoot)?;
    }
    Ok(())
}

/// Sequential decision engine over all users of one trial.
///
/// Scores arrive one segment at a time; the engine tracks cumulative
/// sums, emits at most one terminal decision per user, and reports when
/// every user is decided or the truncation segment has been processed.
#[derive(Debug, Clone)]
pub struct AccusationEngine {
    config: EngineConfig,
    states: Vec<UserState>,
    next_segment: u64,
    taint_until: u64,
    finished: bool,
}

impl AccusationEngine {
    pub fn new(config: EngineConfig, n: usize) -> Result<Self> {
        config.validate()?;
        if n == 0 {
            return Err(Error::EmptyCode);
        }
        Ok(AccusationEngine {
            config,
            states: vec![UserState::new(); n],
            next_segment: 1,
            taint_until: 0,
            finished: false,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn states(&self) -> &[UserState] {
        &self.states
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn active_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_active()).count()
    }

    /// Whether scores for `segment` would be ignored due to tainting.
    pub fn segment_is_tainted(&self, segment: u64) -> bool {
        self.config.tainting && segment <= self.taint_until
    }

    /// Feed one segment of per-user scores (index `i0`, 1-based, strictly
    /// sequential) and collect the decisions it triggers.
    pub fn step(&mut self, scores: &[Score], i0: u64) -> Result<Vec<DecisionEvent>> {
        if self.finished {
            return Err(Error::EngineFinished);
        }
        if i0 != self.next_segment {
            return Err(Error::SegmentOutOfOrder { expected: self.next_segment, got: i0 });
        }
        if scores.len() != self.states.len() {
            return Err(Error::ScoreCountMismatch {
                expected: self.states.len(),
                got: scores.len(),
            });
        }

        let tainted = self.segment_is_tainted(i0);
        let delay_b = self.config.delay.b;
        let mut events = Vec::new();

        if !tainted {
            for (idx, (state, &score)) in self.states.iter_mut().zip(scores).enumerate() {
                if !state.is_active() {
                    continue;
                }
                let user = idx + 1;
                match score {
                    Score::CertainlyInnocent => {
                        state.mark_certainly_innocent(i0);
                        events.push(DecisionEvent {
                            user,
                            segment: i0,
                            kind: DecisionKind::CertainlyInnocent,
                            overshoot: 0.0,
                        });
                        continue;
                    }
                    Score::Finite(s) => state.add(s),
                }
                let cum = state.cumulative_score();
                if let Some(upper) = &self.config.boundary.upper {
                    let threshold = upper.eval(i0);
                    if cum > threshold {
                        state.accuse(i0, i0 + delay_b);
                        self.taint_until = self.taint_until.max(i0 + delay_b);
                        events.push(DecisionEvent {
                            user,
                            segment: i0,
                            kind: DecisionKind::Accused,
                            overshoot: cum - threshold,
                        });
                        continue;
                    }
                }
                if let Some(lower) = &self.config.boundary.lower {
                    let threshold = lower.eval(i0);
                    if cum < threshold {
                        state.acquit(i0);
                        events.push(DecisionEvent {
                            user,
                            segment: i0,
                            kind: DecisionKind::Acquitted,
                            overshoot: threshold - cum,
                        });
                    }
                }
            }
        }

        if let Some(t) = self.config.boundary.truncation {
            if i0 == t.ell {
                for (idx, state) in self.states.iter_mut().enumerate() {
                    if !state.is_active() {
                        continue;
                    }
                    let cum = state.cumulative_score();
                    let accused = cum >= t.eta_final;
                    if accused {
                        state.accuse(i0, i0 + delay_b);
                    } else {
                        state.acquit(i0);
                    }
                    events.push(DecisionEvent {
                        user: idx + 1,
                        segment: i0,
                        kind: DecisionKind::ForcedAtTruncation { accused },
                        overshoot: (cum - t.eta_final).abs(),
                    });
                }
                self.finished = true;
            }
        }
        if self.states.iter().all(|s| !s.is_active()) {
            self.finished = true;
        }
        self.next_segment = i0 + 1;
        Ok(events)
    }
}
