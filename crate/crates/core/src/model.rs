//! Shared domain types: bias vectors, code matrices, coalitions, and
//! per-user sequential state.
//!
//! Conventions used across the crate: segments and users are indexed from 1,
//! symbols are bits, and all log-scores are in nats. A score of minus
//! infinity is never represented as a float; it is the explicit
//! [`Score::CertainlyInnocent`] signal, which keeps NaN out of every
//! accumulation path and makes the acquit-for-sure semantics testable.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-segment watermark-symbol probabilities p in (0,1)^len.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasVector {
    values: Vec<f64>,
}

impl BiasVector {
    /// Build a bias vector, rejecting empty input and entries at or outside
    /// the open interval (0,1). The endpoints are excluded so that the
    /// score denominators p and 1-p never vanish.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyBias);
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::BiasOutOfRange { index: i + 1, value: v });
            }
        }
        Ok(Self { values })
    }

    /// Number of segments.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Bias of 1-based segment `i`.
    pub fn segment(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Binary code: one row of `len` bits per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    bits: Vec<u8>,
    n: usize,
    len: usize,
}

impl CodeMatrix {
    /// Build from row-major bits; every entry must be 0 or 1 and all rows
    /// share the same length.
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyCode);
        }
        let len = rows[0].len();
        let mut bits = Vec::with_capacity(rows.len() * len);
        for row in &rows {
            if row.len() != len {
                return Err(Error::LengthMismatch { bias_len: len, code_len: row.len() });
            }
            for &b in row {
                if b > 1 {
                    return Err(Error::NotABit(b));
                }
                bits.push(b);
            }
        }
        Ok(Self { bits, n: rows.len(), len })
    }

    /// User count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code length in segments.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit of 1-based `user` at 1-based `segment`.
    pub fn bit(&self, user: usize, segment: usize) -> u8 {
        self.bits[(user - 1) * self.len + (segment - 1)]
    }

    /// Row of 1-based `user`.
    pub fn row(&self, user: usize) -> &[u8] {
        let start = (user - 1) * self.len;
        &self.bits[start..start + self.len]
    }

    /// Copy without the given 1-based user row.
    pub fn without_user(&self, user: usize) -> Result<Self> {
        if user == 0 || user > self.n {
            return Err(Error::CoalitionIndexOutOfRange { user, n: self.n });
        }
        if self.n == 1 {
            return Err(Error::EmptyCode);
        }
        let mut bits = Vec::with_capacity((self.n - 1) * self.len);
        for u in 1..=self.n {
            if u != user {
                bits.extend_from_slice(self.row(u));
            }
        }
        Ok(Self { bits, n: self.n - 1, len: self.len })
    }
}

/// A coalition of colluding users plus the decoder's assumed size bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionSpec {
    members: Vec<usize>,
    c0: usize,
}

impl CoalitionSpec {
    /// `members` are 1-based user indices; `c0 >= |members|` is the
    /// decoder's (possibly crude) upper bound on the coalition size.
    pub fn new(mut members: Vec<usize>, c0: usize) -> Result<Self> {
        members.sort_unstable();
        let c = members.len();
        if c == 0 || c > c0 {
            return Err(Error::CoalitionSizeInvalid { c, c0 });
        }
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(Error::CoalitionDuplicate { user: w[0] });
            }
        }
        Ok(Self { members, c0 })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// True coalition size.
    pub fn c(&self) -> usize {
        self.members.len()
    }

    /// Decoder's assumed bound.
    pub fn c0(&self) -> usize {
        self.c0
    }

    pub fn contains(&self, user: usize) -> bool {
        self.members.binary_search(&user).is_ok()
    }
}

/// Cross-type consistency check for a full problem instance.
///
/// Passes iff the bias and code lengths agree, every coalition member is a
/// valid user index, and each type's own invariants hold (the constructors
/// enforce those already; re-validation here keeps deserialized or
/// hand-assembled instances honest).
pub fn validate_instance(
    bias: &BiasVector,
    code: &CodeMatrix,
    coalition: &CoalitionSpec,
) -> Result<()> {
    if bias.len() != code.len() {
        return Err(Error::LengthMismatch { bias_len: bias.len(), code_len: code.len() });
    }
    for (i, &v) in bias.values().iter().enumerate() {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::BiasOutOfRange { index: i + 1, value: v });
        }
    }
    for &m in coalition.members() {
        if m == 0 || m > code.n() {
            return Err(Error::CoalitionIndexOutOfRange { user: m, n: code.n() });
        }
    }
    Ok(())
}

/// One user's per-segment decoder evidence: a finite log-score in nats, or
/// the certain-innocence signal that stands in for minus infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Finite(f64),
    CertainlyInnocent,
}

impl Score {
    pub fn finite(self) -> Option<f64> {
        match self {
            Score::Finite(v) => Some(v),
            Score::CertainlyInnocent => None,
        }
    }
}

/// Terminal-or-active status of one user inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UserStatus {
    Active,
    Accused { at: u64 },
    Acquitted { at: u64 },
    CertainlyInnocent { at: u64 },
}

impl UserStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, UserStatus::Active)
    }
}

/// Sequential decision state of one user. Confined to a single trial; the
/// status moves from `Active` to exactly one terminal value and never back.
#[derive(Debug, Clone)]
pub struct UserState {
    cumulative_score: f64,
    status: UserStatus,
    disconnect_pending_until: Option<u64>,
}

impl Default for UserState {
    fn default() -> Self {
        Self::new()
    }
}

impl UserState {
    pub fn new() -> Self {
        Self { cumulative_score: 0.0, status: UserStatus::Active, disconnect_pending_until: None }
    }

    pub fn cumulative_score(&self) -> f64 {
        self.cumulative_score
    }

    pub fn status(&self) -> UserStatus {
        self.status
    }

    pub fn is_active(&self) -> bool {
        !self.status.is_terminal()
    }

    /// Last segment for which an accused user still feeds the pirate, when a
    /// disconnection delay is configured.
    pub fn disconnect_pending_until(&self) -> Option<u64> {
        self.disconnect_pending_until
    }

    pub(crate) fn add(&mut self, score: f64) {
        debug_assert!(self.is_active(), "scores accumulate only while active");
        self.cumulative_score += score;
    }

    fn transition(&mut self, status: UserStatus) {
        assert!(self.is_active(), "terminal status is set at most once");
        self.status = status;
    }

    pub(crate) fn accuse(&mut self, at: u64, contributes_until: u64) {
        self.transition(UserStatus::Accused { at });
        self.disconnect_pending_until = Some(contributes_until);
    }

    pub(crate) fn acquit(&mut self, at: u64) {
        self.transition(UserStatus::Acquitted { at });
    }

    pub(crate) fn mark_certainly_innocent(&mut self, at: u64) {
        self.transition(UserStatus::CertainlyInnocent { at });
    }
}

/// Boundary-crossing overshoots observed in a run, in nats.
///
/// Discrete score paths do not land exactly on a boundary; the overshoot at
/// each crossing is what separates the idealized continuous-path error
/// formulas from the realized error rates, so the harness records it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OvershootStats {
    samples: Vec<f64>,
}

impl OvershootStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a crossing overshoot; crossings are measured as a nonnegative
    /// distance past the boundary regardless of which boundary was hit.
    pub fn record(&mut self, overshoot: f64) -> Result<()> {
        if !(overshoot >= 0.0) {
            return Err(Error::NegativeOvershoot(overshoot));
        }
        self.samples.push(overshoot);
        Ok(())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// Mean overshoot, or 0.0 when no crossing was observed.
    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.samples.iter().sum::<f64>() / self.samples.len() as f64
        }
    }

    pub fn merge(&mut self, other: &OvershootStats) {
        self.samples.extend_from_slice(&other.samples);
    }
}
