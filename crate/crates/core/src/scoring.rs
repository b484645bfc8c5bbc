//! Score functions and per-segment moments.
//!
//! A decoder assigns each user a score g(x, y, p) from their own symbol x,
//! the pirate output y, and the segment bias p. The generic
//! Neyman-Pearson score is the log-likelihood ratio of the joint (x, y)
//! density of a coalition member against that of an innocent user, for an
//! assumed channel of size c0. The classic symmetric score, the
//! interleaving log-likelihood score, and the group-testing four-case
//! score are the closed forms this ratio takes (exactly or asymptotically)
//! for specific channels.
//!
//! A score of minus infinity means the observed (x, y) pair is impossible
//! for a coalition member: the user is certainly innocent. That outcome is
//! a first-class [`Score::CertainlyInnocent`] value, never a raw float.
//!
//! Numerical ground rule: probabilities of y = 0 events are computed as
//! direct sums over (1 - theta_z), never as one minus the y = 1 sum.
//! Subtracting nearly-equal doubles would turn the structural zeros that
//! drive certainly-innocent detection into noise.

use crate::channel::CollusionChannel;
use crate::encoder::{bias_average, BiasDistribution};
use crate::error::{Error, Result};
use crate::model::Score;
use serde::{Deserialize, Serialize};

/// Decoder choice. The size parameter c0 is the tracer's estimate of the
/// coalition size; the attack's true size may differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreFunction {
    /// Bias-only score, positive iff x = y; channel-agnostic.
    Symmetric,
    /// Log-likelihood score matched to the interleaving attack.
    InterleavingLl { c0: usize },
    /// Four-case group-testing score matched to the all-one attack.
    AllOne { c0: usize },
    /// Exact Neyman-Pearson log-likelihood ratio for the given channel.
    GenericNp { channel: CollusionChannel },
}

impl ScoreFunction {
    pub fn validate(&self) -> Result<()> {
        let c0 = match self {
            ScoreFunction::Symmetric => return Ok(()),
            ScoreFunction::InterleavingLl { c0 } | ScoreFunction::AllOne { c0 } => *c0,
            ScoreFunction::GenericNp { channel } => channel.c(),
        };
        if c0 == 0 {
            return Err(Error::DecoderSizeZero);
        }
        Ok(())
    }

    /// Evaluate the decoder. Non-finite raw values (the c0 = 1 mismatch
    /// case of the interleaving score) collapse to certainly-innocent.
    pub fn evaluate(&self, x: u8, y: u8, p: f64) -> Result<Score> {
        check_bit(x)?;
        check_bit(y)?;
        match self {
            ScoreFunction::Symmetric => Ok(Score::Finite(symmetric_score(x, y, p)?)),
            ScoreFunction::InterleavingLl { c0 } => {
                let raw = interleaving_ll_score(x, y, p, *c0)?;
                if raw.is_finite() {
                    Ok(Score::Finite(raw))
                } else {
                    Ok(Score::CertainlyInnocent)
                }
            }
            ScoreFunction::AllOne { c0 } => all_one_score(x, y, *c0),
            ScoreFunction::GenericNp { channel } => generic_np_score(x, y, p, channel),
        }
    }
}

fn check_bit(b: u8) -> Result<()> {
    if b > 1 {
        return Err(Error::NotABit(b));
    }
    Ok(())
}

fn check_interior(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) || !p.is_finite() {
        return Err(Error::BiasBoundary(p));
    }
    Ok(())
}

/// Symmetric score: magnitude sqrt((1-p)/p) when x = 1, sqrt(p/(1-p))
/// when x = 0, positive iff x = y. Innocent mean 0 and variance 1 hold
/// exactly at every p, conditionally on either y.
pub fn symmetric_score(x: u8, y: u8, p: f64) -> Result<f64> {
    check_bit(x)?;
    check_bit(y)?;
    check_interior(p)?;
    let magnitude = if x == 1 {
        ((1.0 - p) / p).sqrt()
    } else {
        (p / (1.0 - p)).sqrt()
    };
    Ok(if x == y { magnitude } else { -magnitude })
}

/// Log-likelihood score for the interleaving attack at assumed size c0.
/// Mismatches score ln(1 - 1/c0); with c0 = 1 that is minus infinity
/// (a lone pirate always outputs their own symbol), which callers going
/// through [`ScoreFunction::evaluate`] receive as certainly-innocent.
pub fn interleaving_ll_score(x: u8, y: u8, p: f64, c0: usize) -> Result<f64> {
    check_bit(x)?;
    check_bit(y)?;
    check_interior(p)?;
    if c0 == 0 {
        return Err(Error::DecoderSizeZero);
    }
    let c0 = c0 as f64;
    Ok(if x != y {
        (-1.0 / c0).ln_1p()
    } else if x == 1 {
        ((1.0 - p) / (c0 * p)).ln_1p()
    } else {
        (p / (c0 * (1.0 - p))).ln_1p()
    })
}

/// Four-case group-testing score for the all-one attack. The (1, 0) cell
/// is impossible for a coalition member, hence certainly-innocent.
pub fn all_one_score(x: u8, y: u8, c0: usize) -> Result<Score> {
    check_bit(x)?;
    check_bit(y)?;
    if c0 == 0 {
        return Err(Error::DecoderSizeZero);
    }
    let ln2 = std::f64::consts::LN_2;
    Ok(match (x, y) {
        (1, 1) => Score::Finite(ln2),
        (1, 0) => Score::CertainlyInnocent,
        (0, 1) => Score::Finite((2.0 - (-ln2 / c0 as f64).exp()).ln()),
        _ => Score::Finite(ln2 / c0 as f64),
    })
}

/// P(Y = y | colluder symbol x, bias p) under `channel`: the binomial sum
/// over the other c - 1 coalition symbols. Summation ascends from the
/// lighter tail so the leading weight never underflows.
pub(crate) fn colluder_conditional(channel: &CollusionChannel, x: u8, y: u8, p: f64) -> f64 {
    let m = channel.c() - 1;
    let q = 1.0 - p;
    if m == 0 {
        return channel.emission(x as usize, y);
    }
    let mut acc = 0.0;
    if p <= 0.5 {
        let mut t = q.powi(m as i32);
        let ratio = p / q;
        for z in 0..=m {
            acc += t * channel.emission(z + x as usize, y);
            if z < m {
                t *= (m - z) as f64 / (z + 1) as f64 * ratio;
            }
        }
    } else {
        let mut t = p.powi(m as i32);
        let ratio = q / p;
        for z in (0..=m).rev() {
            acc += t * channel.emission(z + x as usize, y);
            if z > 0 {
                t *= z as f64 / (m - z + 1) as f64 * ratio;
            }
        }
    }
    acc
}

/// P(Y = y | bias p) for either y, as a direct sum (see module docs).
pub(crate) fn marginal_for(channel: &CollusionChannel, y: u8, p: f64) -> f64 {
    let c = channel.c();
    let q = 1.0 - p;
    let mut acc = 0.0;
    if p <= 0.5 {
        let mut t = q.powi(c as i32);
        let ratio = p / q;
        for z in 0..=c {
            acc += t * channel.emission(z, y);
            if z < c {
                t *= (c - z) as f64 / (z + 1) as f64 * ratio;
            }
        }
    } else {
        let mut t = p.powi(c as i32);
        let ratio = q / p;
        for z in (0..=c).rev() {
            acc += t * channel.emission(z, y);
            if z > 0 {
                t *= z as f64 / (c - z + 1) as f64 * ratio;
            }
        }
    }
    acc
}

/// Exact Neyman-Pearson score ln(f1/f0) for an arbitrary channel, where
/// f1 is the colluder's (x, y) density and f0 the innocent one. The
/// common factor P(x | p) cancels, so only the conditional y
/// probabilities enter. A structurally zero numerator with a positive
/// denominator is the certainly-innocent case; both zero means the
/// channel cannot produce this y at all.
pub fn generic_np_score(x: u8, y: u8, p: f64, channel: &CollusionChannel) -> Result<Score> {
    check_bit(x)?;
    check_bit(y)?;
    check_interior(p)?;
    let num = colluder_conditional(channel, x, y, p);
    let den = marginal_for(channel, y, p);
    if num == 0.0 {
        if den == 0.0 {
            return Err(Error::ZeroLikelihood { x, y });
        }
        return Ok(Score::CertainlyInnocent);
    }
    Ok(Score::Finite((num / den).ln()))
}

/// Conditional per-segment score moments at a single bias.
///
/// Innocent moments (mu0, sigma0) are conditional on the decoder emitting
/// a finite score; the excluded probability is `ci_mass0`. Guilty moments
/// are over the joint colluder (x, y) distribution, likewise conditioned
/// (for a matched decoder the excluded cells carry zero guilty mass, so
/// `ci_mass1` is zero and the conditioning is vacuous).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentMoments {
    pub mu0: f64,
    pub sigma0: f64,
    pub mu1: f64,
    pub sigma1: f64,
    pub ci_mass0: f64,
    pub ci_mass1: f64,
}

struct CellEval {
    f0: f64,
    f1: f64,
    g: Score,
}

/// The four (x, y) cells: both hypothesis densities and the score.
fn cell_table(
    score: &ScoreFunction,
    channel: &CollusionChannel,
    p: f64,
) -> Result<[CellEval; 4]> {
    score.validate()?;
    check_interior(p)?;
    let mut cells = Vec::with_capacity(4);
    for x in [0u8, 1u8] {
        let px = if x == 1 { p } else { 1.0 - p };
        for y in [0u8, 1u8] {
            let f0 = px * marginal_for(channel, y, p);
            let f1 = px * colluder_conditional(channel, x, y, p);
            let g = if f0 > 0.0 || f1 > 0.0 {
                score.evaluate(x, y, p)?
            } else {
                Score::CertainlyInnocent
            };
            cells.push(CellEval { f0, f1, g });
        }
    }
    Ok(cells.try_into().map_err(|_| Error::SchemeInvariant("cell table size"))?)
}

fn moments_from<F: Fn(&CellEval) -> f64>(cells: &[CellEval; 4], weight: F) -> (f64, f64, f64) {
    let mut mass = 0.0;
    let mut a = 0.0;
    let mut b = 0.0;
    let mut ci = 0.0;
    for cell in cells {
        let w = weight(cell);
        match cell.g {
            Score::Finite(g) => {
                mass += w;
                a += w * g;
                b += w * g * g;
            }
            Score::CertainlyInnocent => ci += w,
        }
    }
    if mass == 0.0 {
        return (0.0, 0.0, ci);
    }
    let mu = a / mass;
    let var = (b / mass - mu * mu).max(0.0);
    (mu, var.sqrt(), ci)
}

/// Exact moments at a single bias by enumeration over the four cells.
pub fn segment_moments(
    score: &ScoreFunction,
    channel: &CollusionChannel,
    p: f64,
) -> Result<SegmentMoments> {
    let cells = cell_table(score, channel, p)?;
    let (mu0, sigma0, ci_mass0) = moments_from(&cells, |c| c.f0);
    let (mu1, sigma1, ci_mass1) = moments_from(&cells, |c| c.f1);
    Ok(SegmentMoments { mu0, sigma0, mu1, sigma1, ci_mass0, ci_mass1 })
}

/// Moments averaged over the bias distribution. Each moment is its own
/// quadrature of the corresponding cell-mass numerator; ratios are taken
/// after integration so conditioning composes correctly with averaging.
pub fn segment_moments_averaged(
    score: &ScoreFunction,
    channel: &CollusionChannel,
    dist: &BiasDistribution,
    tol: f64,
) -> Result<SegmentMoments> {
    score.validate()?;
    if let BiasDistribution::Fixed { p } = dist {
        return segment_moments(score, channel, *p);
    }
    let sum = |pick: fn(&CellEval) -> f64, weigh: fn(&CellEval, f64) -> f64| {
        let score = score.clone();
        let channel = channel.clone();
        move |p: f64| {
            let cells = match cell_table(&score, &channel, p) {
                Ok(c) => c,
                Err(_) => return 0.0,
            };
            cells.iter().map(|c| weigh(c, pick(c))).sum::<f64>()
        }
    };
    let finite = |c: &CellEval, w: f64| match c.g {
        Score::Finite(_) => w,
        Score::CertainlyInnocent => 0.0,
    };
    let ci = |c: &CellEval, w: f64| match c.g {
        Score::Finite(_) => 0.0,
        Score::CertainlyInnocent => w,
    };
    let wg = |c: &CellEval, w: f64| match c.g {
        Score::Finite(g) => w * g,
        Score::CertainlyInnocent => 0.0,
    };
    let wg2 = |c: &CellEval, w: f64| match c.g {
        Score::Finite(g) => w * g * g,
        Score::CertainlyInnocent => 0.0,
    };

    let m0 = bias_average(dist, sum(|c| c.f0, finite), tol)?;
    let a0 = bias_average(dist, sum(|c| c.f0, wg), tol)?;
    let b0 = bias_average(dist, sum(|c| c.f0, wg2), tol)?;
    let ci0 = bias_average(dist, sum(|c| c.f0, ci), tol)?;
    let m1 = bias_average(dist, sum(|c| c.f1, finite), tol)?;
    let a1 = bias_average(dist, sum(|c| c.f1, wg), tol)?;
    let b1 = bias_average(dist, sum(|c| c.f1, wg2), tol)?;
    let ci1 = bias_average(dist, sum(|c| c.f1, ci), tol)?;

    let ratio = |mass: f64, a: f64, b: f64| -> (f64, f64) {
        if mass <= 0.0 {
            return (0.0, 0.0);
        }
        let mu = a / mass;
        let var = (b / mass - mu * mu).max(0.0);
        (mu, var.sqrt())
    };
    let (mu0, sigma0) = ratio(m0, a0, b0);
    let (mu1, sigma1) = ratio(m1, a1, b1);
    Ok(SegmentMoments { mu0, sigma0, mu1, sigma1, ci_mass0: ci0, ci_mass1: ci1 })
}

/// Center and scale raw scores by the innocent moments: (s - mu0)/sigma0.
/// A degenerate segment (sigma0 = 0 carries no information) contributes
/// zero instead.
pub fn normalize_scores(raw: &[f64], moments: &SegmentMoments) -> Vec<f64> {
    if moments.sigma0 == 0.0 {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|s| (s - moments.mu0) / moments.sigma0).collect()
}
