//! Closed-form and quadrature-based performance predictions.
//!
//! Everything here answers "how long should tracing take" without running
//! a simulation: KL-divergence bounds on sequential test length, the
//! asymptotic code lengths of the score-threshold and group-testing
//! regimes, the per-segment mutual-information rate between one coalition
//! member's symbol and the pirate output, and the interleaving drift
//! integrals evaluated by direct quadrature. The latter deliberately
//! duplicates what `scoring::segment_moments_averaged` computes by cell
//! enumeration; the two routes are independent derivations of the same
//! quantities and the tests hold them to each other.

use crate::channel::CollusionChannel;
use crate::encoder::{bias_average, BiasDistribution};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::scoring::{colluder_conditional, marginal_for};
use serde::{Deserialize, Serialize};

/// Binary KL divergence d(a || b) in nats, with the 0 ln 0 = 0 convention.
/// A boundary b in {0, 1} is only meaningful when a sits on the same
/// boundary (the divergence is 0 there; anywhere else it is infinite).
pub fn kl_divergence(a: f64, b: f64) -> Result<f64> {
    for v in [a, b] {
        if !(0.0..=1.0).contains(&v) || !v.is_finite() {
            return Err(Error::KlBoundary { a, b });
        }
    }
    if (b == 0.0 && a != 0.0) || (b == 1.0 && a != 1.0) {
        return Err(Error::KlBoundary { a, b });
    }
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    Ok((term(a, b) + term(1.0 - a, 1.0 - b)).max(0.0))
}

/// Predicted sequential test lengths, in segments. A side is absent when
/// its boundary is: eps2' = 0 means no acquittal boundary and hence no
/// innocent-side prediction, eps1' = 0 the reverse. The approximate forms
/// drop the KL terms that are negligible for small epsilons; both are
/// reported because the gap is not quantified in general.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminationPrediction {
    pub expected_t_h0: Option<f64>,
    pub expected_t_h1: Option<f64>,
    pub approx_t_h0: Option<f64>,
    pub approx_t_h1: Option<f64>,
}

/// Expected termination time of a per-user sequential test with error
/// probabilities (eps1', eps2') and score drifts mu0 < 0 < mu1:
/// innocent users need d(eps1' || 1 - eps2')/(-mu0) segments, coalition
/// members d(eps2' || 1 - eps1')/mu1.
pub fn expected_termination(
    eps1p: f64,
    eps2p: f64,
    mu0: f64,
    mu1: f64,
) -> Result<TerminationPrediction> {
    if !(mu0 < 0.0 && mu1 > 0.0) || !mu0.is_finite() || !mu1.is_finite() {
        return Err(Error::DriftSigns { mu0, mu1 });
    }
    for (name, value) in [("eps1'", eps1p), ("eps2'", eps2p)] {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::EpsilonOutOfRange { name, value, range: "[0, 1)" });
        }
    }
    if eps1p == 0.0 && eps2p == 0.0 {
        return Err(Error::PredictionEpsilons);
    }
    let mut out = TerminationPrediction {
        expected_t_h0: None,
        expected_t_h1: None,
        approx_t_h0: None,
        approx_t_h1: None,
    };
    if eps1p > 0.0 {
        let approx = (1.0 / eps1p).ln() / mu1;
        // kl(0 || 1 - e) reduces to ln(1/e) analytically; using the
        // reduced form avoids the cancellation in 1 - (1 - e)
        out.expected_t_h1 = Some(if eps2p == 0.0 {
            approx
        } else {
            kl_divergence(eps2p, 1.0 - eps1p)? / mu1
        });
        out.approx_t_h1 = Some(approx);
    }
    if eps2p > 0.0 {
        let approx = (1.0 / eps2p).ln() / -mu0;
        out.expected_t_h0 = Some(if eps1p == 0.0 {
            approx
        } else {
            kl_divergence(eps1p, 1.0 - eps2p)? / -mu0
        });
        out.approx_t_h0 = Some(approx);
    }
    Ok(out)
}

/// Asymptotic code length of the non-adaptive symmetric-score scheme:
/// 2 c^2 ln n segments.
pub fn asymptotic_code_length(c: usize, n: usize) -> Result<f64> {
    if c == 0 {
        return Err(Error::EmptyCoalition);
    }
    if n < 2 {
        return Err(Error::UserCountTooSmall);
    }
    let c = c as f64;
    Ok(2.0 * c * c * (n as f64).ln())
}

/// Code lengths of the two group-testing variants at fixed design bias:
/// the simple decoder needs c ln n / (ln 2)^2 segments, joint decoding
/// c log2 n, a factor ln 2 fewer.
pub fn group_testing_lengths(c: usize, n: usize) -> Result<(f64, f64)> {
    if c == 0 {
        return Err(Error::EmptyCoalition);
    }
    if n < 2 {
        return Err(Error::UserCountTooSmall);
    }
    let ln2 = std::f64::consts::LN_2;
    let c = c as f64;
    let ln_n = (n as f64).ln();
    Ok((c * ln_n / (ln2 * ln2), c * ln_n / ln2))
}

/// Per-segment information rate I(X1; Y | P) averaged over the bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationRate {
    pub nats_per_segment: f64,
}

impl InformationRate {
    pub fn bits_per_segment(&self) -> f64 {
        self.nats_per_segment / std::f64::consts::LN_2
    }

    /// Information-theoretic lower bound on the segments needed to find
    /// one coalition member among n users: ln n over the rate.
    pub fn detection_length_bound(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::UserCountTooSmall);
        }
        Ok((n as f64).ln() / self.nats_per_segment)
    }
}

const MI_TOL: f64 = 1e-9;

/// Mutual information between one coalition member's symbol and the
/// pirate output, averaged over the bias distribution, in nats per
/// segment. For the matched Neyman-Pearson decoder this equals the guilty
/// drift mu1. A channel whose output is independent of the member's
/// symbol carries no information and is rejected.
pub fn mutual_info_rate(
    channel: &CollusionChannel,
    dist: &BiasDistribution,
) -> Result<InformationRate> {
    dist.validate()?;
    let per_bias = |p: f64| {
        let q = 1.0 - p;
        let mut info = 0.0;
        for x in [0u8, 1] {
            let px = if x == 1 { p } else { q };
            for y in [0u8, 1] {
                let joint = px * colluder_conditional(channel, x, y, p);
                if joint > 0.0 {
                    let product = px * marginal_for(channel, y, p);
                    info += joint * (joint / product).ln();
                }
            }
        }
        info.max(0.0)
    };
    let rate = bias_average(dist, per_bias, MI_TOL)?;
    if rate.abs() <= 1e-13 {
        return Err(Error::DegenerateChannel);
    }
    Ok(InformationRate { nats_per_segment: rate })
}

/// The interleaving drift quantities, by direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftIntegrals {
    /// I = integral over p of sqrt(p(1-p)) ln(1 + c/((c-1)^2 p(1-p))).
    pub i_value: f64,
    /// Innocent drift, arcsine-averaged; negative.
    pub mu0: f64,
    /// Guilty drift, arcsine-averaged; positive.
    pub mu1: f64,
}

const DRIFT_TOL: f64 = 1e-10;

/// Drift integrals of the interleaving attack under its matched
/// log-likelihood decoder, computed from the closed-form cell
/// probabilities rather than score-function enumeration. The identity
/// mu1 - mu0 = I/(pi c) ties the three quadratures together and is
/// verified on every call.
pub fn interleaving_drift_integrals(c: usize) -> Result<DriftIntegrals> {
    if c < 2 {
        return Err(Error::DriftIntegralSize);
    }
    let cf = c as f64;
    let g_mismatch = (-1.0 / cf).ln_1p();
    let cell_scores = move |p: f64| {
        let q = 1.0 - p;
        ((q / (cf * p)).ln_1p(), (p / (cf * q)).ln_1p())
    };

    let mu0 = quadrature::arcsine_average(
        |p| {
            let q = 1.0 - p;
            let (g11, g00) = cell_scores(p);
            p * p * g11 + 2.0 * p * q * g_mismatch + q * q * g00
        },
        DRIFT_TOL,
    )?;
    let mu1 = quadrature::arcsine_average(
        |p| {
            let q = 1.0 - p;
            let (g11, g00) = cell_scores(p);
            let pq_c = p * q / cf;
            let mismatch_mass = 2.0 * p * q * (cf - 1.0) / cf;
            (p * p + pq_c) * g11 + mismatch_mass * g_mismatch + (q * q + pq_c) * g00
        },
        DRIFT_TOL,
    )?;
    // plain-dp integral, taken through the same substitution that makes
    // the endpoint log singularity vanish against sqrt(p(1-p))
    let i_value = quadrature::integrate(
        |u| {
            let s = (std::f64::consts::PI * u).sin();
            let pq = s * s / 4.0;
            std::f64::consts::FRAC_PI_4 * s * s * (cf / ((cf - 1.0) * (cf - 1.0) * pq)).ln_1p()
        },
        0.0,
        1.0,
        DRIFT_TOL,
    )?;

    let identity_gap = (mu1 - mu0) - i_value / (std::f64::consts::PI * cf);
    if identity_gap.abs() > 1e-9 {
        return Err(Error::QuadratureInconsistent(format!(
            "drift gap vs integral identity violated at c = {c}: residual {identity_gap:e}"
        )));
    }
    Ok(DriftIntegrals { i_value, mu0, mu1 })
}
