//! Bias-vector and code generation.
//!
//! A code is built in two stages: a bias p_i is drawn per segment from the
//! configured distribution, then every user's symbol in segment i is an
//! independent Bernoulli(p_i) bit. Biases follow the arcsine law
//! F(p) = (2/pi) arcsin sqrt(p), whose density concentrates near 0 and 1;
//! that shape is what makes bias-based codes collusion resistant. A fixed
//! bias variant covers the group-testing regime where p ~ (ln 2)/c.
//!
//! Sampling is inverse-CDF throughout: exact, branch-free, and
//! reproducible. Streams are derived per purpose (bias vs. symbols) and per
//! user, so a code can be regenerated without touching the bias draws and
//! individual rows can be re-randomized independently.

use crate::error::{Error, Result};
use crate::model::{BiasVector, CodeMatrix};
use crate::seeding::{self, tags};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Distribution of the per-segment bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiasDistribution {
    /// F(p) = (2/pi) arcsin sqrt(p) on (0,1).
    Arcsine,
    /// Arcsine conditioned on [t, 1-t], 0 < t < 1/2.
    ArcsineWithCutoff { t: f64 },
    /// Degenerate distribution at p.
    Fixed { p: f64 },
}

impl BiasDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BiasDistribution::Arcsine => Ok(()),
            BiasDistribution::ArcsineWithCutoff { t } => {
                if t > 0.0 && t < 0.5 {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution("cutoff t must satisfy 0 < t < 1/2"))
                }
            }
            BiasDistribution::Fixed { p } => {
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution("fixed bias p must satisfy 0 < p < 1"))
                }
            }
        }
    }
}

/// Arcsine CDF F(p) = (2/pi) arcsin sqrt(p), clamped to [0,1] inputs.
pub fn arcsine_cdf(p: f64) -> f64 {
    (2.0 / std::f64::consts::PI) * p.clamp(0.0, 1.0).sqrt().asin()
}

/// Inverse arcsine CDF: u in [0,1] maps to sin^2(pi u / 2).
pub fn arcsine_inverse_cdf(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::UniformOutOfRange(u));
    }
    let s = (std::f64::consts::FRAC_PI_2 * u).sin();
    Ok(s * s)
}

pub(crate) fn draw(dist: &BiasDistribution, rng: &mut ChaCha8Rng) -> f64 {
    match *dist {
        BiasDistribution::Arcsine => {
            let u: f64 = rng.random();
            let s = (std::f64::consts::FRAC_PI_2 * u).sin();
            s * s
        }
        BiasDistribution::ArcsineWithCutoff { t } => {
            let lo = arcsine_cdf(t);
            let hi = arcsine_cdf(1.0 - t);
            let u: f64 = rng.random();
            let u = lo + u * (hi - lo);
            let s = (std::f64::consts::FRAC_PI_2 * u).sin();
            (s * s).clamp(t, 1.0 - t)
        }
        BiasDistribution::Fixed { p } => p,
    }
}

/// Stream of one user's uniform variates, one per segment, derived from a
/// seed. The simulation draws these lazily segment by segment; drawing all
/// of them up front through [`generate_code`] produces the same symbols.
pub(crate) fn user_symbol_stream(seed: u64, user: usize) -> ChaCha8Rng {
    seeding::stream(seed, &[tags::USER, user as u64])
}

pub(crate) fn bias_stream(seed: u64) -> ChaCha8Rng {
    seeding::stream(seed, &[tags::BIAS])
}

/// E[f(P)] under the bias distribution, to absolute tolerance `tol`.
/// The arcsine weight is folded in by the substitution p = sin^2(pi u / 2),
/// which removes the endpoint singularity; the fixed variant is a point
/// evaluation and never fails.
pub(crate) fn bias_average<F: Fn(f64) -> f64>(
    dist: &BiasDistribution,
    f: F,
    tol: f64,
) -> Result<f64> {
    dist.validate()?;
    match *dist {
        BiasDistribution::Fixed { p } => Ok(f(p)),
        BiasDistribution::Arcsine => crate::quadrature::arcsine_average(f, tol),
        BiasDistribution::ArcsineWithCutoff { t } => {
            let lo = arcsine_cdf(t);
            let hi = arcsine_cdf(1.0 - t);
            let mass = hi - lo;
            let g = |u: f64| {
                let s = (std::f64::consts::FRAC_PI_2 * u).sin();
                f(s * s)
            };
            Ok(crate::quadrature::integrate(g, lo, hi, tol * mass)? / mass)
        }
    }
}

/// Draw a length-`len` bias vector. Deterministic per (dist, len, seed);
/// the fixed variant consumes no randomness.
pub fn sample_bias_vector(dist: &BiasDistribution, len: usize, seed: u64) -> Result<BiasVector> {
    dist.validate()?;
    if len == 0 {
        return Err(Error::EmptyBias);
    }
    let mut rng = bias_stream(seed);
    let values = (0..len).map(|_| draw(dist, &mut rng)).collect();
    BiasVector::new(values)
}

/// Generate the n-by-len code: entry (j, i) is Bernoulli(p_i), independent
/// across users and segments. Deterministic per (bias, n, seed), with an
/// independent substream per user row.
pub fn generate_code(bias: &BiasVector, n: usize, seed: u64) -> Result<CodeMatrix> {
    if n == 0 {
        return Err(Error::EmptyCode);
    }
    let mut rows = Vec::with_capacity(n);
    for user in 1..=n {
        let mut rng = user_symbol_stream(seed, user);
        let row = bias
            .values()
            .iter()
            .map(|&p| u8::from(rng.random::<f64>() < p))
            .collect();
        rows.push(row);
    }
    CodeMatrix::new(rows)
}

/// Write (bias, code) as columnar text: a `len n` header, then one line per
/// segment holding the bias followed by every user's bit. Biases print in
/// shortest round-trip form, so reading the export back reproduces the
/// exact doubles and bits.
pub fn write_code_export<W: Write>(bias: &BiasVector, code: &CodeMatrix, out: &mut W) -> Result<()> {
    if bias.len() != code.len() {
        return Err(Error::LengthMismatch { bias_len: bias.len(), code_len: code.len() });
    }
    writeln!(out, "{} {}", bias.len(), code.n())?;
    for i in 1..=bias.len() {
        write!(out, "{}", bias.segment(i))?;
        for j in 1..=code.n() {
            write!(out, " {}", code.bit(j, i))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read the columnar format written by [`write_code_export`].
pub fn read_code_export<R: BufRead>(input: R) -> Result<(BiasVector, CodeMatrix)> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedExport { line: 1, reason: "missing header".into() })?;
    let header = header?;
    let mut parts = header.split_whitespace();
    let parse_usize = |tok: Option<&str>, line: usize| -> Result<usize> {
        tok.ok_or_else(|| Error::MalformedExport { line, reason: "short line".into() })?
            .parse()
            .map_err(|e| Error::MalformedExport { line, reason: format!("{e}") })
    };
    let len = parse_usize(parts.next(), 1)?;
    let n = parse_usize(parts.next(), 1)?;

    let mut biases = Vec::with_capacity(len);
    let mut rows = vec![Vec::with_capacity(len); n];
    for _ in 0..len {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| Error::MalformedExport { line: len + 1, reason: "missing segment line".into() })?;
        let line_no = idx + 1;
        let line = line?;
        let mut toks = line.split_whitespace();
        let p: f64 = toks
            .next()
            .ok_or_else(|| Error::MalformedExport { line: line_no, reason: "empty line".into() })?
            .parse()
            .map_err(|e| Error::MalformedExport { line: line_no, reason: format!("{e}") })?;
        biases.push(p);
        for row in rows.iter_mut() {
            let bit: u8 = toks
                .next()
                .ok_or_else(|| Error::MalformedExport { line: line_no, reason: "short line".into() })?
                .parse()
                .map_err(|e| Error::MalformedExport { line: line_no, reason: format!("{e}") })?;
            row.push(bit);
        }
        if toks.next().is_some() {
            return Err(Error::MalformedExport { line: line_no, reason: "trailing tokens".into() });
        }
    }
    Ok((BiasVector::new(biases)?, CodeMatrix::new(rows)?))
}
