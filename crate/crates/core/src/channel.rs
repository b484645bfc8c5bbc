//! Collusion channels.
//!
//! A coalition of c pirates sees z of its members holding symbol 1 in a
//! segment and emits 1 with probability theta_z. The marking condition pins
//! the endpoints: theta_0 = 0 and theta_c = 1, i.e. a unanimous coalition
//! must output its only available symbol. Everything in between is the
//! attack's choice; the five standard strategies are provided.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Named pirate strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// theta_z = z/c: output a uniformly chosen member's symbol.
    Interleaving,
    /// theta_z = 1 whenever any member holds a 1.
    AllOne,
    /// Output the symbol the majority holds; ties flip a fair coin.
    Majority,
    /// Output the rarer symbol where the marking condition allows it.
    Minority,
    /// theta_z = 1/2 on every mixed count.
    Coin,
}

impl AttackKind {
    pub const ALL: [AttackKind; 5] = [
        AttackKind::Interleaving,
        AttackKind::AllOne,
        AttackKind::Majority,
        AttackKind::Minority,
        AttackKind::Coin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::Interleaving => "interleaving",
            AttackKind::AllOne => "all_one",
            AttackKind::Majority => "majority",
            AttackKind::Minority => "minority",
            AttackKind::Coin => "coin",
        }
    }
}

impl std::str::FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interleaving" => Ok(AttackKind::Interleaving),
            "all_one" => Ok(AttackKind::AllOne),
            "majority" => Ok(AttackKind::Majority),
            "minority" => Ok(AttackKind::Minority),
            "coin" => Ok(AttackKind::Coin),
            other => Err(Error::InvalidConfig(format!("unknown attack '{other}'"))),
        }
    }
}

/// A memoryless channel: theta[z] is the probability of emitting 1 when z
/// of the c coalition symbols are 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollusionChannel {
    theta: Vec<f64>,
    c: usize,
}

impl CollusionChannel {
    /// Build from an explicit theta vector of length c + 1. Enforces the
    /// marking condition exactly: theta[0] == 0.0 and theta[c] == 1.0.
    pub fn from_theta(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::EmptyCoalition);
        }
        let c = theta.len() - 1;
        for (z, &t) in theta.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) || !t.is_finite() {
                return Err(Error::ThetaOutOfRange { z, value: t });
            }
        }
        if theta[0] != 0.0 || theta[c] != 1.0 {
            return Err(Error::MarkingViolated);
        }
        Ok(CollusionChannel { theta, c })
    }

    /// The channel a named attack induces at coalition size c.
    pub fn make_attack(kind: AttackKind, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::EmptyCoalition);
        }
        let half = c as f64 / 2.0;
        let theta = (0..=c)
            .map(|z| {
                let zf = z as f64;
                if z == 0 {
                    return 0.0;
                }
                if z == c {
                    return 1.0;
                }
                match kind {
                    AttackKind::Interleaving => zf / c as f64,
                    AttackKind::AllOne => 1.0,
                    AttackKind::Majority => {
                        if zf > half {
                            1.0
                        } else if zf < half {
                            0.0
                        } else {
                            0.5
                        }
                    }
                    AttackKind::Minority => {
                        if zf < half {
                            1.0
                        } else if zf > half {
                            0.0
                        } else {
                            0.5
                        }
                    }
                    AttackKind::Coin => 0.5,
                }
            })
            .collect();
        Ok(CollusionChannel { theta, c })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// P(Y = y | Z = z) without branching on y at the call site.
    #[inline]
    pub(crate) fn emission(&self, z: usize, y: u8) -> f64 {
        if y == 1 {
            self.theta[z]
        } else {
            1.0 - self.theta[z]
        }
    }
}

/// Number of segments an accused user keeps contributing after the
/// accusation lands: the decision at segment i takes effect at i + b + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub b: u64,
}

impl DelaySpec {
    pub fn immediate() -> Self {
        DelaySpec { b: 0 }
    }
}

/// P(Y = 1 | p) when every coalition symbol is Bernoulli(p): the binomial
/// mixture sum_z C(c, z) p^z (1-p)^{c-z} theta_z. Terms are built by the
/// ratio recurrence to avoid factorials.
pub fn marginal_output_prob(channel: &CollusionChannel, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::ProbabilityOutOfRange { name: "p", value: p });
    }
    let c = channel.c;
    if p == 0.0 {
        return Ok(channel.theta[0]);
    }
    if p == 1.0 {
        return Ok(channel.theta[c]);
    }
    let q = 1.0 - p;
    let ratio = p / q;
    // t_z = C(c, z) p^z q^{c-z}, advanced by t_{z+1} = t_z (c-z)/(z+1) ratio
    let mut t = q.powi(c as i32);
    let mut acc = 0.0;
    for z in 0..=c {
        acc += t * channel.theta[z];
        if z < c {
            t *= (c - z) as f64 / (z + 1) as f64 * ratio;
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// One pirate emission. Consumes exactly one uniform from `rng` regardless
/// of the tally, so interleaved consumers stay aligned with the stream.
pub fn pirate_output<R: Rng>(
    channel: &CollusionChannel,
    colluder_bits: &[u8],
    rng: &mut R,
) -> Result<u8> {
    if colluder_bits.is_empty() {
        return Err(Error::EmptyActiveCoalition);
    }
    if colluder_bits.len() != channel.c {
        return Err(Error::CoalitionBitsMismatch { got: colluder_bits.len(), c: channel.c });
    }
    let mut z = 0usize;
    for &bit in colluder_bits {
        match bit {
            0 => {}
            1 => z += 1,
            other => return Err(Error::NotABit(other)),
        }
    }
    let u: f64 = rng.random();
    Ok(u8::from(u < channel.theta[z]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interleaving_theta_is_linear() {
        let ch = CollusionChannel::make_attack(AttackKind::Interleaving, 10).unwrap();
        assert!((ch.theta()[7] - 0.7).abs() < 1e-15);
        assert_eq!(ch.theta()[0], 0.0);
        assert_eq!(ch.theta()[10], 1.0);
    }

    #[test]
    fn all_one_theta_table() {
        let ch = CollusionChannel::make_attack(AttackKind::AllOne, 4).unwrap();
        assert_eq!(ch.theta(), &[0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn majority_and_minority_handle_even_ties() {
        let maj = CollusionChannel::make_attack(AttackKind::Majority, 4).unwrap();
        assert_eq!(maj.theta(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
        let min = CollusionChannel::make_attack(AttackKind::Minority, 4).unwrap();
        assert_eq!(min.theta(), &[0.0, 1.0, 0.5, 0.0, 1.0]);
    }

    #[test]
    fn coin_theta_is_half_on_mixed_counts() {
        let ch = CollusionChannel::make_attack(AttackKind::Coin, 3).unwrap();
        assert_eq!(ch.theta(), &[0.0, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn from_theta_enforces_marking() {
        assert!(matches!(
            CollusionChannel::from_theta(vec![0.1, 0.5, 1.0]),
            Err(Error::MarkingViolated)
        ));
        assert!(matches!(
            CollusionChannel::from_theta(vec![0.0, 0.5, 0.9]),
            Err(Error::MarkingViolated)
        ));
        assert!(matches!(
            CollusionChannel::from_theta(vec![0.0, 1.5, 1.0]),
            Err(Error::ThetaOutOfRange { z: 1, .. })
        ));
        assert!(CollusionChannel::from_theta(vec![0.0, 0.3, 1.0]).is_ok());
    }

    #[test]
    fn interleaving_marginal_equals_p() {
        let ch = CollusionChannel::make_attack(AttackKind::Interleaving, 7).unwrap();
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let m = marginal_output_prob(&ch, p).unwrap();
            assert!((m - p).abs() < 1e-12, "p = {p}, m = {m}");
        }
    }

    #[test]
    fn all_one_marginal_matches_closed_form() {
        let ch = CollusionChannel::make_attack(AttackKind::AllOne, 10).unwrap();
        let p = std::f64::consts::LN_2 / 10.0;
        let m = marginal_output_prob(&ch, p).unwrap();
        let expect = 1.0 - (1.0 - p).powi(10);
        assert!((m - expect).abs() < 1e-12);
        assert!((m - 0.5124395610).abs() < 1e-9);
    }

    #[test]
    fn coin_marginal_by_exhaustive_sum() {
        let ch = CollusionChannel::make_attack(AttackKind::Coin, 3).unwrap();
        let p: f64 = 0.3;
        // enumerate all 8 symbol triples
        let mut expect = 0.0;
        for bits in 0u8..8 {
            let z = bits.count_ones() as usize;
            let prob = p.powi(z as i32) * (1.0 - p).powi(3 - z as i32);
            expect += prob * ch.theta()[z];
        }
        let m = marginal_output_prob(&ch, p).unwrap();
        assert!((m - expect).abs() < 1e-15);
        assert!((marginal_output_prob(&ch, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginal_monotone_for_monotone_attacks() {
        // minority is excluded deliberately: its theta is decreasing on the
        // interior, and e.g. m(0.5) = 0.5 > m(0.7) at c = 5.
        for kind in [AttackKind::Interleaving, AttackKind::AllOne, AttackKind::Majority, AttackKind::Coin] {
            for c in [2usize, 3, 5, 10] {
                let ch = CollusionChannel::make_attack(kind, c).unwrap();
                let mut prev = 0.0;
                for k in 0..=200 {
                    let p = k as f64 / 200.0;
                    let m = marginal_output_prob(&ch, p).unwrap();
                    assert!(
                        m >= prev - 1e-12,
                        "{:?} c={c}: m({p}) = {m} < {prev}",
                        kind
                    );
                    prev = m;
                }
            }
        }
    }

    #[test]
    fn minority_marginal_is_not_monotone() {
        let ch = CollusionChannel::make_attack(AttackKind::Minority, 5).unwrap();
        let at_half = marginal_output_prob(&ch, 0.5).unwrap();
        let at_seven = marginal_output_prob(&ch, 0.7).unwrap();
        assert!((at_half - 0.5).abs() < 1e-12);
        assert!((at_seven - 0.328720).abs() < 1e-6);
        assert!(at_half > at_seven);
    }

    #[test]
    fn pirate_output_frequency_matches_theta() {
        let ch = CollusionChannel::make_attack(AttackKind::Interleaving, 10).unwrap();
        let bits = [1u8, 1, 1, 1, 1, 1, 1, 0, 0, 0]; // z = 7
        let mut rng = ChaCha8Rng::from_seed([9; 32]);
        let trials = 100_000;
        let ones: u64 = (0..trials)
            .map(|_| pirate_output(&ch, &bits, &mut rng).unwrap() as u64)
            .sum();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.7).abs() < 0.005, "freq = {freq}");
    }

    #[test]
    fn pirate_output_always_consumes_one_uniform() {
        // deterministic tallies (z = 0, z = c) must still advance the rng
        let ch = CollusionChannel::make_attack(AttackKind::Majority, 4).unwrap();
        let mut a = ChaCha8Rng::from_seed([3; 32]);
        let mut b = ChaCha8Rng::from_seed([3; 32]);
        let y0 = pirate_output(&ch, &[0, 0, 0, 0], &mut a).unwrap();
        let y1 = pirate_output(&ch, &[1, 1, 1, 1], &mut a).unwrap();
        assert_eq!(y0, 0);
        assert_eq!(y1, 1);
        let _: f64 = b.random();
        let _: f64 = b.random();
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn pirate_output_validates_inputs() {
        let ch = CollusionChannel::make_attack(AttackKind::Coin, 3).unwrap();
        let mut rng = ChaCha8Rng::from_seed([0; 32]);
        assert!(matches!(pirate_output(&ch, &[], &mut rng), Err(Error::EmptyActiveCoalition)));
        assert!(matches!(
            pirate_output(&ch, &[1, 0], &mut rng),
            Err(Error::CoalitionBitsMismatch { got: 2, c: 3 })
        ));
        assert!(matches!(pirate_output(&ch, &[1, 0, 2], &mut rng), Err(Error::NotABit(2))));
    }

    #[test]
    fn stream_helper_reproduces_emissions() {
        let ch = CollusionChannel::make_attack(AttackKind::Coin, 2).unwrap();
        let mut a = seeding::stream(77, &[seeding::tags::CHANNEL]);
        let mut b = seeding::stream(77, &[seeding::tags::CHANNEL]);
        let ya: Vec<u8> =
            (0..50).map(|_| pirate_output(&ch, &[1, 0], &mut a).unwrap()).collect();
        let yb: Vec<u8> =
            (0..50).map(|_| pirate_output(&ch, &[1, 0], &mut b).unwrap()).collect();
        assert_eq!(ya, yb);
    }

    proptest! {
        #[test]
        fn make_attack_satisfies_marking_and_range(
            kind_idx in 0usize..5,
            c in 1usize..40,
        ) {
            let kind = AttackKind::ALL[kind_idx];
            let ch = CollusionChannel::make_attack(kind, c).unwrap();
            prop_assert_eq!(ch.theta().len(), c + 1);
            prop_assert_eq!(ch.theta()[0], 0.0);
            prop_assert_eq!(ch.theta()[c], 1.0);
            for &t in ch.theta() {
                prop_assert!((0.0..=1.0).contains(&t));
            }
        }

        #[test]
        fn marginal_stays_in_unit_interval(
            kind_idx in 0usize..5,
            c in 1usize..30,
            p in 0.0f64..=1.0,
        ) {
            let kind = AttackKind::ALL[kind_idx];
            let ch = CollusionChannel::make_attack(kind, c).unwrap();
            let m = marginal_output_prob(&ch, p).unwrap();
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }
}
