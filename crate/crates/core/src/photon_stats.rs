//! Photon-number statistics of two SPDC sources seen through lossy channels.
//!
//! Each source emits `n` pairs with probability `(1-ε)εⁿ`. One photon of every
//! pair travels to the Bell state measurement and survives its channel
//! independently with probability `η`, so the number `k` that arrives is
//! binomially thinned. Everything downstream is built from the joint law
//! `P(k|n, l|m)` of the two sources and from the closed forms for the
//! zero- and one-arrival probabilities `P0` and `P1`.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Largest `n` for which binomial coefficients are formed exactly in integers.
const EXACT_BINOMIAL_MAX: u64 = 60;

/// SPDC source described by its conversion efficiency `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SourceParams {
    epsilon: f64,
}

impl SourceParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::domain("epsilon", epsilon, "must satisfy 0 <= epsilon < 1"));
        }
        Ok(Self { epsilon })
    }

    /// Source whose single-pair probability is `p`, on the weak branch `ε ≤ 1/2`.
    pub fn from_pair_probability(p: f64) -> Result<Self> {
        Self::new(epsilon_from_p(p)?)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn pair_probability(&self) -> f64 {
        p_from_epsilon(self.epsilon)
    }

    /// Mean pair number `ε/(1-ε)`.
    pub fn mean_pairs(&self) -> f64 {
        self.epsilon / (1.0 - self.epsilon)
    }
}

/// Channel transmission probability `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ChannelParams {
    eta: f64,
}

impl ChannelParams {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain("eta", eta, "must satisfy 0 <= eta <= 1"));
        }
        Ok(Self { eta })
    }

    /// Channel with the given insertion loss in dB (positive numbers attenuate).
    pub fn from_loss_db(loss_db: f64) -> Result<Self> {
        if !(loss_db >= 0.0) {
            return Err(Error::domain("loss_db", loss_db, "must be non-negative"));
        }
        Self::new(10f64.powf(-loss_db / 10.0))
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Two sources and the two channels feeding the Bell state measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapScenario {
    #[serde(rename = "eps_a")]
    pub source_a: SourceParams,
    #[serde(rename = "eps_b")]
    pub source_b: SourceParams,
    #[serde(rename = "eta_a")]
    pub channel_a: ChannelParams,
    #[serde(rename = "eta_b")]
    pub channel_b: ChannelParams,
}

impl SwapScenario {
    pub fn new(eps_a: f64, eps_b: f64, eta_a: f64, eta_b: f64) -> Result<Self> {
        Ok(Self {
            source_a: SourceParams::new(eps_a)?,
            source_b: SourceParams::new(eps_b)?,
            channel_a: ChannelParams::new(eta_a)?,
            channel_b: ChannelParams::new(eta_b)?,
        })
    }

    pub fn eps_a(&self) -> f64 {
        self.source_a.epsilon
    }

    pub fn eps_b(&self) -> f64 {
        self.source_b.epsilon
    }

    pub fn eta_a(&self) -> f64 {
        self.channel_a.eta
    }

    pub fn eta_b(&self) -> f64 {
        self.channel_b.eta
    }

    /// The same scenario with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            source_a: self.source_b,
            source_b: self.source_a,
            channel_a: self.channel_b,
            channel_b: self.channel_a,
        }
    }

    /// `1 - ε_A(1-η_A)`, the generating-function denominator for side A.
    pub(crate) fn damping_a(&self) -> f64 {
        1.0 - self.eps_a() * (1.0 - self.eta_a())
    }

    pub(crate) fn damping_b(&self) -> f64 {
        1.0 - self.eps_b() * (1.0 - self.eta_b())
    }
}

/// `(1-ε)εⁿ`, the probability that the source emits exactly `n` pairs.
pub fn pair_number_pmf(source: SourceParams, n: u64) -> f64 {
    (1.0 - source.epsilon) * powu(source.epsilon, n)
}

pub fn p_from_epsilon(eps: f64) -> f64 {
    (1.0 - eps) * eps
}

/// Inverse of [`p_from_epsilon`] on the branch `ε ∈ [0, 1/2]`.
pub fn epsilon_from_p(p: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&p) {
        return Err(Error::domain("p", p, "pair probability must lie in [0, 1/4]"));
    }
    Ok((1.0 - (1.0 - 4.0 * p).sqrt()) / 2.0)
}

/// Binomial coefficient `C(n, k)` as a float; exact for `n <= 60`.
pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_MAX {
        let k = k.min(n - k);
        let mut c: u64 = 1;
        for i in 0..k {
            // c * (n - i) / (i + 1) stays integral at every step
            c = c * (n - i) / (i + 1);
        }
        c as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// `C(n,k) ηᵏ (1-η)ⁿ⁻ᵏ`, the chance that `k` of `n` photons survive the channel.
pub fn binomial_pmf(n: u64, k: u64, eta: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if eta == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if eta == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= EXACT_BINOMIAL_MAX {
        binomial_coefficient(n, k) * powu(eta, k) * powu(1.0 - eta, n - k)
    } else {
        (ln_binomial(n, k) + k as f64 * eta.ln() + (n - k) as f64 * (1.0 - eta).ln()).exp()
    }
}

/// Probability that one source emits `n` pairs of which `k` photons arrive.
pub fn arrival_pmf(source: SourceParams, channel: ChannelParams, k: u64, n: u64) -> f64 {
    pair_number_pmf(source, n) * binomial_pmf(n, k, channel.eta)
}

/// `P(k|n, l|m)`: source A emits `n` pairs with `k` arrivals, source B `m` with `l`.
pub fn joint_arrival_pmf(scenario: &SwapScenario, k: u64, n: u64, l: u64, m: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain("k", k as f64, "arrivals exceed emitted pairs on side A"));
    }
    if l > m {
        return Err(Error::domain("l", l as f64, "arrivals exceed emitted pairs on side B"));
    }
    Ok(arrival_pmf(scenario.source_a, scenario.channel_a, k, n)
        * arrival_pmf(scenario.source_b, scenario.channel_b, l, m))
}

/// `P0`: no photon reaches the Bell state measurement.
pub fn p_zero_arrivals(scenario: &SwapScenario) -> f64 {
    (1.0 - scenario.eps_a()) * (1.0 - scenario.eps_b()) / (scenario.damping_a() * scenario.damping_b())
}

/// `P1`: exactly one photon reaches the Bell state measurement.
pub fn p_one_arrival(scenario: &SwapScenario) -> f64 {
    let da = scenario.damping_a();
    let db = scenario.damping_b();
    let xa = scenario.eps_a() * scenario.eta_a();
    let xb = scenario.eps_b() * scenario.eta_b();
    (1.0 - scenario.eps_a()) * (1.0 - scenario.eps_b()) * (xa / (da * da * db) + xb / (da * db * db))
}

/// Probability mass of one source beyond `n_max` pairs, `ε^(n_max+1)`.
pub fn pair_tail_mass(source: SourceParams, n_max: u64) -> f64 {
    powu(source.epsilon, n_max + 1)
}

/// Bound on the probability mass a double sum truncated at `n, m <= n_max` omits.
pub fn truncation_tail_bound(scenario: &SwapScenario, n_max: u64) -> f64 {
    let tail = |s: SourceParams| pair_tail_mass(s, n_max) / (1.0 - s.epsilon);
    tail(scenario.source_a) + tail(scenario.source_b)
}

/// Smallest `n_max` for which both geometric tails fall below `tol`.
pub fn default_truncation(scenario: &SwapScenario, tol: f64) -> u64 {
    let mut n_max = 1;
    while truncation_tail_bound(scenario, n_max) >= tol {
        n_max += 1;
    }
    n_max
}

fn powu(x: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(n) => x.powi(n),
        Err(_) => x.powf(n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scenario(ea: f64, eb: f64, ha: f64, hb: f64) -> SwapScenario {
        SwapScenario::new(ea, eb, ha, hb).unwrap()
    }

    // Brute-force double sums of the arrival law; independent of the closed forms.
    fn summed_p0(s: &SwapScenario, n_max: u64) -> f64 {
        let mut total = 0.0;
        for n in 0..=n_max {
            for m in 0..=n_max {
                total += joint_arrival_pmf(s, 0, n, 0, m).unwrap();
            }
        }
        total
    }

    fn summed_p1(s: &SwapScenario, n_max: u64) -> f64 {
        let mut total = 0.0;
        for n in 0..=n_max {
            for m in 0..=n_max {
                if n >= 1 {
                    total += joint_arrival_pmf(s, 1, n, 0, m).unwrap();
                }
                if m >= 1 {
                    total += joint_arrival_pmf(s, 0, n, 1, m).unwrap();
                }
            }
        }
        total
    }

    #[test]
    fn pair_number_pmf_examples() {
        assert_eq!(pair_number_pmf(SourceParams::new(0.0).unwrap(), 0), 1.0);
        assert_eq!(pair_number_pmf(SourceParams::new(0.5).unwrap(), 2), 0.125);
        let s = SourceParams::new(0.2764).unwrap();
        assert_relative_eq!(pair_number_pmf(s, 1), p_from_epsilon(0.2764), max_relative = 1e-15);
    }

    #[test]
    fn epsilon_and_p_conversions() {
        assert_eq!(epsilon_from_p(0.0).unwrap(), 0.0);
        assert_eq!(epsilon_from_p(0.25).unwrap(), 0.5);
        let eps = epsilon_from_p(0.2).unwrap();
        assert!((eps - 0.27639).abs() < 1e-5);
        assert!(((1.0 - eps) * eps - 0.2).abs() < 1e-12);
        assert_eq!(p_from_epsilon(0.0), 0.0);
        assert_eq!(p_from_epsilon(0.5), 0.25);
        assert_relative_eq!(p_from_epsilon(0.1), 0.09, max_relative = 1e-15);
        assert!(epsilon_from_p(0.26).is_err());
        assert!(epsilon_from_p(-1e-9).is_err());
    }

    #[test]
    fn type_invariants_are_enforced() {
        assert!(SourceParams::new(1.0).is_err());
        assert!(SourceParams::new(-0.1).is_err());
        assert!(SourceParams::new(f64::NAN).is_err());
        assert!(ChannelParams::new(1.01).is_err());
        assert!(ChannelParams::new(1.0).is_ok());
        assert_relative_eq!(
            ChannelParams::from_loss_db(50.0).unwrap().eta(),
            1e-5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn binomials_switch_to_log_gamma_smoothly() {
        assert_eq!(binomial_coefficient(60, 30), 118264581564861424.0);
        assert_relative_eq!(binomial_coefficient(61, 30), 232714176627630544.0, max_relative = 1e-12);
        assert_relative_eq!(binomial_coefficient(200, 3), 1313400.0, max_relative = 1e-12);
        let total: f64 = (0..=150).map(|k| binomial_pmf(150, k, 0.37)).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn joint_arrival_examples() {
        let s = scenario(0.3, 0.15, 0.4, 0.7);
        assert_relative_eq!(
            joint_arrival_pmf(&s, 0, 0, 0, 0).unwrap(),
            0.7 * 0.85,
            max_relative = 1e-15
        );

        let lossless = scenario(0.3, 0.15, 1.0, 1.0);
        assert_relative_eq!(
            joint_arrival_pmf(&lossless, 1, 1, 1, 1).unwrap(),
            0.7 * 0.85 * 0.3 * 0.15,
            max_relative = 1e-15
        );

        // (1-εA)(1-εB) εA² εB · C(2,1) ηA (1-ηA) · C(1,0) (1-ηB)
        let s = scenario(0.1, 0.1, 0.5, 0.8);
        let by_hand = 0.9 * 0.9 * 0.01 * 0.1 * 2.0 * 0.5 * 0.5 * 0.2;
        assert_relative_eq!(
            joint_arrival_pmf(&s, 1, 2, 0, 1).unwrap(),
            by_hand,
            max_relative = 1e-14
        );
        assert_relative_eq!(by_hand, 8.1e-5, max_relative = 1e-12);

        assert!(joint_arrival_pmf(&s, 3, 2, 0, 0).is_err());
        assert!(joint_arrival_pmf(&s, 0, 0, 2, 1).is_err());
    }

    #[test]
    fn p_zero_examples() {
        let s = scenario(0.3, 0.2, 1.0, 1.0);
        assert_relative_eq!(p_zero_arrivals(&s), 0.7 * 0.8, max_relative = 1e-15);
        assert_eq!(p_zero_arrivals(&scenario(0.0, 0.0, 0.4, 0.9)), 1.0);
        let s = scenario(0.2, 0.2, 0.5, 0.5);
        assert!((p_zero_arrivals(&s) - summed_p0(&s, 200)).abs() <= 1e-12);
    }

    #[test]
    fn p_one_examples() {
        assert_eq!(p_one_arrival(&scenario(0.0, 0.0, 0.5, 0.5)), 0.0);

        // Source B dark, channel A lossless: exactly one arrival iff A emits one pair.
        for eps in [0.05, 0.2, 0.45] {
            let s = scenario(eps, 0.0, 1.0, 0.3);
            assert_relative_eq!(p_one_arrival(&s), eps * (1.0 - eps), max_relative = 1e-14);
            assert!((p_one_arrival(&s) - summed_p1(&s, 200)).abs() <= 1e-12);
        }

        let s = scenario(0.2, 0.2, 0.5, 0.5);
        assert!((p_one_arrival(&s) - summed_p1(&s, 200)).abs() <= 1e-12);
    }

    #[test]
    fn marginal_recovers_pair_number_law() {
        let s = scenario(0.35, 0.2, 0.6, 0.3);
        let n_max = default_truncation(&s, 1e-16);
        for n in 0..=20 {
            let mut marginal = 0.0;
            for k in 0..=n {
                for m in 0..=n_max {
                    for l in 0..=m {
                        marginal += joint_arrival_pmf(&s, k, n, l, m).unwrap();
                    }
                }
            }
            assert!((marginal - pair_number_pmf(s.source_a, n)).abs() <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn default_truncation_meets_tolerance() {
        let s = scenario(0.5, 0.3, 0.2, 0.9);
        let n = default_truncation(&s, 1e-14);
        assert!(truncation_tail_bound(&s, n) < 1e-14);
        assert!(truncation_tail_bound(&s, n - 1) >= 1e-14);
    }

    proptest! {
        #[test]
        fn normalization_within_tail_bound(
            ea in 0.0..0.6f64, eb in 0.0..0.6f64, ha in 0.0..=1.0f64, hb in 0.0..=1.0f64, n_max in 5u64..40,
        ) {
            let s = scenario(ea, eb, ha, hb);
            let mut total = 0.0;
            for n in 0..=n_max {
                for m in 0..=n_max {
                    for k in 0..=n {
                        for l in 0..=m {
                            total += joint_arrival_pmf(&s, k, n, l, m).unwrap();
                        }
                    }
                }
            }
            prop_assert!(total <= 1.0 + 1e-12);
            prop_assert!(1.0 - total <= truncation_tail_bound(&s, n_max) + 1e-12);
        }

        #[test]
        fn closed_forms_match_truncated_sums(
            ea in 0.0..0.7f64, eb in 0.0..0.7f64, ha in 0.0..=1.0f64, hb in 0.0..=1.0f64,
        ) {
            let s = scenario(ea, eb, ha, hb);
            let n_max = 120;
            let tail = truncation_tail_bound(&s, n_max);
            prop_assert!((p_zero_arrivals(&s) - summed_p0(&s, n_max)).abs() <= tail + 1e-12);
            prop_assert!((p_one_arrival(&s) - summed_p1(&s, n_max)).abs() <= tail + 1e-12);
            prop_assert!(p_zero_arrivals(&s) + p_one_arrival(&s) <= 1.0 + 1e-12);
        }
    }
}
