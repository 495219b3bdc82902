//! Non-postselected fidelity of swapping heralded by a linear-optical Bell
//! state measurement.
//!
//! The measurement cannot tell a genuine one-photon-per-source event from two
//! photons of a single source, so every event with two or more arrivals counts
//! as a herald. The fidelity is the faithful-event probability `P(1|1,1|1)`
//! divided by the herald probability `1 - P0 - P1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::photon_stats::{epsilon_from_p, joint_arrival_pmf, SwapScenario};

/// Ceiling on any non-postselected linear-optical fidelity.
pub const LO_FIDELITY_LIMIT: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoFidelityReport {
    pub fidelity: f64,
    /// `P(1|1,1|1)`
    pub p_faithful: f64,
    /// `1 - P0 - P1`
    pub p_herald: f64,
    /// `(1/3)(1-ε_A(1-η_A))²(1-ε_B(1-η_B))²`
    pub bound: f64,
}

fn check_pair_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=0.25).contains(&p) {
        return Err(Error::domain(name, p, "pair probability must lie in [0, 1/4]"));
    }
    Ok(())
}

/// Two-photon (leading-order) fidelity over lossless channels.
pub fn fidelity_leading_order(p_a: f64, p_b: f64) -> Result<f64> {
    check_pair_probability("p_a", p_a)?;
    check_pair_probability("p_b", p_b)?;
    if p_a == 0.0 && p_b == 0.0 {
        return Err(Error::UndefinedFidelity("both sources are dark".into()));
    }
    Ok(p_a * p_b / (p_a * p_b + p_a * p_a + p_b * p_b))
}

/// Leading-order fidelity when only the channel of source B has transmission `eta`.
pub fn fidelity_leading_order_lossy(p_a: f64, p_b: f64, eta: f64) -> Result<f64> {
    check_pair_probability("p_a", p_a)?;
    check_pair_probability("p_b", p_b)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(if eta == 0.0 {
            Error::UndefinedFidelity("channel B transmits nothing".into())
        } else {
            Error::domain("eta", eta, "must satisfy 0 < eta <= 1")
        });
    }
    if p_a == 0.0 && p_b == 0.0 {
        return Err(Error::UndefinedFidelity("both sources are dark".into()));
    }
    let faithful = eta * p_a * p_b;
    Ok(faithful / (faithful + p_a * p_a + eta * eta * p_b * p_b))
}

/// Probability that both sources emit one pair and both photons arrive.
pub fn p_faithful(scenario: &SwapScenario) -> f64 {
    ((1.0 - scenario.eps_a()) * (1.0 - scenario.eps_b()))
        * (scenario.eps_a() * scenario.eps_b())
        * (scenario.eta_a() * scenario.eta_b())
}

/// `1 - P0 - P1`, evaluated without the cancellation of the subtraction.
///
/// Multiplying through by `d_A² d_B²` with `d = 1 - ε(1-η)` leaves a sum of
/// non-negative terms in `x = εη` and `u = 1 - ε`.
pub fn p_herald(scenario: &SwapScenario) -> f64 {
    let (ua, ub) = (1.0 - scenario.eps_a(), 1.0 - scenario.eps_b());
    let (xa, xb) = (scenario.eps_a() * scenario.eta_a(), scenario.eps_b() * scenario.eta_b());
    let (da, db) = (scenario.damping_a(), scenario.damping_b());
    // Every product and sum below is written symmetrically so that exchanging
    // A and B reproduces the same bits.
    let numerator = (ub * xa) * (ub * xa)
        + (ua * xb) * (ua * xb)
        + (xa * xa) * (xb * xb)
        + (ua * xb) * (ub * xa)
        + 2.0 * (xa * xb) * (xa * ub + xb * ua);
    numerator / ((da * da) * (db * db))
}

pub fn fidelity_upper_bound(scenario: &SwapScenario) -> f64 {
    let (da, db) = (scenario.damping_a(), scenario.damping_b());
    LO_FIDELITY_LIMIT * ((da * da) * (db * db))
}

/// Fidelity for arbitrary sources and channels including all multiphoton terms.
pub fn fidelity_general(scenario: &SwapScenario) -> Result<LoFidelityReport> {
    let herald = p_herald(scenario);
    if herald <= 0.0 {
        return Err(Error::UndefinedFidelity(
            "no event delivers two photons to the measurement".into(),
        ));
    }
    let faithful = p_faithful(scenario);
    Ok(LoFidelityReport {
        fidelity: faithful / herald,
        p_faithful: faithful,
        p_herald: herald,
        bound: fidelity_upper_bound(scenario),
    })
}

/// Closed form for identical sources `ε` behind identical channels `η`.
pub fn fidelity_balanced(eps: f64, eta: f64) -> Result<f64> {
    if eps == 0.0 {
        return Err(Error::UndefinedFidelity("sources are dark".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps", eps, "must satisfy 0 < eps < 1"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain("eta", eta, "must satisfy 0 <= eta <= 1"));
    }
    let u = 1.0 - eps;
    let d = u + eps * eta;
    Ok(u * u * d * d * d / (3.0 * u + eps * eta))
}

/// Balanced fidelity in the high-loss limit, `(1/3)(1-ε)⁴` written in `p`.
pub fn fidelity_balanced_smalleta(p: f64) -> Result<f64> {
    let u = 1.0 - epsilon_from_p(p)?;
    Ok(LO_FIDELITY_LIMIT * u.powi(4))
}

/// Best fidelity for `η_B ≪ η_A ≪ 1` once source A is attenuated, `(1/3)(1-ε_B)²`.
pub fn fidelity_unbalanced_limit(p_b: f64) -> Result<f64> {
    let u = 1.0 - epsilon_from_p(p_b)?;
    Ok(LO_FIDELITY_LIMIT * u * u)
}

/// `ε_A` solving `(1-ε_B) ε_A η_A = (1-ε_A) ε_B η_B`, which equalizes photon flux.
pub fn optimal_epsilon_a(eps_b: f64, eta_a: f64, eta_b: f64) -> Result<f64> {
    if !(eps_b > 0.0 && eps_b < 1.0) {
        return Err(Error::domain("eps_b", eps_b, "must satisfy 0 < eps_b < 1"));
    }
    if !(eta_a > 0.0 && eta_a <= 1.0) {
        return Err(Error::domain("eta_a", eta_a, "must satisfy 0 < eta_a <= 1"));
    }
    if !(0.0..=1.0).contains(&eta_b) {
        return Err(Error::domain("eta_b", eta_b, "must satisfy 0 <= eta_b <= 1"));
    }
    let flux_b = eps_b * eta_b;
    Ok(flux_b / ((1.0 - eps_b) * eta_a + flux_b))
}

/// Pair probability at which the high-loss balanced fidelity equals `f`.
pub fn p_for_balanced_smalleta_fidelity(f: f64) -> Result<f64> {
    if !(1.0 / 48.0..=LO_FIDELITY_LIMIT).contains(&f) {
        return Err(Error::domain("f", f, "balanced fidelity spans [1/48, 1/3]"));
    }
    let eps = 1.0 - (3.0 * f).powf(0.25);
    Ok(eps * (1.0 - eps))
}

/// Pair probability `p_B` at which the attenuated unbalanced fidelity equals `f`.
pub fn p_for_unbalanced_limit_fidelity(f: f64) -> Result<f64> {
    if !(1.0 / 12.0..=LO_FIDELITY_LIMIT).contains(&f) {
        return Err(Error::domain("f", f, "unbalanced fidelity spans [1/12, 1/3]"));
    }
    let eps = 1.0 - (3.0 * f).sqrt();
    Ok(eps * (1.0 - eps))
}

/// `P(1|1,1|1)` through the generic arrival law, for cross-checks.
pub fn p_faithful_from_pmf(scenario: &SwapScenario) -> f64 {
    joint_arrival_pmf(scenario, 1, 1, 1, 1).expect("k <= n and l <= m")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon_stats::{p_one_arrival, p_zero_arrivals};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scenario(ea: f64, eb: f64, ha: f64, hb: f64) -> SwapScenario {
        SwapScenario::new(ea, eb, ha, hb).unwrap()
    }

    #[test]
    fn leading_order_examples() {
        for p in [1e-4, 0.01, 0.25] {
            assert_relative_eq!(fidelity_leading_order(p, p).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
        }
        assert_relative_eq!(
            fidelity_leading_order(0.01, 0.02).unwrap(),
            2.0 / 7.0,
            max_relative = 1e-14
        );
        let tiny = fidelity_leading_order(0.01, 1e-8).unwrap();
        assert_relative_eq!(tiny, 1e-6, max_relative = 1e-5);
        assert!(matches!(
            fidelity_leading_order(0.0, 0.0),
            Err(Error::UndefinedFidelity(_))
        ));
        assert!(fidelity_leading_order(0.3, 0.1).is_err());
    }

    #[test]
    fn leading_order_lossy_examples() {
        for eta in [1.0, 0.3, 1e-3] {
            let p = 0.02;
            assert_relative_eq!(
                fidelity_leading_order_lossy(eta * p, p, eta).unwrap(),
                1.0 / 3.0,
                max_relative = 1e-14
            );
        }
        let eta = 1e-4;
        assert_relative_eq!(
            fidelity_leading_order_lossy(0.01, 0.01, eta).unwrap(),
            eta,
            max_relative = 2e-4
        );
        // 0.5·0.01·0.02 / (1e-4 + 1e-4 + 0.25·4e-4): p_A = η p_B, so the bound is met.
        assert_relative_eq!(
            fidelity_leading_order_lossy(0.01, 0.02, 0.5).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            fidelity_leading_order_lossy(0.02, 0.01, 0.5).unwrap(),
            1e-4 / (1e-4 + 4e-4 + 0.25e-4),
            max_relative = 1e-14
        );
        assert!(matches!(
            fidelity_leading_order_lossy(0.01, 0.01, 0.0),
            Err(Error::UndefinedFidelity(_))
        ));
    }

    #[test]
    fn general_lossless_matches_balanced_closed_form() {
        let r = fidelity_general(&scenario(0.1, 0.1, 1.0, 1.0)).unwrap();
        assert_relative_eq!(r.fidelity, 0.81 / 2.8, max_relative = 1e-14);
        assert!((r.fidelity - 0.28929).abs() < 1e-5);
        let f = fidelity_general(&scenario(1e-7, 1e-7, 1.0, 1.0)).unwrap().fidelity;
        assert!((f - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn stable_herald_matches_subtraction() {
        let s = scenario(0.2, 0.05, 0.3, 0.9);
        let direct = 1.0 - p_zero_arrivals(&s) - p_one_arrival(&s);
        assert_relative_eq!(p_herald(&s), direct, max_relative = 1e-12);
        assert_eq!(p_faithful(&s), p_faithful_from_pmf(&s));
    }

    #[test]
    fn general_errors_when_nothing_heralds() {
        assert!(matches!(
            fidelity_general(&scenario(0.0, 0.0, 0.5, 0.5)),
            Err(Error::UndefinedFidelity(_))
        ));
        assert!(matches!(
            fidelity_general(&scenario(0.2, 0.2, 0.0, 0.0)),
            Err(Error::UndefinedFidelity(_))
        ));
        // A single bright source still produces (false) heralds.
        let r = fidelity_general(&scenario(0.2, 0.0, 0.5, 0.5)).unwrap();
        assert_eq!(r.fidelity, 0.0);
        assert!(r.p_herald > 0.0);
    }

    #[test]
    fn upper_bound_examples() {
        assert_relative_eq!(fidelity_upper_bound(&scenario(0.3, 0.1, 1.0, 1.0)), 1.0 / 3.0);
        assert_relative_eq!(fidelity_upper_bound(&scenario(0.0, 0.0, 0.2, 0.1)), 1.0 / 3.0);
    }

    #[test]
    fn bound_nearly_saturates_at_balance_for_small_flux() {
        for (eps_b, eta_a, eta_b) in [(1e-4, 1e-3, 1e-3), (1e-5, 1e-2, 1e-4), (1e-6, 0.1, 0.02)] {
            let eps_a = optimal_epsilon_a(eps_b, eta_a, eta_b).unwrap();
            let s = scenario(eps_a, eps_b, eta_a, eta_b);
            let r = fidelity_general(&s).unwrap();
            assert!(1.0 - r.fidelity / r.bound <= 1e-6, "{:?}", (eps_b, eta_a, eta_b));
        }
    }

    #[test]
    fn balanced_examples() {
        for eps in [0.01, 0.1, 0.4] {
            assert_relative_eq!(
                fidelity_balanced(eps, 1.0).unwrap(),
                (1.0 - eps).powi(2) / (3.0 - 2.0 * eps),
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(fidelity_balanced(0.1, 0.0).unwrap(), 0.2187, max_relative = 1e-14);
        assert_relative_eq!(fidelity_balanced(0.1, 1e-9).unwrap(), 0.2187, max_relative = 1e-8);
        let general = fidelity_general(&scenario(0.2, 0.2, 0.5, 0.5)).unwrap().fidelity;
        assert!((fidelity_balanced(0.2, 0.5).unwrap() - general).abs() <= 1e-12);
        assert!(matches!(fidelity_balanced(0.0, 0.5), Err(Error::UndefinedFidelity(_))));
    }

    #[test]
    fn high_loss_limits() {
        assert_relative_eq!(fidelity_balanced_smalleta(0.0).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(
            fidelity_balanced_smalleta(0.25).unwrap(),
            1.0 / 48.0,
            max_relative = 1e-15
        );
        let expected = ((1.0 + 0.96f64.sqrt()) / 2.0).powi(4) / 3.0;
        assert_relative_eq!(
            fidelity_balanced_smalleta(0.01).unwrap(),
            expected,
            max_relative = 1e-14
        );

        assert_relative_eq!(fidelity_unbalanced_limit(0.0).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(
            fidelity_unbalanced_limit(0.25).unwrap(),
            1.0 / 12.0,
            max_relative = 1e-15
        );

        let (eps_b, eta_a, eta_b) = (0.1, 1e-2, 1e-4);
        let eps_a = optimal_epsilon_a(eps_b, eta_a, eta_b).unwrap();
        let general = fidelity_general(&scenario(eps_a, eps_b, eta_a, eta_b))
            .unwrap()
            .fidelity;
        let limit = fidelity_unbalanced_limit(0.09).unwrap();
        assert!((general - limit).abs() / limit < 0.02);
    }

    #[test]
    fn optimal_epsilon_examples() {
        assert_relative_eq!(optimal_epsilon_a(0.17, 0.3, 0.3).unwrap(), 0.17, max_relative = 1e-15);
        let eps_a = optimal_epsilon_a(0.1, 1.0, 0.01).unwrap();
        assert_relative_eq!(eps_a, 0.001 / 0.901, max_relative = 1e-14);
        assert!((eps_a - 1.110e-3).abs() < 1e-6);
        let residual = (1.0 - 0.1) * eps_a * 1.0 - (1.0 - eps_a) * 0.1 * 0.01;
        assert!(residual.abs() < 1e-15);

        // Weak sources: p_A ≈ (η_B/η_A) p_B.
        let eps_b = 1e-4;
        let eps_a = optimal_epsilon_a(eps_b, 0.5, 0.05).unwrap();
        let p_a = eps_a * (1.0 - eps_a);
        assert_relative_eq!(p_a, 0.1 * eps_b * (1.0 - eps_b), max_relative = 1e-3);
    }

    #[test]
    fn inverse_fidelity_maps() {
        let p = p_for_balanced_smalleta_fidelity(0.3).unwrap();
        assert_relative_eq!(fidelity_balanced_smalleta(p).unwrap(), 0.3, max_relative = 1e-12);
        let p = p_for_unbalanced_limit_fidelity(0.3).unwrap();
        assert_relative_eq!(fidelity_unbalanced_limit(p).unwrap(), 0.3, max_relative = 1e-12);
        assert!(p_for_unbalanced_limit_fidelity(0.05).is_err());
    }

    #[test]
    fn argmax_over_eps_a_sits_at_balance_for_weak_flux() {
        for (eps_b, eta_a, eta_b) in [(0.1, 1e-2, 1e-4), (0.01, 0.1, 0.01), (1e-3, 1e-2, 1e-3)] {
            let eps_opt = optimal_epsilon_a(eps_b, eta_a, eta_b).unwrap();
            let step = 0.01 * eps_opt;
            let best = (50..=150)
                .map(|i| i as f64 * step)
                .max_by(|x, y| {
                    let fx = fidelity_general(&scenario(*x, eps_b, eta_a, eta_b)).unwrap().fidelity;
                    let fy = fidelity_general(&scenario(*y, eps_b, eta_a, eta_b)).unwrap().fidelity;
                    fx.total_cmp(&fy)
                })
                .unwrap();
            assert!((best - eps_opt).abs() <= step, "{best} vs {eps_opt}");
        }
    }

    #[test]
    fn monotone_past_balance() {
        for (eps_b, eta_a, eta_b) in [(0.2, 0.5, 0.5), (0.3, 0.9, 0.2), (0.1, 1e-2, 1e-4)] {
            let eps_opt = optimal_epsilon_a(eps_b, eta_a, eta_b).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let eps_a = eps_opt + (0.95 - eps_opt) * i as f64 / 199.0;
                let f = fidelity_general(&scenario(eps_a, eps_b, eta_a, eta_b))
                    .unwrap()
                    .fidelity;
                assert!(f <= prev + 1e-15);
                prev = f;
            }
        }
    }

    #[test]
    fn leading_order_consistency_as_sources_dim() {
        let eta = 0.2;
        for scale in [1e-2, 1e-3, 1e-4] {
            let (eps_a, eps_b) = (scale * 0.5, scale);
            let general = fidelity_general(&scenario(eps_a, eps_b, 1.0, eta)).unwrap().fidelity;
            let lead = fidelity_leading_order_lossy(eps_a, eps_b, eta).unwrap();
            assert!((general - lead).abs() / lead < 10.0 * scale, "scale {scale}");
        }
    }

    proptest! {
        #[test]
        fn bound_chain_holds(
            ea in 0.0..0.99f64, eb in 0.0..0.99f64, ha in 0.0..=1.0f64, hb in 0.0..=1.0f64,
        ) {
            let s = scenario(ea, eb, ha, hb);
            if let Ok(r) = fidelity_general(&s) {
                prop_assert!(r.fidelity >= 0.0);
                prop_assert!(r.fidelity <= r.bound + 1e-12);
                prop_assert!(r.bound <= LO_FIDELITY_LIMIT + 1e-12);
                prop_assert!(r.p_faithful <= r.p_herald);
            }
        }

        #[test]
        fn symmetric_under_exchange(
            ea in 1e-6..0.9f64, eb in 1e-6..0.9f64, ha in 1e-6..=1.0f64, hb in 1e-6..=1.0f64,
        ) {
            let s = scenario(ea, eb, ha, hb);
            prop_assert_eq!(
                fidelity_general(&s).unwrap().fidelity,
                fidelity_general(&s.swapped()).unwrap().fidelity
            );
        }
    }
}
