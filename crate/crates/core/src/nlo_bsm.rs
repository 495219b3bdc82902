//! Swapping heralded by sum-frequency generation.
//!
//! The heralding photon is produced with probability `k·l·p_SFG` when `k` and
//! `l` photons meet in the nonlinear element, so the herald weight is linear
//! in the photon numbers on each side. Losses then factor out of the ratio and
//! the fidelity depends on the sources alone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::photon_stats::{epsilon_from_p, joint_arrival_pmf, SourceParams, SwapScenario};

/// Above this single-photon SFG probability the weak-interaction model is flagged.
pub const WEAK_SFG_WARN_THRESHOLD: f64 = 0.1;

/// Soft validity notes attached to reports; they never stop a computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ValidityWarning {
    StrongSfg { p_sfg: f64 },
    SfgProbabilityAboveOne { p_sfg: f64 },
    LinewidthMismatch { kappa_a: f64, kappa_b: f64 },
}

impl std::fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityWarning::StrongSfg { p_sfg } => write!(
                f,
                "p_sfg = {p_sfg:.3e} exceeds {WEAK_SFG_WARN_THRESHOLD}; the herald law assumes weak conversion"
            ),
            ValidityWarning::SfgProbabilityAboveOne { p_sfg } => {
                write!(
                    f,
                    "p_sfg = {p_sfg:.3e} exceeds 1; the device is outside the perturbative regime"
                )
            }
            ValidityWarning::LinewidthMismatch { kappa_a, kappa_b } => write!(
                f,
                "kappa_a = {kappa_a:.4e} and kappa_b = {kappa_b:.4e} rad/s differ by more than 50%; \
                 the cavity p_sfg formula assumes comparable linewidths"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NloFidelityReport {
    pub fidelity: f64,
    pub p_faithful: f64,
    pub p_herald: f64,
    pub p_sfg: f64,
    pub warnings: Vec<ValidityWarning>,
}

/// Validates `p_sfg` as a probability and returns the soft warning, if any.
pub fn check_p_sfg(p_sfg: f64) -> Result<Option<ValidityWarning>> {
    if !(0.0..=1.0).contains(&p_sfg) {
        return Err(Error::domain("p_sfg", p_sfg, "must lie in [0, 1]"));
    }
    Ok((p_sfg > WEAK_SFG_WARN_THRESHOLD).then_some(ValidityWarning::StrongSfg { p_sfg }))
}

/// Probability that the event `(k|n, l|m)` occurs and yields an SFG photon.
pub fn sfg_herald_pmf(scenario: &SwapScenario, p_sfg: f64, k: u64, n: u64, l: u64, m: u64) -> Result<f64> {
    check_p_sfg(p_sfg)?;
    let weight = (k * l) as f64 * p_sfg;
    if weight > 1.0 {
        return Err(Error::ModelValidity(format!(
            "k*l*p_sfg = {weight} exceeds 1 for k = {k}, l = {l}"
        )));
    }
    Ok(joint_arrival_pmf(scenario, k, n, l, m)? * weight)
}

/// Faithful herald probability `(1-ε_A)(1-ε_B) ε_A ε_B η_A η_B p_SFG`.
pub fn p_faithful_sfg(scenario: &SwapScenario, p_sfg: f64) -> f64 {
    crate::lo_bsm::p_faithful(scenario) * p_sfg
}

/// Total SFG herald probability `p_SFG η_A η_B ε_A/(1-ε_A) ε_B/(1-ε_B)`.
pub fn p_total_sfg(scenario: &SwapScenario, p_sfg: f64) -> f64 {
    p_sfg * scenario.eta_a() * scenario.eta_b() * scenario.source_a.mean_pairs() * scenario.source_b.mean_pairs()
}

/// `(1-ε_A)²(1-ε_B)²`; channel transmissions cancel.
pub fn fidelity_nlo(source_a: SourceParams, source_b: SourceParams) -> Result<f64> {
    if source_a.epsilon() == 0.0 || source_b.epsilon() == 0.0 {
        return Err(Error::UndefinedFidelity(
            "SFG needs a photon from each source; one source is dark".into(),
        ));
    }
    let ua = 1.0 - source_a.epsilon();
    let ub = 1.0 - source_b.epsilon();
    Ok(ua * ua * ub * ub)
}

/// Full report for one scenario; errors when no herald is possible.
pub fn nlo_report(scenario: &SwapScenario, p_sfg: f64) -> Result<NloFidelityReport> {
    let warnings: Vec<_> = check_p_sfg(p_sfg)?.into_iter().collect();
    let fidelity = fidelity_nlo(scenario.source_a, scenario.source_b)?;
    let p_herald = p_total_sfg(scenario, p_sfg);
    if p_herald <= 0.0 {
        return Err(Error::UndefinedFidelity(
            "no SFG herald is possible (zero transmission or zero p_sfg)".into(),
        ));
    }
    Ok(NloFidelityReport {
        fidelity,
        p_faithful: p_faithful_sfg(scenario, p_sfg),
        p_herald,
        p_sfg,
        warnings,
    })
}

/// Pair probability `p_A = p_B` at which the fidelity reaches `f_target`.
pub fn p_for_target_fidelity(f_target: f64) -> Result<f64> {
    if !(f_target > 0.0 && f_target <= 1.0) {
        return Err(Error::domain("f_target", f_target, "must satisfy 0 < f <= 1"));
    }
    let eps = 1.0 - f_target.powf(0.25);
    if eps > 0.5 {
        return Err(Error::domain(
            "f_target",
            f_target,
            "needs a pair probability above 1/4; smallest reachable fidelity is 1/16",
        ));
    }
    Ok(eps * (1.0 - eps))
}

/// Fidelity at equal pair probabilities `p_A = p_B = p`.
pub fn fidelity_nlo_symmetric(p: f64) -> Result<f64> {
    let source = SourceParams::new(epsilon_from_p(p)?)?;
    if p == 0.0 {
        return Ok(1.0);
    }
    fidelity_nlo(source, source)
}
