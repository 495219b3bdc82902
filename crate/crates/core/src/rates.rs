//! Leading-order swapping rates of the two schemes and their crossover.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::photon_stats::SwapScenario;

/// How source A is driven when the linear-optical rate is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoRateConvention {
    /// `p_A = η_B p_B / η_A`, the attenuation that maximizes fidelity.
    #[default]
    OptimalAttenuation,
    /// `p_A` as given by the scenario.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub rate_lo: f64,
    pub rate_nlo: f64,
    pub clock_rate: f64,
    /// `p_SFG η_A / η_B`
    pub crossover_ratio: f64,
    pub nlo_wins: bool,
}

fn check_clock(clock: f64) -> Result<()> {
    if !(clock >= 0.0 && clock.is_finite()) {
        return Err(Error::domain("clock", clock, "must be a non-negative rate"));
    }
    Ok(())
}

/// `η_A η_B p_A p_B R_c`; under attenuation this is `η_B² p_B² R_c`.
pub fn rate_lo(scenario: &SwapScenario, clock: f64, convention: LoRateConvention) -> Result<f64> {
    check_clock(clock)?;
    let p_b = scenario.source_b.pair_probability();
    let (eta_a, eta_b) = (scenario.eta_a(), scenario.eta_b());
    Ok(match convention {
        LoRateConvention::OptimalAttenuation => eta_b * eta_b * p_b * p_b * clock,
        LoRateConvention::Raw => eta_a * eta_b * scenario.source_a.pair_probability() * p_b * clock,
    })
}

/// `p_SFG η_A η_B p_A p_B R_c`
pub fn rate_nlo(scenario: &SwapScenario, p_sfg: f64, clock: f64) -> Result<f64> {
    check_clock(clock)?;
    crate::nlo_bsm::check_p_sfg(p_sfg)?;
    Ok(p_sfg
        * scenario.eta_a()
        * scenario.eta_b()
        * scenario.source_a.pair_probability()
        * scenario.source_b.pair_probability()
        * clock)
}

/// Whether SFG heralding out-rates attenuated linear optics (`p_SFG > η_B/η_A`)
/// together with the ratio `p_SFG η_A / η_B`.
pub fn crossover(p_sfg: f64, eta_a: f64, eta_b: f64) -> Result<(bool, f64)> {
    if !(eta_b > 0.0) {
        return Err(Error::domain("eta_b", eta_b, "must be positive"));
    }
    Ok((p_sfg > eta_b / eta_a, p_sfg * eta_a / eta_b))
}

/// Compares both schemes at `p_A = p_B = p_B` of the scenario for the NLO side,
/// with the attenuation convention on the LO side.
pub fn rate_compare(scenario: &SwapScenario, p_sfg: f64, clock: f64) -> Result<RateReport> {
    let matched = SwapScenario {
        source_a: scenario.source_b,
        ..*scenario
    };
    let rate_lo = rate_lo(&matched, clock, LoRateConvention::OptimalAttenuation)?;
    let rate_nlo = rate_nlo(&matched, p_sfg, clock)?;
    let (nlo_wins, crossover_ratio) = crossover(p_sfg, scenario.eta_a(), scenario.eta_b())?;
    Ok(RateReport {
        rate_lo,
        rate_nlo,
        clock_rate: clock,
        crossover_ratio,
        nlo_wins,
    })
}
