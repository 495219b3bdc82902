//! Single-photon SFG probability of nonlinear devices.
//!
//! Cavities: a triply resonant χ⁽²⁾ resonator with modes `a`, `b` and the sum
//! mode `c`, driven through external couplings `κ_ae`, `κ_be`. The steady
//! state to leading order in `g/κ` gives the classical efficiency
//! `P_c = η_SFG P_a P_b`, which converts to the per-photon probability
//! `p_SFG = 4g²/(κ_a κ_c)`.
//!
//! Waveguides: `p_SFG = 2π η_SFG h ν Δν̂ L` when the photon fills the full
//! phase-matching bandwidth `Δν̂/L`.
//!
//! Rates and frequencies are angular (rad/s) internally. Conversions from the
//! laboratory conventions (Hz, nm, Q, %/W/cm²) happen at the edges through
//! the helpers below.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nlo_bsm::ValidityWarning;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Largest relative linewidth mismatch `|κ_a-κ_b|/κ_a` accepted silently.
pub const LINEWIDTH_MISMATCH_LIMIT: f64 = 0.5;

/// Single-photon SFG probability demonstrated in an InGaP microring, kept as a reference annotation.
pub const DEMONSTRATED_P_SFG: f64 = 4e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityParams {
    pub g: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_c: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_c: f64,
    pub kappa_ae: f64,
    pub kappa_be: f64,
    pub kappa_ce: f64,
    pub omega_pa: f64,
    pub omega_pb: f64,
}

impl CavityParams {
    /// Frequency-matched cavity (`ω_c = ω_a + ω_b`) pumped on resonance.
    ///
    /// `coupling_*` is the external fraction `κ_e/κ` of each mode.
    pub fn on_resonance(g: f64, omega_a: f64, omega_b: f64, kappa: [f64; 3], coupling: [f64; 3]) -> Result<Self> {
        let params = Self {
            g,
            omega_a,
            omega_b,
            omega_c: omega_a + omega_b,
            kappa_a: kappa[0],
            kappa_b: kappa[1],
            kappa_c: kappa[2],
            kappa_ae: kappa[0] * coupling[0],
            kappa_be: kappa[1] * coupling[1],
            kappa_ce: kappa[2] * coupling[2],
            omega_pa: omega_a,
            omega_pb: omega_b,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("omega_c", self.omega_c),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("kappa_c", self.kappa_c),
            ("omega_pa", self.omega_pa),
            ("omega_pb", self.omega_pb),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::domain(name, value, "must be positive"));
            }
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::domain("g", self.g, "must be non-negative"));
        }
        let external = [
            ("kappa_ae", self.kappa_ae, self.kappa_a),
            ("kappa_be", self.kappa_be, self.kappa_b),
            ("kappa_ce", self.kappa_ce, self.kappa_c),
        ];
        for (name, ext, total) in external {
            if !(ext > 0.0 && ext <= total) {
                return Err(Error::domain(
                    name,
                    ext,
                    "external coupling must satisfy 0 < kappa_e <= kappa",
                ));
            }
        }
        Ok(())
    }

    fn lorentz_a(&self) -> f64 {
        lorentzian(self.omega_a - self.omega_pa, self.kappa_a)
    }

    fn lorentz_b(&self) -> f64 {
        lorentzian(self.omega_b - self.omega_pb, self.kappa_b)
    }

    fn lorentz_c(&self) -> f64 {
        lorentzian(self.omega_c - self.omega_pa - self.omega_pb, self.kappa_c)
    }
}

/// `1 / (Δ² + (κ/2)²)`
fn lorentzian(detuning: f64, kappa: f64) -> f64 {
    1.0 / (detuning * detuning + 0.25 * kappa * kappa)
}

/// Intracavity amplitudes (√photons) and input fluxes (√(photons/s)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub amp_a: Complex64,
    pub amp_b: Complex64,
    pub amp_c: Complex64,
    pub a_in: Complex64,
    pub b_in: Complex64,
}

impl SteadyState {
    pub fn photons_a(&self) -> f64 {
        self.amp_a.norm_sqr()
    }

    pub fn photons_b(&self) -> f64 {
        self.amp_b.norm_sqr()
    }

    pub fn photons_c(&self) -> f64 {
        self.amp_c.norm_sqr()
    }

    /// Relative residuals of the stationary coupled-mode equations in the
    /// pump frame, with the back-action of `c` on `a` and `b` dropped.
    pub fn residuals(&self, cav: &CavityParams) -> [f64; 3] {
        let i = Complex64::i();
        let drive_a = i * (0.5 * cav.kappa_ae).sqrt() * self.a_in;
        let drive_b = i * (0.5 * cav.kappa_be).sqrt() * self.b_in;
        let source_c = -i * cav.g * self.amp_a * self.amp_b;
        let res_a = -(i * (cav.omega_a - cav.omega_pa) + 0.5 * cav.kappa_a) * self.amp_a + drive_a;
        let res_b = -(i * (cav.omega_b - cav.omega_pb) + 0.5 * cav.kappa_b) * self.amp_b + drive_b;
        let res_c = -(i * (cav.omega_c - cav.omega_pa - cav.omega_pb) + 0.5 * cav.kappa_c) * self.amp_c + source_c;
        let rel = |r: Complex64, scale: Complex64| {
            if scale.norm() == 0.0 {
                r.norm()
            } else {
                r.norm() / scale.norm()
            }
        };
        [rel(res_a, drive_a), rel(res_b, drive_b), rel(res_c, source_c)]
    }
}

/// Steady state under continuous pumps of power `power_a`, `power_b` (W).
pub fn cavity_steady_state(cav: &CavityParams, power_a: f64, power_b: f64) -> Result<SteadyState> {
    if !(power_a >= 0.0) {
        return Err(Error::domain("power_a", power_a, "must be non-negative"));
    }
    if !(power_b >= 0.0) {
        return Err(Error::domain("power_b", power_b, "must be non-negative"));
    }
    let i = Complex64::i();
    let a_in = Complex64::from((power_a / (HBAR * cav.omega_a)).sqrt());
    let b_in = Complex64::from((power_b / (HBAR * cav.omega_b)).sqrt());
    let amp_a = i * (0.5 * cav.kappa_ae).sqrt() / (i * (cav.omega_a - cav.omega_pa) + 0.5 * cav.kappa_a) * a_in;
    let amp_b = i * (0.5 * cav.kappa_be).sqrt() / (i * (cav.omega_b - cav.omega_pb) + 0.5 * cav.kappa_b) * b_in;
    let amp_c = -i * cav.g * amp_a * amp_b / (i * (cav.omega_c - cav.omega_pa - cav.omega_pb) + 0.5 * cav.kappa_c);
    Ok(SteadyState {
        amp_a,
        amp_b,
        amp_c,
        a_in,
        b_in,
    })
}

/// Outgoing sum-frequency power `(κ_ce/2) ħω_c |c|²` (W).
pub fn sfg_output_power(cav: &CavityParams, state: &SteadyState) -> f64 {
    0.5 * cav.kappa_ce * HBAR * cav.omega_c * state.photons_c()
}

/// Classical SFG efficiency `η_SFG = P_c / (P_a P_b)` in W⁻¹, including detunings.
pub fn eta_sfg_cavity(cav: &CavityParams) -> f64 {
    cav.g
        * cav.g
        * (0.5 * cav.kappa_ae * cav.lorentz_a())
        * (0.5 * cav.kappa_be * cav.lorentz_b())
        * (0.5 * cav.kappa_ce * cav.lorentz_c())
        * cav.omega_c
        / (HBAR * cav.omega_a * cav.omega_b)
}

/// `4g²/(κ_a κ_c)`
pub fn p_sfg_cavity(cav: &CavityParams) -> f64 {
    4.0 * cav.g * cav.g / (cav.kappa_a * cav.kappa_c)
}

/// Converts a measured classical efficiency (W⁻¹) into the single-photon probability.
pub fn p_sfg_from_eta(cav: &CavityParams, eta_sfg: f64) -> f64 {
    let half = |k: f64| 0.5 * k;
    eta_sfg * half(cav.kappa_a).powi(2) / half(cav.kappa_ae) * half(cav.kappa_b).powi(2) / half(cav.kappa_be)
        * cav.kappa_c
        / (cav.kappa_a * half(cav.kappa_ce))
        * HBAR
        * cav.omega_a
        * cav.omega_b
        / cav.omega_c
}

/// Soft warnings for a cavity: strong conversion and linewidth mismatch.
pub fn cavity_warnings(cav: &CavityParams) -> Vec<ValidityWarning> {
    let mut warnings = Vec::new();
    let p = p_sfg_cavity(cav);
    if p > 1.0 {
        warnings.push(ValidityWarning::SfgProbabilityAboveOne { p_sfg: p });
    } else if p > crate::nlo_bsm::WEAK_SFG_WARN_THRESHOLD {
        warnings.push(ValidityWarning::StrongSfg { p_sfg: p });
    }
    if (cav.kappa_a - cav.kappa_b).abs() / cav.kappa_a > LINEWIDTH_MISMATCH_LIMIT {
        warnings.push(ValidityWarning::LinewidthMismatch {
            kappa_a: cav.kappa_a,
            kappa_b: cav.kappa_b,
        });
    }
    warnings
}

/// Linewidth `κ = ω/Q`.
pub fn kappa_from_q(omega: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::domain("q", q, "quality factor must be positive"));
    }
    Ok(omega / q)
}

pub fn angular_from_hz(hz: f64) -> f64 {
    2.0 * PI * hz
}

pub fn hz_from_wavelength(wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_m
}

pub fn angular_from_wavelength(wavelength_m: f64) -> f64 {
    angular_from_hz(hz_from_wavelength(wavelength_m))
}

/// SFG coupling from the SHG coupling of the same mode pair (twice as large).
pub fn g_sfg_from_shg(g_shg: f64) -> f64 {
    2.0 * g_shg
}

/// Waveguide SFG efficiency from the SHG efficiency (four times as large).
pub fn eta_sfg_from_shg(eta_shg: f64) -> f64 {
    4.0 * eta_shg
}

/// Converts a lab-quoted `%/W/cm²` figure to `W⁻¹ cm⁻²`.
pub fn from_percent_per_watt_cm2(percent: f64) -> f64 {
    percent * 1e-2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveguideParams {
    /// Normalized efficiency, W⁻¹ cm⁻².
    pub eta_sfg_norm: f64,
    /// Bandwidth–length product Δν̂, Hz·cm.
    pub spectral_acceptance: f64,
    /// cm
    pub length: f64,
    /// Hz
    pub photon_frequency: f64,
}

impl WaveguideParams {
    pub fn new(eta_sfg_norm: f64, spectral_acceptance: f64, length: f64, photon_frequency: f64) -> Result<Self> {
        for (name, v) in [
            ("eta_sfg", eta_sfg_norm),
            ("spectral_acceptance", spectral_acceptance),
            ("length", length),
            ("photon_frequency", photon_frequency),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(name, v, "must be positive"));
            }
        }
        Ok(Self {
            eta_sfg_norm,
            spectral_acceptance,
            length,
            photon_frequency,
        })
    }

    /// Phase-matching bandwidth `Δν̂/L` (Hz).
    pub fn bandwidth(&self) -> f64 {
        self.spectral_acceptance / self.length
    }
}

/// `2π η_SFG h ν Δν̂ L`
pub fn p_sfg_waveguide(wg: &WaveguideParams) -> f64 {
    2.0 * PI * wg.eta_sfg_norm * PLANCK * wg.photon_frequency * wg.spectral_acceptance * wg.length
}

/// `2π η_SFG h ν Δν L²` for a photon of bandwidth `bandwidth_hz` narrower than the acceptance.
pub fn p_sfg_waveguide_pulse(wg: &WaveguideParams, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0 && bandwidth_hz <= wg.bandwidth()) {
        return Err(Error::domain(
            "bandwidth",
            bandwidth_hz,
            "must be positive and within the waveguide acceptance",
        ));
    }
    Ok(2.0 * PI * wg.eta_sfg_norm * PLANCK * wg.photon_frequency * bandwidth_hz * wg.length * wg.length)
}
