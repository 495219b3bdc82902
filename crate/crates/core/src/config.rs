//! Flat `key = value [unit]` parameter files.
//!
//! One assignment per line, `#` starts a comment. Numeric values carry their
//! unit after whitespace (`g = 20 MHz`, `lambda_a = 1550 nm`,
//! `wg_eta_sfg = 500000 %/W/cm^2`). Every parse or unit error names its key.
//!
//! Later sources override earlier ones: preset, then config file, then
//! `--set key=value` overrides (see [`Config::merge`] and [`Config::set`]).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::photon_stats::{epsilon_from_p, ChannelParams, SourceParams, SwapScenario};
use crate::sfg_device::{
    angular_from_hz, angular_from_wavelength, hz_from_wavelength, kappa_from_q, CavityParams, WaveguideParams,
};

/// Every key the parser accepts, with the unit family it expects.
pub const KEYS: &[(&str, &str)] = &[
    ("description", "text"),
    ("provenance", "text"),
    ("p", "pair probability, both sources"),
    ("p_a", "pair probability"),
    ("p_b", "pair probability"),
    ("eps", "conversion efficiency, both sources"),
    ("eps_a", "conversion efficiency"),
    ("eps_b", "conversion efficiency"),
    ("eta", "transmission or dB loss, both channels"),
    ("eta_a", "transmission or dB loss"),
    ("eta_b", "transmission or dB loss"),
    ("p_sfg", "SFG probability"),
    ("p_sfg_reference", "SFG probability (annotation)"),
    ("clock", "frequency"),
    ("lo_gap", "fidelity below 1/3 for the LO pair-probability target"),
    ("sweep_variable", "p | epsilon | eta_a | eta_b | p_sfg"),
    ("sweep_start", "number"),
    ("sweep_stop", "number"),
    ("sweep_points", "integer"),
    ("sweep_scale", "linear | log"),
    ("outputs", "comma-separated column names"),
    ("g", "frequency (g/2π)"),
    ("lambda_a", "length"),
    ("lambda_b", "length"),
    ("q_a", "number"),
    ("q_b", "number"),
    ("q_c", "number"),
    ("coupling_a", "fraction"),
    ("coupling_b", "fraction"),
    ("coupling_c", "fraction"),
    ("wg_eta_sfg", "normalized efficiency"),
    ("wg_acceptance", "bandwidth-length product"),
    ("wg_length", "length"),
    ("wg_lambda", "length"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    key: String,
    value: String,
}

/// Ordered key-value pairs as written.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: Vec<Entry>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", i + 1), "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            check_key(key)?;
            if cfg.get(key).is_some() {
                return Err(Error::config(key, "assigned twice"));
            }
            cfg.entries.push(Entry {
                key: key.into(),
                value: value.into(),
            });
        }
        Ok(cfg)
    }

    /// Sets or replaces one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        check_key(key)?;
        let value = value.trim().to_string();
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry { key: key.into(), value }),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
        self.set(key.trim(), value)
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Config) {
        for e in &other.entries {
            self.set(&e.key, &e.value).expect("keys of a parsed config are known");
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.value.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.key.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            writeln!(out, "{} = {}", e.key, e.value).expect("writing to a String");
        }
        out
    }

    fn quantity(&self, key: &str, dim: Dim) -> Result<Option<f64>> {
        self.get(key).map(|raw| parse_quantity(key, raw, dim)).transpose()
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.quantity(key, Dim::Number)
    }

    /// Hz
    pub fn frequency(&self, key: &str) -> Result<Option<f64>> {
        self.quantity(key, Dim::Frequency)
    }

    /// m
    pub fn length(&self, key: &str) -> Result<Option<f64>> {
        self.quantity(key, Dim::Length)
    }

    /// W⁻¹ cm⁻²
    pub fn normalized_efficiency(&self, key: &str) -> Result<Option<f64>> {
        self.quantity(key, Dim::NormEfficiency)
    }

    /// Hz·cm
    pub fn bandwidth_length(&self, key: &str) -> Result<Option<f64>> {
        self.quantity(key, Dim::BandwidthLength)
    }

    /// Fraction in `[0, 1]`; accepts `dB` loss or `%`.
    pub fn transmission(&self, key: &str) -> Result<Option<f64>> {
        self.quantity(key, Dim::Transmission)
    }

    pub fn integer(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|_| Error::config(key, format!("`{raw}` is not a non-negative integer")))
            })
            .transpose()
    }

    fn require<T>(&self, key: &str, value: Result<Option<T>>) -> Result<T> {
        value?.ok_or_else(|| Error::config(key, "missing"))
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(Error::config(key, "unknown key"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Number,
    Frequency,
    Length,
    NormEfficiency,
    BandwidthLength,
    Transmission,
}

fn unit_scale(dim: Dim, unit: &str) -> Option<f64> {
    let freq = |u: &str| match u {
        "Hz" => Some(1.0),
        "kHz" => Some(1e3),
        "MHz" => Some(1e6),
        "GHz" => Some(1e9),
        "THz" => Some(1e12),
        _ => None,
    };
    match dim {
        Dim::Number => unit.is_empty().then_some(1.0),
        Dim::Frequency => freq(unit),
        Dim::Length => match unit {
            "nm" => Some(1e-9),
            "um" | "µm" => Some(1e-6),
            "mm" => Some(1e-3),
            "cm" => Some(1e-2),
            "m" => Some(1.0),
            _ => None,
        },
        Dim::NormEfficiency => match unit {
            "%/W/cm^2" => Some(1e-2),
            "/W/cm^2" | "W^-1 cm^-2" => Some(1.0),
            _ => None,
        },
        Dim::BandwidthLength => unit
            .strip_suffix("cm")
            .map(|f| f.trim_end_matches(['*', '·', ' ']))
            .and_then(freq),
        Dim::Transmission => match unit {
            "" => Some(1.0),
            "%" => Some(1e-2),
            _ => None,
        },
    }
}

fn expected_units(dim: Dim) -> &'static str {
    match dim {
        Dim::Number => "no unit",
        Dim::Frequency => "Hz, kHz, MHz, GHz or THz",
        Dim::Length => "nm, um, mm, cm or m",
        Dim::NormEfficiency => "%/W/cm^2 or /W/cm^2",
        Dim::BandwidthLength => "Hz cm, MHz cm, GHz cm, ...",
        Dim::Transmission => "a fraction, % or dB (loss)",
    }
}

fn parse_quantity(key: &str, raw: &str, dim: Dim) -> Result<f64> {
    let raw = raw.trim();
    let (number, unit) = raw.split_once(char::is_whitespace).unwrap_or((raw, ""));
    let unit = unit.trim();
    let value: f64 = number
        .parse()
        .map_err(|_| Error::config(key, format!("`{number}` is not a number")))?;
    if !value.is_finite() {
        return Err(Error::config(key, "value must be finite"));
    }
    if dim == Dim::Transmission && unit == "dB" {
        if value < 0.0 {
            return Err(Error::config(key, "loss in dB must be non-negative"));
        }
        return ChannelParams::from_loss_db(value)
            .map(|c| c.eta())
            .map_err(|e| Error::config(key, e.to_string()));
    }
    let scale = unit_scale(dim, unit).ok_or_else(|| {
        let shown = if unit.is_empty() {
            "no unit".to_string()
        } else {
            format!("unit `{unit}`")
        };
        Error::config(key, format!("{shown} given, expected {}", expected_units(dim)))
    })?;
    Ok(value * scale)
}

/// Resolves a source from `p_x`/`eps_x`, falling back to the shared `p`/`eps`.
fn source(cfg: &Config, side: char) -> Result<Option<SourceParams>> {
    let p_key = format!("p_{side}");
    let eps_key = format!("eps_{side}");
    let own = (cfg.number(&p_key)?, cfg.number(&eps_key)?);
    let shared = (cfg.number("p")?, cfg.number("eps")?);
    let pick = |p: Option<f64>, eps: Option<f64>, p_key: &str, eps_key: &str| -> Result<Option<SourceParams>> {
        match (p, eps) {
            (Some(_), Some(_)) => Err(Error::config(
                p_key,
                format!("give either `{p_key}` or `{eps_key}`, not both"),
            )),
            (Some(p), None) => epsilon_from_p(p)
                .and_then(SourceParams::new)
                .map(Some)
                .map_err(|e| Error::config(p_key, e.to_string())),
            (None, Some(eps)) => SourceParams::new(eps)
                .map(Some)
                .map_err(|e| Error::config(eps_key, e.to_string())),
            (None, None) => Ok(None),
        }
    };
    match pick(own.0, own.1, &p_key, &eps_key)? {
        Some(s) => Ok(Some(s)),
        None => pick(shared.0, shared.1, "p", "eps"),
    }
}

fn channel(cfg: &Config, side: char) -> Result<Option<f64>> {
    let key = format!("eta_{side}");
    match cfg.transmission(&key)? {
        Some(eta) => Ok(Some(eta)),
        None => cfg.transmission("eta"),
    }
}

/// Builds the swapping scenario; sources default to `p = 0.01`, channels to lossless.
pub fn scenario_from_config(cfg: &Config) -> Result<SwapScenario> {
    let default_source = SourceParams::from_pair_probability(0.01)?;
    let source_a = source(cfg, 'a')?.unwrap_or(default_source);
    let source_b = source(cfg, 'b')?.unwrap_or(default_source);
    let eta_a = channel(cfg, 'a')?.unwrap_or(1.0);
    let eta_b = channel(cfg, 'b')?.unwrap_or(1.0);
    let channel_a = ChannelParams::new(eta_a).map_err(|e| Error::config("eta_a", e.to_string()))?;
    let channel_b = ChannelParams::new(eta_b).map_err(|e| Error::config("eta_b", e.to_string()))?;
    Ok(SwapScenario {
        source_a,
        source_b,
        channel_a,
        channel_b,
    })
}

/// Triply resonant cavity from `g`, wavelengths, quality factors and couplings.
///
/// `lambda_b` defaults to `lambda_a`; couplings default to critical (1/2).
/// Returns `None` when no cavity-only key is present.
pub fn cavity_from_config(cfg: &Config) -> Result<Option<CavityParams>> {
    const CAVITY_KEYS: [&str; 8] = [
        "g",
        "lambda_b",
        "q_a",
        "q_b",
        "q_c",
        "coupling_a",
        "coupling_b",
        "coupling_c",
    ];
    if CAVITY_KEYS.iter().all(|k| cfg.get(k).is_none()) {
        return Ok(None);
    }
    let g = angular_from_hz(cfg.require("g", cfg.frequency("g"))?);
    let lambda_a = cfg.require("lambda_a", cfg.length("lambda_a"))?;
    let lambda_b = cfg.length("lambda_b")?.unwrap_or(lambda_a);
    let (omega_a, omega_b) = (angular_from_wavelength(lambda_a), angular_from_wavelength(lambda_b));
    let omega_c = omega_a + omega_b;
    let q = |key: &str| cfg.require(key, cfg.number(key));
    let q_a = q("q_a")?;
    let q_b = cfg.number("q_b")?.unwrap_or(q_a);
    let q_c = q("q_c")?;
    let kappa = |key: &'static str, omega, q| kappa_from_q(omega, q).map_err(|e| Error::config(key, e.to_string()));
    let kappa = [
        kappa("q_a", omega_a, q_a)?,
        kappa("q_b", omega_b, q_b)?,
        kappa("q_c", omega_c, q_c)?,
    ];
    let coupling = |key| cfg.number(key).map(|c| c.unwrap_or(0.5));
    let coupling = [
        coupling("coupling_a")?,
        coupling("coupling_b")?,
        coupling("coupling_c")?,
    ];
    CavityParams::on_resonance(g, omega_a, omega_b, kappa, coupling)
        .map(Some)
        .map_err(|e| Error::config("cavity", e.to_string()))
}

/// Waveguide from `wg_eta_sfg`, `wg_acceptance`, `wg_length` and `wg_lambda`
/// (the photon wavelength, defaulting to `lambda_a`).
pub fn waveguide_from_config(cfg: &Config) -> Result<Option<WaveguideParams>> {
    if cfg.get("wg_eta_sfg").is_none() {
        return Ok(None);
    }
    let eta = cfg.require("wg_eta_sfg", cfg.normalized_efficiency("wg_eta_sfg"))?;
    let acceptance = cfg.require("wg_acceptance", cfg.bandwidth_length("wg_acceptance"))?;
    let length_cm = cfg.require("wg_length", cfg.length("wg_length"))? * 1e2;
    let lambda = match cfg.length("wg_lambda")? {
        Some(l) => l,
        None => cfg.require("wg_lambda", cfg.length("lambda_a"))?,
    };
    WaveguideParams::new(eta, acceptance, length_cm, hz_from_wavelength(lambda))
        .map(Some)
        .map_err(|e| Error::config("waveguide", e.to_string()))
}
