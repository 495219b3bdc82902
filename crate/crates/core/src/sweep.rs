//! One-parameter sweeps of the fidelity and rate models.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{scenario_from_config, Config};
use crate::error::{Error, Result};
use crate::lo_bsm::{
    fidelity_balanced, fidelity_balanced_smalleta, fidelity_general, fidelity_unbalanced_limit, LO_FIDELITY_LIMIT,
};
use crate::nlo_bsm::fidelity_nlo;
use crate::numfmt::sci;
use crate::photon_stats::{epsilon_from_p, ChannelParams, SourceParams, SwapScenario};
use crate::rates::{rate_lo, rate_nlo, LoRateConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Pair probability of both sources.
    P,
    /// Conversion efficiency of both sources.
    Epsilon,
    EtaA,
    EtaB,
    PSfg,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::P => "p",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::EtaA => "eta_a",
            SweepVariable::EtaB => "eta_b",
            SweepVariable::PSfg => "p_sfg",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "p" => SweepVariable::P,
            "epsilon" | "eps" => SweepVariable::Epsilon,
            "eta_a" => SweepVariable::EtaA,
            "eta_b" => SweepVariable::EtaB,
            "p_sfg" => SweepVariable::PSfg,
            _ => {
                return Err(Error::config(
                    "sweep_variable",
                    format!("`{s}` is not one of p, epsilon, eta_a, eta_b, p_sfg"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// A column of the sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Output {
    /// Full multiphoton LO fidelity of the scenario.
    FLoGeneral,
    /// Identical sources and channels (`ε_B`, `η_B`) at finite loss.
    FLoBalancedEta,
    /// Identical sources in the high-loss limit, `(1/3)(1-ε)⁴`.
    FLoBalanced,
    /// Optimally attenuated source A in the high-loss limit, `(1/3)(1-ε_B)²`.
    FLoUnbalanced,
    FNlo,
    /// The constant 1/3.
    FLoLimit,
    RLo,
    RNlo,
}

impl Output {
    pub const ALL: [Output; 8] = [
        Output::FLoGeneral,
        Output::FLoBalancedEta,
        Output::FLoBalanced,
        Output::FLoUnbalanced,
        Output::FNlo,
        Output::FLoLimit,
        Output::RLo,
        Output::RNlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::FLoGeneral => "f_lo_general",
            Output::FLoBalancedEta => "f_lo_balanced_eta",
            Output::FLoBalanced => "f_lo_balanced",
            Output::FLoUnbalanced => "f_lo_unbalanced",
            Output::FNlo => "f_nlo",
            Output::FLoLimit => "f_lo_limit",
            Output::RLo => "r_lo",
            Output::RNlo => "r_nlo",
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "f_lo_balanced_smalleta" {
            return Ok(Output::FLoBalanced);
        }
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::config("outputs", format!("unknown column `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
    /// Values of everything not swept.
    pub scenario: SwapScenario,
    pub p_sfg: f64,
    /// Hz
    pub clock: f64,
    pub outputs: Vec<Output>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start < self.stop) {
            return Err(Error::config("sweep_start", "start must be below stop"));
        }
        if self.points < 2 {
            return Err(Error::config("sweep_points", "need at least 2 points"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err(Error::config("sweep_scale", "a log scale needs a positive range"));
        }
        if self.outputs.is_empty() {
            return Err(Error::config("outputs", "no columns requested"));
        }
        Ok(())
    }

    /// Grid points, hitting `start` and `stop` exactly.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == last {
                    return self.stop;
                }
                let t = i as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }

    fn point(&self, x: f64) -> Result<(SwapScenario, f64)> {
        let mut s = self.scenario;
        let mut p_sfg = self.p_sfg;
        match self.variable {
            SweepVariable::P => {
                let source = SourceParams::new(epsilon_from_p(x)?)?;
                s.source_a = source;
                s.source_b = source;
            }
            SweepVariable::Epsilon => {
                let source = SourceParams::new(x)?;
                s.source_a = source;
                s.source_b = source;
            }
            SweepVariable::EtaA => s.channel_a = ChannelParams::new(x)?,
            SweepVariable::EtaB => s.channel_b = ChannelParams::new(x)?,
            SweepVariable::PSfg => p_sfg = x,
        }
        Ok((s, p_sfg))
    }

    fn evaluate(&self, x: f64) -> Result<Vec<f64>> {
        let (s, p_sfg) = self.point(x)?;
        self.outputs
            .iter()
            .map(|out| match out {
                Output::FLoGeneral => fidelity_general(&s).map(|r| r.fidelity),
                Output::FLoBalancedEta => fidelity_balanced(s.eps_b(), s.eta_b()),
                Output::FLoBalanced => fidelity_balanced_smalleta(s.source_b.pair_probability()),
                Output::FLoUnbalanced => fidelity_unbalanced_limit(s.source_b.pair_probability()),
                Output::FNlo => fidelity_nlo(s.source_a, s.source_b),
                Output::FLoLimit => Ok(LO_FIDELITY_LIMIT),
                Output::RLo => rate_lo(&s, self.clock, LoRateConvention::OptimalAttenuation),
                Output::RNlo => rate_nlo(&s, p_sfg, self.clock),
            })
            .collect()
    }

    /// Builds a spec from the `sweep_*`, `outputs` and scenario keys.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let variable = cfg
            .get("sweep_variable")
            .ok_or_else(|| Error::config("sweep_variable", "missing"))?
            .parse()?;
        let bound = |key| cfg.number(key)?.ok_or_else(|| Error::config(key, "missing"));
        let scale = match cfg.get("sweep_scale").unwrap_or("linear") {
            "linear" => Scale::Linear,
            "log" => Scale::Log,
            other => return Err(Error::config("sweep_scale", format!("`{other}` is not linear or log"))),
        };
        let outputs = cfg
            .get("outputs")
            .ok_or_else(|| Error::config("outputs", "missing"))?
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<Output>>>()?;
        let spec = Self {
            variable,
            start: bound("sweep_start")?,
            stop: bound("sweep_stop")?,
            points: cfg
                .integer("sweep_points")?
                .ok_or_else(|| Error::config("sweep_points", "missing"))?,
            scale,
            scenario: scenario_from_config(cfg)?,
            p_sfg: cfg.number("p_sfg")?.unwrap_or(1e-3),
            clock: cfg.frequency("clock")?.unwrap_or(1e9),
            outputs,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub columns: Vec<Output>,
    pub x: Vec<f64>,
    /// `rows[i][j]` is column `j` at `x[i]`.
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn column(&self, out: Output) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == out)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV with a fixed header and `%.12e` numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.variable.name());
        for c in &self.columns {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for (x, row) in self.x.iter().zip(&self.rows) {
            out.push_str(&sci(*x, 12));
            for v in row {
                out.push(',');
                out.push_str(&sci(*v, 12));
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates every grid point, in parallel on `workers` threads (0: default),
/// and returns the rows in grid order.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepTable> {
    spec.validate()?;
    let x = spec.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let rows = pool.install(|| {
        x.par_iter()
            .map(|&xi| spec.evaluate(xi).map_err(|e| annotate(spec.variable, xi, e)))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepTable {
        variable: spec.variable,
        columns: spec.outputs.clone(),
        x,
        rows,
    })
}

fn annotate(variable: SweepVariable, x: f64, err: Error) -> Error {
    match err {
        Error::UndefinedFidelity(msg) => Error::UndefinedFidelity(format!("{msg} at {} = {x}", variable.name())),
        Error::ModelValidity(msg) => Error::ModelValidity(format!("{msg} at {} = {x}", variable.name())),
        other => other,
    }
}
