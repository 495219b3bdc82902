use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Map, Value};
use swapfid::config::{cavity_from_config, scenario_from_config, waveguide_from_config};
use swapfid::lo_bsm::{p_for_balanced_smalleta_fidelity, p_for_unbalanced_limit_fidelity, LO_FIDELITY_LIMIT};
use swapfid::nlo_bsm::{check_p_sfg, p_for_target_fidelity};
use swapfid::numfmt::sci;
use swapfid::oracle::{default_grid, parse_grid, verify, VerifySettings};
use swapfid::rates::rate_compare;
use swapfid::sfg_device::{
    cavity_warnings, eta_sfg_cavity, p_sfg_cavity, p_sfg_from_eta, p_sfg_waveguide, DEMONSTRATED_P_SFG,
};
use swapfid::sweep::{run_sweep, SweepSpec};
use swapfid::{list_presets, Config, ValidityWarning};

use crate::args::{Cli, Command, Format};
use crate::{fock_check, load_config, CliError};

/// Rendered output plus the exit status it should produce once written.
pub type Outcome = (String, Result<(), CliError>);

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::FidelitySweep => fidelity_sweep(&load_config(common)?, common.format, common.workers),
        Command::Device => device(&load_config(common)?, common.format),
        Command::RateCompare { p_sfg, clock } => rate_compare_cmd(&load_config(common)?, *p_sfg, *clock, common.format),
        Command::Verify {
            grid,
            samples,
            n_max,
            mutate,
        } => {
            let grid = match grid {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| CliError::Usage(format!("cannot read grid {}: {e}", path.display())))?;
                    parse_grid(&text)?
                }
                None => default_grid(),
            };
            let settings = VerifySettings {
                n_max: *n_max,
                samples: *samples,
                seed: common.seed,
                workers: common.workers,
                mutate: *mutate,
            };
            verify_cmd(&grid, &settings, common.format)
        }
        Command::FockCheck => fock_check::run(common.format),
        Command::Presets => Ok((presets_text(), Ok(()))),
    }
}

/// Key-value report rendered as aligned text, `quantity,value` CSV or a JSON object.
struct Report {
    fields: Vec<(String, Value)>,
    warnings: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self {
            fields: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn num(&mut self, key: &str, v: f64) {
        self.fields.push((key.into(), json!(v)));
    }

    fn text(&mut self, key: &str, v: impl Into<String>) {
        self.fields.push((key.into(), Value::String(v.into())));
    }

    fn flag(&mut self, key: &str, v: bool) {
        self.fields.push((key.into(), Value::Bool(v)));
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut obj: Map<String, Value> = self.fields.iter().cloned().collect();
                obj.insert("warnings".into(), json!(self.warnings));
                serde_json::to_string_pretty(&Value::Object(obj)).expect("plain JSON") + "\n"
            }
            Format::Csv => {
                let mut out = String::from("quantity,value\n");
                for (k, v) in &self.fields {
                    let _ = writeln!(out, "{k},{}", value_text(v));
                }
                out
            }
            Format::Text => {
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut out = String::new();
                for (k, v) in &self.fields {
                    let _ = writeln!(out, "{k:<width$}  {}", value_text(v));
                }
                for w in &self.warnings {
                    let _ = writeln!(out, "warning: {w}");
                }
                out
            }
        }
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Number(n) => sci(n.as_f64().unwrap_or(f64::NAN), 6),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn fidelity_sweep(cfg: &Config, format: Option<Format>, workers: usize) -> Result<Outcome, CliError> {
    let spec = SweepSpec::from_config(cfg)?;
    let table = run_sweep(&spec, workers)?;
    let body = match format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => serde_json::to_string_pretty(&table).expect("plain JSON") + "\n",
        Format::Text => return Err(CliError::Usage("fidelity-sweep writes csv or json".into())),
    };
    Ok((body, Ok(())))
}

fn device(cfg: &Config, format: Option<Format>) -> Result<Outcome, CliError> {
    let cavity = cavity_from_config(cfg)?;
    let waveguide = waveguide_from_config(cfg)?;
    let reference = cfg.number("p_sfg_reference")?;
    if cavity.is_none() && waveguide.is_none() && reference.is_none() {
        return Err(CliError::Usage(
            "no device parameters: give cavity keys (g, lambda_a, q_a, q_c), waveguide keys (wg_*) or p_sfg_reference"
                .into(),
        ));
    }
    let mut r = Report::new();
    let mut invalid = None;
    if let Some(desc) = cfg.get("description") {
        r.text("description", desc);
    }
    if let Some(cav) = &cavity {
        let two_pi = 2.0 * std::f64::consts::PI;
        let p = p_sfg_cavity(cav);
        let eta = eta_sfg_cavity(cav);
        r.num("cavity_g_over_2pi_hz", cav.g / two_pi);
        r.num("cavity_kappa_a_over_2pi_hz", cav.kappa_a / two_pi);
        r.num("cavity_kappa_b_over_2pi_hz", cav.kappa_b / two_pi);
        r.num("cavity_kappa_c_over_2pi_hz", cav.kappa_c / two_pi);
        r.num("cavity_eta_sfg_per_w", eta);
        r.num("cavity_p_sfg_from_eta", p_sfg_from_eta(cav, eta));
        r.num("cavity_p_sfg", p);
        for w in cavity_warnings(cav) {
            if matches!(w, ValidityWarning::SfgProbabilityAboveOne { .. }) {
                invalid = Some(w.to_string());
            }
            r.warnings.push(format!("cavity: {w}"));
        }
    }
    if let Some(wg) = &waveguide {
        let p = p_sfg_waveguide(wg);
        r.num("waveguide_bandwidth_hz", wg.bandwidth());
        r.num("waveguide_p_sfg", p);
        match check_p_sfg(p) {
            Ok(Some(w)) => r.warnings.push(format!("waveguide: {w}")),
            Ok(None) => {}
            Err(_) => {
                let w = ValidityWarning::SfgProbabilityAboveOne { p_sfg: p };
                invalid = Some(w.to_string());
                r.warnings.push(format!("waveguide: {w}"));
            }
        }
    }
    if let Some(p) = reference {
        r.num("reference_p_sfg", p);
    }
    r.num("demonstrated_p_sfg", DEMONSTRATED_P_SFG);
    if let Some(note) = cfg.get("provenance") {
        r.text("provenance", note);
    }
    let status = match invalid {
        Some(msg) => Err(CliError::Model(swapfid::Error::ModelValidity(msg))),
        None => Ok(()),
    };
    Ok((r.render(format.unwrap_or(Format::Text)), status))
}

fn rate_compare_cmd(
    cfg: &Config,
    p_sfg: Option<f64>,
    clock: Option<f64>,
    format: Option<Format>,
) -> Result<Outcome, CliError> {
    let scenario = scenario_from_config(cfg)?;
    let p_sfg = match p_sfg {
        Some(p) => p,
        None => cfg
            .number("p_sfg")?
            .ok_or_else(|| CliError::Usage("p_sfg is required (key or --p-sfg)".into()))?,
    };
    let clock = match clock {
        Some(c) => c,
        None => cfg.frequency("clock")?.unwrap_or(1e9),
    };
    let gap = cfg.number("lo_gap")?.unwrap_or(0.01);
    let report = rate_compare(&scenario, p_sfg, clock)?;

    let target = LO_FIDELITY_LIMIT;
    let p_nlo = p_for_target_fidelity(target)?;
    let p_lo_balanced = p_for_balanced_smalleta_fidelity(target - gap)?;
    let p_lo_unbalanced = p_for_unbalanced_limit_fidelity(target - gap)?;

    let mut r = Report::new();
    r.num("p_b", scenario.source_b.pair_probability());
    r.num("eta_a", scenario.eta_a());
    r.num("eta_b", scenario.eta_b());
    r.num("p_sfg", p_sfg);
    r.num("clock_hz", clock);
    r.num("rate_lo_hz", report.rate_lo);
    r.num("rate_nlo_hz", report.rate_nlo);
    r.num("rate_ratio_nlo_over_lo", report.rate_nlo / report.rate_lo);
    r.num("crossover_ratio", report.crossover_ratio);
    r.text("winner", if report.nlo_wins { "nlo" } else { "lo" });
    r.flag("nlo_wins", report.nlo_wins);
    r.num("target_fidelity_nlo", target);
    r.num("target_fidelity_lo", target - gap);
    r.num("p_target_nlo", p_nlo);
    r.num("p_target_lo_balanced", p_lo_balanced);
    r.num("p_target_lo_unbalanced", p_lo_unbalanced);
    r.num("pair_product_ratio_vs_balanced", (p_nlo / p_lo_balanced).powi(2));
    r.num("pair_product_ratio_vs_unbalanced", (p_nlo / p_lo_unbalanced).powi(2));
    if let Some(w) = check_p_sfg(p_sfg)? {
        r.warnings.push(w.to_string());
    }
    Ok((r.render(format.unwrap_or(Format::Text)), Ok(())))
}

fn verify_cmd(
    grid: &[swapfid::oracle::GridPoint],
    settings: &VerifySettings,
    format: Option<Format>,
) -> Result<Outcome, CliError> {
    let report = verify(grid, settings)?;
    let body = match format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report).expect("plain JSON") + "\n",
        Format::Text => {
            let mut out = format!(
                "rng {} seed {} samples {} n_max {}\n",
                report.rng, settings.seed, settings.samples, settings.n_max
            );
            let _ = writeln!(
                out,
                "{:<6} {:<11} {:<44} {:>12} {:>12} {:>10}  status",
                "qty", "method", "scenario", "closed", "oracle", "diff"
            );
            for rec in &report.records {
                let s = rec.scenario;
                let scen = format!("eps=({},{}) eta=({},{})", s.eps_a(), s.eps_b(), s.eta_a(), s.eta_b());
                let status = match (rec.pass, &rec.error) {
                    (Some(true), _) => "pass".to_string(),
                    (Some(false), _) => "FAIL".to_string(),
                    (None, Some(e)) => format!("skipped: {e}"),
                    (None, None) => "skipped".to_string(),
                };
                let opt = |v: Option<f64>| v.map(|x| sci(x, 5)).unwrap_or_else(|| "-".into());
                let method = match rec.method {
                    swapfid::OracleMode::ExactSum => "exact-sum",
                    swapfid::OracleMode::MonteCarlo => "monte-carlo",
                };
                let _ = writeln!(
                    out,
                    "{:<6} {:<11} {:<44} {:>12} {:>12} {:>10}  {status}",
                    rec.quantity,
                    method,
                    scen,
                    opt(rec.closed_form),
                    opt(rec.value),
                    opt(rec.abs_diff)
                );
            }
            let _ = writeln!(
                out,
                "passed {} failed {} skipped {}",
                report.passed, report.failed, report.skipped
            );
            out
        }
        Format::Csv => return Err(CliError::Usage("verify writes json or text".into())),
    };
    let status = if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "verification failed: {} of {} comparisons",
            report.failed,
            report.passed + report.failed
        )))
    };
    Ok((body, status))
}

fn presets_text() -> String {
    let mut out = String::new();
    for p in list_presets() {
        let _ = writeln!(
            out,
            "{}\n  {}\n  provenance: {}",
            p.name,
            p.description(),
            p.provenance()
        );
    }
    out
}
