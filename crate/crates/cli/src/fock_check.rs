use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use swapfid::fock_sim::{
    bell_fidelity, bell_pair, dfg_spurious_amplitude, fock_state, herald_amplitude, leading_order_error_bound,
    leading_order_herald_amplitude, sfg_evolve, sfg_projectors, swap_condition_on_sfg, tensor, BellLabel, FockKet,
    SfgElements, StateVector,
};
use swapfid::numfmt::sci;

use crate::args::Format;
use crate::commands::Outcome;
use crate::CliError;

const AMPLITUDE_GTS: [f64; 3] = [1e-3, 1e-2, 5e-2];

#[derive(Debug, Serialize)]
struct Row {
    check: &'static str,
    detail: String,
    value: f64,
    bound: String,
    pass: bool,
}

fn unitarity(rows: &mut Vec<Row>) -> swapfid::Result<()> {
    let one = Complex64::new(1.0, 0.0);
    let superposition = StateVector::from_terms([
        (FockKet::new(1, 1, 0), one * FRAC_1_SQRT_2),
        (FockKet::new(2, 2, 0), Complex64::new(0.0, FRAC_1_SQRT_2)),
    ])?;
    let mut states = vec![("(|1,1,0>+i|2,2,0>)/sqrt2".to_string(), superposition)];
    for ket in [
        FockKet::new(1, 1, 0),
        FockKet::new(2, 2, 0),
        FockKet::new(3, 2, 0),
        FockKet::new(2, 1, 1),
    ] {
        states.push((ket.to_string(), fock_state(ket)));
    }
    for (name, psi) in &states {
        for gt in [1e-3, 1e-2, 5e-2, 0.5] {
            let out = sfg_evolve(psi, gt, 4)?;
            let dev = (out.norm_sqr() - psi.norm_sqr()).abs();
            rows.push(Row {
                check: "unitarity",
                detail: format!("{name} gt={gt}"),
                value: dev,
                bound: "1e-12".into(),
                pass: dev <= 1e-12,
            });
        }
    }
    Ok(())
}

fn amplitude_law(rows: &mut Vec<Row>) -> swapfid::Result<()> {
    for gt in AMPLITUDE_GTS {
        for na in 1..=3 {
            for nb in 1..=3 {
                let exact = herald_amplitude(na, nb, gt)?;
                let lead = leading_order_herald_amplitude(na, nb, gt * gt);
                let rel = (exact - lead).norm() / lead.norm();
                let bound = leading_order_error_bound(na, nb, gt);
                rows.push(Row {
                    check: "amplitude-law",
                    detail: format!("n_a={na} n_b={nb} gt={gt}"),
                    value: rel,
                    bound: sci(bound, 2),
                    pass: rel <= bound,
                });
            }
        }
    }
    Ok(())
}

fn bell_outcomes(rows: &mut Vec<Row>) -> swapfid::Result<()> {
    let input = tensor(
        &bell_pair(BellLabel::PhiPlus, 1, 2),
        &bell_pair(BellLabel::PhiPlus, 3, 4),
    )?;
    for (elements, herald_mass) in [(SfgElements::One, 0.5), (SfgElements::Two, 1.0)] {
        let outcomes = swap_condition_on_sfg(&input, elements)?;
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        rows.push(Row {
            check: "completeness",
            detail: format!(
                "{}: outcome weights sum to herald mass {herald_mass}",
                elements_name(elements)
            ),
            value: (total - herald_mass).abs(),
            bound: "1e-12".into(),
            pass: (total - herald_mass).abs() <= 1e-12,
        });
        for o in &outcomes {
            let (label, f) = match o.label {
                Some(l) => (l.to_string(), bell_fidelity(&o.conditioned_state, l)?),
                None => ("none".into(), 0.0),
            };
            rows.push(Row {
                check: "bell-outcome",
                detail: format!(
                    "{}: {} -> {label} (p={})",
                    elements_name(elements),
                    o.projector,
                    sci(o.probability, 3)
                ),
                value: f,
                bound: "1 +- 1e-12".into(),
                pass: (f - 1.0).abs() <= 1e-12,
            });
        }
    }
    let vectors: Vec<_> = sfg_projectors(SfgElements::Two).iter().map(|p| p.vector()).collect();
    let mut worst: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((u.inner(v) - Complex64::new(expected, 0.0)).norm());
        }
    }
    rows.push(Row {
        check: "completeness",
        detail: "four SFG projectors are orthonormal".into(),
        value: worst,
        bound: "1e-12".into(),
        pass: worst <= 1e-12,
    });
    Ok(())
}

fn dfg(rows: &mut Vec<Row>) -> swapfid::Result<()> {
    for gt in AMPLITUDE_GTS {
        let d = dfg_spurious_amplitude(gt)?;
        let ratio = d.ratio();
        rows.push(Row {
            check: "dfg",
            detail: format!(
                "gt={gt}: |<2,1,0|U|1,0,1>|={} |<1,1,0|U|0,0,1>|={}",
                sci(d.dfg_amp.norm(), 3),
                sci(d.spdc_amp.norm(), 3)
            ),
            value: ratio,
            bound: "[0.5, 2]".into(),
            pass: (0.5..=2.0).contains(&ratio),
        });
    }
    Ok(())
}

pub fn run(format: Option<Format>) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    unitarity(&mut rows)?;
    amplitude_law(&mut rows)?;
    bell_outcomes(&mut rows)?;
    dfg(&mut rows)?;
    let dump = sfg_evolve(&fock_state(FockKet::new(2, 2, 0)), 0.05, 3)?.dump();
    let all_pass = rows.iter().all(|r| r.pass);

    let body = match format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<14} {:<70} {:>12} {:>12}  status",
                "check", "detail", "value", "bound"
            );
            for r in &rows {
                let value = if r.check == "bell-outcome" {
                    format!("{:.6}", r.value)
                } else {
                    sci(r.value, 3)
                };
                let status = if r.pass { "pass" } else { "FAIL" };
                let _ = writeln!(
                    out,
                    "{:<14} {:<70} {:>12} {:>12}  {status}",
                    r.check, r.detail, value, r.bound
                );
            }
            let _ = writeln!(out, "\nstate |2,2,0> after gt=0.05:\n{dump}");
            let _ = writeln!(
                out,
                "{}",
                if all_pass {
                    "all checks pass"
                } else {
                    "some checks FAILED"
                }
            );
            out
        }
        Format::Json => {
            let v = serde_json::json!({ "rows": rows, "state_dump": dump.lines().collect::<Vec<_>>(), "all_pass": all_pass });
            serde_json::to_string_pretty(&v).expect("plain JSON") + "\n"
        }
        Format::Csv => return Err(CliError::Usage("fock-check writes text or json".into())),
    };
    let status = if all_pass {
        Ok(())
    } else {
        Err(CliError::Failed("fock-space checks failed".into()))
    };
    Ok((body, status))
}

fn elements_name(elements: SfgElements) -> &'static str {
    match elements {
        SfgElements::One => "1 element",
        SfgElements::Two => "2 elements",
    }
}
