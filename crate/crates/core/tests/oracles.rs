use approx::assert_relative_eq;
use swapfid::lo_bsm::{fidelity_general, p_herald};
use swapfid::nlo_bsm::fidelity_nlo;
use swapfid::oracle::{
    default_grid, exact_fidelity_lo, exact_fidelity_nlo, mc_fidelity_lo, mc_fidelity_nlo, verify, VerifySettings,
};
use swapfid::{OracleConfig, SwapScenario};

fn scenario(eps_a: f64, eps_b: f64, eta_a: f64, eta_b: f64) -> SwapScenario {
    SwapScenario::new(eps_a, eps_b, eta_a, eta_b).unwrap()
}

#[test]
fn monte_carlo_is_unbiased_across_seeds() {
    let s = scenario(0.15, 0.25, 0.6, 0.4);
    let truth = fidelity_general(&s).unwrap().fidelity;
    let zs: Vec<f64> = (0..100)
        .map(|seed| {
            let est = mc_fidelity_lo(&s, &OracleConfig::monte_carlo(20_000, seed)).unwrap();
            (est.value - truth) / est.std_error
        })
        .collect();
    let mean = zs.iter().sum::<f64>() / zs.len() as f64;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (zs.len() - 1) as f64;
    // mean of 100 standard normals has sd 0.1
    assert!(mean.abs() < 0.4, "mean z {mean}");
    assert!((0.6..1.5).contains(&var), "var z {var}");
    assert!(zs.iter().filter(|z| z.abs() > 3.0).count() <= 2);
}

#[test]
fn nlo_monte_carlo_matches_loss_free_value() {
    let s = scenario(0.2, 0.1, 0.9, 0.05);
    let est = mc_fidelity_nlo(&s, 0.01, &OracleConfig::monte_carlo(2_000_000, 3)).unwrap();
    let truth = fidelity_nlo(s.source_a, s.source_b).unwrap();
    assert!(
        (est.value - truth).abs() <= 5.0 * est.std_error,
        "{} vs {truth}",
        est.value
    );
}

#[test]
fn exact_oracle_is_symmetric_under_source_swap() {
    let cfg = OracleConfig::exact(150);
    for (ea, eb, ta, tb) in [(0.3, 0.05, 0.2, 0.9), (0.01, 0.4, 1.0, 0.01), (0.2, 0.2, 0.5, 0.5)] {
        let s = scenario(ea, eb, ta, tb);
        let a = exact_fidelity_lo(&s, &cfg).unwrap();
        let b = exact_fidelity_lo(&s.swapped(), &cfg).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
        assert_relative_eq!(a.value, fidelity_general(&s).unwrap().fidelity, epsilon = 1e-10);
    }
}

#[test]
fn exact_oracle_error_shrinks_with_cutoff() {
    let s = scenario(0.45, 0.4, 0.7, 0.8);
    let closed = fidelity_general(&s).unwrap().fidelity;
    let mut last = f64::INFINITY;
    for n in [5, 10, 20, 40, 80] {
        let est = exact_fidelity_lo(&s, &OracleConfig::exact(n)).unwrap();
        let err = (est.value - closed).abs();
        assert!(err <= est.tail_bound + 1e-15, "n={n}: {err} > {}", est.tail_bound);
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-10);
}

#[test]
fn exact_nlo_does_not_depend_on_sfg_probability() {
    let s = scenario(0.1, 0.3, 0.25, 0.75);
    let cfg = OracleConfig::exact(200);
    let f = fidelity_nlo(s.source_a, s.source_b).unwrap();
    for p_sfg in [1e-6, 1e-3, 0.1] {
        assert_relative_eq!(
            exact_fidelity_nlo(&s, p_sfg, &cfg).unwrap().value,
            f,
            max_relative = 1e-12
        );
    }
}

#[test]
fn herald_probability_matches_oracle_sampling() {
    let s = scenario(0.2, 0.2, 0.3, 0.3);
    let est = mc_fidelity_lo(&s, &OracleConfig::monte_carlo(1_000_000, 9)).unwrap();
    let rate = est.heralds as f64 / 1e6;
    let p = p_herald(&s);
    let sd = (p * (1.0 - p) / 1e6).sqrt();
    assert!((rate - p).abs() < 5.0 * sd, "{rate} vs {p}");
}

#[test]
fn default_grid_verifies() {
    let settings = VerifySettings {
        samples: 200_000,
        ..VerifySettings::default()
    };
    let report = verify(&default_grid(), &settings).unwrap();
    assert!(
        report.all_pass(),
        "{:?}",
        report
            .records
            .iter()
            .filter(|r| r.pass == Some(false))
            .collect::<Vec<_>>()
    );
    assert_eq!(report.failed, 0);
    assert!(report.passed >= 2 * default_grid().len());
}
