//! Brute-force references for the closed-form fidelities.
//!
//! Exact-sum mode enumerates the arrival law term by term up to `n, m <= n_max`,
//! stratified per source so that the cost is `O(n_max²)` rather than
//! `O(n_max⁴)`. Monte Carlo mode samples the generative model directly:
//! geometric pair numbers, binomial thinning, and for SFG an accept/reject
//! herald with probability `k·l·p_SFG`.
//!
//! Monte Carlo trials are cut into fixed chunks of [`CHUNK_SIZE`]; chunk `i`
//! draws from a [`ChaCha8Rng`] seeded with the user seed on stream `i`. The
//! partition does not depend on the worker count and the merged counts are
//! integers, so the estimate is bit-identical for any number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lo_bsm::fidelity_general;
use crate::nlo_bsm::{check_p_sfg, fidelity_nlo};
use crate::photon_stats::{binomial_pmf, pair_number_pmf, truncation_tail_bound, SourceParams, SwapScenario};

/// Name of the generator behind every Monte Carlo estimate.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// Trials per RNG stream.
pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    ExactSum,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    pub n_max: u64,
    pub samples: u64,
    pub seed: u64,
    pub mode: OracleMode,
    /// Threads for Monte Carlo; 0 uses the rayon default. Never changes results.
    #[serde(skip)]
    pub workers: usize,
}

impl OracleConfig {
    pub fn exact(n_max: u64) -> Self {
        Self {
            n_max,
            samples: 1,
            seed: 0,
            mode: OracleMode::ExactSum,
            workers: 0,
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            n_max: 1,
            samples,
            seed,
            mode: OracleMode::MonteCarlo,
            workers: 0,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    fn validate(&self, mode: OracleMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::config("mode", format!("this oracle runs in {mode:?} mode")));
        }
        if self.n_max < 1 {
            return Err(Error::config("n_max", "must be at least 1"));
        }
        if self.samples < 1 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub value: f64,
    /// Zero for exact sums.
    pub std_error: f64,
    /// Bound on `|value - limit|` from truncation; zero for Monte Carlo.
    pub tail_bound: f64,
    /// Heralded trials behind a Monte Carlo estimate.
    #[serde(skip)]
    pub heralds: u64,
}

/// Truncated arrival masses of one source, summed over `n <= n_max`.
struct SourceMoments {
    /// `Σ_n P(n) P(k=0|n)`
    zero: f64,
    /// `Σ_n P(n) P(k=1|n)`
    one: f64,
    /// `Σ_n Σ_{k>=2} P(n) P(k|n)`
    many: f64,
    /// `Σ_n Σ_k k P(n) P(k|n)`
    mean: f64,
    /// `P(n=1) P(k=1|1)`
    single: f64,
}

impl SourceMoments {
    fn new(source: SourceParams, eta: f64, n_max: u64) -> Self {
        let mut m = Self {
            zero: 0.0,
            one: 0.0,
            many: 0.0,
            mean: 0.0,
            single: pair_number_pmf(source, 1) * binomial_pmf(1, 1, eta),
        };
        for n in 0..=n_max {
            let pn = pair_number_pmf(source, n);
            if pn == 0.0 {
                continue;
            }
            for k in 0..=n {
                let term = pn * binomial_pmf(n, k, eta);
                match k {
                    0 => m.zero += term,
                    1 => m.one += term,
                    _ => m.many += term,
                }
                m.mean += k as f64 * term;
            }
        }
        m
    }

    fn total(&self) -> f64 {
        self.zero + self.one + self.many
    }
}

/// First-moment tail `Σ_{n>N} n (1-ε)εⁿ = ε^(N+1) (N+1 + ε/(1-ε))`.
fn mean_tail(source: SourceParams, n_max: u64) -> f64 {
    let eps = source.epsilon();
    eps.powf((n_max + 1) as f64) * ((n_max + 1) as f64 + eps / (1.0 - eps))
}

/// Linear-optics fidelity by summing `P(k|n,l|m)` over every event with `k + l >= 2`.
pub fn exact_fidelity_lo(scenario: &SwapScenario, cfg: &OracleConfig) -> Result<OracleEstimate> {
    cfg.validate(OracleMode::ExactSum)?;
    let a = SourceMoments::new(scenario.source_a, scenario.eta_a(), cfg.n_max);
    let b = SourceMoments::new(scenario.source_b, scenario.eta_b(), cfg.n_max);
    let herald = a.many * b.total() + a.one * (b.one + b.many) + a.zero * b.many;
    if herald <= 0.0 {
        return Err(Error::UndefinedFidelity(
            "no truncated event delivers two photons".into(),
        ));
    }
    let value = a.single * b.single / herald;
    let omitted = truncation_tail_bound(scenario, cfg.n_max);
    Ok(OracleEstimate {
        value,
        std_error: 0.0,
        tail_bound: value * omitted / herald,
        heralds: 0,
    })
}

/// SFG fidelity by summing `k·l·p_SFG·P(k|n,l|m)`; `p_SFG` cancels and only its validity is checked.
pub fn exact_fidelity_nlo(scenario: &SwapScenario, p_sfg: f64, cfg: &OracleConfig) -> Result<OracleEstimate> {
    cfg.validate(OracleMode::ExactSum)?;
    check_p_sfg(p_sfg)?;
    let a = SourceMoments::new(scenario.source_a, scenario.eta_a(), cfg.n_max);
    let b = SourceMoments::new(scenario.source_b, scenario.eta_b(), cfg.n_max);
    let herald = a.mean * b.mean;
    if herald <= 0.0 {
        return Err(Error::UndefinedFidelity(
            "no truncated event can produce an SFG photon".into(),
        ));
    }
    let value = (a.single / a.mean) * (b.single / b.mean);
    let ra = scenario.eta_a() * mean_tail(scenario.source_a, cfg.n_max) / a.mean;
    let rb = scenario.eta_b() * mean_tail(scenario.source_b, cfg.n_max) / b.mean;
    Ok(OracleEstimate {
        value,
        std_error: 0.0,
        tail_bound: value * (ra + rb + ra * rb),
        heralds: 0,
    })
}

/// Draws `(k, n)` for one source.
struct SourceSampler {
    pairs: Geometric,
    eta: f64,
}

impl SourceSampler {
    fn new(source: SourceParams, eta: f64) -> Result<Self> {
        let pairs = Geometric::new(1.0 - source.epsilon())
            .map_err(|_| Error::domain("epsilon", source.epsilon(), "invalid geometric parameter"))?;
        Ok(Self { pairs, eta })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (u64, u64) {
        let n = self.pairs.sample(rng);
        let k = match n {
            0 => 0,
            _ if self.eta == 1.0 => n,
            1 => u64::from(rng.random::<f64>() < self.eta),
            _ => Binomial::new(n, self.eta).expect("eta validated").sample(rng),
        };
        (k, n)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    heralds: u64,
    faithful: u64,
}

impl Tally {
    fn merge(self, other: Self) -> Self {
        Self {
            heralds: self.heralds + other.heralds,
            faithful: self.faithful + other.faithful,
        }
    }
}

fn run_chunks<F>(cfg: &OracleConfig, trial: F) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Tally> + Sync,
{
    let chunks = cfg.samples.div_ceil(CHUNK_SIZE);
    let run_chunk = |i: u64| -> Result<Tally> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i);
        let len = CHUNK_SIZE.min(cfg.samples - i * CHUNK_SIZE);
        let mut tally = Tally::default();
        for _ in 0..len {
            tally = tally.merge(trial(&mut rng)?);
        }
        Ok(tally)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(run_chunk)
            .try_reduce(Tally::default, |x, y| Ok(x.merge(y)))
    })
}

fn ratio_estimate(tally: Tally) -> Result<OracleEstimate> {
    if tally.heralds == 0 {
        return Err(Error::InsufficientStatistics("no heralded trial in the sample".into()));
    }
    let h = tally.heralds as f64;
    let value = tally.faithful as f64 / h;
    Ok(OracleEstimate {
        value,
        std_error: (value * (1.0 - value) / h).sqrt(),
        tail_bound: 0.0,
        heralds: tally.heralds,
    })
}

/// Linear-optics fidelity as the faithful fraction of sampled events with `k + l >= 2`.
pub fn mc_fidelity_lo(scenario: &SwapScenario, cfg: &OracleConfig) -> Result<OracleEstimate> {
    cfg.validate(OracleMode::MonteCarlo)?;
    let a = SourceSampler::new(scenario.source_a, scenario.eta_a())?;
    let b = SourceSampler::new(scenario.source_b, scenario.eta_b())?;
    let tally = run_chunks(cfg, |rng| {
        let (k, n) = a.sample(rng);
        let (l, m) = b.sample(rng);
        let herald = k + l >= 2;
        Ok(Tally {
            heralds: u64::from(herald),
            faithful: u64::from(herald && (k, n, l, m) == (1, 1, 1, 1)),
        })
    })?;
    ratio_estimate(tally)
}

/// SFG fidelity with each event heralding with probability `k·l·p_SFG`.
pub fn mc_fidelity_nlo(scenario: &SwapScenario, p_sfg: f64, cfg: &OracleConfig) -> Result<OracleEstimate> {
    cfg.validate(OracleMode::MonteCarlo)?;
    check_p_sfg(p_sfg)?;
    let a = SourceSampler::new(scenario.source_a, scenario.eta_a())?;
    let b = SourceSampler::new(scenario.source_b, scenario.eta_b())?;
    let tally = run_chunks(cfg, |rng| {
        let (k, n) = a.sample(rng);
        let (l, m) = b.sample(rng);
        if k == 0 || l == 0 {
            return Ok(Tally::default());
        }
        let w = (k * l) as f64 * p_sfg;
        if w > 1.0 {
            return Err(Error::ModelValidity(format!(
                "sampled k={k}, l={l} gives SFG probability {w} > 1 at p_sfg={p_sfg}"
            )));
        }
        let herald = rng.random::<f64>() < w;
        Ok(Tally {
            heralds: u64::from(herald),
            faithful: u64::from(herald && (k, n, l, m) == (1, 1, 1, 1)),
        })
    })?;
    ratio_estimate(tally)
}

/// One scenario of a verification grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub scenario: SwapScenario,
    pub p_sfg: f64,
}

/// Scenarios the `verify` command checks when no grid is given.
pub fn default_grid() -> Vec<GridPoint> {
    [
        (0.2, 0.2, 0.5, 0.5, 0.05),
        (0.1, 0.05, 0.9, 0.3, 0.05),
        (0.2, 0.05, 0.3, 0.9, 1e-3),
        (0.3, 0.3, 0.7, 0.2, 0.05),
        (0.05, 0.05, 1.0, 1.0, 0.05),
        (0.15, 0.02, 1.0, 0.8, 0.05),
    ]
    .into_iter()
    .map(|(ea, eb, ha, hb, p_sfg)| GridPoint {
        scenario: SwapScenario::new(ea, eb, ha, hb).expect("valid grid"),
        p_sfg,
    })
    .collect()
}

/// Parses a grid: a header naming `eps_a,eps_b,eta_a,eta_b,p_sfg` in any order,
/// then one comma-separated row per scenario. `#` starts a comment.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>> {
    const COLUMNS: [&str; 5] = ["eps_a", "eps_b", "eta_a", "eta_b", "p_sfg"];
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::config("grid", "file has no header"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let position = |col: &str| {
        names
            .iter()
            .position(|n| *n == col)
            .ok_or_else(|| Error::config("grid", format!("header lacks column `{col}`")))
    };
    let index: Vec<usize> = COLUMNS.iter().map(|c| position(c)).collect::<Result<_>>()?;

    let mut grid = Vec::new();
    for (line_no, line) in lines {
        let key = format!("grid line {line_no}");
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(Error::config(
                key,
                format!("expected {} fields, found {}", names.len(), fields.len()),
            ));
        }
        let value = |col: usize| -> Result<f64> {
            fields[index[col]]
                .parse()
                .map_err(|_| Error::config(&key, format!("`{}` is not a number", fields[index[col]])))
        };
        let scenario = SwapScenario::new(value(0)?, value(1)?, value(2)?, value(3)?)
            .map_err(|e| Error::config(&key, e.to_string()))?;
        grid.push(GridPoint {
            scenario,
            p_sfg: value(4)?,
        });
    }
    if grid.is_empty() {
        return Err(Error::config("grid", "no scenario rows"));
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySettings {
    pub n_max: u64,
    pub samples: u64,
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
    /// Perturbs every closed form by one part in a thousand to prove that the
    /// comparison can fail.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub mutate: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            n_max: 200,
            samples: 1_000_000,
            seed: 1,
            workers: 0,
            mutate: false,
        }
    }
}

/// Relative perturbation applied by a mutation run.
pub const MUTATION: f64 = 1e-3;

/// Closed-form vs oracle comparison for one scenario, quantity and method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub scenario: SwapScenario,
    pub p_sfg: Option<f64>,
    pub quantity: &'static str,
    pub method: OracleMode,
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub tail_bound: Option<f64>,
    pub closed_form: Option<f64>,
    pub abs_diff: Option<f64>,
    /// `None` when the row could not be compared.
    pub pass: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub rng: &'static str,
    pub settings: VerifySettings,
    pub records: Vec<VerifyRecord>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

fn compare(
    point: &GridPoint,
    quantity: &'static str,
    method: OracleMode,
    closed: Result<f64>,
    estimate: Result<OracleEstimate>,
    mutate: bool,
) -> VerifyRecord {
    let mut record = VerifyRecord {
        scenario: point.scenario,
        p_sfg: (quantity == "f_nlo").then_some(point.p_sfg),
        quantity,
        method,
        value: None,
        std_error: None,
        tail_bound: None,
        closed_form: None,
        abs_diff: None,
        pass: None,
        error: None,
    };
    let (closed, est) = match (closed, estimate) {
        (Ok(c), Ok(e)) => (c, e),
        (Err(e), _) | (_, Err(e)) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let closed = if mutate { closed * (1.0 + MUTATION) } else { closed };
    let diff = (est.value - closed).abs();
    let pass = match method {
        OracleMode::ExactSum => diff <= est.tail_bound.max(1e-10),
        OracleMode::MonteCarlo => {
            // The null-hypothesis error keeps the test meaningful when the
            // sample happens to be all faithful or all unfaithful.
            let null = (closed * (1.0 - closed) / est.heralds as f64).sqrt();
            diff <= 5.0 * est.std_error.max(null)
        }
    };
    record.value = Some(est.value);
    record.std_error = Some(est.std_error);
    record.tail_bound = Some(est.tail_bound);
    record.closed_form = Some(closed);
    record.abs_diff = Some(diff);
    record.pass = Some(pass);
    record
}

/// Compares both fidelities against both oracles on every grid point.
///
/// Per-row failures (e.g. no heralds) are recorded in the report; only invalid
/// settings are an error.
pub fn verify(grid: &[GridPoint], settings: &VerifySettings) -> Result<VerifyReport> {
    if settings.n_max < 1 {
        return Err(Error::config("n_max", "must be at least 1"));
    }
    if settings.samples < 1 {
        return Err(Error::config("samples", "must be at least 1"));
    }
    let exact = OracleConfig::exact(settings.n_max);
    let mc = OracleConfig {
        n_max: 1,
        samples: settings.samples,
        seed: settings.seed,
        mode: OracleMode::MonteCarlo,
        workers: settings.workers,
    };
    let mut records = Vec::with_capacity(4 * grid.len());
    for point in grid {
        let s = &point.scenario;
        let lo = || fidelity_general(s).map(|r| r.fidelity);
        let nlo = || check_p_sfg(point.p_sfg).and_then(|_| fidelity_nlo(s.source_a, s.source_b));
        let m = settings.mutate;
        records.push(compare(
            point,
            "f_lo",
            OracleMode::ExactSum,
            lo(),
            exact_fidelity_lo(s, &exact),
            m,
        ));
        records.push(compare(
            point,
            "f_lo",
            OracleMode::MonteCarlo,
            lo(),
            mc_fidelity_lo(s, &mc),
            m,
        ));
        records.push(compare(
            point,
            "f_nlo",
            OracleMode::ExactSum,
            nlo(),
            exact_fidelity_nlo(s, point.p_sfg, &exact),
            m,
        ));
        records.push(compare(
            point,
            "f_nlo",
            OracleMode::MonteCarlo,
            nlo(),
            mc_fidelity_nlo(s, point.p_sfg, &mc),
            m,
        ));
    }
    let count = |v: Option<bool>| records.iter().filter(|r| r.pass == v).count();
    Ok(VerifyReport {
        rng: RNG_ALGORITHM,
        settings: *settings,
        passed: count(Some(true)),
        failed: count(Some(false)),
        skipped: count(None),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lo_bsm::fidelity_general;
    use approx::assert_relative_eq;

    fn scenario(ea: f64, eb: f64, ha: f64, hb: f64) -> SwapScenario {
        SwapScenario::new(ea, eb, ha, hb).unwrap()
    }

    #[test]
    fn exact_lo_matches_closed_form() {
        let s = scenario(0.2, 0.2, 0.5, 0.5);
        let est = exact_fidelity_lo(&s, &OracleConfig::exact(200)).unwrap();
        let closed = fidelity_general(&s).unwrap().fidelity;
        assert!((est.value - closed).abs() <= 1e-10);
        assert!(est.tail_bound < 1e-100);
        assert_eq!(est.std_error, 0.0);

        let s = scenario(0.2, 0.05, 0.3, 0.9);
        let est = exact_fidelity_lo(&s, &OracleConfig::exact(200)).unwrap();
        assert!((est.value - fidelity_general(&s).unwrap().fidelity).abs() <= 1e-10);
    }

    #[test]
    fn exact_lo_dark_and_single_source() {
        let cfg = OracleConfig::exact(50);
        assert!(matches!(
            exact_fidelity_lo(&scenario(0.0, 0.0, 0.5, 0.5), &cfg),
            Err(Error::UndefinedFidelity(_))
        ));
        // One bright source still heralds through its own double pairs, all unfaithfully.
        let est = exact_fidelity_lo(&scenario(0.2, 0.0, 0.5, 0.5), &cfg).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn exact_lo_weak_lossless_limit() {
        let est = exact_fidelity_lo(&scenario(1e-4, 1e-4, 1.0, 1.0), &OracleConfig::exact(20)).unwrap();
        assert!((est.value - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn exact_sums_decrease_monotonically_past_the_mode() {
        let s = scenario(0.6, 0.5, 0.7, 0.4);
        let mut last = f64::INFINITY;
        for n_max in 1..60 {
            let v = exact_fidelity_lo(&s, &OracleConfig::exact(n_max)).unwrap().value;
            assert!(v <= last);
            last = v;
        }
        let closed = fidelity_general(&s).unwrap().fidelity;
        let est = exact_fidelity_lo(&s, &OracleConfig::exact(10)).unwrap();
        assert!((est.value - closed).abs() <= est.tail_bound);
        let est = exact_fidelity_nlo(&s, 1e-3, &OracleConfig::exact(10)).unwrap();
        assert!((est.value - fidelity_nlo(s.source_a, s.source_b).unwrap()).abs() <= est.tail_bound);
    }

    #[test]
    fn exact_nlo_examples() {
        let eps = crate::photon_stats::epsilon_from_p(0.2).unwrap();
        let cfg = OracleConfig::exact(200);
        let base = exact_fidelity_nlo(&scenario(eps, eps, 0.5, 0.5), 1e-3, &cfg).unwrap();
        assert!((base.value - 0.2742).abs() < 1e-4);
        for (ha, hb) in [(0.1, 0.9), (1.0, 1.0), (1e-3, 0.3)] {
            let v = exact_fidelity_nlo(&scenario(eps, eps, ha, hb), 1e-3, &cfg)
                .unwrap()
                .value;
            assert!((v - base.value).abs() <= 1e-12);
        }
        let other_p = exact_fidelity_nlo(&scenario(eps, eps, 0.5, 0.5), 0.05, &cfg).unwrap();
        assert_eq!(other_p.value, base.value);
        assert!(exact_fidelity_nlo(&scenario(eps, eps, 0.5, 0.5), 1.5, &cfg).is_err());
    }

    #[test]
    fn config_mode_and_bounds_are_checked() {
        let s = scenario(0.2, 0.2, 0.5, 0.5);
        assert!(matches!(
            exact_fidelity_lo(&s, &OracleConfig::monte_carlo(10, 1)),
            Err(Error::Config { .. })
        ));
        assert!(mc_fidelity_lo(&s, &OracleConfig::exact(10)).is_err());
        assert!(exact_fidelity_lo(&s, &OracleConfig::exact(0)).is_err());
        assert!(mc_fidelity_lo(&s, &OracleConfig::monte_carlo(0, 1)).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible_and_worker_independent() {
        let s = scenario(0.2, 0.1, 0.6, 0.4);
        let cfg = OracleConfig::monte_carlo(300_000, 42);
        let one = mc_fidelity_lo(&s, &cfg.with_workers(1)).unwrap();
        let again = mc_fidelity_lo(&s, &cfg.with_workers(1)).unwrap();
        let four = mc_fidelity_lo(&s, &cfg.with_workers(4)).unwrap();
        assert_eq!(one.value.to_bits(), again.value.to_bits());
        assert_eq!(one.value.to_bits(), four.value.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
        let other_seed = mc_fidelity_lo(&s, &OracleConfig::monte_carlo(300_000, 43)).unwrap();
        assert_ne!(one.value.to_bits(), other_seed.value.to_bits());
    }

    #[test]
    fn monte_carlo_agrees_with_closed_forms() {
        let s = scenario(0.2, 0.2, 0.5, 0.5);
        let est = mc_fidelity_lo(&s, &OracleConfig::monte_carlo(1_000_000, 7)).unwrap();
        let closed = fidelity_general(&s).unwrap().fidelity;
        assert!((est.value - closed).abs() <= 5.0 * est.std_error);

        let s = scenario(0.2, 0.2, 0.9, 0.1);
        let est = mc_fidelity_nlo(&s, 1e-2, &OracleConfig::monte_carlo(2_000_000, 7)).unwrap();
        assert!((est.value - fidelity_nlo(s.source_a, s.source_b).unwrap()).abs() <= 5.0 * est.std_error);
    }

    #[test]
    fn monte_carlo_edge_cases() {
        let dark = scenario(0.0, 0.0, 0.5, 0.5);
        assert!(matches!(
            mc_fidelity_lo(&dark, &OracleConfig::monte_carlo(1000, 1)),
            Err(Error::InsufficientStatistics(_))
        ));
        let faint = scenario(1e-4, 1e-4, 1.0, 1.0);
        let est = mc_fidelity_nlo(&faint, 1.0, &OracleConfig::monte_carlo(200_000, 3));
        match est {
            Ok(e) => assert_relative_eq!(e.value, 1.0),
            Err(Error::InsufficientStatistics(_)) => {}
            Err(e) => panic!("{e}"),
        }
        let bright = scenario(0.5, 0.5, 1.0, 1.0);
        assert!(matches!(
            mc_fidelity_nlo(&bright, 0.6, &OracleConfig::monte_carlo(100_000, 3)),
            Err(Error::ModelValidity(_))
        ));
    }

    #[test]
    fn grid_parsing() {
        let grid = parse_grid("# comment\neta_a, eta_b, eps_a, eps_b, p_sfg\n0.5,0.4,0.1,0.2,1e-3\n\n").unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid[0].scenario, scenario(0.1, 0.2, 0.5, 0.4));
        assert_eq!(grid[0].p_sfg, 1e-3);
        let err = parse_grid("eps_a,eps_b,eta_a,eta_b,p_sfg\n0.1,0.2,x,0.4,1e-3\n").unwrap_err();
        assert!(err.to_string().contains("grid line 2"));
        assert!(parse_grid("eps_a,eps_b,eta_a,eta_b\n").is_err());
        assert!(parse_grid("eps_a,eps_b,eta_a,eta_b,p_sfg\n0.1,0.2,1.5,0.4,1e-3\n").is_err());
    }

    #[test]
    fn mutation_is_detected() {
        let grid = &default_grid()[..1];
        let settings = VerifySettings {
            samples: 200_000,
            ..VerifySettings::default()
        };
        assert!(verify(grid, &settings).unwrap().all_pass());
        assert!(verify(grid, &VerifySettings { samples: 0, ..settings }).is_err());
        let report = verify(
            grid,
            &VerifySettings {
                mutate: true,
                ..settings
            },
        )
        .unwrap();
        assert!(!report.all_pass());
        assert!(report
            .records
            .iter()
            .filter(|r| r.method == OracleMode::ExactSum)
            .all(|r| r.pass == Some(false)));
    }
}
