//! Mechanical checks of the mechanism's guarantees: truthfulness by
//! deviation replay, strong no-trade validity, balances and individual
//! rationality, and the threshold form of prices.

pub mod ledger;
pub mod price;
pub mod snt;
pub mod truthful;

pub use ledger::{check_ledgers, LedgerReport};
pub use price::{check_price_characterization, PriceReport};
pub use snt::{check_snt_valid, SntConstruction, SntState};
pub use truthful::{check_truthful, deviation_grid, Deviation, DeviationKind};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainConfig};
use crate::error::Result;
use crate::market::{AgentId, RandomSource};
use crate::rules::Rule;
use crate::sim::{generate_schedule, EnvConfig, Mechanism};

/// Outcome of one property over many cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub property: String,
    pub mechanism: String,
    pub cases: usize,
    pub violations: usize,
    /// A few violating cases, for the report.
    pub examples: Vec<String>,
}

impl PropertyResult {
    fn new(property: &str, mechanism: &str) -> PropertyResult {
        PropertyResult {
            property: property.to_string(),
            mechanism: mechanism.to_string(),
            cases: 0,
            violations: 0,
            examples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn merge(mut self, other: PropertyResult) -> PropertyResult {
        self.cases += other.cases;
        self.violations += other.violations;
        self.examples.extend(other.examples);
        self.examples.truncate(5);
        self
    }

    fn record(&mut self, violated: bool, example: impl FnOnce() -> String) {
        self.cases += 1;
        if violated {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(example());
            }
        }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<22} {:<16} cases={} violations={}", self.property, self.mechanism, self.cases, self.violations)?;
        for e in &self.examples {
            write!(f, "\n    {e}")?;
        }
        Ok(())
    }
}

/// Small markets used for replay-heavy checks.
pub fn small_env(k: crate::market::Period) -> EnvConfig {
    EnvConfig { arrival_rate: 3.0, k, volatility: 0.05, initial_mean: 10.0, agents_per_side: 5, ..EnvConfig::default() }
}

fn fold(results: Vec<PropertyResult>, property: &str, mechanism: &str) -> PropertyResult {
    results.into_iter().fold(PropertyResult::new(property, mechanism), PropertyResult::merge)
}

/// Balances and individual rationality on `schedules` generated markets.
pub fn ledger_suite(cfg: &ChainConfig, env: &EnvConfig, schedules: usize, seed: u64) -> Result<PropertyResult> {
    let name = cfg.rule.name();
    let parts = (0..schedules as u64)
        .into_par_iter()
        .map(|i| {
            let src = RandomSource::new(seed).with_trial(i);
            let schedule = generate_schedule(env, &src)?;
            let out = chain::run(cfg, &schedule, &src)?;
            let report = check_ledgers(&out, &schedule);
            let mut r = PropertyResult::new("ledgers", name);
            r.record(!report.passed(), || format!("trial {i}: {report:?}"));
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(parts, "ledgers", name))
}

/// Deviation replay for `agents_per_case` agents of each of `schedules`
/// small markets, each under `seeds` different random draws. One case is
/// one (agent, deviation) pair.
pub fn truthfulness_suite(
    mechanism: &Mechanism,
    env: &EnvConfig,
    schedules: usize,
    seeds: usize,
    agents_per_case: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let name = mechanism.name();
    let cases: Vec<(u64, u64)> = (0..schedules as u64).flat_map(|i| (0..seeds as u64).map(move |j| (i, j))).collect();
    let parts = cases
        .into_par_iter()
        .map(|(i, j)| {
            let schedule = generate_schedule(env, &RandomSource::new(seed).with_trial(i))?;
            let src = RandomSource::new(seed.wrapping_add(1 + j)).with_trial(i);
            let stride = (schedule.len() / agents_per_case.max(1)).max(1);
            let offset = (j as usize) % stride;
            let agents: Vec<AgentId> =
                schedule.iter().skip(offset).step_by(stride).take(agents_per_case).map(|a| a.id).collect();
            let mut r = PropertyResult::new("truthful", name);
            let (k, feasibility, prices_from) = match mechanism {
                Mechanism::Chain(cfg) => (cfg.k, cfg.feasibility, Some(chain::run(cfg, &schedule, &src)?)),
                _ => (env.k, chain::Feasibility::Relaxed, None),
            };
            for id in agents {
                let truth = schedule.iter().find(|a| a.id == id).expect("listed agent");
                let prices = prices_from.as_ref().map(|o| truthful::observed_prices(o, truth, k)).unwrap_or_default();
                let grid = deviation_grid(truth, k, feasibility, &prices);
                let found = check_truthful(mechanism, &schedule, id, &grid, &src)?;
                r.cases += grid.len() - found.len().min(grid.len());
                for v in found {
                    r.record(true, || format!("schedule {i} seed {j}: {v:?}"));
                }
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(parts, "truthful", name))
}

/// Strong no-trade validity of construction `c` over `states` random
/// markets with at most four offers per side.
pub fn snt_suite(rule: &Rule, c: SntConstruction, states: usize, seed: u64) -> PropertyResult {
    let label = format!("snt_{}", c.name());
    let parts: Vec<PropertyResult> = (0..states as u64)
        .into_par_iter()
        .map(|i| {
            let state = snt::random_state(rule, &RandomSource::new(seed).with_trial(i), 4);
            let found = snt::check_state(c, &state);
            let mut r = PropertyResult::new(&label, rule.name());
            r.record(!found.is_empty(), || format!("state {i}: {:?}", found[0]));
            r
        })
        .collect();
    fold(parts, &label, rule.name())
}

/// Threshold form of the outcome for every agent of `schedules` small markets.
pub fn price_suite(cfg: &ChainConfig, env: &EnvConfig, schedules: usize, seed: u64) -> Result<PropertyResult> {
    let name = cfg.rule.name();
    let parts = (0..schedules as u64)
        .into_par_iter()
        .map(|i| {
            let src = RandomSource::new(seed).with_trial(i);
            let schedule = generate_schedule(env, &src)?;
            let mut r = PropertyResult::new("price_threshold", name);
            for a in &schedule {
                let rep = check_price_characterization(cfg, &schedule, a.id, &src)?;
                r.record(!rep.passed(), || format!("schedule {i}: {rep:?}"));
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(parts, "price_threshold", name))
}

/// Every applicable check for one mechanism.
pub fn verify_mechanism(mechanism: &Mechanism, env: &EnvConfig, schedules: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    let small = EnvConfig { k: env.k.min(4), ..small_env(env.k.min(4)) };
    let small_mech = match mechanism {
        Mechanism::Chain(cfg) => Mechanism::Chain(ChainConfig { k: small.k, initial_price: small.initial_mean, ..cfg.clone() }),
        other => other.clone(),
    };
    let mut out = vec![truthfulness_suite(&small_mech, &small, schedules, 10, 3, seed)?];
    if let Mechanism::Chain(cfg) = mechanism {
        out.push(ledger_suite(cfg, env, schedules, seed)?);
        if let Mechanism::Chain(small_cfg) = &small_mech {
            out.push(price_suite(small_cfg, &small, schedules.min(50), seed)?);
        }
        for c in snt::valid_constructions(&cfg.rule) {
            out.push(snt_suite(&cfg.rule, c, 1000, seed));
        }
    }
    Ok(out)
}
