//! Named mechanisms and trial execution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::TrialMetrics;
use crate::baselines::{blum, greedy, naive, offline, zip, Trade};
use crate::chain::{self, AdmissionMode, ChainConfig, ChainOutcome, Feasibility};
use crate::error::{Error, Result};
use crate::market::{AgentType, Money, Period, Purpose, RandomSource};
use crate::rules::{PriceVariant, Rule, RuleParams, RULE_NAMES};

pub const BASELINE_NAMES: [&str; 5] = ["greedy", "blum", "naive_tr_da", "zip", "offline"];

/// Every accepted mechanism name.
pub fn mechanism_names() -> impl Iterator<Item = &'static str> {
    RULE_NAMES.iter().chain(BASELINE_NAMES.iter()).copied()
}

/// Settings shared by all mechanisms of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismParams {
    pub rule: RuleParams,
    pub tau: Period,
    pub feasibility: Feasibility,
    pub admission: AdmissionMode,
    /// Starting price of history-based rules; the environment mean if unset.
    pub initial_price: Option<Money>,
    pub zip_traders: usize,
    pub zip_training_trials: u32,
}

impl Default for MechanismParams {
    fn default() -> MechanismParams {
        MechanismParams {
            rule: RuleParams::default(),
            tau: 1,
            feasibility: Feasibility::Relaxed,
            admission: AdmissionMode::Replay,
            initial_price: None,
            zip_traders: 5,
            zip_training_trials: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    Chain(ChainConfig),
    /// Fixed-price chain with the price drawn once per trial.
    Blum(ChainConfig),
    Greedy,
    NaiveTrDa,
    Zip(zip::ZipConfig),
    Offline,
}

impl Mechanism {
    /// Build the mechanism called `name` for maximal patience `k`.
    /// `mean` is the environment's initial mean valuation.
    pub fn from_name(name: &str, params: &MechanismParams, k: Period, mean: Money) -> Result<Mechanism> {
        let chain_config = |rule: Rule| ChainConfig {
            rule,
            k,
            tau: params.tau.max(1),
            feasibility: params.feasibility,
            admission: params.admission,
            initial_price: params.initial_price.unwrap_or(mean),
        };
        Ok(match name {
            "greedy" => Mechanism::Greedy,
            "naive_tr_da" => Mechanism::NaiveTrDa,
            "offline" => Mechanism::Offline,
            "zip" => Mechanism::Zip(zip::ZipConfig {
                traders: params.zip_traders,
                training_trials: params.zip_training_trials,
                ..zip::ZipConfig::new(k)
            }),
            "blum" => Mechanism::Blum(chain_config(Rule::PriceBased { variant: PriceVariant::Fixed { price: 0.0 } })),
            other => {
                if !RULE_NAMES.contains(&other) {
                    return Err(Error::Config(format!("unknown mechanism {other:?}")));
                }
                Mechanism::Chain(chain_config(Rule::from_name(other, &params.rule)?))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Chain(c) => c.rule.name(),
            Mechanism::Blum(_) => "blum",
            Mechanism::Greedy => "greedy",
            Mechanism::NaiveTrDa => "naive_tr_da",
            Mechanism::Zip(_) => "zip",
            Mechanism::Offline => "offline",
        }
    }

    /// Trades made on `schedule`.
    pub fn trades(&self, schedule: &[AgentType], source: &RandomSource) -> Result<Vec<Trade>> {
        Ok(match self {
            Mechanism::Chain(cfg) => chain_trades(&chain::run(cfg, schedule, source)?),
            Mechanism::Blum(cfg) => {
                let cfg = ChainConfig {
                    rule: Rule::PriceBased { variant: PriceVariant::Fixed { price: blum_price(schedule, source)? } },
                    ..cfg.clone()
                };
                chain_trades(&chain::run(&cfg, schedule, source)?)
            }
            Mechanism::Greedy => greedy::run(schedule),
            Mechanism::NaiveTrDa => naive::run(schedule, source),
            Mechanism::Zip(cfg) => zip::run(schedule, cfg, source),
            Mechanism::Offline => offline::trades(schedule),
        })
    }
}

/// Price drawn for the randomized fixed-price rule, using the range of
/// absolute values in the schedule.
pub fn blum_price(schedule: &[AgentType], source: &RandomSource) -> Result<Money> {
    let abs = schedule.iter().map(|a| a.value.abs());
    let w_min = abs.clone().fold(Money::INFINITY, Money::min);
    let w_max = abs.fold(0.0, Money::max);
    if schedule.is_empty() || w_max <= w_min {
        return Ok(w_max);
    }
    let u: f64 = source.rng(0, Purpose::FixedPrice).random();
    blum::price(w_min, w_max, u)
}

/// Trades of a finished chain run, with the payments actually charged.
pub fn chain_trades(out: &ChainOutcome) -> Vec<Trade> {
    let pay = |id| out.offer(id).and_then(|o| o.payment).expect("matched offers are charged");
    out.pairs
        .iter()
        .map(|&(period, buyer, seller)| Trade {
            period,
            buyer,
            seller,
            buyer_payment: pay(buyer),
            seller_payment: pay(seller),
        })
        .collect()
}

/// One generated market shared by every mechanism of a trial.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: u64,
    pub source: RandomSource,
    pub schedule: Vec<AgentType>,
    pub opt: Money,
}

impl Trial {
    pub fn new(index: u64, source: RandomSource, schedule: Vec<AgentType>) -> Trial {
        let (opt, _) = offline::optimum(&schedule);
        Trial { index, source, schedule, opt }
    }

    pub fn run(&self, mechanism: &Mechanism) -> Result<TrialMetrics> {
        let trades = mechanism.trades(&self.schedule, &self.source)?;
        Ok(TrialMetrics::new(&self.schedule, &trades, self.opt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::AgentId;

    fn trial() -> Trial {
        let schedule = vec![
            AgentType::buyer(1, 1, 2, 10.0),
            AgentType::buyer(2, 1, 1, 9.0),
            AgentType::seller(3, 1, 2, -4.0),
            AgentType::seller(4, 2, 2, -5.0),
            AgentType::buyer(5, 2, 2, 8.0),
            AgentType::seller(6, 2, 2, -3.0),
        ];
        Trial::new(0, RandomSource::new(9), schedule)
    }

    #[test]
    fn every_name_builds() {
        for name in mechanism_names() {
            let m = Mechanism::from_name(name, &MechanismParams::default(), 2, 7.0).unwrap();
            assert_eq!(m.name(), name);
        }
        assert!(Mechanism::from_name("nope", &MechanismParams::default(), 2, 7.0).is_err());
    }

    #[test]
    fn offline_attains_the_optimum_and_greedy_is_feasible() {
        let t = trial();
        let m = t.run(&Mechanism::Offline).unwrap();
        assert!((m.alloc_eff - 1.0).abs() < 1e-12);
        assert_eq!(m.revenue, 0.0);
        for name in mechanism_names() {
            let mech = Mechanism::from_name(name, &MechanismParams::default(), 2, 7.0).unwrap();
            let m = t.run(&mech).unwrap();
            assert!(m.alloc_eff <= 1.0 + 1e-9, "{name}");
            assert!((m.net_eff - (m.alloc_eff - m.revenue)).abs() < 1e-12);
        }
    }

    #[test]
    fn blum_price_in_support() {
        let t = trial();
        let p = blum_price(&t.schedule, &t.source).unwrap();
        let r = blum::competitive_ratio(3.0, 10.0).unwrap();
        assert!(p >= r * 3.0 - 1e-9 && p <= 10.0 + 1e-9);
    }

    #[test]
    fn chain_trades_carry_payments() {
        let t = trial();
        let mech = Mechanism::from_name("mcafee", &MechanismParams::default(), 2, 7.0).unwrap();
        for tr in mech.trades(&t.schedule, &t.source).unwrap() {
            assert!(tr.buyer_payment + tr.seller_payment >= -1e-9);
            assert_ne!(tr.buyer, AgentId(0));
        }
    }
}
