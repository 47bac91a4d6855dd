//! Flat key-value run configuration.
//!
//! ```toml
//! rule = "price_based"
//! price_variant = "ewma"
//! lambda = 0.05
//! K = 4
//! volatility = 0.05
//! ```

use std::path::Path;

use serde::Deserialize;

use super::env::{EnvConfig, PatienceDist};
use super::mechanism::MechanismParams;
use crate::chain::{AdmissionMode, Feasibility};
use crate::error::{Error, Result};
use crate::market::{Money, Period};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    rule: Option<String>,
    price_variant: Option<String>,
    lambda: Option<f64>,
    window: Option<usize>,
    mcafee_window: Option<usize>,
    fixed_price: Option<Money>,
    tau: Option<Period>,
    #[serde(rename = "K", alias = "k")]
    k: Option<Period>,
    feasibility: Option<Feasibility>,
    admission: Option<AdmissionMode>,
    initial_price: Option<Money>,
    arrival_rate: Option<f64>,
    inter_arrival: Option<f64>,
    patience: Option<PatienceDist>,
    volatility: Option<f64>,
    spread: Option<f64>,
    initial_mean: Option<Money>,
    agents_per_side: Option<usize>,
    trials: Option<usize>,
    zip_traders: Option<usize>,
    zip_training_trials: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub env: EnvConfig,
    pub params: MechanismParams,
    /// Mechanism named by the file, if any.
    pub mechanism: Option<String>,
    pub trials: usize,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig { env: EnvConfig::default(), params: MechanismParams::default(), mechanism: None, trials: 100 }
    }
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<SimConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = SimConfig::default();
        let env = &mut cfg.env;
        let p = &mut cfg.params;
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => { $(if let Some(v) = raw.$src { $dst = v; })* };
        }
        set!(
            lambda => p.rule.lambda,
            window => p.rule.window,
            mcafee_window => p.rule.mcafee_window,
            fixed_price => p.rule.fixed_price,
            tau => p.tau,
            feasibility => p.feasibility,
            admission => p.admission,
            zip_traders => p.zip_traders,
            zip_training_trials => p.zip_training_trials,
            k => env.k,
            arrival_rate => env.arrival_rate,
            patience => env.patience,
            volatility => env.volatility,
            spread => env.spread,
            initial_mean => env.initial_mean,
            agents_per_side => env.agents_per_side,
            trials => cfg.trials,
        );
        p.initial_price = raw.initial_price;
        match (raw.arrival_rate, raw.inter_arrival) {
            (Some(_), Some(_)) => return Err(Error::Config("give arrival_rate or inter_arrival, not both".into())),
            (None, Some(gap)) if gap > 0.0 => env.arrival_rate = 1.0 / gap,
            (None, Some(gap)) => return Err(Error::Config(format!("inter_arrival must be positive, got {gap}"))),
            _ => {}
        }
        cfg.mechanism = match (raw.rule, raw.price_variant) {
            (Some(r), Some(v)) if r == "price_based" => Some(v),
            (Some(r), None) if r == "price_based" => {
                return Err(Error::Config("rule price_based needs a price_variant".into()))
            }
            (Some(r), Some(_)) => return Err(Error::Config(format!("price_variant given for rule {r:?}"))),
            (r, None) => r,
            (None, Some(v)) => Some(v),
        };
        cfg.env.validate()?;
        if cfg.params.tau == 0 {
            return Err(Error::Config("tau must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SimConfig> {
        SimConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Set a tunable parameter by name.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let p = &mut self.params;
        match name {
            "lambda" => p.rule.lambda = value,
            "window" => p.rule.window = value.round().max(0.0) as usize,
            "mcafee_window" => p.rule.mcafee_window = value.round().max(0.0) as usize,
            "fixed_price" => p.rule.fixed_price = value,
            "initial_price" => p.initial_price = Some(value),
            "tau" => p.tau = value.round().max(1.0) as Period,
            other => return Err(Error::Config(format!("unknown tunable parameter {other:?}"))),
        }
        Ok(())
    }
}

/// Whether a tunable parameter only takes integer values.
pub fn is_integer_param(name: &str) -> bool {
    matches!(name, "window" | "mcafee_window" | "tau")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_keys() {
        let cfg = SimConfig::parse(
            "rule = \"price_based\"\nprice_variant = \"median\"\nwindow = 40\nK = 3\ninter_arrival = 0.5\n\
             patience = \"trunc_exp\"\nfeasibility = \"strong\"\nadmission = \"coin\"\ninitial_price = 90.0\n",
        )
        .unwrap();
        assert_eq!(cfg.mechanism.as_deref(), Some("median"));
        assert_eq!(cfg.params.rule.window, 40);
        assert_eq!(cfg.env.k, 3);
        assert_eq!(cfg.env.arrival_rate, 2.0);
        assert_eq!(cfg.env.patience, PatienceDist::TruncExp);
        assert_eq!(cfg.params.feasibility, Feasibility::Strong);
        assert_eq!(cfg.params.admission, AdmissionMode::Coin);
        assert_eq!(cfg.params.initial_price, Some(90.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SimConfig::parse("colour = 3").is_err());
        assert!(SimConfig::parse("rule = \"price_based\"").is_err());
        assert!(SimConfig::parse("K = 0").is_err());
        assert!(SimConfig::parse("tau = 0").is_err());
        assert!(SimConfig::parse("inter_arrival = 1.0\narrival_rate = 1.0").is_err());
    }

    #[test]
    fn params_by_name() {
        let mut cfg = SimConfig::default();
        cfg.set_param("tau", 2.6).unwrap();
        cfg.set_param("lambda", 0.2).unwrap();
        assert_eq!((cfg.params.tau, cfg.params.rule.lambda), (3, 0.2));
        assert!(cfg.set_param("gamma", 1.0).is_err());
        assert!(is_integer_param("window") && !is_integer_param("fixed_price"));
    }
}
