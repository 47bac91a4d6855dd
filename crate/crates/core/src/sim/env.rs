//! Random market environments.

use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{AgentType, Money, Period, Purpose, RandomSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatienceDist {
    /// Uniform on `[0, K]`.
    Uniform,
    /// Exponential truncated to `[0, K]` with 95% of the untruncated mass
    /// below `K`.
    TruncExp,
}

impl FromStr for PatienceDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<PatienceDist> {
        match s {
            "uniform" => Ok(PatienceDist::Uniform),
            "trunc_exp" => Ok(PatienceDist::TruncExp),
            other => Err(Error::Config(format!("unknown patience distribution {other:?}"))),
        }
    }
}

/// Rate of the truncated exponential patience for maximal patience `k`.
pub fn trunc_exp_rate(k: Period) -> f64 {
    -(0.05f64).ln() / k as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Agents per unit of time; one period is one unit.
    pub arrival_rate: f64,
    pub k: Period,
    pub patience: PatienceDist,
    /// Log-step of the mean valuation per period.
    pub volatility: f64,
    /// Total width of the value distribution as a fraction of the mean.
    pub spread: f64,
    pub initial_mean: Money,
    /// Generation stops once both sides reached this many agents.
    pub agents_per_side: usize,
}

impl Default for EnvConfig {
    fn default() -> EnvConfig {
        EnvConfig {
            arrival_rate: 2.0,
            k: 10,
            patience: PatienceDist::Uniform,
            volatility: 0.0,
            spread: 0.2,
            initial_mean: 100.0,
            agents_per_side: 500,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("{what} must be positive")));
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return bad("arrival_rate");
        }
        if self.k == 0 {
            return bad("K");
        }
        if !(self.initial_mean > 0.0) {
            return bad("initial_mean");
        }
        if self.agents_per_side == 0 {
            return bad("agents_per_side");
        }
        if !(0.0..2.0).contains(&self.spread) {
            return Err(Error::Config("spread must lie in [0, 2)".into()));
        }
        if !(self.volatility >= 0.0) {
            return Err(Error::Config("volatility must be non-negative".into()));
        }
        Ok(())
    }

    fn sample_patience(&self, u: f64) -> Period {
        let k = self.k as f64;
        let x = match self.patience {
            PatienceDist::Uniform => u * k,
            PatienceDist::TruncExp => {
                let a = trunc_exp_rate(self.k);
                -(1.0 - u * (1.0 - (-a * k).exp())).ln() / a
            }
        };
        (x.round() as Period).min(self.k)
    }
}

/// Mean valuation per period under a multiplicative random walk.
#[derive(Debug)]
struct MeanPath {
    means: Vec<Money>,
    rng: rand_chacha::ChaCha8Rng,
    gamma: f64,
}

impl MeanPath {
    fn at(&mut self, t: Period) -> Money {
        while self.means.len() < t as usize {
            let last = *self.means.last().expect("path starts non-empty");
            let step = if self.rng.random_bool(0.5) { self.gamma } else { -self.gamma };
            self.means.push(last * step.exp());
        }
        self.means[t as usize - 1]
    }
}

/// Draw a schedule: Poisson arrivals, each a buyer or seller with equal
/// probability, values uniform about the current mean. Ids follow arrival
/// order starting at 1.
pub fn generate_schedule(cfg: &EnvConfig, source: &RandomSource) -> Result<Vec<AgentType>> {
    cfg.validate()?;
    let mut rng = source.rng(0, Purpose::Schedule);
    let mut path = MeanPath { means: vec![cfg.initial_mean], rng: source.rng(1, Purpose::Schedule), gamma: cfg.volatility };
    let gap = Exp::new(cfg.arrival_rate).map_err(|e| Error::Config(e.to_string()))?;
    let (lo, hi) = (1.0 - cfg.spread / 2.0, 1.0 + cfg.spread / 2.0);
    let (mut buyers, mut sellers) = (0usize, 0usize);
    let mut time = 0.0;
    let mut out = Vec::with_capacity(2 * cfg.agents_per_side + 16);
    while buyers < cfg.agents_per_side || sellers < cfg.agents_per_side {
        time += gap.sample(&mut rng);
        let arrival = time.round() as Period + 1;
        let is_buyer = rng.random_bool(0.5);
        let patience = cfg.sample_patience(rng.random::<f64>());
        let mean = path.at(arrival);
        let w = mean * if hi > lo { rng.random_range(lo..hi) } else { 1.0 };
        let id = out.len() as u32 + 1;
        let departure = arrival + patience;
        out.push(if is_buyer {
            buyers += 1;
            AgentType::buyer(id, arrival, departure, w)
        } else {
            sellers += 1;
            AgentType::seller(id, arrival, departure, -w)
        });
    }
    Ok(out)
}

/// Mean valuation path for the periods of a schedule, as seen by the
/// generator. Used to initialize history-based prices.
pub fn mean_path(cfg: &EnvConfig, source: &RandomSource, periods: Period) -> Vec<Money> {
    let mut path = MeanPath { means: vec![cfg.initial_mean], rng: source.rng(1, Purpose::Schedule), gamma: cfg.volatility };
    (1..=periods.max(1)).map(|t| path.at(t)).collect()
}
