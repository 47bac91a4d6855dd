use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::baselines::Trade;
use crate::market::{AgentId, AgentType, Money};

/// Per-trial outcome, normalized by the offline optimum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub alloc_eff: f64,
    pub net_eff: f64,
    pub revenue: f64,
    pub n_trades: usize,
    pub opt_value: Money,
}

impl TrialMetrics {
    /// Metrics of `trades` on `schedule` against optimum `opt`. All ratios
    /// are zero when the optimum is zero.
    pub fn new(schedule: &[AgentType], trades: &[Trade], opt: Money) -> TrialMetrics {
        let values: HashMap<AgentId, Money> = schedule.iter().map(|a| (a.id, a.value)).collect();
        let surplus: Money = trades.iter().map(|t| values[&t.buyer] + values[&t.seller]).sum();
        let paid: Money = trades.iter().map(|t| t.buyer_payment + t.seller_payment).sum();
        if opt <= 0.0 {
            return TrialMetrics { n_trades: trades.len(), opt_value: opt, ..TrialMetrics::default() };
        }
        let alloc_eff = surplus / opt;
        let revenue = paid / opt;
        TrialMetrics { alloc_eff, net_eff: alloc_eff - revenue, revenue, n_trades: trades.len(), opt_value: opt }
    }
}

/// Mean and standard error of a sample; the error is absent below two
/// observations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: Option<f64>,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Estimate {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: 0.0, se: None };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = (n > 1).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Estimate { mean, se }
    }
}

/// Summary of one mechanism over many trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mechanism: String,
    pub trials: usize,
    pub alloc_eff: Estimate,
    pub net_eff: Estimate,
    pub revenue: Estimate,
}

impl Summary {
    pub fn of(mechanism: &str, metrics: &[TrialMetrics]) -> Summary {
        let col = |f: fn(&TrialMetrics) -> f64| Estimate::of(&metrics.iter().map(f).collect::<Vec<_>>());
        Summary {
            mechanism: mechanism.to_string(),
            trials: metrics.len(),
            alloc_eff: col(|m| m.alloc_eff),
            net_eff: col(|m| m.net_eff),
            revenue: col(|m| m.revenue),
        }
    }
}
