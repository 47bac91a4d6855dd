//! Truthfulness by replaying a schedule with one report changed.

use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainConfig, ChainOutcome, Counterfactual, Feasibility};
use crate::error::Result;
use crate::market::{AgentId, AgentType, Money, OfferState, Period, RandomSource, Side};
use crate::sim::Mechanism;

/// Relative tolerance when comparing utilities and probing around prices.
pub const UTILITY_TOLERANCE: f64 = 1e-7;

/// Value multipliers tried for every agent.
pub const VALUE_FACTORS: [f64; 6] = [0.5, 0.9, 0.99, 1.01, 1.1, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    ValueShift,
    ArrivalDelay,
    DepartureShift,
    /// Several fields changed at once.
    Combined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub id: AgentId,
    pub kind: DeviationKind,
    pub report: AgentType,
}

impl Deviation {
    pub fn new(truth: &AgentType, report: AgentType) -> Deviation {
        let value = report.value != truth.value;
        let arrival = report.arrival != truth.arrival;
        let departure = report.departure != truth.departure;
        let kind = match (value, arrival, departure) {
            (true, false, false) => DeviationKind::ValueShift,
            (false, true, false) => DeviationKind::ArrivalDelay,
            (false, false, true) => DeviationKind::DepartureShift,
            _ => DeviationKind::Combined,
        };
        Deviation { id: truth.id, kind, report }
    }

    /// Whether the report is available to an agent of type `truth`: no early
    /// arrival, a consistent window, and under strong feasibility no late
    /// departure.
    pub fn is_available(&self, truth: &AgentType, k: Period, feasibility: Feasibility) -> bool {
        let r = &self.report;
        r.arrival >= truth.arrival
            && r.arrival <= r.departure
            && r.departure - r.arrival <= k
            && (feasibility == Feasibility::Relaxed || r.departure <= truth.departure)
            && r.side == truth.side
            && r.validate(k).is_ok()
    }
}

/// A trade as experienced by one agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub period: Period,
    pub payment: Money,
    /// Period in which the good or the cash reaches the agent.
    pub settlement: Period,
}

/// Quasi-linear utility of an agent of type `truth`. A buyer whose good
/// arrives after its departure values it at zero; a seller values a payment
/// arriving after its departure at zero and cannot deliver after it leaves.
pub fn utility(truth: &AgentType, fill: Option<Fill>) -> Money {
    let Some(f) = fill else { return 0.0 };
    let present = truth.is_present(f.period);
    match truth.side {
        Side::Buyer => {
            let value = if present && f.settlement <= truth.departure { truth.value } else { 0.0 };
            value - f.payment
        }
        Side::Seller if !present => Money::NEG_INFINITY,
        Side::Seller => truth.value - if f.settlement <= truth.departure { f.payment } else { 0.0 },
    }
}

fn chain_fill(cfg: &ChainConfig, out: &ChainOutcome, id: AgentId) -> Option<Fill> {
    let o = out.offer(id)?;
    if o.state != OfferState::Matched {
        return None;
    }
    Some(Fill {
        period: o.match_period?,
        payment: o.payment?,
        settlement: out.settlement(id, cfg.feasibility)?,
    })
}

/// What `id` gets when `schedule` runs through `mechanism`.
pub fn fill(mechanism: &Mechanism, schedule: &[AgentType], source: &RandomSource, id: AgentId) -> Result<Option<Fill>> {
    if let Mechanism::Chain(cfg) = mechanism {
        return Ok(chain_fill(cfg, &chain::run(cfg, schedule, source)?, id));
    }
    let trades = mechanism.trades(schedule, source)?;
    Ok(trades.iter().find(|t| t.buyer == id || t.seller == id).map(|t| {
        let payment = if t.buyer == id { t.buyer_payment } else { t.seller_payment };
        Fill { period: t.period, payment, settlement: t.period }
    }))
}

/// Prices an agent could have met during its stay: the chain's per-period
/// prices on its side, its admission price and its payment.
pub fn observed_prices(out: &ChainOutcome, truth: &AgentType, k: Period) -> Vec<Money> {
    let mut prices = Vec::new();
    for r in &out.prices {
        if r.period + k < truth.arrival || r.period > truth.departure + k {
            continue;
        }
        let c = match truth.side {
            Side::Buyer => r.buy,
            Side::Seller => r.sell,
        };
        if let Counterfactual::Price(p) = c {
            prices.push(p);
        }
    }
    if let Some(o) = out.offer(truth.id) {
        prices.push(o.admission_price);
        prices.extend(o.payment);
    }
    prices.retain(|p| p.is_finite());
    prices
}

/// Standard deviations for `truth`: value multiples and probes just around
/// `prices` at the true window, every available window at the true value,
/// and every window combined with the most and least aggressive values.
pub fn deviation_grid(truth: &AgentType, k: Period, feasibility: Feasibility, prices: &[Money]) -> Vec<Deviation> {
    let with = |arrival: Period, departure: Period, value: Money| AgentType { arrival, departure, value, ..*truth };
    let clamp = |v: Money| match truth.side {
        Side::Buyer => v.max(0.0),
        Side::Seller => v.min(0.0),
    };
    let mut values: Vec<Money> = VALUE_FACTORS.iter().map(|f| truth.value * f).collect();
    for &p in prices {
        let eps = UTILITY_TOLERANCE * p.abs().max(1.0);
        values.extend([p - eps, p + eps]);
    }
    let mut out: Vec<Deviation> = Vec::new();
    let mut push = |r: AgentType| {
        let d = Deviation::new(truth, r);
        if r != *truth && d.is_available(truth, k, feasibility) && !out.iter().any(|x| x.report == r) {
            out.push(d);
        }
    };
    for v in values {
        push(with(truth.arrival, truth.departure, clamp(v)));
    }
    let extremes = [truth.value, truth.value * 2.0, truth.value * 0.5];
    for a in truth.arrival..=truth.departure {
        for d in a..=a + k {
            for &v in &extremes {
                push(with(a, d, v));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub deviation: Deviation,
    pub truthful: Money,
    pub deviated: Money,
}

/// Deviations of agent `id` that strictly beat truth-telling.
pub fn check_truthful(
    mechanism: &Mechanism,
    schedule: &[AgentType],
    id: AgentId,
    deviations: &[Deviation],
    source: &RandomSource,
) -> Result<Vec<Violation>> {
    let Some(truth) = schedule.iter().find(|a| a.id == id).copied() else {
        return Err(crate::Error::UnknownAgent(id));
    };
    let truthful = utility(&truth, fill(mechanism, schedule, source, id)?);
    let mut found = Vec::new();
    let mut replaced = schedule.to_vec();
    let slot = replaced.iter().position(|a| a.id == id).expect("agent is in the schedule");
    for dev in deviations {
        replaced[slot] = dev.report;
        let deviated = utility(&truth, fill(mechanism, &replaced, source, id)?);
        if deviated > truthful + UTILITY_TOLERANCE * truth.value.abs().max(1.0) {
            found.push(Violation { deviation: *dev, truthful, deviated });
        }
    }
    Ok(found)
}

/// Run the standard grid for every listed agent of a chain run.
pub fn check_chain_agents(
    cfg: &ChainConfig,
    schedule: &[AgentType],
    agents: &[AgentId],
    source: &RandomSource,
) -> Result<Vec<Violation>> {
    let out = chain::run(cfg, schedule, source)?;
    let mechanism = Mechanism::Chain(cfg.clone());
    let mut found = Vec::new();
    for &id in agents {
        let Some(truth) = schedule.iter().find(|a| a.id == id) else { continue };
        let grid = deviation_grid(truth, cfg.k, cfg.feasibility, &observed_prices(&out, truth, cfg.k));
        found.extend(check_truthful(&mechanism, schedule, id, &grid, source)?);
    }
    Ok(found)
}
