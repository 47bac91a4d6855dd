//! Threshold prices of the dynamic mechanism.
//!
//! An agent's outcome should be a threshold in its reported value that
//! depends only on its reported window and on the others: it trades exactly
//! when its value clears the threshold, pays the threshold, and the
//! threshold does not fall when the window shrinks.

use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainConfig};
use crate::error::{Error, Result};
use crate::market::{AgentId, AgentType, Money, OfferState, Period, RandomSource, Side};

const BISECTION_STEPS: usize = 100;
const MONOTONE_GRID: usize = 24;
/// Bids must be positive.
const MIN_BID: Money = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub id: AgentId,
    /// Threshold at the agent's own window; `inf` when it can never trade.
    pub critical: Money,
    /// Realized payment under the true report.
    pub payment: Option<Money>,
    /// Trade and payment are decided by the threshold.
    pub threshold_ok: bool,
    /// Thresholds never fall as the window tightens.
    pub monotone_ok: bool,
    /// Threshold per tested window.
    pub windows: Vec<(Period, Period, Money)>,
}

impl PriceReport {
    pub fn passed(&self) -> bool {
        self.threshold_ok && self.monotone_ok
    }
}

fn outcome(cfg: &ChainConfig, schedule: &[AgentType], slot: usize, report: AgentType, src: &RandomSource) -> Result<Option<Money>> {
    let mut s = schedule.to_vec();
    s[slot] = report;
    let out = chain::run(cfg, &s, src)?;
    let o = out.offer(report.id).ok_or(Error::UnknownAgent(report.id))?;
    Ok(if o.state == OfferState::Matched { o.payment } else { None })
}

/// Lowest reported value at which the agent in `slot` trades, its window
/// fixed to that of `report`.
pub fn chain_critical_price(cfg: &ChainConfig, schedule: &[AgentType], slot: usize, report: AgentType, src: &RandomSource) -> Result<Money> {
    let scale = schedule.iter().map(|a| a.value.abs()).fold(1.0, Money::max) * 1e6;
    let wins = |v: Money| -> Result<bool> { Ok(outcome(cfg, schedule, slot, AgentType { value: v, ..report }, src)?.is_some()) };
    let (mut lo, mut hi) = match report.side {
        Side::Buyer => (MIN_BID, scale),
        Side::Seller => (-scale, 0.0),
    };
    if !wins(hi)? {
        return Ok(Money::INFINITY);
    }
    if wins(lo)? {
        return Ok(lo);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if wins(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Check the threshold form of agent `id`'s outcome.
pub fn check_price_characterization(cfg: &ChainConfig, schedule: &[AgentType], id: AgentId, src: &RandomSource) -> Result<PriceReport> {
    let slot = schedule.iter().position(|a| a.id == id).ok_or(Error::UnknownAgent(id))?;
    let truth = schedule[slot];
    let tol = |x: Money| 1e-6 * x.abs().max(1.0);
    let critical = chain_critical_price(cfg, schedule, slot, truth, src)?;
    let payment = outcome(cfg, schedule, slot, truth, src)?;

    let mut threshold_ok = match payment {
        Some(x) => truth.value >= critical - tol(critical) && (x - critical).abs() <= tol(critical),
        None => truth.value <= critical + tol(critical),
    };
    if critical.is_finite() {
        let span = critical.abs().max(1.0);
        for k in 0..=MONOTONE_GRID {
            let v = critical - span + 2.0 * span * k as Money / MONOTONE_GRID as Money;
            let v = match truth.side {
                Side::Buyer => v.max(MIN_BID),
                Side::Seller => v.min(0.0),
            };
            if (v - critical).abs() <= tol(critical) {
                continue;
            }
            let won = outcome(cfg, schedule, slot, AgentType { value: v, ..truth }, src)?;
            let expected = v > critical;
            let paid_ok = won.is_none_or(|x| (x - critical).abs() <= tol(critical));
            if won.is_some() != expected || !paid_ok {
                threshold_ok = false;
            }
        }
    }

    let mut windows = Vec::new();
    for a in truth.arrival..=truth.departure {
        for d in a..=truth.departure {
            let report = AgentType { arrival: a, departure: d, ..truth };
            windows.push((a, d, chain_critical_price(cfg, schedule, slot, report, src)?));
        }
    }
    let monotone_ok = windows.iter().all(|&(a1, d1, p1)| {
        windows.iter().all(|&(a2, d2, p2)| {
            let tighter = a2 >= a1 && d2 <= d1;
            !tighter || p2 >= p1 - tol(p1) || p1 == Money::INFINITY && p2 == Money::INFINITY
        })
    });
    Ok(PriceReport { id, critical, payment, threshold_ok, monotone_ok, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::worked;

    #[test]
    fn posted_price_top_bid() {
        let (cfg, schedule, src) = worked::posted_price();
        let r = check_price_characterization(&cfg, &schedule, AgentId(1), &src).unwrap();
        assert!((r.critical - 7.0).abs() < 1e-6, "{}", r.critical);
        assert!(r.passed(), "{r:?}");
        let delayed = r.windows.iter().find(|w| (w.0, w.1) == (4, 4)).unwrap();
        assert!(delayed.2 >= 7.0 - 1e-6);
    }

    #[test]
    fn mcafee_delayed_ask_admission() {
        let (cfg, mut schedule, src) = worked::mcafee();
        let slot = schedule.iter().position(|a| a.id == AgentId(11)).unwrap();
        schedule[slot].arrival = 4;
        let out = chain::run(&cfg, &schedule, &src).unwrap();
        assert_eq!(out.offer(AgentId(11)).unwrap().admission_price, -4.0);
    }

    #[test]
    fn survivor_that_never_trades() {
        let (cfg, schedule, src) = worked::posted_price();
        let r = check_price_characterization(&cfg, &schedule, AgentId(15), &src).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
