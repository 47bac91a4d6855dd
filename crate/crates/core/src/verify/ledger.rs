//! Running cash and inventory balances, and individual rationality.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainOutcome, Event, LoggedEvent};
use crate::market::{AgentId, AgentType, Money, OfferState, Period, TOLERANCE};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    /// Periods ending with negative cash.
    pub deficit: Vec<Period>,
    /// Periods ending with more goods released than collected.
    pub infeasible: Vec<Period>,
    /// Agents left with negative utility.
    pub irrational: Vec<AgentId>,
}

impl LedgerReport {
    pub fn passed(&self) -> bool {
        self.deficit.is_empty() && self.infeasible.is_empty() && self.irrational.is_empty()
    }
}

/// Check the balances at the end of every period of `events`.
pub fn check_balances(events: &[LoggedEvent], report: &mut LedgerReport) {
    let mut cash: Money = 0.0;
    let mut goods: i64 = 0;
    let mut scale: Money = 1.0;
    for (i, e) in events.iter().enumerate() {
        match e.event {
            Event::CashIn { amount, .. } => {
                cash += amount;
                scale = scale.max(amount.abs());
            }
            Event::CashOut { amount, .. } => cash -= amount,
            Event::ItemIn { .. } => goods += 1,
            Event::ItemOut { .. } => goods -= 1,
            _ => {}
        }
        let period_ends = events.get(i + 1).is_none_or(|n| n.period != e.period);
        if period_ends {
            if cash < -TOLERANCE * scale {
                report.deficit.push(e.period);
            }
            if goods < 0 {
                report.infeasible.push(e.period);
            }
        }
    }
}

/// Full ledger check of a chain run on truthful reports `truth`.
pub fn check_ledgers(outcome: &ChainOutcome, truth: &[AgentType]) -> LedgerReport {
    let mut report = LedgerReport::default();
    check_balances(&outcome.events, &mut report);
    let truth: BTreeMap<AgentId, &AgentType> = truth.iter().map(|a| (a.id, a)).collect();
    for (id, offer) in &outcome.offers {
        let Some(t) = truth.get(id) else { continue };
        let u = match (offer.state, offer.payment) {
            (OfferState::Matched, Some(x)) => t.value - x,
            (OfferState::Matched, None) => Money::NEG_INFINITY,
            (_, Some(x)) => -x,
            _ => 0.0,
        };
        if u < -TOLERANCE * t.value.abs().max(1.0) {
            report.irrational.push(*id);
        }
    }
    report
}
