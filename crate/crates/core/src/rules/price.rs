//! Posted prices derived from the history of departed offers.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::mcafee::outcome_sorted;
use crate::market::{History, HistoryEntry, Money, Participant, Side};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriceVariant {
    /// Exponentially weighted average of the mean absolute value of the
    /// offers that entered the history since the last update.
    Ewma { lambda: f64 },
    /// Median absolute value of the last `window` entries.
    Median { window: usize },
    /// Midpoint of the marginal efficient pair among the last `window` entries.
    Clearing { window: usize },
    /// Midpoint of the McAfee prices on the last `window` entries.
    HistoryMcAfee { window: usize },
    Fixed { price: Money },
}

impl PriceVariant {
    pub fn name(&self) -> &'static str {
        match self {
            PriceVariant::Ewma { .. } => "ewma",
            PriceVariant::Median { .. } => "median",
            PriceVariant::Clearing { .. } => "clearing",
            PriceVariant::HistoryMcAfee { .. } => "history_mcafee",
            PriceVariant::Fixed { .. } => "fixed",
        }
    }
}

/// Running price state: the last price and how much history it has seen.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceTracker {
    variant: PriceVariant,
    price: Money,
    cursor: usize,
}

impl PriceTracker {
    pub fn new(variant: PriceVariant, initial: Money) -> PriceTracker {
        let price = match variant {
            PriceVariant::Fixed { price } => price,
            _ => initial,
        };
        PriceTracker { variant, price, cursor: 0 }
    }

    pub fn price(&self) -> Money {
        self.price
    }

    /// Fold in everything appended to `history` since the last call.
    pub fn update(&mut self, history: &History) -> Money {
        let fresh = history.since(self.cursor);
        self.price = determine_price(&self.variant, history, fresh, self.price);
        self.cursor = history.len();
        self.price
    }
}

/// Price for the next period; keeps `prev` when the history is too thin.
pub fn determine_price(variant: &PriceVariant, history: &History, fresh: &[HistoryEntry], prev: Money) -> Money {
    match *variant {
        PriceVariant::Fixed { price } => price,
        PriceVariant::Ewma { lambda } => {
            if fresh.is_empty() {
                prev
            } else {
                let mean = fresh.iter().map(|e| e.value.abs()).sum::<Money>() / fresh.len() as Money;
                lambda * mean + (1.0 - lambda) * prev
            }
        }
        PriceVariant::Median { window } => median_abs(history.window(window)).unwrap_or(prev),
        PriceVariant::Clearing { window } => marginal_midpoint(history.window(window)).unwrap_or(prev),
        PriceVariant::HistoryMcAfee { window } => mcafee_midpoint(history.window(window)).unwrap_or(prev),
    }
}

pub fn median_abs(entries: &[HistoryEntry]) -> Option<Money> {
    if entries.is_empty() {
        return None;
    }
    let mut v: Vec<Money> = entries.iter().map(|e| e.value.abs()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn split(entries: &[HistoryEntry]) -> (Vec<Participant>, Vec<Participant>) {
    let mut b: Vec<Participant> =
        entries.iter().filter(|e| e.side == Side::Buyer).map(HistoryEntry::participant).collect();
    let mut s: Vec<Participant> =
        entries.iter().filter(|e| e.side == Side::Seller).map(HistoryEntry::participant).collect();
    let desc = |x: &Participant, y: &Participant| y.value.partial_cmp(&x.value).unwrap_or(Ordering::Equal);
    b.sort_by(desc);
    s.sort_by(desc);
    (b, s)
}

pub fn marginal_midpoint(entries: &[HistoryEntry]) -> Option<Money> {
    let (b, s) = split(entries);
    let m = b.iter().zip(&s).take_while(|(x, y)| x.value + y.value >= 0.0).count();
    (m >= 1).then(|| (b[m - 1].value - s[m - 1].value) / 2.0)
}

pub fn mcafee_midpoint(entries: &[HistoryEntry]) -> Option<Money> {
    let (b, s) = split(entries);
    if b.len() < 2 || s.len() < 2 {
        return None;
    }
    outcome_sorted(&b, &s).map(|o| (o.buy_price - o.sell_price) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{AgentId, ExitReason};

    fn history(values: &[Money]) -> History {
        let mut h = History::new();
        for (i, &v) in values.iter().enumerate() {
            let side = if v > 0.0 { Side::Buyer } else { Side::Seller };
            h.append(HistoryEntry {
                id: AgentId(i as u32 + 1),
                side,
                value: v,
                departure: 1,
                period: 1,
                reason: ExitReason::Expired,
            })
            .unwrap();
        }
        h
    }

    #[test]
    fn ewma_uses_only_fresh_entries() {
        let h = history(&[6.0, -8.0]);
        let p = determine_price(&PriceVariant::Ewma { lambda: 0.5 }, &h, h.since(0), 10.0);
        assert!((p - 8.5).abs() < 1e-12);
        let p = determine_price(&PriceVariant::Ewma { lambda: 0.5 }, &h, h.since(2), 10.0);
        assert_eq!(p, 10.0);
    }

    #[test]
    fn tracker_consumes_history_once() {
        let mut h = history(&[6.0, -8.0]);
        let mut t = PriceTracker::new(PriceVariant::Ewma { lambda: 0.5 }, 10.0);
        assert!((t.update(&h) - 8.5).abs() < 1e-12);
        assert!((t.update(&h) - 8.5).abs() < 1e-12);
        h.append(HistoryEntry {
            id: AgentId(9),
            side: Side::Buyer,
            value: 4.5,
            departure: 2,
            period: 2,
            reason: ExitReason::Traded,
        })
        .unwrap();
        assert!((t.update(&h) - 6.5).abs() < 1e-12);
    }

    #[test]
    fn window_statistics() {
        assert_eq!(median_abs(history(&[2.0, -4.0, 10.0]).entries()), Some(4.0));
        assert_eq!(median_abs(history(&[2.0, -4.0]).entries()), Some(3.0));
        assert_eq!(marginal_midpoint(history(&[9.0, 5.0, -4.0, -8.0]).entries()), Some(6.5));
        assert_eq!(marginal_midpoint(history(&[3.0, -4.0]).entries()), None);
        // McAfee on bids 10,8 and asks -2,-9: midpoint case at 8.5.
        assert_eq!(mcafee_midpoint(history(&[10.0, 8.0, -2.0, -9.0]).entries()), Some(8.5));
        assert_eq!(mcafee_midpoint(history(&[10.0, -2.0]).entries()), None);
    }

    #[test]
    fn thin_history_carries_the_price() {
        let h = History::new();
        for v in [
            PriceVariant::Median { window: 5 },
            PriceVariant::Clearing { window: 5 },
            PriceVariant::HistoryMcAfee { window: 5 },
        ] {
            assert_eq!(determine_price(&v, &h, &[], 7.0), 7.0);
        }
        assert_eq!(PriceTracker::new(PriceVariant::Fixed { price: 3.0 }, 7.0).price(), 3.0);
    }
}
