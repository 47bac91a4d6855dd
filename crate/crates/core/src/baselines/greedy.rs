//! Non-truthful benchmark: in every period the best remaining bid is paired
//! with the best remaining ask while their surplus is non-negative. Unmatched
//! offers wait until they depart. Trades happen at the midpoint, so the
//! auctioneer collects nothing.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::Trade;
use crate::market::{AgentType, Period, Side};

pub fn run(schedule: &[AgentType]) -> Vec<Trade> {
    let last = schedule.iter().map(|a| a.departure).max().unwrap_or(0);
    let mut arrivals: BTreeMap<Period, Vec<AgentType>> = BTreeMap::new();
    for a in schedule {
        arrivals.entry(a.arrival).or_default().push(*a);
    }
    let mut active: Vec<AgentType> = Vec::new();
    let mut trades = Vec::new();
    for t in 1..=last {
        active.extend(arrivals.remove(&t).unwrap_or_default());
        let desc = |x: &AgentType, y: &AgentType| {
            y.value.partial_cmp(&x.value).unwrap_or(Ordering::Equal).then(x.id.cmp(&y.id))
        };
        let mut bids: Vec<AgentType> = active.iter().filter(|a| a.side == Side::Buyer).copied().collect();
        let mut asks: Vec<AgentType> = active.iter().filter(|a| a.side == Side::Seller).copied().collect();
        bids.sort_by(desc);
        asks.sort_by(desc);
        let n = bids.iter().zip(&asks).take_while(|(b, s)| b.value + s.value >= 0.0).count();
        for (b, s) in bids.iter().zip(&asks).take(n) {
            let p = (b.value - s.value) / 2.0;
            trades.push(Trade { period: t, buyer: b.id, seller: s.id, buyer_payment: p, seller_payment: -p });
        }
        let gone: Vec<_> = bids[..n].iter().chain(&asks[..n]).map(|a| a.id).collect();
        active.retain(|a| !gone.contains(&a.id) && a.departure > t);
    }
    trades
}
