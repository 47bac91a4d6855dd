//! Trade-reduction double auction.
//!
//! With both sides sorted most competitive first and `m` the last index where
//! `b_m + s_m >= 0`, the first `m - 1` pairs trade; buyers pay `b_m` and
//! sellers receive `-s_m`. Needs at least two bids and two asks.

use std::collections::BTreeSet;

use super::{ids, no_trade_by_replacement, sort_desc, Clearing};
use crate::market::{AgentId, Money, Omega, Participant};

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub m: usize,
    pub buyers: Vec<AgentId>,
    pub sellers: Vec<AgentId>,
    pub buy_price: Money,
    pub sell_price: Money,
}

pub fn outcome(bids: &[Participant], asks: &[Participant], omega: Omega) -> Option<Outcome> {
    if bids.len() < 2 || asks.len() < 2 {
        return None;
    }
    let b = sort_desc(bids, omega);
    let s = sort_desc(asks, omega);
    let m = b.iter().zip(&s).take_while(|(x, y)| x.value + y.value >= 0.0).count();
    if m < 2 {
        return None;
    }
    Some(Outcome {
        m,
        buyers: b[..m - 1].iter().map(|x| x.id).collect(),
        sellers: s[..m - 1].iter().map(|x| x.id).collect(),
        buy_price: b[m - 1].value,
        sell_price: s[m - 1].value,
    })
}

/// Losers that could not trade at any value: each is replaced in turn by a
/// bid of `+inf` or an ask just above zero and the auction is rerun.
pub fn no_trade(bids: &[Participant], asks: &[Participant], omega: Omega) -> BTreeSet<AgentId> {
    let c = clear(bids, asks, omega);
    c.nt
}

pub fn clear(bids: &[Participant], asks: &[Participant], omega: Omega) -> Clearing {
    let mut c = Clearing::default();
    if let Some(o) = outcome(bids, asks, omega) {
        c.prices = Some((o.buy_price, o.sell_price));
        for (&b, &s) in o.buyers.iter().zip(&o.sellers) {
            c.pairs.push((b, s));
            c.payments.insert(b, o.buy_price);
            c.payments.insert(s, o.sell_price);
        }
    }
    c.nt = no_trade_by_replacement(bids, asks, &c.payments, |b, s, id| {
        outcome(b, s, omega).is_some_and(|o| o.buyers.contains(&id) || o.sellers.contains(&id))
    });
    if bids.len() < 2 || asks.len() < 2 {
        c.snt = ids(bids).chain(ids(asks)).collect();
    }
    c
}
