//! McAfee's double auction.
//!
//! Bids are padded with `+inf` in front and `0` behind, asks with `0` in front
//! and `-inf` behind. With `m` the last real index where `b_m + s_m >= 0` and
//! `p = (b_{m+1} - s_{m+1}) / 2`, the first `m` pairs trade at `p` if `p`
//! lies in `[-s_m, b_m]`, otherwise the first `m - 1` pairs trade at `b_m`
//! and `-s_m`.

use std::collections::BTreeSet;

use super::{ids, no_trade_by_replacement, sort_desc, Clearing};
use crate::market::{AgentId, Money, Omega, Participant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// All `m` efficient pairs trade at the midpoint price.
    Midpoint,
    /// The `m`-th pair is dropped; the rest trade at its values.
    Reduced,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub m: usize,
    pub case: Case,
    /// Winning bids and asks, most competitive first.
    pub buyers: Vec<AgentId>,
    pub sellers: Vec<AgentId>,
    pub buy_price: Money,
    /// Signed payment of each winning seller.
    pub sell_price: Money,
}

pub fn has_quorum(bids: &[Participant], asks: &[Participant]) -> bool {
    bids.len() >= 2 && asks.len() >= 2
}

/// McAfee outcome, or `None` without a quorum or an efficient pair.
pub fn outcome(bids: &[Participant], asks: &[Participant], omega: Omega) -> Option<Outcome> {
    if !has_quorum(bids, asks) {
        return None;
    }
    let b = sort_desc(bids, omega);
    let s = sort_desc(asks, omega);
    outcome_sorted(&b, &s)
}

/// Same as [`outcome`] on sides already sorted most competitive first.
pub fn outcome_sorted(b: &[Participant], s: &[Participant]) -> Option<Outcome> {
    let bid_at = |k: usize| if k <= b.len() { b[k - 1].value } else { 0.0 };
    let ask_at = |k: usize| if k <= s.len() { s[k - 1].value } else { Money::NEG_INFINITY };
    let m = (1..=b.len().min(s.len())).take_while(|&k| bid_at(k) + ask_at(k) >= 0.0).count();
    if m == 0 {
        return None;
    }
    let p = (bid_at(m + 1) - ask_at(m + 1)) / 2.0;
    let (case, n, buy_price, sell_price) = if p <= bid_at(m) && -p <= ask_at(m) {
        (Case::Midpoint, m, p, -p)
    } else {
        (Case::Reduced, m - 1, bid_at(m), ask_at(m))
    };
    Some(Outcome {
        m,
        case,
        buyers: b[..n].iter().map(|x| x.id).collect(),
        sellers: s[..n].iter().map(|x| x.id).collect(),
        buy_price,
        sell_price,
    })
}

pub fn clear(bids: &[Participant], asks: &[Participant], omega: Omega) -> Clearing {
    let mut c = Clearing::default();
    if !has_quorum(bids, asks) {
        c.nt = ids(bids).chain(ids(asks)).collect();
        c.snt = c.nt.clone();
        return c;
    }
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
    c.snt = BTreeSet::new();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::RandomSource;
    use crate::rules::participants;

    fn run(bids: &[f64], asks: &[f64]) -> Clearing {
        let src = RandomSource::new(1);
        clear(&participants(bids, 1, 1), &participants(asks, 101, 1), src.omega(1))
    }

    #[test]
    fn reduced_case() {
        let c = run(&[15.0, 10.0, 6.0], &[-1.0, -3.0, -4.0, -5.0, -10.0]);
        assert_eq!(c.pairs.len(), 2);
        assert_eq!(c.payment(AgentId(1)), Some(6.0));
        assert_eq!(c.payment(AgentId(2)), Some(6.0));
        assert_eq!(c.payment(AgentId(101)), Some(-4.0));
        assert_eq!(c.payment(AgentId(102)), Some(-4.0));
        assert!(c.snt.is_empty());
    }

    #[test]
    fn midpoint_case() {
        let c = run(&[10.0, 8.0], &[-2.0, -9.0]);
        assert_eq!(c.pairs, vec![(AgentId(1), AgentId(101))]);
        assert_eq!(c.payment(AgentId(1)), Some(8.5));
        assert_eq!(c.payment(AgentId(101)), Some(-8.5));
        // The second bid could have traded by outbidding the first.
        assert!(!c.nt.contains(&AgentId(2)));
    }

    #[test]
    fn no_quorum_keeps_everyone() {
        let c = run(&[10.0], &[-1.0, -2.0]);
        assert!(c.pairs.is_empty());
        assert_eq!(c.snt.len(), 3);
        assert_eq!(c.nt, c.snt);
    }

    #[test]
    fn no_trade_set_with_quorum() {
        // Only (8,-6) is efficient and it is reduced away; a bid of +inf
        // would trade at the midpoint 8.5.
        let c = run(&[8.0, 7.0, 2.0], &[-6.0, -10.0, -12.0]);
        assert!(c.pairs.is_empty());
        assert!(!c.nt.contains(&AgentId(1)));
        assert!(c.snt.is_empty());
    }
}
