//! Posted-price matching with a strong no-trade set.
//!
//! Offers are examined in a random order. Each round looks for a bid with
//! `b >= p` and an ask with `s >= -p`; once one side has a willing offer only
//! the other side is examined. A found pair trades at `p` and every other
//! offer examined in that round is priced out. When a round fails, the
//! remaining offers form the no-trade set and the strong no-trade set is the
//! part of it whose survival cannot depend on any single report.

use std::collections::BTreeSet;

use super::{ids, sort_by_rank, Clearing};
use crate::market::{AgentId, Money, Omega, Participant, Period};

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub clearing: Clearing,
    /// Every offer examined in any round.
    pub examined: BTreeSet<AgentId>,
}

pub fn clear(price: Money, bids: &[Participant], asks: &[Participant], omega: Omega) -> MatchResult {
    let t = omega.period();
    let mut b = sort_by_rank(bids, omega);
    let mut s = sort_by_rank(asks, omega);
    let mut c = Clearing { prices: Some((price, -price)), ..Clearing::default() };
    let mut examined = BTreeSet::new();

    let (found_b, found_s, cb, cs) = loop {
        let (mut i, mut j) = (None::<usize>, None::<usize>);
        let (mut cb, mut cs) = (0, 0);
        while (cb < b.len() && i.is_none()) || (cs < s.len() && j.is_none()) {
            let take_bid = match (i, j) {
                (None, None) => {
                    cs >= s.len() || (cb < b.len() && omega.rank(b[cb].id) < omega.rank(s[cs].id))
                }
                (None, Some(_)) => true,
                _ => false,
            };
            if take_bid {
                examined.insert(b[cb].id);
                if b[cb].value >= price {
                    i = Some(cb);
                }
                cb += 1;
            } else {
                examined.insert(s[cs].id);
                if s[cs].value >= -price {
                    j = Some(cs);
                }
                cs += 1;
            }
        }
        match (i, j) {
            (Some(i), Some(j)) => {
                let (x, y) = (b[i].id, s[j].id);
                c.pairs.push((x, y));
                c.payments.insert(x, price);
                c.payments.insert(y, -price);
                b.drain(..cb);
                s.drain(..cs);
            }
            _ => break (i.is_some(), j.is_some(), cb, cs),
        }
    };

    let departs = |p: &Participant| p.departure == t;
    match (found_b, found_s) {
        (true, false) => {
            c.nt = ids(&b).collect();
            c.snt = if b.iter().any(|x| x.value >= price && departs(x)) || s.iter().all(departs) {
                c.nt.clone()
            } else {
                ids(&b[cb..]).collect()
            };
        }
        (false, true) => {
            c.nt = ids(&s).collect();
            c.snt = if s.iter().any(|x| x.value >= -price && departs(x)) || b.iter().all(departs) {
                c.nt.clone()
            } else {
                ids(&s[cs..]).collect()
            };
        }
        _ => {
            c.nt = ids(&b).chain(ids(&s)).collect();
            if b.iter().all(departs) || s.iter().all(departs) {
                c.snt = c.nt.clone();
            }
        }
    }
    MatchResult { clearing: c, examined }
}

/// Probability that an extra offer on `side` arriving at `t` would have been
/// examined, given the outcome of the period without it.
///
/// Equal to one when the other side left non-departing offers in the strong
/// no-trade set (that side was exhausted, so every offer on this side was
/// examined); otherwise the share of insertion positions that fall inside the
/// examined, priced prefix of this side.
pub fn examination_probability(
    side_offers: &[Participant],
    other_offers: &[Participant],
    result: &MatchResult,
    t: Period,
) -> f64 {
    let snt = &result.clearing.snt;
    if other_offers.iter().any(|o| snt.contains(&o.id) && o.departure > t) {
        return 1.0;
    }
    let examined_out = side_offers
        .iter()
        .filter(|o| result.examined.contains(&o.id) && !snt.contains(&o.id))
        .count();
    examined_out as f64 / (1 + side_offers.len()) as f64
}
