//! McAfee on the active offers augmented with offers from the history.
//!
//! The augmented auction decides prices and which offers "would" trade; among
//! those, equally many active bids and asks are picked at random and trade at
//! the augmented prices. History offers never trade.

use std::collections::BTreeSet;

use super::mcafee::{has_quorum, outcome};
use super::{ids, no_trade_by_replacement, Clearing};
use crate::market::{AgentId, Money, Omega, Participant};

pub fn clear(
    hist_bids: &[Participant],
    hist_asks: &[Participant],
    bids: &[Participant],
    asks: &[Participant],
    omega: Omega,
) -> Clearing {
    let mut c = Clearing::default();
    let (pairs, prices) = trades(hist_bids, hist_asks, bids, asks, omega);
    c.prices = prices;
    if let Some((pb, ps)) = prices {
        for (b, s) in pairs {
            c.pairs.push((b, s));
            c.payments.insert(b, pb);
            c.payments.insert(s, ps);
        }
    }
    c.nt = no_trade_by_replacement(bids, asks, &c.payments, |b, s, id| {
        trades(hist_bids, hist_asks, b, s, omega).0.iter().any(|&(x, y)| x == id || y == id)
    });
    let n_bids = bids.len() + hist_bids.len();
    let n_asks = asks.len() + hist_asks.len();
    c.snt = if asks.is_empty() && !bids.is_empty() {
        ids(bids).collect()
    } else if bids.is_empty() && !asks.is_empty() {
        ids(asks).collect()
    } else if n_bids < 2 || n_asks < 2 {
        ids(bids).chain(ids(asks)).collect()
    } else {
        BTreeSet::new()
    };
    c
}

type Trades = (Vec<(AgentId, AgentId)>, Option<(Money, Money)>);

fn trades(
    hist_bids: &[Participant],
    hist_asks: &[Participant],
    bids: &[Participant],
    asks: &[Participant],
    omega: Omega,
) -> Trades {
    let all_bids: Vec<Participant> = bids.iter().chain(hist_bids).copied().collect();
    let all_asks: Vec<Participant> = asks.iter().chain(hist_asks).copied().collect();
    if !has_quorum(&all_bids, &all_asks) {
        return (Vec::new(), None);
    }
    let Some(o) = outcome(&all_bids, &all_asks, omega) else {
        return (Vec::new(), None);
    };
    let active = |side: &[Participant], winners: &[AgentId]| {
        let mut v: Vec<AgentId> = winners.iter().copied().filter(|id| side.iter().any(|p| p.id == *id)).collect();
        v.sort_by_key(|id| omega.rank(*id));
        v
    };
    let wb = active(bids, &o.buyers);
    let ws = active(asks, &o.sellers);
    let pairs = wb.into_iter().zip(ws).collect();
    (pairs, Some((o.buy_price, o.sell_price)))
}
