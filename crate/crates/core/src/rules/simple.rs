//! Posted-price matching: bids and asks are drawn in random order until a
//! bid willing to pay `p` and an ask willing to sell at `p` are found; the
//! two trade at `p`. Everything drawn and not matched loses.

use super::{no_trade_by_replacement, sort_by_rank, Clearing};
use crate::market::{AgentId, Money, Omega, Participant};

pub fn clear(price: Money, bids: &[Participant], asks: &[Participant], omega: Omega) -> Clearing {
    let mut c = Clearing { prices: Some((price, -price)), ..Clearing::default() };
    for (x, y) in matches(price, bids, asks, omega) {
        c.pairs.push((x, y));
        c.payments.insert(x, price);
        c.payments.insert(y, -price);
    }
    c.nt = no_trade_by_replacement(bids, asks, &c.payments, |b, s, id| {
        matches(price, b, s, omega).iter().any(|&(x, y)| x == id || y == id)
    });
    c
}

fn matches(price: Money, bids: &[Participant], asks: &[Participant], omega: Omega) -> Vec<(AgentId, AgentId)> {
    let b = sort_by_rank(bids, omega);
    let s = sort_by_rank(asks, omega);
    let mut out = Vec::new();
    let (mut bi, mut si) = (0, 0);
    while bi < b.len() && si < s.len() {
        let buyer = b[bi..].iter().position(|x| x.value >= price);
        bi = buyer.map_or(b.len(), |k| bi + k + 1);
        let seller = s[si..].iter().position(|x| x.value >= -price);
        si = seller.map_or(s.len(), |k| si + k + 1);
        if buyer.is_some() && seller.is_some() {
            out.push((b[bi - 1].id, s[si - 1].id));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::RandomSource;
    use crate::rules::participants;

    #[test]
    fn willing_pairs_trade_at_the_posted_price() {
        let mut src = RandomSource::new(1);
        src.set_order(1, [3, 1, 2, 102, 101].map(AgentId).to_vec());
        let bids = participants(&[10.0, 4.0, 7.0], 1, 1);
        let asks = participants(&[-2.0, -9.0], 101, 1);
        let c = clear(6.0, &bids, &asks, src.omega(1));
        // Bid 3 is willing; ask 102 is not, ask 101 is. Then bid 1 finds no ask.
        assert_eq!(c.pairs, vec![(AgentId(3), AgentId(101))]);
        assert_eq!(c.payment(AgentId(3)), Some(6.0));
        assert_eq!(c.payment(AgentId(101)), Some(-6.0));
        assert!(c.snt.is_empty());
        assert!(c.nt.contains(&AgentId(1)));
    }
}
