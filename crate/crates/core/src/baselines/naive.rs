//! Trade reduction applied afresh in every period to the offers present.
//! Losers stay until they depart. Not truthful: agents gain by delaying
//! their arrival or by shading their value.

use std::collections::BTreeMap;

use super::Trade;
use crate::market::{AgentType, Participant, Period, RandomSource, Side};
use crate::rules::trade_reduction;

pub fn run(schedule: &[AgentType], source: &RandomSource) -> Vec<Trade> {
    let last = schedule.iter().map(|a| a.departure).max().unwrap_or(0);
    let mut arrivals: BTreeMap<Period, Vec<AgentType>> = BTreeMap::new();
    for a in schedule {
        arrivals.entry(a.arrival).or_default().push(*a);
    }
    let mut active: Vec<AgentType> = Vec::new();
    let mut trades = Vec::new();
    for t in 1..=last {
        active.extend(arrivals.remove(&t).unwrap_or_default());
        let side = |s: Side| active.iter().filter(|a| a.side == s).map(Participant::from).collect::<Vec<_>>();
        let (bids, asks) = (side(Side::Buyer), side(Side::Seller));
        if let Some(o) = trade_reduction::outcome(&bids, &asks, source.omega(t)) {
            for (&b, &s) in o.buyers.iter().zip(&o.sellers) {
                trades.push(Trade { period: t, buyer: b, seller: s, buyer_payment: o.buy_price, seller_payment: o.sell_price });
            }
            active.retain(|a| !o.buyers.contains(&a.id) && !o.sellers.contains(&a.id));
        }
        active.retain(|a| a.departure > t);
    }
    trades
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::AgentId;

    fn example() -> Vec<AgentType> {
        vec![
            AgentType::buyer(1, 1, 2, 15.0),
            AgentType::buyer(2, 1, 2, 10.0),
            AgentType::buyer(3, 1, 2, 4.0),
            AgentType::buyer(4, 2, 2, 3.0),
            AgentType::seller(11, 1, 2, -1.0),
            AgentType::seller(12, 2, 2, -1.0),
            AgentType::seller(13, 1, 1, -2.0),
            AgentType::seller(14, 2, 2, -2.0),
            AgentType::seller(15, 1, 2, -5.0),
        ]
    }

    fn utility(trades: &[Trade], id: u32, value: f64) -> f64 {
        trades.iter().find(|t| t.buyer == AgentId(id)).map_or(0.0, |t| value - t.buyer_payment)
    }

    #[test]
    fn truthful_run() {
        let trades = run(&example(), &RandomSource::new(1));
        assert_eq!(trades.len(), 2);
        assert_eq!((trades[0].period, trades[0].buyer, trades[0].seller), (1, AgentId(1), AgentId(11)));
        assert_eq!((trades[0].buyer_payment, trades[0].seller_payment), (10.0, -2.0));
        assert_eq!((trades[1].period, trades[1].buyer, trades[1].seller), (2, AgentId(2), AgentId(12)));
        assert_eq!((trades[1].buyer_payment, trades[1].seller_payment), (4.0, -2.0));
    }

    #[test]
    fn delaying_arrival_pays() {
        let mut s = example();
        s[0].arrival = 2;
        let trades = run(&s, &RandomSource::new(1));
        let t = trades.iter().find(|t| t.buyer == AgentId(1)).unwrap();
        assert_eq!((t.period, t.buyer_payment), (2, 4.0));
        assert!(utility(&trades, 1, 15.0) > utility(&run(&example(), &RandomSource::new(1)), 1, 15.0));
    }

    #[test]
    fn overbidding_pays() {
        let mut s = example();
        s[2].value = 6.0;
        let trades = run(&s, &RandomSource::new(1));
        let t = trades.iter().find(|t| t.buyer == AgentId(3)).unwrap();
        assert_eq!(t.period, 2);
        assert!(utility(&trades, 3, 4.0) > 0.0);
    }
}
