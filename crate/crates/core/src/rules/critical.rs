use super::{clear, side_of, with_top_value, Clearing, Context, Rule, EPSILON_ASK};
use crate::error::{Error, Result};
use crate::market::{AgentId, Money, Omega, Participant, Side};

const SEARCH_LIMIT: Money = 1e15;

/// Lowest value at which `id` still wins, holding every other report and the
/// randomness fixed. `+inf` when `id` cannot win at any value.
///
/// Errors with [`Error::NonMonotone`] if winning is not upward closed in the
/// reported value.
pub fn critical_price(
    rule: &Rule,
    ctx: &Context,
    bids: &[Participant],
    asks: &[Participant],
    omega: Omega,
    id: AgentId,
) -> Result<Money> {
    let side = side_of(id, bids);
    let run = |v: Money| -> Clearing {
        match side {
            Side::Buyer => clear(rule, ctx, &with_top_value(bids, id, v), asks, omega),
            Side::Seller => clear(rule, ctx, bids, &with_top_value(asks, id, v), omega),
        }
    };
    let wins = |v: Money| run(v).is_winner(id);

    let top = match side {
        Side::Buyer => Money::INFINITY,
        Side::Seller => EPSILON_ASK,
    };
    if !wins(top) {
        return Ok(Money::INFINITY);
    }
    let (mut lo, mut hi) = match side {
        Side::Buyer => {
            if wins(0.0) {
                return Ok(0.0);
            }
            let mut hi = 1.0;
            while !wins(hi) {
                hi *= 2.0;
                if hi > SEARCH_LIMIT {
                    return Err(Error::NonMonotone(id));
                }
            }
            (0.0, hi)
        }
        Side::Seller => {
            let mut lo = -1.0;
            while wins(lo) {
                lo *= 2.0;
                if lo < -SEARCH_LIMIT {
                    return Ok(Money::NEG_INFINITY);
                }
            }
            (lo, EPSILON_ASK)
        }
    };
    let (lo0, hi0) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if wins(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let z = hi;
    let slack = 1e-9 * z.abs().max(1.0);
    let span = (hi0 - lo0).max(1.0);
    for k in 0..=40 {
        let v = lo0 - 0.25 * span + 1.5 * span * k as Money / 40.0;
        if side == Side::Seller && v > EPSILON_ASK {
            continue;
        }
        if (v - z).abs() <= slack {
            continue;
        }
        if wins(v) != (v >= z) {
            return Err(Error::NonMonotone(id));
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::RandomSource;
    use crate::rules::{participants, PriceVariant};

    #[test]
    fn mcafee_winners_pay_their_critical_price() {
        let src = RandomSource::new(2);
        let bids = participants(&[15.0, 10.0, 6.0], 1, 1);
        let asks = participants(&[-1.0, -3.0, -4.0, -5.0, -10.0], 101, 1);
        let c = clear(&Rule::McAfee, &Context::None, &bids, &asks, src.omega(1));
        for (&id, &pay) in &c.payments {
            let z = critical_price(&Rule::McAfee, &Context::None, &bids, &asks, src.omega(1), id).unwrap();
            assert!((z - pay).abs() < 1e-6, "{id:?}: critical {z} payment {pay}");
        }
    }

    #[test]
    fn no_trade_members_have_infinite_price() {
        let src = RandomSource::new(2);
        let bids = participants(&[8.0, 7.0, 2.0], 1, 1);
        let asks = participants(&[-6.0, -10.0, -12.0], 101, 1);
        let z = critical_price(&Rule::TradeReduction, &Context::None, &bids, &asks, src.omega(1), AgentId(2));
        assert_eq!(z.unwrap(), Money::INFINITY);
    }

    #[test]
    fn posted_price_threshold() {
        let src = RandomSource::new(2);
        let rule = Rule::PriceBased { variant: PriceVariant::Fixed { price: 6.5 } };
        let bids = participants(&[10.0], 1, 2);
        let asks = participants(&[-2.0], 101, 2);
        let z = critical_price(&rule, &Context::Price(6.5), &bids, &asks, src.omega(1), AgentId(1)).unwrap();
        assert!((z - 6.5).abs() < 1e-9);
        let z = critical_price(&rule, &Context::Price(6.5), &bids, &asks, src.omega(1), AgentId(101)).unwrap();
        assert!((z + 6.5).abs() < 1e-9);
    }
}
