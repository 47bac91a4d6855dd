//! Randomized fixed price for values in `[w_min, w_max]`.
//!
//! The price has density proportional to `1 / (x - w_min)` on
//! `[r * w_min, w_max]`, where `r` solves
//! `r = ln((w_max - w_min) / ((r - 1) * w_min))`.

use crate::error::{Error, Result};
use crate::market::Money;

fn check(w_min: Money, w_max: Money) -> Result<()> {
    if !(w_min > 0.0) {
        return Err(Error::NonPositiveMinValue(w_min));
    }
    if !(w_max > w_min) {
        return Err(Error::EmptyValueRange { min: w_min, max: w_max });
    }
    Ok(())
}

/// Root of `r + ln(r - 1) = ln((w_max - w_min) / w_min)` on `(1, inf)`.
pub fn competitive_ratio(w_min: Money, w_max: Money) -> Result<f64> {
    check(w_min, w_max)?;
    let target = ((w_max - w_min) / w_min).ln();
    let f = |r: f64| r + (r - 1.0).ln() - target;
    let (mut lo, mut hi) = (1.0, 2.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Price at quantile `u` in `[0, 1]`.
pub fn price(w_min: Money, w_max: Money, u: f64) -> Result<Money> {
    let r = competitive_ratio(w_min, w_max)?;
    Ok(w_min + (r - 1.0) * w_min * (r * u).exp())
}

/// Distribution function of the price.
pub fn cdf(w_min: Money, w_max: Money, x: Money) -> Result<f64> {
    let r = competitive_ratio(w_min, w_max)?;
    if x <= r * w_min {
        return Ok(0.0);
    }
    if x >= w_max {
        return Ok(1.0);
    }
    Ok(((x - w_min) / ((r - 1.0) * w_min)).ln() / r)
}
