//! Grid search with neighbour smoothing and successive narrowing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneSpec {
    pub lo: f64,
    pub hi: f64,
    /// Grid points per pass.
    pub samples: usize,
    pub passes: usize,
    /// Restrict the grid to integers.
    pub integer: bool,
}

impl TuneSpec {
    pub fn new(lo: f64, hi: f64, samples: usize) -> TuneSpec {
        TuneSpec { lo, hi, samples, passes: 3, integer: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub value: f64,
    pub smoothed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuned {
    pub best: f64,
    pub passes: Vec<Vec<GridPoint>>,
}

fn grid(lo: f64, hi: f64, n: usize, integer: bool) -> Vec<f64> {
    if integer {
        let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
        if (b - a + 1) as usize <= n {
            return (a..=b).map(|i| i as f64).collect();
        }
        let mut xs: Vec<f64> = grid(lo, hi, n, false).into_iter().map(f64::round).collect();
        xs.dedup();
        return xs;
    }
    if n <= 1 || hi == lo {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Average each value with its immediate neighbours.
pub fn smooth(values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            let from = i.saturating_sub(1);
            let to = (i + 2).min(values.len());
            values[from..to].iter().sum::<f64>() / (to - from) as f64
        })
        .collect()
}

/// Maximize `objective` over `[lo, hi]`. Each pass evaluates a uniform grid,
/// smooths it and narrows the range to the neighbours of the smoothed
/// maximum. Ties go to the smaller parameter.
pub fn tune<F>(spec: TuneSpec, objective: F) -> Result<Tuned>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(spec.lo <= spec.hi) || spec.samples == 0 || spec.passes == 0 {
        return Err(Error::Config(format!("empty tuning range {}:{} with {} samples", spec.lo, spec.hi, spec.samples)));
    }
    if spec.integer && spec.lo.ceil() > spec.hi.floor() {
        return Err(Error::Config(format!("no integer in {}:{}", spec.lo, spec.hi)));
    }
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    let mut passes = Vec::new();
    let mut best = lo;
    for _ in 0..spec.passes {
        let xs = grid(lo, hi, spec.samples, spec.integer);
        let values = xs.par_iter().map(|&x| objective(x)).collect::<Result<Vec<f64>>>()?;
        let smoothed = smooth(&values);
        let mut i = 0;
        for (j, s) in smoothed.iter().enumerate() {
            if *s > smoothed[i] {
                i = j;
            }
        }
        best = xs[i];
        passes.push(
            xs.iter()
                .zip(&values)
                .zip(&smoothed)
                .map(|((&x, &value), &smoothed)| GridPoint { x, value, smoothed })
                .collect(),
        );
        let exhaustive = spec.integer && xs.len() as f64 == hi.floor() - lo.ceil() + 1.0;
        let (nlo, nhi) = (xs[i.saturating_sub(1)], xs[(i + 1).min(xs.len() - 1)]);
        if exhaustive || (nlo, nhi) == (lo, hi) || xs.len() < 3 {
            break;
        }
        (lo, hi) = (nlo, nhi);
    }
    Ok(Tuned { best, passes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_peak() {
        let t = tune(TuneSpec::new(0.0, 10.0, 11), |p| Ok(-(p - 5.0) * (p - 5.0))).unwrap();
        assert!((t.best - 5.0).abs() <= 1.0);
        assert_eq!(t.passes.len(), 3);
        let t = tune(TuneSpec::new(0.0, 10.0, 11), |p| Ok(-(p - 3.3) * (p - 3.3))).unwrap();
        assert!((t.best - 3.3).abs() <= 0.2, "{}", t.best);
    }

    #[test]
    fn constant_objective_returns_a_grid_point() {
        let t = tune(TuneSpec::new(1.0, 2.0, 5), |_| Ok(1.0)).unwrap();
        assert!((1.0..=2.0).contains(&t.best));
    }

    #[test]
    fn integers_are_evaluated_exhaustively_when_few() {
        let spec = TuneSpec { integer: true, ..TuneSpec::new(1.0, 6.0, 10) };
        let t = tune(spec, |p| Ok(-(p - 4.0).abs())).unwrap();
        assert_eq!(t.best, 4.0);
        assert_eq!(t.passes[0].len(), 6);
    }

    #[test]
    fn empty_range_errors() {
        assert!(tune(TuneSpec::new(2.0, 1.0, 5), |_| Ok(0.0)).is_err());
        let spec = TuneSpec { integer: true, ..TuneSpec::new(1.2, 1.8, 5) };
        assert!(tune(spec, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn smoothing_uses_existing_neighbours() {
        assert_eq!(smooth(&[3.0, 0.0, 3.0]), vec![1.5, 2.0, 1.5]);
    }
}
