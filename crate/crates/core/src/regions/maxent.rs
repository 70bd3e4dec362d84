//! Entropy maximization under a linear cost constraint.

use crate::error::{Error, Result};
use crate::prob::{entropy, Pmf};

const BISECTION_STEPS: usize = 200;

/// Maximizes `H(p)` subject to `sum_x p(x) phi(x) <= cap`.
///
/// The maximizer is the tilted distribution `p(x) ~ 2^(-lambda phi(x))` with
/// the smallest `lambda >= 0` meeting the constraint. Pass `f64::INFINITY` for
/// an unconstrained sender.
pub fn max_entropy_under_cost(phi: &[f64], cap: f64) -> Result<(f64, Pmf)> {
    if phi.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let min_cost = phi.iter().copied().fold(f64::INFINITY, f64::min);
    if cap < min_cost - 1e-12 {
        return Err(Error::InfeasibleCost { cap, min_cost });
    }
    let uniform = Pmf::uniform(phi.len())?;
    if uniform.expect(phi) <= cap {
        return Ok((entropy(&uniform), uniform));
    }
    if cap <= min_cost {
        let argmin: Vec<f64> = phi
            .iter()
            .map(|&c| if c == min_cost { 1.0 } else { 0.0 })
            .collect();
        let k: f64 = argmin.iter().sum();
        let p = Pmf::new(argmin.iter().map(|v| v / k).collect())?;
        return Ok((entropy(&p), p));
    }

    let mean = |lambda: f64| tilted(phi, min_cost, lambda).expect(phi);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while mean(hi) > cap {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mean(mid) > cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = tilted(phi, min_cost, hi);
    Ok((entropy(&p), p))
}

fn tilted(phi: &[f64], min_cost: f64, lambda: f64) -> Pmf {
    let w: Vec<f64> = phi.iter().map(|&c| (-lambda * (c - min_cost)).exp2()).collect();
    let z: f64 = w.iter().sum();
    Pmf::new(w.iter().map(|v| v / z).collect()).expect("tilted weights normalize")
}

/// Finite-blocklength converse `h* + (a / n) log2(n + 1)` on the DI rate of a
/// sender with alphabet size `a`.
pub fn finite_n_converse(n: usize, phi: &[f64], cap: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::OutOfRange("blocklength must be at least 1".into()));
    }
    let (h, _) = max_entropy_under_cost(phi, cap)?;
    Ok(h + phi.len() as f64 / n as f64 * ((n + 1) as f64).log2())
}
