//! Capacity-region bounds for deterministic identification over a K-input
//! MAC, plus the transmission region for comparison.

pub(crate) mod confusability;
mod maxent;
pub(crate) mod polytope;
mod region;

pub use confusability::{min_confusability, Confusability, ConfusabilityProblem, SolveMethod};
pub use maxent::{finite_n_converse, max_entropy_under_cost};
pub use region::{export_region, write_csv, RateRegion, SumBound};

use rayon::prelude::*;

use crate::channel::{tuples, CostSpec, KMac};
use crate::error::{Error, Result};
use crate::prob::{conditional_mi, mutual_information, JointPmf, Pmf};
use crate::types::enumerate_types;

/// Outer bound: the box of per-sender maximal input entropies under cost.
pub fn ru_region(w: &KMac, costs: &CostSpec) -> Result<RateRegion> {
    let bounds = (0..w.k())
        .map(|k| {
            let c = costs.sender(k);
            max_entropy_under_cost(&c.phi, c.cap.unwrap_or(f64::INFINITY)).map(|(h, _)| h)
        })
        .collect::<Result<Vec<_>>>()?;
    RateRegion::polytope(bounds, Vec::new())
}

/// Cost-feasible pmfs on a grid of step `1 / grid` for every sender.
fn input_grid(w: &KMac, costs: &CostSpec, grid: usize) -> Result<Vec<Vec<Pmf>>> {
    if grid == 0 {
        return Err(Error::OutOfRange("grid resolution must be at least 1".into()));
    }
    (0..w.k())
        .map(|k| {
            let c = costs.sender(k);
            let pts: Vec<Pmf> = enumerate_types(grid, w.in_sizes()[k])
                .map(|t| t.as_pmf())
                .filter(|p| c.feasible(p))
                .collect();
            Ok(pts)
        })
        .collect()
}

fn product_of(pmfs: &[&Pmf]) -> Pmf {
    let mut out = Pmf::point_mass(1, 0).expect("one-letter pmf");
    for p in pmfs {
        out = out.product(p);
    }
    out
}

/// Number of points in the product grid.
pub fn grid_size(w: &KMac, costs: &CostSpec, grid: usize) -> Result<usize> {
    Ok(input_grid(w, costs, grid)?.iter().map(|v| v.len()).product())
}

/// Inner bound: union over product input laws of the boxes whose `k`-th
/// side is the minimum confusability of sender `k` with the other inputs
/// drawn from their marginals.
pub fn rl_region(w: &KMac, costs: &CostSpec, grid: usize) -> Result<RateRegion> {
    let per_sender = input_grid(w, costs, grid)?;
    if per_sender.iter().any(|v| v.is_empty()) {
        return Ok(RateRegion::empty(w.k()));
    }
    let sizes: Vec<usize> = per_sender.iter().map(|v| v.len()).collect();
    let points: Vec<Vec<usize>> = tuples(&sizes).collect();
    let channels = (0..w.k()).map(|k| w.state_channel(k)).collect::<Result<Vec<_>>>()?;
    let corners = points
        .par_iter()
        .map(|idx| {
            (0..w.k())
                .map(|k| {
                    let others: Vec<&Pmf> = (0..w.k())
                        .filter(|&j| j != k)
                        .map(|j| &per_sender[j][idx[j]])
                        .collect();
                    let problem = ConfusabilityProblem {
                        p_x: per_sender[k][idx[k]].clone(),
                        state_types: vec![product_of(&others)],
                        channel: channels[k].clone(),
                        delta: 0.0,
                    };
                    min_confusability(&problem, SolveMethod::Auto).map(|c| c.value)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RateRegion::box_union(corners, w.k())
}

/// The three mutual informations of a two-sender product input law:
/// `I(X1; Y | X2)`, `I(X2; Y | X1)` and `I(X1 X2; Y)`.
pub fn pentagon_bounds(w: &KMac, p1: &Pmf, p2: &Pmf) -> Result<[f64; 3]> {
    if w.k() != 2 {
        return Err(Error::DimensionMismatch(format!("two senders required, got {}", w.k())));
    }
    let (a, b, ny) = (w.in_sizes()[0], w.in_sizes()[1], w.out_size());
    let mut probs = Vec::with_capacity(a * b * ny);
    for x1 in 0..a {
        for x2 in 0..b {
            let px = p1.get(x1) * p2.get(x2);
            probs.extend(w.row_unchecked(&[x1, x2]).probs().iter().map(|v| px * v));
        }
    }
    let joint = JointPmf::new(vec![a, b, ny], probs)?;
    let i1 = conditional_mi(&joint.marginalize(&[0, 2, 1])?)?;
    let i2 = conditional_mi(&joint.marginalize(&[1, 2, 0])?)?;
    let i12 = mutual_information(&joint.group(&[vec![0, 1], vec![2]])?)?;
    Ok([i1, i2, i12])
}

/// Transmission capacity region of a two-sender MAC: convex hull of the
/// pentagons of all product input laws on the grid.
pub fn transmission_region(w: &KMac, costs: &CostSpec, grid: usize) -> Result<RateRegion> {
    if w.k() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "transmission region is implemented for two senders, got {}",
            w.k()
        )));
    }
    let per_sender = input_grid(w, costs, grid)?;
    if per_sender.iter().any(|v| v.is_empty()) {
        return Ok(RateRegion::empty(2));
    }
    let pairs: Vec<(usize, usize)> = (0..per_sender[0].len())
        .flat_map(|i| (0..per_sender[1].len()).map(move |j| (i, j)))
        .collect();
    let vertices = pairs
        .par_iter()
        .map(|&(i, j)| {
            let [i1, i2, i12] = pentagon_bounds(w, &per_sender[0][i], &per_sender[1][j])?;
            Ok(vec![
                [i1, 0.0],
                [i1, (i12 - i1).max(0.0)],
                [(i12 - i2).max(0.0), i2],
                [0.0, i2],
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<[f64; 2]> = vertices.into_iter().flatten().collect();
    Ok(RateRegion::hull(&all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SenderCost;
    use crate::prob::binary_entropy;

    #[test]
    fn upper_box_examples() {
        let w = KMac::mod3_adder();
        let r = ru_region(&w, &CostSpec::unconstrained(&w)).unwrap();
        assert_eq!(r.axis_bounds(), &[1.0, 1.0]);
        let w = KMac::multiplier(0.05).unwrap();
        let costs = CostSpec::new(&w, vec![SenderCost::hamming(2, Some(0.3)), SenderCost::hamming(2, None)]).unwrap();
        let r = ru_region(&w, &costs).unwrap();
        assert!((r.axis_bounds()[0] - binary_entropy(0.3).unwrap()).abs() < 1e-12);
        assert_eq!(r.axis_bounds()[1], 1.0);
    }

    #[test]
    fn multiplier_lower_region_is_inside_upper() {
        let w = KMac::multiplier(0.05).unwrap();
        let costs = CostSpec::unconstrained(&w);
        let rl = rl_region(&w, &costs, 10).unwrap();
        let ru = ru_region(&w, &costs).unwrap();
        for c in rl.corners().unwrap() {
            assert!(ru.contains(c, 1e-9));
        }
        // With the other sender fixed at one the multiplier is a BSC for the
        // first sender, so full entropy is reachable on that axis.
        assert!((rl.axis_bounds()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_grid_when_costs_exclude_everything() {
        let w = KMac::multiplier(0.05).unwrap();
        let costs = CostSpec::new(&w, vec![SenderCost::new(vec![1.0, 2.0], Some(0.5)).unwrap(), SenderCost::free(2)]).unwrap();
        assert!(rl_region(&w, &costs, 4).unwrap().is_empty());
        assert!(ru_region(&w, &costs).is_err());
    }

    #[test]
    fn mod3_transmission_region_corner() {
        let w = KMac::mod3_adder();
        let costs = CostSpec::unconstrained(&w);
        let r = transmission_region(&w, &costs, 6).unwrap();
        assert!((r.max_sum_rate() - 1.5).abs() < 1e-9);
        assert!(r.contains(&[1.0, 0.5], 1e-9));
        assert!(!r.contains(&[1.0, 0.6], 1e-9));
    }

    #[test]
    fn pentagon_of_uniform_multiplier() {
        let w = KMac::multiplier(0.0).unwrap();
        let u = Pmf::uniform(2).unwrap();
        let [i1, i2, i12] = pentagon_bounds(&w, &u, &u).unwrap();
        assert!((i1 - 0.5).abs() < 1e-12 && (i2 - 0.5).abs() < 1e-12);
        assert!((i12 - binary_entropy(0.25).unwrap()).abs() < 1e-12);
    }
}
