//! Brute-force cross-checks: coupling grids against the confusability
//! optimizer, simplex grids against entropy tilting, type-class counting
//! identities, exact enumeration against Monte Carlo, and full-joint
//! optimization against the independent-state reduction.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{injectivity, KMac, StateChannel, INJECTIVITY_TOL};
use crate::codec::{build_code, exact_errors, monte_carlo_errors, DecisionParams, ErrorReport};
use crate::error::{Error, Result};
use crate::prob::{entropy, plogp, Dmc, Pmf};
use crate::regions::confusability::objective;
use crate::regions::polytope::{projected_descent, Polytope};
use crate::regions::{max_entropy_under_cost, min_confusability, ConfusabilityProblem, SolveMethod};
use crate::rng::{substream, tag};
use crate::types::{enumerate_types, log2_big, type_class_size, TypeVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ConfusabilityBinary,
    TypePartition,
    EntropyCost,
    ExactVsMc,
    Reduction,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::ConfusabilityBinary,
        Suite::TypePartition,
        Suite::EntropyCost,
        Suite::ExactVsMc,
        Suite::Reduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ConfusabilityBinary => "confusability-binary",
            Suite::TypePartition => "type-partition",
            Suite::EntropyCost => "entropy-cost",
            Suite::ExactVsMc => "exact-vs-mc",
            Suite::Reduction => "reduction",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::Spec(format!("unknown suite `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs one suite. All randomness derives from `seed`.
pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::ConfusabilityBinary => confusability_binary(seed)?,
        Suite::TypePartition => type_partition(12),
        Suite::EntropyCost => entropy_cost(seed)?,
        Suite::ExactVsMc => exact_vs_mc(seed, 10, 100_000)?,
        Suite::Reduction => reduction()?,
    };
    Ok(SuiteReport { suite, checks })
}

fn random_pmf(rng: &mut ChaCha8Rng, size: usize) -> Pmf {
    let raw: Vec<f64> = (0..size).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    Pmf::new(raw.into_iter().map(|v| v / total).collect()).expect("normalized")
}

/// Minimum of `I(X'; X Y)` over couplings of a binary input law `(p0, 1-p0)`
/// with itself, found by scanning the off-diagonal mass `t` on a grid of
/// `steps` points and keeping only couplings that reproduce `P(x) V(y|x)`
/// through `V(y|x')`.
pub fn coupling_grid_oracle(p0: f64, v: &Dmc, steps: usize) -> f64 {
    let p = [p0, 1.0 - p0];
    let ny = v.out_size();
    let tmax = p0.min(1.0 - p0);
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let t = tmax * i as f64 / steps as f64;
        let c = [p[0] - t, t, t, p[1] - t];
        let mut q = vec![0.0; 4 * ny];
        let mut worst: f64 = 0.0;
        for x in 0..2 {
            for y in 0..ny {
                let mut s = 0.0;
                for b in 0..2 {
                    let v_xy = c[x * 2 + b] * v.prob(b, y);
                    q[(x * 2 + b) * ny + y] = v_xy;
                    s += v_xy;
                }
                worst = worst.max((s - p[x] * v.prob(x, y)).abs());
            }
        }
        if worst <= 1e-12 {
            best = best.min(objective(&q, 2, ny));
        }
    }
    best
}

/// A binary-input state channel, a state law and an input law whose
/// averaged channel has rows at least `min_gap` apart in total variation.
#[derive(Debug, Clone)]
pub struct BinaryInstance {
    pub channel: StateChannel,
    pub p_s: Pmf,
    pub p_x: Pmf,
    pub averaged: Dmc,
}

pub fn random_binary_instance(rng: &mut ChaCha8Rng, min_gap: f64) -> BinaryInstance {
    loop {
        let ny = rng.gen_range(2..=4);
        let ns = rng.gen_range(1..=3);
        let rows: Vec<Pmf> = (0..2 * ns).map(|_| random_pmf(rng, ny)).collect();
        let channel = StateChannel::new(2, ns, rows).expect("valid shape");
        let p_s = random_pmf(rng, ns);
        let averaged = channel.averaged(&p_s).expect("matching state size");
        if averaged.row(0).total_variation(averaged.row(1)) < min_gap {
            continue;
        }
        let p0 = rng.gen_range(0.05..0.95);
        let p_x = Pmf::new(vec![p0, 1.0 - p0]).expect("binary pmf");
        return BinaryInstance {
            channel,
            p_s,
            p_x,
            averaged,
        };
    }
}

fn confusability_binary(seed: u64) -> Result<Vec<Check>> {
    let mut rng = substream(seed, tag::ORACLE);
    let mut checks = Vec::new();
    for i in 0..40 {
        // Every fourth instance has equal averaged rows.
        let mut inst = random_binary_instance(&mut rng, 0.05);
        if i % 4 == 3 {
            let row = inst.channel.row(0, 0).clone();
            inst.channel = StateChannel::new(2, 1, vec![row.clone(), row.clone()])?;
            inst.p_s = Pmf::point_mass(1, 0)?;
            inst.averaged = Dmc::new(vec![row.clone(), row])?;
        }
        let problem = ConfusabilityProblem {
            p_x: inst.p_x.clone(),
            state_types: vec![inst.p_s.clone()],
            channel: inst.channel.clone(),
            delta: 0.0,
        };
        let value = min_confusability(&problem, SolveMethod::Auto)?.value;
        let grid = coupling_grid_oracle(inst.p_x.get(0), &inst.averaged, 20_000);
        let diff = (value - grid).abs();
        checks.push(Check {
            label: format!("instance {i}"),
            passed: diff < 1e-4,
            detail: format!("optimizer={value:.9} grid={grid:.9} diff={diff:.3e}"),
        });
    }
    Ok(checks)
}

/// Counting identities of the method of types for `n <= max_n`.
pub fn type_partition(max_n: usize) -> Vec<Check> {
    let mut checks = Vec::new();
    for a in [2usize, 3] {
        for n in 1..=max_n {
            let mut total = BigUint::zero();
            let mut count = 0usize;
            let mut sandwich = true;
            for t in enumerate_types(n, a) {
                let size = type_class_size(&t);
                let bits = log2_big(&size);
                let h = n as f64 * entropy(&t.as_pmf());
                let lower = h - a as f64 * ((n + 1) as f64).log2();
                if bits > h + 1e-9 || bits < lower - 1e-9 {
                    sandwich = false;
                }
                total += size;
                count += 1;
            }
            let expected = BigUint::from(a).pow(n as u32);
            let bound = (n + 1).pow(a as u32);
            checks.push(Check {
                label: format!("A={a} n={n}"),
                passed: total == expected && count <= bound && sandwich,
                detail: format!("sum={total} A^n={expected} types={count} bound={bound} sandwich={sandwich}"),
            });
        }
    }
    checks
}

/// Brute-force maximum entropy under a cost cap, for up to three letters.
/// The uniform law is taken when affordable; otherwise the cap binds and
/// the search runs over a grid of `steps` points on the face
/// `cost = cap`, zoomed around the incumbent.
pub fn simplex_grid_max_entropy(phi: &[f64], cap: f64, steps: usize) -> Result<f64> {
    let a = phi.len();
    if a == 0 || a > 3 {
        return Err(Error::OutOfRange("the simplex grid supports one to three letters".into()));
    }
    if steps == 0 {
        return Err(Error::OutOfRange("at least one grid step is required".into()));
    }
    let h = |p: &[f64]| -> f64 { p.iter().map(|&v| plogp(v)).sum() };
    let mean = phi.iter().sum::<f64>() / a as f64;
    if mean <= cap + 1e-12 {
        return Ok((a as f64).log2());
    }
    let lo = phi.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > cap + 1e-12 {
        return Err(Error::Infeasible("no law meets the cost cap".into()));
    }
    // Letters i, j carry the slack; letter l (if any) is the free coordinate.
    let (i, j) = (0..a)
        .flat_map(|i| (0..a).map(move |j| (i, j)))
        .max_by(|x, y| {
            let dx = (phi[x.0] - phi[x.1]).abs();
            let dy = (phi[y.0] - phi[y.1]).abs();
            dx.partial_cmp(&dy).expect("finite costs")
        })
        .expect("two letters");
    let l = (0..a).find(|&l| l != i && l != j);
    let on_face = |t: f64| -> Option<f64> {
        let (pl, cl) = match l {
            Some(l) => (t, phi[l] * t),
            None => (0.0, 0.0),
        };
        if !(0.0..=1.0).contains(&pl) {
            return None;
        }
        let pi = (cap - cl - phi[j] * (1.0 - pl)) / (phi[i] - phi[j]);
        let pj = 1.0 - pl - pi;
        if pi < -1e-15 || pj < -1e-15 {
            return None;
        }
        let mut p = vec![0.0; a];
        p[i] = pi.max(0.0);
        p[j] = pj.max(0.0);
        if let Some(l) = l {
            p[l] = pl;
        }
        Some(h(&p))
    };
    if l.is_none() {
        return on_face(0.0).ok_or_else(|| Error::Infeasible("binding cap outside the simplex".into()));
    }
    let mut best: Option<(f64, f64)> = None;
    let scan = |ts: &mut dyn Iterator<Item = f64>, best: &mut Option<(f64, f64)>| {
        for t in ts {
            if let Some(v) = on_face(t) {
                if best.is_none_or(|b| v > b.0) {
                    *best = Some((v, t));
                }
            }
        }
    };
    scan(&mut (0..=steps).map(|k| k as f64 / steps as f64), &mut best);
    let mut width = 2.0 / steps as f64;
    for _ in 0..16 {
        let Some((_, center)) = best else { break };
        scan(&mut (0..=40).map(|k| center - width + width * k as f64 / 20.0), &mut best);
        width /= 8.0;
    }
    best.map(|b| b.0)
        .ok_or_else(|| Error::Infeasible("no grid point on the binding face".into()))
}

fn entropy_cost(seed: u64) -> Result<Vec<Check>> {
    let mut rng = substream(seed, tag::ORACLE + 1);
    let mut checks = Vec::new();
    for i in 0..12 {
        let a = if i % 3 == 0 { 2 } else { 3 };
        let phi: Vec<f64> = (0..a).map(|_| (rng.gen_range(0.0..2.0f64) * 100.0).round() / 100.0).collect();
        let lo = phi.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = phi.iter().sum::<f64>() / a as f64;
        let cap = lo + (mean - lo) * rng.gen_range(0.1..1.2);
        let (h, p) = max_entropy_under_cost(&phi, cap)?;
        let grid = simplex_grid_max_entropy(&phi, cap, 2000)?;
        let feasible = p.expect(&phi) <= cap + 1e-9;
        let diff = (h - grid).abs();
        checks.push(Check {
            label: format!("phi={phi:?} cap={cap:.4}"),
            passed: feasible && h >= grid - 1e-9 && diff < 1e-4,
            detail: format!("tilting={h:.9} grid={grid:.9} diff={diff:.3e}"),
        });
    }
    Ok(checks)
}

/// One seeded configuration for comparing exact enumeration with Monte
/// Carlo: a random quarter-valued state channel, a code of two to four
/// codewords, and a canonical state word.
#[derive(Debug, Clone)]
pub struct AgreementCase {
    pub label: String,
    pub exact: ErrorReport,
    pub monte_carlo: ErrorReport,
}

impl AgreementCase {
    /// Both error estimates within `k` Wilson half-widths of the exact
    /// values.
    pub fn agrees(&self, k: f64) -> bool {
        let ok = |e: f64, m: f64, hw: f64| (e - m).abs() <= k * hw + 1e-12;
        ok(self.exact.missed_id, self.monte_carlo.missed_id, self.monte_carlo.missed_half_width)
            && ok(self.exact.false_id, self.monte_carlo.false_id, self.monte_carlo.false_half_width)
    }
}

fn quarter_pmf(rng: &mut ChaCha8Rng, size: usize) -> Pmf {
    let mut counts = vec![0usize; size];
    for _ in 0..4 {
        counts[rng.gen_range(0..size)] += 1;
    }
    Pmf::new(counts.into_iter().map(|c| c as f64 / 4.0).collect()).expect("quarters")
}

pub fn agreement_case(index: u64, seed: u64, trials: u64) -> Result<AgreementCase> {
    let mut rng = substream(seed, tag::ORACLE + 1000 + index);
    let xs = rng.gen_range(2..=3);
    let ss = rng.gen_range(1..=2);
    let ys = rng.gen_range(2..=3);
    let n = if xs == 3 || ys == 3 { rng.gen_range(4..=6) } else { rng.gen_range(4..=10) };
    let rows: Vec<Pmf> = (0..xs * ss).map(|_| quarter_pmf(&mut rng, ys)).collect();
    let channel = StateChannel::new(xs, ss, rows)?;
    let mut counts = vec![n / xs; xs];
    for c in counts.iter_mut().take(n % xs) {
        *c += 1;
    }
    let p = TypeVector::new(counts)?;
    let s0 = rng.gen_range(0..=n);
    let state = if ss == 1 { TypeVector::new(vec![n])? } else { TypeVector::new(vec![s0, n - s0])? };
    let m = rng.gen_range(2..=4);
    let eps = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
    let params = DecisionParams { eps, delta: 0.05 };
    let code = build_code(channel, p, vec![state.clone()], m, params, seed ^ index, 32)?;
    let s = state.sorted_word();
    let exact = exact_errors(&code, &s, 0, 1)?;
    let monte_carlo = monte_carlo_errors(&code, &s, 0, 1, trials, seed.wrapping_add(index))?;
    Ok(AgreementCase {
        label: format!("case {index}: |X|={xs} |S|={ss} |Y|={ys} n={n} M={m} eps={eps}"),
        exact,
        monte_carlo,
    })
}

fn exact_vs_mc(seed: u64, cases: u64, trials: u64) -> Result<Vec<Check>> {
    (0..cases)
        .map(|i| {
            let c = agreement_case(i, seed, trials)?;
            Ok(Check {
                label: c.label.clone(),
                passed: c.agrees(4.0),
                detail: format!(
                    "exact=({:.6},{:.6}) mc=({:.6},{:.6}) hw=({:.2e},{:.2e})",
                    c.exact.missed_id,
                    c.exact.false_id,
                    c.monte_carlo.missed_id,
                    c.monte_carlo.false_id,
                    c.monte_carlo.missed_half_width,
                    c.monte_carlo.false_half_width
                ),
            })
        })
        .collect()
}

/// `I(X'; X S Y)` of `q(x, x', s, y)` laid out `((x * a + x') * ns + s) * ny + y`.
fn full_objective(q: &[f64], a: usize, ns: usize, ny: usize) -> f64 {
    let mut xp = vec![0.0; a];
    let mut xsy = vec![0.0; a * ns * ny];
    for x in 0..a {
        for b in 0..a {
            for s in 0..ns {
                for y in 0..ny {
                    let v = q[((x * a + b) * ns + s) * ny + y];
                    xp[b] += v;
                    xsy[(x * ns + s) * ny + y] += v;
                }
            }
        }
    }
    let ent = |v: &[f64]| -> f64 { v.iter().map(|&p| plogp(p.max(0.0))).sum() };
    (ent(&xp) + ent(&xsy) - ent(q)).max(0.0)
}

/// Minimum of `I(X'; X S Y)` over full joints `p(x, x', s) r(y | x', s)` on
/// binary inputs, binary outputs and two states: `S` has law `p_s`,
/// `Y | X` follows `p_s W`, `Y | X'` follows `p_s2 W`, and the factorization
/// makes `I(X; Y | X' S) = 0`. The kernel `r` is scanned on a grid of
/// `steps + 1` values per entry; for every kernel the convex problem over
/// `p(x, x', s)` is solved by projected descent.
pub fn full_joint_confusability(w: &StateChannel, p: &Pmf, p_s: &Pmf, p_s2: &Pmf, steps: usize) -> Result<f64> {
    let (a, ns, ny) = (w.x_size(), w.s_size(), w.y_size());
    if a != 2 || ns != 2 || ny != 2 || p.len() != 2 {
        return Err(Error::DimensionMismatch("the full-joint oracle handles binary X, S and Y".into()));
    }
    let v = w.averaged(p_s)?;
    let v2 = w.averaged(p_s2)?;
    let dim = a * a * ns;
    let idx = |x: usize, b: usize, s: usize| (x * a + b) * ns + s;
    let kernels: Vec<[f64; 4]> = {
        let mut out = Vec::new();
        let g = |i: usize| i as f64 / steps as f64;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    for l in 0..=steps {
                        out.push([g(i), g(j), g(k), g(l)]);
                    }
                }
            }
        }
        // The kernel of the independent-state reduction.
        out.push([v2.prob(0, 1), v2.prob(0, 1), v2.prob(1, 1), v2.prob(1, 1)]);
        out
    };
    let solve = |r: &[f64; 4]| -> Option<f64> {
        // r[b * ns + s] = r(y = 1 | x' = b, s).
        let r1 = |b: usize, s: usize| r[b * ns + s];
        let ry = |b: usize, s: usize, y: usize| if y == 1 { r1(b, s) } else { 1.0 - r1(b, s) };
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for x in 0..a {
            for y in 0..ny {
                let mut row = vec![0.0; dim];
                for b in 0..a {
                    for s in 0..ns {
                        row[idx(x, b, s)] = ry(b, s, y);
                    }
                }
                rows.push(row);
                rhs.push(p.get(x) * v.prob(x, y));
                let mut row = vec![0.0; dim];
                for b in 0..a {
                    for s in 0..ns {
                        row[idx(b, x, s)] = ry(x, s, y);
                    }
                }
                rows.push(row);
                rhs.push(p.get(x) * v2.prob(x, y));
            }
        }
        for s in 0..ns {
            let mut row = vec![0.0; dim];
            for x in 0..a {
                for b in 0..a {
                    row[idx(x, b, s)] = 1.0;
                }
            }
            rows.push(row);
            rhs.push(p_s.get(s));
        }
        let poly = Polytope::new(rows, rhs, dim)?;
        let start = poly.project(&poly.origin);
        if poly.violation(&start) > 1e-9 {
            return None;
        }
        let joint = |c: &DVector<f64>| -> Vec<f64> {
            let mut q = vec![0.0; dim * ny];
            for x in 0..a {
                for b in 0..a {
                    for s in 0..ns {
                        for y in 0..ny {
                            q[idx(x, b, s) * ny + y] = c[idx(x, b, s)].max(0.0) * ry(b, s, y);
                        }
                    }
                }
            }
            q
        };
        let eval = |c: &DVector<f64>| Some(full_objective(&joint(c), a, ns, ny));
        let grad = |c: &DVector<f64>| -> DVector<f64> {
            let q = joint(c);
            let mut xp = vec![0.0; a];
            let mut xsy = vec![0.0; a * ns * ny];
            for x in 0..a {
                for b in 0..a {
                    for s in 0..ns {
                        for y in 0..ny {
                            let val = q[idx(x, b, s) * ny + y];
                            xp[b] += val;
                            xsy[(x * ns + s) * ny + y] += val;
                        }
                    }
                }
            }
            DVector::from_fn(dim, |i, _| {
                let (x, b, s) = (i / (a * ns), (i / ns) % a, i % ns);
                (0..ny)
                    .map(|y| {
                        let val = q[i * ny + y];
                        let den = xp[b] * xsy[(x * ns + s) * ny + y];
                        let g = if val > 0.0 && den > 0.0 { (val / den).log2().clamp(-60.0, 60.0) } else { -60.0 };
                        ry(b, s, y) * g
                    })
                    .sum()
            })
        };
        let (f, _, _) = projected_descent(&poly, start, eval, grad, 400);
        Some(f)
    };
    kernels
        .par_iter()
        .filter_map(solve)
        .reduce_with(f64::min)
        .ok_or_else(|| Error::Infeasible("no kernel on the grid admits a feasible joint".into()))
}

/// Instances on which the reduced optimizer is compared with the full-joint
/// oracle.
pub fn reduction_instances() -> Result<Vec<(String, StateChannel, Pmf, Pmf)>> {
    let uniform = Pmf::uniform(2)?;
    Ok(vec![
        ("mod2-adder q=0 p_s=(0.5,0.5)".into(), KMac::mod2_adder(0.0)?.state_channel(0)?, uniform.clone(), uniform.clone()),
        (
            "multiplier q=0.05 p_s=(1,0)".into(),
            KMac::multiplier(0.05)?.state_channel(0)?,
            uniform.clone(),
            Pmf::point_mass(2, 0)?,
        ),
        (
            "mod2-adder q=0.05 p_s=(0.3,0.7)".into(),
            KMac::mod2_adder(0.05)?.state_channel(0)?,
            uniform.clone(),
            Pmf::new(vec![0.3, 0.7])?,
        ),
        (
            "multiplier q=0.05 p_s=(0.5,0.5)".into(),
            KMac::multiplier(0.05)?.state_channel(0)?,
            uniform.clone(),
            uniform,
        ),
    ])
}

fn reduction() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, w, p, p_s) in reduction_instances()? {
        let problem = ConfusabilityProblem {
            p_x: p.clone(),
            state_types: vec![p_s.clone()],
            channel: w.clone(),
            delta: 0.0,
        };
        let reduced = min_confusability(&problem, SolveMethod::Auto)?.value;
        let full = full_joint_confusability(&w, &p, &p_s, &p_s, 10)?;
        let injective = injectivity(&w.averaged(&p_s)?, INJECTIVITY_TOL)?.injective;
        let diff = reduced - full;
        checks.push(Check {
            label,
            passed: diff.abs() < 1e-3,
            detail: format!("reduced={reduced:.6} full={full:.6} gap={diff:.3e} injective={injective}"),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn type_partition_holds() {
        assert!(type_partition(8).iter().all(|c| c.passed));
    }

    #[test]
    fn coupling_oracle_on_equal_rows() {
        let v = Dmc::from_rows(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert!(coupling_grid_oracle(0.4, &v, 1000) < 1e-9);
        let v = Dmc::bsc(0.2).unwrap();
        let h = entropy(&Pmf::new(vec![0.4, 0.6]).unwrap());
        assert!((coupling_grid_oracle(0.4, &v, 1000) - h).abs() < 1e-12);
    }

    #[test]
    fn simplex_grid_examples() {
        assert!((simplex_grid_max_entropy(&[0.0, 1.0], 0.5, 1000).unwrap() - 1.0).abs() < 1e-12);
        assert!(simplex_grid_max_entropy(&[1.0, 2.0], 0.5, 10).is_err());
    }

    #[test]
    fn full_joint_matches_on_identical_rows() {
        let w = KMac::mod2_adder(0.0).unwrap().state_channel(0).unwrap();
        let u = Pmf::uniform(2).unwrap();
        let full = full_joint_confusability(&w, &u, &u, &u, 4).unwrap();
        assert!(full < 1e-6, "{full}");
    }

    #[test]
    fn state_correlated_with_input_undercuts_reduction() {
        // S = X with kernel r(1 | x', s) = [[0, 0.1], [0.1, 0.9]] meets every
        // marginal constraint of the multiplier at uniform state while X'
        // stays independent of X.
        let w = KMac::multiplier(0.05).unwrap().state_channel(0).unwrap();
        let u = Pmf::uniform(2).unwrap();
        let full = full_joint_confusability(&w, &u, &u, &u, 10).unwrap();
        assert!(full < 0.9, "{full}");
    }
}
