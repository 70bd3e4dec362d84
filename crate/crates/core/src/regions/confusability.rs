//! Minimum confusability `min I(X'; X Y)` over joint laws whose two input
//! marginals both equal `P` and whose conditional output laws are the
//! averaged channels of a pair of state types.

use nalgebra::DVector;
use rand::Rng;

use super::polytope::{projected_descent, Polytope};
use crate::channel::{injectivity, StateChannel, INJECTIVITY_TOL};
use crate::error::{Error, Result};
use crate::prob::{plogp, Dmc, JointPmf, Pmf};
use crate::rng::{substream, tag};

const GRID_POINTS: usize = 65;
const GRID_LEVELS: usize = 12;
const STARTS: usize = 64;
const MAX_ITERS: usize = 600;
const GRAD_CLAMP: f64 = 60.0;

/// Which optimizer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Grid search with zooming when the feasible set has dimension at most
    /// two, projected gradient otherwise.
    #[default]
    Auto,
    Grid,
    Gradient,
}

#[derive(Debug, Clone)]
pub struct ConfusabilityProblem {
    /// Common input law of the two codewords.
    pub p_x: Pmf,
    /// Candidate state laws. Both codewords range over all pairs.
    pub state_types: Vec<Pmf>,
    pub channel: StateChannel,
    /// Tolerance on `I(X; Y | X')`. Zero forces the Markov chain
    /// `X - X' - Y`.
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct Confusability {
    pub value: f64,
    /// Minimizing law over `(X, X', S, Y)` with `S` independent of the rest.
    pub argmin: JointPmf,
    /// Indices into `state_types` of the minimizing pair.
    pub states: (usize, usize),
    /// False when the gradient path stopped at its iteration cap.
    pub converged: bool,
}

pub fn min_confusability(problem: &ConfusabilityProblem, method: SolveMethod) -> Result<Confusability> {
    let w = &problem.channel;
    if problem.p_x.len() != w.x_size() {
        return Err(Error::DimensionMismatch(format!(
            "input pmf of size {} for alphabet {}",
            problem.p_x.len(),
            w.x_size()
        )));
    }
    if problem.state_types.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if !(problem.delta >= 0.0) || !problem.delta.is_finite() {
        return Err(Error::OutOfRange(format!("delta = {} must be non-negative", problem.delta)));
    }
    let averaged: Vec<Dmc> = problem
        .state_types
        .iter()
        .map(|ps| w.averaged(ps))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, Vec<f64>, (usize, usize), bool)> = None;
    for i in 0..averaged.len() {
        for j in 0..averaged.len() {
            let Some((value, q, converged)) =
                solve_pair(problem.p_x.probs(), &averaged[i], &averaged[j], problem.delta, method, i == j)?
            else {
                continue;
            };
            if best.as_ref().is_none_or(|b| value < b.0) {
                best = Some((value, q, (i, j), converged));
            }
        }
    }
    let (value, q, states, converged) =
        best.ok_or_else(|| Error::Infeasible("no pair of state laws admits a coupling".into()))?;
    if !converged {
        log::warn!("confusability optimizer hit its iteration cap; best value {value}");
    }
    let argmin = lift_with_state(&q, w.x_size(), w.y_size(), &problem.state_types[states.0])?;
    Ok(Confusability {
        value,
        argmin,
        states,
        converged,
    })
}

fn lift_with_state(q: &[f64], a: usize, ny: usize, p_s: &Pmf) -> Result<JointPmf> {
    let ns = p_s.len();
    let mut probs = vec![0.0; a * a * ns * ny];
    for x in 0..a {
        for xp in 0..a {
            for s in 0..ns {
                for y in 0..ny {
                    probs[((x * a + xp) * ns + s) * ny + y] = q[(x * a + xp) * ny + y] * p_s.get(s);
                }
            }
        }
    }
    JointPmf::new(vec![a, a, ns, ny], probs)
}

/// Optimizes over one pair of averaged channels. `None` if no coupling of
/// `P` with itself reproduces both channels.
fn solve_pair(
    p: &[f64],
    v: &Dmc,
    vp: &Dmc,
    delta: f64,
    method: SolveMethod,
    same: bool,
) -> Result<Option<(f64, Vec<f64>, bool)>> {
    let markov = Instance::markov(p, v, vp);
    let Some((f0, q0, conv0)) = markov.solve(method, None)? else {
        return Ok(None);
    };
    if same && injectivity(v, INJECTIVITY_TOL)?.injective {
        let h: f64 = p.iter().map(|&v| plogp(v)).sum();
        if (f0 - h).abs() > 1e-6 {
            log::info!("injective averaged channel with confusability {f0} below input entropy {h}");
        }
    }
    if delta == 0.0 {
        return Ok(Some((f0, q0, conv0)));
    }
    let relaxed = Instance::relaxed(p, v, vp, delta);
    Ok(match relaxed.solve(method, Some(&q0))? {
        Some((f, q, conv)) if f < f0 => Some((f, q, conv)),
        _ => Some((f0, q0, conv0)),
    })
}

/// `I(X'; X Y)` of a law `q(x, x', y)` laid out as `(x * a + x') * ny + y`.
pub(crate) fn objective(q: &[f64], a: usize, ny: usize) -> f64 {
    let (xp, xy) = marginals(q, a, ny);
    let v = ent(&xp) + ent(&xy) - ent(q);
    v.max(0.0)
}

/// `I(X; Y | X')` of the same layout.
pub(crate) fn leakage(q: &[f64], a: usize, ny: usize) -> f64 {
    let mut xxp = vec![0.0; a * a];
    let mut xpy = vec![0.0; a * ny];
    let mut xp = vec![0.0; a];
    for x in 0..a {
        for b in 0..a {
            for y in 0..ny {
                let v = q[(x * a + b) * ny + y];
                xxp[x * a + b] += v;
                xpy[b * ny + y] += v;
                xp[b] += v;
            }
        }
    }
    let v = ent(&xxp) + ent(&xpy) - ent(&xp) - ent(q);
    v.max(0.0)
}

fn marginals(q: &[f64], a: usize, ny: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xp = vec![0.0; a];
    let mut xy = vec![0.0; a * ny];
    for x in 0..a {
        for b in 0..a {
            for y in 0..ny {
                let v = q[(x * a + b) * ny + y];
                xp[b] += v;
                xy[x * ny + y] += v;
            }
        }
    }
    (xp, xy)
}

fn ent(v: &[f64]) -> f64 {
    v.iter().map(|&p| plogp(p.max(0.0))).sum()
}

/// One optimization instance in a concrete parametrization.
struct Instance<'a> {
    p: &'a [f64],
    v: &'a Dmc,
    vp: &'a Dmc,
    /// `None` for the Markov problem over couplings `C(x, x')`; otherwise
    /// the leakage cap of the relaxed problem over `q(x, x', y)`.
    delta: Option<f64>,
}

impl<'a> Instance<'a> {
    fn markov(p: &'a [f64], v: &'a Dmc, vp: &'a Dmc) -> Self {
        Self { p, v, vp, delta: None }
    }

    fn relaxed(p: &'a [f64], v: &'a Dmc, vp: &'a Dmc, delta: f64) -> Self {
        Self {
            p,
            v,
            vp,
            delta: Some(delta),
        }
    }

    fn a(&self) -> usize {
        self.p.len()
    }

    fn ny(&self) -> usize {
        self.v.out_size()
    }

    fn dim(&self) -> usize {
        match self.delta {
            None => self.a() * self.a(),
            Some(_) => self.a() * self.a() * self.ny(),
        }
    }

    fn polytope(&self) -> Option<Polytope> {
        let (a, ny, d) = (self.a(), self.ny(), self.dim());
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        match self.delta {
            None => {
                for x in 0..a {
                    let mut r = vec![0.0; d];
                    for b in 0..a {
                        r[x * a + b] = 1.0;
                    }
                    rows.push(r);
                    rhs.push(self.p[x]);
                    let mut r = vec![0.0; d];
                    for b in 0..a {
                        r[b * a + x] = 1.0;
                    }
                    rows.push(r);
                    rhs.push(self.p[x]);
                }
                for x in 0..a {
                    for y in 0..ny {
                        let mut r = vec![0.0; d];
                        for b in 0..a {
                            r[x * a + b] = self.vp.prob(b, y);
                        }
                        rows.push(r);
                        rhs.push(self.p[x] * self.v.prob(x, y));
                    }
                }
            }
            Some(_) => {
                for x in 0..a {
                    for y in 0..ny {
                        let mut r = vec![0.0; d];
                        for b in 0..a {
                            r[(x * a + b) * ny + y] = 1.0;
                        }
                        rows.push(r);
                        rhs.push(self.p[x] * self.v.prob(x, y));
                        let mut r = vec![0.0; d];
                        for b in 0..a {
                            r[(b * a + x) * ny + y] = 1.0;
                        }
                        rows.push(r);
                        rhs.push(self.p[x] * self.vp.prob(x, y));
                    }
                }
            }
        }
        Polytope::new(rows, rhs, d)
    }

    fn joint(&self, c: &DVector<f64>) -> Vec<f64> {
        let (a, ny) = (self.a(), self.ny());
        match self.delta {
            None => {
                let mut q = vec![0.0; a * a * ny];
                for x in 0..a {
                    for b in 0..a {
                        let cv = c[x * a + b].max(0.0);
                        for y in 0..ny {
                            q[(x * a + b) * ny + y] = cv * self.vp.prob(b, y);
                        }
                    }
                }
                q
            }
            Some(_) => c.iter().map(|&v| v.max(0.0)).collect(),
        }
    }

    fn admissible(&self, q: &[f64]) -> bool {
        match self.delta {
            None => true,
            Some(d) => leakage(q, self.a(), self.ny()) <= d,
        }
    }

    fn gradient(&self, c: &DVector<f64>) -> DVector<f64> {
        let (a, ny) = (self.a(), self.ny());
        let q = self.joint(c);
        let (xp, xy) = marginals(&q, a, ny);
        let gq = |x: usize, b: usize, y: usize| -> f64 {
            let v = q[(x * a + b) * ny + y];
            let denom = xp[b] * xy[x * ny + y];
            if v <= 0.0 || denom <= 0.0 {
                return -GRAD_CLAMP;
            }
            (v / denom).log2().clamp(-GRAD_CLAMP, GRAD_CLAMP)
        };
        match self.delta {
            None => DVector::from_fn(a * a, |i, _| {
                let (x, b) = (i / a, i % a);
                (0..ny).map(|y| self.vp.prob(b, y) * gq(x, b, y)).sum()
            }),
            Some(_) => DVector::from_fn(a * a * ny, |i, _| {
                let y = i % ny;
                let xb = i / ny;
                gq(xb / a, xb % a, y)
            }),
        }
    }

    fn eval(&self, c: &DVector<f64>) -> Option<f64> {
        let q = self.joint(c);
        self.admissible(&q).then(|| objective(&q, self.a(), self.ny()))
    }

    /// Returns `(value, q, converged)` or `None` when infeasible.
    fn solve(&self, method: SolveMethod, warm: Option<&[f64]>) -> Result<Option<(f64, Vec<f64>, bool)>> {
        let Some(poly) = self.polytope() else {
            return Ok(None);
        };
        let k = poly.null_dim();
        let use_grid = match method {
            SolveMethod::Auto => k <= 2,
            SolveMethod::Grid => {
                if k > 2 {
                    return Err(Error::OutOfRange(format!(
                        "grid search needs a feasible set of dimension at most 2, found {k}"
                    )));
                }
                true
            }
            SolveMethod::Gradient => false,
        };
        let warm_c = warm.map(DVector::from_column_slice);
        let result = if use_grid {
            self.grid_search(&poly, warm_c.as_ref()).map(|(f, c)| (f, c, true))
        } else {
            self.gradient_search(&poly, warm_c.as_ref())
        };
        Ok(result.map(|(f, c, conv)| (f, self.joint(&c), conv)))
    }

    fn grid_search(&self, poly: &Polytope, warm: Option<&DVector<f64>>) -> Option<(f64, DVector<f64>)> {
        let k = poly.null_dim();
        let mut best: Option<(f64, DVector<f64>)> = None;
        let consider = |c: DVector<f64>, best: &mut Option<(f64, DVector<f64>)>| {
            if poly.violation(&c) > 1e-9 {
                return;
            }
            if let Some(f) = self.eval(&c) {
                if best.as_ref().is_none_or(|b| f < b.0) {
                    *best = Some((f, c));
                }
            }
        };
        if let Some(c) = warm {
            if self.delta.is_some() {
                consider(c.clone(), &mut best);
            }
        }
        let vertices = poly.low_dim_vertices();
        if k == 0 || vertices.is_empty() {
            consider(poly.project(&poly.origin), &mut best);
            return best;
        }
        for z in &vertices {
            consider(poly.point(z), &mut best);
        }
        // Parametrize the feasible set as a box in null-space coordinates.
        // A two-dimensional set that is really a segment is walked along
        // the segment instead.
        let (origin, axes) = reduce_to_box(&vertices, k);
        let dims = axes.len();
        if dims == 0 {
            return best;
        }
        let mut lo = vec![0.0; dims];
        let mut hi: Vec<f64> = axes.iter().map(|(_, len)| *len).collect();
        let to_z = |t: &[f64]| -> Vec<f64> {
            let mut z = origin.clone();
            for (ti, (dir, _)) in t.iter().zip(&axes) {
                for (zj, dj) in z.iter_mut().zip(dir) {
                    *zj += ti * dj;
                }
            }
            z
        };
        let full_hi = hi.clone();
        for _ in 0..GRID_LEVELS {
            let steps: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| (h - l) / (GRID_POINTS - 1) as f64)
                .collect();
            let mut level_best: Option<(f64, Vec<f64>)> = None;
            let total = GRID_POINTS.pow(dims as u32);
            for idx in 0..total {
                let mut rem = idx;
                let t: Vec<f64> = (0..dims)
                    .map(|d| {
                        let i = rem % GRID_POINTS;
                        rem /= GRID_POINTS;
                        lo[d] + i as f64 * steps[d]
                    })
                    .collect();
                let c = poly.point(&to_z(&t));
                if poly.violation(&c) > 1e-9 {
                    continue;
                }
                if let Some(f) = self.eval(&c) {
                    if level_best.as_ref().is_none_or(|b| f < b.0) {
                        level_best = Some((f, t.clone()));
                    }
                    if best.as_ref().is_none_or(|b| f < b.0) {
                        best = Some((f, c));
                    }
                }
            }
            let Some((_, t)) = level_best else { break };
            for d in 0..dims {
                lo[d] = (t[d] - 2.0 * steps[d]).max(0.0);
                hi[d] = (t[d] + 2.0 * steps[d]).min(full_hi[d]);
            }
            if steps.iter().all(|&s| s < 1e-13) {
                break;
            }
        }
        best
    }

    fn gradient_search(&self, poly: &Polytope, warm: Option<&DVector<f64>>) -> Option<(f64, DVector<f64>, bool)> {
        let d = self.dim();
        let mut rng = substream(0x5eed, tag::OPTIMIZER);
        let mut starts: Vec<DVector<f64>> = Vec::new();
        if let Some(c) = warm {
            starts.push(c.clone());
        }
        starts.push(poly.project(&poly.origin));
        while starts.len() < STARTS {
            let raw = DVector::from_fn(d, |_, _| rng.gen::<f64>());
            starts.push(poly.project(&(raw / d as f64)));
        }
        let anchor = warm.cloned();
        let mut best: Option<(f64, DVector<f64>, bool)> = None;
        for start in starts {
            let Some(start) = self.repair(start, anchor.as_ref()) else {
                continue;
            };
            let (f, c, conv) = self.descend(poly, start);
            if best.as_ref().is_none_or(|b| f < b.0) {
                best = Some((f, c, conv));
            }
        }
        best
    }

    /// Moves an infeasible start towards an admissible anchor until the
    /// leakage cap holds.
    fn repair(&self, c: DVector<f64>, anchor: Option<&DVector<f64>>) -> Option<DVector<f64>> {
        if self.eval(&c).is_some() {
            return Some(c);
        }
        let anchor = anchor?;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let trial = anchor * (1.0 - mid) + &c * mid;
            if self.eval(&trial).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(anchor * (1.0 - lo) + &c * lo)
    }

    fn descend(&self, poly: &Polytope, c: DVector<f64>) -> (f64, DVector<f64>, bool) {
        projected_descent(poly, c, |c| self.eval(c), |c| self.gradient(c), MAX_ITERS)
    }
}

/// Spans the vertex set by orthogonal directions: returns the lower corner
/// in null-space coordinates and `(direction, length)` pairs.
fn reduce_to_box(vertices: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<(Vec<f64>, f64)>) {
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for z in vertices {
        for j in 0..k {
            lo[j] = lo[j].min(z[j]);
            hi[j] = hi[j].max(z[j]);
        }
    }
    if k == 2 {
        // Collinear vertex sets: use the segment through the two extremes.
        let (mut ia, mut ib, mut far) = (0, 0, -1.0);
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let dd = dist(&vertices[i], &vertices[j]);
                if dd > far {
                    far = dd;
                    ia = i;
                    ib = j;
                }
            }
        }
        if far > 0.0 {
            let a = &vertices[ia];
            let b = &vertices[ib];
            let dir: Vec<f64> = (0..2).map(|j| (b[j] - a[j]) / far).collect();
            let width = vertices
                .iter()
                .map(|z| ((z[0] - a[0]) * dir[1] - (z[1] - a[1]) * dir[0]).abs())
                .fold(0.0, f64::max);
            if width < 1e-9 * far.max(1.0) {
                return (a.clone(), vec![(dir, far)]);
            }
        }
    }
    let axes = (0..k)
        .filter(|&j| hi[j] - lo[j] > 1e-14)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            (e, hi[j] - lo[j])
        })
        .collect();
    (lo, axes)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::KMac;
    use crate::prob::{binary_entropy, entropy};
    use proptest::prelude::*;

    fn problem(w: StateChannel, p: Pmf, states: Vec<Pmf>, delta: f64) -> ConfusabilityProblem {
        ConfusabilityProblem {
            p_x: p,
            state_types: states,
            channel: w,
            delta,
        }
    }

    /// Brute force over the single coupling parameter of a binary problem.
    fn binary_oracle(p0: f64, v: &Dmc) -> f64 {
        let p = [p0, 1.0 - p0];
        let tmax = p0.min(1.0 - p0);
        let mut best = f64::INFINITY;
        let steps = 20_000;
        for i in 0..=steps {
            let t = tmax * i as f64 / steps as f64;
            let c = [p[0] - t, t, t, p[1] - t];
            let mut q = vec![0.0; 4 * v.out_size()];
            let mut worst: f64 = 0.0;
            for x in 0..2 {
                for y in 0..v.out_size() {
                    let mut s = 0.0;
                    for b in 0..2 {
                        q[(x * 2 + b) * v.out_size() + y] = c[x * 2 + b] * v.prob(b, y);
                        s += c[x * 2 + b] * v.prob(b, y);
                    }
                    worst = worst.max((s - p[x] * v.prob(x, y)).abs());
                }
            }
            if worst <= 1e-12 {
                best = best.min(objective(&q, 2, v.out_size()));
            }
        }
        best
    }

    #[test]
    fn injective_singleton_gives_input_entropy() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.1).unwrap());
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        let r = min_confusability(&problem(w, p.clone(), vec![Pmf::point_mass(1, 0).unwrap()], 0.0), SolveMethod::Auto)
            .unwrap();
        assert!((r.value - entropy(&p)).abs() < 1e-9);
        let x = r.argmin.marginal(0).unwrap();
        let xp = r.argmin.marginal(1).unwrap();
        assert!(x.total_variation(&p) < 1e-9 && xp.total_variation(&p) < 1e-9);
    }

    #[test]
    fn gradient_path_agrees_on_identity() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.1).unwrap());
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        let inst_p = p.probs().to_vec();
        let v = Dmc::bsc(0.1).unwrap();
        let inst = Instance::markov(&inst_p, &v, &v);
        let (f, _, conv) = inst.solve(SolveMethod::Gradient, None).unwrap().unwrap();
        assert!(conv);
        assert!((f - entropy(&p)).abs() < 1e-6);
        let _ = w;
    }

    #[test]
    fn multiplier_state_one_is_input_entropy() {
        let mac = KMac::multiplier(0.05).unwrap();
        let w = mac.state_channel(0).unwrap();
        let r = min_confusability(
            &problem(w, Pmf::uniform(2).unwrap(), vec![Pmf::point_mass(2, 1).unwrap()], 0.0),
            SolveMethod::Auto,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identical_rows_allow_independent_coupling() {
        let mac = KMac::mod2_adder(0.05).unwrap();
        let w = mac.state_channel(0).unwrap();
        let r = min_confusability(
            &problem(w, Pmf::uniform(2).unwrap(), vec![Pmf::uniform(2).unwrap()], 0.0),
            SolveMethod::Auto,
        )
        .unwrap();
        assert!(r.value.abs() < 1e-9);
    }

    #[test]
    fn relaxation_never_increases_value() {
        let mac = KMac::mod2_adder(0.05).unwrap();
        let w = mac.state_channel(0).unwrap();
        let states = vec![Pmf::new(vec![0.8, 0.2]).unwrap()];
        let p = Pmf::new(vec![0.4, 0.6]).unwrap();
        let mut prev = f64::INFINITY;
        let mut first = None;
        for delta in [0.0, 0.01, 0.05, 0.2, 1.0] {
            let r = min_confusability(&problem(w.clone(), p.clone(), states.clone(), delta), SolveMethod::Auto).unwrap();
            assert!(r.value <= prev + 1e-12);
            let leak = leakage(&flat_q(&r.argmin), 2, 2);
            assert!(leak <= delta + 1e-9);
            prev = r.value;
            first.get_or_insert(r.value);
        }
        assert!((first.unwrap() - entropy(&p)).abs() < 1e-9);
        assert!(prev < first.unwrap() - 1e-3);
    }

    fn flat_q(j: &JointPmf) -> Vec<f64> {
        j.marginalize(&[0, 1, 3]).unwrap().probs().to_vec()
    }

    #[test]
    fn state_pairs_can_only_lower_value() {
        let mac = KMac::mod2_adder(0.05).unwrap();
        let w = mac.state_channel(0).unwrap();
        let p = Pmf::uniform(2).unwrap();
        let one = vec![Pmf::new(vec![0.9, 0.1]).unwrap()];
        let two = vec![Pmf::new(vec![0.9, 0.1]).unwrap(), Pmf::new(vec![0.1, 0.9]).unwrap()];
        let a = min_confusability(&problem(w.clone(), p.clone(), one, 0.0), SolveMethod::Auto).unwrap();
        let b = min_confusability(&problem(w, p, two, 0.0), SolveMethod::Auto).unwrap();
        assert!((a.value - 1.0).abs() < 1e-9);
        // Swapping the roles of 0 and 1 turns one averaged channel into the
        // other, so the cross pair admits the swap coupling of a uniform input.
        assert!(b.value <= a.value + 1e-12);
        assert!((b.value - 1.0).abs() < 1e-9);
    }

    fn ternary_adder() -> KMac {
        KMac::deterministic(vec![3, 3], 3, |t| (t[0] + t[1]) % 3).unwrap()
    }

    #[test]
    fn ternary_uses_gradient_path() {
        let mac = ternary_adder();
        let w = mac.state_channel(0).unwrap();
        let p = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = min_confusability(
            &problem(w, p.clone(), vec![Pmf::uniform(3).unwrap()], 0.0),
            SolveMethod::Auto,
        )
        .unwrap();
        // Uniform state makes every row uniform, so the product coupling is
        // feasible and the value vanishes.
        assert!(r.value < 1e-5, "value {}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn forced_grid_rejects_high_dimension() {
        let mac = ternary_adder();
        let w = mac.state_channel(0).unwrap();
        let r = min_confusability(
            &problem(w, Pmf::uniform(3).unwrap(), vec![Pmf::uniform(3).unwrap()], 0.0),
            SolveMethod::Grid,
        );
        assert!(matches!(r, Err(Error::OutOfRange(_))));
    }

    #[test]
    fn invalid_inputs() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.1).unwrap());
        let p = Pmf::uniform(3).unwrap();
        assert!(min_confusability(&problem(w.clone(), p, vec![Pmf::point_mass(1, 0).unwrap()], 0.0), SolveMethod::Auto).is_err());
        assert!(min_confusability(&problem(w.clone(), Pmf::uniform(2).unwrap(), vec![], 0.0), SolveMethod::Auto).is_err());
        assert!(min_confusability(&problem(w, Pmf::uniform(2).unwrap(), vec![Pmf::point_mass(1, 0).unwrap()], -1.0), SolveMethod::Auto).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn binary_matches_brute_force(p0 in 0.05f64..0.95, a in 0.0f64..1.0, b in 0.0f64..1.0, equal in any::<bool>()) {
            let b = if equal { a } else { b };
            let v = Dmc::from_rows(vec![vec![a, 1.0 - a], vec![b, 1.0 - b]]).unwrap();
            let w = StateChannel::from_dmc(&v);
            let p = Pmf::new(vec![p0, 1.0 - p0]).unwrap();
            let r = min_confusability(&problem(w, p, vec![Pmf::point_mass(1, 0).unwrap()], 0.0), SolveMethod::Auto).unwrap();
            let oracle = binary_oracle(p0, &v);
            prop_assert!((r.value - oracle).abs() < 1e-4, "solver {} oracle {}", r.value, oracle);
            prop_assert!(r.value <= binary_entropy(p0).unwrap() + 1e-9);
        }

        #[test]
        fn argmin_respects_constraints(p0 in 0.05f64..0.95, a in 0.0f64..1.0, s0 in 0.0f64..1.0) {
            let mac = KMac::mod2_adder(a * 0.5).unwrap();
            let w = mac.state_channel(0).unwrap();
            let ps = Pmf::new(vec![s0, 1.0 - s0]).unwrap();
            let v = w.averaged(&ps).unwrap();
            let p = Pmf::new(vec![p0, 1.0 - p0]).unwrap();
            let r = min_confusability(&problem(w, p.clone(), vec![ps], 0.0), SolveMethod::Auto).unwrap();
            let j = &r.argmin;
            prop_assert!(j.marginal(0).unwrap().total_variation(&p) < 1e-6);
            prop_assert!(j.marginal(1).unwrap().total_variation(&p) < 1e-6);
            let xy = j.marginalize(&[0, 3]).unwrap();
            let xpy = j.marginalize(&[1, 3]).unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    prop_assert!((xy.get(&[x, y]) - p.get(x) * v.prob(x, y)).abs() < 1e-6);
                    prop_assert!((xpy.get(&[x, y]) - p.get(x) * v.prob(x, y)).abs() < 1e-6);
                }
            }
        }
    }
}
