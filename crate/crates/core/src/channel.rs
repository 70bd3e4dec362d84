//! K-input multiple-access channels, partial and averaged channels, cost
//! specifications and the binary example channels.

use crate::error::{Error, Result};
use crate::prob::{Dmc, Pmf};

/// Default tolerance for the injectivity test (total-variation distance).
pub const INJECTIVITY_TOL: f64 = 1e-9;

/// A discrete memoryless K-input MAC `W(y | x_1, .., x_K)`.
///
/// Rows are stored row-major over the product input alphabet with sender 0
/// as the slowest axis.
#[derive(Debug, Clone, PartialEq)]
pub struct KMac {
    in_sizes: Vec<usize>,
    out_size: usize,
    rows: Vec<Pmf>,
}

impl KMac {
    pub fn new(in_sizes: Vec<usize>, out_size: usize, rows: Vec<Pmf>) -> Result<Self> {
        if in_sizes.is_empty() {
            return Err(Error::DimensionMismatch("a MAC needs at least one sender".into()));
        }
        if in_sizes.contains(&0) || out_size == 0 {
            return Err(Error::DimensionMismatch("alphabet sizes must be at least 1".into()));
        }
        let tuples: usize = in_sizes.iter().product();
        if rows.len() != tuples {
            return Err(Error::DimensionMismatch(format!(
                "expected {tuples} conditional rows, got {}",
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != out_size) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has length {}, expected {out_size}",
                rows[bad].len()
            )));
        }
        Ok(Self {
            in_sizes,
            out_size,
            rows,
        })
    }

    /// Builds a MAC from a deterministic map of the input tuple to an output
    /// letter.
    pub fn deterministic(
        in_sizes: Vec<usize>,
        out_size: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        let rows = tuples(&in_sizes)
            .map(|t| Pmf::point_mass(out_size, f(&t)))
            .collect::<Result<Vec<_>>>()?;
        KMac::new(in_sizes, out_size, rows)
    }

    pub fn k(&self) -> usize {
        self.in_sizes.len()
    }

    pub fn in_sizes(&self) -> &[usize] {
        &self.in_sizes
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    fn tuple_index(&self, input: &[usize]) -> usize {
        input
            .iter()
            .zip(&self.in_sizes)
            .fold(0, |acc, (&x, &size)| acc * size + x)
    }

    /// Conditional output distribution for an input tuple.
    pub fn row(&self, input: &[usize]) -> Result<&Pmf> {
        if input.len() != self.k() {
            return Err(Error::DimensionMismatch(format!(
                "input tuple of length {} for a {}-sender MAC",
                input.len(),
                self.k()
            )));
        }
        for (i, (&x, &size)) in input.iter().zip(&self.in_sizes).enumerate() {
            if x >= size {
                return Err(Error::IndexOutOfRange(format!(
                    "letter {x} for sender {i} with alphabet size {size}"
                )));
            }
        }
        Ok(&self.rows[self.tuple_index(input)])
    }

    pub(crate) fn row_unchecked(&self, input: &[usize]) -> &Pmf {
        &self.rows[self.tuple_index(input)]
    }

    /// Alphabet sizes of all senders except `sender`, in sender order.
    pub fn other_sizes(&self, sender: usize) -> Vec<usize> {
        self.in_sizes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != sender)
            .map(|(_, &s)| s)
            .collect()
    }

    fn check_sender(&self, sender: usize) -> Result<()> {
        if sender >= self.k() {
            return Err(Error::IndexOutOfRange(format!(
                "sender {sender} for a {}-sender MAC",
                self.k()
            )));
        }
        Ok(())
    }

    fn with_sender(&self, sender: usize, x: usize, others: &[usize]) -> Vec<usize> {
        let mut input = Vec::with_capacity(self.k());
        input.extend_from_slice(&others[..sender]);
        input.push(x);
        input.extend_from_slice(&others[sender..]);
        input
    }

    /// The point-to-point channel seen by `sender` when the other senders'
    /// letters are fixed to `fixed_others` (given in sender order).
    pub fn partial_channel(&self, sender: usize, fixed_others: &[usize]) -> Result<Dmc> {
        self.check_sender(sender)?;
        let sizes = self.other_sizes(sender);
        if fixed_others.len() != sizes.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} fixed letters, got {}",
                sizes.len(),
                fixed_others.len()
            )));
        }
        for (&x, &size) in fixed_others.iter().zip(&sizes) {
            if x >= size {
                return Err(Error::IndexOutOfRange(format!(
                    "fixed letter {x} for alphabet of size {size}"
                )));
            }
        }
        let rows = (0..self.in_sizes[sender])
            .map(|x| self.row_unchecked(&self.with_sender(sender, x, fixed_others)).clone())
            .collect();
        Dmc::new(rows)
    }

    /// The averaged partial channel `p_S W` where `p_others` is a pmf over
    /// the row-major product of the other senders' alphabets.
    pub fn averaged_partial_channel(&self, sender: usize, p_others: &Pmf) -> Result<Dmc> {
        self.state_channel(sender)?.averaged(p_others)
    }

    /// The partial channel of `sender` with the other inputs viewed as a
    /// channel state.
    pub fn state_channel(&self, sender: usize) -> Result<StateChannel> {
        self.check_sender(sender)?;
        let sizes = self.other_sizes(sender);
        let s_size: usize = sizes.iter().product();
        let mut rows = Vec::with_capacity(self.in_sizes[sender] * s_size);
        for x in 0..self.in_sizes[sender] {
            for others in tuples(&sizes) {
                rows.push(self.row_unchecked(&self.with_sender(sender, x, &others)).clone());
            }
        }
        StateChannel::new(self.in_sizes[sender], s_size, rows)
    }

    pub fn mod3_adder() -> KMac {
        KMac::deterministic(vec![2, 2], 3, |t| (t[0] + t[1]) % 3).expect("valid builtin")
    }

    /// `Y = (X1 + X2 + Z) mod 2` with `Z ~ Bern(q)`.
    pub fn mod2_adder(q: f64) -> Result<KMac> {
        let noise = Pmf::bernoulli(q)?;
        let rows = tuples(&[2, 2])
            .map(|t| {
                let clean = (t[0] + t[1]) % 2;
                flip(&noise, clean)
            })
            .collect();
        KMac::new(vec![2, 2], 2, rows)
    }

    /// `Y = X1 * X2 + Z mod 2` with `Z ~ Bern(q)`.
    pub fn multiplier(q: f64) -> Result<KMac> {
        let noise = Pmf::bernoulli(q)?;
        let rows = tuples(&[2, 2]).map(|t| flip(&noise, t[0] * t[1])).collect();
        KMac::new(vec![2, 2], 2, rows)
    }
}

fn flip(noise: &Pmf, clean: usize) -> Pmf {
    if clean == 0 {
        noise.clone()
    } else {
        Pmf::new(vec![noise.get(1), noise.get(0)]).expect("permuted pmf")
    }
}

/// Iterates over all tuples of the product alphabet in row-major order.
pub fn tuples(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut i| {
        let mut t = vec![0; sizes.len()];
        for (slot, &size) in t.iter_mut().zip(sizes).rev() {
            *slot = i % size;
            i /= size;
        }
        t
    })
}

/// A channel `W(y | x, s)` whose second input is a state. Rows are indexed
/// by `x * s_size + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateChannel {
    x_size: usize,
    s_size: usize,
    y_size: usize,
    rows: Vec<Pmf>,
}

impl StateChannel {
    pub fn new(x_size: usize, s_size: usize, rows: Vec<Pmf>) -> Result<Self> {
        if x_size == 0 || s_size == 0 || rows.len() != x_size * s_size {
            return Err(Error::DimensionMismatch(format!(
                "state channel {x_size}x{s_size} with {} rows",
                rows.len()
            )));
        }
        let y_size = rows[0].len();
        if rows.iter().any(|r| r.len() != y_size) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        Ok(Self {
            x_size,
            s_size,
            y_size,
            rows,
        })
    }

    /// A stateless channel (`|S| = 1`).
    pub fn from_dmc(w: &Dmc) -> StateChannel {
        StateChannel {
            x_size: w.in_size(),
            s_size: 1,
            y_size: w.out_size(),
            rows: w.rows().to_vec(),
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn row(&self, x: usize, s: usize) -> &Pmf {
        &self.rows[x * self.s_size + s]
    }

    /// `(p_S W)(y | x) = sum_s p_S(s) W(y | x, s)`.
    pub fn averaged(&self, p_s: &Pmf) -> Result<Dmc> {
        if p_s.len() != self.s_size {
            return Err(Error::DimensionMismatch(format!(
                "state pmf of size {} for {} states",
                p_s.len(),
                self.s_size
            )));
        }
        let rows = (0..self.x_size)
            .map(|x| {
                let mut out = vec![0.0; self.y_size];
                for s in 0..self.s_size {
                    let w = p_s.get(s);
                    for (o, v) in out.iter_mut().zip(self.row(x, s).probs()) {
                        *o += w * v;
                    }
                }
                Pmf::new(out)
            })
            .collect::<Result<_>>()?;
        Dmc::new(rows)
    }
}

/// Result of an injectivity test on a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    pub injective: bool,
    /// The closest pair of inputs and their distance, when not injective.
    pub witness: Option<(usize, usize, f64)>,
    pub min_row_distance: f64,
}

/// Tests whether distinct inputs produce output distributions whose
/// total-variation distance exceeds `tol`.
pub fn injectivity(dmc: &Dmc, tol: f64) -> Result<InjectivityReport> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for a in 0..dmc.in_size() {
        for b in a + 1..dmc.in_size() {
            let d = dmc.row(a).total_variation(dmc.row(b));
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((a, b, d));
            }
        }
    }
    let min_row_distance = best.map_or(f64::INFINITY, |(_, _, d)| d);
    let injective = min_row_distance > tol;
    Ok(InjectivityReport {
        injective,
        witness: if injective { None } else { best },
        min_row_distance,
    })
}

/// Per-sender cost function and cap. A `None` cap means unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct SenderCost {
    pub phi: Vec<f64>,
    pub cap: Option<f64>,
}

impl SenderCost {
    pub fn new(phi: Vec<f64>, cap: Option<f64>) -> Result<Self> {
        if phi.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::OutOfRange("costs must be finite and non-negative".into()));
        }
        if let Some(c) = cap {
            if !(c >= 0.0) {
                return Err(Error::OutOfRange(format!("cost cap {c} must be non-negative")));
            }
        }
        Ok(Self { phi, cap })
    }

    /// Hamming-weight cost `phi(x) = x`.
    pub fn hamming(size: usize, cap: Option<f64>) -> Self {
        Self {
            phi: (0..size).map(|x| x as f64).collect(),
            cap,
        }
    }

    pub fn free(size: usize) -> Self {
        Self {
            phi: vec![0.0; size],
            cap: None,
        }
    }

    /// Cheapest letter; ties broken towards the smallest index.
    pub fn min_cost_letter(&self) -> usize {
        let mut best = 0;
        for (x, &c) in self.phi.iter().enumerate() {
            if c < self.phi[best] {
                best = x;
            }
        }
        best
    }

    pub fn feasible(&self, p: &Pmf) -> bool {
        match self.cap {
            None => true,
            Some(cap) => p.expect(&self.phi) <= cap + 1e-12,
        }
    }
}

/// Cost functions and caps for all senders.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub senders: Vec<SenderCost>,
}

impl CostSpec {
    pub fn unconstrained(w: &KMac) -> Self {
        Self {
            senders: w.in_sizes().iter().map(|&s| SenderCost::free(s)).collect(),
        }
    }

    pub fn new(w: &KMac, senders: Vec<SenderCost>) -> Result<Self> {
        if senders.len() != w.k() {
            return Err(Error::DimensionMismatch(format!(
                "{} cost entries for {} senders",
                senders.len(),
                w.k()
            )));
        }
        for (k, (c, &size)) in senders.iter().zip(w.in_sizes()).enumerate() {
            if c.phi.len() != size {
                return Err(Error::DimensionMismatch(format!(
                    "cost vector of sender {k} has length {}, alphabet size {size}",
                    c.phi.len()
                )));
            }
        }
        Ok(Self { senders })
    }

    pub fn sender(&self, k: usize) -> &SenderCost {
        &self.senders[k]
    }
}

/// Mean per-letter cost of a word.
pub fn average_cost(word: &[usize], phi: &[f64]) -> Result<f64> {
    if word.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &x in word {
        total += phi.get(x).ok_or_else(|| {
            Error::IndexOutOfRange(format!("letter {x} with {} cost entries", phi.len()))
        })?;
    }
    Ok(total / word.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::empirical_type;
    use proptest::prelude::*;

    fn rows_of(d: &Dmc) -> Vec<Vec<f64>> {
        d.rows().iter().map(|r| r.probs().to_vec()).collect()
    }

    #[test]
    fn mod3_partial_channels() {
        let w = KMac::mod3_adder();
        assert_eq!(
            rows_of(&w.partial_channel(0, &[0]).unwrap()),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]
        );
        assert_eq!(
            rows_of(&w.partial_channel(0, &[1]).unwrap()),
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
        );
        assert_eq!(w.row(&[1, 1]).unwrap().probs(), &[0.0, 0.0, 1.0]);
        assert_eq!(w.row(&[0, 0]).unwrap().probs(), &[1.0, 0.0, 0.0]);
        assert_eq!(w.row(&[0, 1]).unwrap().probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn multiplier_and_adder_rows() {
        let m = KMac::multiplier(0.1).unwrap();
        assert_eq!(
            rows_of(&m.partial_channel(0, &[0]).unwrap()),
            vec![vec![0.9, 0.1], vec![0.9, 0.1]]
        );
        let m = KMac::multiplier(0.05).unwrap();
        assert_eq!(m.row(&[1, 0]).unwrap().probs(), &[0.95, 0.05]);
        assert_eq!(m.row(&[1, 1]).unwrap().probs(), &[0.05, 0.95]);
        assert_eq!(KMac::multiplier(0.0).unwrap().row(&[1, 1]).unwrap().probs(), &[0.0, 1.0]);

        let a = KMac::mod2_adder(0.05).unwrap();
        assert_eq!(a.row(&[0, 0]).unwrap().probs(), &[0.95, 0.05]);
        assert_eq!(a.row(&[0, 1]).unwrap().probs(), &[0.05, 0.95]);
        assert_eq!(KMac::mod2_adder(0.0).unwrap().row(&[1, 1]).unwrap().probs(), &[1.0, 0.0]);
        assert!(KMac::mod2_adder(1.2).is_err());
        assert!(KMac::multiplier(-0.1).is_err());
    }

    #[test]
    fn partial_channel_errors() {
        let w = KMac::mod3_adder();
        assert!(matches!(w.partial_channel(2, &[0]), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(w.partial_channel(0, &[2]), Err(Error::IndexOutOfRange(_))));
        assert!(w.partial_channel(0, &[0, 0]).is_err());
    }

    #[test]
    fn averaged_channels() {
        let m = KMac::multiplier(0.05).unwrap();
        let v = m.averaged_partial_channel(0, &Pmf::uniform(2).unwrap()).unwrap();
        assert!((v.prob(0, 0) - 0.95).abs() < 1e-15);
        assert!((v.prob(0, 1) - 0.05).abs() < 1e-15);
        assert!((v.prob(1, 0) - 0.5).abs() < 1e-15);

        // Point mass reproduces the partial channel exactly.
        for s in 0..2 {
            let avg = m
                .averaged_partial_channel(1, &Pmf::point_mass(2, s).unwrap())
                .unwrap();
            assert_eq!(avg, m.partial_channel(1, &[s]).unwrap());
        }

        // Mod-2 adder with p_X2 = (a, 1 - a): hand mixture of the two matrices.
        let q = 0.1;
        let w = KMac::mod2_adder(q).unwrap();
        for a in [0.0, 0.3, 0.5, 0.8] {
            let v = w
                .averaged_partial_channel(0, &Pmf::new(vec![a, 1.0 - a]).unwrap())
                .unwrap();
            let expect0 = a * (1.0 - q) + (1.0 - a) * q;
            assert!((v.prob(0, 0) - expect0).abs() < 1e-15);
            assert!((v.prob(1, 0) - (1.0 - expect0)).abs() < 1e-15);
            let distinct = injectivity(&v, INJECTIVITY_TOL).unwrap().injective;
            assert_eq!(distinct, a != 0.5);
        }
        assert!(m.averaged_partial_channel(0, &Pmf::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn injectivity_examples() {
        let m = KMac::multiplier(0.1).unwrap();
        let r = injectivity(&m.partial_channel(0, &[0]).unwrap(), INJECTIVITY_TOL).unwrap();
        assert!(!r.injective);
        assert_eq!(r.witness, Some((0, 1, 0.0)));
        assert_eq!(r.min_row_distance, 0.0);

        let r = injectivity(&KMac::mod3_adder().partial_channel(0, &[0]).unwrap(), INJECTIVITY_TOL)
            .unwrap();
        assert!(r.injective && r.witness.is_none());

        let v = KMac::multiplier(0.05)
            .unwrap()
            .averaged_partial_channel(0, &Pmf::uniform(2).unwrap())
            .unwrap();
        assert!(injectivity(&v, INJECTIVITY_TOL).unwrap().injective);

        assert!(injectivity(&v, 0.0).is_err());
    }

    #[test]
    fn mod3_uniform_mixture_rows_stay_distinct() {
        let v = KMac::mod3_adder()
            .averaged_partial_channel(0, &Pmf::uniform(2).unwrap())
            .unwrap();
        assert_eq!(rows_of(&v), vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]]);
        let r = injectivity(&v, INJECTIVITY_TOL).unwrap();
        assert!(r.injective);
        assert!((r.min_row_distance - 0.5).abs() < 1e-15);
    }

    #[test]
    fn builtin_partial_channels_injectivity() {
        for q in [0.0, 0.05, 0.1, 0.3] {
            for w in [KMac::mod3_adder(), KMac::mod2_adder(q).unwrap()] {
                for sender in 0..2 {
                    for s in 0..2 {
                        let d = w.partial_channel(sender, &[s]).unwrap();
                        assert!(injectivity(&d, INJECTIVITY_TOL).unwrap().injective);
                    }
                }
            }
            let m = KMac::multiplier(q).unwrap();
            for sender in 0..2 {
                let d = m.partial_channel(sender, &[0]).unwrap();
                assert!(!injectivity(&d, INJECTIVITY_TOL).unwrap().injective);
            }
        }
    }

    #[test]
    fn average_cost_examples() {
        assert_eq!(average_cost(&[0, 0, 0, 0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(average_cost(&[0, 1, 0, 1], &[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(average_cost(&[0, 1, 1, 1], &[2.0, 4.0]).unwrap(), 3.5);
        assert!(average_cost(&[2], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn state_channel_layout() {
        let w = KMac::multiplier(0.05).unwrap();
        let sc = w.state_channel(1).unwrap();
        // Sender 1 is X2; the state is X1.
        assert_eq!(sc.row(1, 1).probs(), w.row(&[1, 1]).unwrap().probs());
        assert_eq!(sc.row(0, 1).probs(), w.row(&[1, 0]).unwrap().probs());
    }

    proptest! {
        #[test]
        fn cost_matches_type_expectation(word in prop::collection::vec(0usize..3, 1..40),
                                         phi in prop::collection::vec(0.0f64..10.0, 3)) {
            let t = empirical_type(&word, 3).unwrap();
            let p = t.as_pmf();
            prop_assert!((average_cost(&word, &phi).unwrap() - p.expect(&phi)).abs() < 1e-9);
        }

        #[test]
        fn injectivity_symmetric_and_monotone(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 2..5),
                                             t1 in 1e-9f64..0.5, t2 in 1e-9f64..0.5) {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            }).collect();
            let d = Dmc::from_rows(rows.clone()).unwrap();
            let mut rev = rows.clone();
            rev.reverse();
            let dr = Dmc::from_rows(rev).unwrap();
            let a = injectivity(&d, t1).unwrap();
            let b = injectivity(&dr, t1).unwrap();
            prop_assert_eq!(a.injective, b.injective);
            prop_assert!((a.min_row_distance - b.min_row_distance).abs() < 1e-15);
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            if !injectivity(&d, lo).unwrap().injective {
                prop_assert!(!injectivity(&d, hi).unwrap().injective);
            }
        }
    }
}
