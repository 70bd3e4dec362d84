//! Average-error identification by time division and message aliasing.

use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;

use super::eval::{chunked, decode_word, output_space, wilson_half_width};
use super::DiCode;
use crate::channel::{CostSpec, KMac};
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::rng::{substream, tag};

const MC_CHUNK: u64 = 4096;
const CHANNEL_TOL: f64 = 1e-12;

/// A K-sender code for the average error criterion. Sender `k` sends the
/// base codeword of `m mod M_k` in its own slice and its cheapest letter
/// everywhere else.
#[derive(Debug, Clone)]
pub struct DiaCode {
    base: Vec<DiCode>,
    m_big: Vec<u64>,
    slots: Vec<Range<usize>>,
    idle: Vec<usize>,
    n: usize,
}

/// Errors of one sender under uniformly drawn messages.
#[derive(Debug, Clone, PartialEq)]
pub struct DiaSenderErrors {
    pub missed_id: f64,
    pub missed_half_width: f64,
    /// Average of `e(m' | m)` over uniform pairs `m != m'`.
    pub false_id: f64,
    pub false_half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiaErrorReport {
    pub senders: Vec<DiaSenderErrors>,
    pub trials: u64,
    pub seed: u64,
}

impl DiaErrorReport {
    /// Sum of the per-sender average false identification errors, the
    /// error of a tested tuple differing from the sent one in every sender.
    pub fn total_false(&self) -> f64 {
        self.senders.iter().map(|s| s.false_id).sum()
    }
}

/// Builds the time-division code. Every base code must have blocklength
/// `floor(n / K)`, at least two messages and a single channel state.
pub fn dia_build(base: Vec<DiCode>, m_big: Vec<u64>, n: usize, costs: &CostSpec) -> Result<DiaCode> {
    let k = base.len();
    if k == 0 || m_big.len() != k || costs.senders.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{k} base codes, {} message counts, {} cost entries",
            m_big.len(),
            costs.senders.len()
        )));
    }
    let len = n / k;
    let mut slots = Vec::with_capacity(k);
    let mut idle = Vec::with_capacity(k);
    for (i, code) in base.iter().enumerate() {
        if code.n() != len {
            return Err(Error::DimensionMismatch(format!(
                "base code {i} has blocklength {}, slice length is {len}",
                code.n()
            )));
        }
        if code.m() < 2 {
            return Err(Error::Construction(format!("base code {i} has rate zero")));
        }
        if code.channel().s_size() != 1 {
            return Err(Error::Construction(format!("base code {i} must be stateless")));
        }
        if m_big[i] == 0 {
            return Err(Error::OutOfRange(format!("sender {i} needs at least one message")));
        }
        let cost = costs.sender(i);
        if cost.phi.len() != code.channel().x_size() {
            return Err(Error::DimensionMismatch(format!("cost vector of sender {i} has the wrong length")));
        }
        let letter = cost.min_cost_letter();
        if let Some(cap) = cost.cap {
            let word_cost = code.p().as_pmf().expect(&cost.phi);
            let total = (len as f64 * word_cost + (n - len) as f64 * cost.phi[letter]) / n as f64;
            if total > cap + 1e-12 {
                return Err(Error::Construction(format!(
                    "sender {i} spends {total} per letter, above the cap {cap}"
                )));
            }
        }
        slots.push(i * len..(i + 1) * len);
        idle.push(letter);
    }
    Ok(DiaCode {
        base,
        m_big,
        slots,
        idle,
        n,
    })
}

impl DiaCode {
    pub fn k(&self) -> usize {
        self.base.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self, k: usize) -> &DiCode {
        &self.base[k]
    }

    pub fn m_big(&self) -> &[u64] {
        &self.m_big
    }

    pub fn slot(&self, k: usize) -> Range<usize> {
        self.slots[k].clone()
    }

    pub fn idle_letter(&self, k: usize) -> usize {
        self.idle[k]
    }

    /// Full-length input word of sender `k` for message `m`.
    pub fn encode(&self, k: usize, m: u64) -> Result<Vec<usize>> {
        if k >= self.k() || m >= self.m_big[k] {
            return Err(Error::IndexOutOfRange(format!("message {m} of sender {k}")));
        }
        let mut word = vec![self.idle[k]; self.n];
        let base = &self.base[k];
        let idx = (m % base.m() as u64) as usize;
        word[self.slots[k].clone()].copy_from_slice(base.codeword(idx));
        Ok(word)
    }

    /// Identification test of sender `k` for message `m_prime`.
    pub fn identify(&self, k: usize, m_prime: u64, y: &[usize]) -> Result<bool> {
        if k >= self.k() || m_prime >= self.m_big[k] {
            return Err(Error::IndexOutOfRange(format!("message {m_prime} of sender {k}")));
        }
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!("output word of length {}", y.len())));
        }
        let base = &self.base[k];
        base.identify((m_prime % base.m() as u64) as usize, &y[self.slots[k].clone()])
    }

    fn accepts(&self, k: usize, m_prime: u64, y: &[usize]) -> bool {
        let base = &self.base[k];
        base.accepts((m_prime % base.m() as u64) as usize, &y[self.slots[k].clone()])
    }

    /// Each base code must be built for the partial channel seen in its
    /// slice, where the other senders emit their idle letters.
    pub fn check_channel(&self, w: &KMac) -> Result<()> {
        if w.k() != self.k() {
            return Err(Error::DimensionMismatch(format!("{}-sender MAC for {} codes", w.k(), self.k())));
        }
        for k in 0..self.k() {
            let others: Vec<usize> = (0..self.k()).filter(|&j| j != k).map(|j| self.idle[j]).collect();
            let partial = w.partial_channel(k, &others)?;
            let sc = self.base[k].channel();
            let same = partial.in_size() == sc.x_size()
                && partial.out_size() == sc.y_size()
                && (0..sc.x_size()).all(|x| {
                    partial
                        .row(x)
                        .probs()
                        .iter()
                        .zip(sc.row(x, 0).probs())
                        .all(|(a, b)| (a - b).abs() <= CHANNEL_TOL)
                });
            if !same {
                return Err(Error::DimensionMismatch(format!(
                    "base code {k} was not built for the partial channel at the idle letters"
                )));
            }
        }
        Ok(())
    }

    fn output_rows<'a>(&self, w: &'a KMac, inputs: &[Vec<usize>]) -> Vec<&'a Pmf> {
        let mut tuple = vec![0; self.k()];
        (0..self.n)
            .map(|t| {
                for (slot, word) in tuple.iter_mut().zip(inputs) {
                    *slot = word[t];
                }
                w.row_unchecked(&tuple)
            })
            .collect()
    }
}

fn uniform_below<R: Rng>(rng: &mut R, bound: u64) -> u64 {
    rng.gen_range(0..bound)
}

/// Monte Carlo estimate of the missed identification error and the
/// average false identification error of every sender. Each trial draws a
/// uniform message tuple, a competing tuple differing in every sender, and
/// one channel output.
pub fn dia_errors(dia: &DiaCode, w: &KMac, trials: u64, seed: u64) -> Result<DiaErrorReport> {
    dia.check_channel(w)?;
    if trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()));
    }
    if let Some(k) = dia.m_big.iter().position(|&m| m < 2) {
        return Err(Error::OutOfRange(format!("sender {k} needs two messages for false identification")));
    }
    let k = dia.k();
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, tag::MONTE_CARLO + c);
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut missed = vec![0u64; k];
            let mut false_id = vec![0u64; k];
            let mut y = vec![0; dia.n];
            for _ in 0..count {
                let sent: Vec<u64> = dia.m_big.iter().map(|&m| uniform_below(&mut rng, m)).collect();
                let tested: Vec<u64> = sent
                    .iter()
                    .zip(&dia.m_big)
                    .map(|(&m, &big)| (m + 1 + uniform_below(&mut rng, big - 1)) % big)
                    .collect();
                let inputs: Vec<Vec<usize>> = (0..k)
                    .map(|j| dia.encode(j, sent[j]).expect("message in range"))
                    .collect();
                let rows = dia.output_rows(w, &inputs);
                for (slot, row) in y.iter_mut().zip(&rows) {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    *slot = row.len() - 1;
                    for (b, &p) in row.probs().iter().enumerate() {
                        acc += p;
                        if u < acc {
                            *slot = b;
                            break;
                        }
                    }
                }
                for j in 0..k {
                    if !dia.accepts(j, sent[j], &y) {
                        missed[j] += 1;
                    }
                    if dia.accepts(j, tested[j], &y) {
                        false_id[j] += 1;
                    }
                }
            }
            (missed, false_id)
        })
        .reduce(
            || (vec![0; k], vec![0; k]),
            |mut a, b| {
                for j in 0..k {
                    a.0[j] += b.0[j];
                    a.1[j] += b.1[j];
                }
                a
            },
        );
    let senders = (0..k)
        .map(|j| DiaSenderErrors {
            missed_id: counts.0[j] as f64 / trials as f64,
            missed_half_width: wilson_half_width(counts.0[j], trials),
            false_id: counts.1[j] as f64 / trials as f64,
            false_half_width: wilson_half_width(counts.1[j], trials),
        })
        .collect();
    Ok(DiaErrorReport { senders, trials, seed })
}

/// Exact worst missed identification error of every sender, enumerating
/// full-length outputs of the MAC. The other senders' messages are held at
/// zero, which does not matter since they are idle in the tested slice.
pub fn dia_missed_exact(dia: &DiaCode, w: &KMac) -> Result<Vec<f64>> {
    dia.check_channel(w)?;
    let ny = w.out_size();
    let total = output_space(ny, dia.n)?;
    let k = dia.k();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut worst: f64 = 0.0;
        for m in 0..dia.base[j].m() as u64 {
            let inputs: Vec<Vec<usize>> = (0..k)
                .map(|i| dia.encode(i, if i == j { m } else { 0 }))
                .collect::<Result<_>>()?;
            let rows = dia.output_rows(w, &inputs);
            let parts = chunked(total, |range| {
                let mut y = vec![0; dia.n];
                let mut missed = 0.0;
                for idx in range {
                    decode_word(idx, ny, &mut y);
                    let p: f64 = rows.iter().zip(&y).map(|(r, &b)| r.get(b)).product();
                    if p > 0.0 && !dia.accepts(j, m, &y) {
                        missed += p;
                    }
                }
                missed
            });
            worst = worst.max(parts.iter().sum::<f64>().clamp(0.0, 1.0));
        }
        out.push(worst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{build_code, code_errors_exact, DecisionParams};
    use super::*;
    use crate::channel::{SenderCost, StateChannel};
    use crate::types::TypeVector;

    fn adder_dia(q: f64, n: usize, m: usize, m_big: u64, params: DecisionParams) -> (KMac, DiaCode) {
        let w = KMac::mod2_adder(q).unwrap();
        let costs = CostSpec::new(&w, vec![SenderCost::hamming(2, None), SenderCost::hamming(2, None)]).unwrap();
        let len = n / 2;
        let p = TypeVector::new(vec![len / 2, len - len / 2]).unwrap();
        let base: Vec<DiCode> = (0..2)
            .map(|k| {
                let partial = w.partial_channel(k, &[0]).unwrap();
                let sc = StateChannel::from_dmc(&partial);
                build_code(sc, p.clone(), vec![TypeVector::new(vec![len]).unwrap()], m, params, 11 + k as u64, 32).unwrap()
            })
            .collect();
        let dia = dia_build(base, vec![m_big, m_big], n, &costs).unwrap();
        (w, dia)
    }

    #[test]
    fn slices_and_idle_letters() {
        let (w, dia) = adder_dia(0.05, 12, 4, 16, DecisionParams::default());
        assert_eq!(dia.slot(0), 0..6);
        assert_eq!(dia.slot(1), 6..12);
        assert_eq!(dia.idle_letter(0), 0);
        assert_eq!(dia.idle_letter(1), 0);
        let word = dia.encode(1, 5).unwrap();
        assert!(word[..6].iter().all(|&x| x == 0));
        assert_eq!(&word[6..], dia.base(1).codeword(1));
        assert!(dia.check_channel(&w).is_ok());
        assert!(dia.check_channel(&KMac::multiplier(0.05).unwrap()).is_err());
    }

    #[test]
    fn single_sender_matches_base() {
        let sc = StateChannel::from_dmc(&crate::prob::Dmc::bsc(0.1).unwrap());
        let p = TypeVector::new(vec![2, 2]).unwrap();
        let code = build_code(sc, p, vec![TypeVector::new(vec![4]).unwrap()], 3, DecisionParams::default(), 1, 32).unwrap();
        let w = KMac::new(vec![2], 2, crate::prob::Dmc::bsc(0.1).unwrap().rows().to_vec()).unwrap();
        let dia = dia_build(vec![code.clone()], vec![3], 4, &CostSpec::unconstrained(&w)).unwrap();
        for m in 0..3 {
            assert_eq!(dia.encode(0, m).unwrap(), code.codeword(m as usize));
        }
        let exact = code_errors_exact(&code, &[0; 4]).unwrap();
        let missed = dia_missed_exact(&dia, &w).unwrap();
        assert!((missed[0] - exact.max_missed).abs() < 1e-12);
    }

    #[test]
    fn build_rejects_zero_rate_and_bad_cost() {
        let w = KMac::mod2_adder(0.05).unwrap();
        let sc = StateChannel::from_dmc(&w.partial_channel(0, &[0]).unwrap());
        let p = TypeVector::new(vec![2, 2]).unwrap();
        let st = vec![TypeVector::new(vec![4]).unwrap()];
        let one = build_code(sc.clone(), p.clone(), st.clone(), 1, DecisionParams::default(), 1, 32).unwrap();
        let two = build_code(sc, p, st, 2, DecisionParams::default(), 1, 32).unwrap();
        let free = CostSpec::unconstrained(&w);
        assert!(dia_build(vec![one, two.clone()], vec![4, 4], 8, &free).is_err());
        let tight = CostSpec::new(&w, vec![SenderCost::hamming(2, Some(0.1)), SenderCost::hamming(2, None)]).unwrap();
        assert!(matches!(
            dia_build(vec![two.clone(), two.clone()], vec![4, 4], 8, &tight),
            Err(Error::Construction(_))
        ));
        let loose = CostSpec::new(&w, vec![SenderCost::hamming(2, Some(0.25)), SenderCost::hamming(2, None)]).unwrap();
        assert!(dia_build(vec![two.clone(), two], vec![4, 4], 8, &loose).is_ok());
    }

    #[test]
    fn heavy_aliasing_matches_collision_probability() {
        // Noiseless slices: a base code accepts exactly its own codeword, so
        // a false acceptance happens iff the two messages alias.
        let m = 4u64;
        let (w, dia) = adder_dia(0.0, 8, m as usize, m * m, DecisionParams::default());
        let r = dia_errors(&dia, &w, 40_000, 3).unwrap();
        let collision = (m - 1) as f64 / (m * m - 1) as f64;
        for s in &r.senders {
            assert_eq!(s.missed_id, 0.0);
            assert!((s.false_id - collision).abs() <= 4.0 * s.false_half_width, "{s:?}");
        }
        assert_eq!(r, dia_errors(&dia, &w, 40_000, 3).unwrap());
    }

    #[test]
    fn aliasing_keeps_missed_error() {
        let params = DecisionParams { eps: 1.0, delta: 0.05 };
        let (w, dia) = adder_dia(0.05, 8, 4, 16, params);
        let missed = dia_missed_exact(&dia, &w).unwrap();
        for k in 0..2 {
            let base = code_errors_exact(dia.base(k), &[0; 4]).unwrap();
            assert!(missed[k] <= base.max_missed + 1e-12);
        }
    }
}
