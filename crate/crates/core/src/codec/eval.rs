//! Exact and Monte Carlo evaluation of identification errors.

use rand::Rng;
use rayon::prelude::*;

use super::DiCode;
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::rng::{substream, tag};
use crate::types::{sample_type_class, TypeVector};

/// Largest output space enumerated exactly.
pub const EXACT_BUDGET: u64 = 2_000_000;

const MC_CHUNK: u64 = 4096;
const WILSON_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Missed and false identification probabilities for one message pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `e(m | m)`: the sent message is rejected.
    pub missed_id: f64,
    /// `e(m' | m)`: a different tested message is accepted.
    pub false_id: f64,
    pub method: EvalMethod,
    pub missed_half_width: f64,
    pub false_half_width: f64,
}

/// A state word of type `t`: the sorted canonical word, or a uniformly
/// drawn member of the type class when a seed is given.
pub fn state_word(t: &TypeVector, random_seed: Option<u64>) -> Vec<usize> {
    match random_seed {
        None => t.sorted_word(),
        Some(seed) => sample_type_class(t, &mut substream(seed, tag::STATE)),
    }
}

/// Wilson 95% half-width for `successes` out of `trials`.
pub fn wilson_half_width(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    WILSON_Z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

pub(crate) fn output_space(y_size: usize, n: usize) -> Result<u64> {
    let total = (y_size as f64).powi(n as i32);
    if total > EXACT_BUDGET as f64 {
        return Err(Error::BudgetExceeded(format!(
            "{y_size}^{n} output words exceed the exact enumeration budget of {EXACT_BUDGET}; use Monte Carlo"
        )));
    }
    Ok((y_size as u64).pow(n as u32))
}

pub(crate) fn decode_word(mut idx: u64, y_size: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % y_size as u64) as usize;
        idx /= y_size as u64;
    }
}

/// Splits `0..total` into contiguous ranges, processes them in parallel and
/// returns the partial results in range order.
pub(crate) fn chunked<T: Send>(total: u64, f: impl Fn(std::ops::Range<u64>) -> T + Sync) -> Vec<T> {
    let chunk = (total / 256).max(256);
    let count = total.div_ceil(chunk);
    (0..count)
        .into_par_iter()
        .map(|c| f(c * chunk..((c + 1) * chunk).min(total)))
        .collect()
}

impl DiCode {
    fn check_state(&self, s: &[usize]) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "state word of length {}, blocklength {}",
                s.len(),
                self.n()
            )));
        }
        if s.iter().any(|&v| v >= self.channel().s_size()) {
            return Err(Error::IndexOutOfRange("state letter".into()));
        }
        Ok(())
    }

    /// Row `W(. | x_m, s)` at every position.
    fn output_rows<'a>(&'a self, m: usize, s: &[usize]) -> Vec<&'a Pmf> {
        self.codeword(m)
            .iter()
            .zip(s)
            .map(|(&x, &st)| self.channel().row(x, st))
            .collect()
    }
}

fn word_prob(rows: &[&Pmf], y: &[usize]) -> f64 {
    rows.iter().zip(y).map(|(r, &b)| r.get(b)).product()
}

fn sample_word<R: Rng>(rows: &[&Pmf], rng: &mut R, out: &mut [usize]) {
    for (slot, row) in out.iter_mut().zip(rows) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let last = row.len() - 1;
        *slot = last;
        for (b, &p) in row.probs().iter().enumerate() {
            acc += p;
            if u < acc {
                *slot = b;
                break;
            }
        }
    }
}

fn check_pair(code: &DiCode, m: usize, m_prime: usize) -> Result<()> {
    if m >= code.m() || m_prime >= code.m() {
        return Err(Error::IndexOutOfRange(format!(
            "message pair ({m}, {m_prime}) for {} messages",
            code.m()
        )));
    }
    Ok(())
}

/// Exact `e(m | m)` and `e(m' | m)` under state word `s`, by enumerating
/// every output word.
pub fn exact_errors(code: &DiCode, s: &[usize], m: usize, m_prime: usize) -> Result<ErrorReport> {
    check_pair(code, m, m_prime)?;
    code.check_state(s)?;
    let n = code.n();
    let ny = code.channel().y_size();
    let total = output_space(ny, n)?;
    let rows = code.output_rows(m, s);
    let parts = chunked(total, |range| {
        let mut y = vec![0; n];
        let (mut missed, mut false_id) = (0.0, 0.0);
        for idx in range {
            decode_word(idx, ny, &mut y);
            let p = word_prob(&rows, &y);
            if p == 0.0 {
                continue;
            }
            if !code.accepts(m, &y) {
                missed += p;
            }
            if m_prime != m && code.accepts(m_prime, &y) {
                false_id += p;
            }
        }
        (missed, false_id)
    });
    let (missed, false_id) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ErrorReport {
        missed_id: missed.clamp(0.0, 1.0),
        false_id: false_id.clamp(0.0, 1.0),
        method: EvalMethod::Exact,
        missed_half_width: 0.0,
        false_half_width: 0.0,
    })
}

/// Monte Carlo estimate of the same quantities as [`exact_errors`].
pub fn monte_carlo_errors(
    code: &DiCode,
    s: &[usize],
    m: usize,
    m_prime: usize,
    trials: u64,
    seed: u64,
) -> Result<ErrorReport> {
    check_pair(code, m, m_prime)?;
    code.check_state(s)?;
    if trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()));
    }
    let n = code.n();
    let rows = code.output_rows(m, s);
    let chunks = trials.div_ceil(MC_CHUNK);
    let (missed, false_id) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, tag::MONTE_CARLO + c);
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut y = vec![0; n];
            let (mut missed, mut false_id) = (0u64, 0u64);
            for _ in 0..count {
                sample_word(&rows, &mut rng, &mut y);
                if !code.accepts(m, &y) {
                    missed += 1;
                }
                if m_prime != m && code.accepts(m_prime, &y) {
                    false_id += 1;
                }
            }
            (missed, false_id)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ErrorReport {
        missed_id: missed as f64 / trials as f64,
        false_id: false_id as f64 / trials as f64,
        method: EvalMethod::MonteCarlo { trials, seed },
        missed_half_width: wilson_half_width(missed, trials),
        false_half_width: wilson_half_width(false_id, trials),
    })
}

/// Errors of a whole code under one state word.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeErrorSummary {
    /// `max_m e(m | m)` and a maximizing message.
    pub max_missed: f64,
    pub worst_missed_message: usize,
    /// `max_{m != m'} e(m' | m)` and a maximizing `(m, m')`.
    pub worst_false: f64,
    pub worst_false_pair: Option<(usize, usize)>,
    /// `A[m][m'] = P(g(m', Y) = 1 | m sent)`.
    pub acceptance: Vec<Vec<f64>>,
}

impl CodeErrorSummary {
    /// Worst missed plus worst false identification error.
    pub fn total(&self) -> f64 {
        self.max_missed + self.worst_false
    }
}

/// Exact acceptance matrix of a code.
pub fn code_errors_exact(code: &DiCode, s: &[usize]) -> Result<CodeErrorSummary> {
    code.check_state(s)?;
    let n = code.n();
    let mm = code.m();
    let ny = code.channel().y_size();
    let total = output_space(ny, n)?;
    let rows: Vec<Vec<&Pmf>> = (0..mm).map(|m| code.output_rows(m, s)).collect();
    let parts = chunked(total, |range| {
        let mut acc = vec![0.0; mm * mm];
        let mut y = vec![0; n];
        let mut probs = vec![0.0; mm];
        for idx in range {
            decode_word(idx, ny, &mut y);
            let mut any = false;
            for (m, r) in rows.iter().enumerate() {
                probs[m] = word_prob(r, &y);
                any |= probs[m] > 0.0;
            }
            if !any {
                continue;
            }
            for mp in 0..mm {
                if code.accepts(mp, &y) {
                    for m in 0..mm {
                        acc[m * mm + mp] += probs[m];
                    }
                }
            }
        }
        acc
    });
    let mut acc = vec![0.0; mm * mm];
    for part in &parts {
        for (a, b) in acc.iter_mut().zip(part) {
            *a += b;
        }
    }
    let acceptance: Vec<Vec<f64>> = (0..mm).map(|m| acc[m * mm..(m + 1) * mm].to_vec()).collect();
    let mut summary = CodeErrorSummary {
        max_missed: 0.0,
        worst_missed_message: 0,
        worst_false: 0.0,
        worst_false_pair: None,
        acceptance,
    };
    for m in 0..mm {
        let missed = (1.0 - summary.acceptance[m][m]).clamp(0.0, 1.0);
        if missed > summary.max_missed {
            summary.max_missed = missed;
            summary.worst_missed_message = m;
        }
        for mp in 0..mm {
            let f = summary.acceptance[m][mp].clamp(0.0, 1.0);
            if mp != m && (summary.worst_false_pair.is_none() || f > summary.worst_false) {
                summary.worst_false = f;
                summary.worst_false_pair = Some((m, mp));
            }
        }
    }
    Ok(summary)
}

/// The converse identity for a repeated codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct DuplicateReport {
    pub m: usize,
    pub m_prime: usize,
    /// `e(m' | m)`.
    pub false_id: f64,
    /// `e(m' | m')`.
    pub missed_id: f64,
}

impl DuplicateReport {
    pub fn sum(&self) -> f64 {
        self.false_id + self.missed_id
    }

    pub fn max(&self) -> f64 {
        self.false_id.max(self.missed_id)
    }
}

/// For a pair of messages sharing a codeword, `e(m' | m) + e(m' | m') = 1`.
pub fn duplicate_converse_demo(code: &DiCode, s: &[usize]) -> Result<DuplicateReport> {
    let (m, m_prime) = code
        .duplicate_pair()
        .ok_or_else(|| Error::InvalidCode("the code has no repeated codeword".into()))?;
    let sent_m = exact_errors(code, s, m, m_prime)?;
    let sent_mp = exact_errors(code, s, m_prime, m_prime)?;
    Ok(DuplicateReport {
        m,
        m_prime,
        false_id: sent_m.false_id,
        missed_id: sent_mp.missed_id,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_code, DecisionParams};
    use super::*;
    use crate::channel::{KMac, StateChannel};
    use crate::prob::Dmc;

    #[test]
    fn noiseless_adder_never_misses() {
        let mac = KMac::mod2_adder(0.0).unwrap();
        let w = mac.state_channel(0).unwrap();
        let p = TypeVector::new(vec![3, 3]).unwrap();
        let st = TypeVector::new(vec![6, 0]).unwrap();
        let code = build_code(w, p, vec![st.clone()], 6, DecisionParams::default(), 9, 32).unwrap();
        let s = st.sorted_word();
        let r = exact_errors(&code, &s, 0, 1).unwrap();
        assert_eq!(r.missed_id, 0.0);
        assert_eq!(r.false_id, 0.0);
        let summary = code_errors_exact(&code, &s).unwrap();
        assert_eq!(summary.total(), 0.0);
    }

    #[test]
    fn symmetric_duplicate_splits_evenly() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.5).unwrap());
        let p = TypeVector::new(vec![2, 0]).unwrap();
        let code = DiCode::with_duplicates(
            vec![vec![0, 0], vec![0, 0]],
            p,
            vec![TypeVector::new(vec![2]).unwrap()],
            w,
            DecisionParams { eps: 1.0, delta: 0.05 },
        )
        .unwrap();
        let r = duplicate_converse_demo(&code, &[0, 0]).unwrap();
        assert!((r.false_id - 0.5).abs() < 1e-15);
        assert!((r.missed_id - 0.5).abs() < 1e-15);
        assert!((r.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn no_duplicate_is_an_error() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.1).unwrap());
        let p = TypeVector::new(vec![1, 1]).unwrap();
        let code = DiCode::new(
            vec![vec![0, 1], vec![1, 0]],
            p,
            vec![TypeVector::new(vec![2]).unwrap()],
            w,
            DecisionParams::default(),
        )
        .unwrap();
        assert!(duplicate_converse_demo(&code, &[0, 0]).is_err());
    }

    #[test]
    fn wilson_at_zero_successes() {
        let hw = wilson_half_width(0, 1000);
        let z2 = 1.96f64 * 1.96;
        let expected = 1.96 / (1.0 + z2 / 1000.0) * (z2 / 4e6).sqrt();
        assert!((hw - expected).abs() < 1e-15);
        assert!(hw > 0.0 && hw < 0.002);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_close() {
        let mac = KMac::mod2_adder(0.1).unwrap();
        let w = mac.state_channel(0).unwrap();
        let p = TypeVector::new(vec![3, 3]).unwrap();
        let st = TypeVector::new(vec![4, 2]).unwrap();
        let code = build_code(w, p, vec![st.clone()], 4, DecisionParams { eps: 0.5, delta: 0.05 }, 2, 32).unwrap();
        let s = st.sorted_word();
        let a = monte_carlo_errors(&code, &s, 0, 1, 20_000, 7).unwrap();
        let b = monte_carlo_errors(&code, &s, 0, 1, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let e = exact_errors(&code, &s, 0, 1).unwrap();
        assert!((a.missed_id - e.missed_id).abs() <= 4.0 * a.missed_half_width);
        assert!((a.false_id - e.false_id).abs() <= 4.0 * a.false_half_width);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(output_space(2, 20).is_ok());
        assert!(matches!(output_space(2, 21), Err(Error::BudgetExceeded(_))));
    }
}
