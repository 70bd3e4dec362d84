//! Two-sender DI codes used simultaneously over a MAC, each receiver test
//! treating the other sender's codeword as the channel state.

use rand::Rng;
use rayon::prelude::*;

use super::eval::{chunked, decode_word, output_space, wilson_half_width};
use super::{build_code, DecisionParams, DiCode, EvalMethod};
use crate::channel::KMac;
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::rng::{substream, tag};
use crate::types::TypeVector;

const MC_CHUNK: u64 = 4096;

#[derive(Debug, Clone)]
pub struct MacCode {
    codes: [DiCode; 2],
}

/// Per-sender and joint error probabilities for a sent pair `m` and a
/// tested pair `m'`. Sender `k` errs when its test disagrees with
/// `m'_k == m_k`; the joint event is that some sender errs.
#[derive(Debug, Clone, PartialEq)]
pub struct MacErrorReport {
    pub per_sender: [f64; 2],
    pub joint: f64,
    pub method: EvalMethod,
    pub per_sender_half_width: [f64; 2],
    pub joint_half_width: f64,
}

impl MacErrorReport {
    /// `e <= e_1 + e_2`, up to the Monte Carlo half-widths.
    pub fn union_bound_holds(&self) -> bool {
        let slack = 1e-12 + self.joint_half_width + self.per_sender_half_width.iter().sum::<f64>();
        self.joint <= self.per_sender.iter().sum::<f64>() + slack
    }
}

fn seed_for_sender(seed: u64, k: usize) -> u64 {
    seed ^ ((k as u64 + 1) << 56)
}

impl MacCode {
    /// Wraps two codes whose channels are the state channels of `w`, with
    /// the other sender's codeword type as the only state type.
    pub fn new(w: &KMac, codes: [DiCode; 2]) -> Result<Self> {
        if w.k() != 2 {
            return Err(Error::DimensionMismatch(format!("joint mode needs K = 2, got {}", w.k())));
        }
        if codes[0].n() != codes[1].n() {
            return Err(Error::DimensionMismatch("codes of different blocklengths".into()));
        }
        for k in 0..2 {
            if codes[k].channel() != &w.state_channel(k)? {
                return Err(Error::DimensionMismatch(format!("code {k} was not built for the MAC")));
            }
            let other = codes[1 - k].p();
            if !codes[k].state_types().contains(other) {
                return Err(Error::InvalidCode(format!(
                    "code {k} does not cover the state type {:?} of the other sender",
                    other.counts()
                )));
            }
        }
        Ok(Self { codes })
    }

    pub fn build(
        w: &KMac,
        types: [TypeVector; 2],
        messages: [usize; 2],
        params: DecisionParams,
        seed: u64,
        max_attempts: usize,
    ) -> Result<Self> {
        if w.k() != 2 {
            return Err(Error::DimensionMismatch(format!("joint mode needs K = 2, got {}", w.k())));
        }
        let mut built = Vec::with_capacity(2);
        for k in 0..2 {
            built.push(build_code(
                w.state_channel(k)?,
                types[k].clone(),
                vec![types[1 - k].clone()],
                messages[k],
                params,
                seed_for_sender(seed, k),
                max_attempts,
            )?);
        }
        let second = built.pop().expect("two codes");
        let first = built.pop().expect("two codes");
        Self::new(w, [first, second])
    }

    pub fn code(&self, k: usize) -> &DiCode {
        &self.codes[k]
    }

    pub fn n(&self) -> usize {
        self.codes[0].n()
    }

    fn check_messages(&self, m: [usize; 2], m_prime: [usize; 2]) -> Result<()> {
        for k in 0..2 {
            if m[k] >= self.codes[k].m() || m_prime[k] >= self.codes[k].m() {
                return Err(Error::IndexOutOfRange(format!("message of sender {k}")));
            }
        }
        Ok(())
    }

    fn rows<'a>(&self, w: &'a KMac, m: [usize; 2]) -> Vec<&'a Pmf> {
        let (a, b) = (self.codes[0].codeword(m[0]), self.codes[1].codeword(m[1]));
        a.iter().zip(b).map(|(&x1, &x2)| w.row_unchecked(&[x1, x2])).collect()
    }

    fn wrong(&self, m: [usize; 2], m_prime: [usize; 2], y: &[usize]) -> [bool; 2] {
        [0, 1].map(|k| self.codes[k].accepts(m_prime[k], y) != (m_prime[k] == m[k]))
    }
}

/// Exact errors by enumerating every output word of the MAC.
pub fn mac_errors_exact(code: &MacCode, w: &KMac, m: [usize; 2], m_prime: [usize; 2]) -> Result<MacErrorReport> {
    code.check_messages(m, m_prime)?;
    let n = code.n();
    let ny = w.out_size();
    let total = output_space(ny, n)?;
    let rows = code.rows(w, m);
    let parts = chunked(total, |range| {
        let mut y = vec![0; n];
        let mut acc = [0.0; 3];
        for idx in range {
            decode_word(idx, ny, &mut y);
            let p: f64 = rows.iter().zip(&y).map(|(r, &b)| r.get(b)).product();
            if p == 0.0 {
                continue;
            }
            let wrong = code.wrong(m, m_prime, &y);
            for k in 0..2 {
                if wrong[k] {
                    acc[k] += p;
                }
            }
            if wrong[0] || wrong[1] {
                acc[2] += p;
            }
        }
        acc
    });
    let mut acc = [0.0; 3];
    for part in &parts {
        for i in 0..3 {
            acc[i] += part[i];
        }
    }
    Ok(MacErrorReport {
        per_sender: [acc[0].clamp(0.0, 1.0), acc[1].clamp(0.0, 1.0)],
        joint: acc[2].clamp(0.0, 1.0),
        method: EvalMethod::Exact,
        per_sender_half_width: [0.0; 2],
        joint_half_width: 0.0,
    })
}

pub fn mac_errors_monte_carlo(
    code: &MacCode,
    w: &KMac,
    m: [usize; 2],
    m_prime: [usize; 2],
    trials: u64,
    seed: u64,
) -> Result<MacErrorReport> {
    code.check_messages(m, m_prime)?;
    if trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()));
    }
    let n = code.n();
    let rows = code.rows(w, m);
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, tag::MONTE_CARLO + c);
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut y = vec![0; n];
            let mut acc = [0u64; 3];
            for _ in 0..count {
                for (slot, row) in y.iter_mut().zip(&rows) {
                    let u: f64 = rng.gen();
                    let mut cum = 0.0;
                    *slot = row.len() - 1;
                    for (b, &p) in row.probs().iter().enumerate() {
                        cum += p;
                        if u < cum {
                            *slot = b;
                            break;
                        }
                    }
                }
                let wrong = code.wrong(m, m_prime, &y);
                for k in 0..2 {
                    acc[k] += u64::from(wrong[k]);
                }
                acc[2] += u64::from(wrong[0] || wrong[1]);
            }
            acc
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let t = trials as f64;
    Ok(MacErrorReport {
        per_sender: [counts[0] as f64 / t, counts[1] as f64 / t],
        joint: counts[2] as f64 / t,
        method: EvalMethod::MonteCarlo { trials, seed },
        per_sender_half_width: [wilson_half_width(counts[0], trials), wilson_half_width(counts[1], trials)],
        joint_half_width: wilson_half_width(counts[2], trials),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_adder_pair() {
        let w = KMac::mod2_adder(0.0).unwrap();
        let p = TypeVector::new(vec![2, 2]).unwrap();
        let code = MacCode::build(&w, [p.clone(), p], [3, 3], DecisionParams::default(), 4, 32).unwrap();
        for m_prime in [[0, 0], [1, 2], [0, 1]] {
            let r = mac_errors_exact(&code, &w, [0, 0], m_prime).unwrap();
            assert!(r.union_bound_holds());
            assert!(r.joint >= r.per_sender[0].max(r.per_sender[1]) - 1e-12);
        }
    }

    #[test]
    fn exact_and_monte_carlo_agree() {
        let w = KMac::mod2_adder(0.1).unwrap();
        let p = TypeVector::new(vec![3, 3]).unwrap();
        let params = DecisionParams { eps: 0.5, delta: 0.05 };
        let code = MacCode::build(&w, [p.clone(), p], [2, 2], params, 8, 32).unwrap();
        let e = mac_errors_exact(&code, &w, [0, 1], [1, 1]).unwrap();
        let mc = mac_errors_monte_carlo(&code, &w, [0, 1], [1, 1], 20_000, 5).unwrap();
        assert!(mc.union_bound_holds());
        assert!((e.joint - mc.joint).abs() <= 4.0 * mc.joint_half_width + 1e-9);
        for k in 0..2 {
            assert!((e.per_sender[k] - mc.per_sender[k]).abs() <= 4.0 * mc.per_sender_half_width[k] + 1e-9);
        }
    }

    #[test]
    fn requires_two_senders_and_matching_codes() {
        let w3 = KMac::deterministic(vec![2, 2, 2], 2, |t| t[0] ^ t[1] ^ t[2]).unwrap();
        let p = TypeVector::new(vec![2, 2]).unwrap();
        assert!(MacCode::build(&w3, [p.clone(), p.clone()], [2, 2], DecisionParams::default(), 1, 4).is_err());
        let w = KMac::mod2_adder(0.1).unwrap();
        let a = MacCode::build(&w, [p.clone(), p], [2, 2], DecisionParams::default(), 1, 4).unwrap();
        let m = KMac::multiplier(0.1).unwrap();
        assert!(MacCode::new(&m, [a.code(0).clone(), a.code(1).clone()]).is_err());
    }
}
