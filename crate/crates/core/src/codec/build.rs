//! Codebook construction and the post-hoc spread check.

use std::collections::{BTreeMap, HashSet};

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;

use super::{DecisionParams, DiCode};
use crate::channel::StateChannel;
use crate::error::{Error, Result};
use crate::prob::{mutual_information, JointPmf};
use crate::rng::{substream, tag};
use crate::types::{sample_type_class, type_class_size, TypeVector};

/// Type classes up to this size may be listed in full.
const ENUMERATION_LIMIT: u64 = 1 << 20;

/// Draws `m` distinct words uniformly without replacement from the type
/// class of `p`. When `m` exceeds half the class the class is listed and
/// shuffled; otherwise words are drawn by rejection, giving up after
/// `max_attempts` rounds of `m` draws each.
pub fn build_codebook(p: &TypeVector, m: usize, seed: u64, max_attempts: usize) -> Result<Vec<Vec<usize>>> {
    let class = type_class_size(p);
    if m == 0 {
        return Err(Error::Construction("a codebook needs at least one codeword".into()));
    }
    if class < m.into() {
        return Err(Error::Construction(format!("{m} codewords requested from a type class of size {class}")));
    }
    let mut rng = substream(seed, tag::CODEBOOK);
    let class_small = class.to_u64().is_some_and(|c| c <= ENUMERATION_LIMIT);
    if class_small && class <= (2 * m).into() {
        let mut all = list_type_class(p);
        all.shuffle(&mut rng);
        all.truncate(m);
        return Ok(all);
    }
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    let mut draws = 0usize;
    let limit = max_attempts.max(1).saturating_mul(m);
    while out.len() < m {
        if draws >= limit {
            return Err(Error::Construction(format!(
                "only {} distinct codewords after {draws} draws",
                out.len()
            )));
        }
        draws += 1;
        let w = sample_type_class(p, &mut rng);
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    Ok(out)
}

/// All words of the type class in lexicographic order.
pub(crate) fn list_type_class(p: &TypeVector) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut counts = p.counts().to_vec();
    let mut word = Vec::with_capacity(p.n());
    fn rec(counts: &mut [usize], word: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if word.len() == n {
            out.push(word.clone());
            return;
        }
        for a in 0..counts.len() {
            if counts[a] > 0 {
                counts[a] -= 1;
                word.push(a);
                rec(counts, word, n, out);
                word.pop();
                counts[a] += 1;
            }
        }
    }
    rec(&mut counts, &mut word, p.n(), &mut out);
    out
}

/// Outcome of the spread check.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadReport {
    /// Largest count-to-ceiling ratio over codewords, state words and joint
    /// types.
    pub max_ratio: f64,
    pub violation: bool,
    /// Codeword index, state word index and joint counts of the worst case.
    pub worst: Option<(usize, usize, Vec<usize>)>,
}

/// For every codeword `x`, every state word `s` and every joint type of
/// `(x, x_m, s)`, compares the number of codewords `x_m` realizing that type
/// with `3 (n+1)^|X| 2^(n max(0, R - I(X S; X')))`.
pub fn check_spread(
    codebook: &[Vec<usize>],
    alphabet: usize,
    state_words: &[Vec<usize>],
    s_size: usize,
    rate: f64,
) -> Result<SpreadReport> {
    let mut report = SpreadReport {
        max_ratio: 0.0,
        violation: false,
        worst: None,
    };
    let Some(n) = codebook.first().map(|w| w.len()) else {
        return Ok(report);
    };
    if state_words.iter().any(|s| s.len() != n) {
        return Err(Error::DimensionMismatch("state word length differs from blocklength".into()));
    }
    let prefactor = 3.0 * ((n + 1) as f64).powi(alphabet as i32);
    for (i, x) in codebook.iter().enumerate() {
        for (si, s) in state_words.iter().enumerate() {
            let mut classes: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for xm in codebook {
                let mut counts = vec![0usize; alphabet * alphabet * s_size];
                for t in 0..n {
                    counts[(x[t] * s_size + s[t]) * alphabet + xm[t]] += 1;
                }
                *classes.entry(counts).or_default() += 1;
            }
            for (counts, hits) in classes {
                let joint = JointPmf::new(
                    vec![alphabet * s_size, alphabet],
                    counts.iter().map(|&c| c as f64 / n as f64).collect(),
                )?;
                let info = mutual_information(&joint)?;
                let ceiling = prefactor * (n as f64 * (rate - info).max(0.0)).exp2();
                let ratio = hits as f64 / ceiling;
                if ratio > report.max_ratio {
                    report.max_ratio = ratio;
                    report.worst = Some((i, si, counts));
                }
            }
        }
    }
    report.violation = report.max_ratio > 1.0;
    Ok(report)
}

impl DiCode {
    /// Spread check of this code against the canonical words of its state
    /// types.
    pub fn check_spread(&self) -> Result<SpreadReport> {
        let words: Vec<Vec<usize>> = self.state_types().iter().map(|t| t.sorted_word()).collect();
        check_spread(
            self.codebook(),
            self.channel().x_size(),
            &words,
            self.channel().s_size(),
            self.rate(),
        )
    }
}

/// Builds a code with `m` codewords of type `p`, redrawing the codebook
/// with a fresh stream whenever the spread check flags it.
pub fn build_code(
    channel: StateChannel,
    p: TypeVector,
    state_types: Vec<TypeVector>,
    m: usize,
    params: DecisionParams,
    seed: u64,
    max_attempts: usize,
) -> Result<DiCode> {
    let attempts = max_attempts.max(1);
    for attempt in 0..attempts {
        let book = build_codebook(&p, m, seed.wrapping_add(attempt as u64), attempts)?;
        let code = DiCode::new(book, p.clone(), state_types.clone(), channel.clone(), params)?;
        if !code.check_spread()?.violation {
            return Ok(code);
        }
        log::debug!("codebook attempt {attempt} violated the spread ceiling");
    }
    Err(Error::Construction(format!("spread check failed in all {attempts} attempts")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Dmc;
    use crate::types::empirical_type;

    #[test]
    fn small_codebooks() {
        let p = TypeVector::new(vec![3, 3]).unwrap();
        let book = build_codebook(&p, 4, 1, 32).unwrap();
        assert_eq!(book.len(), 4);
        let distinct: HashSet<_> = book.iter().collect();
        assert_eq!(distinct.len(), 4);
        for w in &book {
            assert_eq!(empirical_type(w, 2).unwrap(), p);
        }
        let full = build_codebook(&p, 20, 1, 32).unwrap();
        let distinct: HashSet<_> = full.iter().collect();
        assert_eq!(distinct.len(), 20);
        assert!(build_codebook(&p, 21, 1, 32).is_err());
    }

    #[test]
    fn seeded_codebook_is_reproducible() {
        let p = TypeVector::new(vec![4, 4]).unwrap();
        let a = build_codebook(&p, 16, 42, 32).unwrap();
        let b = build_codebook(&p, 16, 42, 32).unwrap();
        let c = build_codebook(&p, 16, 43, 32).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn listing_matches_class_size() {
        let p = TypeVector::new(vec![2, 1, 2]).unwrap();
        let all = list_type_class(&p);
        assert_eq!(all.len(), 30);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn spread_of_single_codeword_and_random_code() {
        let p = TypeVector::new(vec![4, 4]).unwrap();
        let one = build_codebook(&p, 1, 3, 32).unwrap();
        let r = check_spread(&one, 2, &[vec![0; 8]], 1, 0.0).unwrap();
        assert!(!r.violation);
        let book = build_codebook(&p, 4, 3, 32).unwrap();
        let states: Vec<Vec<usize>> = vec![vec![0, 1, 2, 0, 1, 2, 0, 1], vec![2; 8], vec![0, 0, 0, 1, 1, 1, 2, 2]];
        let r = check_spread(&book, 2, &states, 3, 0.25).unwrap();
        assert!(!r.violation);
        assert!(r.max_ratio > 0.0);
    }

    #[test]
    fn clustered_codebook_is_flagged() {
        // Every codeword differs from the first in exactly four positions,
        // so thousands of words share one joint type with it.
        let n = 30;
        let center: Vec<usize> = (0..n).map(|i| usize::from(i >= 15)).collect();
        let mut book = vec![center.clone()];
        'outer: for a in 0..15 {
            for b in a + 1..15 {
                for c in 15..n {
                    for d in c + 1..n {
                        let mut w = center.clone();
                        w.swap(a, c);
                        w.swap(b, d);
                        book.push(w);
                        if book.len() == 3001 {
                            break 'outer;
                        }
                    }
                }
            }
        }
        let rate = (book.len() as f64).log2() / n as f64;
        let r = check_spread(&book, 2, &[vec![0; n]], 1, rate).unwrap();
        assert!(r.violation, "ratio {}", r.max_ratio);
        assert_eq!(r.worst.as_ref().unwrap().0, 0);
    }

    #[test]
    fn build_code_produces_valid_code() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.1).unwrap());
        let p = TypeVector::new(vec![4, 4]).unwrap();
        let code = build_code(w, p, vec![TypeVector::new(vec![8]).unwrap()], 8, DecisionParams::default(), 5, 32).unwrap();
        assert_eq!(code.m(), 8);
        assert!(code.duplicate_pair().is_none());
    }
}
