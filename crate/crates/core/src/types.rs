//! Method of types: empirical types, type enumeration and counting, exact
//! and epsilon-typical membership, joint types.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::prob::{JointPmf, Pmf};

/// Slack added to every typicality comparison so that rational boundary
/// cases are not flipped by floating-point rounding.
pub const TYPICALITY_SLACK: f64 = 1e-12;

/// Letter counts of a sequence over `{0, .., A-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector {
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(Error::OutOfRange("a type needs blocklength n >= 1".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    pub fn as_pmf(&self) -> Pmf {
        let n = self.n() as f64;
        Pmf::new(self.counts.iter().map(|&c| c as f64 / n).collect())
            .expect("type frequencies form a pmf")
    }

    /// The canonical member of the type class: letters in increasing order.
    pub fn sorted_word(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat_n(a, c))
            .collect()
    }
}

/// Counts of aligned letter tuples over a product alphabet (row-major).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTypeVector {
    shape: Vec<usize>,
    counts: Vec<usize>,
}

impl JointTypeVector {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn get(&self, index: &[usize]) -> usize {
        self.counts[flat_index(&self.shape, index)]
    }

    pub fn as_joint_pmf(&self) -> JointPmf {
        let n = self.n() as f64;
        JointPmf::new(
            self.shape.clone(),
            self.counts.iter().map(|&c| c as f64 / n).collect(),
        )
        .expect("joint type frequencies form a pmf")
    }
}

fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    index
        .iter()
        .zip(shape)
        .fold(0, |acc, (&i, &s)| acc * s + i)
}

/// Empirical type of `x` over an alphabet of size `alphabet`.
pub fn empirical_type(x: &[usize], alphabet: usize) -> Result<TypeVector> {
    if x.is_empty() {
        return Err(Error::OutOfRange("empirical type of an empty sequence".into()));
    }
    let mut counts = vec![0; alphabet];
    for &a in x {
        *counts.get_mut(a).ok_or_else(|| {
            Error::IndexOutOfRange(format!("letter {a} in alphabet of size {alphabet}"))
        })? += 1;
    }
    TypeVector::new(counts)
}

/// Lazily enumerates every n-type over an alphabet of size `a`, in reverse
/// lexicographic order of the counts (all mass on letter 0 first).
pub fn enumerate_types(n: usize, a: usize) -> TypeIter {
    TypeIter {
        next: (n >= 1 && a >= 1).then(|| {
            let mut c = vec![0; a];
            c[0] = n;
            c
        }),
    }
}

/// Iterator returned by [`enumerate_types`].
#[derive(Debug, Clone)]
pub struct TypeIter {
    next: Option<Vec<usize>>,
}

impl Iterator for TypeIter {
    type Item = TypeVector;

    fn next(&mut self) -> Option<TypeVector> {
        let current = self.next.take()?;
        self.next = next_composition(&current);
        Some(TypeVector { counts: current })
    }
}

fn next_composition(c: &[usize]) -> Option<Vec<usize>> {
    let a = c.len();
    if a < 2 {
        return None;
    }
    // Rightmost position among 0..a-1 with a positive count moves one unit
    // to its right neighbour, and everything past that neighbour collapses
    // onto the neighbour.
    let i = (0..a - 1).rev().find(|&i| c[i] > 0)?;
    let mut out = c.to_vec();
    out[i] -= 1;
    let tail: usize = c[i + 1..].iter().sum::<usize>() + 1;
    for v in out[i + 1..].iter_mut() {
        *v = 0;
    }
    out[i + 1] = tail;
    Some(out)
}

/// Number of n-types over an alphabet of size `a`: `C(n + a - 1, a - 1)`.
pub fn type_count(n: usize, a: usize) -> BigUint {
    binomial(n + a - 1, a - 1)
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k.min(n));
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Size of the type class: the multinomial `n! / prod(counts!)`.
pub fn type_class_size(t: &TypeVector) -> BigUint {
    let mut acc = BigUint::one();
    let mut placed = 0usize;
    for &c in &t.counts {
        placed += c;
        acc *= binomial(placed, c);
    }
    acc
}

/// `log2` of a big integer.
pub fn log2_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return (v.to_u64().expect("fits in u64") as f64).log2();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_u64().expect("fits in u64") as f64;
    top.log2() + shift as f64
}

/// Samples a uniformly random member of the type class.
pub fn sample_type_class<R: Rng + ?Sized>(t: &TypeVector, rng: &mut R) -> Vec<usize> {
    let mut word = t.sorted_word();
    word.shuffle(rng);
    word
}

/// Checks the epsilon-band `|count(a)/n - p(a)| <= eps * p(a)` for every
/// letter. With `eps = 0` this is exact type equality.
pub fn counts_within_band(counts: &[usize], n: usize, p: &[f64], eps: f64) -> bool {
    let n = n as f64;
    counts
        .iter()
        .zip(p)
        .all(|(&c, &pa)| (c as f64 / n - pa).abs() <= eps * pa + TYPICALITY_SLACK)
}

/// Membership in the epsilon-typical set of `p`.
pub fn is_eps_typical(x: &[usize], p: &Pmf, eps: f64) -> Result<bool> {
    if !(eps >= 0.0) {
        return Err(Error::OutOfRange(format!("eps = {eps} must be non-negative")));
    }
    let mut counts = vec![0; p.len()];
    for &a in x {
        match counts.get_mut(a) {
            Some(c) => *c += 1,
            None => return Ok(false),
        }
    }
    if x.is_empty() {
        return Ok(false);
    }
    Ok(counts_within_band(&counts, x.len(), p.probs(), eps))
}

/// Joint type of aligned sequences with the given alphabet sizes.
pub fn joint_type(seqs: &[&[usize]], sizes: &[usize]) -> Result<JointTypeVector> {
    if seqs.is_empty() || seqs.len() != sizes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} sequences with {} alphabet sizes",
            seqs.len(),
            sizes.len()
        )));
    }
    let n = seqs[0].len();
    if seqs.iter().any(|s| s.len() != n) {
        return Err(Error::DimensionMismatch("sequences of unequal length".into()));
    }
    let cells: usize = sizes.iter().product();
    let mut counts = vec![0; cells];
    for i in 0..n {
        let mut idx = 0;
        for (s, &size) in seqs.iter().zip(sizes) {
            let a = s[i];
            if a >= size {
                return Err(Error::IndexOutOfRange(format!(
                    "letter {a} in alphabet of size {size}"
                )));
            }
            idx = idx * size + a;
        }
        counts[idx] += 1;
    }
    Ok(JointTypeVector {
        shape: sizes.to_vec(),
        counts,
    })
}

/// Whether `(x, y)` is jointly epsilon-typical for `pxy` (equivalently, `y`
/// is conditionally typical given `x`).
pub fn is_conditionally_typical(y: &[usize], x: &[usize], pxy: &JointPmf, eps: f64) -> Result<bool> {
    if pxy.axes() != 2 {
        return Err(Error::DimensionMismatch("conditional typicality needs a 2-axis joint".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "x has length {}, y has length {}",
            x.len(),
            y.len()
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::OutOfRange(format!("eps = {eps} must be non-negative")));
    }
    if x.is_empty() {
        return Ok(false);
    }
    let shape = pxy.shape();
    if x.iter().any(|&a| a >= shape[0]) || y.iter().any(|&b| b >= shape[1]) {
        return Ok(false);
    }
    let jt = joint_type(&[x, y], shape)?;
    Ok(counts_within_band(jt.counts(), x.len(), pxy.probs(), eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::entropy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeSet, HashMap};

    #[test]
    fn empirical_type_examples() {
        assert_eq!(empirical_type(&[0, 0, 1, 1], 2).unwrap().counts(), &[2, 2]);
        assert_eq!(empirical_type(&[0, 1, 2, 0, 1], 3).unwrap().counts(), &[2, 2, 1]);
        assert!(empirical_type(&[], 2).is_err());
        assert!(empirical_type(&[3], 2).is_err());
    }

    #[test]
    fn enumerate_small() {
        let all: BTreeSet<Vec<usize>> = enumerate_types(2, 2).map(|t| t.counts().to_vec()).collect();
        assert_eq!(all, BTreeSet::from([vec![0, 2], vec![1, 1], vec![2, 0]]));
        assert_eq!(enumerate_types(4, 2).count(), 5);
        let t33: Vec<_> = enumerate_types(3, 3).collect();
        assert_eq!(t33.len(), 10);
        assert!(t33.iter().all(|t| t.n() == 3));
        let distinct: BTreeSet<_> = t33.iter().collect();
        assert_eq!(distinct.len(), 10);
        assert_eq!(enumerate_types(5, 1).count(), 1);
    }

    #[test]
    fn class_sizes() {
        let t = |c: Vec<usize>| TypeVector::new(c).unwrap();
        assert_eq!(type_class_size(&t(vec![2, 2])), BigUint::from(6u32));
        assert_eq!(type_class_size(&t(vec![4, 0])), BigUint::from(1u32));
        assert_eq!(type_class_size(&t(vec![2, 2, 1])), BigUint::from(30u32));
        assert_eq!(type_count(3, 3), BigUint::from(10u32));
        // 100 choose 50 does not fit in 64 bits.
        let big = type_class_size(&t(vec![50, 50]));
        assert!(big.bits() > 64);
        assert!((log2_big(&big) - 96.35).abs() < 0.01);
    }

    #[test]
    fn sample_type_class_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = TypeVector::new(vec![4, 0]).unwrap();
        assert_eq!(sample_type_class(&t, &mut rng), vec![0, 0, 0, 0]);
        let t = TypeVector::new(vec![2, 2]).unwrap();
        let w = sample_type_class(&t, &mut rng);
        assert_eq!(empirical_type(&w, 2).unwrap(), t);
    }

    #[test]
    fn sample_type_class_is_uniform() {
        // 20 members of the (3,3) class; chi-square against uniform.
        let t = TypeVector::new(vec![3, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 40_000;
        let mut freq: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *freq.entry(sample_type_class(&t, &mut rng)).or_default() += 1;
        }
        assert_eq!(freq.len(), 20);
        let expected = draws as f64 / 20.0;
        let chi2: f64 = freq
            .values()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        // 19 degrees of freedom; the 0.999 quantile is about 43.8.
        assert!(chi2 < 43.8, "chi2 = {chi2}");
    }

    #[test]
    fn eps_typical_examples() {
        let p = Pmf::uniform(2).unwrap();
        assert!(is_eps_typical(&[0, 1, 1, 0], &p, 0.0).unwrap());
        assert!(is_eps_typical(&[0, 1, 1, 0], &p, 0.3).unwrap());
        assert!(!is_eps_typical(&[0, 0, 0, 1], &p, 0.4).unwrap());
        assert!(is_eps_typical(&[0, 0, 0, 1], &p, 0.5).unwrap());
        let p = Pmf::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(!is_eps_typical(&[0, 1, 2, 0], &p, 10.0).unwrap());
        assert!(is_eps_typical(&[0, 1], &p, -1.0).is_err());
    }

    #[test]
    fn joint_type_examples() {
        let jt = joint_type(&[&[0, 0], &[0, 0]], &[2, 2]).unwrap();
        assert_eq!(jt.get(&[0, 0]), 2);
        let jt = joint_type(&[&[0, 1], &[1, 0]], &[2, 2]).unwrap();
        assert_eq!((jt.get(&[0, 1]), jt.get(&[1, 0])), (1, 1));
        let jt = joint_type(&[&[0, 0, 1, 1], &[0, 1, 0, 1], &[0, 1, 1, 0]], &[2, 2, 2]).unwrap();
        for cell in [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]] {
            assert_eq!(jt.get(&cell), 1);
        }
        assert_eq!(jt.counts().iter().filter(|&&c| c > 0).count(), 4);
        assert!(joint_type(&[&[0, 1], &[1]], &[2, 2]).is_err());
    }

    #[test]
    fn conditional_typicality_examples() {
        // Joint type (1/4 each of (0,0),(1,1), 1/4 each of (0,1),(1,0)).
        let pxy = JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let x = [0, 0, 1, 1];
        assert!(is_conditionally_typical(&[0, 1, 0, 1], &x, &pxy, 0.0).unwrap());
        // Two flips put the (0,0) cell at 1/2, outside any band below 1.
        assert!(!is_conditionally_typical(&[0, 0, 1, 1], &x, &pxy, 0.5).unwrap());
        assert!(is_conditionally_typical(&[0], &[0, 1], &pxy, 0.1).is_err());
    }

    #[test]
    fn conditional_typicality_matches_bruteforce_at_eps_one() {
        let pxy = JointPmf::new(vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for xi in 0..8 {
            for yi in 0..8 {
                let x: Vec<usize> = (0..3).map(|i| (xi >> i) & 1).collect();
                let y: Vec<usize> = (0..3).map(|i| (yi >> i) & 1).collect();
                let mut c = [0usize; 4];
                for i in 0..3 {
                    c[x[i] * 2 + y[i]] += 1;
                }
                // eps = 1: every cell frequency in [0, 2 p].
                let direct = c
                    .iter()
                    .zip(pxy.probs())
                    .all(|(&k, &p)| k as f64 / 3.0 <= 2.0 * p + 1e-12);
                assert_eq!(is_conditionally_typical(&y, &x, &pxy, 1.0).unwrap(), direct);
            }
        }
    }

    #[test]
    fn type_partition_identity() {
        for a in [2usize, 3] {
            for n in 1..=12 {
                let mut total = BigUint::from(0u32);
                let mut count = 0usize;
                for t in enumerate_types(n, a) {
                    let size = type_class_size(&t);
                    let h = entropy(&t.as_pmf());
                    let upper = (n as f64 * h).exp2();
                    let lower = upper / ((n + 1) as f64).powi(a as i32);
                    let s = size.to_f64().unwrap();
                    assert!(s <= upper * (1.0 + 1e-9) && s >= lower * (1.0 - 1e-9));
                    total += size;
                    count += 1;
                }
                assert_eq!(total, BigUint::from(a).pow(n as u32));
                assert!(count as f64 <= ((n + 1) as f64).powi(a as i32));
                assert_eq!(BigUint::from(count), type_count(n, a));
            }
        }
    }

    #[test]
    fn sampled_words_keep_their_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = rng.gen_range(1..5);
            let counts: Vec<usize> = (0..a).map(|_| rng.gen_range(0..6)).collect();
            if counts.iter().sum::<usize>() == 0 {
                continue;
            }
            let t = TypeVector::new(counts).unwrap();
            let w = sample_type_class(&t, &mut rng);
            assert_eq!(empirical_type(&w, a).unwrap(), t);
            assert!(is_eps_typical(&w, &t.as_pmf(), 0.0).unwrap());
        }
    }
}
