//! Finite probability distributions and information measures.
//!
//! All logarithms are base 2, so entropies and mutual informations are in
//! bits. The conventions `0 log 0 = 0` and `0 log (0/0) = 0` hold throughout.

use crate::error::{Error, Result};

/// Tolerance for the sum-to-one check on distributions.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Entries in `[-NEG_CLAMP, 0)` are treated as floating-point noise and
/// clamped to zero; anything more negative is rejected.
pub const NEG_CLAMP: f64 = 1e-12;

fn validate(probs: &mut [f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    for (index, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() || *p < -NEG_CLAMP {
            return Err(Error::NegativeProbability { index, value: *p });
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// A probability mass function over the alphabet `{0, .., A-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        validate(&mut probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::IndexOutOfRange(format!(
                "point mass at {at} in alphabet of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Bernoulli distribution `(1 - q, q)`.
    pub fn bernoulli(q: f64) -> Result<Self> {
        check_unit(q, "q")?;
        Ok(Self {
            probs: vec![1.0 - q, q],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// Product distribution `self × other`, row-major with `self` as the
    /// slow axis.
    pub fn product(&self, other: &Pmf) -> Pmf {
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for &a in &self.probs {
            for &b in &other.probs {
                probs.push(a * b);
            }
        }
        Pmf { probs }
    }

    /// Mixture `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Pmf, lambda: f64) -> Result<Pmf> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "mixing pmfs of sizes {} and {}",
                self.len(),
                other.len()
            )));
        }
        check_unit(lambda, "lambda")?;
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Pmf::new(probs)
    }

    /// Total-variation distance (half the L1 distance).
    pub fn total_variation(&self, other: &Pmf) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// Expectation of `f` under this distribution.
    pub fn expect(&self, f: &[f64]) -> f64 {
        self.probs.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}

fn check_unit(q: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange(format!("{name} = {q} not in [0, 1]")));
    }
    Ok(())
}

/// A joint distribution over a product alphabet, stored row-major (last axis
/// fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(shape: Vec<usize>, mut probs: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid shape {shape:?}")));
        }
        let cells: usize = shape.iter().product();
        if cells != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "shape {shape:?} has {cells} cells but {} probabilities given",
                probs.len()
            )));
        }
        validate(&mut probs)?;
        Ok(Self { shape, probs })
    }

    /// Joint `p(x, y) = p(x) W(y | x)`.
    pub fn from_input_channel(p: &Pmf, w: &Dmc) -> Result<Self> {
        if p.len() != w.in_size() {
            return Err(Error::DimensionMismatch(format!(
                "input pmf of size {} for channel with {} inputs",
                p.len(),
                w.in_size()
            )));
        }
        let mut probs = Vec::with_capacity(w.in_size() * w.out_size());
        for (x, row) in w.rows().iter().enumerate() {
            for &v in row.probs() {
                probs.push(p.get(x) * v);
            }
        }
        JointPmf::new(vec![w.in_size(), w.out_size()], probs)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn axes(&self) -> usize {
        self.shape.len()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.shape.len()];
        for i in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.shape[i + 1];
        }
        strides
    }

    /// Sums out every axis not listed in `keep_axes`. The result has the kept
    /// axes in the listed order.
    pub fn marginalize(&self, keep_axes: &[usize]) -> Result<JointPmf> {
        let groups: Vec<Vec<usize>> = keep_axes.iter().map(|&a| vec![a]).collect();
        self.group(&groups)
    }

    /// Marginalizes onto the listed axis groups and merges each group into a
    /// single row-major axis. `group(&[vec![1], vec![0, 2, 3]])` turns a
    /// four-axis joint into a two-axis joint of `(X1, (X0, X2, X3))`.
    pub fn group(&self, groups: &[Vec<usize>]) -> Result<JointPmf> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidAxes("empty axis group".into()));
        }
        let mut seen = vec![false; self.shape.len()];
        for &a in groups.iter().flatten() {
            if a >= self.shape.len() {
                return Err(Error::InvalidAxes(format!(
                    "axis {a} out of range for {} axes",
                    self.shape.len()
                )));
            }
            if seen[a] {
                return Err(Error::InvalidAxes(format!("axis {a} listed twice")));
            }
            seen[a] = true;
        }
        let new_shape: Vec<usize> = groups
            .iter()
            .map(|g| g.iter().map(|&a| self.shape[a]).product())
            .collect();
        let order: Vec<usize> = groups.iter().flatten().copied().collect();
        // Row-major strides of the flattened kept axes in the output.
        let mut out_stride = vec![0usize; self.shape.len()];
        let mut acc = 1usize;
        for &a in order.iter().rev() {
            out_stride[a] = acc;
            acc *= self.shape[a];
        }
        let mut out = vec![0.0; acc];
        let mut idx = vec![0usize; self.shape.len()];
        for &p in &self.probs {
            let pos: usize = (0..self.shape.len()).map(|a| idx[a] * out_stride[a]).sum();
            out[pos] += p;
            for a in (0..self.shape.len()).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(JointPmf {
            shape: new_shape,
            probs: out,
        })
    }

    /// Flattens the whole joint into a single-axis pmf.
    pub fn flatten(&self) -> Pmf {
        Pmf {
            probs: self.probs.clone(),
        }
    }

    pub fn marginal(&self, axis: usize) -> Result<Pmf> {
        Ok(self.marginalize(&[axis])?.flatten())
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let strides = self.strides();
        self.probs[index.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()]
    }
}

/// A discrete memoryless channel given by its transition rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    out_size: usize,
    rows: Vec<Pmf>,
}

impl Dmc {
    pub fn new(rows: Vec<Pmf>) -> Result<Self> {
        let out_size = rows
            .first()
            .map(Pmf::len)
            .ok_or(Error::EmptyDistribution)?;
        if rows.iter().any(|r| r.len() != out_size) {
            return Err(Error::DimensionMismatch(
                "channel rows have different lengths".into(),
            ));
        }
        Ok(Self { out_size, rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Dmc::new(rows.into_iter().map(Pmf::new).collect::<Result<_>>()?)
    }

    /// Binary symmetric channel with crossover `q`.
    pub fn bsc(q: f64) -> Result<Self> {
        check_unit(q, "q")?;
        Dmc::from_rows(vec![vec![1.0 - q, q], vec![q, 1.0 - q]])
    }

    pub fn in_size(&self) -> usize {
        self.rows.len()
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &Pmf {
        &self.rows[x]
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].probs[y]
    }
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn entropy_slice(p: &[f64]) -> f64 {
    p.iter().map(|&v| plogp(v)).sum()
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_slice(&p.probs)
}

/// Entropy of the whole joint distribution.
pub fn joint_entropy(p: &JointPmf) -> f64 {
    entropy_slice(&p.probs)
}

/// Binary entropy `H2(q)`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    check_unit(q, "q")?;
    Ok(plogp(q) + plogp(1.0 - q))
}

/// `I(X; Y)` for a two-axis joint.
pub fn mutual_information(pxy: &JointPmf) -> Result<f64> {
    if pxy.axes() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "mutual information needs 2 axes, got {}",
            pxy.axes()
        )));
    }
    let hx = joint_entropy(&pxy.marginalize(&[0])?);
    let hy = joint_entropy(&pxy.marginalize(&[1])?);
    Ok((hx + hy - joint_entropy(pxy)).max(0.0))
}

/// `I(X; Y | Z)` for a three-axis joint ordered `(X, Y, Z)`.
pub fn conditional_mi(pxyz: &JointPmf) -> Result<f64> {
    if pxyz.axes() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "conditional mutual information needs 3 axes, got {}",
            pxyz.axes()
        )));
    }
    let hxz = joint_entropy(&pxyz.marginalize(&[0, 2])?);
    let hyz = joint_entropy(&pxyz.marginalize(&[1, 2])?);
    let hz = joint_entropy(&pxyz.marginalize(&[2])?);
    Ok((hxz + hyz - hz - joint_entropy(pxyz)).max(0.0))
}

/// Output distribution `p W`.
pub fn push_through(p: &Pmf, w: &Dmc) -> Result<Pmf> {
    if p.len() != w.in_size() {
        return Err(Error::DimensionMismatch(format!(
            "input pmf of size {} for channel with {} inputs",
            p.len(),
            w.in_size()
        )));
    }
    let mut out = vec![0.0; w.out_size()];
    for (px, row) in p.probs.iter().zip(&w.rows) {
        for (o, v) in out.iter_mut().zip(&row.probs) {
            *o += px * v;
        }
    }
    Pmf::new(out)
}
