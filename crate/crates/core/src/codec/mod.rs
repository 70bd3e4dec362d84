//! Deterministic identification codes on type classes, their decision rule,
//! and exact and Monte Carlo error evaluation.

mod build;
mod dia;
mod eval;
mod mac;

pub use build::{build_codebook, build_code, check_spread, SpreadReport};
pub use dia::{dia_build, dia_errors, dia_missed_exact, DiaCode, DiaErrorReport, DiaSenderErrors};
pub use eval::{
    code_errors_exact, duplicate_converse_demo, exact_errors, monte_carlo_errors, state_word, wilson_half_width,
    CodeErrorSummary, DuplicateReport, ErrorReport, EvalMethod, EXACT_BUDGET,
};
pub use mac::{mac_errors_exact, mac_errors_monte_carlo, MacCode, MacErrorReport};

use crate::channel::StateChannel;
use crate::error::{Error, Result};
use crate::prob::Dmc;
use crate::types::{counts_within_band, empirical_type, TypeVector};

/// Upper limit on the work of one E-set membership test.
pub const E_SEARCH_BUDGET: f64 = 1e7;

/// Typicality band and confusability slack of the decision rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionParams {
    pub eps: f64,
    pub delta: f64,
}

impl Default for DecisionParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            delta: 0.05,
        }
    }
}

/// Per-state-type data used by the decision rule.
#[derive(Debug, Clone)]
struct StateView {
    counts: Vec<usize>,
    /// `P(x) V(y | x)` for the averaged channel, laid out `x * ny + y`.
    cell: Vec<f64>,
}

/// A DI code for a sender facing a state channel.
#[derive(Debug, Clone)]
pub struct DiCode {
    codebook: Vec<Vec<usize>>,
    p: TypeVector,
    state_types: Vec<TypeVector>,
    params: DecisionParams,
    channel: StateChannel,
    views: Vec<StateView>,
}

impl DiCode {
    /// Validates and wraps a codebook. Every codeword must have type `p`
    /// and all codewords must be distinct.
    pub fn new(
        codebook: Vec<Vec<usize>>,
        p: TypeVector,
        state_types: Vec<TypeVector>,
        channel: StateChannel,
        params: DecisionParams,
    ) -> Result<Self> {
        let code = Self::with_duplicates(codebook, p, state_types, channel, params)?;
        if let Some((a, b)) = code.duplicate_pair() {
            return Err(Error::InvalidCode(format!("codewords {a} and {b} coincide")));
        }
        Ok(code)
    }

    /// Like [`DiCode::new`] but accepts repeated codewords.
    pub fn with_duplicates(
        codebook: Vec<Vec<usize>>,
        p: TypeVector,
        state_types: Vec<TypeVector>,
        channel: StateChannel,
        params: DecisionParams,
    ) -> Result<Self> {
        if codebook.is_empty() {
            return Err(Error::InvalidCode("empty codebook".into()));
        }
        if !(params.eps >= 0.0) || !(params.delta >= 0.0) {
            return Err(Error::OutOfRange("eps and delta must be non-negative".into()));
        }
        if p.alphabet() != channel.x_size() {
            return Err(Error::DimensionMismatch(format!(
                "codeword type over {} letters for a channel with {} inputs",
                p.alphabet(),
                channel.x_size()
            )));
        }
        let n = p.n();
        for (i, word) in codebook.iter().enumerate() {
            if word.len() != n {
                return Err(Error::InvalidCode(format!("codeword {i} has length {}, expected {n}", word.len())));
            }
            if empirical_type(word, p.alphabet())? != p {
                return Err(Error::InvalidCode(format!("codeword {i} is not of type {:?}", p.counts())));
            }
        }
        if state_types.is_empty() {
            return Err(Error::InvalidCode("at least one state type is required".into()));
        }
        let pmf = p.as_pmf();
        let ny = channel.y_size();
        let mut views = Vec::with_capacity(state_types.len());
        for t in &state_types {
            if t.n() != n || t.alphabet() != channel.s_size() {
                return Err(Error::DimensionMismatch(format!(
                    "state type {:?} for blocklength {n} and {} states",
                    t.counts(),
                    channel.s_size()
                )));
            }
            let v: Dmc = channel.averaged(&t.as_pmf())?;
            let mut cell = vec![0.0; channel.x_size() * ny];
            for x in 0..channel.x_size() {
                for y in 0..ny {
                    cell[x * ny + y] = pmf.get(x) * v.prob(x, y);
                }
            }
            views.push(StateView {
                counts: t.counts().to_vec(),
                cell,
            });
        }
        let code = Self {
            codebook,
            p,
            state_types,
            params,
            channel,
            views,
        };
        let work = code.e_search_work();
        if work > E_SEARCH_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "E-set search needs about {work:.3e} steps per decision (limit {E_SEARCH_BUDGET:.0e})"
            )));
        }
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    /// Number of messages.
    pub fn m(&self) -> usize {
        self.codebook.len()
    }

    pub fn codebook(&self) -> &[Vec<usize>] {
        &self.codebook
    }

    pub fn codeword(&self, m: usize) -> &[usize] {
        &self.codebook[m]
    }

    pub fn p(&self) -> &TypeVector {
        &self.p
    }

    pub fn state_types(&self) -> &[TypeVector] {
        &self.state_types
    }

    pub fn params(&self) -> DecisionParams {
        self.params
    }

    pub fn channel(&self) -> &StateChannel {
        &self.channel
    }

    /// Rate `log2(M) / n`.
    pub fn rate(&self) -> f64 {
        (self.m() as f64).log2() / self.n() as f64
    }

    /// First pair of equal codewords, if any.
    pub fn duplicate_pair(&self) -> Option<(usize, usize)> {
        let mut seen = std::collections::HashMap::new();
        for (i, w) in self.codebook.iter().enumerate() {
            if let Some(&j) = seen.get(w) {
                return Some((j, i));
            }
            seen.insert(w, i);
        }
        None
    }

    /// Crude bound on the number of state splits examined per competing
    /// codeword, times the number of competitors.
    fn e_search_work(&self) -> f64 {
        let a = self.channel.x_size();
        let cells = (a * a * self.channel.y_size()) as f64;
        let s = self.channel.s_size() as f64;
        let per_cell = (self.n() as f64 / cells).ceil();
        // C(per_cell + s - 1, s - 1) splits of one cell.
        let mut splits = 1.0;
        for i in 1..s as usize {
            splits *= (per_cell + i as f64) / i as f64;
        }
        splits.powf(cells.min(self.n() as f64)) * (self.m() as f64) * self.state_types.len() as f64
    }

    fn check_word(&self, y: &[usize]) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "output word of length {}, blocklength {}",
                y.len(),
                self.n()
            )));
        }
        if let Some(&b) = y.iter().find(|&&b| b >= self.channel.y_size()) {
            return Err(Error::IndexOutOfRange(format!("output letter {b}")));
        }
        Ok(())
    }

    /// The identification test: accepts iff `y` lies in `D(m') \ E(m')`.
    pub fn identify(&self, m_prime: usize, y: &[usize]) -> Result<bool> {
        self.check_message(m_prime)?;
        self.check_word(y)?;
        Ok(self.accepts(m_prime, y))
    }

    pub fn in_d_set(&self, m_prime: usize, y: &[usize]) -> Result<bool> {
        self.check_message(m_prime)?;
        self.check_word(y)?;
        Ok(self.d_test(&self.xy_counts(m_prime, y)))
    }

    pub fn in_e_set(&self, m_prime: usize, y: &[usize]) -> Result<bool> {
        self.check_message(m_prime)?;
        self.check_word(y)?;
        Ok(self.e_test(m_prime, y, &self.xy_counts(m_prime, y)))
    }

    fn check_message(&self, m: usize) -> Result<()> {
        if m >= self.m() {
            return Err(Error::IndexOutOfRange(format!("message {m} of {}", self.m())));
        }
        Ok(())
    }

    pub(crate) fn accepts(&self, m_prime: usize, y: &[usize]) -> bool {
        let xy = self.xy_counts(m_prime, y);
        self.d_test(&xy) && !self.e_test(m_prime, y, &xy)
    }

    fn xy_counts(&self, m: usize, y: &[usize]) -> Vec<usize> {
        let ny = self.channel.y_size();
        let mut c = vec![0; self.channel.x_size() * ny];
        for (&x, &b) in self.codebook[m].iter().zip(y) {
            c[x * ny + b] += 1;
        }
        c
    }

    fn d_test(&self, xy: &[usize]) -> bool {
        let n = self.n();
        self.views
            .iter()
            .any(|v| counts_within_band(xy, n, &v.cell, self.params.eps))
    }

    fn e_test(&self, m_prime: usize, y: &[usize], xy: &[usize]) -> bool {
        let n = self.n();
        let (a, ny) = (self.channel.x_size(), self.channel.y_size());
        for (vi, view) in self.views.iter().enumerate() {
            // Exact conditional type of y given the tested codeword; this
            // does not depend on the competitor.
            if !counts_within_band(xy, n, &view.cell, 0.0) {
                continue;
            }
            for (mt, other) in self.codebook.iter().enumerate() {
                if mt == m_prime {
                    continue;
                }
                let mut xpy = vec![0; a * ny];
                let mut cells = vec![0usize; a * a * ny];
                for ((&x, &xp), &b) in self.codebook[m_prime].iter().zip(other).zip(y) {
                    xpy[xp * ny + b] += 1;
                    cells[(x * a + xp) * ny + b] += 1;
                }
                if !counts_within_band(&xpy, n, &view.cell, 0.0) {
                    continue;
                }
                if self.has_admissible_split(&cells, vi) {
                    return true;
                }
            }
        }
        false
    }

    /// Searches splits `N(x, x', s, y)` of the cell counts `N(x, x', y)` whose
    /// state marginal matches the state type and whose joint type has
    /// `I(X; Y | X' S) <= delta`.
    fn has_admissible_split(&self, cells: &[usize], view: usize) -> bool {
        let ns = self.channel.s_size();
        let budget = self.views[view].counts.clone();
        let nonzero: Vec<usize> = (0..cells.len()).filter(|&c| cells[c] > 0).collect();
        let mut split = vec![0usize; cells.len() * ns];
        let mut remaining = budget;
        self.split_dfs(cells, &nonzero, 0, &mut split, &mut remaining)
    }

    fn split_dfs(
        &self,
        cells: &[usize],
        nonzero: &[usize],
        depth: usize,
        split: &mut [usize],
        remaining: &mut [usize],
    ) -> bool {
        let ns = self.channel.s_size();
        if depth == nonzero.len() {
            return remaining.iter().all(|&r| r == 0) && self.split_leakage(split) <= self.params.delta + 1e-12;
        }
        let c = nonzero[depth];
        let total = cells[c];
        // Enumerate compositions of `total` into `ns` parts within budget.
        let mut parts = vec![0usize; ns];
        self.compose(cells, nonzero, depth, c, total, 0, &mut parts, split, remaining)
    }

    #[allow(clippy::too_many_arguments)]
    fn compose(
        &self,
        cells: &[usize],
        nonzero: &[usize],
        depth: usize,
        c: usize,
        left: usize,
        s: usize,
        parts: &mut [usize],
        split: &mut [usize],
        remaining: &mut [usize],
    ) -> bool {
        let ns = parts.len();
        if s + 1 == ns {
            if left > remaining[s] {
                return false;
            }
            parts[s] = left;
            for (t, &v) in parts.iter().enumerate() {
                split[c * ns + t] = v;
                remaining[t] -= v;
            }
            let found = self.split_dfs(cells, nonzero, depth + 1, split, remaining);
            for (t, &v) in parts.iter().enumerate() {
                split[c * ns + t] = 0;
                remaining[t] += v;
            }
            return found;
        }
        for v in 0..=left.min(remaining[s]) {
            parts[s] = v;
            if self.compose(cells, nonzero, depth, c, left - v, s + 1, parts, split, remaining) {
                return true;
            }
        }
        false
    }

    /// `I(X; Y | X' S)` of a split laid out `((x * a + x') * ny + y) * ns + s`.
    fn split_leakage(&self, split: &[usize]) -> f64 {
        let (a, ny, ns) = (self.channel.x_size(), self.channel.y_size(), self.channel.s_size());
        let n = self.n() as f64;
        let mut xxps = vec![0usize; a * a * ns];
        let mut xpsy = vec![0usize; a * ns * ny];
        let mut xps = vec![0usize; a * ns];
        let mut i = 0.0;
        for x in 0..a {
            for xp in 0..a {
                for y in 0..ny {
                    for s in 0..ns {
                        let v = split[((x * a + xp) * ny + y) * ns + s];
                        xxps[(x * a + xp) * ns + s] += v;
                        xpsy[(xp * ns + s) * ny + y] += v;
                        xps[xp * ns + s] += v;
                    }
                }
            }
        }
        for x in 0..a {
            for xp in 0..a {
                for y in 0..ny {
                    for s in 0..ns {
                        let v = split[((x * a + xp) * ny + y) * ns + s];
                        if v == 0 {
                            continue;
                        }
                        let num = v as f64 * xps[xp * ns + s] as f64;
                        let den = xxps[(x * a + xp) * ns + s] as f64 * xpsy[(xp * ns + s) * ny + y] as f64;
                        i += v as f64 / n * (num / den).log2();
                    }
                }
            }
        }
        i.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::KMac;
    use crate::prob::Pmf;

    fn bsc_code(q: f64, codebook: Vec<Vec<usize>>, params: DecisionParams) -> DiCode {
        let w = StateChannel::from_dmc(&Dmc::bsc(q).unwrap());
        let n = codebook[0].len();
        let p = empirical_type(&codebook[0], 2).unwrap();
        DiCode::new(codebook, p, vec![TypeVector::new(vec![n]).unwrap()], w, params).unwrap()
    }

    #[test]
    fn single_codeword_noiseless_accepts_its_output() {
        let code = bsc_code(0.0, vec![vec![0, 1, 1, 0]], DecisionParams::default());
        assert!(code.identify(0, &[0, 1, 1, 0]).unwrap());
        assert!(!code.identify(0, &[1, 1, 1, 0]).unwrap());
    }

    #[test]
    fn flipped_majority_is_rejected() {
        let code = bsc_code(
            0.1,
            vec![vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1], vec![1, 1, 1, 1, 1, 0, 0, 0, 0, 0]],
            DecisionParams { eps: 1.0, delta: 0.05 },
        );
        let y: Vec<usize> = code.codeword(0).iter().map(|&x| 1 - x).collect();
        assert!(!code.in_d_set(0, &y).unwrap());
        assert!(!code.identify(0, &y).unwrap());
    }

    #[test]
    fn competitor_explaining_output_erases() {
        // Identical rows: a competitor whose joint type with y leaves Y
        // independent of the tested codeword explains y completely.
        let w = StateChannel::from_dmc(&Dmc::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap());
        let p = TypeVector::new(vec![4, 4]).unwrap();
        let code = DiCode::new(
            vec![vec![0, 0, 0, 0, 1, 1, 1, 1], vec![0, 0, 1, 1, 0, 0, 1, 1]],
            p,
            vec![TypeVector::new(vec![8]).unwrap()],
            w,
            DecisionParams { eps: 0.1, delta: 0.05 },
        )
        .unwrap();
        let y = [0, 1, 0, 1, 0, 1, 0, 1];
        assert!(code.in_d_set(0, &y).unwrap());
        assert!(code.in_e_set(0, &y).unwrap());
        assert!(!code.identify(0, &y).unwrap());
    }

    #[test]
    fn state_split_search_uses_state_budget() {
        let mac = KMac::mod2_adder(0.0).unwrap();
        let w = mac.state_channel(0).unwrap();
        let p = TypeVector::new(vec![2, 2]).unwrap();
        // State type (2, 2): the averaged channel is pure noise, so the
        // competitor explains y once the state is split appropriately.
        let code = DiCode::new(
            vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]],
            p,
            vec![TypeVector::new(vec![2, 2]).unwrap()],
            w,
            DecisionParams { eps: 0.1, delta: 0.0 },
        )
        .unwrap();
        let y = [0, 1, 1, 0];
        assert!(code.in_d_set(0, &y).unwrap());
        assert!(code.in_e_set(0, &y).unwrap());
        let _ = Pmf::uniform(2);
    }

    #[test]
    fn construction_rejects_bad_codebooks() {
        let w = StateChannel::from_dmc(&Dmc::bsc(0.1).unwrap());
        let p = TypeVector::new(vec![2, 2]).unwrap();
        let st = vec![TypeVector::new(vec![4]).unwrap()];
        let dp = DecisionParams::default();
        assert!(DiCode::new(vec![vec![0, 0, 1, 1], vec![0, 0, 1, 1]], p.clone(), st.clone(), w.clone(), dp).is_err());
        assert!(DiCode::new(vec![vec![0, 0, 0, 1]], p.clone(), st.clone(), w.clone(), dp).is_err());
        assert!(DiCode::new(vec![vec![0, 1, 1]], p.clone(), st.clone(), w.clone(), dp).is_err());
        assert!(DiCode::with_duplicates(vec![vec![0, 0, 1, 1], vec![0, 0, 1, 1]], p, st, w, dp).is_ok());
    }

    #[test]
    fn identify_checks_inputs() {
        let code = bsc_code(0.1, vec![vec![0, 1]], DecisionParams::default());
        assert!(code.identify(1, &[0, 1]).is_err());
        assert!(code.identify(0, &[0]).is_err());
        assert!(code.identify(0, &[0, 2]).is_err());
    }
}
