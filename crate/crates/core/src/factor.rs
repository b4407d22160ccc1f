//! Belief algebra shared by every cluster in the graph.
//!
//! Two families are needed: categorical tables over unit labels (single and
//! pairwise) and Dirichlet pseudo-count vectors over the per-utterance unit
//! mixtures and the per-unit code distributions. Categorical arithmetic is done
//! in log space with a probability floor of [`PROB_FLOOR`]; every categorical
//! result is renormalised.
//!
//! Messages across a Dirichlet sepset are kept in conjugate form. In the
//! Dirichlet-to-categorical direction the message is a full pseudo-count
//! vector whose mean (or expected log) weights the unit labels. In the
//! categorical-to-Dirichlet direction the message is a [`DirichletIncrement`]:
//! the posterior responsibilities of one token added as soft counts, so that
//! dividing a sepset belief reduces to subtracting pseudo-counts.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

/// Smallest representable probability; anything below is treated as zero.
pub const PROB_FLOOR: f64 = 1e-300;

/// `ln(PROB_FLOOR)`.
pub const LN_FLOOR: f64 = -690.775_527_898_213_7;

/// How a Dirichlet belief is turned into a categorical message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MessageMode {
    /// Dirichlet mean, `params / sum(params)`.
    #[default]
    Mean,
    /// `exp(digamma(params_k) - digamma(sum(params)))`, renormalised.
    ExpectedLog,
}

impl std::fmt::Display for MessageMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MessageMode::Mean => f.write_str("mean"),
            MessageMode::ExpectedLog => f.write_str("expected-log"),
        }
    }
}

/// Normalised categorical distribution stored as log probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalBelief {
    log_probs: Vec<f64>,
}

impl CategoricalBelief {
    pub fn uniform(len: usize) -> Self {
        assert!(len >= 1, "categorical belief needs at least one label");
        let lp = -(len as f64).ln();
        CategoricalBelief {
            log_probs: vec![lp; len],
        }
    }

    /// Builds a belief from non-negative weights, normalising them.
    pub fn from_probs(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidBelief("empty categorical".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidBelief(format!("weight {bad} is not a finite non-negative number")));
        }
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect())
    }

    /// Builds a belief from unnormalised log weights; `-inf` entries are zero mass.
    pub fn from_log_weights(mut log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::InvalidBelief("empty categorical".into()));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::InvalidBelief("log weights contain NaN or +inf".into()));
        }
        log_normalize(&mut log_weights)?;
        Ok(CategoricalBelief {
            log_probs: log_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// Probabilities with floored entries reported as exactly zero.
    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|&lp| prob_of(lp)).collect()
    }

    pub fn prob(&self, index: usize) -> f64 {
        prob_of(self.log_probs[index])
    }

    /// Index of the most probable label; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.log_probs)
    }

    /// Normalised pointwise product.
    pub fn multiply(&self, other: &CategoricalBelief) -> Result<CategoricalBelief> {
        check_dims(self.len(), other.len())?;
        let mut out: Vec<f64> = self
            .log_probs
            .iter()
            .zip(&other.log_probs)
            .map(|(a, b)| a + b)
            .collect();
        log_normalize(&mut out)?;
        Ok(CategoricalBelief { log_probs: out })
    }

    /// Normalised pointwise quotient with `0 / 0 = 0`.
    pub fn divide(&self, denominator: &CategoricalBelief) -> Result<CategoricalBelief> {
        check_dims(self.len(), denominator.len())?;
        let mut out = Vec::with_capacity(self.len());
        for (index, (&n, &d)) in self.log_probs.iter().zip(&denominator.log_probs).enumerate() {
            if n <= LN_FLOOR {
                out.push(f64::NEG_INFINITY);
            } else if d <= LN_FLOOR {
                return Err(Error::DivisionByVacuous { index });
            } else {
                out.push(n - d);
            }
        }
        log_normalize(&mut out)?;
        Ok(CategoricalBelief { log_probs: out })
    }

    /// `KL(self || old)` in nats.
    pub fn kl_divergence(&self, old: &CategoricalBelief) -> Result<f64> {
        check_dims(self.len(), old.len())?;
        let mut kl = 0.0;
        for (index, (&p, &q)) in self.log_probs.iter().zip(&old.log_probs).enumerate() {
            if p <= LN_FLOOR {
                continue;
            }
            if q <= LN_FLOOR {
                return Err(Error::SupportViolation { index });
            }
            kl += p.exp() * (p - q);
        }
        Ok(kl.max(0.0))
    }
}

/// Which variable of a pairwise table survives marginalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Keep the row variable (sum across each row).
    First,
    /// Keep the column variable (sum down each column).
    Second,
}

impl TryFrom<usize> for Axis {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        match value {
            0 => Ok(Axis::First),
            1 => Ok(Axis::Second),
            other => Err(Error::InvalidAxis(other)),
        }
    }
}

/// Joint categorical table over two label variables, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseCategoricalBelief {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl PairwiseCategoricalBelief {
    /// Normalises a row-major table of non-negative weights.
    pub fn from_table(rows: usize, cols: usize, table: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidBelief("pairwise table needs non-zero dimensions".into()));
        }
        check_dims(rows * cols, table.len())?;
        if table.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidBelief("pairwise table has a negative or non-finite entry".into()));
        }
        let total: f64 = table.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProduct);
        }
        Ok(PairwiseCategoricalBelief {
            rows,
            cols,
            table: table.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Wraps a table that is already normalised analytically.
    pub(crate) fn from_normalized(rows: usize, cols: usize, table: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, table.len());
        PairwiseCategoricalBelief { rows, cols, table }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.table[row * self.cols + col]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn marginalize(&self, keep: Axis) -> Result<CategoricalBelief> {
        let sums: Vec<f64> = match keep {
            Axis::First => self.table.chunks(self.cols).map(|row| row.iter().sum()).collect(),
            Axis::Second => (0..self.cols)
                .map(|c| (0..self.rows).map(|r| self.get(r, c)).sum())
                .collect(),
        };
        CategoricalBelief::from_probs(&sums)
    }
}

/// Dirichlet belief in pseudo-count form.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBelief {
    params: Vec<f64>,
}

impl DirichletBelief {
    pub fn new(params: Vec<f64>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidBelief("empty Dirichlet".into()));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite() || **p <= 0.0) {
            return Err(Error::InvalidBelief(format!("Dirichlet parameter {bad} is not strictly positive")));
        }
        Ok(DirichletBelief { params })
    }

    pub fn symmetric(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn total(&self) -> f64 {
        self.params.iter().sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let total = self.total();
        self.params.iter().map(|p| p / total).collect()
    }

    /// `E[ln x_k] = digamma(params_k) - digamma(total)`.
    pub fn expected_log(&self) -> Vec<f64> {
        let dt = digamma(self.total());
        self.params.iter().map(|&p| digamma(p) - dt).collect()
    }

    pub fn to_categorical_message(&self, mode: MessageMode) -> CategoricalBelief {
        let mut lw = vec![0.0; self.dim()];
        dirichlet_log_message(&self.params, mode, &mut lw);
        CategoricalBelief::from_log_weights(lw).expect("Dirichlet message is always normalisable")
    }

    /// Adds soft counts.
    pub fn absorb(&self, increment: &DirichletIncrement) -> Result<DirichletBelief> {
        check_dims(self.dim(), increment.dim())?;
        Ok(DirichletBelief {
            params: self.params.iter().zip(&increment.delta).map(|(p, d)| p + d).collect(),
        })
    }

    /// Removes soft counts previously absorbed; the result must stay strictly positive.
    pub fn remove(&self, increment: &DirichletIncrement) -> Result<DirichletBelief> {
        check_dims(self.dim(), increment.dim())?;
        DirichletBelief::new(self.params.iter().zip(&increment.delta).map(|(p, d)| p - d).collect())
    }

    /// `KL(self || old)` in nats.
    pub fn kl_divergence(&self, old: &DirichletBelief) -> Result<f64> {
        check_dims(self.dim(), old.dim())?;
        Ok(dirichlet_kl(&self.params, &old.params))
    }
}

/// Soft-count contribution carried by a categorical-to-Dirichlet message.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletIncrement {
    delta: Vec<f64>,
}

impl DirichletIncrement {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = delta.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::InvalidBelief(format!("increment entry {bad} is negative or non-finite")));
        }
        Ok(DirichletIncrement { delta })
    }

    /// The vacuous message: no counts.
    pub fn zero(dim: usize) -> Self {
        DirichletIncrement { delta: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }
}

/// Conjugate projection of one token's responsibilities onto soft counts.
pub fn project_to_dirichlet_increment(responsibilities: &CategoricalBelief) -> DirichletIncrement {
    DirichletIncrement {
        delta: responsibilities.probs(),
    }
}

/// Either belief family, for code that handles sepsets generically.
#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    Categorical(CategoricalBelief),
    Dirichlet(DirichletBelief),
}

/// `KL(new || old)` for two beliefs of the same family.
pub fn kl_divergence(new: &Belief, old: &Belief) -> Result<f64> {
    match (new, old) {
        (Belief::Categorical(p), Belief::Categorical(q)) => p.kl_divergence(q),
        (Belief::Dirichlet(p), Belief::Dirichlet(q)) => p.kl_divergence(q),
        _ => Err(Error::FamilyMismatch),
    }
}

// ---------------------------------------------------------------------------
// Slice kernels used by the inference loop.
// ---------------------------------------------------------------------------

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[inline]
fn prob_of(lp: f64) -> f64 {
    if lp <= LN_FLOOR {
        0.0
    } else {
        lp.exp()
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Normalises log weights in place and clamps them to the floor.
///
/// Fails when every entry is at or below the floor.
pub(crate) fn log_normalize(lw: &mut [f64]) -> Result<()> {
    let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= LN_FLOOR {
        return Err(Error::ZeroProduct);
    }
    let sum: f64 = lw.iter().map(|w| (w - max).exp()).sum();
    let lse = max + sum.ln();
    for w in lw.iter_mut() {
        *w = (*w - lse).max(LN_FLOOR);
    }
    Ok(())
}

/// Normalises log weights that are known to have a finite maximum.
pub(crate) fn log_normalize_unchecked(lw: &mut [f64]) {
    if log_normalize(lw).is_err() {
        let uniform = -(lw.len() as f64).ln();
        lw.iter_mut().for_each(|w| *w = uniform);
    }
}

/// Writes unnormalised log weights of the categorical message implied by `params`.
pub(crate) fn dirichlet_log_message(params: &[f64], mode: MessageMode, out: &mut [f64]) {
    let total: f64 = params.iter().sum();
    match mode {
        MessageMode::Mean => {
            let lt = total.ln();
            for (o, p) in out.iter_mut().zip(params) {
                *o = p.ln() - lt;
            }
        }
        MessageMode::ExpectedLog => {
            let dt = digamma(total);
            for (o, p) in out.iter_mut().zip(params) {
                *o = digamma(*p) - dt;
            }
        }
    }
}

/// Log weight a unit gives to one code given the unit's Dirichlet over codes,
/// using only the code's pseudo-count and the total (aggregation property).
#[inline]
pub(crate) fn aggregated_log_weight(count: f64, total: f64, mode: MessageMode) -> f64 {
    match mode {
        MessageMode::Mean => count.ln() - total.ln(),
        MessageMode::ExpectedLog => digamma(count) - digamma(total),
    }
}

/// Categorical KL on floored log probabilities; never fails.
pub(crate) fn categorical_kl_logs(new: &[f64], old: &[f64]) -> f64 {
    let kl: f64 = new
        .iter()
        .zip(old)
        .filter(|(p, _)| **p > LN_FLOOR)
        .map(|(p, q)| p.exp() * (p - q))
        .sum();
    kl.max(0.0)
}

/// Closed-form `KL(Dir(a) || Dir(b))`.
pub(crate) fn dirichlet_kl(a: &[f64], b: &[f64]) -> f64 {
    let ta: f64 = a.iter().sum();
    let tb: f64 = b.iter().sum();
    let dta = digamma(ta);
    let mut kl = ln_gamma(ta) - ln_gamma(tb);
    for (&ai, &bi) in a.iter().zip(b) {
        if ai == bi {
            continue;
        }
        kl += ln_gamma(bi) - ln_gamma(ai) + (ai - bi) * (digamma(ai) - dta);
    }
    kl.max(0.0)
}

/// `KL(Beta(a1, b1) || Beta(a2, b2))`.
pub(crate) fn beta_kl(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    dirichlet_kl(&[a1, b1], &[a2, b2])
}
