use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::MessageMode;

/// Which cluster graph to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Bag-of-codes latent Dirichlet allocation.
    Lda,
    /// LDA with a first-order Markov chain between consecutive units.
    McLda,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::McLda => "mc-lda",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Dirichlet prior parameters.
///
/// In JSON a prior is a number (symmetric), a flat array (one value per
/// category, shared by all units for `beta`), or an array of arrays (one row
/// per unit; `beta` only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prior {
    Symmetric(f64),
    Vector(Vec<f64>),
    PerUnit(Vec<Vec<f64>>),
}

impl Prior {
    /// Parameters of a `dim`-dimensional Dirichlet.
    pub fn vector(&self, dim: usize) -> Result<Vec<f64>> {
        let params = match self {
            Prior::Symmetric(v) => vec![*v; dim],
            Prior::Vector(v) if v.len() == dim => v.clone(),
            Prior::Vector(v) => {
                return Err(Error::InvalidConfig(format!(
                    "prior has {} entries, expected {dim}",
                    v.len()
                )))
            }
            Prior::PerUnit(_) => {
                return Err(Error::InvalidConfig("per-unit prior given where a vector is expected".into()))
            }
        };
        check_positive(&params)?;
        Ok(params)
    }

    /// Row-major `units x dim` parameter matrix.
    pub fn matrix(&self, units: usize, dim: usize) -> Result<Vec<f64>> {
        match self {
            Prior::PerUnit(rows) => {
                if rows.len() != units || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::InvalidConfig(format!("per-unit prior must be {units} x {dim}")));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                check_positive(&flat)?;
                Ok(flat)
            }
            other => {
                let row = other.vector(dim)?;
                Ok(row.repeat(units))
            }
        }
    }
}

fn check_positive(params: &[f64]) -> Result<()> {
    if params.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::InvalidConfig("Dirichlet parameters must be finite and > 0".into()));
    }
    Ok(())
}

/// Model and inference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Number of discovered units, `K`.
    #[serde(rename = "k")]
    pub num_units: usize,
    /// Size of the code vocabulary, `V`.
    #[serde(rename = "v")]
    pub vocab_size: usize,
    /// Per-utterance Dirichlet prior over units.
    pub alpha: Prior,
    /// Per-unit Dirichlet prior over codes.
    pub beta: Prior,
    /// Self-transition weight of the Markov chain.
    #[serde(rename = "a")]
    pub self_transition: f64,
    /// Convergence threshold on the largest sepset KL of a sweep (nats).
    pub tol: f64,
    pub max_iters: usize,
    pub message_mode: MessageMode,
    /// Weight of the new message when mixing with the old one; 1 disables damping.
    pub damping: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_units: 50,
            vocab_size: 512,
            alpha: Prior::Symmetric(1.0),
            beta: Prior::Symmetric(1e-4),
            self_transition: 10.0,
            tol: 1e-5,
            max_iters: 200,
            message_mode: MessageMode::Mean,
            damping: 1.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_units == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.vocab_size == 0 {
            return Err(Error::InvalidConfig("V must be at least 1".into()));
        }
        self.alpha.vector(self.num_units)?;
        self.beta.matrix(self.num_units, self.vocab_size)?;
        if !self.self_transition.is_finite() || self.self_transition < 0.0 {
            return Err(Error::InvalidConfig("a must be finite and >= 0".into()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be > 0".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig("damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}
