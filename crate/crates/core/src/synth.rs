//! Synthetic corpora drawn from the Markov chain LDA generative process.
//!
//! Per utterance a unit mixture θ_m ~ Dir(α); per unit a code distribution
//! φ_k ~ Dir(β). The first unit is drawn from θ_m, every later unit from θ_m
//! reweighted by the transition factor (the previous unit gets weight `a`,
//! every other unit weight 1), and each code from φ of its unit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::config::ModelConfig;
use crate::corpus::{Corpus, Utterance};
use crate::error::{Error, Result};
use crate::eval::{Alignment, AlignmentEntry};

/// Ground truth behind a sampled corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub seed: u64,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub utterances: Vec<TruthUtterance>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthUtterance {
    pub id: String,
    pub units: Vec<usize>,
    /// Frame indices where the unit changes.
    pub boundaries: Vec<usize>,
}

impl TruthUtterance {
    pub fn boundary_times_ms(&self, frame_ms: u64) -> Vec<u64> {
        self.boundaries.iter().map(|&b| b as u64 * frame_ms).collect()
    }

    /// Alignment whose labels are the true unit ids.
    pub fn alignment(&self, frame_ms: u64) -> Alignment {
        let mut entries = Vec::new();
        let mut start = 0;
        for end in self.boundaries.iter().copied().chain(std::iter::once(self.units.len())) {
            entries.push(AlignmentEntry {
                start_ms: start as u64 * frame_ms,
                end_ms: end as u64 * frame_ms,
                label: self.units[start].to_string(),
            });
            start = end;
        }
        Alignment::new(self.id.clone(), entries).expect("runs of units form a valid alignment")
    }
}

impl SynthTruth {
    pub fn alignments(&self, frame_ms: u64) -> Vec<Alignment> {
        self.utterances.iter().map(|u| u.alignment(frame_ms)).collect()
    }
}

/// Draws `num_utterances` utterances of `length` codes each.
pub fn sample_corpus(
    config: &ModelConfig,
    num_utterances: usize,
    length: usize,
    seed: u64,
) -> Result<(Corpus, SynthTruth)> {
    config.validate()?;
    if num_utterances == 0 || length == 0 {
        return Err(Error::InvalidConfig("synthetic corpus needs M >= 1 and N >= 1".into()));
    }
    let k = config.num_units;
    let v = config.vocab_size;
    let alpha = config.alpha.vector(k)?;
    let beta = config.beta.matrix(k, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let theta: Vec<Vec<f64>> = (0..num_utterances).map(|_| sample_dirichlet(&alpha, &mut rng)).collect();
    let phi: Vec<Vec<f64>> = beta.chunks(v).map(|row| sample_dirichlet(row, &mut rng)).collect();

    let mut utterances = Vec::with_capacity(num_utterances);
    let mut truth = Vec::with_capacity(num_utterances);
    for (m, th) in theta.iter().enumerate() {
        let units = sample_units(th, config.self_transition, length, &mut rng);
        let codes = units.iter().map(|&z| sample_categorical(&phi[z], &mut rng)).collect();
        let boundaries = (1..length).filter(|&n| units[n] != units[n - 1]).collect();
        let id = format!("utt{m:05}");
        utterances.push(Utterance::new(id.clone(), codes));
        truth.push(TruthUtterance { id, units, boundaries });
    }
    Ok((
        Corpus::new(utterances, v)?,
        SynthTruth {
            seed,
            theta,
            phi,
            utterances: truth,
        },
    ))
}

/// Unit sequence of one utterance: first unit from `theta`, later units from
/// `theta` with the previous unit's weight multiplied by `self_transition`.
pub fn sample_units<R: Rng + ?Sized>(theta: &[f64], self_transition: f64, length: usize, rng: &mut R) -> Vec<usize> {
    let mut units = Vec::with_capacity(length);
    let mut weights = theta.to_vec();
    for n in 0..length {
        let z = if n == 0 {
            sample_categorical(theta, rng)
        } else {
            let prev = units[n - 1];
            weights.copy_from_slice(theta);
            weights[prev] *= self_transition;
            if weights.iter().all(|&w| w <= 0.0) {
                // θ puts all its mass on `prev` and a = 0: nothing else is possible
                prev
            } else {
                sample_categorical(&weights, rng)
            }
        };
        units.push(z);
    }
    units
}

/// Index drawn proportionally to non-negative `weights`.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Dirichlet draw that stays accurate for very small concentrations.
///
/// Gamma variates are drawn in log space, using
/// `Gamma(s) = Gamma(s + 1) * U^(1/s)` for `s < 1`, and normalised with a
/// log-sum-exp so that parameters like `1e-4` do not collapse to all zeros.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = params
        .iter()
        .map(|&s| {
            if s >= 1.0 {
                let g: f64 = Gamma::new(s, 1.0).expect("valid shape").sample(rng);
                g.ln()
            } else {
                let g: f64 = Gamma::new(s + 1.0, 1.0).expect("valid shape").sample(rng);
                let u: f64 = rng.random::<f64>();
                g.ln() + u.max(f64::MIN_POSITIVE).ln() / s
            }
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}
