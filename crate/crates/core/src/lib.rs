//! Acoustic unit discovery from discrete speech codes.
//!
//! Utterances of vector-quantised codes are explained by a small inventory of
//! latent units, either with bag-of-codes LDA or with LDA plus a first-order
//! Markov chain between consecutive units. Both models are cluster graphs
//! calibrated by loopy belief update; decoded units are scored with boundary
//! detection and cluster quality metrics.
//!
//! ```
//! use mclda::{sample_corpus, train, ModelConfig, ModelKind};
//!
//! let config = ModelConfig { num_units: 3, vocab_size: 12, max_iters: 50, ..ModelConfig::default() };
//! let (corpus, _truth) = sample_corpus(&config, 4, 20, 1).unwrap();
//! let trained = train(&corpus, &config, ModelKind::McLda, 0).unwrap();
//! assert_eq!(trained.units[0].units.len(), 20);
//! ```

pub mod cli;
pub mod config;
pub mod corpus;
pub mod decode;
pub mod error;
pub mod eval;
pub mod factor;
pub mod graph;
pub mod inference;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use config::{ModelConfig, ModelKind, Prior};
pub use corpus::{Corpus, Utterance};
pub use decode::{argmax_units, segments_from_units, unit_posteriors, Segment, UnitPosteriors, UnitSequence};
pub use error::{Error, Result};
pub use eval::{evaluate, Alignment, AlignmentEntry, EvalReport};
pub use factor::{CategoricalBelief, DirichletBelief, DirichletIncrement, MessageMode, PairwiseCategoricalBelief};
pub use graph::{build_lda_graph, build_mc_lda_graph, transition_factor, ClusterGraph};
pub use inference::{calibrate, pass_message, schedule_for, ConvergenceTrace, Schedule};
pub use pipeline::{train, Trained};
pub use report::RunReport;
pub use synth::{sample_corpus, SynthTruth};
