//! Build, seed, calibrate and decode in one call.

use crate::config::{ModelConfig, ModelKind};
use crate::corpus::Corpus;
use crate::decode::{all_unit_posteriors, argmax_units, UnitPosteriors, UnitSequence};
use crate::error::Result;
use crate::graph::ClusterGraph;
use crate::inference::{calibrate, schedule_for, ConvergenceTrace};

#[derive(Debug, Clone)]
pub struct Trained {
    pub graph: ClusterGraph,
    pub trace: ConvergenceTrace,
    pub posteriors: Vec<UnitPosteriors>,
    pub units: Vec<UnitSequence>,
}

/// Calibrates a freshly built graph whose messages are seeded from `seed`.
pub fn train(corpus: &Corpus, config: &ModelConfig, kind: ModelKind, seed: u64) -> Result<Trained> {
    let mut graph = ClusterGraph::build(corpus, config, kind)?;
    graph.seed_messages(seed);
    let schedule = schedule_for(&graph, kind)?;
    let trace = calibrate(&mut graph, &schedule, config)?;
    let posteriors = all_unit_posteriors(&graph);
    let units = posteriors.iter().map(argmax_units).collect();
    Ok(Trained {
        graph,
        trace,
        posteriors,
        units,
    })
}
