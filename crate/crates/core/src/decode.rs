//! Frame-level unit posteriors, argmax unit sequences and run-length segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::CategoricalBelief;
use crate::graph::ClusterGraph;
use crate::inference::unit_marginals;

/// Per-frame unit posteriors of one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPosteriors {
    pub utterance_id: String,
    pub frames: Vec<CategoricalBelief>,
}

/// Decoded unit ids of one utterance, one per frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSequence {
    pub utterance_id: String,
    pub units: Vec<usize>,
}

/// A maximal run of one unit, `[start_ms, end_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start_ms: u64,
    pub end_ms: u64,
    pub unit: usize,
}

impl Segment {
    pub fn frames(&self, frame_ms: u64) -> u64 {
        (self.end_ms - self.start_ms) / frame_ms
    }
}

pub fn unit_posteriors(graph: &ClusterGraph, utterance_id: &str) -> Result<UnitPosteriors> {
    let utt = graph.utterance_index(utterance_id)?;
    Ok(UnitPosteriors {
        utterance_id: utterance_id.to_string(),
        frames: unit_marginals(graph, utt),
    })
}

/// Posteriors of every utterance in graph order.
pub fn all_unit_posteriors(graph: &ClusterGraph) -> Vec<UnitPosteriors> {
    graph
        .utterances()
        .iter()
        .enumerate()
        .map(|(utt, layout)| UnitPosteriors {
            utterance_id: layout.id.clone(),
            frames: unit_marginals(graph, utt),
        })
        .collect()
}

/// Per-frame argmax; ties go to the lowest unit index.
pub fn argmax_units(posteriors: &UnitPosteriors) -> UnitSequence {
    UnitSequence {
        utterance_id: posteriors.utterance_id.clone(),
        units: posteriors.frames.iter().map(CategoricalBelief::argmax).collect(),
    }
}

pub fn segments_from_units(units: &UnitSequence, frame_ms: u64) -> Result<Vec<Segment>> {
    if units.units.is_empty() {
        return Err(Error::EmptyInput("unit sequence"));
    }
    if frame_ms == 0 {
        return Err(Error::InvalidConfig("frame_ms must be > 0".into()));
    }
    let mut segments = Vec::new();
    let mut start = 0usize;
    for n in 1..=units.units.len() {
        if n == units.units.len() || units.units[n] != units.units[start] {
            segments.push(Segment {
                start_ms: start as u64 * frame_ms,
                end_ms: n as u64 * frame_ms,
                unit: units.units[start],
            });
            start = n;
        }
    }
    Ok(segments)
}

/// Inverse of [`segments_from_units`].
pub fn units_from_segments(segments: &[Segment], frame_ms: u64) -> Vec<usize> {
    segments
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.unit, s.frames(frame_ms) as usize))
        .collect()
}
