//! Boundary detection scores and frame-level cluster quality.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::{segments_from_units, Segment, UnitSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentEntry {
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
}

/// Reference phone alignment of one utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    utterance_id: String,
    entries: Vec<AlignmentEntry>,
}

impl Alignment {
    /// Entries must be sorted, start at 0 and be contiguous with positive length.
    pub fn new(utterance_id: impl Into<String>, entries: Vec<AlignmentEntry>) -> Result<Self> {
        let utterance_id = utterance_id.into();
        let fail = |reason: String| Error::InvalidAlignment {
            utterance: utterance_id.clone(),
            reason,
        };
        if entries.is_empty() {
            return Err(fail("no entries".into()));
        }
        if entries[0].start_ms != 0 {
            return Err(fail(format!("first entry starts at {} ms, not 0", entries[0].start_ms)));
        }
        for e in &entries {
            if e.end_ms <= e.start_ms {
                return Err(fail(format!("entry [{}, {}) has end <= start", e.start_ms, e.end_ms)));
            }
        }
        for w in entries.windows(2) {
            if w[1].start_ms > w[0].end_ms {
                return Err(fail(format!("gap between {} and {} ms", w[0].end_ms, w[1].start_ms)));
            }
            if w[1].start_ms < w[0].end_ms {
                return Err(fail(format!("overlap between {} and {} ms", w[1].start_ms, w[0].end_ms)));
            }
        }
        Ok(Alignment { utterance_id, entries })
    }

    pub fn utterance_id(&self) -> &str {
        &self.utterance_id
    }

    pub fn entries(&self) -> &[AlignmentEntry] {
        &self.entries
    }

    pub fn end_ms(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.end_ms)
    }

    /// Internal phone boundaries in ms.
    pub fn boundaries(&self) -> Vec<u64> {
        self.entries.iter().skip(1).map(|e| e.start_ms).collect()
    }
}

/// All seven scores as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub r_value: f64,
    pub purity: f64,
    pub singleton_pct: f64,
    pub nmi: f64,
}

/// Boundary matching tallies; add them up across utterances before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoundaryCounts {
    pub hits: usize,
    pub predicted: usize,
    pub reference: usize,
}

impl std::ops::Add for BoundaryCounts {
    type Output = BoundaryCounts;
    fn add(self, o: BoundaryCounts) -> BoundaryCounts {
        BoundaryCounts {
            hits: self.hits + o.hits,
            predicted: self.predicted + o.predicted,
            reference: self.reference + o.reference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub r_value: f64,
}

impl BoundaryCounts {
    /// Percent scores. With no reference boundaries recall counts as 100, and
    /// with no predictions precision is 100 only if there was nothing to find.
    pub fn scores(&self) -> BoundaryScores {
        let p = match self.predicted {
            0 if self.reference == 0 => 1.0,
            0 => 0.0,
            n => self.hits as f64 / n as f64,
        };
        let r = match self.reference {
            0 => 1.0,
            n => self.hits as f64 / n as f64,
        };
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let os = self.predicted as f64 / self.reference.max(1) as f64 - if self.reference == 0 { 0.0 } else { 1.0 };
        BoundaryScores {
            precision: 100.0 * p,
            recall: 100.0 * r,
            f1: 100.0 * f1,
            r_value: 100.0 * r_value(r, os),
        }
    }
}

/// R-value from a recall fraction and an over-segmentation ratio.
pub fn r_value(recall: f64, over_segmentation: f64) -> f64 {
    let r1 = ((1.0 - recall).powi(2) + over_segmentation.powi(2)).sqrt();
    let r2 = (-over_segmentation + recall - 1.0) / std::f64::consts::SQRT_2;
    1.0 - (r1.abs() + r2.abs()) / 2.0
}

/// Greedy one-to-one matching, closest pairs first, of predicted to
/// reference boundary times.
pub fn match_boundaries(pred: &[u64], reference: &[u64], tolerance_ms: u64) -> BoundaryCounts {
    let mut pairs = Vec::new();
    for (i, &p) in pred.iter().enumerate() {
        for (j, &r) in reference.iter().enumerate() {
            let d = p.abs_diff(r);
            if d <= tolerance_ms {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_unstable();
    let mut used_p = vec![false; pred.len()];
    let mut used_r = vec![false; reference.len()];
    let mut hits = 0;
    for (_, i, j) in pairs {
        if !used_p[i] && !used_r[j] {
            used_p[i] = true;
            used_r[j] = true;
            hits += 1;
        }
    }
    BoundaryCounts {
        hits,
        predicted: pred.len(),
        reference: reference.len(),
    }
}

/// Internal boundaries of a segmentation.
pub fn segment_boundaries(segments: &[Segment]) -> Vec<u64> {
    segments.iter().skip(1).map(|s| s.start_ms).collect()
}

pub fn boundary_counts(pred: &[Segment], reference: &Alignment, tolerance_ms: u64) -> BoundaryCounts {
    match_boundaries(&segment_boundaries(pred), &reference.boundaries(), tolerance_ms)
}

pub fn boundary_metrics(pred: &[Segment], reference: &Alignment, tolerance_ms: u64) -> BoundaryScores {
    boundary_counts(pred, reference, tolerance_ms).scores()
}

/// Phone label at the midpoint of each frame.
pub fn frame_labels(alignment: &Alignment, n_frames: usize, frame_ms: u64) -> Result<Vec<String>> {
    let needed = n_frames as u64 * frame_ms;
    if alignment.end_ms() < needed {
        return Err(Error::InvalidAlignment {
            utterance: alignment.utterance_id.clone(),
            reason: format!("covers {} ms but {n_frames} frames need {needed} ms", alignment.end_ms()),
        });
    }
    let mut labels = Vec::with_capacity(n_frames);
    let mut e = 0;
    for n in 0..n_frames as u64 {
        // doubled to stay in integers
        let mid2 = (2 * n + 1) * frame_ms;
        while 2 * alignment.entries[e].end_ms <= mid2 {
            e += 1;
        }
        labels.push(alignment.entries[e].label.clone());
    }
    Ok(labels)
}

type Contingency = BTreeMap<(String, usize), usize>;

fn contingency<L: AsRef<str>>(pairs: &[(L, usize)]) -> Contingency {
    let mut table = Contingency::new();
    for (l, u) in pairs {
        *table.entry((l.as_ref().to_string(), *u)).or_default() += 1;
    }
    table
}

fn purity_of(table: &Contingency) -> f64 {
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0;
    for (&(_, u), &c) in table {
        let b = best.entry(u).or_default();
        *b = (*b).max(c);
        total += c;
    }
    100.0 * best.values().sum::<usize>() as f64 / total as f64
}

fn nmi_of(table: &Contingency) -> f64 {
    let mut by_label: BTreeMap<&str, usize> = BTreeMap::new();
    let mut by_unit: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0;
    for ((l, u), &c) in table {
        *by_label.entry(l).or_default() += c;
        *by_unit.entry(*u).or_default() += c;
        total += c;
    }
    let n = total as f64;
    let h: f64 = by_label.values().map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum();
    if h <= 0.0 {
        return 100.0;
    }
    let i: f64 = table
        .iter()
        .map(|((l, u), &c)| {
            let pxy = c as f64 / n;
            let px = by_label[l.as_str()] as f64 / n;
            let py = by_unit[u] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .sum();
    (100.0 * i / h).clamp(0.0, 100.0)
}

/// Share of frames whose unit's corpus-majority label is their own label.
pub fn purity<L: AsRef<str>>(frame_pairs: &[(L, usize)]) -> Result<f64> {
    if frame_pairs.is_empty() {
        return Err(Error::EmptyInput("frame pairs"));
    }
    Ok(purity_of(&contingency(frame_pairs)))
}

/// Mutual information of labels and units over label entropy, in percent.
pub fn nmi<L: AsRef<str>>(frame_pairs: &[(L, usize)]) -> Result<f64> {
    if frame_pairs.is_empty() {
        return Err(Error::EmptyInput("frame pairs"));
    }
    Ok(nmi_of(&contingency(frame_pairs)))
}

/// One-frame segments as a percentage of all frames.
pub fn singleton_pct(segments: &[Segment], total_frames: usize, frame_ms: u64) -> f64 {
    let singles = segments.iter().filter(|s| s.end_ms - s.start_ms == frame_ms).count();
    100.0 * singles as f64 / total_frames.max(1) as f64
}

struct Tally {
    boundaries: BoundaryCounts,
    singletons: usize,
    frames: usize,
    table: Contingency,
}

/// Scores decoded units against reference alignments over the whole corpus.
pub fn evaluate(
    units: &[UnitSequence],
    alignments: &BTreeMap<String, Alignment>,
    frame_ms: u64,
    tolerance_ms: u64,
) -> Result<EvalReport> {
    if units.is_empty() {
        return Err(Error::EmptyInput("unit sequences"));
    }
    let predicted: BTreeSet<&str> = units.iter().map(|u| u.utterance_id.as_str()).collect();
    let reference: BTreeSet<&str> = alignments.keys().map(String::as_str).collect();
    if predicted != reference || predicted.len() != units.len() {
        let missing: Vec<_> = reference.symmetric_difference(&predicted).take(5).collect();
        return Err(Error::UtteranceMismatch(format!(
            "units and alignments disagree (e.g. {missing:?})"
        )));
    }
    let tallies = units
        .par_iter()
        .map(|seq| {
            let ali = &alignments[&seq.utterance_id];
            let segs = segments_from_units(seq, frame_ms)?;
            let labels = frame_labels(ali, seq.units.len(), frame_ms)?;
            let pairs: Vec<(String, usize)> = labels.into_iter().zip(seq.units.iter().copied()).collect();
            Ok(Tally {
                boundaries: boundary_counts(&segs, ali, tolerance_ms),
                singletons: segs.iter().filter(|s| s.end_ms - s.start_ms == frame_ms).count(),
                frames: seq.units.len(),
                table: contingency(&pairs),
            })
        })
        .collect::<Result<Vec<Tally>>>()?;

    let mut boundaries = BoundaryCounts::default();
    let mut singletons = 0;
    let mut frames = 0;
    let mut table = Contingency::new();
    for t in tallies {
        boundaries = boundaries + t.boundaries;
        singletons += t.singletons;
        frames += t.frames;
        for (key, c) in t.table {
            *table.entry(key).or_default() += c;
        }
    }
    let b = boundaries.scores();
    Ok(EvalReport {
        precision: b.precision,
        recall: b.recall,
        f1: b.f1,
        r_value: b.r_value,
        purity: purity_of(&table),
        singleton_pct: 100.0 * singletons as f64 / frames as f64,
        nmi: nmi_of(&table),
    })
}
