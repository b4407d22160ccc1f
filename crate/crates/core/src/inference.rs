//! Loopy belief update over a [`ClusterGraph`].
//!
//! Each directed pass marginalises the source cluster belief onto the sepset,
//! replaces the old sepset belief in the target cluster, and reports
//! `KL(new sepset || old sepset)`. Cluster beliefs are never materialised: a
//! cluster belief is its internal factor times its stored incoming messages,
//! so the new message along `a -> b` is the marginal of `a` with the message
//! from `b` left out, which is the same quantity as `ψ'/μ_{b→a}`.
//!
//! A sweep runs every utterance's forward and backward pass. Utterances are
//! independent apart from the shared φ clusters; during a sweep each utterance
//! sees the φ pseudo-counts as they were at the start of the sweep plus its own
//! changes, and the φ clusters are rebuilt from all increments in utterance
//! order at the end of the sweep. The result does not depend on the number of
//! worker threads.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::config::{ModelConfig, ModelKind};
use crate::error::{Error, Result};
use crate::factor::{
    aggregated_log_weight, beta_kl, categorical_kl_logs, dirichlet_kl, dirichlet_log_message, log_normalize_unchecked,
    Belief, CategoricalBelief, DirichletBelief, MessageMode,
};
use crate::graph::{ClusterGraph, DirectedEdge, EdgeKind, PhiState, UtteranceState};

/// Ordered message passes, one forward and one backward list per utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub kind: ModelKind,
    pub utterances: Vec<UtteranceSchedule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceSchedule {
    pub utt: usize,
    pub forward: Vec<DirectedEdge>,
    pub backward: Vec<DirectedEdge>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.utterances.iter().map(|u| u.forward.len() + u.backward.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &DirectedEdge> {
        self.utterances.iter().flat_map(|u| u.forward.iter().chain(&u.backward))
    }
}

/// Largest sepset KL of every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub max_kl: Vec<f64>,
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.max_kl.len()
    }

    pub fn final_max_kl(&self) -> f64 {
        self.max_kl.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Result of one belief update on explicit categorical beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefUpdate {
    pub sepset: CategoricalBelief,
    pub target: CategoricalBelief,
    pub kl: f64,
}

/// One Lauritzen-Spiegelhalter update over a categorical sepset.
///
/// `source_marginal` is the source cluster belief already summed onto the
/// sepset; `sepset` is the old sepset belief and `target` the target cluster
/// belief restricted to the sepset scope.
pub fn belief_update(
    source_marginal: &CategoricalBelief,
    sepset: &CategoricalBelief,
    target: &CategoricalBelief,
) -> Result<BeliefUpdate> {
    let new_sepset = source_marginal.clone();
    let target = target.multiply(&new_sepset)?.divide(sepset)?;
    let kl = new_sepset.kl_divergence(sepset)?;
    Ok(BeliefUpdate {
        sepset: new_sepset,
        target,
        kl,
    })
}

/// Forward/backward schedule for `kind`; the graph must have been built for it.
pub fn schedule_for(graph: &ClusterGraph, kind: ModelKind) -> Result<Schedule> {
    if graph.kind != kind {
        return Err(Error::ModelMismatch {
            graph: graph.kind.name(),
            requested: kind.name(),
        });
    }
    let k = graph.num_units;
    let utterances = graph
        .layouts
        .iter()
        .enumerate()
        .map(|(utt, layout)| {
            let theta = layout.theta_cluster;
            let tokens = &layout.tokens;
            let n = tokens.len();
            let mut forward = Vec::new();
            let mut backward = Vec::new();
            for (pos, t) in tokens.iter().enumerate() {
                forward.push(DirectedEdge::new(theta, t.unit_cluster));
                if let Some(tr) = t.transition_cluster {
                    forward.push(DirectedEdge::new(t.unit_cluster, tr));
                }
                if kind == ModelKind::McLda && pos + 1 < n {
                    forward.push(DirectedEdge::new(t.chain_cluster(), tokens[pos + 1].chain_cluster()));
                }
                forward.push(DirectedEdge::new(t.chain_cluster(), t.word_cluster));
                for unit in 0..k {
                    forward.push(DirectedEdge::new(t.word_cluster, graph.phi_cluster(unit)));
                }
            }
            for (pos, t) in tokens.iter().enumerate().rev() {
                for unit in 0..k {
                    backward.push(DirectedEdge::new(graph.phi_cluster(unit), t.word_cluster));
                }
                backward.push(DirectedEdge::new(t.word_cluster, t.chain_cluster()));
                if let Some(tr) = t.transition_cluster {
                    backward.push(DirectedEdge::new(tr, tokens[pos - 1].chain_cluster()));
                    backward.push(DirectedEdge::new(tr, t.unit_cluster));
                }
                backward.push(DirectedEdge::new(t.unit_cluster, theta));
            }
            UtteranceSchedule {
                utt,
                forward,
                backward,
            }
        })
        .collect();
    Ok(Schedule { kind, utterances })
}

/// Sends one message along `edge`, updating the target cluster immediately.
/// Returns the KL between the new and old sepset beliefs.
pub fn pass_message(graph: &mut ClusterGraph, edge: DirectedEdge) -> Result<f64> {
    let (utt, pass) = resolve(graph, edge)?;
    let mut states = std::mem::take(&mut graph.states);
    let mut phi_state = std::mem::replace(
        &mut graph.phi,
        PhiState {
            belief: Vec::new(),
            totals: Vec::new(),
        },
    );
    let kernel = Kernel::new(graph, utt);
    let mut phi = GlobalPhi {
        state: &mut phi_state,
        vocab_size: graph.vocab_size,
    };
    let kl = kernel.pass(&mut states[utt], &mut phi, pass);
    graph.states = states;
    graph.phi = phi_state;
    Ok(kl)
}

/// Runs sweeps of the schedule until the largest sepset KL of a sweep falls
/// below `config.tol` or `config.max_iters` sweeps have run.
///
/// Only `tol`, `max_iters` and `damping` are read from `config`; the model
/// itself is fixed when the graph is built.
pub fn calibrate(graph: &mut ClusterGraph, schedule: &Schedule, config: &ModelConfig) -> Result<ConvergenceTrace> {
    config.validate()?;
    if schedule.kind != graph.kind {
        return Err(Error::ModelMismatch {
            graph: graph.kind.name(),
            requested: schedule.kind.name(),
        });
    }
    graph.damping = config.damping;

    let mut plans: Vec<Vec<Pass>> = vec![Vec::new(); graph.layouts.len()];
    for us in &schedule.utterances {
        for &edge in us.forward.iter().chain(&us.backward) {
            let (utt, pass) = resolve(graph, edge)?;
            if utt != us.utt {
                return Err(Error::NoSuchEdge {
                    from: edge.from,
                    to: edge.to,
                });
            }
            plans[utt].push(pass);
        }
    }

    let mut trace = ConvergenceTrace {
        max_kl: Vec::new(),
        converged: false,
    };
    for _ in 0..config.max_iters {
        let mut states = std::mem::take(&mut graph.states);
        let kl = {
            let g = &*graph;
            states
                .par_iter_mut()
                .zip(plans.par_iter())
                .enumerate()
                .map(|(utt, (state, plan))| {
                    let kernel = Kernel::new(g, utt);
                    state.recompute_theta_belief(kernel.alpha, kernel.k);
                    let mut phi = LocalPhi::new(&g.phi, kernel.vocab_size, kernel.k);
                    plan.iter()
                        .map(|&p| kernel.pass(state, &mut phi, p))
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max)
        };
        graph.states = states;
        graph.reduce_phi();
        trace.max_kl.push(kl);
        if kl < config.tol {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Marginal of each token's unit variable.
///
/// Base LDA reads the `Z|θ` cluster; the Markov chain graph reads the
/// transition cluster of each token, and the `Z|θ` cluster for the first.
pub fn unit_marginals(graph: &ClusterGraph, utt: usize) -> Vec<CategoricalBelief> {
    let kernel = Kernel::new(graph, utt);
    let state = &graph.states[utt];
    (0..graph.codes[utt].len())
        .map(|pos| {
            let mut lw = vec![0.0; kernel.k];
            kernel.unit_log_marginal(state, pos, &mut lw);
            CategoricalBelief::from_log_weights(lw).expect("unit marginal is normalisable")
        })
        .collect()
}

/// Sepset marginals of both endpoints of `edge`, each computed from that
/// endpoint's current incoming messages.
///
/// Unit sepsets give categorical beliefs and θ sepsets Dirichlet beliefs. A
/// word cluster only reads `φ_k` through the pseudo-count of its own code, so
/// φ sepsets are compared through the Beta aggregate over (code, rest).
pub fn sepset_marginals(graph: &ClusterGraph, edge: usize) -> Result<(Belief, Belief)> {
    let e = graph.edges.get(edge).ok_or(Error::NoSuchEdge { from: 0, to: 0 })?;
    let (_, forward) = resolve(graph, DirectedEdge::new(e.a, e.b))?;
    let (_, backward) = resolve(graph, DirectedEdge::new(e.b, e.a))?;
    let kernel = Kernel::new(graph, e.utt);
    let state = &graph.states[e.utt];
    let phi = ReadPhi {
        state: &graph.phi,
        vocab_size: graph.vocab_size,
    };
    let pos = e.pos;
    let side = |fresh: Pass, stored: Pass| -> Result<Belief> {
        let f = kernel.compute(state, &phi, fresh);
        Ok(match (f, kernel.stored(state, stored)) {
            (Message::Categorical(a), Message::Categorical(b)) => {
                let lw: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                Belief::Categorical(CategoricalBelief::from_log_weights(lw)?)
            }
            (Message::ThetaCavity(_), Message::ThetaIncrement(_)) => {
                Belief::Dirichlet(DirichletBelief::new(state.theta_belief.clone())?)
            }
            (Message::ThetaIncrement(r), Message::ThetaCavity(c)) => {
                Belief::Dirichlet(DirichletBelief::new(c.iter().zip(&r).map(|(c, r)| c + r).collect())?)
            }
            (Message::PhiCavity(_, _), Message::PhiIncrement(_)) => {
                let unit = match fresh {
                    Pass::PhiToWord(_, u) => u,
                    _ => unreachable!(),
                };
                let (count, total) = phi.get(unit, kernel.codes[pos]);
                Belief::Dirichlet(DirichletBelief::new(vec![count, total - count])?)
            }
            (Message::PhiIncrement(r), Message::PhiCavity(cw, ct)) => {
                Belief::Dirichlet(DirichletBelief::new(vec![cw + r, ct - cw])?)
            }
            _ => unreachable!("message kinds of one edge always pair up"),
        })
    };
    // endpoint a: fresh a -> b times stored b -> a
    let a_side = side(forward, backward)?;
    let b_side = side(backward, forward)?;
    Ok((a_side, b_side))
}

// ---------------------------------------------------------------------------
// Message kernels
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pass {
    ThetaToUnit(usize),
    UnitToTheta(usize),
    ChainToWord(usize),
    WordToChain(usize),
    UnitToTransition(usize),
    TransitionToUnit(usize),
    /// Chain node `pos - 1` to transition `pos`.
    ChainForward(usize),
    /// Transition `pos` to chain node `pos - 1`.
    ChainBackward(usize),
    WordToPhi(usize, usize),
    PhiToWord(usize, usize),
}

fn resolve(graph: &ClusterGraph, edge: DirectedEdge) -> Result<(usize, Pass)> {
    let id = graph.edge_between(edge.from, edge.to).ok_or(Error::NoSuchEdge {
        from: edge.from,
        to: edge.to,
    })?;
    let e = &graph.edges[id];
    let fwd = e.a == edge.from;
    let pos = e.pos;
    let pass = match (e.kind, fwd) {
        (EdgeKind::ThetaUnit, true) => Pass::ThetaToUnit(pos),
        (EdgeKind::ThetaUnit, false) => Pass::UnitToTheta(pos),
        (EdgeKind::UnitWord | EdgeKind::TransitionWord, true) => Pass::ChainToWord(pos),
        (EdgeKind::UnitWord | EdgeKind::TransitionWord, false) => Pass::WordToChain(pos),
        (EdgeKind::UnitTransition, true) => Pass::UnitToTransition(pos),
        (EdgeKind::UnitTransition, false) => Pass::TransitionToUnit(pos),
        (EdgeKind::Chain, true) => Pass::ChainForward(pos),
        (EdgeKind::Chain, false) => Pass::ChainBackward(pos),
        (EdgeKind::WordPhi { unit }, true) => Pass::WordToPhi(pos, unit),
        (EdgeKind::WordPhi { unit }, false) => Pass::PhiToWord(pos, unit),
    };
    Ok((e.utt, pass))
}

/// Read/write access to the φ pseudo-counts a word cluster can see.
trait PhiAccess {
    /// `(pseudo-count of code, total)` for `unit`.
    fn get(&self, unit: usize, code: usize) -> (f64, f64);
    fn add(&mut self, unit: usize, code: usize, delta: f64);
}

struct GlobalPhi<'a> {
    state: &'a mut PhiState,
    vocab_size: usize,
}

impl PhiAccess for GlobalPhi<'_> {
    fn get(&self, unit: usize, code: usize) -> (f64, f64) {
        (self.state.belief[unit * self.vocab_size + code], self.state.totals[unit])
    }

    fn add(&mut self, unit: usize, code: usize, delta: f64) {
        self.state.belief[unit * self.vocab_size + code] += delta;
        self.state.totals[unit] += delta;
    }
}

struct ReadPhi<'a> {
    state: &'a PhiState,
    vocab_size: usize,
}

impl PhiAccess for ReadPhi<'_> {
    fn get(&self, unit: usize, code: usize) -> (f64, f64) {
        (self.state.belief[unit * self.vocab_size + code], self.state.totals[unit])
    }

    fn add(&mut self, _unit: usize, _code: usize, _delta: f64) {
        unreachable!("read-only φ view")
    }
}

/// Sweep-start φ snapshot plus one utterance's own changes.
struct LocalPhi<'a> {
    snapshot: &'a PhiState,
    vocab_size: usize,
    k: usize,
    delta: HashMap<usize, Vec<f64>>,
    total_delta: Vec<f64>,
}

impl<'a> LocalPhi<'a> {
    fn new(snapshot: &'a PhiState, vocab_size: usize, k: usize) -> Self {
        LocalPhi {
            snapshot,
            vocab_size,
            k,
            delta: HashMap::new(),
            total_delta: vec![0.0; k],
        }
    }
}

impl PhiAccess for LocalPhi<'_> {
    fn get(&self, unit: usize, code: usize) -> (f64, f64) {
        let base = self.snapshot.belief[unit * self.vocab_size + code];
        let d = self.delta.get(&code).map_or(0.0, |d| d[unit]);
        (base + d, self.snapshot.totals[unit] + self.total_delta[unit])
    }

    fn add(&mut self, unit: usize, code: usize, delta: f64) {
        let k = self.k;
        self.delta.entry(code).or_insert_with(|| vec![0.0; k])[unit] += delta;
        self.total_delta[unit] += delta;
    }
}

/// A message value in the form it is stored.
#[derive(Debug, Clone, PartialEq)]
enum Message {
    Categorical(Vec<f64>),
    ThetaCavity(Vec<f64>),
    ThetaIncrement(Vec<f64>),
    PhiCavity(f64, f64),
    PhiIncrement(f64),
}

struct Kernel<'a> {
    k: usize,
    vocab_size: usize,
    kind: ModelKind,
    mode: MessageMode,
    damping: f64,
    alpha: &'a [f64],
    beta: &'a [f64],
    transition: Option<&'a [f64]>,
    codes: &'a [usize],
}

impl<'a> Kernel<'a> {
    fn new(graph: &'a ClusterGraph, utt: usize) -> Self {
        Kernel {
            k: graph.num_units,
            vocab_size: graph.vocab_size,
            kind: graph.kind,
            mode: graph.mode,
            damping: graph.damping,
            alpha: &graph.alpha,
            beta: &graph.beta,
            transition: graph.transition.as_ref().map(|t| t.table()),
            codes: &graph.codes[utt],
        }
    }

    fn n(&self) -> usize {
        self.codes.len()
    }

    fn slot(&self, pos: usize) -> std::ops::Range<usize> {
        pos * self.k..(pos + 1) * self.k
    }

    fn has_chain(&self) -> bool {
        self.kind == ModelKind::McLda
    }

    fn theta_log_message(&self, s: &UtteranceState, pos: usize, out: &mut [f64]) {
        dirichlet_log_message(&s.theta_cavity[self.slot(pos)], self.mode, out);
    }

    fn evidence(&self, s: &UtteranceState, pos: usize, out: &mut [f64]) {
        for (unit, o) in out.iter_mut().enumerate() {
            let i = pos * self.k + unit;
            *o = aggregated_log_weight(s.phi_cavity[2 * i], s.phi_cavity[2 * i + 1], self.mode);
        }
    }

    fn add(&self, out: &mut [f64], src: &[f64]) {
        for (o, x) in out.iter_mut().zip(src) {
            *o += x;
        }
    }

    /// `out[z] = ln sum_{z'} T(z', z) exp(incoming[z'])`.
    fn through_transition_forward(&self, incoming: &[f64], out: &mut [f64]) {
        let t = self.transition.expect("chain graph has a transition factor");
        let k = self.k;
        let max = incoming.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = incoming.iter().map(|x| (x - max).exp()).collect();
        for (z, o) in out.iter_mut().enumerate() {
            let s: f64 = (0..k).map(|zp| t[zp * k + z] * w[zp]).sum();
            *o = s.ln() + max;
        }
    }

    /// `out[z'] = ln sum_z T(z', z) exp(incoming[z])`.
    fn through_transition_backward(&self, incoming: &[f64], out: &mut [f64]) {
        let t = self.transition.expect("chain graph has a transition factor");
        let k = self.k;
        let max = incoming.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = incoming.iter().map(|x| (x - max).exp()).collect();
        for (zp, o) in out.iter_mut().enumerate() {
            let s: f64 = (0..k).map(|z| t[zp * k + z] * w[z]).sum();
            *o = s.ln() + max;
        }
    }

    /// Log belief over `Z_pos` of the chain node at `pos`, leaving out the
    /// messages the caller excludes.
    fn chain_node(&self, s: &UtteranceState, pos: usize, with_word: bool, with_next: bool, out: &mut [f64]) {
        let r = self.slot(pos);
        if pos == 0 || !self.has_chain() {
            self.theta_log_message(s, pos, out);
        } else {
            self.through_transition_forward(&s.fwd[r.clone()], out);
            self.add(out, &s.prior_in[r.clone()]);
        }
        if with_word {
            self.add(out, &s.up[r]);
        }
        if with_next && self.has_chain() && pos + 1 < self.n() {
            self.add(out, &s.bwd[self.slot(pos + 1)]);
        }
    }

    fn unit_log_marginal(&self, s: &UtteranceState, pos: usize, out: &mut [f64]) {
        self.chain_node(s, pos, true, true, out);
    }

    /// Responsibilities of the word cluster at `pos`.
    fn word_responsibilities(&self, s: &UtteranceState, pos: usize) -> Vec<f64> {
        let mut lw = vec![0.0; self.k];
        self.evidence(s, pos, &mut lw);
        self.add(&mut lw, &s.down[self.slot(pos)]);
        log_normalize_unchecked(&mut lw);
        lw.into_iter().map(f64::exp).collect()
    }

    /// Fresh, undamped message for `pass`.
    fn compute(&self, s: &UtteranceState, phi: &dyn PhiAccess, pass: Pass) -> Message {
        let k = self.k;
        let mut out = vec![0.0; k];
        match pass {
            Pass::ThetaToUnit(pos) => {
                let r = &s.theta_inc[self.slot(pos)];
                Message::ThetaCavity(
                    (0..k)
                        .map(|i| (s.theta_belief[i] - r[i]).max(self.alpha[i]))
                        .collect(),
                )
            }
            Pass::UnitToTheta(pos) => {
                self.theta_log_message(s, pos, &mut out);
                if self.has_chain() && pos > 0 {
                    self.add(&mut out, &s.prior_out[self.slot(pos)]);
                } else {
                    self.add(&mut out, &s.up[self.slot(pos)]);
                    if self.has_chain() && pos + 1 < self.n() {
                        self.add(&mut out, &s.bwd[self.slot(pos + 1)]);
                    }
                }
                log_normalize_unchecked(&mut out);
                Message::ThetaIncrement(out.into_iter().map(f64::exp).collect())
            }
            Pass::ChainToWord(pos) => {
                self.chain_node(s, pos, false, true, &mut out);
                Message::Categorical(normalized(out))
            }
            Pass::WordToChain(pos) => {
                self.evidence(s, pos, &mut out);
                Message::Categorical(normalized(out))
            }
            Pass::UnitToTransition(pos) => {
                self.theta_log_message(s, pos, &mut out);
                Message::Categorical(normalized(out))
            }
            Pass::TransitionToUnit(pos) => {
                let r = self.slot(pos);
                self.through_transition_forward(&s.fwd[r.clone()], &mut out);
                self.add(&mut out, &s.up[r]);
                if pos + 1 < self.n() {
                    self.add(&mut out, &s.bwd[self.slot(pos + 1)]);
                }
                Message::Categorical(normalized(out))
            }
            Pass::ChainForward(pos) => {
                self.chain_node(s, pos - 1, true, false, &mut out);
                Message::Categorical(normalized(out))
            }
            Pass::ChainBackward(pos) => {
                let r = self.slot(pos);
                let mut inner: Vec<f64> = s.prior_in[r.clone()].to_vec();
                self.add(&mut inner, &s.up[r]);
                if pos + 1 < self.n() {
                    self.add(&mut inner, &s.bwd[self.slot(pos + 1)]);
                }
                self.through_transition_backward(&inner, &mut out);
                Message::Categorical(normalized(out))
            }
            Pass::WordToPhi(pos, unit) => Message::PhiIncrement(self.word_responsibilities(s, pos)[unit]),
            Pass::PhiToWord(pos, unit) => {
                let code = self.codes[pos];
                let r = s.word_inc[pos * k + unit];
                let (count, total) = phi.get(unit, code);
                let prior = self.beta[unit * self.vocab_size + code];
                Message::PhiCavity((count - r).max(prior), total - r)
            }
        }
    }

    /// The message currently stored for `pass`.
    fn stored(&self, s: &UtteranceState, pass: Pass) -> Message {
        let k = self.k;
        let cat = |v: &[f64], pos: usize| Message::Categorical(v[pos * k..(pos + 1) * k].to_vec());
        match pass {
            Pass::ThetaToUnit(pos) => Message::ThetaCavity(s.theta_cavity[self.slot(pos)].to_vec()),
            Pass::UnitToTheta(pos) => Message::ThetaIncrement(s.theta_inc[self.slot(pos)].to_vec()),
            Pass::ChainToWord(pos) => cat(&s.down, pos),
            Pass::WordToChain(pos) => cat(&s.up, pos),
            Pass::UnitToTransition(pos) => cat(&s.prior_in, pos),
            Pass::TransitionToUnit(pos) => cat(&s.prior_out, pos),
            Pass::ChainForward(pos) => cat(&s.fwd, pos),
            Pass::ChainBackward(pos) => cat(&s.bwd, pos),
            Pass::WordToPhi(pos, unit) => Message::PhiIncrement(s.word_inc[pos * k + unit]),
            Pass::PhiToWord(pos, unit) => {
                let i = pos * k + unit;
                Message::PhiCavity(s.phi_cavity[2 * i], s.phi_cavity[2 * i + 1])
            }
        }
    }

    /// Beta-aggregated φ sepset KL; a one-code vocabulary has nothing to learn.
    fn phi_kl(&self, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
        if self.vocab_size == 1 {
            0.0
        } else {
            beta_kl(a1, b1, a2, b2)
        }
    }

    fn reverse(pass: Pass) -> Pass {
        match pass {
            Pass::ThetaToUnit(p) => Pass::UnitToTheta(p),
            Pass::UnitToTheta(p) => Pass::ThetaToUnit(p),
            Pass::ChainToWord(p) => Pass::WordToChain(p),
            Pass::WordToChain(p) => Pass::ChainToWord(p),
            Pass::UnitToTransition(p) => Pass::TransitionToUnit(p),
            Pass::TransitionToUnit(p) => Pass::UnitToTransition(p),
            Pass::ChainForward(p) => Pass::ChainBackward(p),
            Pass::ChainBackward(p) => Pass::ChainForward(p),
            Pass::WordToPhi(p, u) => Pass::PhiToWord(p, u),
            Pass::PhiToWord(p, u) => Pass::WordToPhi(p, u),
        }
    }

    /// Computes, damps and stores the message for `pass`; returns the sepset KL.
    fn pass(&self, s: &mut UtteranceState, phi: &mut dyn PhiAccess, pass: Pass) -> f64 {
        let k = self.k;
        let d = self.damping;
        let fresh = self.compute(s, &*phi, pass);
        let old = self.stored(s, pass);
        let reverse = self.stored(s, Self::reverse(pass));
        match (fresh, old, reverse) {
            (Message::Categorical(new), Message::Categorical(old), Message::Categorical(rev)) => {
                let mut new = new;
                if d < 1.0 {
                    for (n, o) in new.iter_mut().zip(&old) {
                        *n = d * *n + (1.0 - d) * o;
                    }
                    log_normalize_unchecked(&mut new);
                }
                let old_sep = normalized(old.iter().zip(&rev).map(|(a, b)| a + b).collect());
                let new_sep = normalized(new.iter().zip(&rev).map(|(a, b)| a + b).collect());
                let kl = categorical_kl_logs(&new_sep, &old_sep);
                let target = match pass {
                    Pass::ChainToWord(p) => &mut s.down[p * k..(p + 1) * k],
                    Pass::WordToChain(p) => &mut s.up[p * k..(p + 1) * k],
                    Pass::UnitToTransition(p) => &mut s.prior_in[p * k..(p + 1) * k],
                    Pass::TransitionToUnit(p) => &mut s.prior_out[p * k..(p + 1) * k],
                    Pass::ChainForward(p) => &mut s.fwd[p * k..(p + 1) * k],
                    Pass::ChainBackward(p) => &mut s.bwd[p * k..(p + 1) * k],
                    _ => unreachable!(),
                };
                target.copy_from_slice(&new);
                kl
            }
            (Message::ThetaCavity(new), Message::ThetaCavity(old), Message::ThetaIncrement(r)) => {
                let new: Vec<f64> = new.iter().zip(&old).map(|(n, o)| d * n + (1.0 - d) * o).collect();
                let old_sep: Vec<f64> = old.iter().zip(&r).map(|(c, r)| c + r).collect();
                let new_sep: Vec<f64> = new.iter().zip(&r).map(|(c, r)| c + r).collect();
                let kl = dirichlet_kl(&new_sep, &old_sep);
                let pos = match pass {
                    Pass::ThetaToUnit(p) => p,
                    _ => unreachable!(),
                };
                s.theta_cavity[self.slot(pos)].copy_from_slice(&new);
                kl
            }
            (Message::ThetaIncrement(new), Message::ThetaIncrement(old), Message::ThetaCavity(cav)) => {
                let new: Vec<f64> = new.iter().zip(&old).map(|(n, o)| d * n + (1.0 - d) * o).collect();
                let old_sep: Vec<f64> = cav.iter().zip(&old).map(|(c, r)| c + r).collect();
                let new_sep: Vec<f64> = cav.iter().zip(&new).map(|(c, r)| c + r).collect();
                let kl = dirichlet_kl(&new_sep, &old_sep);
                let pos = match pass {
                    Pass::UnitToTheta(p) => p,
                    _ => unreachable!(),
                };
                for i in 0..k {
                    s.theta_belief[i] += new[i] - old[i];
                }
                s.theta_inc[self.slot(pos)].copy_from_slice(&new);
                kl
            }
            (Message::PhiIncrement(new), Message::PhiIncrement(old), Message::PhiCavity(cw, ct)) => {
                let new = d * new + (1.0 - d) * old;
                let kl = self.phi_kl(cw + new, ct - cw, cw + old, ct - cw);
                let (pos, unit) = match pass {
                    Pass::WordToPhi(p, u) => (p, u),
                    _ => unreachable!(),
                };
                phi.add(unit, self.codes[pos], new - old);
                s.word_inc[pos * k + unit] = new;
                kl
            }
            (Message::PhiCavity(nw, nt), Message::PhiCavity(ow, ot), Message::PhiIncrement(r)) => {
                let nw = d * nw + (1.0 - d) * ow;
                let nt = d * nt + (1.0 - d) * ot;
                let kl = self.phi_kl(nw + r, nt - nw, ow + r, ot - ow);
                let (pos, unit) = match pass {
                    Pass::PhiToWord(p, u) => (p, u),
                    _ => unreachable!(),
                };
                let i = pos * k + unit;
                s.phi_cavity[2 * i] = nw;
                s.phi_cavity[2 * i + 1] = nt;
                kl
            }
            _ => unreachable!("message kinds of one edge always pair up"),
        }
    }
}

fn normalized(mut lw: Vec<f64>) -> Vec<f64> {
    log_normalize_unchecked(&mut lw);
    lw
}
