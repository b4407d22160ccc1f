//! Cluster graphs for base LDA and Markov chain LDA.
//!
//! Clusters are laid out deterministically: every θ cluster, then every φ
//! cluster, then per utterance and per token the `Z|θ` cluster, the transition
//! cluster (Markov chain graph, tokens after the first) and the word cluster.
//! Edges follow the same token-major order.
//!
//! The observed code of each word cluster is folded in at build time: the word
//! cluster only ever reads the pseudo-count its units give to that one code.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ModelConfig, ModelKind};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::factor::{MessageMode, PairwiseCategoricalBelief};
use crate::synth::sample_dirichlet;

pub type ClusterId = usize;
pub type EdgeId = usize;

/// Random variable appearing in a cluster scope or sepset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    /// Unit mixture of utterance `utt`.
    Theta(usize),
    /// Code distribution of unit `k`.
    Phi(usize),
    /// Latent unit of token `pos` in utterance `utt`.
    Unit { utt: usize, pos: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClusterRole {
    Theta { utt: usize },
    Phi { unit: usize },
    /// `p(Z_n | θ_m)`.
    UnitGivenTheta { utt: usize, pos: usize },
    /// `Φ(Z_n, Z_{n-1})`, present for `pos >= 1` in the Markov chain graph.
    Transition { utt: usize, pos: usize },
    /// `p(W_n = code | Z_n, φ)`.
    Word { utt: usize, pos: usize, code: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub role: ClusterRole,
    pub scope: Vec<Variable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// θ_m -- Z_n|θ, sepset θ_m.
    ThetaUnit,
    /// Z_n|θ -- W_n, sepset Z_n (base graph, and the first token of the chain graph).
    UnitWord,
    /// Z_n|θ -- transition n, sepset Z_n.
    UnitTransition,
    /// Chain node n-1 -- transition n, sepset Z_{n-1}.
    Chain,
    /// Transition n -- W_n, sepset Z_n.
    TransitionWord,
    /// W_n -- φ_k, sepset φ_k.
    WordPhi { unit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: ClusterId,
    pub b: ClusterId,
    pub sepset: Variable,
    pub kind: EdgeKind,
    pub utt: usize,
    pub pos: usize,
}

/// A message direction along one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub from: ClusterId,
    pub to: ClusterId,
}

impl DirectedEdge {
    pub fn new(from: ClusterId, to: ClusterId) -> Self {
        DirectedEdge { from, to }
    }
}

/// Cluster and edge ids belonging to one token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenLayout {
    pub code: usize,
    pub unit_cluster: ClusterId,
    pub transition_cluster: Option<ClusterId>,
    pub word_cluster: ClusterId,
    pub theta_edge: EdgeId,
    pub unit_transition_edge: Option<EdgeId>,
    pub chain_edge: Option<EdgeId>,
    pub word_edge: EdgeId,
    pub first_phi_edge: EdgeId,
}

impl TokenLayout {
    /// Cluster holding this token's place in the chain: the transition
    /// cluster, or the `Z|θ` cluster when there is none.
    pub fn chain_cluster(&self) -> ClusterId {
        self.transition_cluster.unwrap_or(self.unit_cluster)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceLayout {
    pub id: String,
    pub theta_cluster: ClusterId,
    pub tokens: Vec<TokenLayout>,
}

/// Message storage for one utterance component.
///
/// Categorical messages are normalised log probabilities, `n * K` each,
/// indexed by the token they belong to:
/// `down[n]` chain node → W_n, `up[n]` W_n → chain node,
/// `prior_in[n]` Z_n|θ → transition n, `prior_out[n]` transition n → Z_n|θ,
/// `fwd[n]` chain node n-1 → transition n, `bwd[n]` transition n → chain node n-1.
/// Dirichlet-side messages are pseudo-counts: `theta_cavity[n]` θ → Z_n|θ,
/// `theta_inc[n]` Z_n|θ → θ, `word_inc[n]` W_n → φ_k (one soft count per unit),
/// and `phi_cavity[n]` φ_k → W_n restricted to `(count of the code, total)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct UtteranceState {
    pub theta_belief: Vec<f64>,
    pub theta_cavity: Vec<f64>,
    pub theta_inc: Vec<f64>,
    pub word_inc: Vec<f64>,
    pub phi_cavity: Vec<f64>,
    pub down: Vec<f64>,
    pub up: Vec<f64>,
    pub prior_in: Vec<f64>,
    pub prior_out: Vec<f64>,
    pub fwd: Vec<f64>,
    pub bwd: Vec<f64>,
}

/// Pseudo-counts of the shared φ clusters, row-major `K x V`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PhiState {
    pub belief: Vec<f64>,
    pub totals: Vec<f64>,
}

/// A cluster graph over a corpus together with its messages.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGraph {
    pub(crate) kind: ModelKind,
    pub(crate) num_units: usize,
    pub(crate) vocab_size: usize,
    pub(crate) mode: MessageMode,
    pub(crate) damping: f64,
    pub(crate) alpha: Vec<f64>,
    pub(crate) beta: Vec<f64>,
    pub(crate) transition: Option<PairwiseCategoricalBelief>,
    pub(crate) clusters: Vec<Cluster>,
    pub(crate) edges: Vec<Edge>,
    pub(crate) layouts: Vec<UtteranceLayout>,
    pub(crate) codes: Vec<Vec<usize>>,
    pub(crate) states: Vec<UtteranceState>,
    pub(crate) phi: PhiState,
}

/// Pairwise factor favouring repeated units.
///
/// Diagonal entries are `a / (K^2 + K(a - 1))`, off-diagonal entries
/// `1 / (K^2 + K(a - 1))`, so a unit is `a` times as likely to repeat as to
/// change to any particular other unit.
pub fn transition_factor(num_units: usize, self_transition: f64) -> Result<PairwiseCategoricalBelief> {
    if num_units == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    if !self_transition.is_finite() || self_transition < 0.0 {
        return Err(Error::InvalidConfig("a must be finite and >= 0".into()));
    }
    let k = num_units as f64;
    let denom = k * k + k * (self_transition - 1.0);
    if denom <= 0.0 {
        return Err(Error::InvalidConfig(format!("transition normaliser K^2 + K(a-1) = {denom} is not positive")));
    }
    let diag = self_transition / denom;
    let off = 1.0 / denom;
    let table = (0..num_units * num_units)
        .map(|i| if i / num_units == i % num_units { diag } else { off })
        .collect();
    Ok(PairwiseCategoricalBelief::from_normalized(num_units, num_units, table))
}

/// Base LDA cluster graph.
pub fn build_lda_graph(corpus: &Corpus, config: &ModelConfig) -> Result<ClusterGraph> {
    ClusterGraph::build(corpus, config, ModelKind::Lda)
}

/// Markov chain LDA cluster graph.
pub fn build_mc_lda_graph(corpus: &Corpus, config: &ModelConfig) -> Result<ClusterGraph> {
    ClusterGraph::build(corpus, config, ModelKind::McLda)
}

impl ClusterGraph {
    pub fn build(corpus: &Corpus, config: &ModelConfig, kind: ModelKind) -> Result<ClusterGraph> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let k = config.num_units;
        let v = config.vocab_size;
        for utt in corpus.utterances() {
            if let Some(&code) = utt.codes.iter().find(|&&c| c >= v) {
                return Err(Error::CodeOutOfRange {
                    utterance: utt.id.clone(),
                    code,
                    vocab_size: v,
                });
            }
        }
        let transition = match kind {
            ModelKind::Lda => None,
            ModelKind::McLda => Some(transition_factor(k, config.self_transition)?),
        };

        let m = corpus.len();
        let mut clusters = Vec::new();
        for utt in 0..m {
            clusters.push(Cluster {
                role: ClusterRole::Theta { utt },
                scope: vec![Variable::Theta(utt)],
            });
        }
        for unit in 0..k {
            clusters.push(Cluster {
                role: ClusterRole::Phi { unit },
                scope: vec![Variable::Phi(unit)],
            });
        }
        let phi_cluster = |unit: usize| m + unit;

        let mut edges = Vec::new();
        let mut layouts = Vec::with_capacity(m);
        for (utt, utterance) in corpus.utterances().iter().enumerate() {
            let theta_cluster = utt;
            let mut tokens: Vec<TokenLayout> = Vec::with_capacity(utterance.codes.len());
            for (pos, &code) in utterance.codes.iter().enumerate() {
                let unit_var = Variable::Unit { utt, pos };
                let unit_cluster = clusters.len();
                clusters.push(Cluster {
                    role: ClusterRole::UnitGivenTheta { utt, pos },
                    scope: vec![Variable::Theta(utt), unit_var],
                });
                let transition_cluster = if kind == ModelKind::McLda && pos > 0 {
                    clusters.push(Cluster {
                        role: ClusterRole::Transition { utt, pos },
                        scope: vec![Variable::Unit { utt, pos: pos - 1 }, unit_var],
                    });
                    Some(clusters.len() - 1)
                } else {
                    None
                };
                let word_cluster = clusters.len();
                let mut scope = vec![unit_var];
                scope.extend((0..k).map(Variable::Phi));
                clusters.push(Cluster {
                    role: ClusterRole::Word { utt, pos, code },
                    scope,
                });

                let mut push = |a, b, sepset, kind| {
                    edges.push(Edge {
                        a,
                        b,
                        sepset,
                        kind,
                        utt,
                        pos,
                    });
                    edges.len() - 1
                };
                let theta_edge = push(theta_cluster, unit_cluster, Variable::Theta(utt), EdgeKind::ThetaUnit);
                let (unit_transition_edge, chain_edge, word_edge) = match transition_cluster {
                    Some(t) => {
                        let prev = tokens[pos - 1].chain_cluster();
                        let ut = push(unit_cluster, t, unit_var, EdgeKind::UnitTransition);
                        let ch = push(prev, t, Variable::Unit { utt, pos: pos - 1 }, EdgeKind::Chain);
                        let tw = push(t, word_cluster, unit_var, EdgeKind::TransitionWord);
                        (Some(ut), Some(ch), tw)
                    }
                    None => (None, None, push(unit_cluster, word_cluster, unit_var, EdgeKind::UnitWord)),
                };
                let first_phi_edge = edges.len();
                for unit in 0..k {
                    edges.push(Edge {
                        a: word_cluster,
                        b: phi_cluster(unit),
                        sepset: Variable::Phi(unit),
                        kind: EdgeKind::WordPhi { unit },
                        utt,
                        pos,
                    });
                }
                tokens.push(TokenLayout {
                    code,
                    unit_cluster,
                    transition_cluster,
                    word_cluster,
                    theta_edge,
                    unit_transition_edge,
                    chain_edge,
                    word_edge,
                    first_phi_edge,
                });
            }
            layouts.push(UtteranceLayout {
                id: utterance.id.clone(),
                theta_cluster,
                tokens,
            });
        }

        let alpha = config.alpha.vector(k)?;
        let beta = config.beta.matrix(k, v)?;
        let mut graph = ClusterGraph {
            kind,
            num_units: k,
            vocab_size: v,
            mode: config.message_mode,
            damping: config.damping,
            alpha,
            beta,
            transition,
            clusters,
            edges,
            layouts,
            codes: corpus.utterances().iter().map(|u| u.codes.clone()).collect(),
            states: Vec::new(),
            phi: PhiState {
                belief: Vec::new(),
                totals: Vec::new(),
            },
        };
        graph.reset_messages();
        Ok(graph)
    }

    /// Puts every message back to its vacuous value: uniform categoricals,
    /// zero increments, and flat Dirichlet densities.
    pub fn reset_messages(&mut self) {
        let k = self.num_units;
        let uniform = -(k as f64).ln();
        self.states = self
            .codes
            .iter()
            .map(|codes| {
                let n = codes.len();
                let mut phi_cavity = Vec::with_capacity(2 * n * k);
                for _ in 0..n * k {
                    phi_cavity.push(1.0);
                    phi_cavity.push(self.vocab_size as f64);
                }
                UtteranceState {
                    theta_belief: self.alpha.clone(),
                    theta_cavity: vec![1.0; n * k],
                    theta_inc: vec![0.0; n * k],
                    word_inc: vec![0.0; n * k],
                    phi_cavity,
                    down: vec![uniform; n * k],
                    up: vec![uniform; n * k],
                    prior_in: vec![uniform; n * k],
                    prior_out: vec![uniform; n * k],
                    fwd: vec![uniform; n * k],
                    bwd: vec![uniform; n * k],
                }
            })
            .collect();
        self.reduce_phi();
    }

    /// Breaks label symmetry: every token starts with a random soft assignment
    /// drawn from a flat Dirichlet, absorbed into the θ and φ beliefs, and the
    /// θ → Z and φ → W messages are set to the cavities these counts imply.
    pub fn seed_messages(&mut self, seed: u64) {
        self.reset_messages();
        let k = self.num_units;
        let v = self.vocab_size;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ones = vec![1.0; k];
        for state in &mut self.states {
            let n = state.theta_inc.len() / k;
            for pos in 0..n {
                let r = sample_dirichlet(&ones, &mut rng);
                state.theta_inc[pos * k..(pos + 1) * k].copy_from_slice(&r);
                state.word_inc[pos * k..(pos + 1) * k].copy_from_slice(&r);
            }
            state.recompute_theta_belief(&self.alpha, k);
        }
        self.reduce_phi();
        for (state, codes) in self.states.iter_mut().zip(&self.codes) {
            for (pos, &code) in codes.iter().enumerate() {
                for unit in 0..k {
                    let i = pos * k + unit;
                    let r = state.word_inc[i];
                    state.theta_cavity[i] = (state.theta_belief[unit] - state.theta_inc[i]).max(self.alpha[unit]);
                    let prior = self.beta[unit * v + code];
                    state.phi_cavity[2 * i] = (self.phi.belief[unit * v + code] - r).max(prior);
                    state.phi_cavity[2 * i + 1] = self.phi.totals[unit] - r;
                }
            }
        }
    }

    /// Recomputes the φ pseudo-counts from the prior and every stored W → φ
    /// increment, in utterance order.
    pub(crate) fn reduce_phi(&mut self) {
        let k = self.num_units;
        let v = self.vocab_size;
        let mut belief = self.beta.clone();
        for (state, codes) in self.states.iter().zip(&self.codes) {
            for (pos, &code) in codes.iter().enumerate() {
                for unit in 0..k {
                    belief[unit * v + code] += state.word_inc[pos * k + unit];
                }
            }
        }
        let totals = belief.chunks(v).map(|row| row.iter().sum()).collect();
        self.phi = PhiState { belief, totals };
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn num_units(&self) -> usize {
        self.num_units
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn message_mode(&self) -> MessageMode {
        self.mode
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn utterances(&self) -> &[UtteranceLayout] {
        &self.layouts
    }

    pub fn transition(&self) -> Option<&PairwiseCategoricalBelief> {
        self.transition.as_ref()
    }

    pub fn utterance_index(&self, id: &str) -> Result<usize> {
        self.layouts
            .iter()
            .position(|l| l.id == id)
            .ok_or_else(|| Error::UnknownUtterance(id.to_string()))
    }

    pub fn phi_cluster(&self, unit: usize) -> ClusterId {
        self.layouts.len() + unit
    }

    /// Edge joining two clusters, in either orientation.
    pub fn edge_between(&self, x: ClusterId, y: ClusterId) -> Option<EdgeId> {
        let role = |c: ClusterId| self.clusters.get(c).map(|cl| cl.role);
        let (rx, ry) = (role(x)?, role(y)?);
        let (utt, pos) = match (rx, ry) {
            (ClusterRole::Phi { .. }, ClusterRole::Word { utt, pos, .. })
            | (ClusterRole::Theta { .. }, ClusterRole::UnitGivenTheta { utt, pos })
            | (ClusterRole::Transition { utt, pos }, _) => (utt, pos),
            (_, ClusterRole::Transition { utt, pos }) => (utt, pos),
            (ClusterRole::Word { utt, pos, .. }, _)
            | (ClusterRole::UnitGivenTheta { utt, pos }, _) => (utt, pos),
            _ => return None,
        };
        let token = self.layouts.get(utt)?.tokens.get(pos)?;
        let mut candidates = vec![token.theta_edge, token.word_edge];
        candidates.extend(token.unit_transition_edge);
        candidates.extend(token.chain_edge);
        if let Some(next) = self.layouts[utt].tokens.get(pos + 1) {
            candidates.extend(next.chain_edge);
        }
        candidates.extend(token.first_phi_edge..token.first_phi_edge + self.num_units);
        candidates.into_iter().find(|&e| {
            let edge = &self.edges[e];
            (edge.a == x && edge.b == y) || (edge.a == y && edge.b == x)
        })
    }

    /// Neighbouring clusters of `c` in edge order.
    pub fn neighbours(&self, c: ClusterId) -> Vec<ClusterId> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.a == c {
                    Some(e.b)
                } else if e.b == c {
                    Some(e.a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Current Dirichlet pseudo-counts of the θ cluster of utterance `utt`.
    pub fn theta_belief(&self, utt: usize) -> &[f64] {
        &self.states[utt].theta_belief
    }

    /// Current Dirichlet pseudo-counts of the φ cluster of `unit`.
    pub fn phi_belief(&self, unit: usize) -> &[f64] {
        &self.phi.belief[unit * self.vocab_size..(unit + 1) * self.vocab_size]
    }

    /// Human-readable cluster name, e.g. `Z3|theta1`.
    pub fn cluster_label(&self, c: ClusterId) -> String {
        match self.clusters[c].role {
            ClusterRole::Theta { utt } => format!("theta{utt}"),
            ClusterRole::Phi { unit } => format!("phi{unit}"),
            ClusterRole::UnitGivenTheta { utt, pos } => format!("Z{pos}|theta{utt}"),
            ClusterRole::Transition { utt, pos } => format!("Z{pos}|Z{}@{utt}", pos - 1),
            ClusterRole::Word { utt, pos, .. } => format!("W{pos}@{utt}"),
        }
    }
}

impl UtteranceState {
    pub(crate) fn recompute_theta_belief(&mut self, alpha: &[f64], k: usize) {
        self.theta_belief.copy_from_slice(alpha);
        for r in self.theta_inc.chunks(k) {
            for (b, x) in self.theta_belief.iter_mut().zip(r) {
                *b += x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Utterance;
    use proptest::prelude::*;

    fn corpus(lengths: &[usize], v: usize) -> Corpus {
        Corpus::new(
            lengths
                .iter()
                .enumerate()
                .map(|(i, &n)| Utterance::new(format!("u{i}"), (0..n).map(|j| (i + j) % v).collect()))
                .collect(),
            v,
        )
        .unwrap()
    }

    fn config(k: usize, v: usize) -> ModelConfig {
        ModelConfig {
            num_units: k,
            vocab_size: v,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn transition_factor_values() {
        let t = transition_factor(2, 10.0).unwrap();
        assert_eq!(t.get(0, 0), 10.0 / 22.0);
        assert_eq!(t.get(0, 1), 1.0 / 22.0);
        let t = transition_factor(50, 10.0).unwrap();
        assert_eq!(t.get(7, 7), 10.0 / 2950.0);
        assert_eq!(t.get(7, 8), 1.0 / 2950.0);
        for k in [1, 3, 8] {
            let t = transition_factor(k, 1.0).unwrap();
            assert!(t.table().iter().all(|&x| (x - 1.0 / (k * k) as f64).abs() < 1e-15));
        }
        assert!(transition_factor(1, 0.0).is_err());
        assert!(transition_factor(0, 1.0).is_err());
        assert!(transition_factor(2, -1.0).is_err());
        // a = 0 with K >= 2 forbids repeats but is still a valid table
        assert_eq!(transition_factor(2, 0.0).unwrap().get(1, 1), 0.0);
    }

    proptest! {
        #[test]
        fn transition_ratio_and_sum(k in 1usize..60, a in 0.01f64..1e4) {
            let t = transition_factor(k, a).unwrap();
            let sum: f64 = t.table().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            if k > 1 {
                let ratio = t.get(0, 0) / t.get(0, 1);
                prop_assert!((ratio - a).abs() <= 1e-12 * a.max(1.0));
            }
        }

        #[test]
        fn cluster_counts_follow_plate_structure(lengths in prop::collection::vec(1usize..6, 1..5), k in 1usize..5) {
            let c = corpus(&lengths, 7);
            let m = lengths.len();
            let tokens: usize = lengths.iter().sum();
            let transitions = tokens - m;
            let lda = build_lda_graph(&c, &config(k, 7)).unwrap();
            let mc = build_mc_lda_graph(&c, &config(k, 7)).unwrap();
            prop_assert_eq!(lda.clusters().len(), m + k + 2 * tokens);
            prop_assert_eq!(lda.edges().len(), 2 * tokens + tokens * k);
            prop_assert_eq!(mc.clusters().len(), m + k + 2 * tokens + transitions);
            prop_assert_eq!(mc.edges().len(), 2 * tokens + tokens * k + 2 * transitions);
            let count = mc.clusters().iter().filter(|c| matches!(c.role, ClusterRole::Transition { .. })).count();
            prop_assert_eq!(count, transitions);
        }
    }

    #[test]
    fn lda_topology_examples() {
        let g = build_lda_graph(&corpus(&[3, 2], 5), &config(4, 5)).unwrap();
        assert_eq!(g.clusters().len(), 16);
        assert_eq!(g.edges().len(), 30);
        let g = build_lda_graph(&corpus(&[1], 5), &config(1, 5)).unwrap();
        assert_eq!(g.clusters().len(), 4);
        assert_eq!(g.edges().len(), 3);
    }

    #[test]
    fn mc_topology_examples() {
        let g = build_mc_lda_graph(&corpus(&[3], 5), &config(2, 5)).unwrap();
        let transitions = |g: &ClusterGraph| {
            g.clusters()
                .iter()
                .filter(|c| matches!(c.role, ClusterRole::Transition { .. }))
                .count()
        };
        assert_eq!(transitions(&g), 2);
        let g = build_mc_lda_graph(&corpus(&[3, 2], 5), &config(2, 5)).unwrap();
        assert_eq!(transitions(&g), 3);

        let single = corpus(&[1], 5);
        let lda = build_lda_graph(&single, &config(3, 5)).unwrap();
        let mc = build_mc_lda_graph(&single, &config(3, 5)).unwrap();
        assert_eq!(lda.clusters(), mc.clusters());
        assert_eq!(lda.edges(), mc.edges());
    }

    #[test]
    fn word_of_first_token_attaches_to_unit_cluster() {
        let g = build_mc_lda_graph(&corpus(&[3], 5), &config(2, 5)).unwrap();
        let t = &g.utterances()[0].tokens;
        assert_eq!(g.edges()[t[0].word_edge].a, t[0].unit_cluster);
        assert_eq!(g.edges()[t[1].word_edge].a, t[1].transition_cluster.unwrap());
        // the first transition chains back to the first Z|theta cluster
        let chain = &g.edges()[t[1].chain_edge.unwrap()];
        assert_eq!(chain.a, t[0].unit_cluster);
        assert_eq!(chain.sepset, Variable::Unit { utt: 0, pos: 0 });
        let chain = &g.edges()[t[2].chain_edge.unwrap()];
        assert_eq!(chain.a, t[1].transition_cluster.unwrap());
    }

    #[test]
    fn sepsets_are_in_both_scopes() {
        for g in [
            build_lda_graph(&corpus(&[3, 2, 4], 6), &config(3, 6)).unwrap(),
            build_mc_lda_graph(&corpus(&[3, 2, 4], 6), &config(3, 6)).unwrap(),
        ] {
            for e in g.edges() {
                assert!(g.clusters()[e.a].scope.contains(&e.sepset), "{e:?}");
                assert!(g.clusters()[e.b].scope.contains(&e.sepset), "{e:?}");
                assert_eq!(g.edge_between(e.a, e.b).map(|id| &g.edges()[id]), Some(e));
                assert_eq!(g.edge_between(e.b, e.a).map(|id| &g.edges()[id]), Some(e));
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let c = corpus(&[4, 1, 3], 6);
        let a = build_mc_lda_graph(&c, &config(3, 6)).unwrap();
        let b = build_mc_lda_graph(&c, &config(3, 6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn messages_start_vacuous() {
        let g = build_mc_lda_graph(&corpus(&[3, 2], 5), &config(2, 5)).unwrap();
        let uniform = -(2f64).ln();
        for s in &g.states {
            assert!(s.down.iter().chain(&s.up).chain(&s.fwd).all(|&x| x == uniform));
            assert!(s.theta_inc.iter().chain(&s.word_inc).all(|&x| x == 0.0));
            assert!(s.theta_cavity.iter().all(|&x| x == 1.0));
        }
        assert_eq!(g.phi_belief(0), &[1e-4; 5]);
    }

    #[test]
    fn build_errors() {
        let c = Corpus::new(vec![Utterance::new("x", vec![0, 9])], 10).unwrap();
        assert!(matches!(build_lda_graph(&c, &config(2, 5)), Err(Error::CodeOutOfRange { code: 9, .. })));
        let bad = ModelConfig {
            num_units: 1,
            self_transition: 0.0,
            ..config(1, 10)
        };
        assert!(build_mc_lda_graph(&c, &bad).is_err());
        assert!(build_lda_graph(&c, &bad).is_ok());
    }

    #[test]
    fn seeded_messages_are_reproducible_and_consistent() {
        let c = corpus(&[4, 3], 5);
        let mut a = build_lda_graph(&c, &config(3, 5)).unwrap();
        let mut b = a.clone();
        a.seed_messages(11);
        b.seed_messages(11);
        assert_eq!(a, b);
        b.seed_messages(12);
        assert_ne!(a, b);
        let total: f64 = (0..3).map(|k| a.phi_belief(k).iter().sum::<f64>()).sum();
        assert!((total - (7.0 + 15.0 * 1e-4)).abs() < 1e-9);
    }
}
