//! Builds a base LDA cluster graph, walks its message schedule and calibrates it.

use mclda::inference::unit_marginals;
use mclda::{build_lda_graph, calibrate, schedule_for, Corpus, ModelConfig, ModelKind, Prior, Utterance};

fn main() -> mclda::Result<()> {
    let corpus = Corpus::new(
        vec![
            Utterance::new("a", vec![0, 0, 1, 0]),
            Utterance::new("b", vec![2, 3, 3, 2]),
        ],
        4,
    )?;
    let config = ModelConfig {
        num_units: 2,
        vocab_size: 4,
        beta: Prior::PerUnit(vec![vec![1.0, 1.0, 0.1, 0.1], vec![0.1, 0.1, 1.0, 1.0]]),
        ..ModelConfig::default()
    };
    let mut graph = build_lda_graph(&corpus, &config)?;
    println!("{} clusters, {} edges", graph.clusters().len(), graph.edges().len());

    let schedule = schedule_for(&graph, ModelKind::Lda)?;
    let first = &schedule.utterances[0];
    println!("forward pass of {}:", graph.utterances()[0].id);
    for e in first.forward.iter().take(8) {
        println!("  {} -> {}", graph.cluster_label(e.from), graph.cluster_label(e.to));
    }

    let trace = calibrate(&mut graph, &schedule, &config)?;
    println!("converged={} after {} sweeps", trace.converged, trace.iterations());
    for (i, kl) in trace.max_kl.iter().enumerate() {
        println!("  sweep {:>2}  max KL {kl:.3e}", i + 1);
    }
    for (utt, layout) in graph.utterances().iter().enumerate() {
        let p: Vec<String> = unit_marginals(&graph, utt)
            .iter()
            .map(|b| format!("{:.3}", b.prob(0)))
            .collect();
        println!("{}: P(unit 0) per frame {}", layout.id, p.join(" "));
    }
    Ok(())
}
