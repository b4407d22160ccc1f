//! Trains Markov chain LDA on a synthetic corpus and prints soft unit posteriors.

use mclda::io::format_posteriors;
use mclda::{sample_corpus, train, unit_posteriors, ModelConfig, ModelKind};

fn main() -> mclda::Result<()> {
    let config = ModelConfig {
        num_units: 3,
        vocab_size: 12,
        ..ModelConfig::default()
    };
    let (corpus, truth) = sample_corpus(&config, 4, 15, 11)?;
    let trained = train(&corpus, &config, ModelKind::McLda, 0)?;
    let first = unit_posteriors(&trained.graph, &corpus.utterances()[0].id)?;
    println!("frame  truth  decoded  posterior");
    for (i, frame) in first.frames.iter().enumerate() {
        let p: Vec<String> = frame.probs().iter().map(|x| format!("{x:.3}")).collect();
        println!(
            "{i:>5}  {:>5}  {:>7}  [{}]",
            truth.utterances[0].units[i],
            trained.units[0].units[i],
            p.join(", ")
        );
    }
    println!("\nposteriors file format:");
    print!("{}", format_posteriors(&trained.posteriors[..1]).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
