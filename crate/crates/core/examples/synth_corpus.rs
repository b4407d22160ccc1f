//! Samples a small synthetic corpus and shows codes next to the hidden units.
//!
//! cargo run --example synth_corpus -- [seed]

use mclda::{sample_corpus, ModelConfig};

fn main() -> mclda::Result<()> {
    let seed = std::env::args().nth(1).map_or(7, |s| s.parse().expect("integer seed"));
    let config = ModelConfig {
        num_units: 4,
        vocab_size: 20,
        ..ModelConfig::default()
    };
    let (corpus, truth) = sample_corpus(&config, 3, 30, seed)?;
    for (utt, t) in corpus.utterances().iter().zip(&truth.utterances) {
        println!("{}", utt.id);
        println!("  codes {:?}", utt.codes);
        println!("  units {:?}", t.units);
        println!("  boundaries (ms) {:?}", t.boundary_times_ms(20));
    }
    let runs: usize = truth.utterances.iter().map(|u| u.boundaries.len() + 1).sum();
    println!(
        "{} frames in {runs} runs, mean run length {:.2}",
        corpus.total_frames(),
        corpus.total_frames() as f64 / runs as f64
    );
    Ok(())
}
