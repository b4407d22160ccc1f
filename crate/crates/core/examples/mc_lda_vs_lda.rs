//! Compares base LDA with Markov chain LDA on a synthetic corpus with sticky units.
//!
//! cargo run --release --example mc_lda_vs_lda -- [corpus_seed] [init_seed]

use std::time::Instant;

use mclda::{evaluate, sample_corpus, train, ModelConfig, ModelKind};

fn main() -> mclda::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer seed"));
    let corpus_seed = args.next().unwrap_or(2024);
    let init_seed = args.next().unwrap_or(0);
    let config = ModelConfig {
        num_units: 5,
        vocab_size: 50,
        ..ModelConfig::default()
    };
    let (corpus, truth) = sample_corpus(&config, 50, 100, corpus_seed)?;
    let alignments = truth.alignments(20).into_iter().map(|a| (a.utterance_id().to_string(), a)).collect();

    println!("model   iters  final_kl   conv   P      R      F1     Rval   pur    single  nmi");
    for kind in [ModelKind::Lda, ModelKind::McLda] {
        let t0 = Instant::now();
        let trained = train(&corpus, &config, kind, init_seed)?;
        let r = evaluate(&trained.units, &alignments, 20, 20)?;
        println!(
            "{:<7} {:>5}  {:>9.2e}  {:<5}  {:>5.1}  {:>5.1}  {:>5.1}  {:>5.1}  {:>5.1}  {:>6.1}  {:>5.1}   ({:.1?})",
            kind.name(),
            trained.trace.iterations(),
            trained.trace.final_max_kl(),
            trained.trace.converged,
            r.precision,
            r.recall,
            r.f1,
            r.r_value,
            r.purity,
            r.singleton_pct,
            r.nmi,
            t0.elapsed()
        );
    }
    Ok(())
}
